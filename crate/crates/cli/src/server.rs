//! Socket front end for a [`Session`]. The engine runs on its own thread and
//! talks to the connection through two channels; it never waits on the
//! network. Clients speak either newline-delimited JSON over plain TCP or the
//! same messages as web-socket text frames (detected by a leading `GET `).

use std::io::{self, BufRead, BufReader, ErrorKind, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::thread;
use std::time::{Duration, Instant};

use tungstenite::WebSocket;

use crate::session::Session;
use crate::wire::Message;

const POLL: Duration = Duration::from_millis(5);

enum Inbound {
    Connected(Sender<Outbound>),
    Text(String),
    Disconnected,
}

enum Outbound {
    Text(String),
    Close,
}

/// Engine time that only runs while a client is connected.
struct PausableClock {
    banked: Duration,
    since: Option<Instant>,
}

impl PausableClock {
    fn now_ms(&self) -> u64 {
        let running = self.since.map(|s| s.elapsed()).unwrap_or_default();
        (self.banked + running).as_millis() as u64
    }

    fn resume(&mut self) {
        self.since.get_or_insert_with(Instant::now);
    }

    fn pause(&mut self) {
        if let Some(s) = self.since.take() {
            self.banked += s.elapsed();
        }
    }
}

fn engine_loop(mut session: Session, rx: Receiver<Inbound>, tick: Duration) -> Session {
    let mut clock = PausableClock { banked: Duration::ZERO, since: None };
    let mut out: Option<Sender<Outbound>> = None;
    let send = |out: &Option<Sender<Outbound>>, msgs: Vec<Message>| {
        if let Some(tx) = out {
            for m in msgs {
                let _ = tx.send(Outbound::Text(m.encode()));
            }
        }
    };
    loop {
        match rx.recv_timeout(tick) {
            Ok(Inbound::Connected(tx)) => {
                clock.resume();
                out = Some(tx);
                send(&out, session.greet());
            }
            Ok(Inbound::Text(text)) => {
                let now = clock.now_ms();
                send(&out, session.advance(now));
                let reply = match Message::decode(&text) {
                    Ok(m) => session.handle(&m, now),
                    Err(e) => session.reject(e),
                };
                send(&out, reply);
            }
            Ok(Inbound::Disconnected) => {
                out = None;
                clock.pause();
            }
            Err(RecvTimeoutError::Timeout) => {}
            Err(RecvTimeoutError::Disconnected) => {
                session.stop();
                break;
            }
        }
        if out.is_some() {
            send(&out, session.advance(clock.now_ms()));
        }
        if session.is_finished() {
            if let Some(tx) = &out {
                let _ = tx.send(Outbound::Close);
            }
            break;
        }
    }
    session
}

trait Transport {
    /// `Ok(None)` when nothing arrived within the poll interval.
    fn recv(&mut self) -> io::Result<Option<String>>;
    fn send(&mut self, text: &str) -> io::Result<()>;
    fn close(&mut self);
}

struct LineTransport {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
    pending: Vec<u8>,
}

impl Transport for LineTransport {
    fn recv(&mut self) -> io::Result<Option<String>> {
        loop {
            match self.reader.read_until(b'\n', &mut self.pending) {
                Ok(0) => return Err(ErrorKind::UnexpectedEof.into()),
                Ok(_) if self.pending.ends_with(b"\n") => {
                    let line = String::from_utf8_lossy(&self.pending).trim().to_string();
                    self.pending.clear();
                    if line.is_empty() {
                        continue;
                    }
                    return Ok(Some(line));
                }
                Ok(_) => return Err(ErrorKind::UnexpectedEof.into()),
                Err(e) if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut) => return Ok(None),
                Err(e) if e.kind() == ErrorKind::Interrupted => continue,
                Err(e) => return Err(e),
            }
        }
    }

    fn send(&mut self, text: &str) -> io::Result<()> {
        self.writer.write_all(text.as_bytes())?;
        self.writer.write_all(b"\n")?;
        self.writer.flush()
    }

    fn close(&mut self) {
        let _ = self.writer.shutdown(std::net::Shutdown::Both);
    }
}

struct WsTransport {
    ws: WebSocket<TcpStream>,
}

impl Transport for WsTransport {
    fn recv(&mut self) -> io::Result<Option<String>> {
        match self.ws.read() {
            Ok(tungstenite::Message::Text(t)) => Ok(Some(t.as_str().to_string())),
            Ok(tungstenite::Message::Binary(b)) => Ok(Some(String::from_utf8_lossy(&b).into_owned())),
            Ok(tungstenite::Message::Close(_)) => Err(ErrorKind::ConnectionAborted.into()),
            Ok(_) => Ok(None),
            Err(tungstenite::Error::Io(e)) if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut) => Ok(None),
            Err(tungstenite::Error::Io(e)) => Err(e),
            Err(e) => Err(io::Error::other(e)),
        }
    }

    fn send(&mut self, text: &str) -> io::Result<()> {
        self.ws.send(tungstenite::Message::text(text)).map_err(|e| match e {
            tungstenite::Error::Io(e) => e,
            other => io::Error::other(other),
        })
    }

    fn close(&mut self) {
        let _ = self.ws.close(None);
        let _ = self.ws.flush();
    }
}

/// Waits briefly for the first bytes; web-socket clients open with an HTTP
/// request, line clients may wait for the server to speak first.
fn is_websocket(stream: &TcpStream) -> io::Result<bool> {
    stream.set_read_timeout(Some(Duration::from_millis(20)))?;
    let deadline = Instant::now() + Duration::from_millis(300);
    let mut buf = [0u8; 4];
    loop {
        match stream.peek(&mut buf) {
            Ok(0) => return Ok(false),
            Ok(n) if n >= 4 => return Ok(&buf == b"GET "),
            Ok(_) => {}
            Err(e) if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut) => {}
            Err(e) => return Err(e),
        }
        if Instant::now() >= deadline {
            return Ok(false);
        }
        thread::sleep(POLL);
    }
}

fn open(stream: TcpStream) -> io::Result<Box<dyn Transport>> {
    stream.set_nonblocking(false)?;
    stream.set_nodelay(true)?;
    if is_websocket(&stream)? {
        stream.set_read_timeout(None)?;
        let ws = tungstenite::accept(stream).map_err(|e| io::Error::other(e.to_string()))?;
        ws.get_ref().set_read_timeout(Some(POLL))?;
        Ok(Box::new(WsTransport { ws }))
    } else {
        stream.set_read_timeout(Some(POLL))?;
        let writer = stream.try_clone()?;
        Ok(Box::new(LineTransport { reader: BufReader::new(stream), writer, pending: Vec::new() }))
    }
}

/// Pumps one connection until the client leaves (`false`) or the session
/// closes it (`true`).
fn pump(mut t: Box<dyn Transport>, to_engine: &Sender<Inbound>, from_engine: &Receiver<Outbound>) -> bool {
    loop {
        loop {
            match from_engine.try_recv() {
                Ok(Outbound::Text(text)) => {
                    if t.send(&text).is_err() {
                        return false;
                    }
                }
                Ok(Outbound::Close) | Err(mpsc::TryRecvError::Disconnected) => {
                    t.close();
                    return true;
                }
                Err(mpsc::TryRecvError::Empty) => break,
            }
        }
        match t.recv() {
            Ok(Some(text)) => {
                if to_engine.send(Inbound::Text(text)).is_err() {
                    return true;
                }
            }
            Ok(None) => {}
            Err(_) => return false,
        }
    }
}

/// Serves one session on `listener` until it ends, then hands the session
/// back so its logs can be written. Clients are taken one at a time; a
/// client that drops pauses the engine clock until the next one connects.
pub fn serve(listener: TcpListener, session: Session, tick_ms: u64) -> io::Result<Session> {
    let (to_engine, inbox) = mpsc::channel();
    let tick = Duration::from_millis(tick_ms.max(1));
    let engine = thread::spawn(move || engine_loop(session, inbox, tick));
    listener.set_nonblocking(true)?;
    while !engine.is_finished() {
        let stream = match listener.accept() {
            Ok((s, _)) => s,
            Err(e) if e.kind() == ErrorKind::WouldBlock => {
                thread::sleep(POLL);
                continue;
            }
            Err(e) => return Err(e),
        };
        let transport = match open(stream) {
            Ok(t) => t,
            Err(_) => continue,
        };
        let (out_tx, out_rx) = mpsc::channel();
        if to_engine.send(Inbound::Connected(out_tx)).is_err() {
            break;
        }
        if pump(transport, &to_engine, &out_rx) {
            break;
        }
        let _ = to_engine.send(Inbound::Disconnected);
    }
    drop(to_engine);
    engine.join().map_err(|_| io::Error::other("engine thread panicked"))
}

