//! A live session without any I/O. The caller feeds decoded client messages
//! and the current engine-clock time; the session answers with the messages
//! to send back and keeps the logs that end up in the output files.

use giml_core::engine::{CallbackRegistry, Engine, EngineConfig, EngineError, EngineEvent, GazePoint, InputTick};
use giml_core::replay::snap;
use giml_core::{GazeSample, GimlDocument, SampleRecord};

use crate::wire::{self, ClientMessage, Control, Message};

/// Which clock stamps incoming samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Clock {
    /// Samples are stamped with the engine time at arrival; ticks close as
    /// wall time passes.
    Server,
    /// Samples carry their own `t_ms`; ticks close only when a later sample
    /// arrives, exactly as an offline replay of the same samples.
    Client,
}

impl Clock {
    pub fn name(self) -> &'static str {
        match self {
            Clock::Server => "server",
            Clock::Client => "trace",
        }
    }
}

/// One client input as received, with both clocks.
#[derive(Debug, Clone, PartialEq)]
pub struct InputLog {
    pub engine_t_ms: f64,
    pub client_t_ms: Option<f64>,
    pub kind: &'static str,
    pub x: Option<f64>,
    pub y: Option<f64>,
    pub valid: Option<bool>,
    pub key: Option<String>,
}

pub struct Session {
    engine: Engine,
    document: GimlDocument,
    clock: Clock,
    tick_ms: u64,
    seq: u64,
    /// Start of the tick currently collecting input.
    open_tick: Option<u64>,
    held: Option<GazePoint>,
    keys: Vec<String>,
    /// Client time of the latest sample (client clock only).
    last_client_t: Option<f64>,
    start_events: Vec<EngineEvent>,
    stepped: bool,
    events: Vec<EngineEvent>,
    records: Vec<SampleRecord>,
    inputs: Vec<InputLog>,
    greeted: bool,
    last_frame_sent: Option<u64>,
    finished: bool,
    failure: Option<String>,
}

impl Session {
    pub fn new(doc: &GimlDocument, config: EngineConfig, clock: Clock) -> Result<Session, EngineError> {
        let tick_ms = config.tick_ms.max(1);
        let (engine, start_events) = Engine::start(doc, config, CallbackRegistry::new())?;
        let document = engine.document().clone();
        Ok(Session {
            engine,
            document,
            clock,
            tick_ms,
            seq: 0,
            open_tick: (clock == Clock::Server).then_some(0),
            held: None,
            keys: Vec::new(),
            last_client_t: None,
            start_events,
            stepped: false,
            events: Vec::new(),
            records: Vec::new(),
            inputs: Vec::new(),
            greeted: false,
            last_frame_sent: None,
            finished: false,
            failure: None,
        })
    }

    pub fn clock(&self) -> Clock {
        self.clock
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    /// The document after template merging.
    pub fn document(&self) -> &GimlDocument {
        &self.document
    }

    pub fn events(&self) -> &[EngineEvent] {
        &self.events
    }

    pub fn records(&self) -> &[SampleRecord] {
        &self.records
    }

    pub fn inputs(&self) -> &[InputLog] {
        &self.inputs
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    pub fn failure(&self) -> Option<&str> {
        self.failure.as_deref()
    }

    fn emit(&mut self, out: &mut Vec<Message>, mut m: Message) {
        self.seq += 1;
        m.seq = self.seq;
        out.push(m);
    }

    fn emit_frame(&mut self, out: &mut Vec<Message>, force: bool) {
        let seq = self.engine.current_frame().frame_seq;
        if force || self.last_frame_sent != Some(seq) {
            let m = wire::frame(self.engine.current_frame());
            self.last_frame_sent = Some(seq);
            self.emit(out, m);
        }
    }

    /// Messages for a newly connected client: hello, the document summary,
    /// then the latest frame. The first client also sees the start events.
    pub fn greet(&mut self) -> Vec<Message> {
        let mut out = Vec::new();
        let cfg = self.engine.config();
        let h = &self.document.scenes_header;
        let hello = wire::hello(
            (h.original_screen_size_x, h.original_screen_size_y),
            cfg.dwell_ms,
            cfg.tick_ms,
            cfg.seed,
            self.clock.name(),
        );
        self.emit(&mut out, hello);
        let summary = wire::document_summary(&self.document);
        self.emit(&mut out, summary);
        if !self.greeted {
            self.greeted = true;
            for e in self.start_events.clone() {
                self.emit(&mut out, wire::event(&e));
            }
        }
        self.emit_frame(&mut out, true);
        out
    }

    /// Handles one client message received at engine time `now_ms`.
    pub fn handle(&mut self, m: &Message, now_ms: u64) -> Vec<Message> {
        let mut out = Vec::new();
        let parsed = match ClientMessage::from_message(m) {
            Ok(p) => p,
            Err(e) => {
                self.emit(&mut out, wire::error(e));
                return out;
            }
        };
        if self.finished {
            if !matches!(parsed, ClientMessage::Bye) {
                self.emit(&mut out, wire::error("the session has ended"));
            }
            return out;
        }
        match parsed {
            ClientMessage::Hello => return self.greet(),
            ClientMessage::Bye => return self.stop(),
            ClientMessage::Control(Control::Stop) => return self.stop(),
            ClientMessage::Control(Control::Pause) => self.key(&mut out, None, "Pause".into(), now_ms),
            ClientMessage::Key { t_ms, key } => self.key(&mut out, t_ms, key, now_ms),
            ClientMessage::Input { t_ms, x, y, valid, key } => self.input(&mut out, t_ms, x, y, valid, key, now_ms),
        }
        if self.finished {
            self.finish_messages(&mut out);
        }
        out
    }

    /// An error reply for text that did not decode as a message.
    pub fn reject(&mut self, reason: String) -> Vec<Message> {
        let mut out = Vec::new();
        self.emit(&mut out, wire::error(reason));
        out
    }

    /// Closes every tick that ended before `now_ms` (server clock only).
    pub fn advance(&mut self, now_ms: u64) -> Vec<Message> {
        let mut out = Vec::new();
        if self.clock == Clock::Server && !self.finished {
            let current = snap(now_ms as f64, self.tick_ms);
            if current >= self.tick_ms {
                self.close_through(&mut out, current - self.tick_ms);
            }
            if self.finished {
                self.finish_messages(&mut out);
            }
        }
        out
    }

    /// Ends the run: steps the open tick, stops the engine, says bye.
    pub fn stop(&mut self) -> Vec<Message> {
        let mut out = Vec::new();
        if self.finished {
            return out;
        }
        if let Some(open) = self.open_tick {
            self.close_through(&mut out, open);
            if !self.finished {
                let ev = self.engine.stop(open);
                self.commit(&mut out, ev);
            }
        }
        self.finished = true;
        self.finish_messages(&mut out);
        out
    }

    fn finish_messages(&mut self, out: &mut Vec<Message>) {
        self.emit_frame(out, false);
        if let Some(f) = self.failure.clone() {
            self.emit(out, wire::error(f));
        }
        let reason = if self.failure.is_some() { "failed" } else { "stopped" };
        self.emit(out, wire::bye(reason));
    }

    fn commit(&mut self, out: &mut Vec<Message>, events: Vec<EngineEvent>) {
        for e in &events {
            let m = wire::event(e);
            self.emit(out, m);
        }
        self.events.extend(events);
        self.emit_frame(out, false);
    }

    /// Steps every open tick up to and including `last`.
    fn close_through(&mut self, out: &mut Vec<Message>, last: u64) {
        while let Some(t) = self.open_tick.filter(|&t| t <= last) {
            if !self.stepped {
                self.stepped = true;
                self.events.append(&mut self.start_events.clone());
            }
            let input = InputTick { t_ms: t, gaze: self.held, keys: std::mem::take(&mut self.keys) };
            match self.engine.step(&input) {
                Ok(ev) => self.commit(out, ev),
                Err(e) => {
                    self.failure = Some(e.to_string());
                    self.finished = true;
                    self.open_tick = None;
                    return;
                }
            }
            if self.engine.is_stopped() {
                self.finished = true;
                self.open_tick = None;
                return;
            }
            self.open_tick = Some(t + self.tick_ms);
        }
    }

    /// Resolves the engine time of an input and closes the ticks before it.
    /// `None` means the input was rejected or the run ended.
    fn place(&mut self, out: &mut Vec<Message>, client_t: Option<f64>, now_ms: u64) -> Option<f64> {
        let t = match (self.clock, client_t) {
            (Clock::Server, _) => now_ms as f64,
            (Clock::Client, Some(t)) if t.is_finite() && t >= 0.0 => t,
            (Clock::Client, Some(_)) => {
                self.emit(out, wire::error("t_ms must be a finite, non-negative number"));
                return None;
            }
            (Clock::Client, None) => match self.last_client_t {
                Some(t) => t,
                None => {
                    self.emit(out, wire::error("t_ms is required before the first timed input"));
                    return None;
                }
            },
        };
        if self.clock == Clock::Client {
            if self.last_client_t.is_some_and(|prev| t < prev) {
                self.emit(out, wire::error(format!("t_ms {t} goes back in time")));
                return None;
            }
            self.last_client_t = Some(t);
        }
        let tick = snap(t, self.tick_ms);
        match self.open_tick {
            Some(open) if tick > open => self.close_through(out, tick - self.tick_ms),
            Some(_) => {}
            None => self.open_tick = Some(tick),
        }
        (!self.finished).then_some(t)
    }

    fn key(&mut self, out: &mut Vec<Message>, client_t: Option<f64>, key: String, now_ms: u64) {
        let Some(t) = self.place(out, client_t, now_ms) else { return };
        self.inputs.push(InputLog {
            engine_t_ms: t,
            client_t_ms: client_t,
            kind: "key",
            x: None,
            y: None,
            valid: None,
            key: Some(key.clone()),
        });
        self.keys.push(key);
    }

    #[allow(clippy::too_many_arguments)]
    fn input(
        &mut self,
        out: &mut Vec<Message>,
        client_t: Option<f64>,
        x: f64,
        y: f64,
        valid: bool,
        key: Option<String>,
        now_ms: u64,
    ) {
        if self.clock == Clock::Client && client_t.is_none() {
            self.emit(out, wire::error("input needs t_ms in client-clock mode"));
            return;
        }
        let Some(t) = self.place(out, client_t, now_ms) else { return };
        self.inputs.push(InputLog {
            engine_t_ms: t,
            client_t_ms: client_t,
            kind: "input",
            x: Some(x),
            y: Some(y),
            valid: Some(valid),
            key: key.clone(),
        });
        let sample = GazeSample { t_ms: t, x, y, valid, pupil: None, key: key.clone() };
        let hits = if valid { self.engine.hits_at((x, y)) } else { Vec::new() };
        self.records.push(SampleRecord { sample, scene: self.engine.current_scene().to_string(), hits });
        self.held = valid.then(|| GazePoint::new(x, y));
        self.keys.extend(key);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use giml_core::corpus::fixture;
    use serde_json::json;

    fn session(clock: Clock) -> Session {
        let (doc, _) = giml_core::parse(fixture("navigation.giml").unwrap(), None).unwrap();
        Session::new(&doc, EngineConfig::with_seed(1), clock).unwrap()
    }

    fn input(t: f64, x: f64, y: f64) -> Message {
        Message::new("input", json!({ "t_ms": t, "x": x, "y": y }))
    }

    #[test]
    fn seq_is_monotone() {
        let mut s = session(Clock::Client);
        let mut all = s.greet();
        for i in 0..50 {
            all.extend(s.handle(&input(f64::from(i) * 30.0, 300.0, 200.0), 0));
        }
        all.extend(s.stop());
        assert!(all.windows(2).all(|w| w[0].seq < w[1].seq));
        assert_eq!(all.last().unwrap().kind, "bye");
    }

    #[test]
    fn client_clock_rejects_time_travel() {
        let mut s = session(Clock::Client);
        s.handle(&input(100.0, 1.0, 1.0), 0);
        let out = s.handle(&input(50.0, 1.0, 1.0), 0);
        assert_eq!(out[0].kind, "error");
        assert_eq!(s.records().len(), 1);
    }

    #[test]
    fn server_clock_runs_without_input() {
        let mut s = session(Clock::Server);
        s.greet();
        s.advance(55);
        assert_eq!(s.engine().t_ms(), 40);
        let out = s.handle(&input(9999.0, 1.0, 1.0), 57);
        assert!(out.iter().all(|m| m.kind != "error"));
        assert_eq!(s.inputs()[0].engine_t_ms, 57.0);
        assert_eq!(s.inputs()[0].client_t_ms, Some(9999.0));
    }
}
