use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Output, Stdio};
use std::time::{Duration, Instant};

use serde_json::{json, Value};

fn giml() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_giml"));
    c.env_remove("GIML_ASSET_ROOT");
    c
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

fn fixture(name: &str) -> PathBuf {
    fixtures().join(name)
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const CSVS: [&str; 5] = ["samples.csv", "events.csv", "aoi.csv", "fixations.csv", "saccades.csv"];

fn navigation_trace(dir: &Path) -> PathBuf {
    let mut text = String::from("t_ms,x,y,valid\n");
    for t in (0..4000).step_by(10) {
        let inside = t < 1600 || (2000..3600).contains(&t);
        let (x, y) = if inside { (300, 200) } else { (800, 700) };
        text.push_str(&format!("{t},{x},{y},1\n"));
    }
    let p = dir.join("trace.csv");
    std::fs::write(&p, text).unwrap();
    p
}

fn read_all(dir: &Path) -> Vec<Vec<u8>> {
    CSVS.iter().map(|f| std::fs::read(dir.join(f)).unwrap()).collect()
}

#[test]
fn validate_exit_codes() {
    let o = run(giml().arg("validate").arg(fixture("navigation.giml")));
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));

    let o = run(giml().arg("validate").arg(fixtures()));
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("summary: 12 file(s), 0 error(s)"), "{}", stdout(&o));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.giml");
    std::fs::write(&bad, "<settings><scenes>").unwrap();
    let o = run(giml().arg("validate").arg(&bad));
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("XML_MALFORMED"));

    let o = run(giml().arg("validate").arg(dir.path().join("missing.giml")));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn validate_json_lines() {
    let dir = tempfile::tempdir().unwrap();
    let doc = dir.path().join("dangling.giml");
    let text = std::fs::read_to_string(fixture("navigation.giml")).unwrap().replace("\"scene2\" />", "\"scene9\" />");
    std::fs::write(&doc, text).unwrap();
    let o = run(giml().args(["validate", "--format", "json"]).arg(&doc));
    assert_eq!(o.status.code(), Some(1));
    let lines: Vec<Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let errors: Vec<&Value> = lines.iter().filter(|v| v["severity"] == "error").collect();
    assert_eq!(errors.len(), 1);
    assert_eq!(errors[0]["code"], "DANGLING_SCENE_REF");
    assert_eq!(lines.last().unwrap()["summary"]["errors"], 1);
}

#[test]
fn resource_checks_follow_the_asset_root_variable() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(giml().arg("validate").arg(fixture("navigation.giml")).env("GIML_ASSET_ROOT", dir.path()));
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("RESOURCE_NOT_FOUND"));
}

#[test]
fn translate_and_inspect_agree() {
    let dir = tempfile::tempdir().unwrap();
    let src = fixture("state_texts.giml");
    let fr = dir.path().join("fr.giml");
    let o = run(giml().arg("translate").arg(&src).args(["--to", "fr", "-o"]).arg(&fr));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let a = stdout(&run(giml().arg("inspect").arg(&src)));
    let b = stdout(&run(giml().arg("inspect").arg(&fr)));
    assert!(a.starts_with("language: en\n") && b.starts_with("language: fr\n"));
    assert_eq!(a.split_once('\n').unwrap().1, b.split_once('\n').unwrap().1);

    let back = run(giml().arg("translate").arg(&fr).args(["--to", "en"]));
    assert_eq!(back.status.code(), Some(0));
    let original = std::fs::read_to_string(&src).unwrap();
    assert_eq!(stdout(&back), original);
}

#[test]
fn inspect_and_translate_refuse_broken_input() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.giml");
    std::fs::write(&bad, "<nope/>").unwrap();
    assert_eq!(run(giml().arg("inspect").arg(&bad)).status.code(), Some(1));
    assert_eq!(run(giml().arg("translate").arg(&bad).args(["--to", "de"])).status.code(), Some(1));
}

#[test]
fn keywords_dump() {
    let o = run(giml().arg("keywords"));
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("NAME_OF_DEFAULT_SCENE"));
}

#[test]
fn run_is_deterministic_and_follows_the_navigation() {
    let dir = tempfile::tempdir().unwrap();
    let trace = navigation_trace(dir.path());
    let mut outs = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let o = run(giml().arg("run").arg(fixture("navigation.giml")).arg(&trace).args(["--seed", "7", "--out-dir"]).arg(&out));
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).contains("seed: 7"));
        outs.push(read_all(&out));
    }
    assert_eq!(outs[0], outs[1]);
    let events = String::from_utf8(outs[0][1].clone()).unwrap();
    let scene2 = events.find("SceneEntered,scene2").unwrap();
    let back = events[scene2..].find("SceneEntered,scene1");
    assert!(back.is_some(), "{events}");
}

#[test]
fn run_prints_a_seed_when_none_is_given() {
    let dir = tempfile::tempdir().unwrap();
    let trace = navigation_trace(dir.path());
    let o = run(giml().arg("run").arg(fixture("navigation.giml")).arg(&trace).arg("--out-dir").arg(dir.path()));
    assert_eq!(o.status.code(), Some(0));
    let line = stdout(&o).lines().find(|l| l.starts_with("seed: ")).unwrap().to_string();
    assert!(line["seed: ".len()..].parse::<u64>().is_ok());
}

#[test]
fn empty_trace_gives_header_only_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("empty.csv");
    std::fs::write(&trace, "t_ms,x,y,valid\n").unwrap();
    let o = run(giml().arg("run").arg(fixture("navigation.giml")).arg(&trace).args(["--seed", "1", "--out-dir"]).arg(dir.path()));
    assert_eq!(o.status.code(), Some(0));
    for f in CSVS {
        let text = std::fs::read_to_string(dir.path().join(f)).unwrap();
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1, "{f}: {text}");
    }
}

#[test]
fn run_environment_failures() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(giml().arg("run").arg(fixture("navigation.giml")).arg(dir.path().join("none.csv")).arg("--out-dir").arg(dir.path()));
    assert_eq!(o.status.code(), Some(2));
    let o = run(giml().arg("run").arg(dir.path().join("none.giml")).arg("x.csv"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn run_refuses_invalid_documents_and_strict_missing_files() {
    let dir = tempfile::tempdir().unwrap();
    let trace = navigation_trace(dir.path());
    let bad = dir.path().join("bad.giml");
    let text = std::fs::read_to_string(fixture("navigation.giml")).unwrap().replace("nameOfDefaultScene=\"scene1\"", "nameOfDefaultScene=\"x\"");
    std::fs::write(&bad, text).unwrap();
    let o = run(giml().arg("run").arg(&bad).arg(&trace).arg("--out-dir").arg(dir.path()));
    assert_eq!(o.status.code(), Some(1));

    let assets = dir.path().join("assets");
    std::fs::create_dir(&assets).unwrap();
    let base = || {
        let mut c = giml();
        c.arg("run").arg(fixture("navigation.giml")).arg(&trace).arg("--out-dir").arg(dir.path()).arg("--asset-root").arg(&assets);
        c
    };
    assert_eq!(run(&mut base()).status.code(), Some(0));
    assert_eq!(run(base().arg("--strict")).status.code(), Some(1));
}

/// A running `giml serve` and the address it listens on.
struct Server {
    child: Child,
    addr: String,
}

impl Server {
    fn start(extra: &[&str], out_dir: &Path) -> Server {
        let mut child = giml()
            .arg("serve")
            .arg(fixture("navigation.giml"))
            .args(["--bind", "127.0.0.1:0", "--seed", "7", "--out-dir"])
            .arg(out_dir)
            .args(extra)
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .unwrap();
        let mut lines = BufReader::new(child.stdout.take().unwrap()).lines();
        let addr = loop {
            let line = lines.next().expect("server announces its address").unwrap();
            if let Some(a) = line.strip_prefix("listening on ") {
                break a.to_string();
            }
        };
        std::thread::spawn(move || for _ in lines {});
        Server { child, addr }
    }

    fn wait(mut self) -> i32 {
        let deadline = Instant::now() + Duration::from_secs(10);
        loop {
            if let Some(status) = self.child.try_wait().unwrap() {
                return status.code().unwrap_or(-1);
            }
            if Instant::now() > deadline {
                let _ = self.child.kill();
                panic!("server did not exit");
            }
            std::thread::sleep(Duration::from_millis(20));
        }
    }
}

#[test]
fn serve_with_client_clock_writes_what_run_writes() {
    let dir = tempfile::tempdir().unwrap();
    let trace = navigation_trace(dir.path());
    let run_dir = dir.path().join("run");
    let o = run(giml().arg("run").arg(fixture("navigation.giml")).arg(&trace).args(["--seed", "7", "--out-dir"]).arg(&run_dir));
    assert_eq!(o.status.code(), Some(0));

    let serve_dir = dir.path().join("serve");
    let server = Server::start(&["--client-clock"], &serve_dir);
    let stream = TcpStream::connect(&server.addr).unwrap();
    let mut writer = stream.try_clone().unwrap();
    let reader = BufReader::new(stream);
    for t in (0..4000).step_by(10) {
        let inside = t < 1600 || (2000..3600).contains(&t);
        let (x, y) = if inside { (300, 200) } else { (800, 700) };
        let m = json!({ "type": "input", "seq": t / 10, "body": { "t_ms": t, "x": x, "y": y, "valid": true } });
        writeln!(writer, "{m}").unwrap();
    }
    writeln!(writer, "{}", json!({ "type": "control", "body": { "action": "stop" } })).unwrap();
    let mut kinds = Vec::new();
    for line in reader.lines() {
        let m: Value = serde_json::from_str(&line.unwrap()).unwrap();
        kinds.push(m["type"].as_str().unwrap().to_string());
        if m["type"] == "bye" {
            break;
        }
    }
    assert_eq!(kinds[0], "hello");
    assert_eq!(server.wait(), 0);
    assert_eq!(read_all(&run_dir), read_all(&serve_dir));
    assert!(serve_dir.join("inputs.csv").is_file());
}

#[test]
fn serve_over_websocket_with_server_clock() {
    let dir = tempfile::tempdir().unwrap();
    let server = Server::start(&["--dwell-ms", "1000"], dir.path());
    let (mut ws, _) = tungstenite::connect(format!("ws://{}/", server.addr)).unwrap();
    if let tungstenite::stream::MaybeTlsStream::Plain(s) = ws.get_mut() {
        s.set_read_timeout(Some(Duration::from_millis(5))).unwrap();
    }
    let mut received: Vec<Value> = Vec::new();
    let drain = |ws: &mut tungstenite::WebSocket<_>, received: &mut Vec<Value>| loop {
        match ws.read() {
            Ok(tungstenite::Message::Text(t)) => received.push(serde_json::from_str(t.as_str()).unwrap()),
            Ok(_) => {}
            Err(tungstenite::Error::Io(e))
                if matches!(e.kind(), std::io::ErrorKind::WouldBlock | std::io::ErrorKind::TimedOut) =>
            {
                break
            }
            Err(_) => break,
        }
    };
    let start = Instant::now();
    let started = |r: &[Value]| r.iter().any(|m| m["type"] == "event" && m["body"]["kind"] == "ReactionStarted");
    while start.elapsed() < Duration::from_millis(3000) && !started(&received) {
        let m = json!({ "type": "input", "body": { "x": 300, "y": 200 } });
        ws.send(tungstenite::Message::text(m.to_string())).unwrap();
        drain(&mut ws, &mut received);
        std::thread::sleep(Duration::from_millis(20));
    }
    assert_eq!(received[0]["type"], "hello");
    assert_eq!(received[0]["body"]["dwell_ms"], 1000);
    assert!(started(&received), "no ReactionStarted within 3 s");

    ws.send(tungstenite::Message::text(json!({ "type": "key", "body": { "key": "Escape" } }).to_string())).unwrap();
    let deadline = Instant::now() + Duration::from_secs(3);
    while Instant::now() < deadline && !received.iter().any(|m| m["type"] == "bye") {
        drain(&mut ws, &mut received);
    }
    assert!(received.iter().any(|m| m["type"] == "bye"));
    drop(ws);
    assert_eq!(server.wait(), 0);
    let events = std::fs::read_to_string(dir.path().join("events.csv")).unwrap();
    assert!(events.contains("ReactionStarted,scene1,region1"), "{events}");
    assert!(events.contains("EngineStopped"));
}

#[test]
fn serve_reports_a_busy_address() {
    let taken = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = taken.local_addr().unwrap().to_string();
    let o = run(giml().arg("serve").arg(fixture("navigation.giml")).args(["--bind", &addr]));
    assert_eq!(o.status.code(), Some(2));
}
