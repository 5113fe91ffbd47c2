use giml_cli::outputs::{write_run, RunData, AOI, EVENTS, FIXATIONS, SACCADES, SAMPLES};
use giml_cli::{Clock, Message, Session};
use giml_core::corpus::fixture;
use giml_core::gaze::RunHeader;
use giml_core::{parse, replay, CallbackRegistry, EngineConfig, GazeSample, GimlDocument, IdtParams};
use proptest::prelude::*;
use serde_json::json;

fn navigation() -> GimlDocument {
    parse(fixture("navigation.giml").unwrap(), None).unwrap().0
}

fn config(seed: u64, dwell_ms: u64) -> EngineConfig {
    EngineConfig { dwell_ms, ..EngineConfig::with_seed(seed) }
}

fn input(t: f64, x: f64, y: f64) -> Message {
    Message::new("input", json!({ "t_ms": t, "x": x, "y": y }))
}

fn event_kinds(msgs: &[Message]) -> Vec<String> {
    msgs.iter().filter(|m| m.kind == "event").map(|m| m.body["kind"].as_str().unwrap().to_string()).collect()
}

#[test]
fn dwell_of_1200_ms_starts_a_reaction() {
    let mut s = Session::new(&navigation(), config(1, 1000), Clock::Client).unwrap();
    let mut msgs = s.greet();
    for t in (0..=1200).step_by(20) {
        msgs.extend(s.handle(&input(f64::from(t), 300.0, 200.0), 0));
    }
    let started: Vec<&Message> =
        msgs.iter().filter(|m| m.kind == "event" && m.body["kind"] == "ReactionStarted").collect();
    assert_eq!(started.len(), 1);
    assert_eq!(started[0].body["t_ms"], 1000);
    assert_eq!(started[0].body["region"], "region1");
}

#[test]
fn server_clock_dwell_starts_a_reaction() {
    let mut s = Session::new(&navigation(), config(1, 1000), Clock::Server).unwrap();
    let mut msgs = s.greet();
    for now in (0..=1200).step_by(15) {
        msgs.extend(s.advance(now));
        msgs.extend(s.handle(&Message::new("input", json!({ "x": 300, "y": 200 })), now));
    }
    assert!(event_kinds(&msgs).contains(&"ReactionStarted".to_string()));
}

#[test]
fn hello_comes_first_and_echoes_dwell() {
    let mut s = Session::new(&navigation(), config(3, 750), Clock::Server).unwrap();
    let msgs = s.greet();
    assert_eq!(msgs[0].kind, "hello");
    assert_eq!(msgs[0].body["dwell_ms"], 750);
    assert_eq!(msgs[0].body["protocol_version"], 1);
    assert_eq!(msgs[0].body["screen"], json!({ "width": 1024, "height": 768 }));
    assert_eq!(msgs[1].kind, "document_summary");
    assert_eq!(msgs.last().unwrap().kind, "frame");
}

#[test]
fn stop_says_bye_then_logs_can_be_written() {
    let mut s = Session::new(&navigation(), config(1, 1000), Clock::Client).unwrap();
    s.greet();
    s.handle(&input(0.0, 300.0, 200.0), 0);
    s.handle(&input(500.0, 300.0, 200.0), 0);
    let msgs = s.handle(&Message::new("control", json!({ "action": "stop" })), 0);
    assert_eq!(msgs.last().unwrap().kind, "bye");
    assert_eq!(event_kinds(&msgs).last().map(String::as_str), Some("EngineStopped"));
    assert!(s.is_finished());
    let after = s.handle(&input(600.0, 1.0, 1.0), 0);
    assert_eq!(after[0].kind, "error");

    let dir = tempfile::tempdir().unwrap();
    let header = RunHeader {
        document: "navigation.giml".into(),
        seed: 1,
        dwell_ms: 1000,
        tick_ms: 10,
        clock: "trace".into(),
        incomplete: None,
    };
    let data = RunData { document: s.document(), events: s.events(), records: s.records() };
    let paths = write_run(dir.path(), &header, &data, IdtParams::default()).unwrap();
    assert_eq!(paths.len(), 5);
    let events = std::fs::read_to_string(dir.path().join(EVENTS)).unwrap();
    assert!(events.contains("500,EngineStopped,scene1,,"), "{events}");
}

#[test]
fn unknown_messages_get_an_error_and_the_session_continues() {
    let mut s = Session::new(&navigation(), config(1, 1000), Clock::Client).unwrap();
    s.greet();
    for bad in [
        Message::new("teleport", json!({})),
        Message::new("input", json!({ "x": "left" })),
        Message::new("control", json!({ "action": "rewind" })),
        Message::new("input", json!({ "x": 1, "y": 2 })),
    ] {
        let out = s.handle(&bad, 0);
        assert_eq!(out.len(), 1, "{bad:?}");
        assert_eq!(out[0].kind, "error");
    }
    let undecodable = s.reject("undecodable message".into());
    assert_eq!(undecodable[0].kind, "error");
    assert!(s.handle(&input(0.0, 300.0, 200.0), 0).iter().all(|m| m.kind != "error"));
    assert_eq!(s.records().len(), 1);
}

#[test]
fn frames_are_monotone_and_a_new_client_gets_the_latest() {
    let mut s = Session::new(&navigation(), config(1, 1000), Clock::Client).unwrap();
    let mut msgs = s.greet();
    for t in (0..3000).step_by(10) {
        let p = if (1500..2000).contains(&t) { (800.0, 700.0) } else { (300.0, 200.0) };
        msgs.extend(s.handle(&input(f64::from(t), p.0, p.1), 0));
    }
    let seqs: Vec<u64> =
        msgs.iter().filter(|m| m.kind == "frame").map(|m| m.body["frame_seq"].as_u64().unwrap()).collect();
    assert!(seqs.len() > 3);
    assert!(seqs.windows(2).all(|w| w[0] < w[1]), "{seqs:?}");
    let again = s.greet();
    let last = again.iter().rfind(|m| m.kind == "frame").unwrap();
    assert_eq!(last.body["frame_seq"].as_u64(), Some(s.engine().current_frame().frame_seq));
    assert!(event_kinds(&again).is_empty());
}

const PAUSABLE: &str = r#"<settings>
  <scenes nameOfDefaultScene="main" nameOfPauseScene="paused" originalScreenSizeX="800" originalScreenSizeY="600">
    <scene name="main">
      <region name="r" locationOfCenterX="100" locationOfCenterY="100" sizeX="50" sizeY="50"/>
    </scene>
    <scene name="paused"/>
  </scenes>
</settings>"#;

#[test]
fn pause_goes_to_the_pause_scene() {
    let (doc, _) = parse(PAUSABLE, None).unwrap();
    let mut s = Session::new(&doc, config(1, 1000), Clock::Client).unwrap();
    s.greet();
    s.handle(&input(0.0, 1.0, 1.0), 0);
    let mut msgs = s.handle(&Message::new("control", json!({ "action": "pause" })), 0);
    msgs.extend(s.handle(&input(10.0, 1.0, 1.0), 0));
    let entered: Vec<&Message> =
        msgs.iter().filter(|m| m.kind == "event" && m.body["kind"] == "SceneEntered").collect();
    assert_eq!(entered.len(), 1);
    assert_eq!(entered[0].body["scene"], "paused");
    assert_eq!(s.engine().current_scene(), "paused");
}

/// CSV bytes of every output file, in a fixed order.
fn csv_bytes(dir: &std::path::Path) -> Vec<Vec<u8>> {
    [SAMPLES, EVENTS, AOI, FIXATIONS, SACCADES].iter().map(|f| std::fs::read(dir.join(f)).unwrap()).collect()
}

fn run_and_serve_outputs(samples: &[GazeSample], seed: u64) -> (Vec<Vec<u8>>, Vec<Vec<u8>>) {
    let doc = navigation();
    let header = RunHeader {
        document: "navigation.giml".into(),
        seed,
        dwell_ms: 1000,
        tick_ms: 10,
        clock: Clock::Client.name().into(),
        incomplete: None,
    };
    let run_dir = tempfile::tempdir().unwrap();
    let out = replay(&doc, config(seed, 1000), CallbackRegistry::new(), samples).unwrap();
    let data = RunData { document: &out.document, events: &out.events, records: &out.records };
    write_run(run_dir.path(), &header, &data, IdtParams::default()).unwrap();

    let serve_dir = tempfile::tempdir().unwrap();
    let mut s = Session::new(&doc, config(seed, 1000), Clock::Client).unwrap();
    s.greet();
    for smp in samples {
        let mut body = json!({ "t_ms": smp.t_ms, "x": smp.x, "y": smp.y, "valid": smp.valid });
        if let Some(k) = &smp.key {
            body["key"] = json!(k);
        }
        s.handle(&Message::new("input", body), 0);
    }
    s.stop();
    let data = RunData { document: s.document(), events: s.events(), records: s.records() };
    write_run(serve_dir.path(), &header, &data, IdtParams::default()).unwrap();
    (csv_bytes(run_dir.path()), csv_bytes(serve_dir.path()))
}

fn sample_strategy() -> impl Strategy<Value = Vec<GazeSample>> {
    let step = (
        1u32..40,
        prop_oneof![
            6 => Just(Some((300.0, 200.0))),
            3 => Just(Some((800.0, 700.0))),
            1 => Just(None),
        ],
        prop_oneof![40 => Just(None), 1 => Just(Some("Escape".to_string()))],
    );
    prop::collection::vec(step, 0..400).prop_map(|steps| {
        let mut t = 0.0;
        steps
            .into_iter()
            .map(|(dt, p, key)| {
                t += f64::from(dt);
                let mut s = match p {
                    Some((x, y)) => GazeSample::new(t, x, y),
                    None => GazeSample::invalid(t),
                };
                s.key = key;
                s
            })
            .collect()
    })
}

#[test]
fn serve_matches_run_on_the_navigation_script() {
    let mut samples = Vec::new();
    for t in (0..4000).step_by(10) {
        let inside = t < 1600 || (2000..3600).contains(&t);
        let (x, y) = if inside { (300.0, 200.0) } else { (800.0, 700.0) };
        samples.push(GazeSample::new(f64::from(t), x, y));
    }
    let (run, serve) = run_and_serve_outputs(&samples, 7);
    assert_eq!(run, serve);
    let events = String::from_utf8(run[1].clone()).unwrap();
    assert!(events.contains("SceneEntered,scene2"));
}

#[test]
fn empty_input_gives_header_only_logs_in_both() {
    let (run, serve) = run_and_serve_outputs(&[], 1);
    assert_eq!(run, serve);
    let events = String::from_utf8(run[1].clone()).unwrap();
    assert_eq!(events.lines().filter(|l| !l.starts_with('#')).count(), 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn serve_matches_run(samples in sample_strategy(), seed in 0u64..1000) {
        let (run, serve) = run_and_serve_outputs(&samples, seed);
        prop_assert_eq!(run, serve);
    }
}
