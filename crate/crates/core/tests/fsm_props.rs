mod common;

use common::*;
use giml_core::corpus::CORPUS;
use giml_core::engine::EventKind;
use proptest::prelude::*;

fn corpus_doc(i: usize) -> giml_core::GimlDocument {
    doc_from(CORPUS[i % CORPUS.len()].1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn invariants_hold_on_random_gaze(doc_index in 0usize..64, seed in any::<u64>(), script_seed in any::<u64>()) {
        let doc = corpus_doc(doc_index);
        let segments = random_segments(&doc, script_seed, 600);
        if let Err(e) = checked_run(&doc, seed, &segments) {
            prop_assert!(false, "{}: {}", CORPUS[doc_index % CORPUS.len()].0, e);
        }
    }

    #[test]
    fn runs_are_deterministic(doc_index in 0usize..64, seed in any::<u64>(), script_seed in any::<u64>()) {
        let doc = corpus_doc(doc_index);
        let segments = random_segments(&doc, script_seed, 300);
        prop_assert_eq!(checked_run(&doc, seed, &segments), checked_run(&doc, seed, &segments));
    }

    #[test]
    fn continuous_dwell_is_exact(start in 0u64..200, dwell_ms in 0u64..3000) {
        let doc = fixture_doc("state_images.giml");
        let t0 = start * TICK;
        let mut config = giml_core::engine::EngineConfig::with_seed(0);
        config.dwell_ms = dwell_ms;
        let (_, events) = drive(&doc, config, &[(t0, OUTSIDE), (t0 + dwell_ms + 500, INSIDE)]);
        let started = of_kind(&events, EventKind::ReactionStarted);
        prop_assert_eq!(started.len(), 1);
        let t = started[0].t_ms;
        prop_assert!(t >= t0 + dwell_ms && t < t0 + dwell_ms + TICK, "started at {} for t0 {} dwell {}", t, t0, dwell_ms);
    }
}

#[test]
fn ten_thousand_tick_fuzz() {
    for (i, (name, text)) in CORPUS.iter().enumerate() {
        let doc = doc_from(text);
        let segments = random_segments(&doc, 1000 + i as u64, 10_000);
        checked_run(&doc, i as u64, &segments).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}
