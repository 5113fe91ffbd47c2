use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use giml_bench::{dwell_ticks, navigation, navigation_text, trace};
use giml_core::{detect_fixations, parse, replay, CallbackRegistry, Engine, EngineConfig, IdtParams};

fn parsing(c: &mut Criterion) {
    let text = navigation_text();
    c.bench_function("parse navigation", |b| b.iter(|| parse(black_box(text), None).unwrap()));
}

fn stepping(c: &mut Criterion) {
    let doc = navigation();
    let ticks = dwell_ticks(1000);
    c.bench_function("engine 1000 ticks", |b| {
        b.iter_batched(
            || Engine::start(&doc, EngineConfig::with_seed(1), CallbackRegistry::new()).unwrap().0,
            |mut engine| {
                for t in &ticks {
                    black_box(engine.step(t).unwrap());
                }
            },
            BatchSize::SmallInput,
        )
    });
    let samples = trace(600, 3);
    c.bench_function("replay 10 s trace", |b| {
        b.iter(|| replay(&doc, EngineConfig::with_seed(1), CallbackRegistry::new(), black_box(&samples)).unwrap())
    });
}

fn fixations(c: &mut Criterion) {
    let samples = trace(10_000, 7);
    c.bench_function("I-DT 10k samples", |b| {
        b.iter(|| detect_fixations(black_box(&samples), IdtParams::default()))
    });
}

criterion_group!(benches, parsing, stepping, fixations);
criterion_main!(benches);
