use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use arground_core::exec::map_indexed;
use arground_core::metrics::EvalPair;
use arground_core::schema::{ApiSchema, ArgumentMap, SlotKind, SlotSpec};
use arground_core::{classify_errors, evaluate_corpus, ErrorBreakdown, Execution};

const WORDS: [&str; 8] = [
    "john",
    "jessica",
    "3pm",
    "7:30 am",
    "monday",
    "purple",
    "true",
    "alexandria",
];

fn schema() -> ApiSchema {
    ApiSchema::new(
        "bench_api",
        "",
        vec![
            SlotSpec::new("name", SlotKind::FreeText, "").unwrap(),
            SlotSpec::new("time", SlotKind::Time, "").unwrap(),
            SlotSpec::new("city", SlotKind::FreeText, "").unwrap(),
            SlotSpec::categorical("stylist", "", &["jess", "jack"]).unwrap(),
        ],
    )
    .unwrap()
}

fn corpus(n: usize) -> Vec<EvalPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
    let keys = ["name", "time", "city", "stylist", "color"];
    (0..n)
        .map(|_| {
            let mut side = |with_foreign: bool| {
                let mut m = ArgumentMap::new();
                for k in &keys[..if with_foreign { 5 } else { 4 }] {
                    if rng.random_bool(0.7) {
                        m.insert(k, WORDS[rng.random_range(0..WORDS.len())]).unwrap();
                    }
                }
                m
            };
            let pred = side(true);
            (pred, side(false))
        })
        .collect()
}

fn breakdowns(pairs: &[EvalPair], schema: &ApiSchema, exec: Execution) -> Vec<ErrorBreakdown> {
    map_indexed(pairs, exec, |(p, g)| classify_errors(p, g, schema).unwrap())
}

fn bench(c: &mut Criterion) {
    let schema = schema();
    for n in [1_000, 20_000] {
        let pairs = corpus(n);
        let scored = breakdowns(&pairs, &schema, Execution::Sequential);

        let mut group = c.benchmark_group("classify");
        group.throughput(Throughput::Elements(n as u64));
        for exec in [Execution::Sequential, Execution::Parallel] {
            group.bench_with_input(BenchmarkId::new(format!("{exec:?}"), n), &pairs, |b, pairs| {
                b.iter(|| breakdowns(pairs, &schema, exec))
            });
        }
        group.finish();

        let mut group = c.benchmark_group("evaluate");
        group.throughput(Throughput::Elements(n as u64));
        for exec in [Execution::Sequential, Execution::Parallel] {
            group.bench_with_input(BenchmarkId::new(format!("{exec:?}"), n), &pairs, |b, pairs| {
                b.iter(|| evaluate_corpus(pairs, &scored, exec).unwrap())
            });
        }
        group.finish();
    }
}

criterion_group!(benches, bench);
criterion_main!(benches);
