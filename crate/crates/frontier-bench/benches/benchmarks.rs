use criterion::{criterion_group, criterion_main, Criterion};
use frontier_core::{validate_reaction, ReactionSpec};

fn bench_min_speed(c: &mut Criterion) {
    let f = validate_reaction(ReactionSpec::Cubic { a: 0.3 }).unwrap();
    c.bench_function("min_speed cubic a=0.3", |b| {
        b.iter(|| frontier_core::min_speed(&f).unwrap())
    });
}

criterion_group!(benches, bench_min_speed);
criterion_main!(benches);
