use criterion::{criterion_group, criterion_main};

criterion_group!(benches, relayopt_bench::mechanism, relayopt_bench::conic_solver, relayopt_bench::optimizer);
criterion_main!(benches);
