use criterion::{criterion_group, criterion_main};

criterion_group!(benches, nilcap_bench::collection, nilcap_bench::multiplication, nilcap_bench::centers);
criterion_main!(benches);
