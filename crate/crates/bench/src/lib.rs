use criterion::{black_box, BatchSize, Criterion};
use nilcap_core::capability::PcModel;
use nilcap_core::collector::{FreeNilpotent, Strategy};
use nilcap_core::{build_group, GroupSpec, Variant, DEFAULT_BUDGET};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_word(rng: &mut ChaCha8Rng, rank: usize, len: usize) -> Vec<(usize, i64)> {
    (0..len).map(|_| (rng.gen_range(0..rank), rng.gen_range(-3..=3))).collect()
}

pub fn collection(c: &mut Criterion) {
    let mut group = c.benchmark_group("collection");
    for (rank, class) in [(2, 4), (3, 3), (2, 6)] {
        let f = FreeNilpotent::new(rank, class).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        group.bench_function(format!("letters r{rank} k{class}"), |b| {
            b.iter_batched(
                || random_word(&mut rng, rank, 12),
                |w| f.collect_letters(&w, Strategy::LeftmostFirst).unwrap(),
                BatchSize::SmallInput,
            )
        });
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        group.bench_function(format!("table r{rank} k{class}"), |b| {
            b.iter_batched(
                || random_word(&mut rng, rank, 12),
                |w| {
                    let mut x = f.identity();
                    for (t, e) in w {
                        f.mul_gen_pow(&mut x, t, e);
                    }
                    x
                },
                BatchSize::SmallInput,
            )
        });
    }
    group.finish();
}

pub fn multiplication(c: &mut Criterion) {
    let mut group = c.benchmark_group("mul");
    for (p, k, orders) in [(3u64, 3usize, vec![2u32, 2]), (5, 3, vec![1, 2, 2])] {
        let m = PcModel::new(p, k, &orders, Variant::Standard).unwrap();
        let pc = m.pc();
        let n = pc.order().unwrap_or(u64::MAX);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        group.bench_function(format!("pc p{p} k{k} {orders:?}"), |b| {
            b.iter_batched(
                || (pc.decode(rng.gen_range(0..n)), pc.decode(rng.gen_range(0..n))),
                |(x, y)| pc.mul(&x, &y),
                BatchSize::SmallInput,
            )
        });
    }
    group.finish();
}

pub fn centers(c: &mut Criterion) {
    let mut group = c.benchmark_group("center");
    group.sample_size(10);
    for (p, k, orders, variant) in [
        (3u64, 2usize, vec![1u32, 2], Variant::Standard),
        (2, 3, vec![2, 3], Variant::K3p2),
        (3, 3, vec![2, 2], Variant::Standard),
    ] {
        let g = build_group(&GroupSpec::nilprod(p, k, &orders).with_variant(variant), DEFAULT_BUDGET).unwrap();
        group.bench_function(format!("enumerated p{p} k{k} {orders:?}"), |b| b.iter(|| black_box(g.center().unwrap())));
        let m = PcModel::new(p, k, &orders, variant).unwrap();
        group.bench_function(format!("polycyclic p{p} k{k} {orders:?}"), |b| {
            b.iter(|| black_box(m.pc().center_mod(&m.pc().trivial_subgroup(), m.gens()).unwrap()))
        });
    }
    group.finish();
}
