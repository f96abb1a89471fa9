use chaining_core::dist::DistributionModel;
use chaining_core::gamma::{compute_gamma, Functional, GammaMode};
use chaining_core::metric::{IndexSet, NormOptions, ProcessMetric, ProcessSpec};
use chaining_core::stochlab::{estimate_sup, paley_zygmund_check, NonnegativeLaw, RngStream, SupTarget};
use chaining_core::verify::sphere_random;

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn estimates_are_bitwise_stable_across_worker_counts() {
    let proc = ProcessSpec::iid(DistributionModel::sym_exponential(), 6);
    let set = sphere_random(6, 12, RngStream::new(5, 5)).unwrap();
    let run = || estimate_sup(&proc, &set, 50_000, RngStream::new(77, 3), SupTarget::SupIncrements).unwrap();
    let one = in_pool(1, run);
    let eight = in_pool(8, run);
    assert_eq!(one, eight);
    assert_eq!(one.mean.to_bits(), eight.mean.to_bits());
    assert_eq!(one, run());
}

#[test]
fn adding_points_never_lowers_the_estimate() {
    // same stream ⇒ same coordinate draws; the sup over a superset is pathwise larger
    let proc = ProcessSpec::iid(DistributionModel::gaussian(), 4);
    let big = sphere_random(4, 10, RngStream::new(1, 1)).unwrap();
    for k in 1..=10 {
        let small = big.subset(&(0..k).collect::<Vec<_>>());
        let a = estimate_sup(&proc, &small, 10_000, RngStream::new(2, 0), SupTarget::SupIncrements).unwrap();
        let b = estimate_sup(&proc, &big, 10_000, RngStream::new(2, 0), SupTarget::SupIncrements).unwrap();
        assert!(a.mean <= b.mean);
        assert!(a.mean >= 0.0);
        assert_eq!(a.mean == 0.0, k == 1);
    }
}

#[test]
fn chaining_upper_bound_on_random_sets() {
    let models = [DistributionModel::gaussian(), DistributionModel::sym_exponential(), DistributionModel::rademacher()];
    let mut worst = 0.0f64;
    for (i, model) in models.iter().enumerate() {
        for j in 0..3u64 {
            let dim = 4 + 4 * j as usize;
            let proc = ProcessSpec::iid(model.clone(), dim);
            let set = sphere_random(dim, 8 + 8 * j as usize, RngStream::new(i as u64, j)).unwrap();
            let metric = ProcessMetric::new(proc.clone(), set.clone(), NormOptions::default()).unwrap();
            let cert = compute_gamma(&metric, Functional::GammaX, GammaMode::Greedy).unwrap().value;
            let e = estimate_sup(&proc, &set, 20_000, RngStream::new(9, j), SupTarget::SupIncrements).unwrap();
            worst = worst.max(e.mean / cert);
            assert!(e.mean <= 40.0 * cert + 3.0 * e.stderr);
        }
    }
    println!("largest E sup / certificate: {worst:.4}");
}

#[test]
fn paley_zygmund_two_point_law() {
    let r = paley_zygmund_check(&NonnegativeLaw::Discrete(vec![(0.0, 0.5), (2.0, 0.5)]), 0.5).unwrap();
    assert!(r.exact && r.pass);
    assert!((r.lhs - 0.5).abs() < 1e-15);
    assert!((r.rhs - 0.125).abs() < 1e-15);
}

#[test]
fn seeds_are_recorded() {
    let proc = ProcessSpec::iid(DistributionModel::gaussian(), 2);
    let e = estimate_sup(&proc, &IndexSet::basis(2).unwrap(), 500, RngStream::new(123, 456), SupTarget::SupAbs).unwrap();
    assert_eq!((e.seed, e.stream_id, e.samples), (123, 456, 500));
}
