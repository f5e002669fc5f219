use transframe::haar::{atom, cell_indices, unconditionality_constant};
use transframe::probe::{lp_equivalence_estimate, random_step, unconditionality_estimate, Distribution, ProbeConfig};
use transframe::stepfn::{Interval, StepFunction};

fn disjoint_normalized(p: f64, count: i64) -> Vec<StepFunction> {
    // c^{-1/p} χ on [2k, 2k+c) with c = k+1
    (0..count)
        .map(|k| {
            let len = k + 1;
            let iv = Interval::ints(2 * k * k, 2 * k * k + len).unwrap();
            StepFunction::constant_on(&iv, (len as f64).powf(-1.0 / p))
        })
        .collect()
}

#[test]
fn disjoint_generators_are_isometric() {
    for dist in [Distribution::Signs, Distribution::Gaussianish, Distribution::Sparse] {
        let cfg = ProbeConfig::new(17, 300).with_distribution(dist);
        let gens = disjoint_normalized(3.0, 6);
        let (lo, hi) = lp_equivalence_estimate(&gens, 3.0, &cfg).unwrap();
        assert!((lo - 1.0).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12, "{dist}: {lo} {hi}");
        let u = unconditionality_estimate(&gens, 3.0, &cfg).unwrap();
        assert!((u - 1.0).abs() < 1e-12);
    }
}

#[test]
fn single_generator() {
    let g = vec![StepFunction::constant_on(&Interval::ints(0, 8).unwrap(), 8f64.powf(-0.5))];
    let (lo, hi) = lp_equivalence_estimate(&g, 2.0, &ProbeConfig::new(1, 50)).unwrap();
    assert!((lo - 1.0).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
    assert_eq!(unconditionality_estimate(&g, 2.0, &ProbeConfig::new(1, 50)).unwrap(), 1.0);
}

#[test]
fn haar_cell_stays_below_the_default_constant() {
    let p = 3.0;
    let gens: Vec<StepFunction> = cell_indices(0, 4).iter().map(|ix| atom(ix, p).unwrap()).collect();
    let cu = unconditionality_constant(p, None).unwrap();
    assert_eq!(cu, 2.0);
    for dist in [Distribution::Signs, Distribution::Gaussianish, Distribution::Sparse] {
        let u = unconditionality_estimate(&gens, p, &ProbeConfig::new(3, 2000).with_distribution(dist)).unwrap();
        assert!(u >= 1.0 && u <= cu, "{dist}: {u}");
    }
}

#[test]
fn estimates_are_reproducible_and_monotone_in_trials() {
    let support = Interval::ints(0, 4).unwrap();
    let gens: Vec<StepFunction> = (0..5).map(|s| random_step(s, &support, 7, 3, None).unwrap()).collect();
    let run = |trials| lp_equivalence_estimate(&gens, 2.5, &ProbeConfig::new(99, trials)).unwrap();
    assert_eq!(run(200), run(200));
    let mut prev = run(1);
    for t in [2, 10, 50, 200] {
        let cur = run(t);
        assert!(cur.0 <= prev.0 && cur.1 >= prev.1);
        prev = cur;
    }
    let u = |trials| unconditionality_estimate(&gens, 2.5, &ProbeConfig::new(99, trials)).unwrap();
    assert!(u(10) <= u(100));
}

#[test]
fn random_steps_are_bounded_and_deterministic() {
    let support = Interval::ints(-3, 2).unwrap();
    for seed in 0..100 {
        let f = random_step(seed, &support, 1 + seed as usize % 12, 2, None).unwrap();
        assert_eq!(f, random_step(seed, &support, 1 + seed as usize % 12, 2, None).unwrap());
        assert!(f.pieces().iter().all(|p| p.value.abs() <= 1.0));
        assert!(f.resolution() <= 2);
        for p in [1.0, 2.0, 4.5] {
            assert!(f.lp_norm(p).unwrap() <= 5f64.powf(1.0 / p) * (1.0 + 1e-15));
        }
    }
    assert!(random_step(0, &support, 30, 2, None).is_err());
    assert!(random_step(0, &support, 0, 2, None).is_err());
}
