use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use transframe::fdd::{BlockVector, FddSchedule, FddSystem};
use transframe::numeric::rel_diff;
use transframe::stepfn::{combine, Interval};
use transframe::Error;

fn small() -> FddSystem {
    FddSystem::build(FddSchedule::new(3.0, None, vec![4, 16]).unwrap()).unwrap()
}

#[test]
fn norm_and_decomposition() {
    let sys = small();
    assert!(rel_diff(sys.f().lp_norm_pow(3.0).unwrap(), 0.75) < 1e-12);
    for i in 1..=sys.count() {
        assert!(sys.decomposition_residual(i).is_zero());
        let on_unit = sys.f_i(i).restrict(&Interval::unit(0));
        let w = (sys.schedule.n[sys.block_of(i) - 1] as f64).powf(-0.5);
        assert_eq!(on_unit, sys.h(sys.block_of(i)).unwrap().scale(w));
        assert!(sys.g(i).restrict(&Interval::unit(0)).is_zero());
    }
    assert_eq!(sys.remainder_overlap(), None);
}

#[test]
fn single_block_single_atom() {
    let sys = FddSystem::build(FddSchedule::new(3.0, None, vec![1]).unwrap()).unwrap();
    assert!(sys.g(1).is_zero());
    assert_eq!(sys.f_i(1), sys.h(1).unwrap());
    assert!(matches!(sys.phi(1), Err(Error::Degenerate(_))));
    let hb = sys.hbar_report(1).unwrap();
    assert_eq!(hb.distance, 0.0);
}

#[test]
fn hbar_bound() {
    let sys = small();
    for j in 1..=2 {
        let r = sys.hbar_report(j).unwrap();
        assert!(rel_diff(r.distance, r.closed_form) < 1e-12);
        assert!(r.distance <= r.bound);
    }
}

#[test]
fn phi_annihilates_block_and_separates_z() {
    let sys = small();
    for j in 1..=2 {
        let r = sys.phi_report(j).unwrap();
        assert!(r.max_on_block <= 1e-12, "{r:?}");
        assert!((r.value_at_z + 1.0).abs() < 1e-12, "{r:?}");
        assert!(r.distance_bound > 0.0);
    }
    // ‖g̃_i‖_q = 1/‖g_i‖_p
    let gd = sys.g_dual(3).unwrap();
    let gp = sys.g(3).lp_norm(3.0).unwrap();
    assert!(rel_diff(gd.lp_norm(1.5).unwrap(), 1.0 / gp) < 1e-12);
}

#[test]
fn projection_in_coordinates_and_functions() {
    let sys = small();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let xs: Vec<BlockVector> = (1..=2).map(|j| sys.random_block_vector(j, &mut rng)).collect();
    let x = sys.synthesize(&xs).unwrap();
    let coords = sys.coordinates(&x, 1e-12).unwrap();
    for (a, b) in coords.iter().zip(&xs) {
        assert!((a.a - b.a).abs() < 1e-12);
        assert!(a.c.iter().zip(&b.c).all(|(u, v)| (u - v).abs() < 1e-12));
    }
    let px = sys.project(&x, 1e-12).unwrap();
    let ppx = sys.project(&px, 1e-12).unwrap();
    assert!(ppx.sub(&px).lp_norm(3.0).unwrap() <= 1e-12);
    // z_j is killed, E_j is fixed
    let z = sys.z(2);
    assert!(sys.project(&z, 1e-12).unwrap().lp_norm(3.0).unwrap() < 1e-12);
    let fi = sys.f_i(7);
    assert!(sys.project(&fi, 1e-12).unwrap().sub(&fi).lp_norm(3.0).unwrap() < 1e-12);
    // coordinate norm agrees with the materialized norm
    assert!(rel_diff(sys.norm_pow_of(&xs).unwrap(), x.lp_norm_pow(3.0).unwrap()) < 1e-12);
}

#[test]
fn outside_span_is_rejected() {
    let sys = small();
    let stray = combine([(1.0, sys.f()), (1.0, &sys.h(2).unwrap().translate_int(2))]);
    assert!(matches!(sys.coordinates(&stray, 1e-9), Err(Error::NotInSpan { .. })));
}

#[test]
fn estimates_are_finite() {
    let sys = small();
    let u = sys.unconditionality_estimate(200, 11).unwrap();
    assert!(u >= 1.0 && u.is_finite());
    let pn = sys.projection_norm_estimate(200, 11).unwrap();
    assert!(pn >= 0.0 && pn.is_finite());
    let cert = sys.certificate(1e-10).unwrap();
    assert!(cert.passed(), "{:?}", cert.rows.iter().filter(|r| r.pass == Some(false)).collect::<Vec<_>>());
}
