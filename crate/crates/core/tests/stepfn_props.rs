use proptest::prelude::*;
use transframe::haar::{atom, expand};
use transframe::numeric::{conjugate, rel_diff};
use transframe::restriction::{conditional_expectation, Partition};
use transframe::stepfn::{combine, DyadicRational, Interval, Piece, StepFunction};

/// Pieces on the grid `2^{-res}ℤ` starting at `start`, with optional gaps.
fn step() -> impl Strategy<Value = StepFunction> {
    (0u32..5, -40i64..40, prop::collection::vec((0i64..3, 1i64..9, -4.0f64..4.0), 0..10)).prop_map(|(res, start, layout)| {
        let mut at = start;
        let mut pieces = Vec::new();
        for (gap, len, v) in layout {
            at += gap;
            pieces.push(Piece::new(DyadicRational::new(at, res), DyadicRational::new(at + len, res), v));
            at += len;
        }
        StepFunction::from_pieces(pieces).unwrap()
    })
}

fn exponent() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), Just(2.0), Just(3.0), 1.01f64..8.0]
}

fn midpoints(fs: &[&StepFunction]) -> Vec<DyadicRational> {
    let mut b: Vec<DyadicRational> = fs
        .iter()
        .flat_map(|f| f.pieces().iter().flat_map(|p| [p.start.clone(), p.end.clone()]))
        .collect();
    b.sort();
    b.dedup();
    b.windows(2).map(|w| (&w[0] + &w[1]).mul_pow2(-1)).collect()
}

proptest! {
    #[test]
    fn text_round_trip(f in step()) {
        prop_assert_eq!(StepFunction::from_text(&f.to_text()).unwrap(), f);
    }

    #[test]
    fn translation_is_an_exact_isometry(f in step(), s in -1000i64..1000, k in 0u32..6, p in exponent()) {
        let shift = DyadicRational::new(s, k);
        let g = f.translate(&shift);
        prop_assert_eq!(g.translate(&-&shift), f.clone());
        prop_assert_eq!(g.lp_norm_pow(p).unwrap(), f.lp_norm_pow(p).unwrap());
    }

    #[test]
    fn combination_is_pointwise(f in step(), g in step(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let h = combine([(a, &f), (b, &g)]);
        for x in midpoints(&[&f, &g]) {
            prop_assert_eq!(h.eval(&x), a * f.eval(&x) + b * g.eval(&x));
        }
        prop_assert!(combine([(1.0, &f), (-1.0, &f)]).is_zero());
    }

    #[test]
    fn holder_and_minkowski(f in step(), g in step(), p in exponent()) {
        prop_assume!(p > 1.0);
        let q = conjugate(p);
        let lhs = f.pair(&g).abs();
        prop_assert!(lhs <= f.lp_norm(p).unwrap() * g.lp_norm(q).unwrap() * (1.0 + 1e-12) + 1e-300);
        let s = f.add(&g).lp_norm(p).unwrap();
        prop_assert!(s <= (f.lp_norm(p).unwrap() + g.lp_norm(p).unwrap()) * (1.0 + 1e-12));
    }

    #[test]
    fn norm_is_homogeneous(f in step(), c in -5.0f64..5.0, p in exponent()) {
        let lhs = f.scale(c).lp_norm(p).unwrap();
        let rhs = c.abs() * f.lp_norm(p).unwrap();
        prop_assert!(rel_diff(lhs, rhs) < 1e-12);
    }

    #[test]
    fn restriction_splits_exactly(f in step(), a in -45i64..45, len in 1i64..20) {
        let iv = Interval::ints(a, a + len).unwrap();
        let back = combine([(1.0, &f.restrict(&iv)), (1.0, &f.restrict_complement(&iv))]);
        prop_assert_eq!(back, f.clone());
        prop_assert!(f.restrict(&iv).supports_disjoint(&f.restrict_complement(&iv)));
    }

    #[test]
    fn haar_expansion_reconstructs(f in step(), p in 1.5f64..6.0) {
        let coefs = expand(&f, p, f.resolution() + 1).unwrap();
        let atoms: Vec<(f64, StepFunction)> = coefs.iter().map(|(ix, a)| (*a, atom(ix, p).unwrap())).collect();
        let rebuilt = combine(atoms.iter().map(|(a, h)| (*a, h)));
        let err = rebuilt.sub(&f).pieces().iter().map(|pc| pc.value.abs()).fold(0.0, f64::max);
        prop_assert!(err < 1e-9, "sup error {err}");
    }

    #[test]
    fn expectation_is_a_contractive_projection(f in step(), n in 0u32..5, p in exponent()) {
        let part = Partition::dyadic_covering(&f, n).unwrap();
        let e = conditional_expectation(&part, &f);
        prop_assert_eq!(conditional_expectation(&part, &e), e.clone());
        prop_assert!(e.lp_norm(p).unwrap() <= f.lp_norm(p).unwrap() * (1.0 + 1e-12));
        prop_assert!(rel_diff(e.integral(), f.integral()) < 1e-12 || (e.integral() - f.integral()).abs() < 1e-12);
    }
}
