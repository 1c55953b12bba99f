use proptest::prelude::*;
use revlp_core::*;

fn prec() -> Precision {
    Precision::default()
}

fn ids_with_p() -> impl Strategy<Value = (FormId, Real)> {
    prop_oneof![
        Just((FormId::T2_1, Real::one())),
        Just((FormId::T2_2, Real::int(2))),
        Just((FormId::T2_3, Real::ratio(1, 2))),
        Just((FormId::T2_4, Real::one())),
        Just((FormId::HL_1_1, Real::int(2))),
        Just((FormId::HL_1_4, Real::one())),
        Just((FormId::T5_1a, Real::one())),
        Just((FormId::C5_1b, Real::int(3))),
    ]
}

fn build(id: FormId, p: Real, m: usize) -> InequalityForm {
    let n = if matches!(id, FormId::C5_1b) { 1 } else { (m / 16).max(1) };
    make_named_form(&FormSpec::new(id, p, n, m), prec()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ratio_is_scale_invariant((id, p) in ids_with_p(), seed in any::<u64>(), c in 1i64..1000) {
        let f = build(id, p, 32);
        let a = random_decreasing(32, seed, IncrementDist::default());
        let r = eval_form(&f, &a).unwrap();
        let rs = eval_form(&f, &a.scaled(&Real::ratio(c, 7)).unwrap()).unwrap();
        match (r.ratio, rs.ratio) {
            (Ratio::Finite(x), Ratio::Finite(y)) => {
                if x.is_exact() && y.is_exact() {
                    prop_assert_eq!(x, y);
                } else {
                    prop_assert!(Real::rel_diff(&x, &y) < 1e-30);
                }
            }
            (x, y) => prop_assert_eq!(x, y),
        }
    }

    #[test]
    fn both_sides_are_additive_at_p1(seed1 in any::<u64>(), seed2 in any::<u64>(), id_ix in 0usize..4) {
        let id = [FormId::T2_1, FormId::T2_2, FormId::T2_3, FormId::T2_4][id_ix];
        let f = make_named_form(&FormSpec::new(id, Real::one(), 2, 40).weights(WeightSpec::Unit), prec()).unwrap();
        let a = random_decreasing(40, seed1, IncrementDist::default());
        let b = random_decreasing(40, seed2, IncrementDist::Sparse { max: 9, density: 0.2 });
        let (ra, rb) = (eval_form(&f, &a).unwrap(), eval_form(&f, &b).unwrap());
        let rab = eval_form(&f, &a.plus(&b).unwrap()).unwrap();
        prop_assert_eq!(rab.lhs, ra.lhs + rb.lhs);
        prop_assert_eq!(rab.rhs0, ra.rhs0 + rb.rhs0);
    }

    #[test]
    fn sides_grow_with_upper_limit((id, p) in ids_with_p(), seed in any::<u64>()) {
        let a = random_decreasing(64, seed, IncrementDist::default());
        let small = build(id, p.clone(), 48);
        let mut large_spec = FormSpec::new(id, p, small.n, 64);
        large_spec.alpha = Real::one();
        let large = make_named_form(&large_spec, prec()).unwrap();
        let (rs, rl) = (eval_form(&small, &a).unwrap(), eval_form(&large, &a).unwrap());
        prop_assert!(rs.lhs <= rl.lhs);
        prop_assert!(rs.rhs0 <= rl.rhs0);
    }

    #[test]
    fn jensen_on_random_rationals(values in prop::collection::vec((0i64..1000, 1i64..50), 1..12), a_num in 1i64..8, extra in 1i64..8) {
        let b = Sequence::new(values.iter().map(|&(p, q)| Real::ratio(p, q)).collect()).unwrap();
        let alpha = Real::ratio(a_num, 4);
        let beta = &alpha + &Real::ratio(extra, 3);
        let r = verify_jensen(&b, &alpha, &beta, IndexRange::new(1, b.len()), prec()).unwrap();
        prop_assert!(r.holds);
    }

    #[test]
    fn check_holds_agrees_with_ratio(seed in any::<u64>(), num in 1i64..400, den in 1i64..100) {
        let f = make_named_form(&FormSpec::new(FormId::T2_2, Real::one(), 1, 16).weights(WeightSpec::Unit), prec()).unwrap();
        let a = random_decreasing(16, seed, IncrementDist::default());
        let c = Real::ratio(num, den);
        let r = eval_form(&f, &a).unwrap();
        let expect = match &r.ratio {
            Ratio::Finite(x) => *x >= c,
            _ => true,
        };
        prop_assert_eq!(check_holds(&f, &a, &c).unwrap(), expect);
    }
}

#[test]
fn hardy_littlewood_ratios_are_bounded_on_random_samples() {
    for (id, p) in [
        (FormId::HL_1_1, Real::int(2)),
        (FormId::HL_1_2, Real::ratio(3, 2)),
        (FormId::HL_1_3, Real::ratio(1, 2)),
        (FormId::HL_1_4, Real::one()),
    ] {
        let f = make_named_form(&FormSpec::new(id, p, 2, 64).alpha(Real::ratio(1, 2)), prec()).unwrap();
        let (lf, gf) = f.weights_f64();
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for seed in 0..300u64 {
            let a = random_decreasing(64, seed, IncrementDist::Sparse { max: 100, density: 0.2 }).to_f64_vec();
            let (l, r) = evaluate_sides(&f.shape, &lf, &gf, &a, &f.p, f.precision);
            if r > 0.0 {
                lo = lo.min(l / r);
                hi = hi.max(l / r);
            }
        }
        assert!(hi.is_finite() && lo > 0.0, "{id}: [{lo}, {hi}]");
    }
}

#[test]
fn precision_flows_into_float_results() {
    let high = Precision::new(120).unwrap();
    let f =
        make_named_form(&FormSpec::new(FormId::T5_2a, Real::ratio(1, 3), 1, 8).alpha(Real::ratio(1, 2)), high).unwrap();
    let r = eval_form(&f, &Sequence::ones(8)).unwrap();
    assert!(!r.exact);
    match r.lhs {
        Real::Float(x) => assert!(x.prec() >= high.bits()),
        Real::Exact(_) => panic!("expected a float"),
    }
}
