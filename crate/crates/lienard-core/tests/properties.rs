use lienard_core::charts;
use lienard_core::classify::{self, PredictedDirection, TheoremCase};
use lienard_core::fractal;
use lienard_core::integrals::{self, LimitOptions};
use lienard_core::model::{LienardSystem, Side, ValidSystem};
use lienard_core::quad::Tolerance;
use lienard_core::relation::{self, OrbitDirection, OrbitOptions};
use num_rational::Ratio;
use proptest::prelude::*;

const TOL: Tolerance = Tolerance { abs: 0.0, rel: 1e-12 };

/// n = 3 systems with `F'/x = 4x^2 + 3b_3 x + 2b_2` positive; `-G/x` is
/// checked by validation.
fn asymmetric(max_m: usize) -> impl Strategy<Value = ValidSystem> {
    (0..=(max_m - 1) / 2, 0.5f64..2.0, -0.9f64..0.9, 0.5f64..2.0, -0.9f64..0.9).prop_filter_map("assumptions", move |(k, b2, s3, a1, s2)| {
        let m = 2 * k + 1;
        let b3 = s3 * (32.0 * b2 / 9.0).sqrt();
        let a2 = if m >= 3 { s2 * (4.0 * a1).sqrt() } else { 0.0 };
        let a: Vec<(usize, f64)> = if m >= 3 { vec![(1, a1), (2, a2)] } else { vec![] };
        let sys = LienardSystem::sparse(3, m, 1.0, &[(2, b2), (3, b3)], &a).unwrap();
        ValidSystem::new(sys).ok()
    })
}

fn symmetric() -> impl Strategy<Value = ValidSystem> {
    (prop::sample::select(vec![(1usize, 1usize), (1, 3), (3, 1), (3, 5), (3, 7), (1, 5)]), 0.2f64..3.0, 0.2f64..3.0).prop_map(
        |((n, m), b2, a1)| {
            let b: Vec<(usize, f64)> = if n >= 3 { vec![(2, b2)] } else { vec![] };
            let a: Vec<(usize, f64)> = if m >= 3 { vec![(1, a1)] } else { vec![] };
            ValidSystem::new(LienardSystem::sparse(n, m, 1.0, &b, &a).unwrap()).unwrap()
        },
    )
}

fn recursion(r0: f64, beta: f64, c: f64, len: usize) -> Vec<f64> {
    let mut r = vec![r0];
    for _ in 1..len {
        let x = *r.last().unwrap();
        r.push(x - c * x.powf(beta));
    }
    r
}

fn in_families(d: Ratio<i64>, n: i64, m: i64) -> bool {
    let mut fam = vec![Ratio::from_integer(0), Ratio::new(2 * n + 1 - m, 2 * n + 2 - m)];
    for j in 0..=n.max(m) {
        if n + 1 - 2 * j > 0 {
            fam.push(Ratio::new(n - 2 * j, n + 1 - 2 * j));
        }
        if m + 1 - 2 * j > 0 {
            fam.push(Ratio::new(m - 2 * j, m + 1 - 2 * j));
        }
    }
    for k in 1..=m {
        fam.push(Ratio::new(k * (m + 1), k * (m + 1) + 2 * (n + 1)));
    }
    fam.contains(&d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn branch_integrals_decrease(vs in asymmetric(7), y in 0.01f64..50.0, dy in 0.01f64..50.0) {
        for side in [Side::Minus, Side::Plus] {
            let lo = integrals::i_branch(&vs, y, side, TOL).unwrap().value;
            let hi = integrals::i_branch(&vs, y + dy, side, TOL).unwrap().value;
            prop_assert!(hi < lo, "{side:?}: I({y}) = {lo}, I({}) = {hi}", y + dy);
        }
    }

    #[test]
    fn symmetric_total_vanishes(vs in symmetric(), y in 0.01f64..1e4) {
        let v = integrals::i_total(&vs, y, TOL).unwrap();
        prop_assert!(v.value.abs() <= 10.0 * 1e-12 * integrals::i_branch(&vs, y, Side::Plus, TOL).unwrap().value.abs().max(1e-300));
    }

    #[test]
    fn slow_relation_round_trip(vs in asymmetric(7), y in 0.05f64..20.0) {
        let opts = OrbitOptions::default();
        let fwd = relation::slow_relation(&vs, y, OrbitDirection::ForwardS, &opts);
        prop_assume!(fwd.is_ok());
        let back = relation::slow_relation(&vs, fwd.unwrap(), OrbitDirection::InverseS, &opts).unwrap();
        prop_assert!((back - y).abs() <= 1e-8 * y.max(1.0), "{y} -> {back}");
    }

    #[test]
    fn mirror_swaps_direction(vs in asymmetric(7)) {
        let opts = LimitOptions::default();
        let p = classify::classify(&vs, &opts).unwrap();
        let q = classify::classify(&ValidSystem::new(vs.system().mirrored()).unwrap(), &opts).unwrap();
        prop_assert_eq!(p.predicted_dim, q.predicted_dim);
        let swapped = match p.direction {
            PredictedDirection::ForwardS => PredictedDirection::InverseS,
            PredictedDirection::InverseS => PredictedDirection::ForwardS,
            d => d,
        };
        prop_assert_eq!(q.direction, swapped);
    }

    #[test]
    fn predictions_are_in_the_rational_families(vs in asymmetric(7)) {
        let p = classify::classify(&vs, &LimitOptions::default()).unwrap();
        let again = classify::classify(&vs, &LimitOptions::default()).unwrap();
        prop_assert_eq!(&p, &again);
        if let Some(d) = p.predicted_dim {
            prop_assert!(in_families(d, vs.n() as i64, vs.m() as i64), "{} {d}", p.theorem_case);
        } else {
            prop_assert!(matches!(p.theorem_case, TheoremCase::OpenCaseCZero | TheoremCase::Unresolved(_)));
        }
    }

    #[test]
    fn invariance_identity(vs in asymmetric(7), u in 0.05f64..0.95, v in 0.05f64..0.95) {
        let rt = charts::default_r_tilde(vs.system()).unwrap();
        let (r, rp) = (u * rt, v * rt);
        let n1 = vs.n() as i32 + 1;
        let y = |s: f64| s.powi(-n1);
        let lhs = integrals::i_branch(&vs, y(r), Side::Minus, TOL).unwrap().value
            - integrals::i_branch(&vs, y(rp), Side::Plus, TOL).unwrap().value;
        let rhs = charts::j_branch(&vs, r, Side::Minus, rt, TOL).unwrap().value
            - charts::j_branch(&vs, rp, Side::Plus, rt, TOL).unwrap().value
            + integrals::i_total(&vs, y(rt), TOL).unwrap().value;
        prop_assert!((lhs - rhs).abs() <= 10.0 * 1e-12 * lhs.abs().max(rhs.abs()).max(1.0), "{lhs} vs {rhs}");
    }

    #[test]
    fn neighborhood_length_grows_with_delta(pts in prop::collection::vec(0.0f64..1.0, 1..60), d1 in 1e-4f64..0.2, k in 1.0f64..5.0) {
        let mut pts = pts;
        pts.sort_by(|a, b| b.total_cmp(a));
        pts.dedup();
        let a = fractal::neighborhood_length(&pts, d1);
        let b = fractal::neighborhood_length(&pts, d1 * k);
        prop_assert!(b >= a);
        prop_assert!(a <= 2.0 * d1 * pts.len() as f64 + 1e-15);
        prop_assert!(a >= 2.0 * d1 - 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn estimators_are_scale_invariant(beta in 1.5f64..4.0, lambda in 0.01f64..100.0) {
        let r = recursion(0.5, beta, 1.0, 20_000);
        let scaled: Vec<f64> = r.iter().map(|x| lambda * x).collect();
        let a = fractal::dimension_neighborhood(&r, None).unwrap();
        let b = fractal::dimension_neighborhood(&scaled, None).unwrap();
        prop_assert!((a.value - b.value).abs() <= a.stderr.max(b.stderr) + 1e-9, "{} vs {}", a.value, b.value);
        let a = fractal::dimension_gap_law(&r).unwrap();
        let b = fractal::dimension_gap_law(&scaled).unwrap();
        prop_assert!((a.value - b.value).abs() <= a.stderr.max(b.stderr) + 1e-9);
    }
}
