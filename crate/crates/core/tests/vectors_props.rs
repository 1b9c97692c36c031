use proptest::prelude::*;
use rcm_core::graph::restricted_norm;
use rcm_core::vectors::{
    class_norm_bound_check, class_params, classify_steep, is_almost_constant, is_almost_constant_exact, triple_norm,
    ClassConstants, SteepClass,
};
use rcm_core::{stream, Complex64, RowSupportMatrix};

fn complex_vec(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0).prop_map(|(a, b)| Complex64::new(a, b)), n)
}

/// Heavy-tailed magnitudes so that all steep classes get exercised.
fn spiky_vec(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-12i32..3, 0.0f64..std::f64::consts::TAU), n)
        .prop_map(|v| v.into_iter().map(|(e, ph)| Complex64::from_polar(10f64.powi(e), ph)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn triple_norm_dominates_l2(x in complex_vec(17), d in 1.0f64..50.0) {
        let l2 = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        prop_assert!(triple_norm(&x, d) >= l2 * (1.0 - 1e-12));
        let mean: Complex64 = x.iter().sum::<Complex64>() / x.len() as f64;
        let centered: Vec<Complex64> = x.iter().map(|z| z - mean).collect();
        let c2 = centered.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        prop_assert!((triple_norm(&centered, d) - c2).abs() <= 1e-9 * c2.max(1.0));
    }

    #[test]
    fn matrix_action_bounded_by_triple_norm(seed: u64, x in complex_vec(60), d in 2usize..30) {
        let m = RowSupportMatrix::sample(60, 60, d, &mut stream(seed)).unwrap();
        let c = restricted_norm(&m).unwrap() / (d as f64).sqrt();
        let y = m.to_dense().mat_vec(&x).unwrap();
        let lhs = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        prop_assert!(lhs <= (c + 1.0) * (d as f64).sqrt() * triple_norm(&x, d as f64) * (1.0 + 1e-12));
    }

    #[test]
    fn steep_labels_obey_norm_bounds(x in spiky_vec(400)) {
        let p = class_params(400, 100, ClassConstants::strict(), 0.1, 0.1).unwrap();
        let label = classify_steep(&x, &p);
        let chk = class_norm_bound_check(&x, label, &p).unwrap();
        prop_assert!(chk.holds, "{label}: {} > {}", chk.lhs, chk.rhs);
    }

    #[test]
    fn steep_labels_obey_norm_bounds_with_cascade(x in spiky_vec(200)) {
        let p = class_params(200, 2, ClassConstants::relaxed(), 0.1, 0.1).unwrap();
        let label = classify_steep(&x, &p);
        if !p.degenerate_cascade {
            let chk = class_norm_bound_check(&x, label, &p).unwrap();
            prop_assert!(chk.holds, "{label}: {} > {}", chk.lhs, chk.rhs);
        }
        if let SteepClass::T1(j) = label {
            prop_assert!(p.r.is_some_and(|r| j <= r));
        }
    }

    #[test]
    fn fast_almost_constant_implies_exact(x in complex_vec(40).prop_filter("nonzero", |v| v.iter().any(|z| z.norm() > 0.0)), delta in 0.05f64..0.9, rho in 0.1f64..8.0) {
        let (fast, witness) = is_almost_constant(&x, delta, rho).unwrap();
        let (exact, _) = is_almost_constant_exact(&x, delta, rho).unwrap();
        if fast {
            prop_assert!(exact);
            let w = witness.unwrap();
            let radius = rho * x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() / (x.len() as f64).sqrt();
            let inside = x.iter().filter(|z| (*z - w).norm() <= radius * (1.0 + 1e-12)).count();
            prop_assert!(inside as f64 > (1.0 - delta) * x.len() as f64);
        }
    }
}
