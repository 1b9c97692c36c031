use proptest::prelude::*;
use rcm_core::distance::{
    conditioning_ratio, d_p, distance_trial, invertibility_via_distance_check, run_distance_experiment, summarize,
    DistanceExperiment, DistanceModel,
};
use rcm_core::model::shift;
use rcm_core::stats::mean_se;
use rcm_core::{stream, Complex64, RowSupportMatrix};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn decomposition_holds_per_trial(seed: u64, k in 1usize..30, p in 0.05f64..0.95, ur in -1.0f64..1.0) {
        let mut rng = stream(seed);
        let exp = DistanceExperiment::random_frame(40, k, p, seed % 2 == 0, 1, &mut rng).unwrap()
            .with_shift((0..40).map(|i| Complex64::new(ur * (i % 5) as f64, 0.1)).collect()).unwrap();
        for model in [DistanceModel::Bernoulli, DistanceModel::FixedSum { d: 7 }] {
            let s = distance_trial(&exp, &mut rng, model).unwrap();
            prop_assert!(s.decomposition_error() <= 1e-8);
        }
    }

    #[test]
    fn d_p_monotone(p in 0.01f64..0.99, n in 5usize..500, k in 0usize..4, du in 0.0f64..10.0, extra in 0.0f64..5.0) {
        prop_assume!(k < n);
        prop_assert!(d_p(p, n, k, du).unwrap() <= d_p(p, n, k, du + extra).unwrap());
    }

    #[test]
    fn smin_below_row_distances(seed: u64, n in 3usize..25, zr in -1.0f64..1.0) {
        let mut rng = stream(seed);
        let d = 1 + seed as usize % n;
        let m = RowSupportMatrix::sample(n, n, d, &mut rng).unwrap();
        let rep = invertibility_via_distance_check(&shift(&m.to_dense(), Complex64::new(zr, 0.2)).unwrap(), 0.1, 0.5).unwrap();
        prop_assert!(rep.relation_holds);
    }
}

#[test]
fn row_span_second_moment() {
    let mut rng = stream(4);
    let m = RowSupportMatrix::sample(120, 30, 12, &mut rng).unwrap();
    let rows: Vec<Vec<Complex64>> = (0..30).map(|i| m.to_dense().row(i).to_vec()).collect();
    let exp = DistanceExperiment::row_span(&rows, 0.1, 3000).unwrap();
    assert!(exp.in_regime());
    let s = run_distance_experiment(&exp, DistanceModel::Bernoulli, 8).unwrap();
    let sum = summarize(&exp, &s).unwrap();
    let px: Vec<f64> = s.iter().map(|x| x.px2).collect();
    let (mpx, se) = mean_se(&px);
    let k = exp.k() as f64;
    assert!((mpx - 0.09 * (120.0 - k)).abs() <= 3.0 * se);
    assert!((sum.mean_r_squared - sum.d_p * sum.d_p).abs() <= 3.0 * sum.se_r_squared);
    assert!(sum.in_bracket);
}

#[test]
fn conditioning_ratio_above_stirling_bound() {
    for n in [10usize, 37, 100, 250] {
        for d in 1..=n / 2 {
            assert!(conditioning_ratio(n, d).unwrap().holds, "n={n} d={d}");
        }
    }
}
