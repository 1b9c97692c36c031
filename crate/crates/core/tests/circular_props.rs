use proptest::prelude::*;
use rcm_core::circular::{angular_ks, ks_radial, replacement_gap, Gap, ReferenceMeasure};
use rcm_core::model::sample_bernoulli;
use rcm_core::{stream, Complex64, RowSupportMatrix};

fn points() -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.5f64..1.5, -1.5f64..1.5).prop_map(|(a, b)| Complex64::new(a, b)), 1..60)
}

proptest! {
    #[test]
    fn radial_cdf_is_monotone(d in 2u32..40, r1 in 0.0f64..8.0, r2 in 0.0f64..8.0) {
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        for m in [ReferenceMeasure::Circular, ReferenceMeasure::oriented_km(d).unwrap()] {
            prop_assert!(m.radial_cdf(lo).unwrap() <= m.radial_cdf(hi).unwrap() + 1e-15);
            prop_assert!((m.radial_cdf(m.support_radius()).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ks_is_permutation_and_rotation_invariant(pts in points(), phase in 0.0f64..std::f64::consts::TAU, shuffle_seed: u64) {
        let base = ks_radial(&pts, &ReferenceMeasure::Circular).unwrap();
        let mut perm = pts.clone();
        let k = (shuffle_seed as usize) % perm.len();
        perm.rotate_left(k);
        perm.reverse();
        prop_assert_eq!(ks_radial(&perm, &ReferenceMeasure::Circular).unwrap(), base);
        let rot: Vec<Complex64> = pts.iter().map(|z| z * Complex64::from_polar(1.0, phase)).collect();
        prop_assert!((ks_radial(&rot, &ReferenceMeasure::Circular).unwrap() - base).abs() < 1e-12);
        let a = angular_ks(&pts).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
    }
}

#[test]
fn km_cdf_matches_density_quadrature() {
    for d in [2u32, 3, 5, 10] {
        let m = ReferenceMeasure::oriented_km(d).unwrap();
        let edge = m.support_radius();
        for i in 1..=100 {
            let r = edge * i as f64 / 100.0;
            // Gauss-Legendre on [0, r] of 2 pi s f(s) with 64 panels of 5 points
            let nodes = [0.0, -0.5384693101056831, 0.5384693101056831, -0.906179845938664, 0.906179845938664];
            let weights = [0.5688888888888889, 0.47862867049936647, 0.47862867049936647, 0.23692688505618908, 0.23692688505618908];
            let panels = 400;
            let h = r / panels as f64;
            let mut acc = 0.0;
            for p in 0..panels {
                let mid = (p as f64 + 0.5) * h;
                for (x, w) in nodes.iter().zip(weights) {
                    let s = mid + 0.5 * h * x;
                    acc += w * 0.5 * h * 2.0 * std::f64::consts::PI * s * m.density(Complex64::new(s.min(edge * (1.0 - 1e-15)), 0.0));
                }
            }
            let cdf = m.radial_cdf(r).unwrap();
            if r < edge * 0.999 {
                assert!((acc - cdf).abs() < 1e-10, "d={d} r={r}: quad {acc} vs {cdf}");
            }
        }
    }
}

#[test]
fn replacement_gap_finite_on_random_grid() {
    let mut rng = stream(31);
    let (n, d) = (50, 8);
    let m = RowSupportMatrix::sample(n, n, d, &mut rng).unwrap().to_dense();
    let b = sample_bernoulli(n, d as f64 / n as f64, &mut rng).unwrap();
    let singular = (0..25)
        .filter(|i| {
            let z = Complex64::new(-1.2 + 0.1 * *i as f64 + 0.013, 0.37 - 0.03 * *i as f64);
            replacement_gap(&m, &b, d, z).unwrap() == Gap::Singular
        })
        .count();
    assert_eq!(singular, 0);
}
