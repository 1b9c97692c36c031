//! Reference spectral measures and distances between an empirical spectrum
//! and a reference.
//!
//! Uniformity on the disk is judged by two one-dimensional statistics: a
//! radial KS distance against the exact radial CDF of the reference, and an
//! angular KS distance against the uniform law on `[-pi, pi)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{normalization_scale, DenseComplexMatrix};
use crate::spectral::log_abs_det;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReferenceMeasure {
    /// Uniform law on the unit disk.
    Circular,
    /// Oriented Kesten-McKay law with density
    /// `d^2 (d-1) / (pi (d^2 - |z|^2)^2)` on `|z| <= sqrt(d)`.
    /// Lives on the scale of the unnormalized adjacency matrix.
    OrientedKm { d: u32 },
}

impl ReferenceMeasure {
    pub fn oriented_km(d: u32) -> Result<Self> {
        if d < 2 {
            return Err(invalid(format!("oriented Kesten-McKay needs d >= 2, got {d}")));
        }
        Ok(ReferenceMeasure::OrientedKm { d })
    }

    pub fn support_radius(&self) -> f64 {
        match *self {
            ReferenceMeasure::Circular => 1.0,
            ReferenceMeasure::OrientedKm { d } => (d as f64).sqrt(),
        }
    }

    /// Mass of the closed disk of radius `r`.
    pub fn radial_cdf(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(invalid(format!("radius must be nonnegative, got {r}")));
        }
        Ok(self.radial_cdf_unchecked(r))
    }

    fn radial_cdf_unchecked(&self, r: f64) -> f64 {
        match *self {
            ReferenceMeasure::Circular => (r * r).min(1.0),
            ReferenceMeasure::OrientedKm { d } => {
                let d = d as f64;
                if r * r >= d {
                    1.0
                } else {
                    ((d - 1.0) * r * r / (d * d - r * r)).min(1.0)
                }
            }
        }
    }

    /// Density with respect to area measure.
    pub fn density(&self, z: Complex64) -> f64 {
        let r2 = z.norm_sqr();
        match *self {
            ReferenceMeasure::Circular => {
                if r2 <= 1.0 {
                    std::f64::consts::FRAC_1_PI
                } else {
                    0.0
                }
            }
            ReferenceMeasure::OrientedKm { d } => {
                let d = d as f64;
                if r2 <= d {
                    d * d * (d - 1.0) / (std::f64::consts::PI * (d * d - r2).powi(2))
                } else {
                    0.0
                }
            }
        }
    }
}

/// Exact sup-distance between the empirical CDF of sorted `xs` and a
/// continuous CDF `f`, checking each jump point and its left limit.
fn ks_sorted(xs: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    let n = xs.len() as f64;
    xs.iter().enumerate().fold(0.0, |acc, (i, &x)| {
        let fx = f(x);
        acc.max((((i + 1) as f64) / n - fx).abs()).max((fx - i as f64 / n).abs())
    })
}

/// KS distance between the moduli `|lambda_i|` and the radial law of `measure`.
pub fn ks_radial(eigenvalues: &[Complex64], measure: &ReferenceMeasure) -> Result<f64> {
    if eigenvalues.is_empty() {
        return Err(invalid("empty eigenvalue list"));
    }
    let mut r: Vec<f64> = eigenvalues.iter().map(|z| z.norm()).collect();
    if r.iter().any(|x| !x.is_finite()) {
        return Err(invalid("non-finite eigenvalue"));
    }
    r.sort_by(f64::total_cmp);
    Ok(ks_sorted(&r, |x| measure.radial_cdf_unchecked(x)))
}

/// Argument in `[-pi, pi)`; the sign of a zero imaginary part is ignored so
/// that real eigenvalues land on `0` or `-pi` regardless of how they were
/// produced.
fn half_open_arg(z: Complex64) -> f64 {
    let im = if z.im == 0.0 { 0.0 } else { z.im };
    let a = im.atan2(z.re);
    if a >= std::f64::consts::PI {
        -std::f64::consts::PI
    } else {
        a
    }
}

/// Modulus below which an eigenvalue is skipped by [`angular_ks`].
pub const ANGULAR_MIN_MODULUS: f64 = 1e-9;

/// KS distance of `arg(lambda_i)` against the uniform law on `[-pi, pi)`,
/// over eigenvalues with `|lambda| > 1e-9`.
pub fn angular_ks(eigenvalues: &[Complex64]) -> Result<f64> {
    let mut a: Vec<f64> =
        eigenvalues.iter().filter(|z| z.norm() > ANGULAR_MIN_MODULUS).map(|&z| half_open_arg(z)).collect();
    if a.is_empty() {
        return Err(invalid("no eigenvalue away from the origin"));
    }
    a.sort_by(f64::total_cmp);
    let pi = std::f64::consts::PI;
    Ok(ks_sorted(&a, |t| ((t + pi) / (2.0 * pi)).clamp(0.0, 1.0)))
}

/// Fraction of eigenvalues with `|lambda| <= 1 + tol`. An empty list gives 0.
pub fn disk_coverage(eigenvalues: &[Complex64], tol: f64) -> f64 {
    if eigenvalues.is_empty() {
        return 0.0;
    }
    let hit = eigenvalues.iter().filter(|z| z.norm() <= 1.0 + tol).count();
    hit as f64 / eigenvalues.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coverage {
    pub tol: f64,
    pub frac: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub ks_radial: f64,
    pub ks_angular: f64,
    pub coverage: Coverage,
}

pub fn metric_report(eigenvalues: &[Complex64], measure: &ReferenceMeasure, tol: f64) -> Result<MetricReport> {
    Ok(MetricReport {
        ks_radial: ks_radial(eigenvalues, measure)?,
        ks_angular: angular_ks(eigenvalues)?,
        coverage: Coverage { tol, frac: disk_coverage(eigenvalues, tol) },
    })
}

/// Replacement-principle statistic; `Singular` when either shifted matrix
/// has an exactly zero pivot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gap {
    Finite(f64),
    Singular,
}

impl Gap {
    pub fn finite(self) -> Option<f64> {
        match self {
            Gap::Finite(v) => Some(v),
            Gap::Singular => None,
        }
    }
}

/// `(1/n) log|det(M - z s I)| - (1/n) log|det(B - z s I)|` with
/// `s = sqrt(d(1 - d/n))`, i.e. the log-determinant gap between the two
/// normalized matrices shifted by `z`. Both inputs are unnormalized 0/1
/// matrices of the same order.
pub fn replacement_gap(m: &DenseComplexMatrix, b: &DenseComplexMatrix, d: usize, z: Complex64) -> Result<Gap> {
    if !m.is_square() {
        return Err(Error::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    if m.rows() != b.rows() || m.cols() != b.cols() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} against {}x{}",
            m.rows(),
            m.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let n = m.rows();
    let scale = normalization_scale(n, d)?;
    let la = shifted_log_det(m, scale, z)?;
    let lb = shifted_log_det(b, scale, z)?;
    Ok(match (la, lb) {
        (Some(x), Some(y)) => Gap::Finite((x - y) / n as f64),
        _ => Gap::Singular,
    })
}

/// `log|det(scale A - zI)|`.
fn shifted_log_det(a: &DenseComplexMatrix, scale: f64, z: Complex64) -> Result<Option<f64>> {
    let mut t = a.scaled(scale);
    for i in 0..t.rows() {
        t.set(i, i, t.get(i, i) - z);
    }
    log_abs_det(&t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{sample_bernoulli, RowSupportMatrix};
    use crate::rng::stream;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn radial_cdf_examples() {
        assert_relative_eq!(ReferenceMeasure::Circular.radial_cdf(0.5).unwrap(), 0.25);
        assert_eq!(ReferenceMeasure::Circular.radial_cdf(3.0).unwrap(), 1.0);
        let km = ReferenceMeasure::oriented_km(2).unwrap();
        assert_relative_eq!(km.radial_cdf(1.0).unwrap(), 1.0 / 3.0, epsilon = 1e-15);
        for d in [2u32, 3, 10] {
            let km = ReferenceMeasure::oriented_km(d).unwrap();
            assert_relative_eq!(km.radial_cdf((d as f64).sqrt()).unwrap(), 1.0, epsilon = 1e-14);
        }
        assert!(ReferenceMeasure::Circular.radial_cdf(-0.1).is_err());
        assert!(ReferenceMeasure::oriented_km(1).is_err());
    }

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, k: usize) -> f64 {
        let h = (b - a) / (2 * k) as f64;
        let mut s = f(a) + f(b);
        for i in 1..2 * k {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn oriented_km_matches_quadrature() {
        for d in [2u32, 4, 9] {
            let km = ReferenceMeasure::oriented_km(d).unwrap();
            let edge = (d as f64).sqrt();
            let df = d as f64;
            for i in 0..100 {
                let r = (edge * i as f64 / 99.0).min(edge);
                let q = simpson(|s| 2.0 * s * df * df * (df - 1.0) / (df * df - s * s).powi(2), 0.0, r, 2000);
                if r < edge {
                    let dens = km.density(c(r, 0.0)) * std::f64::consts::PI;
                    assert!((dens - df * df * (df - 1.0) / (df * df - r * r).powi(2)).abs() < 1e-12);
                }
                assert!((q - km.radial_cdf(r).unwrap()).abs() < 1e-10, "d={d} r={r}");
            }
        }
    }

    #[test]
    fn ks_radial_examples() {
        let zeros = vec![c(0.0, 0.0); 10];
        assert_relative_eq!(ks_radial(&zeros, &ReferenceMeasure::Circular).unwrap(), 1.0);
        let n = 50;
        let q: Vec<Complex64> = (1..=n).map(|k| Complex64::from_polar((k as f64 / n as f64).sqrt(), k as f64)).collect();
        assert!(ks_radial(&q, &ReferenceMeasure::Circular).unwrap() <= 1.0 / n as f64 + 1e-15);
        assert!(ks_radial(&[], &ReferenceMeasure::Circular).is_err());
    }

    #[test]
    fn angular_examples() {
        let n = 40;
        let roots: Vec<Complex64> =
            (0..n).map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64)).collect();
        assert!(angular_ks(&roots).unwrap() <= 1.0 / n as f64 + 1e-12);
        let pos: Vec<Complex64> = (1..6).map(|k| c(k as f64, 0.0)).collect();
        assert!(angular_ks(&pos).unwrap() >= 0.5);
        assert!(angular_ks(&[c(0.0, 0.0)]).is_err());
        // -0.0 imaginary parts do not move negative reals to +pi
        assert_eq!(angular_ks(&[c(-1.0, -0.0), c(1.0, 0.0)]).unwrap(), angular_ks(&[c(-1.0, 0.0), c(1.0, 0.0)]).unwrap());
    }

    #[test]
    fn angular_ks_conjugation_exact_on_real_spectra() {
        let mut rng = stream(21);
        let m = RowSupportMatrix::sample(40, 40, 7, &mut rng).unwrap().to_dense();
        let ev = crate::spectral::eigenvalues(&m).unwrap();
        let conj: Vec<Complex64> = ev.iter().map(|z| z.conj()).collect();
        assert_eq!(angular_ks(&ev).unwrap(), angular_ks(&conj).unwrap());
    }

    #[test]
    fn coverage_examples() {
        assert_eq!(disk_coverage(&[c(0.0, 0.0); 3], 0.0), 1.0);
        assert_eq!(disk_coverage(&[c(2.0, 0.0)], 0.5), 0.0);
        let mut rng = stream(2);
        let m = crate::model::normalize(&RowSupportMatrix::sample(30, 30, 5, &mut rng).unwrap()).unwrap();
        let ev = crate::spectral::eigenvalues(&m).unwrap();
        assert!(disk_coverage(&ev, 0.0) < 1.0);
    }

    #[test]
    fn report_json_shape() {
        let ev = vec![c(0.5, 0.1), c(-0.2, 0.3), c(0.1, -0.9)];
        let r = metric_report(&ev, &ReferenceMeasure::Circular, 0.1).unwrap();
        let js = serde_json::to_value(r).unwrap();
        assert!(js["ks_radial"].is_f64() && js["ks_angular"].is_f64());
        assert_eq!(js["coverage"]["tol"].as_f64(), Some(0.1));
        assert_eq!(js["coverage"]["frac"].as_f64(), Some(1.0));
    }

    #[test]
    fn replacement_gap_examples() {
        let mut rng = stream(4);
        let (n, d) = (60, 6);
        let m = RowSupportMatrix::sample(n, n, d, &mut rng).unwrap().to_dense();
        let b = sample_bernoulli(n, d as f64 / n as f64, &mut rng).unwrap();
        let z = c(0.5, 0.5);
        assert_eq!(replacement_gap(&m, &m, d, z).unwrap(), Gap::Finite(0.0));
        let g1 = replacement_gap(&m, &b, d, z).unwrap().finite().unwrap();
        let g2 = replacement_gap(&b, &m, d, z).unwrap().finite().unwrap();
        assert_eq!(g1, -g2);
        let small = DenseComplexMatrix::identity(3);
        assert!(matches!(replacement_gap(&m, &small, d, z), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn replacement_gap_diagonal_closed_form() {
        // det(I/s - z) = (1/s - z)^n and det(0 - z) = (-z)^n
        let (n, d) = (4, 1);
        let z = c(0.3, -0.2);
        let inv_s = 1.0 / 0.75f64.sqrt();
        let g = replacement_gap(&DenseComplexMatrix::identity(n), &DenseComplexMatrix::zeros(n, n), d, z).unwrap();
        let expect = (c(inv_s, 0.0) - z).norm().ln() - z.norm().ln();
        assert!((g.finite().unwrap() - expect).abs() < 1e-12);
    }
}
