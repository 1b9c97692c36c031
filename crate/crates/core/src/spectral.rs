//! Dense spectral computations and the deterministic identities built on them.
//!
//! Eigenvalues and singular values come from a [`SpectralBackend`]. The
//! default, [`FaerBackend`], runs faer's dense solvers (balancing, Hessenberg
//! reduction and shifted QR for eigenvalues; bidiagonalization for singular
//! values) single-threaded, so results are bit-reproducible for a fixed input.
//! Real inputs take the real code path, which returns exactly
//! conjugate-symmetric spectra.
//!
//! Row distances `dist(R_k, H_k)` are computed by pivoted, re-orthogonalized
//! Gram-Schmidt; see [`dist_to_span`].

use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use faer::linalg::solvers::DenseSolveCore;

use crate::model::{shift, DenseComplexMatrix};

/// Relative threshold below which a singular value counts as zero.
pub const DEFAULT_SINGULAR_REL_TOL: f64 = 1e-12;
/// Relative threshold used for rank decisions in [`dist_to_span`].
pub const DEFAULT_RANK_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralConfig {
    /// `s_i <= singular_rel_tol * s_1` is treated as an exact zero.
    pub singular_rel_tol: f64,
    pub rank_rel_tol: f64,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self { singular_rel_tol: DEFAULT_SINGULAR_REL_TOL, rank_rel_tol: DEFAULT_RANK_REL_TOL }
    }
}

pub trait SpectralBackend: Sync {
    /// All eigenvalues with multiplicity, in no particular order.
    fn eigenvalues(&self, a: &DenseComplexMatrix) -> Result<Vec<Complex64>>;

    /// `min(rows, cols)` singular values, nonincreasing.
    fn singular_values(&self, a: &DenseComplexMatrix) -> Result<Vec<f64>>;

    /// Smallest singular value together with a unit left singular vector.
    fn smallest_left_singular(&self, a: &DenseComplexMatrix) -> Result<(f64, Vec<Complex64>)>;
}

fn raw_eigenvalues(a: &DenseComplexMatrix) -> Result<Vec<Complex64>> {
    let res = if a.is_real() { a.to_faer_real().eigenvalues() } else { a.to_faer().eigenvalues() };
    res.map_err(|e| Error::Backend(format!("eigenvalue iteration failed: {e:?}")))
}

fn frobenius(a: &DenseComplexMatrix) -> f64 {
    a.data().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `sum l = tr A` and `sum l^2 = tr A^2`, up to backward-error tolerances.
fn traces_consistent(a: &DenseComplexMatrix, eigs: &[Complex64]) -> bool {
    let n = a.rows();
    let f = frobenius(a);
    let tr: Complex64 = (0..n).map(|i| a.get(i, i)).sum();
    let tr2: Complex64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| a.get(i, j) * a.get(j, i)).sum();
    let s1: Complex64 = eigs.iter().sum();
    let s2: Complex64 = eigs.iter().map(|l| l * l).sum();
    let tol = 1e-8 * n as f64;
    eigs.len() == n && (s1 - tr).norm() <= tol * (f + 1e-300) && (s2 - tr2).norm() <= tol * (f * f + 1e-300)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct FaerBackend;

impl SpectralBackend for FaerBackend {
    fn eigenvalues(&self, a: &DenseComplexMatrix) -> Result<Vec<Complex64>> {
        if !a.is_square() {
            return Err(Error::NotSquare { rows: a.rows(), cols: a.cols() });
        }
        if a.rows() == 0 {
            return Ok(Vec::new());
        }
        let eigs = raw_eigenvalues(a)?;
        if traces_consistent(a, &eigs) {
            return Ok(eigs);
        }
        // faer occasionally reports success with a zeroed spectrum; retry on a
        // shifted copy, whose eigenvalues are those of `a` plus the shift.
        let scale = 1.0 + frobenius(a) / (a.rows() as f64).sqrt();
        for c in [Complex64::new(0.618_033_988_7, 0.236_067_977_5), Complex64::new(-0.414_213_562_4, 0.732_050_807_6)] {
            let sigma = c * scale;
            let eigs: Vec<Complex64> = raw_eigenvalues(&shift(a, -sigma)?)?.into_iter().map(|l| l - sigma).collect();
            if traces_consistent(a, &eigs) {
                return Ok(eigs);
            }
        }
        Err(Error::Backend("eigenvalues failed the trace consistency check".into()))
    }

    fn singular_values(&self, a: &DenseComplexMatrix) -> Result<Vec<f64>> {
        if a.rows() == 0 || a.cols() == 0 {
            return Ok(Vec::new());
        }
        let res = if a.is_real() {
            a.to_faer_real().singular_values()
        } else {
            a.to_faer().singular_values()
        };
        let mut s = res.map_err(|e| Error::Backend(format!("SVD failed: {e:?}")))?;
        // faer documents nonincreasing order; enforce it against signed zeros.
        s.iter_mut().for_each(|x| *x = x.abs());
        s.sort_by(|a, b| b.total_cmp(a));
        Ok(s)
    }

    fn smallest_left_singular(&self, a: &DenseComplexMatrix) -> Result<(f64, Vec<Complex64>)> {
        if !a.is_square() {
            return Err(Error::NotSquare { rows: a.rows(), cols: a.cols() });
        }
        let n = a.rows();
        let svd = a.to_faer().svd().map_err(|e| Error::Backend(format!("SVD failed: {e:?}")))?;
        let s = svd.S().column_vector();
        let (k, smin) = (0..n).map(|i| (i, s[i].re.abs())).min_by(|x, y| x.1.total_cmp(&y.1)).unwrap();
        let u = svd.U();
        Ok((smin, (0..n).map(|i| u[(i, k)]).collect()))
    }
}

/// Eigenvalues, singular values and `s_min` of one matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSummary {
    pub eigenvalues: Vec<Complex64>,
    pub singular_values: Vec<f64>,
    pub s_min: f64,
    pub n: usize,
}

impl SpectralSummary {
    pub fn compute(a: &DenseComplexMatrix) -> Result<Self> {
        Self::compute_with(&FaerBackend, a)
    }

    pub fn compute_with(backend: &dyn SpectralBackend, a: &DenseComplexMatrix) -> Result<Self> {
        let eigenvalues = backend.eigenvalues(a)?;
        let singular_values = backend.singular_values(a)?;
        let s_min = singular_values.last().copied().unwrap_or(0.0);
        Ok(Self { eigenvalues, singular_values, s_min, n: a.rows() })
    }
}

impl Serialize for SpectralSummary {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let eigs: Vec<[f64; 2]> = self.eigenvalues.iter().map(|z| [z.re, z.im]).collect();
        let mut st = ser.serialize_struct("SpectralSummary", 3)?;
        st.serialize_field("eigs", &eigs)?;
        st.serialize_field("svals", &self.singular_values)?;
        st.serialize_field("smin", &self.s_min)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for SpectralSummary {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            eigs: Vec<[f64; 2]>,
            svals: Vec<f64>,
            smin: f64,
        }
        let raw = Raw::deserialize(de)?;
        Ok(Self {
            n: raw.eigs.len(),
            eigenvalues: raw.eigs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect(),
            singular_values: raw.svals,
            s_min: raw.smin,
        })
    }
}

pub fn eigenvalues(a: &DenseComplexMatrix) -> Result<Vec<Complex64>> {
    FaerBackend.eigenvalues(a)
}

pub fn singular_values(a: &DenseComplexMatrix) -> Result<Vec<f64>> {
    FaerBackend.singular_values(a)
}

/// `s_n(A - zI)`.
pub fn smallest_singular_value(a: &DenseComplexMatrix, z: Complex64) -> Result<f64> {
    let s = singular_values(&shift(a, z)?)?;
    Ok(s.last().copied().unwrap_or(0.0))
}

/// Value of a logarithmic potential; `Infinite` marks an exactly singular
/// shift (`U = +inf`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Potential {
    Finite(f64),
    Infinite,
}

impl Potential {
    pub fn finite(self) -> Option<f64> {
        match self {
            Potential::Finite(v) => Some(v),
            Potential::Infinite => None,
        }
    }
}

/// Singular-value log potential `-(1/n) sum_i log s_i(A - zI)`.
pub fn log_potential(a: &DenseComplexMatrix, z: Complex64) -> Result<Potential> {
    log_potential_with(a, z, &SpectralConfig::default())
}

pub fn log_potential_with(a: &DenseComplexMatrix, z: Complex64, cfg: &SpectralConfig) -> Result<Potential> {
    let s = singular_values(&shift(a, z)?)?;
    Ok(potential_from_singular_values(&s, cfg.singular_rel_tol))
}

pub(crate) fn potential_from_singular_values(s: &[f64], rel_tol: f64) -> Potential {
    let n = s.len();
    if n == 0 {
        return Potential::Finite(0.0);
    }
    let s1 = s[0];
    if s1 == 0.0 || s.iter().any(|&x| x <= rel_tol * s1) {
        return Potential::Infinite;
    }
    Potential::Finite(-s.iter().map(|x| x.ln()).sum::<f64>() / n as f64)
}

/// `log|det A|` from a partially pivoted LU factorization; `None` when a
/// pivot is exactly zero or not finite.
pub fn log_abs_det(a: &DenseComplexMatrix) -> Result<Option<f64>> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let lu = a.to_faer().partial_piv_lu();
    let u = lu.U();
    let mut acc = 0.0;
    for i in 0..a.rows() {
        let p = u[(i, i)].norm();
        if p == 0.0 || !p.is_finite() {
            return Ok(None);
        }
        acc += p.ln();
    }
    Ok(Some(acc))
}

fn hdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm2(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Orthonormal basis of `span(vectors)` by Gram-Schmidt with column pivoting
/// (largest residual first) and one re-orthogonalization pass. Residuals at or
/// below `rank_rel_tol * max_norm` are discarded.
pub fn orthonormal_basis(vectors: &[Vec<Complex64>], rank_rel_tol: f64) -> Result<Vec<Vec<Complex64>>> {
    let Some(dim) = vectors.first().map(Vec::len) else {
        return Ok(Vec::new());
    };
    if vectors.iter().any(|v| v.len() != dim) {
        return Err(Error::DimensionMismatch("spanning vectors differ in length".into()));
    }
    let max_norm = vectors.iter().map(|v| norm2(v)).fold(0.0, f64::max);
    let tol = rank_rel_tol * max_norm;
    let mut residuals: Vec<Vec<Complex64>> = vectors.to_vec();
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    let mut active: Vec<usize> = (0..residuals.len()).collect();
    while !active.is_empty() && basis.len() < dim {
        let (pos, best) = active
            .iter()
            .enumerate()
            .map(|(p, &i)| (p, norm2(&residuals[i])))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if best <= tol {
            break;
        }
        let idx = active.swap_remove(pos);
        let mut q = std::mem::take(&mut residuals[idx]);
        for b in &basis {
            let c = hdot(b, &q);
            q.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
        let nq = norm2(&q);
        if nq <= tol {
            continue;
        }
        q.iter_mut().for_each(|x| *x /= nq);
        for &i in &active {
            let c = hdot(&q, &residuals[i]);
            residuals[i].iter_mut().zip(&q).for_each(|(x, y)| *x -= c * y);
        }
        basis.push(q);
    }
    Ok(basis)
}

/// Distance from `v` to the projection onto an orthonormal `basis`,
/// with two projection passes.
pub fn dist_to_orthonormal(v: &[Complex64], basis: &[Vec<Complex64>]) -> f64 {
    let mut w = v.to_vec();
    for _ in 0..2 {
        for b in basis {
            let c = hdot(b, &w);
            w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
    }
    norm2(&w)
}

/// Euclidean distance from `v` to `span(rows)`.
pub fn dist_to_span(v: &[Complex64], rows: &[Vec<Complex64>]) -> Result<f64> {
    dist_to_span_with(v, rows, DEFAULT_RANK_REL_TOL)
}

pub fn dist_to_span_with(v: &[Complex64], rows: &[Vec<Complex64>], rank_rel_tol: f64) -> Result<f64> {
    if rows.iter().any(|r| r.len() != v.len()) {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} against spanning vectors of other length",
            v.len()
        )));
    }
    let basis = orthonormal_basis(rows, rank_rel_tol)?;
    Ok(dist_to_orthonormal(v, &basis))
}

fn rows_of(a: &DenseComplexMatrix) -> Vec<Vec<Complex64>> {
    (0..a.rows()).map(|i| a.row(i).to_vec()).collect()
}

/// `dist(R_k, H_k)` for every row, where `H_k` is the span of the other rows.
pub fn row_distances(a: &DenseComplexMatrix) -> Result<Vec<f64>> {
    let rows = rows_of(a);
    (0..rows.len())
        .map(|k| {
            let others: Vec<Vec<Complex64>> =
                rows.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, r)| r.clone()).collect();
            dist_to_span(&rows[k], &others)
        })
        .collect()
}

/// Same as [`row_distances`] for square `A`, using `dist(R_k, H_k) =
/// 1/||A^{-1} e_k||`. Falls back to [`row_distances`] when the LU factors are
/// not usable (singular or non-finite inverse).
pub fn row_distances_via_inverse(a: &DenseComplexMatrix) -> Result<Vec<f64>> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let n = a.rows();
    let inv = a.to_faer().partial_piv_lu().inverse();
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let nrm = (0..n).map(|i| inv[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if !nrm.is_finite() || nrm == 0.0 {
            return row_distances(a);
        }
        out.push(1.0 / nrm);
    }
    Ok(out)
}

/// Both sides of `sum_i s_i^{-2}(A') = sum_i dist^{-2}(R_i, W_i)` for a
/// full-rank `k x n` matrix (`k <= n`), `W_i` the span of the other rows.
pub fn negative_second_moment_check(a: &DenseComplexMatrix) -> Result<(f64, f64)> {
    if a.rows() > a.cols() {
        return Err(Error::RankDeficient(format!("{} rows exceed {} columns", a.rows(), a.cols())));
    }
    let s = singular_values(a)?;
    let s1 = s.first().copied().unwrap_or(0.0);
    if s.iter().any(|&x| x <= DEFAULT_SINGULAR_REL_TOL * s1) || s1 == 0.0 {
        return Err(Error::RankDeficient("matrix does not have full row rank".into()));
    }
    let lhs = s.iter().map(|x| x.powi(-2)).sum();
    let d = row_distances(a)?;
    if d.iter().any(|&x| x == 0.0) {
        return Err(Error::RankDeficient("a row lies in the span of the others".into()));
    }
    let rhs = d.iter().map(|x| x.powi(-2)).sum();
    Ok((lhs, rhs))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterlacingReport {
    pub holds: bool,
    /// Largest amount by which either inequality is violated (0 if none).
    pub max_violation: f64,
    pub tolerance: f64,
}

/// Checks `s_{i+m}(A) <= s_i(A') <= s_i(A)` where `A'` keeps the first
/// `n - m` rows of `A`.
pub fn cauchy_interlacing_check(a: &DenseComplexMatrix, m: usize) -> Result<InterlacingReport> {
    let n = a.rows();
    if m == 0 || m >= n {
        return Err(Error::InvalidParameter(format!("need 1 <= m < n, got m={m} n={n}")));
    }
    let keep: Vec<usize> = (0..n - m).collect();
    interlacing_against(a, &keep, m)
}

fn interlacing_against(a: &DenseComplexMatrix, keep: &[usize], m: usize) -> Result<InterlacingReport> {
    let sa = singular_values(a)?;
    let sb = singular_values(&a.select_rows(keep))?;
    let tolerance = 1e-9 * sa.first().copied().unwrap_or(0.0);
    let mut worst: f64 = 0.0;
    for (i, &si) in sb.iter().enumerate() {
        let lower = sa.get(i + m).copied().unwrap_or(0.0);
        worst = worst.max(lower - si).max(si - sa[i]);
    }
    Ok(InterlacingReport { holds: worst <= tolerance, max_violation: worst.max(0.0), tolerance })
}

/// Interlacing with an arbitrary set of `m` removed rows.
pub fn cauchy_interlacing_check_rows(a: &DenseComplexMatrix, removed: &[usize]) -> Result<InterlacingReport> {
    let n = a.rows();
    let m = removed.len();
    if m == 0 || m >= n || removed.iter().any(|&i| i >= n) {
        return Err(Error::InvalidParameter("removed rows must be a proper nonempty subset".into()));
    }
    let keep: Vec<usize> = (0..n).filter(|i| !removed.contains(i)).collect();
    if keep.len() != n - m {
        return Err(Error::InvalidParameter("removed rows must be distinct".into()));
    }
    interlacing_against(a, &keep, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{normalize, RowSupportMatrix};
    use crate::rng::stream;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn sorted_re(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn rank_one_spectrum() {
        let n = 6;
        let v = [1.0, 0.0, 1.0, 1.0, 0.0, 0.0];
        let a = DenseComplexMatrix::from_fn(n, n, |_, j| c(v[j]));
        let ev = sorted_re(eigenvalues(&a).unwrap());
        assert!((ev[n - 1] - c(3.0)).norm() < 1e-10);
        assert!(ev[..n - 1].iter().all(|z| z.norm() < 1e-7));
    }

    #[test]
    fn shifted_all_ones_spectrum() {
        // faer's complex eigensolver returns all zeros for this input
        let z = Complex64::new(0.3, 0.33924145878378725);
        let a = DenseComplexMatrix::from_fn(4, 4, |i, j| if i == j { c(1.0) - z } else { c(1.0) });
        let ev = sorted_re(eigenvalues(&a).unwrap());
        assert!(ev[..3].iter().all(|l| (l + z).norm() < 1e-7));
        assert!((ev[3] - (c(4.0) - z)).norm() < 1e-10);
    }

    #[test]
    fn swap_spectrum() {
        let a = DenseComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let ev = sorted_re(eigenvalues(&a).unwrap());
        assert!((ev[0] - c(-1.0)).norm() < 1e-12 && (ev[1] - c(1.0)).norm() < 1e-12);
    }

    #[test]
    fn row_sum_eigenvalue_present() {
        let mut rng = stream(3);
        for _ in 0..10 {
            let m = RowSupportMatrix::sample(20, 20, 5, &mut rng).unwrap();
            let ev = eigenvalues(&m.to_dense()).unwrap();
            assert!(ev.iter().any(|z| (z - c(5.0)).norm() < 1e-8));
        }
    }

    #[test]
    fn complex_path_matches_real_path() {
        let mut rng = stream(17);
        let m = RowSupportMatrix::sample(15, 15, 4, &mut rng).unwrap().to_dense();
        let shifted = shift(&m, Complex64::new(0.0, 0.25)).unwrap();
        let mut a: Vec<Complex64> = eigenvalues(&m).unwrap().iter().map(|z| z - Complex64::new(0.0, 0.25)).collect();
        let mut b = eigenvalues(&shifted).unwrap();
        let key = |z: &Complex64| (z.re * 1e6).round() as i64 * 1_000_000_000 + (z.im * 1e6).round() as i64;
        a.sort_by_key(key);
        b.sort_by_key(key);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-7, "{x} vs {y}");
        }
    }

    #[test]
    fn singular_value_examples() {
        assert!(singular_values(&DenseComplexMatrix::identity(5)).unwrap().iter().all(|&s| (s - 1.0).abs() < 1e-14));
        let s = singular_values(&DenseComplexMatrix::diag(&[1.0, 3.0])).unwrap();
        assert_relative_eq!(s[0], 3.0, epsilon = 1e-14);
        assert_relative_eq!(s[1], 1.0, epsilon = 1e-14);
        let zc = DenseComplexMatrix::from_real(3, 3, &[1.0, 0.0, 2.0, 4.0, 0.0, 1.0, 0.5, 0.0, 7.0]).unwrap();
        assert!(*singular_values(&zc).unwrap().last().unwrap() < 1e-14);
        let rect = DenseComplexMatrix::from_real(2, 3, &[1.0, 0.0, 0.0, 0.0, 2.0, 0.0]).unwrap();
        assert_eq!(singular_values(&rect).unwrap().len(), 2);
    }

    #[test]
    fn smallest_singular_examples() {
        let i = DenseComplexMatrix::identity(4);
        assert_relative_eq!(smallest_singular_value(&i, c(0.0)).unwrap(), 1.0, epsilon = 1e-14);
        assert!(smallest_singular_value(&i, c(1.0)).unwrap() < 1e-15);
        let dup = RowSupportMatrix::from_supports(4, 2, vec![vec![0, 1], vec![0, 1], vec![1, 3], vec![2, 3]]).unwrap();
        assert!(smallest_singular_value(&dup.to_dense(), c(0.0)).unwrap() < 1e-10);
    }

    #[test]
    fn log_potential_examples() {
        let i = DenseComplexMatrix::identity(5);
        assert_eq!(log_potential(&i, c(0.0)).unwrap().finite().map(|v| v.abs() < 1e-14), Some(true));
        assert!(log_potential(&i, c(2.0)).unwrap().finite().unwrap().abs() < 1e-14);
        assert_eq!(log_potential(&i, c(1.0)).unwrap(), Potential::Infinite);
    }

    #[test]
    fn log_potential_matches_small_determinants() {
        let mut rng = stream(99);
        for n in 2..=3 {
            for _ in 0..20 {
                let m = RowSupportMatrix::sample(n, n, 1 + rng.random_range(0..n - 1), &mut rng).unwrap();
                let z = Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
                let a = shift(&m.to_dense(), z).unwrap();
                let g = |i, j| a.get(i, j);
                let det = if n == 2 {
                    g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0)
                } else {
                    g(0, 0) * (g(1, 1) * g(2, 2) - g(1, 2) * g(2, 1)) - g(0, 1) * (g(1, 0) * g(2, 2) - g(1, 2) * g(2, 0))
                        + g(0, 2) * (g(1, 0) * g(2, 1) - g(1, 1) * g(2, 0))
                };
                let u = log_potential(&m.to_dense(), z).unwrap().finite().unwrap();
                assert!((u + det.norm().ln() / n as f64).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn dist_examples() {
        let e1 = vec![c(1.0), c(0.0), c(0.0)];
        let e2 = vec![c(0.0), c(1.0), c(0.0)];
        assert_relative_eq!(dist_to_span(&e1, &[e2.clone()]).unwrap(), 1.0, epsilon = 1e-15);
        let v = vec![c(0.3), Complex64::new(1.0, -2.0), c(4.0)];
        assert!(dist_to_span(&v, &[v.clone()]).unwrap() < 1e-14);
        let e12 = vec![c(1.0), c(1.0), c(0.0)];
        assert_relative_eq!(dist_to_span(&e12, &[e2.clone()]).unwrap(), 1.0, epsilon = 1e-15);
        assert!(dist_to_span(&e1, &[vec![c(1.0)]]).is_err());
        // rank-deficient spanning set
        assert_relative_eq!(dist_to_span(&e12, &[e2.clone(), e2.clone(), vec![c(0.0); 3]]).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn nsm_examples() {
        let (l, r) = negative_second_moment_check(&DenseComplexMatrix::identity(2)).unwrap();
        assert_relative_eq!(l, 2.0, epsilon = 1e-14);
        assert_relative_eq!(r, 2.0, epsilon = 1e-14);
        let (l, r) = negative_second_moment_check(&DenseComplexMatrix::diag(&[2.0, 1.0])).unwrap();
        assert_relative_eq!(l, 1.25, epsilon = 1e-14);
        assert_relative_eq!(r, 1.25, epsilon = 1e-14);
        let mut rng = stream(5);
        let data: Vec<f64> = (0..80).map(|_| rng.sample(StandardNormal)).collect();
        let g = DenseComplexMatrix::from_real(8, 10, &data).unwrap();
        let (l, r) = negative_second_moment_check(&g).unwrap();
        assert!((l - r).abs() / l <= 1e-6);
        let sing = DenseComplexMatrix::from_real(2, 2, &[1.0, 1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(negative_second_moment_check(&sing), Err(Error::RankDeficient(_))));
    }

    #[test]
    fn interlacing_examples() {
        let rep = cauchy_interlacing_check(&DenseComplexMatrix::diag(&[3.0, 1.0]), 1).unwrap();
        assert!(rep.holds);
        for m in 1..4 {
            let rep = cauchy_interlacing_check(&DenseComplexMatrix::identity(4), m).unwrap();
            assert!(rep.holds && rep.max_violation <= 1e-14);
        }
        let mut rng = stream(12);
        for _ in 0..50 {
            let a = RowSupportMatrix::sample(12, 12, 4, &mut rng).unwrap().to_dense();
            for m in 1..=3 {
                assert!(cauchy_interlacing_check(&a, m).unwrap().holds);
            }
        }
        assert!(cauchy_interlacing_check(&DenseComplexMatrix::identity(3), 3).is_err());
    }

    #[test]
    fn smin_below_row_distances() {
        let mut rng = stream(44);
        for _ in 0..20 {
            let a = normalize(&RowSupportMatrix::sample(16, 16, 5, &mut rng).unwrap()).unwrap();
            let a = shift(&a, Complex64::new(0.3, 0.4)).unwrap();
            let smin = *singular_values(&a).unwrap().last().unwrap();
            let d = row_distances(&a).unwrap();
            let dmin = d.iter().copied().fold(f64::INFINITY, f64::min);
            assert!(smin <= dmin * (1.0 + 1e-10));
            let d2 = row_distances_via_inverse(&a).unwrap();
            for (x, y) in d.iter().zip(&d2) {
                assert!((x - y).abs() <= 1e-8 * x.max(1.0));
            }
        }
    }

    #[test]
    fn left_singular_vector_attains_smin() {
        let mut rng = stream(6);
        let a = RowSupportMatrix::sample(10, 10, 3, &mut rng).unwrap().to_dense();
        let a = shift(&a, Complex64::new(0.5, 0.5)).unwrap();
        let (s, u) = FaerBackend.smallest_left_singular(&a).unwrap();
        // || u^H A ||
        let row: Vec<Complex64> = (0..10).map(|j| (0..10).map(|i| u[i].conj() * a.get(i, j)).sum()).collect();
        assert!((norm2(&row) - s).abs() < 1e-10);
        assert!((norm2(&u) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn log_abs_det_matches_potential() {
        let mut rng = stream(8);
        let a = normalize(&RowSupportMatrix::sample(30, 30, 6, &mut rng).unwrap()).unwrap();
        let a = shift(&a, Complex64::new(0.2, -0.7)).unwrap();
        let ld = log_abs_det(&a).unwrap().unwrap();
        let u = log_potential(&a, Complex64::new(0.0, 0.0)).unwrap().finite().unwrap();
        assert!((ld / 30.0 + u).abs() < 1e-10);
        let z = DenseComplexMatrix::from_real(2, 2, &[1.0, 1.0, 1.0, 1.0]).unwrap();
        assert!(log_abs_det(&z).unwrap().map_or(true, |v| v < -20.0));
    }

    #[test]
    fn summary_json_shape() {
        let s = SpectralSummary::compute(&DenseComplexMatrix::diag(&[2.0, 1.0])).unwrap();
        let js = serde_json::to_value(&s).unwrap();
        assert!(js.get("eigs").unwrap().as_array().unwrap()[0].as_array().unwrap().len() == 2);
        assert_eq!(js["svals"].as_array().unwrap().len(), 2);
        assert_eq!(js["smin"].as_f64().unwrap(), 1.0);
        let back: SpectralSummary = serde_json::from_value(js).unwrap();
        assert_eq!(back, s);
    }
}
