//! Distance of a random 0/1 vector to a fixed subspace, and the link between
//! row distances and the smallest singular value.
//!
//! For `delta` with i.i.d. Bernoulli(p) entries, `r = dist(delta + u, V)` has
//! `E r^2 = D(p)^2 = p(1-p)(n-k) + d_{u'}^2` with `u' = u + p 1`, and
//! `D/2 <= E r <= D`. The fixed-sum model replaces `delta` by the indicator
//! of a uniform `d`-subset.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combin::binomial_big;
use crate::error::{invalid, Error, Result};
use crate::model::{shift, DenseComplexMatrix, RowSupportMatrix};
use crate::rng::trial_stream;
use crate::spectral::{
    dist_to_orthonormal, orthonormal_basis, row_distances_via_inverse, FaerBackend, SpectralBackend,
    DEFAULT_RANK_REL_TOL,
};
use crate::stats::{mean_se, proportion_se};
use crate::vectors::is_almost_constant;

/// `D(p) = sqrt(p(1-p)(n-k) + d_{u'}^2)`.
pub fn d_p(p: f64, n: usize, k: usize, d_uprime: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) || k >= n || !(d_uprime >= 0.0) {
        return Err(invalid(format!("need 0 < p < 1, k < n, d_u' >= 0; got p={p} n={n} k={k} d={d_uprime}")));
    }
    Ok((p * (1.0 - p) * (n - k) as f64 + d_uprime * d_uprime).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "model")]
pub enum DistanceModel {
    Bernoulli,
    /// Uniform `d`-subset indicator.
    FixedSum { d: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceExperiment {
    n: usize,
    p: f64,
    u: Vec<Complex64>,
    /// Orthonormal basis of `V`, one vector per row.
    basis: Vec<Vec<Complex64>>,
    pub trials: usize,
}

fn ones_over_sqrt(n: usize) -> Vec<Complex64> {
    vec![Complex64::new(1.0 / (n as f64).sqrt(), 0.0); n]
}

impl DistanceExperiment {
    /// Checks that `basis` is orthonormal to within `1e-10`.
    pub fn new(n: usize, p: f64, u: Vec<Complex64>, basis: Vec<Vec<Complex64>>, trials: usize) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(invalid(format!("p must lie in (0,1), got {p}")));
        }
        if u.len() != n || basis.iter().any(|b| b.len() != n) {
            return Err(Error::DimensionMismatch("u and basis vectors must have length n".into()));
        }
        if basis.len() >= n {
            return Err(invalid(format!("subspace dimension {} must be below n = {n}", basis.len())));
        }
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate().skip(i) {
                let g: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                if (g - target).norm() > 1e-10 {
                    return Err(invalid(format!("basis is not orthonormal at ({i}, {j})")));
                }
            }
        }
        Ok(Self { n, p, u, basis, trials })
    }

    /// `V` spanned by a random Gaussian frame of dimension `k`; with
    /// `include_ones`, the first basis vector is `1/sqrt(n)`.
    pub fn random_frame<R: Rng + ?Sized>(
        n: usize,
        k: usize,
        p: f64,
        include_ones: bool,
        trials: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if k >= n || (include_ones && k == 0) {
            return Err(invalid(format!("need 0 <= k < n (k >= 1 with the ones vector), got k={k} n={n}")));
        }
        let mut vecs = Vec::with_capacity(k);
        if include_ones {
            vecs.push(ones_over_sqrt(n));
        }
        while vecs.len() < k {
            vecs.push((0..n).map(|_| Complex64::new(rng.sample(StandardNormal), 0.0)).collect());
        }
        let basis = orthonormal_basis(&vecs, DEFAULT_RANK_REL_TOL)?;
        if basis.len() != k {
            return Err(Error::RankDeficient("random frame lost rank".into()));
        }
        Self::new(n, p, vec![Complex64::new(0.0, 0.0); n], basis, trials)
    }

    /// `V` spanned by the given rows (for example rows of a sampled matrix).
    pub fn row_span(rows: &[Vec<Complex64>], p: f64, trials: usize) -> Result<Self> {
        let n = rows.first().map(Vec::len).ok_or_else(|| invalid("no spanning rows"))?;
        let basis = orthonormal_basis(rows, DEFAULT_RANK_REL_TOL)?;
        Self::new(n, p, vec![Complex64::new(0.0, 0.0); n], basis, trials)
    }

    pub fn with_shift(mut self, u: Vec<Complex64>) -> Result<Self> {
        if u.len() != self.n {
            return Err(Error::DimensionMismatch("shift must have length n".into()));
        }
        self.u = u;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.basis.len()
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `p(1-p)(n-k) >= 1`.
    pub fn in_regime(&self) -> bool {
        self.p * (1.0 - self.p) * (self.n - self.k()) as f64 >= 1.0
    }

    /// `u' = u + p 1`.
    pub fn u_prime(&self) -> Vec<Complex64> {
        self.u.iter().map(|z| z + self.p).collect()
    }

    /// `P v`, the projection onto the orthogonal complement of `V`.
    pub fn project(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut w = v.to_vec();
        for _ in 0..2 {
            for b in &self.basis {
                let c: Complex64 = b.iter().zip(&w).map(|(x, y)| x.conj() * y).sum();
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        w
    }

    pub fn d_uprime(&self) -> f64 {
        dist_to_orthonormal(&self.u_prime(), &self.basis)
    }

    pub fn d_p(&self) -> Result<f64> {
        d_p(self.p, self.n, self.k(), self.d_uprime())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceSample {
    pub r: f64,
    pub r_squared: f64,
    /// `||P x||^2` with `x = delta - p 1`.
    pub px2: f64,
    /// `2 Re <x, P u'>`.
    pub cross: f64,
    /// `||P u'||^2`.
    pub pu2: f64,
}

impl DistanceSample {
    /// `|r^2 - (||Px||^2 + 2 Re<x, Pu'> + ||Pu'||^2)|`.
    pub fn decomposition_error(&self) -> f64 {
        (self.r_squared - (self.px2 + self.cross + self.pu2)).abs()
    }
}

fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

fn draw_delta<R: Rng + ?Sized>(n: usize, p: f64, model: DistanceModel, rng: &mut R) -> Result<Vec<f64>> {
    match model {
        DistanceModel::Bernoulli => Ok((0..n).map(|_| rng.random_bool(p) as u8 as f64).collect()),
        DistanceModel::FixedSum { d } => {
            let row = RowSupportMatrix::sample(n, 1, d, rng)?;
            let mut v = vec![0.0; n];
            row.row(0).iter().for_each(|&c| v[c] = 1.0);
            Ok(v)
        }
    }
}

/// One draw of `r = dist(delta + u, V)` with the three decomposition terms.
pub fn distance_trial<R: Rng + ?Sized>(
    exp: &DistanceExperiment,
    rng: &mut R,
    model: DistanceModel,
) -> Result<DistanceSample> {
    if let DistanceModel::FixedSum { d } = model {
        if d == 0 || d > exp.n {
            return Err(invalid(format!("fixed-sum model needs 1 <= d <= n, got d={d}")));
        }
    }
    let delta = draw_delta(exp.n, exp.p, model, rng)?;
    let y: Vec<Complex64> = delta.iter().zip(&exp.u).map(|(&a, u)| u + a).collect();
    let py = exp.project(&y);
    let r_squared = norm_sqr(&py);
    let x: Vec<Complex64> = delta.iter().map(|&a| Complex64::new(a - exp.p, 0.0)).collect();
    let px = exp.project(&x);
    let pu = exp.project(&exp.u_prime());
    let inner: Complex64 = x.iter().zip(&pu).map(|(a, b)| a.conj() * b).sum();
    Ok(DistanceSample { r: r_squared.sqrt(), r_squared, px2: norm_sqr(&px), cross: 2.0 * inner.re, pu2: norm_sqr(&pu) })
}

/// `exp.trials` independent draws; trial `i` uses stream `(seed, i)`.
pub fn run_distance_experiment(exp: &DistanceExperiment, model: DistanceModel, seed: u64) -> Result<Vec<DistanceSample>> {
    (0..exp.trials)
        .into_par_iter()
        .map(|i| distance_trial(exp, &mut trial_stream(seed, i as u64), model))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceSummary {
    pub trials: usize,
    pub mean_r: f64,
    pub se_r: f64,
    pub mean_r_squared: f64,
    pub se_r_squared: f64,
    pub mean_px2: f64,
    pub d_p: f64,
    /// `D/2 <= mean r <= D`.
    pub in_bracket: bool,
    pub max_decomposition_error: f64,
}

pub fn summarize(exp: &DistanceExperiment, samples: &[DistanceSample]) -> Result<DistanceSummary> {
    let d = exp.d_p()?;
    let r: Vec<f64> = samples.iter().map(|s| s.r).collect();
    let r2: Vec<f64> = samples.iter().map(|s| s.r_squared).collect();
    let px2: Vec<f64> = samples.iter().map(|s| s.px2).collect();
    let (mean_r, se_r) = mean_se(&r);
    let (mean_r_squared, se_r_squared) = mean_se(&r2);
    Ok(DistanceSummary {
        trials: samples.len(),
        mean_r,
        se_r,
        mean_r_squared,
        se_r_squared,
        mean_px2: mean_se(&px2).0,
        d_p: d,
        in_bracket: mean_r >= d / 2.0 && mean_r <= d,
        max_decomposition_error: samples.iter().map(DistanceSample::decomposition_error).fold(0.0, f64::max),
    })
}

/// CSV with columns `trial,r,r_squared`.
pub fn samples_to_csv(samples: &[DistanceSample]) -> String {
    let mut out = String::from("trial,r,r_squared\n");
    for (i, s) in samples.iter().enumerate() {
        out.push_str(&format!("{i},{:e},{:e}\n", s.r, s.r_squared));
    }
    out
}

/// Fraction of draws with `|r - mean r| >= t`, for each `t` in `t_grid`.
pub fn distance_tail_profile(r: &[f64], t_grid: &[f64]) -> Result<Vec<f64>> {
    if r.len() < 100 {
        return Err(invalid(format!("need at least 100 draws, got {}", r.len())));
    }
    let mean = r.iter().sum::<f64>() / r.len() as f64;
    Ok(t_grid.iter().map(|&t| r.iter().filter(|&&x| (x - mean).abs() >= t).count() as f64 / r.len() as f64).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditioningRatio {
    /// `C(n,d) (d/n)^d (1-d/n)^(n-d)`, the probability that `n` Bernoulli(d/n)
    /// variables sum to exactly `d`.
    #[serde(skip)]
    pub exact: BigRational,
    pub exact_f64: f64,
    /// `(1/4) sqrt(1/(pi d))`.
    pub stirling_lower: f64,
    pub holds: bool,
}

pub fn conditioning_ratio(n: usize, d: usize) -> Result<ConditioningRatio> {
    if d == 0 || 2 * d > n {
        return Err(invalid(format!("need 1 <= d <= n/2, got n={n} d={d}")));
    }
    let num = BigInt::from(binomial_big(n as u64, d as u64))
        * BigInt::from(d).pow(d as u32)
        * BigInt::from(n - d).pow((n - d) as u32);
    let den = BigInt::from(n).pow(n as u32);
    let exact = BigRational::new(num, den);
    let exact_f64 = ratio_to_f64(&exact);
    let stirling_lower = 0.25 * (1.0 / (std::f64::consts::PI * d as f64)).sqrt();
    Ok(ConditioningRatio { holds: exact_f64 >= stirling_lower, exact, exact_f64, stirling_lower })
}

pub(crate) fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvertibilityReport {
    pub distances: Vec<f64>,
    pub s_min: f64,
    pub min_distance: f64,
    /// `s_min <= min_k dist(R_k, H_k)`, up to `1e-10` relative slack.
    pub relation_holds: bool,
    /// Smallest left singular vector passes the almost-constant witness test.
    pub left_vector_almost_constant: bool,
}

pub fn invertibility_via_distance_check(a: &DenseComplexMatrix, delta: f64, rho: f64) -> Result<InvertibilityReport> {
    let distances = row_distances_via_inverse(a)?;
    let (s_min, u) = FaerBackend.smallest_left_singular(a)?;
    let min_distance = distances.iter().copied().fold(f64::INFINITY, f64::min);
    let left_vector_almost_constant = is_almost_constant(&u, delta, rho)?.0;
    Ok(InvertibilityReport {
        relation_holds: s_min <= min_distance * (1.0 + 1e-10) + 1e-14,
        distances,
        s_min,
        min_distance,
        left_vector_almost_constant,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvertibilityBatch {
    pub trials: usize,
    pub eps: f64,
    /// Frequency of `s_min <= eps rho / sqrt(n)` with a non-almost-constant
    /// minimizing left singular vector.
    pub lhs: f64,
    pub lhs_se: f64,
    /// `(1/(delta n)) sum_k` empirical `P(dist(R_k, H_k) <= eps)`.
    pub rhs: f64,
    pub rhs_se: f64,
    /// Instances violating `s_min <= min_k dist`.
    pub relation_violations: usize,
}

/// Monte Carlo comparison of both sides of the invertibility-via-distance
/// inequality for `A = M - zI`, `M` uniform in `M_{n,d}`. `eps` is the
/// `eps_quantile` quantile of all pooled row distances.
pub fn invertibility_via_distance_batch(
    n: usize,
    d: usize,
    z: Complex64,
    trials: usize,
    delta: f64,
    rho: f64,
    eps_quantile: f64,
    seed: u64,
) -> Result<InvertibilityBatch> {
    if trials == 0 || !(0.0..=1.0).contains(&eps_quantile) {
        return Err(invalid("need trials >= 1 and a quantile in [0, 1]"));
    }
    let reports: Vec<InvertibilityReport> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let m = RowSupportMatrix::sample(n, n, d, &mut trial_stream(seed, t as u64))?;
            invertibility_via_distance_check(&shift(&m.to_dense(), z)?, delta, rho)
        })
        .collect::<Result<_>>()?;
    let mut pooled: Vec<f64> = reports.iter().flat_map(|r| r.distances.iter().copied()).collect();
    pooled.sort_by(f64::total_cmp);
    let eps = pooled[((pooled.len() - 1) as f64 * eps_quantile).round() as usize];
    let thr = eps * rho / (n as f64).sqrt();
    let lhs_hits = reports.iter().filter(|r| r.s_min <= thr && !r.left_vector_almost_constant).count();
    let per_trial: Vec<f64> = reports
        .iter()
        .map(|r| r.distances.iter().filter(|&&x| x <= eps).count() as f64 / (delta * n as f64))
        .collect();
    let (rhs, rhs_se) = mean_se(&per_trial);
    let lhs = lhs_hits as f64 / trials as f64;
    Ok(InvertibilityBatch {
        trials,
        eps,
        lhs,
        lhs_se: proportion_se(lhs, trials),
        rhs,
        rhs_se,
        relation_violations: reports.iter().filter(|r| !r.relation_holds).count(),
    })
}
