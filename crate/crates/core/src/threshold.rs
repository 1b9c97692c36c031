//! Monte Carlo experiments around the `d = log n` threshold: zero columns,
//! (numerically) singular samples and the Paley-Zygmund lower bound.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::RowSupportMatrix;
use crate::rng::{derive_seed, trial_stream};
use crate::spectral::singular_values;
use crate::stats::{mean_se, proportion_se};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThresholdSweep {
    pub n: usize,
    pub d_values: Vec<usize>,
    pub trials: usize,
    pub master_seed: u64,
}

impl ThresholdSweep {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        if let Some(d) = self.d_values.iter().find(|&&d| d == 0 || 2 * d > self.n) {
            return Err(invalid(format!("d = {d} outside [1, n/2] for n = {}", self.n)));
        }
        Ok(())
    }
}

/// Seed of trial `t` at row sum `d`.
fn point_seed(master: u64, d: usize) -> u64 {
    derive_seed(master, d as u64)
}

/// `n (1 - d/n)^n`.
pub fn expected_zero_columns(n: usize, d: usize) -> f64 {
    n as f64 * (1.0 - d as f64 / n as f64).powi(n as i32)
}

/// `q + ((n-1)/n) q^2` with `q = E X`.
pub fn zero_column_second_moment_upper(n: usize, d: usize) -> f64 {
    let q = expected_zero_columns(n, d);
    q + (n as f64 - 1.0) / n as f64 * q * q
}

/// `(1 - lambda)^2 (E X)^2 / E X^2`, a lower bound on `P(X > lambda E X)`.
pub fn paley_zygmund_bound(ex: f64, ex2: f64, lambda: f64) -> Result<f64> {
    if !(ex2 > 0.0) || !(0.0..=1.0).contains(&lambda) || !(ex >= 0.0) {
        return Err(invalid(format!("need E X >= 0, E X^2 > 0 and lambda in [0,1]; got {ex}, {ex2}, {lambda}")));
    }
    Ok((1.0 - lambda).powi(2) * ex * ex / ex2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroColumnPoint {
    pub d: usize,
    pub trials: usize,
    /// Empirical `P(X >= 1)`.
    pub freq: f64,
    pub freq_se: f64,
    pub mean_x: f64,
    pub mean_x_se: f64,
    pub formula_ex: f64,
    /// Paley-Zygmund bound at `lambda = 0` with the second-moment upper bound.
    pub pz_lower: f64,
}

fn zero_columns(m: &RowSupportMatrix) -> usize {
    m.supports().column_sums().iter().filter(|&&c| c == 0).count()
}

/// Zero-column statistics at a single `d` in `1..=n`.
pub fn zero_column_point(n: usize, d: usize, trials: usize, master_seed: u64) -> Result<ZeroColumnPoint> {
    if trials == 0 {
        return Err(invalid("trials must be at least 1"));
    }
    let seed = point_seed(master_seed, d);
    let xs: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| RowSupportMatrix::sample(n, n, d, &mut trial_stream(seed, t as u64)).map(|m| zero_columns(&m) as f64))
        .collect::<Result<_>>()?;
    let freq = xs.iter().filter(|&&x| x >= 1.0).count() as f64 / trials as f64;
    let (mean_x, mean_x_se) = mean_se(&xs);
    let formula_ex = expected_zero_columns(n, d);
    let ex2 = zero_column_second_moment_upper(n, d);
    Ok(ZeroColumnPoint {
        d,
        trials,
        freq,
        freq_se: proportion_se(freq, trials),
        mean_x,
        mean_x_se,
        formula_ex,
        pz_lower: if ex2 > 0.0 { paley_zygmund_bound(formula_ex, ex2, 0.0)? } else { 0.0 },
    })
}

pub fn zero_column_frequency(sweep: &ThresholdSweep) -> Result<Vec<ZeroColumnPoint>> {
    sweep.validate()?;
    sweep.d_values.iter().map(|&d| zero_column_point(sweep.n, d, sweep.trials, sweep.master_seed)).collect()
}

/// `n^{-9}`.
pub fn default_singular_threshold(n: usize) -> f64 {
    (n as f64).powi(-9)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularityPoint {
    pub d: usize,
    pub trials: usize,
    pub threshold: f64,
    /// Fraction of trials with `s_min <= threshold`.
    pub freq: f64,
    pub freq_se: f64,
    /// Trial indices with `s_min <= threshold`.
    pub hits: Vec<usize>,
    /// Trials with `s_min <= n * eps * s_1`, singular to working precision.
    pub numerically_singular: usize,
    /// Trials with a zero column.
    pub zero_column: usize,
    pub s_min: Vec<f64>,
}

/// Singular-value statistics at a single `d` in `1..=n`. Uses the same seeds
/// as [`zero_column_point`], so zero-column counts refer to the same matrices.
pub fn singularity_point(n: usize, d: usize, trials: usize, master_seed: u64, threshold: f64) -> Result<SingularityPoint> {
    if trials == 0 {
        return Err(invalid("trials must be at least 1"));
    }
    let seed = point_seed(master_seed, d);
    let rows: Vec<(f64, bool, bool)> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<_> {
            let m = RowSupportMatrix::sample(n, n, d, &mut trial_stream(seed, t as u64))?;
            let s = singular_values(&m.to_dense())?;
            let (s1, sn) = (s[0], *s.last().expect("n >= 1"));
            Ok((sn, sn <= n as f64 * f64::EPSILON * s1, zero_columns(&m) > 0))
        })
        .collect::<Result<_>>()?;
    let hits: Vec<usize> = rows.iter().enumerate().filter(|(_, r)| r.0 <= threshold).map(|(i, _)| i).collect();
    let freq = hits.len() as f64 / trials as f64;
    Ok(SingularityPoint {
        d,
        trials,
        threshold,
        freq,
        freq_se: proportion_se(freq, trials),
        hits,
        numerically_singular: rows.iter().filter(|r| r.1).count(),
        zero_column: rows.iter().filter(|r| r.2).count(),
        s_min: rows.iter().map(|r| r.0).collect(),
    })
}

pub fn singularity_frequency(sweep: &ThresholdSweep, threshold: f64) -> Result<Vec<SingularityPoint>> {
    sweep.validate()?;
    sweep.d_values.iter().map(|&d| singularity_point(sweep.n, d, sweep.trials, sweep.master_seed, threshold)).collect()
}

/// `P(X >= 1)` under a Poisson approximation with mean `mean_x`.
pub fn poisson_zero_column_estimate(mean_x: f64) -> f64 {
    1.0 - (-mean_x).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub d: usize,
    pub trials: usize,
    pub freq_zero_col: f64,
    pub mean_x: f64,
    #[serde(rename = "formula_EX")]
    pub formula_ex: f64,
    pub freq_singular: f64,
}

/// Joins the two per-`d` tables into rows of the sweep CSV.
pub fn sweep_rows(zero: &[ZeroColumnPoint], sing: &[SingularityPoint]) -> Result<Vec<SweepRow>> {
    if zero.len() != sing.len() || zero.iter().zip(sing).any(|(a, b)| a.d != b.d) {
        return Err(invalid("zero-column and singularity tables disagree on d values"));
    }
    Ok(zero
        .iter()
        .zip(sing)
        .map(|(z, s)| SweepRow {
            d: z.d,
            trials: z.trials,
            freq_zero_col: z.freq,
            mean_x: z.mean_x,
            formula_ex: z.formula_ex,
            freq_singular: s.freq,
        })
        .collect())
}

/// CSV with header `d,trials,freq_zero_col,mean_X,formula_EX,freq_singular`.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("d,trials,freq_zero_col,mean_X,formula_EX,freq_singular\n");
    for r in rows {
        out.push_str(&format!("{},{},{:?},{:?},{:?},{:?}\n", r.d, r.trials, r.freq_zero_col, r.mean_x, r.formula_ex, r.freq_singular));
    }
    out
}
