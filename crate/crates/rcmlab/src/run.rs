//! Experiment execution and result bundles.
//!
//! Every trial of every `d` gets a global index `g = i_d * trials + t` and its
//! own stream seeded with `derive_seed(master, g)`. Trials run on a rayon
//! work queue and are collected in index order, so bundles do not depend on
//! the number of workers.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use rcm_core::circular::{metric_report, replacement_gap, Gap, MetricReport, ReferenceMeasure};
use rcm_core::distance::{distance_trial, summarize, DistanceExperiment, DistanceModel, DistanceSample};
use rcm_core::graph::{
    expansion_check, expected_in_neighbors, restricted_norm, restricted_norm_lower_bound, ExpansionMode, ExpansionReport,
};
use rcm_core::model::{normalization_scale, normalize, sample_bernoulli, shift};
use rcm_core::oracle::{
    bareiss_determinant, exact_singularity_probability, exact_zero_column_moments, EnumerationBudget, SingularityProbability,
    ZeroColumnMoments,
};
use rcm_core::spectral::{eigenvalues, singular_values, FaerBackend, SpectralBackend};
use rcm_core::stats::{mean_se, median, proportion_se};
use rcm_core::threshold::{
    default_singular_threshold, expected_zero_columns, paley_zygmund_bound, poisson_zero_column_estimate, sweep_csv,
    zero_column_second_moment_upper, SweepRow, ThresholdSweep,
};
use rcm_core::vectors::{
    class_params, classify_steep, is_almost_constant, rate_functions, ClassConstants, ClassParams, RateConstants,
};
use rcm_core::{derive_seed, stream, Complex64, RcmRng, RowSupportMatrix};
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, Kind, Preset};
use crate::error::{LabError, LabResult};
use crate::plot::plot_spectrum;

pub const THREADS_ENV: &str = "RCMLAB_THREADS";

const DEFAULT_COVERAGE_TOL: f64 = 0.1;
const DEFAULT_EXPANSION_EPS: f64 = 0.5;
const DEFAULT_DELTA: f64 = 0.1;
const DEFAULT_RHO: f64 = 0.1;
/// Random `k`-subsets per matrix when exhaustive expansion scans are too large.
const EXPANSION_SAMPLES: usize = 1000;

/// What [`run`] left on disk.
#[derive(Debug, Clone)]
pub struct Bundle {
    pub dir: PathBuf,
    pub trials: usize,
    pub plots: Vec<PathBuf>,
    pub summary: Value,
}

/// A single CSV field.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    F(f64),
    U(u64),
    B(bool),
    S(String),
    Missing,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(x) => fmt_f64(*x),
            Cell::U(x) => x.to_string(),
            Cell::B(b) => b.to_string(),
            Cell::S(s) => s.clone(),
            Cell::Missing => String::new(),
        }
    }
}

/// Shortest decimal that parses back to `x`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else {
        format!("{x:?}")
    }
}

struct Trial<T> {
    index: usize,
    seed: u64,
    d: usize,
    wall: f64,
    value: T,
}

struct Output {
    columns: Vec<&'static str>,
    rows: Vec<(usize, u64, usize, f64, Vec<Cell>)>,
    per_d: Vec<Value>,
    extra: BTreeMap<&'static str, Value>,
    plots: Vec<(String, Vec<Complex64>)>,
    files: Vec<(&'static str, String)>,
}

impl Output {
    fn new<T>(columns: Vec<&'static str>, trials: &[Trial<T>], cells: impl Fn(&T) -> Vec<Cell>) -> Self {
        let rows = trials.iter().map(|t| (t.index, t.seed, t.d, t.wall, cells(&t.value))).collect();
        Self { columns, rows, per_d: Vec::new(), extra: BTreeMap::new(), plots: Vec::new(), files: Vec::new() }
    }
}

/// Worker count from `RCMLAB_THREADS`, if set.
pub fn threads_from_env() -> LabResult<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(t) if t > 0 => Ok(Some(t)),
            _ => Err(LabError::Config(format!("{THREADS_ENV} must be a positive integer, got {s:?}"))),
        },
        Err(_) => Ok(None),
    }
}

pub fn run(cfg: &ExperimentConfig) -> LabResult<Bundle> {
    run_with_threads(cfg, threads_from_env()?)
}

/// Validates `cfg`, runs every trial on a pool of `threads` workers (rayon's
/// default when `None`) and writes the bundle to `cfg.out`.
pub fn run_with_threads(cfg: &ExperimentConfig, threads: Option<usize>) -> LabResult<Bundle> {
    cfg.validate_common()?;
    let plan = Plan::prepare(cfg)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| LabError::Config(format!("cannot build worker pool: {e}")))?;
    let start = Instant::now();
    let out = pool.install(|| plan.execute(cfg))?;
    let elapsed = start.elapsed().as_secs_f64();
    write_bundle(cfg, out, elapsed, pool.current_num_threads())
}

fn run_trials<T: Send>(
    cfg: &ExperimentConfig,
    f: impl Fn(usize, usize, u64, &mut RcmRng) -> LabResult<T> + Sync,
) -> LabResult<Vec<Trial<T>>> {
    let total = cfg.d.len() * cfg.trials;
    (0..total)
        .into_par_iter()
        .map(|g| {
            let d = cfg.d[g / cfg.trials];
            let local = g % cfg.trials;
            let seed = derive_seed(cfg.seed, g as u64);
            let t0 = Instant::now();
            let value = f(d, local, seed, &mut stream(seed))?;
            Ok(Trial { index: g, seed, d, wall: t0.elapsed().as_secs_f64(), value })
        })
        .collect()
}

/// Trials grouped by position in `cfg.d`.
fn groups<'a, T>(cfg: &'a ExperimentConfig, trials: &'a [Trial<T>]) -> impl Iterator<Item = (usize, &'a [Trial<T>])> + 'a {
    cfg.d.iter().copied().zip(trials.chunks(cfg.trials))
}

fn stats(xs: &[f64]) -> Value {
    let (mean, se) = mean_se(xs);
    let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    json!({ "mean": mean, "se": se, "min": min, "median": median(xs), "max": max })
}

fn z(cfg: &ExperimentConfig) -> Complex64 {
    Complex64::new(cfg.z_re, cfg.z_im)
}

fn zero_columns(m: &RowSupportMatrix) -> u64 {
    m.supports().column_sums().iter().filter(|&&c| c == 0).count() as u64
}

fn class_constants(cfg: &ExperimentConfig) -> ClassConstants {
    let mut c = match cfg.preset {
        Preset::Strict => ClassConstants::strict(),
        Preset::Relaxed => ClassConstants::relaxed(),
    };
    c.a1 = cfg.a1.unwrap_or(c.a1);
    c.a2 = cfg.a2.unwrap_or(c.a2);
    c.a3 = cfg.a3.unwrap_or(c.a3);
    c
}

fn need<T: Copy>(v: Option<T>, name: &str, kind: Kind) -> LabResult<T> {
    v.ok_or_else(|| LabError::Config(format!("{kind:?} experiments need `{name}`")))
}

/// Kind-specific state computed, and preconditions checked, before any trial.
enum Plan {
    Esd { tol: f64 },
    SsvSweep { threshold: f64, delta: f64, rho: f64, classes: Vec<Result<ClassParams, String>>, rate_consts: RateConstants },
    NormSweep,
    Expansion { k: usize, eps: f64 },
    Distance { setups: Vec<(DistanceExperiment, DistanceModel)> },
    Threshold { threshold: f64 },
    Oracle { exact: Vec<(SingularityProbability, ZeroColumnMoments)> },
    Replacement,
}

impl Plan {
    fn prepare(cfg: &ExperimentConfig) -> LabResult<Self> {
        let n = cfg.n;
        let kind = cfg.kind;
        let bad = |m: String| Err(LabError::Config(m));
        Ok(match kind {
            Kind::Esd => {
                for &d in &cfg.d {
                    normalization_scale(n, d)?;
                }
                let tol = cfg.coverage_tol.unwrap_or(DEFAULT_COVERAGE_TOL);
                if !(tol >= 0.0) {
                    return bad(format!("coverage_tol must be nonnegative, got {tol}"));
                }
                Plan::Esd { tol }
            }
            Kind::SsvSweep => {
                let delta = cfg.delta.unwrap_or(DEFAULT_DELTA);
                let rho = cfg.rho.unwrap_or(DEFAULT_RHO);
                if !(delta > 0.0 && delta < 1.0 && rho > 0.0) {
                    return bad(format!("need 0 < delta < 1 and rho > 0, got delta={delta} rho={rho}"));
                }
                let consts = class_constants(cfg);
                let classes = cfg.d.iter().map(|&d| class_params(n, d, consts, delta, rho).map_err(|e| e.to_string())).collect();
                let rate_consts = RateConstants {
                    c1: cfg.c1.unwrap_or(RateConstants::default().c1),
                    c2: cfg.c2.unwrap_or(RateConstants::default().c2),
                    ..RateConstants::default()
                };
                Plan::SsvSweep {
                    threshold: cfg.singular_threshold.unwrap_or_else(|| default_singular_threshold(n)),
                    delta,
                    rho,
                    classes,
                    rate_consts,
                }
            }
            Kind::NormSweep => {
                if let Some(&d) = cfg.d.iter().find(|&&d| d == n) {
                    return bad(format!("d = {d} = n makes M - EM vanish"));
                }
                Plan::NormSweep
            }
            Kind::Expansion => {
                let k = need(cfg.k, "k", kind)?;
                let eps = cfg.eps.unwrap_or(DEFAULT_EXPANSION_EPS);
                if k == 0 || k > n {
                    return bad(format!("need 1 <= k <= n, got k={k}"));
                }
                if !(eps >= 0.0) {
                    return bad(format!("eps must be nonnegative, got {eps}"));
                }
                Plan::Expansion { k, eps }
            }
            Kind::Distance => {
                let k = need(cfg.k, "k", kind)?;
                if k == 0 || k >= n {
                    return bad(format!("need 1 <= k < n, got k={k}"));
                }
                if cfg.p.is_some() && cfg.d.len() != 1 {
                    return bad("a Bernoulli distance run (p set) takes exactly one d value".into());
                }
                let mut setups = Vec::with_capacity(cfg.d.len());
                for &d in &cfg.d {
                    let (p, model) = match cfg.p {
                        Some(p) => (p, DistanceModel::Bernoulli),
                        None => (d as f64 / n as f64, DistanceModel::FixedSum { d }),
                    };
                    if !(p > 0.0 && p < 1.0) {
                        return bad(format!("distance experiments need 0 < p < 1, got p={p}"));
                    }
                    // the same frame for every d
                    let mut rng = stream(derive_seed(cfg.seed, u64::MAX));
                    setups.push((DistanceExperiment::random_frame(n, k, p, true, cfg.trials, &mut rng)?, model));
                }
                Plan::Distance { setups }
            }
            Kind::Threshold => {
                ThresholdSweep { n, d_values: cfg.d.clone(), trials: cfg.trials, master_seed: cfg.seed }.validate()?;
                Plan::Threshold { threshold: cfg.singular_threshold.unwrap_or_else(|| default_singular_threshold(n)) }
            }
            Kind::Oracle => {
                let budget = EnumerationBudget::default();
                let exact = cfg
                    .d
                    .iter()
                    .map(|&d| {
                        budget.check(n, d)?;
                        Ok((exact_singularity_probability(n, d, budget)?, exact_zero_column_moments(n, d, budget)?))
                    })
                    .collect::<rcm_core::Result<_>>()?;
                Plan::Oracle { exact }
            }
            Kind::Replacement => {
                for &d in &cfg.d {
                    normalization_scale(n, d)?;
                }
                Plan::Replacement
            }
        })
    }

    fn execute(&self, cfg: &ExperimentConfig) -> LabResult<Output> {
        let n = cfg.n;
        match self {
            Plan::Esd { tol } => {
                let trials = run_trials(cfg, |d, local, _, rng| {
                    let m = RowSupportMatrix::sample(n, n, d, rng)?;
                    let eigs = eigenvalues(&normalize(&m)?)?;
                    let rep = metric_report(&eigs, &ReferenceMeasure::Circular, *tol)?;
                    Ok((rep, (local == 0).then_some(eigs)))
                })?;
                let mut out = Output::new(vec!["ks_radial", "ks_angular", "coverage"], &trials, |(r, _): &(MetricReport, _)| {
                    vec![Cell::F(r.ks_radial), Cell::F(r.ks_angular), Cell::F(r.coverage.frac)]
                });
                for (d, g) in groups(cfg, &trials) {
                    let col = |f: fn(&MetricReport) -> f64| g.iter().map(|t| f(&t.value.0)).collect::<Vec<_>>();
                    let plot = if cfg.d.len() == 1 { "esd.svg".to_string() } else { format!("esd_d{d}.svg") };
                    out.per_d.push(json!({
                        "d": d,
                        "trials": g.len(),
                        "ks_radial": stats(&col(|r| r.ks_radial)),
                        "ks_angular": stats(&col(|r| r.ks_angular)),
                        "coverage": stats(&col(|r| r.coverage.frac)),
                        "coverage_tol": tol,
                        "plot": format!("plots/{plot}"),
                    }));
                    if let Some(eigs) = &g[0].value.1 {
                        out.plots.push((plot, eigs.clone()));
                    }
                }
                Ok(out)
            }
            Plan::SsvSweep { threshold, delta, rho, classes, rate_consts } => {
                let z = z(cfg);
                let trials = run_trials(cfg, |d, _, _, rng| {
                    let params = &classes[cfg.d.iter().position(|&x| x == d).expect("d from config")];
                    let m = RowSupportMatrix::sample(n, n, d, rng)?;
                    // the left singular vector of the transpose is the
                    // conjugated right singular vector
                    let a = shift(&m.to_dense(), z)?.transpose();
                    let (s_min, v) = FaerBackend.smallest_left_singular(&a)?;
                    let class = params.as_ref().ok().map(|p| classify_steep(&v, p).to_string());
                    let (almost_constant, _) = is_almost_constant(&v, *delta, *rho)?;
                    Ok((s_min, class, almost_constant))
                })?;
                let mut out = Output::new(
                    vec!["s_min", "below_threshold", "steep_class", "almost_constant"],
                    &trials,
                    |(s, c, ac): &(f64, Option<String>, bool)| {
                        vec![Cell::F(*s), Cell::B(*s <= *threshold), c.clone().map_or(Cell::Missing, Cell::S), Cell::B(*ac)]
                    },
                );
                for ((d, g), params) in groups(cfg, &trials).zip(classes) {
                    let s: Vec<f64> = g.iter().map(|t| t.value.0).collect();
                    let mut counts = BTreeMap::<String, usize>::new();
                    for t in g {
                        if let Some(c) = &t.value.1 {
                            *counts.entry(c.clone()).or_default() += 1;
                        }
                    }
                    let mut entry = json!({
                        "d": d,
                        "trials": g.len(),
                        "s_min_min": s.iter().copied().fold(f64::INFINITY, f64::min),
                        "s_min_median": median(&s),
                        "s_min_max": s.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                        "threshold": threshold,
                        "below_threshold": s.iter().filter(|&&x| x <= *threshold).count(),
                        "almost_constant": g.iter().filter(|t| t.value.2).count(),
                        "steep_class_counts": counts,
                    });
                    match params {
                        Ok(p) => {
                            entry["class_params"] = serde_json::to_value(p)?;
                            entry["rates"] = match rate_functions(p, rate_consts) {
                                Ok(r) => serde_json::to_value(r)?,
                                Err(e) => json!({ "error": e.to_string() }),
                            };
                        }
                        Err(e) => entry["class_params"] = json!({ "error": e }),
                    }
                    out.per_d.push(entry);
                }
                out.extra.insert("z", json!([cfg.z_re, cfg.z_im]));
                Ok(out)
            }
            Plan::NormSweep => {
                let trials = run_trials(cfg, |d, _, _, rng| Ok(restricted_norm(&RowSupportMatrix::sample(n, n, d, rng)?)?))?;
                let mut out = Output::new(vec!["norm", "ratio", "lower_bound_holds"], &trials, |_| Vec::new());
                for (row, t) in out.rows.iter_mut().zip(&trials) {
                    let lb = restricted_norm_lower_bound(n, t.d);
                    row.4 = vec![Cell::F(t.value), Cell::F(t.value / (t.d as f64).sqrt()), Cell::B(t.value >= lb)];
                }
                for (d, g) in groups(cfg, &trials) {
                    let norms: Vec<f64> = g.iter().map(|t| t.value).collect();
                    let ratios: Vec<f64> = norms.iter().map(|x| x / (d as f64).sqrt()).collect();
                    let lb = restricted_norm_lower_bound(n, d);
                    out.per_d.push(json!({
                        "d": d,
                        "trials": g.len(),
                        "lower_bound": lb,
                        "norm": stats(&norms),
                        "ratio": stats(&ratios),
                        "lower_bound_violations": norms.iter().filter(|&&x| x < lb).count(),
                    }));
                }
                Ok(out)
            }
            Plan::Expansion { k, eps } => {
                let (k, eps) = (*k, *eps);
                let trials = run_trials(cfg, |d, _, seed, rng| {
                    let m = RowSupportMatrix::sample(n, n, d, rng)?;
                    let mode = ExpansionMode::auto(n, k, EXPANSION_SAMPLES, derive_seed(seed, 0));
                    Ok(expansion_check(&m, k, eps, mode)?)
                })?;
                let mut out = Output::new(
                    vec!["holds_in", "holds_out", "worst_value", "worst_out_value", "subsets_scanned", "exhaustive"],
                    &trials,
                    |r: &ExpansionReport| {
                        vec![
                            Cell::B(r.holds_in),
                            Cell::B(r.holds_out),
                            Cell::U(r.worst_value as u64),
                            Cell::U(r.worst_out_value as u64),
                            Cell::U(r.subsets_scanned),
                            Cell::B(r.exhaustive),
                        ]
                    },
                );
                for (d, g) in groups(cfg, &trials) {
                    let frac = |f: fn(&ExpansionReport) -> bool| g.iter().filter(|t| f(&t.value)).count() as f64 / g.len() as f64;
                    out.per_d.push(json!({
                        "d": d,
                        "trials": g.len(),
                        "k": k,
                        "eps": eps,
                        "kd": k * d,
                        "expected_in_neighbors": expected_in_neighbors(n, d, k),
                        "frac_holds_in": frac(|r| r.holds_in),
                        "frac_holds_out": frac(|r| r.holds_out),
                        "in_regime": g[0].value.in_regime,
                    }));
                }
                Ok(out)
            }
            Plan::Distance { setups } => {
                let trials = run_trials(cfg, |d, _, _, rng| {
                    let (exp, model) = &setups[cfg.d.iter().position(|&x| x == d).expect("d from config")];
                    Ok(distance_trial(exp, rng, *model)?)
                })?;
                let mut out = Output::new(vec!["r", "r_squared", "px2", "cross"], &trials, |s: &DistanceSample| {
                    vec![Cell::F(s.r), Cell::F(s.r_squared), Cell::F(s.px2), Cell::F(s.cross)]
                });
                for ((d, g), (exp, model)) in groups(cfg, &trials).zip(setups) {
                    let samples: Vec<DistanceSample> = g.iter().map(|t| t.value).collect();
                    let mut entry = serde_json::to_value(summarize(exp, &samples)?)?;
                    entry["d"] = json!(d);
                    entry["k"] = json!(exp.k());
                    entry["p"] = json!(exp.p());
                    entry["model"] = serde_json::to_value(model)?;
                    entry["in_regime"] = json!(exp.in_regime());
                    out.per_d.push(entry);
                }
                Ok(out)
            }
            Plan::Threshold { threshold } => {
                let thr = *threshold;
                let trials = run_trials(cfg, |d, _, _, rng| {
                    let m = RowSupportMatrix::sample(n, n, d, rng)?;
                    let s = singular_values(&m.to_dense())?;
                    let (s1, sn) = (s[0], *s.last().expect("n >= 1"));
                    Ok((zero_columns(&m), sn, sn <= n as f64 * f64::EPSILON * s1))
                })?;
                let mut out = Output::new(
                    vec!["zero_columns", "s_min", "singular", "numerically_singular"],
                    &trials,
                    |&(x, s, ns): &(u64, f64, bool)| vec![Cell::U(x), Cell::F(s), Cell::B(s <= thr), Cell::B(ns)],
                );
                let mut rows = Vec::new();
                for (d, g) in groups(cfg, &trials) {
                    let tr = g.len();
                    let xs: Vec<f64> = g.iter().map(|t| t.value.0 as f64).collect();
                    let (mean_x, mean_x_se) = mean_se(&xs);
                    let freq_zero = xs.iter().filter(|&&x| x >= 1.0).count() as f64 / tr as f64;
                    let freq_sing = g.iter().filter(|t| t.value.1 <= thr).count() as f64 / tr as f64;
                    let formula_ex = expected_zero_columns(n, d);
                    let ex2 = zero_column_second_moment_upper(n, d);
                    let pz = if ex2 > 0.0 { paley_zygmund_bound(formula_ex, ex2, 0.0)? } else { 0.0 };
                    rows.push(SweepRow { d, trials: tr, freq_zero_col: freq_zero, mean_x, formula_ex, freq_singular: freq_sing });
                    out.per_d.push(json!({
                        "d": d,
                        "trials": tr,
                        "threshold": thr,
                        "freq_zero_col": freq_zero,
                        "freq_zero_col_se": proportion_se(freq_zero, tr),
                        "mean_X": mean_x,
                        "mean_X_se": mean_x_se,
                        "formula_EX": formula_ex,
                        "pz_lower": pz,
                        "poisson_estimate": poisson_zero_column_estimate(mean_x),
                        "freq_singular": freq_sing,
                        "freq_singular_se": proportion_se(freq_sing, tr),
                        "numerically_singular": g.iter().filter(|t| t.value.2).count(),
                    }));
                }
                out.files.push(("sweep.csv", sweep_csv(&rows)));
                Ok(out)
            }
            Plan::Oracle { exact } => {
                let trials = run_trials(cfg, |d, _, _, rng| {
                    let m = RowSupportMatrix::sample(n, n, d, rng)?;
                    let mut a = vec![vec![0i64; n]; n];
                    for (i, row) in m.rows().iter().enumerate() {
                        row.iter().for_each(|&j| a[i][j] = 1);
                    }
                    let det = bareiss_determinant(&a);
                    Ok((det.to_string(), zero_columns(&m)))
                })?;
                let mut out = Output::new(vec!["det", "singular", "zero_columns"], &trials, |(det, x): &(String, u64)| {
                    vec![Cell::S(det.clone()), Cell::B(det == "0"), Cell::U(*x)]
                });
                for ((d, g), (sp, zm)) in groups(cfg, &trials).zip(exact) {
                    let tr = g.len();
                    let p = sp.probability.to_f64();
                    let freq = g.iter().filter(|t| t.value.0 == "0").count() as f64 / tr as f64;
                    let xs: Vec<f64> = g.iter().map(|t| t.value.1 as f64).collect();
                    let (mean_x, mean_x_se) = mean_se(&xs);
                    let se = proportion_se(p, tr);
                    out.per_d.push(json!({
                        "d": d,
                        "trials": tr,
                        "singularity": sp,
                        "zero_column_moments": zm,
                        "exact_p_singular": p,
                        "freq_singular": freq,
                        "z_score": if se > 0.0 { (freq - p) / se } else { 0.0 },
                        "mean_X": mean_x,
                        "mean_X_se": mean_x_se,
                        "exact_EX": zm.ex.to_f64(),
                    }));
                }
                Ok(out)
            }
            Plan::Replacement => {
                let z = z(cfg);
                let trials = run_trials(cfg, |d, _, _, rng| {
                    let m = RowSupportMatrix::sample(n, n, d, rng)?;
                    let b = sample_bernoulli(n, d as f64 / n as f64, rng)?;
                    Ok(replacement_gap(&m.to_dense(), &b, d, z)?)
                })?;
                let mut out = Output::new(vec!["gap", "singular"], &trials, |g: &Gap| match g {
                    Gap::Finite(x) => vec![Cell::F(*x), Cell::B(false)],
                    Gap::Singular => vec![Cell::Missing, Cell::B(true)],
                });
                for (d, g) in groups(cfg, &trials) {
                    let gaps: Vec<f64> = g.iter().filter_map(|t| t.value.finite()).collect();
                    let abs: Vec<f64> = gaps.iter().map(|x| x.abs()).collect();
                    out.per_d.push(json!({
                        "d": d,
                        "trials": g.len(),
                        "singular": g.len() - gaps.len(),
                        "gap": stats(&gaps),
                        "median_abs_gap": median(&abs),
                    }));
                }
                out.extra.insert("z", json!([cfg.z_re, cfg.z_im]));
                Ok(out)
            }
        }
    }
}

fn write_bundle(cfg: &ExperimentConfig, out: Output, elapsed: f64, threads: usize) -> LabResult<Bundle> {
    let dir = cfg.out.clone();
    let plot_dir = dir.join("plots");
    fs::create_dir_all(&plot_dir)?;
    fs::write(dir.join("config.json"), cfg.to_json() + "\n")?;

    let mut w = csv::Writer::from_path(dir.join("trials.csv"))?;
    let mut header = vec!["trial", "seed", "d"];
    header.extend(&out.columns);
    w.write_record(&header)?;
    for (index, seed, d, _, cells) in &out.rows {
        let mut rec = vec![index.to_string(), seed.to_string(), d.to_string()];
        rec.extend(cells.iter().map(Cell::render));
        w.write_record(&rec)?;
    }
    w.flush()?;

    for (name, text) in &out.files {
        fs::write(dir.join(name), text)?;
    }
    let mut plots = Vec::new();
    for (name, eigs) in &out.plots {
        let path = plot_dir.join(name);
        plot_spectrum(eigs, &path)?;
        plots.push(path);
    }

    let walls: Vec<f64> = out.rows.iter().map(|r| r.3).collect();
    let mut summary = json!({
        "kind": cfg.kind,
        "n": cfg.n,
        "trials_per_d": cfg.trials,
        "seed": cfg.seed,
        "preset": cfg.preset,
        "per_d": out.per_d,
    });
    for (k, v) in out.extra {
        summary[k] = v;
    }
    summary["timing"] = json!({
        "total_seconds": elapsed,
        "trial_seconds": stats(&walls),
        "threads": threads,
    });
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    Ok(Bundle { dir, trials: out.rows.len(), plots, summary })
}

/// `summary` without its `timing` object, the part covered by the
/// reproducibility contract.
pub fn deterministic_summary(summary: &Value) -> Value {
    let mut s = summary.clone();
    if let Some(obj) = s.as_object_mut() {
        obj.remove("timing");
    }
    s
}

pub fn read_summary(dir: &Path) -> LabResult<Value> {
    Ok(serde_json::from_str(&fs::read_to_string(dir.join("summary.json"))?)?)
}
