//! Combinatorial and operator diagnostics of a sampled matrix: column sums,
//! the restricted operator norm `||M - EM||`, neighbor expansion, the
//! discrepancy property, row/column intersection laws, and the
//! negative-association tools (exact covariance, Bennett bound).
//!
//! Index sets are 0-based sorted vectors.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::index::sample as sample_indices;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Discrete, Hypergeometric};

use crate::combin::{binomial, for_each_with_first};
use crate::error::{invalid, Error, Result};
use crate::model::{expectation_matrix, RowSupportMatrix, SupportLists};
use crate::rng::{derive_seed, stream, trial_stream};
use crate::spectral::singular_values;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnSumEvent {
    pub holds: bool,
    pub max_col_sum: usize,
    /// `(1 + tau) m d / n`.
    pub threshold: f64,
}

/// Is every column sum at most `(1 + tau) m d / n`?
pub fn column_sum_event(m: &RowSupportMatrix, tau: f64) -> Result<ColumnSumEvent> {
    if !(tau > 0.0) {
        return Err(invalid(format!("tau must be positive, got {tau}")));
    }
    let max_col_sum = m.supports().column_sums().into_iter().max().unwrap_or(0);
    let threshold = (1.0 + tau) * m.m() as f64 * m.d() as f64 / m.n() as f64;
    Ok(ColumnSumEvent { holds: max_col_sum as f64 <= threshold, max_col_sum, threshold })
}

/// Upper bound `n exp(-m d tau^2 / (3n))` on the probability that the
/// column-sum event fails, valid for `0 < tau < 1`.
pub fn column_sum_failure_bound(n: usize, m: usize, d: usize, tau: f64) -> f64 {
    n as f64 * (-(m as f64) * d as f64 * tau * tau / (3.0 * n as f64)).exp()
}

/// `||M - EM||`, the largest singular value of the centered matrix.
pub fn restricted_norm(m: &RowSupportMatrix) -> Result<f64> {
    let centered = m.to_dense().sub(&expectation_matrix(m.n(), m.m(), m.d())?)?;
    Ok(singular_values(&centered)?.first().copied().unwrap_or(0.0))
}

/// Deterministic lower bound `sqrt(d(n-d)/n)` on `||M - EM||` for square `M`.
pub fn restricted_norm_lower_bound(n: usize, d: usize) -> f64 {
    (d as f64 * (n - d) as f64 / n as f64).sqrt()
}

/// Observed constant `||M - EM|| / (beta sqrt(k) sqrt(min{d, n-d} + gamma log n))`
/// with `k = ceil(m/n)`, for the tall case `m > n`.
pub fn tall_norm_constant(norm: f64, m: usize, n: usize, d: usize, beta: f64, gamma: f64) -> f64 {
    let k = m.div_ceil(n) as f64;
    let inner = d.min(n - d) as f64 + gamma * (n as f64).ln();
    norm / (beta * k.sqrt() * inner.sqrt())
}

fn check_indices(set: &[usize], bound: usize, what: &str) -> Result<()> {
    if let Some(&bad) = set.iter().find(|&&j| j >= bound) {
        return Err(invalid(format!("{what} index {bad} out of range 0..{bound}")));
    }
    Ok(())
}

/// In-neighbors `S(J, M)` (rows whose support meets `J`) and out-neighbors
/// `S(J, M^T)` (columns hit by some row in `J`).
pub fn in_out_neighbors(m: &RowSupportMatrix, j: &[usize]) -> Result<(Vec<usize>, Vec<usize>)> {
    if !m.is_square() {
        return Err(Error::NotSquare { rows: m.m(), cols: m.n() });
    }
    let n = m.n();
    check_indices(j, n, "J")?;
    let mut in_j = vec![false; n];
    j.iter().for_each(|&c| in_j[c] = true);
    let s_in = (0..n).filter(|&i| m.row(i).iter().any(|&c| in_j[c])).collect();
    let mut hit = vec![false; n];
    j.iter().flat_map(|&r| m.row(r)).for_each(|&c| hit[c] = true);
    let s_out = (0..n).filter(|&c| hit[c]).collect();
    Ok((s_in, s_out))
}

/// `n (1 - C(n-k, d)/C(n, d))`, the mean of `|S(J, M)|` for `|J| = k`.
pub fn expected_in_neighbors(n: usize, d: usize, k: usize) -> f64 {
    // C(n-k, d)/C(n, d) = prod_{i<d} (n-k-i)/(n-i)
    let ratio: f64 = (0..d).map(|i| (n as f64 - k as f64 - i as f64).max(0.0) / (n - i) as f64).product();
    n as f64 * (1.0 - ratio)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum ExpansionMode {
    /// Every `k`-subset; refused above [`EXHAUSTIVE_LIMIT`] subsets.
    Exhaustive,
    Sampled { trials: usize, seed: u64 },
}

/// Largest number of subsets scanned exhaustively.
pub const EXHAUSTIVE_LIMIT: u128 = 1_000_000;

impl ExpansionMode {
    /// Exhaustive when `C(n, k) <= 10^6`, otherwise sampled.
    pub fn auto(n: usize, k: usize, trials: usize, seed: u64) -> Self {
        if binomial(n as u64, k as u64) <= EXHAUSTIVE_LIMIT {
            ExpansionMode::Exhaustive
        } else {
            ExpansionMode::Sampled { trials, seed }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub k: usize,
    pub eps: f64,
    /// `(1 - eps) k d <= |S(J, M)| <= (1 + eps) k d` for every scanned `J`.
    pub holds_in: bool,
    /// `|S(J, M^T)| >= (1 - eps) k d` for every scanned `J`.
    pub holds_out: bool,
    /// Scanned set whose in-neighborhood deviates most from `kd`.
    #[serde(rename = "worst_J")]
    pub worst_j: Vec<usize>,
    pub worst_value: usize,
    /// Scanned set with the smallest out-neighborhood.
    #[serde(rename = "worst_out_J")]
    pub worst_out_j: Vec<usize>,
    pub worst_out_value: usize,
    pub subsets_scanned: u64,
    pub exhaustive: bool,
    /// `k <= eps n / d`, the range where expansion is expected.
    pub in_regime: bool,
}

struct Scan {
    dev: usize,
    worst: Vec<usize>,
    worst_value: usize,
    out_min: usize,
    worst_out: Vec<usize>,
    count: u64,
}

impl Scan {
    fn empty() -> Self {
        Scan { dev: 0, worst: Vec::new(), worst_value: 0, out_min: usize::MAX, worst_out: Vec::new(), count: 0 }
    }

    fn visit(&mut self, j: &[usize], s_in: usize, s_out: usize, kd: usize) {
        self.count += 1;
        let dev = s_in.abs_diff(kd);
        if self.worst.is_empty() || dev > self.dev || (dev == self.dev && j < &self.worst[..]) {
            self.dev = dev;
            self.worst = j.to_vec();
            self.worst_value = s_in;
        }
        if s_out < self.out_min || (s_out == self.out_min && j < &self.worst_out[..]) {
            self.out_min = s_out;
            self.worst_out = j.to_vec();
        }
    }

    /// Order-independent merge: ties resolve to the lexicographically smaller set.
    fn merge(mut self, o: Scan) -> Scan {
        self.count += o.count;
        if !o.worst.is_empty()
            && (self.worst.is_empty() || o.dev > self.dev || (o.dev == self.dev && o.worst < self.worst))
        {
            self.dev = o.dev;
            self.worst = o.worst;
            self.worst_value = o.worst_value;
        }
        if o.out_min < self.out_min || (o.out_min == self.out_min && o.worst_out < self.worst_out) {
            self.out_min = o.out_min;
            self.worst_out = o.worst_out;
        }
        self
    }
}

struct NeighborCounter<'a> {
    cols: &'a SupportLists,
    rows: &'a SupportLists,
    mark: Vec<u32>,
    stamp: u32,
}

impl<'a> NeighborCounter<'a> {
    fn new(rows: &'a SupportLists, cols: &'a SupportLists) -> Self {
        Self { cols, rows, mark: vec![0; rows.n_rows().max(rows.n_cols())], stamp: 0 }
    }

    fn union_size(&mut self, lists: &SupportLists, j: &[usize]) -> usize {
        self.stamp = self.stamp.wrapping_add(1);
        if self.stamp == 0 {
            self.mark.iter_mut().for_each(|x| *x = 0);
            self.stamp = 1;
        }
        let mut count = 0;
        for &a in j {
            for &b in lists.row(a) {
                if self.mark[b] != self.stamp {
                    self.mark[b] = self.stamp;
                    count += 1;
                }
            }
        }
        count
    }

    fn counts(&mut self, j: &[usize]) -> (usize, usize) {
        let cols = self.cols;
        let rows = self.rows;
        (self.union_size(cols, j), self.union_size(rows, j))
    }
}

/// Scans `k`-subsets `J` and tests the two-sided in-expansion bound and the
/// one-sided out-expansion bound. A sampled scan certifies only violations.
pub fn expansion_check(m: &RowSupportMatrix, k: usize, eps: f64, mode: ExpansionMode) -> Result<ExpansionReport> {
    if !m.is_square() {
        return Err(Error::NotSquare { rows: m.m(), cols: m.n() });
    }
    let (n, d) = (m.n(), m.d());
    if k == 0 || k > n {
        return Err(invalid(format!("need 1 <= k <= n, got k={k}")));
    }
    if !(eps >= 0.0) {
        return Err(invalid("eps must be nonnegative"));
    }
    let rows = m.supports();
    let cols = rows.transpose();
    let kd = k * d;
    let scan = match mode {
        ExpansionMode::Exhaustive => {
            let total = binomial(n as u64, k as u64);
            if total > EXHAUSTIVE_LIMIT {
                return Err(Error::BudgetExceeded { states: total, budget: EXHAUSTIVE_LIMIT });
            }
            (0..n)
                .into_par_iter()
                .map(|first| {
                    let mut counter = NeighborCounter::new(rows, &cols);
                    let mut scan = Scan::empty();
                    for_each_with_first(n, k, first, |j| {
                        let (a, b) = counter.counts(j);
                        scan.visit(j, a, b, kd);
                    });
                    scan
                })
                .reduce(Scan::empty, Scan::merge)
        }
        ExpansionMode::Sampled { trials, seed } => (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = trial_stream(seed, t as u64);
                let mut j = sample_indices(&mut rng, n, k).into_vec();
                j.sort_unstable();
                let mut counter = NeighborCounter::new(rows, &cols);
                let (a, b) = counter.counts(&j);
                let mut scan = Scan::empty();
                scan.visit(&j, a, b, kd);
                scan
            })
            .reduce(Scan::empty, Scan::merge),
    };
    let lo = (1.0 - eps) * kd as f64;
    let hi = (1.0 + eps) * kd as f64;
    let worst = scan.worst_value as f64;
    Ok(ExpansionReport {
        k,
        eps,
        holds_in: scan.count == 0 || (worst >= lo && worst <= hi),
        holds_out: scan.count == 0 || scan.out_min as f64 >= lo,
        worst_j: scan.worst,
        worst_value: scan.worst_value,
        worst_out_j: scan.worst_out,
        worst_out_value: if scan.count == 0 { 0 } else { scan.out_min },
        subsets_scanned: scan.count,
        exhaustive: matches!(mode, ExpansionMode::Exhaustive),
        in_regime: k as f64 <= eps * n as f64 / d as f64,
    })
}

/// `I^l`: rows meeting `J_l` in exactly one place and missing `J_r`;
/// `I^r` likewise with the roles swapped.
pub fn i_ell_i_r(a: &SupportLists, j_ell: &[usize], j_r: &[usize]) -> Result<(Vec<usize>, Vec<usize>)> {
    let n = a.n_cols();
    check_indices(j_ell, n, "J_l")?;
    check_indices(j_r, n, "J_r")?;
    let mut tag = vec![0u8; n];
    j_ell.iter().for_each(|&c| tag[c] = 1);
    for &c in j_r {
        if tag[c] == 1 {
            return Err(invalid(format!("J_l and J_r share index {c}")));
        }
        tag[c] = 2;
    }
    let mut il = Vec::new();
    let mut ir = Vec::new();
    for i in 0..a.n_rows() {
        let (mut l, mut r) = (0, 0);
        for &c in a.row(i) {
            match tag[c] {
                1 => l += 1,
                2 => r += 1,
                _ => {}
            }
        }
        if l == 1 && r == 0 {
            il.push(i);
        }
        if r == 1 && l == 0 {
            ir.push(i);
        }
    }
    Ok((il, ir))
}

/// `e_M(S, T)`: number of ones in the block `S x T`.
pub fn edge_count(a: &SupportLists, s: &[usize], t: &[usize]) -> Result<u64> {
    check_indices(s, a.n_rows(), "S")?;
    check_indices(t, a.n_cols(), "T")?;
    let mut in_t = vec![false; a.n_cols()];
    t.iter().for_each(|&c| in_t[c] = true);
    Ok(s.iter().map(|&i| a.row(i).iter().filter(|&&c| in_t[c]).count() as u64).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpParams {
    pub delta: f64,
    pub kappa1: f64,
    pub kappa2: f64,
}

impl DpParams {
    /// `delta = d/n`, `kappa1 = e^2`, `kappa2 = 2(4 + beta)`.
    pub fn for_model(n: usize, d: usize, beta: f64) -> Self {
        Self { delta: d as f64 / n as f64, kappa1: std::f64::consts::E.powi(2), kappa2: 2.0 * (4.0 + beta) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DpOutcome {
    Case1,
    Case2,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpReport {
    pub edges: u64,
    pub clause1: bool,
    pub clause2: bool,
    /// First clause that holds.
    pub outcome: DpOutcome,
}

pub fn dp_clauses(edges: u64, s: usize, t: usize, n: usize, p: &DpParams) -> DpReport {
    let e = edges as f64;
    let ratio = e / (p.delta * s as f64 * t as f64);
    let clause1 = ratio <= p.kappa1;
    let st = s.max(t) as f64;
    let lhs = if edges == 0 { 0.0 } else { e * ratio.ln() };
    let rhs = p.kappa2 * st * (std::f64::consts::E * n as f64 / st).ln();
    let clause2 = lhs <= rhs;
    let outcome = if clause1 {
        DpOutcome::Case1
    } else if clause2 {
        DpOutcome::Case2
    } else {
        DpOutcome::Fail
    };
    DpReport { edges, clause1, clause2, outcome }
}

pub fn discrepancy_check(a: &SupportLists, s: &[usize], t: &[usize], p: &DpParams) -> Result<DpReport> {
    if s.is_empty() || t.is_empty() {
        return Err(invalid("S and T must be nonempty"));
    }
    let e = edge_count(a, s, t)?;
    Ok(dp_clauses(e, s.len(), t.len(), a.n_cols(), p))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpScan {
    pub pairs_checked: u64,
    pub failures: u64,
}

/// All pairs `(S, T)` with `|S|, |T| <= 2`, plus `random_pairs` pairs of
/// uniformly random sizes in `3..=max(3, n/2)`.
pub fn discrepancy_scan(a: &SupportLists, p: &DpParams, random_pairs: usize, seed: u64) -> Result<DpScan> {
    let (m, n) = (a.n_rows(), a.n_cols());
    if m == 0 || n == 0 {
        return Err(invalid("empty matrix"));
    }
    let small = |len: usize| -> Vec<Vec<usize>> {
        let mut v: Vec<Vec<usize>> = (0..len).map(|i| vec![i]).collect();
        for i in 0..len {
            for j in i + 1..len {
                v.push(vec![i, j]);
            }
        }
        v
    };
    let (ss, ts) = (small(m), small(n));
    let mut bits = vec![false; m * n];
    for i in 0..m {
        a.row(i).iter().for_each(|&c| bits[i * n + c] = true);
    }
    let small_fail: u64 = ss
        .par_iter()
        .map(|s| {
            ts.iter()
                .filter(|t| {
                    let e = s.iter().map(|&i| t.iter().filter(|&&c| bits[i * n + c]).count() as u64).sum();
                    dp_clauses(e, s.len(), t.len(), n, p).outcome == DpOutcome::Fail
                })
                .count() as u64
        })
        .sum();
    let random_fail: u64 = (0..random_pairs)
        .into_par_iter()
        .map(|k| {
            use rand::Rng;
            let mut rng = stream(derive_seed(seed, k as u64));
            let hi_s = (m / 2).max(3).min(m);
            let hi_t = (n / 2).max(3).min(n);
            let s_len = if m <= 3 { m } else { rng.random_range(3..=hi_s) };
            let t_len = if n <= 3 { n } else { rng.random_range(3..=hi_t) };
            let s = sample_indices(&mut rng, m, s_len).into_vec();
            let t = sample_indices(&mut rng, n, t_len).into_vec();
            let e = s.iter().map(|&i| t.iter().filter(|&&c| bits[i * n + c]).count() as u64).sum();
            (dp_clauses(e, s_len, t_len, n, p).outcome == DpOutcome::Fail) as u64
        })
        .sum();
    Ok(DpScan { pairs_checked: (ss.len() * ts.len() + random_pairs) as u64, failures: small_fail + random_fail })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntersectionHistogram {
    pub k: usize,
    /// `counts[s]` rows with `|Supp R_i ∩ J| = s`.
    pub counts: Vec<u64>,
    /// Hypergeometric `C(k,s) C(n-k,d-s) / C(n,d)`.
    pub exact_pmf: Vec<f64>,
}

impl IntersectionHistogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        let t = self.total() as f64;
        self.counts.iter().enumerate().map(|(s, &c)| s as f64 * c as f64).sum::<f64>() / t
    }

    /// CSV with columns `size,count,exact_pmf`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("size,count,exact_pmf\n");
        for (s, (c, p)) in self.counts.iter().zip(&self.exact_pmf).enumerate() {
            out.push_str(&format!("{s},{c},{p:e}\n"));
        }
        out
    }
}

/// Hypergeometric pmf of `|Supp R ∩ J|` for a uniform `d`-subset `R` of
/// `[n]` and `|J| = k`.
pub fn intersection_pmf(n: usize, d: usize, k: usize) -> Result<Vec<f64>> {
    if d > n || k > n {
        return Err(invalid(format!("need d, k <= n, got n={n} d={d} k={k}")));
    }
    let h = Hypergeometric::new(n as u64, k as u64, d as u64).map_err(|e| invalid(e.to_string()))?;
    Ok((0..=k.min(d)).map(|s| h.pmf(s as u64)).collect())
}

pub fn intersection_histogram(m: &RowSupportMatrix, j: &[usize]) -> Result<IntersectionHistogram> {
    check_indices(j, m.n(), "J")?;
    let k = j.len();
    let exact_pmf = intersection_pmf(m.n(), m.d(), k)?;
    let mut in_j = vec![false; m.n()];
    j.iter().for_each(|&c| in_j[c] = true);
    let mut counts = vec![0u64; exact_pmf.len()];
    for row in m.rows() {
        counts[row.iter().filter(|&&c| in_j[c]).count()] += 1;
    }
    Ok(IntersectionHistogram { k, counts, exact_pmf })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnIntersectionCheck {
    /// Columns `i` with `|Supp R_i(M^T) ∩ J| >= A k d / n`.
    pub heavy: usize,
    /// `n / A`.
    pub bound: f64,
    pub holds: bool,
}

/// Counting bound: at most `n/A` columns meet the rows `J` in `A k d / n` or
/// more places.
pub fn column_intersection_check(m: &RowSupportMatrix, j: &[usize], a: f64) -> Result<ColumnIntersectionCheck> {
    if !m.is_square() {
        return Err(Error::NotSquare { rows: m.m(), cols: m.n() });
    }
    if !(a > 1.0) {
        return Err(invalid(format!("A must exceed 1, got {a}")));
    }
    check_indices(j, m.n(), "J")?;
    let n = m.n();
    let mut hits = vec![0usize; n];
    j.iter().flat_map(|&r| m.row(r)).for_each(|&c| hits[c] += 1);
    let thr = a * j.len() as f64 * m.d() as f64 / n as f64;
    let heavy = hits.iter().filter(|&&h| h as f64 >= thr).count();
    let bound = n as f64 / a;
    Ok(ColumnIntersectionCheck { heavy, bound, holds: heavy as f64 <= bound })
}

/// Exact `Cov(M_ij, M_ik)` for `j != k` in one row:
/// `d(d-1)/(n(n-1)) - d^2/n^2 = -d(n-d)/(n^2 (n-1))`.
pub fn na_covariance(n: usize, d: usize) -> Result<BigRational> {
    if n < 2 || d == 0 || d > n {
        return Err(invalid(format!("need n >= 2 and 1 <= d <= n, got n={n} d={d}")));
    }
    let (nb, db) = (BigInt::from(n), BigInt::from(d));
    let joint = BigRational::new(&db * (&db - 1), &nb * (&nb - 1));
    let marg = BigRational::new(&db * &db, &nb * &nb);
    Ok(joint - marg)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceEstimate {
    pub estimate: f64,
    pub se: f64,
    pub rows: usize,
}

/// Sample covariance of columns 0 and 1 across independent rows, with a
/// delta-method standard error.
pub fn na_covariance_empirical<'a>(rows: impl IntoIterator<Item = &'a [usize]>) -> Result<CovarianceEstimate> {
    let pairs: Vec<(f64, f64)> = rows
        .into_iter()
        .map(|r| (r.contains(&0) as u8 as f64, r.contains(&1) as u8 as f64))
        .collect();
    let n = pairs.len();
    if n < 2 {
        return Err(invalid("need at least two rows"));
    }
    let nf = n as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / nf;
    let cov = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / nf;
    let var_psi = pairs.iter().map(|p| ((p.0 - mx) * (p.1 - my) - cov).powi(2)).sum::<f64>() / (nf - 1.0);
    Ok(CovarianceEstimate { estimate: cov, se: (var_psi / nf).sqrt(), rows: n })
}

/// Weighted count `f_Q(M) = sum_ij Q_ij M_ij`.
pub fn f_q(q: &[Vec<f64>], m: &SupportLists) -> Result<f64> {
    if q.len() != m.n_rows() || q.iter().any(|r| r.len() != m.n_cols()) {
        return Err(Error::DimensionMismatch("Q and M differ in shape".into()));
    }
    Ok(q.iter().zip(m.rows()).map(|(qr, supp)| supp.iter().map(|&c| qr[c]).sum::<f64>()).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BennettBound {
    pub mu: f64,
    pub sigma2: f64,
    /// `exp(-(sigma^2/K^2) h(K t / sigma^2))`, `h(u) = (1+u) log(1+u) - u`.
    pub bound: f64,
    /// The weaker form `exp(-3 t^2 / (6 sigma^2 + 2 K t))`.
    pub bernstein: f64,
}

fn bennett_h(u: f64) -> f64 {
    (1.0 + u) * u.ln_1p() - u
}

/// Two-sided tail bound for `f_Q(M) - mu` when rows are uniform `d`-subsets
/// of `[n]` and `Q` has entries in `[0, K]`.
pub fn bennett_na_bound(q: &[Vec<f64>], d: usize, n: usize, t: f64, k: f64) -> Result<BennettBound> {
    if !(k > 0.0) || !(t >= 0.0) {
        return Err(invalid(format!("need K > 0 and t >= 0, got K={k} t={t}")));
    }
    if q.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch(format!("Q rows must have length n = {n}")));
    }
    if q.iter().flatten().any(|&x| !(0.0..=k).contains(&x)) {
        return Err(invalid("Q entries must lie in [0, K]"));
    }
    let p = d as f64 / n as f64;
    let mu = p * q.iter().flatten().sum::<f64>();
    let sigma2 = p * q.iter().flatten().map(|x| x * x).sum::<f64>();
    let (bound, bernstein) = if t == 0.0 {
        (1.0, 1.0)
    } else if sigma2 == 0.0 {
        (0.0, 0.0)
    } else {
        (
            (-(sigma2 / (k * k)) * bennett_h(k * t / sigma2)).exp(),
            (-3.0 * t * t / (6.0 * sigma2 + 2.0 * k * t)).exp(),
        )
    };
    Ok(BennettBound { mu, sigma2, bound, bernstein })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub t: f64,
    pub upper: f64,
    pub lower: f64,
    /// Binomial standard errors of the two frequencies.
    pub se_upper: f64,
    pub se_lower: f64,
    pub bound: f64,
}

/// Empirical `P(f_Q - mu >= t)` and `P(f_Q - mu <= -t)` over `samples`
/// independent matrices with `q.len()` rows.
pub fn bennett_empirical_tails(
    q: &[Vec<f64>],
    n: usize,
    d: usize,
    k: f64,
    ts: &[f64],
    samples: usize,
    seed: u64,
) -> Result<Vec<TailRow>> {
    let m = q.len();
    let values: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = trial_stream(seed, s as u64);
            let mat = RowSupportMatrix::sample(n, m, d, &mut rng)?;
            f_q(q, mat.supports())
        })
        .collect::<Result<_>>()?;
    let sf = samples as f64;
    ts.iter()
        .map(|&t| {
            let b = bennett_na_bound(q, d, n, t, k)?;
            let upper = values.iter().filter(|&&v| v - b.mu >= t).count() as f64 / sf;
            let lower = values.iter().filter(|&&v| v - b.mu <= -t).count() as f64 / sf;
            Ok(TailRow {
                t,
                upper,
                lower,
                se_upper: crate::stats::proportion_se(upper, samples),
                se_lower: crate::stats::proportion_se(lower, samples),
                bound: b.bound,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{Signed, Zero};
    use rand::Rng;

    fn identity(n: usize) -> RowSupportMatrix {
        RowSupportMatrix::from_supports(n, 1, (0..n).map(|i| vec![i]).collect()).unwrap()
    }

    fn all_ones(n: usize) -> RowSupportMatrix {
        RowSupportMatrix::from_supports(n, n, vec![(0..n).collect(); n]).unwrap()
    }

    #[test]
    fn column_sum_examples() {
        let ev = column_sum_event(&identity(5), 0.5).unwrap();
        assert!(ev.holds && ev.max_col_sum == 1);
        let ev = column_sum_event(&all_ones(4), 0.1).unwrap();
        assert!(ev.holds && ev.max_col_sum == 4);
        assert!(column_sum_event(&identity(3), 0.0).is_err());
        assert!((column_sum_failure_bound(1000, 1000, 50, 0.5) - 1000.0 * (-50.0f64 / 12.0).exp()).abs() < 1e-9);
    }

    #[test]
    fn restricted_norm_examples() {
        assert!((restricted_norm(&identity(2)).unwrap() - 1.0).abs() < 1e-12);
        assert!((restricted_norm_lower_bound(2, 1) - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(restricted_norm(&all_ones(5)).unwrap() < 1e-12);
    }

    #[test]
    fn restricted_norm_lower_bound_and_transpose() {
        let mut rng = stream(9);
        for _ in 0..20 {
            let (n, d) = (30, rng.random_range(1..30));
            let m = RowSupportMatrix::sample(n, n, d, &mut rng).unwrap();
            let r = restricted_norm(&m).unwrap();
            assert!(r >= restricted_norm_lower_bound(n, d) * (1.0 - 1e-12));
            let centered = m.to_dense().sub(&expectation_matrix(n, n, d).unwrap()).unwrap();
            let rt = singular_values(&centered.transpose()).unwrap()[0];
            assert!((r - rt).abs() < 1e-9);
        }
    }

    #[test]
    fn neighbor_examples() {
        let (a, b) = in_out_neighbors(&identity(4), &[0]).unwrap();
        assert_eq!((a, b), (vec![0], vec![0]));
        let mut rng = stream(1);
        let m = RowSupportMatrix::sample(12, 12, 3, &mut rng).unwrap();
        let all: Vec<usize> = (0..12).collect();
        assert_eq!(in_out_neighbors(&m, &all).unwrap().0, all);
        for _ in 0..50 {
            let k = rng.random_range(1..6);
            let j = sample_indices(&mut rng, 12, k).into_vec();
            assert!(in_out_neighbors(&m, &j).unwrap().1.len() <= 3 * k);
        }
        assert!(in_out_neighbors(&m, &[12]).is_err());
        let total: usize = (0..12).map(|c| in_out_neighbors(&m, &[c]).unwrap().1.len()).sum();
        assert_eq!(total, 12 * 3);
    }

    #[test]
    fn expansion_examples() {
        let rep = expansion_check(&identity(6), 1, 0.0, ExpansionMode::Exhaustive).unwrap();
        assert!(rep.holds_in && rep.holds_out);
        assert_eq!(rep.subsets_scanned, 6);
        let same = RowSupportMatrix::from_supports(8, 2, vec![vec![0, 1]; 8]).unwrap();
        let rep = expansion_check(&same, 1, 0.1, ExpansionMode::Exhaustive).unwrap();
        assert!(!rep.holds_in);
        assert_eq!(rep.worst_value, 8);
        assert_eq!(rep.worst_j, vec![0]);
        assert!(matches!(
            expansion_check(&identity(60), 10, 0.1, ExpansionMode::Exhaustive),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn expansion_scan_is_deterministic_and_exhaustive() {
        let mut rng = stream(77);
        let m = RowSupportMatrix::sample(16, 16, 3, &mut rng).unwrap();
        let a = expansion_check(&m, 3, 0.3, ExpansionMode::Exhaustive).unwrap();
        let b = expansion_check(&m, 3, 0.3, ExpansionMode::Exhaustive).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.subsets_scanned as u128, binomial(16, 3));
        let (s_in, _) = in_out_neighbors(&m, &a.worst_j).unwrap();
        assert_eq!(s_in.len(), a.worst_value);
        let s = expansion_check(&m, 3, 0.3, ExpansionMode::Sampled { trials: 200, seed: 5 }).unwrap();
        assert_eq!(s, expansion_check(&m, 3, 0.3, ExpansionMode::Sampled { trials: 200, seed: 5 }).unwrap());
        assert!(s.worst_value.abs_diff(9) <= a.worst_value.abs_diff(9));
    }

    #[test]
    fn in_neighbor_mean_matches_formula() {
        let (n, d, k) = (40, 4, 3);
        let mut rng = stream(13);
        let trials = 4000;
        let mut sum = 0.0;
        let mut sq = 0.0;
        for _ in 0..trials {
            let m = RowSupportMatrix::sample(n, n, d, &mut rng).unwrap();
            let j = sample_indices(&mut rng, n, k).into_vec();
            let v = in_out_neighbors(&m, &j).unwrap().0.len() as f64;
            sum += v;
            sq += v * v;
        }
        let mean = sum / trials as f64;
        let se = ((sq / trials as f64 - mean * mean) / trials as f64).sqrt();
        assert!((mean - expected_in_neighbors(n, d, k)).abs() < 4.0 * se);
    }

    #[test]
    fn i_ell_i_r_examples() {
        let id = identity(4);
        let (l, r) = i_ell_i_r(id.supports(), &[0], &[1]).unwrap();
        assert_eq!((l.clone(), r.clone()), (vec![0], vec![1]));
        assert_eq!(i_ell_i_r(id.supports(), &[1], &[0]).unwrap(), (r, l));
        assert!(i_ell_i_r(id.supports(), &[1], &[1, 2]).is_err());
        let mut rng = stream(3);
        let m = RowSupportMatrix::sample(20, 20, 4, &mut rng).unwrap();
        let mt = m.transpose();
        let (l, _) = i_ell_i_r(&mt, &[0, 1, 2], &[3, 4, 5]).unwrap();
        assert!(l.len() <= 4 * 3);
    }

    #[test]
    fn edge_count_and_dp_examples() {
        let ones = all_ones(5);
        let p = DpParams::for_model(5, 5, 1.0);
        let rep = discrepancy_check(ones.supports(), &[0, 1], &[2, 3, 4], &p).unwrap();
        assert_eq!(rep.edges, 6);
        assert_eq!(rep.outcome, DpOutcome::Case1);
        let p = DpParams { delta: 0.5, kappa1: 0.1, kappa2: 0.0 };
        let r = dp_clauses(2, 2, 2, 10, &p);
        assert!(r.clause2 && !r.clause1 && r.outcome == DpOutcome::Case2);
        assert!(discrepancy_check(ones.supports(), &[], &[1], &p).is_err());
        let mut rng = stream(4);
        let m = RowSupportMatrix::sample(15, 15, 4, &mut rng).unwrap();
        let all: Vec<usize> = (0..15).collect();
        assert_eq!(edge_count(m.supports(), &all, &all).unwrap(), 60);
    }

    #[test]
    fn dp_scan_small_model() {
        let mut rng = stream(60);
        for s in 0..3 {
            let m = RowSupportMatrix::sample(60, 60, 8, &mut rng).unwrap();
            let scan = discrepancy_scan(m.supports(), &DpParams::for_model(60, 8, 1.0), 2000, s).unwrap();
            assert_eq!(scan.failures, 0);
        }
    }

    #[test]
    fn hypergeometric_examples() {
        let pmf = intersection_pmf(4, 2, 2).unwrap();
        assert!((pmf[2] - 1.0 / 6.0).abs() < 1e-12);
        for (n, d, k) in [(10, 3, 4), (50, 20, 25), (7, 7, 3)] {
            assert!((intersection_pmf(n, d, k).unwrap().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        let mut rng = stream(8);
        let m = RowSupportMatrix::sample(50, 10_000, 5, &mut rng).unwrap();
        let j: Vec<usize> = (0..10).collect();
        let h = intersection_histogram(&m, &j).unwrap();
        assert_eq!(h.total(), 10_000);
        assert!((h.mean() - 1.0).abs() < 0.03);
        assert!(h.to_csv().starts_with("size,count,exact_pmf\n0,"));
    }

    #[test]
    fn column_intersection_bound_always_holds() {
        let mut rng = stream(10);
        for _ in 0..30 {
            let m = RowSupportMatrix::sample(40, 40, 5, &mut rng).unwrap();
            let k = rng.random_range(1..40);
            let j = sample_indices(&mut rng, 40, k).into_vec();
            for a in [2.0, 4.0, 8.0] {
                assert!(column_intersection_check(&m, &j, a).unwrap().holds);
            }
        }
    }

    #[test]
    fn na_covariance_exact() {
        assert_eq!(na_covariance(4, 2).unwrap(), BigRational::new((-1).into(), 12.into()));
        assert!(na_covariance(6, 6).unwrap().is_zero());
        for n in 2..30usize {
            for d in 1..n {
                let c = na_covariance(n, d).unwrap();
                let closed = BigRational::new(BigInt::from(-((d * (n - d)) as i64)), BigInt::from((n * n * (n - 1)) as i64));
                assert_eq!(c, closed);
                assert!(c.is_negative());
            }
        }
        // enumerate the 6 rows of C(4,2)
        let rows: Vec<[u8; 4]> = vec![[1, 1, 0, 0], [1, 0, 1, 0], [1, 0, 0, 1], [0, 1, 1, 0], [0, 1, 0, 1], [0, 0, 1, 1]];
        let both = rows.iter().filter(|r| r[0] == 1 && r[1] == 1).count();
        let direct = BigRational::new(BigInt::from(both), 6.into()) - BigRational::new(1.into(), 4.into());
        assert_eq!(direct, na_covariance(4, 2).unwrap());
    }

    #[test]
    fn bennett_examples() {
        let q = vec![vec![1.0; 10]; 4];
        let b = bennett_na_bound(&q, 3, 10, 0.0, 1.0).unwrap();
        assert_eq!(b.bound, 1.0);
        assert!((b.mu - 12.0).abs() < 1e-12);
        let b = bennett_na_bound(&q, 3, 10, 2.0, 1.0).unwrap();
        assert!(b.bound <= b.bernstein && b.bound < 1.0);
        let mut rng = stream(2);
        let m = RowSupportMatrix::sample(10, 4, 3, &mut rng).unwrap();
        assert_eq!(f_q(&q, m.supports()).unwrap(), 12.0);
        assert!(bennett_na_bound(&[vec![-1.0; 10]], 3, 10, 1.0, 1.0).is_err());
        assert!(bennett_na_bound(&[vec![2.0; 10]], 3, 10, 1.0, 1.0).is_err());
        let tails = bennett_empirical_tails(&q, 10, 3, 1.0, &[0.5, 1.0], 200, 1).unwrap();
        assert!(tails.iter().all(|r| r.upper == 0.0 && r.lower == 0.0));
    }
}
