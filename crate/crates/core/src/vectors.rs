//! Vector classes used by the invertibility argument: nonincreasing
//! rearrangements, the parameter cascade `eps0, ell0, n1, n2, n3, r`, steep
//! and almost-constant vectors, the triple norm, and the rate functions.
//!
//! Order statistics are 1-based (`x*_1` is the largest modulus). At desk
//! scale the cascade often yields `n2 = 0` or `n3 = 0`; such indices are
//! clamped into `[1, n]` whenever an order statistic is read.

use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorProfile {
    pub x: Vec<Complex64>,
    /// Moduli in nonincreasing order.
    pub xstar: Vec<f64>,
    /// `xstar[i] = |x[sigma[i]]|`, ties broken by smaller original index.
    pub sigma: Vec<usize>,
}

impl VectorProfile {
    /// `x*_k` with `k` clamped into `[1, n]`.
    pub fn star(&self, k: usize) -> f64 {
        let n = self.xstar.len();
        self.xstar[k.clamp(1, n) - 1]
    }
}

pub fn rearrangement(x: &[Complex64]) -> VectorProfile {
    let moduli: Vec<f64> = x.iter().map(|z| z.norm()).collect();
    let mut sigma: Vec<usize> = (0..x.len()).collect();
    // stable sort keeps the smaller index first among equal moduli
    sigma.sort_by(|&a, &b| moduli[b].total_cmp(&moduli[a]));
    VectorProfile { x: x.to_vec(), xstar: sigma.iter().map(|&i| moduli[i]).collect(), sigma }
}

pub const DEFAULT_A1: f64 = 0.009;
pub const DEFAULT_A2: f64 = 0.0003;
pub const DEFAULT_A3: f64 = 0.00001;
pub const RELAXED_A1: f64 = 0.1;
pub const RELAXED_A2: f64 = 0.01;
pub const RELAXED_A3: f64 = 0.001;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassConstants {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    /// Skip the `a3 <= a2/30 <= a1/900` chain, the `2 <= d <= n/2` range and
    /// the requirement that `ell0 >= 2` whenever `n1 > 1`.
    pub relaxed: bool,
}

impl ClassConstants {
    pub fn strict() -> Self {
        Self { a1: DEFAULT_A1, a2: DEFAULT_A2, a3: DEFAULT_A3, relaxed: false }
    }

    /// Desk-scale preset; outside the constant regime of the theory.
    pub fn relaxed() -> Self {
        Self { a1: RELAXED_A1, a2: RELAXED_A2, a3: RELAXED_A3, relaxed: true }
    }
}

impl Default for ClassConstants {
    fn default() -> Self {
        Self::strict()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassParams {
    pub n: usize,
    pub d: usize,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub eps0: f64,
    pub ell0: u64,
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
    /// `ell0^r < n1 <= ell0^(r+1)`; present iff `n1 > 1` and `ell0 >= 2`.
    pub r: Option<u32>,
    pub delta: f64,
    pub rho: f64,
    #[serde(rename = "BT2")]
    pub bt2: f64,
    #[serde(rename = "BT3")]
    pub bt3: f64,
    #[serde(rename = "BT")]
    pub bt: f64,
    /// Largest rho admitted by both constraints `rho <= sqrt(n)/(B_T d^(3/4))`
    /// and `rho <= sqrt(n)/(5 B_T)`.
    pub rho_max: f64,
    pub relaxed: bool,
    /// `n1 > 1` but `ell0 < 2`, so no `r` exists; `T1` is treated as empty and
    /// the `n1 = 1` bounds are used. Only reachable in relaxed mode.
    pub degenerate_cascade: bool,
}

impl ClassParams {
    /// True when the `T1` classes exist.
    pub fn has_t1(&self) -> bool {
        self.n1 > 1 && self.r.is_some()
    }
}

/// Smallest `r >= 0` with `n1 <= ell0^(r+1)` (then `ell0^r < n1` as `n1 > 1`).
fn cascade_depth(ell0: u64, n1: usize) -> u32 {
    let mut r = 0u32;
    let mut pow = ell0 as u128;
    while pow < n1 as u128 {
        pow *= ell0 as u128;
        r += 1;
    }
    r
}

pub fn class_params(n: usize, d: usize, consts: ClassConstants, delta: f64, rho: f64) -> Result<ClassParams> {
    let ClassConstants { a1, a2, a3, relaxed } = consts;
    if n < 2 || d == 0 || d > n {
        return Err(invalid(format!("need n >= 2 and 1 <= d <= n, got n={n} d={d}")));
    }
    if !relaxed && (d < 2 || 2 * d > n) {
        return Err(invalid(format!("need 2 <= d <= n/2, got n={n} d={d}")));
    }
    if !(a1 > 0.0 && a2 > 0.0 && a3 > 0.0) {
        return Err(invalid("a1, a2, a3 must be positive"));
    }
    // the default constants sit exactly on both inequalities
    let slack = 1.0 + 1e-12;
    if !relaxed && !(a3 <= a2 / 30.0 * slack && a2 / 30.0 <= a1 / 900.0 * slack) {
        return Err(invalid(format!("constraint a3 <= a2/30 <= a1/900 violated by ({a1}, {a2}, {a3})")));
    }
    if !(delta > 0.0 && delta < 1.0) || !(rho > 0.0) {
        return Err(invalid(format!("need 0 < delta < 1 and rho > 0, got delta={delta} rho={rho}")));
    }
    let (nf, df) = (n as f64, d as f64);
    let ln = nf.ln();
    let eps0 = (48.0 * ln / df).sqrt();
    let ell0 = (1.0 / (100.0 * eps0)).floor() as u64;
    let n1 = (a1 * eps0 * nf / df).ceil() as usize;
    let n2 = (a2 * nf / df.powf(0.75)).floor() as usize;
    let n3 = (a3 * nf).floor() as usize;

    let (r, degenerate_cascade) = if n1 > 1 {
        if ell0 >= 2 {
            (Some(cascade_depth(ell0, n1)), false)
        } else if relaxed {
            (None, true)
        } else {
            return Err(invalid(format!("n1 = {n1} > 1 but ell0 = {ell0} < 2: no cascade depth r exists")));
        }
    } else {
        (None, false)
    };

    let (bt2, bt3, bt) = match r {
        Some(r) => {
            let six_d = (6.0 * df).powi(r as i32 + 1);
            let l4 = ln.powf(0.25);
            (six_d * df.powf(0.25) / (26.0 * l4), six_d * df / (26.0 * l4), six_d * 6.0 * df / (36.0 * l4))
        }
        None => (nf.sqrt(), (2.0 * nf).sqrt(), (2.0 * nf).sqrt()),
    };
    let rho_max = (nf.sqrt() / (bt * df.powf(0.75))).min(nf.sqrt() / (5.0 * bt));
    Ok(ClassParams {
        n,
        d,
        a1,
        a2,
        a3,
        eps0,
        ell0,
        n1,
        n2,
        n3,
        r,
        delta,
        rho,
        bt2,
        bt3,
        bt,
        rho_max,
        relaxed,
        degenerate_cascade,
    })
}

/// Witness search for almost-constant vectors: does some `lambda` in
/// `{x_1, ..., x_n, 0}` have more than `(1 - delta) n` coordinates within
/// `rho ||x|| / sqrt(n)`? Coordinates are tried in index order, then 0.
///
/// `false` does not exclude a center outside the candidate set at radius
/// `rho`, but it does exclude every center at radius `rho/2`.
pub fn is_almost_constant(x: &[Complex64], delta: f64, rho: f64) -> Result<(bool, Option<Complex64>)> {
    let radius = almost_constant_radius(x, delta, rho)?;
    let need = (1.0 - delta) * x.len() as f64;
    let grid = Grid::new(x, radius);
    let candidates = x.iter().copied().chain(std::iter::once(Complex64::new(0.0, 0.0)));
    for c in candidates {
        if grid.count_within(x, c) as f64 > need {
            return Ok((true, Some(c)));
        }
    }
    Ok((false, None))
}

/// Exact decision over all centers `lambda` in the plane by an angular sweep
/// (`O(n^2 log n)`). Intended as a reference for small `n`.
pub fn is_almost_constant_exact(x: &[Complex64], delta: f64, rho: f64) -> Result<(bool, Option<Complex64>)> {
    let radius = almost_constant_radius(x, delta, rho)?;
    let (count, center) = max_disk_cover(x, radius);
    Ok(if count as f64 > (1.0 - delta) * x.len() as f64 { (true, Some(center)) } else { (false, None) })
}

fn almost_constant_radius(x: &[Complex64], delta: f64, rho: f64) -> Result<f64> {
    if x.is_empty() {
        return Err(invalid("empty vector"));
    }
    if !(delta > 0.0 && delta < 1.0) || !(rho > 0.0) {
        return Err(invalid(format!("need 0 < delta < 1 and rho > 0, got delta={delta} rho={rho}")));
    }
    let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(invalid("zero vector"));
    }
    Ok(rho * norm / (x.len() as f64).sqrt())
}

/// Relative slack on the disk radius so that boundary points computed along
/// different floating-point routes still count.
const DISK_SLACK: f64 = 1e-12;

struct Grid {
    cell: f64,
    radius: f64,
    buckets: HashMap<(i64, i64), Vec<usize>>,
}

impl Grid {
    fn new(x: &[Complex64], radius: f64) -> Self {
        let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (i, z) in x.iter().enumerate() {
            buckets.entry(Self::key(*z, radius)).or_default().push(i);
        }
        Self { cell: radius, radius, buckets }
    }

    fn key(z: Complex64, cell: f64) -> (i64, i64) {
        ((z.re / cell).floor() as i64, (z.im / cell).floor() as i64)
    }

    fn count_within(&self, x: &[Complex64], c: Complex64) -> usize {
        let (kx, ky) = Self::key(c, self.cell);
        let lim = self.radius * (1.0 + DISK_SLACK);
        let mut count = 0;
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(ids) = self.buckets.get(&(kx + dx, ky + dy)) {
                    count += ids.iter().filter(|&&i| (x[i] - c).norm() <= lim).count();
                }
            }
        }
        count
    }
}

/// Largest number of points in a closed disk of the given radius, with a
/// center attaining it. Some optimal disk has a point on its boundary, so it
/// suffices to sweep centers on the circle of radius `radius` around each
/// point.
pub fn max_disk_cover(points: &[Complex64], radius: f64) -> (usize, Complex64) {
    use std::f64::consts::TAU;
    let mut best = (0usize, Complex64::new(0.0, 0.0));
    let lim = 2.0 * radius * (1.0 + DISK_SLACK);
    for (i, &p) in points.iter().enumerate() {
        let mut active = 1usize;
        // (angle, +1 enter / -1 exit)
        let mut events: Vec<(f64, i32)> = Vec::new();
        for (j, &q) in points.iter().enumerate() {
            if i == j {
                continue;
            }
            let dist = (q - p).norm();
            if dist > lim {
                continue;
            }
            if dist == 0.0 {
                active += 1;
                continue;
            }
            let phi = (q - p).arg();
            let half = (dist / (2.0 * radius)).min(1.0).acos();
            let start = (phi - half).rem_euclid(TAU);
            let end = start + 2.0 * half;
            if end >= TAU {
                active += 1;
                events.push((end - TAU, -1));
                events.push((start, 1));
            } else {
                events.push((start, 1));
                events.push((end, -1));
            }
        }
        events.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
        if active > best.0 {
            best = (active, p + Complex64::new(radius, 0.0));
        }
        let mut cur = active as i64;
        for &(angle, kind) in &events {
            cur += kind as i64;
            if cur as usize > best.0 {
                best = (cur as usize, p + Complex64::from_polar(radius, angle));
            }
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SteepClass {
    /// `T1_i`, `0 <= i <= r`.
    T1(u32),
    T2,
    T3,
    /// Not steep (the complement class).
    #[serde(rename = "none")]
    NotSteep,
}

impl std::fmt::Display for SteepClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SteepClass::T1(i) => write!(f, "T1_{i}"),
            SteepClass::T2 => f.write_str("T2"),
            SteepClass::T3 => f.write_str("T3"),
            SteepClass::NotSteep => f.write_str("none"),
        }
    }
}

fn ipow(base: u64, e: u32) -> usize {
    (base as u128).saturating_pow(e).min(usize::MAX as u128) as usize
}

/// First matching class in the order `T1_0, ..., T1_r, T2, T3`.
pub fn classify_steep(x: &[Complex64], params: &ClassParams) -> SteepClass {
    if x.is_empty() {
        return SteepClass::NotSteep;
    }
    classify_profile(&rearrangement(x), params)
}

pub fn classify_profile(p: &VectorProfile, params: &ClassParams) -> SteepClass {
    let six_d = 6.0 * params.d as f64;
    if let (true, Some(r)) = (params.n1 > 1, params.r) {
        let l = params.ell0;
        if p.star(1) > six_d * p.star((l as usize).min(params.n1)) {
            return SteepClass::T1(0);
        }
        for i in 1..r {
            if p.star(ipow(l, i)) > six_d * p.star(ipow(l, i + 1)) {
                return SteepClass::T1(i);
            }
        }
        if r >= 1 && p.star(ipow(l, r)) > six_d * p.star(params.n1) {
            return SteepClass::T1(r);
        }
    }
    if p.star(params.n1) > (params.d as f64).powf(0.75) * p.star(params.n2) {
        return SteepClass::T2;
    }
    if p.star(params.n2) > 4.0 * p.star(params.n3) {
        return SteepClass::T3;
    }
    SteepClass::NotSteep
}

/// `sqrt(||P_{e-perp} x||^2 + d ||P_e x||^2)` with `e = 1/sqrt(n)`.
pub fn triple_norm(x: &[Complex64], d: f64) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let n = x.len() as f64;
    let mean: Complex64 = x.iter().sum::<Complex64>() / n;
    let perp: f64 = x.iter().map(|z| (z - mean).norm_sqr()).sum();
    (perp + d * n * mean.norm_sqr()).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormBoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `||x||_2` against the class bound: `B(T2) x*_{n1}`, `B(T3) x*_{n2}`,
/// `B_T x*_{n3}` for non-steep vectors, and
/// `max{d^(1/4) (6d)^j / (15 log^(1/4) n), sqrt(2n)} x*_{ell0^j}` for `T1_j`.
pub fn class_norm_bound_check(x: &[Complex64], label: SteepClass, params: &ClassParams) -> Result<NormBoundCheck> {
    if x.len() != params.n {
        return Err(Error::DimensionMismatch(format!("vector of length {} for n = {}", x.len(), params.n)));
    }
    let p = rearrangement(x);
    let lhs = p.xstar.iter().map(|v| v * v).sum::<f64>().sqrt();
    let rhs = match label {
        SteepClass::T2 => params.bt2 * p.star(params.n1),
        SteepClass::T3 => params.bt3 * p.star(params.n2),
        SteepClass::NotSteep => params.bt * p.star(params.n3),
        SteepClass::T1(j) => {
            let r = params
                .r
                .filter(|_| params.n1 > 1)
                .ok_or_else(|| invalid("T1 label but the T1 classes are empty for these parameters"))?;
            if j > r {
                return Err(invalid(format!("T1_{j} label but r = {r}")));
            }
            let (nf, df) = (params.n as f64, params.d as f64);
            let c = (df.powf(0.25) * (6.0 * df).powi(j as i32) / (15.0 * nf.ln().powf(0.25))).max((2.0 * nf).sqrt());
            c * p.star(ipow(params.ell0, j))
        }
    };
    Ok(NormBoundCheck { lhs, rhs, holds: lhs <= rhs })
}

/// Absolute constants with no published values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateConstants {
    /// Prefactor of `theta` when `n1 = 1`.
    pub c1: f64,
    /// `C_2` in the exponent `alpha`.
    pub c2: f64,
    /// `c_0` in the density split of the singular value bound.
    pub c0: f64,
}

impl Default for RateConstants {
    fn default() -> Self {
        Self { c1: 1.0, c2: 1.0, c0: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub theta: f64,
    /// Only defined when the `T1` classes exist.
    pub omega: Option<f64>,
    pub alpha: f64,
    /// Exponent with `n^(-beta) = alpha_lower_bound`.
    pub beta: f64,
    pub alpha_lower_bound: f64,
}

/// `alpha = 2 log(6d) / log(d / (C_2 log n))`.
pub fn alpha_exponent(n: f64, d: f64, c2: f64) -> Result<f64> {
    let arg = d / (c2 * n.ln());
    if !(arg > 1.0) {
        return Err(invalid(format!("log argument d/(C2 log n) = {arg} must exceed 1")));
    }
    Ok(2.0 * (6.0 * d).ln() / arg.ln())
}

/// Lower bound on the singular value threshold for a given exponent `alpha`:
/// `1/(2 n d^(3/2))` when `d >= c0 n^(2/3) (log n)^(1/3)`, otherwise
/// `d^(3 alpha - 5.5) / (n^(2 alpha) (log n)^(alpha - 1/2))`.
pub fn alpha_lower_bound_at(n: f64, d: f64, alpha: f64, c0: f64) -> f64 {
    let ln = n.ln();
    if d >= c0 * n.powf(2.0 / 3.0) * ln.powf(1.0 / 3.0) {
        1.0 / (2.0 * n * d.powf(1.5))
    } else {
        (d.ln() * (3.0 * alpha - 5.5) - n.ln() * 2.0 * alpha - ln.ln() * (alpha - 0.5)).exp()
    }
}

pub fn rate_functions(params: &ClassParams, consts: &RateConstants) -> Result<Rates> {
    let (nf, df) = (params.n as f64, params.d as f64);
    let ln = nf.ln();
    let first = df.sqrt() / (4.0 * nf.sqrt());
    let (theta, omega) = match params.r.filter(|_| params.n1 > 1) {
        Some(r) => {
            let l = params.ell0 as f64;
            let second = 5.0 * l.powf(r as f64 / 2.0) * (df * ln).powf(0.25) / (6.0 * df).powi(r as i32);
            let third = 54.0 * ln.powf(0.25) * nf.sqrt() / (6.0 * df).powi(r as i32 + 2);
            (first.min(second).min(third), Some(first.min(second)))
        }
        None => (consts.c1 * (ln / df).powf(0.25), None),
    };
    let alpha = alpha_exponent(nf, df, consts.c2)?;
    let alpha_lower_bound = alpha_lower_bound_at(nf, df, alpha, consts.c0);
    Ok(Rates { theta, omega, alpha, beta: -alpha_lower_bound.ln() / ln, alpha_lower_bound })
}
