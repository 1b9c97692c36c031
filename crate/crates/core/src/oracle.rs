//! Exhaustive enumeration of `M_{n,d}` for tiny `(n, d)`.
//!
//! A matrix is a tuple of row supports; supports are ranked in lexicographic
//! order and matrices are enumerated as an odometer over the ranks, row 0
//! most significant. All probabilities are exact fractions.

use std::collections::HashMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::combin::{binomial, binomial_big, next_combination};
use crate::error::{invalid, Error, Result};
use crate::model::RowSupportMatrix;
use crate::rng::trial_stream;
use crate::stats::{chi_square_gof, ChiSquareTest};

pub const DEFAULT_MAX_STATES: u128 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationBudget {
    pub max_states: u128,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        Self { max_states: DEFAULT_MAX_STATES }
    }
}

impl EnumerationBudget {
    /// Number of matrices `C(n,d)^n`, or an error when it exceeds the budget.
    pub fn check(&self, n: usize, d: usize) -> Result<u128> {
        if n == 0 || d == 0 || d > n {
            return Err(invalid(format!("need 1 <= d <= n, got n={n} d={d}")));
        }
        let c = binomial(n as u64, d as u64);
        let states = (0..n).try_fold(1u128, |acc, _| acc.checked_mul(c)).unwrap_or(u128::MAX);
        if states > self.max_states {
            return Err(Error::BudgetExceeded { states, budget: self.max_states });
        }
        Ok(states)
    }
}

/// A non-negative fraction kept unreduced (`21/27` stays `21/27`), compared by
/// value and serialized as the string `"num/den"`.
#[derive(Debug, Clone)]
pub struct ExactFraction {
    pub num: BigUint,
    pub den: BigUint,
}

impl ExactFraction {
    pub fn new(num: impl Into<BigUint>, den: impl Into<BigUint>) -> Self {
        Self { num: num.into(), den: den.into() }
    }

    pub fn value(&self) -> BigRational {
        BigRational::new(BigInt::from(self.num.clone()), BigInt::from(self.den.clone()))
    }

    pub fn to_f64(&self) -> f64 {
        crate::distance::ratio_to_f64(&self.value())
    }
}

impl PartialEq for ExactFraction {
    fn eq(&self, other: &Self) -> bool {
        &self.num * &other.den == &other.num * &self.den
    }
}

impl PartialEq<BigRational> for ExactFraction {
    fn eq(&self, other: &BigRational) -> bool {
        self.value() == *other
    }
}

impl fmt::Display for ExactFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl std::str::FromStr for ExactFraction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s.split_once('/').ok_or_else(|| Error::Parse(format!("not a fraction: {s:?}")))?;
        let num: BigUint = a.trim().parse().map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
        let den: BigUint = b.trim().parse().map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
        if den.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        Ok(Self { num, den })
    }
}

impl Serialize for ExactFraction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ExactFraction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

fn rational_string<S: Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(&format_args!("{}/{}", r.numer(), r.denom()))
}

fn rational_vec_strings<S: Serializer>(v: &[BigRational], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|r| format!("{}/{}", r.numer(), r.denom())))
}

/// All `d`-subsets of `0..n` in lexicographic order.
pub fn all_subsets(n: usize, d: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut c: Vec<usize> = (0..d).collect();
    loop {
        out.push(c.clone());
        if d == 0 || !next_combination(&mut c, n) {
            return out;
        }
    }
}

/// Lexicographic walk over `M_{n,d}`. [`MatrixEnumeration::advance`] reuses
/// internal buffers; the [`Iterator`] impl clones each matrix.
pub struct MatrixEnumeration {
    subsets: Vec<Vec<usize>>,
    ids: Vec<usize>,
    started: bool,
    done: bool,
}

impl MatrixEnumeration {
    /// Support ranks of the next matrix, or `None` after the last one.
    pub fn advance(&mut self) -> Option<&[usize]> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(&self.ids);
        }
        let c = self.subsets.len();
        for pos in (0..self.ids.len()).rev() {
            self.ids[pos] += 1;
            if self.ids[pos] < c {
                return Some(&self.ids);
            }
            self.ids[pos] = 0;
        }
        self.done = true;
        None
    }

    pub fn subset(&self, rank: usize) -> &[usize] {
        &self.subsets[rank]
    }
}

impl Iterator for MatrixEnumeration {
    type Item = Vec<Vec<usize>>;
    fn next(&mut self) -> Option<Self::Item> {
        self.advance()?;
        Some(self.ids.iter().map(|&i| self.subsets[i].clone()).collect())
    }
}

pub fn enumerate_matrices(n: usize, d: usize, budget: EnumerationBudget) -> Result<MatrixEnumeration> {
    budget.check(n, d)?;
    Ok(MatrixEnumeration { subsets: all_subsets(n, d), ids: vec![0; n], started: false, done: false })
}

/// Folds `step` over every matrix, splitting on the first row's support across
/// workers; partial results are merged in rank order.
fn fold_matrices<T, I, S, M>(n: usize, d: usize, budget: EnumerationBudget, init: I, step: S, merge: M) -> Result<(T, u128)>
where
    T: Send,
    I: Fn() -> T + Sync,
    S: Fn(&mut T, &[&[usize]]) + Sync,
    M: Fn(T, T) -> T,
{
    let total = budget.check(n, d)?;
    let subsets = all_subsets(n, d);
    let parts: Vec<T> = (0..subsets.len())
        .into_par_iter()
        .map(|first| {
            let mut acc = init();
            let mut ids = vec![0usize; n];
            ids[0] = first;
            let mut rows: Vec<&[usize]> = ids.iter().map(|&i| subsets[i].as_slice()).collect();
            loop {
                step(&mut acc, &rows);
                let mut pos = n - 1;
                loop {
                    if pos == 0 {
                        return acc;
                    }
                    ids[pos] += 1;
                    if ids[pos] < subsets.len() {
                        rows[pos] = &subsets[ids[pos]];
                        break;
                    }
                    ids[pos] = 0;
                    rows[pos] = &subsets[0];
                    pos -= 1;
                }
            }
        })
        .collect();
    let mut it = parts.into_iter();
    let first = it.next().expect("at least one support");
    Ok((it.fold(first, merge), total))
}

/// Exact determinant by fraction-free (Bareiss) elimination. Runs in `i64`
/// and restarts over big integers on overflow.
pub fn bareiss_determinant(a: &[Vec<i64>]) -> BigInt {
    let mut m = a.to_vec();
    match bareiss_i64(&mut m) {
        Some(v) => BigInt::from(v),
        None => bareiss_big(a.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()),
    }
}

fn bareiss_i64(a: &mut [Vec<i64>]) -> Option<i64> {
    let n = a.len();
    if n == 0 {
        return Some(1);
    }
    let mut sign = 1i64;
    let mut prev = 1i64;
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&r| a[r][k] != 0) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return Some(0),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = a[i][j].checked_mul(a[k][k])?.checked_sub(a[i][k].checked_mul(a[k][j])?)?;
                a[i][j] = v / prev;
            }
        }
        prev = a[k][k];
    }
    a[n - 1][n - 1].checked_mul(sign)
}

fn bareiss_big(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    negate = !negate;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    let det = a[n - 1][n - 1].clone();
    if negate {
        -det
    } else {
        det
    }
}

fn support_determinant(rows: &[&[usize]], scratch: &mut Vec<Vec<i64>>) -> BigInt {
    let n = rows.len();
    scratch.resize(n, Vec::new());
    for (r, s) in rows.iter().zip(scratch.iter_mut()) {
        s.clear();
        s.resize(n, 0);
        r.iter().for_each(|&c| s[c] = 1);
    }
    match bareiss_i64(scratch) {
        Some(v) => BigInt::from(v),
        None => bareiss_determinant(&rows.iter().map(|r| {
            let mut v = vec![0i64; n];
            r.iter().for_each(|&c| v[c] = 1);
            v
        }).collect::<Vec<_>>()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularityProbability {
    pub n: usize,
    pub d: usize,
    pub singular: u128,
    pub total: u128,
    pub probability: ExactFraction,
}

pub fn exact_singularity_probability(n: usize, d: usize, budget: EnumerationBudget) -> Result<SingularityProbability> {
    let ((singular, _), total) = fold_matrices(
        n,
        d,
        budget,
        || (0u128, Vec::new()),
        |acc, rows| {
            if support_determinant(rows, &mut acc.1).is_zero() {
                acc.0 += 1;
            }
        },
        |a, b| (a.0 + b.0, a.1),
    )?;
    Ok(SingularityProbability { n, d, singular, total, probability: ExactFraction::new(singular, total) })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroColumnMoments {
    pub n: usize,
    pub d: usize,
    /// Enumerated `E X` for `X` the number of zero columns.
    pub ex: ExactFraction,
    pub ex2: ExactFraction,
    /// `n (1 - d/n)^n`.
    #[serde(serialize_with = "rational_string")]
    pub formula_ex: BigRational,
    /// `q + ((n-1)/n) q^2` with `q = E X`.
    #[serde(serialize_with = "rational_string")]
    pub ex2_upper: BigRational,
    /// Enumerated probability that columns 0 and 1 are both zero (`n >= 2`).
    pub pair_zero: Option<ExactFraction>,
    /// `((n-d)(n-d-1)/(n(n-1)))^n`.
    #[serde(serialize_with = "option_rational_string")]
    pub pair_formula: Option<BigRational>,
    /// `P(X = x)` for `x = 0..=n`.
    pub x_pmf: Vec<ExactFraction>,
    pub ex_matches_formula: bool,
    pub ex2_within_bound: bool,
}

fn option_rational_string<S: Serializer>(r: &Option<BigRational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => rational_string(r, s),
        None => s.serialize_none(),
    }
}

fn rat(num: impl Into<BigInt>, den: impl Into<BigInt>) -> BigRational {
    BigRational::new(num.into(), den.into())
}

fn zero_column_count(rows: &[&[usize]], n: usize, seen: &mut Vec<bool>) -> usize {
    seen.clear();
    seen.resize(n, false);
    rows.iter().flat_map(|r| r.iter()).for_each(|&c| seen[c] = true);
    seen.iter().filter(|&&s| !s).count()
}

pub fn exact_zero_column_moments(n: usize, d: usize, budget: EnumerationBudget) -> Result<ZeroColumnMoments> {
    struct Acc {
        hist: Vec<u128>,
        pair: u128,
        seen: Vec<bool>,
    }
    let ((acc, _), total) = fold_matrices(
        n,
        d,
        budget,
        || (Acc { hist: vec![0; n + 1], pair: 0, seen: Vec::new() }, ()),
        |(a, _), rows| {
            let x = zero_column_count(rows, n, &mut a.seen);
            a.hist[x] += 1;
            if n >= 2 && !a.seen[0] && !a.seen[1] {
                a.pair += 1;
            }
        },
        |(mut a, _), (b, _)| {
            a.hist.iter_mut().zip(&b.hist).for_each(|(x, y)| *x += y);
            a.pair += b.pair;
            (a, ())
        },
    )?;
    let sum_x: u128 = acc.hist.iter().enumerate().map(|(x, c)| x as u128 * c).sum();
    let sum_x2: u128 = acc.hist.iter().enumerate().map(|(x, c)| (x * x) as u128 * c).sum();
    let ex = ExactFraction::new(sum_x, total);
    let ex2 = ExactFraction::new(sum_x2, total);
    let q = rat(BigInt::from(n) * BigInt::from(n - d).pow(n as u32), BigInt::from(n).pow(n as u32));
    let ex2_upper = &q + rat(n - 1, n) * &q * &q;
    let (pair_zero, pair_formula) = if n >= 2 {
        let f = rat(BigInt::from((n - d) * (n - d).saturating_sub(1)), BigInt::from(n * (n - 1))).pow(n as i32);
        (Some(ExactFraction::new(acc.pair, total)), Some(f))
    } else {
        (None, None)
    };
    Ok(ZeroColumnMoments {
        n,
        d,
        ex_matches_formula: ex == q,
        ex2_within_bound: ex2.value() <= ex2_upper,
        x_pmf: acc.hist.iter().map(|&c| ExactFraction::new(c, total)).collect(),
        ex,
        ex2,
        formula_ex: q,
        ex2_upper,
        pair_zero,
        pair_formula,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventProbabilities {
    pub n: usize,
    pub d: usize,
    pub p_zero_col: ExactFraction,
    pub p_dup_rows: ExactFraction,
    pub p_dup_cols: ExactFraction,
    pub p_singular: ExactFraction,
    /// Matrices with a zero column or duplicate rows/columns that are not
    /// singular. Always zero.
    pub containment_violations: u128,
}

pub fn exact_event_probabilities(n: usize, d: usize, budget: EnumerationBudget) -> Result<EventProbabilities> {
    if n > 64 {
        return Err(invalid("column bitmasks need n <= 64"));
    }
    #[derive(Default)]
    struct Acc {
        c: [u128; 5],
        seen: Vec<bool>,
        cols: Vec<u64>,
        scratch: Vec<Vec<i64>>,
    }
    let ((acc, _), total) = fold_matrices(
        n,
        d,
        budget,
        || (Acc::default(), ()),
        |(a, _), rows| {
            let zero = zero_column_count(rows, n, &mut a.seen) > 0;
            let dup_rows = (0..n).any(|i| (i + 1..n).any(|j| rows[i] == rows[j]));
            a.cols.clear();
            a.cols.resize(n, 0);
            for (i, r) in rows.iter().enumerate() {
                r.iter().for_each(|&c| a.cols[c] |= 1u64 << i);
            }
            let dup_cols = (0..n).any(|i| (i + 1..n).any(|j| a.cols[i] == a.cols[j]));
            let singular = support_determinant(rows, &mut a.scratch).is_zero();
            for (k, e) in [zero, dup_rows, dup_cols, singular].into_iter().enumerate() {
                a.c[k] += e as u128;
            }
            if (zero || dup_rows || dup_cols) && !singular {
                a.c[4] += 1;
            }
        },
        |(mut a, _), (b, _)| {
            a.c.iter_mut().zip(b.c).for_each(|(x, y)| *x += y);
            (a, ())
        },
    )?;
    let f = |c: u128| ExactFraction::new(c, total);
    Ok(EventProbabilities {
        n,
        d,
        p_zero_col: f(acc.c[0]),
        p_dup_rows: f(acc.c[1]),
        p_dup_cols: f(acc.c[2]),
        p_singular: f(acc.c[3]),
        containment_violations: acc.c[4],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionDistribution {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    /// `1 - C(n-k,d)/C(n,d)`.
    #[serde(serialize_with = "rational_string")]
    pub q: BigRational,
    /// Binomial(n, q) pmf of `|S(J, M)|`.
    #[serde(serialize_with = "rational_vec_strings")]
    pub pmf: Vec<BigRational>,
    /// Enumerated pmf, when the budget allows.
    pub enumerated: Option<Vec<ExactFraction>>,
    pub agrees: Option<bool>,
}

impl ExpansionDistribution {
    pub fn mean(&self) -> BigRational {
        BigRational::from_integer(BigInt::from(self.n)) * &self.q
    }
}

/// Exact law of `|S(J, M)|`, the number of rows meeting the column set `J`.
pub fn exact_expansion_distribution(n: usize, d: usize, j: &[usize], budget: EnumerationBudget) -> Result<ExpansionDistribution> {
    if d == 0 || d > n {
        return Err(invalid(format!("need 1 <= d <= n, got n={n} d={d}")));
    }
    let mut in_j = vec![false; n];
    for &c in j {
        if c >= n || in_j[c] {
            return Err(invalid(format!("J must hold distinct indices below {n}")));
        }
        in_j[c] = true;
    }
    let k = j.len();
    let q = BigRational::one()
        - rat(BigInt::from(binomial_big((n - k) as u64, d as u64)), BigInt::from(binomial_big(n as u64, d as u64)));
    let one_minus = BigRational::one() - &q;
    let pmf: Vec<BigRational> = (0..=n)
        .map(|s| {
            BigRational::from_integer(BigInt::from(binomial_big(n as u64, s as u64)))
                * q.pow(s as i32)
                * one_minus.pow((n - s) as i32)
        })
        .collect();
    let enumerated = match budget.check(n, d) {
        Ok(_) => {
            let (hist, total) = fold_matrices(
                n,
                d,
                budget,
                || vec![0u128; n + 1],
                |h, rows| h[rows.iter().filter(|r| r.iter().any(|&c| in_j[c])).count()] += 1,
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            )?;
            Some(hist.into_iter().map(|c| ExactFraction::new(c, total)).collect::<Vec<_>>())
        }
        Err(Error::BudgetExceeded { .. }) => None,
        Err(e) => return Err(e),
    };
    let agrees = enumerated.as_ref().map(|e| e.iter().zip(&pmf).all(|(a, b)| a == b));
    Ok(ExpansionDistribution { n, d, k, q, pmf, enumerated, agrees })
}

/// Chi-square test of the sampler against the uniform law on `M_{n,d}`.
/// Samples are drawn in chunks of 1000, chunk `c` from stream `(seed, c)`.
pub fn sampler_uniformity(n: usize, d: usize, samples: usize, seed: u64, budget: EnumerationBudget) -> Result<ChiSquareTest> {
    let states = budget.check(n, d)? as usize;
    let subsets = all_subsets(n, d);
    let rank: HashMap<&[usize], usize> = subsets.iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect();
    const CHUNK: usize = 1000;
    let chunks = samples.div_ceil(CHUNK);
    let counts = (0..chunks)
        .into_par_iter()
        .map(|c| -> Result<Vec<u64>> {
            let mut rng = trial_stream(seed, c as u64);
            let mut local = vec![0u64; states];
            for _ in 0..CHUNK.min(samples - c * CHUNK) {
                let m = RowSupportMatrix::sample(n, n, d, &mut rng)?;
                let idx = m.rows().iter().fold(0usize, |acc, r| acc * subsets.len() + rank[r.as_slice()]);
                local[idx] += 1;
            }
            Ok(local)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(vec![0u64; states], |mut a, b| {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
            a
        });
    chi_square_gof(&counts, &vec![1.0 / states as f64; states])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frac(a: u64, b: u64) -> ExactFraction {
        ExactFraction::new(a, b)
    }

    #[test]
    fn enumeration_counts_and_order() {
        assert_eq!(enumerate_matrices(3, 1, EnumerationBudget::default()).unwrap().count(), 27);
        assert_eq!(enumerate_matrices(2, 1, EnumerationBudget::default()).unwrap().count(), 4);
        let all: Vec<_> = enumerate_matrices(3, 3, EnumerationBudget::default()).unwrap().collect();
        assert_eq!(all, vec![vec![vec![0, 1, 2]; 3]]);
        let all: Vec<_> = enumerate_matrices(2, 1, EnumerationBudget::default()).unwrap().collect();
        assert_eq!(all, vec![vec![vec![0], vec![0]], vec![vec![0], vec![1]], vec![vec![1], vec![0]], vec![vec![1], vec![1]]]);
        assert_eq!(enumerate_matrices(4, 2, EnumerationBudget::default()).unwrap().count(), 1296);
        assert!(matches!(
            enumerate_matrices(3, 1, EnumerationBudget { max_states: 26 }),
            Err(Error::BudgetExceeded { states: 27, budget: 26 })
        ));
    }

    #[test]
    fn bareiss_examples() {
        assert_eq!(bareiss_determinant(&[vec![0, 1], vec![1, 0]]), BigInt::from(-1));
        assert_eq!(bareiss_determinant(&[vec![2, 0, 1], vec![1, 3, 2], vec![1, 1, 2]]), BigInt::from(6));
        assert_eq!(bareiss_determinant(&[vec![1, 1], vec![1, 1]]), BigInt::zero());
        let big = vec![vec![i64::MAX / 2, 3], vec![5, i64::MAX / 3]];
        let expect = BigInt::from(i64::MAX / 2) * BigInt::from(i64::MAX / 3) - 15;
        assert_eq!(bareiss_determinant(&big), expect);
    }

    #[test]
    fn singularity_examples() {
        let b = EnumerationBudget::default();
        let p = exact_singularity_probability(2, 1, b).unwrap();
        assert_eq!(p.probability, frac(1, 2));
        let p = exact_singularity_probability(3, 1, b).unwrap();
        assert_eq!(p.probability.to_string(), "21/27");
        assert_eq!(serde_json::to_string(&p.probability).unwrap(), "\"21/27\"");
        assert_eq!(exact_singularity_probability(3, 3, b).unwrap().probability, frac(1, 1));
    }

    #[test]
    fn zero_column_examples() {
        let b = EnumerationBudget::default();
        let z = exact_zero_column_moments(3, 1, b).unwrap();
        assert_eq!(z.ex, frac(8, 9));
        assert!(z.ex_matches_formula && z.ex2_within_bound);
        assert_eq!(exact_zero_column_moments(2, 2, b).unwrap().ex, frac(0, 1));
        let z = exact_zero_column_moments(4, 1, b).unwrap();
        assert_eq!(z.pair_zero.unwrap(), *z.pair_formula.as_ref().unwrap());
        assert_eq!(*z.pair_formula.as_ref().unwrap(), rat(1, 16));
    }

    #[test]
    fn event_examples() {
        let b = EnumerationBudget::default();
        let e = exact_event_probabilities(2, 1, b).unwrap();
        assert_eq!(e.p_dup_rows, frac(1, 2));
        assert_eq!(e.p_singular, frac(1, 2));
        assert_eq!(e.p_zero_col, frac(1, 2));
        let e = exact_event_probabilities(3, 3, b).unwrap();
        assert_eq!((e.p_dup_rows.clone(), e.p_dup_cols.clone(), e.p_zero_col.clone()), (frac(1, 1), frac(1, 1), frac(0, 1)));
        assert_eq!(e.containment_violations, 0);
    }

    #[test]
    fn expansion_examples() {
        let b = EnumerationBudget::default();
        let e = exact_expansion_distribution(3, 1, &[0], b).unwrap();
        assert_eq!(e.q, rat(1, 3));
        assert_eq!(e.pmf[0], rat(8, 27));
        assert_eq!(e.agrees, Some(true));
        let e = exact_expansion_distribution(4, 2, &[0, 1, 2, 3], b).unwrap();
        assert_eq!(e.pmf[4], BigRational::one());
        assert!(exact_expansion_distribution(30, 3, &[1, 2], b).unwrap().enumerated.is_none());
        assert!(exact_expansion_distribution(3, 1, &[0, 0], b).is_err());
    }

    #[test]
    fn fraction_parse_round_trip() {
        let f: ExactFraction = "21/27".parse().unwrap();
        assert_eq!(f, frac(7, 9));
        assert_eq!(f.to_string(), "21/27");
        assert!("3/0".parse::<ExactFraction>().is_err());
    }
}
