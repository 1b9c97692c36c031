//! Matrix ensembles and the deterministic transforms applied to them.
//!
//! Indices are 0-based in memory. The text format (`rcm n m d` header followed
//! by one support list per row) is 1-based.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::stream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Matrix width (number of columns).
    pub n: usize,
    /// Number of rows.
    pub m: usize,
    /// Ones per row.
    pub d: usize,
    pub seed: u64,
}

impl ModelParams {
    /// Square `n x n` model.
    pub fn new(n: usize, d: usize, seed: u64) -> Self {
        Self { n, m: n, d, seed }
    }

    pub fn with_rows(mut self, m: usize) -> Self {
        self.m = m;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return Err(invalid(format!("need n >= 1 and m >= 1, got n={} m={}", self.n, self.m)));
        }
        if self.d == 0 || self.d > self.n {
            return Err(invalid(format!("need 1 <= d <= n, got d={} n={}", self.d, self.n)));
        }
        Ok(())
    }
}

/// A general 0/1 matrix stored as per-row sorted support lists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportLists {
    cols: usize,
    rows: Vec<Vec<usize>>,
}

impl SupportLists {
    /// Builds from per-row supports; each list must be strictly increasing and
    /// inside `0..cols`.
    pub fn new(cols: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        for (i, r) in rows.iter().enumerate() {
            if r.windows(2).any(|w| w[0] >= w[1]) {
                return Err(invalid(format!("row {i}: support not strictly increasing")));
            }
            if r.last().is_some_and(|&j| j >= cols) {
                return Err(invalid(format!("row {i}: index out of range 0..{cols}")));
            }
        }
        Ok(Self { cols, rows })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i].binary_search(&j).is_ok()
    }

    pub fn transpose(&self) -> SupportLists {
        let mut t = vec![Vec::new(); self.cols];
        for (i, r) in self.rows.iter().enumerate() {
            for &j in r {
                t[j].push(i);
            }
        }
        SupportLists { cols: self.rows.len(), rows: t }
    }

    pub fn row_sums(&self) -> Vec<usize> {
        self.rows.iter().map(Vec::len).collect()
    }

    pub fn column_sums(&self) -> Vec<usize> {
        let mut c = vec![0usize; self.cols];
        for r in &self.rows {
            for &j in r {
                c[j] += 1;
            }
        }
        c
    }

    pub fn to_dense(&self) -> DenseComplexMatrix {
        let mut a = DenseComplexMatrix::zeros(self.rows.len(), self.cols);
        for (i, r) in self.rows.iter().enumerate() {
            for &j in r {
                a.set(i, j, Complex64::new(1.0, 0.0));
            }
        }
        a
    }
}

/// An `m x n` 0/1 matrix in which every row has exactly `d` ones.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowSupportMatrix {
    d: usize,
    lists: SupportLists,
}

impl RowSupportMatrix {
    /// Validates that every row has exactly `d` entries. `d = 0` is accepted
    /// here (it arises as the complement of the all-ones matrix) but never by
    /// the samplers.
    pub fn from_supports(n: usize, d: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(invalid("matrix needs at least one row"));
        }
        if d > n {
            return Err(invalid(format!("d={d} exceeds n={n}")));
        }
        if let Some(i) = rows.iter().position(|r| r.len() != d) {
            return Err(invalid(format!("row {i} has {} ones, expected {d}", rows[i].len())));
        }
        Ok(Self { d, lists: SupportLists::new(n, rows)? })
    }

    /// Samples `m` independent rows, each a uniform `d`-subset of `0..n`,
    /// using a partial Fisher-Yates shuffle of a persistent index array.
    pub fn sample<R: Rng + ?Sized>(n: usize, m: usize, d: usize, rng: &mut R) -> Result<Self> {
        ModelParams { n, m, d, seed: 0 }.validate()?;
        let mut idx: Vec<usize> = (0..n).collect();
        let mut rows = Vec::with_capacity(m);
        for _ in 0..m {
            rows.push(sample_subset(&mut idx, d, rng));
        }
        Ok(Self { d, lists: SupportLists { cols: n, rows } })
    }

    pub fn n(&self) -> usize {
        self.lists.cols
    }

    pub fn m(&self) -> usize {
        self.lists.rows.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn is_square(&self) -> bool {
        self.n() == self.m()
    }

    pub fn row(&self, i: usize) -> &[usize] {
        self.lists.row(i)
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        self.lists.rows()
    }

    pub fn supports(&self) -> &SupportLists {
        &self.lists
    }

    /// Support lists of `M^T` (column supports of `M`).
    pub fn transpose(&self) -> SupportLists {
        self.lists.transpose()
    }

    pub fn to_dense(&self) -> DenseComplexMatrix {
        self.lists.to_dense()
    }

    /// Row-major dense copy as `f64`.
    pub fn to_real(&self) -> Vec<f64> {
        let n = self.n();
        let mut out = vec![0.0; self.m() * n];
        for (i, r) in self.rows().iter().enumerate() {
            for &j in r {
                out[i * n + j] = 1.0;
            }
        }
        out
    }

    /// Writes the `rcm n m d` text format.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "rcm {} {} {}", self.n(), self.m(), self.d)?;
        let mut line = String::new();
        for r in self.rows() {
            line.clear();
            for (k, &j) in r.iter().enumerate() {
                if k > 0 {
                    line.push(' ');
                }
                let _ = write!(line, "{}", j + 1);
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty input".into()))??;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 || fields[0] != "rcm" {
            return Err(Error::Parse(format!("bad header {header:?}")));
        }
        let num = |s: &str| s.parse::<usize>().map_err(|e| Error::Parse(format!("{s:?}: {e}")));
        let (n, m, d) = (num(fields[1])?, num(fields[2])?, num(fields[3])?);
        let mut rows = Vec::with_capacity(m);
        for line in lines {
            let line = line?;
            if line.trim().is_empty() && d > 0 {
                continue;
            }
            let mut row = Vec::with_capacity(d);
            for tok in line.split_whitespace() {
                let j = num(tok)?;
                if j == 0 || j > n {
                    return Err(Error::Parse(format!("index {j} outside 1..={n}")));
                }
                row.push(j - 1);
            }
            rows.push(row);
        }
        if rows.len() != m {
            return Err(Error::Parse(format!("expected {m} rows, found {}", rows.len())));
        }
        Self::from_supports(n, d, rows)
    }
}

fn sample_subset<R: Rng + ?Sized>(idx: &mut [usize], d: usize, rng: &mut R) -> Vec<usize> {
    let n = idx.len();
    for k in 0..d {
        let j = rng.random_range(k..n);
        idx.swap(k, j);
    }
    let mut s = idx[..d].to_vec();
    s.sort_unstable();
    s
}

/// Draws a uniform element of `M_{n,d}` (or its `m x n` analogue) from the
/// stream seeded by `params.seed`.
pub fn sample_combinatorial(params: &ModelParams) -> Result<RowSupportMatrix> {
    let mut rng = stream(params.seed);
    RowSupportMatrix::sample(params.n, params.m, params.d, &mut rng)
}

/// `n x n` matrix with i.i.d. Bernoulli(`p`) entries.
pub fn sample_bernoulli<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<DenseComplexMatrix> {
    sample_bernoulli_rect(n, n, p, rng)
}

pub fn sample_bernoulli_rect<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    p: f64,
    rng: &mut R,
) -> Result<DenseComplexMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("Bernoulli parameter {p} outside [0,1]")));
    }
    let data = (0..rows * cols)
        .map(|_| Complex64::new(if rng.random_bool(p) { 1.0 } else { 0.0 }, 0.0))
        .collect();
    DenseComplexMatrix::from_vec(rows, cols, data)
}

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl DenseComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut a = Self::zeros(n, n);
        for i in 0..n {
            a.set(i, i, Complex64::new(1.0, 0.0));
        }
        a
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(invalid("matrix entries must be finite"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::from_vec(rows, cols, data.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Diagonal matrix with real entries.
    pub fn diag(values: &[f64]) -> Self {
        let mut a = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            a.set(i, i, Complex64::new(v, 0.0));
        }
        a
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// True when every imaginary part is exactly zero.
    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} minus {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    /// Keeps the listed rows, in order.
    pub fn select_rows(&self, keep: &[usize]) -> Self {
        let mut data = Vec::with_capacity(keep.len() * self.cols);
        for &i in keep {
            data.extend_from_slice(self.row(i));
        }
        Self { rows: keep.len(), cols: self.cols, data }
    }

    pub fn row_sums(&self) -> Vec<Complex64> {
        (0..self.rows).map(|i| self.row(i).iter().sum()).collect()
    }

    pub fn mat_vec(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} for {} columns",
                x.len(),
                self.cols
            )));
        }
        Ok((0..self.rows).map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum()).collect())
    }

    pub(crate) fn to_faer(&self) -> faer::Mat<Complex64> {
        faer::Mat::from_fn(self.rows, self.cols, |i, j| self.get(i, j))
    }

    pub(crate) fn to_faer_real(&self) -> faer::Mat<f64> {
        faer::Mat::from_fn(self.rows, self.cols, |i, j| self.get(i, j).re)
    }

    /// CSV export: one line per row, each entry written as `re,im`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut line = String::new();
        for i in 0..self.rows {
            line.clear();
            for (k, z) in self.row(i).iter().enumerate() {
                if k > 0 {
                    line.push(',');
                }
                let _ = write!(line, "{},{}", z.re, z.im);
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut data = Vec::new();
        let mut rows = 0;
        let mut cols = None;
        for line in r.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let vals = line
                .split(',')
                .map(|t| t.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{t:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            if vals.len() % 2 != 0 {
                return Err(Error::Parse("odd number of fields in a re,im row".into()));
            }
            let c = vals.len() / 2;
            if *cols.get_or_insert(c) != c {
                return Err(Error::Parse("ragged rows".into()));
            }
            data.extend(vals.chunks(2).map(|p| Complex64::new(p[0], p[1])));
            rows += 1;
        }
        Self::from_vec(rows, cols.unwrap_or(0), data)
    }
}

/// `1/sqrt(d(1-d/n))`, the circular-law normalization.
pub fn normalization_scale(n: usize, d: usize) -> Result<f64> {
    if d == 0 || d >= n {
        return Err(invalid(format!("normalization needs 0 < d < n, got d={d} n={n}")));
    }
    let (n, d) = (n as f64, d as f64);
    Ok(1.0 / (d * (1.0 - d / n)).sqrt())
}

/// `M / sqrt(d(1-d/n))` as a dense complex matrix.
pub fn normalize(m: &RowSupportMatrix) -> Result<DenseComplexMatrix> {
    let s = normalization_scale(m.n(), m.d())?;
    Ok(m.to_dense().scaled(s))
}

/// `A - z I`.
pub fn shift(a: &DenseComplexMatrix, z: Complex64) -> Result<DenseComplexMatrix> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let mut out = a.clone();
    for i in 0..a.rows() {
        let v = out.get(i, i) - z;
        out.set(i, i, v);
    }
    Ok(out)
}

/// `E M`: the `m x n` matrix with every entry `d/n`.
pub fn expectation_matrix(n: usize, m: usize, d: usize) -> Result<DenseComplexMatrix> {
    if n == 0 || d > n {
        return Err(invalid(format!("need d <= n and n >= 1, got d={d} n={n}")));
    }
    let v = Complex64::new(d as f64 / n as f64, 0.0);
    Ok(DenseComplexMatrix { rows: m, cols: n, data: vec![v; m * n] })
}

/// `E - M`, an element of `M_{n, n-d}`.
pub fn complement(m: &RowSupportMatrix) -> RowSupportMatrix {
    let n = m.n();
    let rows = m
        .rows()
        .iter()
        .map(|r| {
            let mut out = Vec::with_capacity(n - r.len());
            let mut it = r.iter().peekable();
            for j in 0..n {
                if it.peek() == Some(&&j) {
                    it.next();
                } else {
                    out.push(j);
                }
            }
            out
        })
        .collect();
    RowSupportMatrix { d: n - m.d(), lists: SupportLists { cols: n, rows } }
}
