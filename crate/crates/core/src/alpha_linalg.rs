//! Combinatorial linear algebra: α-determinants, permanents, cycle types and
//! the power-sum expansions of `Det(1 - zαJ)^{-1/α}`.
//!
//! Everything here is exact up to floating-point rounding and serves as the
//! reference layer for the faster spectral routines elsewhere in the crate.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Largest dimension accepted by [`alpha_det`] (permutation enumeration).
pub const ALPHA_DET_MAX_N: usize = 10;
/// Largest dimension accepted by [`permanent_ryser`].
pub const RYSER_MAX_N: usize = 24;
/// Largest order accepted by the partition expansion.
pub const PARTITION_MAX_N: usize = 40;

/// Square complex matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix(DMatrix<Complex64>);

impl SquareMatrix {
    /// Builds an `n × n` matrix from row-major entries.
    pub fn from_row_major(n: usize, entries: &[Complex64]) -> Result<Self> {
        if n == 0 || entries.len() != n * n {
            return Err(Error::InvalidInput(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                entries.len()
            )));
        }
        Self::from_matrix(DMatrix::from_row_slice(n, n, entries))
    }

    /// Builds a matrix from real row-major entries.
    pub fn from_real_row_major(n: usize, entries: &[f64]) -> Result<Self> {
        let c: Vec<Complex64> = entries.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_row_major(n, &c)
    }

    pub fn from_matrix(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::InvalidInput("matrix must be square and nonempty".into()));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("matrix entries must be finite".into()));
        }
        Ok(SquareMatrix(m))
    }

    pub fn from_real_matrix(m: &DMatrix<f64>) -> Result<Self> {
        Self::from_matrix(m.map(|x| Complex64::new(x, 0.0)))
    }

    pub fn identity(n: usize) -> Self {
        SquareMatrix(DMatrix::identity(n, n))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        SquareMatrix(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(values[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    /// Entry at 0-based row `i`, column `j`.
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.0
    }

    /// LU determinant.
    pub fn determinant(&self) -> Complex64 {
        self.0.clone().lu().determinant()
    }

    /// `Tr J^ℓ` for ℓ = 1..=n.
    pub fn power_traces(&self, n: usize) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(n);
        let mut p = self.0.clone();
        for l in 1..=n {
            if l > 1 {
                p = &p * &self.0;
            }
            out.push(p.trace());
        }
        out
    }
}

/// A permutation of {0, …, n−1}, stored by images.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    /// Validates that `images` is a bijection on {0, …, n−1}.
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || seen[i] {
                return Err(Error::InvalidInput(format!("{images:?} is not a permutation")));
            }
            seen[i] = true;
        }
        Ok(Permutation { images })
    }

    /// Builds from 1-based images as written in cycle notation tables.
    pub fn from_one_based(images: &[usize]) -> Result<Self> {
        if images.contains(&0) {
            return Err(Error::InvalidInput("1-based images must be positive".into()));
        }
        Self::new(images.iter().map(|&i| i - 1).collect())
    }

    pub fn identity(n: usize) -> Self {
        Permutation { images: (0..n).collect() }
    }

    pub fn n(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    /// `(self ∘ other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation { images: other.images.iter().map(|&i| self.images[i]).collect() }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.n()];
        for (i, &j) in self.images.iter().enumerate() {
            inv[j] = i;
        }
        Permutation { images: inv }
    }

    pub fn cycle_lengths(&self) -> Vec<usize> {
        cycle_lengths(&self.images)
    }

    pub fn cycle_type(&self) -> CycleType {
        CycleType::from_parts(self.cycle_lengths())
    }

    /// Sign `(−1)^{n − ν(σ)}`.
    pub fn sign(&self) -> i32 {
        if (self.n() - cycle_count(self)).is_multiple_of(2) {
            1
        } else {
            -1
        }
    }
}

fn cycle_lengths(images: &[usize]) -> Vec<usize> {
    let n = images.len();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        let mut len = 0;
        let mut i = s;
        while !seen[i] {
            seen[i] = true;
            i = images[i];
            len += 1;
        }
        out.push(len);
    }
    out
}

fn cycle_count_slice(images: &[usize]) -> usize {
    let n = images.len();
    let mut seen = [false; 32];
    let mut seen_vec;
    let seen: &mut [bool] = if n <= 32 {
        &mut seen[..n]
    } else {
        seen_vec = vec![false; n];
        &mut seen_vec
    };
    let mut count = 0;
    for s in 0..n {
        if seen[s] {
            continue;
        }
        count += 1;
        let mut i = s;
        while !seen[i] {
            seen[i] = true;
            i = images[i];
        }
    }
    count
}

/// Number of cycles ν(σ), fixed points included.
pub fn cycle_count(sigma: &Permutation) -> usize {
    cycle_count_slice(&sigma.images)
}

/// Partition of n, stored as nonincreasing parts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CycleType {
    parts: Vec<usize>,
}

impl CycleType {
    pub fn from_parts(mut parts: Vec<usize>) -> Self {
        parts.retain(|&p| p > 0);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        CycleType { parts }
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn n(&self) -> usize {
        self.parts.iter().sum()
    }

    /// Number of parts, i.e. ν(σ) for any σ of this type.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Map ℓ ↦ m_ℓ.
    pub fn multiplicities(&self) -> BTreeMap<usize, usize> {
        let mut m = BTreeMap::new();
        for &p in &self.parts {
            *m.entry(p).or_insert(0) += 1;
        }
        m
    }

    /// `Π ℓ^{m_ℓ} m_ℓ!`, the centralizer order.
    pub fn centralizer_order(&self) -> f64 {
        self.multiplicities()
            .iter()
            .map(|(&l, &m)| (l as f64).powi(m as i32) * factorial(m))
            .product()
    }

    /// Conjugacy class size `n! / Π ℓ^{m_ℓ} m_ℓ!`.
    pub fn class_size(&self) -> f64 {
        factorial(self.n()) / self.centralizer_order()
    }

    /// A representative permutation with consecutive cycles.
    pub fn representative(&self) -> Permutation {
        let n = self.n();
        let mut images = vec![0; n];
        let mut start = 0;
        for &l in &self.parts {
            for k in 0..l {
                images[start + k] = start + (k + 1) % l;
            }
            start += l;
        }
        Permutation { images }
    }

    pub fn sign(&self) -> i32 {
        if (self.n() - self.len()).is_multiple_of(2) {
            1
        } else {
            -1
        }
    }
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// All partitions of n in reverse lexicographic order.
pub fn partitions(n: usize) -> Result<Vec<CycleType>> {
    if n > PARTITION_MAX_N {
        return Err(Error::DimensionTooLarge { what: "partition enumeration", n, cap: PARTITION_MAX_N });
    }
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(rem: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<CycleType>) {
        if rem == 0 {
            out.push(CycleType { parts: cur.clone() });
            return;
        }
        for p in (1..=rem.min(max)).rev() {
            cur.push(p);
            rec(rem - p, p, cur, out);
            cur.pop();
        }
    }
    rec(n, n, &mut cur, &mut out);
    Ok(out)
}

/// Calls `f` on every permutation of {0, …, n−1} (Heap's algorithm).
pub fn for_each_permutation<F: FnMut(&[usize])>(n: usize, mut f: F) {
    let mut a: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    f(&a);
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            f(&a);
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Collects all permutations of {0, …, n−1}.
pub fn all_permutations(n: usize) -> Vec<Permutation> {
    let mut out = Vec::new();
    for_each_permutation(n, |p| out.push(Permutation { images: p.to_vec() }));
    out
}

/// α-determinant `Σ_σ α^{n−ν(σ)} Π_i A[i][σ(i)]` by enumeration.
pub fn alpha_det(a: &SquareMatrix, alpha: f64) -> Result<Complex64> {
    let n = a.n();
    if n > ALPHA_DET_MAX_N {
        return Err(Error::DimensionTooLarge { what: "alpha_det", n, cap: ALPHA_DET_MAX_N });
    }
    let apow: Vec<f64> = (0..=n).map(|k| alpha.powi(k as i32)).collect();
    let mut by_cycles = vec![Complex64::new(0.0, 0.0); n + 1];
    for_each_permutation(n, |p| {
        let mut prod = Complex64::new(1.0, 0.0);
        for (i, &j) in p.iter().enumerate() {
            prod *= a.get(i, j);
        }
        by_cycles[cycle_count_slice(p)] += prod;
    });
    Ok((1..=n).map(|nu| by_cycles[nu] * apow[n - nu]).sum())
}

/// Permanent by Ryser's inclusion–exclusion with Gray-code subset order, O(2^n n).
pub fn permanent_ryser(a: &SquareMatrix) -> Result<Complex64> {
    let n = a.n();
    if n > RYSER_MAX_N {
        return Err(Error::DimensionTooLarge { what: "permanent_ryser", n, cap: RYSER_MAX_N });
    }
    let mut row_sums = vec![Complex64::new(0.0, 0.0); n];
    let mut total = Complex64::new(0.0, 0.0);
    let mut gray: u64 = 0;
    for k in 1u64..(1u64 << n) {
        let next = k ^ (k >> 1);
        let changed = (gray ^ next).trailing_zeros() as usize;
        let added = next & (1 << changed) != 0;
        gray = next;
        for (i, rs) in row_sums.iter_mut().enumerate() {
            if added {
                *rs += a.get(i, changed);
            } else {
                *rs -= a.get(i, changed);
            }
        }
        let prod: Complex64 = row_sums.iter().product();
        let size = gray.count_ones() as usize;
        if (n - size).is_multiple_of(2) {
            total += prod;
        } else {
            total -= prod;
        }
    }
    Ok(total)
}

/// Source of the power traces `p_ℓ = Tr J^ℓ`.
#[derive(Debug, Clone, Copy)]
pub enum TraceSource<'a> {
    Spectrum(&'a [f64]),
    Matrix(&'a SquareMatrix),
}

impl TraceSource<'_> {
    /// `[p_1, …, p_n]`.
    pub fn power_traces(&self, n: usize) -> Vec<Complex64> {
        match self {
            TraceSource::Spectrum(g) => (1..=n)
                .map(|l| Complex64::new(g.iter().map(|x| x.powi(l as i32)).sum(), 0.0))
                .collect(),
            TraceSource::Matrix(m) => m.power_traces(n),
        }
    }
}

/// `Σ_{λ⊢n} α^{n−len λ} Π_ℓ p_ℓ^{m_ℓ} / (ℓ^{m_ℓ} m_ℓ!)`, the n-th coefficient of
/// `Det(1 − zαJ)^{−1/α}` grouped by cycle type.
pub fn power_sum_alpha_sum(source: TraceSource<'_>, alpha: f64, n: usize) -> Result<Complex64> {
    let parts = partitions(n)?;
    let p = source.power_traces(n);
    Ok(power_sum_alpha_sum_from_traces(&p, alpha, &parts))
}

fn power_sum_alpha_sum_from_traces(p: &[Complex64], alpha: f64, parts: &[CycleType]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for lam in parts {
        let mut term = Complex64::new(alpha.powi((lam.n() - lam.len()) as i32), 0.0);
        for (&l, &m) in &lam.multiplicities() {
            term *= p[l - 1].powu(m as u32) / ((l as f64).powi(m as i32) * factorial(m));
        }
        acc += term;
    }
    acc
}

/// The same coefficient as [`power_sum_alpha_sum`], by explicit enumeration of
/// S_n: `(1/n!) Σ_σ α^{n−ν(σ)} Π_{cycles} Tr J^{ℓ}`.
pub fn power_sum_alpha_sum_by_permutations(source: TraceSource<'_>, alpha: f64, n: usize) -> Result<Complex64> {
    if n > ALPHA_DET_MAX_N {
        return Err(Error::DimensionTooLarge { what: "permutation enumeration", n, cap: ALPHA_DET_MAX_N });
    }
    if n == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let p = source.power_traces(n);
    let mut acc = Complex64::new(0.0, 0.0);
    for_each_permutation(n, |s| {
        let lens = cycle_lengths(s);
        let mut term = Complex64::new(alpha.powi((n - lens.len()) as i32), 0.0);
        for l in lens {
            term *= p[l - 1];
        }
        acc += term;
    });
    Ok(acc / factorial(n))
}

/// Coefficients c_0..=c_nmax of `exp(Σ_ℓ α^{ℓ−1} z^ℓ p_ℓ/ℓ)` via
/// `n c_n = Σ_{ℓ=1}^{n} α^{ℓ−1} p_ℓ c_{n−ℓ}`.
pub fn vere_jones_coefficients(p: &[Complex64], alpha: f64, n_max: usize) -> Vec<Complex64> {
    assert!(p.len() >= n_max);
    let mut c = vec![Complex64::new(0.0, 0.0); n_max + 1];
    c[0] = Complex64::new(1.0, 0.0);
    for n in 1..=n_max {
        let mut s = Complex64::new(0.0, 0.0);
        let mut apow = 1.0;
        for l in 1..=n {
            s += apow * p[l - 1] * c[n - l];
            apow *= alpha;
        }
        c[n] = s / n as f64;
    }
    c
}

/// Elementary symmetric polynomials e_0..=e_n of `values`.
pub fn elementary_symmetric(values: &[f64], n: usize) -> Vec<f64> {
    let mut e = vec![0.0; n + 1];
    e[0] = 1.0;
    for &v in values {
        for k in (1..=n).rev() {
            e[k] += v * e[k - 1];
        }
    }
    e
}

/// Complete homogeneous symmetric polynomials h_0..=h_n of `values`.
pub fn complete_homogeneous(values: &[f64], n: usize) -> Vec<f64> {
    let mut h = vec![0.0; n + 1];
    h[0] = 1.0;
    for &v in values {
        for k in 1..=n {
            h[k] += v * h[k - 1];
        }
    }
    h
}
