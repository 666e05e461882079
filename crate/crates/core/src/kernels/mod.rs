//! Torus heat-kernel spectra and kernels, the sandwiched operator
//! `G^{1/2} e^{−f} G^{1/2}` in the Fourier basis, Nyström discretizations on
//! the support of a test function, and the composite-particle operator.

mod composite;
mod nystrom;
mod test_function;

pub use composite::*;
pub use nystrom::*;
pub use test_function::TestFunction;

use crate::error::{Error, Result};
use crate::quadrature::{composite_gauss_legendre, pairwise_sum};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Spectral values below this are dropped by the tail rule.
pub const TAIL_CUTOFF: f64 = 1e-14;

/// Periodic box `[−L/2, L/2]^d` with Fourier modes `|k_i| ≤ M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusGrid {
    d: usize,
    l: f64,
    m: usize,
}

impl TorusGrid {
    pub fn new(d: usize, l: f64, m: usize) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(Error::InvalidInput(format!("dimension {d} not in 1..=3")));
        }
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::InvalidInput(format!("box side {l} must be positive")));
        }
        if m == 0 {
            return Err(Error::InvalidInput("mode cutoff must be at least 1".into()));
        }
        Ok(TorusGrid { d, l, m })
    }

    /// Grid whose cutoff is the smallest `M` with `exp(−β(2πM/L)²) < 1e−14`.
    pub fn with_tail_rule(d: usize, l: f64, beta: f64) -> Result<Self> {
        Self::new(d, l, heat_mode_cutoff(l, beta)?)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn basis_size(&self) -> usize {
        (2 * self.m + 1).pow(self.d as u32)
    }

    /// One-dimensional mode list `−M..=M`.
    pub fn modes_1d(&self) -> Vec<i64> {
        let m = self.m as i64;
        (-m..=m).collect()
    }
}

/// Smallest `M ≥ 1` with `exp(−β(2πM/L)²) < 1e−14`.
pub fn heat_mode_cutoff(l: f64, beta: f64) -> Result<usize> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidInput(format!("beta {beta} must be positive")));
    }
    let target = (-TAIL_CUTOFF.ln() / beta).sqrt() * l / (2.0 * PI);
    let mut m = (target.floor() as usize).max(1);
    while (-beta * (2.0 * PI * m as f64 / l).powi(2)).exp() >= TAIL_CUTOFF {
        m += 1;
    }
    while m > 1 && (-beta * (2.0 * PI * (m - 1) as f64 / l).powi(2)).exp() < TAIL_CUTOFF {
        m -= 1;
    }
    Ok(m)
}

/// Where a spectrum came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumOrigin {
    pub family: String,
    pub beta: Option<f64>,
    pub l: Option<f64>,
    pub cutoff: Option<usize>,
}

impl SpectrumOrigin {
    pub fn custom(family: &str) -> Self {
        SpectrumOrigin { family: family.to_string(), beta: None, l: None, cutoff: None }
    }
}

/// Nonincreasing list of nonnegative eigenvalues of a trace-class operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    values: Vec<f64>,
    origin: SpectrumOrigin,
}

impl Spectrum {
    /// Sorts the values in nonincreasing order; rejects negative or non-finite entries.
    pub fn new(mut values: Vec<f64>, origin: SpectrumOrigin) -> Result<Self> {
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidInput("spectrum values must be finite and nonnegative".into()));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Spectrum { values, origin })
    }

    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        Self::new(values, SpectrumOrigin::custom("custom"))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn origin(&self) -> &SpectrumOrigin {
        &self.origin
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest value, 0 for an empty spectrum.
    pub fn top(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn trace(&self) -> f64 {
        pairwise_sum(&self.values)
    }
}

/// `exp(−β(2πk/L)²)` for `k = −M..=M`.
pub fn heat_values_1d(l: f64, beta: f64, m: usize) -> Vec<f64> {
    let m = m as i64;
    (-m..=m).map(|k| (-beta * (2.0 * PI * k as f64 / l).powi(2)).exp()).collect()
}

/// Sorted heat spectrum `{exp(−β|2πk/L|²) : |k_i| ≤ M}`.
pub fn heat_spectrum(grid: &TorusGrid, beta: f64) -> Result<Spectrum> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidInput(format!("beta {beta} must be positive")));
    }
    let g1 = heat_values_1d(grid.l, beta, grid.m);
    let mut vals = g1.clone();
    for _ in 1..grid.d {
        vals = vals.iter().flat_map(|a| g1.iter().map(move |b| a * b)).collect();
    }
    Spectrum::new(
        vals,
        SpectrumOrigin { family: "heat".into(), beta: Some(beta), l: Some(grid.l), cutoff: Some(grid.m) },
    )
}

/// Heat kernel evaluated by the truncated Fourier sum and by the Gaussian image sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualValue {
    pub fourier: f64,
    pub images: f64,
}

impl DualValue {
    pub fn value(&self) -> f64 {
        self.fourier
    }

    pub fn discrepancy(&self) -> f64 {
        (self.fourier - self.images).abs()
    }
}

/// One-dimensional periodic heat kernel by its Fourier series.
pub fn heat_kernel_1d_fourier(l: f64, beta: f64, m: usize, r: f64) -> f64 {
    let mut terms = Vec::with_capacity(m + 1);
    terms.push(1.0);
    for k in 1..=m {
        let p = 2.0 * PI * k as f64 / l;
        terms.push(2.0 * (-beta * p * p).exp() * (p * r).cos());
    }
    pairwise_sum(&terms) / l
}

/// One-dimensional periodic heat kernel by the sum over images `Σ_n G(r + nL)`.
pub fn heat_kernel_1d_images(l: f64, beta: f64, r: f64) -> f64 {
    let norm = 1.0 / (4.0 * PI * beta).sqrt();
    let r = r - l * (r / l).round();
    let mut terms = vec![(-r * r / (4.0 * beta)).exp()];
    let mut n = 1i64;
    loop {
        let a = (-(r + n as f64 * l).powi(2) / (4.0 * beta)).exp();
        let b = (-(r - n as f64 * l).powi(2) / (4.0 * beta)).exp();
        terms.push(a + b);
        if a + b < 1e-18 * terms[0] || n > 100_000 {
            break;
        }
        n += 1;
    }
    norm * pairwise_sum(&terms)
}

/// `G_L(x, y)` by both evaluation routes (the kernel is a product over coordinates).
pub fn heat_kernel_torus(grid: &TorusGrid, beta: f64, x: &[f64], y: &[f64]) -> Result<DualValue> {
    if x.len() != grid.d || y.len() != grid.d {
        return Err(Error::InvalidInput("point dimension does not match the grid".into()));
    }
    let mut f = 1.0;
    let mut im = 1.0;
    for (xi, yi) in x.iter().zip(y) {
        f *= heat_kernel_1d_fourier(grid.l, beta, grid.m, xi - yi);
        im *= heat_kernel_1d_images(grid.l, beta, xi - yi);
    }
    Ok(DualValue { fourier: f, images: im })
}

/// Gauss–Legendre rule over the support of a one-dimensional test function,
/// split at its breakpoints, with enough panels per piece to resolve
/// oscillations up to `max_wavenumber` (radians per unit length).
pub fn support_rule(f: &TestFunction, max_wavenumber: f64, order: usize) -> (Vec<f64>, Vec<f64>) {
    let bps = &f.breakpoints()[0];
    let mut xs = Vec::new();
    let mut ws = Vec::new();
    for seg in bps.windows(2) {
        let len = seg[1] - seg[0];
        let cycles = len * max_wavenumber / (2.0 * PI);
        let panels = 8 * (cycles.ceil() as usize).max(1);
        let (x, w) = composite_gauss_legendre(seg[0], seg[1], panels, order);
        xs.extend(x);
        ws.extend(w);
    }
    (xs, ws)
}

/// `b_m = (1/L) ∫ (1 − e^{−f(x)}) e^{−2πimx/L} dx` for `m = 0..=m_max`
/// (negative indices are conjugates).
pub fn one_minus_exp_coefficients(f: &TestFunction, l: f64, m_max: usize) -> Vec<Complex64> {
    let (x, w) = support_rule(f, 2.0 * PI * m_max as f64 / l, 10);
    let s2: Vec<f64> = x.iter().map(|&xi| f.one_minus_exp(&[xi])).collect();
    (0..=m_max)
        .into_par_iter()
        .map(|m| {
            let q = 2.0 * PI * m as f64 / l;
            let re: Vec<f64> = x.iter().zip(&w).zip(&s2).map(|((xi, wi), si)| wi * si * (q * xi).cos()).collect();
            let im: Vec<f64> = x.iter().zip(&w).zip(&s2).map(|((xi, wi), si)| -wi * si * (q * xi).sin()).collect();
            Complex64::new(pairwise_sum(&re), pairwise_sum(&im)) / l
        })
        .collect()
}

/// Hermitian matrix in the truncated Fourier basis `{L^{−1/2} e^{2πikx/L} : |k| ≤ M}` (d = 1).
#[derive(Debug, Clone, PartialEq)]
pub struct FourierOperator {
    grid: TorusGrid,
    modes: Vec<i64>,
    matrix: DMatrix<Complex64>,
    label: String,
}

#[derive(Serialize)]
struct MatrixDump<'a> {
    label: &'a str,
    d: usize,
    l: f64,
    cutoff: usize,
    modes: &'a [i64],
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl FourierOperator {
    pub fn new(grid: TorusGrid, matrix: DMatrix<Complex64>, label: &str) -> Result<Self> {
        if grid.d != 1 {
            return Err(Error::InvalidInput("Fourier operators are built for d = 1".into()));
        }
        let n = 2 * grid.m + 1;
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::InvalidInput(format!("matrix must be {n}x{n}")));
        }
        Ok(FourierOperator { grid, modes: grid.modes_1d(), matrix, label: label.into() })
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn modes(&self) -> &[i64] {
        &self.modes
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `max |A − A*|`.
    pub fn hermitian_defect(&self) -> f64 {
        let a = &self.matrix;
        let mut worst: f64 = 0.0;
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues in nonincreasing order (not clamped).
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.matrix.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }

    /// Eigenvalues as a [`Spectrum`], with rounding-level negatives set to zero.
    pub fn spectrum(&self, origin: SpectrumOrigin) -> Result<Spectrum> {
        let ev = self.eigenvalues();
        if let Some(&low) = ev.last() {
            if low < -1e-10 {
                return Err(Error::InvalidInput(format!("operator is not positive semidefinite (eigenvalue {low:e})")));
            }
        }
        Spectrum::new(ev.into_iter().map(|v| v.max(0.0)).collect(), origin)
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// JSON dump `{label, d, l, cutoff, modes, re, im}` with row-major matrices.
    pub fn to_json(&self) -> Result<String> {
        let n = self.matrix.nrows();
        let rows = |f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
            (0..n).map(|i| (0..n).map(|j| f(&self.matrix[(i, j)])).collect()).collect()
        };
        let dump = MatrixDump {
            label: &self.label,
            d: self.grid.d,
            l: self.grid.l,
            cutoff: self.grid.m,
            modes: &self.modes,
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        };
        Ok(serde_json::to_string(&dump)?)
    }
}

/// `D (I − B) D` with `D = diag(d_k)` real and `B_{kl} = b_{k−l}`.
pub fn sandwich_matrix(d: &[f64], b: &[Complex64]) -> DMatrix<Complex64> {
    let n = d.len();
    DMatrix::from_fn(n, n, |i, j| {
        let diff = i as i64 - j as i64;
        let bm = if diff >= 0 { b[diff as usize] } else { b[(-diff) as usize].conj() };
        let delta = if i == j { 1.0 } else { 0.0 };
        (Complex64::new(delta, 0.0) - bm) * (d[i] * d[j])
    })
}

/// The heat operator `G_L` as a diagonal Fourier matrix.
pub fn build_heat_operator(grid: &TorusGrid, beta: f64) -> Result<FourierOperator> {
    let g = heat_values_1d(grid.l, beta, grid.m);
    let n = g.len();
    let m = DMatrix::from_fn(n, n, |i, j| if i == j { Complex64::new(g[i], 0.0) } else { Complex64::new(0.0, 0.0) });
    FourierOperator::new(*grid, m, "heat")
}

/// Multiplication by `e^{−f}` in the Fourier basis.
pub fn build_multiplication_operator(grid: &TorusGrid, f: &TestFunction) -> Result<FourierOperator> {
    f.check_inside_box(grid.l)?;
    let b = one_minus_exp_coefficients(f, grid.l, 2 * grid.m);
    let ones = vec![1.0; 2 * grid.m + 1];
    FourierOperator::new(*grid, sandwich_matrix(&ones, &b), "exp_minus_f")
}

/// `G̃_L = G_L^{1/2} e^{−f} G_L^{1/2}`: entries `√g_k (δ_{kl} − b_{k−l}) √g_l`.
pub fn build_gtilde(grid: &TorusGrid, beta: f64, f: &TestFunction) -> Result<FourierOperator> {
    if f.dim() != grid.d {
        return Err(Error::InvalidInput("test function dimension does not match the grid".into()));
    }
    if grid.d != 1 {
        return Err(Error::InvalidInput("the sandwiched operator is built for d = 1".into()));
    }
    f.check_inside_box(grid.l)?;
    let sq: Vec<f64> = heat_values_1d(grid.l, beta, grid.m).iter().map(|g| g.sqrt()).collect();
    let b = one_minus_exp_coefficients(f, grid.l, 2 * grid.m);
    FourierOperator::new(*grid, sandwich_matrix(&sq, &b), "gtilde")
}

/// `‖u_L − u‖_{L¹(R)}` where `u_L(p) = u(2πk/L)` on the cell of width `2π/L`
/// centered at `2πk/L`, integrated over `|p| ≤ p_max`. `u` is assumed even.
pub fn step_function_l1_gap<F: Fn(f64) -> f64 + Sync>(u: F, l: f64, p_max: f64) -> f64 {
    let h = 2.0 * PI / l;
    let kmax = (p_max / h).ceil() as i64;
    let (t, w) = crate::quadrature::gauss_legendre(20);
    let cell = |k: i64| -> f64 {
        let c = k as f64 * h;
        let uk = u(c);
        let mut acc = 0.0;
        for half in [-1.0, 1.0] {
            let (lo, hi) = if half < 0.0 { (c - 0.5 * h, c) } else { (c, c + 0.5 * h) };
            for (ti, wi) in t.iter().zip(&w) {
                let p = 0.5 * (lo + hi) + 0.5 * (hi - lo) * ti;
                acc += 0.5 * (hi - lo) * wi * (uk - u(p)).abs();
            }
        }
        acc
    };
    let parts: Vec<f64> = (0..=kmax).into_par_iter().map(|k| if k == 0 { cell(0) } else { 2.0 * cell(k) }).collect();
    pairwise_sum(&parts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heat_spectrum_small() {
        let grid = TorusGrid::new(1, 2.0 * PI, 1).unwrap();
        let s = heat_spectrum(&grid, 1.0).unwrap();
        let e = (-1.0f64).exp();
        assert_eq!(s.values().len(), 3);
        assert_eq!(s.values()[0], 1.0);
        assert!((s.values()[1] - e).abs() < 1e-15 && (s.values()[2] - e).abs() < 1e-15);
    }

    #[test]
    fn heat_trace_density() {
        let grid = TorusGrid::with_tail_rule(1, 40.0, 1.0).unwrap();
        let s = heat_spectrum(&grid, 1.0).unwrap();
        let rel = (s.trace() / 40.0 * (4.0 * PI).sqrt() - 1.0).abs();
        assert!(rel < 1e-3, "{rel}");
        let grid3 = TorusGrid::with_tail_rule(3, 6.0, 1.0).unwrap();
        let s3 = heat_spectrum(&grid3, 1.0).unwrap();
        assert_eq!(s3.top(), 1.0);
        assert_eq!(s3.values().iter().filter(|&&v| v == 1.0).count(), 1);
    }

    #[test]
    fn tail_rule_is_minimal() {
        for (l, beta) in [(10.0, 1.0), (37.0, 0.3), (5.0, 4.0)] {
            let m = heat_mode_cutoff(l, beta).unwrap();
            assert!((-beta * (2.0 * PI * m as f64 / l).powi(2)).exp() < TAIL_CUTOFF);
            if m > 1 {
                assert!((-beta * (2.0 * PI * (m - 1) as f64 / l).powi(2)).exp() >= TAIL_CUTOFF);
            }
        }
    }

    #[test]
    fn kernel_routes_agree_and_are_symmetric_periodic() {
        for (l, beta) in [(5.0, 1.0), (10.0, 0.5), (3.0, 2.0)] {
            let grid = TorusGrid::with_tail_rule(1, l, beta).unwrap();
            for i in 0..9 {
                let x = -0.5 * l + l * i as f64 / 9.0;
                for j in 0..9 {
                    let y = -0.5 * l + l * j as f64 / 8.7;
                    let v = heat_kernel_torus(&grid, beta, &[x], &[y]).unwrap();
                    assert!(v.discrepancy() < 1e-10);
                    let w = heat_kernel_torus(&grid, beta, &[y], &[x]).unwrap();
                    assert_eq!(v.fourier, w.fourier);
                    let p = heat_kernel_torus(&grid, beta, &[x + l], &[y]).unwrap();
                    assert!((p.fourier - v.fourier).abs() < 1e-12);
                    assert!(v.fourier > 0.0);
                }
            }
        }
        let grid = TorusGrid::with_tail_rule(1, 60.0, 1.0).unwrap();
        let v = heat_kernel_torus(&grid, 1.0, &[0.3], &[0.3]).unwrap();
        assert!((v.value() - 1.0 / (4.0 * PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn gtilde_with_zero_function_is_heat_operator() {
        let grid = TorusGrid::with_tail_rule(1, 10.0, 1.0).unwrap();
        let f = TestFunction::bump(1, 0.0, 2.0).unwrap();
        let gt = build_gtilde(&grid, 1.0, &f).unwrap();
        let g = build_heat_operator(&grid, 1.0).unwrap();
        assert!((gt.matrix() - g.matrix()).norm() < 1e-15);
    }

    #[test]
    fn gtilde_is_hermitian_and_interlaces() {
        let grid = TorusGrid::with_tail_rule(1, 12.0, 1.0).unwrap();
        let f = TestFunction::bump_at(1.5, 2.5, vec![0.7]).unwrap();
        let gt = build_gtilde(&grid, 1.0, &f).unwrap();
        assert!(gt.hermitian_defect() < 1e-14);
        let g = heat_spectrum(&grid, 1.0).unwrap();
        for (a, b) in gt.eigenvalues().iter().zip(g.values()) {
            assert!(*a <= b + 1e-10);
            assert!(*a >= -1e-12);
        }
    }

    #[test]
    fn support_escape_is_reported() {
        let grid = TorusGrid::with_tail_rule(1, 3.0, 1.0).unwrap();
        let f = TestFunction::bump(1, 1.0, 4.0).unwrap();
        assert!(matches!(build_gtilde(&grid, 1.0, &f), Err(Error::SupportEscapesBox { .. })));
    }

    #[test]
    fn json_dump_parses() {
        let grid = TorusGrid::new(1, 5.0, 2).unwrap();
        let op = build_heat_operator(&grid, 1.0).unwrap();
        let v: serde_json::Value = serde_json::from_str(&op.to_json().unwrap()).unwrap();
        assert_eq!(v["re"].as_array().unwrap().len(), 5);
        assert_eq!(v["modes"][0], -2);
    }
}
