//! Nyström discretizations on the support of a test function.
//!
//! Two families live here. [`LimitKernel`] is the whole-space kernel of
//! `zG(1 − zαG)^{−1}` (or of its composite-particle analogue) given by a
//! radial Fourier integral, used for thermodynamic-limit determinants.
//! [`SupportNystrom`] handles the periodic box: it expresses
//! `Det(1 − zαG̃_L)` through a small determinant on the support of `f`, which
//! keeps large boxes tractable.

use super::composite::{psi_composite, well_autocorrelation, phi_hat0};
use super::TestFunction;
use crate::error::{Error, Result};
use crate::quadrature::{composite_gauss_legendre, gauss_legendre, pairwise_sum};
use crate::thermo::AlphaParam;
use nalgebra::DMatrix;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Panel layout of a Nyström rule on the support of a test function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NystromRule {
    /// Panels per smooth piece of the support (per axis).
    pub panels: usize,
    /// Gauss–Legendre nodes per panel.
    pub order: usize,
}

impl Default for NystromRule {
    fn default() -> Self {
        NystromRule { panels: 4, order: 16 }
    }
}

impl NystromRule {
    /// The same rule with twice as many panels.
    pub fn refined(&self) -> Self {
        NystromRule { panels: 2 * self.panels, order: self.order }
    }
}

/// Nodes and weights per axis for a rule over the support of `f`.
fn axis_rules(f: &TestFunction, rule: NystromRule) -> Vec<(Vec<f64>, Vec<f64>)> {
    f.breakpoints()
        .iter()
        .map(|bps| {
            let mut xs = Vec::new();
            let mut ws = Vec::new();
            for seg in bps.windows(2) {
                let (x, w) = composite_gauss_legendre(seg[0], seg[1], rule.panels, rule.order);
                xs.extend(x);
                ws.extend(w);
            }
            (xs, ws)
        })
        .collect()
}

/// Tensor-product nodes over the support box.
pub fn support_nodes(f: &TestFunction, rule: NystromRule) -> (Vec<Vec<f64>>, Vec<f64>) {
    let axes = axis_rules(f, rule);
    let mut pts: Vec<Vec<f64>> = vec![vec![]];
    let mut wts: Vec<f64> = vec![1.0];
    for (x, w) in &axes {
        let mut np = Vec::with_capacity(pts.len() * x.len());
        let mut nw = Vec::with_capacity(pts.len() * x.len());
        for (p, pw) in pts.iter().zip(&wts) {
            for (xi, wi) in x.iter().zip(w) {
                let mut q = p.clone();
                q.push(*xi);
                np.push(q);
                nw.push(pw * wi);
            }
        }
        pts = np;
        wts = nw;
    }
    (pts, wts)
}

/// Fourier symbol `ψ(p) ∈ [0, 1]` of the single-particle operator `G`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LimitSymbol {
    /// `ψ(p) = e^{−β p²}`.
    Heat { beta: f64 },
    /// `ψ(p) = (φ̂(p)/φ̂(0))²` for the infinite-well ground state of half-width `a`.
    Composite { a: f64 },
}

impl LimitSymbol {
    pub fn psi(&self, p: f64) -> f64 {
        match *self {
            LimitSymbol::Heat { beta } => (-beta * p * p).exp(),
            LimitSymbol::Composite { a } => psi_composite(p, a),
        }
    }

    /// `zψ/(1 − zαψ)`.
    pub fn multiplier(&self, p: f64, z: f64, alpha: f64) -> f64 {
        let s = self.psi(p);
        z * s / (1.0 - z * alpha * s)
    }

    /// Part of the multiplier integrated numerically; the rest has a closed-form kernel.
    fn remainder(&self, p: f64, z: f64, alpha: f64) -> f64 {
        match self {
            LimitSymbol::Heat { .. } => self.multiplier(p, z, alpha),
            LimitSymbol::Composite { .. } => {
                let s = self.psi(p);
                z * z * alpha * s * s / (1.0 - z * alpha * s)
            }
        }
    }

    fn closed_form_kernel(&self, r: f64, z: f64) -> f64 {
        match *self {
            LimitSymbol::Heat { .. } => 0.0,
            LimitSymbol::Composite { a } => {
                let h0 = phi_hat0(a);
                z / (h0 * h0) * well_autocorrelation(r, a) / (2.0 * PI)
            }
        }
    }

    /// Momentum cutoff beyond which the numerically integrated part is negligible.
    fn p_max(&self, z: f64) -> f64 {
        match *self {
            LimitSymbol::Heat { beta } => ((z.max(1.0).ln() + 40.0) / beta).sqrt(),
            LimitSymbol::Composite { a } => 60.0 + 40.0 * PI / (2.0 * a),
        }
    }

    /// Width of the peak at p = 0 when `zα` approaches `1`.
    fn peak_width(&self, z: f64, alpha: f64) -> f64 {
        let gap = (1.0 - z * alpha).max(1e-300);
        match *self {
            LimitSymbol::Heat { beta } => (gap / beta).sqrt(),
            LimitSymbol::Composite { a } => gap.sqrt() * a,
        }
    }
}

/// Panel boundaries on `[0, p_max]`: geometric grading toward 0 when the
/// integrand is sharply peaked there, uniform panels of width `h` elsewhere.
fn graded_breakpoints(p_max: f64, h: f64, peak: f64) -> Vec<f64> {
    let mut bps = vec![0.0];
    if peak < h {
        let mut x = peak / 8.0;
        while x < h {
            bps.push(x);
            x *= 2.0;
        }
    }
    let start = *bps.last().expect("nonempty");
    let n = ((p_max - start) / h).ceil().max(1.0) as usize;
    for i in 1..=n {
        bps.push(start + (p_max - start) * i as f64 / n as f64);
    }
    bps
}

fn bessel_j0(x: f64) -> f64 {
    let q = 24 + 2 * x.abs().ceil() as usize;
    let terms: Vec<f64> = (0..q).map(|i| (x * (2.0 * PI * i as f64 / q as f64).sin()).cos()).collect();
    pairwise_sum(&terms) / q as f64
}

/// Whole-space translation-invariant kernel of `zG(1 − zαG)^{−1}` in dimension `d`.
#[derive(Debug, Clone)]
pub struct LimitKernel {
    symbol: LimitSymbol,
    z: f64,
    alpha: f64,
    d: usize,
    p: Vec<f64>,
    wm: Vec<f64>,
}

impl LimitKernel {
    pub fn new(symbol: LimitSymbol, z: f64, alpha: f64, d: usize) -> Result<Self> {
        AlphaParam::new(alpha)?.check(z)?;
        if !(1..=3).contains(&d) {
            return Err(Error::InvalidInput(format!("dimension {d} not in 1..=3")));
        }
        if matches!(symbol, LimitSymbol::Composite { .. }) && d != 1 {
            return Err(Error::InvalidInput("the composite kernel is implemented for d = 1".into()));
        }
        let p_max = symbol.p_max(z);
        let bps = graded_breakpoints(p_max, 0.1, symbol.peak_width(z, alpha));
        let (t, w) = gauss_legendre(12);
        let mut p = Vec::new();
        let mut wm = Vec::new();
        for seg in bps.windows(2) {
            let (lo, hi) = (seg[0], seg[1]);
            for (ti, wi) in t.iter().zip(&w) {
                let x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * ti;
                let radial = match d {
                    1 => 1.0 / PI,
                    2 => x / (2.0 * PI),
                    _ => x * x / (2.0 * PI * PI),
                };
                p.push(x);
                wm.push(0.5 * (hi - lo) * wi * radial * symbol.remainder(x, z, alpha));
            }
        }
        Ok(LimitKernel { symbol, z, alpha, d, p, wm })
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Kernel value at distance `r ≥ 0`.
    pub fn value(&self, r: f64) -> f64 {
        let terms: Vec<f64> = match self.d {
            1 => self.p.iter().zip(&self.wm).map(|(p, w)| w * (p * r).cos()).collect(),
            2 => self.p.iter().zip(&self.wm).map(|(p, w)| w * bessel_j0(p * r)).collect(),
            _ => self
                .p
                .iter()
                .zip(&self.wm)
                .map(|(p, w)| {
                    let x = p * r;
                    w * if x.abs() < 1e-8 { 1.0 - x * x / 6.0 } else { x.sin() / x }
                })
                .collect(),
        };
        self.symbol.closed_form_kernel(r, self.z) + pairwise_sum(&terms)
    }
}

/// Nyström matrix `√w_i s(x_i) k(x_i, x_j) s(x_j) √w_j` with `s = √(1 − e^{−f})`.
#[derive(Debug, Clone)]
pub struct LimitOperator {
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub matrix: DMatrix<f64>,
}

impl LimitOperator {
    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    /// Eigenvalues of the symmetric matrix.
    pub fn eigenvalues(&self) -> Vec<f64> {
        if self.n() == 0 {
            return vec![];
        }
        self.matrix.clone().symmetric_eigen().eigenvalues.iter().copied().collect()
    }

    /// `log Det(1 + αK)`.
    pub fn log_det_one_plus(&self, alpha: f64) -> Result<f64> {
        let mut terms = Vec::with_capacity(self.n());
        for k in self.eigenvalues() {
            let x = 1.0 + alpha * k;
            if x <= 0.0 {
                return Err(Error::Singularity(x.abs()));
            }
            terms.push(x.ln());
        }
        Ok(pairwise_sum(&terms))
    }

    /// `Det(1 + αK)^{−1/α}`.
    pub fn det_power(&self, alpha: f64) -> Result<f64> {
        Ok((-self.log_det_one_plus(alpha)? / alpha).exp())
    }
}

/// Builds the Nyström matrix of `s k s` on the support of `f`.
pub fn nystrom_operator(kernel: &LimitKernel, f: &TestFunction, rule: NystromRule) -> Result<LimitOperator> {
    if f.dim() != kernel.d {
        return Err(Error::InvalidInput("test function dimension does not match the kernel".into()));
    }
    let (nodes, weights) = support_nodes(f, rule);
    let n = nodes.len();
    let sw: Vec<f64> = nodes.iter().zip(&weights).map(|(x, w)| (f.one_minus_exp(x) * w).sqrt()).collect();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let vals: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| {
            if sw[i] == 0.0 || sw[j] == 0.0 {
                return 0.0;
            }
            let r = nodes[i].iter().zip(&nodes[j]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            sw[i] * kernel.value(r) * sw[j]
        })
        .collect();
    let mut m = DMatrix::zeros(n, n);
    for (&(i, j), v) in pairs.iter().zip(vals) {
        m[(i, j)] = v;
        m[(j, i)] = v;
    }
    Ok(LimitOperator { nodes, weights, matrix: m })
}

/// `√(1−e^{−f}) zG(1 − zαG)^{−1} √(1−e^{−f})` for the heat semigroup, discretized on the support of `f`.
pub fn limit_k_operator(
    f: &TestFunction,
    z: f64,
    alpha: f64,
    beta: f64,
    rule: NystromRule,
) -> Result<LimitOperator> {
    let kernel = LimitKernel::new(LimitSymbol::Heat { beta }, z, alpha, f.dim())?;
    nystrom_operator(&kernel, f, rule)
}

/// Composite-particle analogue of [`limit_k_operator`] (d = 1).
pub fn composite_k_operator(f: &TestFunction, z: f64, alpha: f64, a: f64, rule: NystromRule) -> Result<LimitOperator> {
    let kernel = LimitKernel::new(LimitSymbol::Composite { a }, z, alpha, 1)?;
    nystrom_operator(&kernel, f, rule)
}

/// Quantities from the support reduction of `Det(1 − zαG̃_L)` at real `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportNystromValues {
    /// `log Det(1 − zαG_L)`.
    pub log_det_heat: f64,
    /// `log Det(1 + M(z))`, so that `log Det(1 − zαG̃_L)` is the sum of the two.
    pub log_det_correction: f64,
    /// `Tr[zG̃(1 − zαG̃)^{−1}]`.
    pub count: f64,
    /// `Tr[zG̃(1 − zαG̃)^{−2}]`.
    pub variance: f64,
}

/// Periodic box `[−L/2, L/2]` (d = 1) reduced to the support of `f`.
///
/// With `S` multiplication by `√(1 − e^{−f})`,
/// `Det(1 − zαG̃) = Det(1 − zαG) · Det(1 + zα S G(1 − zαG)^{−1} S)`,
/// and the second factor is a Nyström determinant on the support.
#[derive(Debug, Clone)]
pub struct SupportNystrom {
    l: f64,
    alpha: f64,
    g_half: Vec<f64>,
    sw: Vec<f64>,
    pair_r: Vec<f64>,
    pairs: Vec<(usize, usize)>,
}

impl SupportNystrom {
    pub fn new(f: &TestFunction, l: f64, beta: f64, alpha: f64, rule: NystromRule) -> Result<Self> {
        if f.dim() != 1 {
            return Err(Error::InvalidInput("support reduction is implemented for d = 1".into()));
        }
        f.check_inside_box(l)?;
        AlphaParam::new(alpha)?;
        let m = super::heat_mode_cutoff(l, beta)?;
        let g_half: Vec<f64> = (0..=m).map(|k| (-beta * (2.0 * PI * k as f64 / l).powi(2)).exp()).collect();
        let (nodes, weights) = support_nodes(f, rule);
        let sw: Vec<f64> = nodes.iter().zip(&weights).map(|(x, w)| (f.one_minus_exp(x) * w).sqrt()).collect();
        let n = sw.len();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
        let pair_r = pairs.iter().map(|&(i, j)| nodes[i][0] - nodes[j][0]).collect();
        Ok(SupportNystrom { l, alpha, g_half, sw, pair_r, pairs })
    }

    fn full_sum<F: Fn(f64) -> f64>(&self, h: F) -> f64 {
        let t: Vec<f64> = self
            .g_half
            .iter()
            .enumerate()
            .map(|(k, &g)| if k == 0 { h(g) } else { 2.0 * h(g) })
            .collect();
        pairwise_sum(&t)
    }

    pub fn evaluate(&self, z: f64) -> Result<SupportNystromValues> {
        let alpha = self.alpha;
        for &g in &self.g_half {
            if 1.0 - z * alpha * g <= 0.0 {
                return Err(Error::Singularity((1.0 - z * alpha * g).abs()));
            }
        }
        let log_det_heat = self.full_sum(|g| (1.0 - z * alpha * g).ln());
        let count_heat = self.full_sum(|g| z * g / (1.0 - z * alpha * g));
        let dcount_heat = self.full_sum(|g| g / (1.0 - z * alpha * g).powi(2));
        let n = self.sw.len();
        let m1: Vec<f64> = self.g_half.iter().map(|&g| g / (1.0 - z * alpha * g)).collect();
        let m2: Vec<f64> = self.g_half.iter().map(|&g| g / (1.0 - z * alpha * g).powi(2)).collect();
        let m3: Vec<f64> = self.g_half.iter().map(|&g| g * g / (1.0 - z * alpha * g).powi(3)).collect();
        let l = self.l;
        let vals: Vec<[f64; 3]> = self
            .pair_r
            .par_iter()
            .map(|&r| {
                let mut acc = [m1[0], m2[0], m3[0]];
                let th = 2.0 * PI * r / l;
                for k in 1..m1.len() {
                    let c = 2.0 * (th * k as f64).cos();
                    acc[0] += c * m1[k];
                    acc[1] += c * m2[k];
                    acc[2] += c * m3[k];
                }
                [acc[0] / l, acc[1] / l, acc[2] / l]
            })
            .collect();
        let mut k1 = DMatrix::zeros(n, n);
        let mut k2 = DMatrix::zeros(n, n);
        let mut k3 = DMatrix::zeros(n, n);
        for (&(i, j), v) in self.pairs.iter().zip(&vals) {
            let s = self.sw[i] * self.sw[j];
            for (mat, val) in [(&mut k1, v[0]), (&mut k2, v[1]), (&mut k3, v[2])] {
                mat[(i, j)] = s * val;
                mat[(j, i)] = s * val;
            }
        }
        let one_plus_m = DMatrix::<f64>::identity(n, n) + &k1 * (z * alpha);
        let lu = one_plus_m.clone().lu();
        let det = lu.determinant();
        if det <= 0.0 {
            return Err(Error::Singularity(det.abs()));
        }
        let r = lu.try_inverse().ok_or(Error::Singularity(0.0))?;
        let rk2 = &r * &k2;
        let tr_rk2 = rk2.trace();
        let tr_rk2rk2 = (&rk2 * &rk2).trace();
        let tr_rk3 = (&r * &k3).trace();
        let count = count_heat - z * tr_rk2;
        let dcount = dcount_heat - tr_rk2 + z * alpha * tr_rk2rk2 - 2.0 * z * alpha * tr_rk3;
        Ok(SupportNystromValues { log_det_heat, log_det_correction: det.ln(), count, variance: z * dcount })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{build_gtilde, TorusGrid};
    use crate::quadrature::integrate_adaptive;

    fn series_kernel(r: f64, z: f64, alpha: f64, beta: f64, d: usize) -> f64 {
        let mut acc = 0.0;
        for n in 1..400 {
            let nf = n as f64;
            acc += (z * alpha).powi(n - 1) * z * (4.0 * PI * beta * nf).powf(-(d as f64) / 2.0) * (-r * r / (4.0 * beta * nf)).exp();
        }
        acc
    }

    #[test]
    fn heat_kernel_matches_gaussian_series() {
        for d in 1..=3 {
            for (z, alpha) in [(0.6, 1.0), (0.5, -1.0), (0.9, 0.5), (0.7, -0.5)] {
                let k = LimitKernel::new(LimitSymbol::Heat { beta: 1.0 }, z, alpha, d).unwrap();
                for r in [0.0, 0.3, 1.1, 2.5] {
                    let a = k.value(r);
                    let b = series_kernel(r, z, alpha, 1.0, d);
                    assert!((a - b).abs() < 1e-11 * b.abs().max(1e-3), "d={d} z={z} alpha={alpha} r={r}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn zero_inputs_give_zero_operator() {
        let f0 = TestFunction::bump(1, 0.0, 2.0).unwrap();
        let k = limit_k_operator(&f0, 1.3, -1.0, 1.0, NystromRule::default()).unwrap();
        assert_eq!(k.matrix.norm(), 0.0);
        assert_eq!(k.det_power(-1.0).unwrap(), 1.0);
        let f = TestFunction::bump(1, 1.0, 2.0).unwrap();
        let k = limit_k_operator(&f, 0.0, -1.0, 1.0, NystromRule::default()).unwrap();
        assert_eq!(k.matrix.norm(), 0.0);
    }

    #[test]
    fn out_of_domain_fugacity() {
        let f = TestFunction::bump(1, 1.0, 2.0).unwrap();
        assert!(limit_k_operator(&f, 1.0, 1.0, 1.0, NystromRule::default()).is_err());
        assert!(limit_k_operator(&f, -0.1, -1.0, 1.0, NystromRule::default()).is_err());
    }

    #[test]
    fn trace_matches_independent_quadrature() {
        let f = TestFunction::bump(1, 1.0, 2.0).unwrap();
        for (z, alpha) in [(1.3, -1.0), (0.46, 1.0)] {
            let k = limit_k_operator(&f, z, alpha, 1.0, NystromRule::default()).unwrap();
            let (diag, _) = integrate_adaptive(
                |p| z * (-p * p).exp() / (1.0 - z * alpha * (-p * p).exp()) / PI,
                0.0,
                12.0,
                1e-15,
                1e-15,
            );
            let (mass, _) = integrate_adaptive(|x| f.one_minus_exp(&[x]), -1.0, 1.0, 1e-15, 1e-15);
            let rel = (k.trace() - diag * mass).abs() / (diag * mass);
            assert!(rel < 1e-8, "{rel}");
        }
    }

    #[test]
    fn support_reduction_matches_eigenvalues() {
        let l = 12.0;
        let f = TestFunction::bump(1, 1.0, 2.0).unwrap();
        let grid = TorusGrid::with_tail_rule(1, l, 1.0).unwrap();
        let ev = build_gtilde(&grid, 1.0, &f).unwrap().eigenvalues();
        for (z, alpha) in [(1.7, -1.0), (0.8, 1.0), (0.9, -0.5), (1.2, 0.5)] {
            let sn = SupportNystrom::new(&f, l, 1.0, alpha, NystromRule::default()).unwrap();
            let v = sn.evaluate(z).unwrap();
            let logdet: f64 = ev.iter().map(|g| (1.0 - z * alpha * g).ln()).sum();
            let count: f64 = ev.iter().map(|g| z * g / (1.0 - z * alpha * g)).sum();
            let var: f64 = ev.iter().map(|g| z * g / (1.0 - z * alpha * g).powi(2)).sum();
            assert!((v.log_det_heat + v.log_det_correction - logdet).abs() < 1e-11);
            assert!((v.count - count).abs() < 1e-11 * count);
            assert!((v.variance - var).abs() < 1e-10 * var);
        }
    }
}
