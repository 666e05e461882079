//! Fredholm determinants, Vere-Jones series and coefficient extraction on circles.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::alpha_linalg::{vere_jones_coefficients, SquareMatrix, TraceSource};
use crate::error::{Error, Result};
use crate::quadrature::pairwise_sum_c;
use crate::thermo::AlphaParam;
pub use crate::thermo::SaddleBranch;

/// Largest node count used by the circle quadratures.
pub const MAX_NODES: usize = 1 << 16;

/// Relative change under `Q → 2Q` accepted as converged.
pub const DOUBLING_TOL: f64 = 1e-9;

/// Below this value `p` terms are folded into a cubic Taylor expansion.
const SMALL_P: f64 = 1e-7;

const SINGULAR_EPS: f64 = 1e-14;

fn integer_power(a: &AlphaParam) -> Option<i32> {
    a.is_negative_reciprocal_integer().then(|| (-1.0 / a.value()).round() as i32)
}

/// `Det(1 − zαJ)^{−1/α} = Π_j (1 − zαg_j)^{−1/α}` with factor-wise principal logarithms.
pub fn fredholm_det_power(spectrum: impl AsRef<[f64]>, alpha: f64, z: Complex64) -> Result<Complex64> {
    let a = AlphaParam::new(alpha)?;
    let m = integer_power(&a);
    let mut acc = Complex64::new(1.0, 0.0);
    let mut log_acc = Complex64::new(0.0, 0.0);
    for &g in spectrum.as_ref() {
        let f = 1.0 - z * alpha * g;
        if f.norm() < SINGULAR_EPS {
            return Err(Error::Singularity(f.norm()));
        }
        match m {
            Some(m) => acc *= f.powi(m),
            None => log_acc += f.ln(),
        }
    }
    Ok(match m {
        Some(_) => acc,
        None => (-log_acc / alpha).exp(),
    })
}

/// `ln Det(1 − zαJ)^{−1/α}` at real `z` where every factor is positive.
pub fn log_det_power_real(spectrum: impl AsRef<[f64]>, alpha: f64, z: f64) -> Result<f64> {
    AlphaParam::new(alpha)?;
    let mut terms = Vec::with_capacity(spectrum.as_ref().len());
    for &g in spectrum.as_ref() {
        let f = 1.0 - z * alpha * g;
        if f < SINGULAR_EPS {
            return Err(Error::Singularity(f.abs()));
        }
        terms.push(f.ln());
    }
    Ok(-crate::quadrature::pairwise_sum(&terms) / alpha)
}

/// `Det(1 − zαJ)^{−1/α}` from the matrix of `J` in an arbitrary basis.
pub fn fredholm_det_power_matrix(j: &SquareMatrix, alpha: f64, z: Complex64) -> Result<Complex64> {
    let a = AlphaParam::new(alpha)?;
    let n = j.n();
    let m = nalgebra::DMatrix::<Complex64>::identity(n, n) - j.as_matrix() * (z * alpha);
    let det = m.determinant();
    if det.norm() < SINGULAR_EPS {
        return Err(Error::Singularity(det.norm()));
    }
    Ok(match integer_power(&a) {
        Some(k) => det.powi(k),
        None => (-det.ln() / alpha).exp(),
    })
}

/// Truncated Vere-Jones series `Σ_{n ≤ n_max} zⁿ c_n`.
///
/// The tail estimate assumes term ratios no worse than those of `(1 − ρz)^{−S}` with
/// `S = rank/|α|`, the extreme case of a degenerate spectrum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartialSum {
    pub value: Complex64,
    pub terms: Vec<Complex64>,
    /// Magnitude of the last retained term.
    pub last_term: f64,
    /// Geometric estimate of the omitted tail; zero once a terminating series is complete.
    pub tail_bound: f64,
}

fn operator_norm(source: &TraceSource<'_>) -> f64 {
    match source {
        TraceSource::Spectrum(g) => g.iter().fold(0.0, |m, x| m.max(x.abs())),
        TraceSource::Matrix(m) => m.as_matrix().clone().singular_values().max(),
    }
}

fn source_dim(source: &TraceSource<'_>) -> usize {
    match source {
        TraceSource::Spectrum(g) => g.iter().filter(|&&x| x != 0.0).count(),
        TraceSource::Matrix(m) => m.n(),
    }
}

pub fn vere_jones_partial_sum(source: TraceSource<'_>, alpha: f64, z: f64, n_max: usize) -> Result<PartialSum> {
    let a = AlphaParam::new(alpha)?;
    let rate = (z * alpha).abs() * operator_norm(&source);
    let m = integer_power(&a);
    if m.is_none() && rate >= 1.0 {
        return Err(Error::SeriesDivergent(rate));
    }
    let p: Vec<Complex64> = match &source {
        TraceSource::Spectrum(g) => {
            let zg: Vec<f64> = g.iter().map(|x| z * x).collect();
            TraceSource::Spectrum(&zg).power_traces(n_max)
        }
        TraceSource::Matrix(m) => {
            let zm = SquareMatrix::from_matrix(m.as_matrix() * Complex64::new(z, 0.0))?;
            TraceSource::Matrix(&zm).power_traces(n_max)
        }
    };
    let terms = vere_jones_coefficients(&p, alpha, n_max);
    let value = pairwise_sum_c(&terms);
    let last_term = terms.last().map_or(0.0, |t| t.norm());
    let degree = m.map(|k| k as usize * source_dim(&source));
    let tail_bound = match degree {
        Some(deg) if n_max >= deg => 0.0,
        _ => {
            let big_s = (a.s() * source_dim(&source) as f64 - 1.0).max(0.0);
            let growth = rate * (1.0 + 1.0 / n_max.max(1) as f64).powf(big_s);
            if growth < 1.0 {
                last_term * growth / (1.0 - growth)
            } else {
                f64::INFINITY
            }
        }
    };
    Ok(PartialSum { value, terms, last_term, tail_bound })
}

/// Circle `|z| = r` sampled at `q` equispaced nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContourSpec {
    pub r: f64,
    pub q: usize,
}

impl ContourSpec {
    pub fn new(r: f64, q: usize) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidInput(format!("contour radius {r} must be positive")));
        }
        if q < 64 || !q.is_power_of_two() || q > MAX_NODES {
            return Err(Error::InvalidInput(format!("node count {q} must be a power of two in [64, {MAX_NODES}]")));
        }
        Ok(ContourSpec { r, q })
    }

    pub fn with_radius(r: f64) -> Result<Self> {
        Self::new(r, 512)
    }
}

/// Result of a trapezoidal circle integral with node doubling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CircleIntegral {
    pub value: Complex64,
    /// `(1/Q) Σ |integrand|`, the scale against which residues are measured.
    pub mass: f64,
    pub q_used: usize,
    pub converged: bool,
}

/// Parameters folded into a single product over modes.
struct FoldedModes {
    ps: Vec<f64>,
    ones: usize,
    small: [f64; 3],
}

fn fold_modes(ps: &[f64], branch: SaddleBranch) -> FoldedModes {
    let mut out = FoldedModes { ps: Vec::new(), ones: 0, small: [0.0; 3] };
    for &p in ps {
        if p == 0.0 {
            continue;
        }
        if branch == SaddleBranch::Product && p == 1.0 {
            out.ones += 1;
        } else if p < SMALL_P {
            out.small[0] += p;
            out.small[1] += p * p;
            out.small[2] += p * p * p;
        } else {
            out.ps.push(p);
        }
    }
    out
}

/// `Σ_j σ s log(1 + σ' p_j (η − 1)) − iNθ` at `η = e^{iθ}`.
fn log_integrand(m: &FoldedModes, s: f64, branch: SaddleBranch, n: u64, theta: f64) -> Complex64 {
    let eta = Complex64::from_polar(1.0, theta);
    let u = eta - 1.0;
    let mut acc = Complex64::new(0.0, 0.0);
    match branch {
        SaddleBranch::Product => {
            for &p in &m.ps {
                acc += (1.0 + p * u).ln();
            }
            acc += m.small[0] * u - m.small[1] * u * u / 2.0 + m.small[2] * u * u * u / 3.0;
            acc += Complex64::new(0.0, m.ones as f64 * theta);
        }
        SaddleBranch::Reciprocal => {
            for &p in &m.ps {
                acc -= (1.0 - p * u).ln();
            }
            acc += m.small[0] * u + m.small[1] * u * u / 2.0 + m.small[2] * u * u * u / 3.0;
        }
    }
    s * acc - Complex64::new(0.0, n as f64 * theta)
}

fn trapezoid(m: &FoldedModes, s: f64, branch: SaddleBranch, n: u64, q: usize) -> (Complex64, f64) {
    let vals: Vec<Complex64> = (0..q)
        .into_par_iter()
        .map(|k| {
            let k = if k <= q / 2 { k as f64 } else { k as f64 - q as f64 };
            log_integrand(m, s, branch, n, 2.0 * PI * k / q as f64).exp()
        })
        .collect();
    let abs: Vec<Complex64> = vals.iter().map(|v| Complex64::new(v.norm(), 0.0)).collect();
    (pairwise_sum_c(&vals) / q as f64, pairwise_sum_c(&abs).re / q as f64)
}

/// `∮_{|η|=1} dη/(2πi η^{N+1}) Π_j (1 + p_j(η − 1))^s` (product branch) or
/// `Π_j (1 − p_j(η − 1))^{−s}` (reciprocal branch), with `Q` doubled from `q0` until stable.
pub fn unit_circle_integral(ps: &[f64], s: f64, branch: SaddleBranch, n: u64, q0: usize) -> Result<CircleIntegral> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidInput(format!("exponent s = {s} must be positive")));
    }
    if ps.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(Error::InvalidInput("circle parameters must be finite and nonnegative".into()));
    }
    if branch == SaddleBranch::Product {
        let integer_s = (s - s.round()).abs() < 1e-12;
        let limit = if integer_s { 1.0 } else { 0.5 };
        if let Some(&p) = ps.iter().find(|&&p| p > limit || (!integer_s && p >= limit)) {
            return Err(Error::Domain(format!("product-branch parameter {p} exceeds {limit}")));
        }
    }
    let modes = fold_modes(ps, branch);
    let mut q = q0.clamp(64, MAX_NODES / 2).next_power_of_two();
    let (mut prev, _) = trapezoid(&modes, s, branch, n, q);
    loop {
        let (cur, mass) = trapezoid(&modes, s, branch, n, 2 * q);
        let delta = (cur - prev).norm();
        if delta <= DOUBLING_TOL * cur.norm() + 1e-15 * mass {
            return Ok(CircleIntegral { value: cur, mass, q_used: 2 * q, converged: true });
        }
        q *= 2;
        if 2 * q > MAX_NODES {
            return Ok(CircleIntegral { value: cur, mass, q_used: q, converged: false });
        }
        prev = cur;
    }
}

/// N-th coefficient of `Det(1 − zαJ)^{−1/α}` from a circle of radius `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContourCoefficient {
    /// Real part of the coefficient.
    pub value: f64,
    /// `ln |coefficient|` computed without overflow.
    pub log_value: f64,
    /// `ln Det(1 − rαJ)^{−1/α} − N ln r`.
    pub log_scale: f64,
    /// Real part of the remaining unit-circle integral.
    pub circle: f64,
    /// `|Im| / mass` of the normalized circle integral.
    pub imag_residue: f64,
    pub q_used: usize,
    pub converged: bool,
}

/// Circle parameters `p'_j = r|α|g_j/(1 − rαg_j)` and `ln Det(1 − rαJ)^{−1/α} − N ln r`.
fn contour_factorization(values: &[f64], alpha: f64, n: u64, r: f64) -> Result<(Vec<f64>, f64)> {
    let a = AlphaParam::new(alpha)?;
    let g0 = values.iter().cloned().fold(0.0, f64::max);
    if integer_power(&a).is_none() && r * alpha.abs() * g0 >= 1.0 {
        return Err(Error::ContourRadius { r, alpha, g0 });
    }
    let ps = values.iter().map(|&g| r * alpha.abs() * g / (1.0 - r * alpha * g)).collect();
    let log_scale = log_det_power_real(values, alpha, r)? - n as f64 * r.ln();
    Ok((ps, log_scale))
}

/// `∮_{S_r(0)} dz/(2πi z^{N+1}) Det(1 − zαJ)^{−1/α}`.
///
/// Factoring out `Det(1 − rαJ)^{−1/α} r^{−N}` leaves an integral over the unit circle whose
/// integrand is bounded by one in modulus for `α < 0`.
pub fn coefficient_contour(
    spectrum: impl AsRef<[f64]>,
    alpha: f64,
    n: u64,
    contour: ContourSpec,
) -> Result<ContourCoefficient> {
    let values = spectrum.as_ref();
    let (ps, log_scale) = contour_factorization(values, alpha, n, contour.r)?;
    let s = 1.0 / alpha.abs();
    let ci = unit_circle_integral(&ps, s, SaddleBranch::for_alpha(alpha), n, contour.q)?;
    let re = ci.value.re;
    Ok(ContourCoefficient {
        value: log_scale.exp() * re,
        log_value: log_scale + re.abs().ln(),
        log_scale,
        circle: re,
        imag_residue: ci.value.im.abs() / ci.mass.max(f64::MIN_POSITIVE),
        q_used: ci.q_used,
        converged: ci.converged,
    })
}

/// Bound check at one point: `slack ≥ 0` when the inequality holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundResidual {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

/// Modulus and cubic-remainder bounds for one circle factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FactorBounds {
    pub modulus: BoundResidual,
    /// `None` outside `|θ| ≤ π/3` on the product branch.
    pub remainder: Option<BoundResidual>,
}

/// Gaussian modulus bound and cubic Taylor remainder bound for
/// `1 + p(e^{iθ} − 1)` (product branch, `p ∈ [0, 1]`) or
/// `1 − p(e^{iθ} − 1)` (reciprocal branch, `p ≥ 0`).
pub fn circle_factor_bounds(p: f64, theta: f64, branch: SaddleBranch) -> Result<FactorBounds> {
    if !(theta.abs() <= PI) {
        return Err(Error::Domain(format!("theta = {theta} outside [-pi, pi]")));
    }
    let u = Complex64::from_polar(1.0, theta) - 1.0;
    let t2 = theta * theta;
    let t3 = theta.abs().powi(3);
    match branch {
        SaddleBranch::Product => {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Domain(format!("p = {p} outside [0, 1]")));
            }
            let w = 1.0 + p * u;
            let q = p * (1.0 - p);
            let lhs = w.norm();
            let rhs = (-2.0 * q * t2 / (PI * PI)).exp();
            let modulus = BoundResidual { lhs, rhs, slack: rhs - lhs };
            let remainder = (theta.abs() <= PI / 3.0).then(|| {
                let lhs = (w.ln() - Complex64::new(0.0, p * theta) + q * t2 / 2.0).norm();
                let rhs = 4.0 * q * t3 / (9.0 * 3f64.sqrt());
                BoundResidual { lhs, rhs, slack: rhs - lhs }
            });
            Ok(FactorBounds { modulus, remainder })
        }
        SaddleBranch::Reciprocal => {
            if !(p >= 0.0 && p.is_finite()) {
                return Err(Error::Domain(format!("p = {p} must be finite and nonnegative")));
            }
            let w = 1.0 - p * u;
            let q = p * (1.0 + p);
            let lhs = w.norm();
            let rhs = (2.0 * q / (1.0 + 4.0 * q) * t2 / (PI * PI)).exp();
            let modulus = BoundResidual { lhs, rhs, slack: lhs - rhs };
            let lhs = (w.ln() + Complex64::new(0.0, p * theta) - q * t2 / 2.0).norm();
            let rhs = q * (1.0 + 2.0 * p) * t3 / 6.0;
            Ok(FactorBounds { modulus, remainder: Some(BoundResidual { lhs, rhs, slack: rhs - lhs }) })
        }
    }
}

/// Nonincreasing parameters `p_j ≥ 0` with exponent `s` and `Σ s p_j = N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PFamily {
    values: Vec<f64>,
    s: f64,
    n: u64,
}

impl PFamily {
    /// Validates the parameters; `Σ s p_j` must be an integer to 1e−10 relative.
    pub fn new(mut values: Vec<f64>, s: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidInput(format!("exponent s = {s} must be positive")));
        }
        if values.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidInput("parameters must be finite and nonnegative".into()));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        let total = s * crate::quadrature::pairwise_sum(&values);
        let n = total.round();
        if n < 1.0 || (total - n).abs() > 1e-10 * n {
            return Err(Error::InvalidInput(format!("s * sum(p) = {total} is not a positive integer")));
        }
        Ok(PFamily { values, s, n: n as u64 })
    }

    /// `p_j ∝ q^j` rescaled to `Σ s p_j = N`.
    pub fn geometric(q: f64, s: f64, n: u64) -> Result<Self> {
        if !(0.0 < q && q < 1.0) {
            return Err(Error::InvalidInput(format!("ratio {q} must lie in (0, 1)")));
        }
        let len = ((1e-30f64).ln() / q.ln()).ceil() as usize + 1;
        let raw: Vec<f64> = (0..len).map(|j| q.powi(j as i32)).collect();
        let total: f64 = s * crate::quadrature::pairwise_sum(&raw);
        let c = n as f64 / total;
        Self::new(raw.iter().map(|x| x * c).collect(), s)
    }

    /// `p_j = min(1, c q^j)` with `c` chosen so that `Σ s p_j = N`.
    pub fn capped_geometric(q: f64, s: f64, n: u64) -> Result<Self> {
        if !(0.0 < q && q < 1.0) {
            return Err(Error::InvalidInput(format!("ratio {q} must lie in (0, 1)")));
        }
        let build = |ln_c: f64| -> Vec<f64> {
            let len = ((ln_c - (1e-30f64).ln()) / -q.ln()).ceil().max(1.0) as usize;
            (0..len).map(|j| (ln_c + j as f64 * q.ln()).exp().min(1.0)).collect()
        };
        let sum = |ln_c: f64| s * crate::quadrature::pairwise_sum(&build(ln_c));
        let target = n as f64;
        let (mut lo, mut hi) = (-50.0, 0.0);
        while sum(hi) < target {
            hi += 1.0 + hi.abs();
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if sum(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 * hi.abs().max(1.0) {
                break;
            }
        }
        let mut values = build(0.5 * (lo + hi));
        let total = s * crate::quadrature::pairwise_sum(&values);
        let fix = target / total;
        for v in values.iter_mut().filter(|v| **v < 1.0) {
            *v = (*v * fix).min(1.0);
        }
        let total = s * crate::quadrature::pairwise_sum(&values);
        let free: f64 = values.iter().filter(|v| **v < 1.0).sum();
        let adj = 1.0 + (target - total) / (s * free);
        for v in values.iter_mut().filter(|v| **v < 1.0) {
            *v *= adj;
        }
        Self::new(values, s)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// `Σ s p(1 − p)` on the product branch, `Σ s p(1 + p)` on the reciprocal branch.
    pub fn variance(&self, branch: SaddleBranch) -> f64 {
        let sign = match branch {
            SaddleBranch::Product => -1.0,
            SaddleBranch::Reciprocal => 1.0,
        };
        let t: Vec<f64> = self.values.iter().map(|&p| self.s * p * (1.0 + sign * p)).collect();
        crate::quadrature::pairwise_sum(&t)
    }
}

/// `√(2π v)` times the unit-circle coefficient integral, which tends to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SaddleCheck {
    pub n: u64,
    pub value: f64,
    pub variance: f64,
    pub imag_residue: f64,
    pub q_used: usize,
    pub converged: bool,
}

/// Initial node count resolving a peak of width `1/√v` on the unit circle.
pub fn nodes_for_variance(v: f64) -> usize {
    ((8.0 * v.sqrt()).ceil() as usize).max(256).next_power_of_two()
}

pub fn saddle_limit_check(pfam: &PFamily, branch: SaddleBranch) -> Result<SaddleCheck> {
    let v = pfam.variance(branch);
    if !(v >= 1e-8) {
        return Err(Error::DegenerateVariance(v));
    }
    let ci = unit_circle_integral(pfam.values(), pfam.s(), branch, pfam.n(), nodes_for_variance(v))?;
    Ok(SaddleCheck {
        n: pfam.n(),
        value: (2.0 * PI * v).sqrt() * ci.value.re,
        variance: v,
        imag_residue: ci.value.im.abs() / ci.mass.max(f64::MIN_POSITIVE),
        q_used: ci.q_used,
        converged: ci.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alpha_linalg::power_sum_alpha_sum;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const ALPHAS: [f64; 4] = [-1.0, -0.5, 0.5, 1.0];

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn det_power_examples() {
        assert_eq!(fredholm_det_power([] as [f64; 0], 0.5, c(3.0)).unwrap(), c(1.0));
        assert_eq!(fredholm_det_power([0.4], 0.5, c(0.0)).unwrap(), c(1.0));
        let v = fredholm_det_power([0.7], -1.0, c(2.0)).unwrap();
        assert!((v - c(2.4)).norm() < 1e-15);
        let v = fredholm_det_power([0.3, 0.1], 0.5, c(1.0)).unwrap();
        let exact = (1.0f64 - 0.15).powi(-2) * (1.0f64 - 0.05).powi(-2);
        assert!((v.re - exact).abs() < 1e-14);
        let ps = vere_jones_partial_sum(TraceSource::Spectrum(&[0.3, 0.1]), 0.5, 1.0, 60).unwrap();
        assert!((ps.value.re - exact).abs() < 1e-10);
        assert!(matches!(fredholm_det_power([1.0], 1.0, c(1.0)), Err(Error::Singularity(_))));
    }

    #[test]
    fn partial_sum_examples() {
        let g = [0.5, 0.2];
        assert_eq!(vere_jones_partial_sum(TraceSource::Spectrum(&g), 1.0, 1.0, 0).unwrap().value, c(1.0));
        let ps = vere_jones_partial_sum(TraceSource::Spectrum(&g), -1.0, 1.0, 2).unwrap();
        assert!((ps.value.re - 1.8).abs() < 1e-14);
        assert_eq!(ps.tail_bound, 0.0);
        let ps = vere_jones_partial_sum(TraceSource::Spectrum(&[0.5]), 1.0, 1.0, 30).unwrap();
        assert!((ps.value.re - 2.0).abs() < 1e-8);
        assert!(ps.tail_bound > 0.0 && ps.tail_bound < 1e-8);
        assert!(matches!(
            vere_jones_partial_sum(TraceSource::Spectrum(&[0.9]), 0.5, 3.0, 10),
            Err(Error::SeriesDivergent(_))
        ));
    }

    #[test]
    fn product_matches_series_on_random_spectra() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let g: Vec<f64> = (0..6).map(|_| rng.random::<f64>()).collect();
            let g0 = g.iter().cloned().fold(0.0, f64::max);
            for a in ALPHAS {
                let z = 0.9 / (a.abs() * g0);
                let mut n_max = 20;
                let mut ps = vere_jones_partial_sum(TraceSource::Spectrum(&g), a, z, n_max).unwrap();
                while ps.tail_bound > 1e-10 {
                    n_max *= 2;
                    ps = vere_jones_partial_sum(TraceSource::Spectrum(&g), a, z, n_max).unwrap();
                }
                let exact = fredholm_det_power(&g, a, c(z)).unwrap();
                assert!((ps.value - exact).norm() <= 1e-8 * exact.norm(), "a={a} {n_max} {} {} {}", ps.value, exact, ps.tail_bound);
            }
        }
    }

    #[test]
    fn contour_single_mode() {
        let lam = 0.6;
        for r in [0.3, 1.0, 1.5] {
            for n in [0u64, 1, 5, 9] {
                let cc = coefficient_contour([lam], 1.0, n, ContourSpec::with_radius(r).unwrap()).unwrap();
                assert!((cc.value - lam.powi(n as i32)).abs() < 1e-8 * lam.powi(n as i32), "{r} {n}");
            }
        }
        let cc = coefficient_contour([lam], -1.0, 1, ContourSpec::with_radius(3.0).unwrap()).unwrap();
        assert!((cc.value - lam).abs() < 1e-13);
        let cc = coefficient_contour([lam], -1.0, 2, ContourSpec::with_radius(3.0).unwrap()).unwrap();
        assert!(cc.value.abs() < 1e-13);
        assert!(matches!(
            coefficient_contour([lam], 1.0, 2, ContourSpec::with_radius(2.0).unwrap()),
            Err(Error::ContourRadius { .. })
        ));
    }

    #[test]
    fn contour_matches_series_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let g: Vec<f64> = (0..5).map(|_| rng.random::<f64>()).collect();
            let g0 = g.iter().cloned().fold(0.0, f64::max);
            for a in ALPHAS {
                for n in 1..=8u64 {
                    let exact = power_sum_alpha_sum(TraceSource::Spectrum(&g), a, n as usize).unwrap().re;
                    let r = if a > 0.0 { 0.6 / (a * g0) } else { n as f64 / g.iter().sum::<f64>() };
                    let cc = coefficient_contour(&g, a, n, ContourSpec::with_radius(r).unwrap()).unwrap();
                    let tol = 1e-10 * exact.abs() + 1e-14;
                    assert!((cc.value - exact).abs() <= tol, "a={a} n={n}: {} {exact}", cc.value);
                    assert!(cc.imag_residue < 1e-10);
                    let half = coefficient_contour(&g, a, n, ContourSpec::with_radius(r / 2.0).unwrap()).unwrap();
                    assert!((half.value - cc.value).abs() <= tol);
                }
            }
        }
    }

    #[test]
    fn matrix_and_spectrum_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 5;
        let b = nalgebra::DMatrix::<f64>::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
        let j = &b * b.transpose() / 4.0;
        let eig = j.clone().symmetric_eigen().eigenvalues;
        let vals: Vec<f64> = eig.iter().map(|x| x.max(0.0)).collect();
        let g0 = vals.iter().cloned().fold(0.0, f64::max);
        let sm = SquareMatrix::from_real_matrix(&j).unwrap();
        for a in ALPHAS {
            let z = 0.7 / (a.abs() * g0);
            let x = fredholm_det_power_matrix(&sm, a, c(z)).unwrap();
            let y = fredholm_det_power(&vals, a, c(z)).unwrap();
            assert!((x - y).norm() <= 1e-10 * y.norm());
        }
    }

    #[test]
    fn factor_bound_examples() {
        for theta in [-3.0, -0.5, 0.0, 1.0, PI] {
            for br in [SaddleBranch::Product, SaddleBranch::Reciprocal] {
                let b = circle_factor_bounds(0.0, theta, br).unwrap();
                assert!((b.modulus.lhs - 1.0).abs() < 1e-15 && (b.modulus.rhs - 1.0).abs() < 1e-15);
            }
        }
        let b = circle_factor_bounds(0.5, PI, SaddleBranch::Product).unwrap();
        assert!(b.modulus.lhs < 1e-15);
        assert!((b.modulus.rhs - (-0.5f64).exp()).abs() < 1e-15);
        assert!(b.remainder.is_none());
        let b = circle_factor_bounds(2.0, PI / 2.0, SaddleBranch::Reciprocal).unwrap();
        assert!(b.modulus.slack >= 0.0 && b.remainder.unwrap().slack >= 0.0);
        assert!(circle_factor_bounds(1.5, 0.1, SaddleBranch::Product).is_err());
        assert!(circle_factor_bounds(0.5, 4.0, SaddleBranch::Reciprocal).is_err());
    }

    #[test]
    fn factor_bounds_hold_on_grid() {
        for i in 0..200 {
            for k in 0..200 {
                let theta = -PI + 2.0 * PI * k as f64 / 199.0;
                let b = circle_factor_bounds(i as f64 / 199.0, theta, SaddleBranch::Product).unwrap();
                assert!(b.modulus.slack >= -1e-12);
                if let Some(r) = b.remainder {
                    assert!(r.slack >= -1e-12, "p={} theta={theta}", i as f64 / 199.0);
                }
                let b = circle_factor_bounds(10.0 * i as f64 / 199.0, theta, SaddleBranch::Reciprocal).unwrap();
                assert!(b.modulus.slack >= -1e-12);
                assert!(b.remainder.unwrap().slack >= -1e-12);
            }
        }
    }

    #[test]
    fn families_normalize() {
        let f = PFamily::geometric(0.9, 1.0, 100).unwrap();
        assert!((f.values().iter().sum::<f64>() - 100.0).abs() < 1e-10 * 100.0);
        let f = PFamily::capped_geometric((-10.0f64 / 100.0).exp(), 1.0, 100).unwrap();
        assert!(f.values()[0] <= 1.0);
        assert!((f.values().iter().sum::<f64>() - 100.0).abs() < 1e-8);
        assert!(PFamily::new(vec![0.3, 0.2], 1.0).is_err());
    }

    #[test]
    fn saddle_single_mode_and_degenerate() {
        let f = PFamily::new(vec![5.0], 1.0).unwrap();
        let r = saddle_limit_check(&f, SaddleBranch::Reciprocal).unwrap();
        assert!(r.value.is_finite() && r.value > 0.0);
        let f = PFamily::new(vec![1.0, 1.0], 1.0).unwrap();
        assert!(matches!(saddle_limit_check(&f, SaddleBranch::Product), Err(Error::DegenerateVariance(_))));
    }

    #[test]
    fn saddle_geometric_family_trend() {
        let mut prev = f64::INFINITY;
        for n in [100u64, 1000] {
            let f = PFamily::geometric(0.9, 1.0, n).unwrap();
            let r = saddle_limit_check(&f, SaddleBranch::Reciprocal).unwrap();
            assert!(r.converged);
            let gap = (r.value - 1.0).abs();
            assert!(gap < prev && gap < 0.05, "{n}: {}", r.value);
            prev = gap;
        }
    }

    #[test]
    fn unit_circle_integral_matches_exact_coefficient() {
        // product branch with s = 1: coefficient of η^N in Π(1 − p + pη) is e_N of the odds times Π(1 − p)
        let ps = [0.2, 0.5, 0.7, 0.9];
        let odds: Vec<f64> = ps.iter().map(|p| p / (1.0 - p)).collect();
        let base: f64 = ps.iter().map(|p| 1.0 - p).product();
        let e = crate::alpha_linalg::elementary_symmetric(&odds, 4);
        for n in 0..=4u64 {
            let ci = unit_circle_integral(&ps, 1.0, SaddleBranch::Product, n, 64).unwrap();
            assert!((ci.value.re - base * e[n as usize]).abs() < 1e-14);
        }
    }
}
