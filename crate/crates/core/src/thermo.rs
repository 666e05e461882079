//! Fugacity equations, density functions and critical densities.

use std::f64::consts::PI;

use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::kernels::{
    heat_spectrum, phi_hat0, psi_composite, NystromRule, Spectrum, SupportNystrom, TestFunction, TorusGrid,
};
use crate::quadrature::{integrate_adaptive, pairwise_sum};

/// Maximum number of bisection steps in the fugacity solvers.
pub const BISECTION_CAP: usize = 200;

/// Default absolute tolerance of the fugacity solvers.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Terms kept in the direct part of the ζ partial sum.
pub const ZETA_TERMS: usize = 1_000_000;

/// Statistics parameter `α ∈ [−1, 1] \ {0}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaParam {
    alpha: f64,
}

impl AlphaParam {
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha == 0.0 || alpha.abs() > 1.0 {
            return Err(Error::Domain(format!("alpha = {alpha} is not in [-1, 1] \\ {{0}}")));
        }
        Ok(AlphaParam { alpha })
    }

    pub fn value(&self) -> f64 {
        self.alpha
    }

    /// `s = 1/|α|`.
    pub fn s(&self) -> f64 {
        1.0 / self.alpha.abs()
    }

    /// True when `−1/α` is a positive integer.
    pub fn is_negative_reciprocal_integer(&self) -> bool {
        if self.alpha > 0.0 {
            return false;
        }
        let m = -1.0 / self.alpha;
        (m - m.round()).abs() < 1e-12
    }

    /// True for `α ∈ {−1, −1/2, 1/2, 1}`.
    pub fn is_physical(&self) -> bool {
        [-1.0, -0.5, 0.5, 1.0].iter().any(|a| (a - self.alpha).abs() < 1e-15)
    }

    /// Supremum of the fugacity domain `I_α` (infinite for `−1/α ∈ N`).
    pub fn upper(&self) -> f64 {
        if self.is_negative_reciprocal_integer() {
            f64::INFINITY
        } else {
            1.0 / self.alpha.abs()
        }
    }

    pub fn contains(&self, z: f64) -> bool {
        z >= 0.0 && z < self.upper()
    }

    pub fn domain_string(&self) -> String {
        if self.upper().is_infinite() {
            "[0, inf)".into()
        } else {
            format!("[0, {})", self.upper())
        }
    }

    pub fn check(&self, z: f64) -> Result<()> {
        if self.contains(z) && z.is_finite() {
            Ok(())
        } else {
            Err(Error::FugacityOutOfDomain { z, domain: self.domain_string() })
        }
    }
}

/// `ζ(s)` for `s > 1`: direct sum of the first 10⁶ terms plus an Euler–Maclaurin tail.
pub fn zeta_partial_sum(s: f64) -> Result<f64> {
    if s.is_nan() || s <= 1.0 {
        return Err(Error::Domain(format!("zeta({s}) requires s > 1")));
    }
    let n = ZETA_TERMS;
    let terms: Vec<f64> = (1..n).map(|k| (k as f64).powf(-s)).collect();
    let head = pairwise_sum(&terms);
    let nf = n as f64;
    let tail = nf.powf(1.0 - s) / (s - 1.0) + 0.5 * nf.powf(-s) + s * nf.powf(-s - 1.0) / 12.0;
    Ok(head + tail)
}

/// `ζ(s)` from the Bose integral `Γ(s) ζ(s) = ∫₀^∞ u^{s−1}/(e^u − 1) du`.
pub fn zeta_quadrature(s: f64) -> Result<f64> {
    if s.is_nan() || s <= 1.0 {
        return Err(Error::Domain(format!("zeta({s}) requires s > 1")));
    }
    Ok(h_alpha_quadrature_mu(0.0, 1.0, 2.0 * s))
}

/// Momentum-space density integral in log-fugacity `μ = ln z`, for real dimension `d`:
/// `(2/Γ(d/2)) ∫₀^∞ t^{d−1} / (e^{t²−μ} − α) dt`.
fn h_alpha_quadrature_mu(mu: f64, alpha: f64, d: f64) -> f64 {
    let norm = 2.0 / gamma(d / 2.0);
    let integrand = |t: f64| {
        let x = t * t - mu;
        let den = if alpha == 1.0 { x.exp_m1() } else { x.exp() - alpha };
        if t == 0.0 && d > 1.0 {
            0.0
        } else {
            t.powf(d - 1.0) / den
        }
    };
    let t0 = mu.max(0.0).sqrt();
    let t_max = (mu.max(0.0) + 40.0).sqrt() + 1.0;
    let mut breaks = vec![0.0];
    if t0 > 0.5 {
        breaks.push(t0 - 0.5);
        breaks.push(t0);
        breaks.push(t0 + 0.5);
    }
    breaks.push(t_max);
    breaks.dedup();
    let parts: Vec<f64> = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| integrate_adaptive(integrand, w[0], w[1], 1e-15, 1e-14).0)
        .collect();
    norm * pairwise_sum(&parts)
}

fn check_dim(d: usize) -> Result<()> {
    if (1..=3).contains(&d) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("dimension {d} not in 1..=3")))
    }
}

/// Series `Σ_{n≥1} α^{n−1} zⁿ n^{−d/2}`, valid for `|αz| < 1`.
pub fn h_alpha_series(z: f64, alpha: f64, d: usize) -> Result<f64> {
    let a = AlphaParam::new(alpha)?;
    check_dim(d)?;
    a.check(z)?;
    let x = alpha * z;
    if x.abs() >= 1.0 {
        return Err(Error::SeriesDivergent(x.abs()));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    let half = d as f64 / 2.0;
    let mut terms = Vec::new();
    let mut pw = 1.0;
    for n in 1..=50_000_000usize {
        let t = pw * (n as f64).powf(-half);
        terms.push(t);
        pw *= x;
        if pw.abs() < 1e-18 {
            break;
        }
    }
    Ok(z * pairwise_sum(&terms))
}

/// Momentum-integral form of `h^{(α)}(z)`, valid on all of `I_α`.
pub fn h_alpha_quadrature(z: f64, alpha: f64, d: usize) -> Result<f64> {
    let a = AlphaParam::new(alpha)?;
    check_dim(d)?;
    a.check(z)?;
    if z == 0.0 {
        return Ok(0.0);
    }
    Ok(h_alpha_quadrature_mu(z.ln(), alpha, d as f64))
}

/// `h^{(α)}` as a function of `μ = ln z`.
pub fn h_alpha_log(mu: f64, alpha: f64, d: usize) -> Result<f64> {
    let a = AlphaParam::new(alpha)?;
    check_dim(d)?;
    if mu == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    if mu.is_nan() || mu >= a.upper().ln() {
        return Err(Error::FugacityOutOfDomain { z: mu.exp(), domain: a.domain_string() });
    }
    if (alpha * mu.exp()).abs() <= 0.5 {
        h_alpha_series(mu.exp(), alpha, d)
    } else {
        Ok(h_alpha_quadrature_mu(mu, alpha, d as f64))
    }
}

/// Normalized density `h^{(α)}(z) = (4πβ)^{d/2} ρ`.
pub fn h_alpha(z: f64, alpha: f64, d: usize) -> Result<f64> {
    let a = AlphaParam::new(alpha)?;
    check_dim(d)?;
    a.check(z)?;
    if z == 0.0 {
        return Ok(0.0);
    }
    h_alpha_log(z.ln(), alpha, d)
}

/// `sup_{I_α} h^{(α)}`, possibly infinite.
pub fn sup_h(alpha: f64, d: usize) -> Result<f64> {
    let a = AlphaParam::new(alpha)?;
    check_dim(d)?;
    if a.is_negative_reciprocal_integer() {
        return Ok(f64::INFINITY);
    }
    if alpha < 0.0 {
        return Ok(h_alpha_quadrature_mu(a.upper().ln(), alpha, d as f64));
    }
    if d <= 2 {
        return Ok(f64::INFINITY);
    }
    Ok(zeta_partial_sum(d as f64 / 2.0)? / alpha)
}

/// `(4πβ)^{d/2}`.
pub fn density_scale(beta: f64, d: usize) -> f64 {
    (4.0 * PI * beta).powf(d as f64 / 2.0)
}

/// Critical boson density `(4πβ)^{−d/2} ζ(d/2)`.
pub fn rho_c(beta: f64, d: usize) -> Result<f64> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidInput(format!("beta = {beta} must be positive")));
    }
    check_dim(d)?;
    if d <= 2 {
        return Err(Error::Divergent(format!("critical density in d = {d}")));
    }
    Ok(zeta_partial_sum(d as f64 / 2.0)? / density_scale(beta, d))
}

/// Critical density from the Bose momentum integral instead of the ζ series.
pub fn rho_c_quadrature(beta: f64, d: usize) -> Result<f64> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidInput(format!("beta = {beta} must be positive")));
    }
    check_dim(d)?;
    if d <= 2 {
        return Err(Error::Divergent(format!("critical density in d = {d}")));
    }
    Ok(h_alpha_quadrature_mu(0.0, 1.0, d as f64) / density_scale(beta, d))
}

/// Root of a fugacity equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FugacitySolution {
    pub z: f64,
    pub log_z: f64,
    pub rho_hat: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Bisection for an increasing `f` on `(lo, hi)` with `f(lo) ≤ target < f(hi)`.
fn bisect<F: Fn(f64) -> Result<f64>>(f: F, target: f64, mut lo: f64, mut hi: f64, tol: f64) -> Result<(f64, f64, usize)> {
    let mut best = (lo, f64::INFINITY);
    for it in 1..=BISECTION_CAP {
        let mid = 0.5 * (lo + hi);
        let v = f(mid)?;
        let res = (v - target).abs();
        if res < best.1 {
            best = (mid, res);
        }
        if res <= tol || mid == lo || mid == hi {
            return Ok((mid, res, it));
        }
        if v < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((best.0, best.1, BISECTION_CAP))
}

fn check_rho(rho_hat: f64) -> Result<()> {
    if rho_hat.is_finite() && rho_hat >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidDensity(rho_hat))
    }
}

/// Unique `z_* ∈ I_α` with `h^{(α)}(z_*) = ρ̂`.
pub fn solve_fugacity(rho_hat: f64, alpha: f64, d: usize, tol: f64) -> Result<FugacitySolution> {
    let a = AlphaParam::new(alpha)?;
    check_dim(d)?;
    check_rho(rho_hat)?;
    if rho_hat == 0.0 {
        return Ok(FugacitySolution { z: 0.0, log_z: f64::NEG_INFINITY, rho_hat, residual: 0.0, iterations: 0 });
    }
    let sup = sup_h(alpha, d)?;
    if rho_hat >= sup {
        return Err(Error::Supercritical { rho_hat, sup });
    }
    let h = |mu: f64| h_alpha_log(mu, alpha, d);
    let mut lo = rho_hat.ln() - 1.0;
    while h(lo)? > rho_hat {
        lo -= 4.0;
    }
    let top = a.upper().ln();
    let mut hi = if top.is_finite() { top } else { lo + 2.0 };
    if top.is_infinite() {
        while h(hi)? < rho_hat {
            hi += hi.abs().max(2.0);
        }
    }
    let hc = |mu: f64| if mu >= top { Ok(f64::INFINITY) } else { h(mu) };
    let (mu, residual, iterations) = bisect(hc, rho_hat, lo, hi, tol)?;
    Ok(FugacitySolution { z: mu.exp(), log_z: mu, rho_hat, residual, iterations })
}

/// [`solve_fugacity`] for a physical density `ρ` at inverse temperature `β`.
pub fn solve_fugacity_physical(rho: f64, beta: f64, alpha: f64, d: usize, tol: f64) -> Result<FugacitySolution> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidInput(format!("beta = {beta} must be positive")));
    }
    check_rho(rho)?;
    solve_fugacity(rho * density_scale(beta, d), alpha, d, tol)
}

/// `Tr[zG(1 − zαG)^{−1}]` over a spectrum.
pub fn mean_count(values: &[f64], z: f64, alpha: f64) -> f64 {
    let t: Vec<f64> = values.iter().map(|&g| z * g / (1.0 - z * alpha * g)).collect();
    pairwise_sum(&t)
}

/// `h_L^{(α)}(z) = Tr[zG(1 − zαG)^{−1}] / Tr G`.
pub fn h_finite(values: &[f64], z: f64, alpha: f64) -> Result<f64> {
    AlphaParam::new(alpha)?.check(z)?;
    check_factors(values, z, alpha)?;
    Ok(mean_count(values, z, alpha) / pairwise_sum(values))
}

/// `h_L^{(α)}` on the heat spectrum of the box of side `l` in dimension `d`.
pub fn h_finite_heat(l: f64, beta: f64, d: usize, z: f64, alpha: f64) -> Result<f64> {
    let grid = TorusGrid::with_tail_rule(d, l, beta)?;
    let spec = heat_spectrum(&grid, beta)?;
    h_finite(spec.values(), z, alpha)
}

fn check_factors(values: &[f64], z: f64, alpha: f64) -> Result<()> {
    let g0 = values.iter().cloned().fold(0.0, f64::max);
    let f = 1.0 - z * alpha * g0;
    if f <= 0.0 {
        return Err(Error::Singularity(f.abs()));
    }
    Ok(())
}

/// Root of `Tr[zG(1 − zαG)^{−1}] = N` on a finite spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiniteFugacity {
    pub z: f64,
    pub n: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Solve an increasing count equation `count(z) = n` on `[0, upper)`.
fn solve_count<F: Fn(f64) -> Result<f64>>(count: F, n: f64, upper: f64, tol: f64) -> Result<FiniteFugacity> {
    if !(n.is_finite() && n >= 0.0) {
        return Err(Error::InvalidDensity(n));
    }
    if n == 0.0 {
        return Ok(FiniteFugacity { z: 0.0, n, residual: 0.0, iterations: 0 });
    }
    let hi = if upper.is_finite() {
        upper
    } else {
        let mut h = 1.0;
        while count(h)? < n {
            h *= 2.0;
            if h > 1e300 {
                return Err(Error::UnreachableN { n, sup: f64::INFINITY });
            }
        }
        h
    };
    let guarded = |z: f64| if z >= upper { Ok(f64::INFINITY) } else { count(z) };
    let (z, residual, iterations) = bisect(guarded, n, 0.0, hi, tol)?;
    Ok(FiniteFugacity { z, n, residual, iterations })
}

/// `z_N` on a finite spectrum; applied to the spectrum of `G̃` it yields `z̃_N`.
pub fn finite_fugacity(n: f64, spectrum: &Spectrum, alpha: f64, tol: f64) -> Result<FiniteFugacity> {
    let a = AlphaParam::new(alpha)?;
    let vals = spectrum.values();
    let g0 = spectrum.top();
    let upper = if alpha > 0.0 && g0 > 1.0 { 1.0 / (alpha * g0) } else { a.upper() };
    let sup = if alpha > 0.0 {
        if g0 >= 1.0 {
            f64::INFINITY
        } else {
            mean_count(vals, upper, alpha)
        }
    } else if upper.is_infinite() {
        vals.iter().filter(|&&g| g > 0.0).count() as f64 / alpha.abs()
    } else {
        mean_count(vals, upper, alpha)
    };
    if n >= sup {
        return Err(Error::UnreachableN { n, sup });
    }
    solve_count(|z| Ok(mean_count(vals, z, alpha)), n, upper, tol)
}

/// `z̃_N` on a box too large for the Fourier route, via the support reduction.
pub fn finite_fugacity_support(n: f64, op: &SupportNystrom, upper: f64, tol: f64) -> Result<FiniteFugacity> {
    solve_count(|z| Ok(op.evaluate(z)?.count), n, upper, tol)
}

/// Summation branch of the saddle-point parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SaddleBranch {
    /// `α < 0`: factors `(1 + p(η − 1))^s`, `v = Σ s p(1 − p)`.
    Product,
    /// `α > 0`: factors `(1 − p(η − 1))^{−s}`, `w = Σ s p(1 + p)`.
    Reciprocal,
}

impl SaddleBranch {
    pub fn for_alpha(alpha: f64) -> Self {
        if alpha < 0.0 {
            SaddleBranch::Product
        } else {
            SaddleBranch::Reciprocal
        }
    }
}

/// Variance traces and saddle-point parameters at fugacity `z`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceTraces {
    /// `Σ z g/(1 − zαg)²`.
    pub v: f64,
    /// `Σ s p(1 ∓ p)` recomputed from `p`; equal to `v` up to rounding.
    pub w: f64,
    /// `p_j = |α| z g_j/(1 − αz g_j)`.
    pub p: Vec<f64>,
    pub s: f64,
    pub branch: SaddleBranch,
}

pub fn variance_traces(spectrum: &Spectrum, z: f64, alpha: f64) -> Result<VarianceTraces> {
    let a = AlphaParam::new(alpha)?;
    a.check(z)?;
    let vals = spectrum.values();
    check_factors(vals, z, alpha)?;
    let v = pairwise_sum(&vals.iter().map(|&g| z * g / (1.0 - z * alpha * g).powi(2)).collect::<Vec<_>>());
    let p: Vec<f64> = vals.iter().map(|&g| alpha.abs() * z * g / (1.0 - alpha * z * g)).collect();
    let s = a.s();
    let branch = SaddleBranch::for_alpha(alpha);
    let sign = if alpha < 0.0 { -1.0 } else { 1.0 };
    let w = pairwise_sum(&p.iter().map(|&q| s * q * (1.0 + sign * q)).collect::<Vec<_>>());
    Ok(VarianceTraces { v, w, p, s, branch })
}

/// One row of the finite-size fugacity comparison between `G` and `G̃`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FugacityGapRow {
    pub n: f64,
    pub l: f64,
    pub z_n: f64,
    pub z_tilde_n: f64,
    /// `N (z̃_N − z_N)`.
    pub scaled_gap: f64,
    pub v: f64,
    pub v_tilde: f64,
}

/// `z_N`, `z̃_N`, `v^{(N)}`, `ṽ^{(N)}` on the boxes `L = N/ρ` (d = 1).
pub fn fugacity_gap_study(
    ns: &[usize],
    rho: f64,
    beta: f64,
    f: &TestFunction,
    alpha: f64,
    rule: NystromRule,
) -> Result<Vec<FugacityGapRow>> {
    let a = AlphaParam::new(alpha)?;
    check_rho(rho)?;
    if rho == 0.0 {
        return Err(Error::InvalidDensity(rho));
    }
    ns.iter()
        .map(|&n| {
            let nf = n as f64;
            let l = nf / rho;
            let grid = TorusGrid::with_tail_rule(1, l, beta)?;
            let spec = heat_spectrum(&grid, beta)?;
            let zn = finite_fugacity(nf, &spec, alpha, 1e-11)?;
            let op = SupportNystrom::new(f, l, beta, alpha, rule)?;
            let upper = if alpha > 0.0 { 1.0 / alpha } else { a.upper() };
            let zt = finite_fugacity_support(nf, &op, upper, 1e-11)?;
            let v = variance_traces(&spec, zn.z, alpha)?.v;
            let v_tilde = op.evaluate(zt.z)?.variance;
            Ok(FugacityGapRow {
                n: nf,
                l,
                z_n: zn.z,
                z_tilde_n: zt.z,
                scaled_gap: nf * (zt.z - zn.z),
                v,
                v_tilde,
            })
        })
        .collect()
}

/// Composite-particle density `(1/2π) ∫ zψ/(1 − zαψ) dp` in d = 1.
pub fn composite_density(z: f64, alpha: f64, a: f64) -> Result<f64> {
    let ap = AlphaParam::new(alpha)?;
    ap.check(z)?;
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidInput(format!("well half-width {a} must be positive")));
    }
    let h0 = phi_hat0(a);
    let rem = |p: f64| {
        let s = psi_composite(p, a);
        z * z * alpha * s * s / (1.0 - z * alpha * s)
    };
    let k0 = PI / (2.0 * a);
    let mut breaks = vec![0.0];
    let gap = (1.0 - z * alpha).max(1e-300);
    if gap < 1e-2 {
        let mut x = gap.sqrt() * a / 8.0;
        while x < 0.5 / a {
            breaks.push(x);
            x *= 2.0;
        }
    }
    let mut x = breaks.last().copied().unwrap_or(0.0);
    while x < 400.0 * k0 {
        x += k0;
        breaks.push(x);
    }
    let parts: Vec<f64> = breaks
        .windows(2)
        .map(|w| integrate_adaptive(rem, w[0], w[1], 1e-15, 1e-13).0)
        .collect();
    Ok((z / (h0 * h0) + 2.0 * pairwise_sum(&parts)) / (2.0 * PI))
}

/// Supremum of the composite-particle density over `I_α`.
///
/// For `α > 0` in d = 1 the integrand behaves like `1/(⟨r²⟩p²)` near the origin, so
/// the supremum is infinite and a divergence error is returned.
pub fn rho_c_composite(alpha: f64, a: f64, d: usize) -> Result<f64> {
    let ap = AlphaParam::new(alpha)?;
    if d != 1 {
        return Err(Error::InvalidInput("the composite model is implemented for d = 1".into()));
    }
    if ap.is_negative_reciprocal_integer() {
        return Ok(f64::INFINITY);
    }
    if alpha > 0.0 {
        return Err(Error::Divergent("composite critical density in d = 1".into()));
    }
    composite_density(ap.upper() * (1.0 - 1e-15), alpha, a)
}

/// Unique composite fugacity with density `ρ` (d = 1).
pub fn solve_composite_fugacity(rho: f64, alpha: f64, a: f64, tol: f64) -> Result<FugacitySolution> {
    let ap = AlphaParam::new(alpha)?;
    check_rho(rho)?;
    if rho == 0.0 {
        return Ok(FugacitySolution { z: 0.0, log_z: f64::NEG_INFINITY, rho_hat: 0.0, residual: 0.0, iterations: 0 });
    }
    let upper = ap.upper();
    if alpha < 0.0 && upper.is_finite() {
        let sup = composite_density(upper * (1.0 - 1e-15), alpha, a)?;
        if rho >= sup {
            return Err(Error::Supercritical { rho_hat: rho, sup });
        }
    }
    let sol = solve_count(|z| composite_density(z, alpha, a), rho, upper, tol)?;
    Ok(FugacitySolution { z: sol.z, log_z: sol.z.ln(), rho_hat: rho, residual: sol.residual, iterations: sol.iterations })
}
