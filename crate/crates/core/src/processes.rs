//! Laplace functionals of the canonical ensembles and their thermodynamic limits.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alpha_linalg::{complete_homogeneous, elementary_symmetric, for_each_permutation, Permutation};
use crate::error::{Error, Result};
use crate::fredholm::{coefficient_contour, log_det_power_real, ContourCoefficient, ContourSpec};
use crate::kernels::{
    build_gtilde, composite_k_operator, composite_spectra, heat_kernel_1d_fourier, heat_spectrum, limit_k_operator,
    NystromRule, Spectrum, TestFunction, TorusGrid, COMPOSITE_BLOCK_P, COMPOSITE_TAIL_P,
};
use crate::quadrature::gauss_legendre;
use crate::symgroup::{para_trace_characters, ParaKind};
use crate::thermo::{
    density_scale, finite_fugacity, rho_c, rho_c_composite, solve_composite_fugacity, solve_fugacity,
    variance_traces, FugacitySolution, DEFAULT_TOL,
};

/// Largest particle number accepted by the direct-integral oracle.
pub const DIRECT_MAX_N: usize = 3;

/// Default nodes per coordinate of the direct-integral oracle.
pub const DIRECT_NODES: usize = 40;

/// Largest particle number of the character-sum path for para ensembles.
pub const CHARACTER_MAX_N: usize = crate::symgroup::BRUTE_FORCE_MAX_N;

/// Ensemble families with their statistics parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnsembleKind {
    Fermion,
    Boson,
    ParaBoson2,
    ParaFermion2,
    CompositeFermion,
    CompositeBoson,
}

impl EnsembleKind {
    pub const ALL: [EnsembleKind; 6] = [
        EnsembleKind::Fermion,
        EnsembleKind::Boson,
        EnsembleKind::ParaBoson2,
        EnsembleKind::ParaFermion2,
        EnsembleKind::CompositeFermion,
        EnsembleKind::CompositeBoson,
    ];

    /// `α` of the underlying determinant power.
    pub fn alpha(self) -> f64 {
        match self {
            EnsembleKind::Fermion | EnsembleKind::ParaFermion2 | EnsembleKind::CompositeFermion => -1.0,
            EnsembleKind::Boson | EnsembleKind::ParaBoson2 | EnsembleKind::CompositeBoson => 1.0,
        }
    }

    pub fn para(self) -> Option<ParaKind> {
        match self {
            EnsembleKind::ParaBoson2 => Some(ParaKind::Boson2),
            EnsembleKind::ParaFermion2 => Some(ParaKind::Fermion2),
            _ => None,
        }
    }

    pub fn is_composite(self) -> bool {
        matches!(self, EnsembleKind::CompositeFermion | EnsembleKind::CompositeBoson)
    }

    pub fn name(self) -> &'static str {
        match self {
            EnsembleKind::Fermion => "fermion",
            EnsembleKind::Boson => "boson",
            EnsembleKind::ParaBoson2 => "para-boson2",
            EnsembleKind::ParaFermion2 => "para-fermion2",
            EnsembleKind::CompositeFermion => "composite-fermion",
            EnsembleKind::CompositeBoson => "composite-boson",
        }
    }
}

impl fmt::Display for EnsembleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnsembleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EnsembleKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown ensemble kind '{s}'")))
    }
}

/// Ensemble parameters shared by the finite-volume and limit computations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub d: usize,
    /// Inverse temperature; unused by the composite kinds.
    pub beta: f64,
    /// Well half-width; used by the composite kinds only.
    pub a: f64,
    pub rho: f64,
}

impl EnsembleSpec {
    pub fn new(kind: EnsembleKind, d: usize, beta: f64, a: f64, rho: f64) -> Result<Self> {
        let spec = EnsembleSpec { kind, d, beta, a, rho };
        spec.validate()?;
        Ok(spec)
    }

    /// `d = 1`, `β = 1`, `a = 1`, `ρ = 0.2`.
    pub fn default_1d(kind: EnsembleKind) -> Self {
        EnsembleSpec { kind, d: 1, beta: 1.0, a: 1.0, rho: 0.2 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.d) {
            return Err(Error::InvalidInput(format!("dimension {} not in 1..=3", self.d)));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidInput(format!("beta = {} must be positive", self.beta)));
        }
        if !(self.rho.is_finite() && self.rho >= 0.0) {
            return Err(Error::InvalidDensity(self.rho));
        }
        if self.kind.is_composite() {
            if self.d != 1 {
                return Err(Error::InvalidInput("composite ensembles are implemented for d = 1".into()));
            }
            if !(self.a > 0.0 && self.a.is_finite()) {
                return Err(Error::InvalidInput(format!("well half-width {} must be positive", self.a)));
            }
        }
        let critical = match self.kind {
            EnsembleKind::Boson => Some((self.rho, critical_or_infinite(rho_c(self.beta, self.d))?)),
            EnsembleKind::ParaBoson2 => Some((self.rho / 2.0, critical_or_infinite(rho_c(self.beta, self.d))?)),
            EnsembleKind::CompositeBoson => Some((self.rho, critical_or_infinite(rho_c_composite(1.0, self.a, 1))?)),
            _ => None,
        };
        if let Some((rho, sup)) = critical {
            if rho >= sup {
                return Err(Error::Supercritical { rho_hat: rho, sup });
            }
        }
        Ok(())
    }
}

fn critical_or_infinite(r: Result<f64>) -> Result<f64> {
    match r {
        Err(Error::Divergent(_)) => Ok(f64::INFINITY),
        other => other,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LaplaceMethod {
    ContourRatio,
    Factorized,
    CharacterSum,
    SymmetricPolynomial,
    LimitFormula,
    DirectIntegral,
}

/// `E[e^{−⟨f, ξ⟩}]` with the route used to obtain it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LaplaceResult {
    pub value: f64,
    pub method: LaplaceMethod,
    pub error_estimate: f64,
}

impl LaplaceResult {
    fn exact_one(method: LaplaceMethod) -> Self {
        LaplaceResult { value: 1.0, method, error_estimate: 0.0 }
    }
}

/// Spectra of `G_L` and `G̃_L` on one box.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSpectra {
    pub g: Spectrum,
    pub gt: Spectrum,
}

/// `G_L` and `G̃_L` for the single-particle operator of `spec.kind` (d = 1).
pub fn finite_spectra(f: &TestFunction, l: f64, spec: &EnsembleSpec) -> Result<FiniteSpectra> {
    if spec.d != 1 || f.dim() != 1 {
        return Err(Error::InvalidInput("finite-volume Laplace functionals are implemented for d = 1".into()));
    }
    f.check_inside_box(l)?;
    if spec.kind.is_composite() {
        let (g, gt) = composite_spectra(l, spec.a, f, COMPOSITE_BLOCK_P, COMPOSITE_TAIL_P)?;
        return Ok(FiniteSpectra { g, gt });
    }
    let grid = TorusGrid::with_tail_rule(1, l, spec.beta)?;
    let g = heat_spectrum(&grid, spec.beta)?;
    let op = build_gtilde(&grid, spec.beta, f)?;
    let gt = op.spectrum(g.origin().clone())?;
    Ok(FiniteSpectra { g, gt })
}

/// Factors of the finite-volume ratio after the change of radius from `z_N` to `z̃_N`.
///
/// `a·b·c·d` equals the contour ratio; as `L → ∞`, `a, b, d → 1` and `c` tends to the
/// limit Fredholm determinant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioDiagnostics {
    pub z_n: f64,
    pub z_tilde_n: f64,
    pub v: f64,
    pub v_tilde: f64,
    /// `(z_N/z̃_N)^N exp(N(z̃_N − z_N)/z_N)`.
    pub a: f64,
    /// `Det[1 − z̃_N αG]^{−1/α} / Det[1 − z_N αG]^{−1/α} · exp(−N(z̃_N − z_N)/z_N)`.
    pub b: f64,
    /// `Det[1 − z̃_N αG̃]^{−1/α} / Det[1 − z̃_N αG]^{−1/α}`.
    pub c: f64,
    /// Ratio of the normalized unit-circle integrals.
    pub d: f64,
}

/// Contour ratio `[G̃ coefficient at radius z̃_N] / [G coefficient at radius z_N]`.
pub fn contour_ratio(spectra: &FiniteSpectra, alpha: f64, n: usize) -> Result<(LaplaceResult, Option<RatioDiagnostics>)> {
    if n == 0 {
        return Ok((LaplaceResult::exact_one(LaplaceMethod::ContourRatio), None));
    }
    let nf = n as f64;
    let zn = finite_fugacity(nf, &spectra.g, alpha, DEFAULT_TOL)?.z;
    let zt = finite_fugacity(nf, &spectra.gt, alpha, DEFAULT_TOL)?.z;
    let den = coefficient_contour(spectra.g.values(), alpha, n as u64, ContourSpec::with_radius(zn)?)?;
    let num = coefficient_contour(spectra.gt.values(), alpha, n as u64, ContourSpec::with_radius(zt)?)?;
    check_positive(&den)?;
    check_positive(&num)?;
    let value = (num.log_value - den.log_value).exp();
    let ld = |s: &Spectrum, z: f64| log_det_power_real(s.values(), alpha, z);
    let shift = nf * (zt - zn) / zn;
    let a = (nf * (zn / zt).ln() + shift).exp();
    let b = (ld(&spectra.g, zt)? - ld(&spectra.g, zn)? - shift).exp();
    let c = (ld(&spectra.gt, zt)? - ld(&spectra.g, zt)?).exp();
    let d = num.circle / den.circle;
    let diag = RatioDiagnostics {
        z_n: zn,
        z_tilde_n: zt,
        v: variance_traces(&spectra.g, zn, alpha)?.v,
        v_tilde: variance_traces(&spectra.gt, zt, alpha)?.v,
        a,
        b,
        c,
        d,
    };
    let err = value * (num.imag_residue + den.imag_residue + 2e-9);
    Ok((LaplaceResult { value, method: LaplaceMethod::ContourRatio, error_estimate: err }, Some(diag)))
}

fn check_positive(c: &ContourCoefficient) -> Result<()> {
    if c.circle > 0.0 && c.log_value.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("contour coefficient is not positive (circle integral {})", c.circle)))
    }
}

/// Finite-volume Laplace functional `E_{L,N}[e^{−⟨f, ξ⟩}]` (d = 1).
pub fn finite_laplace(f: &TestFunction, l: f64, n: usize, spec: &EnsembleSpec) -> Result<LaplaceResult> {
    Ok(finite_laplace_with_diagnostics(f, l, n, spec)?.0)
}

/// [`finite_laplace`] together with the radius-change factors (non-para kinds).
pub fn finite_laplace_with_diagnostics(
    f: &TestFunction,
    l: f64,
    n: usize,
    spec: &EnsembleSpec,
) -> Result<(LaplaceResult, Option<RatioDiagnostics>)> {
    if spec.kind.para().is_some() {
        return Ok((para_finite_laplace(f, l, n, spec)?, None));
    }
    let spectra = finite_spectra(f, l, spec)?;
    if f.is_zero() {
        return Ok((LaplaceResult::exact_one(LaplaceMethod::ContourRatio), None));
    }
    contour_ratio(&spectra, spec.kind.alpha(), n)
}

/// Ratio `e_N(G̃)/e_N(G)` (α = −1) or `h_N(G̃)/h_N(G)` (α = 1) from the spectra.
pub fn symmetric_polynomial_laplace(f: &TestFunction, l: f64, n: usize, spec: &EnsembleSpec) -> Result<LaplaceResult> {
    let spectra = finite_spectra(f, l, spec)?;
    let poly = |v: &[f64]| match spec.kind.alpha() < 0.0 {
        true => elementary_symmetric(v, n)[n],
        false => complete_homogeneous(v, n)[n],
    };
    let value = match spec.kind.para() {
        None => poly(spectra.gt.values()) / poly(spectra.g.values()),
        Some(_) => {
            let (hi, lo) = (n.div_ceil(2), n / 2);
            let ratio = |m: usize| {
                let p = |v: &[f64]| match spec.kind.alpha() < 0.0 {
                    true => elementary_symmetric(v, m)[m],
                    false => complete_homogeneous(v, m)[m],
                };
                p(spectra.gt.values()) / p(spectra.g.values())
            };
            ratio(hi) * ratio(lo)
        }
    };
    Ok(LaplaceResult { value, method: LaplaceMethod::SymmetricPolynomial, error_estimate: 1e-13 * value })
}

/// Para ensembles of order two as a product of two trace ratios of sizes `⌈N/2⌉` and `⌊N/2⌋`.
pub fn para_finite_laplace(f: &TestFunction, l: f64, n: usize, spec: &EnsembleSpec) -> Result<LaplaceResult> {
    if spec.kind.para().is_none() {
        return Err(Error::InvalidInput(format!("{} is not a para ensemble", spec.kind)));
    }
    let spectra = finite_spectra(f, l, spec)?;
    if f.is_zero() {
        return Ok(LaplaceResult::exact_one(LaplaceMethod::Factorized));
    }
    let alpha = spec.kind.alpha();
    let (hi, _) = contour_ratio(&spectra, alpha, n.div_ceil(2))?;
    let (lo, _) = contour_ratio(&spectra, alpha, n / 2)?;
    Ok(LaplaceResult {
        value: hi.value * lo.value,
        method: LaplaceMethod::Factorized,
        error_estimate: hi.error_estimate * lo.value + lo.error_estimate * hi.value,
    })
}

/// Para ensembles through the induced-character sum over cycle types (`N ≤ 8`).
pub fn para_character_laplace(f: &TestFunction, l: f64, n: usize, spec: &EnsembleSpec) -> Result<LaplaceResult> {
    let kind = spec
        .kind
        .para()
        .ok_or_else(|| Error::InvalidInput(format!("{} is not a para ensemble", spec.kind)))?;
    let spectra = finite_spectra(f, l, spec)?;
    let num = para_trace_characters(spectra.gt.values(), n, kind)?;
    let den = para_trace_characters(spectra.g.values(), n, kind)?;
    let value = num / den;
    Ok(LaplaceResult { value, method: LaplaceMethod::CharacterSum, error_estimate: 1e-12 * value })
}

/// Gauss–Legendre nodes on the periodic box, concentrated on the support of `f`.
fn box_rule(f: &TestFunction, l: f64, nodes: usize) -> (Vec<f64>, Vec<f64>) {
    let (s0, s1) = f.support()[0];
    let half = 0.5 * l;
    let outside = (nodes / 5).max(2);
    let inside = nodes.saturating_sub(2 * outside).max(2);
    let mut xs = Vec::with_capacity(nodes);
    let mut ws = Vec::with_capacity(nodes);
    for (lo, hi, k) in [(-half, s0, outside), (s0, s1, inside), (s1, half, outside)] {
        if hi <= lo {
            continue;
        }
        let (t, w) = gauss_legendre(k);
        for (ti, wi) in t.iter().zip(&w) {
            xs.push(0.5 * (lo + hi) + 0.5 * (hi - lo) * ti);
            ws.push(0.5 * (hi - lo) * wi);
        }
    }
    (xs, ws)
}

/// Direct product-grid quadrature of
/// `∫ e^{−Σ f(x_i)} det_α[G_L(x_i, x_j)] dx / ∫ det_α[G_L(x_i, x_j)] dx` (N ≤ 3, heat kinds).
pub fn direct_integral_laplace(
    f: &TestFunction,
    l: f64,
    n: usize,
    spec: &EnsembleSpec,
    nodes: usize,
) -> Result<LaplaceResult> {
    if n > DIRECT_MAX_N {
        return Err(Error::DimensionTooLarge { what: "direct integral", n, cap: DIRECT_MAX_N });
    }
    if !matches!(spec.kind, EnsembleKind::Fermion | EnsembleKind::Boson) || spec.d != 1 || f.dim() != 1 {
        return Err(Error::InvalidInput("the direct integral covers fermions and bosons in d = 1".into()));
    }
    f.check_inside_box(l)?;
    if n == 0 {
        return Ok(LaplaceResult::exact_one(LaplaceMethod::DirectIntegral));
    }
    let alpha = spec.kind.alpha();
    let (xs, ws) = box_rule(f, l, nodes);
    let q = xs.len();
    let m = crate::kernels::heat_mode_cutoff(l, spec.beta)?;
    let kmat: Vec<f64> = (0..q * q).map(|ij| heat_kernel_1d_fourier(l, spec.beta, m, xs[ij / q] - xs[ij % q])).collect();
    let ef: Vec<f64> = xs.iter().map(|x| (-f.eval(&[*x])).exp()).collect();
    let mut perms: Vec<(Vec<usize>, f64)> = Vec::new();
    for_each_permutation(n, |p| {
        let cycles = Permutation::new(p.to_vec()).expect("valid permutation").cycle_lengths().len();
        perms.push((p.to_vec(), alpha.powi((n - cycles) as i32)));
    });
    let total = q.pow(n as u32);
    let (num, den) = (0..total)
        .into_par_iter()
        .map(|flat| {
            let mut idx = [0usize; DIRECT_MAX_N];
            let mut r = flat;
            for slot in idx.iter_mut().take(n) {
                *slot = r % q;
                r /= q;
            }
            let mut w = 1.0;
            let mut e = 1.0;
            for &i in &idx[..n] {
                w *= ws[i];
                e *= ef[i];
            }
            let mut det = 0.0;
            for (p, c) in &perms {
                let mut prod = *c;
                for (a, &b) in p.iter().enumerate() {
                    prod *= kmat[idx[a] * q + idx[b]];
                }
                det += prod;
            }
            (w * e * det, w * det)
        })
        .reduce(|| (0.0, 0.0), |x, y| (x.0 + y.0, x.1 + y.1));
    let value = num / den;
    Ok(LaplaceResult { value, method: LaplaceMethod::DirectIntegral, error_estimate: f64::NAN })
}

/// Fugacity `z_*` of the limit formula of `spec`.
pub fn limit_fugacity(spec: &EnsembleSpec) -> Result<FugacitySolution> {
    spec.validate()?;
    let alpha = spec.kind.alpha();
    if spec.kind.is_composite() {
        return solve_composite_fugacity(spec.rho, alpha, spec.a, DEFAULT_TOL);
    }
    let rho = if spec.kind.para().is_some() { spec.rho / 2.0 } else { spec.rho };
    solve_fugacity(rho * density_scale(spec.beta, spec.d), alpha, spec.d, DEFAULT_TOL)
}

/// `Det(1 + z_*αK)^{−1/α}` on one Nyström rule; squared for para kinds.
pub fn limit_value(f: &TestFunction, spec: &EnsembleSpec, rule: NystromRule) -> Result<f64> {
    if f.dim() != spec.d {
        return Err(Error::InvalidInput("test function dimension does not match the ensemble".into()));
    }
    let sol = limit_fugacity(spec)?;
    if !sol.z.is_finite() {
        return Err(Error::Domain(format!("limit fugacity overflows (ln z = {})", sol.log_z)));
    }
    if f.is_zero() {
        return Ok(1.0);
    }
    let alpha = spec.kind.alpha();
    let op = if spec.kind.is_composite() {
        composite_k_operator(f, sol.z, alpha, spec.a, rule)?
    } else {
        limit_k_operator(f, sol.z, alpha, spec.beta, rule)?
    };
    let v = op.det_power(alpha)?;
    Ok(if spec.kind.para().is_some() { v * v } else { v })
}

/// Thermodynamic-limit Laplace functional, with the change under Nyström refinement as error estimate.
pub fn limit_laplace(f: &TestFunction, spec: &EnsembleSpec, rule: NystromRule) -> Result<LaplaceResult> {
    let coarse = limit_value(f, spec, rule)?;
    let fine = limit_value(f, spec, rule.refined())?;
    Ok(LaplaceResult { value: fine, method: LaplaceMethod::LimitFormula, error_estimate: (fine - coarse).abs() })
}

/// Composite-particle limit at density `ρ` for a well of half-width `a` (d = 1).
pub fn composite_limit_laplace(
    f: &TestFunction,
    rho: f64,
    a: f64,
    kind: EnsembleKind,
    rule: NystromRule,
) -> Result<LaplaceResult> {
    if !kind.is_composite() {
        return Err(Error::InvalidInput(format!("{kind} is not a composite ensemble")));
    }
    limit_laplace(f, &EnsembleSpec::new(kind, 1, 1.0, a, rho)?, rule)
}

/// One box of a convergence study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StudyRow {
    pub l: f64,
    pub n: usize,
    pub finite: f64,
    pub limit: f64,
    /// `|finite − limit|`.
    pub gap: f64,
    pub diagnostics: Option<RatioDiagnostics>,
}

/// Finite-volume values at `N = round(ρL)` against the limit formula, one row per box.
pub fn convergence_study(
    f: &TestFunction,
    spec: &EnsembleSpec,
    ls: &[f64],
    rule: NystromRule,
) -> Result<Vec<StudyRow>> {
    spec.validate()?;
    if spec.d != 1 {
        return Err(Error::InvalidInput("convergence studies are implemented for d = 1".into()));
    }
    if ls.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("box sizes must be strictly increasing".into()));
    }
    let limit = limit_value(f, spec, rule)?;
    ls.par_iter()
        .map(|&l| {
            let n = (spec.rho * l).round() as usize;
            if n == 0 {
                return Err(Error::InvalidInput(format!("box {l} holds no particles at density {}", spec.rho)));
            }
            let (res, diagnostics) = finite_laplace_with_diagnostics(f, l, n, spec)?;
            Ok(StudyRow { l, n, finite: res.value, limit, gap: (res.value - limit).abs(), diagnostics })
        })
        .collect()
}
