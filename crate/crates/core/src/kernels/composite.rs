//! Composite particles in d = 1: the relative-coordinate ground state of an
//! infinitely deep square well of half-width `a`,
//! `φ(r) = cos(πr/2a)/√a` on `[−a, a]`, and the convolution operator it defines.

use super::{sandwich_matrix, one_minus_exp_coefficients, FourierOperator, Spectrum, SpectrumOrigin, TestFunction, TorusGrid};
use crate::error::{Error, Result};
use crate::quadrature::pairwise_sum;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Default momentum cutoff for the explicit Fourier block of the composite `G̃_L`.
pub const COMPOSITE_BLOCK_P: f64 = 40.0;
/// Default momentum cutoff for composite spectra.
pub const COMPOSITE_TAIL_P: f64 = 2000.0;

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-6 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Ground-state wave function.
pub fn well_ground_state(r: f64, a: f64) -> f64 {
    if r.abs() >= a {
        0.0
    } else {
        (PI * r / (2.0 * a)).cos() / a.sqrt()
    }
}

/// `φ̂(p) = (2π)^{−1/2} ∫ φ(r) e^{−ipr} dr`.
pub fn phi_hat(p: f64, a: f64) -> f64 {
    let k0 = PI / (2.0 * a);
    let p = p.abs();
    2.0 * k0 * a / (2.0 * PI * a).sqrt() * sinc((p - k0) * a) / (p + k0)
}

/// `φ̂(0)`.
pub fn phi_hat0(a: f64) -> f64 {
    phi_hat(0.0, a)
}

/// `‖φ‖_{L¹} = 4√a/π`.
pub fn phi_l1_norm(a: f64) -> f64 {
    4.0 * a.sqrt() / PI
}

/// `ψ(p) = (φ̂(p)/φ̂(0))²`.
pub fn psi_composite(p: f64, a: f64) -> f64 {
    (phi_hat(p, a) / phi_hat0(a)).powi(2)
}

/// Autocorrelation `∫ φ(t) φ(t + r) dt`.
pub fn well_autocorrelation(r: f64, a: f64) -> f64 {
    let r = r.abs();
    if r >= 2.0 * a {
        return 0.0;
    }
    let k0 = PI / (2.0 * a);
    ((2.0 * a - r) * (k0 * r).cos() + (k0 * r).sin() / k0) / (2.0 * a)
}

/// Spectral data of `V_L = φ_L / ‖φ‖_{L¹}` on the periodic box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeSpectrum {
    pub l: f64,
    pub a: f64,
    pub modes: Vec<i64>,
    /// Eigenvalues `φ̂(2πk/L)/φ̂(0)` of `V_L`, per mode (signed).
    pub v: Vec<f64>,
    /// Spectrum of `G = V_L^* V_L`.
    pub g: Spectrum,
    pub l1_norm: f64,
    pub phi_hat0: f64,
    /// `Σ_k (2π/L) |φ̂(2πk/L)|²` over the retained modes.
    pub plancherel: f64,
}

/// Grid whose cutoff reaches momentum `p_max`.
pub fn composite_grid(l: f64, p_max: f64) -> Result<TorusGrid> {
    TorusGrid::new(1, l, ((p_max * l / (2.0 * PI)).ceil() as usize).max(1))
}

fn check_well(l: f64, a: f64) -> Result<()> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidInput(format!("well half-width {a} must be positive")));
    }
    if 2.0 * a >= l {
        return Err(Error::WellExceedsBox { width: 2.0 * a, l });
    }
    Ok(())
}

pub fn composite_spectrum(grid: &TorusGrid, a: f64) -> Result<CompositeSpectrum> {
    if grid.d() != 1 {
        return Err(Error::InvalidInput("composite particles are implemented for d = 1".into()));
    }
    let l = grid.l();
    check_well(l, a)?;
    let h0 = phi_hat0(a);
    let modes = grid.modes_1d();
    let hats: Vec<f64> = modes.iter().map(|&k| phi_hat(2.0 * PI * k as f64 / l, a)).collect();
    let v: Vec<f64> = hats.iter().map(|h| h / h0).collect();
    let plancherel = pairwise_sum(&hats.iter().map(|h| 2.0 * PI / l * h * h).collect::<Vec<_>>());
    let g = Spectrum::new(
        v.iter().map(|x| x * x).collect(),
        SpectrumOrigin { family: "composite".into(), beta: None, l: Some(l), cutoff: Some(grid.m()) },
    )?;
    Ok(CompositeSpectrum { l, a, modes, v, g, l1_norm: phi_l1_norm(a), phi_hat0: h0, plancherel })
}

/// `V_L^* e^{−f} V_L` restricted to modes `|2πk/L| ≤ block_p` as a Fourier matrix.
pub fn composite_gtilde_block(l: f64, a: f64, f: &TestFunction, block_p: f64) -> Result<FourierOperator> {
    check_well(l, a)?;
    f.check_inside_box(l)?;
    let grid = composite_grid(l, block_p)?;
    let cs = composite_spectrum(&grid, a)?;
    let b = one_minus_exp_coefficients(f, l, 2 * grid.m());
    FourierOperator::new(grid, sandwich_matrix(&cs.v, &b), "composite_gtilde")
}

/// Spectra of `G = V_L^*V_L` and `G̃ = V_L^* e^{−f} V_L` for the composite gas.
///
/// Modes with `|2πk/L| ≤ block_p` are diagonalized exactly; the remaining
/// modes up to `tail_p` enter through the diagonal entries `ψ_k (1 − b_0)`.
pub fn composite_spectra(l: f64, a: f64, f: &TestFunction, block_p: f64, tail_p: f64) -> Result<(Spectrum, Spectrum)> {
    let block = composite_gtilde_block(l, a, f, block_p)?;
    let full = composite_spectrum(&composite_grid(l, tail_p)?, a)?;
    let m_block = block.grid().m() as i64;
    let b0 = one_minus_exp_coefficients(f, l, 0)[0].re;
    let mut gt: Vec<f64> = block.eigenvalues().into_iter().map(|x| x.max(0.0)).collect();
    for (k, v) in full.modes.iter().zip(&full.v) {
        if k.abs() > m_block {
            gt.push(v * v * (1.0 - b0));
        }
    }
    let origin = SpectrumOrigin { family: "composite_gtilde".into(), beta: None, l: Some(l), cutoff: Some(full.modes.len() / 2) };
    Ok((full.g, Spectrum::new(gt, origin)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_adaptive;

    #[test]
    fn normalization_and_transform() {
        let a = 0.8;
        let (n2, _) = integrate_adaptive(|r| well_ground_state(r, a).powi(2), -a, a, 1e-15, 1e-15);
        assert!((n2 - 1.0).abs() < 1e-13);
        let (n1, _) = integrate_adaptive(|r| well_ground_state(r, a), -a, a, 1e-15, 1e-15);
        assert!((n1 - phi_l1_norm(a)).abs() < 1e-13);
        assert!((phi_l1_norm(a) - (2.0 * PI).sqrt() * phi_hat0(a)).abs() < 1e-14);
        for p in [0.0, 0.7, PI / (2.0 * a), 3.3, 11.0] {
            let (re, _) = integrate_adaptive(|r| well_ground_state(r, a) * (p * r).cos(), -a, a, 1e-15, 1e-15);
            assert!((re / (2.0 * PI).sqrt() - phi_hat(p, a)).abs() < 1e-13, "p={p}");
        }
    }

    #[test]
    fn autocorrelation_matches_quadrature() {
        let a = 1.0;
        for r in [0.0, 0.4, 1.3, 1.9] {
            let (v, _) = integrate_adaptive(|t| well_ground_state(t, a) * well_ground_state(t + r, a), -a, a - r, 1e-15, 1e-15);
            assert!((v - well_autocorrelation(r, a)).abs() < 1e-13);
        }
    }

    #[test]
    fn spectrum_properties() {
        let grid = composite_grid(50.0, 400.0).unwrap();
        let cs = composite_spectrum(&grid, 1.0).unwrap();
        assert_eq!(cs.g.top(), 1.0);
        let i0 = cs.modes.iter().position(|&k| k == 0).unwrap();
        assert_eq!(cs.v[i0], 1.0);
        assert!(cs.v.iter().all(|&x| x <= 1.0));
        assert!(cs.v.iter().any(|&x| x < 0.0));
        assert!((cs.plancherel - 1.0).abs() < 1e-6);
        assert!(composite_spectrum(&TorusGrid::new(1, 1.5, 4).unwrap(), 1.0).is_err());
    }

    #[test]
    fn composite_gtilde_interlaces() {
        let f = TestFunction::bump(1, 1.0, 2.0).unwrap();
        let (g, gt) = composite_spectra(10.0, 1.0, &f, COMPOSITE_BLOCK_P, 200.0).unwrap();
        assert_eq!(g.len(), gt.len());
        for (a, b) in gt.values().iter().zip(g.values()) {
            assert!(*a <= b + 1e-10);
        }
    }
}
