//! Invariant suites behind `canonpp verify`.

use canonpp::alpha_linalg::{factorial, partitions, vere_jones_coefficients, SquareMatrix, TraceSource};
use canonpp::fredholm::{
    circle_factor_bounds, fredholm_det_power_matrix, saddle_limit_check, vere_jones_partial_sum, PFamily, SaddleBranch,
};
use canonpp::kernels::{build_gtilde, heat_spectrum, TestFunction, TorusGrid};
use canonpp::symgroup::{chi_class_function, para_trace, para_trace_characters, psi_class_function, ParaKind, YoungFrame2};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::Suite;
use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn check(suite: &'static str, name: &str, pass: bool, detail: String) -> Check {
    Check { suite, name: name.to_string(), pass, detail }
}

pub fn run(suite: Suite, seed: u64) -> Result<Vec<Check>, CliError> {
    let mut out = Vec::new();
    let all = suite == Suite::All;
    if all || suite == Suite::VereJones {
        out.extend(vere_jones(seed)?);
    }
    if all || suite == Suite::CircleBounds {
        out.extend(circle_bounds()?);
    }
    if all || suite == Suite::Characters {
        out.extend(characters(seed)?);
    }
    if all || suite == Suite::Interlacing {
        out.extend(interlacing()?);
    }
    Ok(out)
}

fn vere_jones(seed: u64) -> Result<Vec<Check>, CliError> {
    const S: &str = "vere-jones";
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for alpha in [-1.0, -0.5, 0.5, 1.0] {
        let mut worst = 0.0f64;
        let mut tail = 0.0f64;
        for _ in 0..20 {
            let b = DMatrix::from_fn(5, 5, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let m = &b * b.adjoint();
            let g0 = m.clone().symmetric_eigenvalues().max();
            let j = SquareMatrix::from_matrix(m)?;
            let z = 0.9 / (f64::abs(alpha) * g0);
            let product = fredholm_det_power_matrix(&j, alpha, Complex64::new(z, 0.0))?;
            let series = vere_jones_partial_sum(TraceSource::Matrix(&j), alpha, z, 1200)?;
            worst = worst.max((series.value - product).norm() / product.norm());
            if alpha < 0.0 {
                let stop = (5.0 / f64::abs(alpha)).round() as usize;
                let p: Vec<Complex64> = TraceSource::Matrix(&j)
                    .power_traces(stop + 4)
                    .into_iter()
                    .enumerate()
                    .map(|(l, x)| x * z.powi(l as i32 + 1))
                    .collect();
                let c = vere_jones_coefficients(&p, alpha, stop + 4);
                let scale = c.iter().map(|x| x.norm()).fold(0.0, f64::max);
                tail = c[stop + 1..].iter().fold(tail, |t, x| t.max(x.norm() / scale));
            }
        }
        out.push(check(S, &format!("product = series, alpha {alpha}"), worst <= 1e-8, format!("max rel err {worst:.3e}")));
        if alpha < 0.0 {
            out.push(check(S, &format!("termination, alpha {alpha}"), tail <= 1e-12, format!("max tail {tail:.3e}")));
        }
    }
    Ok(out)
}

fn circle_bounds() -> Result<Vec<Check>, CliError> {
    const S: &str = "circle-bounds";
    let mut out = Vec::new();
    for (branch, pmax) in [(SaddleBranch::Product, 1.0), (SaddleBranch::Reciprocal, 10.0)] {
        let mut slack = f64::INFINITY;
        for i in 0..200 {
            for k in 0..200 {
                let theta = -std::f64::consts::PI + 2.0 * std::f64::consts::PI * k as f64 / 199.0;
                let b = circle_factor_bounds(pmax * i as f64 / 199.0, theta, branch)?;
                slack = slack.min(b.modulus.slack);
                if let Some(r) = b.remainder {
                    slack = slack.min(r.slack);
                }
            }
        }
        out.push(check(S, &format!("{branch:?} grid"), slack >= -1e-12, format!("min slack {slack:.3e}")));
    }
    for branch in [SaddleBranch::Reciprocal, SaddleBranch::Product] {
        let mut errs = Vec::new();
        for n in [100u64, 1000, 10_000] {
            let fam = match branch {
                SaddleBranch::Reciprocal => PFamily::geometric(0.9, 1.0, n)?,
                SaddleBranch::Product => PFamily::capped_geometric((-10.0 / n as f64).exp(), 1.0, n)?,
            };
            errs.push((saddle_limit_check(&fam, branch)?.value - 1.0).abs());
        }
        let ok = errs.windows(2).all(|w| w[1] < w[0]) && errs[2] < 0.05;
        let txt: Vec<String> = errs.iter().map(|e| format!("{e:.3e}")).collect();
        out.push(check(S, &format!("{branch:?} saddle limit"), ok, format!("|value-1| {}", txt.join(" "))));
    }
    Ok(out)
}

fn characters(seed: u64) -> Result<Vec<Check>, CliError> {
    const S: &str = "characters";
    let mut orth = true;
    let mut transpose = true;
    for n in 1..=6 {
        let mut frames: Vec<YoungFrame2> = Vec::new();
        for j in 0..=n / 2 {
            for f in [YoungFrame2::rows(n, j)?, YoungFrame2::columns(n, j)?] {
                if !frames.iter().any(|g| g.row_lengths() == f.row_lengths()) {
                    frames.push(f);
                }
            }
        }
        for (i, a) in frames.iter().enumerate() {
            let ca = chi_class_function(*a)?;
            for (k, b) in frames.iter().enumerate() {
                orth &= ca.inner(&*chi_class_function(*b)?) == if i == k { factorial(n) } else { 0.0 };
            }
            let ct = chi_class_function(a.transpose())?;
            let pa = psi_class_function(*a)?;
            let pt = psi_class_function(a.transpose())?;
            for class in partitions(n)? {
                let s = class.sign() as i64;
                transpose &= ct.value(&class) == s * ca.value(&class) && pt.value(&class) == s * pa.value(&class);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g: Vec<f64> = (0..6).map(|_| rng.random_range(0.0..1.0)).collect();
    let mut dual = 0.0f64;
    for n in 1..=8 {
        for kind in [ParaKind::Boson2, ParaKind::Fermion2] {
            let a = para_trace(&g, n, kind);
            let b = para_trace_characters(&g, n, kind)?;
            dual = dual.max((a - b).abs() / b.abs().max(f64::MIN_POSITIVE));
        }
    }
    Ok(vec![
        check(S, "orthogonality, N <= 6", orth, "exact integer arithmetic".into()),
        check(S, "transpose relations, N <= 6", transpose, "exact integer arithmetic".into()),
        check(S, "para trace dual paths, N <= 8", dual <= 1e-10, format!("max rel err {dual:.3e}")),
    ])
}

fn interlacing() -> Result<Vec<Check>, CliError> {
    const S: &str = "interlacing";
    let settings = [(1.0, 2.0, 10.0, 1.0), (0.5, 1.0, 8.0, 0.5), (2.0, 3.0, 12.0, 2.0), (1.0, 4.0, 20.0, 1.0), (3.0, 1.5, 6.0, 0.25)];
    let mut out = Vec::new();
    for (c, w, l, beta) in settings {
        let f = TestFunction::bump(1, c, w)?;
        let grid = TorusGrid::with_tail_rule(1, l, beta)?;
        let mut g = heat_spectrum(&grid, beta)?.values().to_vec();
        let mut gt = build_gtilde(&grid, beta, &f)?.eigenvalues();
        g.sort_by(|a, b| b.total_cmp(a));
        gt.sort_by(|a, b| b.total_cmp(a));
        let worst = gt.iter().zip(&g).map(|(a, b)| a - b).fold(f64::NEG_INFINITY, f64::max);
        out.push(check(
            S,
            &format!("c={c} w={w} L={l} beta={beta}"),
            worst <= 1e-10,
            format!("max (g~_j - g_j) {worst:.3e}"),
        ));
    }
    Ok(out)
}
