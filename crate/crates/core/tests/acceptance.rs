//! Acceptance checks: one PASS/FAIL line per criterion, tolerances fixed.

use std::time::Instant;

use canonpp::alpha_linalg::{
    alpha_det, factorial, partitions, permanent_ryser, power_sum_alpha_sum, vere_jones_coefficients, SquareMatrix, TraceSource,
};
use canonpp::fredholm::{
    circle_factor_bounds, coefficient_contour, fredholm_det_power_matrix, saddle_limit_check, vere_jones_partial_sum,
    ContourSpec, PFamily, SaddleBranch,
};
use canonpp::kernels::{
    build_gtilde, composite_grid, composite_spectrum, heat_spectrum, psi_composite, step_function_l1_gap,
    NystromRule, TestFunction, TorusGrid, COMPOSITE_TAIL_P,
};
use canonpp::processes::{
    composite_limit_laplace, convergence_study, finite_laplace, limit_value, EnsembleKind, EnsembleSpec, StudyRow,
};
use canonpp::sampler::{
    chi_square_two_sample, empirical_laplace, mann_whitney_greater, mcmc_sample_chains, min_separation,
    periodic_distance, ExactPairSampler, McmcOptions, McmcOutput,
};
use canonpp::symgroup::{chi_class_function, para_trace, para_trace_characters, psi_class_function, ParaKind, YoungFrame2};
use canonpp::thermo::{
    fugacity_gap_study, rho_c, rho_c_composite, solve_composite_fugacity, solve_fugacity, zeta_partial_sum,
    zeta_quadrature,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ALPHAS: [f64; 4] = [-1.0, -0.5, 0.5, 1.0];

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn crel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

fn random_complex(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(n, n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

fn random_psd(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<Complex64> {
    let b = random_complex(rng, n);
    &b * b.adjoint()
}

fn bump() -> TestFunction {
    TestFunction::bump(1, 1.0, 2.0).expect("bump")
}

fn sci(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", items.join(", "))
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn vere_jones_identity() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let mut worst_tail = 0.0f64;
    for _ in 0..20 {
        let m = random_psd(&mut rng, 5);
        let g0 = m.clone().symmetric_eigenvalues().max();
        let j = SquareMatrix::from_matrix(m).expect("square");
        for alpha in ALPHAS {
            let z = 0.9 / (alpha.abs() * g0);
            let product = fredholm_det_power_matrix(&j, alpha, Complex64::new(z, 0.0)).expect("product");
            let series = vere_jones_partial_sum(TraceSource::Matrix(&j), alpha, z, 1200).expect("series");
            worst = worst.max(crel(series.value, product));
            if alpha < 0.0 {
                let stop = (5.0 / alpha.abs()).round() as usize;
                let p: Vec<Complex64> = TraceSource::Matrix(&j)
                    .power_traces(stop + 6)
                    .into_iter()
                    .enumerate()
                    .map(|(l, x)| x * z.powi(l as i32 + 1))
                    .collect();
                let c = vere_jones_coefficients(&p, alpha, stop + 6);
                let scale = c.iter().map(|x| x.norm()).fold(0.0, f64::max);
                for cn in &c[stop + 1..] {
                    worst_tail = worst_tail.max(cn.norm() / scale);
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-8 && worst_tail <= 1e-12 && secs < 10.0,
        format!("max rel err {worst:.2e}, terminating tail {worst_tail:.2e}, {secs:.1} s"),
    )
}

fn contour_inversion() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let spectrum: Vec<f64> = (0..10).map(|_| rng.random_range(0.05..1.0)).collect();
    let g0 = spectrum.iter().cloned().fold(0.0, f64::max);
    let mut worst = 0.0f64;
    let mut worst_inv = 0.0f64;
    for alpha in ALPHAS {
        let r = if alpha > 0.0 { 0.5 / (alpha * g0) } else { 1.0 };
        for n in 1..=8u64 {
            let exact = power_sum_alpha_sum(TraceSource::Spectrum(&spectrum), alpha, n as usize).expect("exact").re;
            let base = coefficient_contour(&spectrum, alpha, n, ContourSpec::new(r, 512).expect("contour")).expect("c");
            let half = coefficient_contour(&spectrum, alpha, n, ContourSpec::new(r / 2.0, 512).expect("contour")).expect("c");
            let dbl = coefficient_contour(&spectrum, alpha, n, ContourSpec::new(r, 1024).expect("contour")).expect("c");
            worst = worst.max(rel(base.value, exact));
            worst_inv = worst_inv.max(rel(half.value, base.value)).max(rel(dbl.value, base.value));
        }
    }
    outcome(worst <= 1e-10 && worst_inv <= 1e-10, format!("max rel err {worst:.2e}, r/2 and 2Q change {worst_inv:.2e}"))
}

fn alpha_det_cross_checks() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for k in 0..50 {
        let n = 1 + k % 7;
        let a = SquareMatrix::from_matrix(random_complex(&mut rng, n)).expect("square");
        worst = worst.max(crel(alpha_det(&a, -1.0).expect("det"), a.determinant()));
        worst = worst.max(crel(alpha_det(&a, 1.0).expect("perm"), permanent_ryser(&a).expect("ryser")));
    }
    let identity_exact = (1..=7).all(|n| {
        [-1.0, -0.5, 0.5, 1.0, 2.0]
            .iter()
            .all(|&al| alpha_det(&SquareMatrix::identity(n), al).expect("id") == Complex64::new(1.0, 0.0))
    });
    outcome(worst <= 1e-10 && identity_exact, format!("max rel err {worst:.2e}, identity exact: {identity_exact}"))
}

fn interlacing() -> Outcome {
    let settings = [(1.0, 2.0, 10.0, 1.0), (0.5, 1.0, 8.0, 0.5), (2.0, 3.0, 12.0, 2.0), (1.0, 4.0, 20.0, 1.0), (3.0, 1.5, 6.0, 0.25)];
    let mut worst = f64::NEG_INFINITY;
    for (c, w, l, beta) in settings {
        let f = TestFunction::bump(1, c, w).expect("bump");
        let grid = TorusGrid::with_tail_rule(1, l, beta).expect("grid");
        let mut g = heat_spectrum(&grid, beta).expect("heat").values().to_vec();
        let mut gt = build_gtilde(&grid, beta, &f).expect("gtilde").eigenvalues();
        g.sort_by(|a, b| b.total_cmp(a));
        gt.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in gt.iter().zip(&g) {
            worst = worst.max(a - b);
        }
    }
    outcome(worst <= 1e-10, format!("max (g~_j - g_j) over 5 settings {worst:.2e}"))
}

fn saddle_point_limits() -> Outcome {
    let mut min_slack = f64::INFINITY;
    for i in 0..200 {
        for k in 0..200 {
            let theta = -std::f64::consts::PI + 2.0 * std::f64::consts::PI * k as f64 / 199.0;
            let pp = i as f64 / 199.0;
            let pr = 10.0 * i as f64 / 199.0;
            for b in [
                circle_factor_bounds(pp, theta, SaddleBranch::Product).expect("bounds"),
                circle_factor_bounds(pr, theta, SaddleBranch::Reciprocal).expect("bounds"),
            ] {
                min_slack = min_slack.min(b.modulus.slack);
                if let Some(r) = b.remainder {
                    min_slack = min_slack.min(r.slack);
                }
            }
        }
    }
    let ns = [100u64, 1000, 10_000];
    let errs = |branch: SaddleBranch| -> Vec<f64> {
        ns.iter()
            .map(|&n| {
                let fam = match branch {
                    SaddleBranch::Reciprocal => PFamily::geometric(0.9, 1.0, n),
                    SaddleBranch::Product => PFamily::capped_geometric((-10.0 / n as f64).exp(), 1.0, n),
                }
                .expect("family");
                (saddle_limit_check(&fam, branch).expect("saddle").value - 1.0).abs()
            })
            .collect()
    };
    let fermion = errs(SaddleBranch::Reciprocal);
    let boson = errs(SaddleBranch::Product);
    let ok = min_slack >= -1e-12
        && strictly_decreasing(&fermion)
        && strictly_decreasing(&boson)
        && fermion[2] < 0.05
        && boson[2] < 0.05;
    outcome(ok, format!("min slack {min_slack:.2e}; |value-1| reciprocal {}, product {}", sci(&fermion), sci(&boson)))
}

fn study(kind: EnsembleKind, ls: &[f64]) -> Vec<StudyRow> {
    convergence_study(&bump(), &EnsembleSpec::default_1d(kind), ls, NystromRule::default()).expect("study")
}

fn thermodynamic_limit() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for kind in [EnsembleKind::Fermion, EnsembleKind::Boson] {
        let rows = study(kind, &[10.0, 20.0, 40.0]);
        let gaps: Vec<f64> = rows.iter().map(|r| r.gap).collect();
        let last = rows.last().expect("rows");
        let dg = last.diagnostics.expect("diagnostics");
        let limits = [(dg.a, 1.0), (dg.b, 1.0), (dg.c, last.limit), (dg.d, 1.0)];
        let diag_ok = limits.iter().all(|(x, l)| rel(*x, *l) <= 0.05);
        ok &= strictly_decreasing(&gaps) && last.gap / last.limit < 0.01 && diag_ok;
        parts.push(format!(
            "{kind}: gaps {}, diagnostics a={:.4} b={:.4} c/limit={:.4} d={:.4}",
            sci(&gaps),
            dg.a,
            dg.b,
            dg.c / last.limit,
            dg.d
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(ok && secs < 300.0, format!("{}; {secs:.1} s", parts.join("; ")))
}

fn fugacity_analysis() -> Outcome {
    let mut max_res = 0.0f64;
    for alpha in [-1.0, -0.5] {
        for rho_hat in [1e-3, 0.1, 1.0, 10.0, 50.0] {
            max_res = max_res.max(solve_fugacity(rho_hat, alpha, 1, 1e-13).expect("fermion").residual);
        }
    }
    for rho_hat in [1e-3, 0.1, 1.0, 2.0] {
        max_res = max_res.max(solve_fugacity(rho_hat, 1.0, 3, 1e-13).expect("boson").residual);
    }
    let mut ok = max_res <= 1e-12;
    let mut parts = vec![format!("max residual {max_res:.2e}")];
    for (name, alpha) in [("fermion", -1.0), ("boson", 1.0)] {
        let rows = fugacity_gap_study(&[50, 100, 200, 400], 0.2, 1.0, &bump(), alpha, NystromRule::default()).expect("gap");
        let ordered = rows.iter().all(|r| r.z_n <= r.z_tilde_n);
        let sg: Vec<f64> = rows.iter().map(|r| r.scaled_gap).collect();
        let (lo, hi) = sg.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
        let last = rows.last().expect("rows");
        let vr = last.v / last.v_tilde;
        ok &= ordered && lo > 0.0 && hi / lo < 3.0 && (vr - 1.0).abs() <= 0.02;
        parts.push(format!("{name}: z_N<=z~_N {ordered}, N(z~-z) {}, v/v~ {vr:.4}", sci(&sg)));
    }
    outcome(ok, parts.join("; "))
}

fn para_statistics() -> Outcome {
    let mut char_ok = true;
    for n in 1..=6 {
        let mut frames: Vec<YoungFrame2> = Vec::new();
        for j in 0..=n / 2 {
            for f in [YoungFrame2::rows(n, j).expect("frame"), YoungFrame2::columns(n, j).expect("frame")] {
                if !frames.iter().any(|g| g.row_lengths() == f.row_lengths()) {
                    frames.push(f);
                }
            }
        }
        for (i, a) in frames.iter().enumerate() {
            let ca = chi_class_function(*a).expect("chi");
            for (k, b) in frames.iter().enumerate() {
                let ip = ca.inner(&chi_class_function(*b).expect("chi"));
                char_ok &= ip == if i == k { factorial(n) } else { 0.0 };
            }
            let ct = chi_class_function(a.transpose()).expect("chi");
            let pa = psi_class_function(*a).expect("psi");
            let pt = psi_class_function(a.transpose()).expect("psi");
            for class in partitions(n).expect("partitions") {
                let s = class.sign() as i64;
                char_ok &= ct.value(&class) == s * ca.value(&class) && pt.value(&class) == s * pa.value(&class);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let spectrum: Vec<f64> = (0..6).map(|_| rng.random_range(0.0..1.0)).collect();
    let mut dual = 0.0f64;
    for n in 1..=8 {
        for kind in [ParaKind::Boson2, ParaKind::Fermion2] {
            let a = para_trace(&spectrum, n, kind);
            let b = para_trace_characters(&spectrum, n, kind).expect("characters");
            dual = dual.max(rel(a, b));
        }
    }
    let rule = NystromRule::default();
    let para = limit_value(&bump(), &EnsembleSpec::default_1d(EnsembleKind::ParaBoson2), rule).expect("para");
    let half = EnsembleSpec { rho: 0.1, ..EnsembleSpec::default_1d(EnsembleKind::Boson) };
    let boson = limit_value(&bump(), &half, rule).expect("boson");
    let square = rel(para, boson * boson);
    let mut trend = true;
    let mut gaps_txt = Vec::new();
    for kind in [EnsembleKind::ParaBoson2, EnsembleKind::ParaFermion2] {
        let gaps: Vec<f64> = study(kind, &[10.0, 20.0, 40.0]).iter().map(|r| r.gap).collect();
        trend &= strictly_decreasing(&gaps);
        gaps_txt.push(format!("{kind} gaps {}", sci(&gaps)));
    }
    outcome(
        char_ok && dual <= 1e-10 && square <= 1e-10 && trend,
        format!(
            "characters exact: {char_ok}; dual paths {dual:.2e}; limit vs square {square:.2e}; {}",
            gaps_txt.join(", ")
        ),
    )
}

fn composite_gas() -> Outcome {
    let a = 1.0;
    let planch = composite_spectrum(&composite_grid(50.0, COMPOSITE_TAIL_P).expect("grid"), a).expect("spectrum").plancherel;
    let planch_err = (planch - 1.0).abs();
    let rho_cc = rho_c_composite(1.0, a, 1);
    let rho_cc_ok = matches!(rho_cc, Ok(v) if v.is_finite() && v > 0.0);
    let rho_cc_txt = match &rho_cc {
        Ok(v) => format!("{v:.6}"),
        Err(e) => e.to_string(),
    };
    let mut stable = 0.0f64;
    for kind in [EnsembleKind::CompositeFermion, EnsembleKind::CompositeBoson] {
        let r = composite_limit_laplace(&bump(), 0.2, a, kind, NystromRule::default()).expect("composite limit");
        stable = stable.max(r.error_estimate);
    }
    let mut l1_ok = true;
    let mut l1_txt = Vec::new();
    for (name, alpha) in [("fermion", -1.0), ("boson", 1.0)] {
        let z = solve_composite_fugacity(0.2, alpha, a, 1e-13).expect("fugacity").z;
        let d = move |p: f64| {
            let psi = psi_composite(p, a);
            z * psi / (1.0 - z * alpha * psi)
        };
        let gaps: Vec<f64> = [10.0, 20.0, 40.0, 80.0].iter().map(|&l| step_function_l1_gap(d, l, COMPOSITE_TAIL_P)).collect();
        l1_ok &= strictly_decreasing(&gaps) && gaps[3] < 1e-2;
        l1_txt.push(format!("{name} {}", sci(&gaps)));
    }
    outcome(
        planch_err <= 1e-6 && rho_cc_ok && stable <= 1e-8 && l1_ok,
        format!(
            "Plancherel err {planch_err:.2e}; critical density {rho_cc_txt}; doubling change {stable:.2e}; L1 gaps {}",
            l1_txt.join(", ")
        ),
    )
}

fn critical_density() -> Outcome {
    let zs = zeta_partial_sum(1.5).expect("partial sum");
    let zq = zeta_quadrature(1.5).expect("quadrature");
    let rc = rho_c(1.0, 3).expect("rho_c");
    let closed = zs / (4.0 * std::f64::consts::PI).powf(1.5);
    let agree = (zs - zq).abs();
    outcome(
        agree <= 1e-6 && rel(rc, closed) <= 1e-12,
        format!("zeta(3/2) {zs:.12} vs {zq:.12} (diff {agree:.1e}); rho_c {rc:.12}"),
    )
}

fn chains(kind: EnsembleKind, l: f64, n: usize, samples: usize, thin: usize, seed: u64) -> Vec<McmcOutput> {
    let opts = McmcOptions { thin, ..McmcOptions::default() };
    mcmc_sample_chains(kind, l, 1.0, n, samples / 4 * thin, 4, seed, opts).expect("chains")
}

fn sampler_consistency() -> Outcome {
    let l = 15.0;
    let f = bump();
    let mut ok = true;
    let mut parts = Vec::new();
    let mut nn = Vec::new();
    for (kind, seed) in [(EnsembleKind::Fermion, 11), (EnsembleKind::Boson, 12)] {
        let out = chains(kind, l, 3, 100_000, 10, seed);
        let all: Vec<_> = out.iter().flat_map(|o| o.samples.iter().cloned()).collect();
        let emp = empirical_laplace(&all, &f, 100);
        let exact = finite_laplace(&f, l, 3, &EnsembleSpec::default_1d(kind)).expect("finite").value;
        let z = (emp.mean - exact).abs() / emp.std_error;
        ok &= z <= 3.0;
        let acc = out.iter().map(|o| o.acceptance_rate).sum::<f64>() / out.len() as f64;
        parts.push(format!("{kind}: empirical {:.5} vs {exact:.5} ({z:.2} se, acceptance {acc:.2})", emp.mean));
        nn.push(all.iter().map(|c| min_separation(&c.points, l)).collect::<Vec<f64>>());
    }
    let order = mann_whitney_greater(&nn[0], &nn[1]);
    ok &= order.p_value < 0.01;
    parts.push(format!("fermion > boson separation p {:.1e}", order.p_value));
    let l2 = 10.0;
    let edges: Vec<f64> = (0..=20).map(|i| 0.5 * l2 * i as f64 / 20.0).collect();
    for (kind, seed) in [(EnsembleKind::Fermion, 21), (EnsembleKind::Boson, 22)] {
        let exact = ExactPairSampler::new(kind, l2, 1.0).expect("exact");
        let es: Vec<f64> = exact.samples(20_000, seed).iter().map(|c| periodic_distance(c.points[0], c.points[1], l2)).collect();
        let ms: Vec<f64> = chains(kind, l2, 2, 20_000, 50, seed + 100)
            .iter()
            .flat_map(|o| o.samples.iter().map(|c| periodic_distance(c.points[0], c.points[1], l2)))
            .collect();
        let t = chi_square_two_sample(&es, &ms, &edges).expect("chi-square");
        ok &= t.p_value > 0.01;
        parts.push(format!("{kind} N=2 exact vs chain p {:.3}", t.p_value));
    }
    outcome(ok, parts.join("; "))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("vere-jones expansion", vere_jones_identity),
        ("contour coefficient extraction", contour_inversion),
        ("alpha-determinant cross-checks", alpha_det_cross_checks),
        ("interlacing of sandwiched spectrum", interlacing),
        ("circle bounds and saddle-point limits", saddle_point_limits),
        ("thermodynamic limit", thermodynamic_limit),
        ("fugacity analysis", fugacity_analysis),
        ("para-statistics", para_statistics),
        ("composite gas", composite_gas),
        ("critical density", critical_density),
        ("sampler consistency", sampler_consistency),
    ];
    let mut passed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        passed += o.pass as usize;
        println!("{} [{:>2}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("{passed}/{} criteria passed", criteria.len());
}
