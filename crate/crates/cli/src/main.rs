//! `canonpp`: Laplace functionals, studies, verification suites and sampling from the command line.
//!
//! Exit codes: 0 success, 1 usage or internal failure (or a failed verification), 2 domain error.

mod config;
mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use canonpp::fredholm::{saddle_limit_check, PFamily, SaddleBranch};
use canonpp::processes::{convergence_study, finite_laplace, limit_laplace, EnsembleKind, LaplaceMethod};
use canonpp::sampler::{
    empirical_laplace, mcmc_sample_chains, write_samples_csv, Configuration, ExactPairSampler, McmcOptions,
};
use canonpp::thermo::{
    fugacity_gap_study, rho_c, rho_c_composite, rho_c_quadrature, solve_composite_fugacity, solve_fugacity_physical,
};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use config::{Params, StudyKind, Suite};
use output::{csv_text, emit, fmt_f64, json, sci, sci_opt};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] canonpp::Error),
    #[error("usage: {0}")]
    Usage(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error("{0} check(s) failed")]
    Failed(usize),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_domain() => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "canonpp", version, about = "Canonical-ensemble point processes on the torus")]
struct Cli {
    /// JSON run configuration; command-line flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Finite-volume or limit Laplace functional as JSON.
    Laplace(Params),
    /// Run invariant suites; exit 0 iff every check passes.
    Verify(VerifyArgs),
    /// Convergence, saddle, fugacity-gap or sampling study as CSV.
    Study(Params),
    /// Positions from the Metropolis chain or the exact two-particle sampler as CSV.
    Sample(Params),
    /// Limit fugacity for a density as JSON.
    Fugacity(Params),
    /// Critical density as JSON.
    Rhoc(Params),
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(value_enum)]
    suite: Option<Suite>,
    #[command(flatten)]
    params: Params,
}

impl Command {
    fn from_name(name: &str) -> Result<Self, CliError> {
        let p = Params::default();
        Ok(match name {
            "laplace" => Command::Laplace(p),
            "verify" => Command::Verify(VerifyArgs { suite: None, params: p }),
            "study" => Command::Study(p),
            "sample" => Command::Sample(p),
            "fugacity" => Command::Fugacity(p),
            "rhoc" => Command::Rhoc(p),
            other => return Err(CliError::Usage(format!("unknown command '{other}'"))),
        })
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = cli.config.as_deref().map(Params::from_json_path).transpose()?.unwrap_or_default();
    let command = match cli.command {
        Some(c) => c,
        None => {
            let name = file.command.clone().ok_or_else(|| CliError::Usage("no command given".into()))?;
            Command::from_name(&name)?
        }
    };
    match command {
        Command::Laplace(p) => laplace(p.merged(file)),
        Command::Verify(v) => {
            let p = v.params.merged(file);
            verify_cmd(v.suite.or(p.suite).unwrap_or(Suite::All), &p)
        }
        Command::Study(p) => study(p.merged(file)),
        Command::Sample(p) => sample(p.merged(file)),
        Command::Fugacity(p) => fugacity(p.merged(file)),
        Command::Rhoc(p) => rhoc(p.merged(file)),
    }
}

#[derive(Serialize)]
struct LaplaceOut {
    kind: EnsembleKind,
    #[serde(serialize_with = "sci")]
    value: f64,
    method: LaplaceMethod,
    #[serde(serialize_with = "sci")]
    error_estimate: f64,
    #[serde(serialize_with = "sci_opt")]
    l: Option<f64>,
    n: Option<usize>,
}

fn laplace(p: Params) -> Result<(), CliError> {
    let spec = p.spec()?;
    let f = p.test_function()?;
    let out = if p.limit.unwrap_or(false) {
        let r = limit_laplace(&f, &spec, p.rule())?;
        LaplaceOut { kind: spec.kind, value: r.value, method: r.method, error_estimate: r.error_estimate, l: None, n: None }
    } else {
        let l = p.l();
        let n = p.n_for(l);
        let r = finite_laplace(&f, l, n, &spec)?;
        LaplaceOut { kind: spec.kind, value: r.value, method: r.method, error_estimate: r.error_estimate, l: Some(l), n: Some(n) }
    };
    emit(p.output.as_deref(), &json(&out)?)
}

fn verify_cmd(suite: Suite, p: &Params) -> Result<(), CliError> {
    let checks = verify::run(suite, p.seed())?;
    let mut text = String::new();
    for c in &checks {
        text += &format!("{}\t{}\t{}\t{}\n", if c.pass { "PASS" } else { "FAIL" }, c.suite, c.name, c.detail);
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    text += &format!("{} of {} checks passed\n", checks.len() - failed, checks.len());
    emit(p.output.as_deref(), &text)?;
    if failed > 0 {
        return Err(CliError::Failed(failed));
    }
    Ok(())
}

fn study(p: Params) -> Result<(), CliError> {
    let text = match p.study.unwrap_or(StudyKind::Convergence) {
        StudyKind::Convergence => {
            let spec = p.spec()?;
            let ls = p.ls.clone().unwrap_or_else(|| vec![10.0, 20.0, 40.0]);
            let rows = convergence_study(&p.test_function()?, &spec, &ls, p.rule())?;
            let cells: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    let dg = r.diagnostics.map(|d| [d.a, d.b, d.c, d.d]).unwrap_or([f64::NAN; 4]);
                    let mut v = vec![fmt_f64(r.l), r.n.to_string(), fmt_f64(r.finite), fmt_f64(r.limit), fmt_f64(r.gap)];
                    v.extend(dg.iter().map(|x| fmt_f64(*x)));
                    v
                })
                .collect();
            csv_text(&["L", "N", "finite", "limit", "gap", "diag_a", "diag_b", "diag_c", "diag_d"], &cells)?
        }
        StudyKind::Saddle => {
            let branch: SaddleBranch = p.branch.unwrap_or(config::Branch::Reciprocal).into();
            let ns = p.ns.clone().unwrap_or_else(|| vec![100, 1000, 10_000]);
            let mut cells = Vec::new();
            for n in ns {
                let n = n as u64;
                let fam = match branch {
                    SaddleBranch::Reciprocal => PFamily::geometric(0.9, 1.0, n)?,
                    SaddleBranch::Product => PFamily::capped_geometric((-10.0 / n as f64).exp(), 1.0, n)?,
                };
                let c = saddle_limit_check(&fam, branch)?;
                cells.push(vec![n.to_string(), fmt_f64(c.value), fmt_f64((c.value - 1.0).abs())]);
            }
            csv_text(&["N", "value", "abs_err"], &cells)?
        }
        StudyKind::FugacityGap => {
            let spec = p.raw_spec();
            let ns = p.ns.clone().unwrap_or_else(|| vec![50, 100, 200, 400]);
            let rows = fugacity_gap_study(&ns, spec.rho, spec.beta, &p.test_function()?, spec.kind.alpha(), p.rule())?;
            let cells: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    [r.n, r.l, r.z_n, r.z_tilde_n, r.scaled_gap, r.v, r.v_tilde].iter().map(|x| fmt_f64(*x)).collect()
                })
                .collect();
            csv_text(&["N", "L", "z_N", "z_tilde_N", "scaled_gap", "v", "v_tilde"], &cells)?
        }
        StudyKind::Sample => return sample(p),
    };
    emit(p.output.as_deref(), &text)
}

#[derive(Serialize)]
struct SampleSummary {
    kind: EnsembleKind,
    method: &'static str,
    #[serde(serialize_with = "sci")]
    l: f64,
    n: usize,
    seed: u64,
    samples: usize,
    #[serde(serialize_with = "sci_opt")]
    acceptance_rate: Option<f64>,
    #[serde(serialize_with = "sci_opt")]
    iat: Option<f64>,
    #[serde(serialize_with = "sci")]
    laplace_mean: f64,
    #[serde(serialize_with = "sci")]
    laplace_std_error: f64,
}

fn sample(p: Params) -> Result<(), CliError> {
    let kind = p.kind();
    let l = p.l();
    let seed = p.seed();
    let exact = p.exact.unwrap_or(false);
    let (samples, acceptance_rate, iat, n): (Vec<Configuration>, Option<f64>, Option<f64>, usize) = if exact {
        if p.n.is_some_and(|n| n != 2) {
            return Err(CliError::Usage("the exact sampler draws two particles".into()));
        }
        let s = ExactPairSampler::new(kind, l, p.beta.unwrap_or(1.0))?;
        (s.samples(p.samples.unwrap_or(10_000), seed), None, None, 2)
    } else {
        let n = p.n_for(l);
        let opts = McmcOptions {
            burn_in: p.burn_in.unwrap_or(10_000),
            thin: p.thin.unwrap_or(10),
            step_scale: None,
        };
        let out = mcmc_sample_chains(kind, l, p.beta.unwrap_or(1.0), n, p.steps.unwrap_or(100_000), 1, seed, opts)?;
        let o = out.into_iter().next().expect("one chain");
        (o.samples, Some(o.acceptance_rate), Some(o.iat), n)
    };
    let emp = empirical_laplace(&samples, &p.test_function()?, 20);
    let mut buf = Vec::new();
    write_samples_csv(&mut buf, &samples)?;
    emit(p.output.as_deref(), &String::from_utf8(buf).map_err(|e| CliError::Io(e.to_string()))?)?;
    let summary = json(&SampleSummary {
        kind,
        method: if exact { "exact" } else { "mcmc" },
        l,
        n,
        seed,
        samples: samples.len(),
        acceptance_rate,
        iat,
        laplace_mean: emp.mean,
        laplace_std_error: emp.std_error,
    })?;
    match &p.summary {
        Some(path) => emit(Some(path), &summary),
        None => {
            eprint!("{summary}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct FugacityOut {
    #[serde(serialize_with = "sci")]
    alpha: f64,
    #[serde(serialize_with = "sci")]
    rho: f64,
    #[serde(serialize_with = "sci")]
    z: f64,
    #[serde(serialize_with = "sci")]
    log_z: f64,
    #[serde(serialize_with = "sci")]
    rho_hat: f64,
    #[serde(serialize_with = "sci")]
    residual: f64,
    iterations: usize,
}

fn fugacity(p: Params) -> Result<(), CliError> {
    let spec = p.raw_spec();
    let alpha = p.alpha.unwrap_or(spec.kind.alpha());
    let sol = if spec.kind.is_composite() {
        solve_composite_fugacity(spec.rho, alpha, spec.a, p.tol())?
    } else {
        solve_fugacity_physical(spec.rho, spec.beta, alpha, spec.d, p.tol())?
    };
    let out = FugacityOut {
        alpha,
        rho: spec.rho,
        z: sol.z,
        log_z: sol.log_z,
        rho_hat: sol.rho_hat,
        residual: sol.residual,
        iterations: sol.iterations,
    };
    emit(p.output.as_deref(), &json(&out)?)
}

#[derive(Serialize)]
struct RhocOut {
    d: usize,
    #[serde(serialize_with = "sci")]
    beta: f64,
    #[serde(serialize_with = "sci")]
    rho_c: f64,
    #[serde(serialize_with = "sci_opt")]
    rho_c_quadrature: Option<f64>,
}

fn rhoc(p: Params) -> Result<(), CliError> {
    let spec = p.raw_spec();
    let out = if spec.kind.is_composite() {
        RhocOut { d: spec.d, beta: spec.beta, rho_c: rho_c_composite(1.0, spec.a, spec.d)?, rho_c_quadrature: None }
    } else {
        RhocOut {
            d: spec.d,
            beta: spec.beta,
            rho_c: rho_c(spec.beta, spec.d)?,
            rho_c_quadrature: Some(rho_c_quadrature(spec.beta, spec.d)?),
        }
    };
    emit(p.output.as_deref(), &json(&out)?)
}
