//! Run parameters: JSON config file merged with command-line flags (flags win).

use std::path::{Path, PathBuf};

use canonpp::fredholm::SaddleBranch;
use canonpp::kernels::{NystromRule, TestFunction};
use canonpp::processes::{EnsembleKind, EnsembleSpec};
use clap::{Args, ValueEnum};
use serde::Deserialize;

use crate::CliError;

/// Contour branch; `boson` and `fermion` are accepted as aliases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    #[value(alias = "boson")]
    #[serde(alias = "boson")]
    Product,
    #[value(alias = "fermion")]
    #[serde(alias = "fermion")]
    Reciprocal,
}

impl From<Branch> for SaddleBranch {
    fn from(b: Branch) -> Self {
        match b {
            Branch::Product => SaddleBranch::Product,
            Branch::Reciprocal => SaddleBranch::Reciprocal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StudyKind {
    Convergence,
    Saddle,
    FugacityGap,
    Sample,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    VereJones,
    CircleBounds,
    Characters,
    Interlacing,
    All,
}

fn parse_kind(s: &str) -> Result<EnsembleKind, String> {
    s.parse().map_err(|e: canonpp::Error| e.to_string())
}

/// Every run parameter. Unset values fall back to the config file, then to the defaults
/// listed on each field.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Params {
    /// Subcommand to run when none is given on the command line (config file only).
    #[arg(skip)]
    pub command: Option<String>,
    /// Suite of `verify` (config file only; the command line takes it positionally).
    #[arg(skip)]
    pub suite: Option<Suite>,
    /// Ensemble kind [default: fermion].
    #[arg(long, value_parser = parse_kind)]
    pub kind: Option<EnsembleKind>,
    /// Dimension [default: 1].
    #[arg(long)]
    pub d: Option<usize>,
    /// Inverse temperature [default: 1].
    #[arg(long)]
    pub beta: Option<f64>,
    /// Well half-width of the composite kinds [default: 1].
    #[arg(long)]
    pub a: Option<f64>,
    /// Density [default: 0.2].
    #[arg(long)]
    pub rho: Option<f64>,
    /// Box side for finite-volume runs [default: 20].
    #[arg(long)]
    pub l: Option<f64>,
    /// Particle number [default: round(rho * L)].
    #[arg(long)]
    pub n: Option<usize>,
    /// Box sides of a convergence study [default: 10,20,40].
    #[arg(long, value_delimiter = ',')]
    pub ls: Option<Vec<f64>>,
    /// Particle numbers of saddle and fugacity-gap studies.
    #[arg(long, value_delimiter = ',')]
    pub ns: Option<Vec<usize>>,
    /// Evaluate the thermodynamic-limit formula instead of a finite box.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub limit: Option<bool>,
    /// Bump height c [default: 1].
    #[arg(long)]
    pub f_scale: Option<f64>,
    /// Bump width w [default: 2].
    #[arg(long)]
    pub f_width: Option<f64>,
    /// Two-column CSV (x,f) replacing the bump.
    #[arg(long)]
    pub f_csv: Option<PathBuf>,
    /// Nyström panels per support piece [default: 4].
    #[arg(long)]
    pub panels: Option<usize>,
    /// Gauss–Legendre nodes per panel [default: 16].
    #[arg(long)]
    pub order: Option<usize>,
    /// Fugacity solver tolerance [default: 1e-12].
    #[arg(long)]
    pub tol: Option<f64>,
    /// Statistics parameter for `fugacity` [default: alpha of --kind].
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    /// Contour branch of the saddle study [default: reciprocal].
    #[arg(long, value_enum)]
    pub branch: Option<Branch>,
    /// Study to run [default: convergence].
    #[arg(long, value_enum)]
    pub study: Option<StudyKind>,
    /// RNG seed [default: 1].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Chain steps after burn-in [default: 100000].
    #[arg(long)]
    pub steps: Option<usize>,
    /// Burn-in steps [default: 10000].
    #[arg(long)]
    pub burn_in: Option<usize>,
    /// Thinning interval [default: 10].
    #[arg(long)]
    pub thin: Option<usize>,
    /// Draw independent two-particle samples instead of running a chain.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub exact: Option<bool>,
    /// Number of exact samples [default: 10000].
    #[arg(long)]
    pub samples: Option<usize>,
    /// Output file for data (stdout when absent).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Output file for the sampling summary JSON (stderr when absent).
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

macro_rules! merge_fields {
    ($dst:ident, $src:ident; $($f:ident),*) => {
        $( if $dst.$f.is_none() { $dst.$f = $src.$f; } )*
    };
}

impl Params {
    pub fn from_json_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    /// Fills unset flags from `file`.
    pub fn merged(mut self, file: Params) -> Self {
        merge_fields!(self, file; command, suite, kind, d, beta, a, rho, l, n, ls, ns, limit, f_scale, f_width, f_csv,
            panels, order, tol, alpha, branch, study, seed, steps, burn_in, thin, exact, samples, output, summary);
        self
    }

    pub fn kind(&self) -> EnsembleKind {
        self.kind.unwrap_or(EnsembleKind::Fermion)
    }

    /// Ensemble parameters, validated.
    pub fn spec(&self) -> Result<EnsembleSpec, CliError> {
        Ok(EnsembleSpec::new(
            self.kind(),
            self.d.unwrap_or(1),
            self.beta.unwrap_or(1.0),
            self.a.unwrap_or(1.0),
            self.rho.unwrap_or(0.2),
        )?)
    }

    /// Spec without the critical-density check, for quantities defined at any density.
    pub fn raw_spec(&self) -> EnsembleSpec {
        EnsembleSpec {
            kind: self.kind(),
            d: self.d.unwrap_or(1),
            beta: self.beta.unwrap_or(1.0),
            a: self.a.unwrap_or(1.0),
            rho: self.rho.unwrap_or(0.2),
        }
    }

    pub fn test_function(&self) -> Result<TestFunction, CliError> {
        if let Some(p) = &self.f_csv {
            return Ok(TestFunction::from_csv_path(p)?);
        }
        Ok(TestFunction::bump(self.d.unwrap_or(1), self.f_scale.unwrap_or(1.0), self.f_width.unwrap_or(2.0))?)
    }

    pub fn rule(&self) -> NystromRule {
        let def = NystromRule::default();
        NystromRule { panels: self.panels.unwrap_or(def.panels), order: self.order.unwrap_or(def.order) }
    }

    pub fn l(&self) -> f64 {
        self.l.unwrap_or(20.0)
    }

    pub fn n_for(&self, l: f64) -> usize {
        self.n.unwrap_or_else(|| (self.rho.unwrap_or(0.2) * l).round() as usize)
    }

    pub fn tol(&self) -> f64 {
        self.tol.unwrap_or(1e-12)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(1)
    }
}
