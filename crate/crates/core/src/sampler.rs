//! Exact and Metropolis sampling of the fermion and boson position densities (d = 1).

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::alpha_linalg::{for_each_permutation, Permutation};
use crate::error::{Error, Result};
use crate::kernels::{heat_kernel_1d_fourier, heat_mode_cutoff, TestFunction};
use crate::processes::EnsembleKind;
use crate::quadrature::{gauss_legendre, pairwise_sum};

/// Largest particle number accepted by [`log_density`].
pub const LOG_DENSITY_MAX_N: usize = 8;

/// Largest particle number accepted by the Metropolis chain.
pub const MCMC_MAX_N: usize = 6;

/// Grid cells of the exact two-particle sampler.
pub const EXACT_GRID: usize = 4096;

/// Point positions in `[−L/2, L/2)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Configuration {
    pub points: Vec<f64>,
}

/// Wraps `x` into `[−L/2, L/2)`.
pub fn wrap(x: f64, l: f64) -> f64 {
    let y = x - l * ((x + 0.5 * l) / l).floor();
    if y >= 0.5 * l {
        y - l
    } else {
        y
    }
}

/// Periodic distance on the circle of length `L`.
pub fn periodic_distance(x: f64, y: f64, l: f64) -> f64 {
    wrap(x - y, l).abs()
}

fn sampled_alpha(kind: EnsembleKind) -> Result<f64> {
    match kind {
        EnsembleKind::Fermion => Ok(-1.0),
        EnsembleKind::Boson => Ok(1.0),
        other => Err(Error::InvalidInput(format!("sampling is implemented for fermions and bosons, not {other}"))),
    }
}

/// Periodic heat kernel `G_L(r)` with the spectral tail rule of the finite-volume spectra.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatPairKernel {
    pub l: f64,
    pub beta: f64,
    m: usize,
}

impl HeatPairKernel {
    pub fn new(l: f64, beta: f64) -> Result<Self> {
        Ok(HeatPairKernel { l, beta, m: heat_mode_cutoff(l, beta)? })
    }

    pub fn value(&self, r: f64) -> f64 {
        heat_kernel_1d_fourier(self.l, self.beta, self.m, r)
    }
}

/// Signed permutations of `{0, …, n−1}` weighted by `α^{n − cycles}`.
fn weighted_permutations(n: usize, alpha: f64) -> Vec<(Vec<usize>, f64)> {
    let mut out = Vec::new();
    for_each_permutation(n, |p| {
        let cycles = Permutation::new(p.to_vec()).expect("valid permutation").cycle_lengths().len();
        out.push((p.to_vec(), alpha.powi((n - cycles) as i32)));
    });
    out
}

fn alpha_det_real(points: &[f64], kernel: &HeatPairKernel, perms: &[(Vec<usize>, f64)]) -> f64 {
    let n = points.len();
    let mut g = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = kernel.value(points[i] - points[j]);
            g[i * n + j] = v;
            g[j * n + i] = v;
        }
    }
    let terms: Vec<f64> = perms
        .iter()
        .map(|(p, c)| p.iter().enumerate().fold(*c, |acc, (i, &j)| acc * g[i * n + j]))
        .collect();
    pairwise_sum(&terms)
}

fn has_coincident(points: &[f64]) -> bool {
    points.iter().enumerate().any(|(i, x)| points[i + 1..].contains(x))
}

fn log_density_with(points: &[f64], kernel: &HeatPairKernel, alpha: f64, perms: &[(Vec<usize>, f64)]) -> f64 {
    if alpha < 0.0 && has_coincident(points) {
        return f64::NEG_INFINITY;
    }
    let d = alpha_det_real(points, kernel, perms);
    if d > 0.0 {
        d.ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// `ln det_α[G_L(x_i, x_j)]`, the unnormalized log-density of the positions.
pub fn log_density(points: &[f64], l: f64, beta: f64, kind: EnsembleKind) -> Result<f64> {
    let alpha = sampled_alpha(kind)?;
    if points.len() > LOG_DENSITY_MAX_N {
        return Err(Error::DimensionTooLarge { what: "log_density", n: points.len(), cap: LOG_DENSITY_MAX_N });
    }
    let kernel = HeatPairKernel::new(l, beta)?;
    Ok(log_density_with(points, &kernel, alpha, &weighted_permutations(points.len(), alpha)))
}

/// Chain settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McmcOptions {
    pub burn_in: usize,
    pub thin: usize,
    /// Proposal scale; `None` selects `0.2 L/N`.
    pub step_scale: Option<f64>,
}

impl Default for McmcOptions {
    fn default() -> Self {
        McmcOptions { burn_in: 10_000, thin: 10, step_scale: None }
    }
}

/// Samples and diagnostics of one chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McmcOutput {
    pub samples: Vec<Configuration>,
    pub acceptance_rate: f64,
    /// Integrated autocorrelation time of the smallest pair separation, in thinned samples.
    pub iat: f64,
    /// Final chain state.
    pub last: Configuration,
    pub last_log_density: f64,
}

/// Generator for chain step `step` (burn-in steps included) of the chain with `seed`.
fn step_rng(seed: u64, step: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(step);
    rng
}

/// Metropolis random walk on `N` points of the periodic box targeting `det_α[G_L(x_i, x_j)]`.
///
/// Returns one configuration every `thin` steps after burn-in, `steps` steps in total;
/// `steps = 0` yields the initial configuration.
pub fn mcmc_sample(
    kind: EnsembleKind,
    l: f64,
    beta: f64,
    n: usize,
    steps: usize,
    seed: u64,
    opts: McmcOptions,
) -> Result<McmcOutput> {
    let alpha = sampled_alpha(kind)?;
    if n == 0 || n > MCMC_MAX_N {
        return Err(Error::DimensionTooLarge { what: "mcmc_sample", n, cap: MCMC_MAX_N });
    }
    if opts.thin == 0 {
        return Err(Error::InvalidInput("thinning must be positive".into()));
    }
    let kernel = HeatPairKernel::new(l, beta)?;
    let perms = weighted_permutations(n, alpha);
    let scale = opts.step_scale.unwrap_or(0.2 * l / n as f64);
    let mut x: Vec<f64> = (0..n).map(|j| wrap(-0.5 * l + (j as f64 + 0.5) * l / n as f64, l)).collect();
    let mut ld = log_density_with(&x, &kernel, alpha, &perms);
    if steps == 0 {
        let c = Configuration { points: x };
        return Ok(McmcOutput { samples: vec![c.clone()], acceptance_rate: 0.0, iat: 1.0, last: c, last_log_density: ld });
    }
    let mut accepted = 0usize;
    let mut samples = Vec::with_capacity(steps / opts.thin);
    let total = opts.burn_in + steps;
    for t in 0..total {
        let mut rng = step_rng(seed, t as u64);
        let i = rng.random_range(0..n);
        let z: f64 = rng.sample(StandardNormal);
        let u: f64 = rng.random();
        let old = x[i];
        x[i] = wrap(old + scale * z, l);
        let cand = log_density_with(&x, &kernel, alpha, &perms);
        if cand > f64::NEG_INFINITY && u.ln() < cand - ld {
            ld = cand;
            if t >= opts.burn_in {
                accepted += 1;
            }
        } else {
            x[i] = old;
        }
        if t >= opts.burn_in && (t - opts.burn_in + 1).is_multiple_of(opts.thin) {
            samples.push(Configuration { points: x.clone() });
        }
    }
    let sep: Vec<f64> = samples.iter().map(|c| min_separation(&c.points, l)).collect();
    Ok(McmcOutput {
        acceptance_rate: accepted as f64 / steps as f64,
        iat: integrated_autocorrelation(&sep),
        samples,
        last: Configuration { points: x },
        last_log_density: ld,
    })
}

/// Independent chains run in parallel; chain `c` uses seed `seed + c`.
#[allow(clippy::too_many_arguments)]
pub fn mcmc_sample_chains(
    kind: EnsembleKind,
    l: f64,
    beta: f64,
    n: usize,
    steps_per_chain: usize,
    chains: usize,
    seed: u64,
    opts: McmcOptions,
) -> Result<Vec<McmcOutput>> {
    (0..chains)
        .into_par_iter()
        .map(|c| mcmc_sample(kind, l, beta, n, steps_per_chain, seed.wrapping_add(c as u64), opts))
        .collect()
}

/// Smallest periodic distance between two points of a configuration.
pub fn min_separation(points: &[f64], l: f64) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            best = best.min(periodic_distance(points[i], points[j], l));
        }
    }
    best
}

/// Inverse-CDF sampler for `N = 2`: `x₁` uniform, separation `r` with density
/// `∝ G_L(0)² + α G_L(r)²` on `[−L/2, L/2)`.
#[derive(Debug, Clone)]
pub struct ExactPairSampler {
    kernel: HeatPairKernel,
    alpha: f64,
    g0: f64,
    edges: Vec<f64>,
    cdf: Vec<f64>,
}

impl ExactPairSampler {
    pub fn new(kind: EnsembleKind, l: f64, beta: f64) -> Result<Self> {
        let alpha = sampled_alpha(kind)?;
        let kernel = HeatPairKernel::new(l, beta)?;
        let g0 = kernel.value(0.0);
        let edges: Vec<f64> = (0..=EXACT_GRID).map(|k| -0.5 * l + l * k as f64 / EXACT_GRID as f64).collect();
        let (t, w) = gauss_legendre(8);
        let cells: Vec<f64> = edges
            .par_windows(2)
            .map(|e| {
                let h = 0.5 * (e[1] - e[0]);
                let c = 0.5 * (e[1] + e[0]);
                t.iter().zip(&w).map(|(ti, wi)| wi * h * pair_weight(&kernel, g0, alpha, c + h * ti)).sum()
            })
            .collect();
        let mut cdf = vec![0.0; EXACT_GRID + 1];
        for (k, c) in cells.iter().enumerate() {
            cdf[k + 1] = cdf[k] + c;
        }
        Ok(ExactPairSampler { kernel, alpha, g0, edges, cdf })
    }

    /// Unnormalized separation density.
    pub fn separation_density(&self, r: f64) -> f64 {
        pair_weight(&self.kernel, self.g0, self.alpha, r)
    }

    /// Separation with CDF value `u ∈ [0, 1)`, solved to 1e−12 inside the bracketing cell.
    pub fn separation_quantile(&self, u: f64) -> f64 {
        let total = self.cdf[EXACT_GRID];
        let target = u * total;
        let k = (self.cdf.partition_point(|&c| c <= target).max(1) - 1).min(EXACT_GRID - 1);
        let a = self.edges[k];
        let (mut lo, mut hi) = (a, self.edges[k + 1]);
        let base = self.cdf[k];
        let (t, w) = gauss_legendre(8);
        let mass = |x: f64| -> f64 {
            let h = 0.5 * (x - a);
            let c = 0.5 * (x + a);
            t.iter().zip(&w).map(|(ti, wi)| wi * h * self.separation_density(c + h * ti)).sum()
        };
        let mut x = 0.5 * (lo + hi);
        for _ in 0..100 {
            let f = base + mass(x) - target;
            if f.abs() <= 1e-13 * total || hi - lo < 1e-15 * self.kernel.l {
                break;
            }
            if f > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let dens = self.separation_density(x);
            let newton = x - f / dens;
            x = if dens > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        }
        x
    }

    /// Sample number `index` of the stream with `seed`.
    pub fn sample(&self, seed: u64, index: u64) -> Configuration {
        let mut rng = step_rng(seed, index);
        let l = self.kernel.l;
        let x1 = wrap(-0.5 * l + l * rng.random::<f64>(), l);
        let r = self.separation_quantile(rng.random::<f64>());
        Configuration { points: vec![x1, wrap(x1 + r, l)] }
    }

    pub fn samples(&self, count: usize, seed: u64) -> Vec<Configuration> {
        (0..count as u64).into_par_iter().map(|i| self.sample(seed, i)).collect()
    }
}

fn pair_weight(kernel: &HeatPairKernel, g0: f64, alpha: f64, r: f64) -> f64 {
    let g = kernel.value(r);
    (g0 * g0 + alpha * g * g).max(0.0)
}

/// One exact two-particle configuration.
pub fn exact_sample_n2(kind: EnsembleKind, l: f64, beta: f64, seed: u64) -> Result<Configuration> {
    Ok(ExactPairSampler::new(kind, l, beta)?.sample(seed, 0))
}

/// Sample mean of `e^{−Σ f(x_i)}` with a batch-means standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmpiricalLaplace {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

pub fn empirical_laplace(samples: &[Configuration], f: &TestFunction, batches: usize) -> EmpiricalLaplace {
    let vals: Vec<f64> = samples
        .iter()
        .map(|c| (-c.points.iter().map(|x| f.eval(&[*x])).sum::<f64>()).exp())
        .collect();
    let (mean, std_error) = batch_means(&vals, batches);
    EmpiricalLaplace { mean, std_error, samples: vals.len() }
}

/// Mean and batch-means standard error over `batches` contiguous batches.
pub fn batch_means(values: &[f64], batches: usize) -> (f64, f64) {
    let n = values.len();
    let mean = pairwise_sum(values) / n as f64;
    let b = batches.clamp(2, n.max(2));
    let size = n / b;
    if size == 0 {
        return (mean, f64::NAN);
    }
    let means: Vec<f64> = (0..b).map(|k| pairwise_sum(&values[k * size..(k + 1) * size]) / size as f64).collect();
    let mm = pairwise_sum(&means) / b as f64;
    let var = means.iter().map(|m| (m - mm).powi(2)).sum::<f64>() / (b - 1) as f64;
    (mean, (var / b as f64).sqrt())
}

/// Integrated autocorrelation time `1 + 2 Σ ρ_k` with a self-consistent window `k ≤ 5τ`.
pub fn integrated_autocorrelation(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 4 {
        return 1.0;
    }
    let mean = pairwise_sum(values) / n as f64;
    let c: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let var = c.iter().map(|x| x * x).sum::<f64>() / n as f64;
    if var == 0.0 {
        return 1.0;
    }
    let mut tau = 1.0;
    for k in 1..n / 2 {
        let rho = c[..n - k].iter().zip(&c[k..]).map(|(a, b)| a * b).sum::<f64>() / (n as f64 * var);
        tau += 2.0 * rho;
        if k as f64 >= 5.0 * tau {
            break;
        }
    }
    tau.max(1.0)
}

/// Result of a hypothesis test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestOutcome {
    pub statistic: f64,
    pub p_value: f64,
}

/// One-sample Kolmogorov–Smirnov test against the uniform law on `[a, b]`.
pub fn ks_uniform(samples: &[f64], a: f64, b: f64) -> TestOutcome {
    let mut u: Vec<f64> = samples.iter().map(|x| ((x - a) / (b - a)).clamp(0.0, 1.0)).collect();
    u.sort_by(f64::total_cmp);
    let n = u.len() as f64;
    let d = u
        .iter()
        .enumerate()
        .map(|(i, &x)| ((i as f64 + 1.0) / n - x).max(x - i as f64 / n))
        .fold(0.0, f64::max);
    let sn = n.sqrt();
    TestOutcome { statistic: d, p_value: kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d) }
}

/// `P(K > λ)` for the Kolmogorov distribution.
fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let t = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        s += if k % 2 == 1 { t } else { -t };
        if t < 1e-17 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// One-sided Mann–Whitney test that `x` is stochastically larger than `y`
/// (normal approximation with tie correction).
pub fn mann_whitney_greater(x: &[f64], y: &[f64]) -> TestOutcome {
    let n1 = x.len() as f64;
    let n2 = y.len() as f64;
    let mut all: Vec<(f64, bool)> = x.iter().map(|&v| (v, true)).chain(y.iter().map(|&v| (v, false))).collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut rank_x = 0.0;
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        while j + 1 < all.len() && all[j + 1].0 == all[i].0 {
            j += 1;
        }
        let avg = 0.5 * ((i + 1) + (j + 1)) as f64;
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        for e in &all[i..=j] {
            if e.1 {
                rank_x += avg;
            }
        }
        i = j + 1;
    }
    let u = rank_x - n1 * (n1 + 1.0) / 2.0;
    let nn = n1 + n2;
    let var = n1 * n2 / 12.0 * ((nn + 1.0) - tie_term / (nn * (nn - 1.0)));
    let zscore = (u - n1 * n2 / 2.0) / var.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    TestOutcome { statistic: u, p_value: 1.0 - normal.cdf(zscore) }
}

/// Two-sample χ² homogeneity test on shared bins; empty bins are dropped.
pub fn chi_square_two_sample(a: &[f64], b: &[f64], edges: &[f64]) -> Result<TestOutcome> {
    let ca = histogram(a, edges);
    let cb = histogram(b, edges);
    let na: f64 = ca.iter().sum();
    let nb: f64 = cb.iter().sum();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::InvalidInput("both samples need points inside the bins".into()));
    }
    let (ka, kb) = ((nb / na).sqrt(), (na / nb).sqrt());
    let mut stat = 0.0;
    let mut bins = 0usize;
    for (x, y) in ca.iter().zip(&cb) {
        if x + y > 0.0 {
            stat += (ka * x - kb * y).powi(2) / (x + y);
            bins += 1;
        }
    }
    if bins < 2 {
        return Err(Error::InvalidInput("need at least two occupied bins".into()));
    }
    let chi = ChiSquared::new((bins - 1) as f64).map_err(|e| Error::InvalidInput(e.to_string()))?;
    Ok(TestOutcome { statistic: stat, p_value: 1.0 - chi.cdf(stat) })
}

/// Bin counts over `[edges[0], edges[last])`.
pub fn histogram(values: &[f64], edges: &[f64]) -> Vec<f64> {
    let mut counts = vec![0.0; edges.len().saturating_sub(1)];
    for &v in values {
        if v < edges[0] || v >= edges[edges.len() - 1] {
            continue;
        }
        let k = edges.partition_point(|&e| e <= v) - 1;
        counts[k] += 1.0;
    }
    counts
}

/// Writes one row per configuration with columns `x_1..x_N`.
pub fn write_samples_csv<W: Write>(w: W, samples: &[Configuration]) -> Result<()> {
    let io = |e: csv::Error| Error::Io(e.to_string());
    let mut wr = csv::Writer::from_writer(w);
    let n = samples.first().map_or(0, |c| c.points.len());
    wr.write_record((1..=n).map(|i| format!("x_{i}"))).map_err(io)?;
    for c in samples {
        wr.write_record(c.points.iter().map(|x| format!("{x:.16e}"))).map_err(io)?;
    }
    wr.flush().map_err(|e| Error::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_into_box() {
        assert_eq!(wrap(5.0, 10.0), -5.0);
        assert!((wrap(7.5, 10.0) + 2.5).abs() < 1e-15);
        assert!((wrap(-12.0, 10.0) + 2.0).abs() < 1e-15);
        assert!((periodic_distance(4.5, -4.5, 10.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn log_density_examples() {
        let a = log_density(&[0.3], 10.0, 1.0, EnsembleKind::Fermion).unwrap();
        let b = log_density(&[-2.1], 10.0, 1.0, EnsembleKind::Fermion).unwrap();
        assert!((a - b).abs() < 1e-14);
        assert_eq!(log_density(&[0.5, 0.5], 10.0, 1.0, EnsembleKind::Fermion).unwrap(), f64::NEG_INFINITY);
        let k = HeatPairKernel::new(10.0, 1.0).unwrap();
        let (g0, g1) = (k.value(0.0), k.value(0.7));
        let f = log_density(&[0.0, 0.7], 10.0, 1.0, EnsembleKind::Fermion).unwrap();
        assert!((f - (g0 * g0 - g1 * g1).ln()).abs() < 1e-12);
        let b = log_density(&[0.0, 0.7], 10.0, 1.0, EnsembleKind::Boson).unwrap();
        assert!((b - (g0 * g0 + g1 * g1).ln()).abs() < 1e-12);
        assert!(log_density(&[0.0; 9], 10.0, 1.0, EnsembleKind::Boson).is_err());
        assert!(log_density(&[0.0], 10.0, 1.0, EnsembleKind::ParaBoson2).is_err());
    }

    #[test]
    fn zero_steps_returns_initial_configuration() {
        let out = mcmc_sample(EnsembleKind::Fermion, 10.0, 1.0, 3, 0, 1, McmcOptions::default()).unwrap();
        assert_eq!(out.samples.len(), 1);
        assert_eq!(out.samples[0].points.len(), 3);
    }

    #[test]
    fn chains_are_reproducible() {
        let opts = McmcOptions { burn_in: 100, thin: 2, step_scale: None };
        let a = mcmc_sample(EnsembleKind::Boson, 10.0, 1.0, 2, 400, 42, opts).unwrap();
        let b = mcmc_sample(EnsembleKind::Boson, 10.0, 1.0, 2, 400, 42, opts).unwrap();
        let c = mcmc_sample(EnsembleKind::Boson, 10.0, 1.0, 2, 400, 43, opts).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.samples, c.samples);
        assert!(a.acceptance_rate > 0.0 && a.acceptance_rate < 1.0);
    }

    #[test]
    fn fermion_separation_density_vanishes_at_zero() {
        let s = ExactPairSampler::new(EnsembleKind::Fermion, 10.0, 1.0).unwrap();
        assert!(s.separation_density(0.0).abs() < 1e-15);
        assert!(s.separation_density(1.0) > 0.0);
    }

    #[test]
    fn quantiles_invert_cdf() {
        let s = ExactPairSampler::new(EnsembleKind::Boson, 10.0, 1.0).unwrap();
        let total = crate::quadrature::integrate_adaptive(|r| s.separation_density(r), -5.0, 5.0, 1e-14, 1e-13).0;
        for u in [0.01, 0.25, 0.5, 0.8, 0.999] {
            let x = s.separation_quantile(u);
            let m = crate::quadrature::integrate_adaptive(|r| s.separation_density(r), -5.0, x, 1e-14, 1e-13).0;
            assert!((m / total - u).abs() < 1e-8, "u={u}: {}", m / total);
        }
    }

    #[test]
    fn exact_first_coordinate_is_uniform() {
        let s = ExactPairSampler::new(EnsembleKind::Fermion, 10.0, 1.0).unwrap();
        let xs: Vec<f64> = s.samples(10_000, 7).iter().map(|c| c.points[0]).collect();
        assert!(ks_uniform(&xs, -5.0, 5.0).p_value > 0.01);
    }

    #[test]
    fn statistics_helpers() {
        let u: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        assert!(ks_uniform(&u, 0.0, 1.0).p_value > 0.99);
        let shifted: Vec<f64> = u.iter().map(|x| x + 0.2).collect();
        assert!(mann_whitney_greater(&shifted, &u).p_value < 1e-6);
        assert!(mann_whitney_greater(&u, &shifted).p_value > 0.99);
        let edges: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        assert!(chi_square_two_sample(&u, &u, &edges).unwrap().p_value > 0.99);
        let (m, se) = batch_means(&u, 10);
        assert!((m - 0.5).abs() < 1e-12 && se > 0.0);
        let mut buf = Vec::new();
        write_samples_csv(&mut buf, &[Configuration { points: vec![0.5, -1.0] }]).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("x_1,x_2\n"));
    }
}
