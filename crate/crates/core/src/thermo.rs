//! Epsilon sweeps, entanglement temperature and area-law diagnostics.
//!
//! Energies are reported in units of `1 / r_h` relative to their value at
//! `eps = 0`; absolute ground energies grow without bound in `l` and only
//! their changes are summed. Entropies are absolute.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{central_difference, ols, LinearFit};
use crate::gaussian::{
    chunk_len, entanglement_entropy, multi_partition_entropy, reduced_lambdas, ChannelSum,
    ChannelSumParams, ConvergenceTracker, GroundState, LatticeChannels, Termination,
};
use crate::lattice::{assemble, build_k0, LatticeConfig};
use crate::metric::{degeneracy, hawking_temperature, MetricSpec};

/// Sweeps whose entropy or energy fit falls below this are flagged nonlinear
/// and left out of the temperature average.
pub const MIN_R2: f64 = 0.995;
/// Smallest entropy slope from which a temperature is formed.
pub const MIN_ENTROPY_SLOPE: f64 = 1e-12;
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// `count` uniform points on `[0, max]`.
pub fn uniform_eps(max: f64, count: usize) -> Vec<f64> {
    let last = (count.max(2) - 1) as f64;
    (0..count).map(|i| max * i as f64 / last).collect()
}

/// Default sweep: 11 points on `[0, 0.05]`.
pub fn default_eps() -> Vec<f64> {
    uniform_eps(0.05, 11)
}

/// Default cuts `{N/6, N/4, N/3, N/2, 2N/3, 5N/6}` rounded, deduplicated
/// and kept inside `1..N`.
pub fn default_partitions(sites: usize) -> Vec<usize> {
    let mut out: Vec<usize> = [1.0 / 6.0, 0.25, 1.0 / 3.0, 0.5, 2.0 / 3.0, 5.0 / 6.0]
        .iter()
        .map(|f| (f * sites as f64).round() as usize)
        .filter(|&n| n >= 1 && n < sites)
        .collect();
    out.dedup();
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepParams {
    pub eps: Vec<f64>,
    pub channels: ChannelSumParams,
}

impl Default for SweepParams {
    fn default() -> Self {
        Self { eps: default_eps(), channels: ChannelSumParams::default() }
    }
}

pub fn validate_eps(eps: &[f64]) -> Result<()> {
    if eps.len() < 3 {
        return Err(Error::Config(format!("eps list needs at least 3 points, got {}", eps.len())));
    }
    if eps[0] != 0.0 {
        return Err(Error::Config(format!("eps list must start at 0, got {}", eps[0])));
    }
    if eps.iter().any(|e| !e.is_finite()) || eps.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("eps list must be finite and strictly ascending".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub n: usize,
    pub eps_values: Vec<f64>,
    pub entropies: Vec<f64>,
    /// Ground energy minus its `eps = 0` value, in units of `1 / r_h`.
    pub energies: Vec<f64>,
    pub slope_s: f64,
    pub slope_e: f64,
    pub r2_s: f64,
    pub r2_e: f64,
    /// Central-difference slopes at `eps = 0` using `+-eps[1]`.
    pub central_slope_s: f64,
    pub central_slope_e: f64,
    pub t_ee: f64,
    pub linear: bool,
    pub entropy_nondecreasing: bool,
    pub last_l: u32,
    pub termination: Termination,
    pub warning: Option<String>,
}

// (energy in lattice units, entropy) of one channel at each eps
fn channel_samples(m: &MetricSpec, cfg: &LatticeConfig, n: usize, eps: &[f64]) -> Result<Vec<(f64, f64)>> {
    let cm = assemble(m, cfg)?;
    eps.iter()
        .map(|&e| {
            let gs = GroundState::from_coupling(&cm.at(e)?)?;
            Ok((gs.energy, reduced_lambdas(&gs, n)?.total))
        })
        .collect()
}

pub fn epsilon_sweep(m: &MetricSpec, sites: usize, n: usize, params: &SweepParams) -> Result<SweepResult> {
    validate_eps(&params.eps)?;
    params.channels.validate()?;
    let base = LatticeConfig::new(sites, n, 0, m.dim())?;
    m.validate()?;

    let k = params.eps.len();
    // one extra sample at -eps[1] for the central difference
    let mut all_eps = params.eps.clone();
    all_eps.push(-params.eps[1]);
    let total = all_eps.len();

    let mut s0 = 0.0;
    let mut ds = vec![0.0; total];
    let mut de = vec![0.0; total];
    let mut tracker = ConvergenceTracker::new(params.channels.tol);
    let mut termination = Termination::LMax;
    let mut last_l = 0;

    let l_max = params.channels.l_max;
    let mut next_l = 0u32;
    'outer: while next_l <= l_max {
        let end = (next_l as u64 + chunk_len() as u64).min(l_max as u64 + 1) as u32;
        let chunk: Vec<Result<Vec<(f64, f64)>>> = (next_l..end)
            .into_par_iter()
            .map(|l| channel_samples(m, &base.with_l(l), n, &all_eps))
            .collect();
        for (l, samples) in (next_l..end).zip(chunk) {
            let samples = samples?;
            let g = degeneracy(l, m.dim()) as f64;
            let (e0, st0) = samples[0];
            s0 += g * st0;
            let mut pairs = Vec::with_capacity(2 * total + 1);
            pairs.push((g * st0, s0));
            for (i, &(e, s)) in samples.iter().enumerate().skip(1) {
                let dsi = g * (s - st0);
                let dei = g * (e - e0);
                ds[i] += dsi;
                de[i] += dei;
                pairs.push((dsi, ds[i]));
                pairs.push((dei, de[i]));
            }
            last_l = l;
            if tracker.observe(pairs) {
                termination = Termination::Converged;
                break 'outer;
            }
        }
        next_l = end;
    }

    let scale = n as f64;
    let entropies: Vec<f64> = ds[..k].iter().map(|d| s0 + d).collect();
    let energies: Vec<f64> = de[..k].iter().map(|d| scale * d).collect();
    let fit_s = ols(&params.eps, &entropies)?;
    let fit_e = ols(&params.eps, &energies)?;
    if fit_s.slope.abs() < MIN_ENTROPY_SLOPE {
        return Err(Error::DegenerateSweep(fit_s.slope.abs()));
    }
    let h = params.eps[1];
    let central_slope_s = central_difference(ds[1], ds[total - 1], h);
    let central_slope_e = scale * central_difference(de[1], de[total - 1], h);
    let warning = (termination == Termination::LMax && params.channels.tol > 0.0).then(|| {
        format!("channel sum stopped at l_max = {l_max} before reaching tol = {:e}", params.channels.tol)
    });
    Ok(SweepResult {
        n,
        eps_values: params.eps.clone(),
        slope_s: fit_s.slope,
        slope_e: fit_e.slope,
        r2_s: fit_s.r2,
        r2_e: fit_e.r2,
        central_slope_s,
        central_slope_e,
        t_ee: fit_e.slope / fit_s.slope,
        linear: fit_s.r2 >= MIN_R2 && fit_e.r2 >= MIN_R2,
        entropy_nondecreasing: entropies.windows(2).all(|w| w[1] >= w[0]),
        entropies,
        energies,
        last_l,
        termination,
        warning,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepFailure {
    pub n: usize,
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemperatureReport {
    pub schema_version: u32,
    pub metric: String,
    pub q: f64,
    pub dim: u32,
    pub sites: usize,
    pub per_n: Vec<SweepResult>,
    pub failures: Vec<SweepFailure>,
    /// Partitions whose sweep passed the linearity check and enter the mean.
    pub accepted_n: Vec<usize>,
    pub t_ee_mean: Option<f64>,
    pub t_ee_std: Option<f64>,
    pub t_hawking: f64,
    pub has_horizon: bool,
    pub relative_deviation: Option<f64>,
}

pub fn temperature_report(
    m: &MetricSpec,
    sites: usize,
    partitions: &[usize],
    params: &SweepParams,
) -> Result<TemperatureReport> {
    if partitions.is_empty() {
        return Err(Error::Config("partition list is empty".into()));
    }
    let mut seen = partitions.to_vec();
    seen.sort_unstable();
    if seen.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Config("partition list has duplicates".into()));
    }
    let hawking = hawking_temperature(m)?;
    let mut per_n = Vec::new();
    let mut failures = Vec::new();
    for &n in partitions {
        match epsilon_sweep(m, sites, n, params) {
            Ok(sweep) => per_n.push(sweep),
            Err(e @ (Error::Config(_) | Error::InvalidLattice(_) | Error::InvalidMetric(_))) => return Err(e),
            Err(e) => {
                log::warn!("sweep at n = {n} failed: {e}");
                failures.push(SweepFailure { n, kind: e.tag().to_string(), message: e.to_string() });
            }
        }
    }
    if per_n.is_empty() {
        let summary: Vec<String> = failures.iter().map(|f| format!("n = {}: {}", f.n, f.message)).collect();
        return Err(Error::NoValidSweeps(summary.join("; ")));
    }
    let accepted: Vec<&SweepResult> = per_n.iter().filter(|s| s.linear).collect();
    let temps: Vec<f64> = accepted.iter().map(|s| s.t_ee).collect();
    let (mean, std) = mean_std(&temps);
    let relative_deviation = match (mean, hawking.has_horizon) {
        (Some(t), true) => Some((t - hawking.value).abs() / hawking.value),
        _ => None,
    };
    Ok(TemperatureReport {
        schema_version: REPORT_SCHEMA_VERSION,
        metric: m.kind().name().to_string(),
        q: m.charge(),
        dim: m.dim(),
        sites,
        accepted_n: accepted.iter().map(|s| s.n).collect(),
        per_n,
        failures,
        t_ee_mean: mean,
        t_ee_std: std,
        t_hawking: hawking.value,
        has_horizon: hawking.has_horizon,
        relative_deviation,
    })
}

fn mean_std(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (Some(mean), Some(std))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreaLawFit {
    pub eps: f64,
    pub partitions: Vec<usize>,
    pub entropies: Vec<f64>,
    pub sums: Vec<ChannelSum>,
    /// Fitted power of `n` in `S ~ C n^p`.
    pub exponent: f64,
    /// `C = exp(intercept)` of the log-log fit.
    pub prefactor: f64,
    pub r2: f64,
}

pub fn area_law_fit(
    m: &MetricSpec,
    sites: usize,
    partitions: &[usize],
    eps: f64,
    params: &ChannelSumParams,
) -> Result<AreaLawFit> {
    let mut distinct = partitions.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 4 {
        return Err(Error::Fit(format!("area-law fit needs at least 4 distinct partitions, got {}", distinct.len())));
    }
    m.validate()?;
    for &n in partitions {
        LatticeConfig::new(sites, n, 0, m.dim())?;
    }
    let sums = if eps == 0.0 {
        // K(0) = K0 for every background and every cut
        let dim = m.dim();
        let coupling = |l: u32| Ok(build_k0(&LatticeConfig::new(sites, 1, l, dim)?));
        multi_partition_entropy(&coupling, dim, partitions, params)?
    } else {
        partitions
            .iter()
            .map(|&n| {
                let src = LatticeChannels { metric: m.clone(), sites, partition: n };
                entanglement_entropy(&src, n, eps, params)
            })
            .collect::<Result<Vec<_>>>()?
    };
    let entropies: Vec<f64> = sums.iter().map(|s| s.total).collect();
    if entropies.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::Fit("entropy must be positive for a log-log fit".into()));
    }
    let x: Vec<f64> = partitions.iter().map(|&n| (n as f64).ln()).collect();
    let y: Vec<f64> = entropies.iter().map(|s| s.ln()).collect();
    let LinearFit { slope, intercept, r2 } = ols(&x, &y)?;
    Ok(AreaLawFit {
        eps,
        partitions: partitions.to_vec(),
        entropies,
        sums,
        exponent: slope,
        prefactor: intercept.exp(),
        r2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn default_partitions_cover_the_lattice() {
        assert_eq!(default_partitions(200), vec![33, 50, 67, 100, 133, 167]);
        assert_eq!(default_partitions(600), vec![100, 150, 200, 300, 400, 500]);
        assert_eq!(default_partitions(3), vec![1, 2]);
    }

    #[test]
    fn default_eps_grid() {
        let e = default_eps();
        assert_eq!(e.len(), 11);
        assert_eq!(e[0], 0.0);
        assert_relative_eq!(e[10], 0.05);
        validate_eps(&e).unwrap();
        assert!(validate_eps(&[0.0, 0.1]).is_err());
        assert!(validate_eps(&[0.01, 0.02, 0.03]).is_err());
        assert!(validate_eps(&[0.0, 0.02, 0.01]).is_err());
    }

    fn small_params(max: f64) -> SweepParams {
        SweepParams { eps: uniform_eps(max, 5), channels: ChannelSumParams { l_max: 6, tol: 1e-8 } }
    }

    #[test]
    fn sweep_wiring() {
        let m = MetricSpec::schwarzschild(2);
        let s = epsilon_sweep(&m, 30, 10, &small_params(1e-3)).unwrap();
        assert_eq!(s.eps_values.len(), 5);
        assert_eq!(s.energies[0], 0.0);
        assert_relative_eq!(s.slope_e, s.t_ee * s.slope_s, max_relative = 1e-14);
        assert_eq!(s.termination, Termination::LMax);
        assert_eq!(s.last_l, 6);
        assert!(s.warning.is_some());
        // energy slope from a fit through nearly linear data tracks the
        // central difference at eps = 0
        assert!((s.slope_e - s.central_slope_e).abs() < 0.05 * s.slope_e.abs());
    }

    #[test]
    fn sweep_rejects_bad_eps() {
        let m = MetricSpec::schwarzschild(2);
        let mut p = small_params(1e-3);
        p.eps = vec![0.0, 1e-3];
        assert!(matches!(epsilon_sweep(&m, 30, 10, &p), Err(Error::Config(_))));
    }

    #[test]
    fn single_channel_matches_direct_evaluation() {
        let m = MetricSpec::schwarzschild(2);
        let p = SweepParams { eps: uniform_eps(1e-3, 3), channels: ChannelSumParams { l_max: 0, tol: 0.5 } };
        let s = epsilon_sweep(&m, 20, 5, &p).unwrap();
        let cm = assemble(&m, &LatticeConfig::new(20, 5, 0, 2).unwrap()).unwrap();
        for (i, &e) in p.eps.iter().enumerate() {
            let gs = GroundState::from_coupling(&cm.at(e).unwrap()).unwrap();
            let s_direct = reduced_lambdas(&gs, 5).unwrap().total;
            assert_relative_eq!(s.entropies[i], s_direct, max_relative = 1e-12);
        }
        let e0 = GroundState::from_coupling(&cm.at(0.0).unwrap()).unwrap().energy;
        let e2 = GroundState::from_coupling(&cm.at(1e-3).unwrap()).unwrap().energy;
        assert_relative_eq!(s.energies[2], 5.0 * (e2 - e0), max_relative = 1e-9);
    }

    #[test]
    fn eps_rescaling_keeps_temperature() {
        let m = MetricSpec::schwarzschild(2);
        let a = epsilon_sweep(&m, 30, 10, &small_params(1e-3)).unwrap();
        let b = epsilon_sweep(&m, 30, 10, &small_params(5e-4)).unwrap();
        assert!((a.t_ee - b.t_ee).abs() < 0.02 * a.t_ee.abs(), "{} vs {}", a.t_ee, b.t_ee);
    }

    #[test]
    fn report_collects_failures() {
        // q = 0.4 puts the innermost sites of the n = 20 lattice inside the
        // region where 1 - f < 0; the n = 5 lattice starts at r = 0.2.
        let m = MetricSpec::reissner_nordstrom(0.4, 2);
        let r = temperature_report(&m, 30, &[5, 20], &small_params(1e-3)).unwrap();
        assert_eq!(r.per_n.len(), 1);
        assert_eq!(r.failures.len(), 1);
        assert_eq!(r.failures[0].n, 20);
        assert_eq!(r.failures[0].kind, "singular_factor");
        assert_relative_eq!(r.t_hawking, (1.0 - 0.16) / (4.0 * std::f64::consts::PI));
        let err = temperature_report(&m, 30, &[20], &small_params(1e-3)).unwrap_err();
        assert!(matches!(err, Error::NoValidSweeps(_)));
        assert!(temperature_report(&m, 30, &[5, 5], &small_params(1e-3)).is_err());
    }

    #[test]
    fn zero_charge_report_matches_schwarzschild() {
        let p = small_params(1e-3);
        let a = temperature_report(&MetricSpec::schwarzschild(2), 24, &[6, 12], &p).unwrap();
        let b = temperature_report(&MetricSpec::reissner_nordstrom(0.0, 2), 24, &[6, 12], &p).unwrap();
        assert_eq!(a.per_n, b.per_n);
        assert_eq!(a.t_ee_mean, b.t_ee_mean);
        assert_eq!(a.t_hawking, b.t_hawking);
    }

    #[test]
    fn area_law_needs_four_points() {
        let m = MetricSpec::flat(2);
        let p = ChannelSumParams { l_max: 2, tol: 0.0 };
        assert!(matches!(area_law_fit(&m, 40, &[5, 10, 15], 0.0, &p), Err(Error::Fit(_))));
        assert!(matches!(area_law_fit(&m, 40, &[5, 10, 10, 15], 0.0, &p), Err(Error::Fit(_))));
    }

    #[test]
    fn s_wave_alone_is_not_an_area_law() {
        let m = MetricSpec::flat(2);
        let p = ChannelSumParams { l_max: 0, tol: 1e-8 };
        let fit = area_law_fit(&m, 60, &[8, 12, 16, 20, 24], 0.0, &p).unwrap();
        assert!(fit.exponent < 2.0 && fit.exponent > 0.0, "{}", fit.exponent);
    }
}
