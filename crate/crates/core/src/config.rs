//! TOML run configuration.
//!
//! ```toml
//! metric.kind = "reissner_nordstrom"
//! metric.q = 0.2
//! metric.dim = 2
//! sites = 200
//! partitions = [50, 100]      # default: N/6 .. 5N/6
//! eps_max = 0.05              # or an explicit `eps = [...]`
//! eps_count = 11
//! l_max = 400
//! tol = 1e-8
//! output_dir = "out"
//! emit_matrices = false
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::ChannelSumParams;
use crate::lattice::LatticeConfig;
use crate::metric::{MetricKind, MetricSpec};
use crate::thermo::{default_partitions, uniform_eps, validate_eps, SweepParams};

pub const DEFAULT_SITES: usize = 200;
pub const DEFAULT_DIM: u32 = 2;
pub const DEFAULT_EPS_MAX: f64 = 0.05;
pub const DEFAULT_EPS_COUNT: usize = 11;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricConfig {
    pub kind: MetricKind,
    #[serde(default)]
    pub q: f64,
    #[serde(default = "default_dim")]
    pub dim: u32,
}

fn default_dim() -> u32 {
    DEFAULT_DIM
}

/// The file as written; any field may be missing.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub metric: Option<MetricConfig>,
    pub sites: Option<usize>,
    pub partitions: Option<Vec<usize>>,
    pub eps: Option<Vec<f64>>,
    pub eps_max: Option<f64>,
    pub eps_count: Option<usize>,
    pub l_max: Option<u32>,
    pub tol: Option<f64>,
    pub output_dir: Option<PathBuf>,
    pub emit_matrices: Option<bool>,
}

/// Fully resolved configuration; echoed verbatim into `meta.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub metric: MetricConfig,
    pub sites: usize,
    pub partitions: Vec<usize>,
    pub eps: Vec<f64>,
    pub l_max: u32,
    pub tol: f64,
    pub output_dir: PathBuf,
    pub emit_matrices: bool,
}

impl RawConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Fills defaults and checks every field, reporting all problems at once.
    pub fn resolve(self) -> Result<RunConfig> {
        let mut problems = Vec::new();
        let metric = self.metric.unwrap_or(MetricConfig { kind: MetricKind::Schwarzschild, q: 0.0, dim: DEFAULT_DIM });
        if metric.kind == MetricKind::Custom {
            problems.push("metric.kind = \"custom\" is only available through the library API".to_string());
        } else if let Err(e) = metric_spec(&metric).validate() {
            problems.push(e.to_string());
        }
        if metric.kind != MetricKind::ReissnerNordstrom && metric.q != 0.0 {
            problems.push(format!("metric.q = {} is only meaningful for reissner_nordstrom", metric.q));
        }
        let sites = self.sites.unwrap_or(DEFAULT_SITES);
        let partitions = self.partitions.unwrap_or_else(|| default_partitions(sites));
        if partitions.is_empty() {
            problems.push("partitions is empty".into());
        }
        let mut sorted = partitions.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            problems.push("partitions has duplicates".into());
        }
        for &n in &partitions {
            if let Err(e) = LatticeConfig::new(sites, n, 0, metric.dim.max(1)) {
                problems.push(e.to_string());
            }
        }
        let eps = match (self.eps, self.eps_max, self.eps_count) {
            (Some(list), None, None) => list,
            (Some(_), _, _) => {
                problems.push("give either eps or eps_max/eps_count, not both".into());
                Vec::new()
            }
            (None, max, count) => {
                let max = max.unwrap_or(DEFAULT_EPS_MAX);
                let count = count.unwrap_or(DEFAULT_EPS_COUNT);
                if !(max > 0.0 && max.is_finite()) {
                    problems.push(format!("eps_max must be positive, got {max}"));
                }
                uniform_eps(max, count)
            }
        };
        if let Err(e) = validate_eps(&eps) {
            if !eps.is_empty() {
                problems.push(e.to_string());
            }
        }
        let channels = ChannelSumParams {
            l_max: self.l_max.unwrap_or(ChannelSumParams::default().l_max),
            tol: self.tol.unwrap_or(ChannelSumParams::default().tol),
        };
        if let Err(e) = channels.validate() {
            problems.push(e.to_string());
        }
        if !problems.is_empty() {
            let lines: Vec<String> = problems.iter().map(|p| format!("  - {}", p.trim_start_matches("invalid configuration:\n"))).collect();
            return Err(Error::Config(lines.join("\n")));
        }
        Ok(RunConfig {
            metric,
            sites,
            partitions,
            eps,
            l_max: channels.l_max,
            tol: channels.tol,
            output_dir: self.output_dir.unwrap_or_else(|| PathBuf::from("out")),
            emit_matrices: self.emit_matrices.unwrap_or(false),
        })
    }
}

pub fn metric_spec(m: &MetricConfig) -> MetricSpec {
    match m.kind {
        MetricKind::Flat => MetricSpec::flat(m.dim),
        MetricKind::Schwarzschild => MetricSpec::schwarzschild(m.dim),
        MetricKind::ReissnerNordstrom | MetricKind::Custom => MetricSpec::reissner_nordstrom(m.q, m.dim),
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        RawConfig::load(path)?.resolve()
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        RawConfig::from_toml(text)?.resolve()
    }

    pub fn metric_spec(&self) -> MetricSpec {
        metric_spec(&self.metric)
    }

    pub fn sweep_params(&self) -> SweepParams {
        SweepParams { eps: self.eps.clone(), channels: self.channel_params() }
    }

    pub fn channel_params(&self) -> ChannelSumParams {
        ChannelSumParams { l_max: self.l_max, tol: self.tol }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = RunConfig::from_toml("").unwrap();
        assert_eq!(c.metric.kind, MetricKind::Schwarzschild);
        assert_eq!(c.sites, 200);
        assert_eq!(c.partitions, vec![33, 50, 67, 100, 133, 167]);
        assert_eq!(c.eps.len(), 11);
        assert_eq!(c.l_max, 400);
        assert!(!c.emit_matrices);
    }

    #[test]
    fn flat_keys() {
        let c = RunConfig::from_toml(
            "metric.kind = \"reissner_nordstrom\"\nmetric.q = 0.3\nsites = 40\npartitions = [10, 20]\neps = [0.0, 0.001, 0.002]\nl_max = 5\n",
        )
        .unwrap();
        assert_eq!(c.metric.q, 0.3);
        assert_eq!(c.metric.dim, 2);
        assert_eq!(c.partitions, vec![10, 20]);
        assert_eq!(c.eps, vec![0.0, 0.001, 0.002]);
        assert_eq!(c.metric_spec().charge(), 0.3);
    }

    #[test]
    fn charge_out_of_range_names_the_invariant() {
        let err = RunConfig::from_toml("metric.kind = \"reissner_nordstrom\"\nmetric.q = 1.2\n").unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert!(err.to_string().contains("0 <= q < 1"), "{err}");
    }

    #[test]
    fn problems_are_aggregated() {
        let err = RunConfig::from_toml(
            "metric.kind = \"reissner_nordstrom\"\nmetric.q = 1.2\nsites = 10\npartitions = [10, 3, 3]\neps = [0.1, 0.2, 0.3]\n",
        )
        .unwrap_err()
        .to_string();
        assert!(err.contains("0 <= q < 1"));
        assert!(err.contains("duplicates"));
        assert!(err.contains("start at 0"));
        assert!(err.lines().count() >= 4, "{err}");
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::from_toml("sitez = 3\n").is_err());
        assert!(RunConfig::from_toml("eps = [0.0, 0.1, 0.2]\neps_max = 0.1\n").is_err());
    }

    #[test]
    fn round_trips_through_json() {
        let c = RunConfig::from_toml("metric.kind = \"flat\"\n").unwrap();
        let back: RunConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(c, back);
    }
}
