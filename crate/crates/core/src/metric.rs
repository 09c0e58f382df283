//! Black-hole backgrounds in units of the outer horizon radius.
//!
//! Every background is described by a metric function `f(r)` with the
//! horizon at `r = 1`. The perturbed lattice Hamiltonian needs `f` and its
//! first three derivatives, all of which are evaluated in closed form.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sites with `1 - f` at or below this margin are rejected rather than clamped.
pub const SINGULAR_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Flat,
    Schwarzschild,
    ReissnerNordstrom,
    Custom,
}

impl MetricKind {
    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Flat => "flat",
            MetricKind::Schwarzschild => "schwarzschild",
            MetricKind::ReissnerNordstrom => "reissner_nordstrom",
            MetricKind::Custom => "custom",
        }
    }
}

/// User-supplied background. Implementations must return exact values of
/// `[f, f', f'', f''']` at `r`; sampled or interpolated tables are not
/// accepted because the perturbation coefficients differentiate them again.
pub trait MetricFunction: Send + Sync {
    fn derivatives(&self, r: f64) -> [f64; 4];
}

#[derive(Clone)]
pub struct MetricSpec {
    kind: MetricKind,
    q: f64,
    dim: u32,
    custom: Option<Arc<dyn MetricFunction>>,
}

impl fmt::Debug for MetricSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricSpec")
            .field("kind", &self.kind)
            .field("q", &self.q)
            .field("dim", &self.dim)
            .finish()
    }
}

impl MetricSpec {
    pub fn flat(dim: u32) -> Self {
        Self { kind: MetricKind::Flat, q: 0.0, dim, custom: None }
    }

    pub fn schwarzschild(dim: u32) -> Self {
        Self { kind: MetricKind::Schwarzschild, q: 0.0, dim, custom: None }
    }

    /// Charged hole with `q = Q / r_h`. Validity (`0 <= q < 1`) is checked on
    /// every evaluation so that a bad value surfaces with a descriptive error.
    pub fn reissner_nordstrom(q: f64, dim: u32) -> Self {
        Self { kind: MetricKind::ReissnerNordstrom, q, dim, custom: None }
    }

    pub fn custom(function: Arc<dyn MetricFunction>, dim: u32) -> Self {
        Self { kind: MetricKind::Custom, q: 0.0, dim, custom: Some(function) }
    }

    pub fn kind(&self) -> MetricKind {
        self.kind
    }

    pub fn charge(&self) -> f64 {
        self.q
    }

    /// Number of angular dimensions `D` (the sphere is `S^D`).
    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn has_horizon(&self) -> bool {
        self.kind != MetricKind::Flat
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidMetric("angular dimension D must be at least 1".into()));
        }
        match self.kind {
            MetricKind::ReissnerNordstrom => {
                if !(self.q.is_finite() && (0.0..1.0).contains(&self.q)) {
                    return Err(Error::InvalidMetric(format!(
                        "Reissner-Nordstrom charge ratio q = {} must satisfy 0 <= q < 1 \
                         (q >= 1 has no non-degenerate outer horizon)",
                        self.q
                    )));
                }
            }
            MetricKind::Custom => {
                let function = self
                    .custom
                    .as_ref()
                    .ok_or_else(|| Error::InvalidMetric("custom metric without evaluator".into()))?;
                let [f, df, _, _] = function.derivatives(1.0);
                if f.abs() > 1e-10 {
                    return Err(Error::InvalidMetric(format!(
                        "custom metric must have its horizon at r = 1, got f(1) = {f}"
                    )));
                }
                if df.is_nan() || df <= 0.0 {
                    return Err(Error::InvalidMetric(format!(
                        "custom metric horizon is degenerate: f'(1) = {df}"
                    )));
                }
            }
            MetricKind::Flat | MetricKind::Schwarzschild => {}
        }
        Ok(())
    }

    /// `[f, f', f'', f''']` at `r`.
    pub fn derivatives(&self, r: f64) -> Result<[f64; 4]> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Domain(format!("radius must be positive and finite, got {r}")));
        }
        self.validate()?;
        let out = match self.kind {
            MetricKind::Flat => [0.0; 4],
            MetricKind::Schwarzschild => rn_derivatives(0.0, r),
            MetricKind::ReissnerNordstrom => rn_derivatives(self.q, r),
            MetricKind::Custom => self.custom.as_ref().expect("validated").derivatives(r),
        };
        Ok(out)
    }
}

// f = 1 - (1 + q^2)/r + q^2/r^2; q = 0 is Schwarzschild.
fn rn_derivatives(q: f64, r: f64) -> [f64; 4] {
    let a = 1.0 + q * q;
    let b = q * q;
    let r2 = r * r;
    let r3 = r2 * r;
    let r4 = r3 * r;
    let r5 = r4 * r;
    [
        1.0 - a / r + b / r2,
        a / r2 - 2.0 * b / r3,
        -2.0 * a / r3 + 6.0 * b / r4,
        6.0 * a / r4 - 24.0 * b / r5,
    ]
}

/// `(f, f', f'')` at `r`.
pub fn f_eval(m: &MetricSpec, r: f64) -> Result<(f64, f64, f64)> {
    let [f, df, d2f, _] = m.derivatives(r)?;
    Ok((f, df, d2f))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HawkingTemperature {
    /// `f'(1) / 4 pi` in units of `1 / r_h`; zero when there is no horizon.
    pub value: f64,
    pub has_horizon: bool,
}

pub fn hawking_temperature(m: &MetricSpec) -> Result<HawkingTemperature> {
    if !m.has_horizon() {
        m.validate()?;
        return Ok(HawkingTemperature { value: 0.0, has_horizon: false });
    }
    let [_, df, _, _] = m.derivatives(1.0)?;
    Ok(HawkingTemperature { value: df / (4.0 * PI), has_horizon: true })
}

/// The four coefficient functions of the perturbation expansion and their
/// first radial derivatives.
///
/// ```text
/// H1 = sqrt(1-f)/r     H2 = f'/(4r)
/// H3 = f'/sqrt(1-f)    H4 = -f'^2/(4(1-f)) + f''/2
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HFactors {
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
    pub h4: f64,
    pub dh1: f64,
    pub dh2: f64,
    pub dh3: f64,
    pub dh4: f64,
}

pub fn h_factors(m: &MetricSpec, r: f64) -> Result<HFactors> {
    let [f, df, d2f, d3f] = m.derivatives(r)?;
    let s = 1.0 - f;
    if !(s > SINGULAR_MARGIN) {
        // H1 vanishes at s = 0 but its derivative, H3 and H4 all divide by s.
        return Err(Error::SingularFactor { factor: "H3", r, one_minus_f: s });
    }
    let root = s.sqrt();
    Ok(HFactors {
        h1: root / r,
        h2: df / (4.0 * r),
        h3: df / root,
        h4: -df * df / (4.0 * s) + 0.5 * d2f,
        dh1: -df / (2.0 * r * root) - root / (r * r),
        dh2: d2f / (4.0 * r) - df / (4.0 * r * r),
        dh3: d2f / root + df * df / (2.0 * s * root),
        dh4: -df * d2f / (2.0 * s) - df * df * df / (4.0 * s * s) + 0.5 * d3f,
    })
}

/// Number of real hyperspherical harmonics of degree `l` on `S^D`.
pub fn degeneracy(l: u32, dim: u32) -> u64 {
    assert!(dim >= 1, "angular dimension must be positive");
    if l == 0 {
        return 1;
    }
    if dim == 1 {
        return 2;
    }
    // (2l + D - 1) (l + D - 2)! / (l! (D - 1)!) = (2l + D - 1)/(D - 1) * C(l + D - 2, D - 2)
    let (l, d) = (l as u128, dim as u128);
    let mut binom: u128 = 1;
    for k in 1..=(d - 2) {
        binom = binom * (l + k) / k;
    }
    ((2 * l + d - 1) * binom / (d - 1)) as u64
}
