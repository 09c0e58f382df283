//! Brute-force reference for small Gaussian ground states.
//!
//! The ground-state wavefunction is sampled on a uniform grid, the traced
//! axes are summed out numerically and the entropy is read off the spectrum
//! of the discretized reduced density matrix. Nothing here reuses the
//! closed-form reduction in [`crate::gaussian`]; `Omega = K^{1/2}` comes from
//! a local Jacobi solver.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_OSCILLATORS: usize = 4;
/// Largest tolerated deviation of the discretized norm from 1.
pub const NORM_TOLERANCE: f64 = 1e-6;
/// Density-matrix eigenvalues above `-DISCARD_BELOW` are clipped to zero.
pub const DISCARD_BELOW: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridOracleConfig {
    pub grid_points: usize,
    /// Half-width of the grid in units of the widest ground-state width.
    pub halfwidth: f64,
}

impl Default for GridOracleConfig {
    fn default() -> Self {
        Self { grid_points: 64, halfwidth: 6.0 }
    }
}

impl GridOracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 2 || !self.grid_points.is_multiple_of(2) {
            return Err(Error::Config(format!("grid_points must be even and >= 2, got {}", self.grid_points)));
        }
        if !(self.halfwidth >= 5.0) || !self.halfwidth.is_finite() {
            return Err(Error::Config(format!("halfwidth must be >= 5, got {}", self.halfwidth)));
        }
        Ok(())
    }
}

/// Cyclic Jacobi rotations; returns eigenvalues and column eigenvectors.
#[allow(clippy::needless_range_loop)]
fn jacobi_eigen(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut a = a.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(i == j)).collect()).collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j].powi(2)).sum();
        let scale: f64 = (0..n).map(|i| a[i][i].powi(2)).sum();
        if off <= 1e-30 * scale.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i][i]).collect(), v)
}

/// `Omega = K^{1/2}` and its eigenvalues.
fn omega_of(k: &DMatrix<f64>) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let n = k.nrows();
    let rows: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| 0.5 * (k[(i, j)] + k[(j, i)])).collect()).collect();
    let (vals, vecs) = jacobi_eigen(&rows);
    if let Some(&bad) = vals.iter().find(|&&w| !(w > 0.0)) {
        return Err(Error::NotSpd(bad));
    }
    let roots: Vec<f64> = vals.iter().map(|w| w.sqrt()).collect();
    let omega = (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|m| vecs[i][m] * roots[m] * vecs[j][m]).sum()).collect())
        .collect();
    Ok((omega, roots))
}

/// Eigenvalues of the discretized reduced density matrix of the first `n`
/// oscillators' complement, sorted descending; they sum to one up to the
/// quadrature error.
pub fn brute_force_spectrum(k: &DMatrix<f64>, n: usize, cfg: &GridOracleConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let size = k.nrows();
    if k.ncols() != size || size == 0 || size > MAX_OSCILLATORS {
        return Err(Error::Domain(format!("oracle takes a square matrix of size 1..={MAX_OSCILLATORS}, got {}x{}", k.nrows(), k.ncols())));
    }
    if n == 0 || n >= size {
        return Err(Error::Domain(format!("cut {n} must lie strictly inside 0..{size}")));
    }
    let (omega, roots) = omega_of(k)?;
    let det: f64 = roots.iter().product();
    let widest = (0.5 / roots.iter().cloned().fold(f64::INFINITY, f64::min)).sqrt();
    let g = cfg.grid_points;
    let half = cfg.halfwidth * widest;
    let step = 2.0 * half / g as f64;
    let axis: Vec<f64> = (0..g).map(|i| -half + (i as f64 + 0.5) * step).collect();
    let norm_const = (det / std::f64::consts::PI.powi(size as i32)).powf(0.25);

    // psi as a (traced grid) x (kept grid) matrix, each scaled by sqrt(cell)
    let traced_len = g.pow(n as u32);
    let kept_len = g.pow((size - n) as u32);
    let weight = norm_const * step.powf(size as f64 / 2.0);
    let mut x = vec![0.0; size];
    let mut psi = DMatrix::<f64>::zeros(traced_len, kept_len);
    for t in 0..traced_len {
        for kk in 0..kept_len {
            let (mut a, mut b) = (t, kk);
            for (i, xi) in x.iter_mut().enumerate() {
                if i < n {
                    *xi = axis[a % g];
                    a /= g;
                } else {
                    *xi = axis[b % g];
                    b /= g;
                }
            }
            let mut quad = 0.0;
            for i in 0..size {
                let row: f64 = (0..size).map(|j| omega[i][j] * x[j]).sum();
                quad += x[i] * row;
            }
            psi[(t, kk)] = weight * (-0.5 * quad).exp();
        }
    }
    let norm: f64 = psi.iter().map(|v| v * v).sum();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::GridTooCoarse((norm - 1.0).abs()));
    }
    // rho and its complement-side partner share their nonzero spectrum
    let gram = if traced_len <= kept_len { &psi * psi.transpose() } else { psi.transpose() * &psi };
    let mut p: Vec<f64> = gram.symmetric_eigenvalues().iter().cloned().collect();
    for v in p.iter_mut() {
        if *v < 0.0 && *v > -DISCARD_BELOW {
            *v = 0.0;
        }
    }
    if let Some(&bad) = p.iter().find(|&&v| v < 0.0) {
        return Err(Error::SpectralDomain(bad));
    }
    p.sort_by(|a, b| b.total_cmp(a));
    Ok(p)
}

/// Von Neumann entropy `-sum p ln p` of the grid-sampled reduced state.
pub fn brute_force_entropy(k: &DMatrix<f64>, n: usize, cfg: &GridOracleConfig) -> Result<f64> {
    let p = brute_force_spectrum(k, n, cfg)?;
    Ok(p.iter().filter(|&&v| v > 0.0).map(|&v| -v * v.ln()).sum())
}
