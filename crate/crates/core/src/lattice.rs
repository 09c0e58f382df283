//! Radial lattice discretization of `H(eps) = H0 + eps V1 + eps^2 V2`.
//!
//! Sites `j = 1..=N` sit at dimensionless radius `r_j = j / n`, so the
//! horizon falls on the partition boundary. With lattice spacing
//! `h = 1 / n` in horizon units, each angular channel becomes
//!
//! ```text
//! H = (1/h) [ 1/2 sum_j p_j^2 + 1/2 sigma^T K(eps) sigma ],   K(eps) = K0 + eps K1 + eps^2 K2
//! ```
//!
//! A perturbation density `g sigma'^2 + m sigma sigma' + p sigma^2` lands in
//! K as `g d d^T + (m h) sym(e_j d^T) + (p h^2) e_j e_j^T`, where `d` is the
//! lattice-unit difference stencil at site `j` (central in the bulk,
//! one-sided at the two ends).
//!
//! Expanding the first-order density
//! `(-D s + 2 r s')(D H3 s - 2 r H3 s' + 2 D r H1' s - r H3' s) / (4 r^2)
//!  + 2 L H1 s^2 / r^2` with `L = l(l + D - 1)` gives
//!
//! ```text
//! grad = -H3
//! mix  = D H3 / r + D H1' - H3' / 2
//! pot  = -D^2 H3 / (4 r^2) - D^2 H1' / (2 r) + D H3' / (4 r) + 2 L H1 / r^2
//! ```
//!
//! The second-order coefficients are read off term by term.

use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{h_factors, HFactors, MetricSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeConfig {
    /// Total number of sites `N`.
    pub sites: usize,
    /// Sites `1..=n` are traced out; the horizon sits at site `n`.
    pub partition: usize,
    pub l: u32,
    pub dim: u32,
    pub eps: f64,
}

impl LatticeConfig {
    pub fn new(sites: usize, partition: usize, l: u32, dim: u32) -> Result<Self> {
        let cfg = Self { sites, partition, l, dim, eps: 0.0 };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_eps(self, eps: f64) -> Self {
        Self { eps, ..self }
    }

    pub fn with_l(self, l: u32) -> Self {
        Self { l, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites < 2 {
            return Err(Error::InvalidLattice(format!("need at least 2 sites, got {}", self.sites)));
        }
        if self.partition == 0 || self.partition >= self.sites {
            return Err(Error::InvalidLattice(format!(
                "partition n = {} must satisfy 1 <= n < N = {}",
                self.partition, self.sites
            )));
        }
        if self.dim == 0 {
            return Err(Error::InvalidLattice("angular dimension D must be at least 1".into()));
        }
        if !self.eps.is_finite() {
            return Err(Error::InvalidLattice(format!("eps must be finite, got {}", self.eps)));
        }
        Ok(())
    }

    /// Dimensionless radius of 1-based site `j`.
    pub fn radius(&self, site: usize) -> f64 {
        site as f64 / self.partition as f64
    }

    /// Lattice spacing in horizon units.
    pub fn spacing(&self) -> f64 {
        1.0 / self.partition as f64
    }

    fn centrifugal(&self) -> f64 {
        let l = self.l as f64;
        l * (l + self.dim as f64 - 1.0)
    }
}

/// Coefficients of `grad sigma'^2 + mix sigma sigma' + pot sigma^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadCoeffs {
    pub grad: f64,
    pub mix: f64,
    pub pot: f64,
}

/// Unperturbed flat-space coupling matrix with Dirichlet ends.
pub fn build_k0(cfg: &LatticeConfig) -> DMatrix<f64> {
    let n = cfg.sites;
    let d = cfg.dim as f64;
    let cent = cfg.centrifugal();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        let j = (i + 1) as f64;
        let mut diag = cent / (j * j) + ((j + 0.5) / j).powf(d);
        if i > 0 {
            diag += ((j - 0.5) / j).powf(d);
        }
        k[(i, i)] = diag;
        if i + 1 < n {
            let off = -(j + 0.5).powf(d) / (j.powf(d / 2.0) * (j + 1.0).powf(d / 2.0));
            k[(i, i + 1)] = off;
            k[(i + 1, i)] = off;
        }
    }
    k
}

pub fn v1_coeffs(m: &MetricSpec, cfg: &LatticeConfig, r: f64) -> Result<QuadCoeffs> {
    let hf = h_factors(m, r)?;
    Ok(first_order(&hf, cfg.dim as f64, cfg.centrifugal(), r))
}

pub fn v2_coeffs(m: &MetricSpec, cfg: &LatticeConfig, r: f64) -> Result<QuadCoeffs> {
    let hf = h_factors(m, r)?;
    Ok(second_order(&hf, cfg.dim as f64, cfg.centrifugal(), r))
}

fn first_order(hf: &HFactors, d: f64, cent: f64, r: f64) -> QuadCoeffs {
    let HFactors { h1, h3, dh1, dh3, .. } = *hf;
    QuadCoeffs {
        grad: -h3,
        mix: d * h3 / r + d * dh1 - 0.5 * dh3,
        pot: -d * d * h3 / (4.0 * r * r) - d * d * dh1 / (2.0 * r)
            + d * dh3 / (4.0 * r)
            + 2.0 * cent * h1 / (r * r),
    }
}

fn second_order(hf: &HFactors, d: f64, cent: f64, r: f64) -> QuadCoeffs {
    let HFactors { h1, h2, h3, h4, dh1, dh2, dh3, dh4 } = *hf;
    let r2 = r * r;
    QuadCoeffs {
        grad: h3 * h3 + h4,
        mix: -d * h3 * h3 / r - d * h4 / r + d * h1 * dh1 - d * h3 * dh1
            + d * dh2
            + h3 * dh3
            + 0.5 * dh4,
        pot: cent * (3.0 * h1 * h1 + 2.0 * h2) / r2
            + d * d * h3 * h3 / (4.0 * r2)
            + d * d * h4 / (4.0 * r2)
            - d * d * h1 * dh1 / (2.0 * r)
            + d * d * h3 * dh1 / (2.0 * r)
            + 0.25 * d * d * dh1 * dh1
            - d * d * dh2 / (2.0 * r)
            - d * h3 * dh3 / (2.0 * r)
            - 0.25 * d * dh1 * dh3
            + dh3 * dh3 / 16.0
            - d * dh4 / (4.0 * r),
    }
}

/// First-derivative stencil at 0-based site `i` as `(index, weight)` pairs in
/// lattice units.
pub fn derivative_stencil(i: usize, sites: usize) -> [(usize, f64); 2] {
    if i == 0 {
        [(1, 1.0), (0, -1.0)]
    } else if i + 1 == sites {
        [(i, 1.0), (i - 1, -1.0)]
    } else {
        [(i + 1, 0.5), (i - 1, -0.5)]
    }
}

/// `K(eps) = K0 + eps K1 + eps^2 K2` for one angular channel.
#[derive(Debug, Clone)]
pub struct CouplingMatrix {
    cfg: LatticeConfig,
    k0: DMatrix<f64>,
    k1: DMatrix<f64>,
    k2: DMatrix<f64>,
}

impl CouplingMatrix {
    pub fn config(&self) -> &LatticeConfig {
        &self.cfg
    }

    pub fn size(&self) -> usize {
        self.cfg.sites
    }

    pub fn k0(&self) -> &DMatrix<f64> {
        &self.k0
    }

    pub fn k1(&self) -> &DMatrix<f64> {
        &self.k1
    }

    pub fn k2(&self) -> &DMatrix<f64> {
        &self.k2
    }

    pub fn at_unchecked(&self, eps: f64) -> DMatrix<f64> {
        if eps == 0.0 {
            return self.k0.clone();
        }
        let mut k = self.k0.clone();
        k += &self.k1 * eps;
        k += &self.k2 * (eps * eps);
        k
    }

    /// `K(eps)`, rejected unless positive definite.
    pub fn at(&self, eps: f64) -> Result<DMatrix<f64>> {
        let k = self.at_unchecked(eps);
        if k.clone().cholesky().is_none() {
            let min_eigenvalue = k.clone().symmetric_eigenvalues().min();
            return Err(Error::NotPositiveDefinite { eps, min_eigenvalue });
        }
        Ok(k)
    }

    /// Checks positivity of `K(eps)` for every value in `eps`.
    pub fn check_range(&self, eps: &[f64]) -> Result<()> {
        for &e in eps {
            self.at(e)?;
        }
        Ok(())
    }

    /// Writes the nonzero entries of K0, K1 and K2 as `matrix,row,col,value`
    /// with 1-based indices.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "matrix,row,col,value")?;
        for (name, m) in [("K0", &self.k0), ("K1", &self.k1), ("K2", &self.k2)] {
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    let v = m[(i, j)];
                    if v != 0.0 {
                        writeln!(out, "{name},{},{},{:.16e}", i + 1, j + 1, v)?;
                    }
                }
            }
        }
        Ok(())
    }
}

fn add_density(k: &mut DMatrix<f64>, i: usize, c: &QuadCoeffs, h: f64) {
    let stencil = derivative_stencil(i, k.nrows());
    for &(a, wa) in &stencil {
        for &(b, wb) in &stencil {
            k[(a, b)] += c.grad * wa * wb;
        }
        // sigma_i * sigma' split evenly over (i, a) and (a, i)
        let half = 0.5 * c.mix * h * wa;
        k[(i, a)] += half;
        k[(a, i)] += half;
    }
    k[(i, i)] += c.pot * h * h;
}

/// Builds K0, K1, K2 for `cfg` and checks that `K(cfg.eps)` is positive
/// definite.
pub fn assemble(m: &MetricSpec, cfg: &LatticeConfig) -> Result<CouplingMatrix> {
    cfg.validate()?;
    m.validate()?;
    if m.dim() != cfg.dim {
        return Err(Error::InvalidLattice(format!(
            "metric dimension D = {} does not match lattice dimension {}",
            m.dim(),
            cfg.dim
        )));
    }
    let n = cfg.sites;
    let h = cfg.spacing();
    let d = cfg.dim as f64;
    let cent = cfg.centrifugal();
    let mut k1 = DMatrix::zeros(n, n);
    let mut k2 = DMatrix::zeros(n, n);
    for i in 0..n {
        let r = cfg.radius(i + 1);
        let hf = h_factors(m, r)?;
        add_density(&mut k1, i, &first_order(&hf, d, cent, r), h);
        add_density(&mut k2, i, &second_order(&hf, d, cent, r), h);
    }
    let out = CouplingMatrix { cfg: *cfg, k0: build_k0(cfg), k1, k2 };
    out.at(cfg.eps)?;
    Ok(out)
}

/// Perturbation order selector for [`perturbation_quadrature`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    First,
    Second,
}

/// Direct lattice sum of the unexpanded perturbation density for the field
/// configuration `sigma`, in the normalization of `sigma^T K sigma`.
///
/// This walks the radial grid evaluating the densities exactly as written
/// (product form at first order, term by term at second order) with
/// differenced `sigma'`, and never touches the matrix stencil.
pub fn perturbation_quadrature(
    m: &MetricSpec,
    cfg: &LatticeConfig,
    sigma: &[f64],
    order: Order,
) -> Result<f64> {
    cfg.validate()?;
    if sigma.len() != cfg.sites {
        return Err(Error::InvalidLattice(format!(
            "field has {} entries, lattice has {} sites",
            sigma.len(),
            cfg.sites
        )));
    }
    let n = cfg.sites;
    let h = cfg.spacing();
    let d = cfg.dim as f64;
    let cent = cfg.centrifugal();
    let mut total = 0.0;
    for i in 0..n {
        let r = cfg.radius(i + 1);
        let HFactors { h1, h2, h3, h4, dh1, dh2, dh3, dh4 } = h_factors(m, r)?;
        let s = sigma[i];
        let lattice_diff = if i == 0 {
            sigma[1] - sigma[0]
        } else if i + 1 == n {
            sigma[i] - sigma[i - 1]
        } else {
            0.5 * (sigma[i + 1] - sigma[i - 1])
        };
        let ds = lattice_diff / h;
        let density = match order {
            Order::First => {
                (-d * s + 2.0 * r * ds)
                    * (d * h3 * s - 2.0 * r * h3 * ds + 2.0 * d * r * dh1 * s - r * dh3 * s)
                    / (4.0 * r * r)
                    + 2.0 * cent * h1 * s * s / (r * r)
            }
            Order::Second => {
                let r2 = r * r;
                (h3 * h3 + h4) * ds * ds
                    + (-d * h3 * h3 / r - d * h4 / r + d * h1 * dh1 - d * h3 * dh1
                        + d * dh2
                        + h3 * dh3
                        + 0.5 * dh4)
                        * ds
                        * s
                    + (cent * (3.0 * h1 * h1 + 2.0 * h2) / r2
                        + d * d * h3 * h3 / (4.0 * r2)
                        + d * d * h4 / (4.0 * r2)
                        - d * d * h1 * dh1 / (2.0 * r)
                        + d * d * h3 * dh1 / (2.0 * r)
                        + 0.25 * d * d * dh1 * dh1
                        - d * d * dh2 / (2.0 * r)
                        - d * h3 * dh3 / (2.0 * r)
                        - 0.25 * d * dh1 * dh3
                        + dh3 * dh3 / 16.0
                        - d * dh4 / (4.0 * r))
                        * s
                        * s
            }
        };
        // measure h, and one more h to undo the 1/h pulled out of H
        total += h * h * density;
    }
    Ok(total)
}
