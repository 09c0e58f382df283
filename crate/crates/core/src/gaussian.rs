//! Ground state of `1/2 p^2 + 1/2 x^T K x` and its entanglement across a
//! partition, computed in closed form.
//!
//! The ground state is `psi(x) ~ exp(-x^T Omega x / 2)` with `Omega = K^(1/2)`.
//! Tracing the first `n` coordinates of a Gaussian leaves a Gaussian density
//! matrix whose spectrum factorizes into independent geometric modes. With
//! `Omega = [[A, B], [B^T, C]]`,
//!
//! ```text
//! beta = 1/2 B^T A^-1 B,   gamma = C - beta,   lambda_i = eig(gamma^-1 beta)
//! xi_i = lambda_i / (1 + sqrt(1 - lambda_i^2))
//! S(xi) = -ln(1 - xi) - xi/(1 - xi) ln xi
//! ```

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{assemble, LatticeConfig};
use crate::metric::{degeneracy, MetricSpec};

/// Width of the window near `lambda = 0` and `lambda = 1` inside which
/// round-off is clamped instead of reported.
pub const LAMBDA_CLAMP_WINDOW: f64 = 1e-12;
const LAMBDA_CEILING: f64 = 1.0 - 1e-15;

pub fn sqrt_spd(k: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    Ok(spd_eigen_sqrt(k)?.0)
}

// Omega and its eigenvalues.
fn spd_eigen_sqrt(k: &DMatrix<f64>) -> Result<(DMatrix<f64>, DVector<f64>)> {
    if !k.is_square() {
        return Err(Error::NotSpd(f64::NAN));
    }
    let eig = k.clone().symmetric_eigen();
    let min = eig.eigenvalues.min();
    if !(min > 0.0) {
        return Err(Error::NotSpd(min));
    }
    let roots = eig.eigenvalues.map(f64::sqrt);
    let u = &eig.eigenvectors;
    let mut scaled = u.clone();
    for (mut col, &w) in scaled.column_iter_mut().zip(roots.iter()) {
        col *= w;
    }
    let omega = &scaled * u.transpose();
    // symmetric by construction up to round-off in the product
    let omega = (&omega + omega.transpose()) * 0.5;
    Ok((omega, roots))
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub omega: DMatrix<f64>,
    /// `1/2 tr Omega` in lattice units.
    pub energy: f64,
}

impl GroundState {
    pub fn from_coupling(k: &DMatrix<f64>) -> Result<Self> {
        let (omega, roots) = spd_eigen_sqrt(k)?;
        // sum the normal-mode frequencies rather than the diagonal of Omega
        let energy = 0.5 * roots.iter().sum::<f64>();
        Ok(Self { omega, energy })
    }

    pub fn size(&self) -> usize {
        self.omega.nrows()
    }
}

pub fn ground_energy(gs: &GroundState) -> f64 {
    0.5 * gs.omega.trace()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedSpectrum {
    pub lambdas: Vec<f64>,
    pub xis: Vec<f64>,
    pub mode_entropies: Vec<f64>,
    pub total: f64,
}

/// Spectrum of the state left after tracing out sites `1..=n`.
pub fn reduced_lambdas(gs: &GroundState, n: usize) -> Result<ReducedSpectrum> {
    let size = gs.size();
    if n == 0 || n >= size {
        return Err(Error::Reduction(format!("partition n = {n} must satisfy 1 <= n < {size}")));
    }
    let om = &gs.omega;
    let a = om.view((0, 0), (n, n)).into_owned();
    let b = om.view((0, n), (n, size - n)).into_owned();
    let c = om.view((n, n), (size - n, size - n)).into_owned();

    let chol_a = a
        .cholesky()
        .ok_or_else(|| Error::Reduction("traced block A is singular or indefinite".into()))?;
    // beta = 1/2 G^T G with G = L_A^-1 B
    let g = chol_a
        .l()
        .solve_lower_triangular(&b)
        .ok_or_else(|| Error::Reduction("traced block A is singular".into()))?;
    let beta = g.tr_mul(&g) * 0.5;
    let gamma = &c - &beta;
    let chol_gamma = gamma
        .cholesky()
        .ok_or_else(|| Error::Reduction("gamma = C - beta is not positive definite".into()))?;
    // gamma^-1 beta is similar to 1/2 P P^T with P = L_gamma^-1 G^T, whose
    // nonzero spectrum equals that of the (smaller) 1/2 P^T P.
    let p = chol_gamma
        .l()
        .solve_lower_triangular(&g.transpose())
        .ok_or_else(|| Error::Reduction("gamma is singular".into()))?;
    let small = if p.ncols() <= p.nrows() { p.tr_mul(&p) } else { &p * p.transpose() } * 0.5;
    let raw = small.symmetric_eigenvalues();

    let mut lambdas: Vec<f64> = Vec::with_capacity(raw.len());
    for &lam in raw.iter() {
        lambdas.push(clamp_lambda(lam)?);
    }
    lambdas.sort_by(|x, y| y.total_cmp(x));
    let xis: Vec<f64> = lambdas.iter().map(|&l| l / (1.0 + (1.0 - l * l).sqrt())).collect();
    let mode_entropies = xis.iter().map(|&x| mode_entropy(x)).collect::<Result<Vec<_>>>()?;
    let total = mode_entropies.iter().sum();
    Ok(ReducedSpectrum { lambdas, xis, mode_entropies, total })
}

fn clamp_lambda(lam: f64) -> Result<f64> {
    if lam.is_nan() {
        return Err(Error::SpectralDomain(lam));
    }
    if lam < 0.0 {
        return if lam > -LAMBDA_CLAMP_WINDOW { Ok(0.0) } else { Err(Error::SpectralDomain(lam)) };
    }
    if lam > LAMBDA_CEILING {
        return if lam < 1.0 + LAMBDA_CLAMP_WINDOW {
            Ok(LAMBDA_CEILING)
        } else {
            Err(Error::SpectralDomain(lam))
        };
    }
    Ok(lam)
}

/// Von Neumann entropy of one geometric mode with ratio `xi`.
pub fn mode_entropy(xi: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&xi) {
        return Err(Error::Domain(format!("mode parameter xi = {xi} outside [0, 1)")));
    }
    if xi == 0.0 {
        return Ok(0.0);
    }
    Ok(-(-xi).ln_1p() - xi / (1.0 - xi) * xi.ln())
}

/// Entanglement entropy of the ground state of `K` across the cut after site `n`.
pub fn partition_entropy(k: &DMatrix<f64>, n: usize) -> Result<f64> {
    let gs = GroundState::from_coupling(k)?;
    Ok(reduced_lambdas(&gs, n)?.total)
}

/// Parameters of the degeneracy-weighted sum over angular channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelSumParams {
    pub l_max: u32,
    pub tol: f64,
}

impl Default for ChannelSumParams {
    fn default() -> Self {
        Self { l_max: 400, tol: 1e-8 }
    }
}

impl ChannelSumParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol >= 0.0 && self.tol.is_finite()) {
            return Err(Error::Config(format!("tol must be finite and >= 0, got {}", self.tol)));
        }
        if self.l_max == 0 && self.tol == 0.0 {
            return Err(Error::Config("need l_max >= 1 or tol > 0".into()));
        }
        Ok(())
    }
}

/// Consecutive sub-tolerance channels required to stop the sum.
pub const QUIET_CHANNELS: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    LMax,
}

/// Tracks the stopping rule `g(l) |term| <= tol |partial|` over several
/// running sums at once.
#[derive(Debug, Clone)]
pub(crate) struct ConvergenceTracker {
    tol: f64,
    quiet: u32,
}

impl ConvergenceTracker {
    pub(crate) fn new(tol: f64) -> Self {
        Self { tol, quiet: 0 }
    }

    /// `pairs` holds (weighted term, partial sum including the term).
    pub(crate) fn observe(&mut self, pairs: impl IntoIterator<Item = (f64, f64)>) -> bool {
        let small = pairs.into_iter().all(|(term, partial)| term.abs() <= self.tol * partial.abs());
        self.quiet = if small { self.quiet + 1 } else { 0 };
        self.quiet >= QUIET_CHANNELS
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSum {
    pub total: f64,
    /// Highest channel included in the sum.
    pub last_l: u32,
    pub termination: Termination,
    /// `g(l) S_l` of the last channel included.
    pub last_term: f64,
    /// Channels past the first few whose entropy rose relative to `l - 1`.
    pub nonmonotone_channels: Vec<u32>,
    pub warning: Option<String>,
}

/// Source of per-channel coupling matrices.
pub trait ChannelSource: Sync {
    fn dim(&self) -> u32;
    fn coupling(&self, l: u32, eps: f64) -> Result<DMatrix<f64>>;
}

/// Channels of the perturbed lattice Hamiltonian for one background.
#[derive(Debug, Clone)]
pub struct LatticeChannels {
    pub metric: MetricSpec,
    pub sites: usize,
    pub partition: usize,
}

impl ChannelSource for LatticeChannels {
    fn dim(&self) -> u32 {
        self.metric.dim()
    }

    fn coupling(&self, l: u32, eps: f64) -> Result<DMatrix<f64>> {
        let cfg = LatticeConfig::new(self.sites, self.partition, l, self.metric.dim())?.with_eps(eps);
        assemble(&self.metric, &cfg)?.at(eps)
    }
}

/// Wraps a closure as a [`ChannelSource`].
pub struct FnChannels<F> {
    pub dim: u32,
    pub f: F,
}

impl<F> ChannelSource for FnChannels<F>
where
    F: Fn(u32, f64) -> Result<DMatrix<f64>> + Sync,
{
    fn dim(&self) -> u32 {
        self.dim
    }

    fn coupling(&self, l: u32, eps: f64) -> Result<DMatrix<f64>> {
        (self.f)(l, eps)
    }
}

/// Channels are evaluated this many at a time in parallel and then reduced
/// in ascending `l`, so results do not depend on the thread count.
pub(crate) fn chunk_len() -> usize {
    (rayon::current_num_threads() * 4).max(8)
}

// Channels below this index are exempt from the monotone-decay diagnostic.
const MONOTONE_FROM: u32 = 4;

/// `S = sum_l g(l, D) S_l` across the cut after site `n`.
pub fn entanglement_entropy(
    source: &dyn ChannelSource,
    n: usize,
    eps: f64,
    params: &ChannelSumParams,
) -> Result<ChannelSum> {
    let mut sums = multi_partition_entropy(&|l| source.coupling(l, eps), source.dim(), &[n], params)?;
    Ok(sums.pop().expect("one partition"))
}

/// Same as [`entanglement_entropy`] for several cuts of a single
/// n-independent family of couplings, sharing each `Omega_l` between cuts.
pub fn multi_partition_entropy(
    coupling: &(dyn Fn(u32) -> Result<DMatrix<f64>> + Sync),
    dim: u32,
    partitions: &[usize],
    params: &ChannelSumParams,
) -> Result<Vec<ChannelSum>> {
    params.validate()?;
    struct Running {
        total: f64,
        last_l: u32,
        last_term: f64,
        prev: Option<f64>,
        nonmono: Vec<u32>,
        tracker: ConvergenceTracker,
        done: Option<Termination>,
    }
    let mut state: Vec<Running> = partitions
        .iter()
        .map(|_| Running {
            total: 0.0,
            last_l: 0,
            last_term: 0.0,
            prev: None,
            nonmono: Vec::new(),
            tracker: ConvergenceTracker::new(params.tol),
            done: None,
        })
        .collect();

    let mut next_l: u32 = 0;
    while next_l <= params.l_max && state.iter().any(|s| s.done.is_none()) {
        let end = (next_l as u64 + chunk_len() as u64).min(params.l_max as u64 + 1) as u32;
        let active: Vec<(usize, usize)> = partitions
            .iter()
            .copied()
            .enumerate()
            .filter(|(i, _)| state[*i].done.is_none())
            .collect();
        let chunk: Vec<Result<Vec<(usize, f64)>>> = (next_l..end)
            .into_par_iter()
            .map(|l| {
                let gs = GroundState::from_coupling(&coupling(l)?)?;
                active.iter().map(|&(i, n)| Ok((i, reduced_lambdas(&gs, n)?.total))).collect()
            })
            .collect();
        for (l, per_channel) in (next_l..end).zip(chunk) {
            let g = degeneracy(l, dim) as f64;
            for (i, s_l) in per_channel? {
                let st = &mut state[i];
                if st.done.is_some() {
                    continue;
                }
                let term = g * s_l;
                st.total += term;
                st.last_l = l;
                st.last_term = term;
                if let Some(prev) = st.prev {
                    if l >= MONOTONE_FROM && s_l > prev {
                        st.nonmono.push(l);
                    }
                }
                st.prev = Some(s_l);
                if st.tracker.observe([(term, st.total)]) {
                    st.done = Some(Termination::Converged);
                }
            }
        }
        next_l = end;
    }

    Ok(state
        .into_iter()
        .map(|st| {
            let termination = st.done.unwrap_or(Termination::LMax);
            if !st.nonmono.is_empty() {
                log::warn!("channel entropy increased with l at {:?}", st.nonmono);
            }
            let warning = (termination == Termination::LMax && params.tol > 0.0).then(|| {
                format!(
                    "channel sum stopped at l_max = {} before reaching tol = {:e} (last term {:e})",
                    params.l_max, params.tol, st.last_term
                )
            });
            ChannelSum {
                total: st.total,
                last_l: st.last_l,
                termination,
                last_term: st.last_term,
                nonmonotone_channels: st.nonmono,
                warning,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_k0;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd(size: usize, rng: &mut impl Rng) -> DMatrix<f64> {
        let m = DMatrix::from_fn(size, size, |_, _| rng.gen_range(-1.0..1.0));
        &m * m.transpose() + DMatrix::identity(size, size) * 0.5
    }

    #[test]
    fn sqrt_examples() {
        let id = DMatrix::<f64>::identity(5, 5);
        assert!((sqrt_spd(&id).unwrap() - &id).amax() < 1e-15);
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 9.0]));
        let root = sqrt_spd(&d).unwrap();
        assert!((root - DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 3.0]))).amax() < 1e-15);
    }

    #[test]
    fn sqrt_rejects_indefinite() {
        let k = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        match sqrt_spd(&k) {
            Err(Error::NotSpd(e)) => assert_relative_eq!(e, -1.0, epsilon = 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn energy_examples() {
        let gs = GroundState::from_coupling(&DMatrix::identity(10, 10)).unwrap();
        assert_relative_eq!(gs.energy, 5.0, max_relative = 1e-14);
        assert_relative_eq!(ground_energy(&gs), 5.0, max_relative = 1e-14);
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 4.0]));
        assert_relative_eq!(ground_energy(&GroundState::from_coupling(&d).unwrap()), 1.5);
    }

    // Roots of the characteristic polynomial of a 3x3 symmetric matrix by the
    // trigonometric closed form.
    fn cubic_eigenvalues(m: &DMatrix<f64>) -> [f64; 3] {
        let q = m.trace() / 3.0;
        let p1 = m[(0, 1)].powi(2) + m[(0, 2)].powi(2) + m[(1, 2)].powi(2);
        let p2 = (m[(0, 0)] - q).powi(2) + (m[(1, 1)] - q).powi(2) + (m[(2, 2)] - q).powi(2) + 2.0 * p1;
        let p = (p2 / 6.0).sqrt();
        let b = (m - DMatrix::identity(3, 3) * q) / p;
        let r = (b.determinant() / 2.0).clamp(-1.0, 1.0);
        let phi = r.acos() / 3.0;
        let e1 = q + 2.0 * p * phi.cos();
        let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
        [e1, 3.0 * q - e1 - e3, e3]
    }

    #[test]
    fn chain_energy_matches_characteristic_roots() {
        let k = build_k0(&LatticeConfig::new(3, 1, 0, 2).unwrap());
        let want: f64 = 0.5 * cubic_eigenvalues(&k).iter().map(|e| e.sqrt()).sum::<f64>();
        let gs = GroundState::from_coupling(&k).unwrap();
        assert_relative_eq!(gs.energy, want, max_relative = 1e-12);
        assert_relative_eq!(ground_energy(&gs), want, max_relative = 1e-12);
    }

    #[test]
    fn mode_entropy_values() {
        assert_eq!(mode_entropy(0.0).unwrap(), 0.0);
        assert_relative_eq!(mode_entropy(0.5).unwrap(), 2.0 * 2f64.ln(), max_relative = 1e-15);
        assert!(mode_entropy(1.0).is_err());
        assert!(mode_entropy(-0.1).is_err());
    }

    #[test]
    fn mode_entropy_matches_geometric_series() {
        for xi in [0.9f64, 0.3, 1e-6] {
            let mut s = 0.0;
            let mut k = 0;
            loop {
                let p: f64 = (1.0 - xi) * xi.powi(k);
                if p < 1e-14 {
                    break;
                }
                s -= p * p.ln();
                k += 1;
            }
            assert_relative_eq!(mode_entropy(xi).unwrap(), s, max_relative = 1e-9);
        }
    }

    #[test]
    fn uncorrelated_blocks_have_no_entropy() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut k = DMatrix::zeros(5, 5);
        k.view_mut((0, 0), (2, 2)).copy_from(&random_spd(2, &mut rng));
        k.view_mut((2, 2), (3, 3)).copy_from(&random_spd(3, &mut rng));
        let gs = GroundState::from_coupling(&k).unwrap();
        let spec = reduced_lambdas(&gs, 2).unwrap();
        assert!(spec.lambdas.iter().all(|&l| l.abs() < 1e-12));
        assert!(spec.total.abs() < 1e-10);
    }

    #[test]
    fn two_oscillators_closed_form() {
        // Normal modes w+ = sqrt(k0), w- = sqrt(k0 + 2 k1); the textbook
        // result is xi = ((sqrt(w+) - sqrt(w-)) / (sqrt(w+) + sqrt(w-)))^2.
        for (k0, k1) in [(1.0, 0.5), (0.3, 2.0), (2.0, 0.01)] {
            let k = DMatrix::from_row_slice(2, 2, &[k0 + k1, -k1, -k1, k0 + k1]);
            let spec = reduced_lambdas(&GroundState::from_coupling(&k).unwrap(), 1).unwrap();
            let (wp, wm) = (f64::sqrt(k0), f64::sqrt(k0 + 2.0 * k1));
            let xi = ((wp.sqrt() - wm.sqrt()) / (wp.sqrt() + wm.sqrt())).powi(2);
            assert_relative_eq!(spec.xis[0], xi, max_relative = 1e-10);
            assert_relative_eq!(spec.total, mode_entropy(xi).unwrap(), max_relative = 1e-10);
        }
    }

    #[test]
    fn reduction_errors() {
        let gs = GroundState::from_coupling(&DMatrix::identity(3, 3)).unwrap();
        assert!(matches!(reduced_lambdas(&gs, 0), Err(Error::Reduction(_))));
        assert!(matches!(reduced_lambdas(&gs, 3), Err(Error::Reduction(_))));
        // hand-built Omega with a singular traced block
        let bad = GroundState { omega: DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 2.0]), energy: 1.0 };
        assert!(matches!(reduced_lambdas(&bad, 1), Err(Error::Reduction(_))));
    }

    #[test]
    fn lambda_clamping() {
        assert_eq!(clamp_lambda(-1e-14).unwrap(), 0.0);
        assert_eq!(clamp_lambda(1.0 + 1e-13).unwrap(), LAMBDA_CEILING);
        assert!(matches!(clamp_lambda(1.0 + 1e-9), Err(Error::SpectralDomain(_))));
        assert!(matches!(clamp_lambda(-1e-9), Err(Error::SpectralDomain(_))));
        assert_eq!(clamp_lambda(0.25).unwrap(), 0.25);
    }

    #[test]
    fn channel_sum_of_uncorrelated_channels_is_zero() {
        let src = FnChannels { dim: 2, f: |_l: u32, _eps: f64| Ok(DMatrix::identity(4, 4)) };
        let sum = entanglement_entropy(&src, 2, 0.0, &ChannelSumParams { l_max: 50, tol: 1e-8 }).unwrap();
        assert_eq!(sum.total, 0.0);
        assert_eq!(sum.termination, Termination::Converged);
        assert_eq!(sum.last_l, 2);
    }

    #[test]
    fn channel_sum_reports_l_max() {
        let src = FnChannels {
            dim: 2,
            f: |l: u32, _eps: f64| Ok(build_k0(&LatticeConfig::new(20, 10, l, 2).unwrap())),
        };
        let sum = entanglement_entropy(&src, 10, 0.0, &ChannelSumParams { l_max: 5, tol: 1e-8 }).unwrap();
        assert_eq!(sum.termination, Termination::LMax);
        assert_eq!(sum.last_l, 5);
        assert!(sum.warning.is_some());
        let direct: f64 = (0..=5)
            .map(|l| {
                let k = build_k0(&LatticeConfig::new(20, 10, l, 2).unwrap());
                degeneracy(l, 2) as f64 * partition_entropy(&k, 10).unwrap()
            })
            .sum();
        assert_relative_eq!(sum.total, direct, max_relative = 1e-12);
    }

    #[test]
    fn shared_partitions_match_individual_sums() {
        let coupling = |l: u32| Ok(build_k0(&LatticeConfig::new(30, 5, l, 2).unwrap()));
        let params = ChannelSumParams { l_max: 60, tol: 1e-6 };
        let shared = multi_partition_entropy(&coupling, 2, &[5, 12, 20], &params).unwrap();
        for (n, s) in [5usize, 12, 20].iter().zip(&shared) {
            let single = multi_partition_entropy(&coupling, 2, &[*n], &params).unwrap();
            assert_eq!(&single[0], s);
        }
    }

    #[test]
    fn complementary_cut_for_lattice_channel() {
        // Tracing 1..n or n+1..N gives the same entropy; the reversed
        // lattice turns the second into a leading-block trace.
        let k = build_k0(&LatticeConfig::new(60, 30, 3, 2).unwrap());
        let rev = DMatrix::from_fn(60, 60, |i, j| k[(59 - i, 59 - j)]);
        for n in [10, 20, 30] {
            let a = partition_entropy(&k, n).unwrap();
            let b = partition_entropy(&rev, 60 - n).unwrap();
            assert!((a - b).abs() < 1e-8, "n={n}: {a} vs {b}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn sqrt_squares_back(seed in any::<u64>(), size in 1usize..12) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let k = random_spd(size, &mut rng);
            let root = sqrt_spd(&k).unwrap();
            prop_assert!((&root - root.transpose()).amax() == 0.0);
            prop_assert!((&root * &root - &k).norm() <= 1e-10 * k.norm());
        }

        #[test]
        fn complementarity(seed in any::<u64>(), size in 2usize..10, cut in 1usize..9) {
            prop_assume!(cut < size);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let k = random_spd(size, &mut rng);
            let rev = DMatrix::from_fn(size, size, |i, j| k[(size - 1 - i, size - 1 - j)]);
            let a = partition_entropy(&k, cut).unwrap();
            let b = partition_entropy(&rev, size - cut).unwrap();
            prop_assert!((a - b).abs() < 1e-8, "{} vs {}", a, b);
        }

        #[test]
        fn scale_covariance(seed in any::<u64>(), size in 2usize..8, c in 0.01f64..100.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let k = random_spd(size, &mut rng);
            let n = size / 2;
            let g1 = GroundState::from_coupling(&k).unwrap();
            let g2 = GroundState::from_coupling(&(&k * c)).unwrap();
            let s1 = reduced_lambdas(&g1, n).unwrap();
            let s2 = reduced_lambdas(&g2, n).unwrap();
            for (a, b) in s1.lambdas.iter().zip(&s2.lambdas) {
                prop_assert!((a - b).abs() < 1e-9);
            }
            prop_assert!((s1.total - s2.total).abs() < 1e-8);
            prop_assert!((g2.energy - c.sqrt() * g1.energy).abs() < 1e-10 * g2.energy);
        }

        #[test]
        fn spectrum_stays_in_range(seed in any::<u64>(), size in 2usize..10) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let k = random_spd(size, &mut rng);
            let spec = reduced_lambdas(&GroundState::from_coupling(&k).unwrap(), size / 2).unwrap();
            for ((&l, &x), &s) in spec.lambdas.iter().zip(&spec.xis).zip(&spec.mode_entropies) {
                prop_assert!((0.0..1.0).contains(&l));
                prop_assert!((0.0..1.0).contains(&x));
                prop_assert!(s >= 0.0);
            }
            prop_assert!(spec.total.is_finite());
        }
    }
}
