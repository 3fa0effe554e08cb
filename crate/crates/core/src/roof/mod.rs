//! Fidelity of separability of mixed states through its convex-roof form
//! `F_s(rho) = max sum_i p_i F_s(psi_i)`.
//!
//! Every decomposition of `rho` is `Psi = B V` with `B` the eigen factor of
//! `rho` (columns `sqrt(lambda_l)|lambda_l>`) and `V` an `r x s` isometry; the
//! columns of `Psi` are `sqrt(p_i)|psi_i>`. The search alternates two exact
//! maximisations of `Re Tr(Psi^dagger Phi)`, where `Phi` holds the columns
//! `sqrt(q_i)|phi_i>` of a separable ensemble:
//!
//! * with `Phi` fixed, `V` is the isometric polar factor of `B^dagger Phi`;
//! * with `Psi` fixed, each `phi_i` is the closest product vector of `psi_i`
//!   and `q_i` is proportional to `p_i F_s(psi_i)`.
//!
//! After the second step the squared overlap equals `sum_i p_i F_s(psi_i)`, so
//! the recorded objective never decreases.

mod convex_set;
mod engine;
mod generalized;

pub use convex_set::{convex_set_fidelity, ConvexSetResult, ConvexSetSpec};
pub use generalized::{solve_generalized_roof, GeneralizedRoofResult, RoofFunction};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometric::{self, fs_pure_bipartite, fs_pure_multipartite, ClosestProductResult};
use crate::linalg::{inner, polar_isometry, ComplexMatrix};
use crate::state::{DensityMatrix, Decomposition, ProductVector, SeparableEnsemble};

use engine::{SeeSaw, Trajectory};

pub const DEFAULT_RESTARTS: usize = 8;
pub const DEFAULT_TOL: f64 = 1e-14;
pub const DEFAULT_MAX_ITER: usize = 20000;
/// Iterations given to every restart before only the best one continues.
pub const SCREEN_ITER: usize = 1000;
/// Restarts per element for the first multipartite closest-product search;
/// later iterations warm-start from the previous factors.
pub const INNER_RESTARTS: usize = 4;

#[derive(Debug, Clone)]
pub struct RoofOptions {
    /// Number of decomposition elements; `None` means `d^2`.
    pub s: Option<usize>,
    pub restarts: usize,
    pub seed: u64,
    /// Stop once an iteration raises the objective by less than this.
    pub tol: f64,
    /// Iteration cap for the winning restart; the others stop after
    /// [`SCREEN_ITER`].
    pub max_iter: usize,
}

impl Default for RoofOptions {
    fn default() -> Self {
        Self {
            s: None,
            restarts: DEFAULT_RESTARTS,
            seed: 0,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

impl RoofOptions {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct RoofResult {
    pub f_s: f64,
    /// `1 - f_s`.
    pub e_g: f64,
    pub decomposition: Decomposition,
    /// Closest separable state, element `i` paired with `decomposition` element `i`.
    pub ensemble: SeparableEnsemble,
    /// `F_s(psi_i)` for each decomposition element.
    pub element_fidelities: Vec<f64>,
    pub stationarity_residual: f64,
    /// Objective after each iteration of the winning restart.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Index of the winning restart.
    pub restart: usize,
    pub seed: u64,
}

/// Element count used when none is requested.
pub fn default_size(rho: &DensityMatrix) -> usize {
    rho.dim() * rho.dim()
}

/// Maximises `sum_i p_i F_s(psi_i)` over decompositions of `rho` with
/// `options.s` elements.
pub fn solve_roof(rho: &DensityMatrix, options: &RoofOptions) -> Result<RoofResult> {
    let b = rho.spectral_factor()?;
    let s = options.s.unwrap_or_else(|| default_size(rho));
    if s < b.cols() {
        return Err(Error::InvalidArgument(format!(
            "decomposition size {s} is below rank {}",
            b.cols()
        )));
    }
    if options.restarts == 0 {
        return Err(Error::InvalidArgument("restarts must be >= 1".into()));
    }
    let engine = SeeSaw::new(rho.dims(), &b, s);
    let screen = options.max_iter.min(SCREEN_ITER);
    let runs: Vec<Trajectory> = (0..options.restarts)
        .into_par_iter()
        .map(|i| engine.run_from_random(options.seed, i as u64, options.tol, screen))
        .collect::<Result<_>>()?;
    let best = best_index(runs.iter().map(|r| r.objective()));
    let mut run = runs.into_iter().nth(best).expect("at least one restart");
    if !run.converged {
        let more = options.max_iter - run.iterations;
        run = engine.resume(run, options.seed, best as u64, options.tol, more)?;
    }
    finalize(rho, run, best, options.seed)
}

/// Index of the largest value; the earliest index wins ties.
pub(crate) fn best_index(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

fn finalize(rho: &DensityMatrix, run: Trajectory, restart: usize, seed: u64) -> Result<RoofResult> {
    let dims = rho.dims().to_vec();
    let vectors: Vec<Vec<Complex64>> = (0..run.psi.cols()).map(|j| run.psi.column(j)).collect();
    let mut kept_factors = Vec::new();
    for (j, v) in vectors.iter().enumerate() {
        if v.iter().map(|z| z.norm_sqr()).sum::<f64>() >= crate::state::PRUNE_WEIGHT {
            kept_factors.push(run.factors[j].clone());
        }
    }
    let decomposition = Decomposition::from_unnormalized(&dims, &vectors)?;
    let products: Vec<ClosestProductResult> = decomposition
        .states()
        .par_iter()
        .zip(kept_factors.par_iter())
        .enumerate()
        .map(|(i, (psi, warm))| {
            if dims.len() == 2 {
                fs_pure_bipartite(psi)
            } else {
                let warm = geometric::fs_pure_warm(psi, &ProductVector::new(warm.clone())?)?;
                let cold = fs_pure_multipartite(
                    psi,
                    geometric::default_restarts(dims.len()),
                    seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
                )?;
                Ok(if cold.f_s > warm.f_s { cold } else { warm })
            }
        })
        .collect::<Result<_>>()?;
    let ensemble = closest_separable_with(&decomposition, &products)?;
    let element_fidelities: Vec<f64> = products.iter().map(|p| p.f_s).collect();
    let f_s = decomposition
        .weights()
        .iter()
        .zip(&element_fidelities)
        .map(|(p, f)| p * f)
        .sum::<f64>()
        .min(1.0);
    let stationarity_residual = stationarity_residual(&decomposition, ensemble.vectors())?;
    Ok(RoofResult {
        f_s,
        e_g: 1.0 - f_s,
        decomposition,
        ensemble,
        element_fidelities,
        stationarity_residual,
        objective_trace: run.trace,
        iterations: run.iterations,
        converged: run.converged,
        restart,
        seed,
    })
}

/// Closest separable state built from a decomposition: each `psi_i` is
/// paired with its closest product vector and weighted by
/// `q_i = p_i F_s(psi_i) / sum_k p_k F_s(psi_k)`. This is the closest
/// separable state exactly when the decomposition is optimal.
pub fn closest_separable_from(decomposition: &Decomposition) -> Result<SeparableEnsemble> {
    let parties = decomposition.dims().len();
    let products: Vec<ClosestProductResult> = decomposition
        .states()
        .iter()
        .map(|psi| geometric::fs_pure(psi, geometric::default_restarts(parties), 0))
        .collect::<Result<_>>()?;
    closest_separable_with(decomposition, &products)
}

/// As [`closest_separable_from`] with the closest products already known.
pub fn closest_separable_with(
    decomposition: &Decomposition,
    products: &[ClosestProductResult],
) -> Result<SeparableEnsemble> {
    if decomposition.is_empty() {
        return Err(Error::InvalidArgument("empty decomposition".into()));
    }
    if products.len() != decomposition.len() {
        return Err(Error::Dimension(format!(
            "{} closest products for {} elements",
            products.len(),
            decomposition.len()
        )));
    }
    let raw: Vec<f64> = decomposition
        .weights()
        .iter()
        .zip(products)
        .map(|(p, r)| p * r.f_s)
        .collect();
    let total: f64 = raw.iter().sum();
    let weights = raw.iter().map(|w| w / total).collect();
    SeparableEnsemble::new(weights, products.iter().map(|r| r.product.clone()).collect())
}

/// Decomposition of `rho` aligned with a separable ensemble: the polar factor
/// of `B^dagger Phi` maps the eigen-purification of `rho` onto the ensemble's
/// purification, as in Uhlmann's theorem. When `sigma` is a closest separable
/// state the result is an optimal decomposition.
pub fn decomposition_from_ensemble(rho: &DensityMatrix, ensemble: &SeparableEnsemble) -> Result<Decomposition> {
    if ensemble.dims() != rho.dims() {
        return Err(Error::Dimension("ensemble and state have different dims".into()));
    }
    let b = rho.spectral_factor()?;
    let phi = ensemble_matrix(ensemble);
    let (r, s) = (b.cols(), phi.cols());
    if s < r {
        return Err(Error::InvalidArgument(format!(
            "ensemble of {s} vectors is smaller than rank {r}"
        )));
    }
    let (v, _) = polar_isometry(&b.adjoint_mul(&phi))?;
    let psi = b.matmul(&v);
    let vectors: Vec<Vec<Complex64>> = (0..s).map(|j| psi.column(j)).collect();
    Decomposition::from_unnormalized(rho.dims(), &vectors)
}

/// `d x s` matrix with columns `sqrt(q_j)|phi_j>`.
pub(crate) fn ensemble_matrix(ensemble: &SeparableEnsemble) -> ComplexMatrix {
    let cols: Vec<Vec<Complex64>> = ensemble
        .weights()
        .iter()
        .zip(ensemble.vectors())
        .map(|(q, phi)| phi.to_vector().iter().map(|z| z * q.sqrt()).collect())
        .collect();
    let d = cols[0].len();
    ComplexMatrix::from_fn(d, cols.len(), |i, j| cols[j][i])
}

/// Largest violation of the optimality condition
/// `sqrt(F_k) <psi_i|phi_k> = sqrt(F_i) <phi_i|psi_k>` over all pairs, where
/// `F_i = |<phi_i|psi_i>|^2` and each `phi_i` is a closest product vector of
/// `psi_i` with real nonnegative overlap.
///
/// Every optimal decomposition satisfies it, but it does not certify
/// optimality: non-optimal decompositions can satisfy it too.
pub fn stationarity_residual(decomposition: &Decomposition, products: &[ProductVector]) -> Result<f64> {
    if products.len() != decomposition.len() {
        return Err(Error::Dimension(format!(
            "{} product vectors for {} elements",
            products.len(),
            decomposition.len()
        )));
    }
    let phis: Vec<Vec<Complex64>> = products.iter().map(ProductVector::to_vector).collect();
    let psis: Vec<&[Complex64]> = decomposition.states().iter().map(|s| s.amplitudes()).collect();
    let roots: Vec<f64> = phis.iter().zip(&psis).map(|(f, p)| inner(f, p).norm()).collect();
    let n = psis.len();
    let mut worst = 0.0f64;
    for i in 0..n {
        for k in 0..n {
            let lhs = inner(psis[i], &phis[k]) * roots[k];
            let rhs = inner(&phis[i], psis[k]) * roots[i];
            worst = worst.max((lhs - rhs).norm());
        }
    }
    Ok(worst)
}

/// `max_{i,k} |C(psi_i) - C(psi_k)|` over a two-qubit decomposition. Equal
/// concurrences mean equal Schmidt coefficients.
pub fn two_qubit_schmidt_uniformity(decomposition: &Decomposition) -> Result<f64> {
    if decomposition.dims() != [2, 2] {
        return Err(Error::Dimension(format!(
            "two-qubit decomposition required, got dims {:?}",
            decomposition.dims()
        )));
    }
    let cs: Vec<f64> = decomposition
        .states()
        .iter()
        .map(|s| {
            let a = s.amplitudes();
            2.0 * (a[0] * a[3] - a[1] * a[2]).norm()
        })
        .collect();
    let max = cs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = cs.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(max - min)
}

#[cfg(test)]
mod tests;
