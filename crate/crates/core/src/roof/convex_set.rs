//! Largest fidelity with a convex hull `C = conv{sigma_1, ..., sigma_K}`:
//! `F_C(rho) = max_{sigma in C} F(rho, sigma) = max sum_i p_i F_X(rho_i)`.
//!
//! Same alternating scheme as the fidelity roof, with the columns of the
//! decomposition grouped into one block per extreme point. Block `k` of
//! `Psi = B V` carries `sqrt(p_k) rho_k^{1/2}`-type columns and block `k` of
//! `Phi` is `sqrt(q_k) C_k W_k`, where `sigma_k = C_k C_k^dagger`:
//!
//! * with `Psi` fixed, `W_k` is the polar factor of `C_k^dagger Psi_k` and
//!   `q_k` is proportional to `||C_k^dagger Psi_k||_1^2 = p_k F(rho_k, sigma_k)`;
//! * with `Phi` fixed, `V` is the polar factor of `B^dagger Phi`.

use rayon::prelude::*;

use super::best_index;
use super::engine::random_isometry;
use crate::error::{Error, Result};
use crate::linalg::{polar_isometry, ComplexMatrix};
use crate::state::{DensityMatrix, PRUNE_WEIGHT};

/// Finite set of states whose convex hull is searched.
#[derive(Debug, Clone)]
pub struct ConvexSetSpec {
    extreme_points: Vec<DensityMatrix>,
    label: String,
}

impl ConvexSetSpec {
    pub fn new(extreme_points: Vec<DensityMatrix>, label: impl Into<String>) -> Result<Self> {
        let first = extreme_points
            .first()
            .ok_or_else(|| Error::InvalidArgument("convex set needs at least one state".into()))?;
        if extreme_points.iter().any(|s| s.dims() != first.dims()) {
            return Err(Error::Dimension("extreme points with different dims".into()));
        }
        Ok(Self {
            extreme_points,
            label: label.into(),
        })
    }

    pub fn extreme_points(&self) -> &[DensityMatrix] {
        &self.extreme_points
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.extreme_points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.extreme_points.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct ConvexSetResult {
    pub f_c: f64,
    /// Weights `q_k` of the maximising `sigma = sum_k q_k sigma_k`.
    pub weights: Vec<f64>,
    /// Decomposition `rho = sum_k p_k rho_k`, one element per extreme point;
    /// `None` where `p_k` is negligible.
    pub element_weights: Vec<f64>,
    pub elements: Vec<Option<DensityMatrix>>,
    /// `F(rho_k, sigma_k)`.
    pub element_fidelities: Vec<f64>,
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

struct Blocks {
    b: ComplexMatrix,
    /// Eigen factor of each extreme point, zero-padded so that the blocks
    /// together have at least `rank(rho)` columns.
    c: Vec<ComplexMatrix>,
    offsets: Vec<usize>,
    width: usize,
}

struct Run {
    psi: ComplexMatrix,
    block_norms: Vec<f64>,
    trace: Vec<f64>,
    iterations: usize,
    converged: bool,
}

impl Blocks {
    fn block(&self, m: &ComplexMatrix, k: usize) -> ComplexMatrix {
        let (start, width) = (self.offsets[k], self.c[k].cols());
        ComplexMatrix::from_fn(m.rows(), width, |i, j| m[(i, start + j)])
    }

    /// Best `Phi` for fixed `Psi`, returning it with `||C_k^dagger Psi_k||_1`.
    fn ensemble(&self, psi: &ComplexMatrix) -> Result<(ComplexMatrix, Vec<f64>)> {
        let mut norms = Vec::with_capacity(self.c.len());
        let mut rotated = Vec::with_capacity(self.c.len());
        for (k, c) in self.c.iter().enumerate() {
            let m = c.adjoint_mul(&self.block(psi, k));
            let (w, t) = polar_isometry(&m)?;
            norms.push(t);
            rotated.push(c.matmul(&w));
        }
        let total = norms.iter().map(|t| t * t).sum::<f64>().sqrt();
        let mut phi = ComplexMatrix::zeros(self.b.rows(), self.width);
        for (k, cw) in rotated.iter().enumerate() {
            let q = if total > 0.0 { norms[k] / total } else { 0.0 };
            for j in 0..cw.cols() {
                let col: Vec<_> = cw.column(j).iter().map(|z| z * q).collect();
                phi.set_column(self.offsets[k] + j, &col);
            }
        }
        Ok((phi, norms))
    }

    fn run(&self, seed: u64, restart: u64, tol: f64, max_iter: usize) -> Result<Run> {
        let v = random_isometry(self.b.cols(), self.width, seed, restart);
        let mut psi = self.b.matmul(&v);
        let (mut phi, mut norms) = self.ensemble(&psi)?;
        let mut trace = vec![norms.iter().map(|t| t * t).sum::<f64>()];
        let mut converged = false;
        let mut iterations = 0;
        while iterations < max_iter {
            iterations += 1;
            let (v, _) = polar_isometry(&self.b.adjoint_mul(&phi))?;
            psi = self.b.matmul(&v);
            let (next_phi, next_norms) = self.ensemble(&psi)?;
            phi = next_phi;
            norms = next_norms;
            let obj = norms.iter().map(|t| t * t).sum::<f64>();
            let prev = *trace.last().expect("non-empty trace");
            trace.push(obj);
            if obj - prev < tol {
                converged = true;
                break;
            }
        }
        Ok(Run {
            psi,
            block_norms: norms,
            trace,
            iterations,
            converged,
        })
    }
}

/// `F_C(rho)` for the convex hull of `set`, with the maximising weights and
/// the matching decomposition of `rho`.
pub fn convex_set_fidelity(
    rho: &DensityMatrix,
    set: &ConvexSetSpec,
    restarts: usize,
    seed: u64,
) -> Result<ConvexSetResult> {
    if set.extreme_points()[0].dims() != rho.dims() {
        return Err(Error::Dimension(format!(
            "state dims {:?} differ from convex set dims {:?}",
            rho.dims(),
            set.extreme_points()[0].dims()
        )));
    }
    if restarts == 0 {
        return Err(Error::InvalidArgument("restarts must be >= 1".into()));
    }
    let b = rho.spectral_factor()?;
    let mut c: Vec<ComplexMatrix> = set
        .extreme_points()
        .iter()
        .map(|s| s.spectral_factor())
        .collect::<Result<_>>()?;
    let total: usize = c.iter().map(ComplexMatrix::cols).sum();
    if total < b.cols() {
        let pad = b.cols() - total;
        let first = &c[0];
        c[0] = ComplexMatrix::from_fn(first.rows(), first.cols() + pad, |i, j| {
            if j < first.cols() {
                first[(i, j)]
            } else {
                crate::linalg::ZERO
            }
        });
    }
    let mut offsets = Vec::with_capacity(c.len());
    let mut width = 0;
    for ck in &c {
        offsets.push(width);
        width += ck.cols();
    }
    let blocks = Blocks { b, c, offsets, width };

    let runs: Vec<Run> = (0..restarts)
        .into_par_iter()
        .map(|i| blocks.run(seed, i as u64, super::DEFAULT_TOL, super::DEFAULT_MAX_ITER))
        .collect::<Result<_>>()?;
    let best = best_index(runs.iter().map(|r| *r.trace.last().expect("non-empty")));
    let run = runs.into_iter().nth(best).expect("at least one restart");

    let f_c = run.trace.last().copied().unwrap_or(0.0).min(1.0);
    let sq: Vec<f64> = run.block_norms.iter().map(|t| t * t).collect();
    let norm: f64 = sq.iter().sum();
    let weights: Vec<f64> = sq.iter().map(|x| x / norm).collect();
    let mut element_weights = Vec::with_capacity(set.len());
    let mut elements = Vec::with_capacity(set.len());
    let mut element_fidelities = Vec::with_capacity(set.len());
    for k in 0..set.len() {
        let block = blocks.block(&run.psi, k);
        let gram = block.matmul(&block.adjoint());
        let p = gram.trace().re;
        element_weights.push(p);
        if p > PRUNE_WEIGHT {
            element_fidelities.push((sq[k] / p).min(1.0));
            elements.push(Some(DensityMatrix::new(
                rho.dims().to_vec(),
                gram.scale(1.0 / p).hermitian_part(),
            )?));
        } else {
            element_fidelities.push(0.0);
            elements.push(None);
        }
    }
    Ok(ConvexSetResult {
        f_c,
        weights,
        element_weights,
        elements,
        element_fidelities,
        objective_trace: run.trace,
        iterations: run.iterations,
        converged: run.converged,
    })
}
