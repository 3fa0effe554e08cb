use num_complex::Complex64;

use super::INNER_RESTARTS;
use crate::error::Result;
use crate::geometric::{align_phase, leading_schmidt_pair, refine_product, MAX_SWEEPS, SWEEP_TOL};
use crate::linalg::random::{haar_unitary_with, random_unit_vector, rng_for};
use crate::linalg::{kron_vec, polar_isometry, ComplexMatrix};

const ETA_MIN: f64 = 1.5;
const ETA_GROWTH: f64 = 1.5;
const ETA_MAX: f64 = 50.0;

pub(crate) type Factors = Vec<Vec<Complex64>>;

/// Alternating search over decompositions `Psi = B V` of a fixed state.
pub(crate) struct SeeSaw<'a> {
    dims: &'a [usize],
    b: &'a ComplexMatrix,
    s: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct Trajectory {
    /// Isometry with `psi = B v`.
    pub v: ComplexMatrix,
    /// Columns `sqrt(p_j)|psi_j>`.
    pub psi: ComplexMatrix,
    /// Closest product factors of each column.
    pub factors: Vec<Factors>,
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Current over-relaxation factor.
    eta: f64,
    amps: Vec<f64>,
}

impl Trajectory {
    pub fn objective(&self) -> f64 {
        self.trace.last().copied().unwrap_or(0.0)
    }
}

pub(crate) fn product_vector(factors: &Factors) -> Vec<Complex64> {
    factors
        .iter()
        .fold(vec![Complex64::new(1.0, 0.0)], |acc, f| kron_vec(&acc, f))
}

/// First `r` rows of a Haar-random `s x s` unitary.
pub(crate) fn random_isometry(r: usize, s: usize, seed: u64, stream: u64) -> ComplexMatrix {
    let u = haar_unitary_with(&mut rng_for(seed, stream), s);
    u.leading_rows(r)
}

impl<'a> SeeSaw<'a> {
    pub fn new(dims: &'a [usize], b: &'a ComplexMatrix, s: usize) -> Self {
        Self { dims, b, s }
    }

    pub fn rank(&self) -> usize {
        self.b.cols()
    }

    pub fn factor(&self) -> &ComplexMatrix {
        self.b
    }

    /// Closest product vector of every column of `psi`, returning the
    /// factors and the overlaps `|<phi_j|x_j>| = sqrt(p_j F_s(psi_j))`.
    /// Multipartite columns are warm-started from `prev` when given.
    pub fn products(
        &self,
        psi: &ComplexMatrix,
        prev: Option<&[Factors]>,
        seed: u64,
        stream: u64,
    ) -> (Vec<Factors>, Vec<f64>) {
        let mut factors = Vec::with_capacity(self.s);
        let mut amps = Vec::with_capacity(self.s);
        for j in 0..psi.cols() {
            let x = psi.column(j);
            if self.dims.len() == 2 {
                let (u, v, s1) = leading_schmidt_pair(self.dims, &x).expect("finite column");
                factors.push(vec![u, v]);
                amps.push(s1);
            } else {
                let mut run = match prev {
                    Some(p) => refine_product(self.dims, &x, p[j].clone(), MAX_SWEEPS, SWEEP_TOL),
                    None => {
                        let mut rng = rng_for(seed, (stream << 20) | j as u64);
                        let mut best: Option<crate::geometric::AlternatingRun> = None;
                        for _ in 0..INNER_RESTARTS {
                            let start = self.dims.iter().map(|&d| random_unit_vector(&mut rng, d)).collect();
                            let run = refine_product(self.dims, &x, start, MAX_SWEEPS, SWEEP_TOL);
                            if best.as_ref().is_none_or(|b| run.overlap_sq > b.overlap_sq) {
                                best = Some(run);
                            }
                        }
                        best.expect("at least one inner restart")
                    }
                };
                let r = align_phase(self.dims, &x, &mut run.factors);
                factors.push(run.factors);
                amps.push(r);
            }
        }
        (factors, amps)
    }

    /// Separable-ensemble matrix with columns `sqrt(q_j)|phi_j>`, `q_j`
    /// proportional to `amps_j^2`.
    pub fn phi(&self, factors: &[Factors], amps: &[f64]) -> ComplexMatrix {
        let total = amps.iter().map(|a| a * a).sum::<f64>().sqrt();
        let d = self.b.rows();
        let mut phi = ComplexMatrix::zeros(d, self.s);
        for (j, (f, &a)) in factors.iter().zip(amps).enumerate() {
            let v: Vec<Complex64> = product_vector(f).iter().map(|z| z * (a / total)).collect();
            phi.set_column(j, &v);
        }
        phi
    }

    /// Objective, decomposition, factors and overlaps at isometry `v`.
    fn evaluate(
        &self,
        v: &ComplexMatrix,
        prev: &[Factors],
        seed: u64,
        stream: u64,
    ) -> (f64, ComplexMatrix, Vec<Factors>, Vec<f64>) {
        let psi = self.b.matmul(v);
        let (factors, amps) = self.products(&psi, Some(prev), seed, stream);
        (amps.iter().map(|a| a * a).sum(), psi, factors, amps)
    }

    pub fn run_from_random(&self, seed: u64, restart: u64, tol: f64, max_iter: usize) -> Result<Trajectory> {
        let v = random_isometry(self.rank(), self.s, seed, restart);
        let psi = self.b.matmul(&v);
        let (factors, amps) = self.products(&psi, None, seed, restart);
        let run = Trajectory {
            v,
            psi,
            factors,
            trace: vec![amps.iter().map(|a| a * a).sum()],
            iterations: 0,
            converged: false,
            eta: ETA_MIN,
            amps,
        };
        self.resume(run, seed, restart, tol, max_iter)
    }

    /// Continues `run` for at most `more` iterations.
    ///
    /// See-saw with adaptive over-relaxation: besides the plain update
    /// `V'` each iteration tries `polar(V + eta (V' - V))` and keeps the
    /// better of the two, growing `eta` while extrapolation pays off.
    pub fn resume(&self, run: Trajectory, seed: u64, stream: u64, tol: f64, more: usize) -> Result<Trajectory> {
        let mut run = run;
        run.converged = false;
        for _ in 0..more {
            run.iterations += 1;
            let phi = self.phi(&run.factors, &run.amps);
            let (v_next, _) = polar_isometry(&self.b.adjoint_mul(&phi))?;
            let step = self.evaluate(&v_next, &run.factors, seed, stream);
            let (ext, _) = polar_isometry(&(&run.v + &(&v_next - &run.v).scale(run.eta)))?;
            let jump = self.evaluate(&ext, &run.factors, seed, stream);
            let (obj, next) = if jump.0 > step.0 {
                run.eta = (run.eta * ETA_GROWTH).min(ETA_MAX);
                (jump.0, (ext, jump.1, jump.2, jump.3))
            } else {
                run.eta = ETA_MIN;
                (step.0, (v_next, step.1, step.2, step.3))
            };
            (run.v, run.psi, run.factors, run.amps) = next;
            let prev = run.objective();
            run.trace.push(obj);
            if obj - prev < tol {
                run.converged = true;
                break;
            }
        }
        Ok(run)
    }
}
