//! Convex roofs of `f(E_G)` for convex `f` with `f(0) = 0`.
//!
//! Minimising `sum_i p_i f(1 - F_s(psi_i))` is the same as maximising
//! `G(V) = sum_j |x_j|^2 h(F_j)` with `h(F) = -f(1 - F)` over decompositions
//! `x_j = (B V)_j`. Its gradient with respect to `x_j` is
//! `(h - F h') x_j + h' <phi_j|x_j> phi_j`; each step moves `V` to the polar
//! factor of `B^dagger Gamma`, falling back to `polar(V + t B^dagger Gamma)`
//! with shrinking `t` when the full step does not improve `G`. For `f(x) = x`
//! the full step is exactly one iteration of the fidelity see-saw.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use super::engine::{product_vector, Factors, SeeSaw};
use super::{best_index, RoofOptions};
use crate::error::{Error, Result};
use crate::linalg::{polar_isometry, ComplexMatrix};
use crate::state::{DensityMatrix, Decomposition};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Convex `f` on `[0, 1]` with `f(0) = 0`, together with its derivative.
#[derive(Clone)]
pub struct RoofFunction {
    name: String,
    f: ScalarFn,
    df: ScalarFn,
}

impl fmt::Debug for RoofFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RoofFunction").field("name", &self.name).finish()
    }
}

const DOMAIN_GRID: usize = 200;

impl RoofFunction {
    /// Checks `f(0) = 0`, finiteness, nonnegativity and convexity on a grid.
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let name = name.into();
        let bad = |why: String| Error::InvalidArgument(format!("roof function `{name}`: {why}"));
        if f(0.0).abs() > 1e-12 {
            return Err(bad(format!("f(0) = {} is not 0", f(0.0))));
        }
        let xs: Vec<f64> = (0..=DOMAIN_GRID).map(|k| k as f64 / DOMAIN_GRID as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        if let Some(i) = ys.iter().position(|y| !y.is_finite() || *y < -1e-12) {
            return Err(bad(format!("f({}) = {}", xs[i], ys[i])));
        }
        if let Some(w) = ys.windows(3).position(|w| w[0] - 2.0 * w[1] + w[2] < -1e-9) {
            return Err(bad(format!("not convex near x = {}", xs[w + 1])));
        }
        if xs[..DOMAIN_GRID].iter().any(|&x| !df(x).is_finite()) {
            return Err(bad("derivative is not finite on [0, 1)".into()));
        }
        Ok(Self {
            name,
            f: Arc::new(f),
            df: Arc::new(df),
        })
    }

    /// `f(x) = x`: the geometric measure itself.
    pub fn identity() -> Self {
        Self::new("identity", |x| x, |_| 1.0).expect("valid")
    }

    /// `f(x) = 2 - 2 sqrt(1 - x)`: the Bures measure.
    pub fn bures() -> Self {
        Self::new(
            "bures",
            |x| 2.0 - 2.0 * (1.0 - x).max(0.0).sqrt(),
            |x| 1.0 / (1.0 - x).max(1e-300).sqrt(),
        )
        .expect("valid")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        (self.df)(x)
    }
}

#[derive(Debug, Clone)]
pub struct GeneralizedRoofResult {
    /// Minimised `sum_i p_i f(E_G(psi_i))`.
    pub value: f64,
    pub decomposition: Decomposition,
    /// `F_s(psi_i)` per element.
    pub element_fidelities: Vec<f64>,
    /// `sum_j p_j h(F_j)` after each step of the winning restart.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

struct Point {
    v: ComplexMatrix,
    psi: ComplexMatrix,
    factors: Vec<Factors>,
    amps: Vec<f64>,
    objective: f64,
}

const BACKTRACK_STEPS: usize = 40;

struct Ascent<'a> {
    engine: SeeSaw<'a>,
    f: &'a RoofFunction,
    seed: u64,
    stream: u64,
}

impl Ascent<'_> {
    fn h(&self, fid: f64) -> f64 {
        -self.f.eval(1.0 - fid)
    }

    fn dh(&self, fid: f64) -> f64 {
        self.f.derivative(1.0 - fid)
    }

    fn point(&self, v: ComplexMatrix, prev: Option<&[Factors]>) -> Point {
        let psi = self.engine.factor().matmul(&v);
        let (factors, amps) = self.engine.products(&psi, prev, self.seed, self.stream);
        let mut objective = 0.0;
        for (j, &a) in amps.iter().enumerate() {
            let p: f64 = psi.column(j).iter().map(|z| z.norm_sqr()).sum();
            if p > 0.0 {
                objective += p * self.h((a * a / p).min(1.0));
            }
        }
        Point {
            v,
            psi,
            factors,
            amps,
            objective,
        }
    }

    /// `B^dagger Gamma`.
    fn gradient(&self, pt: &Point) -> ComplexMatrix {
        let b = self.engine.factor();
        let mut gamma = ComplexMatrix::zeros(b.rows(), pt.psi.cols());
        for j in 0..pt.psi.cols() {
            let x = pt.psi.column(j);
            let p: f64 = x.iter().map(|z| z.norm_sqr()).sum();
            if p <= 0.0 {
                continue;
            }
            let a = pt.amps[j];
            let fid = (a * a / p).min(1.0);
            let (h, dh) = (self.h(fid), self.dh(fid));
            let phi = product_vector(&pt.factors[j]);
            let col: Vec<Complex64> = x
                .iter()
                .zip(&phi)
                .map(|(xi, fi)| xi * (h - fid * dh) + fi * (dh * a))
                .collect();
            gamma.set_column(j, &col);
        }
        b.adjoint_mul(&gamma)
    }

    fn run(&self, v0: ComplexMatrix, tol: f64, max_iter: usize) -> Result<(Point, Vec<f64>, usize, bool)> {
        let mut pt = self.point(v0, None);
        let mut trace = vec![pt.objective];
        let mut converged = false;
        let mut iterations = 0;
        while iterations < max_iter {
            iterations += 1;
            let g = self.gradient(&pt);
            let mut next = None;
            let (full, _) = polar_isometry(&g)?;
            let cand = self.point(full, Some(&pt.factors));
            if cand.objective > pt.objective {
                next = Some(cand);
            } else {
                let mut t = 1.0;
                for _ in 0..BACKTRACK_STEPS {
                    let (v, _) = polar_isometry(&(&pt.v + &g.scale(t)))?;
                    let cand = self.point(v, Some(&pt.factors));
                    if cand.objective > pt.objective {
                        next = Some(cand);
                        break;
                    }
                    t *= 0.5;
                }
            }
            let Some(cand) = next else {
                converged = true;
                break;
            };
            let gain = cand.objective - pt.objective;
            pt = cand;
            trace.push(pt.objective);
            if gain < tol {
                converged = true;
                break;
            }
        }
        Ok((pt, trace, iterations, converged))
    }
}

/// Minimises `sum_i p_i f(E_G(psi_i))` over decompositions of `rho`.
///
/// Each restart first runs the fidelity see-saw from its random start and
/// then ascends the transformed objective from there.
pub fn solve_generalized_roof(
    rho: &DensityMatrix,
    f: &RoofFunction,
    options: &RoofOptions,
) -> Result<GeneralizedRoofResult> {
    let b = rho.spectral_factor()?;
    let s = options.s.unwrap_or_else(|| super::default_size(rho));
    if s < b.cols() {
        return Err(Error::InvalidArgument(format!(
            "decomposition size {s} is below rank {}",
            b.cols()
        )));
    }
    if options.restarts == 0 {
        return Err(Error::InvalidArgument("restarts must be >= 1".into()));
    }
    let runs: Vec<(Point, Vec<f64>, usize, bool)> = (0..options.restarts)
        .into_par_iter()
        .map(|i| {
            let engine = SeeSaw::new(rho.dims(), &b, s);
            let start = engine.run_from_random(
                options.seed,
                i as u64,
                options.tol,
                options.max_iter.min(super::SCREEN_ITER),
            )?;
            let v0 = start.v;
            let ascent = Ascent {
                engine,
                f,
                seed: options.seed,
                stream: i as u64,
            };
            ascent.run(v0, options.tol, options.max_iter)
        })
        .collect::<Result<_>>()?;
    let best = best_index(runs.iter().map(|r| r.0.objective));
    let (pt, trace, iterations, converged) = runs.into_iter().nth(best).expect("at least one restart");

    let vectors: Vec<Vec<Complex64>> = (0..pt.psi.cols()).map(|j| pt.psi.column(j)).collect();
    let decomposition = Decomposition::from_unnormalized(rho.dims(), &vectors)?;
    let parties = rho.dims().len();
    let element_fidelities: Vec<f64> = decomposition
        .states()
        .iter()
        .map(|psi| {
            crate::geometric::fs_pure(psi, crate::geometric::default_restarts(parties), options.seed)
                .map(|r| r.f_s)
        })
        .collect::<Result<_>>()?;
    let value = decomposition
        .weights()
        .iter()
        .zip(&element_fidelities)
        .map(|(p, fid)| p * f.eval(1.0 - fid))
        .sum();
    Ok(GeneralizedRoofResult {
        value,
        decomposition,
        element_fidelities,
        objective_trace: trace,
        iterations,
        converged,
    })
}
