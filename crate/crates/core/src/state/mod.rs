//! Validated quantum-state data model: density matrices, pure states,
//! product vectors, pure-state decompositions and separable ensembles.
//!
//! All types are immutable after construction and check their invariants
//! with fixed tolerances.

mod io;

pub use io::{format_state, parse_state, read_state, write_state, StateFile};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, eig_hermitian, inner, kron_vec, norm, ComplexMatrix, HermitianEig};

pub const HERMITIAN_TOL: f64 = 1e-9;
pub const TRACE_TOL: f64 = 1e-9;
pub const EIGEN_FLOOR: f64 = -1e-10;
pub const NORM_TOL: f64 = 1e-10;
pub const WEIGHT_SUM_TOL: f64 = 1e-10;
/// Decomposition elements lighter than this are dropped.
pub const PRUNE_WEIGHT: f64 = 1e-12;
/// Eigenvalues above this count towards the rank.
pub const RANK_CUTOFF: f64 = 1e-12;

fn check_dims(dims: &[usize], min_party: usize) -> Result<usize> {
    if dims.is_empty() {
        return Err(Error::invariant("dims", "no parties given"));
    }
    if let Some(&d) = dims.iter().find(|&&d| d < min_party) {
        return Err(Error::invariant(
            "dims",
            format!("party dimension {d} below {min_party}"),
        ));
    }
    Ok(dims.iter().product())
}

/// Trace-one positive semidefinite operator over parties `dims`.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(dims: Vec<usize>, matrix: ComplexMatrix) -> Result<Self> {
        let total = check_dims(&dims, 2)?;
        if !matrix.is_square() || matrix.rows() != total {
            return Err(Error::Dimension(format!(
                "dims {:?} need a {total}x{total} matrix, got {}x{}",
                dims,
                matrix.rows(),
                matrix.cols()
            )));
        }
        let defect = matrix.hermiticity_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::invariant(
                "hermitian",
                format!("max |M - M^dagger| = {defect:.3e}"),
            ));
        }
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::invariant("trace", format!("trace = {trace}")));
        }
        let matrix = matrix.hermitian_part();
        let lowest = eig_hermitian(&matrix)?.eigenvalues[0];
        if lowest < EIGEN_FLOOR {
            return Err(Error::invariant(
                "positive semidefinite",
                format!("eigenvalue {lowest:.3e}"),
            ));
        }
        Ok(Self { dims, matrix })
    }

    pub fn from_pure(psi: &PureState) -> Self {
        Self {
            dims: psi.dims.clone(),
            matrix: ComplexMatrix::projector(&psi.amplitudes),
        }
    }

    /// Maximally mixed state over `dims`.
    pub fn maximally_mixed(dims: Vec<usize>) -> Result<Self> {
        let d: usize = check_dims(&dims, 2)?;
        Self::new(dims, ComplexMatrix::identity(d).scale(1.0 / d as f64))
    }

    /// Convex combination `sum_k w_k rho_k`.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty mixture".into()))?
            .1;
        let d = first.dim();
        let mut m = ComplexMatrix::zeros(d, d);
        for (w, rho) in parts {
            if rho.dims != first.dims {
                return Err(Error::Dimension("mixture of differently shaped states".into()));
            }
            m = &m + &rho.matrix.scale(*w);
        }
        Self::new(first.dims.clone(), m)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn is_two_qubit(&self) -> bool {
        self.dims == [2, 2]
    }

    pub fn eig(&self) -> Result<HermitianEig> {
        eig_hermitian(&self.matrix)
    }

    pub fn rank(&self) -> Result<usize> {
        Ok(self
            .eig()?
            .eigenvalues
            .iter()
            .filter(|&&x| x > RANK_CUTOFF)
            .count())
    }

    pub fn purity(&self) -> f64 {
        self.matrix.matmul(&self.matrix).trace().re
    }

    /// Eigen-weighted factor `B` with columns `sqrt(lambda_l) |lambda_l>`,
    /// eigenvalues in descending order, restricted to the rank.
    pub fn spectral_factor(&self) -> Result<ComplexMatrix> {
        let eig = self.eig()?;
        let d = self.dim();
        let mut cols: Vec<(f64, Vec<Complex64>)> = (0..d)
            .rev()
            .filter(|&i| eig.eigenvalues[i] > RANK_CUTOFF)
            .map(|i| (eig.eigenvalues[i], eig.eigenvector(i)))
            .collect();
        if cols.is_empty() {
            // trace one guarantees at least one eigenvalue above the cutoff
            return Err(Error::invariant("trace", "no positive eigenvalue"));
        }
        let r = cols.len();
        let mut b = ComplexMatrix::zeros(d, r);
        for (j, (lambda, v)) in cols.iter_mut().enumerate() {
            let s = lambda.sqrt();
            v.iter_mut().for_each(|z| *z *= s);
            b.set_column(j, v);
        }
        Ok(b)
    }

    /// Reduced state on the kept parties.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let m = linalg::partial_trace(&self.matrix, &self.dims, keep)?;
        let mut kept = keep.to_vec();
        kept.sort_unstable();
        kept.dedup();
        Self::new(kept.iter().map(|&k| self.dims[k]).collect(), m)
    }
}

/// Normalised state vector over parties `dims`.
///
/// The first amplitude with modulus above `1e-14` is stored real and
/// nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    dims: Vec<usize>,
    amplitudes: Vec<Complex64>,
}

fn canonical_phase(amplitudes: &mut [Complex64]) {
    let Some(k) = amplitudes.iter().position(|z| z.norm() > 1e-14) else {
        return;
    };
    let first = amplitudes[k];
    if first.im == 0.0 && first.re > 0.0 {
        return;
    }
    let phase = first.conj() / first.norm();
    amplitudes.iter_mut().for_each(|z| *z *= phase);
    // exactly real, so that applying this again is a no-op
    amplitudes[k] = Complex64::new(first.norm(), 0.0);
}

impl PureState {
    pub fn new(dims: Vec<usize>, mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let total = check_dims(&dims, 1)?;
        if amplitudes.len() != total {
            return Err(Error::Dimension(format!(
                "dims {:?} need {total} amplitudes, got {}",
                dims,
                amplitudes.len()
            )));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invariant("finite", "non-finite amplitude"));
        }
        let n = norm(&amplitudes);
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::invariant("norm", format!("norm = {n}")));
        }
        canonical_phase(&mut amplitudes);
        Ok(Self { dims, amplitudes })
    }

    /// Normalises `amplitudes` first; fails only on a zero vector.
    pub fn normalized(dims: Vec<usize>, mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let n = norm(&amplitudes);
        if n == 0.0 || !n.is_finite() {
            return Err(Error::invariant("norm", "zero or non-finite vector"));
        }
        amplitudes.iter_mut().for_each(|z| *z /= n);
        Self::new(dims, amplitudes)
    }

    /// Computational basis state `|index>`.
    pub fn basis(dims: Vec<usize>, index: usize) -> Result<Self> {
        let total: usize = dims.iter().product();
        if index >= total {
            return Err(Error::Dimension(format!("basis index {index} >= {total}")));
        }
        let mut a = vec![Complex64::new(0.0, 0.0); total];
        a[index] = Complex64::new(1.0, 0.0);
        Self::new(dims, a)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn overlap(&self, other: &[Complex64]) -> Complex64 {
        inner(&self.amplitudes, other)
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }

    /// Bipartite coefficient matrix `M[a][b] = <a b|psi>`.
    pub fn coefficient_matrix(&self) -> Result<ComplexMatrix> {
        if self.dims.len() != 2 {
            return Err(Error::Dimension(format!(
                "coefficient matrix needs 2 parties, got {}",
                self.dims.len()
            )));
        }
        ComplexMatrix::from_vec(self.dims[0], self.dims[1], self.amplitudes.clone())
    }
}

/// Tensor product of one normalised factor per party.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductVector {
    factors: Vec<Vec<Complex64>>,
}

impl ProductVector {
    pub fn new(factors: Vec<Vec<Complex64>>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::invariant("dims", "no factors"));
        }
        for f in &factors {
            let n = norm(f);
            if f.is_empty() || (n - 1.0).abs() > NORM_TOL {
                return Err(Error::invariant("norm", format!("factor norm = {n}")));
            }
        }
        Ok(Self { factors })
    }

    pub fn factors(&self) -> &[Vec<Complex64>] {
        &self.factors
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(Vec::len).collect()
    }

    /// Full state vector (not phase-canonicalised).
    pub fn to_vector(&self) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(1.0, 0.0)];
        for f in &self.factors {
            v = kron_vec(&v, f);
        }
        v
    }

    pub fn to_state(&self) -> PureState {
        PureState::normalized(self.dims(), self.to_vector()).expect("product of unit vectors")
    }

    /// Multiplies the first factor by a unit-modulus phase.
    pub fn with_phase(mut self, phase: Complex64) -> Self {
        self.factors[0].iter_mut().for_each(|z| *z *= phase);
        self
    }
}

fn check_weights(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::invariant("weights", "empty ensemble"));
    }
    if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
        return Err(Error::invariant("weights", format!("weight {w}")));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(Error::invariant("weights", format!("weights sum to {sum}")));
    }
    Ok(())
}

/// Pure-state decomposition `rho = sum_i p_i |psi_i><psi_i|` with `p_i > 0`.
#[derive(Debug, Clone)]
pub struct Decomposition {
    weights: Vec<f64>,
    states: Vec<PureState>,
}

impl Decomposition {
    pub fn new(weights: Vec<f64>, states: Vec<PureState>) -> Result<Self> {
        check_weights(&weights)?;
        if weights.iter().any(|&w| w <= 0.0) {
            return Err(Error::invariant("weights", "zero weight in decomposition"));
        }
        if weights.len() != states.len() {
            return Err(Error::Dimension(format!(
                "{} weights for {} states",
                weights.len(),
                states.len()
            )));
        }
        if states.iter().any(|s| s.dims != states[0].dims) {
            return Err(Error::Dimension("states with different dims".into()));
        }
        Ok(Self { weights, states })
    }

    /// Builds a decomposition from unnormalised vectors `sqrt(p_i)|psi_i>`,
    /// dropping elements lighter than [`PRUNE_WEIGHT`] and renormalising.
    pub fn from_unnormalized(dims: &[usize], vectors: &[Vec<Complex64>]) -> Result<Self> {
        let mut weights = Vec::new();
        let mut states = Vec::new();
        for v in vectors {
            let p = v.iter().map(|z| z.norm_sqr()).sum::<f64>();
            if p < PRUNE_WEIGHT {
                continue;
            }
            weights.push(p);
            states.push(PureState::normalized(dims.to_vec(), v.clone())?);
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        Self::new(weights, states)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn states(&self) -> &[PureState] {
        &self.states
    }

    pub fn dims(&self) -> &[usize] {
        self.states[0].dims()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &PureState)> {
        self.weights.iter().copied().zip(self.states.iter())
    }

    pub fn reconstruct_matrix(&self) -> ComplexMatrix {
        let d = self.states[0].dim();
        let mut m = ComplexMatrix::zeros(d, d);
        for (p, s) in self.iter() {
            let a = s.amplitudes();
            for i in 0..d {
                for j in 0..d {
                    m[(i, j)] += a[i] * a[j].conj() * p;
                }
            }
        }
        m
    }

    pub fn reconstruct(&self) -> Result<DensityMatrix> {
        DensityMatrix::new(self.dims().to_vec(), self.reconstruct_matrix())
    }
}

/// Separable state given as `sigma = sum_j q_j |phi_j><phi_j|` with product
/// vectors `phi_j`.
#[derive(Debug, Clone)]
pub struct SeparableEnsemble {
    weights: Vec<f64>,
    vectors: Vec<ProductVector>,
}

impl SeparableEnsemble {
    pub fn new(weights: Vec<f64>, vectors: Vec<ProductVector>) -> Result<Self> {
        check_weights(&weights)?;
        if weights.len() != vectors.len() {
            return Err(Error::Dimension(format!(
                "{} weights for {} product vectors",
                weights.len(),
                vectors.len()
            )));
        }
        let dims = vectors[0].dims();
        if vectors.iter().any(|v| v.dims() != dims) {
            return Err(Error::Dimension("product vectors with different dims".into()));
        }
        Ok(Self { weights, vectors })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn vectors(&self) -> &[ProductVector] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.vectors[0].dims()
    }
}

/// `sigma = sum_j q_j |phi_j><phi_j|`, separable by construction.
pub fn assemble(ensemble: &SeparableEnsemble) -> Result<DensityMatrix> {
    let dims = ensemble.dims();
    let d: usize = dims.iter().product();
    let mut m = ComplexMatrix::zeros(d, d);
    for (&q, phi) in ensemble.weights.iter().zip(&ensemble.vectors) {
        let v = phi.to_vector();
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] += v[i] * v[j].conj() * q;
            }
        }
    }
    DensityMatrix::new(dims, m.hermitian_part())
}

/// Purification `sum_i sqrt(lambda_i) |lambda_i> (x) |i>` on the system plus
/// an ancilla whose dimension equals the rank of `rho`.
pub fn purify(rho: &DensityMatrix) -> Result<PureState> {
    let b = rho.spectral_factor()?;
    let (d, r) = (b.rows(), b.cols());
    let mut amplitudes = Vec::with_capacity(d * r);
    for i in 0..d {
        amplitudes.extend_from_slice(b.row(i));
    }
    let mut dims = rho.dims().to_vec();
    dims.push(r);
    PureState::normalized(dims, amplitudes)
}

/// Decomposition `sqrt(p_k)|psi_k> = sum_l u_kl sqrt(lambda_l)|lambda_l>`
/// generated by an `s x s` unitary acting on the eigen-purification
/// (eigenvalues in descending order, padded with zeros past the rank).
pub fn decomposition_from_unitary(rho: &DensityMatrix, u: &ComplexMatrix) -> Result<Decomposition> {
    let b = rho.spectral_factor()?;
    let r = b.cols();
    let s = u.rows();
    if !u.is_square() {
        return Err(Error::NotSquare {
            rows: u.rows(),
            cols: u.cols(),
        });
    }
    if s < r {
        return Err(Error::InvalidArgument(format!(
            "unitary size {s} is below rank {r}"
        )));
    }
    let defect = u.adjoint_mul(u).max_abs_diff(&ComplexMatrix::identity(s));
    if defect > 1e-9 {
        return Err(Error::invariant("unitary", format!("|U^dagger U - I| = {defect:.3e}")));
    }
    let vectors: Vec<Vec<Complex64>> = (0..s)
        .map(|k| {
            let coeffs: Vec<Complex64> = (0..r).map(|l| u[(k, l)]).collect();
            b.mul_vec(&coeffs)
        })
        .collect();
    Decomposition::from_unnormalized(rho.dims(), &vectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{haar_random_unitary, random_density_matrix};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn random_rho(dims: &[usize], rank: usize, seed: u64) -> DensityMatrix {
        DensityMatrix::new(dims.to_vec(), random_density_matrix(dims, rank, seed).unwrap()).unwrap()
    }

    #[test]
    fn density_validation_diagnostics() {
        let m = ComplexMatrix::from_real_diagonal(&[0.4, 0.4]);
        let err = DensityMatrix::new(vec![2], m).unwrap_err().to_string();
        assert!(err.contains("trace"), "{err}");
        let m = ComplexMatrix::from_real_diagonal(&[1.5, -0.5]);
        let err = DensityMatrix::new(vec![2], m).unwrap_err().to_string();
        assert!(err.contains("positive semidefinite"), "{err}");
        let m = ComplexMatrix::identity(4).scale(0.25);
        assert!(matches!(DensityMatrix::new(vec![2, 3], m), Err(Error::Dimension(_))));
    }

    #[test]
    fn pure_state_phase_is_canonical() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi = PureState::new(vec![2], vec![Complex64::new(0.0, h), c(h)]).unwrap();
        assert_eq!(psi.amplitudes()[0], c(h));
        assert!((psi.amplitudes()[1] - Complex64::new(0.0, -h)).norm() < 1e-15);
        assert!(PureState::new(vec![2, 2], vec![c(1.0); 3]).is_err());
        assert!(PureState::new(vec![2], vec![c(1.0), c(1.0)]).is_err());
    }

    #[test]
    fn purify_pure_state_has_trivial_ancilla() {
        let rho = PureState::basis(vec![2], 0).unwrap().density();
        let psi = purify(&rho).unwrap();
        assert_eq!(psi.dims(), &[2, 1]);
        assert_eq!(psi.amplitudes()[0], c(1.0));
    }

    #[test]
    fn purify_maximally_mixed_qubit() {
        let rho = DensityMatrix::maximally_mixed(vec![2]).unwrap();
        let psi = purify(&rho).unwrap();
        assert_eq!(psi.dims(), &[2, 2]);
        let back = psi.density().partial_trace(&[0]).unwrap();
        assert!(back.matrix().max_abs_diff(rho.matrix()) < 1e-15);
    }

    #[test]
    fn purify_round_trip_random_rank3() {
        for seed in 0..10 {
            let rho = random_rho(&[2, 2], 3, seed);
            let psi = purify(&rho).unwrap();
            assert_eq!(psi.dims(), &[2, 2, 3]);
            let back = psi.density().partial_trace(&[0, 1]).unwrap();
            assert!(back.matrix().max_abs_diff(rho.matrix()) <= 1e-9);
        }
    }

    #[test]
    fn identity_unitary_gives_eigendecomposition() {
        let rho = DensityMatrix::new(vec![2], ComplexMatrix::from_real_diagonal(&[0.3, 0.7])).unwrap();
        let dec = decomposition_from_unitary(&rho, &ComplexMatrix::identity(2)).unwrap();
        assert_eq!(dec.len(), 2);
        assert!((dec.weights()[0] - 0.7).abs() < 1e-15);
        assert_eq!(dec.states()[0], PureState::basis(vec![2], 1).unwrap());
    }

    #[test]
    fn hadamard_rotates_maximally_mixed() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let had = ComplexMatrix::from_vec(2, 2, vec![c(h), c(h), c(h), c(-h)]).unwrap();
        let rho = DensityMatrix::maximally_mixed(vec![2]).unwrap();
        let dec = decomposition_from_unitary(&rho, &had).unwrap();
        let plus = PureState::new(vec![2], vec![c(h), c(h)]).unwrap();
        let minus = PureState::new(vec![2], vec![c(h), c(-h)]).unwrap();
        assert_eq!(dec.len(), 2);
        for (p, s) in dec.iter() {
            assert!((p - 0.5).abs() < 1e-15);
            assert!(
                (s.overlap(plus.amplitudes()).norm() - 1.0).abs() < 1e-12
                    || (s.overlap(minus.amplitudes()).norm() - 1.0).abs() < 1e-12
            );
        }
    }

    #[test]
    fn haar_unitaries_reconstruct_rho() {
        for seed in 0..25 {
            let rank = 1 + (seed as usize % 4);
            let rho = random_rho(&[2, 2], rank, seed);
            let u = haar_random_unitary(16, 1000 + seed);
            let dec = decomposition_from_unitary(&rho, &u).unwrap();
            assert!(dec.len() <= 16);
            assert!(dec.reconstruct_matrix().max_abs_diff(rho.matrix()) <= 1e-8);
            assert!((dec.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn decomposition_rejects_small_or_nonunitary() {
        let rho = random_rho(&[2, 2], 3, 1);
        assert!(decomposition_from_unitary(&rho, &ComplexMatrix::identity(2)).is_err());
        let bad = ComplexMatrix::identity(4).scale(1.1);
        assert!(decomposition_from_unitary(&rho, &bad).is_err());
    }

    #[test]
    fn assemble_classical_mixture() {
        let zero = vec![c(1.0), c(0.0)];
        let one = vec![c(0.0), c(1.0)];
        let ens = SeparableEnsemble::new(
            vec![0.5, 0.5],
            vec![
                ProductVector::new(vec![zero.clone(), zero.clone()]).unwrap(),
                ProductVector::new(vec![one.clone(), one.clone()]).unwrap(),
            ],
        )
        .unwrap();
        let sigma = assemble(&ens).unwrap();
        let want = ComplexMatrix::from_real_diagonal(&[0.5, 0.0, 0.0, 0.5]);
        assert!(sigma.matrix().max_abs_diff(&want) < 1e-15);

        let single =
            SeparableEnsemble::new(vec![1.0], vec![ProductVector::new(vec![zero, one]).unwrap()])
                .unwrap();
        let proj = assemble(&single).unwrap();
        assert!((proj.purity() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ensemble_weights_must_sum_to_one() {
        let v = ProductVector::new(vec![vec![c(1.0), c(0.0)]]).unwrap();
        assert!(SeparableEnsemble::new(vec![0.9], vec![v]).is_err());
    }
}
