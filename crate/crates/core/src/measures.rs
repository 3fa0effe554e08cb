//! Directly computable quantities: Uhlmann fidelity, von Neumann and relative
//! entropies, and the two-qubit closed forms driven by the concurrence.
//!
//! Entropies are in bits. Fidelity is the squared form `(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{svd, trace_norm, ComplexMatrix};
use crate::state::DensityMatrix;

/// Eigenvalues at or below this are treated as zero inside log-traces.
pub const LOG_CUTOFF: f64 = 1e-12;

fn check_same_dim(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::Dimension(format!(
            "states of dimension {} and {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    Ok(())
}

fn require_two_qubit(rho: &DensityMatrix) -> Result<()> {
    if !rho.is_two_qubit() {
        return Err(Error::Dimension(format!(
            "two-qubit state required, got dims {:?}",
            rho.dims()
        )));
    }
    Ok(())
}

/// Uhlmann fidelity.
///
/// `||sqrt(rho) sqrt(sigma)||_1 = ||B_rho^dagger B_sigma||_1` for the spectral
/// factors, which avoids square roots of numerically zero eigenvalues.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_same_dim(rho, sigma)?;
    let a = rho.spectral_factor()?;
    let b = sigma.spectral_factor()?;
    let t = trace_norm(&a.adjoint_mul(&b))?;
    Ok((t * t).clamp(0.0, 1.0))
}

/// `Tr[rho sigma]`.
pub fn overlap_trace(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_same_dim(rho, sigma)?;
    Ok(rho.matrix().matmul(sigma.matrix()).trace().re)
}

fn xlog2x(x: f64) -> f64 {
    if x <= LOG_CUTOFF {
        0.0
    } else {
        x * x.log2()
    }
}

/// `-Tr[rho log2 rho]`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let eig = rho.eig()?;
    Ok((-eig.eigenvalues.iter().map(|&x| xlog2x(x)).sum::<f64>()).max(0.0))
}

/// `S(rho||sigma) = Tr[rho log2 rho] - Tr[rho log2 sigma]`, or `+inf` when the
/// support of `rho` is not contained in that of `sigma`.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_same_dim(rho, sigma)?;
    let neg_entropy: f64 = rho.eig()?.eigenvalues.iter().map(|&x| xlog2x(x)).sum();
    let es = sigma.eig()?;
    let mut cross = 0.0;
    for (k, &mu) in es.eigenvalues.iter().enumerate() {
        let v = es.eigenvector(k);
        let weight = rho.matrix().sandwich(&v, &v).re;
        if mu <= LOG_CUTOFF {
            if weight > LOG_CUTOFF {
                return Ok(f64::INFINITY);
            }
        } else {
            cross += weight * mu.log2();
        }
    }
    Ok((neg_entropy - cross).max(0.0))
}

/// `sigma_y (x) sigma_y`.
fn yy() -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(4, 4);
    m[(0, 3)] = Complex64::new(-1.0, 0.0);
    m[(1, 2)] = Complex64::new(1.0, 0.0);
    m[(2, 1)] = Complex64::new(1.0, 0.0);
    m[(3, 0)] = Complex64::new(-1.0, 0.0);
    m
}

/// Spin-flipped state `(sigma_y (x) sigma_y) rho^* (sigma_y (x) sigma_y)`.
pub fn spin_flip(rho: &DensityMatrix) -> Result<ComplexMatrix> {
    require_two_qubit(rho)?;
    let y = yy();
    Ok(y.matmul(&rho.matrix().conj()).matmul(&y))
}

/// Wootters concurrence, clamped to `[0, 1]`.
///
/// The square roots of the eigenvalues of `rho rho~` are the singular values
/// of `B^T (sigma_y (x) sigma_y) B` for any factor `rho = B B^dagger`; using
/// the eigen-weighted factor keeps small values accurate.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    require_two_qubit(rho)?;
    let b = rho.spectral_factor()?;
    let tau = b.transpose().matmul(&yy()).matmul(&b);
    let mut xi = svd(&tau)?.singular_values;
    xi.resize(4, 0.0);
    let c = xi[0] - xi[1] - xi[2] - xi[3];
    Ok(c.clamp(0.0, 1.0))
}

/// Shannon entropy `h(x)` in bits.
pub fn binary_entropy(x: f64) -> f64 {
    let term = |p: f64| if p <= 0.0 { 0.0 } else { -p * p.log2() };
    term(x) + term(1.0 - x)
}

/// `sqrt(1 - C^2)`. Concurrences within a few ulps of 1 are taken as 1: the
/// square root would otherwise turn rounding noise into errors near 1e-8.
fn co_concurrence(c: f64) -> f64 {
    let c = c.clamp(0.0, 1.0);
    if 1.0 - c < 1e-14 {
        0.0
    } else {
        ((1.0 - c) * (1.0 + c)).sqrt()
    }
}

pub fn formation_from_concurrence(c: f64) -> f64 {
    binary_entropy(0.5 + 0.5 * co_concurrence(c))
}

pub fn geometric_from_concurrence(c: f64) -> f64 {
    0.5 * (1.0 - co_concurrence(c))
}

pub fn fs_from_concurrence(c: f64) -> f64 {
    1.0 - geometric_from_concurrence(c)
}

/// Bures measure `2 - 2 sqrt(F_s)` for a known fidelity of separability.
pub fn bures_from_fs(f_s: f64) -> f64 {
    2.0 - 2.0 * f_s.sqrt()
}

pub fn bures_from_concurrence(c: f64) -> f64 {
    bures_from_fs(fs_from_concurrence(c))
}

pub fn entanglement_of_formation_2q(rho: &DensityMatrix) -> Result<f64> {
    Ok(formation_from_concurrence(concurrence(rho)?))
}

pub fn geometric_measure_2q(rho: &DensityMatrix) -> Result<f64> {
    Ok(geometric_from_concurrence(concurrence(rho)?))
}

/// Fidelity of separability of a two-qubit state; `1 - geometric_measure_2q`.
pub fn fs_2q(rho: &DensityMatrix) -> Result<f64> {
    Ok(fs_from_concurrence(concurrence(rho)?))
}

pub fn bures_measure_2q(rho: &DensityMatrix) -> Result<f64> {
    Ok(bures_from_concurrence(concurrence(rho)?))
}

/// Groverian measure `sqrt(1 - F_s)` for a supplied fidelity of separability.
pub fn groverian_measure(f_s: f64) -> Result<f64> {
    if !(f_s > 0.0 && f_s <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "fidelity of separability {f_s} outside (0, 1]"
        )));
    }
    Ok((1.0 - f_s).sqrt())
}

/// Lower bound `max{0, -log2(1 - E_G) - S(rho)}` on the relative entropy of
/// entanglement.
pub fn er_lower_bound(rho: &DensityMatrix, e_g: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&e_g) {
        return Err(Error::InvalidArgument(format!(
            "geometric measure {e_g} outside [0, 1)"
        )));
    }
    Ok((-(1.0 - e_g).log2() - von_neumann_entropy(rho)?).max(0.0))
}

/// All measures that can be evaluated for a state. Two-qubit fields are
/// `None` elsewhere; distance-based fields need a fidelity of separability.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureReport {
    pub concurrence: Option<f64>,
    pub e_formation: Option<f64>,
    pub e_geometric: Option<f64>,
    pub e_bures: Option<f64>,
    pub e_groverian: Option<f64>,
    pub f_separability: Option<f64>,
    pub entropy: f64,
    pub er_lower_bound: Option<f64>,
}

/// Report using the closed forms for two qubits; for other shapes only the
/// entropy is filled in (see [`report_with_fs`]).
pub fn report_all(rho: &DensityMatrix) -> Result<MeasureReport> {
    if rho.is_two_qubit() {
        let c = concurrence(rho)?;
        let mut report = report_with_fs(rho, fs_from_concurrence(c))?;
        report.concurrence = Some(c);
        report.e_formation = Some(formation_from_concurrence(c));
        Ok(report)
    } else {
        Ok(MeasureReport {
            concurrence: None,
            e_formation: None,
            e_geometric: None,
            e_bures: None,
            e_groverian: None,
            f_separability: None,
            entropy: von_neumann_entropy(rho)?,
            er_lower_bound: None,
        })
    }
}

/// Report from an externally computed fidelity of separability.
pub fn report_with_fs(rho: &DensityMatrix, f_s: f64) -> Result<MeasureReport> {
    let e_g = 1.0 - f_s;
    Ok(MeasureReport {
        concurrence: None,
        e_formation: None,
        e_geometric: Some(e_g),
        e_bures: Some(bures_from_fs(f_s)),
        e_groverian: Some(groverian_measure(f_s)?),
        f_separability: Some(f_s),
        entropy: von_neumann_entropy(rho)?,
        er_lower_bound: Some(er_lower_bound(rho, e_g)?),
    })
}
