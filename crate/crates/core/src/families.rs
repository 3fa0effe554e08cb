//! Named states used throughout the examples and checks.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::state::{DensityMatrix, PureState};

fn real_state(dims: Vec<usize>, amps: &[f64]) -> PureState {
    PureState::normalized(dims, amps.iter().map(|&x| Complex64::new(x, 0.0)).collect())
        .expect("nonzero amplitudes")
}

/// `(|00> + |11>)/sqrt(2)`.
pub fn bell_phi_plus() -> PureState {
    real_state(vec![2, 2], &[1.0, 0.0, 0.0, 1.0])
}

/// `(|00> - |11>)/sqrt(2)`.
pub fn bell_phi_minus() -> PureState {
    real_state(vec![2, 2], &[1.0, 0.0, 0.0, -1.0])
}

/// `(|01> + |10>)/sqrt(2)`.
pub fn bell_psi_plus() -> PureState {
    real_state(vec![2, 2], &[0.0, 1.0, 1.0, 0.0])
}

/// `(|01> - |10>)/sqrt(2)`.
pub fn bell_psi_minus() -> PureState {
    real_state(vec![2, 2], &[0.0, 1.0, -1.0, 0.0])
}

/// Equal mixture of `|psi+>` and `|phi+>`, a separable Bell-diagonal state.
pub fn bell_pair_mixture() -> DensityMatrix {
    DensityMatrix::mixture(&[(0.5, &bell_psi_plus().density()), (0.5, &bell_phi_plus().density())])
        .expect("valid mixture")
}

/// `(|0...0> + |1...1>)/sqrt(2)` on `n` qubits.
pub fn ghz(n: usize) -> Result<PureState> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("GHZ state needs >= 2 qubits, got {n}")));
    }
    let mut a = vec![0.0; 1 << n];
    a[0] = 1.0;
    a[(1 << n) - 1] = 1.0;
    Ok(real_state(vec![2; n], &a))
}

/// Equal superposition of the single-excitation states on `n` qubits.
pub fn w_state(n: usize) -> Result<PureState> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("W state needs >= 2 qubits, got {n}")));
    }
    let mut a = vec![0.0; 1 << n];
    for k in 0..n {
        a[1 << k] = 1.0;
    }
    Ok(real_state(vec![2; n], &a))
}

/// Maximally entangled `sum_k |kk>/sqrt(d)` in `d x d`.
pub fn maximally_entangled(d: usize) -> Result<PureState> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("local dimension {d} < 2")));
    }
    let mut a = vec![0.0; d * d];
    for k in 0..d {
        a[k * d + k] = 1.0;
    }
    Ok(real_state(vec![d, d], &a))
}

/// Werner-type mixture `v |phi+><phi+| + (1 - v) I/4`.
pub fn isotropic_2q(v: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidArgument(format!("visibility {v} outside [0, 1]")));
    }
    let mixed = DensityMatrix::maximally_mixed(vec![2, 2])?;
    DensityMatrix::mixture(&[(v, &bell_phi_plus().density()), (1.0 - v, &mixed)])
}

fn check_gvp(a: f64, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&a) || !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "GVP parameters need a in [0, 1] and p in (0, 1], got a = {a}, p = {p}"
        )));
    }
    Ok(())
}

/// Generalised Vedral-Plenio state `p |psi><psi| + (1 - p) |01><01|` with
/// `|psi> = sqrt(a) |01> + sqrt(1 - a) |10>`.
pub fn gvp_state(a: f64, p: f64) -> Result<DensityMatrix> {
    check_gvp(a, p)?;
    let mut m = ComplexMatrix::zeros(4, 4);
    let off = p * (a * (1.0 - a)).sqrt();
    m[(1, 1)] = Complex64::new(1.0 - p + p * a, 0.0);
    m[(2, 2)] = Complex64::new(p * (1.0 - a), 0.0);
    m[(1, 2)] = Complex64::new(off, 0.0);
    m[(2, 1)] = Complex64::new(off, 0.0);
    DensityMatrix::new(vec![2, 2], m)
}

/// Closest separable state of the GVP family under relative entropy:
/// `(1 - p + p a) |01><01| + p (1 - a) |10><10|`.
pub fn gvp_sigma(a: f64, p: f64) -> Result<DensityMatrix> {
    check_gvp(a, p)?;
    DensityMatrix::new(
        vec![2, 2],
        ComplexMatrix::from_real_diagonal(&[0.0, 1.0 - p + p * a, p * (1.0 - a), 0.0]),
    )
}
