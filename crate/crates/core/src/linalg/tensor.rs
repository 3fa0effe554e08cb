use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

/// Kronecker product `A (x) B`.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (rb, cb) = (b.rows(), b.cols());
    ComplexMatrix::from_fn(a.rows() * rb, a.cols() * cb, |i, j| {
        a[(i / rb, j / cb)] * b[(i % rb, j % cb)]
    })
}

/// Offsets into the full index space for every joint value of the parties in
/// `parties`, enumerated in row-major order over those parties.
fn party_offsets(dims: &[usize], parties: &[usize]) -> Vec<usize> {
    let mut strides = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let mut offsets = vec![0usize];
    for &p in parties {
        let mut next = Vec::with_capacity(offsets.len() * dims[p]);
        for &o in &offsets {
            for digit in 0..dims[p] {
                next.push(o + digit * strides[p]);
            }
        }
        offsets = next;
    }
    offsets
}

/// Partial trace keeping the parties listed in `keep` (in increasing order in
/// the output, whatever the order given).
pub fn partial_trace(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    let total: usize = dims.iter().product();
    if !m.is_square() || m.rows() != total {
        return Err(Error::Dimension(format!(
            "party dims {:?} (total {}) do not match a {}x{} matrix",
            dims,
            total,
            m.rows(),
            m.cols()
        )));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.iter().any(|&k| k >= dims.len()) {
        return Err(Error::Dimension(format!(
            "kept party index out of range for {} parties",
            dims.len()
        )));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !kept.contains(k)).collect();
    let keep_offsets = party_offsets(dims, &kept);
    let trace_offsets = party_offsets(dims, &traced);
    let n = keep_offsets.len();
    Ok(ComplexMatrix::from_fn(n, n, |a, b| {
        trace_offsets
            .iter()
            .map(|&t| m[(keep_offsets[a] + t, keep_offsets[b] + t)])
            .sum()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::{ginibre, random_psd};
    use num_complex::Complex64;

    #[test]
    fn identity_kron_identity() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(tensor_product(&i2, &i2), ComplexMatrix::identity(4));
    }

    #[test]
    fn basis_kets() {
        let zero = ComplexMatrix::column_vector(&[Complex64::new(1., 0.), Complex64::new(0., 0.)]);
        let one = ComplexMatrix::column_vector(&[Complex64::new(0., 0.), Complex64::new(1., 0.)]);
        let k = tensor_product(&zero, &one);
        assert_eq!(k.rows(), 4);
        assert_eq!(k.column(0)[1], Complex64::new(1., 0.));
        assert_eq!(k.as_slice().iter().filter(|z| z.norm() > 0.0).count(), 1);
    }

    #[test]
    fn mixed_product_property() {
        for seed in 0..10 {
            let a = ginibre(2, 2, 4 * seed);
            let b = ginibre(2, 2, 4 * seed + 1);
            let c = ginibre(2, 2, 4 * seed + 2);
            let d = ginibre(2, 2, 4 * seed + 3);
            let lhs = tensor_product(&a, &b).matmul(&tensor_product(&c, &d));
            let rhs = tensor_product(&a.matmul(&c), &b.matmul(&d));
            assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }
    }

    #[test]
    fn bell_reduces_to_maximally_mixed() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut psi = vec![Complex64::new(0., 0.); 4];
        psi[0] = Complex64::new(h, 0.);
        psi[3] = Complex64::new(h, 0.);
        let rho = ComplexMatrix::projector(&psi);
        let red = partial_trace(&rho, &[2, 2], &[0]).unwrap();
        assert!(red.max_abs_diff(&ComplexMatrix::identity(2).scale(0.5)) < 1e-15);
    }

    #[test]
    fn product_state_reduction() {
        let a = random_psd(2, 2, 1);
        let a = a.scale(1.0 / a.trace().re);
        let b = random_psd(3, 3, 2);
        let b = b.scale(1.0 / b.trace().re);
        let ab = tensor_product(&a, &b);
        assert!(partial_trace(&ab, &[2, 3], &[0]).unwrap().max_abs_diff(&a) < 1e-14);
        assert!(partial_trace(&ab, &[2, 3], &[1]).unwrap().max_abs_diff(&b) < 1e-14);
    }

    #[test]
    fn trace_preserved_and_middle_party() {
        let m = ginibre(12, 12, 7);
        for keep in [vec![0], vec![1], vec![2], vec![0, 2], vec![]] {
            let r = partial_trace(&m, &[2, 3, 2], &keep).unwrap();
            assert!((r.trace() - m.trace()).norm() < 1e-12);
        }
    }

    #[test]
    fn dims_mismatch_is_an_error() {
        assert!(partial_trace(&ComplexMatrix::identity(4), &[2, 3], &[0]).is_err());
    }
}
