//! Singular value decomposition through the Hermitian eigensolver.
//!
//! The right singular vectors come from the eigenvectors of the smaller Gram
//! matrix; each left vector is `M v / |M v|`, so singular values are measured
//! directly as norms rather than as square roots of eigenvalues. Left vectors
//! belonging to zero singular values are completed by Gram-Schmidt.

use num_complex::Complex64;

use super::eigen::eig_hermitian;
use super::matrix::{inner, norm, ComplexMatrix};
use crate::error::{Error, Result};

/// Singular values at or below this (relative to `max(1, s_max)`) are zero.
pub const SINGULAR_CUTOFF: f64 = 1e-12;

/// `M = U diag(singular_values) V^dagger` with `U` (rows x rows) and
/// `V` (cols x cols) unitary. `singular_values` has `min(rows, cols)` entries in
/// non-increasing order.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let (m, n) = (self.u.rows(), self.v.rows());
        ComplexMatrix::from_fn(m, n, |i, j| {
            self.singular_values
                .iter()
                .enumerate()
                .map(|(k, &s)| self.u[(i, k)] * self.v[(j, k)].conj() * s)
                .sum()
        })
    }
}

pub fn svd(m: &ComplexMatrix) -> Result<Svd> {
    decompose(m, true)
}

/// Thin SVD: `u` is `rows x k` and `v` is `cols x k` with `k = min(rows, cols)`.
pub fn svd_thin(m: &ComplexMatrix) -> Result<Svd> {
    decompose(m, false)
}

fn decompose(m: &ComplexMatrix, full: bool) -> Result<Svd> {
    if m.as_slice().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidArgument("SVD of a matrix with non-finite entries".into()));
    }
    if m.rows() < m.cols() {
        let t = decompose(&m.adjoint(), full)?;
        return Ok(Svd {
            u: t.v,
            singular_values: t.singular_values,
            v: t.u,
        });
    }
    let (rows, n) = (m.rows(), m.cols());
    // Unit-norm copy for the Gram matrix: the eigensolver's tolerance is
    // absolute below norm 1, which would leave small matrices unrotated.
    let fro = m.frobenius_norm();
    let unit = if fro > 0.0 { m.scale(1.0 / fro) } else { m.clone() };
    let eig = eig_hermitian(&unit.adjoint_mul(&unit))?;

    // Descending by eigenvalue; the stable sort keeps the solver's order on ties.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let v = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);

    let mut singular_values = Vec::with_capacity(n);
    let mut left: Vec<Vec<Complex64>> = Vec::with_capacity(rows);
    let mut scale = 1.0f64;
    for j in 0..n {
        let mut w = m.mul_vec(&v.column(j));
        let mut s = norm(&w);
        if j == 0 {
            scale = s.max(1.0);
        }
        if let Some(&prev) = singular_values.last() {
            s = f64::min(s, prev);
        }
        if s <= SINGULAR_CUTOFF * scale {
            singular_values.push(0.0);
            continue;
        }
        for z in w.iter_mut() {
            *z /= s;
        }
        // Re-orthogonalise against earlier left vectors; only matters for
        // tiny singular values where M v loses relative accuracy.
        for u in &left {
            let c = inner(u, &w);
            for (a, b) in w.iter_mut().zip(u) {
                *a -= c * b;
            }
        }
        let len = norm(&w);
        if len < 0.5 {
            // M v is numerically inside the span already found
            singular_values.push(0.0);
            continue;
        }
        for z in w.iter_mut() {
            *z /= len;
        }
        singular_values.push(s);
        left.push(w);
    }

    // Left vectors for zero singular values keep their column slot, so fill
    // the basis in singular-value order.
    let width = if full { rows } else { n };
    let mut u = ComplexMatrix::zeros(rows, width);
    let mut completed = left.clone();
    extend_orthonormal(&mut completed, rows, width);
    let mut next_nonzero = 0;
    let mut next_extra = left.len();
    for (j, &s) in singular_values.iter().enumerate() {
        if s > 0.0 {
            u.set_column(j, &completed[next_nonzero]);
            next_nonzero += 1;
        } else {
            u.set_column(j, &completed[next_extra]);
            next_extra += 1;
        }
    }
    for j in n..width {
        u.set_column(j, &completed[next_extra]);
        next_extra += 1;
    }
    Ok(Svd {
        u,
        singular_values,
        v,
    })
}

/// Extends an orthonormal set to a basis of `C^dim` by greedily projecting
/// standard basis vectors onto the orthogonal complement.
pub fn complete_basis(vectors: &mut Vec<Vec<Complex64>>, dim: usize) {
    extend_orthonormal(vectors, dim, dim);
}

fn extend_orthonormal(vectors: &mut Vec<Vec<Complex64>>, dim: usize, target: usize) {
    while vectors.len() < target {
        let mut best: Option<(f64, Vec<Complex64>)> = None;
        for k in 0..dim {
            let mut e = vec![Complex64::new(0.0, 0.0); dim];
            e[k] = Complex64::new(1.0, 0.0);
            for _ in 0..2 {
                for u in vectors.iter() {
                    let c = inner(u, &e);
                    for (a, b) in e.iter_mut().zip(u) {
                        *a -= c * b;
                    }
                }
            }
            let len = norm(&e);
            if best.as_ref().map_or(true, |(b, _)| len > *b + 1e-12) {
                best = Some((len, e));
            }
        }
        let (len, mut e) = best.expect("dim > 0");
        for z in e.iter_mut() {
            *z /= len;
        }
        vectors.push(e);
    }
}

/// Sum of singular values.
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    Ok(svd_thin(m)?.singular_values.iter().sum())
}

/// Isometric polar factor `W` of an `r x s` matrix with `r <= s`: the
/// maximiser of `Re Tr(W^dagger M)` over `W W^dagger = I`, together with the
/// attained value (the trace norm of `M`).
pub fn polar_isometry(m: &ComplexMatrix) -> Result<(ComplexMatrix, f64)> {
    assert!(m.rows() <= m.cols(), "polar_isometry expects a wide matrix");
    let d = svd_thin(m)?;
    let r = m.rows();
    let s = m.cols();
    let w = ComplexMatrix::from_fn(r, s, |i, j| {
        (0..r).map(|k| d.u[(i, k)] * d.v[(j, k)].conj()).sum()
    });
    Ok((w, d.singular_values.iter().sum()))
}
