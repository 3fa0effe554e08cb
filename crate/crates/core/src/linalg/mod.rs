//! Dense complex linear algebra for small matrices.

mod eigen;
mod matrix;
pub mod random;
mod svd;
mod tensor;

pub use eigen::{eig_hermitian, eig_psd, sqrt_psd, HermitianEig, HERMITIAN_TOL, PSD_CLAMP};
pub use matrix::{inner, kron_vec, norm, normalize, ComplexMatrix, ONE, ZERO};
pub use random::{haar_random_unitary, random_density_matrix};
pub use svd::{complete_basis, polar_isometry, svd, svd_thin, trace_norm, Svd, SINGULAR_CUTOFF};
pub use tensor::{partial_trace, tensor_product};
