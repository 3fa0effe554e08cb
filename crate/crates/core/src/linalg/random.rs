//! Seeded sampling of Haar unitaries, Ginibre matrices and random states.
//!
//! Every sampler takes an explicit seed (or an explicit RNG); there is no
//! global generator.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::matrix::{inner, norm, ComplexMatrix};
use crate::error::{Error, Result};

/// Generator for `(seed, stream)`. Independent work items sharing a seed use
/// distinct streams, so results do not depend on scheduling.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn ginibre_with<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

pub fn ginibre(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
    ginibre_with(&mut rng_for(seed, 0), rows, cols)
}

/// Uniformly distributed unit vector in `C^dim`.
pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<Complex64> {
    loop {
        let mut v: Vec<Complex64> = (0..dim).map(|_| gaussian(rng)).collect();
        let n = norm(&v);
        if n > 1e-8 {
            v.iter_mut().for_each(|z| *z /= n);
            return v;
        }
    }
}

/// Haar-distributed unitary: Gram-Schmidt of a Ginibre matrix, which yields
/// the QR factor with positive `R` diagonal.
pub fn haar_unitary_with<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    loop {
        let g = ginibre_with(rng, dim, dim);
        let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
        let mut ok = true;
        for j in 0..dim {
            let mut c = g.column(j);
            for _ in 0..2 {
                for q in &cols {
                    let proj = inner(q, &c);
                    for (a, b) in c.iter_mut().zip(q) {
                        *a -= proj * b;
                    }
                }
            }
            let n = norm(&c);
            if n < 1e-10 {
                ok = false;
                break;
            }
            c.iter_mut().for_each(|z| *z /= n);
            cols.push(c);
        }
        if ok {
            return ComplexMatrix::from_fn(dim, dim, |i, j| cols[j][i]);
        }
    }
}

pub fn haar_random_unitary(dim: usize, seed: u64) -> ComplexMatrix {
    haar_unitary_with(&mut rng_for(seed, 0), dim)
}

pub fn random_hermitian(dim: usize, seed: u64) -> ComplexMatrix {
    ginibre(dim, dim, seed).hermitian_part()
}

/// Unnormalised PSD matrix `G G^dagger` of the given rank.
pub fn random_psd(dim: usize, rank: usize, seed: u64) -> ComplexMatrix {
    let g = ginibre(dim, rank, seed);
    g.matmul(&g.adjoint())
}

/// Random density matrix of exactly `rank` (Hilbert-Schmidt induced measure).
pub fn random_density_with<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> Result<ComplexMatrix> {
    if rank == 0 || rank > dim {
        return Err(Error::InvalidArgument(format!(
            "rank {rank} out of range 1..={dim}"
        )));
    }
    let g = ginibre_with(rng, dim, rank);
    let m = g.matmul(&g.adjoint());
    let t = m.trace().re;
    let mut out = m.scale(1.0 / t);
    for i in 0..dim {
        out[(i, i)].im = 0.0;
    }
    // exact Hermitian symmetry
    Ok(out.hermitian_part())
}

/// Random density matrix over parties `dims` with the requested rank.
pub fn random_density_matrix(dims: &[usize], rank: usize, seed: u64) -> Result<ComplexMatrix> {
    let dim: usize = dims.iter().product();
    random_density_with(&mut rng_for(seed, 0), dim, rank)
}
