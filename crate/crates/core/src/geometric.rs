//! Closest product states of pure states.
//!
//! Bipartite inputs are solved exactly from the Schmidt decomposition.
//! Multipartite inputs use cyclic alternating updates: each factor is
//! replaced by the normalised contraction of the state against all the other
//! factors, which never lowers the overlap.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::random::{random_unit_vector, rng_for};
use crate::linalg::{inner, norm, svd_thin};
use crate::state::{ProductVector, PureState};

pub const SWEEP_TOL: f64 = 1e-12;
pub const MAX_SWEEPS: usize = 10_000;

/// Restart budget used when none is given.
pub fn default_restarts(parties: usize) -> usize {
    if parties >= 4 {
        32
    } else {
        16
    }
}

#[derive(Debug, Clone)]
pub struct ClosestProductResult {
    /// `max |<phi|psi>|^2` over product `phi`.
    pub f_s: f64,
    /// Maximiser, phased so that `<product|psi>` is real and nonnegative.
    pub product: ProductVector,
    /// Sweeps of the winning restart (0 for the exact bipartite path).
    pub iterations: usize,
    pub restarts_used: usize,
    pub converged: bool,
    /// Overlap `|<phi|psi>|^2` after each sweep of the winning restart.
    pub trace: Vec<f64>,
}

/// Exact closest product state of a bipartite pure state.
pub fn fs_pure_bipartite(psi: &PureState) -> Result<ClosestProductResult> {
    if psi.dims().len() != 2 {
        return Err(Error::Dimension(format!(
            "bipartite evaluation needs 2 parties, got {}",
            psi.dims().len()
        )));
    }
    let (u, v, s1) = leading_schmidt_pair(psi.dims(), psi.amplitudes())?;
    Ok(ClosestProductResult {
        f_s: (s1 * s1).min(1.0),
        product: ProductVector::new(vec![u, v])?,
        iterations: 0,
        restarts_used: 1,
        converged: true,
        trace: Vec::new(),
    })
}

/// Leading Schmidt pair `(u, v, s)` with `<u (x) v|x> = s >= 0` for a
/// (possibly unnormalised) bipartite vector `x`.
pub(crate) fn leading_schmidt_pair(
    dims: &[usize],
    x: &[Complex64],
) -> Result<(Vec<Complex64>, Vec<Complex64>, f64)> {
    let m = crate::linalg::ComplexMatrix::from_vec(dims[0], dims[1], x.to_vec())?;
    let d = svd_thin(&m)?;
    let u = d.u.column(0);
    let v: Vec<Complex64> = d.v.column(0).iter().map(|z| z.conj()).collect();
    Ok((u, v, d.singular_values[0]))
}

/// `<(x)_{j != k} phi_j | x>` as a vector on party `k`.
pub fn contract(dims: &[usize], x: &[Complex64], factors: &[Vec<Complex64>], k: usize) -> Vec<Complex64> {
    let n = dims.len();
    let mut out = vec![Complex64::new(0.0, 0.0); dims[k]];
    let mut digits = vec![0usize; n];
    for &amp in x {
        if amp.re != 0.0 || amp.im != 0.0 {
            let mut w = amp;
            for j in 0..n {
                if j != k {
                    w *= factors[j][digits[j]].conj();
                }
            }
            out[digits[k]] += w;
        }
        for j in (0..n).rev() {
            digits[j] += 1;
            if digits[j] < dims[j] {
                break;
            }
            digits[j] = 0;
        }
    }
    out
}

/// Outcome of alternating updates from one starting point.
#[derive(Debug, Clone)]
pub struct AlternatingRun {
    pub factors: Vec<Vec<Complex64>>,
    /// Final `|<phi|x>|^2`.
    pub overlap_sq: f64,
    pub sweeps: usize,
    pub converged: bool,
    pub trace: Vec<f64>,
}

/// Alternating maximisation of `|<phi|x>|` starting from `start`. `x` need not
/// be normalised. The result's overlap is at least that of `start`.
pub fn refine_product(
    dims: &[usize],
    x: &[Complex64],
    start: Vec<Vec<Complex64>>,
    max_sweeps: usize,
    tol: f64,
) -> AlternatingRun {
    let n = dims.len();
    let mut factors = start;
    let mut prev = {
        let c = contract(dims, x, &factors, 0);
        inner(&factors[0], &c).norm_sqr()
    };
    let scale = inner(x, x).re;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < max_sweeps {
        sweeps += 1;
        let mut current = prev;
        for k in 0..n {
            let mut c = contract(dims, x, &factors, k);
            let len = norm(&c);
            if len == 0.0 {
                // x is orthogonal to every choice here; keep the factor
                continue;
            }
            c.iter_mut().for_each(|z| *z /= len);
            factors[k] = c;
            current = len * len;
        }
        trace.push(current);
        if current - prev < tol * scale.max(f64::MIN_POSITIVE) || current >= scale * (1.0 - 1e-14) {
            converged = true;
            prev = current.max(prev);
            break;
        }
        prev = current;
    }
    AlternatingRun {
        factors,
        overlap_sq: prev,
        sweeps,
        converged,
        trace,
    }
}

fn random_factors(dims: &[usize], seed: u64, stream: u64) -> Vec<Vec<Complex64>> {
    let mut rng = rng_for(seed, stream);
    dims.iter().map(|&d| random_unit_vector(&mut rng, d)).collect()
}

/// Multiplies the first factor by the phase of `<phi|x>` so that the
/// overlap becomes real and nonnegative.
pub(crate) fn align_phase(dims: &[usize], x: &[Complex64], factors: &mut [Vec<Complex64>]) -> f64 {
    let c = contract(dims, x, factors, 0);
    let ov = inner(&factors[0], &c);
    let r = ov.norm();
    if r > 0.0 {
        let phase = ov / r;
        factors[0].iter_mut().for_each(|z| *z *= phase);
    }
    r
}

/// Best product state over `restarts` seeded starting points. Restart `i`
/// draws its Haar-random factors from stream `i` of `seed`.
pub fn fs_pure_multipartite(psi: &PureState, restarts: usize, seed: u64) -> Result<ClosestProductResult> {
    if psi.dims().len() < 2 {
        return Err(Error::Dimension("closest product state needs >= 2 parties".into()));
    }
    if restarts == 0 {
        return Err(Error::InvalidArgument("restarts must be >= 1".into()));
    }
    let dims = psi.dims();
    let runs: Vec<AlternatingRun> = (0..restarts)
        .into_par_iter()
        .map(|i| {
            refine_product(
                dims,
                psi.amplitudes(),
                random_factors(dims, seed, i as u64),
                MAX_SWEEPS,
                SWEEP_TOL,
            )
        })
        .collect();
    let mut best = 0;
    for (i, run) in runs.iter().enumerate() {
        if run.overlap_sq > runs[best].overlap_sq {
            best = i;
        }
    }
    let any_converged = runs.iter().any(|r| r.converged);
    let run = runs.into_iter().nth(best).expect("at least one restart");
    finish(psi, run, restarts, any_converged)
}

fn finish(psi: &PureState, run: AlternatingRun, restarts: usize, converged: bool) -> Result<ClosestProductResult> {
    let mut factors = run.factors;
    let r = align_phase(psi.dims(), psi.amplitudes(), &mut factors);
    Ok(ClosestProductResult {
        f_s: (r * r).min(1.0),
        product: ProductVector::new(factors)?,
        iterations: run.sweeps,
        restarts_used: restarts,
        converged,
        trace: run.trace,
    })
}

/// Alternating search seeded from a known product vector, as used inside
/// the roof solver to keep its objective monotone.
pub fn fs_pure_warm(psi: &PureState, start: &ProductVector) -> Result<ClosestProductResult> {
    if start.dims() != psi.dims() {
        return Err(Error::Dimension("warm start has different party dims".into()));
    }
    let run = refine_product(psi.dims(), psi.amplitudes(), start.factors().to_vec(), MAX_SWEEPS, SWEEP_TOL);
    let converged = run.converged;
    finish(psi, run, 1, converged)
}

/// Exact path for two parties, alternating search otherwise.
pub fn fs_pure(psi: &PureState, restarts: usize, seed: u64) -> Result<ClosestProductResult> {
    if psi.dims().len() == 2 {
        fs_pure_bipartite(psi)
    } else {
        fs_pure_multipartite(psi, restarts, seed)
    }
}

/// Largest change `|| c_k/|c_k| - phi_k ||` when any factor is re-contracted.
/// Zero at an exact fixed point of the alternating map.
pub fn fixed_point_residual(psi: &PureState, product: &ProductVector) -> f64 {
    let factors = product.factors();
    (0..factors.len())
        .map(|k| {
            let mut c = contract(psi.dims(), psi.amplitudes(), factors, k);
            let len = norm(&c);
            if len == 0.0 {
                return 0.0;
            }
            c.iter_mut().for_each(|z| *z /= len);
            c.iter()
                .zip(&factors[k])
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{bell_phi_plus, ghz, w_state};
    use crate::linalg::random::{haar_unitary_with, random_unit_vector};
    use crate::linalg::kron_vec;

    fn random_pure(dims: &[usize], seed: u64) -> PureState {
        let d = dims.iter().product();
        PureState::new(dims.to_vec(), random_unit_vector(&mut rng_for(seed, 77), d)).unwrap()
    }

    fn overlap_sq(psi: &PureState, p: &ProductVector) -> f64 {
        psi.overlap(&p.to_vector()).norm_sqr()
    }

    #[test]
    fn bipartite_anchors() {
        let r = fs_pure_bipartite(&bell_phi_plus()).unwrap();
        assert!((r.f_s - 0.5).abs() < 1e-15);
        let r = fs_pure_bipartite(&PureState::basis(vec![2, 2], 1).unwrap()).unwrap();
        assert_eq!(r.f_s, 1.0);
        for a in [0.1f64, 0.3, 0.5, 0.8] {
            let c = |x: f64| Complex64::new(x, 0.0);
            let psi = PureState::new(vec![2, 2], vec![c(0.0), c(a.sqrt()), c((1.0 - a).sqrt()), c(0.0)]).unwrap();
            let r = fs_pure_bipartite(&psi).unwrap();
            assert!((r.f_s - a.max(1.0 - a)).abs() < 1e-14);
            assert!((overlap_sq(&psi, &r.product) - r.f_s).abs() < 1e-14);
        }
        assert!(fs_pure_bipartite(&ghz(3).unwrap()).is_err());
    }

    #[test]
    fn bipartite_overlap_is_real_positive() {
        for seed in 0..20 {
            let psi = random_pure(&[2, 3], seed);
            let r = fs_pure_bipartite(&psi).unwrap();
            let ov = inner(&r.product.to_vector(), psi.amplitudes());
            assert!(ov.im.abs() < 1e-12 && ov.re > 0.0);
            assert!((ov.norm_sqr() - r.f_s).abs() < 1e-12);
        }
    }

    #[test]
    fn product_state_takes_one_sweep() {
        let mut rng = rng_for(3, 0);
        let f: Vec<Vec<Complex64>> = (0..3).map(|_| random_unit_vector(&mut rng, 2)).collect();
        let v = kron_vec(&kron_vec(&f[0], &f[1]), &f[2]);
        let psi = PureState::new(vec![2, 2, 2], v).unwrap();
        let r = fs_pure_multipartite(&psi, 4, 1).unwrap();
        assert!((r.f_s - 1.0).abs() < 1e-12);
        assert_eq!(r.iterations, 1);
        assert!(r.converged);
    }

    /// Brute-force grid over real product states `(cos t, sin t)^{(x)3}` with
    /// step 0.01 rad, then a local grid refinement around the best cell. The
    /// states below have real nonnegative amplitudes, so real factors suffice.
    fn grid_oracle(psi: &PureState) -> f64 {
        let amps: Vec<f64> = psi.amplitudes().iter().map(|z| z.re).collect();
        let eval = |t: [f64; 3]| {
            let f: Vec<[f64; 2]> = t.iter().map(|x| [x.cos(), x.sin()]).collect();
            let mut s = 0.0;
            for (i, a) in amps.iter().enumerate() {
                s += a * f[0][(i >> 2) & 1] * f[1][(i >> 1) & 1] * f[2][i & 1];
            }
            s * s
        };
        let steps = (std::f64::consts::PI / 0.01) as usize + 1;
        let mut best = (0.0, [0.0; 3]);
        for i in 0..steps {
            for j in 0..steps {
                for k in 0..steps {
                    let t = [i as f64 * 0.01, j as f64 * 0.01, k as f64 * 0.01];
                    let v = eval(t);
                    if v > best.0 {
                        best = (v, t);
                    }
                }
            }
        }
        let mut h = 0.01;
        while h > 1e-9 {
            let c = best.1;
            for i in -10..=10 {
                for j in -10..=10 {
                    for k in -10..=10 {
                        let t = [c[0] + i as f64 * h / 10.0, c[1] + j as f64 * h / 10.0, c[2] + k as f64 * h / 10.0];
                        let v = eval(t);
                        if v > best.0 {
                            best = (v, t);
                        }
                    }
                }
            }
            h /= 10.0;
        }
        best.0
    }

    #[test]
    fn ghz_and_w_match_grid_oracle() {
        let g = ghz(3).unwrap();
        let w = w_state(3).unwrap();
        let og = grid_oracle(&g);
        let ow = grid_oracle(&w);
        assert!((og - 0.5).abs() < 1e-9);
        assert!((ow - 4.0 / 9.0).abs() < 1e-9);
        let rg = fs_pure_multipartite(&g, 16, 7).unwrap();
        let rw = fs_pure_multipartite(&w, 16, 7).unwrap();
        assert!((rg.f_s - og).abs() < 1e-5, "{}", rg.f_s);
        assert!((rw.f_s - ow).abs() < 1e-5, "{}", rw.f_s);
    }

    #[test]
    fn overlap_trace_is_monotone() {
        for seed in 0..30 {
            let psi = random_pure(&[2, 3, 2], seed);
            let r = fs_pure_multipartite(&psi, 4, seed).unwrap();
            for w in r.trace.windows(2) {
                assert!(w[1] >= w[0] - 1e-14);
            }
            assert!((overlap_sq(&psi, &r.product) - r.f_s).abs() < 1e-10);
        }
    }

    #[test]
    fn multipartite_agrees_with_schmidt() {
        for dims in [[2usize, 2], [2, 3], [3, 3]] {
            for seed in 0..100 {
                let psi = random_pure(&dims, seed);
                let exact = fs_pure_bipartite(&psi).unwrap().f_s;
                let alt = fs_pure_multipartite(&psi, 16, seed).unwrap().f_s;
                assert!((exact - alt).abs() < 1e-8, "{dims:?} seed {seed}: {exact} vs {alt}");
            }
        }
    }

    #[test]
    fn local_unitary_invariance() {
        for seed in 0..20 {
            let psi = random_pure(&[2, 2, 2], seed);
            let mut rng = rng_for(seed, 5);
            let us: Vec<_> = (0..3).map(|_| haar_unitary_with(&mut rng, 2)).collect();
            let u = crate::linalg::tensor_product(&crate::linalg::tensor_product(&us[0], &us[1]), &us[2]);
            let rotated = PureState::new(vec![2, 2, 2], u.mul_vec(psi.amplitudes())).unwrap();
            let a = fs_pure_multipartite(&psi, 16, 1).unwrap().f_s;
            let b = fs_pure_multipartite(&rotated, 16, 2).unwrap().f_s;
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn output_is_a_fixed_point() {
        for seed in 0..20 {
            let psi = random_pure(&[2, 2, 3], seed);
            let r = fs_pure_multipartite(&psi, 8, seed).unwrap();
            assert!(fixed_point_residual(&psi, &r.product) < 1e-6);
        }
        let w = w_state(3).unwrap();
        let r = fs_pure_multipartite(&w, 8, 0).unwrap();
        assert!(fixed_point_residual(&w, &r.product) < 1e-6);
    }

    #[test]
    fn warm_start_never_loses_overlap() {
        for seed in 0..20 {
            let psi = random_pure(&[2, 2, 2], seed);
            let start = ProductVector::new(random_factors(&[2, 2, 2], seed, 9)).unwrap();
            let before = overlap_sq(&psi, &start);
            let r = fs_pure_warm(&psi, &start).unwrap();
            assert!(r.f_s >= before - 1e-15);
        }
    }

    #[test]
    fn deterministic_across_runs() {
        let psi = random_pure(&[2, 2, 2, 2], 4);
        let a = fs_pure_multipartite(&psi, 32, 11).unwrap();
        let b = fs_pure_multipartite(&psi, 32, 11).unwrap();
        assert_eq!(a.f_s, b.f_s);
        assert_eq!(a.product, b.product);
    }
}
