use num_complex::Complex64;

use super::*;
use crate::families::{bell_pair_mixture, bell_phi_plus, bell_psi_plus, ghz};
use crate::geometric::fs_pure_bipartite;
use crate::linalg::random::{random_unit_vector, rng_for};
use crate::linalg::{eig_hermitian, random_density_matrix, sqrt_psd};
use crate::measures::{bures_measure_2q, fidelity, fs_2q};
use crate::state::{assemble, PureState};

fn random_rho(dims: &[usize], rank: usize, seed: u64) -> DensityMatrix {
    DensityMatrix::new(dims.to_vec(), random_density_matrix(dims, rank, seed).unwrap()).unwrap()
}

fn random_separable(dims: &[usize], terms: usize, seed: u64) -> SeparableEnsemble {
    let mut rng = rng_for(seed, 3);
    let raw: Vec<f64> = (0..terms).map(|k| 1.0 + k as f64).collect();
    let total: f64 = raw.iter().sum();
    let vectors = (0..terms)
        .map(|_| ProductVector::new(dims.iter().map(|&d| random_unit_vector(&mut rng, d)).collect()).unwrap())
        .collect();
    SeparableEnsemble::new(raw.iter().map(|w| w / total).collect(), vectors).unwrap()
}

fn fast(seed: u64) -> RoofOptions {
    RoofOptions {
        restarts: 4,
        ..RoofOptions::with_seed(seed)
    }
}

fn objective(d: &Decomposition) -> f64 {
    d.iter().map(|(p, s)| p * fs_pure_bipartite(s).unwrap().f_s).sum()
}

#[test]
fn separable_inputs_reach_one() {
    for seed in 0..5 {
        let sigma = assemble(&random_separable(&[2, 2], 3, seed)).unwrap();
        assert!(solve_roof(&sigma, &fast(seed)).unwrap().f_s >= 1.0 - 1e-6);
    }
    let sigma = assemble(&random_separable(&[2, 3], 4, 9)).unwrap();
    assert!(solve_roof(&sigma, &fast(9)).unwrap().f_s >= 1.0 - 1e-6);
    assert!(solve_roof(&bell_pair_mixture(), &fast(0)).unwrap().f_s >= 1.0 - 1e-6);
}

#[test]
fn two_qubit_values_match_concurrence_formula() {
    for seed in 0..40 {
        let rho = random_rho(&[2, 2], 1 + seed as usize % 4, seed);
        let r = solve_roof(&rho, &RoofOptions::with_seed(seed)).unwrap();
        assert!((r.f_s - fs_2q(&rho).unwrap()).abs() < 1e-6, "seed {seed}");
        assert!(r.stationarity_residual < 1e-5, "seed {seed}: {}", r.stationarity_residual);
        assert!(two_qubit_schmidt_uniformity(&r.decomposition).unwrap() < 1e-4);
    }
}

#[test]
fn result_invariants() {
    for seed in 0..10 {
        let rho = random_rho(&[2, 3], 1 + seed as usize % 6, seed);
        let r = solve_roof(&rho, &fast(seed)).unwrap();
        assert_eq!(r.e_g + r.f_s, 1.0);
        assert!(r.decomposition.len() <= 36);
        assert!(r.decomposition.reconstruct_matrix().max_abs_diff(rho.matrix()) < 1e-9);
        let total: f64 = r.decomposition.weights().iter().zip(&r.element_fidelities).map(|(p, f)| p * f).sum();
        for ((p, f), q) in r.decomposition.weights().iter().zip(&r.element_fidelities).zip(r.ensemble.weights()) {
            assert!((q - p * f / total).abs() < 1e-10);
        }
        for w in r.objective_trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-13);
        }
        let sigma = assemble(&r.ensemble).unwrap();
        assert!(fidelity(&rho, &sigma).unwrap() >= r.f_s - 1e-6);
    }
}

#[test]
fn argument_errors() {
    let rho = random_rho(&[2, 2], 3, 1);
    let small = RoofOptions {
        s: Some(2),
        ..RoofOptions::default()
    };
    assert!(solve_roof(&rho, &small).is_err());
    let none = RoofOptions {
        restarts: 0,
        ..RoofOptions::default()
    };
    assert!(solve_roof(&rho, &none).is_err());
}

#[test]
fn deterministic_for_fixed_seed() {
    let rho = random_rho(&[2, 2], 3, 5);
    let a = solve_roof(&rho, &fast(3)).unwrap();
    let b = solve_roof(&rho, &fast(3)).unwrap();
    assert_eq!(a.f_s, b.f_s);
    assert_eq!(a.objective_trace, b.objective_trace);
    assert_eq!(a.restart, b.restart);
}

#[test]
fn closest_separable_of_pure_state() {
    let psi = bell_phi_plus();
    let d = Decomposition::new(vec![1.0], vec![psi.clone()]).unwrap();
    let e = closest_separable_from(&d).unwrap();
    assert_eq!(e.weights(), &[1.0]);
    let overlap = psi.overlap(&e.vectors()[0].to_vector()).norm_sqr();
    assert!((overlap - 0.5).abs() < 1e-12);
}

#[test]
fn eigendecomposition_is_not_optimal() {
    for seed in 0..10 {
        let rho = random_rho(&[2, 2], 3, 40 + seed);
        let f_s = fs_2q(&rho).unwrap();
        let eig = rho.eig().unwrap();
        let (mut w, mut s) = (Vec::new(), Vec::new());
        for k in 0..4 {
            if eig.eigenvalues[k] > 1e-12 {
                w.push(eig.eigenvalues[k]);
                s.push(PureState::normalized(vec![2, 2], eig.eigenvector(k)).unwrap());
            }
        }
        let total: f64 = w.iter().sum();
        let d = Decomposition::new(w.iter().map(|x| x / total).collect(), s).unwrap();
        let sigma = assemble(&closest_separable_from(&d).unwrap()).unwrap();
        let fid = fidelity(&rho, &sigma).unwrap();
        assert!(fid <= f_s + 1e-9);
        if f_s < 1.0 - 1e-3 {
            assert!(fid < f_s - 1e-6, "seed {seed}: {fid} vs {f_s}");
        }
    }
}

#[test]
fn ensemble_round_trip_recovers_optimal_decomposition() {
    for seed in 0..10 {
        let rho = random_rho(&[2, 2], 1 + seed as usize % 4, 70 + seed);
        let r = solve_roof(&rho, &fast(seed)).unwrap();
        let d = decomposition_from_ensemble(&rho, &r.ensemble).unwrap();
        assert!(d.reconstruct_matrix().max_abs_diff(rho.matrix()) < 1e-9);
        assert!((objective(&d) - r.f_s).abs() < 1e-6);
    }
}

#[test]
fn stationarity_examples() {
    let psi = bell_phi_plus();
    let single = Decomposition::new(vec![1.0], vec![psi.clone()]).unwrap();
    let prod = fs_pure_bipartite(&psi).unwrap().product;
    assert_eq!(stationarity_residual(&single, &[prod.clone()]).unwrap(), 0.0);
    assert!(stationarity_residual(&single, &[prod.clone(), prod]).is_err());

    let bell = Decomposition::new(vec![0.5, 0.5], vec![bell_psi_plus(), bell_phi_plus()]).unwrap();
    let products: Vec<ProductVector> = bell
        .states()
        .iter()
        .map(|s| fs_pure_bipartite(s).unwrap().product)
        .collect();
    assert!(stationarity_residual(&bell, &products).unwrap() <= 1e-12);
    assert!((objective(&bell) - 0.5).abs() < 1e-12);
    let f_s = solve_roof(&bell_pair_mixture(), &fast(0)).unwrap().f_s;
    assert!(f_s - objective(&bell) > 0.5 - 1e-6);
}

#[test]
fn schmidt_uniformity_checks() {
    let d = Decomposition::new(vec![1.0], vec![bell_phi_plus()]).unwrap();
    assert_eq!(two_qubit_schmidt_uniformity(&d).unwrap(), 0.0);
    let g = Decomposition::new(vec![1.0], vec![ghz(3).unwrap()]).unwrap();
    assert!(two_qubit_schmidt_uniformity(&g).is_err());
}

#[test]
fn larger_size_never_worse() {
    for seed in 0..10 {
        let rho = random_rho(&[2, 2], 2, 100 + seed);
        let full = solve_roof(&rho, &fast(seed)).unwrap().f_s;
        for s in 2..16 {
            let opts = RoofOptions {
                s: Some(s),
                ..fast(seed)
            };
            let part = solve_roof(&rho, &opts).unwrap();
            assert!(part.decomposition.len() <= s);
            assert!(full >= part.f_s - 1e-8, "seed {seed} s {s}");
        }
    }
}

#[test]
fn geometric_measure_is_convex() {
    for seed in 0..5 {
        let a = random_rho(&[2, 3], 2, 200 + seed);
        let b = random_rho(&[2, 3], 3, 300 + seed);
        let ea = solve_roof(&a, &fast(seed)).unwrap().e_g;
        let eb = solve_roof(&b, &fast(seed)).unwrap().e_g;
        for lambda in [0.25, 0.5, 0.75] {
            let mix = DensityMatrix::mixture(&[(lambda, &a), (1.0 - lambda, &b)]).unwrap();
            let em = solve_roof(&mix, &fast(seed)).unwrap().e_g;
            assert!(em <= lambda * ea + (1.0 - lambda) * eb + 1e-5);
        }
    }
}

#[test]
fn multipartite_roof() {
    let g = ghz(3).unwrap().density();
    let r = solve_roof(&g, &fast(1)).unwrap();
    assert!((r.f_s - 0.5).abs() < 1e-6, "{}", r.f_s);

    let noisy = DensityMatrix::mixture(&[(0.8, &g), (0.2, &DensityMatrix::maximally_mixed(vec![2, 2, 2]).unwrap())]).unwrap();
    let opts = RoofOptions {
        s: Some(16),
        ..fast(2)
    };
    let r = solve_roof(&noisy, &opts).unwrap();
    for w in r.objective_trace.windows(2) {
        assert!(w[1] >= w[0] - 1e-12);
    }
    assert!(r.f_s > 0.5 && r.f_s < 1.0);
    let sigma = assemble(&r.ensemble).unwrap();
    assert!(fidelity(&noisy, &sigma).unwrap() >= r.f_s - 1e-6);
}

#[test]
fn generalized_identity_matches_roof() {
    for seed in 0..5 {
        let rho = random_rho(&[2, 2], 3, 400 + seed);
        let e = solve_generalized_roof(&rho, &RoofFunction::identity(), &fast(seed)).unwrap();
        let r = solve_roof(&rho, &fast(seed)).unwrap();
        assert!((e.value - r.e_g).abs() < 1e-8);
    }
}

#[test]
fn generalized_bures_matches_closed_form() {
    for seed in 0..10 {
        let rho = random_rho(&[2, 2], 1 + seed as usize % 4, 500 + seed);
        let e = solve_generalized_roof(&rho, &RoofFunction::bures(), &fast(seed)).unwrap();
        assert!((e.value - bures_measure_2q(&rho).unwrap()).abs() < 1e-5);
        for w in e.objective_trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-13);
        }
    }
}

#[test]
fn root_fidelity_average_is_bounded() {
    for seed in 0..5 {
        let rho = random_rho(&[2, 3], 4, 600 + seed);
        let e = solve_generalized_roof(&rho, &RoofFunction::bures(), &fast(seed)).unwrap();
        let avg_root = 1.0 - e.value / 2.0;
        let f_s = solve_roof(&rho, &fast(seed)).unwrap().f_s;
        assert!(avg_root <= f_s.sqrt() + 1e-8);
    }
}

#[test]
fn roof_function_validation() {
    assert!(RoofFunction::new("shifted", |x| x + 1.0, |_| 1.0).is_err());
    assert!(RoofFunction::new("concave", |x: f64| x.sqrt(), |x: f64| 0.5 / x.sqrt()).is_err());
    assert!(RoofFunction::new("negative", |x| -x, |_| -1.0).is_err());
    let sq = RoofFunction::new("square", |x| x * x, |x| 2.0 * x).unwrap();
    assert_eq!(sq.name(), "square");
}

fn qubit(v: [f64; 4]) -> DensityMatrix {
    let m = crate::linalg::ComplexMatrix::from_vec(
        2,
        2,
        v.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
    )
    .unwrap();
    DensityMatrix::new(vec![2], m).unwrap()
}

#[test]
fn convex_set_examples() {
    let zero = qubit([1.0, 0.0, 0.0, 0.0]);
    let one = qubit([0.0, 0.0, 0.0, 1.0]);
    let plus = qubit([0.5, 0.5, 0.5, 0.5]);
    let half = qubit([0.5, 0.0, 0.0, 0.5]);
    let x = ConvexSetSpec::new(vec![zero.clone(), one.clone()], "z basis").unwrap();
    assert!((convex_set_fidelity(&half, &x, 4, 0).unwrap().f_c - 1.0).abs() < 1e-9);
    let r = convex_set_fidelity(&plus, &x, 4, 0).unwrap();
    assert!((r.f_c - 0.5).abs() < 1e-9);
    let own = ConvexSetSpec::new(vec![plus.clone()], "self").unwrap();
    assert!((convex_set_fidelity(&plus, &own, 2, 0).unwrap().f_c - 1.0).abs() < 1e-9);
    assert!(ConvexSetSpec::new(vec![], "empty").is_err());
    let two = ConvexSetSpec::new(vec![bell_pair_mixture()], "4d").unwrap();
    assert!(convex_set_fidelity(&plus, &two, 1, 0).is_err());
}

/// Fidelity through the eigenvalues of `sqrt(rho) sigma sqrt(rho)`.
fn fidelity_oracle(rho: &DensityMatrix, sigma: &crate::linalg::ComplexMatrix) -> f64 {
    let r = sqrt_psd(rho.matrix()).unwrap();
    let m = r.matmul(sigma).matmul(&r).hermitian_part();
    let t: f64 = eig_hermitian(&m).unwrap().eigenvalues.iter().map(|x| x.max(0.0).sqrt()).sum();
    t * t
}

/// Maximum of `F(rho, sum_k q_k sigma_k)` over the simplex: a coarse grid
/// followed by repeated zooming around the best point.
fn simplex_oracle(rho: &DensityMatrix, set: &[DensityMatrix]) -> f64 {
    let k = set.len();
    let eval = |q: &[f64]| {
        let mut m = crate::linalg::ComplexMatrix::zeros(rho.dim(), rho.dim());
        for (w, s) in q.iter().zip(set) {
            m = &m + &s.matrix().scale(*w);
        }
        fidelity_oracle(rho, &m)
    };
    let project = |q: &mut Vec<f64>| {
        q.iter_mut().for_each(|x| *x = x.max(0.0));
        let t: f64 = q.iter().sum();
        q.iter_mut().for_each(|x| *x /= t);
    };
    let n = 40;
    let mut best = (f64::NEG_INFINITY, vec![1.0 / k as f64; k]);
    let consider = |q: Vec<f64>, best: &mut (f64, Vec<f64>)| {
        let v = eval(&q);
        if v > best.0 {
            *best = (v, q);
        }
    };
    for i in 0..=n {
        if k == 2 {
            let a = i as f64 / n as f64;
            consider(vec![a, 1.0 - a], &mut best);
        } else {
            for j in 0..=(n - i) {
                let (a, b) = (i as f64 / n as f64, j as f64 / n as f64);
                consider(vec![a, b, 1.0 - a - b], &mut best);
            }
        }
    }
    let mut h = 1.0 / n as f64;
    while h > 1e-10 {
        let c = best.1.clone();
        for i in -10i32..=10 {
            for j in -10i32..=10 {
                if k == 2 && j != 0 {
                    continue;
                }
                let mut q = c.clone();
                q[0] += i as f64 * h / 5.0;
                q[1] += j as f64 * h / 5.0;
                q[k - 1] -= i as f64 * h / 5.0 + if k == 2 { 0.0 } else { j as f64 * h / 5.0 };
                if k == 2 {
                    q[1] = 1.0 - q[0];
                }
                project(&mut q);
                consider(q, &mut best);
            }
        }
        h /= 4.0;
    }
    best.0
}

#[test]
fn convex_set_matches_simplex_oracle() {
    let mut seed = 0;
    for dim in [2usize, 3] {
        for size in [2usize, 3] {
            for _ in 0..3 {
                seed += 1;
                let rho = random_rho(&[dim], 1 + seed as usize % dim, 700 + seed);
                let set: Vec<DensityMatrix> = (0..size)
                    .map(|k| random_rho(&[dim], 1 + (seed as usize + k) % dim, 800 + 10 * seed + k as u64))
                    .collect();
                let spec = ConvexSetSpec::new(set.clone(), "random").unwrap();
                let got = convex_set_fidelity(&rho, &spec, 4, seed).unwrap();
                let want = simplex_oracle(&rho, &set);
                assert!((got.f_c - want).abs() < 1e-4, "dim {dim} |X| {size}: {} vs {want}", got.f_c);
                let total: f64 = got.element_weights.iter().sum();
                assert!((total - 1.0).abs() < 1e-9);
            }
        }
    }
}
