//! `sepfid verify`: randomised campaigns comparing solver output with
//! independent oracles and with inequalities every state must satisfy.
//!
//! Samples are generated from `(seed, suite, index)` alone, so a failing
//! sample can be rebuilt and dumped to a reproduction file.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use sepfid::families::{bell_pair_mixture, bell_phi_plus, bell_psi_plus};
use sepfid::geometric::fs_pure_bipartite;
use sepfid::linalg::random::{random_density_with, rng_for};
use sepfid::measures::{fidelity, fs_2q, overlap_trace, relative_entropy, von_neumann_entropy};
use sepfid::roof::{
    convex_set_fidelity, solve_generalized_roof, solve_roof, stationarity_residual,
    two_qubit_schmidt_uniformity, ConvexSetSpec, RoofFunction, RoofOptions,
};
use sepfid::state::{assemble, format_state, Decomposition, DensityMatrix, ProductVector, StateFile};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::output::{num, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    TwoQubitRoof,
    Inequalities,
    Stationarity,
    ConvexSets,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::TwoQubitRoof, Suite::Inequalities, Suite::Stationarity, Suite::ConvexSets];

    pub fn name(self) -> &'static str {
        match self {
            Suite::TwoQubitRoof => "two-qubit-roof",
            Suite::Inequalities => "inequalities",
            Suite::Stationarity => "stationarity",
            Suite::ConvexSets => "appendix-a",
        }
    }

    fn stream(self) -> u64 {
        (self as u64 + 1) << 40
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| CliError::Usage(format!("unknown suite `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    AtMost(f64),
    AtLeast(f64),
}

impl Bound {
    fn holds(self, x: f64) -> bool {
        match self {
            Bound::AtMost(b) => x <= b,
            Bound::AtLeast(b) => x >= b,
        }
    }

    /// Whether `x` is a worse outcome than `y`.
    fn worse(self, x: f64, y: f64) -> bool {
        if x.is_nan() {
            return !y.is_nan();
        }
        match self {
            Bound::AtMost(_) => x > y,
            Bound::AtLeast(_) => x < y,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub samples: usize,
    /// Worst value seen; NaN counts as worst of all.
    pub worst: f64,
    pub bound: Bound,
    pub worst_sample: Option<usize>,
}

impl Check {
    fn new(name: impl Into<String>, bound: Bound) -> Self {
        Self {
            name: name.into(),
            samples: 0,
            worst: match bound {
                Bound::AtMost(_) => f64::NEG_INFINITY,
                Bound::AtLeast(_) => f64::INFINITY,
            },
            bound,
            worst_sample: None,
        }
    }

    fn record(&mut self, sample: usize, value: f64) {
        self.samples += 1;
        if self.worst_sample.is_none() || self.bound.worse(value, self.worst) {
            self.worst = value;
            self.worst_sample = Some(sample);
        }
    }

    pub fn passed(&self) -> bool {
        self.samples > 0 && self.bound.holds(self.worst)
    }
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub suite: Suite,
    pub seed: u64,
    pub n: usize,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(&["check", "samples", "worst", "relation", "bound", "worst_sample", "status"]);
        for c in &self.checks {
            let (relation, bound) = match c.bound {
                Bound::AtMost(b) => ("<=", b),
                Bound::AtLeast(b) => (">=", b),
            };
            t.push(vec![
                c.name.clone(),
                c.samples.to_string(),
                num(c.worst),
                relation.into(),
                num(bound),
                c.worst_sample.map(|i| i.to_string()).unwrap_or_default(),
                if c.passed() { "PASS" } else { "FAIL" }.into(),
            ]);
        }
        t
    }

    /// Failing checks with the states of their worst samples.
    pub fn repro(&self) -> Result<String> {
        let mut out = format!("suite = {}\nseed = {}\nn = {}\n", self.suite, self.seed, self.n);
        for c in self.checks.iter().filter(|c| !c.passed()) {
            out.push_str(&format!("\n[{}]\nworst = {}\n", c.name, num(c.worst)));
            let Some(i) = c.worst_sample else { continue };
            out.push_str(&format!("sample = {i}\n"));
            for (label, state) in sample_states(self.suite, self.seed, i)? {
                out.push_str(&format!("-- {label}\n{}", format_state(&StateFile::Density(state))));
            }
        }
        Ok(out)
    }
}

pub const FS_TOL: f64 = 1e-6;
pub const ROUND_TRIP_TOL: f64 = 1e-6;
pub const STATIONARITY_TOL: f64 = 1e-5;
pub const CONCURRENCE_SPREAD_TOL: f64 = 1e-4;
pub const INEQUALITY_SLACK: f64 = 1e-8;
pub const BELL_RESIDUAL_TOL: f64 = 1e-12;
pub const CONVEX_SET_TOL: f64 = 1e-4;
pub const INEQUALITY_DIMS: [usize; 3] = [2, 3, 4];

fn random_state(dims: &[usize], rank: usize, seed: u64, stream: u64) -> Result<DensityMatrix> {
    let dim = dims.iter().product();
    let m = random_density_with(&mut rng_for(seed, stream), dim, rank)?;
    Ok(DensityMatrix::new(dims.to_vec(), m)?)
}

fn stationarity_dims(i: usize) -> [usize; 2] {
    if i % 2 == 0 {
        [2, 2]
    } else {
        [2, 3]
    }
}

fn convex_shape(i: usize) -> (usize, usize) {
    (2 + i % 2, 2 + (i / 2) % 2)
}

/// The states making up sample `i`, labelled.
pub fn sample_states(suite: Suite, seed: u64, i: usize) -> Result<Vec<(String, DensityMatrix)>> {
    let base = suite.stream() | (i as u64) << 8;
    Ok(match suite {
        Suite::TwoQubitRoof => vec![("rho".into(), random_state(&[2, 2], 1 + i % 4, seed, base)?)],
        Suite::Inequalities => {
            let mut out = Vec::new();
            for (k, &d) in INEQUALITY_DIMS.iter().enumerate() {
                let dims: Vec<usize> = if d == 4 { vec![2, 2] } else { vec![d] };
                let r1 = 1 + i % d;
                let r2 = 1 + (i / d) % d;
                out.push((format!("rho (dim {d})"), random_state(&dims, r1, seed, base + 2 * k as u64)?));
                out.push((format!("sigma (dim {d})"), random_state(&dims, r2, seed, base + 2 * k as u64 + 1)?));
            }
            out
        }
        Suite::Stationarity => {
            let dims = stationarity_dims(i);
            let d = dims[0] * dims[1];
            vec![("rho".into(), random_state(&dims, 1 + (i / 2) % d, seed, base)?)]
        }
        Suite::ConvexSets => {
            let (d, k) = convex_shape(i);
            let mut out = vec![("rho".into(), random_state(&[d], 1 + (i / 4) % d, seed, base)?)];
            for j in 0..k {
                let rank = 1 + (i + j) % d;
                out.push((format!("sigma_{j}"), random_state(&[d], rank, seed, base + 1 + j as u64)?));
            }
            out
        }
    })
}

fn sample_options(config: &RunConfig, i: usize) -> RoofOptions {
    RoofOptions {
        seed: config.seed.wrapping_add(i as u64),
        ..config.roof_options()
    }
}

/// Runs `n` samples of `suite`.
pub fn run_suite(suite: Suite, n: usize, config: &RunConfig) -> Result<VerifyReport> {
    if n == 0 {
        return Err(CliError::Usage("n must be at least 1".into()));
    }
    let checks = match suite {
        Suite::TwoQubitRoof => two_qubit_roof(n, config)?,
        Suite::Inequalities => inequalities(n, config)?,
        Suite::Stationarity => stationarity(n, config)?,
        Suite::ConvexSets => convex_sets(n, config)?,
    };
    Ok(VerifyReport {
        suite,
        seed: config.seed,
        n,
        checks,
    })
}

/// Evaluates `f` on every sample in parallel and folds the values into
/// checks in sample order.
fn campaign<F>(n: usize, mut checks: Vec<Check>, f: F) -> Result<Vec<Check>>
where
    F: Fn(usize) -> Result<Vec<f64>> + Sync,
{
    let values: Vec<Vec<f64>> = (0..n).into_par_iter().map(&f).collect::<Result<_>>()?;
    for (i, row) in values.iter().enumerate() {
        for (c, &v) in checks.iter_mut().zip(row) {
            c.record(i, v);
        }
    }
    Ok(checks)
}

fn single(config: &RunConfig, suite: Suite, i: usize) -> Result<DensityMatrix> {
    Ok(sample_states(suite, config.seed, i)?.remove(0).1)
}

fn two_qubit_roof(n: usize, config: &RunConfig) -> Result<Vec<Check>> {
    let checks = vec![
        Check::new("f_s vs concurrence formula", Bound::AtMost(FS_TOL)),
        Check::new("closest separable round trip", Bound::AtMost(ROUND_TRIP_TOL)),
        Check::new("stationarity residual", Bound::AtMost(STATIONARITY_TOL)),
        Check::new("concurrence spread", Bound::AtMost(CONCURRENCE_SPREAD_TOL)),
    ];
    campaign(n, checks, |i| {
        let rho = single(config, Suite::TwoQubitRoof, i)?;
        let r = solve_roof(&rho, &sample_options(config, i))?;
        let sigma = assemble(&r.ensemble)?;
        Ok(vec![
            (r.f_s - fs_2q(&rho)?).abs(),
            (fidelity(&rho, &sigma)? - r.f_s).abs(),
            r.stationarity_residual,
            two_qubit_schmidt_uniformity(&r.decomposition)?,
        ])
    })
}

/// `max(0, rhs - S(rho||sigma))` with `rhs = Tr rho log2 rho - log2 F`.
fn relative_entropy_violation(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    let lhs = relative_entropy(rho, sigma)?;
    if lhs.is_infinite() {
        return Ok(0.0);
    }
    let rhs = -von_neumann_entropy(rho)? - fidelity(rho, sigma)?.log2();
    Ok((rhs - lhs).max(0.0))
}

/// `max sum_i p_i sqrt(F_s(psi_i)) - sqrt(F_s(rho))`, the maximum taken over
/// the decompositions found by the fidelity roof and by the Bures roof.
fn root_fidelity_violation(rho: &DensityMatrix, options: &RoofOptions) -> Result<f64> {
    let roof = solve_roof(rho, options)?;
    let own: f64 = roof
        .decomposition
        .weights()
        .iter()
        .zip(&roof.element_fidelities)
        .map(|(p, f)| p * f.sqrt())
        .sum();
    let bures = solve_generalized_roof(rho, &RoofFunction::bures(), options)?;
    let best: f64 = bures
        .decomposition
        .weights()
        .iter()
        .zip(&bures.element_fidelities)
        .map(|(p, f)| p * f.sqrt())
        .sum();
    Ok((own.max(best) - roof.f_s.sqrt()).max(0.0))
}

fn inequalities(n: usize, config: &RunConfig) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for d in INEQUALITY_DIMS {
        checks.push(Check::new(format!("relative entropy bound (dim {d})"), Bound::AtMost(INEQUALITY_SLACK)));
        checks.push(Check::new(format!("fidelity vs overlap (dim {d})"), Bound::AtMost(INEQUALITY_SLACK)));
    }
    checks.push(Check::new("root fidelity roof (2x2)", Bound::AtMost(INEQUALITY_SLACK)));
    campaign(n, checks, |i| {
        let states = sample_states(Suite::Inequalities, config.seed, i)?;
        let mut row = Vec::new();
        for pair in states.chunks(2) {
            let (rho, sigma) = (&pair[0].1, &pair[1].1);
            row.push(relative_entropy_violation(rho, sigma)?);
            row.push((overlap_trace(rho, sigma)? - fidelity(rho, sigma)?).max(0.0));
        }
        let two_qubit = &states[2 * (INEQUALITY_DIMS.len() - 1)].1;
        row.push(root_fidelity_violation(two_qubit, &sample_options(config, i))?);
        Ok(row)
    })
}

/// Equal mixture of two Bell states written with the Bell states themselves:
/// it satisfies the optimality condition but is far from optimal.
pub fn bell_decomposition() -> Result<(Decomposition, Vec<ProductVector>)> {
    let d = Decomposition::new(vec![0.5, 0.5], vec![bell_psi_plus(), bell_phi_plus()])?;
    let products = d
        .states()
        .iter()
        .map(|s| Ok(fs_pure_bipartite(s)?.product))
        .collect::<Result<_>>()?;
    Ok((d, products))
}

fn stationarity(n: usize, config: &RunConfig) -> Result<Vec<Check>> {
    let mut checks = campaign(
        n,
        vec![Check::new("solver residual", Bound::AtMost(STATIONARITY_TOL))],
        |i| {
            let rho = single(config, Suite::Stationarity, i)?;
            Ok(vec![solve_roof(&rho, &sample_options(config, i))?.stationarity_residual])
        },
    )?;
    let (bell, products) = bell_decomposition()?;
    let objective: f64 = bell
        .iter()
        .map(|(p, s)| Ok(p * fs_pure_bipartite(s)?.f_s))
        .sum::<Result<f64>>()?;
    let f_s = solve_roof(&bell_pair_mixture(), &config.roof_options())?.f_s;
    let mut residual = Check::new("bell decomposition residual", Bound::AtMost(BELL_RESIDUAL_TOL));
    residual.record(0, stationarity_residual(&bell, &products)?);
    let mut obj = Check::new("bell decomposition objective - 1/2", Bound::AtMost(BELL_RESIDUAL_TOL));
    obj.record(0, (objective - 0.5).abs());
    let mut gap = Check::new("bell mixture f_s - objective", Bound::AtLeast(0.5 - FS_TOL));
    gap.record(0, f_s - objective);
    checks.extend([residual, obj, gap]);
    Ok(checks)
}

/// `max_q F(rho, sum_k q_k sigma_k)` by a grid over the simplex followed by
/// local refinement.
pub fn simplex_oracle(rho: &DensityMatrix, points: &[DensityMatrix]) -> Result<f64> {
    let k = points.len();
    let eval = |q: &[f64]| -> Result<f64> {
        let parts: Vec<(f64, &DensityMatrix)> = q.iter().copied().zip(points).collect();
        Ok(fidelity(rho, &DensityMatrix::mixture(&parts)?)?)
    };
    let steps: usize = if k <= 2 { 1000 } else { 100 };
    let mut best = (f64::NEG_INFINITY, vec![0.0; k]);
    let mut idx = vec![0usize; k - 1];
    loop {
        let used: usize = idx.iter().sum();
        if used <= steps {
            let mut q: Vec<f64> = idx.iter().map(|&c| c as f64 / steps as f64).collect();
            q.push((steps - used) as f64 / steps as f64);
            let v = eval(&q)?;
            if v > best.0 {
                best = (v, q);
            }
        }
        let Some(pos) = idx.iter().position(|&c| c < steps) else { break };
        for c in idx.iter_mut().take(pos) {
            *c = 0;
        }
        idx[pos] += 1;
    }
    let mut h = 1.0 / steps as f64;
    while h > 1e-10 {
        let center = best.1.clone();
        let mut offs = vec![-10i32; k - 1];
        loop {
            let mut q: Vec<f64> = center[..k - 1]
                .iter()
                .zip(&offs)
                .map(|(c, &o)| c + o as f64 * h / 10.0)
                .collect();
            let rest = 1.0 - q.iter().sum::<f64>();
            if q.iter().all(|&x| x >= 0.0) && rest >= 0.0 {
                q.push(rest);
                let v = eval(&q)?;
                if v > best.0 {
                    best = (v, q);
                }
            }
            let Some(pos) = offs.iter().position(|&o| o < 10) else { break };
            for o in offs.iter_mut().take(pos) {
                *o = -10;
            }
            offs[pos] += 1;
        }
        h /= 10.0;
    }
    Ok(best.0)
}

fn convex_sets(n: usize, config: &RunConfig) -> Result<Vec<Check>> {
    let checks = vec![
        Check::new("convex set vs simplex oracle", Bound::AtMost(CONVEX_SET_TOL)),
        Check::new("convex set weights reproduce value", Bound::AtMost(FS_TOL)),
    ];
    campaign(n, checks, |i| {
        let mut states: Vec<DensityMatrix> = sample_states(Suite::ConvexSets, config.seed, i)?
            .into_iter()
            .map(|(_, s)| s)
            .collect();
        let rho = states.remove(0);
        let oracle = simplex_oracle(&rho, &states)?;
        let set = ConvexSetSpec::new(states.clone(), format!("sample {i}"))?;
        let r = convex_set_fidelity(&rho, &set, config.restarts, config.seed.wrapping_add(i as u64))?;
        let parts: Vec<(f64, &DensityMatrix)> = r.weights.iter().copied().zip(&states).collect();
        let attained = fidelity(&rho, &DensityMatrix::mixture(&parts)?)?;
        Ok(vec![(r.f_c - oracle).abs(), (attained - r.f_c).abs()])
    })
}
