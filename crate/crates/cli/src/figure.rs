//! `sepfid figure`: CSV data for the normalised two-qubit measure curves
//! and for the generalised Vedral-Plenio family.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use sepfid::families::{gvp_sigma, gvp_state};
use sepfid::measures::{
    bures_from_concurrence, entanglement_of_formation_2q, er_lower_bound, fs_from_concurrence,
    geometric_from_concurrence, geometric_measure_2q, groverian_measure, relative_entropy,
};

use crate::error::{CliError, Result};
use crate::output::{num, Table};

pub const GRID_STEPS: usize = 1000;
pub const BURES_HEADER: [&str; 4] = ["C", "E_G/(1/2)", "E_B/(2−√2)", "E_Gr/(1/√2)"];
pub const GVP_HEADER: [&str; 4] = ["a", "E_F", "E_R", "ℰ"];

fn grid() -> impl Iterator<Item = f64> {
    (0..=GRID_STEPS).map(|k| k as f64 / GRID_STEPS as f64)
}

/// Geometric, Bures and Groverian measures against concurrence, each
/// divided by its value on a maximally entangled state.
pub fn bures_curve() -> Result<Table> {
    let mut t = Table::new(&BURES_HEADER);
    for c in grid() {
        let e_g = geometric_from_concurrence(c) / 0.5;
        let e_b = bures_from_concurrence(c) / (2.0 - SQRT_2);
        let e_gr = groverian_measure(fs_from_concurrence(c))? / FRAC_1_SQRT_2;
        t.push(vec![num(c), num(e_g), num(e_b), num(e_gr)]);
    }
    Ok(t)
}

/// One row of the GVP curves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GvpPoint {
    pub a: f64,
    pub e_f: f64,
    pub e_r: f64,
    pub lower_bound: f64,
}

pub fn gvp_points(p: f64) -> Result<Vec<GvpPoint>> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(CliError::Usage(format!("p must lie in (0, 1], got {p}")));
    }
    grid()
        .map(|a| {
            let rho = gvp_state(a, p)?;
            let sigma = gvp_sigma(a, p)?;
            Ok(GvpPoint {
                a,
                e_f: entanglement_of_formation_2q(&rho)?,
                e_r: relative_entropy(&rho, &sigma)?,
                lower_bound: er_lower_bound(&rho, geometric_measure_2q(&rho)?)?,
            })
        })
        .collect()
}

pub fn gvp(p: f64) -> Result<Table> {
    let mut t = Table::new(&GVP_HEADER);
    t.comments.push(format!(
        "p = {p}; E_R = S(rho || sigma) with sigma = (1-p+pa)|01><01| + p(1-a)|10><10|"
    ));
    for pt in gvp_points(p)? {
        t.push(vec![num(pt.a), num(pt.e_f), num(pt.e_r), num(pt.lower_bound)]);
    }
    Ok(t)
}
