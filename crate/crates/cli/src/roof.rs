//! `sepfid roof`: optimal decomposition and closest separable state.
//!
//! With `--out DIR` the directory receives `summary.txt`,
//! `closest_separable.state`, `decomposition.csv` and one
//! `element_<i>.state` / `product_<i>.state` pair per element.

use std::path::Path;

use sepfid::measures::fs_2q;
use sepfid::roof::{solve_roof, RoofResult};
use sepfid::state::{assemble, format_state, DensityMatrix, StateFile};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::output::{num, write_file, Table};

pub fn roof(rho: &DensityMatrix, config: &RunConfig) -> Result<RoofResult> {
    Ok(solve_roof(rho, &config.roof_options())?)
}

/// `key = value` summary block.
pub fn summary(rho: &DensityMatrix, r: &RoofResult) -> Result<String> {
    let mut lines = vec![
        format!("f_s = {}", num(r.f_s)),
        format!("e_g = {}", num(r.e_g)),
        format!("stationarity_residual = {}", num(r.stationarity_residual)),
        format!("iterations = {}", r.iterations),
        format!("converged = {}", r.converged),
        format!("elements = {}", r.decomposition.len()),
        format!("restart = {}", r.restart),
        format!("seed = {}", r.seed),
    ];
    if rho.is_two_qubit() {
        lines.push(format!("f_s_closed_form = {}", num(fs_2q(rho)?)));
    }
    Ok(lines.join("\n") + "\n")
}

pub fn decomposition_table(r: &RoofResult) -> Table {
    let mut t = Table::new(&["element", "weight", "f_s", "separable_weight"]);
    for (i, ((p, f), q)) in r
        .decomposition
        .weights()
        .iter()
        .zip(&r.element_fidelities)
        .zip(r.ensemble.weights())
        .enumerate()
    {
        t.push(vec![i.to_string(), num(*p), num(*f), num(*q)]);
    }
    t
}

pub fn write_outputs(dir: &Path, rho: &DensityMatrix, r: &RoofResult) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    write_file(&dir.join("summary.txt"), &summary(rho, r)?)?;
    write_file(&dir.join("decomposition.csv"), &decomposition_table(r).to_csv())?;
    let sigma = assemble(&r.ensemble)?;
    write_file(
        &dir.join("closest_separable.state"),
        &format_state(&StateFile::Density(sigma)),
    )?;
    for (i, psi) in r.decomposition.states().iter().enumerate() {
        write_file(
            &dir.join(format!("element_{i}.state")),
            &format_state(&StateFile::Pure(psi.clone())),
        )?;
    }
    for (i, phi) in r.ensemble.vectors().iter().enumerate() {
        write_file(
            &dir.join(format!("product_{i}.state")),
            &format_state(&StateFile::Pure(phi.to_state())),
        )?;
    }
    Ok(())
}
