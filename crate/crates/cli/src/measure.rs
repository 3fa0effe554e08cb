//! `sepfid measure`: every available measure of one state.

use sepfid::geometric::{default_restarts, fs_pure};
use sepfid::measures::{report_all, report_with_fs, MeasureReport};
use sepfid::roof::solve_roof;
use sepfid::state::StateFile;

use crate::config::RunConfig;
use crate::error::Result;
use crate::output::{num, Table};

/// How the fidelity of separability was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    PureState,
    Roof,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed-form",
            Method::PureState => "pure-state",
            Method::Roof => "roof",
        }
    }
}

pub fn measure(state: &StateFile, config: &RunConfig) -> Result<(MeasureReport, Method)> {
    let rho = state.to_density();
    if rho.is_two_qubit() {
        return Ok((report_all(&rho)?, Method::ClosedForm));
    }
    match state {
        StateFile::Pure(psi) => {
            let f_s = fs_pure(psi, default_restarts(psi.dims().len()), config.seed)?.f_s;
            Ok((report_with_fs(&rho, f_s)?, Method::PureState))
        }
        StateFile::Density(_) => {
            let f_s = solve_roof(&rho, &config.roof_options())?.f_s;
            Ok((report_with_fs(&rho, f_s)?, Method::Roof))
        }
    }
}

/// `quantity,value` table; missing quantities are left out.
pub fn report_table(state: &StateFile, report: &MeasureReport, method: Method) -> Table {
    let mut t = Table::new(&["quantity", "value"]);
    let dims: Vec<String> = state.dims().iter().map(usize::to_string).collect();
    t.push(vec!["dims".into(), dims.join(" ")]);
    t.push(vec!["method".into(), method.as_str().into()]);
    let fields = [
        ("concurrence", report.concurrence),
        ("f_separability", report.f_separability),
        ("e_formation", report.e_formation),
        ("e_geometric", report.e_geometric),
        ("e_bures", report.e_bures),
        ("e_groverian", report.e_groverian),
        ("entropy", Some(report.entropy)),
        ("er_lower_bound", report.er_lower_bound),
    ];
    for (name, v) in fields {
        if let Some(v) = v {
            t.push(vec![name.into(), num(v)]);
        }
    }
    t
}
