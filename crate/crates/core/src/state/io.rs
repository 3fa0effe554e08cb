//! Plain-text state files.
//!
//! ```text
//! dims: 2 2
//! kind: density
//! 0.5+0j 0+0j 0+0j 0.5+0j
//! ...
//! ```
//!
//! Density matrices are written one matrix row per line; pure states one
//! amplitude per line. Entries are `re+imj` / `re-imj` using Rust's shortest
//! round-trip float formatting, so writing a parsed canonical file
//! reproduces it byte for byte.

use std::fs;
use std::path::Path;

use num_complex::Complex64;

use super::{DensityMatrix, PureState};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

#[derive(Debug, Clone)]
pub enum StateFile {
    Density(DensityMatrix),
    Pure(PureState),
}

impl StateFile {
    pub fn dims(&self) -> &[usize] {
        match self {
            StateFile::Density(rho) => rho.dims(),
            StateFile::Pure(psi) => psi.dims(),
        }
    }

    pub fn to_density(&self) -> DensityMatrix {
        match self {
            StateFile::Density(rho) => rho.clone(),
            StateFile::Pure(psi) => psi.density(),
        }
    }
}

pub fn format_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{}{}j", z.re, sign, z.im.abs())
}

fn parse_complex(token: &str, line: usize) -> Result<Complex64> {
    let err = |message: String| Error::Parse { line, message };
    let body = token
        .strip_suffix('j')
        .ok_or_else(|| err(format!("entry `{token}` is not of the form re+imj")))?;
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| {
            (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E')
        })
        .ok_or_else(|| err(format!("entry `{token}` has no imaginary part")))?;
    let parse = |s: &str| -> Result<f64> {
        let v: f64 = s
            .parse()
            .map_err(|_| err(format!("`{s}` is not a decimal number")))?;
        if !v.is_finite() {
            return Err(err(format!("non-finite value `{s}`")));
        }
        Ok(v)
    };
    let re = parse(&body[..split])?;
    let im_text = &body[split..];
    let im = parse(im_text.strip_prefix('+').unwrap_or(im_text))?;
    Ok(Complex64::new(re, im))
}

fn header<'a>(line: Option<(usize, &'a str)>, key: &str) -> Result<(usize, &'a str)> {
    let (n, text) = line.ok_or(Error::Parse {
        line: 0,
        message: format!("missing `{key}:` header"),
    })?;
    let value = text
        .strip_prefix(key)
        .and_then(|rest| rest.strip_prefix(':'))
        .ok_or_else(|| Error::Parse {
            line: n,
            message: format!("expected `{key}:` header"),
        })?;
    Ok((n, value.trim()))
}

pub fn parse_state(text: &str) -> Result<StateFile> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (dims_line, dims_text) = header(lines.next(), "dims")?;
    let dims: Vec<usize> = dims_text
        .split_whitespace()
        .map(|t| {
            t.parse::<usize>().map_err(|_| Error::Parse {
                line: dims_line,
                message: format!("bad party dimension `{t}`"),
            })
        })
        .collect::<Result<_>>()?;
    if dims.is_empty() {
        return Err(Error::Parse {
            line: dims_line,
            message: "no party dimensions".into(),
        });
    }
    let total: usize = dims.iter().product();

    let (kind_line, kind) = header(lines.next(), "kind")?;
    let mut rows: Vec<Vec<Complex64>> = Vec::new();
    for (n, l) in lines {
        rows.push(
            l.split_whitespace()
                .map(|t| parse_complex(t, n))
                .collect::<Result<_>>()?,
        );
    }

    match kind {
        "density" => {
            if rows.len() != total || rows.iter().any(|r| r.len() != total) {
                let found: usize = rows.iter().map(Vec::len).sum();
                return Err(Error::Dimension(format!(
                    "dims {:?} need {total} rows of {total} entries, found {} rows / {found} entries",
                    dims,
                    rows.len()
                )));
            }
            let m = ComplexMatrix::from_vec(total, total, rows.concat())?;
            Ok(StateFile::Density(DensityMatrix::new(dims, m)?))
        }
        "pure" => {
            let amps = rows.concat();
            if amps.len() != total {
                return Err(Error::Dimension(format!(
                    "dims {:?} need {total} amplitudes, found {}",
                    dims,
                    amps.len()
                )));
            }
            Ok(StateFile::Pure(PureState::new(dims, amps)?))
        }
        other => Err(Error::Parse {
            line: kind_line,
            message: format!("unknown kind `{other}` (expected density or pure)"),
        }),
    }
}

pub fn format_state(state: &StateFile) -> String {
    let dims: Vec<String> = state.dims().iter().map(usize::to_string).collect();
    let mut out = format!("dims: {}\n", dims.join(" "));
    match state {
        StateFile::Density(rho) => {
            out.push_str("kind: density\n");
            let m = rho.matrix();
            for i in 0..m.rows() {
                let row: Vec<String> = m.row(i).iter().map(|&z| format_complex(z)).collect();
                out.push_str(&row.join(" "));
                out.push('\n');
            }
        }
        StateFile::Pure(psi) => {
            out.push_str("kind: pure\n");
            for &z in psi.amplitudes() {
                out.push_str(&format_complex(z));
                out.push('\n');
            }
        }
    }
    out
}

pub fn read_state(path: impl AsRef<Path>) -> Result<StateFile> {
    parse_state(&fs::read_to_string(path)?)
}

pub fn write_state(path: impl AsRef<Path>, state: &StateFile) -> Result<()> {
    fs::write(path, format_state(state))?;
    Ok(())
}
