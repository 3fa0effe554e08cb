//! Run settings. Precedence: command-line flags, then the `--config` file,
//! then built-in defaults.
//!
//! Config files hold one `key = value` per line; `#` starts a comment.
//! Keys: `seed`, `restarts`, `s`, `tol`, `max_iter`, `out`.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use sepfid::roof::{RoofOptions, DEFAULT_MAX_ITER, DEFAULT_RESTARTS, DEFAULT_TOL};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub restarts: usize,
    pub s: Option<usize>,
    pub tol: f64,
    pub max_iter: usize,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            restarts: DEFAULT_RESTARTS,
            s: None,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            out: None,
        }
    }
}

/// Partial settings from one source.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub restarts: Option<usize>,
    pub s: Option<usize>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub out: Option<PathBuf>,
}

fn value<T: FromStr>(key: &str, raw: &str, line: usize) -> Result<T> {
    raw.parse()
        .map_err(|_| CliError::Usage(format!("config line {line}: bad value `{raw}` for `{key}`")))
}

impl Overrides {
    pub fn parse(text: &str) -> Result<Self> {
        let mut o = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, val) = body
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {line}: expected `key = value`")))?;
            let (key, val) = (key.trim(), val.trim());
            match key {
                "seed" => o.seed = Some(value(key, val, line)?),
                "restarts" => o.restarts = Some(value(key, val, line)?),
                "s" => o.s = Some(value(key, val, line)?),
                "tol" => o.tol = Some(value(key, val, line)?),
                "max_iter" => o.max_iter = Some(value(key, val, line)?),
                "out" => o.out = Some(PathBuf::from(val)),
                other => return Err(CliError::Usage(format!("config line {line}: unknown key `{other}`"))),
            }
        }
        Ok(o)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    fn apply(self, mut c: RunConfig) -> RunConfig {
        c.seed = self.seed.unwrap_or(c.seed);
        c.restarts = self.restarts.unwrap_or(c.restarts);
        c.s = self.s.or(c.s);
        c.tol = self.tol.unwrap_or(c.tol);
        c.max_iter = self.max_iter.unwrap_or(c.max_iter);
        c.out = self.out.or(c.out);
        c
    }
}

impl RunConfig {
    pub fn resolve(flags: Overrides, file: Option<&Path>) -> Result<Self> {
        let mut c = Self::default();
        if let Some(path) = file {
            c = Overrides::read(path)?.apply(c);
        }
        c = flags.apply(c);
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_iter == 0 || self.s == Some(0) {
            return Err(CliError::Usage("restarts, s and max_iter must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(CliError::Usage(format!("tol must be positive, got {}", self.tol)));
        }
        Ok(())
    }

    pub fn roof_options(&self) -> RoofOptions {
        RoofOptions {
            s: self.s,
            restarts: self.restarts,
            seed: self.seed,
            tol: self.tol,
            max_iter: self.max_iter,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_and_comments() {
        let o = Overrides::parse("# run\nseed = 7\nrestarts=3 # fewer\n\ns = 9\ntol = 1e-12\nout = a.csv\n").unwrap();
        assert_eq!(o.seed, Some(7));
        assert_eq!(o.restarts, Some(3));
        assert_eq!(o.s, Some(9));
        assert_eq!(o.tol, Some(1e-12));
        assert_eq!(o.out, Some(PathBuf::from("a.csv")));
        assert_eq!(o.max_iter, None);
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(Overrides::parse("seed 7").is_err());
        assert!(Overrides::parse("colour = red").is_err());
        assert!(Overrides::parse("restarts = -1").is_err());
    }

    #[test]
    fn flags_beat_file_beat_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "seed = 5\nrestarts = 2\n").unwrap();
        let flags = Overrides {
            seed: Some(9),
            ..Overrides::default()
        };
        let c = RunConfig::resolve(flags, Some(&path)).unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.restarts, 2);
        assert_eq!(c.max_iter, DEFAULT_MAX_ITER);
    }

    #[test]
    fn validation() {
        let zero = Overrides {
            restarts: Some(0),
            ..Overrides::default()
        };
        assert!(RunConfig::resolve(zero, None).is_err());
        let tol = Overrides {
            tol: Some(0.0),
            ..Overrides::default()
        };
        assert!(RunConfig::resolve(tol, None).is_err());
    }
}
