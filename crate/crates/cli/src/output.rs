//! Output directory with CSV tables, JSON summaries and a config echo.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::Config;
use crate::failure::Failure;

/// Run metadata written into every JSON summary.
#[derive(Debug, Serialize)]
pub struct Meta<'a> {
    pub command: &'a str,
    /// What the data reproduces.
    pub target: &'a str,
    pub seed: u64,
    pub paper_scale: bool,
    pub version: &'a str,
    pub config: &'a Config,
}

pub struct Output {
    dir: PathBuf,
}

impl Output {
    pub fn create(dir: &Path) -> Result<Self, Failure> {
        std::fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn csv<I>(&self, name: &str, header: &[&str], rows: I) -> Result<(), Failure>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let mut w = csv::Writer::from_path(self.path(name))?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(&r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), Failure> {
        let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Config(format!("json: {e}")))?;
        std::fs::write(self.path(name), text + "\n")?;
        Ok(())
    }

    pub fn echo(&self, command: &str, cfg: &Config) -> Result<(), Failure> {
        std::fs::write(self.path(&format!("{command}.config.toml")), cfg.to_toml())?;
        Ok(())
    }
}

/// Shortest round-trip decimal form, in exponent notation for very small
/// or very large magnitudes; `nan` for NaN.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x.is_nan() {
        "nan".into()
    } else if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

/// Empty cell for a missing value.
pub fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, num)
}
