//! Run configuration: built-in defaults, then an optional `key = value`
//! file, then `ZSA_CACHE_DIR`, then command-line flags.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use zsa_core::levelset::default_window;
use zsa_core::strips::Budgets;

pub const CACHE_ENV: &str = "ZSA_CACHE_DIR";

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub tol: f64,
    /// Height budget for existence witnesses.
    pub height: f64,
    /// Height for empirical bounds.
    pub bounds_height: f64,
    /// Grid step of the membership scans.
    pub grid_step: f64,
    /// Vertical window for modulus profiles.
    pub profile_window: f64,
    /// Cell size for level-curve tracing; `None` picks one from `n`.
    pub level_grid: Option<f64>,
    pub k_max: u64,
    pub m_max: u64,
    /// Largest order accepted by `report` and `bounds`.
    pub max_n: u64,
    pub threads: Option<usize>,
    pub out_dir: PathBuf,
    /// Zero cache; `None` disables caching.
    pub cache_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let b = Budgets::default();
        RunConfig {
            tol: b.tol,
            height: b.height,
            bounds_height: b.bounds_height,
            grid_step: b.grid_step,
            profile_window: default_window(),
            level_grid: None,
            k_max: b.k_max,
            m_max: b.m_max,
            max_n: 12,
            threads: None,
            out_dir: PathBuf::from("."),
            cache_dir: None,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| anyhow::anyhow!("bad value {value:?} for {key}: {e}"))
}

impl RunConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "tol" => self.tol = parse(key, value)?,
            "height" => self.height = parse(key, value)?,
            "bounds_height" => self.bounds_height = parse(key, value)?,
            "grid_step" => self.grid_step = parse(key, value)?,
            "profile_window" => self.profile_window = parse(key, value)?,
            "level_grid" => self.level_grid = Some(parse(key, value)?),
            "k_max" => self.k_max = parse(key, value)?,
            "m_max" => self.m_max = parse(key, value)?,
            "max_n" => self.max_n = parse(key, value)?,
            "threads" => self.threads = Some(parse(key, value)?),
            "out_dir" => self.out_dir = PathBuf::from(value),
            "cache_dir" => self.cache_dir = Some(PathBuf::from(value)),
            other => bail!("unknown configuration key {other:?}"),
        }
        Ok(())
    }

    /// Reads `key = value` lines; blank lines and `#` comments are skipped.
    pub fn merge_text(&mut self, text: &str, origin: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .with_context(|| format!("{origin}:{}: expected key = value", i + 1))?;
            self.set(key.trim(), value.trim())
                .with_context(|| format!("{origin}:{}", i + 1))?;
        }
        Ok(())
    }

    pub fn merge_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        self.merge_text(&text, &path.display().to_string())
    }

    pub fn merge_env(&mut self) {
        if let Some(dir) = std::env::var_os(CACHE_ENV).filter(|d| !d.is_empty()) {
            self.cache_dir = Some(PathBuf::from(dir));
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("tol", self.tol),
            ("height", self.height),
            ("bounds_height", self.bounds_height),
            ("grid_step", self.grid_step),
            ("profile_window", self.profile_window),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                bail!("{name} must be positive and finite, got {v}");
            }
        }
        if let Some(g) = self.level_grid {
            if !(g > 0.0) {
                bail!("level_grid must be positive, got {g}");
            }
        }
        if self.threads == Some(0) {
            bail!("threads must be at least 1");
        }
        Ok(())
    }

    pub fn budgets(&self) -> Budgets {
        Budgets {
            height: self.height,
            bounds_height: self.bounds_height,
            grid_step: self.grid_step,
            tol: self.tol,
            k_max: self.k_max,
            m_max: self.m_max,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_overrides_defaults() {
        let mut c = RunConfig::default();
        c.merge_text("# budgets\nheight = 1000\n\ntol=1e-9  # tighter\nout_dir = out\n", "t")
            .unwrap();
        assert_eq!(c.height, 1000.0);
        assert_eq!(c.tol, 1e-9);
        assert_eq!(c.out_dir, PathBuf::from("out"));
        assert_eq!(c.bounds_height, RunConfig::default().bounds_height);
    }

    #[test]
    fn rejects_bad_settings() {
        let mut c = RunConfig::default();
        assert!(c.merge_text("colour = blue", "t").is_err());
        assert!(c.merge_text("height", "t").is_err());
        assert!(c.merge_text("tol = fast", "t").is_err());
        c.merge_text("tol = -1", "t").unwrap();
        assert!(c.validate().is_err());
    }
}
