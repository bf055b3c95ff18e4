//! Run configuration: grids, tolerance and output options, read from flat
//! `key = value` text or set field by field.

use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scaling::GridSpec;

/// A log-spaced axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub const fn new(min: f64, max: f64, count: usize) -> Self {
        Axis { min, max, count }
    }

    /// Log-spaced nodes; a single node sits at `min`.
    pub fn nodes(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let (a, b) = (self.min.ln(), self.max.ln());
        let n = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| match i {
                0 => self.min,
                i if i == self.count - 1 => self.max,
                i => (a + (b - a) * i as f64 / n).exp(),
            })
            .collect()
    }

    fn check(&self, name: &str) -> Result<()> {
        if self.count == 0 {
            return Err(Error::InvalidParameter(format!("{name} grid is empty")));
        }
        if !(self.min > 0.0 && self.max >= self.min && self.max.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "{name} grid needs 0 < min ≤ max < ∞, got [{}, {}]",
                self.min, self.max
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(Error::InvalidParameter(format!(
                "unknown format `{other}` (json or csv)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub entry: String,
    /// Appended to the entry id when the id does not name a dimension.
    pub dimension: Option<usize>,
    pub t: Axis,
    pub r: Axis,
    /// λ-grid of the surrogate comparison.
    pub lambda: Axis,
    /// Relative slack added to every bound comparison.
    pub tol: f64,
    /// Grid on which ψ is certified.
    pub certificate_grid: GridSpec,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            entry: "stable:a=1.0:d=1".into(),
            dimension: None,
            t: Axis::new(1e-2, 1e2, 20),
            r: Axis::new(1e-2, 1e2, 20),
            lambda: Axis::new(1e-6, 1e6, 25),
            tol: 1e-9,
            certificate_grid: GridSpec::default(),
            out: None,
            format: Format::Json,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("`{key}` has an unparsable value `{value}`")))
}

impl RunConfig {
    pub fn for_entry(entry: impl Into<String>) -> Self {
        RunConfig {
            entry: entry.into(),
            ..Default::default()
        }
    }

    /// The entry id with the configured dimension filled in.
    pub fn entry_id(&self) -> String {
        match self.dimension {
            Some(d)
                if !self
                    .entry
                    .split(':')
                    .any(|p| p.trim_start().starts_with("d=")) =>
            {
                format!("{}:d={d}", self.entry)
            }
            _ => self.entry.clone(),
        }
    }

    /// Apply one `key = value` setting. Keys mirror the CLI flags.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().trim_start_matches("--");
        match key {
            "entry" => self.entry = value.trim().to_string(),
            "dimension" | "d" => self.dimension = Some(parse(key, value)?),
            "t-min" => self.t.min = parse(key, value)?,
            "t-max" => self.t.max = parse(key, value)?,
            "t-count" => self.t.count = parse(key, value)?,
            "r-min" => self.r.min = parse(key, value)?,
            "r-max" => self.r.max = parse(key, value)?,
            "r-count" => self.r.count = parse(key, value)?,
            "lambda-min" => self.lambda.min = parse(key, value)?,
            "lambda-max" => self.lambda.max = parse(key, value)?,
            "lambda-count" => self.lambda.count = parse(key, value)?,
            "tol" => self.tol = parse(key, value)?,
            "cert-min" => self.certificate_grid.lo = parse(key, value)?,
            "cert-max" => self.certificate_grid.hi = parse(key, value)?,
            "cert-points" => self.certificate_grid.points = parse(key, value)?,
            "out" => self.out = Some(PathBuf::from(value.trim())),
            "format" => self.format = value.parse()?,
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "unknown configuration key `{key}`"
                )))
            }
        }
        Ok(())
    }

    /// Apply settings from flat text: one `key = value` per line, `#` comments.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::InvalidParameter(format!("line {}: expected `key = value`", n + 1))
            })?;
            self.set(k, v)
                .map_err(|e| Error::InvalidParameter(format!("line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        cfg.apply_text(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.entry.trim().is_empty() {
            return Err(Error::InvalidParameter("no entry given".into()));
        }
        self.t.check("t")?;
        self.r.check("r")?;
        self.lambda.check("λ")?;
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        let g = self.certificate_grid;
        if !(g.lo > 0.0 && g.hi > g.lo && g.points >= 2) {
            return Err(Error::InvalidParameter(
                "certificate grid needs 0 < lo < hi and at least two points".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_nodes_hit_the_ends() {
        let a = Axis::new(1e-2, 1e2, 5);
        let n = a.nodes();
        assert_eq!(n.len(), 5);
        assert_eq!((n[0], n[4]), (1e-2, 1e2));
        assert!((n[2] - 1.0).abs() < 1e-14);
        assert_eq!(Axis::new(3.0, 3.0, 1).nodes(), vec![3.0]);
    }

    #[test]
    fn text_round_trip() {
        let cfg = RunConfig::from_text(
            "# sweep\nentry = stable:a=1.5\ndimension = 3\nt-count = 7 # fewer\nr-min=0.1\nformat = csv\n",
        )
        .unwrap();
        assert_eq!(cfg.entry_id(), "stable:a=1.5:d=3");
        assert_eq!(cfg.t.count, 7);
        assert_eq!(cfg.r.min, 0.1);
        assert_eq!(cfg.format, Format::Csv);
        let explicit = RunConfig {
            dimension: Some(3),
            ..RunConfig::for_entry("stable:a=1.0:d=1")
        };
        assert_eq!(explicit.entry_id(), "stable:a=1.0:d=1");
    }

    #[test]
    fn bad_settings_are_rejected() {
        assert!(RunConfig::from_text("t-count = 0").is_err());
        assert!(RunConfig::from_text("tol = -1").is_err());
        assert!(RunConfig::from_text("r-min = 5\nr-max = 1").is_err());
        assert!(RunConfig::from_text("colour = red").is_err());
        assert!(RunConfig::from_text("just words").is_err());
        assert!(RunConfig::from_text("format = xml").is_err());
    }
}
