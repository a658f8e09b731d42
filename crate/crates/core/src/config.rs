//! Run configuration shared by all pipelines.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Svg,
    Csv,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "json" => Ok(Self::Json),
            "svg" => Ok(Self::Svg),
            "csv" => Ok(Self::Csv),
            other => Err(Error::Parse(format!("unknown output format {other:?}"))),
        }
    }
}

/// Tolerances and output settings. Length tolerances are relative to the
/// size of the root set (see the individual fields).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Hit radius around turning points, times `D = diam + 1`.
    pub delta_hit: f64,
    /// Path clearance around turning points, times the root-set diameter.
    pub delta_path: f64,
    /// Initial half-width of the bisection bracket in `t` (radians).
    pub eps_t: f64,
    /// Relative tolerance of adaptive quadrature.
    pub quad_rtol: f64,
    /// Escape radius is this times `1 + max |root|`.
    pub r_escape_multiplier: f64,
    /// Trace length cap is this times `D`.
    pub l_max_multiplier: f64,
    /// Tolerance for decimating polylines in JSON output, times `D`.
    pub polyline_tolerance: f64,
    /// Root-finder tolerance.
    pub root_tol: f64,
    pub seed: u64,
    pub out_dir: String,
    pub formats: Vec<OutputFormat>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            delta_hit: 1e-6,
            delta_path: 1e-3,
            eps_t: 1e-2,
            quad_rtol: 1e-12,
            r_escape_multiplier: 10.0,
            l_max_multiplier: 50.0,
            polyline_tolerance: 1e-4,
            root_tol: 1e-10,
            seed: 0,
            out_dir: ".".into(),
            formats: vec![OutputFormat::Json],
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("delta_hit", self.delta_hit),
            ("delta_path", self.delta_path),
            ("eps_t", self.eps_t),
            ("quad_rtol", self.quad_rtol),
            ("r_escape_multiplier", self.r_escape_multiplier),
            ("l_max_multiplier", self.l_max_multiplier),
            ("polyline_tolerance", self.polyline_tolerance),
            ("root_tol", self.root_tol),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_json_fills_defaults() {
        let cfg = RunConfig::from_json(r#"{"delta_hit": 1e-7, "formats": ["svg", "json"]}"#).unwrap();
        assert_eq!(cfg.delta_hit, 1e-7);
        assert_eq!(cfg.eps_t, 1e-2);
        assert_eq!(cfg.formats, vec![OutputFormat::Svg, OutputFormat::Json]);
    }

    #[test]
    fn rejects_nonpositive_tolerances_and_unknown_formats() {
        assert!(RunConfig::from_json(r#"{"quad_rtol": 0}"#).is_err());
        assert!(RunConfig::from_json(r#"{"formats": ["png"]}"#).is_err());
        assert!(RunConfig::from_json(r#"{"bogus": 1}"#).is_err());
    }
}
