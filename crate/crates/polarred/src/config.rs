//! Run configuration: strict JSON files with command-line overrides.

use serde::{Deserialize, Serialize};

use crate::classical::{CoadjointOrbitSpec, Integrator};
use crate::error::Error;
use crate::Result;

/// Everything a run needs; unknown keys are rejected so that a typo in a
/// tolerance or field name cannot silently fake a pass.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: String,
    /// Orbit selector: "zero", "su2:r=<v>", "kks:nu=<v>" or
    /// "generic:<c0,c1,...>" in full acting-algebra coordinates.
    pub orbit: String,
    pub rep: String,
    pub t_end: f64,
    pub dt: f64,
    pub integrator: String,
    /// Trajectory rows are recorded every `stride` steps.
    pub stride: usize,
    pub grid_n: usize,
    pub eigenvalues: usize,
    pub seed: u64,
    pub samples: usize,
    /// Compare the reduced flow against the unreduced geodesic.
    pub oracle: bool,
    pub output: Option<String>,
    pub operator_dump: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: "su2-conj".into(),
            orbit: "su2:r=1".into(),
            rep: "trivial".into(),
            t_end: 1.0,
            dt: 1e-3,
            integrator: "rk4".into(),
            stride: 10,
            grid_n: 2000,
            eigenvalues: 5,
            seed: 7,
            samples: 100,
            oracle: false,
            output: None,
            operator_dump: None,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &str) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.t_end.is_finite() || self.t_end <= 0.0 {
            return Err(Error::Config(format!("t_end must be positive, got {}", self.t_end)));
        }
        if !self.dt.is_finite() || self.dt <= 0.0 {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if self.stride == 0 {
            return Err(Error::Config("stride must be at least 1".into()));
        }
        if self.grid_n == 0 {
            return Err(Error::Config("grid_n must be at least 1".into()));
        }
        if self.eigenvalues == 0 {
            return Err(Error::Config("eigenvalues must be at least 1".into()));
        }
        if self.samples == 0 {
            return Err(Error::Config("samples must be at least 1".into()));
        }
        self.orbit_spec()?;
        self.scheme()?;
        Ok(())
    }

    pub fn orbit_spec(&self) -> Result<CoadjointOrbitSpec> {
        parse_orbit(&self.orbit)
    }

    pub fn scheme(&self) -> Result<Integrator> {
        self.integrator.parse()
    }
}

pub fn parse_orbit(s: &str) -> Result<CoadjointOrbitSpec> {
    if s == "zero" {
        return Ok(CoadjointOrbitSpec::Zero);
    }
    if let Some(v) = s.strip_prefix("su2:r=") {
        return Ok(CoadjointOrbitSpec::Su2Equator { r: parse_num(v, "su2 orbit radius")? });
    }
    if let Some(v) = s.strip_prefix("kks:nu=") {
        return Ok(CoadjointOrbitSpec::Kks { nu: parse_num(v, "kks orbit weight")? });
    }
    if let Some(list) = s.strip_prefix("generic:") {
        let mu = list
            .split(',')
            .map(|x| parse_num(x.trim(), "orbit coordinate"))
            .collect::<Result<Vec<f64>>>()?;
        if mu.is_empty() {
            return Err(Error::Config("generic orbit needs coordinates".into()));
        }
        return Ok(CoadjointOrbitSpec::Generic { mu });
    }
    Err(Error::Config(format!(
        "unknown orbit '{s}'; expected zero, su2:r=<v>, kks:nu=<v> or generic:<list>"
    )))
}

fn parse_num(s: &str, what: &str) -> Result<f64> {
    let v: f64 = s
        .parse()
        .map_err(|_| Error::Config(format!("{what}: cannot parse '{s}'")))?;
    if !v.is_finite() {
        return Err(Error::Config(format!("{what}: must be finite")));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::from_json(r#"{"model": "su2-conj", "tolrance": 1e-6}"#);
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn partial_configs_fill_defaults() {
        let cfg = RunConfig::from_json(r#"{"model": "su3-conj", "dt": 0.0001}"#).unwrap();
        assert_eq!(cfg.model, "su3-conj");
        assert_eq!(cfg.dt, 1e-4);
        assert_eq!(cfg.grid_n, 2000);
    }

    #[test]
    fn nonpositive_numbers_are_rejected() {
        assert!(RunConfig::from_json(r#"{"dt": -0.1}"#).is_err());
        assert!(RunConfig::from_json(r#"{"t_end": 0.0}"#).is_err());
        assert!(RunConfig::from_json(r#"{"stride": 0}"#).is_err());
    }

    #[test]
    fn orbit_strings_parse() {
        assert!(matches!(parse_orbit("zero"), Ok(CoadjointOrbitSpec::Zero)));
        match parse_orbit("su2:r=1.5") {
            Ok(CoadjointOrbitSpec::Su2Equator { r }) => assert_eq!(r, 1.5),
            other => panic!("{other:?}"),
        }
        match parse_orbit("kks:nu=2") {
            Ok(CoadjointOrbitSpec::Kks { nu }) => assert_eq!(nu, 2.0),
            other => panic!("{other:?}"),
        }
        match parse_orbit("generic:0.1, -0.2,0.3") {
            Ok(CoadjointOrbitSpec::Generic { mu }) => assert_eq!(mu, vec![0.1, -0.2, 0.3]),
            other => panic!("{other:?}"),
        }
        assert!(parse_orbit("su2:r=abc").is_err());
        assert!(parse_orbit("sphere").is_err());
    }

    #[test]
    fn config_round_trips_through_serde() {
        let cfg = RunConfig { seed: 123, oracle: true, ..RunConfig::default() };
        let text = serde_json::to_string(&cfg).unwrap();
        let back = RunConfig::from_json(&text).unwrap();
        assert_eq!(back.seed, 123);
        assert!(back.oracle);
    }
}
