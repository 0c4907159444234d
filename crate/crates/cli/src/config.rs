//! JSON study configuration.
//!
//! A config file is a single JSON object with `schema_version: 1`. Unknown
//! keys are rejected so that a typo cannot silently fall back to a default.
//! The spectral window cap is spelled `L` in the file; the bounded waveguide
//! length is `l`. Sources are cosine series on `[0, l]` given by their
//! coefficient lists (`f1[k]` multiplies `cos(k·π·x/l)`).

use bandgap_lab::harness::StudyConfig;
use bandgap_lab::limit::CosineSeries;
use bandgap_lab::mesh::MeshControls;
use bandgap_lab::scaling::{QTarget, RoomSpec, ScalingLaw};
use serde::Deserialize;
use std::fmt;
use std::path::Path;

#[derive(Debug)]
pub enum ConfigError {
    Read(String),
    Parse(String),
    Invalid(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Read(m) => write!(f, "cannot read config: {m}"),
            ConfigError::Parse(m) => write!(f, "cannot parse config: {m}"),
            ConfigError::Invalid(m) => write!(f, "invalid config: {m}"),
        }
    }
}

impl std::error::Error for ConfigError {}

/// `q_target` is either a positive number or the string `"infinity"`.
#[derive(Clone, Copy, Debug)]
pub struct QField(pub QTarget<f64>);

impl<'de> Deserialize<'de> for QField {
    fn deserialize<D>(deserializer: D) -> Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        use serde::de::Error;
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Word(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Number(q) => Ok(QField(QTarget::Finite(q))),
            Raw::Word(w) if w == "infinity" => Ok(QField(QTarget::Infinity)),
            Raw::Word(w) => Err(D::Error::custom(format!(
                "q_target must be a number or \"infinity\", got \"{w}\""
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoomField {
    pub width: f64,
    pub height: f64,
    pub contact_half_width: f64,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeshField {
    pub n_base: usize,
    pub grading_ratio: f64,
    pub vertex_cap: usize,
    pub aspect_limit: f64,
}

impl Default for MeshField {
    fn default() -> Self {
        let d = MeshControls::<f64>::default();
        Self {
            n_base: d.n_base,
            grading_ratio: d.grading_ratio,
            vertex_cap: d.vertex_cap,
            aspect_limit: d.aspect_limit,
        }
    }
}

/// On-disk study description. Every field below `room` is optional and
/// defaults to the values of [`StudyConfig::new`].
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub schema_version: u32,
    pub q_target: QField,
    pub gamma: f64,
    pub room: RoomField,
    #[serde(default)]
    pub eps_schedule: Option<Vec<f64>>,
    #[serde(default)]
    pub l: Option<f64>,
    /// Spectral window cap.
    #[serde(default, rename = "L")]
    pub spectral_cap: Option<f64>,
    #[serde(default)]
    pub mu: Option<f64>,
    /// Cosine coefficients of the strip source on `[0, l]`.
    #[serde(default)]
    pub f1: Option<Vec<f64>>,
    /// Cosine coefficients of the room source on `[0, l]`.
    #[serde(default)]
    pub f2: Option<Vec<f64>>,
    #[serde(default)]
    pub mesh: Option<MeshField>,
    #[serde(default)]
    pub m_bands: Option<usize>,
    #[serde(default)]
    pub phi_count: Option<usize>,
    /// Minimal reported gap width; defaults to `1e-3 · L`.
    #[serde(default)]
    pub tau_gap: Option<f64>,
    #[serde(default)]
    pub richardson_tol: Option<f64>,
    #[serde(default)]
    pub max_refines: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl FileConfig {
    pub fn into_study(self) -> Result<StudyConfig<f64>, ConfigError> {
        if self.schema_version != 1 {
            return Err(ConfigError::Invalid(format!(
                "schema_version must be 1, got {}",
                self.schema_version
            )));
        }
        let law = ScalingLaw::new(self.q_target.0, self.gamma)
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let room = RoomSpec::new(
            self.room.width,
            self.room.height,
            self.room.contact_half_width,
        );
        let mut cfg = StudyConfig::new(law, room);
        if let Some(s) = self.eps_schedule {
            cfg.eps_schedule = s;
        }
        if let Some(l) = self.l {
            cfg.l = l;
        }
        if let Some(cap) = self.spectral_cap {
            cfg.spectral_cap = cap;
        }
        if let Some(mu) = self.mu {
            cfg.mu = mu;
        }
        cfg.f1 = match self.f1 {
            Some(c) => CosineSeries::new(cfg.l, c),
            None => CosineSeries::constant(cfg.l, 1.0),
        };
        cfg.f2 = match self.f2 {
            Some(c) => CosineSeries::new(cfg.l, c),
            None => CosineSeries::zero(cfg.l),
        };
        if let Some(m) = self.mesh {
            cfg.mesh = MeshControls {
                n_base: m.n_base,
                grading_ratio: m.grading_ratio,
                vertex_cap: m.vertex_cap,
                aspect_limit: m.aspect_limit,
            };
        }
        if let Some(m) = self.m_bands {
            cfg.m_bands = m;
        }
        if let Some(pc) = self.phi_count {
            cfg.phi_count = pc;
        }
        cfg.tau_gap = self.tau_gap;
        if let Some(rt) = self.richardson_tol {
            cfg.richardson_tol = rt;
        }
        if let Some(mr) = self.max_refines {
            cfg.max_refines = mr;
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        Ok(cfg)
    }
}

pub fn load_study(path: &Path) -> Result<StudyConfig<f64>, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Read(format!("{}: {e}", path.display())))?;
    let file: FileConfig =
        serde_json::from_str(&text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    file.into_study()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let text = r#"{
            "schema_version": 1,
            "q_target": 1.0,
            "gamma": 1.0,
            "room": { "width": 0.5, "height": 0.5, "contact_half_width": 0.2 }
        }"#;
        let file: FileConfig = serde_json::from_str(text).unwrap();
        let cfg = file.into_study().unwrap();
        assert_eq!(cfg.eps_schedule, vec![0.2, 0.1]);
        assert_eq!(cfg.spectral_cap, 3.0);
        assert_eq!(cfg.m_bands, 8);
        assert_eq!(cfg.f1.coeffs, vec![1.0]);
        assert!(cfg.f2.coeffs.is_empty());
    }

    #[test]
    fn infinity_and_window_rename_are_honored() {
        let text = r#"{
            "schema_version": 1,
            "q_target": "infinity",
            "gamma": 1.0,
            "room": { "width": 0.5, "height": 0.5, "contact_half_width": 0.2 },
            "L": 7.5,
            "f1": [0.0, 1.0]
        }"#;
        let file: FileConfig = serde_json::from_str(text).unwrap();
        let cfg = file.into_study().unwrap();
        assert_eq!(cfg.law.q_target, QTarget::Infinity);
        assert_eq!(cfg.spectral_cap, 7.5);
        assert_eq!(cfg.f1.coeffs, vec![0.0, 1.0]);
    }

    #[test]
    fn unknown_keys_are_rejected_by_name() {
        let text = r#"{
            "schema_version": 1,
            "q_target": 1.0,
            "gamma": 1.0,
            "room": { "width": 0.5, "height": 0.5, "contact_half_width": 0.2 },
            "bandcount": 9
        }"#;
        let err = serde_json::from_str::<FileConfig>(text).unwrap_err();
        assert!(err.to_string().contains("bandcount"), "{err}");
    }

    #[test]
    fn bad_q_words_and_versions_are_rejected() {
        let text = r#"{
            "schema_version": 1,
            "q_target": "huge",
            "gamma": 1.0,
            "room": { "width": 0.5, "height": 0.5, "contact_half_width": 0.2 }
        }"#;
        assert!(serde_json::from_str::<FileConfig>(text).is_err());

        let text = r#"{
            "schema_version": 2,
            "q_target": 1.0,
            "gamma": 1.0,
            "room": { "width": 0.5, "height": 0.5, "contact_half_width": 0.2 }
        }"#;
        let file: FileConfig = serde_json::from_str(text).unwrap();
        assert!(file.into_study().is_err());
    }
}
