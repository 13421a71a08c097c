//! Flat, line-oriented "section.key = value" configuration files.
//!
//! Grammar (documented in the README):
//!   - one assignment per line: `section.key = value`;
//!   - `#` starts a comment (whole line); blank lines are ignored;
//!   - whitespace around key and value is trimmed;
//!   - values are bare numbers or bare words — unit suffixes are rejected;
//!   - later assignments override earlier ones; command-line `--set key=value`
//!     overrides the file.

use std::fmt;

use pairtrace::{
    CoherenceModel, FieldInhomogeneity, PairKinetics, SimConfig, SourceRates, TrialSchedule,
    ZeemanScheme,
};
use sha2::{Digest, Sha256};

/// Default Zeeman-frequency spread (Hz) for the committed calibration.
pub const DEFAULT_K_HZ: f64 = 1.1e6;

/// Committed calibration for `predict.scale`: least-squares fit of the model
/// curve 1 + scale·∬f against a simulated g₁,₂ sweep of the default rates
/// (Δt = 0..400 ns, 4×10⁶ trials per point).
pub const DEFAULT_PREDICT_SCALE: f64 = 0.2769;

/// Ground-state polarization scenario selecting the Zeeman channel set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarization {
    Unpolarized,
    Clock,
}

impl Polarization {
    fn as_str(self) -> &'static str {
        match self {
            Polarization::Unpolarized => "unpolarized",
            Polarization::Clock => "clock",
        }
    }

    pub fn scheme(self) -> ZeemanScheme {
        match self {
            Polarization::Unpolarized => ZeemanScheme::unpolarized(),
            Polarization::Clock => ZeemanScheme::clock_polarized(),
        }
    }
}

/// A configuration error tied to a specific key (or file location), so the
/// user sees which field to fix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    fn new(field: impl Into<String>, message: impl Into<String>) -> ConfigError {
        ConfigError { field: field.into(), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

/// Every tunable of the pipeline, resolved from defaults, a config file and
/// overrides. The defaults are the committed calibration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub schedule: TrialSchedule,
    pub kinetics: PairKinetics,
    pub rates: SourceRates,
    pub k_hz: f64,
    pub polarization: Polarization,
    pub residual_decay_time_ns: Option<f64>,
    pub seed: u64,
    pub predict_scale: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schedule: TrialSchedule {
                trial_count: 1_000_000,
                delta_t_ns: 50.0,
                write_duration_ns: 150.0,
                read_duration_ns: 120.0,
                window_ns: 200.0,
            },
            kinetics: PairKinetics::default(),
            rates: SourceRates::default(),
            k_hz: DEFAULT_K_HZ,
            polarization: Polarization::Unpolarized,
            residual_decay_time_ns: None,
            seed: 1,
            predict_scale: DEFAULT_PREDICT_SCALE,
        }
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64, ConfigError> {
    let v: f64 = value
        .parse()
        .map_err(|_| ConfigError::new(key, format!("expected a bare number, got '{value}'")))?;
    if !v.is_finite() {
        return Err(ConfigError::new(key, format!("value must be finite, got '{value}'")));
    }
    Ok(v)
}

fn parse_u64(key: &str, value: &str) -> Result<u64, ConfigError> {
    value
        .parse()
        .map_err(|_| ConfigError::new(key, format!("expected a non-negative integer, got '{value}'")))
}

impl RunConfig {
    /// Apply one assignment. Unknown keys are errors so typos never pass
    /// silently.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "schedule.trials" => self.schedule.trial_count = parse_u64(key, value)?,
            "schedule.delta_t_ns" => self.schedule.delta_t_ns = parse_f64(key, value)?,
            "schedule.write_duration_ns" => {
                self.schedule.write_duration_ns = parse_f64(key, value)?
            }
            "schedule.read_duration_ns" => self.schedule.read_duration_ns = parse_f64(key, value)?,
            "schedule.window_ns" => self.schedule.window_ns = parse_f64(key, value)?,
            "kinetics.delta0_ns" => self.kinetics.delta0_ns = parse_f64(key, value)?,
            "kinetics.retrieval_delay_ns" => {
                self.kinetics.retrieval_delay_ns = parse_f64(key, value)?
            }
            "kinetics.retrieval_fwhm_ns" => {
                self.kinetics.retrieval_fwhm_ns = parse_f64(key, value)?
            }
            "rates.p_pair" => self.rates.p_pair = parse_f64(key, value)?,
            "rates.p1_uncorr" => self.rates.p1_uncorr = parse_f64(key, value)?,
            "rates.p2_uncorr" => self.rates.p2_uncorr = parse_f64(key, value)?,
            "rates.dark_per_window" => self.rates.dark_per_window = parse_f64(key, value)?,
            "rates.eta1" => self.rates.eta1 = parse_f64(key, value)?,
            "rates.eta2" => self.rates.eta2 = parse_f64(key, value)?,
            "coherence.k_hz" => self.k_hz = parse_f64(key, value)?,
            "coherence.polarization" => {
                self.polarization = match value {
                    "unpolarized" => Polarization::Unpolarized,
                    "clock" => Polarization::Clock,
                    other => {
                        return Err(ConfigError::new(
                            key,
                            format!("expected 'unpolarized' or 'clock', got '{other}'"),
                        ))
                    }
                }
            }
            "coherence.residual_decay_time_ns" => {
                self.residual_decay_time_ns = if value == "none" {
                    None
                } else {
                    Some(parse_f64(key, value)?)
                }
            }
            "sim.seed" => self.seed = parse_u64(key, value)?,
            "predict.scale" => self.predict_scale = parse_f64(key, value)?,
            other => return Err(ConfigError::new(other, "unknown configuration key")),
        }
        Ok(())
    }

    /// Apply a whole config file body. `source` names the file for error
    /// messages.
    pub fn apply_text(&mut self, text: &str, source: &str) -> Result<(), ConfigError> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                ConfigError::new(
                    format!("{source}:{}", idx + 1),
                    format!("expected 'section.key = value', got '{line}'"),
                )
            })?;
            self.set(key.trim(), value.trim()).map_err(|e| {
                ConfigError::new(format!("{source}:{} {}", idx + 1, e.field), e.message)
            })?;
        }
        Ok(())
    }

    /// Apply a `--set key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (key, value) = assignment.split_once('=').ok_or_else(|| {
            ConfigError::new("--set", format!("expected key=value, got '{assignment}'"))
        })?;
        self.set(key.trim(), value.trim())
    }

    /// The coherence model implied by the coherence.* keys.
    pub fn coherence(&self) -> Result<CoherenceModel, ConfigError> {
        let field = FieldInhomogeneity::new(self.k_hz)
            .map_err(|e| ConfigError::new("coherence.k_hz", e.to_string()))?;
        CoherenceModel::new(self.polarization.scheme(), field, self.residual_decay_time_ns)
            .map_err(|e| ConfigError::new("coherence.residual_decay_time_ns", e.to_string()))
    }

    /// A fully validated simulator configuration.
    pub fn sim_config(&self) -> Result<SimConfig, ConfigError> {
        let config = SimConfig {
            schedule: self.schedule,
            kinetics: self.kinetics,
            rates: self.rates,
            coherence: self.coherence()?,
            seed: self.seed,
        };
        config
            .validate()
            .map_err(|e| ConfigError::new("config", e.to_string()))?;
        if self.predict_scale < 0.0 || !self.predict_scale.is_finite() {
            return Err(ConfigError::new(
                "predict.scale",
                format!("must be a finite value \u{2265} 0, got {}", self.predict_scale),
            ));
        }
        Ok(config)
    }

    /// Canonical text form: every key, sorted, one per line. Shortest
    /// round-trip float formatting keeps this platform-independent.
    pub fn canonical_text(&self) -> String {
        let residual = match self.residual_decay_time_ns {
            Some(v) => v.to_string(),
            None => "none".to_string(),
        };
        let mut pairs = vec![
            ("coherence.k_hz", self.k_hz.to_string()),
            ("coherence.polarization", self.polarization.as_str().to_string()),
            ("coherence.residual_decay_time_ns", residual),
            ("kinetics.delta0_ns", self.kinetics.delta0_ns.to_string()),
            ("kinetics.retrieval_delay_ns", self.kinetics.retrieval_delay_ns.to_string()),
            ("kinetics.retrieval_fwhm_ns", self.kinetics.retrieval_fwhm_ns.to_string()),
            ("predict.scale", self.predict_scale.to_string()),
            ("rates.dark_per_window", self.rates.dark_per_window.to_string()),
            ("rates.eta1", self.rates.eta1.to_string()),
            ("rates.eta2", self.rates.eta2.to_string()),
            ("rates.p1_uncorr", self.rates.p1_uncorr.to_string()),
            ("rates.p2_uncorr", self.rates.p2_uncorr.to_string()),
            ("rates.p_pair", self.rates.p_pair.to_string()),
            ("schedule.delta_t_ns", self.schedule.delta_t_ns.to_string()),
            ("schedule.read_duration_ns", self.schedule.read_duration_ns.to_string()),
            ("schedule.trials", self.schedule.trial_count.to_string()),
            ("schedule.window_ns", self.schedule.window_ns.to_string()),
            ("schedule.write_duration_ns", self.schedule.write_duration_ns.to_string()),
            ("sim.seed", self.seed.to_string()),
        ];
        pairs.sort_by(|a, b| a.0.cmp(b.0));
        let mut out = String::new();
        for (k, v) in pairs {
            out.push_str(k);
            out.push('=');
            out.push_str(&v);
            out.push('\n');
        }
        out
    }

    /// SHA-256 of the canonical text, hex-encoded.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.canonical_text().as_bytes());
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        RunConfig::default().sim_config().unwrap();
    }

    #[test]
    fn file_text_overrides_defaults() {
        let mut cfg = RunConfig::default();
        cfg.apply_text(
            "# comment\n\nschedule.trials = 42\nrates.p_pair = 0.5\ncoherence.polarization = clock\n",
            "test.cfg",
        )
        .unwrap();
        assert_eq!(cfg.schedule.trial_count, 42);
        assert_eq!(cfg.rates.p_pair, 0.5);
        assert_eq!(cfg.polarization, Polarization::Clock);
    }

    #[test]
    fn unknown_key_is_field_level_error() {
        let mut cfg = RunConfig::default();
        let err = cfg.apply_text("rates.p_par = 0.5\n", "c.cfg").unwrap_err();
        assert!(err.field.contains("c.cfg:1"));
        assert!(err.field.contains("rates.p_par"));
        assert_eq!(err.message, "unknown configuration key");
    }

    #[test]
    fn unit_suffixes_are_rejected() {
        let mut cfg = RunConfig::default();
        let err = cfg.set("schedule.delta_t_ns", "50ns").unwrap_err();
        assert!(err.message.contains("bare number"));
        let err = cfg.set("coherence.k_hz", "1.1MHz").unwrap_err();
        assert!(err.message.contains("bare number"));
    }

    #[test]
    fn non_finite_values_are_rejected() {
        let mut cfg = RunConfig::default();
        assert!(cfg.set("rates.p_pair", "NaN").is_err());
        assert!(cfg.set("coherence.k_hz", "inf").is_err());
    }

    #[test]
    fn malformed_line_reports_location() {
        let mut cfg = RunConfig::default();
        let err = cfg.apply_text("rates.p_pair 0.5\n", "x.cfg").unwrap_err();
        assert_eq!(err.field, "x.cfg:1");
    }

    #[test]
    fn residual_decay_none_and_number() {
        let mut cfg = RunConfig::default();
        cfg.set("coherence.residual_decay_time_ns", "3000").unwrap();
        assert_eq!(cfg.residual_decay_time_ns, Some(3000.0));
        cfg.set("coherence.residual_decay_time_ns", "none").unwrap();
        assert_eq!(cfg.residual_decay_time_ns, None);
    }

    #[test]
    fn invalid_rate_fails_validation_with_field_message() {
        let mut cfg = RunConfig::default();
        cfg.set("rates.eta1", "1.5").unwrap();
        let err = cfg.sim_config().unwrap_err();
        assert!(err.message.contains("eta1"), "{err}");
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let base = RunConfig::default();
        let mut changed = base.clone();
        changed.set("sim.seed", "2").unwrap();
        assert_eq!(base.hash(), RunConfig::default().hash());
        assert_ne!(base.hash(), changed.hash());
        assert_eq!(base.hash().len(), 64);
    }

    #[test]
    fn canonical_text_round_trips_through_parser() {
        let mut cfg = RunConfig::default();
        cfg.set("rates.p_pair", "0.015").unwrap();
        cfg.set("coherence.residual_decay_time_ns", "2500").unwrap();
        let text = cfg.canonical_text();
        let mut reparsed = RunConfig::default();
        reparsed.apply_text(&text, "canonical").unwrap();
        assert_eq!(cfg, reparsed);
    }
}
