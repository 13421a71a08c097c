//! Monte Carlo generator of detection records.
//!
//! Each trial is drawn from its own counterfactual RNG stream derived from
//! `(seed, trial_index)` (ChaCha with the trial index as stream number), so
//! the record for a given config is bit-identical regardless of how trials
//! are partitioned across threads.
//!
//! Per-trial draw order (fixed; changing it changes every record):
//! 1. pair gate `u < p_pair`; if open: t1 ~ U[0, write), retrieval delay
//!    x ~ gamma kernel, coherence acceptance `u < C(t2−t1)`;
//! 2. photon 1: efficiency gate η₁, then arm (A/B);
//! 3. photon 2 (if coherence kept it and it lies inside the field-2
//!    window): efficiency gate η₂, then arm;
//! 4. Poisson(p1_uncorr) uncorrelated field-1 photons, each (time,
//!    efficiency, arm);
//! 5. Poisson(p2_uncorr) uncorrelated field-2 photons over the read
//!    envelope, each (time, efficiency, arm);
//! 6. Poisson(dark_per_window) dark counts per channel in order 1A, 1B,
//!    2A, 2B, each uniform over the window (no efficiency gate).
//!
//! A dephasing-rejected pair keeps its field-1 photon: the spin wave decays
//! into untracked modes, so only the retrieved photon is lost. The field-2
//! singles rate therefore falls slightly with Δt; backgrounds dominate the
//! singles in the calibrated regime, matching the experimental observation
//! that singles rates are Δt-independent within counting errors.

use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use thiserror::Error;

use crate::event::{
    quantize_ns, Arm, DetectionEvent, DetectorChannel, EventRecord, FieldId, TrialSchedule,
};
use crate::kinetics::PairKinetics;
use crate::larmor::{CoherenceModel, ModelError, PairDensity};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("rates field {name} must be finite and {constraint}, got {value}")]
    InvalidRate { name: &'static str, constraint: &'static str, value: f64 },
    #[error("coherence acceptance probability left [0,1]: {0} (model misconfigured)")]
    RejectionBound(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Record(#[from] crate::event::RecordError),
}

/// Source and detection rates, all per trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceRates {
    /// Probability that a trial creates a correlated excitation which emits
    /// photon 1.
    pub p_pair: f64,
    /// Mean uncorrelated field-1 photons per trial (write-pulse leakage,
    /// uncorrelated scattering).
    pub p1_uncorr: f64,
    /// Mean uncorrelated field-2 photons per trial (read-pulse leakage).
    pub p2_uncorr: f64,
    /// Mean dark counts per detector per window.
    pub dark_per_window: f64,
    /// Field-1 detection efficiency.
    pub eta1: f64,
    /// Field-2 detection efficiency.
    pub eta2: f64,
}

impl Default for SourceRates {
    /// Committed calibration (see `calibration/calibrated.cfg`): tuned so a
    /// Δt=50 ns run gives g₁,₂ ≈ 30.
    fn default() -> Self {
        SourceRates {
            p_pair: 0.01,
            p1_uncorr: 6.78e-3,
            p2_uncorr: 6.78e-3,
            dark_per_window: 1e-4,
            eta1: 0.3,
            eta2: 0.3,
        }
    }
}

impl SourceRates {
    pub fn validate(&self) -> Result<(), SimError> {
        let unit = [
            ("p_pair", self.p_pair),
            ("eta1", self.eta1),
            ("eta2", self.eta2),
        ];
        for (name, v) in unit {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(SimError::InvalidRate { name, constraint: "in [0, 1]", value: v });
            }
        }
        let nonneg = [
            ("p1_uncorr", self.p1_uncorr),
            ("p2_uncorr", self.p2_uncorr),
            ("dark_per_window", self.dark_per_window),
        ];
        for (name, v) in nonneg {
            if !v.is_finite() || v < 0.0 {
                return Err(SimError::InvalidRate { name, constraint: "\u{2265} 0", value: v });
            }
        }
        Ok(())
    }
}

/// Complete, self-contained description of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub schedule: TrialSchedule,
    pub kinetics: PairKinetics,
    pub rates: SourceRates,
    pub coherence: CoherenceModel,
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        self.schedule.validate().map_err(SimError::Record)?;
        self.kinetics.validate().map_err(ModelError::Kinetics)?;
        self.rates.validate()?;
        self.coherence.validate()?;
        Ok(())
    }
}

/// One correlated-pair emission: photon 1 always exists; photon 2 survives
/// dephasing with probability C(t2−t1). Both times are on the common axis
/// and unclipped — `t2_ns` may exceed the field-2 window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairEmission {
    pub t1_ns: f64,
    pub t2_ns: Option<f64>,
}

/// Precomputed pair-emission sampler (kernel solved once).
#[derive(Debug, Clone)]
pub struct PairSampler {
    density: PairDensity,
    gamma: rand_distr::Gamma<f64>,
    write_ns: f64,
}

impl PairSampler {
    pub fn new(
        kinetics: &PairKinetics,
        coherence: &CoherenceModel,
        schedule: &TrialSchedule,
    ) -> Result<PairSampler, SimError> {
        let density = PairDensity::new(coherence, kinetics, schedule)?;
        let gamma = density.kernel().sampler();
        Ok(PairSampler { density, gamma, write_ns: schedule.write_duration_ns })
    }

    /// Draw one emission: t1, kernel delay, coherence acceptance (3 RNG
    /// draws, in that order).
    pub fn sample_emission<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<PairEmission, SimError> {
        let t1 = rng.gen_range(0.0..self.write_ns);
        let delay = self.gamma.sample(rng);
        let t2 = self.density.t_start(t1) + delay;
        let c = self.density.coherence_at(t2 - t1);
        if !(0.0..=1.0).contains(&c) {
            return Err(SimError::RejectionBound(c));
        }
        let kept = rng.gen::<f64>() < c;
        Ok(PairEmission { t1_ns: t1, t2_ns: kept.then_some(t2) })
    }
}

/// Draw one correlated pair. `None` means the coherence rejection discarded
/// the retrieved photon (the trial still emitted photon 1 — `simulate`
/// records it; this helper only reports the surviving pair). Times are on
/// the common axis; t2 is not clipped to the detection window, callers clip.
pub fn sample_pair<R: Rng + ?Sized>(
    kinetics: &PairKinetics,
    coherence: &CoherenceModel,
    schedule: &TrialSchedule,
    rng: &mut R,
) -> Result<Option<(f64, f64)>, SimError> {
    let sampler = PairSampler::new(kinetics, coherence, schedule)?;
    let em = sampler.sample_emission(rng)?;
    Ok(em.t2_ns.map(|t2| (em.t1_ns, t2)))
}

fn opt_poisson(mean: f64) -> Option<Poisson<f64>> {
    if mean > 0.0 {
        Some(Poisson::new(mean).expect("validated mean"))
    } else {
        None
    }
}

/// Largest detector tick strictly below `hi`.
fn max_tick_below(hi: f64) -> f64 {
    // Largest tick strictly below `hi`, in the same n/1000 representation
    // that quantize_ns produces.
    (hi * 1000.0 - 0.5).floor() / 1000.0
}

struct TrialGen<'a> {
    sampler: &'a PairSampler,
    rates: SourceRates,
    schedule: TrialSchedule,
    poisson1: Option<Poisson<f64>>,
    poisson2: Option<Poisson<f64>>,
    poisson_dark: Option<Poisson<f64>>,
    seed: u64,
}

impl TrialGen<'_> {
    fn push(
        &self,
        out: &mut Vec<DetectionEvent>,
        trial: u64,
        field: FieldId,
        arm: Arm,
        t_ns: f64,
    ) {
        // Quantization can round up to the window edge; clamp to the last
        // tick inside so the record invariant [0, window) holds.
        let mut q = quantize_ns(t_ns);
        if q >= self.schedule.window_ns {
            q = max_tick_below(self.schedule.window_ns);
        }
        out.push(DetectionEvent {
            trial,
            channel: DetectorChannel { field, arm },
            time_ns: q,
        });
    }

    fn arm<R: Rng + ?Sized>(rng: &mut R) -> Arm {
        if rng.gen::<bool>() {
            Arm::A
        } else {
            Arm::B
        }
    }

    fn run(&self, trial: u64, out: &mut Vec<DetectionEvent>) -> Result<(), SimError> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial);
        let sched = &self.schedule;

        // 1-3: correlated pair.
        if rng.gen::<f64>() < self.rates.p_pair {
            let em = self.sampler.sample_emission(&mut rng)?;
            if rng.gen::<f64>() < self.rates.eta1 {
                let arm = Self::arm(&mut rng);
                self.push(out, trial, FieldId::Field1, arm, em.t1_ns);
            }
            if let Some(t2) = em.t2_ns {
                let stored = t2 - sched.delta_t_ns;
                if stored < sched.window_ns && rng.gen::<f64>() < self.rates.eta2 {
                    let arm = Self::arm(&mut rng);
                    self.push(out, trial, FieldId::Field2, arm, stored);
                }
            }
        }

        // 4: uncorrelated field-1 photons over the write pulse.
        if let Some(p) = self.poisson1 {
            let n = p.sample(&mut rng) as u64;
            for _ in 0..n {
                let t = rng.gen_range(0.0..sched.write_duration_ns);
                if rng.gen::<f64>() < self.rates.eta1 {
                    let arm = Self::arm(&mut rng);
                    self.push(out, trial, FieldId::Field1, arm, t);
                }
            }
        }

        // 5: uncorrelated field-2 photons over the read envelope
        // (window-relative axis).
        if let Some(p) = self.poisson2 {
            let n = p.sample(&mut rng) as u64;
            for _ in 0..n {
                let t = rng.gen_range(0.0..sched.read_duration_ns);
                if rng.gen::<f64>() < self.rates.eta2 {
                    let arm = Self::arm(&mut rng);
                    self.push(out, trial, FieldId::Field2, arm, t);
                }
            }
        }

        // 6: dark counts, channel order 1A, 1B, 2A, 2B.
        if let Some(p) = self.poisson_dark {
            for channel in DetectorChannel::ALL {
                let n = p.sample(&mut rng) as u64;
                for _ in 0..n {
                    let t = rng.gen_range(0.0..sched.window_ns);
                    self.push(out, trial, channel.field, channel.arm, t);
                }
            }
        }
        Ok(())
    }
}

/// Generate raw events for an arbitrary trial range. Events depend only on
/// (config, trial index): simulating `[0,M)` equals the concatenation of
/// `[0,k)` and `[k,M)`. Parallelized over trial chunks; output order and
/// content are independent of the worker count.
pub fn simulate_trials(
    config: &SimConfig,
    trials: Range<u64>,
) -> Result<Vec<DetectionEvent>, SimError> {
    config.validate()?;
    let sampler = PairSampler::new(&config.kinetics, &config.coherence, &config.schedule)?;
    let gen = TrialGen {
        sampler: &sampler,
        rates: config.rates,
        schedule: config.schedule,
        poisson1: opt_poisson(config.rates.p1_uncorr),
        poisson2: opt_poisson(config.rates.p2_uncorr),
        poisson_dark: opt_poisson(config.rates.dark_per_window),
        seed: config.seed,
    };

    const CHUNK: u64 = 8192;
    let chunks: Vec<Range<u64>> = {
        let mut v = Vec::new();
        let mut lo = trials.start;
        while lo < trials.end {
            let hi = (lo + CHUNK).min(trials.end);
            v.push(lo..hi);
            lo = hi;
        }
        v
    };

    let per_chunk: Result<Vec<Vec<DetectionEvent>>, SimError> = chunks
        .into_par_iter()
        .map(|range| {
            let mut out = Vec::new();
            for trial in range {
                gen.run(trial, &mut out)?;
            }
            Ok(out)
        })
        .collect();

    let mut events = Vec::new();
    for chunk in per_chunk? {
        events.extend(chunk);
    }
    Ok(events)
}

/// Run the full config and assemble a sorted, validated record with the
/// generator settings echoed into metadata. Identical (config, seed) gives a
/// bit-identical record for any number of rayon workers.
pub fn simulate(config: &SimConfig) -> Result<EventRecord, SimError> {
    let events = simulate_trials(config, 0..config.schedule.trial_count)?;
    let record = EventRecord::new(config.schedule, config_metadata(config), events)?;
    Ok(record)
}

/// Generator settings as record metadata (echoed into the file header).
fn config_metadata(config: &SimConfig) -> Vec<(String, String)> {
    let mut md: Vec<(String, String)> = vec![
        ("kinetics.delta0_ns".into(), config.kinetics.delta0_ns.to_string()),
        ("kinetics.retrieval_delay_ns".into(), config.kinetics.retrieval_delay_ns.to_string()),
        ("kinetics.retrieval_fwhm_ns".into(), config.kinetics.retrieval_fwhm_ns.to_string()),
        ("rates.p_pair".into(), config.rates.p_pair.to_string()),
        ("rates.p1_uncorr".into(), config.rates.p1_uncorr.to_string()),
        ("rates.p2_uncorr".into(), config.rates.p2_uncorr.to_string()),
        ("rates.dark_per_window".into(), config.rates.dark_per_window.to_string()),
        ("rates.eta1".into(), config.rates.eta1.to_string()),
        ("rates.eta2".into(), config.rates.eta2.to_string()),
        ("coherence.k_hz".into(), config.coherence.field.k_hz.to_string()),
        ("coherence.scheme".into(), config.coherence.scheme.describe()),
        ("sim.seed".into(), config.seed.to_string()),
    ];
    if let Some(tau) = config.coherence.residual_decay_time_ns {
        md.push(("coherence.residual_decay_time_ns".into(), tau.to_string()));
    }
    md
}
