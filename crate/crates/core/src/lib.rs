//! Photon-pair correlation toolkit: simulate time-stamped photodetection
//! records from a write/read atomic-ensemble experiment and compute the
//! correlation observables used to characterize them.
//!
//! # Experiment shape
//!
//! Each trial fires a write pulse (field-1 detection window opens at the
//! trial origin) and, a delay Δt later, a read pulse (field-2 window).
//! Both fields hit 50/50 beamsplitters feeding two detectors each
//! (channels 1A/1B/2A/2B). A correlated pair source emits a field-1
//! photon during the write pulse and a retrieved field-2 photon after it;
//! uncorrelated backgrounds and dark counts add noise. Between emission
//! and retrieval the stored atomic excitation dephases under a magnetic
//! field gradient (Larmor precession), suppressing retrieval at large Δt.
//!
//! # Conventions
//!
//! * All times are nanoseconds; frequencies are Hz.
//! * Event times are quantized to a 1 ps tick and live in `[0, window)`
//!   relative to their own detection window.
//! * The "common axis" places field-2 times at stored time + Δt so both
//!   fields share the trial clock; analysis bins and ridge profiles use it.
//! * Estimated probabilities are per-trial ("≥ 1 event in bin"); the
//!   auto-correlation estimator carries a factor 4 (2 for arm splitting ×
//!   2 for photon permutation) so the Cauchy-Schwarz ratio
//!   R = p₁₂²/(p₁₁p₂₂) compares commensurate moments.
//! * Simulation is deterministic: trial j draws from a counter-based
//!   stream derived from (seed, j), so results are independent of worker
//!   count and trial-range partitioning.
//!
//! # Modules
//!
//! * [`event`] — detection events, trial schedules, validated records.
//! * [`io`] — the plain-text record file format.
//! * [`kinetics`] — emission-time kinetics of the photon pair.
//! * [`larmor`] — gradient-dephasing coherence model and g₁,₂ prediction.
//! * [`sim`] — Monte Carlo generation of event records.
//! * [`analysis`] — coincidence histograms, R surface, g₁,₂, ridge.
//! * [`csvout`] — CSV serialization of analysis products.

pub mod analysis;
pub mod csvout;
pub mod event;
pub mod io;
pub mod kinetics;
pub mod larmor;
pub mod sim;

pub use analysis::{
    accidental_histogram, auto_histogram, cross_histogram, g12_integrated, ratio_surface,
    ridge_profile, AnalysisError, BinningPair, BinningSpec, CoincidenceHistogram, G12Estimate,
    HistogramKind, Pairing, RatioMax, RatioSurface, RidgePoint,
};
pub use event::{
    Arm, DetectionEvent, DetectorChannel, EventRecord, FieldId, RecordError, TrialSchedule,
    TICK_NS,
};
pub use io::{read_record, read_record_file, write_record, write_record_file, IoError, ReadReport};
pub use kinetics::{KineticsError, PairKinetics, RetrievalKernel};
pub use larmor::{
    fit_decoherence_time, k_from_geometry, pair_density, predict_g12, predict_g12_with_step,
    CoherenceModel, DecayFit, FieldInhomogeneity, ModelError, PairDensity, ZeemanChannel,
    ZeemanScheme, MU_B_OVER_H_HZ_PER_GAUSS, PREDICT_STEP_NS,
};
pub use sim::{
    sample_pair, simulate, simulate_trials, PairEmission, PairSampler, SimConfig, SimError,
    SourceRates,
};
