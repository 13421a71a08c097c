//! Correlation estimators over an event record.
//!
//! All estimators use trial-level "≥ 1 event in bin" indicators, so every
//! probability is a per-trial probability bounded by 1:
//!
//! * `cross_histogram` — p_τ(t1,t2): both fields fire in the same trial;
//!   probability = counts / M.
//! * `accidental_histogram` — q_τ(t1,t2): field 1 from trial j, field 2
//!   from a different trial k; probability = counts / #pairs.
//! * `auto_histogram` — p_τ(t,t): both arms of one field fire in the same
//!   bin; probability = 4 · counts / M (see below).
//! * `ratio_surface` — R_τ = p12² / (p11·p22), the Cauchy-Schwarz ratio;
//!   classical fields obey R ≤ 1.
//! * `g12_integrated` — window-integrated normalized cross-correlation.
//! * `ridge_profile` — collapse of a 2-D histogram onto dt = t2 − t1.
//!
//! Auto-correlation arm factor: with a 50/50 splitter, two same-mode
//! photons land on different arms half the time, so P(both arms) estimates
//! ¼·⟨n(n−1)⟩ for small occupancy (½ from the splitter × ½ from the
//! two-photon permutation). The cross estimator's any-arm coincidence
//! estimates ⟨n₁n₂⟩ with no such factor. For R to compare commensurate
//! second factorial moments — and hence satisfy R ≤ 1 for independent
//! classical fields — the auto probability must be 4 × counts / M.
//! (Sanity anchor: independent Poisson arms with bin mean λ/2 per arm give
//! P(both) ≈ λ²/4, so 4·P(both) ≈ λ² = ⟨n(n−1)⟩ exactly as required;
//! a factor 2 would bias every R to 4.)
//!
//! Axis conventions: field-1 bins start at the trial origin; field-2 bins
//! are labeled on the common axis (stored time + Δt). Bin labels are left
//! edges.

use thiserror::Error;

use crate::event::{Arm, DetectionEvent, EventRecord, FieldId};

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("binning needs finite tau > 0 and t_end > t_start (tau={tau_ns}, [{t_start_ns}, {t_end_ns}))")]
    InvalidBinning { tau_ns: f64, t_start_ns: f64, t_end_ns: f64 },
    #[error("record has {have} trials; estimator needs \u{2265} {need}")]
    InsufficientTrials { have: u64, need: u64 },
    #[error("record contains no field-{field} events (no singles)")]
    NoSingles { field: u8 },
    #[error("histogram inputs have different binning")]
    BinningMismatch,
    #[error("expected a {expected} histogram, got {got}")]
    KindMismatch { expected: &'static str, got: &'static str },
    #[error("ridge profile needs the same bin size on both axes")]
    TauMismatch,
}

/// Uniform binning of one time axis. The range is truncated to a whole
/// number of bins (`truncated` records whether anything was cut).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinningSpec {
    pub tau_ns: f64,
    pub t_start_ns: f64,
    /// Truncated end: t_start_ns + n_bins · tau_ns.
    pub t_end_ns: f64,
    pub n_bins: usize,
    pub truncated: bool,
}

impl BinningSpec {
    pub fn new(tau_ns: f64, t_start_ns: f64, t_end_ns: f64) -> Result<BinningSpec, AnalysisError> {
        let invalid = AnalysisError::InvalidBinning { tau_ns, t_start_ns, t_end_ns };
        if !tau_ns.is_finite()
            || tau_ns <= 0.0
            || !t_start_ns.is_finite()
            || !t_end_ns.is_finite()
            || t_end_ns <= t_start_ns
        {
            return Err(invalid);
        }
        let span = t_end_ns - t_start_ns;
        // Tolerate float droop so span = k·tau lands on exactly k bins.
        let n = ((span / tau_ns) + 1e-9).floor() as usize;
        if n == 0 {
            return Err(invalid);
        }
        let end = t_start_ns + n as f64 * tau_ns;
        let truncated = span - n as f64 * tau_ns > 1e-9 * tau_ns;
        Ok(BinningSpec { tau_ns, t_start_ns, t_end_ns: end, n_bins: n, truncated })
    }

    /// Bin index of a time on this axis, if inside the binned range.
    pub fn index_of(&self, t_ns: f64) -> Option<usize> {
        if !t_ns.is_finite() || t_ns < self.t_start_ns || t_ns >= self.t_end_ns {
            return None;
        }
        let idx = ((t_ns - self.t_start_ns) / self.tau_ns) as usize;
        Some(idx.min(self.n_bins - 1))
    }

    /// Left edge of bin i.
    pub fn label(&self, i: usize) -> f64 {
        self.t_start_ns + i as f64 * self.tau_ns
    }
}

/// Binning for both axes of a coincidence histogram: field 1 from the trial
/// origin, field 2 on the common axis from Δt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinningPair {
    pub field1: BinningSpec,
    pub field2: BinningSpec,
}

impl BinningPair {
    /// Both detection windows of a schedule at bin size τ.
    pub fn for_schedule(
        schedule: &crate::event::TrialSchedule,
        tau_ns: f64,
    ) -> Result<BinningPair, AnalysisError> {
        let field1 = BinningSpec::new(tau_ns, 0.0, schedule.window_ns)?;
        let field2 = BinningSpec::new(
            tau_ns,
            schedule.delta_t_ns,
            schedule.delta_t_ns + schedule.window_ns,
        )?;
        Ok(BinningPair { field1, field2 })
    }

    /// True if either axis had to cut a partial bin.
    pub fn truncated(&self) -> bool {
        self.field1.truncated || self.field2.truncated
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HistogramKind {
    Cross12,
    Accidental12,
    Auto1,
    Auto2,
}

impl HistogramKind {
    pub fn name(self) -> &'static str {
        match self {
            HistogramKind::Cross12 => "Cross12",
            HistogramKind::Accidental12 => "Accidental12",
            HistogramKind::Auto1 => "Auto1",
            HistogramKind::Auto2 => "Auto2",
        }
    }
}

/// How accidental (cross-trial) pairs are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pairing {
    /// Trials (j, j+1): M−1 pairs, O(events). Default.
    Adjacent,
    /// All ordered pairs j ≠ k: M(M−1) pairs. Small M only (validation).
    AllPairs,
}

/// 2-D coincidence counts plus the normalization that turns them into
/// per-trial probabilities. Treat fields as read-only.
#[derive(Debug, Clone, PartialEq)]
pub struct CoincidenceHistogram {
    pub kind: HistogramKind,
    pub binning: [BinningSpec; 2],
    /// Row-major counts, index i·n2 + j.
    pub counts: Vec<u64>,
    /// Trial pairs behind the normalization: M for within-trial kinds,
    /// pair count for Accidental12.
    pub trials_used: u64,
    /// Estimator constant: 1 for cross/accidental, 4 for autos (arm
    /// splitting × photon permutation; see module docs).
    pub factor: f64,
}

impl CoincidenceHistogram {
    pub fn n1(&self) -> usize {
        self.binning[0].n_bins
    }

    pub fn n2(&self) -> usize {
        self.binning[1].n_bins
    }

    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.n2() + j]
    }

    /// Estimated probability for bin (i, j).
    pub fn probability(&self, i: usize, j: usize) -> f64 {
        if self.trials_used == 0 {
            return 0.0;
        }
        self.factor * self.count(i, j) as f64 / self.trials_used as f64
    }

    /// Poisson standard error on `probability(i, j)`.
    pub fn sigma(&self, i: usize, j: usize) -> f64 {
        if self.trials_used == 0 {
            return 0.0;
        }
        self.factor * (self.count(i, j) as f64).sqrt() / self.trials_used as f64
    }

}

/// Occupied bin indices for one field of one trial (deduplicated).
fn occupied_bins(
    events: &[DetectionEvent],
    field: FieldId,
    spec: &BinningSpec,
    offset_ns: f64,
    arm: Option<Arm>,
) -> Vec<u32> {
    let mut bins: Vec<u32> = events
        .iter()
        .filter(|e| e.channel.field == field && arm.is_none_or(|a| e.channel.arm == a))
        .filter_map(|e| spec.index_of(e.time_ns + offset_ns))
        .map(|i| i as u32)
        .collect();
    bins.sort_unstable();
    bins.dedup();
    bins
}

/// p_τ(t1,t2): per-trial probability that field 1 fires in bin b1 and field
/// 2 fires in bin b2 within the same trial. Empty records give all zeros.
pub fn cross_histogram(record: &EventRecord, binning: &BinningPair) -> CoincidenceHistogram {
    let n1 = binning.field1.n_bins;
    let n2 = binning.field2.n_bins;
    let offset2 = record.schedule.field2_offset_ns();
    let mut counts = vec![0u64; n1 * n2];
    for (_, evs) in record.trials() {
        let b1 = occupied_bins(evs, FieldId::Field1, &binning.field1, 0.0, None);
        if b1.is_empty() {
            continue;
        }
        let b2 = occupied_bins(evs, FieldId::Field2, &binning.field2, offset2, None);
        for &i in &b1 {
            for &j in &b2 {
                counts[i as usize * n2 + j as usize] += 1;
            }
        }
    }
    CoincidenceHistogram {
        kind: HistogramKind::Cross12,
        binning: [binning.field1, binning.field2],
        counts,
        trials_used: record.schedule.trial_count,
        factor: 1.0,
    }
}

/// q_τ(t1,t2): same estimator with field 1 and field 2 taken from
/// *different* trials, the accidental-coincidence floor.
pub fn accidental_histogram(
    record: &EventRecord,
    binning: &BinningPair,
    pairing: Pairing,
) -> Result<CoincidenceHistogram, AnalysisError> {
    let m = record.schedule.trial_count;
    if m < 2 {
        return Err(AnalysisError::InsufficientTrials { have: m, need: 2 });
    }
    let n1 = binning.field1.n_bins;
    let n2 = binning.field2.n_bins;
    let offset2 = record.schedule.field2_offset_ns();
    let mut counts = vec![0u64; n1 * n2];

    match pairing {
        Pairing::Adjacent => {
            // Stream trial groups; trials without events are implicit empty
            // sets and contribute nothing.
            let mut prev: Option<(u64, Vec<u32>)> = None;
            for (trial, evs) in record.trials() {
                if let Some((ptrial, pb1)) = &prev {
                    if ptrial + 1 == trial {
                        let b2 = occupied_bins(evs, FieldId::Field2, &binning.field2, offset2, None);
                        for &i in pb1 {
                            for &j in &b2 {
                                counts[i as usize * n2 + j as usize] += 1;
                            }
                        }
                    }
                }
                let b1 = occupied_bins(evs, FieldId::Field1, &binning.field1, 0.0, None);
                prev = Some((trial, b1));
            }
            Ok(CoincidenceHistogram {
                kind: HistogramKind::Accidental12,
                binning: [binning.field1, binning.field2],
                counts,
                trials_used: m - 1,
                factor: 1.0,
            })
        }
        Pairing::AllPairs => {
            // Σ_{j≠k} X_j(b1)·Y_k(b2) = marg1(b1)·marg2(b2) − joint(b1,b2):
            // exact closed form of the ordered-pair sum.
            let mut marg1 = vec![0u64; n1];
            let mut marg2 = vec![0u64; n2];
            let mut joint = vec![0u64; n1 * n2];
            for (_, evs) in record.trials() {
                let b1 = occupied_bins(evs, FieldId::Field1, &binning.field1, 0.0, None);
                let b2 = occupied_bins(evs, FieldId::Field2, &binning.field2, offset2, None);
                for &i in &b1 {
                    marg1[i as usize] += 1;
                }
                for &j in &b2 {
                    marg2[j as usize] += 1;
                }
                for &i in &b1 {
                    for &j in &b2 {
                        joint[i as usize * n2 + j as usize] += 1;
                    }
                }
            }
            for i in 0..n1 {
                for j in 0..n2 {
                    counts[i * n2 + j] = marg1[i] * marg2[j] - joint[i * n2 + j];
                }
            }
            Ok(CoincidenceHistogram {
                kind: HistogramKind::Accidental12,
                binning: [binning.field1, binning.field2],
                counts,
                trials_used: m * (m - 1),
                factor: 1.0,
            })
        }
    }
}

/// p_τ(t,t): diagonal auto-correlation of one field from its two detector
/// arms. Probability = 4 × counts / M (see module docs for the derivation).
pub fn auto_histogram(
    record: &EventRecord,
    spec: &BinningSpec,
    field: FieldId,
) -> CoincidenceHistogram {
    let n = spec.n_bins;
    let offset = match field {
        FieldId::Field1 => 0.0,
        FieldId::Field2 => record.schedule.field2_offset_ns(),
    };
    let mut counts = vec![0u64; n * n];
    for (_, evs) in record.trials() {
        let a = occupied_bins(evs, field, spec, offset, Some(Arm::A));
        if a.is_empty() {
            continue;
        }
        let b = occupied_bins(evs, field, spec, offset, Some(Arm::B));
        // Sorted intersection.
        let (mut ia, mut ib) = (0, 0);
        while ia < a.len() && ib < b.len() {
            match a[ia].cmp(&b[ib]) {
                std::cmp::Ordering::Less => ia += 1,
                std::cmp::Ordering::Greater => ib += 1,
                std::cmp::Ordering::Equal => {
                    let i = a[ia] as usize;
                    counts[i * n + i] += 1;
                    ia += 1;
                    ib += 1;
                }
            }
        }
    }
    CoincidenceHistogram {
        kind: match field {
            FieldId::Field1 => HistogramKind::Auto1,
            FieldId::Field2 => HistogramKind::Auto2,
        },
        binning: [*spec, *spec],
        counts,
        trials_used: record.schedule.trial_count,
        factor: 4.0,
    }
}

/// The Cauchy-Schwarz ratio surface R_τ(t1,t2) = p12² / (p11 · p22) with
/// first-order Poisson errors. Bins where any input count is zero are
/// masked out rather than divided.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioSurface {
    pub binning: [BinningSpec; 2],
    /// Row-major, like CoincidenceHistogram counts.
    pub r: Vec<f64>,
    pub sigma_r: Vec<f64>,
    pub defined: Vec<bool>,
}

/// Location and value of the largest defined R.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioMax {
    pub i: usize,
    pub j: usize,
    pub t1_ns: f64,
    pub t2_ns: f64,
    pub r: f64,
    pub sigma_r: f64,
}

impl RatioSurface {
    pub fn n1(&self) -> usize {
        self.binning[0].n_bins
    }

    pub fn n2(&self) -> usize {
        self.binning[1].n_bins
    }

    /// Largest defined R, if any bin is defined.
    pub fn max(&self) -> Option<RatioMax> {
        let n2 = self.n2();
        let mut best: Option<RatioMax> = None;
        for i in 0..self.n1() {
            for j in 0..n2 {
                let idx = i * n2 + j;
                if !self.defined[idx] {
                    continue;
                }
                if best.is_none_or(|b| self.r[idx] > b.r) {
                    best = Some(RatioMax {
                        i,
                        j,
                        t1_ns: self.binning[0].label(i),
                        t2_ns: self.binning[1].label(j),
                        r: self.r[idx],
                        sigma_r: self.sigma_r[idx],
                    });
                }
            }
        }
        best
    }
}

pub fn ratio_surface(
    cross: &CoincidenceHistogram,
    auto1: &CoincidenceHistogram,
    auto2: &CoincidenceHistogram,
) -> Result<RatioSurface, AnalysisError> {
    if cross.kind != HistogramKind::Cross12 {
        return Err(AnalysisError::KindMismatch { expected: "Cross12", got: cross.kind.name() });
    }
    if auto1.kind != HistogramKind::Auto1 {
        return Err(AnalysisError::KindMismatch { expected: "Auto1", got: auto1.kind.name() });
    }
    if auto2.kind != HistogramKind::Auto2 {
        return Err(AnalysisError::KindMismatch { expected: "Auto2", got: auto2.kind.name() });
    }
    if cross.binning[0] != auto1.binning[0]
        || cross.binning[1] != auto2.binning[0]
        || auto1.binning[0] != auto1.binning[1]
        || auto2.binning[0] != auto2.binning[1]
    {
        return Err(AnalysisError::BinningMismatch);
    }
    let n1 = cross.n1();
    let n2 = cross.n2();
    let mut r = vec![0.0; n1 * n2];
    let mut sigma_r = vec![0.0; n1 * n2];
    let mut defined = vec![false; n1 * n2];
    for i in 0..n1 {
        let n11 = auto1.count(i, i);
        for j in 0..n2 {
            let idx = i * n2 + j;
            let n12 = cross.count(i, j);
            let n22 = auto2.count(j, j);
            if n12 == 0 || n11 == 0 || n22 == 0 {
                continue;
            }
            let p12 = cross.probability(i, j);
            let p11 = auto1.probability(i, i);
            let p22 = auto2.probability(j, j);
            let value = p12 * p12 / (p11 * p22);
            r[idx] = value;
            sigma_r[idx] = value
                * (4.0 / n12 as f64 + 1.0 / n11 as f64 + 1.0 / n22 as f64).sqrt();
            defined[idx] = true;
        }
    }
    Ok(RatioSurface { binning: cross.binning, r, sigma_r, defined })
}

/// Window-integrated normalized cross-correlation g₁,₂ and its Poisson
/// error, plus the raw counts it was built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct G12Estimate {
    pub g12: f64,
    pub sigma: f64,
    /// Trials with a coincidence (≥1 event in each field).
    pub coincidences: u64,
    /// Trials with ≥1 field-1 event.
    pub singles1: u64,
    /// Trials with ≥1 field-2 event.
    pub singles2: u64,
}

/// g₁,₂ = (C12/M) / [(S1/M)(S2/M)] over the full detection windows.
pub fn g12_integrated(record: &EventRecord) -> Result<G12Estimate, AnalysisError> {
    let m = record.schedule.trial_count;
    if m < 2 {
        return Err(AnalysisError::InsufficientTrials { have: m, need: 2 });
    }
    let mut s1 = 0u64;
    let mut s2 = 0u64;
    let mut c12 = 0u64;
    for (_, evs) in record.trials() {
        let has1 = evs.iter().any(|e| e.channel.field == FieldId::Field1);
        let has2 = evs.iter().any(|e| e.channel.field == FieldId::Field2);
        s1 += has1 as u64;
        s2 += has2 as u64;
        c12 += (has1 && has2) as u64;
    }
    if s1 == 0 {
        return Err(AnalysisError::NoSingles { field: 1 });
    }
    if s2 == 0 {
        return Err(AnalysisError::NoSingles { field: 2 });
    }
    let g12 = (c12 as f64 * m as f64) / (s1 as f64 * s2 as f64);
    // Relative Poisson errors of the three counts; zero coincidences give a
    // zero estimate with no meaningful error bar.
    let sigma = if c12 > 0 {
        g12 * (1.0 / c12 as f64 + 1.0 / s1 as f64 + 1.0 / s2 as f64).sqrt()
    } else {
        0.0
    };
    Ok(G12Estimate { g12, sigma, coincidences: c12, singles1: s1, singles2: s2 })
}

/// One point of a ridge profile: summed probability at fixed dt = t2 − t1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RidgePoint {
    pub dt_ns: f64,
    pub probability: f64,
    pub sigma: f64,
}

/// Collapse a cross or accidental histogram onto the photon time difference
/// dt = t2 − t1 (common axis), summing probability along each diagonal.
pub fn ridge_profile(hist: &CoincidenceHistogram) -> Result<Vec<RidgePoint>, AnalysisError> {
    match hist.kind {
        HistogramKind::Cross12 | HistogramKind::Accidental12 => {}
        other => {
            return Err(AnalysisError::KindMismatch {
                expected: "Cross12 or Accidental12",
                got: other.name(),
            })
        }
    }
    let [b1, b2] = hist.binning;
    if (b1.tau_ns - b2.tau_ns).abs() > 1e-12 * b1.tau_ns {
        return Err(AnalysisError::TauMismatch);
    }
    let n1 = hist.n1();
    let n2 = hist.n2();
    let base = b2.t_start_ns - b1.t_start_ns;
    let norm = hist.trials_used as f64;
    let mut out = Vec::with_capacity(n1 + n2 - 1);
    for d in -(n1 as i64 - 1)..=(n2 as i64 - 1) {
        let mut total = 0u64;
        for i in 0..n1 {
            let j = i as i64 + d;
            if j < 0 || j >= n2 as i64 {
                continue;
            }
            total += hist.count(i, j as usize);
        }
        let (probability, sigma) = if norm > 0.0 {
            (
                hist.factor * total as f64 / norm,
                hist.factor * (total as f64).sqrt() / norm,
            )
        } else {
            (0.0, 0.0)
        };
        out.push(RidgePoint { dt_ns: base + d as f64 * b1.tau_ns, probability, sigma });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::{DetectionEvent as Ev, DetectorChannel as Ch, EventRecord, TrialSchedule};

    fn schedule(trials: u64, delta_t: f64) -> TrialSchedule {
        TrialSchedule {
            trial_count: trials,
            delta_t_ns: delta_t,
            write_duration_ns: 150.0,
            read_duration_ns: 120.0,
            window_ns: 200.0,
        }
    }

    fn record(trials: u64, delta_t: f64, events: Vec<Ev>) -> EventRecord {
        EventRecord::new(schedule(trials, delta_t), vec![], events).unwrap()
    }

    #[test]
    fn binning_truncates_partial_bins() {
        let spec = BinningSpec::new(30.0, 0.0, 200.0).unwrap();
        assert_eq!(spec.n_bins, 6);
        assert_eq!(spec.t_end_ns, 180.0);
        assert!(spec.truncated);
        let exact = BinningSpec::new(4.0, 0.0, 200.0).unwrap();
        assert_eq!(exact.n_bins, 50);
        assert!(!exact.truncated);
    }

    #[test]
    fn binning_indexes_edges_correctly() {
        let spec = BinningSpec::new(4.0, 50.0, 250.0).unwrap();
        assert_eq!(spec.index_of(50.0), Some(0));
        assert_eq!(spec.index_of(53.999), Some(0));
        assert_eq!(spec.index_of(54.0), Some(1));
        assert_eq!(spec.index_of(249.999), Some(49));
        assert_eq!(spec.index_of(250.0), None);
        assert_eq!(spec.index_of(49.999), None);
    }

    #[test]
    fn cross_single_trial_example() {
        // One trial: (1A, 10 ns) and (2B, 60 ns stored), τ=4, Δt=0.
        let rec = record(
            1,
            0.0,
            vec![Ev::new(0, Ch::F1A, 10.0), Ev::new(0, Ch::F2B, 60.0)],
        );
        let binning = BinningPair::for_schedule(&rec.schedule, 4.0).unwrap();
        let hist = cross_histogram(&rec, &binning);
        let nonzero: Vec<(usize, usize, u64)> = (0..hist.n1())
            .flat_map(|i| (0..hist.n2()).map(move |j| (i, j)))
            .filter(|&(i, j)| hist.count(i, j) > 0)
            .map(|(i, j)| (i, j, hist.count(i, j)))
            .collect();
        assert_eq!(nonzero, vec![(2, 15, 1)]);
        assert_eq!(hist.probability(2, 15), 1.0); // counts/M with M=1
    }

    #[test]
    fn auto_needs_both_arms() {
        let rec = record(2, 0.0, vec![Ev::new(0, Ch::F1A, 10.0)]);
        let spec = BinningSpec::new(4.0, 0.0, 200.0).unwrap();
        let hist = auto_histogram(&rec, &spec, FieldId::Field1);
        assert!(hist.counts.iter().all(|&c| c == 0));
    }

    #[test]
    fn auto_counts_aligned_arm_pair() {
        let rec = record(
            2,
            0.0,
            vec![Ev::new(0, Ch::F1A, 10.0), Ev::new(0, Ch::F1B, 11.0)],
        );
        let spec = BinningSpec::new(4.0, 0.0, 200.0).unwrap();
        let hist = auto_histogram(&rec, &spec, FieldId::Field1);
        assert_eq!(hist.count(2, 2), 1);
        assert_eq!(hist.counts.iter().sum::<u64>(), 1);
        // probability = factor·counts/M = 4·1/2.
        assert_eq!(hist.probability(2, 2), 2.0);
    }

    #[test]
    fn accidental_uses_neighbor_trials() {
        // Trial 0 has field 1 at 10 ns; trial 1 has field 2 at 60 ns.
        // Cross sees nothing; Adjacent accidental sees one pair.
        let rec = record(
            2,
            0.0,
            vec![Ev::new(0, Ch::F1A, 10.0), Ev::new(1, Ch::F2A, 60.0)],
        );
        let binning = BinningPair::for_schedule(&rec.schedule, 4.0).unwrap();
        let cross = cross_histogram(&rec, &binning);
        assert!(cross.counts.iter().all(|&c| c == 0));
        let acc = accidental_histogram(&rec, &binning, Pairing::Adjacent).unwrap();
        assert_eq!(acc.count(2, 15), 1);
        assert_eq!(acc.trials_used, 1);
    }

    #[test]
    fn accidental_requires_two_trials() {
        let rec = record(1, 0.0, vec![]);
        let binning = BinningPair::for_schedule(&rec.schedule, 4.0).unwrap();
        let err = accidental_histogram(&rec, &binning, Pairing::Adjacent).unwrap_err();
        assert!(matches!(err, AnalysisError::InsufficientTrials { have: 1, need: 2 }));
    }

    #[test]
    fn ratio_sigma_matches_algebra() {
        // Hand-built histograms with N12 = N11 = N22 = N: sigma_R must be
        // R·sqrt(6/N) independent of estimator constants.
        let spec = BinningSpec::new(4.0, 0.0, 4.0).unwrap();
        let binning = [spec, spec];
        let n = 25u64;
        let cross = CoincidenceHistogram {
            kind: HistogramKind::Cross12,
            binning,
            counts: vec![n],
            trials_used: 100,
            factor: 1.0,
        };
        let auto = |kind| CoincidenceHistogram {
            kind,
            binning,
            counts: vec![n],
            trials_used: 100,
            factor: 4.0,
        };
        let surface =
            ratio_surface(&cross, &auto(HistogramKind::Auto1), &auto(HistogramKind::Auto2))
                .unwrap();
        let r = surface.r[0];
        let expected = cross.probability(0, 0).powi(2)
            / (auto(HistogramKind::Auto1).probability(0, 0).powi(2));
        assert!((r - expected).abs() < 1e-12);
        assert!((surface.sigma_r[0] - r * (6.0 / n as f64).sqrt()).abs() < 1e-12);
        assert!(surface.defined[0]);
    }

    #[test]
    fn ratio_masks_zero_counts() {
        let spec = BinningSpec::new(4.0, 0.0, 4.0).unwrap();
        let binning = [spec, spec];
        let hist = |kind, n: u64, factor: f64| CoincidenceHistogram {
            kind,
            binning,
            counts: vec![n],
            trials_used: 100,
            factor,
        };
        let surface = ratio_surface(
            &hist(HistogramKind::Cross12, 5, 1.0),
            &hist(HistogramKind::Auto1, 0, 4.0),
            &hist(HistogramKind::Auto2, 3, 4.0),
        )
        .unwrap();
        assert!(!surface.defined[0]);
        assert_eq!(surface.r[0], 0.0);
        assert!(surface.max().is_none());
    }

    #[test]
    fn g12_saturated_trials_give_unity() {
        let mut events = Vec::new();
        for j in 0..10 {
            events.push(Ev::new(j, Ch::F1A, 10.0));
            events.push(Ev::new(j, Ch::F2A, 60.0));
        }
        let rec = record(10, 0.0, events);
        let est = g12_integrated(&rec).unwrap();
        assert_eq!(est.g12, 1.0);
        assert_eq!(est.coincidences, 10);
    }

    #[test]
    fn g12_errors_without_singles() {
        let rec = record(5, 0.0, vec![Ev::new(0, Ch::F1A, 1.0)]);
        assert!(matches!(
            g12_integrated(&rec),
            Err(AnalysisError::NoSingles { field: 2 })
        ));
    }

    #[test]
    fn ridge_single_bin_lands_at_label_difference() {
        let rec = record(
            1,
            50.0,
            vec![Ev::new(0, Ch::F1A, 10.0), Ev::new(0, Ch::F2B, 60.0)],
        );
        let binning = BinningPair::for_schedule(&rec.schedule, 4.0).unwrap();
        let hist = cross_histogram(&rec, &binning);
        let ridge = ridge_profile(&hist).unwrap();
        let nonzero: Vec<&RidgePoint> =
            ridge.iter().filter(|p| p.probability > 0.0).collect();
        assert_eq!(nonzero.len(), 1);
        // Field-1 at 10 → bin label 8; field-2 stored 60 → common 110 →
        // bin label 110. Grid dt = label difference = 102.
        assert_eq!(nonzero[0].dt_ns, 102.0);
        assert_eq!(nonzero[0].probability, 1.0);
    }

    #[test]
    fn ridge_rejects_auto_histograms() {
        let rec = record(2, 0.0, vec![]);
        let spec = BinningSpec::new(4.0, 0.0, 200.0).unwrap();
        let hist = auto_histogram(&rec, &spec, FieldId::Field1);
        assert!(matches!(
            ridge_profile(&hist),
            Err(AnalysisError::KindMismatch { .. })
        ));
    }
}
