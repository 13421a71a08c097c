//! Larmor-dephasing coherence model and the two-photon density built on it.
//!
//! Physical picture: the write pulse stores a collective spin excitation as
//! a coherence between ground hyperfine sublevels |F_a, m_a⟩ and |F_b, m_b⟩.
//! In the trap's quadrupole field the Zeeman splitting varies linearly
//! across the sample, so each (m_a, m_b) channel accumulates a
//! position-dependent phase at rate μ·K·(z/L). Averaging the retrieval
//! amplitude over a linear field profile gives sinc(π μ K T) per channel;
//! distinguishable final states add incoherently:
//!
//! ```text
//! C(T) = Σ w(m_a,m_b) · sinc²(π · μ(m_a,m_b) · K · T) · E_res(T)
//! μ(m_a,m_b) = (g_a·m_a − g_b·m_b) / g_ref
//! ```
//!
//! with `K` in Hz, `T` in ns, and an optional Gaussian residual envelope
//! `E_res(T) = exp(−(T/τ_res)²)`. The m_F=0 ↔ m_F=0 clock channel has μ=0
//! and is immune to the gradient.

use thiserror::Error;

use crate::event::TrialSchedule;
use crate::kinetics::{KineticsError, PairKinetics, RetrievalKernel};

/// Bohr magneton over Planck constant, Hz per gauss (CODATA:
/// μ_B/h = 1.399624604 MHz/G).
pub const MU_B_OVER_H_HZ_PER_GAUSS: f64 = 1.399_624_604e6;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("Zeeman scheme invalid: {0}")]
    InvalidScheme(String),
    #[error("field gradient parameter k_hz must be finite and \u{2265} 0, got {0}")]
    InvalidFieldParameter(f64),
    #[error("residual decay time must be finite and > 0, got {0}")]
    InvalidResidualDecay(f64),
    #[error("coherence time argument must be \u{2265} 0, got {0}")]
    NegativeTime(f64),
    #[error("prediction scale must be finite and \u{2265} 0, got {0}")]
    InvalidScale(f64),
    #[error("delta_t list must be non-empty with finite entries \u{2265} 0")]
    InvalidDeltaTList,
    #[error("decay fit needs \u{2265} 2 finite points, got {0}")]
    InvalidCurve(usize),
    #[error(transparent)]
    Kinetics(#[from] KineticsError),
    #[error(transparent)]
    Schedule(#[from] crate::event::RecordError),
}

/// One storage channel: initial sublevel m_a, final sublevel m_b, weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeemanChannel {
    pub m_a: i32,
    pub m_b: i32,
    pub weight: f64,
}

/// Hyperfine levels, Landé factors, and the populated (m_a, m_b) channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeemanScheme {
    pub f_a: u32,
    pub f_b: u32,
    /// Landé factor of the initial level F_a.
    pub g_a: f64,
    /// Landé factor of the storage level F_b.
    pub g_b: f64,
    /// Reference Landé factor: the g used when quoting K, so that
    /// μ = (g_a·m_a − g_b·m_b)/g_ref is the channel's precession rate in
    /// units of K.
    pub g_ref: f64,
    pub channels: Vec<ZeemanChannel>,
}

impl ZeemanScheme {
    /// Unpolarized cesium-like default: F_a=4 (g=+1/4), F_b=3 (g=−1/4),
    /// uniform weight on every channel with |m_a − m_b| ≤ 2 (33 channels).
    /// The Landé values are the standard 6S₁/₂ ground-state factors
    /// g_F ≈ ±1/4 (Steck, "Cesium D Line Data", rev. 2.1.4, Table 4).
    pub fn unpolarized() -> ZeemanScheme {
        let mut channels = Vec::new();
        for m_a in -4i32..=4 {
            for m_b in -3i32..=3 {
                if (m_a - m_b).abs() <= 2 {
                    channels.push(ZeemanChannel { m_a, m_b, weight: 1.0 });
                }
            }
        }
        ZeemanScheme { f_a: 4, f_b: 3, g_a: 0.25, g_b: -0.25, g_ref: 0.25, channels }
    }

    /// Spin-polarized clock scheme: all population in m_a = m_b = 0, the
    /// magnetic-field-insensitive channel.
    pub fn clock_polarized() -> ZeemanScheme {
        ZeemanScheme {
            f_a: 4,
            f_b: 3,
            g_a: 0.25,
            g_b: -0.25,
            g_ref: 0.25,
            channels: vec![ZeemanChannel { m_a: 0, m_b: 0, weight: 1.0 }],
        }
    }

    /// Precession rate of a channel in units of K.
    pub fn mu(&self, ch: &ZeemanChannel) -> f64 {
        (self.g_a * ch.m_a as f64 - self.g_b * ch.m_b as f64) / self.g_ref
    }

    /// Short tag for manifests and record metadata.
    pub fn describe(&self) -> String {
        if *self == ZeemanScheme::unpolarized() {
            "unpolarized".into()
        } else if *self == ZeemanScheme::clock_polarized() {
            "clock".into()
        } else {
            format!("custom({} channels)", self.channels.len())
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.channels.is_empty() {
            return Err(ModelError::InvalidScheme("no channels".into()));
        }
        if !self.g_ref.is_finite() || self.g_ref == 0.0 {
            return Err(ModelError::InvalidScheme(format!("g_ref must be nonzero, got {}", self.g_ref)));
        }
        if !self.g_a.is_finite() || !self.g_b.is_finite() {
            return Err(ModelError::InvalidScheme("non-finite Landé factor".into()));
        }
        let mut total = 0.0;
        for ch in &self.channels {
            if ch.m_a.unsigned_abs() > self.f_a || ch.m_b.unsigned_abs() > self.f_b {
                return Err(ModelError::InvalidScheme(format!(
                    "channel ({}, {}) outside F_a={}, F_b={}",
                    ch.m_a, ch.m_b, self.f_a, self.f_b
                )));
            }
            if !ch.weight.is_finite() || ch.weight < 0.0 {
                return Err(ModelError::InvalidScheme(format!(
                    "channel ({}, {}) has invalid weight {}",
                    ch.m_a, ch.m_b, ch.weight
                )));
            }
            total += ch.weight;
        }
        if total <= 0.0 {
            return Err(ModelError::InvalidScheme("total channel weight is zero".into()));
        }
        Ok(())
    }
}

/// Magnetic-field inhomogeneity across the sample, reduced to the single
/// frequency-spread parameter K = μ_B·g_ref·L·b/h.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldInhomogeneity {
    /// Precession-frequency spread for a μ=1 channel, Hz.
    pub k_hz: f64,
}

impl FieldInhomogeneity {
    pub fn new(k_hz: f64) -> Result<FieldInhomogeneity, ModelError> {
        if !k_hz.is_finite() || k_hz < 0.0 {
            return Err(ModelError::InvalidFieldParameter(k_hz));
        }
        Ok(FieldInhomogeneity { k_hz })
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        Self::new(self.k_hz).map(|_| ())
    }
}

/// K from trap geometry: sample length L (mm), field gradient b (G/cm), and
/// Landé factor g. Returns |μ_B·g·L·b/h| in Hz; sign conventions of g and b
/// do not matter for dephasing (sinc² is even).
pub fn k_from_geometry(length_mm: f64, gradient_gauss_per_cm: f64, lande_g: f64) -> f64 {
    MU_B_OVER_H_HZ_PER_GAUSS * lande_g.abs() * gradient_gauss_per_cm.abs() * (length_mm * 0.1)
}

/// Full coherence model: level scheme + field inhomogeneity + optional
/// residual decay.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceModel {
    pub scheme: ZeemanScheme,
    pub field: FieldInhomogeneity,
    /// Gaussian residual envelope time constant, ns; `None` disables it.
    pub residual_decay_time_ns: Option<f64>,
}

impl CoherenceModel {
    pub fn new(
        scheme: ZeemanScheme,
        field: FieldInhomogeneity,
        residual_decay_time_ns: Option<f64>,
    ) -> Result<CoherenceModel, ModelError> {
        let model = CoherenceModel { scheme, field, residual_decay_time_ns };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        self.scheme.validate()?;
        self.field.validate()?;
        if let Some(tau) = self.residual_decay_time_ns {
            if !tau.is_finite() || tau <= 0.0 {
                return Err(ModelError::InvalidResidualDecay(tau));
            }
        }
        Ok(())
    }

    /// Storage coherence C(T) for storage time T in ns. C(0) = 1 exactly.
    pub fn coherence(&self, t_ns: f64) -> Result<f64, ModelError> {
        if !t_ns.is_finite() || t_ns < 0.0 {
            return Err(ModelError::NegativeTime(t_ns));
        }
        self.validate()?;
        Ok(CoherenceEval::new(self).eval(t_ns))
    }
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.sin() / x
    }
}

/// Precomputed per-channel phase rates for hot loops. Evaluation divides by
/// the total weight accumulated in the same channel order, so C(0) (and the
/// clock scheme at every T) is exactly 1.0.
#[derive(Debug, Clone)]
pub(crate) struct CoherenceEval {
    /// (π·μ·K in rad/ns, weight) per channel.
    terms: Vec<(f64, f64)>,
    total_weight: f64,
    inv_tau_res: Option<f64>,
}

impl CoherenceEval {
    pub(crate) fn new(model: &CoherenceModel) -> CoherenceEval {
        let k = model.field.k_hz;
        let terms: Vec<(f64, f64)> = model
            .scheme
            .channels
            .iter()
            .map(|ch| {
                let mu = model.scheme.mu(ch);
                (std::f64::consts::PI * mu * k * 1e-9, ch.weight)
            })
            .collect();
        let total_weight = terms.iter().map(|(_, w)| w).sum();
        CoherenceEval {
            terms,
            total_weight,
            inv_tau_res: model.residual_decay_time_ns.map(|tau| 1.0 / tau),
        }
    }

    pub(crate) fn eval(&self, t_ns: f64) -> f64 {
        let mut acc = 0.0;
        for &(rate, w) in &self.terms {
            let s = sinc(rate * t_ns);
            acc += w * s * s;
        }
        let mut c = acc / self.total_weight;
        if let Some(inv_tau) = self.inv_tau_res {
            let u = t_ns * inv_tau;
            c *= (-u * u).exp();
        }
        c
    }
}

/// Precomputed joint density evaluator for one (model, kinetics, schedule)
/// triple. Use this for grids and sampling; `pair_density` re-derives it on
/// every call.
#[derive(Debug, Clone)]
pub struct PairDensity {
    kernel: RetrievalKernel,
    coh: CoherenceEval,
    delta0_ns: f64,
    delta_t_ns: f64,
    write_ns: f64,
    window_ns: f64,
}

impl PairDensity {
    pub fn new(
        model: &CoherenceModel,
        kinetics: &PairKinetics,
        schedule: &TrialSchedule,
    ) -> Result<PairDensity, ModelError> {
        model.validate()?;
        schedule.validate()?;
        let kernel = kinetics.kernel()?;
        Ok(PairDensity {
            kernel,
            coh: CoherenceEval::new(model),
            delta0_ns: kinetics.delta0_ns,
            delta_t_ns: schedule.delta_t_ns,
            write_ns: schedule.write_duration_ns,
            window_ns: schedule.window_ns,
        })
    }

    pub fn kernel(&self) -> &RetrievalKernel {
        &self.kernel
    }

    /// Earliest possible photon-2 time for an excitation written at t1:
    /// read-out cannot precede the read pulse or the excitation itself.
    pub fn t_start(&self, t1_ns: f64) -> f64 {
        (t1_ns + self.delta0_ns).max(self.delta_t_ns)
    }

    /// Joint density f(t1, t2) on the common time axis:
    /// write envelope × retrieval kernel × storage coherence.
    /// Zero outside the write pulse / field-2 window.
    pub fn eval(&self, t1_ns: f64, t2_ns: f64) -> f64 {
        if t1_ns < 0.0 || t1_ns >= self.write_ns {
            return 0.0;
        }
        if t2_ns < self.delta_t_ns || t2_ns >= self.delta_t_ns + self.window_ns {
            return 0.0;
        }
        let g = self.kernel.pdf(t2_ns - self.t_start(t1_ns));
        if g == 0.0 {
            return 0.0;
        }
        g * self.coh.eval(t2_ns - t1_ns)
    }

    /// Storage coherence at separation T (exposed for samplers).
    pub fn coherence_at(&self, t_ns: f64) -> f64 {
        self.coh.eval(t_ns)
    }

    /// ∬ f dt1 dt2 over the write pulse × field-2 window by midpoint rule
    /// with the given step (ns).
    pub fn integrate(&self, step_ns: f64) -> f64 {
        let (n1, h1) = cells(self.write_ns, step_ns);
        let (n2, h2) = cells(self.window_ns, step_ns);
        let mut total = 0.0;
        for i in 0..n1 {
            let t1 = (i as f64 + 0.5) * h1;
            let mut row = 0.0;
            for j in 0..n2 {
                let t2 = self.delta_t_ns + (j as f64 + 0.5) * h2;
                row += self.eval(t1, t2);
            }
            total += row * h2;
        }
        total * h1
    }
}

/// Split a length into equal cells no wider than `step`.
fn cells(length: f64, step: f64) -> (usize, f64) {
    let n = (length / step).ceil().max(1.0) as usize;
    (n, length / n as f64)
}

/// Joint two-photon density f(t1, t2) for one point. Convenience wrapper:
/// re-solves the retrieval kernel per call, so use [`PairDensity`] for grids.
pub fn pair_density(
    model: &CoherenceModel,
    kinetics: &PairKinetics,
    schedule: &TrialSchedule,
    t1_ns: f64,
    t2_ns: f64,
) -> Result<f64, ModelError> {
    Ok(PairDensity::new(model, kinetics, schedule)?.eval(t1_ns, t2_ns))
}

/// Quadrature step (ns) used by `predict_g12`.
pub const PREDICT_STEP_NS: f64 = 1.0;

/// Model prediction for the normalized intensity cross-correlation versus
/// storage time: g12_pred(Δt) = 1 + scale · ∬ f(t1,t2; Δt) dt1 dt2 with a
/// fixed 1-ns midpoint grid. The additive 1 is the accidental floor.
pub fn predict_g12(
    model: &CoherenceModel,
    kinetics: &PairKinetics,
    schedule: &TrialSchedule,
    delta_t_list: &[f64],
    scale: f64,
) -> Result<Vec<(f64, f64)>, ModelError> {
    predict_g12_with_step(model, kinetics, schedule, delta_t_list, scale, PREDICT_STEP_NS)
}

/// `predict_g12` with an explicit quadrature step (used by convergence
/// tests; halving the step must not move any value by more than 0.5%).
pub fn predict_g12_with_step(
    model: &CoherenceModel,
    kinetics: &PairKinetics,
    schedule: &TrialSchedule,
    delta_t_list: &[f64],
    scale: f64,
    step_ns: f64,
) -> Result<Vec<(f64, f64)>, ModelError> {
    if !scale.is_finite() || scale < 0.0 {
        return Err(ModelError::InvalidScale(scale));
    }
    if delta_t_list.is_empty() || delta_t_list.iter().any(|d| !d.is_finite() || *d < 0.0) {
        return Err(ModelError::InvalidDeltaTList);
    }
    let mut out = Vec::with_capacity(delta_t_list.len());
    for &dt in delta_t_list {
        let sched = TrialSchedule { delta_t_ns: dt, ..*schedule };
        let density = PairDensity::new(model, kinetics, &sched)?;
        out.push((dt, 1.0 + scale * density.integrate(step_ns)));
    }
    Ok(out)
}

/// Result of a half-max decay fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayFit {
    /// Storage time at which the background-subtracted curve first falls to
    /// half of its maximum (linear interpolation between samples).
    Determined { tau_d_ns: f64 },
    /// Curve never fell below half-max within the sampled range.
    NotDetermined { searched_to_ns: f64 },
}

impl DecayFit {
    pub fn determined(self) -> Option<f64> {
        match self {
            DecayFit::Determined { tau_d_ns } => Some(tau_d_ns),
            DecayFit::NotDetermined { .. } => None,
        }
    }
}

/// Half-life-style decoherence time of a sampled curve.
///
/// `baseline` is subtracted before the half-max search: use 1.0 for
/// normalized correlation curves (their accidental floor) and 0.0 for
/// coherence curves C(T). Points are sorted by abscissa internally; the
/// returned time is the absolute storage time of the half-max crossing, not
/// the distance from the peak. For a meaningful fit supply several points
/// past the maximum.
pub fn fit_decoherence_time(
    curve: &[(f64, f64)],
    baseline: f64,
) -> Result<DecayFit, ModelError> {
    let mut pts: Vec<(f64, f64)> = curve
        .iter()
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .map(|&(x, y)| (x, y - baseline))
        .collect();
    if pts.len() < 2 {
        return Err(ModelError::InvalidCurve(pts.len()));
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));

    let (imax, &(_, ymax)) = pts
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .expect("non-empty");
    let last_x = pts.last().expect("non-empty").0;
    if ymax <= 0.0 {
        // Nothing above baseline: no decay scale to measure.
        return Ok(DecayFit::NotDetermined { searched_to_ns: last_x });
    }
    let half = 0.5 * ymax;
    for i in (imax + 1)..pts.len() {
        let (x1, y1) = pts[i];
        if y1 < half {
            let (x0, y0) = pts[i - 1];
            let frac = (y0 - half) / (y0 - y1); // y0 ≥ half > y1
            return Ok(DecayFit::Determined { tau_d_ns: x0 + frac * (x1 - x0) });
        }
    }
    Ok(DecayFit::NotDetermined { searched_to_ns: last_x })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unpolarized_has_33_channels_3_insensitive() {
        let s = ZeemanScheme::unpolarized();
        assert_eq!(s.channels.len(), 33);
        let insensitive =
            s.channels.iter().filter(|ch| s.mu(ch) == 0.0).count();
        assert_eq!(insensitive, 3); // (−1,1), (0,0), (1,−1)
    }

    #[test]
    fn mu_reduces_to_m_sum_for_default_factors() {
        let s = ZeemanScheme::unpolarized();
        for ch in &s.channels {
            assert!((s.mu(ch) - (ch.m_a + ch.m_b) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn coherence_is_one_at_zero_exactly() {
        let model = CoherenceModel::new(
            ZeemanScheme::unpolarized(),
            FieldInhomogeneity::new(1.1e6).unwrap(),
            None,
        )
        .unwrap();
        assert_eq!(model.coherence(0.0).unwrap(), 1.0);
    }

    #[test]
    fn clock_channel_is_immune() {
        let model = CoherenceModel::new(
            ZeemanScheme::clock_polarized(),
            FieldInhomogeneity::new(1.1e6).unwrap(),
            None,
        )
        .unwrap();
        assert_eq!(model.coherence(10_000.0).unwrap(), 1.0);
        assert_eq!(model.coherence(123_456.0).unwrap(), 1.0);
    }

    #[test]
    fn zero_gradient_means_no_dephasing() {
        let model = CoherenceModel::new(
            ZeemanScheme::unpolarized(),
            FieldInhomogeneity::new(0.0).unwrap(),
            None,
        )
        .unwrap();
        assert_eq!(model.coherence(5_000.0).unwrap(), 1.0);
    }

    #[test]
    fn negative_time_is_domain_error() {
        let model = CoherenceModel::new(
            ZeemanScheme::unpolarized(),
            FieldInhomogeneity::new(1.1e6).unwrap(),
            None,
        )
        .unwrap();
        assert!(matches!(model.coherence(-1.0), Err(ModelError::NegativeTime(_))));
    }

    #[test]
    fn k_from_geometry_matches_paper_scale() {
        // L ≈ 3.6 mm, b ≈ 8.4 G/cm, g = 1/4 → K ≈ 1.06 MHz ~ "1.1 MHz".
        let k = k_from_geometry(3.6, 8.4, 0.25);
        assert!((k - 1.0581162e6).abs() < 1.0, "k = {k}");
        assert_eq!(k_from_geometry(3.6, 0.0, 0.25), 0.0);
        // Sign-insensitive.
        assert_eq!(k_from_geometry(3.6, -8.4, -0.25), k);
    }

    #[test]
    fn residual_envelope_applies() {
        let model = CoherenceModel::new(
            ZeemanScheme::clock_polarized(),
            FieldInhomogeneity::new(0.0).unwrap(),
            Some(100.0),
        )
        .unwrap();
        let c = model.coherence(100.0).unwrap();
        assert!((c - (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn fit_recovers_exponential_half_life() {
        let tau = 120.0;
        let curve: Vec<(f64, f64)> =
            (0..400).map(|i| (i as f64, 5.0 * (-(i as f64) / tau).exp())).collect();
        let fit = fit_decoherence_time(&curve, 0.0).unwrap().determined().unwrap();
        assert!((fit - tau * std::f64::consts::LN_2).abs() / (tau * std::f64::consts::LN_2) < 0.01);
    }

    #[test]
    fn fit_reports_not_determined_for_rising_curve() {
        let curve: Vec<(f64, f64)> = (0..50).map(|i| (i as f64, i as f64)).collect();
        match fit_decoherence_time(&curve, 0.0).unwrap() {
            DecayFit::NotDetermined { searched_to_ns } => assert_eq!(searched_to_ns, 49.0),
            other => panic!("expected NotDetermined, got {other:?}"),
        }
    }
}
