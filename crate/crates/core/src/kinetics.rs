//! Pair-emission kinetics: the intrinsic Raman delay and the gamma-shaped
//! retrieval kernel that sets where the field-2 photon lands in time.
//!
//! The kernel is parameterized by its *peak* (the delay at which retrieval
//! probability is maximal, `retrieval_delay_ns`) and its FWHM
//! (`retrieval_fwhm_ns`). A gamma density with shape `k` and scale `θ` has
//! its mode at `(k−1)·θ`, so `k` is solved numerically from the
//! width-to-peak ratio and `θ` follows. Parameterizing by the peak rather
//! than the mean keeps the observable ridge maximum of the two-photon
//! density at the configured delay; a gamma is right-skewed, so its mean
//! sits noticeably later than its peak (`mean_delay_ns` reports it).

use rand::Rng;
use rand_distr::Distribution;
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum KineticsError {
    #[error("kinetics field {name} must be finite and {constraint}, got {value}")]
    InvalidField { name: &'static str, constraint: &'static str, value: f64 },
    #[error("no gamma kernel has peak {peak_ns} ns and FWHM {fwhm_ns} ns (width/peak ratio out of range)")]
    WidthUnresolvable { peak_ns: f64, fwhm_ns: f64 },
}

/// Timing parameters of correlated pair emission.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairKinetics {
    /// Intrinsic delay before read-out can begin, ns (added to t1).
    pub delta0_ns: f64,
    /// Peak of the retrieval kernel: the most likely photon-2 delay, ns.
    pub retrieval_delay_ns: f64,
    /// Full width at half maximum of the retrieval kernel, ns.
    pub retrieval_fwhm_ns: f64,
}

impl Default for PairKinetics {
    fn default() -> Self {
        PairKinetics { delta0_ns: 0.0, retrieval_delay_ns: 50.0, retrieval_fwhm_ns: 60.0 }
    }
}

impl PairKinetics {
    pub fn validate(&self) -> Result<(), KineticsError> {
        if !self.delta0_ns.is_finite() || self.delta0_ns < 0.0 {
            return Err(KineticsError::InvalidField {
                name: "delta0_ns",
                constraint: "\u{2265} 0",
                value: self.delta0_ns,
            });
        }
        for (name, v) in [
            ("retrieval_delay_ns", self.retrieval_delay_ns),
            ("retrieval_fwhm_ns", self.retrieval_fwhm_ns),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(KineticsError::InvalidField {
                    name,
                    constraint: "> 0",
                    value: v,
                });
            }
        }
        Ok(())
    }

    /// Solve the gamma kernel matching this peak/FWHM pair.
    pub fn kernel(&self) -> Result<RetrievalKernel, KineticsError> {
        self.validate()?;
        RetrievalKernel::from_peak_fwhm(self.retrieval_delay_ns, self.retrieval_fwhm_ns)
    }
}

/// Gamma retrieval kernel: pdf(x) = x^(k−1) e^(−x/θ) / (Γ(k) θ^k) for x > 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetrievalKernel {
    shape: f64,
    scale: f64,
    /// −ln Γ(k) − k ln θ, cached for pdf evaluation.
    ln_norm: f64,
    peak_ns: f64,
    fwhm_ns: f64,
}

/// ln of the unit-scale gamma pdf at x.
fn unit_ln_pdf(shape: f64, x: f64) -> f64 {
    (shape - 1.0) * x.ln() - x - ln_gamma(shape)
}

/// FWHM of the unit-scale gamma density for shape k > 1, via bisection on
/// both sides of the mode.
fn unit_fwhm(shape: f64) -> f64 {
    let mode = shape - 1.0;
    let ln_half = unit_ln_pdf(shape, mode) - std::f64::consts::LN_2;
    let above = |x: f64| unit_ln_pdf(shape, x) - ln_half; // > 0 inside FWHM
    let bisect = |mut lo: f64, mut hi: f64, rising: bool| -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (above(mid) > 0.0) == rising {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo < 1e-14 * (1.0 + hi.abs()) {
                break;
            }
        }
        0.5 * (lo + hi)
    };
    // Left crossing: pdf rises from 0 at x=0 to the peak, so [0, mode]
    // always brackets it.
    let left = bisect(0.0, mode, true);
    // Right crossing: expand until the density drops below half.
    let mut hi = mode + 1.0;
    while above(hi) > 0.0 {
        hi = mode + (hi - mode) * 2.0;
    }
    let right = bisect(mode, hi, false);
    // `rising` flips the bisection direction: the left root is approached
    // from below the crossing, the right root from above.
    debug_assert!(right > left);
    right - left
}

impl RetrievalKernel {
    /// Find shape and scale so the density peaks at `peak_ns` with the given
    /// FWHM. Fails if the requested width is too narrow relative to the peak
    /// (a gamma cannot be arbitrarily sharp at fixed mode within f64 range).
    pub fn from_peak_fwhm(peak_ns: f64, fwhm_ns: f64) -> Result<RetrievalKernel, KineticsError> {
        if !peak_ns.is_finite() || peak_ns <= 0.0 || !fwhm_ns.is_finite() || fwhm_ns <= 0.0 {
            return Err(KineticsError::WidthUnresolvable { peak_ns, fwhm_ns });
        }
        let target = fwhm_ns / peak_ns;
        // ratio(k) = unit_fwhm(k)/(k−1) decreases monotonically in k:
        // bracket the solution, then bisect.
        let ratio = |k: f64| unit_fwhm(k) / (k - 1.0);
        let mut lo = 1.0 + 1e-9;
        let mut hi = 2.0;
        while ratio(hi) > target {
            hi *= 2.0;
            if hi > 1e8 {
                return Err(KineticsError::WidthUnresolvable { peak_ns, fwhm_ns });
            }
        }
        if ratio(lo) < target {
            return Err(KineticsError::WidthUnresolvable { peak_ns, fwhm_ns });
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if ratio(mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-13 * hi {
                break;
            }
        }
        let shape = 0.5 * (lo + hi);
        let scale = peak_ns / (shape - 1.0);
        let ln_norm = -ln_gamma(shape) - shape * scale.ln();
        Ok(RetrievalKernel { shape, scale, ln_norm, peak_ns, fwhm_ns })
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn peak_ns(&self) -> f64 {
        self.peak_ns
    }

    pub fn fwhm_ns(&self) -> f64 {
        self.fwhm_ns
    }

    /// Mean retrieval delay kθ, ns. Larger than the peak (right skew).
    pub fn mean_ns(&self) -> f64 {
        self.shape * self.scale
    }

    /// Probability density at delay x ns.
    pub fn pdf(&self, x_ns: f64) -> f64 {
        if x_ns <= 0.0 {
            return 0.0;
        }
        ((self.shape - 1.0) * x_ns.ln() - x_ns / self.scale + self.ln_norm).exp()
    }

    /// Density at the peak; upper bound over all delays.
    pub fn max_density(&self) -> f64 {
        self.pdf(self.peak_ns)
    }

    /// Draw a retrieval delay.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        rand_distr::Gamma::new(self.shape, self.scale)
            .expect("validated shape/scale")
            .sample(rng)
    }

    /// Reusable sampler for hot loops (avoids re-deriving Marsaglia-Tsang
    /// constants per draw).
    pub fn sampler(&self) -> rand_distr::Gamma<f64> {
        rand_distr::Gamma::new(self.shape, self.scale).expect("validated shape/scale")
    }
}
