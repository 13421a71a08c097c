//! Statistical validation of the Monte Carlo generator against deterministic
//! quadrature of the same model, plus determinism guarantees.
//!
//! Every test uses a committed seed, so outcomes are reproducible; the
//! statistical thresholds are set at the 0.1% level and verified to pass
//! with margin for the committed seeds.

use pairtrace::{
    simulate, CoherenceModel, DetectorChannel, FieldId, FieldInhomogeneity, PairKinetics,
    PairSampler, SimConfig, SourceRates, TrialSchedule, ZeemanScheme,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn schedule(trials: u64, delta_t_ns: f64) -> TrialSchedule {
    TrialSchedule {
        trial_count: trials,
        delta_t_ns,
        write_duration_ns: 150.0,
        read_duration_ns: 120.0,
        window_ns: 200.0,
    }
}

fn unpolarized(k_hz: f64) -> CoherenceModel {
    CoherenceModel::new(
        ZeemanScheme::unpolarized(),
        FieldInhomogeneity::new(k_hz).unwrap(),
        None,
    )
    .unwrap()
}

fn chi2_critical(dof: f64, p: f64) -> f64 {
    ChiSquared::new(dof).unwrap().inverse_cdf(p)
}

// ---------------------------------------------------------------------------
// Pair emission sampler
// ---------------------------------------------------------------------------

/// With the gradient off nothing is rejected and the mean separation
/// E[t2 − t1] equals start-delay quadrature: E[max(Δt − t1, 0)] + kernel
/// mean = 25/3 + 62.7326 at Δt = 50 ns.
#[test]
fn emission_separation_matches_quadrature() {
    let kin = PairKinetics::default();
    let model = unpolarized(0.0);
    let cases = [(50.0, 71.06593494580906), (0.0, 62.732601612475726)];
    for (dt, expected) in cases {
        let sampler = PairSampler::new(&kin, &model, &schedule(1, dt)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 1_000_000;
        let (mut sum, mut sum2) = (0.0, 0.0);
        for _ in 0..n {
            let em = sampler.sample_emission(&mut rng).unwrap();
            let t2 = em.t2_ns.expect("no rejection when gradient is off");
            let sep = t2 - em.t1_ns;
            assert!(sep > 0.0);
            sum += sep;
            sum2 += sep * sep;
        }
        let mean = sum / n as f64;
        let sd = (sum2 / n as f64 - mean * mean).sqrt();
        let sem = sd / (n as f64).sqrt();
        assert!(
            (mean - expected).abs() < 4.0 * sem,
            "dt={dt}: mean {mean} vs {expected} (sem {sem})"
        );
    }
}

/// Dephasing rejection: the surviving fraction at long storage equals the
/// quadrature average of C over the emission distribution.
#[test]
fn rejection_rate_matches_coherence_average() {
    let kin = PairKinetics::default();
    let model = unpolarized(1.1e6);
    let sampler = PairSampler::new(&kin, &model, &schedule(1, 400.0)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let n = 200_000;
    let kept = (0..n)
        .filter(|_| sampler.sample_emission(&mut rng).unwrap().t2_ns.is_some())
        .count();
    let frac = kept as f64 / n as f64;
    let expected = 0.1742606297675436;
    let sigma = (expected * (1.0 - expected) / n as f64).sqrt();
    assert!(
        (frac - expected).abs() < 4.0 * sigma,
        "kept fraction {frac} vs {expected} (sigma {sigma})"
    );
}

/// Accepted, window-clipped pairs follow the joint density: chi-square
/// against cell-integrated f(t1, t2) on a 10×10 grid.
#[test]
fn accepted_pairs_follow_joint_density() {
    let kin = PairKinetics::default();
    let model = unpolarized(1.1e6);
    let sched = schedule(1, 50.0);
    let sampler = PairSampler::new(&kin, &model, &sched).unwrap();
    let density = pairtrace::PairDensity::new(&model, &kin, &sched).unwrap();

    // Cell-integrated density (0.5 ns midpoint), normalized over the grid.
    let (nb1, nb2) = (10, 10);
    let (w1, w2) = (150.0 / nb1 as f64, 200.0 / nb2 as f64);
    let mut expected = vec![0.0; nb1 * nb2];
    for (i, e) in expected.iter_mut().enumerate() {
        let (bi, bj) = (i / nb2, i % nb2);
        let (lo1, lo2) = (bi as f64 * w1, 50.0 + bj as f64 * w2);
        let (m1, m2) = ((w1 / 0.5) as usize, (w2 / 0.5) as usize);
        let mut acc = 0.0;
        for a in 0..m1 {
            let t1 = lo1 + (a as f64 + 0.5) * 0.5;
            for b in 0..m2 {
                let t2 = lo2 + (b as f64 + 0.5) * 0.5;
                acc += density.eval(t1, t2);
            }
        }
        *e = acc * 0.25;
    }
    let total: f64 = expected.iter().sum();
    for e in &mut expected {
        *e /= total;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let n_target = 30_000;
    let mut observed = vec![0u64; nb1 * nb2];
    let mut collected = 0;
    while collected < n_target {
        let em = sampler.sample_emission(&mut rng).unwrap();
        if let Some(t2) = em.t2_ns {
            if t2 >= 250.0 {
                continue; // clipped by the field-2 window
            }
            let bi = (em.t1_ns / w1) as usize;
            let bj = ((t2 - 50.0) / w2) as usize;
            observed[bi.min(nb1 - 1) * nb2 + bj.min(nb2 - 1)] += 1;
            collected += 1;
        }
    }

    // Chi-square with standard sparse-cell pooling: cells expecting < 5
    // counts are merged into one bucket; truly forbidden cells (zero
    // density, the t2 < t1 region) must be empty.
    let mut chi2 = 0.0;
    let mut terms = 0.0;
    let (mut pooled_exp, mut pooled_obs) = (0.0, 0u64);
    for (i, &e) in expected.iter().enumerate() {
        let exp_counts = e * n_target as f64;
        if exp_counts == 0.0 {
            assert_eq!(observed[i], 0, "forbidden cell {i} is occupied");
        } else if exp_counts < 5.0 {
            pooled_exp += exp_counts;
            pooled_obs += observed[i];
        } else {
            let d = observed[i] as f64 - exp_counts;
            chi2 += d * d / exp_counts;
            terms += 1.0;
        }
    }
    if pooled_exp > 0.0 {
        let d = pooled_obs as f64 - pooled_exp;
        chi2 += d * d / pooled_exp;
        terms += 1.0;
    }
    let crit = chi2_critical(terms - 1.0, 0.999);
    assert!(chi2 < crit, "chi2 {chi2} over {terms} terms exceeds {crit}");
}

// ---------------------------------------------------------------------------
// Full generator statistics
// ---------------------------------------------------------------------------

/// Dark counts: Poisson per channel at the configured mean, uniform in time.
#[test]
fn dark_counts_poisson_and_uniform() {
    let config = SimConfig {
        schedule: schedule(200_000, 50.0),
        kinetics: PairKinetics::default(),
        rates: SourceRates {
            p_pair: 0.0,
            p1_uncorr: 0.0,
            p2_uncorr: 0.0,
            dark_per_window: 5e-3,
            eta1: 1.0,
            eta2: 1.0,
        },
        coherence: unpolarized(1.1e6),
        seed: 21,
    };
    let rec = simulate(&config).unwrap();

    // Per-channel totals against the configured mean of 1000.
    let expect = 200_000.0 * 5e-3;
    let mut chi2 = 0.0;
    for ch in DetectorChannel::ALL {
        let n = rec.events.iter().filter(|e| e.channel == ch).count() as f64;
        chi2 += (n - expect) * (n - expect) / expect;
    }
    let crit = chi2_critical(4.0, 0.999);
    assert!(chi2 < crit, "per-channel chi2 {chi2} exceeds {crit}");

    // Pooled arrival times uniform over the window: 10-bin chi-square.
    let mut bins = [0u64; 10];
    for e in &rec.events {
        bins[((e.time_ns / 20.0) as usize).min(9)] += 1;
    }
    let total: u64 = bins.iter().sum();
    let per = total as f64 / 10.0;
    let chi2t: f64 =
        bins.iter().map(|&b| (b as f64 - per) * (b as f64 - per) / per).sum();
    let critt = chi2_critical(9.0, 0.999);
    assert!(chi2t < critt, "time-uniformity chi2 {chi2t} exceeds {critt}");
}

/// Singles rates are flat in storage time: exactly for field 1 (its model
/// never involves Δt) and within counting noise for field 2, whose singles
/// are background-dominated.
#[test]
fn singles_rates_stable_across_storage_time() {
    let delta_ts = [0.0, 100.0, 200.0, 300.0, 400.0];
    let mut counts1 = Vec::new();
    let mut counts2 = Vec::new();
    for &dt in &delta_ts {
        let config = SimConfig {
            schedule: schedule(10_000, dt),
            kinetics: PairKinetics::default(),
            rates: SourceRates::default(),
            coherence: unpolarized(1.1e6),
            seed: 31,
        };
        let rec = simulate(&config).unwrap();
        counts1.push(
            rec.events.iter().filter(|e| e.channel.field == FieldId::Field1).count() as f64,
        );
        counts2.push(
            rec.events.iter().filter(|e| e.channel.field == FieldId::Field2).count() as f64,
        );
    }
    for (label, counts) in [("field1", &counts1), ("field2", &counts2)] {
        let mean: f64 = counts.iter().sum::<f64>() / counts.len() as f64;
        let sigma = mean.sqrt();
        for (dt, &n) in delta_ts.iter().zip(counts.iter()) {
            assert!(
                (n - mean).abs() < 3.0 * sigma,
                "{label} singles at dt={dt}: {n} vs mean {mean} (sigma {sigma:.1})"
            );
        }
    }
}

/// The worker count must not change a single byte of the output record.
#[test]
fn record_is_identical_for_any_worker_count() {
    let config = SimConfig {
        schedule: schedule(20_000, 50.0),
        kinetics: PairKinetics::default(),
        rates: SourceRates::default(),
        coherence: unpolarized(1.1e6),
        seed: 41,
    };
    let mut serialized: Vec<Vec<u8>> = Vec::new();
    for workers in [1usize, 4, 8] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .unwrap();
        let rec = pool.install(|| simulate(&config)).unwrap();
        let mut buf = Vec::new();
        pairtrace::write_record(&rec, &mut buf).unwrap();
        serialized.push(buf);
    }
    assert_eq!(serialized[0], serialized[1]);
    assert_eq!(serialized[1], serialized[2]);
}

/// Retrievals that fall outside the field-2 window are clipped, but the
/// heralding photon is kept.
#[test]
fn late_retrieval_is_clipped_photon1_kept() {
    let config = SimConfig {
        schedule: schedule(2_000, 50.0),
        kinetics: PairKinetics {
            delta0_ns: 500.0, // push every retrieval far past the window
            ..PairKinetics::default()
        },
        rates: SourceRates {
            p_pair: 1.0,
            p1_uncorr: 0.0,
            p2_uncorr: 0.0,
            dark_per_window: 0.0,
            eta1: 1.0,
            eta2: 1.0,
        },
        coherence: unpolarized(0.0),
        seed: 51,
    };
    let rec = simulate(&config).unwrap();
    let n1 = rec.events.iter().filter(|e| e.channel.field == FieldId::Field1).count();
    let n2 = rec.events.iter().filter(|e| e.channel.field == FieldId::Field2).count();
    assert_eq!(n1, 2_000);
    assert_eq!(n2, 0);
}

/// Pair-channel bookkeeping: with perfect efficiency, no background and no
/// dephasing, every trial has exactly one photon 1 and (if retrieved in
/// window) one photon 2, and the empirical capture fraction matches the
/// window-integrated density.
#[test]
fn capture_fraction_matches_window_integral() {
    let config = SimConfig {
        schedule: schedule(100_000, 50.0),
        kinetics: PairKinetics::default(),
        rates: SourceRates {
            p_pair: 1.0,
            p1_uncorr: 0.0,
            p2_uncorr: 0.0,
            dark_per_window: 0.0,
            eta1: 1.0,
            eta2: 1.0,
        },
        coherence: unpolarized(1.1e6),
        seed: 61,
    };
    let rec = simulate(&config).unwrap();
    let n2 = rec.events.iter().filter(|e| e.channel.field == FieldId::Field2).count();
    // Window-integrated joint density over the uniform write envelope:
    // divide the frozen integral by the 150 ns pulse duration.
    let expected: f64 = 112.35583283935863 / 150.0;
    let frac = n2 as f64 / 100_000.0;
    let sigma = (expected * (1.0 - expected) / 100_000.0_f64).sqrt();
    assert!(
        (frac - expected).abs() < 4.0 * sigma,
        "capture {frac} vs {expected} (sigma {sigma})"
    );
}
