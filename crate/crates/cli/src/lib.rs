//! Command-line front end: configuration parsing and the simulate / analyze
//! / predict / report subcommands.
//!
//! Contract: exit 0 on success, 2 on usage or configuration errors, 3 on
//! I/O failures. Errors go to standard error as single-line JSON
//! `{"kind": ..., "message": ...}`. All output files are deterministic for a
//! given (config, seed); `--workers` never changes outputs.

pub mod config;
pub mod manifest;

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use config::{ConfigError, Polarization, RunConfig};
use manifest::{hash_text, ManifestBuilder};
use pairtrace::csvout;
use pairtrace::{
    accidental_histogram, auto_histogram, cross_histogram, fit_decoherence_time, g12_integrated,
    predict_g12, ratio_surface, ridge_profile, simulate, AnalysisError, BinningPair,
    CoincidenceHistogram, EventRecord, FieldId, HistogramKind, IoError, Pairing,
};

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Top-level CLI error; carries the exit code and the JSON "kind".
#[derive(Debug)]
pub enum CliError {
    /// Bad invocation: flags, sweep specs, insufficient inputs. Exit 2.
    Usage(String),
    /// Bad configuration value, with the offending field. Exit 2.
    Config(ConfigError),
    /// Malformed input data file. Exit 2.
    Data { path: PathBuf, message: String },
    /// Operating-system level I/O failure. Exit 3.
    Io { context: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) | CliError::Data { .. } => 2,
            CliError::Io { .. } => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config(_) => "config",
            CliError::Data { .. } => "data",
            CliError::Io { .. } => "io",
        }
    }

    pub fn message(&self) -> String {
        let raw = match self {
            CliError::Usage(m) => m.clone(),
            CliError::Config(e) => e.to_string(),
            CliError::Data { path, message } => format!("{}: {message}", path.display()),
            CliError::Io { context, source } => format!("{context}: {source}"),
        };
        raw.replace('\n', "; ")
    }

    /// The single-line JSON form that goes to standard error.
    pub fn to_json_line(&self) -> String {
        serde_json::json!({ "kind": self.kind(), "message": self.message() }).to_string()
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

fn io_context(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> CliError {
    let context = context.into();
    move |source| CliError::Io { context, source }
}

/// Record-file errors: OS failures exit 3, malformed content exits 2.
fn map_record_error(path: &Path, e: IoError) -> CliError {
    match e {
        IoError::Io(source) => CliError::Io { context: path.display().to_string(), source },
        other => CliError::Data { path: path.to_path_buf(), message: other.to_string() },
    }
}

fn map_analysis_error(e: AnalysisError) -> CliError {
    CliError::Usage(e.to_string())
}

/// Machine-readable warning on standard error (same shape as errors).
fn warn(message: &str) {
    eprintln!(
        "{}",
        serde_json::json!({ "kind": "warning", "message": message })
    );
}

// ---------------------------------------------------------------------------
// Argument surface
// ---------------------------------------------------------------------------

#[derive(Debug, Parser)]
#[command(
    name = "pairtrace",
    version,
    about = "Photon-pair correlation simulator and analysis pipeline"
)]
pub struct Cli {
    /// Worker threads for simulation (default: all cores; never changes outputs)
    #[arg(long, global = true, value_name = "N")]
    pub workers: Option<usize>,

    /// Suppress informational summaries on standard output
    #[arg(long, global = true)]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a detection-event record by Monte Carlo simulation
    Simulate {
        /// Flat "section.key = value" configuration file
        #[arg(long)]
        config: PathBuf,
        /// Output record path
        #[arg(long)]
        out: PathBuf,
        /// Override one configuration key (repeatable), e.g. rates.p_pair=0
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Override sim.seed from the config file
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compute correlation products from a record file
    Analyze {
        /// Input record file
        #[arg(long)]
        events: PathBuf,
        /// Coincidence bin size in nanoseconds
        #[arg(long = "tau-ns")]
        tau_ns: f64,
        /// Prefix for output CSVs (<prefix>_cross.csv, _R.csv, ...)
        #[arg(long = "out-prefix")]
        out_prefix: PathBuf,
        /// Write the R surface (<prefix>_R.csv)
        #[arg(long)]
        surface: bool,
        /// Write the auto-correlation histograms (_auto1.csv, _auto2.csv)
        #[arg(long)]
        autos: bool,
        /// Write the accidental-coincidence histogram (_accidental.csv)
        #[arg(long)]
        accidentals: bool,
        /// Write the window-integrated g12 estimate (_g12.csv)
        #[arg(long)]
        g12: bool,
        /// Write the ridge profile versus t2 - t1 (_ridge.csv)
        #[arg(long)]
        ridge: bool,
    },
    /// Evaluate the model g12 prediction over a storage-time sweep
    Predict {
        /// Flat configuration file (kinetics + coherence + schedule)
        #[arg(long)]
        config: PathBuf,
        /// Storage-time sweep "start:stop:step" in nanoseconds
        #[arg(long = "dt-spec", value_name = "START:STOP:STEP")]
        dt_spec: String,
        /// Use the clock-state (m_F=0) polarized scheme instead of unpolarized
        #[arg(long)]
        polarized: bool,
        /// Override predict.scale from the config file
        #[arg(long)]
        scale: Option<f64>,
        /// Output CSV path
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the model curve to a sweep of analyzed g12 measurements
    Report {
        /// Directory containing *_g12.csv files from analyze runs
        #[arg(long = "sweep-dir")]
        sweep_dir: PathBuf,
        /// Model curve CSV from the predict subcommand
        #[arg(long = "model-csv")]
        model_csv: PathBuf,
        /// Output JSON report path
        #[arg(long)]
        out: PathBuf,
    },
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

pub fn run(cli: Cli) -> Result<(), CliError> {
    let pool = match cli.workers {
        Some(0) => return Err(CliError::Usage("--workers must be at least 1".into())),
        Some(n) => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Usage(format!("--workers: {e}")))?,
        ),
        None => None,
    };
    let quiet = cli.quiet;
    let body = || match cli.command {
        Command::Simulate { config, out, set, seed } => {
            cmd_simulate(&config, &out, &set, seed, quiet)
        }
        Command::Analyze { events, tau_ns, out_prefix, surface, autos, accidentals, g12, ridge } => {
            let products = Products::from_flags(surface, autos, accidentals, g12, ridge);
            cmd_analyze(&events, tau_ns, &out_prefix, products, quiet)
        }
        Command::Predict { config, dt_spec, polarized, scale, out } => {
            cmd_predict(&config, &dt_spec, polarized, scale, &out, quiet)
        }
        Command::Report { sweep_dir, model_csv, out } => {
            cmd_report(&sweep_dir, &model_csv, &out, quiet)
        }
    };
    match pool {
        Some(pool) => pool.install(body),
        None => body(),
    }
}

fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(io_context(path.display().to_string()))?;
    let mut rc = RunConfig::default();
    rc.apply_text(&text, &path.display().to_string())?;
    Ok(rc)
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

fn cmd_simulate(
    config_path: &Path,
    out: &Path,
    overrides: &[String],
    seed: Option<u64>,
    quiet: bool,
) -> Result<(), CliError> {
    let mut rc = load_config(config_path)?;
    for assignment in overrides {
        rc.apply_override(assignment)?;
    }
    if let Some(seed) = seed {
        rc.seed = seed;
    }
    let sim_config = rc.sim_config()?;

    let mut builder = ManifestBuilder::new("simulate", rc.hash());
    builder.seed(rc.seed).input(config_path).output(out);

    let record = simulate(&sim_config)
        .map_err(|e| CliError::Config(ConfigError { field: "sim".into(), message: e.to_string() }))?;
    pairtrace::write_record_file(&record, out).map_err(|e| map_record_error(out, e))?;
    builder.write(out).map_err(io_context(format!("manifest for {}", out.display())))?;

    if !quiet {
        println!(
            "wrote {} events over {} trials to {}",
            record.events.len(),
            record.schedule.trial_count,
            out.display()
        );
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
struct Products {
    surface: bool,
    autos: bool,
    accidentals: bool,
    g12: bool,
    ridge: bool,
}

impl Products {
    /// No flags selects every product; otherwise exactly the named ones
    /// (the cross histogram is always written).
    fn from_flags(surface: bool, autos: bool, accidentals: bool, g12: bool, ridge: bool) -> Self {
        if !(surface || autos || accidentals || g12 || ridge) {
            Products { surface: true, autos: true, accidentals: true, g12: true, ridge: true }
        } else {
            Products { surface, autos, accidentals, g12, ridge }
        }
    }
}

fn write_csv<F>(path: &Path, write_body: F) -> Result<(), CliError>
where
    F: FnOnce(&mut std::io::BufWriter<fs::File>) -> std::io::Result<()>,
{
    let file = fs::File::create(path).map_err(io_context(path.display().to_string()))?;
    let mut w = std::io::BufWriter::new(file);
    write_body(&mut w).map_err(io_context(path.display().to_string()))?;
    w.flush().map_err(io_context(path.display().to_string()))
}

/// An all-zero accidental histogram for records with fewer than two trials,
/// where no cross-trial pairing exists.
fn empty_accidental(record: &EventRecord, binning: &BinningPair) -> CoincidenceHistogram {
    CoincidenceHistogram {
        kind: HistogramKind::Accidental12,
        binning: [binning.field1, binning.field2],
        counts: vec![0; binning.field1.n_bins * binning.field2.n_bins],
        trials_used: record.schedule.trial_count,
        factor: 1.0,
    }
}

fn cmd_analyze(
    events: &Path,
    tau_ns: f64,
    prefix: &Path,
    products: Products,
    quiet: bool,
) -> Result<(), CliError> {
    if !tau_ns.is_finite() || tau_ns <= 0.0 {
        return Err(CliError::Usage(format!("--tau-ns must be positive, got {tau_ns}")));
    }
    let (record, _report) = pairtrace::read_record_file(events)
        .map_err(|e| map_record_error(events, e))?;
    if record.events.is_empty() {
        warn(&format!(
            "empty record ({} trials, 0 events): emitting all-zero products",
            record.schedule.trial_count
        ));
    }

    let binning =
        BinningPair::for_schedule(&record.schedule, tau_ns).map_err(map_analysis_error)?;
    if binning.truncated() {
        warn(&format!(
            "bin size {tau_ns} ns does not divide the {} ns window; trailing partial bin dropped",
            record.schedule.window_ns
        ));
    }

    let cross = cross_histogram(&record, &binning);
    let auto1 = auto_histogram(&record, &binning.field1, FieldId::Field1);
    let auto2 = auto_histogram(&record, &binning.field2, FieldId::Field2);
    let surface = ratio_surface(&cross, &auto1, &auto2).map_err(map_analysis_error)?;

    let mut builder = ManifestBuilder::new(
        "analyze",
        hash_text(&format!(
            "analyze.accidentals={}\nanalyze.autos={}\nanalyze.g12={}\nanalyze.ridge={}\nanalyze.surface={}\nanalyze.tau_ns={}\n",
            products.accidentals, products.autos, products.g12, products.ridge, products.surface,
            tau_ns
        )),
    );
    builder.input(events);

    let product_path = |suffix: &str| PathBuf::from(format!("{}{suffix}", prefix.display()));
    let emit = |path: PathBuf,
                    builder: &mut ManifestBuilder,
                    body: &dyn Fn(&mut std::io::BufWriter<fs::File>) -> std::io::Result<()>|
     -> Result<(), CliError> {
        write_csv(&path, body)?;
        builder.output(&path);
        Ok(())
    };

    emit(product_path("_cross.csv"), &mut builder, &|w| {
        csvout::write_histogram_csv(w, &cross)
    })?;
    if products.autos {
        emit(product_path("_auto1.csv"), &mut builder, &|w| {
            csvout::write_histogram_csv(w, &auto1)
        })?;
        emit(product_path("_auto2.csv"), &mut builder, &|w| {
            csvout::write_histogram_csv(w, &auto2)
        })?;
    }
    if products.accidentals {
        let accidental = if record.schedule.trial_count < 2 {
            warn("fewer than 2 trials: accidental histogram is all zeros");
            empty_accidental(&record, &binning)
        } else {
            accidental_histogram(&record, &binning, Pairing::Adjacent)
                .map_err(map_analysis_error)?
        };
        emit(product_path("_accidental.csv"), &mut builder, &|w| {
            csvout::write_histogram_csv(w, &accidental)
        })?;
    }
    if products.surface {
        emit(product_path("_R.csv"), &mut builder, &|w| {
            csvout::write_ratio_csv(w, &surface)
        })?;
    }
    if products.g12 {
        let row = match g12_integrated(&record) {
            Ok(est) => (record.schedule.delta_t_ns, est.g12, est.sigma),
            Err(e @ (AnalysisError::NoSingles { .. } | AnalysisError::InsufficientTrials { .. })) => {
                warn(&format!("g12 not estimable ({e}); written as zero"));
                (record.schedule.delta_t_ns, 0.0, 0.0)
            }
            Err(e) => return Err(map_analysis_error(e)),
        };
        emit(product_path("_g12.csv"), &mut builder, &|w| {
            csvout::write_g12_csv(w, &[row])
        })?;
    }
    if products.ridge {
        let profile = ridge_profile(&cross).map_err(map_analysis_error)?;
        emit(product_path("_ridge.csv"), &mut builder, &|w| {
            csvout::write_ridge_csv(w, &profile)
        })?;
    }

    builder
        .write(prefix)
        .map_err(io_context(format!("manifest for {}", prefix.display())))?;

    if !quiet {
        match surface.max() {
            Some(m) => println!(
                "max R = {:.3} \u{b1} {:.3} at (t1, t2) = ({:.3}, {:.3}) ns",
                m.r, m.sigma_r, m.t1_ns, m.t2_ns
            ),
            None => println!("max R undefined (no bin has cross and both autos populated)"),
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// predict
// ---------------------------------------------------------------------------

fn parse_dt_spec(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, stop, step] = parts.as_slice() else {
        return Err(CliError::Usage(format!(
            "--dt-spec must be start:stop:step (ns), got '{spec}'"
        )));
    };
    let parse = |name: &str, text: &str| -> Result<f64, CliError> {
        text.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| {
                CliError::Usage(format!("--dt-spec {name} must be a finite number, got '{text}'"))
            })
    };
    let (start, stop, step) =
        (parse("start", start)?, parse("stop", stop)?, parse("step", step)?);
    if step <= 0.0 {
        return Err(CliError::Usage(format!("--dt-spec step must be > 0, got {step}")));
    }
    if start < 0.0 {
        return Err(CliError::Usage(format!("--dt-spec start must be \u{2265} 0, got {start}")));
    }
    if stop < start {
        return Err(CliError::Usage(format!(
            "--dt-spec stop ({stop}) must not be below start ({start})"
        )));
    }
    let mut list = Vec::new();
    let mut k = 0u64;
    loop {
        let value = start + k as f64 * step;
        if value > stop + 1e-9 * step.max(1.0) {
            break;
        }
        list.push(value);
        k += 1;
    }
    Ok(list)
}

fn cmd_predict(
    config_path: &Path,
    dt_spec: &str,
    polarized: bool,
    scale: Option<f64>,
    out: &Path,
    quiet: bool,
) -> Result<(), CliError> {
    let mut rc = load_config(config_path)?;
    if polarized {
        rc.polarization = Polarization::Clock;
    }
    if let Some(scale) = scale {
        rc.predict_scale = scale;
    }
    rc.sim_config()?; // full validation, including predict.scale
    let sweep = parse_dt_spec(dt_spec)?;

    let model = rc.coherence()?;
    let curve = predict_g12(&model, &rc.kinetics, &rc.schedule, &sweep, rc.predict_scale)
        .map_err(|e| CliError::Usage(e.to_string()))?;

    write_csv(out, |w| csvout::write_predict_csv(w, &curve))?;

    let mut builder = ManifestBuilder::new(
        "predict",
        hash_text(&format!(
            "{}predict.dt_spec={dt_spec}\npredict.polarized={polarized}\n",
            rc.canonical_text()
        )),
    );
    builder.input(config_path).output(out);
    builder.write(out).map_err(io_context(format!("manifest for {}", out.display())))?;

    if !quiet {
        println!("wrote {} predicted points to {}", curve.len(), out.display());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

fn parse_float_field(path: &Path, line_no: usize, text: &str) -> Result<f64, CliError> {
    text.trim().parse::<f64>().map_err(|_| CliError::Data {
        path: path.to_path_buf(),
        message: format!("line {line_no}: expected a number, got '{text}'"),
    })
}

/// Rows of a measured-g12 CSV: (delta_t_ns, g12, sigma).
fn read_g12_csv(path: &Path) -> Result<Vec<(f64, f64, f64)>, CliError> {
    let text = fs::read_to_string(path).map_err(io_context(path.display().to_string()))?;
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(CliError::Data {
                path: path.to_path_buf(),
                message: format!("line {}: expected 3 comma-separated fields", idx + 1),
            });
        }
        rows.push((
            parse_float_field(path, idx + 1, fields[0])?,
            parse_float_field(path, idx + 1, fields[1])?,
            parse_float_field(path, idx + 1, fields[2])?,
        ));
    }
    Ok(rows)
}

/// Rows of a model CSV: (delta_t_ns, g12_pred).
fn read_model_csv(path: &Path) -> Result<Vec<(f64, f64)>, CliError> {
    let text = fs::read_to_string(path).map_err(io_context(path.display().to_string()))?;
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 2 {
            return Err(CliError::Data {
                path: path.to_path_buf(),
                message: format!("line {}: expected 2 comma-separated fields", idx + 1),
            });
        }
        rows.push((
            parse_float_field(path, idx + 1, fields[0])?,
            parse_float_field(path, idx + 1, fields[1])?,
        ));
    }
    Ok(rows)
}

/// Linear interpolation on a sorted curve; x must lie within its range.
fn interpolate(curve: &[(f64, f64)], x: f64) -> f64 {
    debug_assert!(curve.len() >= 2);
    let mut lo = &curve[0];
    for hi in &curve[1..] {
        if x <= hi.0 {
            let span = hi.0 - lo.0;
            if span <= 0.0 {
                return hi.1;
            }
            let f = (x - lo.0) / span;
            return lo.1 + f * (hi.1 - lo.1);
        }
        lo = hi;
    }
    curve[curve.len() - 1].1
}

fn cmd_report(
    sweep_dir: &Path,
    model_csv: &Path,
    out: &Path,
    quiet: bool,
) -> Result<(), CliError> {
    // Collect *_g12.csv files deterministically (sorted by name).
    let mut sweep_files: Vec<PathBuf> = fs::read_dir(sweep_dir)
        .map_err(io_context(sweep_dir.display().to_string()))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.ends_with("_g12.csv"))
        })
        .collect();
    sweep_files.sort();

    let mut measured: Vec<(f64, f64, f64)> = Vec::new();
    for path in &sweep_files {
        measured.extend(read_g12_csv(path)?);
    }
    measured.sort_by(|a, b| a.0.total_cmp(&b.0));
    if measured.len() < 3 {
        return Err(CliError::Usage(format!(
            "insufficient points: need at least 3 measured g12 values, found {} in {}",
            measured.len(),
            sweep_dir.display()
        )));
    }

    let model = read_model_csv(model_csv)?;
    let mut model_sorted = model.clone();
    model_sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    if model_sorted.len() < 2 {
        return Err(CliError::Usage(format!(
            "model curve needs at least 2 points, found {}",
            model_sorted.len()
        )));
    }
    let (model_lo, model_hi) =
        (model_sorted[0].0, model_sorted[model_sorted.len() - 1].0);
    for &(dt, _, _) in &measured {
        if dt < model_lo - 1e-9 || dt > model_hi + 1e-9 {
            return Err(CliError::Usage(format!(
                "measured point at {dt} ns lies outside the model range [{model_lo}, {model_hi}] ns"
            )));
        }
    }

    // Least-squares scale between model excess (pred − 1) and measured
    // excess (g12 − 1): s = Σ m·y / Σ m².
    let pairs: Vec<(f64, f64)> = measured
        .iter()
        .map(|&(dt, g, _)| (interpolate(&model_sorted, dt) - 1.0, g - 1.0))
        .collect();
    let sum_mm: f64 = pairs.iter().map(|(m, _)| m * m).sum();
    if sum_mm <= 0.0 {
        return Err(CliError::Usage(
            "degenerate fit: model curve is identically 1 over the sweep".into(),
        ));
    }
    let sum_my: f64 = pairs.iter().map(|(m, y)| m * y).sum();
    let scale = sum_my / sum_mm;
    let residual = (pairs
        .iter()
        .map(|(m, y)| {
            let r = y - scale * m;
            r * r
        })
        .sum::<f64>()
        / pairs.len() as f64)
        .sqrt();

    let measured_curve: Vec<(f64, f64)> = measured.iter().map(|&(dt, g, _)| (dt, g)).collect();
    let tau_d_measured = fit_decoherence_time(&measured_curve, 1.0)
        .map_err(|e| CliError::Usage(e.to_string()))?
        .determined();
    let tau_d_model = fit_decoherence_time(&model_sorted, 1.0)
        .map_err(|e| CliError::Usage(e.to_string()))?
        .determined();

    let report = serde_json::json!({
        "scale": scale,
        "residual": residual,
        "tau_d_measured": tau_d_measured,
        "tau_d_model": tau_d_model,
    });
    let mut text = report.to_string();
    text.push('\n');
    fs::write(out, text).map_err(io_context(out.display().to_string()))?;

    let mut builder = ManifestBuilder::new("report", hash_text("report\n"));
    for path in &sweep_files {
        builder.input(path);
    }
    builder.input(model_csv).output(out);
    builder.write(out).map_err(io_context(format!("manifest for {}", out.display())))?;

    if !quiet {
        let fmt_tau = |t: Option<f64>| match t {
            Some(v) => format!("{v:.1} ns"),
            None => "not determined".to_string(),
        };
        let mut line = String::new();
        let _ = write!(
            line,
            "scale = {scale:.5}, rms residual = {residual:.5}, tau_d measured = {}, tau_d model = {}",
            fmt_tau(tau_d_measured),
            fmt_tau(tau_d_model)
        );
        println!("{line}");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dt_spec_parses_inclusive_sweep() {
        assert_eq!(parse_dt_spec("0:400:100").unwrap(), vec![0.0, 100.0, 200.0, 300.0, 400.0]);
        assert_eq!(parse_dt_spec("50:50:10").unwrap(), vec![50.0]);
        assert_eq!(parse_dt_spec("0:25:10").unwrap(), vec![0.0, 10.0, 20.0]);
    }

    #[test]
    fn dt_spec_rejects_bad_input() {
        assert!(matches!(parse_dt_spec("0:400:0"), Err(CliError::Usage(_))));
        assert!(matches!(parse_dt_spec("0:400:-5"), Err(CliError::Usage(_))));
        assert!(matches!(parse_dt_spec("0:400"), Err(CliError::Usage(_))));
        assert!(matches!(parse_dt_spec("a:400:10"), Err(CliError::Usage(_))));
        assert!(matches!(parse_dt_spec("400:0:10"), Err(CliError::Usage(_))));
        assert!(matches!(parse_dt_spec("-10:400:10"), Err(CliError::Usage(_))));
    }

    #[test]
    fn interpolation_is_linear_between_knots() {
        let curve = [(0.0, 1.0), (10.0, 3.0), (20.0, 2.0)];
        assert_eq!(interpolate(&curve, 0.0), 1.0);
        assert_eq!(interpolate(&curve, 5.0), 2.0);
        assert_eq!(interpolate(&curve, 10.0), 3.0);
        assert_eq!(interpolate(&curve, 15.0), 2.5);
        assert_eq!(interpolate(&curve, 20.0), 2.0);
    }

    #[test]
    fn error_json_is_single_line() {
        let err = CliError::Usage("bad\nthing".into());
        let line = err.to_json_line();
        assert_eq!(line.lines().count(), 1);
        let v: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert_eq!(v["kind"], "usage");
        assert_eq!(v["message"], "bad; thing");
    }

    #[test]
    fn exit_codes_follow_contract() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
        assert_eq!(
            CliError::Config(ConfigError { field: "f".into(), message: "m".into() }).exit_code(),
            2
        );
        assert_eq!(
            CliError::Data { path: "p".into(), message: "m".into() }.exit_code(),
            2
        );
        assert_eq!(
            CliError::Io {
                context: "c".into(),
                source: std::io::Error::other("x")
            }
            .exit_code(),
            3
        );
    }
}
