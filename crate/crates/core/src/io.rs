//! Plain-text event record format.
//!
//! A record file is line-oriented UTF-8:
//!
//! ```text
//! # format_version=1
//! # trials=100000
//! # delta_t_ns=50
//! # write_duration_ns=150
//! # read_duration_ns=120
//! # window_ns=200
//! # t2_axis=window_relative
//! # rates.p_pair=0.01          <- free-form metadata, sorted by key
//! 0\t1A\t12.042
//! 0\t2B\t104.007
//! 17\t1B\t3.921
//! ```
//!
//! * Header lines start with `# ` and hold `key=value` pairs. The seven keys
//!   above are required; `t2_axis` is fixed to `window_relative` and records
//!   the field-2 time convention. Every other header key is carried through
//!   as record metadata.
//! * Event lines are `<trial>\t<channel>\t<time_ns>` with the time printed to
//!   exactly 3 decimals (the 1 ps tick). Writing then reading a record
//!   reproduces every stored `f64` bit-exactly.
//! * Events are written sorted by (trial, field, time). A reader encountering
//!   unsorted events re-sorts them and reports it, so externally produced
//!   files are accepted as long as each line is well formed.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::event::{DetectionEvent, DetectorChannel, EventRecord, RecordError, TrialSchedule};

/// Version tag written by this crate; the only version it reads.
pub const FORMAT_VERSION: u64 = 1;

const T2_AXIS_TAG: &str = "window_relative";

const RESERVED_KEYS: [&str; 7] = [
    "format_version",
    "trials",
    "delta_t_ns",
    "write_duration_ns",
    "read_duration_ns",
    "window_ns",
    "t2_axis",
];

#[derive(Debug, Error)]
pub enum IoError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: malformed header (expected '# key=value'): {text:?}")]
    MalformedHeader { line: usize, text: String },
    #[error("line {line}: duplicate header key {key:?}")]
    DuplicateHeader { line: usize, key: String },
    #[error("line {line}: header {key}={value:?} is not a valid {expected}")]
    BadHeaderValue { line: usize, key: &'static str, value: String, expected: &'static str },
    #[error("missing required header key {key:?}")]
    MissingHeader { key: &'static str },
    #[error("unsupported format_version {found} (this reader handles {FORMAT_VERSION})")]
    UnsupportedVersion { found: u64 },
    #[error("line {line}: expected 3 tab-separated fields, found {found}")]
    WrongFieldCount { line: usize, found: usize },
    #[error("line {line}: invalid trial index {value:?}")]
    BadTrial { line: usize, value: String },
    #[error("line {line}: unknown channel label {value:?} (expected 1A, 1B, 2A or 2B)")]
    BadChannel { line: usize, value: String },
    #[error("line {line}: invalid event time {value:?}")]
    BadTime { line: usize, value: String },
    #[error("line {line}: header line after first event line")]
    HeaderAfterEvents { line: usize },
    #[error("metadata key {key:?} is reserved or contains '=' / newline")]
    BadMetadataKey { key: String },
    #[error("metadata value for {key:?} contains a newline")]
    BadMetadataValue { key: String },
    #[error(transparent)]
    Record(#[from] RecordError),
}

/// What `read_record` had to do besides parsing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReadReport {
    /// Events were not in canonical order and were re-sorted.
    pub resorted: bool,
    pub event_count: usize,
}

/// Serialize a record. The output is deterministic: byte-identical records
/// for equal inputs.
pub fn write_record<W: Write>(record: &EventRecord, out: W) -> Result<(), IoError> {
    record.validate()?;
    for (key, value) in &record.metadata {
        if key.is_empty()
            || key.contains('=')
            || key.contains('\n')
            || RESERVED_KEYS.contains(&key.as_str())
        {
            return Err(IoError::BadMetadataKey { key: key.clone() });
        }
        if value.contains('\n') {
            return Err(IoError::BadMetadataValue { key: key.clone() });
        }
    }
    let mut w = BufWriter::new(out);
    let s = &record.schedule;
    writeln!(w, "# format_version={FORMAT_VERSION}")?;
    writeln!(w, "# trials={}", s.trial_count)?;
    writeln!(w, "# delta_t_ns={}", s.delta_t_ns)?;
    writeln!(w, "# write_duration_ns={}", s.write_duration_ns)?;
    writeln!(w, "# read_duration_ns={}", s.read_duration_ns)?;
    writeln!(w, "# window_ns={}", s.window_ns)?;
    writeln!(w, "# t2_axis={T2_AXIS_TAG}")?;
    for (key, value) in &record.metadata {
        writeln!(w, "# {key}={value}")?;
    }
    for ev in &record.events {
        writeln!(w, "{}\t{}\t{:.3}", ev.trial, ev.channel.label(), ev.time_ns)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_record_file<P: AsRef<Path>>(record: &EventRecord, path: P) -> Result<(), IoError> {
    let file = File::create(path)?;
    write_record(record, file)
}

/// Parse a record. Malformed lines are rejected with their line number;
/// out-of-order events are re-sorted (see `ReadReport`).
pub fn read_record<R: Read>(input: R) -> Result<(EventRecord, ReadReport), IoError> {
    let reader = BufReader::new(input);
    let mut headers: Vec<(String, String)> = Vec::new();
    let mut events: Vec<DetectionEvent> = Vec::new();
    let mut seen_event = false;

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let raw = line?;
        let line = raw.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if seen_event {
                return Err(IoError::HeaderAfterEvents { line: line_no });
            }
            let rest = rest.strip_prefix(' ').unwrap_or(rest);
            let (key, value) = rest
                .split_once('=')
                .ok_or_else(|| IoError::MalformedHeader { line: line_no, text: line.into() })?;
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(IoError::MalformedHeader { line: line_no, text: line.into() });
            }
            if headers.iter().any(|(k, _)| *k == key) {
                return Err(IoError::DuplicateHeader { line: line_no, key });
            }
            headers.push((key, value.to_string()));
            continue;
        }
        seen_event = true;
        let mut parts = line.split('\t');
        let (a, b, c) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), Some(c), None) => (a, b, c),
            _ => {
                let found = line.split('\t').count();
                return Err(IoError::WrongFieldCount { line: line_no, found });
            }
        };
        let trial: u64 =
            a.parse().map_err(|_| IoError::BadTrial { line: line_no, value: a.into() })?;
        let channel = DetectorChannel::from_label(b)
            .ok_or_else(|| IoError::BadChannel { line: line_no, value: b.into() })?;
        let time_ns: f64 =
            c.parse().map_err(|_| IoError::BadTime { line: line_no, value: c.into() })?;
        if !time_ns.is_finite() {
            return Err(IoError::BadTime { line: line_no, value: c.into() });
        }
        // Times are stored verbatim: validation checks tick alignment below.
        events.push(DetectionEvent { trial, channel, time_ns });
    }

    let mut take = |key: &'static str| -> Result<String, IoError> {
        let pos = headers
            .iter()
            .position(|(k, _)| k == key)
            .ok_or(IoError::MissingHeader { key })?;
        Ok(headers.remove(pos).1)
    };

    let version_raw = take("format_version")?;
    let version: u64 = version_raw.parse().map_err(|_| IoError::BadHeaderValue {
        line: 0,
        key: "format_version",
        value: version_raw.clone(),
        expected: "integer",
    })?;
    if version != FORMAT_VERSION {
        return Err(IoError::UnsupportedVersion { found: version });
    }
    let parse_u64 = |key: &'static str, v: String| -> Result<u64, IoError> {
        v.parse().map_err(|_| IoError::BadHeaderValue {
            line: 0,
            key,
            value: v,
            expected: "integer",
        })
    };
    let parse_f64 = |key: &'static str, v: String| -> Result<f64, IoError> {
        let x: f64 = v.parse().map_err(|_| IoError::BadHeaderValue {
            line: 0,
            key,
            value: v.clone(),
            expected: "number",
        })?;
        if !x.is_finite() {
            return Err(IoError::BadHeaderValue { line: 0, key, value: v, expected: "number" });
        }
        Ok(x)
    };

    let trial_count = parse_u64("trials", take("trials")?)?;
    let delta_t_ns = parse_f64("delta_t_ns", take("delta_t_ns")?)?;
    let write_duration_ns = parse_f64("write_duration_ns", take("write_duration_ns")?)?;
    let read_duration_ns = parse_f64("read_duration_ns", take("read_duration_ns")?)?;
    let window_ns = parse_f64("window_ns", take("window_ns")?)?;
    let axis = take("t2_axis")?;
    if axis != T2_AXIS_TAG {
        return Err(IoError::BadHeaderValue {
            line: 0,
            key: "t2_axis",
            value: axis,
            expected: T2_AXIS_TAG,
        });
    }

    let schedule = TrialSchedule {
        trial_count,
        delta_t_ns,
        write_duration_ns,
        read_duration_ns,
        window_ns,
    };

    headers.sort_by(|a, b| a.0.cmp(&b.0));
    let mut record = EventRecord { schedule, metadata: headers, events };
    let resorted = record.sort_events();
    record.validate()?;
    let event_count = record.events.len();
    Ok((record, ReadReport { resorted, event_count }))
}

pub fn read_record_file<P: AsRef<Path>>(path: P) -> Result<(EventRecord, ReadReport), IoError> {
    let file = File::open(path)?;
    read_record(file)
}
