//! Event model: detector channels, time-stamped detection events, and the
//! per-run record that every simulation and analysis step exchanges.
//!
//! Time axis conventions (used everywhere in this crate):
//!
//! * Field-1 event times are nanoseconds from the start of the write pulse.
//! * Field-2 event times are stored *window-relative*, i.e. nanoseconds from
//!   the start of the field-2 detection window. The common axis used by the
//!   pair model is `stored_time + delta_t_ns`.
//! * All stored times are quantized to the 1 ps detector tick so a record
//!   round-trips through the text format bit-exactly.

use thiserror::Error;

/// Detector tick in nanoseconds (1 ps). Event times are integer multiples.
pub const TICK_NS: f64 = 1e-3;

/// Which field (mode) a detector pair watches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FieldId {
    /// Field 1: the heralding photon emitted during the write pulse.
    Field1,
    /// Field 2: the retrieved photon emitted during the read pulse.
    Field2,
}

impl FieldId {
    pub fn index(self) -> usize {
        match self {
            FieldId::Field1 => 0,
            FieldId::Field2 => 1,
        }
    }
}

/// Output port of the 50/50 beamsplitter in front of each field's detectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Arm {
    A,
    B,
}

/// One of the four physical detectors: 1A, 1B, 2A, 2B.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DetectorChannel {
    pub field: FieldId,
    pub arm: Arm,
}

impl DetectorChannel {
    pub const F1A: DetectorChannel = DetectorChannel { field: FieldId::Field1, arm: Arm::A };
    pub const F1B: DetectorChannel = DetectorChannel { field: FieldId::Field1, arm: Arm::B };
    pub const F2A: DetectorChannel = DetectorChannel { field: FieldId::Field2, arm: Arm::A };
    pub const F2B: DetectorChannel = DetectorChannel { field: FieldId::Field2, arm: Arm::B };

    /// All channels in canonical order (1A, 1B, 2A, 2B).
    pub const ALL: [DetectorChannel; 4] =
        [Self::F1A, Self::F1B, Self::F2A, Self::F2B];

    /// Canonical label used by the record format.
    pub fn label(self) -> &'static str {
        match (self.field, self.arm) {
            (FieldId::Field1, Arm::A) => "1A",
            (FieldId::Field1, Arm::B) => "1B",
            (FieldId::Field2, Arm::A) => "2A",
            (FieldId::Field2, Arm::B) => "2B",
        }
    }

    pub fn from_label(s: &str) -> Option<DetectorChannel> {
        match s {
            "1A" => Some(Self::F1A),
            "1B" => Some(Self::F1B),
            "2A" => Some(Self::F2A),
            "2B" => Some(Self::F2B),
            _ => None,
        }
    }
}

/// Round a time to the detector tick.
///
/// The canonical tick value is `round(t·1000)/1000`: dividing the integer
/// picosecond count by the exactly-representable 1000.0 yields the same
/// double that parsing the 3-decimal string gives, so quantized times
/// survive a write → read round trip bit-for-bit.
pub fn quantize_ns(t_ns: f64) -> f64 {
    (t_ns * 1000.0).round() / 1000.0
}

/// A single photodetection: trial index, channel, and quantized time stamp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionEvent {
    pub trial: u64,
    pub channel: DetectorChannel,
    /// Quantized time in ns; window-relative for field 2 (see module docs).
    pub time_ns: f64,
}

impl DetectionEvent {
    /// Build an event with the time snapped to the detector tick.
    pub fn new(trial: u64, channel: DetectorChannel, time_ns: f64) -> DetectionEvent {
        DetectionEvent { trial, channel, time_ns: quantize_ns(time_ns) }
    }

    /// Canonical ordering: (trial, field, time, arm).
    pub fn sort_key(&self) -> (u64, usize, f64, usize) {
        let arm = match self.channel.arm {
            Arm::A => 0,
            Arm::B => 1,
        };
        (self.trial, self.channel.field.index(), self.time_ns, arm)
    }
}

fn key_cmp(a: &DetectionEvent, b: &DetectionEvent) -> std::cmp::Ordering {
    let (at, af, ax, aa) = a.sort_key();
    let (bt, bf, bx, ba) = b.sort_key();
    at.cmp(&bt)
        .then(af.cmp(&bf))
        .then(ax.total_cmp(&bx))
        .then(aa.cmp(&ba))
}

/// Timing layout of one write/read trial, shared by all trials of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialSchedule {
    /// Number of trials in the run (may exceed the largest trial that
    /// produced an event: empty trials carry statistical weight).
    pub trial_count: u64,
    /// Storage interval: delay from write-pulse start to read-pulse start, ns.
    pub delta_t_ns: f64,
    /// Write pulse duration, ns.
    pub write_duration_ns: f64,
    /// Read pulse duration, ns.
    pub read_duration_ns: f64,
    /// Detection window length for each field, ns.
    pub window_ns: f64,
}

impl TrialSchedule {
    pub fn validate(&self) -> Result<(), RecordError> {
        let positive = [
            ("write_duration_ns", self.write_duration_ns),
            ("read_duration_ns", self.read_duration_ns),
            ("window_ns", self.window_ns),
        ];
        for (name, v) in positive {
            if !v.is_finite() || v <= 0.0 {
                return Err(RecordError::BadSchedule { field: name, value: v });
            }
        }
        if !self.delta_t_ns.is_finite() || self.delta_t_ns < 0.0 {
            return Err(RecordError::BadSchedule { field: "delta_t_ns", value: self.delta_t_ns });
        }
        if self.write_duration_ns > self.window_ns {
            return Err(RecordError::BadSchedule {
                field: "write_duration_ns",
                value: self.write_duration_ns,
            });
        }
        if self.read_duration_ns > self.window_ns {
            return Err(RecordError::BadSchedule {
                field: "read_duration_ns",
                value: self.read_duration_ns,
            });
        }
        Ok(())
    }

    /// Start of the field-2 window on the common time axis.
    pub fn field2_offset_ns(&self) -> f64 {
        self.delta_t_ns
    }
}

/// Everything a run produces: schedule, free-form metadata echoed from the
/// generating configuration, and the sorted event list.
#[derive(Debug, Clone, PartialEq)]
pub struct EventRecord {
    pub schedule: TrialSchedule,
    /// Key/value pairs carried through the file header (generator settings).
    /// Sorted by key; keys are unique.
    pub metadata: Vec<(String, String)>,
    pub events: Vec<DetectionEvent>,
}

#[derive(Debug, Error, PartialEq)]
pub enum RecordError {
    #[error("schedule field {field} has invalid value {value}")]
    BadSchedule { field: &'static str, value: f64 },
    #[error("event {index}: trial {trial} out of range (trial_count {trial_count})")]
    TrialOutOfRange { index: usize, trial: u64, trial_count: u64 },
    #[error("event {index}: time {time_ns} ns outside [0, {window_ns}) ns window")]
    TimeOutOfWindow { index: usize, time_ns: f64, window_ns: f64 },
    #[error("event {index}: time is not a multiple of the {TICK_NS} ns tick: {time_ns}")]
    UnquantizedTime { index: usize, time_ns: f64 },
    #[error("events not sorted by (trial, field, time) at index {index}")]
    Unsorted { index: usize },
}

impl EventRecord {
    /// Build a record, sorting events into canonical order and validating.
    pub fn new(
        schedule: TrialSchedule,
        metadata: Vec<(String, String)>,
        mut events: Vec<DetectionEvent>,
    ) -> Result<EventRecord, RecordError> {
        events.sort_unstable_by(key_cmp);
        let mut metadata = metadata;
        metadata.sort_by(|a, b| a.0.cmp(&b.0));
        let record = EventRecord { schedule, metadata, events };
        record.validate()?;
        Ok(record)
    }

    /// Check every structural invariant. Cheap: one pass over the events.
    pub fn validate(&self) -> Result<(), RecordError> {
        self.schedule.validate()?;
        let window = self.schedule.window_ns;
        let mut prev: Option<(u64, usize, f64)> = None;
        for (index, ev) in self.events.iter().enumerate() {
            if ev.trial >= self.schedule.trial_count {
                return Err(RecordError::TrialOutOfRange {
                    index,
                    trial: ev.trial,
                    trial_count: self.schedule.trial_count,
                });
            }
            let t = ev.time_ns;
            if !t.is_finite() || t < 0.0 || t >= window {
                return Err(RecordError::TimeOutOfWindow { index, time_ns: t, window_ns: window });
            }
            if quantize_ns(t) != t {
                return Err(RecordError::UnquantizedTime { index, time_ns: t });
            }
            let key = (ev.trial, ev.channel.field.index(), t);
            if let Some(p) = prev {
                if key < p {
                    return Err(RecordError::Unsorted { index });
                }
            }
            prev = Some(key);
        }
        Ok(())
    }

    /// Re-sort events into canonical order. Returns true if order changed.
    pub fn sort_events(&mut self) -> bool {
        let before: Vec<(u64, usize, f64)> = self
            .events
            .iter()
            .map(|e| (e.trial, e.channel.field.index(), e.time_ns))
            .collect();
        self.events.sort_by(key_cmp);
        let after: Vec<(u64, usize, f64)> =
            self.events.iter().map(|e| (e.trial, e.channel.field.index(), e.time_ns)).collect();
        before != after
    }

    /// Iterate events grouped by trial, in trial order. Requires sorted events.
    pub fn trials(&self) -> TrialGroups<'_> {
        TrialGroups { events: &self.events, pos: 0 }
    }
}

/// Iterator over `(trial_index, events_of_that_trial)` slices.
pub struct TrialGroups<'a> {
    events: &'a [DetectionEvent],
    pos: usize,
}

impl<'a> Iterator for TrialGroups<'a> {
    type Item = (u64, &'a [DetectionEvent]);

    fn next(&mut self) -> Option<Self::Item> {
        if self.pos >= self.events.len() {
            return None;
        }
        let start = self.pos;
        let trial = self.events[start].trial;
        let mut end = start + 1;
        while end < self.events.len() && self.events[end].trial == trial {
            end += 1;
        }
        self.pos = end;
        Some((trial, &self.events[start..end]))
    }
}
