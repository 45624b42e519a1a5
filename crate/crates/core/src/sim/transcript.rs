//! The public-space record.
//!
//! A [`Transcript`] is the only thing an adversary ever sees. Measurements can
//! only enter it as a [`PublicMeasurement`], which the channel module alone
//! can mint, so a party's private contribution has no path into the record.

use std::hash::Hasher;

use fnv::FnvHasher;
use serde::Serialize;

use crate::channel::PublicMeasurement;

/// Digest of an empty transcript (the FNV-1a 64-bit offset basis).
pub const EMPTY_DIGEST: u64 = 0xcbf2_9ce4_8422_2325;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TranscriptEntry {
    Measurement(f64),
    Announcement(String),
    Mark(String),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Transcript {
    entries: Vec<(u64, TranscriptEntry)>,
    #[serde(skip)]
    measurement_index: Vec<usize>,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record_measurement(&mut self, tick: u64, measurement: PublicMeasurement) {
        self.measurement_index.push(self.entries.len());
        self.push(tick, TranscriptEntry::Measurement(measurement.value()));
    }

    pub fn announce(&mut self, tick: u64, tag: impl Into<String>) {
        self.push(tick, TranscriptEntry::Announcement(tag.into()));
    }

    pub fn mark(&mut self, tick: u64, label: impl Into<String>) {
        self.push(tick, TranscriptEntry::Mark(label.into()));
    }

    fn push(&mut self, tick: u64, entry: TranscriptEntry) {
        if let Some((last, _)) = self.entries.last() {
            assert!(
                tick >= *last,
                "transcript is append-only in time: tick {tick} after {last}"
            );
        }
        self.entries.push((tick, entry));
    }

    pub fn entries(&self) -> &[(u64, TranscriptEntry)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn last_tick(&self) -> Option<u64> {
        self.entries.last().map(|(t, _)| *t)
    }

    pub fn measurement_count(&self) -> usize {
        self.measurement_index.len()
    }

    /// All measurements in order, with their ticks.
    pub fn measurements(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.measurement_index
            .iter()
            .map(|&i| match &self.entries[i] {
                (t, TranscriptEntry::Measurement(v)) => (*t, *v),
                _ => unreachable!("measurement index points at a non-measurement"),
            })
    }

    pub fn measurement_values(&self) -> Vec<f64> {
        self.measurements().map(|(_, v)| v).collect()
    }

    /// The last `k` measurement values (fewer if the record is shorter).
    pub fn last_measurements(&self, k: usize) -> Vec<f64> {
        let start = self.measurement_index.len().saturating_sub(k);
        self.measurement_index[start..]
            .iter()
            .map(|&i| match &self.entries[i].1 {
                TranscriptEntry::Measurement(v) => *v,
                _ => unreachable!(),
            })
            .collect()
    }

    /// Tick of the first announcement carrying `tag`.
    pub fn announcement_tick(&self, tag: &str) -> Option<u64> {
        self.entries.iter().find_map(|(t, e)| match e {
            TranscriptEntry::Announcement(a) if a == tag => Some(*t),
            _ => None,
        })
    }

    pub fn marks(&self) -> impl Iterator<Item = (u64, &str)> + '_ {
        self.entries.iter().filter_map(|(t, e)| match e {
            TranscriptEntry::Mark(m) => Some((*t, m.as_str())),
            _ => None,
        })
    }
}

/// FNV-1a over a canonical little-endian encoding of every entry.
pub fn replay_digest(transcript: &Transcript) -> u64 {
    let mut h = FnvHasher::default();
    for (tick, entry) in transcript.entries() {
        h.write(&tick.to_le_bytes());
        match entry {
            TranscriptEntry::Measurement(v) => {
                h.write(&[0]);
                h.write(&v.to_bits().to_le_bytes());
            }
            TranscriptEntry::Announcement(s) => {
                h.write(&[1]);
                h.write(&(s.len() as u64).to_le_bytes());
                h.write(s.as_bytes());
            }
            TranscriptEntry::Mark(s) => {
                h.write(&[2]);
                h.write(&(s.len() as u64).to_le_bytes());
                h.write(s.as_bytes());
            }
        }
    }
    h.finish()
}
