//! Data model for events, per-attribute vocabularies, and sparse windowed
//! count tensors.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Per-attribute bijection between label strings and dense unit indices.
///
/// Labels are append-only: once assigned, an index is never reused or
/// re-assigned, so vocabularies may grow while a stream is running.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Vocabulary {
    attrs: Vec<AttrVocab>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct AttrVocab {
    name: String,
    labels: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, u32>,
}

impl AttrVocab {
    fn rebuild_index(&mut self) {
        self.index = self
            .labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i as u32))
            .collect();
    }
}

impl Vocabulary {
    pub fn new(attr_names: Vec<String>) -> Self {
        let attrs = attr_names
            .into_iter()
            .map(|name| AttrVocab { name, labels: Vec::new(), index: HashMap::new() })
            .collect();
        Self { attrs }
    }

    /// Convenience constructor with names `attr0..attr{m-1}`.
    pub fn with_attr_count(m: usize) -> Self {
        Self::new((0..m).map(|i| format!("attr{i}")).collect())
    }

    /// Number of attributes `M`.
    pub fn attr_count(&self) -> usize {
        self.attrs.len()
    }

    pub fn attr_name(&self, attr: usize) -> Option<&str> {
        self.attrs.get(attr).map(|a| a.name.as_str())
    }

    /// Returns the existing index of `label` or appends it and returns the
    /// fresh index (the previous vocabulary size).
    pub fn encode(&mut self, attr: usize, label: &str) -> Result<u32> {
        let count = self.attrs.len();
        let a = self
            .attrs
            .get_mut(attr)
            .ok_or(Error::AttrOutOfRange { index: attr, count })?;
        if let Some(&idx) = a.index.get(label) {
            return Ok(idx);
        }
        let idx = a.labels.len() as u32;
        a.labels.push(label.to_string());
        a.index.insert(label.to_string(), idx);
        Ok(idx)
    }

    /// Label behind a unit index, if assigned.
    pub fn decode(&self, attr: usize, unit: u32) -> Option<&str> {
        self.attrs.get(attr)?.labels.get(unit as usize).map(|s| s.as_str())
    }

    /// Current `U_m` for one attribute.
    pub fn size(&self, attr: usize) -> usize {
        self.attrs.get(attr).map_or(0, |a| a.labels.len())
    }

    /// Current `U_1..U_M`.
    pub fn sizes(&self) -> Vec<usize> {
        self.attrs.iter().map(|a| a.labels.len()).collect()
    }

    /// Labels of one attribute in index order.
    pub fn labels(&self, attr: usize) -> &[String] {
        self.attrs.get(attr).map_or(&[], |a| a.labels.as_slice())
    }

    /// Restores the label -> index maps after deserialization.
    pub fn rebuild_indices(&mut self) {
        for a in &mut self.attrs {
            a.rebuild_index();
        }
    }
}

/// One time-stamped event: a tick, `M` unit indices, and a positive count.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventRecord {
    pub tick: u64,
    pub units: Vec<u32>,
    pub count: u64,
}

impl EventRecord {
    pub fn new(tick: u64, units: Vec<u32>, count: u64) -> Self {
        debug_assert!(count >= 1, "event count must be positive");
        Self { tick, units, count }
    }
}

/// Cell address inside a window: local tick plus one unit per attribute.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellKey {
    pub t_local: u32,
    pub units: Vec<u32>,
}

/// Sparse count tensor over `U_1 x .. x U_M x tau` for one window.
///
/// Only strictly positive cells are stored; duplicate appends merge by count
/// addition, so the stored state is independent of append order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowTensor {
    start_tick: u64,
    width: u32,
    cells: BTreeMap<CellKey, u64>,
    total: u64,
}

impl WindowTensor {
    pub fn new(start_tick: u64, width: u32) -> Self {
        assert!(width >= 1, "window width must be >= 1");
        Self { start_tick, width, cells: BTreeMap::new(), total: 0 }
    }

    pub fn start_tick(&self) -> u64 {
        self.start_tick
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn end_tick(&self) -> u64 {
        self.start_tick + self.width as u64
    }

    /// Adds an event's count to its cell. The tick must fall inside the
    /// half-open interval `[start, start + width)`.
    pub fn append(&mut self, event: &EventRecord) -> Result<()> {
        if event.tick < self.start_tick || event.tick >= self.end_tick() {
            return Err(Error::TickOutOfWindow {
                tick: event.tick,
                start: self.start_tick,
                end: self.end_tick(),
            });
        }
        let key = CellKey {
            t_local: (event.tick - self.start_tick) as u32,
            units: event.units.clone(),
        };
        *self.cells.entry(key).or_insert(0) += event.count;
        self.total += event.count;
        Ok(())
    }

    /// Total event count `N`.
    pub fn event_total(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    /// Cells in a canonical order (ascending local tick, then units).
    pub fn cells(&self) -> impl Iterator<Item = (&CellKey, u64)> {
        self.cells.iter().map(|(k, &v)| (k, v))
    }
}
