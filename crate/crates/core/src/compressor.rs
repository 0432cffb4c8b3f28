//! Regime selection and online updates: stay in the active regime, shift to
//! the cheapest existing regime, or insert the window's candidate as a new
//! regime, whichever adds the least encoding cost. Also scores each window's
//! anomalousness as its compression cost under the dominant ("norm") regime.

use serde::{Deserialize, Serialize};

use crate::decomposer::ComponentMatrices;
use crate::mdl::{self, CostContext};
use crate::tensor::WindowTensor;
use crate::{Error, Result};

/// One regime: its parameters plus bookkeeping for selection and scoring.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub id: u32,
    pub matrices: ComponentMatrices,
    /// Total assigned segment length in ticks (`tau` per assigned window).
    pub segment_ticks: u64,
    pub created_tick: u64,
}

/// A switch record: the stream moved to `regime` at `start_tick`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub start_tick: u64,
    pub regime: u32,
}

/// The running summary of the whole stream: regime set plus the segment
/// history. Regime ids are dense and creation-ordered, so they double as
/// indices into `regimes`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompactDescription {
    pub regimes: Vec<Regime>,
    pub segments: Vec<Segment>,
    /// Id of the currently active regime.
    pub previous: u32,
}

impl CompactDescription {
    pub fn regime(&self, id: u32) -> Option<&Regime> {
        self.regimes.get(id as usize).filter(|r| r.id == id)
    }

    pub fn regime_count(&self) -> usize {
        self.regimes.len()
    }

    pub fn segment_count(&self) -> usize {
        self.segments.len()
    }

    pub fn total_segment_ticks(&self) -> u64 {
        self.regimes.iter().map(|r| r.segment_ticks).sum()
    }

    /// The norm regime: maximal total segment length, ties to the lowest id.
    pub fn norm_regime(&self) -> Result<&Regime> {
        let mut best: Option<&Regime> = None;
        for r in &self.regimes {
            match best {
                Some(b) if r.segment_ticks <= b.segment_ticks => {}
                _ => best = Some(r),
            }
        }
        best.ok_or(Error::NoRegimes)
    }
}

/// Chosen action for one window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Action {
    Stay,
    ShiftExisting(u32),
    NewRegime(u32),
}

impl Action {
    pub fn regime_id(&self) -> u32 {
        match *self {
            Action::Stay => u32::MAX, // resolved by the caller to the active id
            Action::ShiftExisting(id) | Action::NewRegime(id) => id,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Action::Stay => "stay",
            Action::ShiftExisting(_) => "shift_existing",
            Action::NewRegime(_) => "new_regime",
        }
    }
}

/// Outcome of processing one window: the action, the candidate costs that
/// were evaluated, and the anomaly score. `cost_existing` stays unset when
/// the stay branch wins before the regime scan happens.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowVerdict {
    pub window_start: u64,
    pub action: Action,
    /// Id of the regime the window ended up in.
    pub regime_id: u32,
    pub cost_stay: f64,
    pub cost_existing: Option<f64>,
    pub cost_new: f64,
    pub score_bits: f64,
    pub score_bits_per_event: f64,
    pub n_events: u64,
}

/// What `select_and_update` changed; consumed by the engine's cost ledger.
#[derive(Clone, Debug, PartialEq)]
pub struct UpdateOutcome {
    /// Data bits paid for this window, at decision-time matrices.
    pub data_bits: f64,
    /// Regime whose matrices were touched (merged into or created).
    pub touched: u32,
    pub added_regime: bool,
    pub added_segment: Option<u64>,
}

/// Merges a candidate's evidence counts into an existing regime and
/// re-smooths:
/// `A[k][u] = (a[k][u] + prior[k][u] + c_a[k][u]) / (sum_u a + L*alpha + sum_u c_a)`.
/// The absorbed counts stay with the regime, so each merge weighs the
/// candidate less than the last.
pub fn regime_update(existing: &mut ComponentMatrices, candidate: &ComponentMatrices) -> Result<()> {
    if existing.components() != candidate.components() {
        return Err(Error::ComponentMismatch {
            left: existing.components(),
            right: candidate.components(),
        });
    }
    assert_eq!(existing.tau(), candidate.tau(), "regime tau mismatch");
    let dims: Vec<usize> = (0..existing.attr_count())
        .map(|m| existing.attr_width(m).max(candidate.attr_width(m)))
        .collect();
    existing.pad_to(&dims);
    for m in 0..existing.attr_count() {
        existing.attr_counts[m].add_assign(&candidate.attr_counts[m]);
    }
    existing.time_counts.add_assign(&candidate.time_counts);
    existing.event_total += candidate.event_total;
    existing.recompute_probs();
    Ok(())
}

/// Compression cost of a window under the norm regime, raw and per event.
pub fn anomaly_score(window: &WindowTensor, desc: &CompactDescription) -> Result<(f64, f64)> {
    let norm = desc.norm_regime()?;
    let raw = mdl::data_cost(window, &norm.matrices);
    let per_event = raw / window.event_total().max(1) as f64;
    Ok((raw, per_event))
}

/// Chooses the cheapest of stay / shift-existing / new-regime for the window,
/// applies it to the description, and reports the verdict.
///
/// Cost ties break toward fewer regimes: stay beats new, existing beats new.
/// The anomaly score is computed against the description as it stood before
/// this window's update.
pub fn select_and_update(
    desc: &mut CompactDescription,
    window: &WindowTensor,
    candidate: ComponentMatrices,
    ctx: &CostContext,
) -> Result<(WindowVerdict, UpdateOutcome)> {
    let (score_bits, score_per_event) = anomaly_score(window, desc)?;
    let r = desc.regimes.len();
    let g = desc.segments.len();
    let t_s = window.start_tick();
    let tau = window.width() as u64;

    let prev_id = desc.previous;
    let prev_idx = prev_id as usize;
    if prev_idx >= desc.regimes.len() {
        return Err(Error::DanglingRegime(prev_id));
    }

    let data_prev = mdl::data_cost(window, &desc.regimes[prev_idx].matrices);
    let cost_stay = data_prev;
    let data_cand = mdl::data_cost(window, &candidate);
    let cost_new = data_cand + mdl::new_regime_overhead(&candidate, ctx, r, g, t_s);

    let mut verdict = WindowVerdict {
        window_start: t_s,
        action: Action::Stay,
        regime_id: prev_id,
        cost_stay,
        cost_existing: None,
        cost_new,
        score_bits,
        score_bits_per_event: score_per_event,
        n_events: window.event_total(),
    };

    if cost_stay <= cost_new {
        regime_update(&mut desc.regimes[prev_idx].matrices, &candidate)?;
        desc.regimes[prev_idx].segment_ticks += tau;
        let outcome = UpdateOutcome {
            data_bits: data_prev,
            touched: prev_id,
            added_regime: false,
            added_segment: None,
        };
        return Ok((verdict, outcome));
    }

    // stay lost; scan the regime set for the cheapest shift target
    let shift_overhead = mdl::shift_overhead(r, g, t_s);
    let mut best_idx = 0usize;
    let mut best_data = f64::INFINITY;
    for (idx, regime) in desc.regimes.iter().enumerate() {
        let d = mdl::data_cost(window, &regime.matrices);
        if d < best_data {
            best_data = d;
            best_idx = idx;
        }
    }
    let cost_existing = best_data + shift_overhead;
    verdict.cost_existing = Some(cost_existing);

    if cost_new < cost_existing {
        let id = desc.regimes.len() as u32;
        desc.regimes.push(Regime {
            id,
            matrices: candidate,
            segment_ticks: tau,
            created_tick: t_s,
        });
        desc.segments.push(Segment { start_tick: t_s, regime: id });
        desc.previous = id;
        verdict.action = Action::NewRegime(id);
        verdict.regime_id = id;
        let outcome = UpdateOutcome {
            data_bits: data_cand,
            touched: id,
            added_regime: true,
            added_segment: Some(t_s),
        };
        Ok((verdict, outcome))
    } else {
        debug_assert_ne!(
            best_idx, prev_idx,
            "shifting to the active regime is never cheaper than staying"
        );
        let id = desc.regimes[best_idx].id;
        regime_update(&mut desc.regimes[best_idx].matrices, &candidate)?;
        desc.regimes[best_idx].segment_ticks += tau;
        desc.segments.push(Segment { start_tick: t_s, regime: id });
        desc.previous = id;
        verdict.action = Action::ShiftExisting(id);
        verdict.regime_id = id;
        let outcome = UpdateOutcome {
            data_bits: best_data,
            touched: id,
            added_regime: false,
            added_segment: Some(t_s),
        };
        Ok((verdict, outcome))
    }
}
