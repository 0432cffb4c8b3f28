//! Encoding-cost calculator: model and data coding costs, the universal
//! integer code, and the per-window cost deltas that drive regime selection.
//!
//! All logarithms are base 2; every cost is a bit count.

use serde::{Deserialize, Serialize};

use crate::compressor::CompactDescription;
use crate::decomposer::ComponentMatrices;
use crate::tensor::WindowTensor;
use crate::{Error, Result};

/// Leading constant of the universal code for integers.
pub const RISSANEN_C0: f64 = 2.865064;

/// Universal code length for a positive integer:
/// `log2(c0) + log2(n) + log2(log2(n)) + ...`, summing terms while positive.
///
/// Non-positive input is clamped to 1 (degenerate counts during warm-up) and
/// warned about once per process.
pub fn log_star(n: u64) -> f64 {
    if n == 0 {
        warn_clamp_once();
    }
    let n = n.max(1);
    let mut bits = RISSANEN_C0.log2();
    let mut term = (n as f64).log2();
    while term > 0.0 {
        bits += term;
        term = term.log2();
    }
    bits
}

fn warn_clamp_once() {
    use std::sync::Once;
    static ONCE: Once = Once::new();
    ONCE.call_once(|| log::warn!("log_star received a non-positive count; clamping to 1"));
}

/// `log2(x)` for `x > 1`, else 0. Selector bits vanish when there is nothing
/// to select among.
pub fn log2_clamped(x: u64) -> f64 {
    if x > 1 {
        (x as f64).log2()
    } else {
        0.0
    }
}

/// Dimensions and code parameters a cost evaluation runs against. `dims` is
/// the vocabulary size per attribute at evaluation time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostContext {
    pub dims: Vec<usize>,
    pub tau: u32,
    pub k: usize,
    pub cf_bits: f64,
}

/// Total encoding cost split into its model and data parts.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    /// Bits to state the dimensionality (`sum_m log*(U_m) + log*(tau) + log*(K)`).
    pub dimension_bits: f64,
    /// `log*(R)`.
    pub regime_count_bits: f64,
    /// `log*(G)`.
    pub segment_count_bits: f64,
    /// Sum of per-regime model costs.
    pub regime_model_bits: f64,
    /// Sum of per-segment costs (`log*(t_s) + log2(R)` each).
    pub segment_bits: f64,
    pub model_bits: f64,
    pub data_bits: f64,
    pub total_bits: f64,
}

impl CostBreakdown {
    fn finish(mut self) -> Self {
        self.model_bits = self.dimension_bits
            + self.regime_count_bits
            + self.segment_count_bits
            + self.regime_model_bits
            + self.segment_bits;
        self.total_bits = self.model_bits + self.data_bits;
        self
    }
}

/// Bits to state the dimensionality of the latent space.
pub fn dimension_cost(ctx: &CostContext) -> f64 {
    let mut bits = log_star(ctx.tau as u64) + log_star(ctx.k as u64);
    for &u in &ctx.dims {
        bits += log_star(u as u64);
    }
    bits
}

/// Model coding cost of one regime.
///
/// Each attribute matrix pays `|A| * (log2(K) + log2(U_m - 1) + cF) + log*(|A|)`
/// and the time matrix `|B| * (log2(tau) + log2(K - 1) + cF) + log*(|B|)`,
/// where `|.|` counts cells with raw evidence count > 0 (clamped to 1 inside
/// `log*` only) and the `log2(x - 1)` selectors clamp to 0 for `x <= 1`.
pub fn model_cost_regime(theta: &ComponentMatrices, ctx: &CostContext) -> f64 {
    let mut bits = 0.0;
    for (m, counts) in theta.attr_counts.iter().enumerate() {
        let nnz = counts.count_nonzero();
        let per_cell =
            log2_clamped(ctx.k as u64) + log2_clamped(ctx.dims[m] as u64 - 1) + ctx.cf_bits;
        bits += nnz as f64 * per_cell + log_star(nnz.max(1));
    }
    let nnz_b = theta.time_counts.count_nonzero();
    let per_cell =
        log2_clamped(ctx.tau as u64) + log2_clamped(ctx.k as u64 - 1) + ctx.cf_bits;
    bits += nnz_b as f64 * per_cell + log_star(nnz_b.max(1));
    bits
}

/// Ideal code length of a window under a regime:
/// `-sum_cells count * log2( sum_k B[t][k] * prod_m A_m[k][u_m] )`.
///
/// Units unseen by the regime (past its stored width, or with zero evidence
/// and zero prior mass) take the smoothed floor
/// `alpha_m / (sum_u a_m[k][u] + L*alpha_m)`.
pub fn data_cost(window: &WindowTensor, theta: &ComponentMatrices) -> f64 {
    if window.is_empty() {
        return 0.0;
    }
    assert_eq!(window.width() as usize, theta.tau(), "window and regime tau differ");
    let k = theta.components();
    let floors = theta.attr_floors();
    let widths: Vec<usize> = (0..theta.attr_count()).map(|m| theta.attr_width(m)).collect();
    let mut bits = 0.0;
    for (cell, count) in window.cells() {
        let t = cell.t_local as usize;
        let mut p = 0.0f64;
        for kk in 0..k {
            let mut w = theta.time_probs.get(t, kk);
            for (m, &u) in cell.units.iter().enumerate() {
                let u = u as usize;
                let f = if u < widths[m] {
                    let stored = theta.attr_probs[m].get(kk, u);
                    if stored > 0.0 {
                        stored
                    } else {
                        floors[m][kk]
                    }
                } else {
                    floors[m][kk]
                };
                w *= f;
            }
            p += w;
        }
        bits += count as f64 * -p.log2();
    }
    bits
}

/// The three actions a compressor can take for a window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DeltaCase {
    Stay,
    ShiftExisting,
    NewRegime,
}

/// Segment position bits: shift ticks are stored zero-based and coded
/// one-based.
pub fn segment_position_bits(shift_tick: u64) -> f64 {
    log_star(shift_tick + 1)
}

/// Model-cost increase of shifting to an existing regime at `shift_tick`,
/// given `regimes` regimes and `segments` segments so far.
pub fn shift_overhead(regimes: usize, segments: usize, shift_tick: u64) -> f64 {
    (log_star(segments as u64 + 1) - log_star(segments as u64))
        + segment_position_bits(shift_tick)
        + log2_clamped(regimes as u64)
}

/// Model-cost increase of inserting `theta` as a new regime at `shift_tick`.
pub fn new_regime_overhead(
    theta: &ComponentMatrices,
    ctx: &CostContext,
    regimes: usize,
    segments: usize,
    shift_tick: u64,
) -> f64 {
    (log_star(regimes as u64 + 1) - log_star(regimes as u64))
        + model_cost_regime(theta, ctx)
        + (log_star(segments as u64 + 1) - log_star(segments as u64))
        + segment_position_bits(shift_tick)
        + log2_clamped(regimes as u64 + 1)
}

/// Additional encoding cost of describing `window` with `theta` under the
/// given action.
pub fn delta_cost(
    window: &WindowTensor,
    theta: &ComponentMatrices,
    case: DeltaCase,
    ctx: &CostContext,
    regimes: usize,
    segments: usize,
    shift_tick: u64,
) -> f64 {
    let data = data_cost(window, theta);
    match case {
        DeltaCase::Stay => data,
        DeltaCase::ShiftExisting => data + shift_overhead(regimes, segments, shift_tick),
        DeltaCase::NewRegime => {
            data + new_regime_overhead(theta, ctx, regimes, segments, shift_tick)
        }
    }
}

/// Total encoding cost of a description plus a set of windows, each paired
/// with the id of the regime encoding it.
pub fn total_cost(
    desc: &CompactDescription,
    ctx: &CostContext,
    windows: &[(u32, &WindowTensor)],
) -> Result<CostBreakdown> {
    let r = desc.regimes.len();
    let g = desc.segments.len();
    for s in &desc.segments {
        if desc.regime(s.regime).is_none() {
            return Err(Error::DanglingRegime(s.regime));
        }
    }
    let mut out = CostBreakdown {
        dimension_bits: dimension_cost(ctx),
        regime_count_bits: log_star(r as u64),
        segment_count_bits: log_star(g as u64),
        ..CostBreakdown::default()
    };
    for regime in &desc.regimes {
        out.regime_model_bits += model_cost_regime(&regime.matrices, ctx);
    }
    let selector = log2_clamped(r as u64);
    for s in &desc.segments {
        out.segment_bits += segment_position_bits(s.start_tick) + selector;
    }
    for &(rid, window) in windows {
        let regime = desc.regime(rid).ok_or(Error::DanglingRegime(rid))?;
        out.data_bits += data_cost(window, &regime.matrices);
    }
    Ok(out.finish())
}
