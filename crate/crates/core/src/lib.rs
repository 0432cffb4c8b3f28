//! Streaming summarization of sparse, time-stamped event tensor streams.
//!
//! An event stream with `M` categorical attributes is consumed in
//! non-overlapping windows of `tau` ticks. Each window is decomposed into `K`
//! latent components by collapsed Gibbs sampling with temporal Dirichlet
//! priors drawn from the last `L` component-matrix sets. A compressor then
//! decides, by encoding-cost deltas, whether the window stays in the active
//! regime, shifts to an existing regime, or opens a new one, and scores the
//! window's anomalousness by its compression cost under the dominant regime.
//!
//! The main entry point is [`engine::Engine`]; [`synthgen`] builds
//! ground-truth streams and [`evalkit`] holds the evaluation metrics.

pub mod compressor;
pub mod config;
pub mod decomposer;
pub mod engine;
pub mod evalkit;
pub mod io;
pub mod matrix;
pub mod mdl;
pub mod synthgen;
pub mod tensor;

pub use compressor::{Action, CompactDescription, Regime, Segment, WindowVerdict};
pub use config::StreamConfig;
pub use decomposer::{ComponentMatrices, PastQueue};
pub use engine::Engine;
pub use mdl::CostBreakdown;
pub use tensor::{EventRecord, Vocabulary, WindowTensor};

/// Errors shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("attribute index {index} out of range ({count} attributes)")]
    AttrOutOfRange { index: usize, count: usize },

    #[error("event tick {tick} outside window [{start}, {end})")]
    TickOutOfWindow { tick: u64, start: u64, end: u64 },

    #[error("unit index {unit} >= vocabulary size {size} for attribute {attr}")]
    UnitOutOfRange { attr: usize, unit: u32, size: usize },

    #[error("event has {got} attribute values, expected {expected}")]
    AttrCountMismatch { got: usize, expected: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("component count mismatch: {left} vs {right}")]
    ComponentMismatch { left: usize, right: usize },

    #[error("window out of order: expected start tick {expected}, got {got}")]
    OutOfOrderWindow { expected: u64, got: u64 },

    #[error("engine is still warming up")]
    NotInitialized,

    #[error("segment references unknown regime id {0}")]
    DanglingRegime(u32),

    #[error("description holds no regimes")]
    NoRegimes,

    #[error("warm-up stream does not span a full window")]
    WarmupTooShort,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("length mismatch: {left} predictions vs {right} labels")]
    LengthMismatch { left: usize, right: usize },

    #[error("degenerate labels: need at least one positive and one negative")]
    DegenerateLabels,

    #[error("malformed row {row}: {reason}")]
    MalformedRow { row: usize, reason: String },

    #[error("snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
