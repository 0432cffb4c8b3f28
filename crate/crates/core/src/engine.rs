//! Streaming orchestration: per-window decompose + compress, warm-up model
//! initialization, and snapshot/restore.
//!
//! Memory is bounded by the queue, the regime set, and one window
//! accumulator; nothing retained grows with the number of processed windows
//! except the segment history itself.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::compressor::{self, CompactDescription, Regime, Segment, WindowVerdict};
use crate::config::{ResolvedConfig, StreamConfig};
use crate::decomposer::{self, ComponentMatrices, PastQueue};
use crate::mdl::{self, CostBreakdown, CostContext};
use crate::tensor::{EventRecord, Vocabulary, WindowTensor};
use crate::{Error, Result};

const SNAPSHOT_MAGIC: &str = "tenstream.snapshot";
const SNAPSHOT_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
enum Phase {
    Warmup { events: Vec<EventRecord> },
    Running(Box<RunState>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct RunState {
    l: usize,
    queue: PastQueue,
    desc: CompactDescription,
    window: WindowTensor,
    windows_done: u64,
    rng: ChaCha8Rng,
    /// Sum of per-window data bits, each paid against the chosen regime's
    /// matrices at decision time.
    data_bits_paid: f64,
    late_events: u64,
}

/// One engine per stream. Events are pushed in tick order; completed windows
/// are decomposed and folded into the compact description, emitting one
/// verdict each. The whole run is a pure function of (events, config, seed).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Engine {
    cfg: ResolvedConfig,
    vocab: Vocabulary,
    phase: Phase,
}

#[derive(Serialize, Deserialize)]
struct SnapshotDoc {
    magic: String,
    version: u32,
    engine: Engine,
}

impl Engine {
    /// A fresh engine in warm-up mode for a stream with the given attribute
    /// names.
    pub fn new(config: StreamConfig, attr_names: Vec<String>) -> Result<Self> {
        let cfg = config.resolve(attr_names.len())?;
        Ok(Self {
            cfg,
            vocab: Vocabulary::new(attr_names),
            phase: Phase::Warmup { events: Vec::new() },
        })
    }

    /// Builds a running engine directly from a warm-up batch.
    ///
    /// The batch is partitioned into `init_windows` sample windows (fewer if
    /// it is shorter), each is decomposed against cold-start uniform priors,
    /// and a regime set is grown greedily while the total encoding cost keeps
    /// dropping. The queue length `L` is then set to the average same-regime
    /// run length unless configured explicitly, and the queue is seeded with
    /// `L` copies of the last assigned regime's matrices.
    pub fn initialize(
        events: &[EventRecord],
        vocab: Vocabulary,
        config: StreamConfig,
    ) -> Result<Self> {
        let cfg = config.resolve(vocab.attr_count())?;
        let mut engine = Self { cfg, vocab, phase: Phase::Warmup { events: Vec::new() } };
        for e in events {
            engine.validate_event(e)?;
        }
        let max_tick = events.iter().map(|e| e.tick).max().ok_or(Error::WarmupTooShort)?;
        let covered = max_tick / engine.cfg.tau as u64 + 1;
        let n_windows = covered.min(engine.cfg.init_windows as u64);
        let state = build_initial_state(events, &engine.vocab, &engine.cfg, n_windows)?;
        engine.phase = Phase::Running(Box::new(state));
        Ok(engine)
    }

    pub fn config(&self) -> &ResolvedConfig {
        &self.cfg
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn is_running(&self) -> bool {
        matches!(self.phase, Phase::Running(_))
    }

    pub fn cost_context(&self) -> CostContext {
        CostContext {
            dims: self.vocab.sizes(),
            tau: self.cfg.tau,
            k: self.cfg.k,
            cf_bits: self.cfg.cf_bits,
        }
    }

    fn running_ref(&self) -> Result<&RunState> {
        match &self.phase {
            Phase::Running(rs) => Ok(rs),
            Phase::Warmup { .. } => Err(Error::NotInitialized),
        }
    }

    pub fn description(&self) -> Result<&CompactDescription> {
        Ok(&self.running_ref()?.desc)
    }

    /// Queue length in effect (after warm-up estimation).
    pub fn queue_len(&self) -> Result<usize> {
        Ok(self.running_ref()?.l)
    }

    pub fn windows_done(&self) -> Result<u64> {
        Ok(self.running_ref()?.windows_done)
    }

    pub fn late_events(&self) -> u64 {
        match &self.phase {
            Phase::Running(rs) => rs.late_events,
            Phase::Warmup { .. } => 0,
        }
    }

    /// The incrementally accumulated total encoding cost: data bits are
    /// summed as paid per window; the model side is the closed-form cost of
    /// the current description.
    pub fn accumulated_cost(&self) -> Result<CostBreakdown> {
        let rs = self.running_ref()?;
        let ctx = self.cost_context();
        let mut b = mdl::total_cost(&rs.desc, &ctx, &[])?;
        b.data_bits = rs.data_bits_paid;
        b.total_bits = b.model_bits + b.data_bits;
        Ok(b)
    }

    fn validate_event(&self, event: &EventRecord) -> Result<()> {
        if event.units.len() != self.vocab.attr_count() {
            return Err(Error::AttrCountMismatch {
                got: event.units.len(),
                expected: self.vocab.attr_count(),
            });
        }
        if event.count == 0 {
            return Err(Error::Config("event count must be positive".into()));
        }
        for (m, &u) in event.units.iter().enumerate() {
            if u as usize >= self.vocab.size(m) {
                return Err(Error::UnitOutOfRange { attr: m, unit: u, size: self.vocab.size(m) });
            }
        }
        Ok(())
    }

    /// Encodes labels through the vocabulary (growing it as needed) and
    /// pushes the event.
    pub fn ingest(&mut self, tick: u64, labels: &[&str], count: u64) -> Result<Vec<WindowVerdict>> {
        if labels.len() != self.vocab.attr_count() {
            return Err(Error::AttrCountMismatch {
                got: labels.len(),
                expected: self.vocab.attr_count(),
            });
        }
        let mut units = Vec::with_capacity(labels.len());
        for (m, label) in labels.iter().enumerate() {
            units.push(self.vocab.encode(m, label)?);
        }
        self.push_event(EventRecord::new(tick, units, count))
    }

    /// Pushes one pre-encoded event. Returns the verdicts of any windows this
    /// event sealed. Events older than the current window are dropped and
    /// counted in `late_events`.
    pub fn push_event(&mut self, event: EventRecord) -> Result<Vec<WindowVerdict>> {
        self.validate_event(&event)?;
        let mut verdicts = Vec::new();
        if matches!(self.phase, Phase::Warmup { .. }) {
            let warmup_ticks = self.cfg.init_windows as u64 * self.cfg.tau as u64;
            if event.tick < warmup_ticks {
                let Phase::Warmup { events } = &mut self.phase else { unreachable!() };
                events.push(event);
                return Ok(verdicts);
            }
            self.promote_from_warmup()?;
        }
        loop {
            let (start, end) = {
                let rs = self.running_ref()?;
                (rs.window.start_tick(), rs.window.end_tick())
            };
            if event.tick < start {
                let Phase::Running(rs) = &mut self.phase else { unreachable!() };
                rs.late_events += 1;
                return Ok(verdicts);
            }
            if event.tick < end {
                let Phase::Running(rs) = &mut self.phase else { unreachable!() };
                rs.window.append(&event)?;
                return Ok(verdicts);
            }
            verdicts.push(self.seal_current_window()?);
        }
    }

    /// Ends the stream: runs warm-up initialization if still pending and
    /// processes the final partial window when it holds events.
    pub fn finish(&mut self) -> Result<Vec<WindowVerdict>> {
        if matches!(self.phase, Phase::Warmup { .. }) {
            self.promote_from_warmup()?;
        }
        let mut verdicts = Vec::new();
        if !self.running_ref()?.window.is_empty() {
            verdicts.push(self.seal_current_window()?);
        }
        Ok(verdicts)
    }

    fn promote_from_warmup(&mut self) -> Result<()> {
        let Phase::Warmup { events } = &mut self.phase else { return Ok(()) };
        let events = std::mem::take(events);
        let max_tick = events.iter().map(|e| e.tick).max().ok_or(Error::WarmupTooShort)?;
        let covered = max_tick / self.cfg.tau as u64 + 1;
        let n_windows = covered.min(self.cfg.init_windows as u64);
        let state = build_initial_state(&events, &self.vocab, &self.cfg, n_windows)?;
        self.phase = Phase::Running(Box::new(state));
        Ok(())
    }

    fn seal_current_window(&mut self) -> Result<WindowVerdict> {
        let tau = self.cfg.tau;
        let full = {
            let Phase::Running(rs) = &mut self.phase else { return Err(Error::NotInitialized) };
            let next = rs.window.end_tick();
            std::mem::replace(&mut rs.window, WindowTensor::new(next, tau))
        };
        self.process_sealed(full)
    }

    /// Processes the next tau-aligned window: decompose, select-and-update,
    /// verdict. The internal accumulator must be empty and aligned with
    /// `window`.
    pub fn process_window(&mut self, window: WindowTensor) -> Result<WindowVerdict> {
        let tau = self.cfg.tau;
        {
            let rs = self.running_ref()?;
            if !rs.window.is_empty() {
                return Err(Error::Config(
                    "current window accumulator is not empty; push-based and \
                     window-based feeding cannot be mixed mid-window"
                        .into(),
                ));
            }
            if window.start_tick() != rs.window.start_tick() {
                return Err(Error::OutOfOrderWindow {
                    expected: rs.window.start_tick(),
                    got: window.start_tick(),
                });
            }
            if window.width() != tau {
                return Err(Error::Config(format!(
                    "window width {} does not match tau {tau}",
                    window.width()
                )));
            }
        }
        {
            let Phase::Running(rs) = &mut self.phase else { unreachable!() };
            let next = window.end_tick();
            rs.window = WindowTensor::new(next, tau);
        }
        self.process_sealed(window)
    }

    fn process_sealed(&mut self, window: WindowTensor) -> Result<WindowVerdict> {
        let dims = self.vocab.sizes();
        let ctx = CostContext {
            dims: dims.clone(),
            tau: self.cfg.tau,
            k: self.cfg.k,
            cf_bits: self.cfg.cf_bits,
        };
        let Phase::Running(rs) = &mut self.phase else { return Err(Error::NotInitialized) };
        debug_assert_eq!(window.start_tick(), rs.windows_done * self.cfg.tau as u64);
        let candidate = decomposer::decompose(&window, &dims, &mut rs.queue, &self.cfg, &mut rs.rng);
        let (verdict, outcome) = compressor::select_and_update(&mut rs.desc, &window, candidate, &ctx)?;
        rs.data_bits_paid += outcome.data_bits;
        rs.windows_done += 1;
        Ok(verdict)
    }

    /// Serializes the full engine state into a self-describing container.
    pub fn snapshot(&self) -> Result<Vec<u8>> {
        let doc = SnapshotDoc {
            magic: SNAPSHOT_MAGIC.to_string(),
            version: SNAPSHOT_VERSION,
            engine: self.clone(),
        };
        serde_json::to_vec(&doc).map_err(|e| Error::Snapshot(e.to_string()))
    }

    /// Restores an engine from a snapshot. The restored engine behaves
    /// identically to the original on any subsequent event sequence.
    pub fn restore(bytes: &[u8]) -> Result<Self> {
        let doc: SnapshotDoc =
            serde_json::from_slice(bytes).map_err(|e| Error::Snapshot(e.to_string()))?;
        if doc.magic != SNAPSHOT_MAGIC {
            return Err(Error::Snapshot(format!("bad magic {:?}", doc.magic)));
        }
        if doc.version != SNAPSHOT_VERSION {
            return Err(Error::Snapshot(format!(
                "unsupported version {} (expected {SNAPSHOT_VERSION})",
                doc.version
            )));
        }
        let mut engine = doc.engine;
        engine.vocab.rebuild_indices();
        Ok(engine)
    }
}

/// Greedy warm-up initialization over `n_windows` sample windows.
fn build_initial_state(
    events: &[EventRecord],
    vocab: &Vocabulary,
    cfg: &ResolvedConfig,
    n_windows: u64,
) -> Result<RunState> {
    debug_assert!(n_windows >= 1);
    let tau = cfg.tau as u64;
    let mut windows: Vec<WindowTensor> = (0..n_windows)
        .map(|w| WindowTensor::new(w * tau, cfg.tau))
        .collect();
    for e in events {
        let w = e.tick / tau;
        let idx = usize::try_from(w).expect("warm-up window index");
        if idx >= windows.len() {
            return Err(Error::TickOutOfWindow {
                tick: e.tick,
                start: 0,
                end: n_windows * tau,
            });
        }
        windows[idx].append(e)?;
    }

    let dims = vocab.sizes();
    let ctx = CostContext { dims: dims.clone(), tau: cfg.tau, k: cfg.k, cf_bits: cfg.cf_bits };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let cold_l = cfg.explicit_l.unwrap_or(1);

    // one candidate per sample window, each against cold-start uniform priors
    let candidates: Vec<ComponentMatrices> = windows
        .iter()
        .map(|w| {
            let mut queue = PastQueue::uniform(&dims, cfg.tau, cfg.k, cold_l, &cfg.alpha, cfg.beta);
            decomposer::decompose(w, &dims, &mut queue, cfg, &mut rng)
        })
        .collect();

    // grow the regime set while the total encoding cost keeps dropping
    let mut selected: Vec<usize> = Vec::new();
    let mut best_total = f64::INFINITY;
    loop {
        let mut best_add: Option<(usize, f64)> = None;
        for c in 0..candidates.len() {
            if selected.contains(&c) {
                continue;
            }
            let mut trial = selected.clone();
            trial.push(c);
            let (total, _) = eval_regime_set(&trial, &candidates, &windows, &ctx)?;
            if best_add.map_or(true, |(_, t)| total < t) {
                best_add = Some((c, total));
            }
        }
        match best_add {
            Some((c, total)) if total < best_total => {
                selected.push(c);
                best_total = total;
            }
            _ => break,
        }
    }
    debug_assert!(!selected.is_empty());

    let (_, assignment) = eval_regime_set(&selected, &candidates, &windows, &ctx)?;

    // segments = maximal runs of equal assignment
    let mut segments: Vec<Segment> = Vec::new();
    let mut runs = 0usize;
    for (w, &r) in assignment.iter().enumerate() {
        if segments.last().map(|s| s.regime) != Some(r as u32) {
            segments.push(Segment { start_tick: w as u64 * tau, regime: r as u32 });
            runs += 1;
        }
    }

    let mut regimes: Vec<Regime> = selected
        .iter()
        .enumerate()
        .map(|(id, &c)| Regime {
            id: id as u32,
            matrices: candidates[c].clone(),
            segment_ticks: 0,
            created_tick: 0,
        })
        .collect();
    for (w, &r) in assignment.iter().enumerate() {
        regimes[r].segment_ticks += tau;
        regimes[r].created_tick = regimes[r].created_tick.min(w as u64 * tau);
    }

    let previous = *assignment.last().expect("at least one warm-up window") as u32;
    let desc = CompactDescription { regimes, segments, previous };

    // paid data bits for the warm-up windows, against the frozen matrices
    let windows_with_ids: Vec<(u32, &WindowTensor)> = assignment
        .iter()
        .zip(&windows)
        .map(|(&r, w)| (r as u32, w))
        .collect();
    let data_bits_paid = mdl::total_cost(&desc, &ctx, &windows_with_ids)?.data_bits;

    let l = match cfg.explicit_l {
        Some(l) => l,
        None => ((n_windows as f64 / runs as f64).round() as usize).max(1),
    };
    let last_matrices = desc.regimes[previous as usize].matrices.clone();
    let queue = PastQueue::filled_with(last_matrices, l);

    Ok(RunState {
        l,
        queue,
        desc,
        window: WindowTensor::new(n_windows * tau, cfg.tau),
        windows_done: n_windows,
        rng,
        data_bits_paid,
        late_events: 0,
    })
}

/// Cost of describing the sample windows with the given candidate subset;
/// every window goes to its cheapest regime, ties to the lowest index.
fn eval_regime_set(
    subset: &[usize],
    candidates: &[ComponentMatrices],
    windows: &[WindowTensor],
    ctx: &CostContext,
) -> Result<(f64, Vec<usize>)> {
    let tau = ctx.tau as u64;
    let mut assignment = Vec::with_capacity(windows.len());
    for w in windows {
        let mut best = 0usize;
        let mut best_cost = f64::INFINITY;
        for (idx, &c) in subset.iter().enumerate() {
            let cost = mdl::data_cost(w, &candidates[c]);
            if cost < best_cost {
                best_cost = cost;
                best = idx;
            }
        }
        assignment.push(best);
    }
    let mut segments: Vec<Segment> = Vec::new();
    for (w, &r) in assignment.iter().enumerate() {
        if segments.last().map(|s| s.regime) != Some(r as u32) {
            segments.push(Segment { start_tick: w as u64 * tau, regime: r as u32 });
        }
    }
    let regimes: Vec<Regime> = subset
        .iter()
        .enumerate()
        .map(|(id, &c)| Regime {
            id: id as u32,
            matrices: candidates[c].clone(),
            segment_ticks: 0,
            created_tick: 0,
        })
        .collect();
    let previous = *assignment.last().unwrap_or(&0) as u32;
    let desc = CompactDescription { regimes, segments, previous };
    let pairs: Vec<(u32, &WindowTensor)> = assignment
        .iter()
        .zip(windows)
        .map(|(&r, w)| (r as u32, w))
        .collect();
    let total = mdl::total_cost(&desc, ctx, &pairs)?.total_bits;
    Ok((total, assignment))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthgen::{self, GeneratorSpec};

    fn drive(engine: &mut Engine, events: &[EventRecord]) -> Vec<WindowVerdict> {
        let mut verdicts = Vec::new();
        for e in events {
            let labels: Vec<String> = e.units.iter().map(|u| u.to_string()).collect();
            let refs: Vec<&str> = labels.iter().map(|s| s.as_str()).collect();
            verdicts.extend(engine.ingest(e.tick, &refs, e.count).unwrap());
        }
        verdicts.extend(engine.finish().unwrap());
        verdicts
    }

    fn single_gen_events(windows: u64, tau: u32, per_window: u64, seed: u64) -> Vec<EventRecord> {
        let spec = GeneratorSpec {
            dims: vec![12, 12],
            pattern: vec![1],
            events: windows * per_window,
            ticks_per_phase: windows * tau as u64,
            seed,
            anomaly: None,
        };
        synthgen::gen_stream(&spec).unwrap().0
    }

    #[test]
    fn warmup_single_generator_yields_one_regime_and_l_equals_windows() {
        let mut cfg = StreamConfig::new(5, 4);
        cfg.init_windows = 5;
        cfg.seed = 3;
        let events = single_gen_events(5, 5, 400, 10);
        let mut engine = Engine::new(cfg, vec!["a".into(), "b".into()]).unwrap();
        drive(&mut engine, &events);
        assert!(engine.is_running());
        assert_eq!(engine.description().unwrap().regime_count(), 1);
        assert_eq!(engine.queue_len().unwrap(), 5);
        assert_eq!(engine.description().unwrap().segment_count(), 1);
    }

    #[test]
    fn warmup_alternating_generators_yield_two_regimes_and_l_one() {
        // windows alternate between two disjoint unit blocks
        let tau = 5u32;
        let mut events = Vec::new();
        let mut rng = <ChaCha8Rng as SeedableRng>::seed_from_u64(1);
        use rand::Rng;
        for w in 0..4u64 {
            let base = if w % 2 == 0 { 0 } else { 10 };
            for _ in 0..400 {
                let tick = w * tau as u64 + rng.random_range(0..tau as u64);
                let u = base + rng.random_range(0..10u32);
                events.push(EventRecord::new(tick, vec![u], 1));
            }
        }
        events.sort_by_key(|e| e.tick);
        let mut cfg = StreamConfig::new(tau, 4);
        cfg.init_windows = 4;
        let mut vocab = Vocabulary::with_attr_count(1);
        for e in &events {
            vocab.encode(0, &e.units[0].to_string()).unwrap();
        }
        // map labels through the vocab so unit ids stay dense
        let encoded: Vec<EventRecord> = events
            .iter()
            .map(|e| {
                EventRecord::new(
                    e.tick,
                    vec![vocab.encode(0, &e.units[0].to_string()).unwrap()],
                    e.count,
                )
            })
            .collect();
        let engine = Engine::initialize(&encoded, vocab, cfg).unwrap();
        assert_eq!(engine.description().unwrap().regime_count(), 2);
        assert_eq!(engine.queue_len().unwrap(), 1);
        assert_eq!(engine.description().unwrap().segment_count(), 4);
    }

    #[test]
    fn explicit_l_overrides_estimate() {
        let mut cfg = StreamConfig::new(5, 4);
        cfg.init_windows = 5;
        cfg.l = Some(3);
        let events = single_gen_events(5, 5, 300, 11);
        let mut engine = Engine::new(cfg, vec!["a".into(), "b".into()]).unwrap();
        drive(&mut engine, &events);
        assert_eq!(engine.queue_len().unwrap(), 3);
    }

    #[test]
    fn homogeneous_stream_keeps_one_regime_one_segment() {
        let mut cfg = StreamConfig::new(5, 4);
        cfg.init_windows = 3;
        cfg.seed = 7;
        let events = single_gen_events(12, 5, 350, 21);
        let mut engine = Engine::new(cfg, vec!["a".into(), "b".into()]).unwrap();
        let verdicts = drive(&mut engine, &events);
        let desc = engine.description().unwrap();
        assert_eq!(desc.regime_count(), 1);
        assert_eq!(desc.segment_count(), 1);
        assert_eq!(engine.windows_done().unwrap(), 12);
        assert_eq!(verdicts.len(), 9); // 12 windows minus 3 warm-up
        assert!(verdicts.iter().all(|v| v.action == crate::compressor::Action::Stay));
        // total assigned ticks = tau * windows
        assert_eq!(desc.total_segment_ticks(), 5 * 12);
    }

    #[test]
    fn empty_windows_advance_time_without_segments() {
        let mut cfg = StreamConfig::new(4, 2);
        cfg.init_windows = 2;
        let mut events = single_gen_events(2, 4, 200, 5);
        // a gap: next events only in window 5
        let mut tail = single_gen_events(1, 4, 120, 6);
        for e in &mut tail {
            e.tick += 5 * 4;
        }
        events.extend(tail);
        let mut engine = Engine::new(cfg, vec!["a".into(), "b".into()]).unwrap();
        let verdicts = drive(&mut engine, &events);
        assert_eq!(engine.windows_done().unwrap(), 6);
        let empties: Vec<_> = verdicts.iter().filter(|v| v.n_events == 0).collect();
        assert_eq!(empties.len(), 3);
        for v in empties {
            assert_eq!(v.action, crate::compressor::Action::Stay);
            assert_eq!(v.cost_stay, 0.0);
            assert_eq!(v.score_bits, 0.0);
        }
        assert_eq!(engine.description().unwrap().segment_count(), 1);
        assert_eq!(engine.description().unwrap().total_segment_ticks(), 4 * 6);
    }

    #[test]
    fn late_events_are_dropped_and_counted() {
        let mut cfg = StreamConfig::new(4, 2);
        cfg.init_windows = 2;
        let events = single_gen_events(4, 4, 150, 9);
        let mut engine = Engine::new(cfg, vec!["a".into(), "b".into()]).unwrap();
        drive(&mut engine, &events);
        let n = engine.late_events();
        engine.ingest(0, &["0", "0"], 1).unwrap();
        assert_eq!(engine.late_events(), n + 1);
    }

    #[test]
    fn process_window_rejects_out_of_order() {
        let mut cfg = StreamConfig::new(4, 2);
        cfg.init_windows = 2;
        let events = single_gen_events(2, 4, 150, 13);
        let mut vocab = Vocabulary::with_attr_count(2);
        let encoded: Vec<EventRecord> = events
            .iter()
            .map(|e| {
                let units = e
                    .units
                    .iter()
                    .enumerate()
                    .map(|(m, u)| vocab.encode(m, &u.to_string()).unwrap())
                    .collect();
                EventRecord::new(e.tick, units, e.count)
            })
            .collect();
        let mut engine = Engine::initialize(&encoded, vocab, cfg).unwrap();
        let wrong = WindowTensor::new(0, 4); // expected start is 8
        assert!(matches!(
            engine.process_window(wrong),
            Err(Error::OutOfOrderWindow { expected: 8, got: 0 })
        ));
        let right = WindowTensor::new(8, 4);
        engine.process_window(right).unwrap();
        assert_eq!(engine.windows_done().unwrap(), 3);
    }

    #[test]
    fn snapshot_restore_resumes_identically() {
        let mut cfg = StreamConfig::new(5, 3);
        cfg.init_windows = 2;
        cfg.seed = 40;
        let events = single_gen_events(10, 5, 250, 31);
        let cut = events.iter().position(|e| e.tick >= 30).unwrap();

        let mut a = Engine::new(cfg.clone(), vec!["a".into(), "b".into()]).unwrap();
        let mut verdicts_a = drive_partial(&mut a, &events[..cut]);
        let bytes = a.snapshot().unwrap();
        let mut b = Engine::restore(&bytes).unwrap();
        verdicts_a.extend(drive_partial(&mut a, &events[cut..]));
        verdicts_a.extend(a.finish().unwrap());

        let mut verdicts_b = drive_partial(&mut b, &events[cut..]);
        verdicts_b.extend(b.finish().unwrap());

        let mut full = Engine::new(cfg, vec!["a".into(), "b".into()]).unwrap();
        let verdicts_full = drive(&mut full, &events);

        assert_eq!(verdicts_a, verdicts_full);
        let tail = &verdicts_full[verdicts_full.len() - verdicts_b.len()..];
        assert_eq!(verdicts_b, tail);
        assert_eq!(
            a.accumulated_cost().unwrap().total_bits,
            full.accumulated_cost().unwrap().total_bits
        );
    }

    fn drive_partial(engine: &mut Engine, events: &[EventRecord]) -> Vec<WindowVerdict> {
        let mut verdicts = Vec::new();
        for e in events {
            let labels: Vec<String> = e.units.iter().map(|u| u.to_string()).collect();
            let refs: Vec<&str> = labels.iter().map(|s| s.as_str()).collect();
            verdicts.extend(engine.ingest(e.tick, &refs, e.count).unwrap());
        }
        verdicts
    }

    #[test]
    fn snapshot_rejects_truncation_and_bad_magic() {
        let mut cfg = StreamConfig::new(4, 2);
        cfg.init_windows = 2;
        let events = single_gen_events(3, 4, 150, 17);
        let mut engine = Engine::new(cfg, vec!["a".into(), "b".into()]).unwrap();
        drive(&mut engine, &events);
        let bytes = engine.snapshot().unwrap();
        assert!(matches!(
            Engine::restore(&bytes[..bytes.len() / 2]),
            Err(Error::Snapshot(_))
        ));
        let mut doc: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        doc["magic"] = serde_json::Value::String("other".into());
        let tampered = serde_json::to_vec(&doc).unwrap();
        assert!(matches!(Engine::restore(&tampered), Err(Error::Snapshot(_))));
    }

    #[test]
    fn warmup_too_short_without_events() {
        let cfg = StreamConfig::new(4, 2);
        let mut engine = Engine::new(cfg, vec!["a".into()]).unwrap();
        assert!(matches!(engine.finish(), Err(Error::WarmupTooShort)));
    }
}
