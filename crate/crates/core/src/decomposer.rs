//! Window decomposition: collapsed Gibbs sampling of latent components with
//! temporal Dirichlet priors taken from the last `L` component-matrix sets.
//!
//! For an event instance at units `(u_1..u_M)` and local tick `t`, component
//! `k` is drawn proportionally to
//!
//! ```text
//! (b'[t][k] + pb[t][k]) * prod_m (a_m'[k][u_m] + pa_m[k][u_m]) / (n'[k] + L*alpha_m)
//! ```
//!
//! where primes exclude the instance itself, `pa`/`pb` are the queue prior
//! masses (`sum_l alpha * prior_prob`), and the time-factor denominator is
//! dropped because it is constant in `k`.

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::ResolvedConfig;
use crate::matrix::Mat;
use crate::tensor::WindowTensor;

/// Hyperparameter snapshot carried by each component-matrix set. The queue
/// length fixes the smoothing normalizer `L * alpha` for this set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Smoothing {
    pub alpha: Vec<f64>,
    pub beta: f64,
    pub queue_len: usize,
}

/// A regime's parameters: per-attribute component matrices `A^(m)` (K x U_m,
/// row-stochastic), the time matrix `B` (tau x K, row-stochastic), and the raw
/// evidence counts and prior mass behind them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentMatrices {
    /// Row-stochastic `A^(m)`, one K x U_m matrix per attribute.
    pub attr_probs: Vec<Mat<f64>>,
    /// Row-stochastic `B`, tau x K.
    pub time_probs: Mat<f64>,
    /// Raw Gibbs evidence counts behind `attr_probs`.
    pub attr_counts: Vec<Mat<u64>>,
    /// Raw evidence counts behind `time_probs`.
    pub time_counts: Mat<u64>,
    /// Prior mass per attribute cell: `sum_l alpha_m * prior_prob`.
    pub attr_prior: Vec<Mat<f64>>,
    /// Prior mass per time cell: `sum_l beta * prior_prob`.
    pub time_prior: Mat<f64>,
    /// Event total of the source window (accumulates across merges).
    pub event_total: u64,
    pub smooth: Smoothing,
}

impl ComponentMatrices {
    /// Uniform matrices: `A^(m) = 1/U_m`, `B = 1/K`, zero counts. The
    /// symmetry-respecting cold-start queue entry.
    pub fn uniform(dims: &[usize], tau: u32, k: usize, smooth: Smoothing) -> Self {
        let attr_probs = dims
            .iter()
            .map(|&u| Mat::filled(k, u, if u > 0 { 1.0 / u as f64 } else { 0.0 }))
            .collect();
        let time_probs = Mat::filled(tau as usize, k, 1.0 / k as f64);
        Self {
            attr_probs,
            time_probs,
            attr_counts: dims.iter().map(|&u| Mat::zeros(k, u)).collect(),
            time_counts: Mat::zeros(tau as usize, k),
            attr_prior: dims.iter().map(|&u| Mat::zeros(k, u)).collect(),
            time_prior: Mat::zeros(tau as usize, k),
            event_total: 0,
            smooth,
        }
    }

    pub fn attr_count(&self) -> usize {
        self.attr_probs.len()
    }

    pub fn components(&self) -> usize {
        self.time_probs.cols()
    }

    pub fn tau(&self) -> usize {
        self.time_probs.rows()
    }

    /// Stored width of `A^(m)`; units at or past it are unseen by this set.
    pub fn attr_width(&self, m: usize) -> usize {
        self.attr_probs[m].cols()
    }

    /// Probability floor for a unit unseen by this set:
    /// `alpha_m / (sum_u a[k][u] + L*alpha_m)`, per component.
    pub fn attr_floors(&self) -> Vec<Vec<f64>> {
        let q = self.smooth.queue_len as f64;
        (0..self.attr_count())
            .map(|m| {
                let a = self.smooth.alpha[m];
                (0..self.components())
                    .map(|k| a / (self.attr_counts[m].row_sum(k) as f64 + q * a))
                    .collect()
            })
            .collect()
    }

    /// Recomputes both probability matrices from counts and prior mass:
    /// `(count + prior) / (row count sum + L*hyper)`.
    pub fn recompute_probs(&mut self) {
        let q = self.smooth.queue_len as f64;
        for m in 0..self.attr_count() {
            let alpha = self.smooth.alpha[m];
            for k in 0..self.components() {
                let denom = self.attr_counts[m].row_sum(k) as f64 + q * alpha;
                for u in 0..self.attr_probs[m].cols() {
                    let num =
                        self.attr_counts[m].get(k, u) as f64 + self.attr_prior[m].get(k, u);
                    self.attr_probs[m].set(k, u, num / denom);
                }
            }
        }
        let beta = self.smooth.beta;
        for t in 0..self.time_probs.rows() {
            let denom = self.time_counts.row_sum(t) as f64 + q * beta;
            for k in 0..self.components() {
                let num = self.time_counts.get(t, k) as f64 + self.time_prior.get(t, k);
                self.time_probs.set(t, k, num / denom);
            }
        }
    }

    /// Zero-pads the attribute matrices out to `dims` (grown vocabularies).
    pub fn pad_to(&mut self, dims: &[usize]) {
        for m in 0..self.attr_count() {
            self.attr_probs[m].grow_cols(dims[m]);
            self.attr_counts[m].grow_cols(dims[m]);
            self.attr_prior[m].grow_cols(dims[m]);
        }
    }
}

/// FIFO of the last `L` component-matrix sets, newest last.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PastQueue {
    entries: VecDeque<ComponentMatrices>,
    capacity: usize,
}

impl PastQueue {
    /// Cold-start queue: `capacity` copies of the uniform matrices.
    pub fn uniform(dims: &[usize], tau: u32, k: usize, capacity: usize, alpha: &[f64], beta: f64) -> Self {
        assert!(capacity >= 1, "queue capacity must be >= 1");
        let smooth = Smoothing { alpha: alpha.to_vec(), beta, queue_len: capacity };
        let entry = ComponentMatrices::uniform(dims, tau, k, smooth);
        Self { entries: std::iter::repeat(entry).take(capacity).collect(), capacity }
    }

    /// Queue seeded with `capacity` copies of one matrix set.
    pub fn filled_with(entry: ComponentMatrices, capacity: usize) -> Self {
        assert!(capacity >= 1, "queue capacity must be >= 1");
        Self { entries: std::iter::repeat(entry).take(capacity).collect(), capacity }
    }

    /// Drops the oldest entry when full, then appends `entry`.
    pub fn push(&mut self, entry: ComponentMatrices) {
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back(entry);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn iter(&self) -> impl Iterator<Item = &ComponentMatrices> {
        self.entries.iter()
    }
}

/// Queue prior mass evaluated against the current dimensions:
/// `pa[m][k][u] = sum_l alpha_m * prior_A[k][u]`, zero where a queued matrix
/// is narrower than the current vocabulary.
#[derive(Clone, Debug)]
pub struct PriorMass {
    pub attr: Vec<Mat<f64>>,
    pub time: Mat<f64>,
}

impl PriorMass {
    pub fn from_queue(queue: &PastQueue, dims: &[usize], tau: u32, k: usize, alpha: &[f64], beta: f64) -> Self {
        let mut attr: Vec<Mat<f64>> = dims.iter().map(|&u| Mat::zeros(k, u)).collect();
        let mut time: Mat<f64> = Mat::zeros(tau as usize, k);
        for entry in queue.iter() {
            for (m, pa) in attr.iter_mut().enumerate() {
                let src = &entry.attr_probs[m];
                let width = src.cols().min(dims[m]);
                for kk in 0..k {
                    let row = pa.row_mut(kk);
                    let src_row = src.row(kk);
                    for u in 0..width {
                        row[u] += alpha[m] * src_row[u];
                    }
                }
            }
            for t in 0..tau as usize {
                let row = time.row_mut(t);
                let src_row = entry.time_probs.row(t);
                for kk in 0..k {
                    row[kk] += beta * src_row[kk];
                }
            }
        }
        Self { attr, time }
    }
}

#[derive(Clone, Debug)]
struct Cell {
    units: Vec<u32>,
    t_local: u32,
    count: u64,
}

/// Per-instance component assignments plus the aggregate evidence counts.
///
/// Every unit of multiplicity in the window is one instance. The aggregates
/// satisfy `sum_u a_m[k][u] = comp_totals[k]` for every attribute `m` and
/// `sum_{t,k} b[t][k] = N` at all times.
#[derive(Clone, Debug)]
pub struct AssignmentState {
    k: usize,
    cells: Vec<Cell>,
    z: Vec<u32>,
    attr_counts: Vec<Mat<u64>>,
    time_counts: Mat<u64>,
    comp_totals: Vec<u64>,
    event_total: u64,
}

impl AssignmentState {
    /// Expands the window into instances and assigns each a uniformly random
    /// initial component.
    pub fn init<R: Rng>(window: &WindowTensor, dims: &[usize], k: usize, rng: &mut R) -> Self {
        assert!(k >= 1, "component count must be >= 1");
        let tau = window.width() as usize;
        let mut cells = Vec::with_capacity(window.cell_count());
        for (key, count) in window.cells() {
            debug_assert!(key
                .units
                .iter()
                .zip(dims)
                .all(|(&u, &d)| (u as usize) < d));
            cells.push(Cell { units: key.units.clone(), t_local: key.t_local, count });
        }
        let n = window.event_total() as usize;
        let mut state = Self {
            k,
            cells,
            z: Vec::with_capacity(n),
            attr_counts: dims.iter().map(|&u| Mat::zeros(k, u)).collect(),
            time_counts: Mat::zeros(tau, k),
            comp_totals: vec![0; k],
            event_total: window.event_total(),
        };
        for ci in 0..state.cells.len() {
            for _ in 0..state.cells[ci].count {
                let zk = rng.random_range(0..k) as u32;
                state.z.push(zk);
                state.apply(ci, zk, 1);
            }
        }
        state
    }

    fn apply(&mut self, cell: usize, zk: u32, delta: i64) {
        let zk = zk as usize;
        let t = self.cells[cell].t_local as usize;
        for (m, &u) in self.cells[cell].units.iter().enumerate() {
            let cur = self.attr_counts[m].get(zk, u as usize);
            self.attr_counts[m].set(zk, u as usize, cur.wrapping_add_signed(delta));
        }
        let cur = self.time_counts.get(t, zk);
        self.time_counts.set(t, zk, cur.wrapping_add_signed(delta));
        self.comp_totals[zk] = self.comp_totals[zk].wrapping_add_signed(delta);
    }

    pub fn event_total(&self) -> u64 {
        self.event_total
    }

    pub fn attr_counts(&self) -> &[Mat<u64>] {
        &self.attr_counts
    }

    pub fn time_counts(&self) -> &Mat<u64> {
        &self.time_counts
    }

    pub fn component_totals(&self) -> &[u64] {
        &self.comp_totals
    }

    pub fn assignments(&self) -> &[u32] {
        &self.z
    }

    /// Planted-data helper: instance index ranges per cell, in cell order.
    pub fn cell_instance_ranges(&self) -> Vec<(u32, std::ops::Range<usize>)> {
        let mut out = Vec::with_capacity(self.cells.len());
        let mut start = 0usize;
        for c in &self.cells {
            let end = start + c.count as usize;
            out.push((c.units[0], start..end));
            start = end;
        }
        out
    }
}

/// One full sweep: every event instance is resampled once, in canonical cell
/// order. A no-op on empty windows.
pub fn gibbs_sweep<R: Rng>(
    state: &mut AssignmentState,
    priors: &PriorMass,
    alpha: &[f64],
    beta: f64,
    queue_len: usize,
    rng: &mut R,
) {
    let _ = beta; // the time-factor denominator is constant in k and dropped
    let k = state.k;
    if k == 1 {
        return; // single component: z is identically 0
    }
    let q = queue_len as f64;
    let mut weights = vec![0.0f64; k];
    let mut idx = 0usize;
    for ci in 0..state.cells.len() {
        let count = state.cells[ci].count;
        for _ in 0..count {
            let old = state.z[idx];
            state.apply(ci, old, -1);

            let t = state.cells[ci].t_local as usize;
            let mut total = 0.0f64;
            for kk in 0..k {
                let mut w =
                    state.time_counts.get(t, kk) as f64 + priors.time.get(t, kk);
                let n_k = state.comp_totals[kk] as f64;
                for (m, &u) in state.cells[ci].units.iter().enumerate() {
                    let u = u as usize;
                    let mut num = state.attr_counts[m].get(kk, u) as f64
                        + priors.attr[m].get(kk, u);
                    if num == 0.0 {
                        // no evidence and no prior mass (fresh unit): fall
                        // back to the bare alpha pseudo-count
                        num = alpha[m];
                    }
                    w *= num / (n_k + q * alpha[m]);
                }
                weights[kk] = w;
                total += w;
            }

            let new = if total > 0.0 {
                let mut x = rng.random::<f64>() * total;
                let mut chosen = k - 1;
                for (kk, &w) in weights.iter().enumerate() {
                    x -= w;
                    if x < 0.0 {
                        chosen = kk;
                        break;
                    }
                }
                chosen as u32
            } else {
                rng.random_range(0..k) as u32
            };
            state.z[idx] = new;
            state.apply(ci, new, 1);
            idx += 1;
        }
    }
}

/// Turns a post-burn-in state into smoothed, row-stochastic matrices:
/// `A[k][u] = (a[k][u] + pa[k][u]) / (sum_u a[k][u] + L*alpha_m)` and the
/// analogous form for `B` rows over components.
pub fn normalize(state: &AssignmentState, priors: &PriorMass, smooth: Smoothing) -> ComponentMatrices {
    let mut out = ComponentMatrices {
        attr_probs: state
            .attr_counts
            .iter()
            .map(|c| Mat::zeros(c.rows(), c.cols()))
            .collect(),
        time_probs: Mat::zeros(state.time_counts.rows(), state.time_counts.cols()),
        attr_counts: state.attr_counts.clone(),
        time_counts: state.time_counts.clone(),
        attr_prior: priors.attr.clone(),
        time_prior: priors.time.clone(),
        event_total: state.event_total,
        smooth,
    };
    out.recompute_probs();
    out
}

/// Runs `n_iter` Gibbs sweeps over the window and normalizes, then rotates the
/// queue: the oldest matrix set is dropped and the new one inserted.
pub fn decompose<R: Rng>(
    window: &WindowTensor,
    dims: &[usize],
    queue: &mut PastQueue,
    cfg: &ResolvedConfig,
    rng: &mut R,
) -> ComponentMatrices {
    assert_eq!(window.width(), cfg.tau, "window width must equal tau");
    assert!(!queue.is_empty(), "past queue must be seeded");
    let priors =
        PriorMass::from_queue(queue, dims, cfg.tau, cfg.k, &cfg.alpha, cfg.beta);
    let mut state = AssignmentState::init(window, dims, cfg.k, rng);
    for _ in 0..cfg.n_iter {
        gibbs_sweep(&mut state, &priors, &cfg.alpha, cfg.beta, queue.len(), rng);
    }
    let smooth = Smoothing {
        alpha: cfg.alpha.clone(),
        beta: cfg.beta,
        queue_len: queue.len(),
    };
    let theta = normalize(&state, &priors, smooth);
    queue.push(theta.clone());
    theta
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::StreamConfig;
    use crate::tensor::EventRecord;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg(tau: u32, k: usize, n_iter: u32) -> ResolvedConfig {
        let mut c = StreamConfig::new(tau, k);
        c.n_iter = n_iter;
        c.resolve(1).unwrap()
    }

    fn planted_two_component_window(
        per_side: usize,
        units_per_side: u32,
        tau: u32,
        seed: u64,
    ) -> WindowTensor {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut w = WindowTensor::new(0, tau);
        for side in 0..2u32 {
            for _ in 0..per_side {
                let u = side * units_per_side + rng.random_range(0..units_per_side);
                let t = rng.random_range(0..tau as u64);
                w.append(&EventRecord::new(t, vec![u], 1)).unwrap();
            }
        }
        w
    }

    #[test]
    fn single_component_keeps_all_assignments_zero() {
        let c = cfg(4, 1, 5);
        let w = planted_two_component_window(50, 4, 4, 1);
        let dims = vec![8usize];
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut state = AssignmentState::init(&w, &dims, 1, &mut rng);
        let queue = PastQueue::uniform(&dims, 4, 1, 1, &c.alpha, c.beta);
        let priors = PriorMass::from_queue(&queue, &dims, 4, 1, &c.alpha, c.beta);
        for _ in 0..5 {
            gibbs_sweep(&mut state, &priors, &c.alpha, c.beta, 1, &mut rng);
        }
        assert!(state.assignments().iter().all(|&z| z == 0));
    }

    #[test]
    fn fixed_seed_gives_identical_assignments() {
        let c = cfg(4, 3, 8);
        let w = planted_two_component_window(100, 5, 4, 3);
        let dims = vec![10usize];
        let run = |seed: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut queue = PastQueue::uniform(&dims, 4, 3, 2, &c.alpha, c.beta);
            decompose(&w, &dims, &mut queue, &c, &mut rng)
        };
        let a = run(42);
        let b = run(42);
        assert_eq!(a, b);
        let other = run(43);
        assert_ne!(a.attr_counts, other.attr_counts);
    }

    #[test]
    fn planted_two_component_purity_exceeds_ninety_percent() {
        // Units 0..10 and 10..20 come from disjoint multinomials; after 50
        // sweeps the best-permutation assignment purity must reach 0.9.
        let c = cfg(5, 2, 1);
        let dims = vec![20usize];
        let w = planted_two_component_window(1500, 10, 5, 11);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let queue = PastQueue::uniform(&dims, 5, 2, 1, &c.alpha, c.beta);
        let priors = PriorMass::from_queue(&queue, &dims, 5, 2, &c.alpha, c.beta);
        let mut state = AssignmentState::init(&w, &dims, 2, &mut rng);
        for _ in 0..50 {
            gibbs_sweep(&mut state, &priors, &c.alpha, c.beta, 1, &mut rng);
        }
        let mut agree = 0usize;
        let mut total = 0usize;
        for (unit, range) in state.cell_instance_ranges() {
            let planted = if unit < 10 { 0u32 } else { 1u32 };
            for idx in range {
                if state.assignments()[idx] == planted {
                    agree += 1;
                }
                total += 1;
            }
        }
        let purity = (agree.max(total - agree)) as f64 / total as f64;
        assert!(purity >= 0.9, "purity {purity} below 0.9");
    }

    #[test]
    fn count_consistency_holds_after_sweeps() {
        let c = cfg(6, 4, 3);
        let mut w = WindowTensor::new(0, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let t = rng.random_range(0..6u64);
            let u = rng.random_range(0..7u32);
            let count = rng.random_range(1..4u64);
            w.append(&EventRecord::new(t, vec![u], count)).unwrap();
        }
        let dims = vec![7usize];
        let queue = PastQueue::uniform(&dims, 6, 4, 2, &c.alpha, c.beta);
        let priors = PriorMass::from_queue(&queue, &dims, 6, 4, &c.alpha, c.beta);
        let mut state = AssignmentState::init(&w, &dims, 4, &mut rng);
        let n = w.event_total();
        for _ in 0..3 {
            gibbs_sweep(&mut state, &priors, &c.alpha, c.beta, 2, &mut rng);
            for m in 0..1 {
                let total: u64 = (0..4).map(|k| state.attr_counts()[m].row_sum(k)).sum();
                assert_eq!(total, n);
            }
            let b_total: u64 = (0..6).map(|t| state.time_counts().row_sum(t)).sum();
            assert_eq!(b_total, n);
            let z_total: u64 = state.component_totals().iter().sum();
            assert_eq!(z_total, n);
        }
    }

    #[test]
    fn normalize_prior_only_is_uniform() {
        let c = cfg(3, 4, 1);
        let dims = vec![5usize];
        let queue = PastQueue::uniform(&dims, 3, 4, 2, &c.alpha, c.beta);
        let priors = PriorMass::from_queue(&queue, &dims, 3, 4, &c.alpha, c.beta);
        let w = WindowTensor::new(0, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let state = AssignmentState::init(&w, &dims, 4, &mut rng);
        let smooth = Smoothing { alpha: c.alpha.clone(), beta: c.beta, queue_len: 2 };
        let theta = normalize(&state, &priors, smooth);
        for k in 0..4 {
            for u in 0..5 {
                assert!((theta.attr_probs[0].get(k, u) - 0.2).abs() < 1e-12);
            }
        }
        for t in 0..3 {
            for k in 0..4 {
                assert!((theta.time_probs.get(t, k) - 0.25).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn normalize_matches_hand_computed_fixture() {
        // a = [[3,1],[0,4]], one queued uniform prior 0.5 each, alpha = 0.5:
        // row 0 = [(3+0.25)/4.5, (1+0.25)/4.5]
        let mut state = AssignmentState {
            k: 2,
            cells: Vec::new(),
            z: Vec::new(),
            attr_counts: vec![Mat::zeros(2, 2)],
            time_counts: Mat::zeros(1, 2),
            comp_totals: vec![4, 4],
            event_total: 8,
        };
        state.attr_counts[0].set(0, 0, 3);
        state.attr_counts[0].set(0, 1, 1);
        state.attr_counts[0].set(1, 1, 4);
        state.time_counts.set(0, 0, 4);
        state.time_counts.set(0, 1, 4);
        let mut priors = PriorMass { attr: vec![Mat::filled(2, 2, 0.25)], time: Mat::zeros(1, 2) };
        priors.time = Mat::filled(1, 2, 0.25);
        let smooth = Smoothing { alpha: vec![0.5], beta: 0.5, queue_len: 1 };
        let theta = normalize(&state, &priors, smooth);
        assert!((theta.attr_probs[0].get(0, 0) - 3.25 / 4.5).abs() < 1e-12);
        assert!((theta.attr_probs[0].get(0, 1) - 1.25 / 4.5).abs() < 1e-12);
        assert!((theta.attr_probs[0].get(1, 0) - 0.25 / 4.5).abs() < 1e-12);
        assert!((theta.attr_probs[0].get(1, 1) - 4.25 / 4.5).abs() < 1e-12);
    }

    #[test]
    fn normalize_single_component_gives_smoothed_frequencies() {
        let c = cfg(2, 1, 1);
        let mut w = WindowTensor::new(0, 2);
        for (u, n) in [(0u32, 6u64), (1, 2)] {
            w.append(&EventRecord::new(0, vec![u], n)).unwrap();
        }
        let dims = vec![2usize];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let state = AssignmentState::init(&w, &dims, 1, &mut rng);
        let queue = PastQueue::uniform(&dims, 2, 1, 1, &c.alpha, c.beta);
        let priors = PriorMass::from_queue(&queue, &dims, 2, 1, &c.alpha, c.beta);
        let smooth = Smoothing { alpha: c.alpha.clone(), beta: c.beta, queue_len: 1 };
        let theta = normalize(&state, &priors, smooth);
        // alpha = 1/K = 1, uniform prior mass 0.5 per unit, denominator 8 + 1
        assert!((theta.attr_probs[0].get(0, 0) - 6.5 / 9.0).abs() < 1e-12);
        assert!((theta.attr_probs[0].get(0, 1) - 2.5 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn normalize_rows_are_stochastic_and_positive() {
        let c = cfg(4, 3, 4);
        let w = planted_two_component_window(300, 6, 4, 21);
        let dims = vec![12usize];
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut queue = PastQueue::uniform(&dims, 4, 3, 2, &c.alpha, c.beta);
        let theta = decompose(&w, &dims, &mut queue, &c, &mut rng);
        for k in 0..3 {
            let sum = theta.attr_probs[0].row_sum_f(k);
            assert!((sum - 1.0).abs() < 1e-9, "A row {k} sums to {sum}");
            assert!(theta.attr_probs[0].row(k).iter().all(|&p| p > 0.0));
        }
        for t in 0..4 {
            let sum = theta.time_probs.row_sum_f(t);
            assert!((sum - 1.0).abs() < 1e-9, "B row {t} sums to {sum}");
            assert!(theta.time_probs.row(t).iter().all(|&p| p > 0.0));
        }
    }

    #[test]
    fn decompose_empty_window_rotates_queue_and_yields_prior_only() {
        let c = cfg(3, 2, 4);
        let dims = vec![4usize];
        let mut queue = PastQueue::uniform(&dims, 3, 2, 2, &c.alpha, c.beta);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let w = WindowTensor::new(0, 3);
        let theta = decompose(&w, &dims, &mut queue, &c, &mut rng);
        assert_eq!(theta.event_total, 0);
        for k in 0..2 {
            for u in 0..4 {
                assert!((theta.attr_probs[0].get(k, u) - 0.25).abs() < 1e-12);
            }
        }
        // queue rotated: newest entry is the produced theta
        assert_eq!(queue.len(), 2);
        assert_eq!(queue.iter().last().unwrap(), &theta);
    }

    #[test]
    fn append_order_does_not_change_decomposition() {
        let c = cfg(4, 3, 6);
        let events = [
            EventRecord::new(0, vec![1], 2),
            EventRecord::new(1, vec![3], 1),
            EventRecord::new(0, vec![1], 1),
            EventRecord::new(3, vec![0], 4),
        ];
        let dims = vec![4usize];
        let mut fwd = WindowTensor::new(0, 4);
        let mut rev = WindowTensor::new(0, 4);
        for e in &events {
            fwd.append(e).unwrap();
        }
        for e in events.iter().rev() {
            rev.append(e).unwrap();
        }
        let run = |w: &WindowTensor| {
            let mut queue = PastQueue::uniform(&dims, 4, 3, 1, &c.alpha, c.beta);
            let mut rng = ChaCha8Rng::seed_from_u64(17);
            decompose(w, &dims, &mut queue, &c, &mut rng)
        };
        assert_eq!(run(&fwd), run(&rev));
    }
}
