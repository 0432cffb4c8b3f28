//! Ground-truth synthetic streams: phases of events drawn from per-type
//! multinomials arranged in a pattern such as "1,2,1", with optional
//! anomalous blocks drawn from a held-out generator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::tensor::EventRecord;
use crate::{Error, Result};

/// Label given to anomalous ticks in the emitted truth file.
pub const ANOMALY_LABEL: &str = "anomaly";

/// Anomaly injection: blocks of `block_ticks` ticks starting at or after
/// `start_tick` are replaced by a held-out generator, either at explicit
/// `positions` (block start ticks) or independently with probability `rate`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnomalySpec {
    pub rate: f64,
    pub block_ticks: u64,
    pub start_tick: u64,
    pub positions: Option<Vec<u64>>,
}

/// Specification of one synthetic stream.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    /// Unit counts per attribute.
    pub dims: Vec<usize>,
    /// Tensor-type ids (1-based) in phase order, e.g. `[1, 2, 1]`.
    pub pattern: Vec<usize>,
    /// Total number of events across all phases.
    pub events: u64,
    pub ticks_per_phase: u64,
    pub seed: u64,
    pub anomaly: Option<AnomalySpec>,
}

impl GeneratorSpec {
    /// Full-scale defaults: a 4th-order 100x100x100x100 tensor with 100K
    /// observations.
    pub fn full_scale(pattern: Vec<usize>, seed: u64) -> Self {
        Self {
            dims: vec![100, 100, 100, 100],
            pattern,
            events: 100_000,
            ticks_per_phase: 50,
            seed,
            anomaly: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.dims.is_empty() || self.dims.iter().any(|&d| d == 0) {
            return Err(Error::Config("dims must be non-empty and positive".into()));
        }
        if self.pattern.is_empty() || self.pattern.iter().any(|&t| t == 0) {
            return Err(Error::Config("pattern must list 1-based tensor types".into()));
        }
        if self.ticks_per_phase == 0 {
            return Err(Error::Config("ticks_per_phase must be >= 1".into()));
        }
        if let Some(a) = &self.anomaly {
            if a.block_ticks == 0 {
                return Err(Error::Config("anomaly block_ticks must be >= 1".into()));
            }
            if !(0.0..=1.0).contains(&a.rate) {
                return Err(Error::Config("anomaly rate must be in [0, 1]".into()));
            }
        }
        Ok(())
    }

    pub fn total_ticks(&self) -> u64 {
        self.pattern.len() as u64 * self.ticks_per_phase
    }

    fn type_count(&self) -> usize {
        *self.pattern.iter().max().expect("non-empty pattern")
    }

    /// Tensor-type id the anomaly generator uses: one past the pattern types.
    pub fn anomaly_type(&self) -> usize {
        self.type_count() + 1
    }
}

/// Parses a pattern string such as "1,2,3,2,1".
pub fn parse_pattern(s: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let t: usize = part
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("invalid pattern element {part:?}")))?;
        if t == 0 {
            return Err(Error::Config("pattern ids are 1-based".into()));
        }
        out.push(t);
    }
    Ok(out)
}

/// Per-attribute multinomial parameters of one tensor type.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorType {
    pub attr_dists: Vec<Vec<f64>>,
}

fn type_rng(seed: u64, type_id: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (type_id as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Draws the multinomial parameters of one tensor type: per attribute, a
/// Dirichlet sample whose concentration entries are uniform in [0.1, 0.5].
pub fn gen_tensor_type(spec: &GeneratorSpec, type_id: usize) -> Result<TensorType> {
    spec.validate()?;
    let mut rng = type_rng(spec.seed, type_id);
    let mut attr_dists = Vec::with_capacity(spec.dims.len());
    for &u in &spec.dims {
        let conc: Vec<f64> = (0..u).map(|_| 0.1 + 0.4 * rng.random::<f64>()).collect();
        let mut probs: Vec<f64> = conc
            .iter()
            .map(|&c| {
                let gamma = Gamma::new(c, 1.0).expect("positive shape");
                gamma.sample(&mut rng)
            })
            .collect();
        let sum: f64 = probs.iter().sum();
        if sum > 0.0 {
            for p in &mut probs {
                *p /= sum;
            }
        } else {
            probs = vec![1.0 / u as f64; u];
        }
        attr_dists.push(probs);
    }
    Ok(TensorType { attr_dists })
}

fn draw_categorical<R: Rng>(probs: &[f64], rng: &mut R) -> usize {
    let mut x = rng.random::<f64>();
    for (i, &p) in probs.iter().enumerate() {
        x -= p;
        if x < 0.0 {
            return i;
        }
    }
    probs.len() - 1
}

/// One tick of ground truth: the generating tensor-type id, or "anomaly".
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TickLabel {
    pub tick: u64,
    pub label: String,
}

/// Generates the event stream and the per-tick truth labels.
///
/// Phases are equal-length tick ranges emitted in pattern order; within a
/// phase, event ticks are uniform and units are drawn independently from the
/// phase type's attribute multinomials. Events on anomalous ticks are drawn
/// from the held-out anomaly type instead.
pub fn gen_stream(spec: &GeneratorSpec) -> Result<(Vec<EventRecord>, Vec<TickLabel>)> {
    spec.validate()?;
    let phases = spec.pattern.len() as u64;
    let total_ticks = spec.total_ticks();

    let mut types: Vec<Option<TensorType>> = vec![None; spec.anomaly_type() + 1];
    for &t in &spec.pattern {
        if types[t].is_none() {
            types[t] = Some(gen_tensor_type(spec, t)?);
        }
    }

    // per-tick labels, anomalies overriding phase types
    let mut labels: Vec<String> = (0..total_ticks)
        .map(|tick| spec.pattern[(tick / spec.ticks_per_phase) as usize].to_string())
        .collect();
    if let Some(anom) = &spec.anomaly {
        let a_type = spec.anomaly_type();
        types[a_type] = Some(gen_tensor_type(spec, a_type)?);
        let mut mark = |block_start: u64| {
            let end = (block_start + anom.block_ticks).min(total_ticks);
            for t in block_start..end {
                labels[t as usize] = ANOMALY_LABEL.to_string();
            }
        };
        match &anom.positions {
            Some(positions) => {
                for &p in positions {
                    if p < total_ticks {
                        mark(p);
                    }
                }
            }
            None => {
                let mut arng =
                    ChaCha8Rng::seed_from_u64(spec.seed ^ 0xA50B_5EED_0000_0001);
                let mut start = 0u64;
                while start < total_ticks {
                    let flip = arng.random::<f64>();
                    if start >= anom.start_tick && flip < anom.rate {
                        mark(start);
                    }
                    start += anom.block_ticks;
                }
            }
        }
    }

    let anomaly_type = spec.anomaly_type();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0xE7E7_0000_0000_0002);
    let base = spec.events / phases;
    let rem = spec.events % phases;
    let mut events = Vec::with_capacity(spec.events as usize);
    for (phase, &ptype) in spec.pattern.iter().enumerate() {
        let phase_start = phase as u64 * spec.ticks_per_phase;
        let n = base + if (phase as u64) < rem { 1 } else { 0 };
        for _ in 0..n {
            let tick = phase_start + rng.random_range(0..spec.ticks_per_phase);
            let gen_type = if labels[tick as usize] == ANOMALY_LABEL { anomaly_type } else { ptype };
            let dists = &types[gen_type].as_ref().expect("type generated").attr_dists;
            let units: Vec<u32> =
                dists.iter().map(|d| draw_categorical(d, &mut rng) as u32).collect();
            events.push(EventRecord::new(tick, units, 1));
        }
    }
    events.sort_by_key(|e| e.tick);

    let tick_labels = labels
        .into_iter()
        .enumerate()
        .map(|(tick, label)| TickLabel { tick: tick as u64, label })
        .collect();
    Ok((events, tick_labels))
}
