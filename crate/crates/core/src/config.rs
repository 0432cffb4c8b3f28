//! Stream processing configuration.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Configuration for one stream run.
///
/// `alpha` and `beta` default to `1/K`. `l = None` asks the engine to estimate
/// the queue length from the warm-up segment lengths.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StreamConfig {
    /// Window width in ticks.
    pub tau: u32,
    /// Number of latent components, global across regimes.
    pub k: usize,
    /// Past-matrix queue length; `None` = estimate during warm-up.
    pub l: Option<usize>,
    /// Per-attribute Dirichlet hyperparameters. Empty = `1/K` for every
    /// attribute; a single entry is broadcast to all attributes.
    pub alpha: Vec<f64>,
    /// Dirichlet hyperparameter for the time matrix. `None` = `1/K`.
    pub beta: Option<f64>,
    /// Gibbs sweeps per window.
    pub n_iter: u32,
    /// Float code length in bits for the model cost.
    pub cf_bits: f64,
    /// RNG seed; the whole run is a pure function of events + config + seed.
    pub seed: u64,
    /// Number of warm-up windows used for model initialization.
    pub init_windows: u32,
}

impl StreamConfig {
    pub fn new(tau: u32, k: usize) -> Self {
        Self {
            tau,
            k,
            l: None,
            alpha: Vec::new(),
            beta: None,
            n_iter: 10,
            cf_bits: 8.0,
            seed: 0,
            init_windows: 5,
        }
    }

    /// Validates the configuration and resolves per-attribute hyperparameters
    /// for a stream with `attr_count` attributes.
    pub fn resolve(&self, attr_count: usize) -> Result<ResolvedConfig> {
        if self.tau < 1 {
            return Err(Error::Config("tau must be >= 1".into()));
        }
        if self.k < 1 {
            return Err(Error::Config("k must be >= 1".into()));
        }
        if let Some(l) = self.l {
            if l < 1 {
                return Err(Error::Config("l must be >= 1 when set".into()));
            }
        }
        if self.n_iter < 1 {
            return Err(Error::Config("n_iter must be >= 1".into()));
        }
        if self.cf_bits <= 0.0 {
            return Err(Error::Config("cf_bits must be > 0".into()));
        }
        if self.init_windows < 1 {
            return Err(Error::Config("init_windows must be >= 1".into()));
        }
        if attr_count == 0 {
            return Err(Error::Config("stream needs at least one attribute".into()));
        }
        let default = 1.0 / self.k as f64;
        let alpha = match self.alpha.len() {
            0 => vec![default; attr_count],
            1 => vec![self.alpha[0]; attr_count],
            n if n == attr_count => self.alpha.clone(),
            n => {
                return Err(Error::Config(format!(
                    "alpha has {n} entries but the stream has {attr_count} attributes"
                )))
            }
        };
        if alpha.iter().any(|&a| a <= 0.0 || !a.is_finite()) {
            return Err(Error::Config("alpha entries must be positive".into()));
        }
        let beta = self.beta.unwrap_or(default);
        if beta <= 0.0 || !beta.is_finite() {
            return Err(Error::Config("beta must be positive".into()));
        }
        Ok(ResolvedConfig {
            tau: self.tau,
            k: self.k,
            explicit_l: self.l,
            alpha,
            beta,
            n_iter: self.n_iter,
            cf_bits: self.cf_bits,
            seed: self.seed,
            init_windows: self.init_windows,
        })
    }
}

/// A validated configuration with hyperparameters expanded per attribute.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub tau: u32,
    pub k: usize,
    pub explicit_l: Option<usize>,
    pub alpha: Vec<f64>,
    pub beta: f64,
    pub n_iter: u32,
    pub cf_bits: f64,
    pub seed: u64,
    pub init_windows: u32,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve_to_one_over_k() {
        let cfg = StreamConfig::new(10, 8);
        let r = cfg.resolve(3).unwrap();
        assert_eq!(r.alpha, vec![0.125; 3]);
        assert_eq!(r.beta, 0.125);
        assert_eq!(r.n_iter, 10);
        assert_eq!(r.cf_bits, 8.0);
        assert_eq!(r.init_windows, 5);
    }

    #[test]
    fn broadcast_and_mismatch() {
        let mut cfg = StreamConfig::new(10, 4);
        cfg.alpha = vec![0.5];
        assert_eq!(cfg.resolve(3).unwrap().alpha, vec![0.5; 3]);
        cfg.alpha = vec![0.5, 0.5];
        assert!(cfg.resolve(3).is_err());
    }

    #[test]
    fn rejects_invalid() {
        assert!(StreamConfig::new(0, 8).resolve(2).is_err());
        assert!(StreamConfig::new(10, 0).resolve(2).is_err());
        let mut cfg = StreamConfig::new(10, 8);
        cfg.l = Some(0);
        assert!(cfg.resolve(2).is_err());
        let mut cfg = StreamConfig::new(10, 8);
        cfg.beta = Some(-1.0);
        assert!(cfg.resolve(2).is_err());
        let mut cfg = StreamConfig::new(10, 8);
        cfg.cf_bits = 0.0;
        assert!(cfg.resolve(2).is_err());
    }
}
