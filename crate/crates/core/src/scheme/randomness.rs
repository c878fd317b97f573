use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::demand::{AuxDemand, VVector};
use crate::error::{Error, Result};
use crate::params::SchemeParams;

/// ChaCha stream numbers derived from one seed.
pub mod stream {
    pub const KEYS: u64 = 0;
    pub const T_CHOICE: u64 = 1;
    pub const LIBRARY: u64 = 2;
    pub const DEMANDS: u64 = 3;
}

/// A ChaCha8 generator for one named stream of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Server-side randomness of one session: the user keys and the index chosen
/// from each auxiliary demand's V-set.
#[derive(Clone, Debug)]
pub struct SessionRandomness {
    seed: u64,
    keys: Vec<usize>,
    t_choices: BTreeMap<Vec<usize>, usize>,
    t_rng: ChaCha8Rng,
}

impl SessionRandomness {
    /// Keys drawn uniformly from the key stream of `seed`.
    pub fn from_seed(params: &SchemeParams, seed: u64) -> Self {
        let mut key_rng = stream_rng(seed, stream::KEYS);
        let keys = (0..params.n_users())
            .map(|_| key_rng.random_range(0..params.n_files()))
            .collect();
        Self {
            seed,
            keys,
            t_choices: BTreeMap::new(),
            t_rng: stream_rng(seed, stream::T_CHOICE),
        }
    }

    /// Fixed keys; index choices still come from the seed's choice stream.
    pub fn with_keys(params: &SchemeParams, keys: Vec<usize>, seed: u64) -> Result<Self> {
        if keys.len() != params.n_users() {
            return Err(Error::LengthMismatch {
                expected: params.n_users(),
                actual: keys.len(),
            });
        }
        if let Some(bad) = keys.iter().find(|&&s| s >= params.n_files()) {
            return Err(Error::InvalidDemand(format!("key {bad} out of range")));
        }
        Ok(Self {
            seed,
            keys,
            t_choices: BTreeMap::new(),
            t_rng: stream_rng(seed, stream::T_CHOICE),
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn keys(&self) -> &[usize] {
        &self.keys
    }

    pub fn key(&self, user: usize) -> usize {
        self.keys[user]
    }

    /// Fixes the index used for `d`; it must belong to `v`.
    pub fn pin_t(&mut self, d: &AuxDemand, v: &VVector, t: usize) -> Result<()> {
        if !v.contains(t) {
            return Err(Error::ChoiceNotInV { t, v: v.set_form() });
        }
        self.t_choices.insert(d.digits().to_vec(), t);
        Ok(())
    }

    /// Draws a fresh index uniformly from `v` and records it for `d`.
    pub fn draw_t(&mut self, d: &AuxDemand, v: &VVector) -> usize {
        let set = v.set_form();
        let t = set[self.t_rng.random_range(0..set.len())];
        self.t_choices.insert(d.digits().to_vec(), t);
        t
    }

    pub fn t_for(&self, d: &AuxDemand) -> Option<usize> {
        self.t_choices.get(d.digits()).copied()
    }

    pub fn t_choices(&self) -> &BTreeMap<Vec<usize>, usize> {
        &self.t_choices
    }
}
