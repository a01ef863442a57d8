//! Seeded random instance generation.
//!
//! Generated instances always satisfy the graph invariants: every state
//! keeps at least one outgoing edge and distributions are built from
//! integer weights, so they sum to exactly 1. Player states get at most
//! two successors to keep strategy spaces enumerable at test scale;
//! probabilistic branching scales with the density parameter.

use num_bigint::BigInt;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{GameGraph, Owner, RewardFunction};
use crate::rational::{rational_from_i64, Rational};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphClass {
    /// Player-1 and probabilistic states.
    Mdp,
    /// Both players and probabilistic states.
    Game,
    /// Probabilistic states only.
    Chain,
}

impl GraphClass {
    pub fn parse(text: &str) -> Option<GraphClass> {
        match text {
            "mdp" => Some(GraphClass::Mdp),
            "game" => Some(GraphClass::Game),
            "chain" => Some(GraphClass::Chain),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GenParams {
    pub states: usize,
    /// Edge density in (0, 1].
    pub density: f64,
    pub min_reward: i64,
    pub max_reward: i64,
    pub seed: u64,
    pub class: GraphClass,
}

impl Default for GenParams {
    fn default() -> GenParams {
        GenParams {
            states: 6,
            density: 0.3,
            min_reward: -3,
            max_reward: 6,
            seed: 0,
            class: GraphClass::Mdp,
        }
    }
}

impl GenParams {
    pub fn validate(&self) -> Result<()> {
        if self.states < 1 {
            return Err(Error::InvalidStrategy("state count must be >= 1".into()));
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return Err(Error::InvalidStrategy("density must lie in (0, 1]".into()));
        }
        if self.min_reward > self.max_reward {
            return Err(Error::InvalidStrategy("reward range is empty".into()));
        }
        Ok(())
    }
}

pub fn generate(params: &GenParams) -> Result<(GameGraph, RewardFunction)> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let n = params.states;

    let owners: Vec<Owner> = (0..n)
        .map(|_| match params.class {
            GraphClass::Chain => Owner::Probabilistic,
            GraphClass::Mdp => {
                if rng.gen_range(0..2) == 0 {
                    Owner::Player1
                } else {
                    Owner::Probabilistic
                }
            }
            GraphClass::Game => match rng.gen_range(0..3) {
                0 => Owner::Player1,
                1 => Owner::Player2,
                _ => Owner::Probabilistic,
            },
        })
        .collect();
    let rewards: Vec<Rational> = (0..n)
        .map(|_| rational_from_i64(rng.gen_range(params.min_reward..=params.max_reward)))
        .collect();

    let names: Vec<String> = (0..n).map(|s| format!("s{s}")).collect();
    let max_extra = (((n - 1) as f64) * params.density).round() as usize;
    let mut edges = Vec::new();
    for s in 0..n {
        let degree = if owners[s].is_player() {
            if n > 1 && rng.gen_bool(params.density) {
                2
            } else {
                1
            }
        } else {
            1 + rng.gen_range(0..=max_extra)
        };
        let targets = sample(&mut rng, n, degree.min(n));
        if owners[s] == Owner::Probabilistic {
            let weights: Vec<u32> = (0..targets.len()).map(|_| rng.gen_range(1..=4)).collect();
            let total: u32 = weights.iter().sum();
            for (t, w) in targets.into_iter().zip(weights) {
                edges.push((
                    s,
                    t,
                    Some(Rational::new(BigInt::from(w), BigInt::from(total))),
                ));
            }
        } else {
            for t in targets {
                edges.push((s, t, None));
            }
        }
    }

    let graph = GameGraph::from_parts(names, owners, edges)?;
    Ok((graph, RewardFunction::new(rewards)))
}
