//! Runtime-selectable solution methods.
//!
//! Every way of computing exact values sits behind [`ValueMethod`] and is
//! registered by name, so the CLI can pick one (or run two and compare)
//! from a flag. `reduction` is the polynomial pipeline (with player-2
//! strategy enumeration on proper games); `enumeration` is the brute-force
//! oracle. Both answer the same query and must agree exactly.

use crate::game_solver::solve_game;
use crate::graph::{GameGraph, RewardFunction, ValueVector};
use crate::max_solver::solve_max;
use crate::oracle::enumerate_values;
use crate::reductions::ConvertedMdp;
use crate::{Error, Objective, Result};

pub trait ValueMethod: Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    /// Exact values of `kind` for every state, player 1 maximizing.
    fn solve(
        &self,
        graph: &GameGraph,
        rewards: &RewardFunction,
        kind: Objective,
        budget: u64,
    ) -> Result<ValueVector>;
}

/// Reduction pipeline for limsup/liminf; the max objective accepts
/// pre-converted instances (positive rewards on absorbing player states)
/// and solves them by certified policy iteration.
pub struct ReductionMethod;

impl ValueMethod for ReductionMethod {
    fn name(&self) -> &'static str {
        "reduction"
    }

    fn description(&self) -> &'static str {
        "level-sweep reduction to a max-objective MDP; enumerates player-2 strategies on games"
    }

    fn solve(
        &self,
        graph: &GameGraph,
        rewards: &RewardFunction,
        kind: Objective,
        budget: u64,
    ) -> Result<ValueVector> {
        match kind {
            Objective::Max => {
                let converted = ConvertedMdp::from_instance(graph, rewards)?;
                Ok(solve_max(&converted)?.values)
            }
            _ => Ok(solve_game(graph, rewards, kind, budget)?.values),
        }
    }
}

/// Exhaustive strategy enumeration with exact chain analysis.
pub struct EnumerationMethod;

impl ValueMethod for EnumerationMethod {
    fn name(&self) -> &'static str {
        "enumeration"
    }

    fn description(&self) -> &'static str {
        "brute-force max-min over all pure memoryless strategy pairs"
    }

    fn solve(
        &self,
        graph: &GameGraph,
        rewards: &RewardFunction,
        kind: Objective,
        budget: u64,
    ) -> Result<ValueVector> {
        enumerate_values(graph, rewards, kind, budget)
    }
}

static METHODS: [&dyn ValueMethod; 2] = [&ReductionMethod, &EnumerationMethod];

pub fn methods() -> &'static [&'static dyn ValueMethod] {
    &METHODS
}

pub fn lookup(name: &str) -> Result<&'static dyn ValueMethod> {
    methods()
        .iter()
        .copied()
        .find(|m| m.name() == name)
        .ok_or_else(|| Error::UnknownMethod(name.to_string()))
}
