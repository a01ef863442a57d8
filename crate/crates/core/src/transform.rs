//! Structural transformations: reward shifting and bipartite normalization.

use std::collections::BTreeSet;

use num_traits::{One, Zero};

use crate::graph::{GameGraph, Owner, RewardFunction};
use crate::rational::Rational;
use crate::Result;

/// Pointwise addition of a constant; levels are re-derived.
pub fn shift_rewards(rewards: &RewardFunction, c: &Rational) -> RewardFunction {
    RewardFunction::new(rewards.rewards().iter().map(|r| r + c).collect())
}

/// Shifts so that every reward is strictly positive. Returns the shifted
/// function and the applied constant: `1 - min` when the minimum is not
/// positive, 0 otherwise.
pub fn make_positive(rewards: &RewardFunction) -> (RewardFunction, Rational) {
    let min = rewards.min().clone();
    if min > Rational::zero() {
        (rewards.clone(), Rational::zero())
    } else {
        let c = Rational::one() - min;
        (shift_rewards(rewards, &c), c)
    }
}

/// A dummy state inserted to break one same-kind edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DummyState {
    /// Index in the transformed graph.
    pub state: usize,
    /// Endpoints of the original edge the dummy replaces.
    pub source: usize,
    pub target: usize,
}

/// Witness of a bipartite normalization.
///
/// Original states keep their indices in the transformed graph; dummies are
/// appended after them. Every edge of the transformed graph connects a
/// player state with a probabilistic state, and splicing the dummies back
/// out recovers the original graph exactly.
#[derive(Debug, Clone)]
pub struct BipartiteMapping {
    pub original: GameGraph,
    pub transformed: GameGraph,
    /// Original state -> same state in the transformed graph (identity).
    pub forward: Vec<usize>,
    pub dummies: Vec<DummyState>,
}

impl BipartiteMapping {
    pub fn original_count(&self) -> usize {
        self.original.state_count()
    }

    pub fn is_original(&self, s: usize) -> bool {
        s < self.original.state_count()
    }

    /// Resolves a transformed-graph successor back to the original target:
    /// dummies forward to the edge target they stand on.
    pub fn original_target(&self, s: usize) -> usize {
        if self.is_original(s) {
            s
        } else {
            self.dummies[s - self.original.state_count()].target
        }
    }

    /// Reverses the construction by splicing every dummy's unique in/out
    /// edge pair; used to check the round-trip invariant.
    pub fn spliced_back(&self) -> Result<GameGraph> {
        let n = self.original.state_count();
        let g = &self.transformed;
        let mut edges = Vec::new();
        for s in 0..n {
            for &t in g.successors(s) {
                let target = self.original_target(t);
                let prob = if g.owner(s) == Owner::Probabilistic {
                    Some(g.probability(s, t).unwrap().clone())
                } else {
                    None
                };
                edges.push((s, target, prob));
            }
        }
        GameGraph::from_parts(
            g.names()[..n].to_vec(),
            (0..n).map(|s| g.owner(s)).collect(),
            edges,
        )
    }
}

pub(crate) fn fresh_name(base: String, taken: &BTreeSet<String>) -> String {
    if !taken.contains(&base) {
        return base;
    }
    let mut k = 2usize;
    loop {
        let candidate = format!("{base}.{k}");
        if !taken.contains(&candidate) {
            return candidate;
        }
        k += 1;
    }
}

/// Breaks every same-kind edge (player-player or probabilistic-
/// probabilistic, including self-loops) with a dummy state of the opposite
/// kind carrying the source state's reward.
///
/// A dummy on a player edge is probabilistic with a point distribution; a
/// dummy on a probabilistic edge is a player state with a single choice,
/// owned by the MDP's controlling player (player 1 on full games and
/// chains). Repeating the source reward at the dummy leaves the limsup and
/// liminf of every play's reward sequence unchanged.
pub fn bipartite_normalize(
    graph: &GameGraph,
    rewards: &RewardFunction,
) -> Result<(BipartiteMapping, RewardFunction)> {
    rewards.ensure_matches(graph)?;
    let n = graph.state_count();
    let dummy_owner = match graph.mdp_controller() {
        Ok(Some(owner)) => owner,
        _ => Owner::Player1,
    };

    let mut names: Vec<String> = graph.names().to_vec();
    let mut owners: Vec<Owner> = (0..n).map(|s| graph.owner(s)).collect();
    let mut new_rewards: Vec<Rational> = rewards.rewards().to_vec();
    let mut taken: BTreeSet<String> = names.iter().cloned().collect();
    let mut edges: Vec<(usize, usize, Option<Rational>)> = Vec::new();
    let mut dummies = Vec::new();

    for s in 0..n {
        for &t in graph.successors(s) {
            let prob = graph.probability(s, t).cloned();
            if graph.owner(s).is_player() == graph.owner(t).is_player() {
                let owner = if graph.owner(s).is_player() {
                    Owner::Probabilistic
                } else {
                    dummy_owner
                };
                let d = names.len();
                let name = fresh_name(
                    format!("{}~{}", graph.name(s), graph.name(t)),
                    &taken,
                );
                taken.insert(name.clone());
                names.push(name);
                owners.push(owner);
                new_rewards.push(rewards.reward(s).clone());
                dummies.push(DummyState {
                    state: d,
                    source: s,
                    target: t,
                });
                edges.push((s, d, prob));
                edges.push((
                    d,
                    t,
                    (owner == Owner::Probabilistic).then(Rational::one),
                ));
            } else {
                edges.push((s, t, prob));
            }
        }
    }

    let transformed = GameGraph::from_parts(names, owners, edges)?;
    let mapping = BipartiteMapping {
        original: graph.clone(),
        transformed,
        forward: (0..n).collect(),
        dummies,
    };
    let rewards = RewardFunction::new(new_rewards);
    Ok((mapping, rewards))
}
