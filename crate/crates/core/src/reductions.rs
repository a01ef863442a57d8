//! Reductions from limsup/liminf MDPs to max-objective MDPs.
//!
//! Both reductions sweep the distinct reward levels from highest to lowest.
//! At each level they compute an almost-sure winning set in the surviving
//! subgraph (Büchi on the level set for limsup, coBüchi on the
//! at-least-this-level set for liminf), record the secured level for the
//! controlling player's states in it, and remove its probabilistic
//! attractor before moving on. The recorded states then receive absorbing
//! positive-reward copies, turning the limit objective into a max
//! objective.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;

use crate::graph::{GameGraph, Owner, PureMemorylessStrategy, RewardFunction};
use crate::max_solver;
use crate::qualitative::{
    almost_sure_buchi_with_strategy, almost_sure_cobuchi_with_strategy, attractor_p,
};
use crate::rational::Rational;
use crate::transform::fresh_name;
use crate::{Error, Objective, Result};

/// One level of the reduction sweep, in the indices of the input graph.
#[derive(Debug, Clone)]
pub struct LevelIteration {
    pub level: Rational,
    /// Almost-sure winning set for this level's objective.
    pub winning: BTreeSet<usize>,
    /// Probabilistic attractor of `winning`, removed before the next level.
    pub removed: BTreeSet<usize>,
    /// States surviving after the removal.
    pub alive_after: BTreeSet<usize>,
    /// Almost-sure witness choices on the winning set's player states.
    pub witness: BTreeMap<usize, usize>,
}

/// Output of a reduction sweep: which player states secured which reward
/// level, plus the per-level log.
#[derive(Debug, Clone)]
pub struct ReductionOutput {
    pub kind: Objective,
    /// Secured level per starred player state.
    pub assignments: BTreeMap<usize, Rational>,
    pub iterations: Vec<LevelIteration>,
    source_graph: GameGraph,
    source_rewards: RewardFunction,
}

impl ReductionOutput {
    pub fn starred_states(&self) -> BTreeSet<usize> {
        self.assignments.keys().copied().collect()
    }

    pub fn level_of(&self, state: usize) -> Option<&Rational> {
        self.assignments.get(&state)
    }

    pub fn produced_from(&self, graph: &GameGraph, rewards: &RewardFunction) -> bool {
        self.source_graph == *graph && self.source_rewards == *rewards
    }

    #[cfg(test)]
    pub(crate) fn forged_empty(graph: &GameGraph, rewards: &RewardFunction) -> ReductionOutput {
        ReductionOutput {
            kind: Objective::Limsup,
            assignments: BTreeMap::new(),
            iterations: Vec::new(),
            source_graph: graph.clone(),
            source_rewards: rewards.clone(),
        }
    }
}

fn validate_reduction_input(graph: &GameGraph, rewards: &RewardFunction) -> Result<Owner> {
    rewards.ensure_matches(graph)?;
    let controller = graph.mdp_controller()?;
    if !rewards.is_positive() {
        return Err(Error::NonpositiveReward);
    }
    if !graph.is_bipartite() {
        return Err(Error::NotBipartite);
    }
    // A bipartite graph alternates kinds along every edge, so a valid
    // bipartite MDP always has player states.
    Ok(controller.unwrap_or(Owner::Player1))
}

fn reduce(graph: &GameGraph, rewards: &RewardFunction, kind: Objective) -> Result<ReductionOutput> {
    let controller = validate_reduction_input(graph, rewards)?;
    let mut alive: BTreeSet<usize> = graph.states().collect();
    let mut assignments = BTreeMap::new();
    let mut iterations = Vec::new();

    for level in rewards.levels() {
        let level_set_alive = alive.iter().any(|&s| rewards.reward(s) == level);
        if !level_set_alive {
            // W_1 of an empty level set is empty, so the whole iteration
            // would be a no-op.
            iterations.push(LevelIteration {
                level: level.clone(),
                winning: BTreeSet::new(),
                removed: BTreeSet::new(),
                alive_after: alive.clone(),
                witness: BTreeMap::new(),
            });
            continue;
        }

        let (sub, kept) = graph.restrict(&alive)?;
        let target: BTreeSet<usize> = sub
            .states()
            .filter(|&s| match kind {
                Objective::Limsup => rewards.reward(kept[s]) == level,
                _ => rewards.reward(kept[s]) >= level,
            })
            .collect();
        let witness = match kind {
            Objective::Limsup => almost_sure_buchi_with_strategy(&sub, &target)?,
            Objective::Liminf => almost_sure_cobuchi_with_strategy(&sub, &target)?,
            Objective::Max => return Err(Error::UnsupportedObjective("max")),
        };
        let removed_sub = attractor_p(&sub, &witness.winning);

        let winning: BTreeSet<usize> = witness.winning.iter().map(|&s| kept[s]).collect();
        let removed: BTreeSet<usize> = removed_sub.iter().map(|&s| kept[s]).collect();
        let witness_choices: BTreeMap<usize, usize> = witness
            .choices
            .iter()
            .map(|(&s, &t)| (kept[s], kept[t]))
            .collect();

        for &u in &winning {
            if graph.owner(u) == controller {
                assignments.insert(u, level.clone());
            }
        }
        alive = alive.difference(&removed).copied().collect();
        iterations.push(LevelIteration {
            level: level.clone(),
            winning,
            removed,
            alive_after: alive.clone(),
            witness: witness_choices,
        });
    }

    Ok(ReductionOutput {
        kind,
        assignments,
        iterations,
        source_graph: graph.clone(),
        source_rewards: rewards.clone(),
    })
}

/// Level sweep with Büchi sets: a starred state can force, with probability
/// 1, that its assigned level is visited infinitely often.
pub fn mdp_limsup_reduce(graph: &GameGraph, rewards: &RewardFunction) -> Result<ReductionOutput> {
    reduce(graph, rewards, Objective::Limsup)
}

/// Level sweep with coBüchi sets: a starred state can force, with
/// probability 1, that eventually only rewards at least its assigned level
/// appear.
pub fn mdp_liminf_reduce(graph: &GameGraph, rewards: &RewardFunction) -> Result<ReductionOutput> {
    reduce(graph, rewards, Objective::Liminf)
}

/// A max-objective MDP with positive rewards concentrated on absorbing
/// player-owned copy states and zero rewards elsewhere.
#[derive(Debug, Clone)]
pub struct ConvertedMdp {
    pub graph: GameGraph,
    pub rewards: RewardFunction,
    /// Absorbing positive-reward states.
    pub copies: BTreeSet<usize>,
    /// Starred state -> its copy; filled by the conversions, empty for
    /// externally supplied max instances.
    pub copy_map: BTreeMap<usize, usize>,
}

impl ConvertedMdp {
    pub fn is_copy(&self, s: usize) -> bool {
        self.copies.contains(&s)
    }

    /// Checks the shape solve_max relies on.
    pub fn validate(&self) -> Result<()> {
        self.rewards.ensure_matches(&self.graph)?;
        self.graph.mdp_controller()?;
        for s in self.graph.states() {
            let reward = self.rewards.reward(s);
            if self.copies.contains(&s) {
                if *reward <= Rational::zero() {
                    return Err(Error::NotMaxForm(format!(
                        "copy `{}` must have a positive reward",
                        self.graph.name(s)
                    )));
                }
                if !self.graph.owner(s).is_player() {
                    return Err(Error::NotMaxForm(format!(
                        "copy `{}` must be player-owned",
                        self.graph.name(s)
                    )));
                }
                if self.graph.successors(s) != [s] {
                    return Err(Error::NotMaxForm(format!(
                        "copy `{}` must be absorbing",
                        self.graph.name(s)
                    )));
                }
            } else if !reward.is_zero() {
                return Err(Error::NotMaxForm(format!(
                    "non-copy state `{}` must have reward 0",
                    self.graph.name(s)
                )));
            }
        }
        Ok(())
    }

    /// Interprets a user-supplied instance as a max-objective MDP: states
    /// with nonzero reward must be absorbing player-owned states with
    /// positive reward, everything else carries reward 0.
    pub fn from_instance(graph: &GameGraph, rewards: &RewardFunction) -> Result<ConvertedMdp> {
        rewards.ensure_matches(graph)?;
        let copies: BTreeSet<usize> = graph
            .states()
            .filter(|&s| !rewards.reward(s).is_zero())
            .collect();
        let converted = ConvertedMdp {
            graph: graph.clone(),
            rewards: rewards.clone(),
            copies,
            copy_map: BTreeMap::new(),
        };
        converted.validate()?;
        Ok(converted)
    }
}

fn convert(
    graph: &GameGraph,
    rewards: &RewardFunction,
    out: &ReductionOutput,
    kind: Objective,
) -> Result<ConvertedMdp> {
    if out.kind != kind || !out.produced_from(graph, rewards) {
        return Err(Error::ProvenanceMismatch);
    }
    if out.assignments.is_empty() {
        return Err(Error::EmptyStarredSet);
    }

    let n = graph.state_count();
    let mut names: Vec<String> = graph.names().to_vec();
    let mut owners: Vec<Owner> = (0..n).map(|s| graph.owner(s)).collect();
    let mut new_rewards = vec![Rational::zero(); n];
    let mut taken: BTreeSet<String> = names.iter().cloned().collect();
    let mut edges: Vec<(usize, usize, Option<Rational>)> = Vec::new();
    for s in graph.states() {
        for &t in graph.successors(s) {
            edges.push((s, t, graph.probability(s, t).cloned()));
        }
    }

    let mut copies = BTreeSet::new();
    let mut copy_map = BTreeMap::new();
    for (&starred, level) in &out.assignments {
        let copy = names.len();
        let name = fresh_name(format!("{}^", graph.name(starred)), &taken);
        taken.insert(name.clone());
        names.push(name);
        owners.push(graph.owner(starred));
        new_rewards.push(level.clone());
        edges.push((starred, copy, None));
        edges.push((copy, copy, None));
        copies.insert(copy);
        copy_map.insert(starred, copy);
    }

    let converted = ConvertedMdp {
        graph: GameGraph::from_parts(names, owners, edges)?,
        rewards: RewardFunction::new(new_rewards),
        copies,
        copy_map,
    };
    converted.validate()?;
    Ok(converted)
}

/// Attaches an absorbing copy with reward equal to the secured limsup
/// level to every starred state.
pub fn limsup_convert(
    graph: &GameGraph,
    rewards: &RewardFunction,
    out: &ReductionOutput,
) -> Result<ConvertedMdp> {
    convert(graph, rewards, out, Objective::Limsup)
}

/// Liminf analog of [`limsup_convert`].
pub fn liminf_convert(
    graph: &GameGraph,
    rewards: &RewardFunction,
    out: &ReductionOutput,
) -> Result<ConvertedMdp> {
    convert(graph, rewards, out, Objective::Liminf)
}

/// A per-level region with its almost-sure witness choices.
#[derive(Debug, Clone)]
pub struct RegionPlan {
    pub level: Rational,
    pub region: BTreeSet<usize>,
    pub choices: BTreeMap<usize, usize>,
}

/// Strategy recovered from an optimal max strategy on the converted MDP.
///
/// `commit` holds the states where the max strategy takes the copy edge,
/// `phase1` the pre-commit choices, and `phase2` the per-level witness
/// regions to follow afterwards. `strategy` is the single pure memoryless
/// strategy obtained by switching to the level-`v` witness exactly at the
/// states of the level-`v` region whose optimal value equals `v` (the set a
/// committed play can visit) and following the max strategy elsewhere.
#[derive(Debug, Clone)]
pub struct RecoveredStrategy {
    pub strategy: PureMemorylessStrategy,
    pub commit: BTreeSet<usize>,
    pub phase1: BTreeMap<usize, usize>,
    pub phase2: Vec<RegionPlan>,
}

pub fn recover_strategy(
    graph: &GameGraph,
    rewards: &RewardFunction,
    out: &ReductionOutput,
    max_strategy: &PureMemorylessStrategy,
) -> Result<RecoveredStrategy> {
    let converted = convert(graph, rewards, out, out.kind)?;
    max_strategy.validate(&converted.graph)?;
    let values = max_solver::evaluate_strategy(&converted, max_strategy)?;
    let report = max_solver::certificate_report(&converted, &values, max_strategy);
    if !report.ok() {
        return Err(Error::CertificateFailure(format!(
            "max strategy is not optimal: {}",
            report.violations.join("; ")
        )));
    }

    let mut commit = BTreeSet::new();
    let mut phase1 = BTreeMap::new();
    for s in graph.states() {
        if !graph.owner(s).is_player() {
            continue;
        }
        let choice = max_strategy.choice(s).expect("strategy is total");
        if converted.copy_map.get(&s) == Some(&choice) {
            commit.insert(s);
        } else {
            phase1.insert(s, choice);
        }
    }

    let phase2: Vec<RegionPlan> = out
        .iterations
        .iter()
        .filter(|it| !it.winning.is_empty())
        .map(|it| RegionPlan {
            level: it.level.clone(),
            region: it.winning.clone(),
            choices: it.witness.clone(),
        })
        .collect();

    // Flatten: inside a region, exactly the states whose optimal value
    // equals the region's level are handed to the witness. Committed states
    // always qualify (their value is the copy reward), so the flattened
    // strategy never picks a copy edge.
    let mut flat = BTreeMap::new();
    for s in graph.states() {
        if !graph.owner(s).is_player() {
            continue;
        }
        let region_choice = phase2
            .iter()
            .find(|plan| plan.region.contains(&s) && *values.get(s) == plan.level)
            .map(|plan| plan.choices[&s]);
        let choice = match region_choice {
            Some(t) => t,
            None => *phase1
                .get(&s)
                .expect("states outside all regions follow the max strategy"),
        };
        flat.insert(s, choice);
    }
    let strategy = PureMemorylessStrategy::new(max_strategy.owner(), flat);
    strategy.validate(graph)?;

    Ok(RecoveredStrategy {
        strategy,
        commit,
        phase1,
        phase2,
    })
}
