//! End-to-end MDP solving: shift rewards positive, normalize to a
//! bipartite graph, reduce, convert, solve the max MDP, and map values and
//! strategy back to the input, un-shifting at the end.
//!
//! The controlling player of the MDP is the maximizer; chains are accepted
//! (the recovered strategy is then empty). Minimizing player-2 MDPs are
//! handled by the game solver through mirroring.

use std::collections::BTreeMap;

use crate::graph::{GameGraph, Owner, PureMemorylessStrategy, RewardFunction, ValueVector};
use crate::max_solver::{solve_max, MaxSolution};
use crate::rational::Rational;
use crate::reductions::{
    limsup_convert, liminf_convert, mdp_limsup_reduce, mdp_liminf_reduce, recover_strategy,
    ConvertedMdp, RecoveredStrategy, ReductionOutput,
};
use crate::transform::{bipartite_normalize, make_positive, BipartiteMapping};
use crate::{Error, Objective, Result};

/// Everything the pipeline produced, from the normalized graph down to the
/// certified max solution.
#[derive(Debug, Clone)]
pub struct MdpSolution {
    pub kind: Objective,
    /// Exact values on the input graph's states.
    pub values: ValueVector,
    /// Optimal pure memoryless strategy on the input graph.
    pub strategy: PureMemorylessStrategy,
    /// Constant that was added to make rewards positive.
    pub shift: Rational,
    pub bipartite: BipartiteMapping,
    /// Positive rewards on the bipartite graph.
    pub bipartite_rewards: RewardFunction,
    pub reduction: ReductionOutput,
    pub converted: ConvertedMdp,
    pub max_solution: MaxSolution,
    pub recovered: RecoveredStrategy,
}

/// Solves a limsup or liminf MDP exactly for its controlling player.
pub fn solve_mdp(
    graph: &GameGraph,
    rewards: &RewardFunction,
    kind: Objective,
) -> Result<MdpSolution> {
    rewards.ensure_matches(graph)?;
    let controller = graph.mdp_controller()?;

    let (positive, shift) = make_positive(rewards);
    let (bipartite, bipartite_rewards) = bipartite_normalize(graph, &positive)?;
    let working = &bipartite.transformed;

    let (reduction, converted) = match kind {
        Objective::Limsup => {
            let reduction = mdp_limsup_reduce(working, &bipartite_rewards)?;
            let converted = limsup_convert(working, &bipartite_rewards, &reduction)?;
            (reduction, converted)
        }
        Objective::Liminf => {
            let reduction = mdp_liminf_reduce(working, &bipartite_rewards)?;
            let converted = liminf_convert(working, &bipartite_rewards, &reduction)?;
            (reduction, converted)
        }
        Objective::Max => return Err(Error::UnsupportedObjective("max")),
    };

    let max_solution = solve_max(&converted)?;
    let recovered = recover_strategy(working, &bipartite_rewards, &reduction, &max_solution.strategy)?;

    // Original states keep their indices in the bipartite graph; un-shift.
    let values = ValueVector::new(
        graph
            .states()
            .map(|s| max_solution.values.get(s) - &shift)
            .collect(),
    );

    // Splice dummy hops out of the recovered strategy.
    let mut choices = BTreeMap::new();
    for s in graph.states() {
        if !graph.owner(s).is_player() {
            continue;
        }
        let picked = recovered
            .strategy
            .choice(s)
            .expect("recovered strategy covers original player states");
        choices.insert(s, bipartite.original_target(picked));
    }
    let strategy = PureMemorylessStrategy::new(controller.unwrap_or(Owner::Player1), choices);
    strategy.validate(graph)?;

    Ok(MdpSolution {
        kind,
        values,
        strategy,
        shift,
        bipartite,
        bipartite_rewards,
        reduction,
        converted,
        max_solution,
        recovered,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_game;
    use crate::oracle;
    use crate::rational::{ratio, rational_from_i64};
    use num_traits::Zero;

    fn coin() -> (GameGraph, RewardFunction) {
        let text = r#"{
            "states": [
                {"id": "s", "owner": "p1", "reward": "0"},
                {"id": "p", "owner": "prob", "reward": "0"},
                {"id": "hi", "owner": "p1", "reward": "10"},
                {"id": "lo", "owner": "p1", "reward": "2"}
            ],
            "edges": [
                {"from": "s", "to": "p"},
                {"from": "s", "to": "lo"},
                {"from": "p", "to": "hi", "prob": "1/2"},
                {"from": "p", "to": "lo", "prob": "1/2"},
                {"from": "hi", "to": "hi"},
                {"from": "lo", "to": "lo"}
            ]
        }"#;
        parse_game(text).unwrap()
    }

    #[test]
    fn coin_limsup_value_is_six_and_matches_the_oracle() {
        let (graph, rewards) = coin();
        let solution = solve_mdp(&graph, &rewards, Objective::Limsup).unwrap();
        let s = graph.index_of("s").unwrap();
        assert_eq!(*solution.values.get(s), rational_from_i64(6));

        let oracle_values =
            oracle::enumerate_values(&graph, &rewards, Objective::Limsup, 1 << 20).unwrap();
        assert_eq!(solution.values, oracle_values);

        // The emitted strategy takes the coin.
        let p = graph.index_of("p").unwrap();
        assert_eq!(solution.strategy.choice(s), Some(p));
    }

    #[test]
    fn strategy_reproduces_values_when_fixed() {
        let (graph, rewards) = coin();
        for kind in [Objective::Limsup, Objective::Liminf] {
            let solution = solve_mdp(&graph, &rewards, kind).unwrap();
            let chain = graph.fix_strategy(&solution.strategy).unwrap();
            let achieved = oracle::analyze_chain(&chain, &rewards).unwrap();
            assert_eq!(
                &solution.values,
                achieved.expected(kind),
                "fixed strategy must achieve the computed {kind} values"
            );
        }
    }

    #[test]
    fn negative_and_rational_rewards_are_shifted_and_restored() {
        let text = r#"{
            "states": [
                {"id": "a", "owner": "prob", "reward": "-1/2"},
                {"id": "b", "owner": "prob", "reward": "-3"}
            ],
            "edges": [
                {"from": "a", "to": "b", "prob": "1"},
                {"from": "b", "to": "a", "prob": "1"}
            ]
        }"#;
        let (graph, rewards) = parse_game(text).unwrap();
        let limsup = solve_mdp(&graph, &rewards, Objective::Limsup).unwrap();
        assert_eq!(*limsup.values.get(0), ratio(-1, 2));
        let liminf = solve_mdp(&graph, &rewards, Objective::Liminf).unwrap();
        assert_eq!(*liminf.values.get(0), rational_from_i64(-3));
        assert!(limsup.shift > Rational::zero());
    }

    #[test]
    fn pipeline_rejects_games_and_max() {
        let text = r#"{
            "states": [
                {"id": "a", "owner": "p1", "reward": "0"},
                {"id": "b", "owner": "p2", "reward": "0"}
            ],
            "edges": [
                {"from": "a", "to": "b"},
                {"from": "b", "to": "a"}
            ]
        }"#;
        let (game, rewards) = parse_game(text).unwrap();
        assert!(matches!(
            solve_mdp(&game, &rewards, Objective::Limsup),
            Err(Error::NotAnMdp)
        ));

        let (coin_graph, coin_rewards) = coin();
        assert!(matches!(
            solve_mdp(&coin_graph, &coin_rewards, Objective::Max),
            Err(Error::UnsupportedObjective("max"))
        ));
    }
}
