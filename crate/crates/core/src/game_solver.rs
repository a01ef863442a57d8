//! Values and optimal strategies for full turn-based stochastic games with
//! limsup and liminf objectives.
//!
//! Player-2 strategies are enumerated (pure memoryless strategies suffice
//! for both players): each fixed strategy leaves a player-1 MDP that the
//! polynomial pipeline solves exactly, and the game value is the pointwise
//! minimum. Witness strategies are verified by fixing them and re-solving
//! the residual MDP through the mirrored pipeline; minimizing objectives
//! are handled by swapping the players and negating rewards.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::graph::{GameGraph, Owner, PureMemorylessStrategy, RewardFunction, ValueVector};
use crate::oracle::{strategies, strategy_count};
use crate::pipeline::solve_mdp;
use crate::rational::Rational;
use crate::{Error, Objective, Result};

/// Exact game value with one optimal pure memoryless strategy per player.
#[derive(Debug, Clone)]
pub struct GameSolution {
    pub kind: Objective,
    pub values: ValueVector,
    pub strategy1: PureMemorylessStrategy,
    pub strategy2: PureMemorylessStrategy,
}

fn dual(kind: Objective) -> Objective {
    match kind {
        Objective::Limsup => Objective::Liminf,
        Objective::Liminf => Objective::Limsup,
        Objective::Max => Objective::Max,
    }
}

fn ensure_limit_objective(kind: Objective) -> Result<()> {
    if kind == Objective::Max {
        Err(Error::UnsupportedObjective("max"))
    } else {
        Ok(())
    }
}

/// `inf` over player 2 of the expected objective once player 1 is fixed:
/// the fixed graph is a player-2 MDP, solved by maximizing the dual
/// objective of the negated rewards on the mirrored graph.
fn minimizer_guarantee(
    fixed: &GameGraph,
    rewards: &RewardFunction,
    kind: Objective,
) -> Result<ValueVector> {
    let mirrored = fixed.mirror();
    let solved = solve_mdp(&mirrored, &rewards.negated(), dual(kind))?;
    Ok(solved.values.negated())
}

fn empty_strategy(owner: Owner) -> PureMemorylessStrategy {
    PureMemorylessStrategy::new(owner, BTreeMap::new())
}

/// Values of the player-1 MDP obtained by fixing one player-2 strategy.
fn maximizer_values_under(
    graph: &GameGraph,
    rewards: &RewardFunction,
    kind: Objective,
    pi: &PureMemorylessStrategy,
) -> Result<ValueVector> {
    let fixed = graph.fix_strategy(pi)?;
    Ok(solve_mdp(&fixed, rewards, kind)?.values)
}

/// Solves a game within the player-2 enumeration budget.
///
/// MDPs short-circuit to the pipeline (mirrored for player-2 MDPs, where
/// player 2 minimizes). For proper games, `strategy2` is the first
/// enumerated player-2 strategy whose best-response values match the
/// pointwise minimum everywhere, and `strategy1` is verified by re-solving
/// the residual player-2 MDP; failures of either are fatal internal checks.
pub fn solve_game(
    graph: &GameGraph,
    rewards: &RewardFunction,
    kind: Objective,
    budget: u64,
) -> Result<GameSolution> {
    ensure_limit_objective(kind)?;
    rewards.ensure_matches(graph)?;

    let has_p1 = graph.states_owned_by(Owner::Player1).next().is_some();
    let has_p2 = graph.states_owned_by(Owner::Player2).next().is_some();

    if !has_p2 {
        let solved = solve_mdp(graph, rewards, kind)?;
        return Ok(GameSolution {
            kind,
            values: solved.values,
            strategy1: solved.strategy,
            strategy2: empty_strategy(Owner::Player2),
        });
    }
    if !has_p1 {
        // Player 2 minimizes: mirror, negate, maximize the dual objective.
        let mirrored = graph.mirror();
        let solved = solve_mdp(&mirrored, &rewards.negated(), dual(kind))?;
        let strategy2 =
            PureMemorylessStrategy::new(Owner::Player2, solved.strategy.choices().clone());
        return Ok(GameSolution {
            kind,
            values: solved.values.negated(),
            strategy1: empty_strategy(Owner::Player1),
            strategy2,
        });
    }

    let candidates = strategy_count(graph, Owner::Player2);
    if candidates > budget as u128 {
        return Err(Error::BudgetExceeded(candidates, budget));
    }

    // Pass 1: pointwise minimum over player-2 strategies.
    let mut values: Option<ValueVector> = None;
    for choices in strategies(graph, Owner::Player2) {
        let pi = PureMemorylessStrategy::new(Owner::Player2, choices);
        let response = maximizer_values_under(graph, rewards, kind, &pi)?;
        values = Some(match values {
            None => response,
            Some(current) => ValueVector::new(
                graph
                    .states()
                    .map(|s| current.get(s).min(response.get(s)).clone())
                    .collect(),
            ),
        });
    }
    let values = values.expect("strategy enumeration is never empty");

    // Pass 2: the first strategy achieving the minimum at every state.
    let mut strategy2 = None;
    for choices in strategies(graph, Owner::Player2) {
        let pi = PureMemorylessStrategy::new(Owner::Player2, choices);
        if maximizer_values_under(graph, rewards, kind, &pi)? == values {
            strategy2 = Some(pi);
            break;
        }
    }
    let strategy2 = strategy2.ok_or_else(|| {
        Error::CertificateFailure(
            "no player-2 strategy is pointwise minimal; pure memoryless optimality is violated"
                .to_string(),
        )
    })?;

    // Player 1: try the best response against strategy2, verified by
    // re-solving its residual MDP; fall back to enumeration.
    let fixed = graph.fix_strategy(&strategy2)?;
    let candidate = solve_mdp(&fixed, rewards, kind)?.strategy;
    let strategy1 = if minimizer_guarantee(&graph.fix_strategy(&candidate)?, rewards, kind)?
        == values
    {
        candidate
    } else {
        let candidates = strategy_count(graph, Owner::Player1);
        if candidates > budget as u128 {
            return Err(Error::BudgetExceeded(candidates, budget));
        }
        let mut found = None;
        for choices in strategies(graph, Owner::Player1) {
            let sigma = PureMemorylessStrategy::new(Owner::Player1, choices);
            if minimizer_guarantee(&graph.fix_strategy(&sigma)?, rewards, kind)? == values {
                found = Some(sigma);
                break;
            }
        }
        found.ok_or_else(|| {
            Error::CertificateFailure(
                "no player-1 strategy guarantees the computed values; pure memoryless optimality is violated"
                    .to_string(),
            )
        })?
    };

    Ok(GameSolution {
        kind,
        values,
        strategy1,
        strategy2,
    })
}

/// Outcome of a threshold query with its verified witness strategy.
#[derive(Debug, Clone)]
pub struct Decision {
    pub satisfied: bool,
    pub value: Rational,
    /// strategy1 when the threshold is met, strategy2 otherwise.
    pub witness: PureMemorylessStrategy,
    pub solution: GameSolution,
}

/// Decides `Val(state) >= threshold` exactly (no epsilon anywhere) and
/// returns the witnessing strategy, already verified by `solve_game`'s
/// residual re-solves.
pub fn decide(
    graph: &GameGraph,
    rewards: &RewardFunction,
    kind: Objective,
    state: usize,
    threshold: &Rational,
    budget: u64,
) -> Result<Decision> {
    let solution = solve_game(graph, rewards, kind, budget)?;
    let value = solution.values.get(state).clone();
    let satisfied = value >= *threshold;
    let witness = if satisfied {
        solution.strategy1.clone()
    } else {
        solution.strategy2.clone()
    };
    Ok(Decision {
        satisfied,
        value,
        witness,
        solution,
    })
}

/// Per-state sums of both determinacy identities; all must be exactly 0.
#[derive(Debug, Clone)]
pub struct DeterminacyReport {
    /// `Val_1(limsup(r)) + Val_2(liminf(-r))` per state.
    pub limsup_sums: ValueVector,
    /// `Val_1(liminf(r)) + Val_2(limsup(-r))` per state.
    pub liminf_sums: ValueVector,
}

impl DeterminacyReport {
    pub fn all_zero(&self) -> bool {
        self.limsup_sums.iter().all(Rational::is_zero)
            && self.liminf_sums.iter().all(Rational::is_zero)
    }
}

/// Computes both sides of the determinacy identities independently:
/// player 2's value is obtained by solving the mirrored game with negated
/// rewards. A nonzero sum signals an implementation bug, reported rather
/// than errored.
pub fn check_determinacy(
    graph: &GameGraph,
    rewards: &RewardFunction,
    budget: u64,
) -> Result<DeterminacyReport> {
    let mirrored = graph.mirror();
    let negated = rewards.negated();

    let sums = |kind: Objective| -> Result<ValueVector> {
        let side1 = solve_game(graph, rewards, kind, budget)?.values;
        let side2 = solve_game(&mirrored, &negated, dual(kind), budget)?.values;
        Ok(ValueVector::new(
            graph
                .states()
                .map(|s| side1.get(s) + side2.get(s))
                .collect(),
        ))
    };
    Ok(DeterminacyReport {
        limsup_sums: sums(Objective::Limsup)?,
        liminf_sums: sums(Objective::Liminf)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_game;
    use crate::oracle;
    use crate::rational::rational_from_i64;
    use crate::DEFAULT_BUDGET;

    /// Player 2 chooses between a reward-9 loop and a reward-4 loop.
    fn minimizer_pick() -> (GameGraph, RewardFunction) {
        let text = r#"{
            "states": [
                {"id": "c", "owner": "p2", "reward": "0"},
                {"id": "hi", "owner": "p1", "reward": "9"},
                {"id": "lo", "owner": "p1", "reward": "4"}
            ],
            "edges": [
                {"from": "c", "to": "hi"},
                {"from": "c", "to": "lo"},
                {"from": "hi", "to": "hi"},
                {"from": "lo", "to": "lo"}
            ]
        }"#;
        parse_game(text).unwrap()
    }

    #[test]
    fn game_without_player2_matches_the_mdp_pipeline() {
        let text = r#"{
            "states": [
                {"id": "s", "owner": "p1", "reward": "1"},
                {"id": "t", "owner": "p1", "reward": "5"}
            ],
            "edges": [
                {"from": "s", "to": "t"},
                {"from": "s", "to": "s"},
                {"from": "t", "to": "t"}
            ]
        }"#;
        let (graph, rewards) = parse_game(text).unwrap();
        let game = solve_game(&graph, &rewards, Objective::Limsup, DEFAULT_BUDGET).unwrap();
        let mdp = solve_mdp(&graph, &rewards, Objective::Limsup).unwrap();
        assert_eq!(game.values, mdp.values);
        assert!(game.strategy2.choices().is_empty());
    }

    #[test]
    fn minimizer_prefers_the_low_loop() {
        let (graph, rewards) = minimizer_pick();
        let solution = solve_game(&graph, &rewards, Objective::Limsup, DEFAULT_BUDGET).unwrap();
        let c = graph.index_of("c").unwrap();
        let lo = graph.index_of("lo").unwrap();
        assert_eq!(*solution.values.get(c), rational_from_i64(4));
        assert_eq!(solution.strategy2.choice(c), Some(lo));
    }

    #[test]
    fn game_values_match_the_double_enumeration_oracle() {
        let text = r#"{
            "states": [
                {"id": "a", "owner": "p1", "reward": "2"},
                {"id": "b", "owner": "p2", "reward": "1"},
                {"id": "p", "owner": "prob", "reward": "0"},
                {"id": "hi", "owner": "p1", "reward": "8"},
                {"id": "lo", "owner": "p2", "reward": "3"}
            ],
            "edges": [
                {"from": "a", "to": "b"},
                {"from": "a", "to": "p"},
                {"from": "b", "to": "p"},
                {"from": "b", "to": "lo"},
                {"from": "p", "to": "hi", "prob": "1/3"},
                {"from": "p", "to": "lo", "prob": "2/3"},
                {"from": "hi", "to": "hi"},
                {"from": "lo", "to": "lo"},
                {"from": "lo", "to": "b"}
            ]
        }"#;
        let (graph, rewards) = parse_game(text).unwrap();
        for kind in [Objective::Limsup, Objective::Liminf] {
            let solution = solve_game(&graph, &rewards, kind, DEFAULT_BUDGET).unwrap();
            let oracle_values =
                oracle::enumerate_values(&graph, &rewards, kind, DEFAULT_BUDGET).unwrap();
            assert_eq!(solution.values, oracle_values, "objective {kind}");
        }
    }

    #[test]
    fn budget_guard_rejects_oversized_enumeration() {
        let (graph, rewards) = minimizer_pick();
        assert!(matches!(
            solve_game(&graph, &rewards, Objective::Limsup, 1),
            Err(Error::BudgetExceeded(2, 1))
        ));
    }

    #[test]
    fn decide_is_exact_at_the_boundary() {
        let (graph, rewards) = minimizer_pick();
        let c = graph.index_of("c").unwrap();
        let exactly = decide(
            &graph,
            &rewards,
            Objective::Limsup,
            c,
            &rational_from_i64(4),
            DEFAULT_BUDGET,
        )
        .unwrap();
        assert!(exactly.satisfied, ">= is non-strict at the boundary");

        let above = decide(
            &graph,
            &rewards,
            Objective::Limsup,
            c,
            &rational_from_i64(5),
            DEFAULT_BUDGET,
        )
        .unwrap();
        assert!(!above.satisfied);
        assert_eq!(above.witness.owner(), Owner::Player2);
    }

    #[test]
    fn determinacy_sums_vanish_on_a_chain_and_a_small_game() {
        let chain = r#"{
            "states": [
                {"id": "x", "owner": "prob", "reward": "1"},
                {"id": "y", "owner": "prob", "reward": "2"}
            ],
            "edges": [
                {"from": "x", "to": "y", "prob": "1"},
                {"from": "y", "to": "x", "prob": "1"}
            ]
        }"#;
        let (graph, rewards) = parse_game(chain).unwrap();
        let report = check_determinacy(&graph, &rewards, DEFAULT_BUDGET).unwrap();
        assert!(report.all_zero());

        let (game, game_rewards) = minimizer_pick();
        let report = check_determinacy(&game, &game_rewards, DEFAULT_BUDGET).unwrap();
        assert!(report.all_zero());
    }

    #[test]
    fn mirrored_game_with_negated_rewards_has_negated_values() {
        let (graph, rewards) = minimizer_pick();
        for kind in [Objective::Limsup, Objective::Liminf] {
            let original = solve_game(&graph, &rewards, kind, DEFAULT_BUDGET).unwrap();
            let mirrored =
                solve_game(&graph.mirror(), &rewards.negated(), dual(kind), DEFAULT_BUDGET)
                    .unwrap();
            assert_eq!(original.values, mirrored.values.negated());
        }
    }
}
