//! Shared corpus builders and oracle helpers for the integration suites.

use std::collections::BTreeSet;

use limgame::generator::{generate, GenParams, GraphClass};
use limgame::graph::{GameGraph, Owner, PureMemorylessStrategy, RewardFunction};
use limgame::oracle::{chain_reach_probability, strategies, strategy_count};
use limgame::rational::{rational_from_i64, Rational};
use num_traits::One;

pub fn instance(seed: u64, states: usize, class: GraphClass, density: f64) -> (GameGraph, RewardFunction) {
    let params = GenParams {
        states,
        density,
        min_reward: -3,
        max_reward: 6,
        seed,
        class,
    };
    generate(&params).expect("generator emits valid instances")
}

/// 200 seeded instances with at most 7 states: MDPs, games and chains.
pub fn corpus() -> Vec<(u64, GameGraph, RewardFunction)> {
    (0..200u64)
        .map(|seed| {
            let class = match seed % 4 {
                0 | 1 => GraphClass::Mdp,
                2 => GraphClass::Game,
                _ => GraphClass::Chain,
            };
            let states = 2 + (seed as usize % 6);
            let density = 0.25 + 0.1 * ((seed % 3) as f64);
            let (graph, rewards) = instance(seed, states, class, density);
            (seed, graph, rewards)
        })
        .collect()
}

/// Boolean reward function of a state set.
pub fn indicator_rewards(graph: &GameGraph, set: &BTreeSet<usize>) -> RewardFunction {
    RewardFunction::new(
        graph
            .states()
            .map(|s| rational_from_i64(i64::from(set.contains(&s))))
            .collect(),
    )
}

/// Value-1 set for reaching `targets` in an MDP, by strategy enumeration
/// plus exact linear solves (memoryless strategies suffice for
/// reachability).
pub fn reach_value1(graph: &GameGraph, targets: &BTreeSet<usize>) -> BTreeSet<usize> {
    let controller = graph
        .mdp_controller()
        .expect("reach oracle works on MDPs")
        .unwrap_or(Owner::Player1);
    assert!(
        strategy_count(graph, controller) <= 1 << 16,
        "reach oracle instance too large"
    );
    let mut best: Vec<Rational> = vec![rational_from_i64(0); graph.state_count()];
    for choices in strategies(graph, controller) {
        let strategy = PureMemorylessStrategy::new(controller, choices);
        let chain = graph.fix_strategy(&strategy).unwrap();
        let reach = chain_reach_probability(&chain, targets).unwrap();
        for s in graph.states() {
            if reach[s] > best[s] {
                best[s] = reach[s].clone();
            }
        }
    }
    graph.states().filter(|&s| best[s].is_one()).collect()
}

/// Deterministic pseudo-random subset of `0..n`.
pub fn seeded_subset(seed: u64, n: usize) -> BTreeSet<usize> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9) ^ 0x5eed);
    (0..n).filter(|_| rng.gen_bool(0.5)).collect()
}
