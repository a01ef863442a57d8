//! Qualitative analyses on MDPs: maximal end components, probabilistic
//! attractors, and almost-sure winning sets for reachability, Büchi and
//! coBüchi objectives.
//!
//! The almost-sure operators are parameterized implicitly by the single
//! controlling player of the MDP: whichever player owns states is the
//! maximizer. Markov chains are accepted as MDPs without choices.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::graph::{GameGraph, Owner};
use crate::Result;

/// A δ-closed, strongly connected, nonempty state set in which every state
/// has a successor inside the set (a singleton needs a self-loop).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EndComponent {
    pub states: BTreeSet<usize>,
}

/// All maximal end components plus a state-to-component index.
#[derive(Debug, Clone)]
pub struct MecDecomposition {
    pub components: Vec<EndComponent>,
    pub membership: Vec<Option<usize>>,
}

impl MecDecomposition {
    pub fn component_of(&self, s: usize) -> Option<&EndComponent> {
        self.membership[s].map(|i| &self.components[i])
    }
}

/// Strongly connected components of the subgraph induced on `active`,
/// via iterative Kosaraju. Components are returned with sorted members.
fn sccs_within(graph: &GameGraph, active: &[bool]) -> Vec<Vec<usize>> {
    let n = graph.state_count();
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for start in 0..n {
        if !active[start] || seen[start] {
            continue;
        }
        // Depth-first search with an explicit stack; a state is pushed onto
        // `order` once all of its successors are exhausted.
        let mut stack = vec![(start, 0usize)];
        seen[start] = true;
        while let Some(&mut (s, ref mut next)) = stack.last_mut() {
            let succ = graph.successors(s);
            let mut advanced = false;
            while *next < succ.len() {
                let t = succ[*next];
                *next += 1;
                if active[t] && !seen[t] {
                    seen[t] = true;
                    stack.push((t, 0));
                    advanced = true;
                    break;
                }
            }
            if !advanced {
                order.push(s);
                stack.pop();
            }
        }
    }

    let preds = graph.predecessors();
    let mut component = vec![usize::MAX; n];
    let mut components: Vec<Vec<usize>> = Vec::new();
    for &start in order.iter().rev() {
        if component[start] != usize::MAX {
            continue;
        }
        let id = components.len();
        let mut members = vec![start];
        component[start] = id;
        let mut queue = vec![start];
        while let Some(s) = queue.pop() {
            for &p in &preds[s] {
                if active[p] && component[p] == usize::MAX {
                    component[p] = id;
                    members.push(p);
                    queue.push(p);
                }
            }
        }
        members.sort_unstable();
        components.push(members);
    }
    components
}

fn mask_of(n: usize, set: &BTreeSet<usize>) -> Vec<bool> {
    let mut mask = vec![false; n];
    for &s in set {
        mask[s] = true;
    }
    mask
}

/// Attractor of the probabilistic "player" within `active`: the least set
/// containing `base` that is grown by probabilistic states with some edge
/// into the set and player states with all (active) edges into the set.
fn attractor_within(graph: &GameGraph, base: &BTreeSet<usize>, active: &[bool]) -> BTreeSet<usize> {
    let n = graph.state_count();
    let preds = graph.predecessors();
    let mut inside = vec![false; n];
    let mut outside_degree = vec![0usize; n];
    for s in 0..n {
        if active[s] && graph.owner(s).is_player() {
            outside_degree[s] = graph.successors(s).iter().filter(|&&t| active[t]).count();
        }
    }

    let mut queue: VecDeque<usize> = VecDeque::new();
    for &s in base {
        if active[s] && !inside[s] {
            inside[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(s) = queue.pop_front() {
        for &p in &preds[s] {
            if !active[p] || inside[p] {
                continue;
            }
            let joins = match graph.owner(p) {
                Owner::Probabilistic => true,
                _ => {
                    outside_degree[p] -= 1;
                    outside_degree[p] == 0
                }
            };
            if joins {
                inside[p] = true;
                queue.push_back(p);
            }
        }
    }

    (0..n).filter(|&s| inside[s]).collect()
}

/// `Attr_P(base)` on the full graph: states from which the probabilistic
/// transitions force entry into `base` no matter how the players move.
pub fn attractor_p(graph: &GameGraph, base: &BTreeSet<usize>) -> BTreeSet<usize> {
    attractor_within(graph, base, &vec![true; graph.state_count()])
}

/// All maximal end components contained in `allowed`. Leak states are
/// judged against the full successor set, so a probabilistic state with an
/// edge leaving `allowed` never joins a component.
pub fn maximal_end_components_within(
    graph: &GameGraph,
    allowed: &BTreeSet<usize>,
) -> Vec<BTreeSet<usize>> {
    let mut result: Vec<BTreeSet<usize>> = Vec::new();
    let mut queue: Vec<BTreeSet<usize>> = vec![allowed.clone()];
    while let Some(candidate) = queue.pop() {
        if candidate.is_empty() {
            continue;
        }
        let mask = mask_of(graph.state_count(), &candidate);
        for members in sccs_within(graph, &mask) {
            let component: BTreeSet<usize> = members.iter().copied().collect();
            let leaky: BTreeSet<usize> = members
                .iter()
                .copied()
                .filter(|&s| {
                    graph.owner(s) == Owner::Probabilistic
                        && graph.successors(s).iter().any(|t| !component.contains(t))
                })
                .collect();
            if leaky.is_empty() {
                let is_component = members.len() >= 2 || graph.has_edge(members[0], members[0]);
                if is_component {
                    result.push(component);
                }
            } else {
                let submask = mask_of(graph.state_count(), &component);
                let attractor = attractor_within(graph, &leaky, &submask);
                let rest: BTreeSet<usize> =
                    component.difference(&attractor).copied().collect();
                queue.push(rest);
            }
        }
    }
    result.sort_by(|a, b| a.iter().next().cmp(&b.iter().next()));
    result
}

/// Maximal end components of an MDP; rejects graphs owned by both players.
pub fn mec_decompose(graph: &GameGraph) -> Result<MecDecomposition> {
    graph.mdp_controller()?;
    let all: BTreeSet<usize> = graph.states().collect();
    let components: Vec<EndComponent> = maximal_end_components_within(graph, &all)
        .into_iter()
        .map(|states| EndComponent { states })
        .collect();
    let mut membership = vec![None; graph.state_count()];
    for (i, component) in components.iter().enumerate() {
        for &s in &component.states {
            debug_assert!(membership[s].is_none(), "components must be disjoint");
            membership[s] = Some(i);
        }
    }
    Ok(MecDecomposition {
        components,
        membership,
    })
}

/// States of `alive` that can reach `targets` by a path inside `alive`.
fn backward_reachable(
    graph: &GameGraph,
    preds: &[Vec<usize>],
    alive: &[bool],
    targets: &BTreeSet<usize>,
) -> Vec<bool> {
    let mut reached = vec![false; graph.state_count()];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for &t in targets {
        if alive[t] && !reached[t] {
            reached[t] = true;
            queue.push_back(t);
        }
    }
    while let Some(s) = queue.pop_front() {
        for &p in &preds[s] {
            if alive[p] && !reached[p] {
                reached[p] = true;
                queue.push_back(p);
            }
        }
    }
    reached
}

/// The set of states from which the controlling player reaches `targets`
/// with probability 1. Computed by the two-phase graph fixpoint: repeatedly
/// drop states that cannot reach the targets inside the candidate set, and
/// non-target probabilistic states with an edge leaving it.
pub fn almost_sure_reach(graph: &GameGraph, targets: &BTreeSet<usize>) -> Result<BTreeSet<usize>> {
    graph.mdp_controller()?;
    let n = graph.state_count();
    let preds = graph.predecessors();
    let mut alive = vec![true; n];
    loop {
        let reached = backward_reachable(graph, &preds, &alive, targets);
        let mut removed = Vec::new();
        for s in 0..n {
            if !alive[s] {
                continue;
            }
            let leaks = graph.owner(s) == Owner::Probabilistic
                && !targets.contains(&s)
                && graph.successors(s).iter().any(|&t| !alive[t]);
            if !reached[s] || leaks {
                removed.push(s);
            }
        }
        if removed.is_empty() {
            break;
        }
        for s in removed {
            alive[s] = false;
        }
    }
    Ok((0..n).filter(|&s| alive[s]).collect())
}

/// An almost-sure winning set plus a pure memoryless witness defined on the
/// controlling player's states inside it.
#[derive(Debug, Clone)]
pub struct QualitativeWitness {
    pub winning: BTreeSet<usize>,
    pub choices: BTreeMap<usize, usize>,
}

/// Breadth-first distances to `targets` along edges inside `region`.
fn distances_within(
    graph: &GameGraph,
    preds: &[Vec<usize>],
    region: &BTreeSet<usize>,
    targets: &BTreeSet<usize>,
) -> Vec<Option<usize>> {
    let mut dist = vec![None; graph.state_count()];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for &t in targets {
        if region.contains(&t) {
            dist[t] = Some(0);
            queue.push_back(t);
        }
    }
    while let Some(s) = queue.pop_front() {
        let next = dist[s].unwrap() + 1;
        for &p in &preds[s] {
            if region.contains(&p) && dist[p].is_none() {
                dist[p] = Some(next);
                queue.push_back(p);
            }
        }
    }
    dist
}

/// Lowest-index successor of `s` inside `region` minimizing `dist`.
fn step_toward(
    graph: &GameGraph,
    region: &BTreeSet<usize>,
    dist: &[Option<usize>],
    s: usize,
) -> Option<usize> {
    graph
        .successors(s)
        .iter()
        .copied()
        .filter(|t| region.contains(t))
        .filter_map(|t| dist[t].map(|d| (d, t)))
        .min()
        .map(|(_, t)| t)
}

fn reach_witness(graph: &GameGraph, targets: &BTreeSet<usize>) -> Result<QualitativeWitness> {
    let winning = almost_sure_reach(graph, targets)?;
    let preds = graph.predecessors();
    let dist = distances_within(graph, &preds, &winning, targets);
    let mut choices = BTreeMap::new();
    for &s in &winning {
        if !graph.owner(s).is_player() {
            continue;
        }
        // Non-target states step strictly closer; target states keep an
        // in-region choice when one exists, otherwise any edge.
        let pick = step_toward(graph, &winning, &dist, s)
            .or_else(|| {
                graph
                    .successors(s)
                    .iter()
                    .copied()
                    .find(|t| winning.contains(t))
            })
            .unwrap_or(graph.successors(s)[0]);
        choices.insert(s, pick);
    }
    Ok(QualitativeWitness { winning, choices })
}

fn good_union(mecs: &[BTreeSet<usize>]) -> BTreeSet<usize> {
    mecs.iter().flatten().copied().collect()
}

/// In-component witness: inside `component`, move toward `targets` along a
/// shortest path; states already on a target pick any in-component edge.
fn overwrite_component_choices(
    graph: &GameGraph,
    preds: &[Vec<usize>],
    component: &BTreeSet<usize>,
    targets: &BTreeSet<usize>,
    choices: &mut BTreeMap<usize, usize>,
) {
    let local_targets: BTreeSet<usize> = targets.intersection(component).copied().collect();
    let dist = distances_within(graph, preds, component, &local_targets);
    for &s in component {
        if !graph.owner(s).is_player() {
            continue;
        }
        let pick = if local_targets.contains(&s) {
            graph
                .successors(s)
                .iter()
                .copied()
                .find(|t| component.contains(t))
        } else {
            step_toward(graph, component, &dist, s)
        };
        choices.insert(s, pick.expect("end component states keep an inside edge"));
    }
}

/// `W_1(Buchi(b))`: almost-sure reach of the union of maximal end
/// components intersecting `b`, with a witness that first reaches that
/// union and then keeps revisiting `b` inside its component.
pub fn almost_sure_buchi_with_strategy(
    graph: &GameGraph,
    buchi: &BTreeSet<usize>,
) -> Result<QualitativeWitness> {
    graph.mdp_controller()?;
    let all: BTreeSet<usize> = graph.states().collect();
    let mecs = maximal_end_components_within(graph, &all);
    let good: Vec<BTreeSet<usize>> = mecs
        .into_iter()
        .filter(|m| m.intersection(buchi).next().is_some())
        .collect();
    let mut witness = reach_witness(graph, &good_union(&good))?;
    let preds = graph.predecessors();
    for component in &good {
        overwrite_component_choices(graph, &preds, component, buchi, &mut witness.choices);
    }
    Ok(witness)
}

pub fn almost_sure_buchi(graph: &GameGraph, buchi: &BTreeSet<usize>) -> Result<BTreeSet<usize>> {
    Ok(almost_sure_buchi_with_strategy(graph, buchi)?.winning)
}

/// `W_1(coBuchi(c))`: almost-sure reach of the union of maximal end
/// components contained in `c` (computed by decomposing inside `c`, so
/// sub-components of larger end components are found), with a witness that
/// reaches the union and then never leaves its component.
pub fn almost_sure_cobuchi_with_strategy(
    graph: &GameGraph,
    cobuchi: &BTreeSet<usize>,
) -> Result<QualitativeWitness> {
    graph.mdp_controller()?;
    let good = maximal_end_components_within(graph, cobuchi);
    let mut witness = reach_witness(graph, &good_union(&good))?;
    let preds = graph.predecessors();
    for component in &good {
        // Staying anywhere inside the component suffices.
        overwrite_component_choices(graph, &preds, component, component, &mut witness.choices);
    }
    Ok(witness)
}

pub fn almost_sure_cobuchi(graph: &GameGraph, cobuchi: &BTreeSet<usize>) -> Result<BTreeSet<usize>> {
    Ok(almost_sure_cobuchi_with_strategy(graph, cobuchi)?.winning)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_game;
    use crate::Error;

    fn set(items: &[usize]) -> BTreeSet<usize> {
        items.iter().copied().collect()
    }

    /// p1 state s chooses between absorbing a and absorbing b.
    fn chooser() -> GameGraph {
        let text = r#"{
            "states": [
                {"id": "s", "owner": "p1", "reward": "0"},
                {"id": "a", "owner": "p1", "reward": "0"},
                {"id": "b", "owner": "p1", "reward": "0"}
            ],
            "edges": [
                {"from": "s", "to": "a"},
                {"from": "s", "to": "b"},
                {"from": "a", "to": "a"},
                {"from": "b", "to": "b"}
            ]
        }"#;
        parse_game(text).unwrap().0
    }

    #[test]
    fn self_loop_is_a_singleton_mec() {
        let text = r#"{
            "states": [{"id": "s", "owner": "p1", "reward": "0"}],
            "edges": [{"from": "s", "to": "s"}]
        }"#;
        let (graph, _) = parse_game(text).unwrap();
        let mecs = mec_decompose(&graph).unwrap();
        assert_eq!(mecs.components.len(), 1);
        assert_eq!(mecs.components[0].states, set(&[0]));
    }

    #[test]
    fn transient_chooser_lies_in_no_mec() {
        let graph = chooser();
        let mecs = mec_decompose(&graph).unwrap();
        let sets: Vec<_> = mecs.components.iter().map(|c| c.states.clone()).collect();
        assert_eq!(sets, vec![set(&[1]), set(&[2])]);
        assert_eq!(mecs.membership[0], None);
        assert_eq!(mecs.component_of(1).unwrap().states, set(&[1]));
    }

    #[test]
    fn mec_decompose_rejects_two_player_graphs() {
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
        let (graph, _) = parse_game(text).unwrap();
        assert!(matches!(mec_decompose(&graph), Err(Error::NotAnMdp)));
    }

    #[test]
    fn leaky_probabilistic_state_joins_no_mec() {
        let text = r#"{
            "states": [
                {"id": "p", "owner": "prob", "reward": "0"},
                {"id": "a", "owner": "p1", "reward": "0"},
                {"id": "out", "owner": "p1", "reward": "0"}
            ],
            "edges": [
                {"from": "p", "to": "a", "prob": "1/2"},
                {"from": "p", "to": "out", "prob": "1/2"},
                {"from": "a", "to": "p"},
                {"from": "out", "to": "out"}
            ]
        }"#;
        let (graph, _) = parse_game(text).unwrap();
        let mecs = mec_decompose(&graph).unwrap();
        let sets: Vec<_> = mecs.components.iter().map(|c| c.states.clone()).collect();
        assert_eq!(sets, vec![set(&[2])]);
    }

    #[test]
    fn attractor_of_empty_set_is_empty() {
        let graph = chooser();
        assert!(attractor_p(&graph, &BTreeSet::new()).is_empty());
    }

    #[test]
    fn probabilistic_state_with_one_edge_into_base_joins() {
        let text = r#"{
            "states": [
                {"id": "p", "owner": "prob", "reward": "0"},
                {"id": "u", "owner": "p1", "reward": "0"},
                {"id": "v", "owner": "p1", "reward": "0"}
            ],
            "edges": [
                {"from": "p", "to": "u", "prob": "1/2"},
                {"from": "p", "to": "v", "prob": "1/2"},
                {"from": "u", "to": "u"},
                {"from": "v", "to": "v"}
            ]
        }"#;
        let (graph, _) = parse_game(text).unwrap();
        let attr = attractor_p(&graph, &set(&[1]));
        assert_eq!(attr, set(&[0, 1]));
    }

    #[test]
    fn player_state_with_an_escaping_edge_stays_out() {
        // s has edges into the base and out of it: not attracted.
        let graph = chooser();
        let attr = attractor_p(&graph, &set(&[1]));
        assert_eq!(attr, set(&[1]));
    }

    #[test]
    fn almost_sure_reach_follows_player_chains() {
        let text = r#"{
            "states": [
                {"id": "a", "owner": "p1", "reward": "0"},
                {"id": "b", "owner": "p1", "reward": "0"},
                {"id": "t", "owner": "p1", "reward": "0"}
            ],
            "edges": [
                {"from": "a", "to": "b"},
                {"from": "b", "to": "t"},
                {"from": "t", "to": "t"}
            ]
        }"#;
        let (graph, _) = parse_game(text).unwrap();
        let win = almost_sure_reach(&graph, &set(&[2])).unwrap();
        assert_eq!(win, set(&[0, 1, 2]));
    }

    #[test]
    fn positive_escape_probability_excludes_a_state() {
        let text = r#"{
            "states": [
                {"id": "p", "owner": "prob", "reward": "0"},
                {"id": "t", "owner": "p1", "reward": "0"},
                {"id": "sink", "owner": "p1", "reward": "0"}
            ],
            "edges": [
                {"from": "p", "to": "t", "prob": "1/2"},
                {"from": "p", "to": "sink", "prob": "1/2"},
                {"from": "t", "to": "t"},
                {"from": "sink", "to": "sink"}
            ]
        }"#;
        let (graph, _) = parse_game(text).unwrap();
        let win = almost_sure_reach(&graph, &set(&[1])).unwrap();
        assert_eq!(win, set(&[1]));
    }

    #[test]
    fn buchi_with_all_states_wins_everywhere_and_empty_nowhere() {
        let graph = chooser();
        let all: BTreeSet<usize> = graph.states().collect();
        assert_eq!(almost_sure_buchi(&graph, &all).unwrap(), all);
        assert!(almost_sure_buchi(&graph, &BTreeSet::new()).unwrap().is_empty());
    }

    #[test]
    fn cobuchi_with_all_states_wins_everywhere() {
        let graph = chooser();
        let all: BTreeSet<usize> = graph.states().collect();
        assert_eq!(almost_sure_cobuchi(&graph, &all).unwrap(), all);
        // c missing every end component state loses everywhere.
        assert!(almost_sure_cobuchi(&graph, &set(&[0])).unwrap().is_empty());
    }

    #[test]
    fn cobuchi_finds_sub_components_of_larger_mecs() {
        // One MEC {a, b}; only a carries a self-loop inside c = {a}.
        let text = r#"{
            "states": [
                {"id": "a", "owner": "p1", "reward": "0"},
                {"id": "b", "owner": "p1", "reward": "0"}
            ],
            "edges": [
                {"from": "a", "to": "a"},
                {"from": "a", "to": "b"},
                {"from": "b", "to": "a"}
            ]
        }"#;
        let (graph, _) = parse_game(text).unwrap();
        let mecs = mec_decompose(&graph).unwrap();
        assert_eq!(mecs.components.len(), 1);
        assert_eq!(mecs.components[0].states, set(&[0, 1]));

        let win = almost_sure_cobuchi(&graph, &set(&[0])).unwrap();
        assert_eq!(win, set(&[0, 1]), "b reaches the sub-component {{a}}");
    }

    #[test]
    fn buchi_witness_strategy_moves_toward_the_target_set() {
        let text = r#"{
            "states": [
                {"id": "s", "owner": "p1", "reward": "0"},
                {"id": "p", "owner": "prob", "reward": "0"},
                {"id": "t", "owner": "p1", "reward": "0"}
            ],
            "edges": [
                {"from": "s", "to": "p"},
                {"from": "p", "to": "t", "prob": "1"},
                {"from": "t", "to": "p"}
            ]
        }"#;
        let (graph, _) = parse_game(text).unwrap();
        let witness = almost_sure_buchi_with_strategy(&graph, &set(&[2])).unwrap();
        assert_eq!(witness.winning, set(&[0, 1, 2]));
        assert_eq!(witness.choices[&0], 1, "s steps into the component");
        assert_eq!(witness.choices[&2], 1, "t keeps cycling inside");
    }

    #[test]
    fn attractor_is_monotone_and_idempotent_on_small_graphs() {
        let graph = chooser();
        let small = attractor_p(&graph, &set(&[1]));
        let large = attractor_p(&graph, &set(&[1, 2]));
        assert!(small.is_subset(&large));
        assert_eq!(attractor_p(&graph, &small), small);
        assert_eq!(attractor_p(&graph, &large), large);
    }
}
