//! Game graphs, reward functions, strategies and value vectors.
//!
//! States are indexed densely in declaration order; all tie-breaking in the
//! solvers uses the lowest index. String ids only appear at the I/O
//! boundary.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{format_rational, parse_rational, Rational};
use crate::{Error, Result};

/// Who resolves the choice at a state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Owner {
    Player1,
    Player2,
    Probabilistic,
}

impl Owner {
    pub fn is_player(self) -> bool {
        !matches!(self, Owner::Probabilistic)
    }

    pub fn tag(self) -> &'static str {
        match self {
            Owner::Player1 => "p1",
            Owner::Player2 => "p2",
            Owner::Probabilistic => "prob",
        }
    }

    fn from_tag(tag: &str) -> Result<Owner> {
        match tag {
            "p1" => Ok(Owner::Player1),
            "p2" => Ok(Owner::Player2),
            "prob" => Ok(Owner::Probabilistic),
            other => Err(Error::InvalidOwner(other.to_string())),
        }
    }
}

/// A turn-based stochastic game graph.
///
/// Invariants established by the constructor and preserved afterwards:
/// every state has at least one outgoing edge; the distribution of a
/// probabilistic state has positive entries summing to exactly 1; and an
/// edge leaves a probabilistic state iff its probability is positive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameGraph {
    names: Vec<String>,
    owners: Vec<Owner>,
    successors: Vec<Vec<usize>>,
    /// Aligned with `successors` for probabilistic states, empty otherwise.
    probabilities: Vec<Vec<Rational>>,
    index: HashMap<String, usize>,
}

impl GameGraph {
    /// Builds and validates a graph. `edges` carry a probability exactly
    /// when their source is probabilistic.
    pub fn from_parts(
        names: Vec<String>,
        owners: Vec<Owner>,
        edges: Vec<(usize, usize, Option<Rational>)>,
    ) -> Result<GameGraph> {
        assert_eq!(names.len(), owners.len(), "names and owners must align");
        let n = names.len();
        let mut index = HashMap::with_capacity(n);
        for (i, name) in names.iter().enumerate() {
            if index.insert(name.clone(), i).is_some() {
                return Err(Error::DuplicateState(name.clone()));
            }
        }

        let mut adjacency: Vec<BTreeMap<usize, Option<Rational>>> = vec![BTreeMap::new(); n];
        for (from, to, prob) in edges {
            if from >= n || to >= n {
                return Err(Error::UnknownState(format!("#{}", from.max(to))));
            }
            let is_prob = owners[from] == Owner::Probabilistic;
            match (&prob, is_prob) {
                (None, true) => {
                    return Err(Error::MissingProbability(
                        names[from].clone(),
                        names[to].clone(),
                    ))
                }
                (Some(_), false) => {
                    return Err(Error::UnexpectedProbability(
                        names[from].clone(),
                        names[to].clone(),
                    ))
                }
                _ => {}
            }
            if let Some(p) = &prob {
                if *p <= Rational::zero() {
                    return Err(Error::NonpositiveProbability(
                        names[from].clone(),
                        names[to].clone(),
                    ));
                }
            }
            if adjacency[from].insert(to, prob).is_some() {
                return Err(Error::DuplicateEdge(
                    names[from].clone(),
                    names[to].clone(),
                ));
            }
        }

        let mut successors = Vec::with_capacity(n);
        let mut probabilities = Vec::with_capacity(n);
        for s in 0..n {
            if adjacency[s].is_empty() {
                return Err(Error::NoOutgoingEdge(names[s].clone()));
            }
            let succ: Vec<usize> = adjacency[s].keys().copied().collect();
            let probs: Vec<Rational> = if owners[s] == Owner::Probabilistic {
                let probs: Vec<Rational> = adjacency[s].values().map(|p| p.clone().unwrap()).collect();
                let sum: Rational = probs.iter().cloned().sum();
                if !sum.is_one() {
                    return Err(Error::DistributionSum(
                        names[s].clone(),
                        format_rational(&sum),
                    ));
                }
                probs
            } else {
                Vec::new()
            };
            successors.push(succ);
            probabilities.push(probs);
        }

        Ok(GameGraph {
            names,
            owners,
            successors,
            probabilities,
            index,
        })
    }

    pub fn state_count(&self) -> usize {
        self.names.len()
    }

    pub fn states(&self) -> std::ops::Range<usize> {
        0..self.state_count()
    }

    pub fn owner(&self, s: usize) -> Owner {
        self.owners[s]
    }

    pub fn name(&self, s: usize) -> &str {
        &self.names[s]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn successors(&self, s: usize) -> &[usize] {
        &self.successors[s]
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.successors[from].binary_search(&to).is_ok()
    }

    /// Distribution of a probabilistic state as `(successor, probability)`
    /// pairs in successor order.
    pub fn distribution(&self, s: usize) -> impl Iterator<Item = (usize, &Rational)> + '_ {
        debug_assert_eq!(self.owners[s], Owner::Probabilistic);
        self.successors[s]
            .iter()
            .copied()
            .zip(self.probabilities[s].iter())
    }

    pub fn probability(&self, from: usize, to: usize) -> Option<&Rational> {
        let pos = self.successors[from].binary_search(&to).ok()?;
        self.probabilities[from].get(pos)
    }

    pub fn edge_count(&self) -> usize {
        self.successors.iter().map(Vec::len).sum()
    }

    pub fn states_owned_by(&self, owner: Owner) -> impl Iterator<Item = usize> + '_ {
        self.states().filter(move |&s| self.owners[s] == owner)
    }

    /// Reverse adjacency lists.
    pub fn predecessors(&self) -> Vec<Vec<usize>> {
        let mut preds = vec![Vec::new(); self.state_count()];
        for s in self.states() {
            for &t in self.successors(s) {
                preds[t].push(s);
            }
        }
        preds
    }

    /// The single player owning states, if this graph is an MDP. Graphs
    /// without player states report `Ok(None)` (a Markov chain is an MDP
    /// for either player); graphs with both kinds report an error.
    pub fn mdp_controller(&self) -> Result<Option<Owner>> {
        let has_p1 = self.states_owned_by(Owner::Player1).next().is_some();
        let has_p2 = self.states_owned_by(Owner::Player2).next().is_some();
        match (has_p1, has_p2) {
            (true, true) => Err(Error::NotAnMdp),
            (true, false) => Ok(Some(Owner::Player1)),
            (false, true) => Ok(Some(Owner::Player2)),
            (false, false) => Ok(None),
        }
    }

    pub fn is_mdp(&self) -> bool {
        self.mdp_controller().is_ok()
    }

    pub fn is_chain(&self) -> bool {
        self.states().all(|s| self.owner(s) == Owner::Probabilistic)
    }

    /// True when no edge connects two player states or two probabilistic
    /// states (self-loops count as same-kind adjacencies).
    pub fn is_bipartite(&self) -> bool {
        self.states().all(|s| {
            self.successors(s)
                .iter()
                .all(|&t| self.owner(s).is_player() != self.owner(t).is_player())
        })
    }

    /// Fixes one player's pure memoryless strategy: that player's states
    /// become probabilistic with a point distribution on the chosen
    /// successor. Fixing both players in turn yields a Markov chain.
    pub fn fix_strategy(&self, strategy: &PureMemorylessStrategy) -> Result<GameGraph> {
        strategy.validate(self)?;
        let mut edges = Vec::new();
        let mut owners = Vec::with_capacity(self.state_count());
        for s in self.states() {
            if self.owner(s) == strategy.owner() {
                owners.push(Owner::Probabilistic);
                edges.push((s, strategy.choice(s).unwrap(), Some(Rational::one())));
            } else {
                owners.push(self.owner(s));
                for &t in self.successors(s) {
                    edges.push((s, t, self.probability(s, t).cloned()));
                }
            }
        }
        GameGraph::from_parts(self.names.clone(), owners, edges)
    }

    /// Swaps the roles of the two players.
    pub fn mirror(&self) -> GameGraph {
        let mut mirrored = self.clone();
        for owner in &mut mirrored.owners {
            *owner = match owner {
                Owner::Player1 => Owner::Player2,
                Owner::Player2 => Owner::Player1,
                Owner::Probabilistic => Owner::Probabilistic,
            };
        }
        mirrored
    }

    /// Subgraph induced on `keep`, with unchanged distributions. Fails if a
    /// kept probabilistic state loses a successor (the removed set was not
    /// attractor-closed) or a kept player state loses every successor.
    ///
    /// Returns the restricted graph together with the map from new to old
    /// indices; state names are preserved.
    pub fn restrict(&self, keep: &BTreeSet<usize>) -> Result<(GameGraph, Vec<usize>)> {
        let kept: Vec<usize> = keep.iter().copied().collect();
        let mut old_to_new = vec![usize::MAX; self.state_count()];
        for (new, &old) in kept.iter().enumerate() {
            assert!(old < self.state_count(), "restrict: state out of range");
            old_to_new[old] = new;
        }

        let mut names = Vec::with_capacity(kept.len());
        let mut owners = Vec::with_capacity(kept.len());
        let mut edges = Vec::new();
        for (new, &old) in kept.iter().enumerate() {
            names.push(self.names[old].clone());
            owners.push(self.owners[old]);
            let mut any = false;
            for &t in self.successors(old) {
                if old_to_new[t] == usize::MAX {
                    if self.owners[old] == Owner::Probabilistic {
                        return Err(Error::RestrictionCutsDistribution(self.names[old].clone()));
                    }
                    continue;
                }
                any = true;
                let prob = if self.owners[old] == Owner::Probabilistic {
                    Some(self.probability(old, t).unwrap().clone())
                } else {
                    None
                };
                edges.push((new, old_to_new[t], prob));
            }
            if !any {
                return Err(Error::RestrictionIsolatesState(self.names[old].clone()));
            }
        }

        Ok((GameGraph::from_parts(names, owners, edges)?, kept))
    }
}

/// Map from states to exact rational rewards, with the derived descending
/// list of distinct reward levels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewardFunction {
    rewards: Vec<Rational>,
    levels: Vec<Rational>,
}

impl RewardFunction {
    pub fn new(rewards: Vec<Rational>) -> RewardFunction {
        let mut levels: Vec<Rational> = rewards.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
        levels.reverse();
        RewardFunction { rewards, levels }
    }

    pub fn reward(&self, s: usize) -> &Rational {
        &self.rewards[s]
    }

    pub fn rewards(&self) -> &[Rational] {
        &self.rewards
    }

    /// Distinct reward values in strictly descending order.
    pub fn levels(&self) -> &[Rational] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    pub fn min(&self) -> &Rational {
        self.levels.last().expect("reward function must be nonempty")
    }

    pub fn is_positive(&self) -> bool {
        *self.min() > Rational::zero()
    }

    pub fn negated(&self) -> RewardFunction {
        RewardFunction::new(self.rewards.iter().map(|r| -r.clone()).collect())
    }

    pub fn ensure_matches(&self, graph: &GameGraph) -> Result<()> {
        if self.len() == graph.state_count() {
            Ok(())
        } else {
            Err(Error::RewardMismatch {
                got: self.len(),
                want: graph.state_count(),
            })
        }
    }
}

/// Deterministic choice of a successor for every state of one player.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PureMemorylessStrategy {
    owner: Owner,
    choices: BTreeMap<usize, usize>,
}

impl PureMemorylessStrategy {
    pub fn new(owner: Owner, choices: BTreeMap<usize, usize>) -> PureMemorylessStrategy {
        assert!(owner.is_player(), "strategies belong to a player");
        PureMemorylessStrategy { owner, choices }
    }

    pub fn owner(&self) -> Owner {
        self.owner
    }

    pub fn choice(&self, s: usize) -> Option<usize> {
        self.choices.get(&s).copied()
    }

    pub fn choices(&self) -> &BTreeMap<usize, usize> {
        &self.choices
    }

    /// Domain must be exactly the owner's states and every choice must
    /// follow an existing edge.
    pub fn validate(&self, graph: &GameGraph) -> Result<()> {
        for s in graph.states_owned_by(self.owner) {
            match self.choices.get(&s) {
                None => {
                    return Err(Error::InvalidStrategy(format!(
                        "no choice at state `{}`",
                        graph.name(s)
                    )))
                }
                Some(&t) => {
                    if !graph.has_edge(s, t) {
                        return Err(Error::InvalidStrategy(format!(
                            "choice {} -> {} is not an edge",
                            graph.name(s),
                            graph.name(t)
                        )));
                    }
                }
            }
        }
        for &s in self.choices.keys() {
            if s >= graph.state_count() || graph.owner(s) != self.owner {
                return Err(Error::InvalidStrategy(format!(
                    "choice at state #{s} which is not owned by {}",
                    self.owner.tag()
                )));
            }
        }
        Ok(())
    }
}

/// Exact rational value per state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueVector {
    values: Vec<Rational>,
}

impl ValueVector {
    pub fn new(values: Vec<Rational>) -> ValueVector {
        ValueVector { values }
    }

    pub fn zeros(n: usize) -> ValueVector {
        ValueVector {
            values: vec![Rational::zero(); n],
        }
    }

    pub fn get(&self, s: usize) -> &Rational {
        &self.values[s]
    }

    pub fn set(&mut self, s: usize, value: Rational) {
        self.values[s] = value;
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Rational> {
        self.values.iter()
    }

    pub fn shifted(&self, c: &Rational) -> ValueVector {
        ValueVector {
            values: self.values.iter().map(|v| v + c).collect(),
        }
    }

    pub fn negated(&self) -> ValueVector {
        ValueVector {
            values: self.values.iter().map(|v| -v.clone()).collect(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RawState {
    id: String,
    owner: String,
    reward: String,
}

#[derive(Serialize, Deserialize)]
struct RawEdge {
    from: String,
    to: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    prob: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct RawInstance {
    states: Vec<RawState>,
    edges: Vec<RawEdge>,
}

/// Parses an instance file into a validated graph and reward function.
pub fn parse_game(text: &str) -> Result<(GameGraph, RewardFunction)> {
    let raw: RawInstance = serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))?;

    let mut names = Vec::with_capacity(raw.states.len());
    let mut owners = Vec::with_capacity(raw.states.len());
    let mut rewards = Vec::with_capacity(raw.states.len());
    let mut index: HashMap<&str, usize> = HashMap::new();
    for (i, state) in raw.states.iter().enumerate() {
        if index.insert(state.id.as_str(), i).is_some() {
            return Err(Error::DuplicateState(state.id.clone()));
        }
        names.push(state.id.clone());
        owners.push(Owner::from_tag(&state.owner)?);
        rewards.push(parse_rational(&state.reward)?);
    }

    let mut edges = Vec::with_capacity(raw.edges.len());
    for edge in &raw.edges {
        let from = *index
            .get(edge.from.as_str())
            .ok_or_else(|| Error::UnknownState(edge.from.clone()))?;
        let to = *index
            .get(edge.to.as_str())
            .ok_or_else(|| Error::UnknownState(edge.to.clone()))?;
        let prob = edge.prob.as_deref().map(parse_rational).transpose()?;
        edges.push((from, to, prob));
    }

    let graph = GameGraph::from_parts(names, owners, edges)?;
    Ok((graph, RewardFunction::new(rewards)))
}

/// Canonical serialization: states in declaration order, edges sorted by
/// source then target. Parsing the output reproduces the graph exactly.
pub fn serialize_game(graph: &GameGraph, rewards: &RewardFunction) -> String {
    let states = graph
        .states()
        .map(|s| RawState {
            id: graph.name(s).to_string(),
            owner: graph.owner(s).tag().to_string(),
            reward: format_rational(rewards.reward(s)),
        })
        .collect();
    let mut edges = Vec::new();
    for s in graph.states() {
        for &t in graph.successors(s) {
            edges.push(RawEdge {
                from: graph.name(s).to_string(),
                to: graph.name(t).to_string(),
                prob: graph.probability(s, t).map(format_rational),
            });
        }
    }
    serde_json::to_string_pretty(&RawInstance { states, edges }).expect("serialization cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{ratio, rational_from_i64};

    fn minimal_distribution() -> &'static str {
        r#"{
            "states": [
                {"id": "p", "owner": "prob", "reward": "0"},
                {"id": "a", "owner": "p1", "reward": "1"},
                {"id": "b", "owner": "p1", "reward": "2"}
            ],
            "edges": [
                {"from": "p", "to": "a", "prob": "1/2"},
                {"from": "p", "to": "b", "prob": "1/2"},
                {"from": "a", "to": "p"},
                {"from": "b", "to": "p"}
            ]
        }"#
    }

    #[test]
    fn accepts_minimal_valid_distribution() {
        let (graph, rewards) = parse_game(minimal_distribution()).unwrap();
        let p = graph.index_of("p").unwrap();
        assert_eq!(graph.owner(p), Owner::Probabilistic);
        assert_eq!(graph.successors(p).len(), 2);
        assert_eq!(*rewards.reward(graph.index_of("b").unwrap()), rational_from_i64(2));
        assert_eq!(rewards.levels(), &[rational_from_i64(2), rational_from_i64(1), rational_from_i64(0)]);
    }

    #[test]
    fn rejects_distribution_not_summing_to_one() {
        let text = r#"{
            "states": [
                {"id": "p", "owner": "prob", "reward": "0"},
                {"id": "a", "owner": "p1", "reward": "0"}
            ],
            "edges": [
                {"from": "p", "to": "a", "prob": "1/3"},
                {"from": "a", "to": "p"}
            ]
        }"#;
        match parse_game(text) {
            Err(Error::DistributionSum(state, sum)) => {
                assert_eq!(state, "p");
                assert_eq!(sum, "1/3");
            }
            other => panic!("expected distribution error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_state_without_outgoing_edge() {
        let text = r#"{
            "states": [
                {"id": "x", "owner": "p1", "reward": "0"},
                {"id": "y", "owner": "p1", "reward": "0"}
            ],
            "edges": [{"from": "y", "to": "x"}]
        }"#;
        match parse_game(text) {
            Err(Error::NoOutgoingEdge(state)) => assert_eq!(state, "x"),
            other => panic!("expected missing-edge error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_duplicate_state_and_unknown_reference() {
        let dup = r#"{
            "states": [
                {"id": "x", "owner": "p1", "reward": "0"},
                {"id": "x", "owner": "p1", "reward": "1"}
            ],
            "edges": [{"from": "x", "to": "x"}]
        }"#;
        assert!(matches!(parse_game(dup), Err(Error::DuplicateState(_))));

        let unknown = r#"{
            "states": [{"id": "x", "owner": "p1", "reward": "0"}],
            "edges": [{"from": "x", "to": "zz"}]
        }"#;
        match parse_game(unknown) {
            Err(Error::UnknownState(id)) => assert_eq!(id, "zz"),
            other => panic!("expected unknown-state error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_nonpositive_probability_and_malformed_rational() {
        let nonpos = r#"{
            "states": [
                {"id": "p", "owner": "prob", "reward": "0"},
                {"id": "a", "owner": "p1", "reward": "0"}
            ],
            "edges": [
                {"from": "p", "to": "a", "prob": "0"},
                {"from": "a", "to": "p"}
            ]
        }"#;
        assert!(matches!(parse_game(nonpos), Err(Error::NonpositiveProbability(_, _))));

        let malformed = r#"{
            "states": [{"id": "a", "owner": "p1", "reward": "1.5"}],
            "edges": [{"from": "a", "to": "a"}]
        }"#;
        assert!(matches!(parse_game(malformed), Err(Error::MalformedRational(_))));
    }

    #[test]
    fn probability_fields_must_match_owner() {
        let missing = r#"{
            "states": [
                {"id": "p", "owner": "prob", "reward": "0"},
                {"id": "a", "owner": "p1", "reward": "0"}
            ],
            "edges": [
                {"from": "p", "to": "a"},
                {"from": "a", "to": "p"}
            ]
        }"#;
        assert!(matches!(parse_game(missing), Err(Error::MissingProbability(_, _))));

        let extra = r#"{
            "states": [
                {"id": "a", "owner": "p1", "reward": "0"},
                {"id": "b", "owner": "p1", "reward": "0"}
            ],
            "edges": [
                {"from": "a", "to": "b", "prob": "1"},
                {"from": "b", "to": "a"}
            ]
        }"#;
        assert!(matches!(parse_game(extra), Err(Error::UnexpectedProbability(_, _))));
    }

    #[test]
    fn round_trip_is_structurally_identical() {
        let (graph, rewards) = parse_game(minimal_distribution()).unwrap();
        let text = serialize_game(&graph, &rewards);
        let (graph2, rewards2) = parse_game(&text).unwrap();
        assert_eq!(graph, graph2);
        assert_eq!(rewards, rewards2);
    }

    #[test]
    fn restrict_keeps_everything_is_identity() {
        let (graph, _) = parse_game(minimal_distribution()).unwrap();
        let all: BTreeSet<usize> = graph.states().collect();
        let (sub, kept) = graph.restrict(&all).unwrap();
        assert_eq!(sub, graph);
        assert_eq!(kept, vec![0, 1, 2]);
    }

    #[test]
    fn restrict_rejects_cutting_a_distribution() {
        let (graph, _) = parse_game(minimal_distribution()).unwrap();
        let keep: BTreeSet<usize> = [graph.index_of("p").unwrap(), graph.index_of("a").unwrap()]
            .into_iter()
            .collect();
        assert!(matches!(
            graph.restrict(&keep),
            Err(Error::RestrictionCutsDistribution(_))
        ));
    }

    #[test]
    fn restrict_rejects_isolating_a_player_state() {
        let text = r#"{
            "states": [
                {"id": "a", "owner": "p1", "reward": "0"},
                {"id": "b", "owner": "p1", "reward": "0"}
            ],
            "edges": [
                {"from": "a", "to": "b"},
                {"from": "b", "to": "a"},
                {"from": "b", "to": "b"}
            ]
        }"#;
        let (graph, _) = parse_game(text).unwrap();
        let keep: BTreeSet<usize> = [0].into_iter().collect();
        assert!(matches!(
            graph.restrict(&keep),
            Err(Error::RestrictionIsolatesState(_))
        ));
        let keep_b: BTreeSet<usize> = [1].into_iter().collect();
        let (sub, _) = graph.restrict(&keep_b).unwrap();
        assert_eq!(sub.state_count(), 1);
        assert!(sub.has_edge(0, 0));
    }

    #[test]
    fn strategy_validation_checks_domain_and_edges() {
        let (graph, _) = parse_game(minimal_distribution()).unwrap();
        let a = graph.index_of("a").unwrap();
        let b = graph.index_of("b").unwrap();
        let p = graph.index_of("p").unwrap();

        let good = PureMemorylessStrategy::new(
            Owner::Player1,
            [(a, p), (b, p)].into_iter().collect(),
        );
        good.validate(&graph).unwrap();

        let missing = PureMemorylessStrategy::new(Owner::Player1, [(a, p)].into_iter().collect());
        assert!(missing.validate(&graph).is_err());

        let not_an_edge =
            PureMemorylessStrategy::new(Owner::Player1, [(a, b), (b, p)].into_iter().collect());
        assert!(not_an_edge.validate(&graph).is_err());
    }

    #[test]
    fn mirror_swaps_players() {
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
        let mirrored = graph.mirror();
        assert_eq!(mirrored.owner(0), Owner::Player2);
        assert_eq!(mirrored.owner(1), Owner::Player1);
        assert!(graph.mdp_controller().is_err());
    }

    #[test]
    fn reward_levels_are_distinct_and_descending() {
        let rewards = RewardFunction::new(vec![
            ratio(1, 2),
            rational_from_i64(3),
            ratio(1, 2),
            rational_from_i64(-1),
        ]);
        assert_eq!(
            rewards.levels(),
            &[rational_from_i64(3), ratio(1, 2), rational_from_i64(-1)]
        );
        assert_eq!(*rewards.min(), rational_from_i64(-1));
    }
}
