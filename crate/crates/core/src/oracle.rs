//! Independent ground truth: exact Markov-chain analysis, exhaustive
//! strategy and end-component enumeration, and seeded Monte Carlo
//! simulation.
//!
//! Nothing here shares code with the reduction pipeline beyond the graph
//! types, so agreement between the two is meaningful evidence.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{GameGraph, Owner, PureMemorylessStrategy, RewardFunction, ValueVector};
use crate::linalg::solve_linear;
use crate::rational::Rational;
use crate::{Error, Objective, Result};

/// Exact analysis of a finite Markov chain: its closed recurrent classes,
/// the absorption probability of every state into every class, and the
/// per-class objective values.
#[derive(Debug, Clone)]
pub struct ChainAnalysis {
    pub recurrent_classes: Vec<BTreeSet<usize>>,
    /// `absorption[s][c]` = probability that a play from `s` settles in
    /// class `c`. Rows sum to exactly 1.
    pub absorption: Vec<Vec<Rational>>,
    pub class_limsup: Vec<Rational>,
    pub class_liminf: Vec<Rational>,
    pub class_max: Vec<Rational>,
    expected_limsup: ValueVector,
    expected_liminf: ValueVector,
    expected_max: ValueVector,
}

impl ChainAnalysis {
    pub fn expected(&self, kind: Objective) -> &ValueVector {
        match kind {
            Objective::Limsup => &self.expected_limsup,
            Objective::Liminf => &self.expected_liminf,
            Objective::Max => &self.expected_max,
        }
    }

    pub fn class_value(&self, kind: Objective, class: usize) -> &Rational {
        match kind {
            Objective::Limsup => &self.class_limsup[class],
            Objective::Liminf => &self.class_liminf[class],
            Objective::Max => &self.class_max[class],
        }
    }
}

fn ensure_chain(chain: &GameGraph) -> Result<()> {
    if chain.is_chain() {
        Ok(())
    } else {
        Err(Error::NotAChain)
    }
}

/// Strongly connected components by iterative Kosaraju, kept local so the
/// oracle shares no algorithmic code with the solver modules.
fn chain_sccs(chain: &GameGraph) -> Vec<BTreeSet<usize>> {
    let n = chain.state_count();
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut stack = vec![(start, 0usize)];
        while let Some(&mut (s, ref mut cursor)) = stack.last_mut() {
            let succ = chain.successors(s);
            let mut descended = false;
            while *cursor < succ.len() {
                let t = succ[*cursor];
                *cursor += 1;
                if !seen[t] {
                    seen[t] = true;
                    stack.push((t, 0));
                    descended = true;
                    break;
                }
            }
            if !descended {
                order.push(s);
                stack.pop();
            }
        }
    }
    let preds = chain.predecessors();
    let mut assigned = vec![false; n];
    let mut components = Vec::new();
    for &root in order.iter().rev() {
        if assigned[root] {
            continue;
        }
        let mut members = BTreeSet::new();
        let mut queue = vec![root];
        assigned[root] = true;
        while let Some(s) = queue.pop() {
            members.insert(s);
            for &p in &preds[s] {
                if !assigned[p] {
                    assigned[p] = true;
                    queue.push(p);
                }
            }
        }
        components.push(members);
    }
    components
}

/// Closed recurrent classes: strongly connected components without an edge
/// leaving them.
fn closed_classes(chain: &GameGraph) -> Vec<BTreeSet<usize>> {
    chain_sccs(chain)
        .into_iter()
        .filter(|members| {
            members
                .iter()
                .all(|&s| chain.successors(s).iter().all(|t| members.contains(t)))
        })
        .collect()
}

/// Probability of ever visiting `targets`, per state, by exact linear
/// solve.
pub fn chain_reach_probability(chain: &GameGraph, targets: &BTreeSet<usize>) -> Result<Vec<Rational>> {
    ensure_chain(chain)?;
    let n = chain.state_count();
    let preds = chain.predecessors();

    // States that can reach the target set at all.
    let mut can_reach = vec![false; n];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for &t in targets {
        can_reach[t] = true;
        queue.push_back(t);
    }
    while let Some(s) = queue.pop_front() {
        for &p in &preds[s] {
            if !can_reach[p] {
                can_reach[p] = true;
                queue.push_back(p);
            }
        }
    }

    let unknown: Vec<usize> = chain
        .states()
        .filter(|s| can_reach[*s] && !targets.contains(s))
        .collect();
    let pos: BTreeMap<usize, usize> = unknown.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let k = unknown.len();
    let mut matrix = vec![vec![Rational::zero(); k]; k];
    let mut rhs = vec![vec![Rational::zero()]; k];
    for (i, &s) in unknown.iter().enumerate() {
        matrix[i][i] = Rational::one();
        for (t, p) in chain.distribution(s) {
            if targets.contains(&t) {
                rhs[i][0] = &rhs[i][0] + p;
            } else if let Some(&j) = pos.get(&t) {
                matrix[i][j] = &matrix[i][j] - p;
            }
        }
    }
    let solution = solve_linear(matrix, rhs)?;

    let mut result = vec![Rational::zero(); n];
    for &t in targets {
        result[t] = Rational::one();
    }
    for (i, &s) in unknown.iter().enumerate() {
        result[s] = solution[i][0].clone();
    }
    Ok(result)
}

/// Full chain analysis under a reward function.
///
/// Expected limsup/liminf values weight each class value by the absorption
/// probability. Expected max values additionally account for the largest
/// transient reward seen on the way, via one reachability solve per reward
/// level.
pub fn analyze_chain(chain: &GameGraph, rewards: &RewardFunction) -> Result<ChainAnalysis> {
    ensure_chain(chain)?;
    rewards.ensure_matches(chain)?;
    let n = chain.state_count();
    let classes = closed_classes(chain);
    let class_of: BTreeMap<usize, usize> = classes
        .iter()
        .enumerate()
        .flat_map(|(i, class)| class.iter().map(move |&s| (s, i)))
        .collect();

    // Absorption probabilities: recurrent states are fixed; transient
    // states solve one linear system with one column per class.
    let transient: Vec<usize> = chain.states().filter(|s| !class_of.contains_key(s)).collect();
    let pos: BTreeMap<usize, usize> = transient.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let k = transient.len();
    let mut matrix = vec![vec![Rational::zero(); k]; k];
    let mut rhs = vec![vec![Rational::zero(); classes.len()]; k];
    for (i, &s) in transient.iter().enumerate() {
        matrix[i][i] = Rational::one();
        for (t, p) in chain.distribution(s) {
            match class_of.get(&t) {
                Some(&c) => rhs[i][c] = &rhs[i][c] + p,
                None => {
                    let j = pos[&t];
                    matrix[i][j] = &matrix[i][j] - p;
                }
            }
        }
    }
    let solved = solve_linear(matrix, rhs)?;
    let mut absorption = vec![vec![Rational::zero(); classes.len()]; n];
    for (s, &c) in &class_of {
        absorption[*s][c] = Rational::one();
    }
    for (i, &s) in transient.iter().enumerate() {
        absorption[s] = solved[i].clone();
    }

    let class_limsup: Vec<Rational> = classes
        .iter()
        .map(|class| class.iter().map(|&s| rewards.reward(s).clone()).max().unwrap())
        .collect();
    let class_liminf: Vec<Rational> = classes
        .iter()
        .map(|class| class.iter().map(|&s| rewards.reward(s).clone()).min().unwrap())
        .collect();
    let class_max = class_limsup.clone();

    let weighted = |class_values: &[Rational]| -> ValueVector {
        ValueVector::new(
            (0..n)
                .map(|s| {
                    absorption[s]
                        .iter()
                        .zip(class_values)
                        .map(|(p, v)| p * v)
                        .sum()
                })
                .collect(),
        )
    };
    let expected_limsup = weighted(&class_limsup);
    let expected_liminf = weighted(&class_liminf);

    // E[max] = sum over levels v of v * Pr(max = v), with
    // Pr(max >= v) = Pr(ever visit a reward >= v state).
    let levels = rewards.levels();
    let mut expected_max = vec![Rational::zero(); n];
    let mut previous = vec![Rational::zero(); n];
    for level in levels {
        let targets: BTreeSet<usize> = chain.states().filter(|&s| rewards.reward(s) >= level).collect();
        let reach = chain_reach_probability(chain, &targets)?;
        for s in 0..n {
            let slice = &reach[s] - &previous[s];
            expected_max[s] = &expected_max[s] + &(level * &slice);
        }
        previous = reach;
    }

    Ok(ChainAnalysis {
        recurrent_classes: classes,
        absorption,
        class_limsup,
        class_liminf,
        class_max,
        expected_limsup,
        expected_liminf,
        expected_max: ValueVector::new(expected_max),
    })
}

/// Is `states` an end component: nonempty, δ-closed, strongly connected
/// with every member keeping a successor inside?
pub fn is_end_component(graph: &GameGraph, states: &BTreeSet<usize>) -> bool {
    if states.is_empty() {
        return false;
    }
    for &s in states {
        if graph.owner(s) == Owner::Probabilistic
            && graph.successors(s).iter().any(|t| !states.contains(t))
        {
            return false;
        }
        if !graph.successors(s).iter().any(|t| states.contains(t)) {
            return false;
        }
    }
    // Strong connectivity via internal edges: forward and backward search
    // from one member must cover the set.
    let start = *states.iter().next().unwrap();
    let preds = graph.predecessors();
    for forward in [true, false] {
        let mut seen: BTreeSet<usize> = [start].into_iter().collect();
        let mut queue = vec![start];
        while let Some(s) = queue.pop() {
            let neighbors: Vec<usize> = if forward {
                graph.successors(s).to_vec()
            } else {
                preds[s].clone()
            };
            for t in neighbors {
                if states.contains(&t) && seen.insert(t) {
                    queue.push(t);
                }
            }
        }
        if seen.len() != states.len() {
            return false;
        }
    }
    true
}

/// Every end component, found by checking all nonempty subsets against the
/// definition. Guarded to at most 20 states.
pub fn enumerate_end_components(graph: &GameGraph) -> Result<Vec<BTreeSet<usize>>> {
    let n = graph.state_count();
    if n > 20 {
        return Err(Error::EnumerationGuard(n));
    }
    let mut found = Vec::new();
    for mask in 1u32..(1u32 << n) {
        let states: BTreeSet<usize> = (0..n).filter(|s| mask & (1 << s) != 0).collect();
        if is_end_component(graph, &states) {
            found.push(states);
        }
    }
    Ok(found)
}

/// Iterator over all pure memoryless strategies of one player, in
/// lexicographic order of successor indices.
pub struct StrategyIter<'a> {
    graph: &'a GameGraph,
    states: Vec<usize>,
    counters: Vec<usize>,
    done: bool,
}

impl<'a> Iterator for StrategyIter<'a> {
    type Item = BTreeMap<usize, usize>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let choices: BTreeMap<usize, usize> = self
            .states
            .iter()
            .zip(&self.counters)
            .map(|(&s, &i)| (s, self.graph.successors(s)[i]))
            .collect();
        // Odometer increment.
        let mut pos = self.states.len();
        loop {
            if pos == 0 {
                self.done = true;
                break;
            }
            pos -= 1;
            self.counters[pos] += 1;
            if self.counters[pos] < self.graph.successors(self.states[pos]).len() {
                break;
            }
            self.counters[pos] = 0;
        }
        Some(choices)
    }
}

pub fn strategies(graph: &GameGraph, owner: Owner) -> StrategyIter<'_> {
    let states: Vec<usize> = graph.states_owned_by(owner).collect();
    StrategyIter {
        graph,
        counters: vec![0; states.len()],
        states,
        done: false,
    }
}

/// Number of pure memoryless strategies for `owner`, saturating.
pub fn strategy_count(graph: &GameGraph, owner: Owner) -> u128 {
    graph
        .states_owned_by(owner)
        .map(|s| graph.successors(s).len() as u128)
        .fold(1u128, u128::saturating_mul)
}

/// Exact values by exhaustive enumeration: per state, the maximum over
/// player-1 strategies of the minimum over player-2 strategies of the
/// expected objective in the induced Markov chain.
pub fn enumerate_values(
    graph: &GameGraph,
    rewards: &RewardFunction,
    kind: Objective,
    budget: u64,
) -> Result<ValueVector> {
    rewards.ensure_matches(graph)?;
    let pairs = strategy_count(graph, Owner::Player1)
        .saturating_mul(strategy_count(graph, Owner::Player2));
    if pairs > budget as u128 {
        return Err(Error::BudgetExceeded(pairs, budget));
    }

    let n = graph.state_count();
    let mut best: Option<Vec<Rational>> = None;
    for sigma in strategies(graph, Owner::Player1) {
        let fixed = if sigma.is_empty() {
            graph.clone()
        } else {
            graph.fix_strategy(&PureMemorylessStrategy::new(Owner::Player1, sigma))?
        };
        let mut worst: Option<Vec<Rational>> = None;
        for pi in strategies(&fixed, Owner::Player2) {
            let chain = if pi.is_empty() {
                fixed.clone()
            } else {
                fixed.fix_strategy(&PureMemorylessStrategy::new(Owner::Player2, pi))?
            };
            let expected = analyze_chain(&chain, rewards)?.expected(kind).clone();
            worst = Some(match worst {
                None => (0..n).map(|s| expected.get(s).clone()).collect(),
                Some(current) => (0..n)
                    .map(|s| current[s].clone().min(expected.get(s).clone()))
                    .collect(),
            });
        }
        let worst = worst.expect("strategy iterator yields at least one item");
        best = Some(match best {
            None => worst,
            Some(current) => (0..n)
                .map(|s| current[s].clone().max(worst[s].clone()))
                .collect(),
        });
    }
    Ok(ValueVector::new(best.expect("at least one strategy pair")))
}

/// Markov chain obtained by playing uniformly over the successors inside
/// `region` at every player state of `region`; player states outside play
/// uniformly over all successors. Used to check that an end component is a
/// single closed recurrent class under uniform play.
pub fn uniform_region_chain(graph: &GameGraph, region: &BTreeSet<usize>) -> Result<GameGraph> {
    let mut edges = Vec::new();
    let owners = vec![Owner::Probabilistic; graph.state_count()];
    for s in graph.states() {
        if graph.owner(s) == Owner::Probabilistic {
            for (t, p) in graph.distribution(s) {
                edges.push((s, t, Some(p.clone())));
            }
        } else {
            let inside: Vec<usize> = graph
                .successors(s)
                .iter()
                .copied()
                .filter(|t| region.contains(t))
                .collect();
            let pool = if region.contains(&s) && !inside.is_empty() {
                inside
            } else {
                graph.successors(s).to_vec()
            };
            let weight = Rational::new(BigInt::one(), BigInt::from(pool.len()));
            for t in pool {
                edges.push((s, t, Some(weight.clone())));
            }
        }
    }
    GameGraph::from_parts(graph.names().to_vec(), owners, edges)
}

/// Statistical estimate of an objective from finite play prefixes.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    /// Exact mean of the per-episode estimates.
    pub mean: Rational,
    /// Exact sample variance (denominator `episodes - 1`).
    pub variance: Rational,
    /// 95% confidence half-width, for display only.
    pub half_width: f64,
    pub episodes: u64,
    pub horizon: u64,
    pub seed: u64,
}

impl SimulationReport {
    /// Squared distance from `exact` compared against `k^2 *
    /// variance/episodes`, entirely in rationals.
    pub fn within_std_errors(&self, exact: &Rational, k: u32) -> bool {
        if self.variance.is_zero() {
            return self.mean == *exact;
        }
        let diff = &self.mean - exact;
        let bound = &self.variance * Rational::new(BigInt::from(k * k), BigInt::from(self.episodes));
        &diff * &diff <= bound
    }
}

enum Sampler {
    Forced(usize),
    Small { denom: u64, thresholds: Vec<(u64, usize)> },
    Big { denom: BigUint, thresholds: Vec<(BigUint, usize)> },
}

impl Sampler {
    fn build(chain: &GameGraph, s: usize) -> Sampler {
        let succ = chain.successors(s);
        if succ.len() == 1 {
            return Sampler::Forced(succ[0]);
        }
        let mut denom = BigInt::one();
        for (_, p) in chain.distribution(s) {
            denom = denom.lcm(p.denom());
        }
        let mut cumulative = BigInt::zero();
        let mut thresholds = Vec::with_capacity(succ.len());
        for (t, p) in chain.distribution(s) {
            cumulative += p.numer() * (&denom / p.denom());
            thresholds.push((cumulative.clone(), t));
        }
        debug_assert_eq!(cumulative, denom, "distribution sums to 1");
        match denom.to_u64() {
            Some(d) => Sampler::Small {
                denom: d,
                thresholds: thresholds
                    .into_iter()
                    .map(|(c, t)| (c.to_u64().unwrap(), t))
                    .collect(),
            },
            None => Sampler::Big {
                denom: denom.to_biguint().unwrap(),
                thresholds: thresholds
                    .into_iter()
                    .map(|(c, t)| (c.to_biguint().unwrap(), t))
                    .collect(),
            },
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> usize {
        match self {
            Sampler::Forced(t) => *t,
            Sampler::Small { denom, thresholds } => {
                let x = rng.gen_range(0..*denom);
                thresholds
                    .iter()
                    .find(|(c, _)| x < *c)
                    .map(|(_, t)| *t)
                    .expect("thresholds cover the denominator")
            }
            Sampler::Big { denom, thresholds } => {
                let x = rng.gen_biguint_below(denom);
                thresholds
                    .iter()
                    .find(|(c, _)| x < *c)
                    .map(|(_, t)| *t)
                    .expect("thresholds cover the denominator")
            }
        }
    }
}

/// Monte Carlo estimate of the objective from `start` under fixed pure
/// memoryless strategies, deterministic for a fixed seed. Episode `e` draws
/// from stream `e` of a ChaCha8 generator seeded with `seed`, so episodes
/// are independent and order-insensitive.
///
/// Limsup is estimated by the maximum reward in the tail after a burn-in of
/// half the horizon, liminf by the minimum over the same tail, max over the
/// entire prefix. This is a sanity check, not an exact method.
#[allow(clippy::too_many_arguments)]
pub fn simulate(
    graph: &GameGraph,
    rewards: &RewardFunction,
    strategy1: Option<&PureMemorylessStrategy>,
    strategy2: Option<&PureMemorylessStrategy>,
    kind: Objective,
    start: usize,
    episodes: u64,
    horizon: u64,
    seed: u64,
) -> Result<SimulationReport> {
    rewards.ensure_matches(graph)?;
    assert!(episodes >= 1 && horizon >= 1, "episodes and horizon must be positive");
    let mut chain = graph.clone();
    for strategy in [strategy1, strategy2].into_iter().flatten() {
        chain = chain.fix_strategy(strategy)?;
    }
    ensure_chain(&chain)?;

    let samplers: Vec<Sampler> = chain.states().map(|s| Sampler::build(&chain, s)).collect();
    let burn_in = horizon / 2;

    let mut sum = Rational::zero();
    let mut sum_squares = Rational::zero();
    for episode in 0..episodes {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(episode);

        let mut state = start;
        let mut tally: Option<Rational> = None;
        let consider = |tally: &mut Option<Rational>, reward: &Rational| {
            let better = match (&tally, kind) {
                (None, _) => true,
                (Some(t), Objective::Liminf) => reward < t,
                (Some(t), _) => reward > t,
            };
            if better {
                *tally = Some(reward.clone());
            }
        };
        if kind == Objective::Max || burn_in == 0 {
            consider(&mut tally, rewards.reward(state));
        }
        for step in 1..=horizon {
            state = samplers[state].sample(&mut rng);
            if kind == Objective::Max || step >= burn_in {
                consider(&mut tally, rewards.reward(state));
            }
        }
        let value = tally.expect("the window is never empty");
        sum_squares = sum_squares + &value * &value;
        sum = sum + value;
    }

    let n = Rational::from_integer(BigInt::from(episodes));
    let mean = &sum / &n;
    let variance = if episodes > 1 {
        (&sum_squares - &(&mean * &sum)) / Rational::from_integer(BigInt::from(episodes - 1))
    } else {
        Rational::zero()
    };
    let std_error = (crate::rational::to_f64(&variance) / episodes as f64).sqrt();
    Ok(SimulationReport {
        mean,
        variance: variance.abs(),
        half_width: 1.96 * std_error,
        episodes,
        horizon,
        seed,
    })
}
