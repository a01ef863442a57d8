//! Exact values for max-objective MDPs in converted form: positive rewards
//! only on absorbing player-owned copies, zero elsewhere.
//!
//! Policy iteration evaluates each strategy by exact linear solve and
//! greedily switches to strictly better successors with lowest-index
//! tie-breaks. A stable policy satisfies the characterizing linear-program
//! constraints, which `certify` re-checks from scratch as an optimality
//! certificate.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::graph::{Owner, PureMemorylessStrategy, ValueVector};
use crate::linalg::solve_linear;
use crate::rational::{format_rational, Rational};
use crate::reductions::ConvertedMdp;
use crate::{Error, Result};

/// Outcome of re-checking the four constraint families and greedy
/// stability. Empty `violations` means the solution is certified optimal.
#[derive(Debug, Clone)]
pub struct CertificateReport {
    pub violations: Vec<String>,
    pub constraints_checked: usize,
}

impl CertificateReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Certified optimal solution of a converted max MDP.
#[derive(Debug, Clone)]
pub struct MaxSolution {
    pub values: ValueVector,
    pub strategy: PureMemorylessStrategy,
    pub certificate: CertificateReport,
    pub improvement_rounds: usize,
}

enum Resolved {
    Known(Rational),
    Variable(usize),
}

/// Expected reward absorbed in the copies under a fixed strategy.
///
/// Player states and single-successor probabilistic states are forced, so
/// their values equal their successor's; the linear system is built only
/// over branching probabilistic states that can still reach a copy. States
/// that cannot reach any copy are never absorbed and are worth exactly 0.
pub fn evaluate_strategy(
    m: &ConvertedMdp,
    strategy: &PureMemorylessStrategy,
) -> Result<ValueVector> {
    m.validate()?;
    strategy.validate(&m.graph)?;
    let graph = &m.graph;
    let n = graph.state_count();

    let forced_successor = |s: usize| -> Option<usize> {
        if graph.owner(s).is_player() {
            strategy.choice(s)
        } else if graph.successors(s).len() == 1 {
            Some(graph.successors(s)[0])
        } else {
            None
        }
    };

    // Backward reachability to the copies along chain edges.
    let mut chain_preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for s in graph.states() {
        match forced_successor(s) {
            Some(t) => chain_preds[t].push(s),
            None => {
                for &t in graph.successors(s) {
                    chain_preds[t].push(s);
                }
            }
        }
    }
    let mut reaches_copy = vec![false; n];
    let mut queue: Vec<usize> = m.copies.iter().copied().collect();
    for &c in &m.copies {
        reaches_copy[c] = true;
    }
    while let Some(s) = queue.pop() {
        for &p in &chain_preds[s] {
            if !reaches_copy[p] {
                reaches_copy[p] = true;
                queue.push(p);
            }
        }
    }

    let branching: Vec<usize> = graph
        .states()
        .filter(|&s| reaches_copy[s] && !m.is_copy(s) && forced_successor(s).is_none())
        .collect();
    let var_index: BTreeMap<usize, usize> =
        branching.iter().enumerate().map(|(i, &s)| (s, i)).collect();

    // Follow forced edges until a copy, an unreachable state, or a system
    // variable. A forced cycle never absorbs and resolves to 0.
    let mut memo: Vec<Option<Rational>> = vec![None; n];
    let resolve = |start: usize, memo: &mut Vec<Option<Rational>>| -> Resolved {
        let mut path = Vec::new();
        let mut s = start;
        let outcome = loop {
            if m.is_copy(s) {
                break Resolved::Known(m.rewards.reward(s).clone());
            }
            if !reaches_copy[s] {
                break Resolved::Known(Rational::zero());
            }
            if let Some(&i) = var_index.get(&s) {
                break Resolved::Variable(i);
            }
            if let Some(v) = &memo[s] {
                break Resolved::Known(v.clone());
            }
            if path.contains(&s) {
                break Resolved::Known(Rational::zero());
            }
            path.push(s);
            s = forced_successor(s).expect("non-branching state is forced");
        };
        if let Resolved::Known(v) = &outcome {
            for visited in path {
                memo[visited] = Some(v.clone());
            }
        }
        outcome
    };

    let k = branching.len();
    let mut matrix = vec![vec![Rational::zero(); k]; k];
    let mut rhs = vec![vec![Rational::zero()]; k];
    for (i, &s) in branching.iter().enumerate() {
        matrix[i][i] = Rational::one();
        for (t, p) in graph.distribution(s) {
            match resolve(t, &mut memo) {
                Resolved::Known(v) => rhs[i][0] = &rhs[i][0] + &(p * &v),
                Resolved::Variable(j) => matrix[i][j] = &matrix[i][j] - p,
            }
        }
    }
    let solution = solve_linear(matrix, rhs)?;

    let mut values = Vec::with_capacity(n);
    for s in graph.states() {
        let value = match resolve(s, &mut memo) {
            Resolved::Known(v) => v,
            Resolved::Variable(i) => solution[i][0].clone(),
        };
        values.push(value);
    }
    Ok(ValueVector::new(values))
}

/// Re-checks every characterizing constraint with exact arithmetic:
/// nonnegativity, pinned copy values, player dominance over all edges
/// (which subsumes greedy stability), probabilistic balance, and that the
/// strategy attains its state's value.
pub fn certificate_report(
    m: &ConvertedMdp,
    values: &ValueVector,
    strategy: &PureMemorylessStrategy,
) -> CertificateReport {
    let graph = &m.graph;
    let mut violations = Vec::new();
    let mut checked = 0usize;

    if let Err(e) = strategy.validate(graph) {
        violations.push(e.to_string());
    }
    if values.len() != graph.state_count() {
        violations.push(format!(
            "value vector covers {} of {} states",
            values.len(),
            graph.state_count()
        ));
        return CertificateReport {
            violations,
            constraints_checked: checked,
        };
    }

    for s in graph.states() {
        let x = values.get(s);
        checked += 1;
        if *x < Rational::zero() {
            violations.push(format!("x[{}] = {} < 0", graph.name(s), format_rational(x)));
        }
        if m.is_copy(s) {
            checked += 1;
            if x != m.rewards.reward(s) {
                violations.push(format!(
                    "copy value x[{}] = {} != reward {}",
                    graph.name(s),
                    format_rational(x),
                    format_rational(m.rewards.reward(s))
                ));
            }
            continue;
        }
        match graph.owner(s) {
            Owner::Probabilistic => {
                checked += 1;
                let expected: Rational = graph.distribution(s).map(|(t, p)| p * values.get(t)).sum();
                if *x != expected {
                    violations.push(format!(
                        "probabilistic balance broken at {}: {} != {}",
                        graph.name(s),
                        format_rational(x),
                        format_rational(&expected)
                    ));
                }
            }
            _ => {
                for &t in graph.successors(s) {
                    checked += 1;
                    if x < values.get(t) {
                        violations.push(format!(
                            "x[{}] = {} < x[{}] = {}",
                            graph.name(s),
                            format_rational(x),
                            graph.name(t),
                            format_rational(values.get(t))
                        ));
                    }
                }
                checked += 1;
                match strategy.choice(s) {
                    Some(t) if values.get(t) == x => {}
                    Some(t) => violations.push(format!(
                        "strategy at {} attains {} instead of {}",
                        graph.name(s),
                        format_rational(values.get(t)),
                        format_rational(x)
                    )),
                    None => {}
                }
            }
        }
    }

    CertificateReport {
        violations,
        constraints_checked: checked,
    }
}

/// True iff all constraint families hold exactly and no player state has a
/// strictly better successor.
pub fn certify(m: &ConvertedMdp, solution: &MaxSolution) -> bool {
    certificate_report(m, &solution.values, &solution.strategy).ok()
}

/// Optimal values and strategy by exact policy iteration. The initial
/// strategy prefers a copy edge where available; each round switches every
/// player state with a strictly better successor to the lowest-index
/// best one. Per-round value vectors must improve monotonically, and the
/// final solution must pass the certificate; violations of either are
/// internal errors, never valid outputs.
pub fn solve_max(m: &ConvertedMdp) -> Result<MaxSolution> {
    m.validate()?;
    let graph = &m.graph;

    let mut choices: BTreeMap<usize, usize> = BTreeMap::new();
    let mut owner = Owner::Player1;
    for s in graph.states() {
        if !graph.owner(s).is_player() {
            continue;
        }
        owner = graph.owner(s);
        let pick = if m.is_copy(s) {
            s
        } else {
            graph
                .successors(s)
                .iter()
                .copied()
                .find(|&t| m.is_copy(t))
                .unwrap_or(graph.successors(s)[0])
        };
        choices.insert(s, pick);
    }
    let mut strategy = PureMemorylessStrategy::new(owner, choices);

    let mut rounds = 0usize;
    let mut previous: Option<ValueVector> = None;
    let values = loop {
        let values = evaluate_strategy(m, &strategy)?;
        if let Some(prev) = &previous {
            let decreased = graph.states().any(|s| values.get(s) < prev.get(s));
            let increased = graph.states().any(|s| values.get(s) > prev.get(s));
            if decreased || !increased {
                return Err(Error::CertificateFailure(
                    "policy iteration round was not strictly monotone".to_string(),
                ));
            }
        }

        let mut improved = BTreeMap::new();
        for s in graph.states() {
            if !graph.owner(s).is_player() || m.is_copy(s) {
                continue;
            }
            let current = values.get(strategy.choice(s).unwrap());
            let best = graph
                .successors(s)
                .iter()
                .copied()
                .max_by(|&a, &b| values.get(a).cmp(values.get(b)).then(b.cmp(&a)))
                .unwrap();
            if values.get(best) > current {
                improved.insert(s, best);
            }
        }
        if improved.is_empty() {
            break values;
        }
        let mut next = strategy.choices().clone();
        for (s, t) in improved {
            next.insert(s, t);
        }
        strategy = PureMemorylessStrategy::new(owner, next);
        previous = Some(values);
        rounds += 1;
    };

    let certificate = certificate_report(m, &values, &strategy);
    if !certificate.ok() {
        return Err(Error::CertificateFailure(format!(
            "optimal solution failed its own certificate: {}",
            certificate.violations.join("; ")
        )));
    }
    Ok(MaxSolution {
        values,
        strategy,
        certificate,
        improvement_rounds: rounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_game;
    use crate::rational::rational_from_i64;
    use crate::reductions::ConvertedMdp;

    fn instance(text: &str) -> ConvertedMdp {
        let (graph, rewards) = parse_game(text).unwrap();
        ConvertedMdp::from_instance(&graph, &rewards).unwrap()
    }

    fn forced_path() -> ConvertedMdp {
        instance(
            r#"{
            "states": [
                {"id": "s", "owner": "p1", "reward": "0"},
                {"id": "s^", "owner": "p1", "reward": "5"}
            ],
            "edges": [
                {"from": "s", "to": "s^"},
                {"from": "s^", "to": "s^"}
            ]
        }"#,
        )
    }

    /// Coin between copies worth 10 and 2; the player may also settle for
    /// the low copy directly.
    fn coin_choice() -> ConvertedMdp {
        instance(
            r#"{
            "states": [
                {"id": "s", "owner": "p1", "reward": "0"},
                {"id": "p", "owner": "prob", "reward": "0"},
                {"id": "hi^", "owner": "p1", "reward": "10"},
                {"id": "lo^", "owner": "p1", "reward": "2"}
            ],
            "edges": [
                {"from": "s", "to": "p"},
                {"from": "s", "to": "lo^"},
                {"from": "p", "to": "hi^", "prob": "1/2"},
                {"from": "p", "to": "lo^", "prob": "1/2"},
                {"from": "hi^", "to": "hi^"},
                {"from": "lo^", "to": "lo^"}
            ]
        }"#,
        )
    }

    #[test]
    fn forced_path_is_worth_its_copy() {
        let m = forced_path();
        let solution = solve_max(&m).unwrap();
        assert_eq!(*solution.values.get(0), rational_from_i64(5));
        assert_eq!(*solution.values.get(1), rational_from_i64(5));
    }

    #[test]
    fn coin_beats_settling_for_two() {
        let m = coin_choice();
        let solution = solve_max(&m).unwrap();
        let s = m.graph.index_of("s").unwrap();
        let p = m.graph.index_of("p").unwrap();
        assert_eq!(*solution.values.get(s), rational_from_i64(6));
        assert_eq!(*solution.values.get(p), rational_from_i64(6));
        assert_eq!(solution.strategy.choice(s), Some(p));
        assert!(certify(&m, &solution));
    }

    #[test]
    fn zero_cycle_under_a_bad_strategy_is_worth_zero() {
        let m = instance(
            r#"{
            "states": [
                {"id": "a", "owner": "p1", "reward": "0"},
                {"id": "b", "owner": "p1", "reward": "0"},
                {"id": "t^", "owner": "p1", "reward": "9"}
            ],
            "edges": [
                {"from": "a", "to": "b"},
                {"from": "b", "to": "a"},
                {"from": "b", "to": "t^"},
                {"from": "t^", "to": "t^"}
            ]
        }"#,
        );
        let a = m.graph.index_of("a").unwrap();
        let b = m.graph.index_of("b").unwrap();
        let t = m.graph.index_of("t^").unwrap();
        let cycling = PureMemorylessStrategy::new(
            Owner::Player1,
            [(a, b), (b, a), (t, t)].into_iter().collect(),
        );
        let values = evaluate_strategy(&m, &cycling).unwrap();
        assert_eq!(*values.get(a), Rational::zero());
        assert_eq!(*values.get(b), Rational::zero());
        assert_eq!(*values.get(t), rational_from_i64(9));

        // Policy iteration escapes the cycle.
        let solution = solve_max(&m).unwrap();
        assert_eq!(*solution.values.get(a), rational_from_i64(9));
        assert_eq!(solution.strategy.choice(b), Some(t));
    }

    #[test]
    fn deterministic_chain_carries_the_copy_value() {
        let m = instance(
            r#"{
            "states": [
                {"id": "a", "owner": "p1", "reward": "0"},
                {"id": "b", "owner": "p1", "reward": "0"},
                {"id": "q^", "owner": "p1", "reward": "7/3"}
            ],
            "edges": [
                {"from": "a", "to": "b"},
                {"from": "b", "to": "q^"},
                {"from": "q^", "to": "q^"}
            ]
        }"#,
        );
        let solution = solve_max(&m).unwrap();
        for s in m.graph.states() {
            assert_eq!(*solution.values.get(s), crate::rational::ratio(7, 3));
        }
    }

    #[test]
    fn perturbed_values_fail_the_certificate() {
        let m = coin_choice();
        let mut solution = solve_max(&m).unwrap();
        let p = m.graph.index_of("p").unwrap();
        let bumped = solution.values.get(p) + &Rational::one();
        solution.values.set(p, bumped);
        assert!(!certify(&m, &solution));
    }

    #[test]
    fn suboptimal_strategy_fails_the_certificate() {
        let m = coin_choice();
        let s = m.graph.index_of("s").unwrap();
        let p = m.graph.index_of("p").unwrap();
        let lo = m.graph.index_of("lo^").unwrap();
        let hi = m.graph.index_of("hi^").unwrap();
        let settle = PureMemorylessStrategy::new(
            Owner::Player1,
            [(s, lo), (lo, lo), (hi, hi)].into_iter().collect(),
        );
        let values = evaluate_strategy(&m, &settle).unwrap();
        assert_eq!(*values.get(s), rational_from_i64(2));
        let report = certificate_report(&m, &values, &settle);
        assert!(
            !report.ok(),
            "x[s] = 2 < x[p] = 6 must break player dominance"
        );
        let _ = p;
    }

    #[test]
    fn evaluate_rejects_partial_strategies() {
        let m = coin_choice();
        let s = m.graph.index_of("s").unwrap();
        let p = m.graph.index_of("p").unwrap();
        let partial =
            PureMemorylessStrategy::new(Owner::Player1, [(s, p)].into_iter().collect());
        assert!(matches!(
            evaluate_strategy(&m, &partial),
            Err(Error::InvalidStrategy(_))
        ));
    }
}
