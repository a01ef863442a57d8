//! Exact solver for turn-based stochastic games and MDPs with limsup,
//! liminf and max objectives.
//!
//! All arithmetic is performed over arbitrary-precision rationals; there are
//! no floating-point code paths in any solver. The library is organized
//! around a polynomial reduction pipeline for MDPs (end-component analysis,
//! almost-sure Büchi/coBüchi sets, a conversion to max-objective MDPs solved
//! by exact policy iteration) and a brute-force enumeration oracle that
//! recomputes the same values independently for cross-checking.

pub mod game_solver;
pub mod generator;
pub mod graph;
pub mod linalg;
pub mod max_solver;
pub mod oracle;
pub mod pipeline;
pub mod qualitative;
pub mod rational;
pub mod reductions;
pub mod solver;
pub mod transform;

use thiserror::Error;

pub use graph::{GameGraph, Owner, PureMemorylessStrategy, RewardFunction, ValueVector};
pub use rational::Rational;

/// Default cap on the number of enumerated pure memoryless strategies.
pub const DEFAULT_BUDGET: u64 = 1 << 20;

/// Objective assigning a value to every infinite play.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Objective {
    /// Largest reward occurring infinitely often.
    Limsup,
    /// Liminf of the reward sequence.
    Liminf,
    /// Largest reward occurring anywhere in the play.
    Max,
}

impl Objective {
    pub fn name(self) -> &'static str {
        match self {
            Objective::Limsup => "limsup",
            Objective::Liminf => "liminf",
            Objective::Max => "max",
        }
    }

    pub fn parse(text: &str) -> Option<Objective> {
        match text {
            "limsup" => Some(Objective::Limsup),
            "liminf" => Some(Objective::Liminf),
            "max" => Some(Objective::Max),
            _ => None,
        }
    }
}

impl std::fmt::Display for Objective {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance JSON: {0}")]
    Json(String),
    #[error("duplicate state id `{0}`")]
    DuplicateState(String),
    #[error("unknown state reference `{0}`")]
    UnknownState(String),
    #[error("malformed rational literal `{0}`")]
    MalformedRational(String),
    #[error("invalid owner tag `{0}` (expected \"p1\", \"p2\" or \"prob\")")]
    InvalidOwner(String),
    #[error("duplicate edge {0} -> {1}")]
    DuplicateEdge(String, String),
    #[error("edge {0} -> {1} leaves a probabilistic state and needs a probability")]
    MissingProbability(String, String),
    #[error("edge {0} -> {1} must not carry a probability")]
    UnexpectedProbability(String, String),
    #[error("nonpositive probability on edge {0} -> {1}")]
    NonpositiveProbability(String, String),
    #[error("distribution at `{0}` sums to {1} != 1")]
    DistributionSum(String, String),
    #[error("state `{0}` has no outgoing edge")]
    NoOutgoingEdge(String),
    #[error("reward function covers {got} states but the graph has {want}")]
    RewardMismatch { got: usize, want: usize },
    #[error("restriction removes a successor of kept probabilistic state `{0}`")]
    RestrictionCutsDistribution(String),
    #[error("restriction leaves kept state `{0}` without successors")]
    RestrictionIsolatesState(String),
    #[error("expected an MDP, but both players own states")]
    NotAnMdp,
    #[error("graph is not bipartite between player and probabilistic states")]
    NotBipartite,
    #[error("reward function must be strictly positive")]
    NonpositiveReward,
    #[error("objective `{0}` is not supported by this operation")]
    UnsupportedObjective(&'static str),
    #[error("reduction output was produced from a different graph or reward function")]
    ProvenanceMismatch,
    #[error("reduction produced an empty starred set")]
    EmptyStarredSet,
    #[error("{0} pure memoryless strategies exceed the enumeration budget of {1}")]
    BudgetExceeded(u128, u64),
    #[error("chain analysis requires a graph with only probabilistic states")]
    NotAChain,
    #[error("subset enumeration is limited to 20 states, got {0}")]
    EnumerationGuard(usize),
    #[error("instance is not in max-objective form: {0}")]
    NotMaxForm(String),
    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),
    #[error("unknown solver method `{0}`")]
    UnknownMethod(String),
    #[error("internal certificate failure: {0}")]
    CertificateFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
