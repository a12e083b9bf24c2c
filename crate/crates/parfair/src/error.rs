use thiserror::Error;

/// Errors produced by parsers, generators and solver preconditions.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid instance: {0}")]
    BadInstance(String),

    #[error("good id {good} out of range for m={m}")]
    GoodOutOfRange { good: usize, m: usize },

    #[error("good {good} appears in more than one bundle")]
    OverlappingBundles { good: usize },

    #[error("allocation shape ({an} agents, {am} goods) does not match instance ({n} agents, {m} goods)")]
    ShapeMismatch { an: usize, am: usize, n: usize, m: usize },

    #[error("this algorithm requires exactly 2 agents, got {n}")]
    NotTwoAgents { n: usize },

    #[error("good {good} is positively valued by {support} agents; not a graph instance")]
    NotGraphInstance { good: usize, support: usize },

    #[error("m={m} is not divisible by n={n}; pad the instance first")]
    NotDivisible { m: usize, n: usize },

    #[error("m={m} is not divisible by n*k={nk}; pick a different k or pad the instance")]
    NotDivisibleByParts { m: usize, nk: usize },

    #[error("order must be a permutation of the {n} agent ids")]
    BadOrder { n: usize },

    #[error("expected {expected} per-round orders (m/n), got {got}")]
    WrongPermCount { expected: usize, got: usize },

    #[error("reachability graph needs {nodes} nodes, over the budget of {budget}")]
    NodeBudgetExceeded { nodes: u128, budget: usize },

    #[error("hypergraph rank {rank} exceeds the configured bound {bound}")]
    RankOverBound { rank: usize, bound: usize },

    #[error("matching needs at least as many goods as agents: n={n}, k={k}")]
    TooFewGoods { n: usize, k: usize },

    #[error("generator could not satisfy its constraints: {0}")]
    InfeasibleGen(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
