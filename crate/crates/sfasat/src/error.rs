use thiserror::Error;

/// Crate-wide error type. Operations that cannot fail simply do not return
/// `Result`; everything else funnels through here so callers match on one enum.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("algebra mismatch: {0}")]
    AlgebraMismatch(String),

    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("line {line}: {msg}")]
    File { line: usize, msg: String },

    #[error("{0}")]
    Io(String),

    #[error("{0}")]
    Unsupported(String),

    #[error("invalid automaton: {0}")]
    InvalidAutomaton(String),

    #[error("minterm has {got} bits but the generator set has {want}")]
    LengthMismatch { got: usize, want: usize },

    #[error("guard atom `{0}` is not covered by the generator set")]
    UnmatchedAtom(String),

    #[error("bound exceeded: {0}")]
    BoundExceeded(String),

    #[error("flow is not a valid accepting flow: {0}")]
    InvalidFlow(String),

    #[error("formula has {got} set variables, limit is {limit}")]
    TooManySetVariables { got: usize, limit: usize },

    #[error("automaton has {got} generators, limit is {limit}")]
    TooManyGenerators { got: usize, limit: usize },

    #[error("variable `{0}` is unbound")]
    MissingVariable(String),

    #[error("set model carries no concrete sets")]
    MissingConcreteSets,

    #[error("unknown set variable `{0}` (not a declared generator)")]
    UnknownSetVariable(String),

    #[error("disjunct budget of {0} exceeded while searching the formula")]
    DnfBudgetExceeded(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
