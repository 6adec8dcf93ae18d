use thiserror::Error;

/// Errors shared across the crate. Soft diagnostics (tolerance ambiguity,
/// noise floors, non-mixing roofs) are reported as warnings inside result
/// structs instead of through this type.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("DecompositionError: element not in the model span (residual {residual:.3e})")]
    Decomposition { residual: f64 },

    #[error("GradingError: Ad_exp(tH0) residual {residual:.3e} exceeds tolerance on {subspace}")]
    Grading { subspace: String, residual: f64 },

    #[error("ModelError: {0}")]
    Model(String),

    #[error("NotUnitVector: |norm - 1| = {deviation:.3e}")]
    NotUnitVector { deviation: f64 },

    #[error("PingPongError: letters {0} and {1} violate the ping-pong property (margin {2:.3e})")]
    PingPong(usize, usize, f64),

    #[error("InsufficientGenerators: need at least 2 generators, got {0}")]
    InsufficientGenerators(usize),

    #[error("NotInLimitChart: point lies in no Schottky disk")]
    NotInLimitChart,

    #[error("PoleError: Mobius map evaluated at its pole")]
    Pole,

    #[error("DepthError: {words} words exceed the budget of {budget}")]
    Depth { words: usize, budget: usize },

    #[error("DomainError: {0}")]
    Domain(String),

    #[error("ShapeError: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("ConvergenceError: no convergence after {iterations} iterations (residual {residual:.3e}, gap estimate {gap:.3})")]
    Convergence { iterations: usize, residual: f64, gap: f64 },

    #[error("BracketError: pressure root not bracketed in [{lo}, {hi}] (P(lo) = {p_lo:.3e}, P(hi) = {p_hi:.3e})")]
    Bracket { lo: f64, hi: f64, p_lo: f64, p_hi: f64 },

    #[error("NormalizationError: reference eigenfunction not strictly positive (min {0:.3e})")]
    Normalization(f64),

    #[error("PreconditionError: {0}")]
    Precondition(String),

    #[error("InfeasibleError: first violated inequality: {0}")]
    Infeasible(String),

    #[error("CoverError: {0}")]
    Cover(String),

    #[error("ResolutionError: max cylinder diameter {diameter:.3e} exceeds the bump resolution bound {bound:.3e}")]
    Resolution { diameter: f64, bound: f64 },

    #[error("DominationFailure: no admissible (p, l) for core ball ({k}, {r}); {diagnostic}")]
    Domination { k: usize, r: usize, diagnostic: String },

    #[error("NoWitness: annulus around sample {x_index} empty or pairing too small at the finest delta")]
    NoWitness { x_index: usize },

    #[error("ConfigError: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
