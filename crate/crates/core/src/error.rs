use thiserror::Error;

/// Errors reported by the algorithms and solvers in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("state {index} out of range ({n_states} states)")]
    StateOutOfRange { index: usize, n_states: usize },

    #[error("action {index} out of range ({n_actions} actions)")]
    ActionOutOfRange { index: usize, n_actions: usize },

    #[error("state {0} is terminal")]
    TerminalState(usize),

    #[error("{what} row {row} is not a probability distribution (sum = {sum})")]
    NotStochastic {
        what: &'static str,
        row: usize,
        sum: f64,
    },

    #[error("invalid {name} = {value}: expected {expected}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("singular linear system: {0}")]
    Singular(&'static str),

    #[error("induced Markov chain has no unique stationary distribution")]
    NoUniqueStationary,

    #[error("value iteration did not converge after {sweeps} sweeps (last change {delta})")]
    NotConverged { sweeps: usize, delta: f64 },

    #[error("{n_states} states exceeds the exact-solver cap of {cap}")]
    TooLarge { n_states: usize, cap: usize },

    #[error("time index {t} out of range for a trajectory of {len} steps")]
    TimeOutOfRange { t: usize, len: usize },

    #[error("trajectory does not end in a terminal state")]
    IncompleteEpisode,

    #[error("malformed trajectory: {0}")]
    MalformedTrajectory(&'static str),

    #[error("episode already finished; call reset first")]
    EpisodeFinished,

    #[error("empty batch")]
    EmptyBatch,

    #[error("invalid position {0}; expected -1, 0 or 1")]
    InvalidPosition(i64),

    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),

    #[error("feature map is {found}, expected {expected}")]
    FeatureKind {
        expected: &'static str,
        found: &'static str,
    },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn check_unit_interval(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            expected: "a value in [0, 1]",
        })
    }
}

pub(crate) fn check_step_size(value: f64) -> Result<()> {
    if value > 0.0 && value <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "alpha",
            value,
            expected: "a step size in (0, 1]",
        })
    }
}

pub(crate) fn check_discount(value: f64) -> Result<()> {
    if value > 0.0 && value <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "gamma",
            value,
            expected: "a discount in (0, 1]",
        })
    }
}

pub(crate) fn check_finite(what: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite(what))
    }
}
