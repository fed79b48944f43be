use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the solvers and the simulator can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("infeasible success-probability target {target}: must lie in [0, 1)")]
    InfeasibleTarget { target: f64 },

    #[error("no root: {0}")]
    NoRoot(String),

    #[error("rate {rate} bps is below the delay-bound floor M/D = {floor} bps")]
    RateBelowDelayFloor { rate: f64, floor: f64 },

    #[error(
        "QoS pair infeasible at rate {rate} bps (eta = {eta}); rates must exceed {omega_infinity} bps"
    )]
    InfeasibleRate {
        rate: f64,
        eta: f64,
        omega_infinity: f64,
    },

    #[error("unstable queue: load {load} >= 1")]
    UnstableQueue { load: f64 },

    #[error("infeasible network: total size {total:.4} >= 1 (excess {excess:.4})")]
    InfeasibleNetwork {
        total: f64,
        excess: f64,
        sizes: Vec<f64>,
    },

    #[error("user {user} needs {required} W at equilibrium but the power cap is {max_power} W")]
    PowerLimitBinding {
        user: usize,
        required: f64,
        max_power: f64,
    },

    #[error("QoS unachievable at the power cap {max_power} W for user {user}")]
    QosUnachievable { user: usize, max_power: f64 },

    #[error(
        "exact selection supports at most {limit} candidates, got {count}; use the greedy policy"
    )]
    SizeLimit { count: usize, limit: usize },

    #[error("inversion resolution too coarse: total mass {mass} (try more samples)")]
    Resolution { mass: f64 },

    #[error("simulation diverged: queue length reached {queue_len}")]
    Divergence { queue_len: usize },

    #[error("no samples recorded")]
    EmptySample,

    #[error("scenario: {0}")]
    Scenario(String),
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
