use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),

    #[error("state has {found} components, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("step size underflow at t = {t} (h = {step:e})")]
    StepSizeUnderflow { t: f64, step: f64 },

    #[error("step budget of {0} steps exhausted before t_end")]
    StepBudgetExhausted(usize),

    #[error("component {index} became negative ({value:e}) at t = {t}")]
    NegativityViolation { t: f64, index: usize, value: f64 },

    #[error("state became non-finite at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("no steady state by t = {t}: residual {residual:e} at {state:?}")]
    NotConverged { t: f64, state: Vec<f64>, residual: f64 },

    #[error("singular denominator: beta*(x_a + x_b) equals delta")]
    SingularDenominator,

    #[error("leading quartic coefficient is zero")]
    DegenerateQuartic,

    #[error("symmetric closed form needs beta_r == beta_n1 (got {beta_r} and {beta_n1})")]
    AsymmetricRates { beta_r: f64, beta_n1: f64 },
}
