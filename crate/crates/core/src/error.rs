use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("grid with {modes} modes needs at least {} points, got {points}", 2 * modes + 1)]
    UnderResolvedGrid { modes: usize, points: usize },

    #[error("field flagged real is not Hermitian at n = {n} (defect {defect:e})")]
    SymmetryViolation { n: i64, defect: f64 },

    #[error("mode {n} lies outside |n| <= {modes}")]
    ModeOutOfRange { n: i64, modes: usize },

    #[error("expected {expected} values, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("fields do not share a grid")]
    GridMismatch,

    #[error("padded grid of {points} points cannot host a {factors}-fold product of {modes} modes (need {required})")]
    PaddingTooSmall {
        points: usize,
        factors: usize,
        modes: usize,
        required: usize,
    },

    #[error("products take 2 or 3 factors, got {0}")]
    FactorCount(usize),

    #[error("the renormalized split needs renormalized parameters")]
    NotRenormalized,

    #[error("invalid equation parameters: {0}")]
    InvalidParams(&'static str),

    #[error("non-finite state after step {step}")]
    BlowUp { step: usize },

    #[error("trajectory is empty")]
    EmptyTrajectory,

    #[error("trajectory times must be strictly increasing and uniform")]
    NonUniformTimes,

    #[error("trajectories do not share a time axis")]
    TimeAxisMismatch,

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(&'static str),

    #[error("initial data not on a common level set (mean gap {mean_gap:e}, L2 gap {l2_gap:e})")]
    LevelSet { mean_gap: f64, l2_gap: f64 },

    #[error("band k = {k} needs dt <= {required_dt:e}, trajectory has dt = {dt:e}")]
    InsufficientResolution { k: u32, required_dt: f64, dt: f64 },

    #[error("band k = {k} window around t = {t_center} needs a longer trajectory")]
    InsufficientSpan { k: u32, t_center: f64 },

    #[error("localized energy is defined for k >= 1")]
    EnergyBandZero,

    #[error("bump profile violates its contract: {0}")]
    InvalidBump(&'static str),

    #[error("block case {case} precondition fails: {reason}")]
    CasePrecondition {
        case: &'static str,
        reason: &'static str,
    },

    #[error("a slope fit needs at least 4 ladder points, got {0}")]
    LadderTooShort(usize),

    #[error("a {branch} branch scan at b = {b} was passed for the other branch")]
    BranchMismatch { branch: &'static str, b: f64 },

    #[error("frequency ladder must have N >= 8, got {0}")]
    FrequencyTooSmall(i64),
}
