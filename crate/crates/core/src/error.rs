use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("metric violation: max |h| = {max_abs_h} must stay below 1")]
    MetricViolation { max_abs_h: f64 },
    #[error("grid too coarse: {got} points, need at least {min}")]
    GridTooCoarse { got: usize, min: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("chart integration failed near x = {x}")]
    IntegrationFailure { x: f64 },

    #[error("trajectory reached the pole region at t = {t} (ell = {ell})")]
    PoleCrossing { t: f64, ell: f64 },
    #[error("path covers less than one period")]
    IncompletePath,

    #[error("window ({lo}, {hi}) intersects the excluded range (0, k^2] for k = {k}")]
    WindowOutsideExclusion { k: i64, lo: f64, hi: f64 },
    #[error("shooting refinement failed near lambda^2 = {lambda2} (k = {k})")]
    NoConvergence { k: i64, lambda2: f64 },
    #[error("cluster windows overlap: A_config = {a_config} (must be <= 1)")]
    ClusterOverlap { a_config: f64 },
    #[error("eigenfunctions solve different equations")]
    MismatchedOde,
    #[error("member (k = {k}, lambda^2 = {lambda2}) belongs to no cluster")]
    Orphan { k: i64, lambda2: f64 },

    #[error("no cluster member satisfies the admissibility condition")]
    EmptyAdmissibleSet,
    #[error("E/h = {ratio} exceeds the near-equator threshold 5")]
    NotNearEquatorRegime { ratio: f64 },
    #[error("E/h = {ratio} is below the semiclassical threshold 10")]
    NotSemiclassicalRegime { ratio: f64 },

    #[error("time step {dt} violates the stability bound (dt * omega = {product})")]
    CflViolation { dt: f64, product: f64 },
    #[error("damping depends on phi and would couple angular blocks")]
    BlockCoupling,
    #[error("decay fit is degenerate: {0}")]
    DegenerateFit(String),
}

pub type Result<T> = std::result::Result<T, Error>;
