use thiserror::Error;

/// Failure modes of the evaluation pipeline.
///
/// Variants split into two families: *domain* errors (the input lies outside
/// the region where the metric function is defined) and everything else
/// (malformed input, degenerate background structure).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FinsleroidError {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("tetrad metric is singular")]
    TetradDegenerate,

    #[error("tetrad fails orthonormality checks (worst residual {worst_residual:e})")]
    TetradInvalid { worst_residual: f64 },

    #[error("vector is not future-pointing: b = {b}")]
    NotFutureTimelike { b: f64 },

    #[error("vector lies outside the axial region: w3 = {w3}")]
    OutsideAxialRegion { w3: f64 },

    #[error("eta = {eta} is below the radicand root eta_min = {eta_min}")]
    OutsideEtaDomain { eta: f64, eta_min: f64 },

    #[error("theta = {theta} is at or beyond the pole of U (theta_pole = {theta_pole})")]
    ThetaPole { theta: f64, theta_pole: f64 },

    #[error("r = {r} is outside the radial domain [{r_min}, {r_sup})")]
    OutsideRadialDomain { r: f64, r_min: f64, r_sup: f64 },

    #[error("radial domain is empty for H = {h}, p = {p}")]
    EmptyDomain { h: f64, p: f64 },

    #[error("polar angle is undefined on the polar axis (w_perp = {w_perp})")]
    PolarAxisSingular { w_perp: f64 },

    #[error("finite-difference stencil leaves the chart: {0}")]
    StencilOutOfDomain(String),

    #[error("closed form undefined: base {base} of a fractional power is negative")]
    OutsideClosedFormDomain { base: f64 },

    #[error("root finder failed to converge after {iterations} iterations")]
    NoConvergence { iterations: usize },
}

impl FinsleroidError {
    /// Whether the error means "valid input, but outside the metric's domain".
    pub fn is_domain_error(&self) -> bool {
        !matches!(
            self,
            FinsleroidError::InvalidParameters(_)
                | FinsleroidError::TetradDegenerate
                | FinsleroidError::TetradInvalid { .. }
                | FinsleroidError::NoConvergence { .. }
        )
    }

    /// Short stable identifier, used in reports and CSV status columns.
    pub fn code(&self) -> &'static str {
        match self {
            FinsleroidError::InvalidParameters(_) => "InvalidParameters",
            FinsleroidError::TetradDegenerate => "TetradDegenerate",
            FinsleroidError::TetradInvalid { .. } => "TetradInvalid",
            FinsleroidError::NotFutureTimelike { .. } => "NotFutureTimelike",
            FinsleroidError::OutsideAxialRegion { .. } => "OutsideAxialRegion",
            FinsleroidError::OutsideEtaDomain { .. } => "OutsideEtaDomain",
            FinsleroidError::ThetaPole { .. } => "ThetaPole",
            FinsleroidError::OutsideRadialDomain { .. } => "OutsideRadialDomain",
            FinsleroidError::EmptyDomain { .. } => "EmptyDomain",
            FinsleroidError::PolarAxisSingular { .. } => "PolarAxisSingular",
            FinsleroidError::StencilOutOfDomain(_) => "StencilOutOfDomain",
            FinsleroidError::OutsideClosedFormDomain { .. } => "OutsideClosedFormDomain",
            FinsleroidError::NoConvergence { .. } => "NoConvergence",
        }
    }
}

pub type Result<T> = std::result::Result<T, FinsleroidError>;
