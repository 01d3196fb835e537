use thiserror::Error;

/// Failure modes of the library.
///
/// Variants carrying numbers report them as `f64` regardless of the scalar
/// type the computation ran in.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("mechanical frequency must be positive, got {0}")]
    NonPositiveFrequency(f64),
    #[error("damping rate `{name}` must be non-negative, got {value}")]
    NegativeRate { name: &'static str, value: f64 },
    #[error("`{name}` must be non-negative, got {value}")]
    NegativeParameter { name: &'static str, value: f64 },
    #[error("at least one of kappa, gamma must be positive")]
    NoBath,
    #[error("parameter `{name}` is not finite")]
    NonFinite { name: &'static str },
    #[error("no real non-negative root of the photon-number cubic (coefficients {coefficients:?})")]
    CubicSolveFailure { coefficients: [f64; 4] },
    #[error("leading polynomial coefficient {leading} is negligible against scale {scale}")]
    DegenerateLeadingCoefficient { leading: f64, scale: f64 },
    #[error("eigenvalue refinement failed: residual {residual:e} for matrix {matrix:?}")]
    ConvergenceFailure { matrix: Box<[[f64; 4]; 4]>, residual: f64 },
    #[error("drift matrix is not strictly stable (max Re lambda = {max_real:e})")]
    UnstableDrift { max_real: f64 },
    #[error("Lyapunov system is numerically singular (pivot {pivot:e})")]
    SingularSystem { pivot: f64 },
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64, state: Vec<f64> },
    #[error("integrator exceeded {max_steps} steps at t = {t}")]
    MaxStepsExceeded { t: f64, max_steps: usize, state: Vec<f64> },
    #[error("log-log fit needs positive data, got x = {x}, y = {y}")]
    NonPositiveData { x: f64, y: f64 },
    #[error("log-log fit needs at least {needed} points, got {got}")]
    InsufficientPoints { needed: usize, got: usize },
    #[error("branch {0} is unphysical at these parameters")]
    UnphysicalBranch(usize),
    #[error("covariance matrix violates the uncertainty bound (smallest symplectic eigenvalue {nu_min})")]
    UnphysicalCovariance { nu_min: f64 },
    #[error("covariance matrix is singular (det = {det:e})")]
    SingularCovariance { det: f64 },
    #[error("boundary continuation lost track after {} points", partial.len())]
    LostTrack { partial: Vec<(f64, f64)> },
    #[error("soft-mode boundaries do not meet: {0}")]
    NoIntersection(String),
    #[error("fit sample at |G - G_c| = {offset:e} left the stable region")]
    FitRangeCrossesBoundary { offset: f64 },
    #[error("invalid grid or range: {0}")]
    InvalidRange(String),
}

impl Error {
    /// True for errors caused by invalid user input rather than numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::NonPositiveFrequency(_)
                | Error::NegativeRate { .. }
                | Error::NegativeParameter { .. }
                | Error::NoBath
                | Error::NonFinite { .. }
                | Error::InvalidRange(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
