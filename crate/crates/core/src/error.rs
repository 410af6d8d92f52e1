use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("mode vector has zero intensity")]
    ZeroIntensity,
    #[error("Stokes vector is not a unit vector (norm {0})")]
    NonUnitStokes(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("steady-state solutions require resonant operation (delta = delta_p = 0)")]
    Detuned,
    #[error("closed path needs at least 3 distinct vertices, got {0}")]
    DegeneratePath(usize),
    #[error("path is not closed")]
    OpenPath,
    #[error("arc between vertices {0} and {1} is ambiguous (antipodal or longer than pi)")]
    AmbiguousArc(usize, usize),
    #[error("time step {dt} violates the stability guard (dt * max rate = {product}, limit 0.1)")]
    StepTooLarge { dt: f64, product: f64 },
    #[error("integration produced a non-finite or overflowing state at t = {t}")]
    Diverged { t: f64 },
    #[error("no stable pump root below the clipping value")]
    NoStableRoot,
    #[error("operating point is not stable: {0}")]
    Unstable(&'static str),
    #[error("grid mismatch between maps")]
    GridMismatch,
    #[error("pattern has no azimuthal fringes")]
    NoFringes,
}
