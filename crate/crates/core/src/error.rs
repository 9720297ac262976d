use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate lattice: Im(omega2/omega1) = {0}")]
    DegenerateLattice(f64),
    #[error("point {0} lies on a pole (distance to lattice {1:e})")]
    Pole(crate::C64, f64),
    #[error("grid resolution {0} below the minimum of 8")]
    ResolutionTooSmall(usize),
    #[error("exclusion disks cover {0:.3} of the surface (limit 0.5)")]
    ExclusionTooLarge(f64),
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("zero tangent vector")]
    ZeroVector,
    #[error("degenerate map: {0}")]
    DegenerateMap(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("twist inconsistent: {0}")]
    TwistInconsistent(String),
    #[error("möbius validation failed: max chordal error {0:e}")]
    MobiusValidation(f64),
    #[error("non-rectangular lattice: {0}")]
    NonRectangular(String),
    #[error("flux {0} is not quantised (distance to nearest integer {1:e})")]
    FluxNotQuantized(f64, f64),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("top argument of binomial is not an integer: {0}")]
    NonIntegerTop(String),
    #[error("nontrivial twist class requested at genus 0")]
    NontrivialClassOnSphere,
    #[error("source term has mean {0:e}, exceeding tolerance {1:e}")]
    InconsistentSource(f64, f64),
    #[error("grid and field resolution mismatch: {0}")]
    ResolutionMismatch(String),
}

impl Error {
    /// Precondition-type failures, as opposed to parse failures. Used by the CLI
    /// exit-code mapping.
    pub fn is_parse(&self) -> bool {
        matches!(self, Error::Parse(_))
    }
}
