//! Error types, one enum per pipeline stage plus a stage-tagged wrapper.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContourError {
    #[error("mask has no foreground pixels")]
    EmptyMask,
    #[error("mask has more than one 4-connected foreground component")]
    MultipleComponents,
    #[error("foreground region contains a hole")]
    HoleDetected,
    #[error("need at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("consecutive duplicate point at index {0}")]
    DuplicatePoint(usize),
    #[error("signed area below tolerance; polygon is degenerate")]
    DegenerateArea,
    #[error("contour parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ComplexGeomError {
    #[error("evaluation point hits the Moebius pole")]
    PoleHit,
    #[error("grid resolution must be at least 2, got {0}")]
    ResolutionTooSmall(usize),
    #[error("face {0} has zero area")]
    DegenerateFace(usize),
    #[error("|f_z| vanishes on face {0}; map is not orientation-preserving there")]
    VanishingDerivative(usize),
    #[error("Beltrami modulus {0} is not admissible (must be < 1)")]
    NonAdmissible(f64),
    #[error("fields live on different grids")]
    GridMismatch,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ZipperError {
    #[error("duplicate boundary points at indices {0} and {1}")]
    DuplicatePoints(usize, usize),
    #[error("pivot at step {0} is invalid; contour may self-intersect")]
    SelfIntersection(usize),
    #[error("point lies on a square-root slit; branch is ambiguous")]
    BranchAmbiguity,
    #[error("point with |z| = {0} is outside the chain's target disk")]
    OutsideDomain(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NormalizeError {
    #[error("centering iteration did not reach tolerance in {0} steps")]
    NoConvergence(usize),
    #[error("need at least 3 boundary points, got {0}")]
    TooFewPoints(usize),
    #[error("preimage of infinity is within {0} of the unit circle")]
    InfinityUnresolvable(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarmonicError {
    #[error("welding angles are not cyclically monotone near index {0}")]
    MonotonicityViolation(usize),
    #[error("need at least 3 welding samples, got {0}")]
    TooFewPoints(usize),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HbsError {
    #[error("|integral| = {0} is too small to define a rotation normalization")]
    AmbiguousNormalization(f64),
    #[error("signature fields live on different grids")]
    GridMismatch,
    #[error("welding maps are not normalized: {0}")]
    NotNormalized(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReconstructError {
    #[error("linear system is singular or indefinite")]
    SingularSystem,
    #[error("conjugate-gradient solve stalled at residual {0}")]
    NonConvergence(f64),
    #[error("signature sup-norm {0} is not admissible (must be < 1)")]
    NonAdmissible(f64),
    #[error("welding correspondence mismatch: boundary residual {0}")]
    WeldingMismatch(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifyError {
    #[error("cannot mix signature kinds in one distance matrix")]
    MixedKinds,
    #[error("k = {k} exceeds the number of points {n}")]
    KTooLarge { k: usize, n: usize },
    #[error("label vectors have different lengths: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("matrix has fewer than {0} positive eigenvalues")]
    DegenerateSpectrum(usize),
}

/// Pipeline failure tagged with the stage that produced it.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("stage {stage}: {message}")]
pub struct StageError {
    pub stage: &'static str,
    pub message: String,
}

impl StageError {
    pub fn new(stage: &'static str, err: impl std::fmt::Display) -> Self {
        Self {
            stage,
            message: err.to_string(),
        }
    }
}
