use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("spin {index} has norm {norm}, expected {expected}")]
    CasimirViolation { index: usize, norm: f64, expected: f64 },
    #[error("spectral parameter {0} is on a pole eps_j")]
    PoleAtEpsilon(f64),
    #[error("adaptive step {step:e} fell below the underflow threshold at t = {t}")]
    StepSizeUnderflow { t: f64, step: f64 },
    #[error("too many spins for enumeration: {0}")]
    TooManySpins(usize),
    #[error("Bethe roots {0} and {1} coincide")]
    DegenerateRoots(usize, usize),
    #[error("root finder did not converge after {0} iterations")]
    NoConvergence(usize),
    #[error("critical point is not of pure focus-focus type")]
    NotFocusFocus,
    #[error("oscillator amplitude vanishes; separated variables undefined")]
    OscillatorVanishes,
    #[error("separated variables {0} and {1} coincide")]
    CoincidentLambdas(usize, usize),
    #[error("polynomial division left residue {0:e}")]
    DivisionResidue(f64),
    #[error("reconstructed state is off the real slice (mismatch {0:e})")]
    NotRealSlice(f64),
    #[error("soliton amplitude {0} is zero")]
    ZeroAmplitude(usize),
    #[error("determinant is numerically singular")]
    SingularDeterminant,
    #[error("negative |b|^2 = {0:e}")]
    NegativeBBbar(f64),
    #[error("spectral polynomial roots poorly conditioned (residual {0:e})")]
    RootConditioning(f64),
    #[error("contour passes within {0:e} of a branch point or pole")]
    ContourCollision(f64),
    #[error("branch of sqrt(Lambda) lost along contour")]
    BranchTrackingLoss,
    #[error("regular fiber required, got c = 0")]
    SingularFiber,
    #[error("trajectory left the neighbourhood: |z|,|w| up to {0:e}")]
    LeftNeighborhood(f64),
    #[error("integrator failure: {0}")]
    IntegratorFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
