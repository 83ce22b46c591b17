//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("zero leading coefficient: series is not a unit where one is required")]
    ZeroLeadingCoefficient,
    #[error("composition inner series has a nonzero constant term")]
    NonzeroConstantTerm,
    #[error("bivariate sector mismatch: {0} vs {1}")]
    SectorMismatch(&'static str, &'static str),
    #[error("difference quotient (f(z)-f(w))/(z-w) has vanishing unit part")]
    DegenerateDiagonal,
    #[error("operator point lies outside the Siegel disc (spectral gap {gap:.3e} <= 0)")]
    NotInDisc { gap: f64 },
    #[error("vector field has nonzero mean; almost-complex structure undefined")]
    NonzeroMean,
    #[error("boundary trace under-resolved: tail energy fraction {tail:.3e} exceeds {threshold:.1e}")]
    InsufficientResolution { tail: f64, threshold: f64 },
    #[error("adaptive step controller failed at t = {t}: step {dt:.3e} below floor")]
    StepRejected { t: f64, dt: f64 },
    #[error("Herglotz data carries negative mass (min {min:.3e})")]
    NonpositiveMeasure { min: f64 },
    #[error("step floor hit near singularity at t = {t} with |g - W| = {dist:.3e} above swallow tolerance")]
    SwallowTolUnreachable { t: f64, dist: f64 },
    #[error("no closed coordinate form available at level {0}")]
    UnsupportedLevel(i64),
    #[error("coefficient charts differ: {0} vs {1}")]
    ChartMismatch(&'static str, &'static str),
    #[error("ensemble too small: standard error {se:.3e} cannot resolve effect size {effect:.3e}")]
    InsufficientPaths { se: f64, effect: f64 },
    #[error("swallowed-path fraction {fraction:.3} exceeds {limit:.3}; run invalidated")]
    PathSwallowed { fraction: f64, limit: f64 },
}

pub type Result<T> = std::result::Result<T, CoreError>;
