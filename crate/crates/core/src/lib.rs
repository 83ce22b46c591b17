// Index loops mirror the formulas they implement; iterator rewrites would
// obscure the coefficient bookkeeping.
#![allow(clippy::needless_range_loop)]

//! Computable core of the universal geometry behind Loewner evolutions:
//! truncated series algebra for univalent maps, Grunsky/Faber/Siegel-disc
//! machinery, Witt/Virasoro operator representations on coefficient
//! polynomials, radial and chordal (stochastic) Loewner flows, and a Monte
//! Carlo martingale verifier for the central-charge/highest-weight relation.

pub mod circle;
pub mod coeffpoly;
pub mod error;
pub mod grunsky;
pub mod loewner;
pub mod martingale;
pub mod ode;
pub mod scalar;
pub mod series;
pub mod sle;
pub mod witt;

pub use circle::{CentralParams, FourierField};
pub use coeffpoly::{Chart, CoeffPolynomial, Monomial};
pub use error::{CoreError, Result};
pub use scalar::{rat, Coeff, Rat, C64};
pub use series::{SeriesJson, TruncatedLaurentInf, TruncatedTaylor};
