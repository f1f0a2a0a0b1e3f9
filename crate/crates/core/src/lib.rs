//! Supersingular p-adic Birch and Swinnerton-Dyer machinery for elliptic curves
//! with a_p = 0: logarithm matrices, Dieudonné-module coordinates, Bernardi
//! heights and regulators, and signed p-adic L-functions built from modular
//! symbols.

pub mod curve;
pub mod dieudonne;
pub mod error;
pub mod heights;
pub mod lfunction;
pub mod padic;
pub mod quad;
pub mod real;
pub mod scalar;
pub mod selftest;
pub mod series;
pub mod verifier;

pub use curve::{Curve, CurveFixture, Point, Reduction};
pub use error::{Error, Result};
pub use padic::{HalfInt, PadicElement, UnitVerdict, Valuation};
pub use quad::QuadRational;
pub use real::Real;
pub use scalar::{Coeff, Scalar};
pub use series::{LogMatrix, Sign, TruncatedSeries};

/// Elements of Q_p(√−p) at finite precision.
pub type Qp = PadicElement;
