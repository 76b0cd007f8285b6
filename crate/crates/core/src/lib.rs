//! Distinct values of distance polynomials on curves, Elekes curves,
//! resultant implicitization, and rigidity of frameworks whose vertices are
//! constrained to a curve.

pub mod cli;
pub mod counting;
pub mod curve;
pub mod elekes;
pub mod error;
pub mod motion;
pub mod param;
pub mod poly;
pub mod quantity;
pub mod rigidity;
mod series;

pub use curve::{AnalyticCurve, CurveSpec, Domain, HelixCurve, RationalCurve};
pub use error::{Error, Result};
pub use param::{Param, Point};
pub use quantity::QuantitySpec;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
