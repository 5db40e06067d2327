//! Exact truncated q-series, theta and eta functions, Appell-type lattice
//! sums, and a verifier for identities between them.

pub mod appell;
pub mod arg;
pub mod error;
pub mod exponent;
pub mod identity;
pub mod json;
pub mod lattice;
pub mod numeric;
pub mod rings;
pub mod series;
pub mod specfun;

pub use error::{Error, Result};
pub use exponent::{QExp, DEFAULT_Q_DEN, DEFAULT_W_DEN};
pub use rings::{BigComplex, GaussRat, Ring, WLaurent, WRational};
pub use series::TruncatedSeries;
