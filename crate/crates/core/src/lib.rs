//! Exact certificates for exceptional doubly-nonnegative (e-DNN) and exceptional copositive
//! (e-COP) matrices built from compressions of cosine multiplication operators, together with
//! membership tests for the cone chain `CP ⊆ DNN ⊆ PSD ∪ NN ⊆ SPN ⊆ COP` and Monte Carlo
//! volume-radius estimates of their unit-ball sections.
pub mod cones;
pub mod error;
pub mod exactfield;
pub mod multop;
pub mod pipeline;
pub mod rationalize;
pub mod solver;
pub mod sos;
pub mod volume;

pub use error::{Error, ParseError, Result};
