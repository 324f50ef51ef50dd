//! Constructive normal forms for lower-dimensional elliptic tori.
//!
//! The crate is organised around the objects of the normalization
//! algorithm: truncated Taylor–Fourier series ([`series`]), the expanded
//! Hamiltonian ([`model`]), the three-stage normalization step
//! ([`normalize`]), divisor ledgers ([`ledger`]), explicit constants and
//! inequality audits ([`estimates`]), frequency-space geometry
//! ([`geometry`]) and numerical verification of invariance ([`verify`]).

pub mod error;
pub mod estimates;
pub mod fixture;
pub mod geometry;
pub mod lattice;
pub mod ledger;
pub mod model;
pub mod normalize;
pub mod registry;
pub mod series;
pub mod verify;

pub use error::{Error, Result};
pub use series::{MonomialKey, NormParameters, PoissonSeries, Truncation};

pub use num_complex::Complex64;

/// Versions of the individual modules, reported by the command line tool.
pub const MODULE_VERSIONS: &[(&str, &str)] = &[
    ("series", "1.0"),
    ("model", "1.0"),
    ("normalize", "1.0"),
    ("ledger", "1.0"),
    ("estimates", "1.0"),
    ("geometry", "1.0"),
    ("verify", "1.0"),
];
