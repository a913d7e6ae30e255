//! Geometric side of the Petersson trace formula for Hilbert modular forms
//! over `Q` and real quadratic fields.
//!
//! The crate is organised bottom-up: exact field arithmetic ([`field`]),
//! principal ideals ([`ideals`]), the ideal lattice and its box set
//! ([`lattice`]), Kloosterman sums ([`kloosterman`]), Bessel functions
//! ([`bessel`]), the assembled geometric side ([`traceformula`]), the weight
//! schedule / measure experiments ([`experiments`]) and the classical
//! level-one oracle ([`oracle`]).

pub mod arith;
pub mod bessel;
pub mod cyclotomic;
pub mod error;
pub mod experiments;
pub mod field;
pub mod ideals;
pub mod interval;
pub mod kloosterman;
pub mod lattice;
pub mod oracle;
pub mod traceformula;

pub use error::{Error, Result};
pub use field::{FieldElement, TotallyRealField};
pub use ideals::PrincipalIdeal;
