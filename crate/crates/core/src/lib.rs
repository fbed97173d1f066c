//! Continued-fraction statistics of rationals with a fixed denominator.
//!
//! Exact expansions and continuants, Gauss-measure targets for digit windows,
//! deviation reports over residue ensembles, bounded-digit (Zaremba) scans, and
//! diagonal-flow orbit diagnostics for the lattices `u_{p/q} ℤ²`.

pub mod cfe;
pub mod error;
pub mod gauss;
pub mod lattice;
pub mod orbit;
pub mod primes;
pub mod stats;
pub mod zaremba;

pub use cfe::{CfDigits, ReducedFraction};
pub use error::{Error, Result};
pub use gauss::Window;
pub use orbit::OrbitSpec;
pub use stats::{DeviationReport, EnsembleKind, EnsembleSpec};
