//! Multiset unions of randomly shifted Korobov rank-1 lattices modulo a prime.
//!
//! The crate builds the four randomized constructions (random or fixed
//! generators, continuous or grid shifts), computes their star discrepancy
//! exactly at small scale, and checks the Fourier, character-sum, variance and
//! probabilistic bounds that govern them by exhaustive enumeration and seeded
//! Monte Carlo.
//!
//! Module map:
//!
//! - [`modmath`]: prime field arithmetic and Korobov generating vectors.
//! - [`pointset`]: lattice generation, shifts, multiset unions, CSV I/O.
//! - [`fourier`]: continuous and discrete box-indicator coefficients.
//! - [`charsum`]: lattice character sums and generator root counts.
//! - [`discrepancy`]: local discrepancy, grid maximization, exact D*.
//! - [`bounds`]: closed-form theorem bounds and the Bernstein tail.
//! - [`experiments`]: seeded campaigns and numerical checks of the Fourier and variance identities.
//! - [`cli`]: the `korobov-star` command line.

pub mod bounds;
pub mod charsum;
pub mod cli;
pub mod discrepancy;
mod error;
pub mod experiments;
pub mod fourier;
pub mod modmath;
pub mod pointset;

pub use error::{Error, Result};
pub use fourier::AnchoredBox;
pub use modmath::{GeneratorVector, PrimeContext};
pub use pointset::{GeneratorMode, PointSet, ShiftMode};

/// Enumeration caps for the exhaustive routines.
///
/// Every routine whose cost grows like `N^s` checks its work against one of
/// these before allocating or iterating.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Frequency vectors or shifts enumerated by exhaustive sums (`N^s`).
    pub frequencies: u64,
    /// Grid corners visited by the grid sweep (`(N+1)^s`).
    pub grid_boxes: u64,
    /// Candidate corners visited by the critical-box oracle.
    pub critical_boxes: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            frequencies: 1_000_000,
            grid_boxes: 10_000_000,
            critical_boxes: 10_000_000,
        }
    }
}

/// `base^exp` as u64, or `None` on overflow.
pub(crate) fn checked_pow(base: u64, exp: usize) -> Option<u64> {
    let exp = u32::try_from(exp).ok()?;
    base.checked_pow(exp)
}
