//! Zeros of polynomial combinations of L-functions in the half-plane `Re(s) > 1`.
//!
//! Modules, bottom up:
//!
//! * [`lfunc`]: Dirichlet characters, level-1 cusp eigenforms, external tables and
//!   their Euler factors;
//! * [`series`]: truncated Dirichlet series, local logarithms, Euler products and
//!   Hurwitz zeta values, each with a rigorous tail bound;
//! * [`combination`]: finite Dirichlet series, polynomials over them, the monomial
//!   test and root tracking;
//! * [`ortho`]: prime sums of products of Hecke eigenvalues in progressions;
//! * [`witness`]: prime partitions, twists, torus parametrizations and the
//!   target-product solver;
//! * [`zeros`]: contour certification, simultaneous approximation and density scans.

pub mod arith;
pub mod combination;
pub mod error;
pub mod lfunc;
pub mod ortho;
pub mod primes;
pub mod series;
pub mod witness;
pub mod zeros;

pub use error::{Error, Result};
pub use num_complex::Complex64;
