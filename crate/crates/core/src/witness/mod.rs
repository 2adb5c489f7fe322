//! Prime partitions, unit-modulus twists, matrix tuples in `K`, the torus
//! parametrization and the target-product solver.

mod matrix;
mod partition;
mod solve;
mod torus;

pub use matrix::*;
pub use partition::*;
pub use solve::*;
pub use torus::*;
