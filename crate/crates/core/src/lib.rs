//! Operators, states and toy dynamics on a complexified configuration space.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod black_hole;
pub mod cosmology;
mod quadrature;
pub mod scenario;
pub mod spatial_tunneling;
pub mod states;
pub mod temporal_barrier;

pub use quadrature::QuadratureError;
