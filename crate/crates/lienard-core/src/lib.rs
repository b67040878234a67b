//! Numerics for slow-fast Lienard systems `x' = y - F(x)`, `y' = eps G(x)` near infinity.
//!
//! Covers the slow divergence integrals along the critical curve, the
//! compactification charts at infinity and their singularities, the slow
//! relation map and its orbits, box-dimension estimators, and the
//! classification of orbit dimension by the parity profile of the coefficients.
#![no_std]
// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod charts;
pub mod classify;
pub mod fractal;
pub mod integrals;
pub mod model;
pub mod poly;
pub mod quad;
pub mod relation;
pub mod roots;
