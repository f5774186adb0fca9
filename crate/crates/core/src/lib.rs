//! Return-walk counting on multi-headed lattices.
//!
//! Term generation, recurrence and differential-equation guessing, operator
//! conversions and Pólya-number estimation, all in exact or multi-modular
//! arithmetic.

pub mod analysis;
pub mod arith;
pub mod guess;
pub mod lattice;
pub mod pfinite;
pub mod pipeline;
pub mod poly;
pub mod termgen;
pub mod terms;
