//! Theta elements attached to triples of quaternionic modular forms, computed
//! from geodesics on the Bruhat-Tits tree modulo definite quaternionic
//! arithmetic groups.

pub mod arith;

pub mod brandt;
pub mod btree;
pub mod character;
pub mod cli;

pub mod cyclotomic;
pub mod error;
pub mod hnf;
pub mod linalg;
pub mod mat2;
pub mod padic;
pub mod quaternion;
pub mod quotient;
pub mod theta;

pub use error::{Error, Result};
