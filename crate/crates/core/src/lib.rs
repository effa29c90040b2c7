//! Partial toric exponential sums over finite fields, their L-functions, and
//! the p-adic machinery that verifies the twisted trace formula, the delta_d
//! factorization into twisted Fredholm determinants, and the unique p-adic
//! unit root (by power iteration, by rational reconstruction, and by
//! A-hypergeometric series).

pub mod cyclotomic;
pub mod dwork;
pub mod error;
pub mod fields;
pub mod hypergeom;
pub mod laurent;
pub mod linalg;
pub mod padics;
pub mod polytope;
pub mod series;
pub mod sums_l;
pub mod unfolding;

pub use error::{Error, Result};
