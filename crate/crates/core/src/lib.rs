//! Exact local-field arithmetic, Tate's algorithm, quadratic twists and the
//! deformation of elliptic curves from F_q((t)) to Frac(W(F_q)[T]/(T^e - p)).

pub mod error;
pub mod gf;
pub mod laurent;
pub mod literal;
pub mod curves;
pub mod deform;
pub mod dvr;
pub mod localfield;
pub mod quadratic;
pub mod rootnum;
pub mod selftest;
pub mod sweep;

pub use error::{Error, Result};
