//! Elliptic dilogarithm, elliptic Bloch relations and degree reduction in the
//! pre-Bloch group of the function field of `E = ℂ/⟨1, τ⟩`.

pub mod bloch;
pub mod dilog;
pub mod efield;
pub mod error;
pub mod mobius;
pub mod reduction;
pub mod rootfind;
pub mod torus;
pub mod weierstrass;

pub use efield::{Divisor, EllipticFunction, Normalization, ProjValue};
pub use error::{Error, Result};
pub use torus::{Lattice, TorusPoint};
