//! Ray class invariants over imaginary quadratic fields.
//!
//! For an imaginary quadratic field `K` of discriminant `d <= -7` and a level
//! `N >= 2`, the singular value `g_(0,1/N)(theta)^(12N)` of a Siegel function
//! generates the ray class field of conductor `N` over `K`. This crate builds
//! every Galois conjugate of that value from the reduced forms of
//! discriminant `d` and the matrix group `W_{N,theta}`, multiplies them into
//! the class polynomial and certifies that its coefficients are integers.
//!
//! Modules, bottom-up:
//! - [`cmfield`]: discriminant validation and the CM point `theta`.
//! - [`quadforms`]: reduced primitive positive definite forms.
//! - [`shimura`]: `W_{N,theta}`, the matrices `u_Q` and the action on Siegel indices.
//! - [`complex`]: arbitrary-precision complex numbers.
//! - [`siegel`]: evaluation of Siegel functions with a certified truncation.
//! - [`classpoly`]: class polynomials, integrality certification, generator checks.
//! - [`bounds`]: numeric verification of the inequalities behind the generator property.
//! - [`cli`]: command-line front end.

pub mod bounds;
pub mod classpoly;
pub mod cli;
pub mod cmfield;
pub mod complex;
pub mod error;
pub mod quadforms;
pub mod shimura;
pub mod siegel;

pub use classpoly::{ClassPolynomial, ExponentMode, Region};
pub use cmfield::{Discriminant, ThetaParams};
pub use complex::BigComplex;
pub use error::{Error, Result};
pub use quadforms::QuadForm;
pub use shimura::{CmPoint, ConjugateDescriptor, Mat2N, SiegelIndex};
