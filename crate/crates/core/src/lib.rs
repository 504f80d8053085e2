//! Numerical toolkit for the anisotropic Polya-Szego inequality
//! `integral Phi_{*K*}(grad u^K) <= integral Phi(grad u)`: convex bodies and
//! their norms, Young functions and conjugates, rearrangements, grid
//! calculus, and verification of the inequality with its equality cases.

pub mod calculus;
pub mod error;
pub mod fields;
pub mod fixtures;
pub mod geometry;
pub mod grid;
pub mod linalg;
pub mod numfmt;
pub mod profile;
pub mod rearrange;
pub mod verify;
pub mod young;

pub use error::{Error, Result};
