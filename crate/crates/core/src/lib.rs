//! Exact differential algebra over multivariate rational function fields.

pub mod atiyah;
pub mod conn;
pub mod diffstruct;
pub mod field;
pub mod jet;
pub mod matrix;
