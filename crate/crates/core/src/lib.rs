//! Collar, transgression and obstruction computations for locally
//! conformally flat metrics on manifolds with boundary.

pub mod collar;
pub mod curvature;
pub mod expr;
pub mod form;
pub mod jet;
pub mod linalg;
pub mod metric;
pub mod obstruction;
pub mod quadrature;
pub mod scalar;
pub mod scenarios;
pub mod series;
pub mod transgression;
