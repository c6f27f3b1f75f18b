//! Mean-field orthoplicial spin model: exact partition functions, limiting
//! thermodynamics, exact samplers, equivalence-of-ensembles bounds and the
//! analysis of mean-field interactions.

// `!(x > 0.0)` is used on purpose so NaN inputs are rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bessel;
pub mod cli;
pub mod equivalence;
pub mod error;
pub mod expression;
pub mod interaction;
pub mod model;
pub mod numerics;
pub mod sampling;
pub mod thermo;

pub use error::{Error, Result};
pub use interaction::{parse_interaction, Interaction};
pub use model::{LogReal, MacroTotals, ModelPoint};
pub use thermo::FieldParams;
