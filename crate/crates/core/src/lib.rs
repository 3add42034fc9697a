//! Parisian ruin resolvents and Parisian quasi-stationary laws for spectrally
//! one-sided Lévy processes, with a Monte Carlo oracle for every closed form.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod inversion;
pub mod model;
pub mod numeric;
pub mod qsd;
pub mod report;
pub mod resolvent;
pub mod scale;
pub mod simulate;
pub mod validation;

pub use config::ModelConfig;
pub use error::{Error, Result};
pub use model::{ExpansionPoint, Family, LevyModel, Orientation, Variation};
pub use scale::ScaleContext;
