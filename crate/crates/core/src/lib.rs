//! Lasso and SCAD regularization paths for Gaussian and dispersion-free GLM
//! responses, tuning-parameter selectors (AIC, AICc, BIC, Cp, GCV, `Γn`,
//! k-fold CV), oracle loss efficiency, and a Monte Carlo harness for
//! comparing them.

pub mod cli;
pub mod config;
pub mod design;
pub mod error;
pub mod generators;
pub mod glm;
pub mod harness;
pub mod linear;
pub mod loss;
pub mod penalties;
pub mod selectors;

pub use design::DesignMatrix;
pub use error::{Error, Result};
pub use glm::{GlmFamily, GlmPathFit};
pub use linear::PathFit;
pub use penalties::PenaltyKind;
pub use selectors::{Model, Selector, SelectorScore};
