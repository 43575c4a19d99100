//! Quadratic stochastic operators generated by a finite graph and a product
//! measure on its configuration space.
//!
//! A [`Model`] fixes the graph, its connected components, their alphabets and
//! component measures. From it a [`QsoOperator`] acts on the simplex of cell
//! distributions. When the graph has several components the operator is not
//! of Volterra type, yet its component marginals evolve independently under
//! small Volterra operators ([`reduction`]), whose long-run behaviour is read
//! off a [`Tournament`].

// Index loops over coupled matrix entries read closer to the math.
#![allow(clippy::needless_range_loop)]

pub mod construct;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod reduction;
pub mod sampling;
pub mod tournament;

pub use construct::{
    admissible_set, heredity_coefficient, is_volterra, materialize, product_coefficient, validate,
    volterra_canonical, volterra_tensor, HeredityTensor, QsoOperator, SkewMatrix, ValidationReport,
    Violation,
};
pub use dynamics::{
    apply, apply_volterra, classify_limit, is_fixed, iterate, Classification, Constraint,
    Evolution, FixedSet, IterateConfig, LimitReport, SimplexPoint, Termination, Trajectory,
};
pub use error::{Error, Result};
pub use model::{
    connected_components, Alphabets, Cell, Component, ComponentMeasure, ConfigurationSpace, Graph,
    Model, ProductMeasure, VertexId, DEFAULT_CELL_CAP,
};
pub use reduction::{
    commutation_residual, marginalize, marginals, reconstruct, reduce, reduced_step, Marginal,
    Reconstruction, ReducedSystem,
};
pub use tournament::{
    build_tournament, condensation, decay_fit, predict_decay, Condensation, DecayFit,
    DecayPrediction, Tournament,
};
