//! Differential geometry on finite group lattices.
//!
//! A group lattice (Cayley graph) is a pair `(G, S)` of a finite group `G`
//! and a subset `S` not containing the unit; arrows run from `g` to `gh`
//! for `h` in `S`. This crate builds the first and higher order
//! differential calculus determined by such a pair and the geometric
//! structures living on it:
//!
//! * [`group`] — exact finite group arithmetic (multiplication tables),
//! * [`lattice`] — the lattice itself, its biangle/triangle/quadrangle
//!   structure, cycles, bicovariance, differentiable maps,
//! * [`algebra`] — the function algebra on `G` with pullbacks and
//!   difference operators,
//! * [`forms`] — graded differential forms modulo the 2-form relations,
//!   with `d`, the bimodule map Δ, the braiding σ and the wedge product,
//! * [`vector_fields`] — discrete and basic vector fields, flows, Lie
//!   derivatives, contractions and integral curves,
//! * [`gauge`] — connections on modules, field strength and the
//!   generalized Yang-Mills action,
//! * [`lincon`] — linear connections, torsion and curvature,
//! * [`coset`] — Schreier coset diagrams and the restricted calculus,
//! * [`checks`] — seeded invariant suites used by tests and the CLI.

pub mod algebra;
pub mod checks;
pub mod coset;
pub mod forms;
pub mod gauge;
pub mod group;
pub mod lattice;
pub mod lincon;
pub mod vector_fields;

use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("group order {order} exceeds the cap of {cap}")]
    OrderCap { order: u128, cap: usize },
    #[error("malformed group spec: {0}")]
    Spec(String),
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("the unit element may not be a member of S")]
    IdentityInS,
    #[error("S must be a nonempty subset of G")]
    EmptyS,
    #[error("{0} is not a subgroup")]
    NotSubgroup(String),
    #[error("lattice is not bicovariant: ad({0}) does not preserve S")]
    NotBicovariant(String),
    #[error("flow is not invertible: site {0} has no unique incoming arrow")]
    FlowNotInvertible(String),
    #[error("map is not differentiable: arrow {0} -> {1} is not preserved")]
    NotDifferentiable(String, String),
    #[error("vector field is not discrete: {0}")]
    NotDiscrete(String),
    #[error("grade mismatch: {0} vs {1}")]
    GradeMismatch(usize, usize),
    #[error("grade {0} exceeds the configured cap {1}")]
    GradeCap(usize, usize),
    #[error("transport matrix for direction {h} is singular at site {site}")]
    SingularTransport { h: String, site: String },
    #[error("gauge transform is singular at site {0}")]
    SingularGauge(String),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
