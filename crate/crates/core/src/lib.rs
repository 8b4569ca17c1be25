//! World-line Monte Carlo and exact references for irreducible Casimir
//! energies of Dirichlet lines and soft potentials in two dimensions.
//!
//! Units are `ħ = c = 1`; lengths are in user units and `β` has units of
//! length².

// Negated comparisons are deliberate: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod bridges;
pub mod error;
pub mod geometry;
pub mod spectral;
pub mod stats;
pub mod worldline;

pub use bridges::{EnsembleSpec, LoopEnsemble, UnitBridge};
pub use error::{Error, Result};
pub use geometry::{Configuration, IsoTriangle, LineObject, Object, Rect, Shape, TicTacToe, Vec2};
pub use spectral::{PotentialObject, SpectralEstimate, Strength};
pub use worldline::{EnergyEstimate, Family, SweepPoint, WeightMethod};
