//! Exact arithmetic for Drinfeld modules of rank 1 and 2 over truncated Laurent
//! series in `θ^{-1/e}` with coefficients in a finite field.
//!
//! The crate is `no_std` with `alloc`.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod agf;
pub mod cinf;
pub mod drinfeld;
pub mod error;
pub mod gf;
pub mod logext;
pub mod motive;
pub mod poly;
pub mod rational;
pub mod residual;
pub mod skew;
pub mod tmatrix;
pub mod tower;
pub mod tseries;

pub use agf::{fu2_residual, verify_fu1, verify_fu2, Agf};
pub use cinf::{arith, ArithKind, Cinf, Valuation, EXACT};
pub use drinfeld::{verify_morphism, Biderivation, DrinfeldModule, Lattice, MorphismReport, Period, TorsionGroup};
pub use error::{Error, Result};
pub use gf::{Fe, Gf};
pub use logext::{
    extended_system, relation_certificate, verify_log_fneq, ExtendedSystem, GVector, LogPoint, Provenance, Relation,
    RelationReport,
};
pub use motive::{
    carlitz_phi, certified_lattice, constant_ratio, difference_residuals, legendre_invariant, phi_matrix, psi_matrix,
    specialize_psi, tensor_constructions, xi_constant, LegendreInvariant, MotiveMatrices, OmegaSeries, PeriodMatrix,
    TensorReport,
};
pub use poly::{hensel_root, newton_polygon, nth_root, NewtonPolygon, Segment};
pub use rational::Rational;
pub use residual::{required_order, Residuals};
pub use skew::{SigmaPoly, SkewPoly};
pub use tmatrix::{CMatrix, Entry, ExactMatrix, Matrix, TMatrix};
pub use tower::{FieldConfig, Precision, Tower};
pub use tseries::{PolyT, TSeries, TailBound};
