//! Numerical laboratory for degree-d expanding circle endomorphisms.
//!
//! The crate computes the constructive objects attached to a uniformly
//! symmetric circle endomorphism at desk scale: Markov partition levels,
//! dual derivatives on the dual symbolic space together with the summation
//! and compatibility conditions, topological conjugacies and their
//! quasisymmetric distortion, transfer-operator and Cesaro measures with
//! Gibbs-ratio and Radon-Nikodym diagnostics, cylinder and Rohlin
//! entropies, the linear model of the map, and Beurling-Ahlfors extensions
//! with their Beltrami coefficients.
//!
//! Everything is pure and deterministic given the map; a [`LiftMap`] is
//! immutable after construction and can be shared freely.

pub mod ba;
pub mod circle_map;
pub mod conjugacy;
pub mod dual_deriv;
pub mod error;
pub mod grid;
pub mod linear_model;
pub mod measures;
pub mod roots;
pub mod symbolic;

pub use ba::{beltrami_at, extend_at, skew_rho, vanishing_profile, BeltramiSample, LineMap};
pub use circle_map::{ExpansionReport, LiftMap, MapKind, ModulusReport};
pub use conjugacy::{conjugacy_map, equivariance_residual, qs_report, zeta};
pub use dual_deriv::{
    check_compatibility, check_summation, dmax_distance, dual_derivative, solenoid,
    CompatibilityReport, CompatibilityVerdict, DualDerivativeTable,
};
pub use error::{Error, Result};
pub use grid::{GridFn, GridHomeomorphism};
pub use linear_model::{
    check_functional_eq, delta_of, linear_model_map, reconstruct_from_dual, theta_n, LinearModel,
};
pub use measures::{
    cesaro_distribution, dual_cylinder_measure, entropy_cylinder, entropy_rohlin, gibbs_report,
    invariant_density, lebesgue_cylinder_measure, radon_nikodym, transfer_apply, CylinderMeasure,
    GridDensity, Side, TransferOperator,
};
pub use symbolic::{
    bounded_geometry_report, dual_metric, encode_point, interval_for_word, partition_endpoints,
    partition_family, PartitionLevel, SymbolWord,
};
