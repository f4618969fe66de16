//! Self-similar sets, their orthogonal transformation groups, and linear
//! projections of their attractors.
//!
//! The crate is organised bottom-up: [`geometry`] (similarities, words,
//! balls), [`group`] (closure and normal forms of the rotation parts),
//! [`dimension`] (Moran and spectral-radius solvers), [`constructions`]
//! (projection GD-IFS, dimension drop, separated subsystems, cylinder
//! selection) and [`estimation`] (sampling and box counting).

// Negated float comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constructions;
pub mod dimension;
pub mod error;
pub mod estimation;
pub mod fixtures;
pub mod geometry;
pub mod group;
pub mod tolerance;

pub use constructions::{
    annihilating_rotation, build_projection_gdifs, find_dimension_drop, select_disjoint_cylinders,
    ssc_subsystem, CylinderSelection, DimensionDrop, DimensionProxy, ProjectionGdifs, SscOptions,
    SscSubsystem,
};
pub use dimension::{
    is_strongly_connected, sim_dim_gdifs, sim_dim_ssifs, spectral_radius, DimensionReport, Edge,
    Gdifs,
};
pub use error::{ErrorClass, IfsError, Result};
pub use estimation::{
    box_dim, covering_sum_upper_bound, project_cloud, sample_attractor, BoxDimEstimate, PointCloud,
    SamplingMethod,
};
pub use geometry::{
    attractor_bounding_ball, cylinder_ball, compose, BoundingBall, LinearMap, Mat, Similarity,
    Ssifs, Subspace, Vect, Word,
};
pub use group::{
    angle_order, block_diagonalize, group_closure, kronecker_power, orbit_dense_classification,
    AngleOrder, BlockForm, OrbitDensity, TransformationGroup,
};
pub use tolerance::Tolerances;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
