//! Constructive procedures built on top of the geometry, group and
//! dimension layers.

pub mod annihilate;
pub mod cylinders;
pub mod projection;
pub mod ssc;

pub use annihilate::{annihilating_rotation, Annihilation};
pub use cylinders::{select_disjoint_cylinders, select_disjoint_cylinders_with, CylinderOptions, CylinderSelection};
pub use projection::{build_projection_gdifs, find_dimension_drop, DimensionDrop, OverlapWitness, ProjectionGdifs};
pub use ssc::{ssc_subsystem, DimensionProxy, SscOptions, SscSubsystem};
