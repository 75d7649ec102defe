//! Voxel geometry kernel.
//!
//! Every interference question in the crate reduces to integer set
//! operations on [`VoxelGrid`]s that share one global lattice anchored at the
//! world origin. Meshes are only touched once, by [`voxelize`].

mod contact;
mod direction;
mod mesh;
mod pose;
mod sweep;
mod voxel;
mod voxelize;

pub use contact::{contact_patch, ContactFace, ContactPatch};
pub use direction::{Axis, Direction, Displacement, DisplacementKind, Sign};
pub use mesh::{load_mesh, load_obj_objects, write_stl, TriangleMesh};
pub use pose::{stable_pose_frame, Frame};
pub use sweep::sweep_is_clear;
pub use voxel::{default_rotation_angle, displace, overlap_count, rotate, VoxelGrid};
pub use voxelize::voxelize;

pub type Point = nalgebra::Point3<f64>;
pub type Vector = nalgebra::Vector3<f64>;
