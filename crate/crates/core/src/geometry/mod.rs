//! Rough boundary profiles, boundary-conforming meshes and point location.

pub mod builders;
pub mod frame;
pub mod io;
pub mod locate;
pub mod mesh;
pub mod profile;

pub use builders::{
    build_cell_mesh, build_coarse_mesh, build_reference_mesh, build_reference_mesh_capped, build_square_mesh,
    build_strip_mesh, CoarseMesh, StripMesh, MIN_ANGLE_DEG,
};
pub use frame::ElementFrame;
pub use io::{read_mesh, write_mesh};
pub use locate::{locate_point, Location, PointLocator, LOCATE_TOL};
pub use mesh::{BoundaryEdge, EdgeTag, ElementClass, Point, TriMesh};
pub use profile::{BoundaryProfile, ProfileSource, UnitCell};
