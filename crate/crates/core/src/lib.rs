//! Intrinsic geometry engine for convex polyhedra.
//!
//! The crate computes with the *intrinsic* metric of a closed convex
//! polyhedral surface: distances are lengths of shortest curves lying on the
//! surface, never chords through the interior. On top of an exact geodesic
//! search it provides:
//!
//! - [`mesh`] — OFF loading, validation, adjacency and per-face charts;
//! - [`unfold`] — planar isometries and face-sequence unfoldings;
//! - [`geodesic`] — enumeration of *all* shortest segments between two
//!   surface points, plus a brute-force oracle for tests;
//! - [`antipode`] — the farthest-point (antipodal) map `F` and the radius
//!   function, computed from circumcenters of unfolded source images;
//! - [`zonemap`] — the decomposition of a face into zones on which `F` is a
//!   single rational map or a constant vertex, and the rational-map
//!   coefficients themselves;
//! - [`symtrig`] — an exact quotient ring Q[c,s]/(c²+s²−1) used to certify
//!   the algebraic identities behind the rational maps;
//! - [`steinhaus`] — reproducible surveys measuring how far `F∘F` is from
//!   the identity, with the flat torus as positive control.

pub mod antipode;
pub mod fixtures;
pub mod geodesic;
pub mod mesh;
pub mod sampling;
pub mod steinhaus;
pub mod symtrig;
pub mod unfold;
pub mod zonemap;

pub use mesh::{EdgeId, FaceId, MeshError, Polyhedron, SurfacePoint, VertexId};
pub use unfold::PlanarIsometry;

/// 2D vector in a face chart (length units of the mesh).
pub type Vec2 = nalgebra::Vector2<f64>;
/// 3D point/vector in ambient space.
pub type Vec3 = nalgebra::Vector3<f64>;

/// 2D cross product (z-component of the 3D cross of the embedded vectors).
#[inline]
pub(crate) fn cross2(a: Vec2, b: Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}
