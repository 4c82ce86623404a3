//! Built-in meshes used by tests, benchmarks and the documentation examples.

use crate::mesh::Polyhedron;
use crate::sampling::SplitMix64;
use crate::Vec3;

/// Unit cube `[0,1]³` as an ASCII OFF document.
pub const CUBE_OFF: &str = "OFF
8 6 12
0 0 0
1 0 0
1 1 0
0 1 0
0 0 1
1 0 1
1 1 1
0 1 1
4 0 3 2 1
4 0 1 5 4
4 1 2 6 5
4 2 3 7 6
4 3 0 4 7
4 4 5 6 7
";

pub fn cube_vertices() -> Vec<Vec3> {
    vec![
        Vec3::new(0.0, 0.0, 0.0),
        Vec3::new(1.0, 0.0, 0.0),
        Vec3::new(1.0, 1.0, 0.0),
        Vec3::new(0.0, 1.0, 0.0),
        Vec3::new(0.0, 0.0, 1.0),
        Vec3::new(1.0, 0.0, 1.0),
        Vec3::new(1.0, 1.0, 1.0),
        Vec3::new(0.0, 1.0, 1.0),
    ]
}

pub fn cube_faces() -> Vec<Vec<usize>> {
    vec![
        vec![0, 3, 2, 1], // bottom (z=0), seen from below
        vec![0, 1, 5, 4], // y=0
        vec![1, 2, 6, 5], // x=1
        vec![2, 3, 7, 6], // y=1
        vec![3, 0, 4, 7], // x=0
        vec![4, 5, 6, 7], // top (z=1)
    ]
}

/// Unit cube `[0,1]³`.
pub fn cube() -> Polyhedron {
    Polyhedron::from_parts(cube_vertices(), cube_faces()).expect("cube fixture is valid")
}

/// Unit cube whose top face is split into two coplanar rectangles; the split
/// edge is a flat hinge (dihedral π).
pub fn cube_with_split_top() -> Polyhedron {
    let mut verts = cube_vertices();
    verts.push(Vec3::new(0.5, 0.0, 1.0)); // 8, on edge 4-5
    verts.push(Vec3::new(0.5, 1.0, 1.0)); // 9, on edge 7-6
    let faces = vec![
        vec![0, 3, 2, 1],
        vec![0, 1, 5, 8, 4],
        vec![1, 2, 6, 5],
        vec![2, 3, 7, 9, 6],
        vec![3, 0, 4, 7],
        vec![4, 8, 9, 7], // left half of the top
        vec![8, 5, 6, 9], // right half of the top
    ];
    Polyhedron::from_parts(verts, faces).expect("split-top cube fixture is valid")
}

/// Regular tetrahedron with the given edge length.
pub fn regular_tetrahedron(edge: f64) -> Polyhedron {
    let s = edge / (2.0 * 2.0_f64.sqrt());
    let verts = vec![
        Vec3::new(s, s, s),
        Vec3::new(s, -s, -s),
        Vec3::new(-s, s, -s),
        Vec3::new(-s, -s, s),
    ];
    let faces = vec![vec![0, 1, 2], vec![0, 3, 1], vec![0, 2, 3], vec![1, 3, 2]];
    Polyhedron::from_parts(verts, faces).expect("tetrahedron fixture is valid")
}

/// Icosahedron combinatorics: 12 vertices `(0, ±1, ±φ)` up to cyclic
/// permutation, 20 triangles, counter-clockwise from outside.
fn icosahedron_parts() -> (Vec<Vec3>, Vec<Vec<usize>>) {
    let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let verts = vec![
        Vec3::new(-1.0, phi, 0.0),
        Vec3::new(1.0, phi, 0.0),
        Vec3::new(-1.0, -phi, 0.0),
        Vec3::new(1.0, -phi, 0.0),
        Vec3::new(0.0, -1.0, phi),
        Vec3::new(0.0, 1.0, phi),
        Vec3::new(0.0, -1.0, -phi),
        Vec3::new(0.0, 1.0, -phi),
        Vec3::new(phi, 0.0, -1.0),
        Vec3::new(phi, 0.0, 1.0),
        Vec3::new(-phi, 0.0, -1.0),
        Vec3::new(-phi, 0.0, 1.0),
    ];
    let faces = vec![
        vec![0, 11, 5],
        vec![0, 5, 1],
        vec![0, 1, 7],
        vec![0, 7, 10],
        vec![0, 10, 11],
        vec![1, 5, 9],
        vec![5, 11, 4],
        vec![11, 10, 2],
        vec![10, 7, 6],
        vec![7, 1, 8],
        vec![3, 9, 4],
        vec![3, 4, 2],
        vec![3, 2, 6],
        vec![3, 6, 8],
        vec![3, 8, 9],
        vec![4, 9, 5],
        vec![2, 4, 11],
        vec![6, 2, 10],
        vec![8, 6, 7],
        vec![9, 8, 1],
    ];
    (verts, faces)
}

/// A seeded "random" convex polyhedron with 12 vertices: an icosahedron whose
/// vertices are radially jittered by up to ±5%. The jitter is small enough to
/// keep the icosahedral face structure strictly convex, which construction-time
/// validation re-checks.
pub fn random_convex_12(seed: u64) -> Polyhedron {
    let (mut verts, faces) = icosahedron_parts();
    let mut rng = SplitMix64::new(seed);
    for v in &mut verts {
        let r = 0.95 + 0.10 * rng.next_f64();
        *v *= r;
    }
    Polyhedron::from_parts(verts, faces).expect("jittered icosahedron stays convex")
}

/// Serialize a mesh back to ASCII OFF (shortest round-trip float formatting).
pub fn to_off_string(p: &Polyhedron) -> String {
    use std::fmt::Write as _;
    let mut s = String::new();
    writeln!(s, "OFF").unwrap();
    writeln!(s, "{} {} {}", p.vertex_count(), p.face_count(), p.edge_count()).unwrap();
    for w in 0..p.vertex_count() {
        let v = p.vertex(crate::VertexId(w));
        writeln!(s, "{} {} {}", v.x, v.y, v.z).unwrap();
    }
    for f in 0..p.face_count() {
        let ids = p.face(crate::FaceId(f));
        write!(s, "{}", ids.len()).unwrap();
        for id in ids {
            write!(s, " {}", id.0).unwrap();
        }
        writeln!(s).unwrap();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_validate() {
        cube();
        cube_with_split_top();
        regular_tetrahedron(1.0);
        regular_tetrahedron(2.5);
        random_convex_12(42);
        random_convex_12(7);
    }

    #[test]
    fn off_round_trip() {
        let p = random_convex_12(42);
        let q = Polyhedron::load_off(&to_off_string(&p)).unwrap();
        assert_eq!(p.vertex_count(), q.vertex_count());
        assert_eq!(p.face_count(), q.face_count());
        for w in 0..p.vertex_count() {
            let d = (p.vertex(crate::VertexId(w)) - q.vertex(crate::VertexId(w))).norm();
            assert!(d == 0.0, "vertex {w} moved by {d}");
        }
    }
}
