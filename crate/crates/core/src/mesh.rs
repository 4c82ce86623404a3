//! Convex polyhedral surfaces: OFF parsing, validation, adjacency, and the
//! per-face planar charts used by the unfolding machinery.
//!
//! A [`Polyhedron`] is immutable after construction and safe to share across
//! threads. Validation enforces that the mesh is a closed convex 2-manifold:
//! every edge bounds exactly two faces, Euler characteristic is 2, every
//! vertex lies on or below every face plane, and angle deficits sum to 4π.

use crate::{cross2, Vec2, Vec3};
use serde::Serialize;
use thiserror::Error;

/// Relative tolerance (times mesh diameter) for planarity, convexity and
/// point-membership tests.
pub const GEOM_TOL: f64 = 1e-9;

/// Index of a vertex in [`Polyhedron::vertices`].
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize)]
pub struct VertexId(pub usize);

/// Index of a face in [`Polyhedron::face_count`].
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize)]
pub struct FaceId(pub usize);

/// Index of an edge in the edge table.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize)]
pub struct EdgeId(pub usize);

impl std::fmt::Display for VertexId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "v{}", self.0)
    }
}
impl std::fmt::Display for FaceId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "f{}", self.0)
    }
}
impl std::fmt::Display for EdgeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "e{}", self.0)
    }
}

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("OFF parse error: {0}")]
    Parse(String),
    #[error("mesh is not closed: {0}")]
    NotClosed(String),
    #[error("mesh is not convex: {0}")]
    NotConvex(String),
    #[error("degenerate face f{face}: area {area:e} below threshold {threshold:e}")]
    DegenerateFace { face: usize, area: f64, threshold: f64 },
    #[error("invalid id: {0}")]
    InvalidId(String),
    #[error("invalid surface point: {0}")]
    InvalidSurfacePoint(String),
}

/// Undirected edge of the mesh with its two incident faces.
///
/// `verts` is sorted ascending; `faces[0] < faces[1]`. `side_in` records,
/// for each incident face, the boundary position `k` such that the edge
/// spans that face's vertices `k` and `k+1 (mod n)` (in face order).
#[derive(Clone, Debug)]
pub struct Edge {
    pub verts: [VertexId; 2],
    pub faces: [FaceId; 2],
    pub side_in: [usize; 2],
}

impl Edge {
    /// The face across the edge from `f`.
    pub fn other_face(&self, f: FaceId) -> FaceId {
        if self.faces[0] == f {
            self.faces[1]
        } else {
            self.faces[0]
        }
    }

    pub fn has_face(&self, f: FaceId) -> bool {
        self.faces[0] == f || self.faces[1] == f
    }
}

/// Orthonormal frame of a face plane: `chart(P) = ((P−origin)·u, (P−origin)·v)`.
///
/// The frame is a function of the face *plane* only (outward normal and
/// support), so coplanar faces share the exact same chart and a flat hinge
/// unfolds to the identity.
#[derive(Clone, Debug)]
pub struct Frame {
    pub origin: Vec3,
    pub u: Vec3,
    pub v: Vec3,
    pub normal: Vec3,
}

impl Frame {
    pub fn project(&self, p: Vec3) -> Vec2 {
        let d = p - self.origin;
        Vec2::new(d.dot(&self.u), d.dot(&self.v))
    }

    pub fn lift(&self, q: Vec2) -> Vec3 {
        self.origin + self.u * q.x + self.v * q.y
    }
}

/// A point on the surface: a face plus barycentric coordinates over that
/// face's vertex cycle. Coordinates are ≥ 0 and sum to 1 within 1e−12.
///
/// Points on shared edges or vertices admit several representations; the
/// canonical one (lowest face id) is produced by [`Polyhedron::canonicalize`].
#[derive(Clone, Debug, Serialize)]
pub struct SurfacePoint {
    pub face: FaceId,
    pub bary: Vec<f64>,
}

impl SurfacePoint {
    /// Uniform barycentric point of a face (the polygon's vertex average).
    pub fn face_center(poly: &Polyhedron, face: FaceId) -> SurfacePoint {
        let n = poly.face(face).len();
        SurfacePoint {
            face,
            bary: vec![1.0 / n as f64; n],
        }
    }

    /// The surface point sitting exactly at a mesh vertex, on its lowest
    /// incident face.
    pub fn at_vertex(poly: &Polyhedron, v: VertexId) -> SurfacePoint {
        let face = poly
            .faces_at_vertex(v)
            .iter()
            .copied()
            .min()
            .expect("vertex belongs to at least one face");
        let mut bary = vec![0.0; poly.face(face).len()];
        let k = poly
            .face(face)
            .iter()
            .position(|&w| w == v)
            .expect("vertex is on face");
        bary[k] = 1.0;
        SurfacePoint { face, bary }
    }
}

/// JSON echo of a validated mesh (debugging aid).
#[derive(Serialize)]
pub struct MeshEcho {
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<Vec<usize>>,
    pub deficits: Vec<f64>,
    pub euler_characteristic: i64,
    pub deficit_sum: f64,
    pub diameter: f64,
}

/// Immutable convex closed polyhedral surface with adjacency and chart tables.
#[derive(Clone, Debug)]
pub struct Polyhedron {
    vertices: Vec<Vec3>,
    faces: Vec<Vec<VertexId>>,
    edges: Vec<Edge>,
    face_edges: Vec<Vec<EdgeId>>,
    vertex_faces: Vec<Vec<FaceId>>,
    vertex_total_angle: Vec<f64>,
    frames: Vec<Frame>,
    face_uv: Vec<Vec<Vec2>>,
    areas: Vec<f64>,
    diameter: f64,
}

impl Polyhedron {
    /// Build and fully validate a polyhedron from raw vertex/face lists.
    /// Faces are counter-clockwise as seen from outside.
    pub fn from_parts(vertices: Vec<Vec3>, faces: Vec<Vec<usize>>) -> Result<Self, MeshError> {
        if vertices.len() < 4 {
            return Err(MeshError::Parse(format!(
                "need at least 4 vertices, got {}",
                vertices.len()
            )));
        }
        if faces.len() < 4 {
            return Err(MeshError::Parse(format!(
                "need at least 4 faces, got {}",
                faces.len()
            )));
        }
        for v in &vertices {
            if !(v.x.is_finite() && v.y.is_finite() && v.z.is_finite()) {
                return Err(MeshError::Parse("non-finite vertex coordinate".into()));
            }
        }
        let faces: Vec<Vec<VertexId>> = faces
            .into_iter()
            .map(|f| f.into_iter().map(VertexId).collect())
            .collect();
        for (fi, f) in faces.iter().enumerate() {
            if f.len() < 3 {
                return Err(MeshError::Parse(format!("face {fi} has fewer than 3 vertices")));
            }
            for &VertexId(v) in f {
                if v >= vertices.len() {
                    return Err(MeshError::Parse(format!(
                        "face {fi} references vertex {v} out of range"
                    )));
                }
            }
            let mut sorted: Vec<usize> = f.iter().map(|w| w.0).collect();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != f.len() {
                return Err(MeshError::Parse(format!("face {fi} repeats a vertex")));
            }
        }

        let diameter = {
            let mut d: f64 = 0.0;
            for i in 0..vertices.len() {
                for j in (i + 1)..vertices.len() {
                    d = d.max((vertices[i] - vertices[j]).norm());
                }
            }
            if d <= 0.0 {
                return Err(MeshError::Parse("all vertices coincide".into()));
            }
            d
        };

        // Edge table. Each undirected edge must appear in exactly two faces,
        // with opposite orientations (consistently oriented closed surface).
        use std::collections::BTreeMap;
        let mut edge_map: BTreeMap<(usize, usize), Vec<(usize, usize, bool)>> = BTreeMap::new();
        for (fi, f) in faces.iter().enumerate() {
            let n = f.len();
            for k in 0..n {
                let a = f[k].0;
                let b = f[(k + 1) % n].0;
                let key = (a.min(b), a.max(b));
                edge_map.entry(key).or_default().push((fi, k, a < b));
            }
        }
        let mut edges = Vec::with_capacity(edge_map.len());
        let mut face_edges: Vec<Vec<EdgeId>> = faces.iter().map(|f| vec![EdgeId(0); f.len()]).collect();
        for (&(a, b), uses) in &edge_map {
            match uses.len() {
                2 => {
                    if uses[0].2 == uses[1].2 {
                        return Err(MeshError::NotClosed(format!(
                            "edge ({a},{b}) traversed twice in the same direction (inconsistent orientation)"
                        )));
                    }
                }
                1 => {
                    return Err(MeshError::NotClosed(format!(
                        "edge ({a},{b}) bounds only one face"
                    )))
                }
                k => {
                    return Err(MeshError::NotClosed(format!(
                        "edge ({a},{b}) bounds {k} faces"
                    )))
                }
            }
            let mut pair = [(uses[0].0, uses[0].1), (uses[1].0, uses[1].1)];
            pair.sort_unstable();
            let id = EdgeId(edges.len());
            edges.push(Edge {
                verts: [VertexId(a), VertexId(b)],
                faces: [FaceId(pair[0].0), FaceId(pair[1].0)],
                side_in: [pair[0].1, pair[1].1],
            });
            face_edges[pair[0].0][pair[0].1] = id;
            face_edges[pair[1].0][pair[1].1] = id;
        }

        let v = vertices.len() as i64;
        let e = edges.len() as i64;
        let fc = faces.len() as i64;
        if v - e + fc != 2 {
            return Err(MeshError::NotClosed(format!(
                "Euler characteristic V−E+F = {} ≠ 2",
                v - e + fc
            )));
        }

        // Face planes, areas, planarity, degeneracy.
        let mut frames = Vec::with_capacity(faces.len());
        let mut areas = Vec::with_capacity(faces.len());
        for (fi, f) in faces.iter().enumerate() {
            // Newell normal: robust for (near-)planar polygons.
            let mut n = Vec3::zeros();
            let mut centroid = Vec3::zeros();
            let m = f.len();
            for k in 0..m {
                let p = vertices[f[k].0];
                let q = vertices[f[(k + 1) % m].0];
                n += (p - q).cross(&(p + q));
                centroid += p;
            }
            centroid /= m as f64;
            let area = 0.5 * n.norm();
            areas.push(area);
            let thr = 1e-12 * diameter * diameter;
            if area < thr {
                return Err(MeshError::DegenerateFace {
                    face: fi,
                    area,
                    threshold: thr,
                });
            }
            let normal = n / n.norm();
            let d = normal.dot(&centroid);
            for &VertexId(w) in f {
                let off = (normal.dot(&vertices[w]) - d).abs();
                if off > GEOM_TOL * diameter {
                    return Err(MeshError::Parse(format!(
                        "face {fi} is not planar: vertex {w} off-plane by {off:e}"
                    )));
                }
            }
            // Plane-canonical chart: origin is the projection of the ambient
            // origin onto the plane; u is built from the coordinate axis least
            // aligned with the normal. Depends on the plane only, so coplanar
            // faces share a chart exactly.
            let origin = normal * d;
            let axes = [Vec3::x(), Vec3::y(), Vec3::z()];
            let i_min = (0..3)
                .min_by(|&i, &j| normal[i].abs().total_cmp(&normal[j].abs()))
                .unwrap();
            let u = axes[i_min].cross(&normal).normalize();
            let vv = normal.cross(&u);
            frames.push(Frame {
                origin,
                u,
                v: vv,
                normal,
            });
        }

        // Global convexity: every vertex on or below every face plane, and the
        // vertex centroid strictly inside (outward orientation check).
        let centroid: Vec3 = vertices.iter().sum::<Vec3>() / vertices.len() as f64;
        for (fi, fr) in frames.iter().enumerate() {
            let d = fr.normal.dot(&fr.origin);
            if fr.normal.dot(&centroid) - d > -GEOM_TOL * diameter {
                return Err(MeshError::NotConvex(format!(
                    "face {fi} does not face outward from the vertex centroid (check face winding)"
                )));
            }
            for (wi, w) in vertices.iter().enumerate() {
                let off = fr.normal.dot(w) - d;
                if off > GEOM_TOL * diameter {
                    return Err(MeshError::NotConvex(format!(
                        "vertex {wi} lies {off:e} above the plane of face {fi}"
                    )));
                }
            }
        }

        // Chart coordinates of each face's vertex cycle.
        let face_uv: Vec<Vec<Vec2>> = faces
            .iter()
            .zip(&frames)
            .map(|(f, fr)| f.iter().map(|&VertexId(w)| fr.project(vertices[w])).collect())
            .collect();

        // Faces must be convex polygons, counter-clockwise in their chart.
        for (fi, uv) in face_uv.iter().enumerate() {
            let m = uv.len();
            for k in 0..m {
                let a = uv[k];
                let b = uv[(k + 1) % m];
                let c = uv[(k + 2) % m];
                if cross2(b - a, c - b) < -GEOM_TOL * diameter * diameter {
                    return Err(MeshError::NotConvex(format!(
                        "face {fi} is a non-convex polygon at corner {}",
                        (k + 1) % m
                    )));
                }
            }
        }

        // Per-vertex incident faces and total incident angle.
        let mut vertex_faces: Vec<Vec<FaceId>> = vec![Vec::new(); vertices.len()];
        let mut vertex_total_angle = vec![0.0; vertices.len()];
        for (fi, f) in faces.iter().enumerate() {
            let m = f.len();
            for k in 0..m {
                let w = f[k].0;
                vertex_faces[w].push(FaceId(fi));
                let prev = vertices[f[(k + m - 1) % m].0];
                let here = vertices[w];
                let next = vertices[f[(k + 1) % m].0];
                let a = (prev - here).normalize();
                let b = (next - here).normalize();
                vertex_total_angle[w] += a.dot(&b).clamp(-1.0, 1.0).acos();
            }
        }
        for fs in &mut vertex_faces {
            fs.sort_unstable();
            if fs.is_empty() {
                return Err(MeshError::NotClosed("isolated vertex".into()));
            }
        }
        let mut deficit_sum = 0.0;
        for (wi, &total) in vertex_total_angle.iter().enumerate() {
            let deficit = 2.0 * std::f64::consts::PI - total;
            if deficit < -1e-9 {
                return Err(MeshError::NotConvex(format!(
                    "vertex {wi} has negative angle deficit {deficit:e}"
                )));
            }
            if deficit >= 2.0 * std::f64::consts::PI {
                return Err(MeshError::NotConvex(format!(
                    "vertex {wi} has angle deficit {deficit} ≥ 2π"
                )));
            }
            deficit_sum += deficit;
        }
        if (deficit_sum - 4.0 * std::f64::consts::PI).abs() > 1e-9 {
            return Err(MeshError::NotConvex(format!(
                "angle deficits sum to {deficit_sum}, expected 4π"
            )));
        }

        Ok(Polyhedron {
            vertices,
            faces,
            edges,
            face_edges,
            vertex_faces,
            vertex_total_angle,
            frames,
            face_uv,
            areas,
            diameter,
        })
    }

    /// Parse an ASCII OFF document and validate the mesh.
    pub fn load_off(text: &str) -> Result<Self, MeshError> {
        let mut tokens = text
            .lines()
            .map(|l| match l.find('#') {
                Some(k) => &l[..k],
                None => l,
            })
            .flat_map(|l| l.split_whitespace());
        let magic = tokens.next().ok_or_else(|| MeshError::Parse("empty document".into()))?;
        if magic != "OFF" {
            return Err(MeshError::Parse(format!("expected OFF header, got {magic:?}")));
        }
        let next_usize = |what: &str, tokens: &mut dyn Iterator<Item = &str>| {
            tokens
                .next()
                .ok_or_else(|| MeshError::Parse(format!("missing {what}")))?
                .parse::<usize>()
                .map_err(|e| MeshError::Parse(format!("bad {what}: {e}")))
        };
        let nv = next_usize("vertex count", &mut tokens)?;
        let nf = next_usize("face count", &mut tokens)?;
        let _ne = next_usize("edge count", &mut tokens)?;
        let mut vertices = Vec::with_capacity(nv);
        for i in 0..nv {
            let mut coord = [0.0; 3];
            for c in &mut coord {
                *c = tokens
                    .next()
                    .ok_or_else(|| MeshError::Parse(format!("vertex {i} truncated")))?
                    .parse::<f64>()
                    .map_err(|e| MeshError::Parse(format!("vertex {i}: {e}")))?;
            }
            vertices.push(Vec3::new(coord[0], coord[1], coord[2]));
        }
        let mut faces = Vec::with_capacity(nf);
        for i in 0..nf {
            let n = next_usize(&format!("face {i} size"), &mut tokens)?;
            if n < 3 {
                return Err(MeshError::Parse(format!("face {i} has size {n} < 3")));
            }
            let mut f = Vec::with_capacity(n);
            for k in 0..n {
                f.push(next_usize(&format!("face {i} index {k}"), &mut tokens)?);
            }
            faces.push(f);
        }
        Self::from_parts(vertices, faces)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }
    pub fn face_count(&self) -> usize {
        self.faces.len()
    }
    pub fn vertex(&self, v: VertexId) -> Vec3 {
        self.vertices[v.0]
    }
    pub fn face(&self, f: FaceId) -> &[VertexId] {
        &self.faces[f.0]
    }
    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e.0]
    }
    /// Edge ids of a face, in boundary order (edge `k` spans corners `k, k+1`).
    pub fn face_edge_ids(&self, f: FaceId) -> &[EdgeId] {
        &self.face_edges[f.0]
    }
    pub fn faces_at_vertex(&self, v: VertexId) -> &[FaceId] {
        &self.vertex_faces[v.0]
    }
    pub fn frame(&self, f: FaceId) -> &Frame {
        &self.frames[f.0]
    }
    /// Chart coordinates of the face's vertex cycle.
    pub fn face_chart(&self, f: FaceId) -> &[Vec2] {
        &self.face_uv[f.0]
    }
    pub fn face_area(&self, f: FaceId) -> f64 {
        self.areas[f.0]
    }
    /// Extrinsic diameter (max pairwise vertex distance); the scale reference
    /// for all relative tolerances.
    pub fn diameter(&self) -> f64 {
        self.diameter
    }
    /// Sum of all vertex angle deficits (4π for every valid mesh).
    pub fn deficit_sum(&self) -> f64 {
        self.vertex_total_angle
            .iter()
            .map(|t| 2.0 * std::f64::consts::PI - t)
            .sum()
    }

    /// Angle deficit 2π − (total incident face angle) at a vertex, in [0, 2π).
    pub fn vertex_curvature(&self, v: VertexId) -> Result<f64, MeshError> {
        let total = self
            .vertex_total_angle
            .get(v.0)
            .ok_or_else(|| MeshError::InvalidId(format!("{v}")))?;
        Ok((2.0 * std::f64::consts::PI - total).max(0.0))
    }

    /// In-plane frame aligned with the face's first edge: origin at corner 0,
    /// x-axis toward corner 1. `(origin, unit x)` in chart coordinates; this
    /// is the reproducible frame used for zone-map output and fitting.
    pub fn first_edge_frame(&self, f: FaceId) -> (Vec2, Vec2) {
        let uv = &self.face_uv[f.0];
        (uv[0], (uv[1] - uv[0]).normalize())
    }

    /// Re-express a chart point in the face's first-edge frame.
    pub fn to_first_edge(&self, f: FaceId, q: Vec2) -> Vec2 {
        let (o, u) = self.first_edge_frame(f);
        let d = q - o;
        Vec2::new(d.dot(&u), cross2(u, d))
    }

    /// Diameter of a face polygon (max pairwise chart distance).
    pub fn face_diameter(&self, f: FaceId) -> f64 {
        let uv = &self.face_uv[f.0];
        let mut d: f64 = 0.0;
        for i in 0..uv.len() {
            for j in (i + 1)..uv.len() {
                d = d.max((uv[i] - uv[j]).norm());
            }
        }
        d
    }

    /// Validate barycentric data and build a surface point.
    pub fn surface_point(&self, face: FaceId, bary: Vec<f64>) -> Result<SurfacePoint, MeshError> {
        let f = self
            .faces
            .get(face.0)
            .ok_or_else(|| MeshError::InvalidId(format!("{face}")))?;
        if bary.len() != f.len() {
            return Err(MeshError::InvalidSurfacePoint(format!(
                "face {face} has {} vertices, got {} coordinates",
                f.len(),
                bary.len()
            )));
        }
        let sum: f64 = bary.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(MeshError::InvalidSurfacePoint(format!(
                "barycentric coordinates sum to {sum}, expected 1"
            )));
        }
        if bary.iter().any(|&b| b < -1e-12) {
            return Err(MeshError::InvalidSurfacePoint(
                "negative barycentric coordinate".into(),
            ));
        }
        let bary = bary.into_iter().map(|b| b.max(0.0)).collect();
        Ok(SurfacePoint { face, bary })
    }

    /// 3D position of a surface point.
    pub fn position(&self, sp: &SurfacePoint) -> Vec3 {
        let f = &self.faces[sp.face.0];
        let mut p = Vec3::zeros();
        for (b, &VertexId(w)) in sp.bary.iter().zip(f) {
            p += self.vertices[w] * *b;
        }
        p
    }

    /// Chart coordinates of a surface point in its own face's chart.
    pub fn chart_point(&self, sp: &SurfacePoint) -> Vec2 {
        let uv = &self.face_uv[sp.face.0];
        let mut q = Vec2::zeros();
        for (b, &xy) in sp.bary.iter().zip(uv) {
            q += xy * *b;
        }
        q
    }

    /// Whether a chart point lies inside (or within `margin` of) a face.
    pub fn chart_contains(&self, f: FaceId, q: Vec2, margin: f64) -> bool {
        let uv = &self.face_uv[f.0];
        let m = uv.len();
        for k in 0..m {
            let a = uv[k];
            let b = uv[(k + 1) % m];
            let edge = b - a;
            if cross2(edge, q - a) < -margin * edge.norm() {
                return false;
            }
        }
        true
    }

    /// Barycentric coordinates of a chart point via fan triangulation from
    /// corner 0 (deterministic choice among the many valid polygon
    /// barycentric systems). Returns `None` when the point is outside.
    pub fn bary_from_chart(&self, f: FaceId, q: Vec2) -> Option<Vec<f64>> {
        if !self.chart_contains(f, q, GEOM_TOL * self.diameter) {
            return None;
        }
        let uv = &self.face_uv[f.0];
        let m = uv.len();
        let mut best: Option<(f64, usize, [f64; 3])> = None;
        for k in 1..(m - 1) {
            let (a, b, c) = (uv[0], uv[k], uv[k + 1]);
            let det = cross2(b - a, c - a);
            if det.abs() < 1e-30 {
                continue;
            }
            let l1 = cross2(q - a, c - a) / det;
            let l2 = cross2(b - a, q - a) / det;
            let l0 = 1.0 - l1 - l2;
            let min = l0.min(l1).min(l2);
            if best.is_none() || min > best.unwrap().0 {
                best = Some((min, k, [l0, l1, l2]));
            }
        }
        let (_, k, l) = best?;
        let mut bary = vec![0.0; m];
        bary[0] = l[0].max(0.0);
        bary[k] = l[1].max(0.0);
        bary[k + 1] = l[2].max(0.0);
        let s: f64 = bary.iter().sum();
        for b in &mut bary {
            *b /= s;
        }
        Some(bary)
    }

    /// Surface point from face + chart coordinates (must lie in the face).
    pub fn surface_point_from_chart(&self, f: FaceId, q: Vec2) -> Option<SurfacePoint> {
        self.bary_from_chart(f, q).map(|bary| SurfacePoint { face: f, bary })
    }

    /// All faces containing a 3D point of the surface (tolerance-based).
    pub fn faces_containing(&self, p: Vec3) -> Vec<FaceId> {
        let tol = GEOM_TOL * self.diameter;
        let mut out = Vec::new();
        for fi in 0..self.faces.len() {
            let fr = &self.frames[fi];
            if (fr.normal.dot(&(p - fr.origin))).abs() > tol {
                continue;
            }
            if self.chart_contains(FaceId(fi), fr.project(p), tol) {
                out.push(FaceId(fi));
            }
        }
        out
    }

    /// Canonical representative of a surface point: the same 3D location
    /// expressed on the lowest-id face containing it.
    pub fn canonicalize(&self, sp: &SurfacePoint) -> SurfacePoint {
        let p = self.position(sp);
        let faces = self.faces_containing(p);
        let face = match faces.first() {
            Some(&f) if f.0 < sp.face.0 => f,
            _ => return sp.clone(),
        };
        let q = self.frames[face.0].project(p);
        match self.bary_from_chart(face, q) {
            Some(bary) => SurfacePoint { face, bary },
            None => sp.clone(),
        }
    }

    /// Faces a surface point belongs to (≥ 1; 2 on an open edge, more at a
    /// vertex). Sorted ascending.
    pub fn incident_faces(&self, sp: &SurfacePoint) -> Vec<FaceId> {
        let mut fs = self.faces_containing(self.position(sp));
        if fs.is_empty() {
            fs.push(sp.face);
        }
        fs
    }

    pub fn echo(&self) -> MeshEcho {
        MeshEcho {
            vertices: self.vertices.iter().map(|v| [v.x, v.y, v.z]).collect(),
            faces: self
                .faces
                .iter()
                .map(|f| f.iter().map(|w| w.0).collect())
                .collect(),
            deficits: (0..self.vertices.len())
                .map(|w| self.vertex_curvature(VertexId(w)).unwrap())
                .collect(),
            euler_characteristic: self.vertices.len() as i64 - self.edges.len() as i64
                + self.faces.len() as i64,
            deficit_sum: self.deficit_sum(),
            diameter: self.diameter,
        }
    }
}
