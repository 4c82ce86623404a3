//! Planar rigid motions and face-sequence unfoldings.
//!
//! Crossing an edge of the mesh rotates the far face into the plane of the
//! near one. In chart coordinates this is a direct planar isometry fixed by
//! the images of the shared edge's endpoints; composing the per-edge
//! transitions along a face sequence yields the cumulative isometry that
//! maps the last face's chart into the first face's chart. Because charts
//! are plane-canonical (see [`crate::mesh::Frame`]), a flat hinge between
//! coplanar faces unfolds to the identity.

use crate::mesh::{EdgeId, FaceId, Polyhedron};
use crate::{cross2, Vec2};
use thiserror::Error;

/// Angle-equality tolerance: two rotations count as equal-angle when
/// `|c₁−c₂| + |s₁−s₂|` is below this. Composed hinge rotations accumulate
/// roughly 1e−13 of error at unit scale.
pub const ANGLE_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum UnfoldError {
    #[error("edge {edge:?} cannot extend the chain: {reason}")]
    InvalidEdge { edge: EdgeId, reason: String },
    #[error("both isometries are translations; no such pair arises from a genuine antipodal configuration")]
    BothTranslations,
}

/// Direct (orientation-preserving) isometry of the plane:
/// `x ↦ R x + t` with `R = [[c, −s], [s, c]]`, `c² + s² = 1`.
#[derive(Clone, Copy, Debug)]
pub struct PlanarIsometry {
    pub c: f64,
    pub s: f64,
    pub t: Vec2,
}

impl PlanarIsometry {
    pub fn identity() -> Self {
        PlanarIsometry {
            c: 1.0,
            s: 0.0,
            t: Vec2::zeros(),
        }
    }

    pub fn translation(t: Vec2) -> Self {
        PlanarIsometry { c: 1.0, s: 0.0, t }
    }

    /// Rotation by `angle` about `center`.
    pub fn rotation(angle: f64, center: Vec2) -> Self {
        let (s, c) = angle.sin_cos();
        let t = Vec2::new(
            center.x - (c * center.x - s * center.y),
            center.y - (s * center.x + c * center.y),
        );
        PlanarIsometry { c, s, t }
    }

    #[inline]
    pub fn apply(&self, p: Vec2) -> Vec2 {
        Vec2::new(
            self.c * p.x - self.s * p.y + self.t.x,
            self.s * p.x + self.c * p.y + self.t.y,
        )
    }

    /// Composition `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &PlanarIsometry) -> PlanarIsometry {
        let c = self.c * other.c - self.s * other.s;
        let s = self.s * other.c + self.c * other.s;
        let t = Vec2::new(
            self.c * other.t.x - self.s * other.t.y + self.t.x,
            self.s * other.t.x + self.c * other.t.y + self.t.y,
        );
        // Renormalize the rotation part so long compositions keep c²+s²=1.
        let n = (c * c + s * s).sqrt();
        PlanarIsometry {
            c: c / n,
            s: s / n,
            t,
        }
    }

    pub fn inverse(&self) -> PlanarIsometry {
        // x = R⁻¹(y − t)
        let c = self.c;
        let s = -self.s;
        let t = Vec2::new(
            -(c * self.t.x - s * self.t.y),
            -(s * self.t.x + c * self.t.y),
        );
        PlanarIsometry { c, s, t }
    }

    pub fn angle(&self) -> f64 {
        self.s.atan2(self.c)
    }

    /// A translation (or the identity) within [`ANGLE_TOL`].
    pub fn is_translation(&self) -> bool {
        (self.c - 1.0).abs() + self.s.abs() < ANGLE_TOL
    }

    /// Fixed point of the rotation, `None` for translations and the identity.
    pub fn rotation_center(&self) -> Option<Vec2> {
        if self.is_translation() {
            return None;
        }
        // (I − R) z = t, det(I − R) = 2(1 − c).
        let det = 2.0 * (1.0 - self.c);
        let z = Vec2::new(
            ((1.0 - self.c) * self.t.x - self.s * self.t.y) / det,
            (self.s * self.t.x + (1.0 - self.c) * self.t.y) / det,
        );
        Some(z)
    }

    /// Same rotation angle as `other` within [`ANGLE_TOL`].
    pub fn same_angle(&self, other: &PlanarIsometry) -> bool {
        (self.c - other.c).abs() + (self.s - other.s).abs() < ANGLE_TOL
    }
}

/// Edge transition: the direct isometry taking the chart of the face across
/// `edge` from `face` into the chart of `face`, matching the shared edge's
/// endpoint images.
pub fn transition(poly: &Polyhedron, face: FaceId, edge: EdgeId) -> PlanarIsometry {
    let e = poly.edge(edge);
    debug_assert!(e.has_face(face));
    let other = e.other_face(face);
    let (a, b) = (e.verts[0], e.verts[1]);
    let near = edge_chart_endpoints(poly, face, a, b);
    let far = edge_chart_endpoints(poly, other, a, b);
    let dn = near[1] - near[0];
    let df = far[1] - far[0];
    let len2 = df.norm_squared();
    let c = dn.dot(&df) / len2;
    let s = cross2(df, dn) / len2;
    let n = (c * c + s * s).sqrt();
    let (c, s) = (c / n, s / n);
    let t = Vec2::new(
        near[0].x - (c * far[0].x - s * far[0].y),
        near[0].y - (s * far[0].x + c * far[0].y),
    );
    PlanarIsometry { c, s, t }
}

/// Chart coordinates of vertices `a`, `b` in `face`'s chart.
fn edge_chart_endpoints(poly: &Polyhedron, face: FaceId, a: crate::VertexId, b: crate::VertexId) -> [Vec2; 2] {
    let verts = poly.face(face);
    let uv = poly.face_chart(face);
    let ka = verts.iter().position(|&w| w == a).expect("edge endpoint on face");
    let kb = verts.iter().position(|&w| w == b).expect("edge endpoint on face");
    [uv[ka], uv[kb]]
}

/// A face sequence unfolded into the plane of its first face.
///
/// `cumulative` maps the last face's chart into the first face's chart;
/// `corridor` holds the crossed edges' unfolded segments, in crossing order,
/// each with endpoints sorted by vertex id.
#[derive(Clone, Debug)]
pub struct UnfoldChain {
    faces: Vec<FaceId>,
    edges: Vec<EdgeId>,
    cumulative: PlanarIsometry,
    corridor: Vec<[Vec2; 2]>,
}

impl UnfoldChain {
    pub fn new(face: FaceId) -> Self {
        UnfoldChain {
            faces: vec![face],
            edges: Vec::new(),
            cumulative: PlanarIsometry::identity(),
            corridor: Vec::new(),
        }
    }

    pub fn faces(&self) -> &[FaceId] {
        &self.faces
    }
    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }
    pub fn first_face(&self) -> FaceId {
        self.faces[0]
    }
    pub fn last_face(&self) -> FaceId {
        *self.faces.last().unwrap()
    }
    pub fn cumulative(&self) -> &PlanarIsometry {
        &self.cumulative
    }
    pub fn corridor(&self) -> &[[Vec2; 2]] {
        &self.corridor
    }

    /// Cross `edge` out of the last face, appending one face to the chain.
    pub fn extend(&self, poly: &Polyhedron, edge: EdgeId) -> Result<UnfoldChain, UnfoldError> {
        let last = self.last_face();
        let e = poly.edge(edge);
        if !e.has_face(last) {
            return Err(UnfoldError::InvalidEdge {
                edge,
                reason: format!("not an edge of the chain's last face {last}"),
            });
        }
        if self.edges.last() == Some(&edge) {
            return Err(UnfoldError::InvalidEdge {
                edge,
                reason: "immediate backtrack across the entry edge".into(),
            });
        }
        let seg = edge_chart_endpoints(poly, last, e.verts[0], e.verts[1]);
        let seg = [self.cumulative.apply(seg[0]), self.cumulative.apply(seg[1])];
        let next = e.other_face(last);
        let cumulative = self.cumulative.compose(&transition(poly, last, edge));
        let mut faces = self.faces.clone();
        let mut edges = self.edges.clone();
        let mut corridor = self.corridor.clone();
        faces.push(next);
        edges.push(edge);
        corridor.push(seg);
        Ok(UnfoldChain {
            faces,
            edges,
            cumulative,
            corridor,
        })
    }
}

/// Classification of an unfolded isometry pair per the rational-map normal
/// form: `epsilon = 0` when the two rotations share an angle, `1` otherwise.
#[derive(Clone, Debug)]
pub struct ClassifiedPair {
    pub epsilon: u8,
    /// `[center(f1), center(fm1)]`, plus for `epsilon = 1` the agreement
    /// point of the pair (the fixed point of `f1⁻¹ ∘ fm1`, where both
    /// rotations take the same value). All three lie on the denominator
    /// locus of the induced rational map.
    pub centers: Vec<Vec2>,
    /// The possibly re-based pair actually classified (see below).
    pub pair: (PlanarIsometry, PlanarIsometry),
    /// Whether the one-translation re-basing was applied.
    pub rebased: bool,
}

/// Classify a pair of unfolding isometries.
///
/// If exactly one of the inputs is a translation the pair is re-based by
/// interchanging the roles of the reference copies: the translation is moved
/// to the `fm1` slot and `(f1, fm1)` is replaced by `(f1⁻¹, fm1 ∘ f1⁻¹)`,
/// which are rotations of the same angle. Two translations cannot arise from
/// a genuine antipodal configuration and are rejected.
pub fn classify_pair(
    f1: &PlanarIsometry,
    fm1: &PlanarIsometry,
) -> Result<ClassifiedPair, UnfoldError> {
    let t1 = f1.is_translation();
    let t2 = fm1.is_translation();
    if t1 && t2 {
        return Err(UnfoldError::BothTranslations);
    }
    let (g1, mut gm1, rebased) = if t1 || t2 {
        // Put the translation in the fm1 slot, then re-base.
        let (r, t) = if t1 { (*fm1, *f1) } else { (*f1, *fm1) };
        (r.inverse(), t.compose(&r.inverse()), true)
    } else {
        (*f1, *fm1, false)
    };
    if rebased {
        // Guard against numerically marginal inputs.
        if g1.is_translation() || gm1.is_translation() {
            return Err(UnfoldError::BothTranslations);
        }
        // Keep the (c, s) of the two rebased rotations bit-identical; they are
        // equal by construction up to rounding.
        gm1.c = g1.c;
        gm1.s = g1.s;
    }
    let c1 = g1.rotation_center().expect("g1 is a rotation");
    let c2 = gm1.rotation_center().expect("gm1 is a rotation");
    if g1.same_angle(&gm1) {
        Ok(ClassifiedPair {
            epsilon: 0,
            centers: vec![c1, c2],
            pair: (g1, gm1),
            rebased,
        })
    } else {
        let meet = g1
            .inverse()
            .compose(&gm1)
            .rotation_center()
            .expect("distinct angles compose to a rotation");
        Ok(ClassifiedPair {
            epsilon: 1,
            centers: vec![c1, c2, meet],
            pair: (g1, gm1),
            rebased,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::mesh::{EdgeId, FaceId};
    use std::f64::consts::PI;

    fn close(a: Vec2, b: Vec2, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn inverse_rotations_cancel() {
        let r = PlanarIsometry::rotation(0.7, Vec2::new(0.3, -0.2));
        let id = r.compose(&PlanarIsometry::rotation(-0.7, Vec2::new(0.3, -0.2)));
        assert!((id.c - 1.0).abs() < 1e-12 && id.s.abs() < 1e-12);
        assert!(id.t.norm() < 1e-12);
    }

    #[test]
    fn half_turn_composition_is_translation() {
        let a = PlanarIsometry::rotation(PI, Vec2::new(1.0, 0.0));
        let b = PlanarIsometry::rotation(PI, Vec2::new(0.0, 0.0));
        let ab = a.compose(&b);
        assert!(ab.is_translation());
        assert!(close(ab.t, Vec2::new(2.0, 0.0), 1e-12));
    }

    #[test]
    fn translations_add() {
        let a = PlanarIsometry::translation(Vec2::new(0.5, -1.0));
        let b = PlanarIsometry::translation(Vec2::new(2.0, 0.25));
        let ab = a.compose(&b);
        assert!(close(ab.t, Vec2::new(2.5, -0.75), 1e-15));
    }

    #[test]
    fn rotation_center_examples() {
        let r = PlanarIsometry::rotation(PI / 2.0, Vec2::new(1.0, 0.0));
        assert!(close(r.rotation_center().unwrap(), Vec2::new(1.0, 0.0), 1e-12));
        assert!(PlanarIsometry::translation(Vec2::new(0.0, 3.0))
            .rotation_center()
            .is_none());
        assert!(PlanarIsometry::identity().rotation_center().is_none());
    }

    #[test]
    fn classify_equal_angles() {
        let f1 = PlanarIsometry::rotation(PI / 3.0, Vec2::new(1.0, 0.0));
        let fm1 = PlanarIsometry::rotation(PI / 3.0, Vec2::new(-1.0, 0.0));
        let cp = classify_pair(&f1, &fm1).unwrap();
        assert_eq!(cp.epsilon, 0);
        assert!(close(cp.centers[0], Vec2::new(1.0, 0.0), 1e-12));
        assert!(close(cp.centers[1], Vec2::new(-1.0, 0.0), 1e-12));
    }

    #[test]
    fn classify_distinct_angles() {
        let f1 = PlanarIsometry::rotation(PI / 3.0, Vec2::new(0.5, 0.5));
        let fm1 = PlanarIsometry::rotation(PI / 4.0, Vec2::new(-1.0, 0.25));
        let cp = classify_pair(&f1, &fm1).unwrap();
        assert_eq!(cp.epsilon, 1);
        assert_eq!(cp.centers.len(), 3);
        // The third center is where the two maps agree.
        let m = cp.centers[2];
        assert!(close(f1.apply(m), fm1.apply(m), 1e-9));
    }

    #[test]
    fn classify_two_translations_fails() {
        let a = PlanarIsometry::translation(Vec2::new(1.0, 2.0));
        let b = PlanarIsometry::translation(Vec2::new(1.0, 2.0));
        assert!(matches!(classify_pair(&a, &b), Err(UnfoldError::BothTranslations)));
    }

    #[test]
    fn classify_one_translation_rebases_to_equal_rotations() {
        let f1 = PlanarIsometry::rotation(0.8, Vec2::new(2.0, -1.0));
        let fm1 = PlanarIsometry::translation(Vec2::new(0.3, 0.4));
        let cp = classify_pair(&f1, &fm1).unwrap();
        assert_eq!(cp.epsilon, 0);
        assert!(cp.rebased);
        let (g1, gm1) = cp.pair;
        assert!(!g1.is_translation() && !gm1.is_translation());
        assert!(g1.same_angle(&gm1));
        // Same outcome when the translation is passed in the f1 slot.
        let cp2 = classify_pair(&fm1, &f1).unwrap();
        assert_eq!(cp2.epsilon, 0);
    }

    #[test]
    fn extend_matches_3d_hinge_rotation() {
        // Unfold the cube's front face (y=0) into the top face's chart and
        // compare with rotating the front face rigidly about the shared edge
        // by the dihedral complement (π/2 for a cube).
        let p = fixtures::cube();
        let top = FaceId(5);
        let front = FaceId(1);
        let edge = (0..p.edge_count())
            .map(EdgeId)
            .find(|&e| p.edge(e).has_face(top) && p.edge(e).has_face(front))
            .unwrap();
        let chain = UnfoldChain::new(top).extend(&p, edge).unwrap();
        assert_eq!(chain.faces(), &[top, front]);

        // Shared edge: vertices 4 (0,0,1) and 5 (1,0,1); axis along +x at y=0,z=1.
        // Rotating the front face by +π/2 about that axis lays it flat in z=1.
        let axis_point = crate::Vec3::new(0.0, 0.0, 1.0);
        let rot = |q: crate::Vec3| {
            let d = q - axis_point;
            // Rotation about +x by angle π/2 chosen to flatten the front face
            // away from the cube: (y,z) -> (-z, y) maps (0,-1) offsets upward.
            axis_point + crate::Vec3::new(d.x, d.z, -d.y)
        };
        for &w in p.face(front) {
            let v3 = p.vertex(w);
            let unfolded3 = rot(v3);
            // The unfolded image must land in the top plane z=1.
            assert!((unfolded3.z - 1.0).abs() < 1e-12);
            let expect = p.frame(top).project(unfolded3);
            let k = p.face(front).iter().position(|&x| x == w).unwrap();
            let got = chain.cumulative().apply(p.face_chart(front)[k]);
            assert!(close(got, expect, 1e-12), "vertex {w}: {got:?} vs {expect:?}");
        }
    }

    #[test]
    fn extend_rejects_non_adjacent_and_backtrack() {
        let p = fixtures::cube();
        let top = FaceId(5);
        let bottom_edge = p.face_edge_ids(FaceId(0))[0];
        assert!(!p.edge(bottom_edge).has_face(top));
        let chain = UnfoldChain::new(top);
        assert!(matches!(
            chain.extend(&p, bottom_edge),
            Err(UnfoldError::InvalidEdge { .. })
        ));
        let e = p.face_edge_ids(top)[0];
        let c2 = chain.extend(&p, e).unwrap();
        assert!(matches!(c2.extend(&p, e), Err(UnfoldError::InvalidEdge { .. })));
    }

    #[test]
    fn flat_hinge_is_identity() {
        let p = fixtures::cube_with_split_top();
        // Faces 5 and 6 are the two coplanar halves of the top.
        let (a, b) = (FaceId(5), FaceId(6));
        let edge = (0..p.edge_count())
            .map(EdgeId)
            .find(|&e| p.edge(e).has_face(a) && p.edge(e).has_face(b))
            .unwrap();
        let chain = UnfoldChain::new(a).extend(&p, edge).unwrap();
        let cum = chain.cumulative();
        assert!((cum.c - 1.0).abs() < 1e-12);
        assert!(cum.s.abs() < 1e-12);
        assert!(cum.t.norm() < 1e-12);
    }

    #[test]
    fn unfolding_preserves_lengths_and_associativity() {
        let p = fixtures::regular_tetrahedron(1.0);
        // Walk a 4-face chain around the tetrahedron.
        let mut chain = UnfoldChain::new(FaceId(0));
        let mut transitions = Vec::new();
        for _ in 0..3 {
            let last = chain.last_face();
            let edge = *p
                .face_edge_ids(last)
                .iter()
                .find(|&&e| Some(&e) != chain.edges().last() && !chain.faces().contains(&p.edge(e).other_face(last)))
                .unwrap();
            transitions.push(transition(&p, last, edge));
            chain = chain.extend(&p, edge).unwrap();
        }
        // Length preservation for arbitrary in-face segments.
        let uv = p.face_chart(chain.last_face());
        let (a, b) = (uv[0] * 0.2 + uv[1] * 0.5 + uv[2] * 0.3, uv[0] * 0.6 + uv[1] * 0.1 + uv[2] * 0.3);
        let (ia, ib) = (chain.cumulative().apply(a), chain.cumulative().apply(b));
        assert!(((ia - ib).norm() - (a - b).norm()).abs() < 1e-12);
        // Associativity of the hinge composition.
        let left = transitions[0].compose(&transitions[1]).compose(&transitions[2]);
        let right = transitions[0].compose(&transitions[1].compose(&transitions[2]));
        assert!((left.c - right.c).abs() < 1e-12);
        assert!((left.s - right.s).abs() < 1e-12);
        assert!((left.t - right.t).norm() < 1e-12);
        // The chain's cumulative equals the composition of its transitions.
        let cum = chain.cumulative();
        assert!((cum.c - left.c).abs() < 1e-12 && (cum.s - left.s).abs() < 1e-12);
        assert!((cum.t - left.t).norm() < 1e-12);
    }
}
