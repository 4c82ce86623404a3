//! The antipodal (farthest-point) map and the radius function.
//!
//! Farthest points of a convex polyhedral surface are either vertices or
//! points reached by at least three shortest segments; the latter sit at the
//! circumcenter of three unfolded images of the source. The evaluator
//! therefore enumerates every unfolding chain from the source within a
//! certified radius upper bound, seeds the maximization with a per-face grid,
//! and refines the leading cells by circumcenters of image triples, scoring
//! every candidate by its verified intrinsic distance.

use crate::geodesic::{vertex_upper_bounds, Geodesic, GeodesicError, SourceUnfolding};
use crate::mesh::{FaceId, Polyhedron, SurfacePoint, VertexId, GEOM_TOL};
use crate::{cross2, Vec2, Vec3};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AntipodeError {
    #[error("circumcenter of (nearly) collinear points")]
    Collinear,
    #[error(transparent)]
    Geodesic(#[from] GeodesicError),
}

/// Tuning knobs for the antipode evaluator; the defaults match the CLI's.
#[derive(Clone, Debug)]
pub struct AntipodeParams {
    /// Per-face seeding grid resolution.
    pub grid_res: usize,
    /// Relative band within which segment lengths count as tied.
    pub tie_rel: f64,
    /// Relative band below the radius within which candidates are co-antipodes.
    pub band_rel: f64,
    /// Chain budget for the source unfolding.
    pub budget: usize,
}

impl Default for AntipodeParams {
    fn default() -> Self {
        AntipodeParams {
            grid_res: 32,
            tie_rel: 1e-7,
            band_rel: 1e-7,
            budget: crate::geodesic::DEFAULT_BUDGET,
        }
    }
}

/// Circumcenter of three points: the point equidistant from all three.
pub fn circumcenter(a: Vec2, b: Vec2, c: Vec2) -> Result<Vec2, AntipodeError> {
    let scale = (b - a).norm().max((c - a).norm()).max((c - b).norm());
    let d = 2.0 * cross2(b - a, c - a);
    if d.abs() <= 1e-12 * scale * scale {
        return Err(AntipodeError::Collinear);
    }
    let a2 = a.norm_squared();
    let b2 = b.norm_squared();
    let c2 = c.norm_squared();
    Ok(Vec2::new(
        (a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d,
        (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d,
    ))
}

/// How an antipode is realized.
#[derive(Clone, Debug)]
pub enum AntipodeKind {
    /// The farthest point is a mesh vertex.
    Vertex(VertexId),
    /// Circumcenter of three unfolded source images; carries the edge-id
    /// signatures of the three shortest realizing chains.
    Circumcenter([Vec<crate::EdgeId>; 3]),
}

/// One farthest point with its realizing segments.
#[derive(Clone, Debug)]
pub struct Antipode {
    pub point: SurfacePoint,
    pub distance: f64,
    pub kind: AntipodeKind,
    /// All realizing segments within the tie band, sorted by length then
    /// chain order. Non-vertex antipodes carry at least three.
    pub segments: Vec<Geodesic>,
}

/// Result of evaluating the antipodal map at one source point.
#[derive(Clone, Debug)]
pub struct AntipodeResult {
    pub source: SurfacePoint,
    /// The radius at the source: max over the surface of the distance.
    pub radius: f64,
    pub antipodes: Vec<Antipode>,
}

impl AntipodeResult {
    /// Intrinsic spread of the antipode set, measured extrinsically (a lower
    /// bound for the intrinsic spread; zero iff the set is a single point).
    pub fn spread(&self, poly: &Polyhedron) -> f64 {
        let pos: Vec<Vec3> = self.antipodes.iter().map(|a| poly.position(&a.point)).collect();
        let mut d: f64 = 0.0;
        for i in 0..pos.len() {
            for j in (i + 1)..pos.len() {
                d = d.max((pos[i] - pos[j]).norm());
            }
        }
        d
    }
}

/// One valid route to a candidate point.
#[derive(Clone, Debug)]
pub(crate) struct RouteRef {
    pub len: f64,
    pub rec: u32,
    /// Chart coordinates of the candidate in the route's last face.
    pub x: Vec2,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum CandidateLabel {
    Vertex(VertexId),
    /// Sorted edge-id signatures of the routes tied at the candidate.
    Routes(Vec<Vec<crate::EdgeId>>),
}

/// A scored farthest-point candidate.
#[derive(Clone, Debug)]
pub(crate) struct ScoredCandidate {
    pub pos3: Vec3,
    pub face: FaceId,
    pub uv: Vec2,
    pub dist: f64,
    pub label: CandidateLabel,
    pub routes: Vec<RouteRef>,
}

/// Certified upper bound for the radius at `p`: for any `x` in a face `F`,
/// `d(p,x) ≤ min over vertices v of F of (graph bound to v) + diam(F)`.
pub(crate) fn radius_upper_bound(poly: &Polyhedron, p: &SurfacePoint) -> f64 {
    let dub = vertex_upper_bounds(poly, p);
    let mut r: f64 = 0.0;
    for fi in 0..poly.face_count() {
        let f = FaceId(fi);
        let best_vertex = poly
            .face(f)
            .iter()
            .map(|w| dub[w.0])
            .fold(f64::INFINITY, f64::min);
        r = r.max(best_vertex + poly.face_diameter(f));
    }
    r
}

/// Enumerate and score all farthest-point candidates from `p`.
pub(crate) fn scan<'a>(
    poly: &'a Polyhedron,
    p: &SurfacePoint,
    params: &AntipodeParams,
) -> Result<(SourceUnfolding<'a>, Vec<ScoredCandidate>), AntipodeError> {
    let r_ub = radius_upper_bound(poly, p);
    let uf = SourceUnfolding::build(poly, p, r_ub, params.budget)?;
    let tol = GEOM_TOL * poly.diameter();

    let mut candidates: Vec<ScoredCandidate> = Vec::new();

    // Vertices are always candidates.
    for w in 0..poly.vertex_count() {
        let v = VertexId(w);
        if let Some(c) = score_vertex(poly, &uf, v, params) {
            candidates.push(c);
        }
    }

    // Per-face grid seeding + circumcenter refinement.
    let mut grid: Vec<(FaceId, f64, Vec<(f64, Vec2)>)> = Vec::new(); // (face, cell size, scored points)
    let mut g_max: f64 = 0.0;
    for fi in 0..poly.face_count() {
        let f = FaceId(fi);
        let uv = poly.face_chart(f);
        let (mut lo, mut hi) = (uv[0], uv[0]);
        for q in uv {
            lo = Vec2::new(lo.x.min(q.x), lo.y.min(q.y));
            hi = Vec2::new(hi.x.max(q.x), hi.y.max(q.y));
        }
        let res = params.grid_res;
        let step = (hi - lo) / res as f64;
        let cell = step.norm();
        let mut scored = Vec::new();
        for iy in 0..res {
            for ix in 0..res {
                let q = lo + Vec2::new((ix as f64 + 0.5) * step.x, (iy as f64 + 0.5) * step.y);
                if !poly.chart_contains(f, q, -tol) {
                    continue;
                }
                if let Some((d, _)) = uf.eval(f, q) {
                    g_max = g_max.max(d);
                    scored.push((d, q));
                }
            }
        }
        grid.push((f, cell, scored));
    }

    for (f, cell, scored) in &grid {
        // Leading cells of this face.
        let mut tops: Vec<&(f64, Vec2)> = scored
            .iter()
            .filter(|(d, _)| *d >= g_max - 2.0 * cell)
            .collect();
        tops.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.y.total_cmp(&b.1.y)).then(a.1.x.total_cmp(&b.1.x)));
        tops.truncate(8);
        for &&(d_seed, q) in &tops {
            // Raw grid point as a fallback candidate.
            if let Some(c) = score_interior(poly, &uf, *f, q, params) {
                candidates.push(c);
            }
            // Circumcenters of triples among the closest routes.
            let band = (2.0 * cell / d_seed.max(1e-300)).max(params.tie_rel);
            let mut routes = uf.eval_all(*f, q, band);
            routes.truncate(6);
            for i in 0..routes.len() {
                for j in (i + 1)..routes.len() {
                    for k in (j + 1)..routes.len() {
                        let (wi, wj, wk) = (
                            uf.rec(routes[i].1).src_img,
                            uf.rec(routes[j].1).src_img,
                            uf.rec(routes[k].1).src_img,
                        );
                        let Ok(cc) = circumcenter(wi, wj, wk) else {
                            continue;
                        };
                        if !poly.chart_contains(*f, cc, tol) {
                            continue;
                        }
                        if let Some(c) = score_interior(poly, &uf, *f, cc, params) {
                            candidates.push(c);
                        }
                    }
                }
            }
        }
    }

    // Deduplicate by 3D position; vertices first so they win merges.
    candidates.sort_by(|a, b| {
        let ka = matches!(a.label, CandidateLabel::Routes(_)) as u8;
        let kb = matches!(b.label, CandidateLabel::Routes(_)) as u8;
        ka.cmp(&kb)
            .then(a.face.cmp(&b.face))
            .then(a.uv.y.total_cmp(&b.uv.y))
            .then(a.uv.x.total_cmp(&b.uv.x))
    });
    let mut kept: Vec<ScoredCandidate> = Vec::new();
    for c in candidates {
        if kept.iter().all(|k| (k.pos3 - c.pos3).norm() > tol) {
            kept.push(c);
        }
    }
    Ok((uf, kept))
}

fn score_vertex(
    poly: &Polyhedron,
    uf: &SourceUnfolding,
    v: VertexId,
    params: &AntipodeParams,
) -> Option<ScoredCandidate> {
    let mut routes: Vec<RouteRef> = Vec::new();
    for &f in poly.faces_at_vertex(v) {
        let x = poly.frame(f).project(poly.vertex(v));
        for (len, rec) in uf.eval_all(f, x, params.tie_rel) {
            routes.push(RouteRef { len, rec, x });
        }
    }
    routes.sort_by(|a, b| a.len.total_cmp(&b.len).then(a.rec.cmp(&b.rec)));
    routes.dedup_by_key(|r| r.rec);
    let best = routes.first()?.len;
    routes.retain(|r| r.len <= best * (1.0 + params.tie_rel));
    let face = *poly.faces_at_vertex(v).first().unwrap();
    Some(ScoredCandidate {
        pos3: poly.vertex(v),
        face,
        uv: poly.frame(face).project(poly.vertex(v)),
        dist: best,
        label: CandidateLabel::Vertex(v),
        routes,
    })
}

fn score_interior(
    poly: &Polyhedron,
    uf: &SourceUnfolding,
    face: FaceId,
    uv: Vec2,
    params: &AntipodeParams,
) -> Option<ScoredCandidate> {
    let routes = uf.eval_all(face, uv, params.tie_rel);
    let (best, _) = *routes.first()?;
    let routes: Vec<RouteRef> = routes
        .into_iter()
        .map(|(len, rec)| RouteRef { len, rec, x: uv })
        .collect();
    let mut sigs: Vec<Vec<crate::EdgeId>> = routes
        .iter()
        .map(|r| uf.rec(r.rec).edges.clone())
        .collect();
    sigs.sort();
    Some(ScoredCandidate {
        pos3: poly.frame(face).lift(uv),
        face,
        uv,
        dist: best,
        label: CandidateLabel::Routes(sigs),
        routes,
    })
}

/// Evaluate the antipodal map at `p` with default parameters.
pub fn antipodes(poly: &Polyhedron, p: &SurfacePoint) -> Result<AntipodeResult, AntipodeError> {
    antipodes_with(poly, p, &AntipodeParams::default())
}

/// Evaluate the antipodal map at `p`.
pub fn antipodes_with(
    poly: &Polyhedron,
    p: &SurfacePoint,
    params: &AntipodeParams,
) -> Result<AntipodeResult, AntipodeError> {
    let source = poly.canonicalize(p);
    let (uf, candidates) = scan(poly, &source, params)?;
    let radius = candidates
        .iter()
        .map(|c| c.dist)
        .fold(0.0_f64, f64::max);
    let mut antipodes = Vec::new();
    for c in candidates {
        if c.dist < radius * (1.0 - params.band_rel) {
            continue;
        }
        let point = match c.label {
            CandidateLabel::Vertex(v) => SurfacePoint::at_vertex(poly, v),
            CandidateLabel::Routes(_) => {
                let Some(sp) = poly.surface_point_from_chart(c.face, c.uv) else {
                    continue;
                };
                poly.canonicalize(&sp)
            }
        };
        let mut segments = Vec::new();
        for r in &c.routes {
            if r.len > c.dist * (1.0 + params.tie_rel) {
                continue;
            }
            if let Some(g) = uf.realize(r.rec, &point, r.x) {
                segments.push(g);
            }
        }
        segments.sort_by(|a, b| {
            a.length
                .total_cmp(&b.length)
                .then_with(|| a.chain.edges().cmp(b.chain.edges()))
        });
        let kind = match c.label {
            CandidateLabel::Vertex(v) => AntipodeKind::Vertex(v),
            CandidateLabel::Routes(_) => {
                if segments.len() < 3 {
                    // Refinement landed on a point without a full triple;
                    // keep it with the routes it has.
                    let mut sigs: Vec<Vec<crate::EdgeId>> =
                        segments.iter().map(|g| g.signature()).collect();
                    while sigs.len() < 3 {
                        sigs.push(Vec::new());
                    }
                    AntipodeKind::Circumcenter([sigs[0].clone(), sigs[1].clone(), sigs[2].clone()])
                } else {
                    let mut sigs: Vec<Vec<crate::EdgeId>> =
                        segments[..3].iter().map(|g| g.signature()).collect();
                    sigs.sort();
                    AntipodeKind::Circumcenter([sigs[0].clone(), sigs[1].clone(), sigs[2].clone()])
                }
            }
        };
        antipodes.push(Antipode {
            point,
            distance: c.dist,
            kind,
            segments,
        });
    }
    antipodes.sort_by(|a, b| {
        a.point
            .face
            .cmp(&b.point.face)
            .then_with(|| a.point.bary.partial_cmp(&b.point.bary).unwrap())
    });
    Ok(AntipodeResult {
        source,
        radius,
        antipodes,
    })
}

/// The radius at `p`: the distance from `p` to its antipodes.
pub fn radius(poly: &Polyhedron, p: &SurfacePoint) -> Result<f64, AntipodeError> {
    Ok(antipodes(poly, p)?.radius)
}
