//! Exact shortest segments between surface points.
//!
//! A geodesic segment is found by unfolding a chain of faces into the first
//! face's chart and drawing a straight line that crosses the unfolded copies
//! of the shared edges (the *corridor*) in order, each strictly inside the
//! edge and clear of its endpoints — segments never pass through vertices.
//!
//! [`shortest_paths`] runs a best-first search over chains, pruned by an
//! angular visibility cone around the source image and by a monotone lower
//! bound against an upper bound from a graph over vertices and edge
//! midpoints. It returns *all* minimizers within a relative tie tolerance,
//! which downstream code needs: farthest points are reached by three or more
//! tied segments. [`oracle_enumerate`] is the independent test oracle: a
//! depth-bounded exhaustive enumeration with no pruning beyond corridor
//! validity.

use crate::mesh::{EdgeId, FaceId, MeshError, Polyhedron, SurfacePoint, VertexId, GEOM_TOL};
use crate::unfold::{transition, PlanarIsometry, UnfoldChain};
use crate::{cross2, Vec2};
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use thiserror::Error;

/// Default relative tolerance within which equal-length segments tie.
pub const DEFAULT_TIE_TOL: f64 = 1e-7;

/// Hard cap on explored chains before the search gives up.
pub const DEFAULT_BUDGET: usize = 1_000_000;

#[derive(Debug, Error)]
pub enum GeodesicError {
    #[error("the two surface points coincide")]
    CoincidentEndpoints,
    #[error("search budget exceeded after exploring {explored} chains")]
    SearchBudgetExceeded { explored: usize },
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// A realized shortest segment.
#[derive(Clone, Debug)]
pub struct Geodesic {
    /// The unfolded face sequence the segment runs through.
    pub chain: UnfoldChain,
    /// Intrinsic length (equals the planar endpoint distance).
    pub length: f64,
    /// Endpoints of the straight unfolded segment, in the first face's chart.
    pub planar: [Vec2; 2],
    /// Polyline on the surface: source, one point per edge crossing, target.
    pub points: Vec<SurfacePoint>,
}

impl Geodesic {
    /// Signature of the chain: the sequence of crossed edge ids.
    pub fn signature(&self) -> Vec<EdgeId> {
        self.chain.edges().to_vec()
    }
}

// ---------------------------------------------------------------------------
// Visibility cones
// ---------------------------------------------------------------------------

/// Angular interval of directions (width < π) from the source image within
/// which a straight segment crosses every corridor edge so far, in order.
#[derive(Clone, Copy, Debug)]
pub(crate) enum Cone {
    Full,
    Wedge { r: Vec2, l: Vec2 },
}

impl Cone {
    /// Intersect with the directions subtending `seg` from `apex`.
    pub(crate) fn clip(&self, apex: Vec2, seg: [Vec2; 2]) -> Option<Cone> {
        let da = seg[0] - apex;
        let db = seg[1] - apex;
        let cr = cross2(da, db);
        if cr.abs() <= 1e-16 * da.norm() * db.norm() {
            return None; // apex collinear with the segment: nothing strictly crossable
        }
        let (rn, ln) = if cr > 0.0 { (da, db) } else { (db, da) };
        match *self {
            Cone::Full => Some(Cone::Wedge { r: rn, l: ln }),
            Cone::Wedge { r, l } => {
                let r2 = if cross2(r, rn) >= 0.0 { rn } else { r };
                let l2 = if cross2(ln, l) >= 0.0 { ln } else { l };
                if cross2(r2, l2) <= 0.0 {
                    return None;
                }
                // Guard against disjoint wedges on opposite sides, where the
                // binding-constraint pick alone can fabricate a bogus cone.
                let inside = |d: Vec2| {
                    cross2(r, d) >= -1e-12 * r.norm() * d.norm()
                        && cross2(d, l) >= -1e-12 * d.norm() * l.norm()
                        && cross2(rn, d) >= -1e-12 * rn.norm() * d.norm()
                        && cross2(d, ln) >= -1e-12 * d.norm() * ln.norm()
                };
                if !inside(r2) || !inside(l2) {
                    return None;
                }
                Some(Cone::Wedge { r: r2, l: l2 })
            }
        }
    }

    /// Whether direction `d` lies in the (closed) cone.
    pub(crate) fn contains(&self, d: Vec2) -> bool {
        match *self {
            Cone::Full => true,
            Cone::Wedge { r, l } => {
                cross2(r, d) >= -1e-12 * r.norm() * d.norm()
                    && cross2(d, l) >= -1e-12 * d.norm() * l.norm()
            }
        }
    }
}

fn dist_point_segment(p: Vec2, seg: [Vec2; 2]) -> f64 {
    let d = seg[1] - seg[0];
    let len2 = d.norm_squared();
    if len2 == 0.0 {
        return (p - seg[0]).norm();
    }
    let t = ((p - seg[0]).dot(&d) / len2).clamp(0.0, 1.0);
    (p - (seg[0] + d * t)).norm()
}

// ---------------------------------------------------------------------------
// Segment realization (the shared exact validator)
// ---------------------------------------------------------------------------

/// Try to realize the straight segment from the source image `p2` (first-face
/// chart) to `q_chart` (last-face chart) through the chain's corridor.
///
/// Checks, with clearance `1e−9 · diameter`:
/// - the segment crosses every corridor edge strictly in order, each in the
///   open interior of the edge and clear of its endpoints;
/// - the segment's interior stays clear of every unfolded vertex image.
pub fn realize_segment(
    poly: &Polyhedron,
    chain: &UnfoldChain,
    p_sp: &SurfacePoint,
    q_sp: &SurfacePoint,
    p2: Vec2,
    q_chart: Vec2,
) -> Option<Geodesic> {
    let clearance = GEOM_TOL * poly.diameter();
    let q0 = chain.cumulative().apply(q_chart);
    let dir = q0 - p2;
    let length = dir.norm();
    if length <= clearance {
        return None;
    }

    let corridor = chain.corridor();
    let mut t_prev = 0.0;
    let mut crossings = Vec::with_capacity(corridor.len());
    for seg in corridor {
        let e = seg[1] - seg[0];
        let denom = cross2(dir, e);
        if denom.abs() <= 1e-18 * dir.norm() * e.norm() {
            return None;
        }
        let w = seg[0] - p2;
        let t = cross2(w, e) / denom;
        let u = cross2(w, dir) / denom;
        if !(t > t_prev && t < 1.0) {
            return None;
        }
        let elen = e.norm();
        if u * elen < clearance || (1.0 - u) * elen < clearance {
            return None;
        }
        t_prev = t;
        crossings.push(u);
    }

    // Vertex-image clearance along the whole chain.
    let mut cum = PlanarIsometry::identity();
    for (i, &face) in chain.faces().iter().enumerate() {
        for &w in poly.face_chart(face) {
            let img = cum.apply(w);
            if (img - p2).norm() <= clearance || (img - q0).norm() <= clearance {
                continue; // endpoints may sit at vertices
            }
            if dist_point_segment(img, [p2, q0]) < clearance {
                return None;
            }
        }
        if i < chain.edges().len() {
            cum = cum.compose(&transition(poly, face, chain.edges()[i]));
        }
    }

    // Surface polyline: source, crossings, target.
    let mut points = Vec::with_capacity(corridor.len() + 2);
    points.push(poly.canonicalize(p_sp));
    for (k, &u) in crossings.iter().enumerate() {
        let e = poly.edge(chain.edges()[k]);
        let face = e.faces[0];
        let verts = poly.face(face);
        let mut bary = vec![0.0; verts.len()];
        let ia = verts.iter().position(|&w| w == e.verts[0]).unwrap();
        let ib = verts.iter().position(|&w| w == e.verts[1]).unwrap();
        bary[ia] = 1.0 - u;
        bary[ib] = u;
        points.push(SurfacePoint { face, bary });
    }
    points.push(poly.canonicalize(q_sp));

    Some(Geodesic {
        chain: chain.clone(),
        length,
        planar: [p2, q0],
        points,
    })
}

// ---------------------------------------------------------------------------
// Upper bound from the vertex/edge-midpoint graph
// ---------------------------------------------------------------------------

struct SurfaceGraph {
    adj: Vec<Vec<(usize, f64)>>,
    n: usize,
}

impl SurfaceGraph {
    /// Graph over {vertices} ∪ {edge midpoints} ∪ extra surface points, with
    /// straight in-face connections. Every path is a curve on the surface, so
    /// graph distances are upper bounds for intrinsic distances.
    fn build(poly: &Polyhedron, extras: &[&SurfacePoint]) -> SurfaceGraph {
        let nv = poly.vertex_count();
        let ne = poly.edge_count();
        let n = nv + ne + extras.len();
        let mut pos = Vec::with_capacity(n);
        for w in 0..nv {
            pos.push(poly.vertex(VertexId(w)));
        }
        for e in 0..ne {
            let ed = poly.edge(EdgeId(e));
            pos.push((poly.vertex(ed.verts[0]) + poly.vertex(ed.verts[1])) * 0.5);
        }
        for sp in extras {
            pos.push(poly.position(sp));
        }
        let extra_faces: Vec<Vec<FaceId>> = extras.iter().map(|sp| poly.incident_faces(sp)).collect();
        let mut adj = vec![Vec::new(); n];
        for fi in 0..poly.face_count() {
            let f = FaceId(fi);
            let mut nodes: Vec<usize> = poly.face(f).iter().map(|w| w.0).collect();
            nodes.extend(poly.face_edge_ids(f).iter().map(|e| nv + e.0));
            for (xi, fs) in extra_faces.iter().enumerate() {
                if fs.contains(&f) {
                    nodes.push(nv + ne + xi);
                }
            }
            for i in 0..nodes.len() {
                for j in (i + 1)..nodes.len() {
                    let (a, b) = (nodes[i], nodes[j]);
                    let w = (pos[a] - pos[b]).norm();
                    adj[a].push((b, w));
                    adj[b].push((a, w));
                }
            }
        }
        SurfaceGraph { adj, n }
    }

    fn dijkstra(&self, start: usize) -> Vec<f64> {
        #[derive(PartialEq)]
        struct Item(f64, usize);
        impl Eq for Item {}
        impl Ord for Item {
            fn cmp(&self, other: &Self) -> Ordering {
                other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
            }
        }
        impl PartialOrd for Item {
            fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
                Some(self.cmp(other))
            }
        }
        let mut dist = vec![f64::INFINITY; self.n];
        dist[start] = 0.0;
        let mut heap = BinaryHeap::new();
        heap.push(Item(0.0, start));
        while let Some(Item(d, u)) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &(v, w) in &self.adj[u] {
                let nd = d + w;
                if nd < dist[v] {
                    dist[v] = nd;
                    heap.push(Item(nd, v));
                }
            }
        }
        dist
    }
}

/// Length of a shortest path in the graph over vertices, edge midpoints and
/// the two query points, with straight in-face connections. Always an upper
/// bound for the intrinsic distance.
pub fn edge_graph_upper_bound(
    poly: &Polyhedron,
    p: &SurfacePoint,
    q: &SurfacePoint,
) -> Result<f64, GeodesicError> {
    if (poly.position(p) - poly.position(q)).norm() <= 1e-12 * poly.diameter() {
        return Err(GeodesicError::CoincidentEndpoints);
    }
    let g = SurfaceGraph::build(poly, &[p, q]);
    let dist = g.dijkstra(g.n - 2);
    Ok(dist[g.n - 1])
}

/// Upper bounds on the intrinsic distance from `p` to every vertex.
pub(crate) fn vertex_upper_bounds(poly: &Polyhedron, p: &SurfacePoint) -> Vec<f64> {
    let g = SurfaceGraph::build(poly, &[p]);
    let dist = g.dijkstra(g.n - 1);
    dist[..poly.vertex_count()].to_vec()
}

// ---------------------------------------------------------------------------
// Best-first chain search
// ---------------------------------------------------------------------------

#[derive(Clone)]
struct Node {
    parent: Option<u32>,
    root: u32,
    face: FaceId,
    entry: Option<EdgeId>,
    cum: PlanarIsometry, // chart(face) -> chart(root face)
    cone: Cone,
    lb: f64,
}

struct HeapEntry {
    lb: f64,
    seq: u64,
    node: u32,
}
impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.lb == other.lb && self.seq == other.seq
    }
}
impl Eq for HeapEntry {}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap: smallest lb first, ties by insertion order.
        other.lb.total_cmp(&self.lb).then(other.seq.cmp(&self.seq))
    }
}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn node_chain_visits(nodes: &[Node], mut idx: u32, face: FaceId) -> bool {
    loop {
        let n = &nodes[idx as usize];
        if n.face == face {
            return true;
        }
        match n.parent {
            Some(p) => idx = p,
            None => return false,
        }
    }
}

fn rebuild_chain(poly: &Polyhedron, nodes: &[Node], idx: u32, roots: &[(FaceId, Vec2)]) -> UnfoldChain {
    let mut edges = Vec::new();
    let mut at = idx;
    loop {
        let n = &nodes[at as usize];
        match (n.entry, n.parent) {
            (Some(e), Some(p)) => {
                edges.push(e);
                at = p;
            }
            _ => break,
        }
    }
    edges.reverse();
    let root_face = roots[nodes[idx as usize].root as usize].0;
    let mut chain = UnfoldChain::new(root_face);
    for e in edges {
        chain = chain.extend(poly, e).expect("replayed edge is valid");
    }
    chain
}

/// Source roots: one per face the point lies on, with its chart coordinates.
fn source_roots(poly: &Polyhedron, p: &SurfacePoint) -> Vec<(FaceId, Vec2)> {
    let pos = poly.position(p);
    poly.incident_faces(p)
        .into_iter()
        .map(|f| (f, poly.frame(f).project(pos)))
        .collect()
}

/// All shortest segments between `p` and `q`: every geodesic whose length is
/// within `(1+tol)` of the minimum, sorted by length then chain order.
pub fn shortest_paths(
    poly: &Polyhedron,
    p: &SurfacePoint,
    q: &SurfacePoint,
    tol: f64,
) -> Result<Vec<Geodesic>, GeodesicError> {
    let p = poly.canonicalize(p);
    let q = poly.canonicalize(q);
    let ub = edge_graph_upper_bound(poly, &p, &q)?;
    let eps_abs = 1e-12 * poly.diameter();

    let roots = source_roots(poly, &p);
    let q_pos = poly.position(&q);
    let q_faces: Vec<(FaceId, Vec2)> = poly
        .incident_faces(&q)
        .into_iter()
        .map(|f| (f, poly.frame(f).project(q_pos)))
        .collect();

    let mut nodes: Vec<Node> = Vec::new();
    let mut heap: BinaryHeap<HeapEntry> = BinaryHeap::new();
    let mut seq = 0u64;
    for (ri, &(face, _)) in roots.iter().enumerate() {
        nodes.push(Node {
            parent: None,
            root: ri as u32,
            face,
            entry: None,
            cum: PlanarIsometry::identity(),
            cone: Cone::Full,
            lb: 0.0,
        });
        heap.push(HeapEntry {
            lb: 0.0,
            seq,
            node: (nodes.len() - 1) as u32,
        });
        seq += 1;
    }

    let mut best = ub;
    let mut found: Vec<Geodesic> = Vec::new();
    let mut explored = 0usize;

    while let Some(HeapEntry { lb, node: idx, .. }) = heap.pop() {
        if lb > best * (1.0 + tol) + eps_abs {
            break;
        }
        explored += 1;
        if explored > DEFAULT_BUDGET {
            return Err(GeodesicError::SearchBudgetExceeded { explored });
        }
        let node = nodes[idx as usize].clone();
        let p2 = roots[node.root as usize].1;

        if let Some(&(_, q_chart)) = q_faces.iter().find(|&&(f, _)| f == node.face) {
            let chain = rebuild_chain(poly, &nodes, idx, &roots);
            if let Some(g) = realize_segment(poly, &chain, &p, &q, p2, q_chart) {
                if g.length <= best * (1.0 + tol) + eps_abs {
                    best = best.min(g.length);
                    found.push(g);
                }
            }
        }

        for &edge in poly.face_edge_ids(node.face) {
            if node.entry == Some(edge) {
                continue;
            }
            let next = poly.edge(edge).other_face(node.face);
            if node_chain_visits(&nodes, idx, next) {
                continue;
            }
            let e = poly.edge(edge);
            let verts = poly.face(node.face);
            let uv = poly.face_chart(node.face);
            let ia = verts.iter().position(|&w| w == e.verts[0]).unwrap();
            let ib = verts.iter().position(|&w| w == e.verts[1]).unwrap();
            let seg = [node.cum.apply(uv[ia]), node.cum.apply(uv[ib])];
            let Some(cone) = node.cone.clip(p2, seg) else {
                continue;
            };
            let lb_child = node.lb.max(dist_point_segment(p2, seg));
            if lb_child > best * (1.0 + tol) + eps_abs {
                continue;
            }
            let cum = node.cum.compose(&transition(poly, node.face, edge));
            nodes.push(Node {
                parent: Some(idx),
                root: node.root,
                face: next,
                entry: Some(edge),
                cum,
                cone,
                lb: lb_child,
            });
            heap.push(HeapEntry {
                lb: lb_child,
                seq,
                node: (nodes.len() - 1) as u32,
            });
            seq += 1;
        }
    }

    finalize(found, tol)
}

fn finalize(mut found: Vec<Geodesic>, tol: f64) -> Result<Vec<Geodesic>, GeodesicError> {
    let min = found
        .iter()
        .map(|g| g.length)
        .fold(f64::INFINITY, f64::min);
    found.retain(|g| g.length <= min * (1.0 + tol));
    found.sort_by(|a, b| {
        a.length
            .total_cmp(&b.length)
            .then_with(|| a.chain.faces().cmp(b.chain.faces()))
            .then_with(|| a.chain.edges().cmp(b.chain.edges()))
    });
    found.dedup_by(|a, b| a.chain.faces() == b.chain.faces() && a.chain.edges() == b.chain.edges());
    Ok(found)
}

/// Intrinsic distance: length of the shortest segment.
pub fn distance(poly: &Polyhedron, p: &SurfacePoint, q: &SurfacePoint) -> Result<f64, GeodesicError> {
    let paths = shortest_paths(poly, p, q, DEFAULT_TIE_TOL)?;
    Ok(paths[0].length)
}

/// Exhaustive depth-bounded enumeration of all simple face chains between
/// `p` and `q`, keeping the tied-minimal realized segments. No pruning beyond
/// corridor validity — the independent oracle for [`shortest_paths`].
pub fn oracle_enumerate(
    poly: &Polyhedron,
    p: &SurfacePoint,
    q: &SurfacePoint,
    max_faces: usize,
) -> Result<Vec<Geodesic>, GeodesicError> {
    let p = poly.canonicalize(p);
    let q = poly.canonicalize(q);
    if (poly.position(&p) - poly.position(&q)).norm() <= 1e-12 * poly.diameter() {
        return Err(GeodesicError::CoincidentEndpoints);
    }
    let roots = source_roots(poly, &p);
    let q_pos = poly.position(&q);
    let q_faces: Vec<(FaceId, Vec2)> = poly
        .incident_faces(&q)
        .into_iter()
        .map(|f| (f, poly.frame(f).project(q_pos)))
        .collect();

    let mut found = Vec::new();
    for &(face, p2) in &roots {
        let chain = UnfoldChain::new(face);
        dfs(poly, &chain, p2, &p, &q, &q_faces, max_faces, &mut found);
    }
    if found.is_empty() {
        return Ok(Vec::new());
    }
    finalize(found, DEFAULT_TIE_TOL)
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    poly: &Polyhedron,
    chain: &UnfoldChain,
    p2: Vec2,
    p: &SurfacePoint,
    q: &SurfacePoint,
    q_faces: &[(FaceId, Vec2)],
    max_faces: usize,
    found: &mut Vec<Geodesic>,
) {
    let last = chain.last_face();
    if let Some(&(_, q_chart)) = q_faces.iter().find(|&&(f, _)| f == last) {
        if let Some(g) = realize_segment(poly, chain, p, q, p2, q_chart) {
            found.push(g);
        }
    }
    if chain.faces().len() >= max_faces {
        return;
    }
    for &edge in poly.face_edge_ids(last) {
        if chain.edges().last() == Some(&edge) {
            continue;
        }
        let next = poly.edge(edge).other_face(last);
        if chain.faces().contains(&next) {
            continue;
        }
        let extended = chain.extend(poly, edge).expect("adjacent edge extends");
        dfs(poly, &extended, p2, p, q, q_faces, max_faces, found);
    }
}

// ---------------------------------------------------------------------------
// Source unfolding: all chains from one source within a length bound
// ---------------------------------------------------------------------------

/// One enumerated chain from the source, with everything needed to evaluate
/// route lengths at arbitrary points of its last face.
pub struct ChainRec {
    pub faces: Vec<FaceId>,
    pub edges: Vec<EdgeId>,
    root: u32,
    /// chart(last face) -> chart(root face)
    cum: PlanarIsometry,
    /// Source image in the last face's chart (`cum⁻¹(p2)`).
    pub src_img: Vec2,
    cone: Cone,
}

/// Every unfolding chain from a source point whose lower bound stays within
/// `bound`, indexed by last face. Evaluating the intrinsic distance at any
/// surface point `x` with `d(p,x) ≤ bound` reduces to a minimum of planar
/// distances to unfolded source images, filtered by visibility cones.
pub struct SourceUnfolding<'a> {
    poly: &'a Polyhedron,
    pub source: SurfacePoint,
    roots: Vec<(FaceId, Vec2)>,
    recs: Vec<ChainRec>,
    by_face: Vec<Vec<u32>>,
    pub bound: f64,
}

impl<'a> SourceUnfolding<'a> {
    pub fn build(
        poly: &'a Polyhedron,
        p: &SurfacePoint,
        bound: f64,
        budget: usize,
    ) -> Result<Self, GeodesicError> {
        let p = poly.canonicalize(p);
        let roots = source_roots(poly, &p);
        let eps_abs = 1e-12 * poly.diameter();
        let limit = bound + eps_abs;

        let mut nodes: Vec<Node> = Vec::new();
        let mut heap: BinaryHeap<HeapEntry> = BinaryHeap::new();
        let mut seq = 0u64;
        for (ri, &(face, _)) in roots.iter().enumerate() {
            nodes.push(Node {
                parent: None,
                root: ri as u32,
                face,
                entry: None,
                cum: PlanarIsometry::identity(),
                cone: Cone::Full,
                lb: 0.0,
            });
            heap.push(HeapEntry {
                lb: 0.0,
                seq,
                node: (nodes.len() - 1) as u32,
            });
            seq += 1;
        }

        let mut recs: Vec<ChainRec> = Vec::new();
        let mut by_face: Vec<Vec<u32>> = vec![Vec::new(); poly.face_count()];
        let mut explored = 0usize;

        while let Some(HeapEntry { node: idx, .. }) = heap.pop() {
            explored += 1;
            if explored > budget {
                return Err(GeodesicError::SearchBudgetExceeded { explored });
            }
            let node = nodes[idx as usize].clone();
            let p2 = roots[node.root as usize].1;

            // Materialize this chain.
            let mut faces = Vec::new();
            let mut edges = Vec::new();
            {
                let mut at = idx;
                loop {
                    let n = &nodes[at as usize];
                    faces.push(n.face);
                    match (n.entry, n.parent) {
                        (Some(e), Some(par)) => {
                            edges.push(e);
                            at = par;
                        }
                        _ => break,
                    }
                }
                faces.reverse();
                edges.reverse();
            }
            by_face[node.face.0].push(recs.len() as u32);
            recs.push(ChainRec {
                faces,
                edges,
                root: node.root,
                cum: node.cum,
                src_img: node.cum.inverse().apply(p2),
                cone: node.cone,
            });

            for &edge in poly.face_edge_ids(node.face) {
                if node.entry == Some(edge) {
                    continue;
                }
                let next = poly.edge(edge).other_face(node.face);
                if node_chain_visits(&nodes, idx, next) {
                    continue;
                }
                let e = poly.edge(edge);
                let verts = poly.face(node.face);
                let uv = poly.face_chart(node.face);
                let ia = verts.iter().position(|&w| w == e.verts[0]).unwrap();
                let ib = verts.iter().position(|&w| w == e.verts[1]).unwrap();
                let seg = [node.cum.apply(uv[ia]), node.cum.apply(uv[ib])];
                let Some(cone) = node.cone.clip(p2, seg) else {
                    continue;
                };
                let lb_child = node.lb.max(dist_point_segment(p2, seg));
                if lb_child > limit {
                    continue;
                }
                let cum = node.cum.compose(&transition(poly, node.face, edge));
                nodes.push(Node {
                    parent: Some(idx),
                    root: node.root,
                    face: next,
                    entry: Some(edge),
                    cum,
                    cone,
                    lb: lb_child,
                });
                heap.push(HeapEntry {
                    lb: lb_child,
                    seq,
                    node: (nodes.len() - 1) as u32,
                });
                seq += 1;
            }
        }

        Ok(SourceUnfolding {
            poly,
            source: p,
            roots,
            recs,
            by_face,
            bound,
        })
    }

    pub fn rec(&self, idx: u32) -> &ChainRec {
        &self.recs[idx as usize]
    }

    pub fn rec_count(&self) -> usize {
        self.recs.len()
    }

    /// Route length of chain `idx` at `x` (chart of the chain's last face),
    /// or `None` when the straight route is blocked.
    pub fn route_length(&self, idx: u32, x: Vec2) -> Option<f64> {
        let rec = &self.recs[idx as usize];
        let p2 = self.roots[rec.root as usize].1;
        let x0 = rec.cum.apply(x);
        let d = x0 - p2;
        if rec.cone.contains(d) {
            Some(d.norm())
        } else {
            None
        }
    }

    /// Shortest valid route to point `x` in `face`'s chart: `(length, chain)`.
    pub fn eval(&self, face: FaceId, x: Vec2) -> Option<(f64, u32)> {
        let mut best: Option<(f64, u32)> = None;
        for &idx in &self.by_face[face.0] {
            if let Some(len) = self.route_length(idx, x) {
                if best.is_none() || len < best.unwrap().0 {
                    best = Some((len, idx));
                }
            }
        }
        best
    }

    /// All valid routes to `x` within `(1+band)` of the best, sorted by
    /// length then chain index.
    pub fn eval_all(&self, face: FaceId, x: Vec2, band: f64) -> Vec<(f64, u32)> {
        let mut routes: Vec<(f64, u32)> = self.by_face[face.0]
            .iter()
            .filter_map(|&idx| self.route_length(idx, x).map(|len| (len, idx)))
            .collect();
        routes.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        if let Some(&(min, _)) = routes.first() {
            routes.retain(|&(len, _)| len <= min * (1.0 + band));
        }
        routes
    }

    /// Intrinsic distance to a mesh vertex (minimum over incident faces).
    pub fn vertex_distance(&self, v: VertexId) -> Option<(f64, u32)> {
        let mut best: Option<(f64, u32)> = None;
        for &f in self.poly.faces_at_vertex(v) {
            let x = self.poly.frame(f).project(self.poly.vertex(v));
            if let Some((len, idx)) = self.eval(f, x) {
                if best.is_none() || len < best.unwrap().0 {
                    best = Some((len, idx));
                }
            }
        }
        best
    }

    /// Rebuild the full [`UnfoldChain`] of a record (for exact validation).
    pub fn chain(&self, idx: u32) -> UnfoldChain {
        let rec = &self.recs[idx as usize];
        let mut chain = UnfoldChain::new(rec.faces[0]);
        for &e in &rec.edges {
            chain = chain.extend(self.poly, e).expect("recorded edge is valid");
        }
        chain
    }

    /// Realize the geodesic of record `idx` ending at `x` (chart coordinates
    /// of the record's last face), with full corridor validation.
    pub fn realize(&self, idx: u32, x_sp: &SurfacePoint, x: Vec2) -> Option<Geodesic> {
        let rec = &self.recs[idx as usize];
        let chain = self.chain(idx);
        let p2 = self.roots[rec.root as usize].1;
        realize_segment(self.poly, &chain, &self.source, x_sp, p2, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::mesh::FaceId;
    use crate::sampling::{AreaSampler, SplitMix64};

    fn cube_face_center(face: usize) -> SurfacePoint {
        SurfacePoint {
            face: FaceId(face),
            bary: vec![0.25; 4],
        }
    }

    #[test]
    fn upper_bound_cube_adjacent_centers() {
        let p = fixtures::cube();
        let a = cube_face_center(5); // top
        let b = cube_face_center(1); // front
        let ub = edge_graph_upper_bound(&p, &a, &b).unwrap();
        assert!(
            (1.0..=1.0 + 1e-9).contains(&ub),
            "upper bound {ub} should be 1 via the shared edge midpoint"
        );
    }

    #[test]
    fn upper_bound_same_face_is_euclidean() {
        let p = fixtures::cube();
        let a = p.surface_point(FaceId(5), vec![0.7, 0.1, 0.1, 0.1]).unwrap();
        let b = p.surface_point(FaceId(5), vec![0.1, 0.1, 0.7, 0.1]).unwrap();
        let ub = edge_graph_upper_bound(&p, &a, &b).unwrap();
        let chord = (p.position(&a) - p.position(&b)).norm();
        assert!((ub - chord).abs() < 1e-12);
    }

    #[test]
    fn coincident_points_are_rejected() {
        let p = fixtures::cube();
        let a = cube_face_center(0);
        assert!(matches!(
            edge_graph_upper_bound(&p, &a, &a.clone()),
            Err(GeodesicError::CoincidentEndpoints)
        ));
        assert!(matches!(
            shortest_paths(&p, &a, &a.clone(), 1e-7),
            Err(GeodesicError::CoincidentEndpoints)
        ));
    }

    #[test]
    fn cube_adjacent_face_centers() {
        let p = fixtures::cube();
        let paths = shortest_paths(&p, &cube_face_center(5), &cube_face_center(1), 1e-7).unwrap();
        assert_eq!(paths.len(), 1, "exactly one geodesic, got {}", paths.len());
        assert!((paths[0].length - 1.0).abs() < 1e-12);
        // It crosses the shared edge at its midpoint.
        assert_eq!(paths[0].points.len(), 3);
        let mid = p.position(&paths[0].points[1]);
        assert!((mid - crate::Vec3::new(0.5, 0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn cube_opposite_face_centers_have_four_geodesics() {
        let p = fixtures::cube();
        let paths = shortest_paths(&p, &cube_face_center(5), &cube_face_center(0), 1e-7).unwrap();
        assert_eq!(paths.len(), 4, "got {}", paths.len());
        for g in &paths {
            assert!((g.length - 2.0).abs() < 1e-12);
            assert_eq!(g.chain.faces().len(), 3);
        }
    }

    #[test]
    fn cube_vertex_to_opposite_vertex_is_sqrt5() {
        let p = fixtures::cube();
        let a = SurfacePoint::at_vertex(&p, VertexId(0)); // (0,0,0)
        let b = SurfacePoint::at_vertex(&p, VertexId(6)); // (1,1,1)
        let paths = shortest_paths(&p, &a, &b, 1e-7).unwrap();
        let sqrt5 = 2.2360679774997896_f64;
        assert!(
            (paths[0].length - sqrt5).abs() < 1e-12,
            "length {}",
            paths[0].length
        );
        // Two-face unfoldings through each of the six face pairs realize it.
        assert_eq!(paths.len(), 6, "got {}", paths.len());
    }

    #[test]
    fn same_face_points_use_planar_distance() {
        let p = fixtures::cube();
        let a = p.surface_point(FaceId(5), vec![0.6, 0.2, 0.1, 0.1]).unwrap();
        let b = p.surface_point(FaceId(5), vec![0.1, 0.2, 0.6, 0.1]).unwrap();
        let paths = shortest_paths(&p, &a, &b, 1e-7).unwrap();
        let chord = (p.position(&a) - p.position(&b)).norm();
        assert_eq!(paths[0].chain.faces().len(), 1);
        assert!((paths[0].length - chord).abs() < 1e-12);
    }

    #[test]
    fn oracle_agrees_on_cube_face_centers() {
        let p = fixtures::cube();
        let fast = shortest_paths(&p, &cube_face_center(5), &cube_face_center(1), 1e-7).unwrap();
        let slow = oracle_enumerate(&p, &cube_face_center(5), &cube_face_center(1), 4).unwrap();
        assert_eq!(fast.len(), slow.len());
        for (a, b) in fast.iter().zip(&slow) {
            assert_eq!(a.chain.faces(), b.chain.faces());
            assert!((a.length - b.length).abs() < 1e-12);
        }
    }

    #[test]
    fn oracle_depth_one_cannot_reach_other_faces() {
        let p = fixtures::cube();
        let got = oracle_enumerate(&p, &cube_face_center(5), &cube_face_center(1), 1).unwrap();
        assert!(got.is_empty());
    }

    #[test]
    fn oracle_equivalence_random_pairs() {
        for (mesh, name) in [
            (fixtures::cube(), "cube"),
            (fixtures::regular_tetrahedron(1.0), "tetrahedron"),
        ] {
            let sampler = AreaSampler::new(&mesh);
            let mut rng = SplitMix64::new(7);
            for trial in 0..20 {
                let a = sampler.sample(&mut rng);
                let b = sampler.sample(&mut rng);
                if (mesh.position(&a) - mesh.position(&b)).norm() < 1e-6 {
                    continue;
                }
                let fast = shortest_paths(&mesh, &a, &b, 1e-7).unwrap();
                let slow = oracle_enumerate(&mesh, &a, &b, 6).unwrap();
                assert!(!fast.is_empty(), "{name} trial {trial}: no geodesic found");
                assert!(
                    (fast[0].length - slow[0].length).abs() <= 1e-9 * slow[0].length,
                    "{name} trial {trial}: {} vs {}",
                    fast[0].length,
                    slow[0].length
                );
                let sig = |gs: &[Geodesic]| -> Vec<Vec<EdgeId>> {
                    gs.iter().map(|g| g.signature()).collect()
                };
                assert_eq!(sig(&fast), sig(&slow), "{name} trial {trial}");
            }
        }
    }

    #[test]
    fn distance_is_symmetric() {
        let p = fixtures::cube();
        let sampler = AreaSampler::new(&p);
        let mut rng = SplitMix64::new(99);
        for _ in 0..50 {
            let a = sampler.sample(&mut rng);
            let b = sampler.sample(&mut rng);
            if (p.position(&a) - p.position(&b)).norm() < 1e-6 {
                continue;
            }
            let dab = distance(&p, &a, &b).unwrap();
            let dba = distance(&p, &b, &a).unwrap();
            assert!((dab - dba).abs() < 1e-10, "{dab} vs {dba}");
        }
    }

    #[test]
    fn triangle_inequality_sampled() {
        let p = fixtures::regular_tetrahedron(1.0);
        let sampler = AreaSampler::new(&p);
        let mut rng = SplitMix64::new(3);
        for _ in 0..15 {
            let a = sampler.sample(&mut rng);
            let b = sampler.sample(&mut rng);
            let c = sampler.sample(&mut rng);
            let sep = |x: &SurfacePoint, y: &SurfacePoint| (p.position(x) - p.position(y)).norm();
            if sep(&a, &b) < 1e-6 || sep(&b, &c) < 1e-6 || sep(&a, &c) < 1e-6 {
                continue;
            }
            let dab = distance(&p, &a, &b).unwrap();
            let dbc = distance(&p, &b, &c).unwrap();
            let dac = distance(&p, &a, &c).unwrap();
            assert!(dac <= dab + dbc + 1e-9);
        }
    }

    #[test]
    fn returned_geodesics_respect_vertex_clearance() {
        let p = fixtures::cube();
        let sampler = AreaSampler::new(&p);
        let mut rng = SplitMix64::new(11);
        let clearance = 1e-9 * p.diameter();
        for _ in 0..20 {
            let a = sampler.sample(&mut rng);
            let b = sampler.sample(&mut rng);
            if (p.position(&a) - p.position(&b)).norm() < 1e-6 {
                continue;
            }
            for g in shortest_paths(&p, &a, &b, 1e-7).unwrap() {
                // Interior crossing points stay clear of all vertices.
                for pt in &g.points[1..g.points.len() - 1] {
                    let x = p.position(pt);
                    for w in 0..p.vertex_count() {
                        let d = (x - p.vertex(VertexId(w))).norm();
                        assert!(d >= clearance, "crossing within {d} of vertex {w}");
                    }
                }
                // Unfolded straightness: endpoint distance equals length.
                let chord = (g.planar[0] - g.planar[1]).norm();
                assert!((chord - g.length).abs() <= 1e-12 * g.length.max(1.0));
            }
        }
    }

    #[test]
    fn source_unfolding_matches_shortest_paths() {
        let p = fixtures::regular_tetrahedron(1.0);
        let src = p
            .surface_point(FaceId(0), vec![0.5, 0.3, 0.2])
            .unwrap();
        let uf = SourceUnfolding::build(&p, &src, 2.0, DEFAULT_BUDGET).unwrap();
        let sampler = AreaSampler::new(&p);
        let mut rng = SplitMix64::new(21);
        for _ in 0..30 {
            let x = sampler.sample(&mut rng);
            if (p.position(&x) - p.position(&src)).norm() < 1e-6 {
                continue;
            }
            let want = distance(&p, &src, &x).unwrap();
            let xc = p.canonicalize(&x);
            let got = uf
                .eval(xc.face, p.chart_point(&xc))
                .map(|(len, _)| len)
                .unwrap();
            assert!(
                (got - want).abs() <= 1e-9 * want.max(1.0),
                "{got} vs {want}"
            );
        }
    }
}
