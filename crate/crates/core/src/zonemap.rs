//! Zone decomposition of the antipodal map and its rational normal forms.
//!
//! Away from a measure-zero tie locus, the antipodal map restricted to a face
//! is either a constant vertex or the circumcenter map of one fixed pair of
//! unfolding isometries — a rational map
//!
//! ```text
//! F(x, y) = (X(x,y), Y(x,y)) / (ε·(x²+y²) + L(x,y)),
//! ```
//!
//! with `deg X, deg Y ≤ 2`, `deg L ≤ 1` and `ε ∈ {0, 1}`. This module builds
//! those coefficients in closed form from an isometry pair
//! ([`tau_from_isometries`]), provides the equal-angle normal form
//! ([`lemma2_normal_form`]), locates the denominator's zero set
//! ([`denominator_locus`]), samples a face into labeled zones
//! ([`sample_zone_map`]), and fits the rational form to observed
//! source/antipode pairs ([`fit_zone_map`]).

use crate::antipode::{scan, AntipodeError, AntipodeParams, CandidateLabel};
use crate::mesh::{EdgeId, FaceId, Polyhedron, SurfacePoint, VertexId, GEOM_TOL};
use crate::unfold::{classify_pair, PlanarIsometry, UnfoldError};
use crate::{cross2, Vec2};
use rayon::prelude::*;
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ZoneMapError {
    #[error(transparent)]
    Unfold(#[from] UnfoldError),
    #[error("angle is a multiple of 2π; the hinge pair degenerates")]
    DegenerateAngle,
    #[error("denominator zero set is empty or a single point; coefficients violate the rational normal form")]
    EmptyOrPointLocus,
    #[error("point lies on the denominator locus")]
    OnLocus,
    #[error("samples are rank deficient; the rational form is not determined")]
    RankDeficient,
    #[error(transparent)]
    Antipode(#[from] AntipodeError),
}

/// Quadratic coefficients in the basis `[1, x, y, x², xy, y²]`.
pub type Quad = [f64; 6];
/// Affine coefficients in the basis `[1, x, y]`.
pub type Affine = [f64; 3];

fn eval_quad(q: &Quad, p: Vec2) -> f64 {
    q[0] + q[1] * p.x + q[2] * p.y + q[3] * p.x * p.x + q[4] * p.x * p.y + q[5] * p.y * p.y
}

fn eval_affine(a: &Affine, p: Vec2) -> f64 {
    a[0] + a[1] * p.x + a[2] * p.y
}

fn mul_affine(a: &Affine, b: &Affine) -> Quad {
    [
        a[0] * b[0],
        a[0] * b[1] + a[1] * b[0],
        a[0] * b[2] + a[2] * b[0],
        a[1] * b[1],
        a[1] * b[2] + a[2] * b[1],
        a[2] * b[2],
    ]
}

/// Coefficients of one rational antipode map
/// `(X, Y) / (ε(x²+y²) + L)` in fixed orthonormal frames.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalMapCoeffs {
    pub epsilon: u8,
    pub x: Quad,
    pub y: Quad,
    pub l: Affine,
}

impl RationalMapCoeffs {
    pub fn denominator(&self, p: Vec2) -> f64 {
        self.epsilon as f64 * p.norm_squared() + eval_affine(&self.l, p)
    }

    /// Evaluate the map; fails on (or numerically at) the denominator locus.
    pub fn eval(&self, p: Vec2) -> Result<Vec2, ZoneMapError> {
        let den = self.denominator(p);
        let scale = self.epsilon as f64 * p.norm_squared()
            + self.l[0].abs()
            + (self.l[1] * p.x).abs()
            + (self.l[2] * p.y).abs();
        if den.abs() <= 1e-12 * (scale + 1.0) {
            return Err(ZoneMapError::OnLocus);
        }
        Ok(Vec2::new(eval_quad(&self.x, p), eval_quad(&self.y, p)) / den)
    }
}

/// Squared distance between `p` and its image under the map, in the
/// identified frames where source and unfolded source coordinates agree.
pub fn delta(p: Vec2, m: &RationalMapCoeffs) -> Result<f64, ZoneMapError> {
    Ok((p - m.eval(p)?).norm_squared())
}

/// Closed-form coefficients of the circumcenter map
/// `p ↦ cc(p, fm1(p), f1(p))`.
///
/// If exactly one input is a translation the pair is re-based first (see
/// [`classify_pair`]); the returned coefficients then express the map of the
/// re-based pair. The equal-angle case is scaled to match the normal form of
/// [`lemma2_normal_form`] (denominator `2y` in the canonical frames); the
/// distinct-angle case is scaled so the denominator is exactly
/// `(x²+y²) + L`.
pub fn tau_from_isometries(
    f1: &PlanarIsometry,
    fm1: &PlanarIsometry,
) -> Result<RationalMapCoeffs, ZoneMapError> {
    let cp = classify_pair(f1, fm1)?;
    let (g1, gm1) = cp.pair;

    // For an isometry f: p ↦ Rp + t:
    //   w(p) = f(p) − p       (affine in each coordinate)
    //   h(p) = |f(p)|² − |p|² (affine)
    let parts = |f: &PlanarIsometry| -> (Affine, Affine, Affine) {
        let wx = [f.t.x, f.c - 1.0, -f.s];
        let wy = [f.t.y, f.s, f.c - 1.0];
        let h = [
            f.t.norm_squared(),
            2.0 * (f.c * f.t.x + f.s * f.t.y),
            2.0 * (f.c * f.t.y - f.s * f.t.x),
        ];
        (wx, wy, h)
    };
    let (bx, by, hb) = parts(&gm1);
    let (cx, cy, hc) = parts(&g1);

    // Cramer's rule on 2 w_b·z = h_b, 2 w_c·z = h_c.
    let sub = |a: Quad, b: Quad| -> Quad {
        [
            a[0] - b[0],
            a[1] - b[1],
            a[2] - b[2],
            a[3] - b[3],
            a[4] - b[4],
            a[5] - b[5],
        ]
    };
    let den: Quad = {
        let q = sub(mul_affine(&bx, &cy), mul_affine(&by, &cx));
        q.map(|v| 4.0 * v)
    };
    let xn: Quad = {
        let q = sub(mul_affine(&hb, &cy), mul_affine(&hc, &by));
        q.map(|v| 2.0 * v)
    };
    let yn: Quad = {
        let q = sub(mul_affine(&hc, &bx), mul_affine(&hb, &cx));
        q.map(|v| 2.0 * v)
    };

    if cp.epsilon == 0 {
        // Equal angles: the denominator's quadratic part cancels and the
        // factor 8(1 − cos θ) recovers the normal-form scale.
        let c_common = 0.5 * (g1.c + gm1.c);
        let k = 8.0 * (1.0 - c_common);
        let scale_max = den.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        debug_assert!(
            den[3].abs() + den[4].abs() + den[5].abs() <= 1e-9 * scale_max.max(1.0),
            "equal-angle denominator kept a quadratic part"
        );
        Ok(RationalMapCoeffs {
            epsilon: 0,
            x: xn.map(|v| v / k),
            y: yn.map(|v| v / k),
            l: [den[0] / k, den[1] / k, den[2] / k],
        })
    } else {
        // Distinct angles: normalize the quadratic part to exactly x²+y².
        let lam = 0.5 * (den[3] + den[5]);
        debug_assert!(
            (den[3] - den[5]).abs() <= 1e-9 * lam.abs().max(1.0)
                && den[4].abs() <= 1e-9 * lam.abs().max(1.0),
            "distinct-angle denominator is not isotropic"
        );
        Ok(RationalMapCoeffs {
            epsilon: 1,
            x: xn.map(|v| v / lam),
            y: yn.map(|v| v / lam),
            l: [den[0] / lam, den[1] / lam, den[2] / lam],
        })
    }
}

/// Equal-angle normal form in the canonical frames (rotation centers at
/// `(±1, 0)`):
///
/// ```text
/// X = 2xy·cosθ + (x²−y²−1)·sinθ
/// Y = (1−cosθ)x² + 2 sinθ·xy + (1+cosθ)y² − (1−cosθ)
/// L = 2y,   ε = 0
/// ```
///
/// `Y` is the expanded product `(1−cosθ)(x + y·cot(θ/2) − 1)(x + y·cot(θ/2) + 1)`.
pub fn lemma2_normal_form(theta: f64) -> Result<RationalMapCoeffs, ZoneMapError> {
    if (theta / 2.0).sin().abs() < 1e-12 {
        return Err(ZoneMapError::DegenerateAngle);
    }
    let (s, c) = theta.sin_cos();
    Ok(RationalMapCoeffs {
        epsilon: 0,
        x: [-s, 0.0, 0.0, s, 2.0 * c, -s],
        y: [-(1.0 - c), 0.0, 0.0, 1.0 - c, 2.0 * s, 1.0 + c],
        l: [0.0, 0.0, 2.0],
    })
}

/// Zero set of the rational map's denominator.
#[derive(Clone, Debug)]
pub enum Locus {
    /// `{p : normal·p = offset}` with a unit, sign-canonical normal.
    Line { normal: Vec2, offset: f64 },
    Circle { center: Vec2, radius: f64 },
}

impl Locus {
    /// Signed violation of the locus equation at `p` (zero on the locus).
    pub fn residual(&self, p: Vec2) -> f64 {
        match self {
            Locus::Line { normal, offset } => normal.dot(&p) - offset,
            Locus::Circle { center, radius } => (p - center).norm() - radius,
        }
    }

    /// `n` evenly spread points on the locus (for sampling tests).
    pub fn sample_points(&self, n: usize) -> Vec<Vec2> {
        match self {
            Locus::Line { normal, offset } => {
                let base = normal * *offset;
                let dir = Vec2::new(-normal.y, normal.x);
                (0..n)
                    .map(|k| base + dir * (k as f64 - n as f64 / 2.0))
                    .collect()
            }
            Locus::Circle { center, radius } => (0..n)
                .map(|k| {
                    let a = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                    center + Vec2::new(a.cos(), a.sin()) * *radius
                })
                .collect(),
        }
    }
}

/// Exact parameters of the denominator's zero set: a line for `ε = 0`, a
/// circle for `ε = 1`.
pub fn denominator_locus(m: &RationalMapCoeffs) -> Result<Locus, ZoneMapError> {
    let l_scale = m.l.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    if m.epsilon == 0 {
        let n = Vec2::new(m.l[1], m.l[2]);
        if n.norm() <= 1e-12 * l_scale.max(1e-300) {
            return Err(ZoneMapError::EmptyOrPointLocus);
        }
        let len = n.norm();
        let mut normal = n / len;
        let mut offset = -m.l[0] / len;
        // Canonical sign: first significant component positive.
        let flip = if normal.x.abs() > 1e-12 { normal.x < 0.0 } else { normal.y < 0.0 };
        if flip {
            normal = -normal;
            offset = -offset;
        }
        Ok(Locus::Line { normal, offset })
    } else {
        let center = Vec2::new(-m.l[1] / 2.0, -m.l[2] / 2.0);
        let r2 = center.norm_squared() - m.l[0];
        if r2 <= 1e-12 * (center.norm_squared() + l_scale + 1.0) {
            return Err(ZoneMapError::EmptyOrPointLocus);
        }
        Ok(Locus::Circle {
            center,
            radius: r2.sqrt(),
        })
    }
}

// ---------------------------------------------------------------------------
// Zone sampling
// ---------------------------------------------------------------------------

/// Zone label of a sampled point.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ZoneLabel {
    /// Antipode is (numerically) this vertex.
    Vertex(VertexId),
    /// Antipode is a three-segment point; the sorted signatures of the three
    /// realizing chains.
    Triple(Vec<Vec<EdgeId>>),
    /// Realizing candidates tie within the detection band, or the label
    /// changes within one grid cell.
    Boundary,
}

impl ZoneLabel {
    pub fn as_string(&self) -> String {
        match self {
            ZoneLabel::Vertex(v) => format!("V{}", v.0),
            ZoneLabel::Triple(sigs) => {
                let parts: Vec<String> = sigs
                    .iter()
                    .map(|sig| {
                        sig.iter()
                            .map(|e| e.0.to_string())
                            .collect::<Vec<_>>()
                            .join(".")
                    })
                    .collect();
                format!("T:{}", parts.join("/"))
            }
            ZoneLabel::Boundary => "B".to_string(),
        }
    }
}

/// Full labeling data for one surface point.
#[derive(Clone, Debug)]
pub struct LabeledPoint {
    pub label: ZoneLabel,
    pub antipode: SurfacePoint,
    pub antipode_face: FaceId,
    /// Antipode in the chart of its face.
    pub antipode_chart: Vec2,
    /// Squared distance to the antipode (the δ value).
    pub delta: f64,
    /// Unfolded source images of the tied routes, in the antipode face chart.
    pub route_images: Vec<Vec2>,
    /// Relative gap (on δ) to the best differently-labeled candidate.
    pub runner_up_gap: f64,
}

/// Tie band (relative, on δ) below which the top two candidates are
/// considered tied and the sample is classified Boundary.
pub const BOUNDARY_TIE_REL: f64 = 1e-6;

/// Label a single surface point by its realizing antipode candidate.
pub fn label_point(
    poly: &Polyhedron,
    sp: &SurfacePoint,
    params: &AntipodeParams,
) -> Result<LabeledPoint, ZoneMapError> {
    let sp = poly.canonicalize(sp);
    let (uf, candidates) = scan(poly, &sp, params)?;
    let top = candidates
        .iter()
        .max_by(|a, b| a.dist.total_cmp(&b.dist).then(b.face.cmp(&a.face)))
        .expect("candidate set is never empty");
    let delta = top.dist * top.dist;
    let runner_up = candidates
        .iter()
        .filter(|c| c.label != top.label)
        .map(|c| c.dist)
        .fold(0.0_f64, f64::max);
    let runner_up_gap = (delta - runner_up * runner_up) / delta;

    let label = if runner_up_gap < BOUNDARY_TIE_REL {
        ZoneLabel::Boundary
    } else {
        match &top.label {
            CandidateLabel::Vertex(v) => ZoneLabel::Vertex(*v),
            CandidateLabel::Routes(sigs) => {
                if sigs.len() == 3 {
                    ZoneLabel::Triple(sigs.clone())
                } else {
                    // Fewer or more than three tied segments off a vertex:
                    // on (or numerically at) the tie locus.
                    ZoneLabel::Boundary
                }
            }
        }
    };
    let antipode = match &top.label {
        CandidateLabel::Vertex(v) => SurfacePoint::at_vertex(poly, *v),
        CandidateLabel::Routes(_) => poly
            .surface_point_from_chart(top.face, top.uv)
            .map(|s| poly.canonicalize(&s))
            .unwrap_or_else(|| SurfacePoint::face_center(poly, top.face)),
    };
    let route_images = top.routes.iter().map(|r| uf.rec(r.rec).src_img).collect();
    Ok(LabeledPoint {
        label,
        antipode,
        antipode_face: top.face,
        antipode_chart: top.uv,
        delta,
        route_images,
        runner_up_gap,
    })
}

/// One grid sample of a zone map.
#[derive(Clone, Debug)]
pub struct ZoneSample {
    pub ix: usize,
    pub iy: usize,
    /// Sample position in the face's first-edge frame.
    pub position: Vec2,
    /// Sample position in the face chart (internal coordinates).
    pub chart: Vec2,
    pub label: ZoneLabel,
    pub antipode: SurfacePoint,
    pub antipode_face: FaceId,
    /// Antipode in the first-edge frame of its face.
    pub antipode_position: Vec2,
    pub delta: f64,
}

/// Grid classification of one face by realizing antipode candidate.
#[derive(Clone, Debug)]
pub struct ZoneMap {
    pub face: FaceId,
    pub resolution: usize,
    pub samples: Vec<ZoneSample>,
    /// Chart-coordinate origin and step of the sampling grid.
    pub grid_origin: Vec2,
    pub grid_step: Vec2,
    index: Vec<Option<u32>>,
}

impl ZoneMap {
    pub fn sample_at(&self, ix: usize, iy: usize) -> Option<&ZoneSample> {
        let idx = *self.index.get(iy * self.resolution + ix)?;
        idx.map(|i| &self.samples[i as usize])
    }

    /// Fraction of samples labeled Boundary.
    pub fn boundary_fraction(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples
            .iter()
            .filter(|s| s.label == ZoneLabel::Boundary)
            .count() as f64
            / self.samples.len() as f64
    }

    /// Sorted distinct non-Boundary labels.
    pub fn label_set(&self) -> Vec<ZoneLabel> {
        let mut labels: Vec<ZoneLabel> = self
            .samples
            .iter()
            .filter(|s| s.label != ZoneLabel::Boundary)
            .map(|s| s.label.clone())
            .collect();
        labels.sort();
        labels.dedup();
        labels
    }

    /// JSON dump of labels and δ values.
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "face": self.face.0,
            "resolution": self.resolution,
            "boundary_fraction": self.boundary_fraction(),
            "labels": self.label_set().iter().map(|l| l.as_string()).collect::<Vec<_>>(),
            "samples": self.samples.iter().map(|s| json!({
                "ix": s.ix,
                "iy": s.iy,
                "position": [s.position.x, s.position.y],
                "label": s.label.as_string(),
                "antipode_face": s.antipode_face.0,
                "antipode_position": [s.antipode_position.x, s.antipode_position.y],
                "delta": s.delta,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Sample a face on a `resolution × resolution` grid and label every sample
/// by its realizing candidate. Samples whose label differs from a grid
/// neighbor's are re-classified Boundary, so surviving labels are locally
/// constant at the sampling scale.
pub fn sample_zone_map(
    poly: &Polyhedron,
    face: FaceId,
    resolution: usize,
    params: &AntipodeParams,
) -> Result<ZoneMap, ZoneMapError> {
    assert!(resolution >= 8, "resolution must be at least 8");
    let uv = poly.face_chart(face);
    let (mut lo, mut hi) = (uv[0], uv[0]);
    for q in uv {
        lo = Vec2::new(lo.x.min(q.x), lo.y.min(q.y));
        hi = Vec2::new(hi.x.max(q.x), hi.y.max(q.y));
    }
    let step = (hi - lo) / resolution as f64;
    let tol = GEOM_TOL * poly.diameter();

    let cells: Vec<(usize, usize, Vec2)> = (0..resolution)
        .flat_map(|iy| (0..resolution).map(move |ix| (ix, iy)))
        .filter_map(|(ix, iy)| {
            let q = lo + Vec2::new((ix as f64 + 0.5) * step.x, (iy as f64 + 0.5) * step.y);
            poly.chart_contains(face, q, -tol).then_some((ix, iy, q))
        })
        .collect();

    let labeled: Vec<Result<LabeledPoint, ZoneMapError>> = cells
        .par_iter()
        .map(|&(_, _, q)| {
            let sp = poly
                .surface_point_from_chart(face, q)
                .expect("grid point is inside the face");
            label_point(poly, &sp, params)
        })
        .collect();

    let mut samples = Vec::with_capacity(cells.len());
    let mut index = vec![None; resolution * resolution];
    for ((ix, iy, q), lp) in cells.into_iter().zip(labeled) {
        let lp = lp?;
        index[iy * resolution + ix] = Some(samples.len() as u32);
        samples.push(ZoneSample {
            ix,
            iy,
            position: poly.to_first_edge(face, q),
            chart: q,
            label: lp.label,
            antipode: lp.antipode,
            antipode_face: lp.antipode_face,
            antipode_position: poly.to_first_edge(lp.antipode_face, lp.antipode_chart),
            delta: lp.delta,
        });
    }

    // Neighbor-disagreement pass: a cell whose label differs from an adjacent
    // cell's sits on a zone boundary at this resolution.
    let raw: Vec<ZoneLabel> = samples.iter().map(|s| s.label.clone()).collect();
    let lookup = |ix: i64, iy: i64| -> Option<u32> {
        if ix < 0 || iy < 0 || ix >= resolution as i64 || iy >= resolution as i64 {
            return None;
        }
        index[iy as usize * resolution + ix as usize]
    };
    let mut to_boundary = Vec::new();
    for s in &samples {
        for (dx, dy) in [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)] {
            if let Some(n) = lookup(s.ix as i64 + dx, s.iy as i64 + dy) {
                if raw[n as usize] != s.label {
                    to_boundary.push(index[s.iy * resolution + s.ix].unwrap());
                    break;
                }
            }
        }
    }
    for i in to_boundary {
        samples[i as usize].label = ZoneLabel::Boundary;
    }

    Ok(ZoneMap {
        face,
        resolution,
        samples,
        grid_origin: lo,
        grid_step: step,
        index,
    })
}

/// Labels at the four axis-aligned half-step neighbors of a sample (points
/// of the doubled-resolution grid), for the zone-openness probe. Neighbors
/// outside the face are skipped.
pub fn refined_neighbor_labels(
    poly: &Polyhedron,
    zm: &ZoneMap,
    sample: &ZoneSample,
    params: &AntipodeParams,
) -> Result<Vec<ZoneLabel>, ZoneMapError> {
    let tol = GEOM_TOL * poly.diameter();
    let mut out = Vec::new();
    for (dx, dy) in [(0.5, 0.0), (-0.5, 0.0), (0.0, 0.5), (0.0, -0.5)] {
        let q = sample.chart + Vec2::new(dx * zm.grid_step.x, dy * zm.grid_step.y);
        if !poly.chart_contains(zm.face, q, -tol) {
            continue;
        }
        let sp = poly
            .surface_point_from_chart(zm.face, q)
            .expect("half-step neighbor is inside the face");
        out.push(label_point(poly, &sp, params)?.label);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Fitting the rational form to observed samples
// ---------------------------------------------------------------------------

/// Result of fitting the rational normal form to (source, antipode) pairs.
#[derive(Clone, Debug)]
pub struct ZoneFit {
    pub coeffs: RationalMapCoeffs,
    /// RMS algebraic residual per (row-normalized) equation; the fit
    /// certifies the rational form when this is below ~1e−8.
    pub residual: f64,
}

/// Least-squares fit of `(X, Y, ε, L)` to samples `(p, F_p)` given in fixed
/// frames. Needs ≥ 20 well-spread samples from a single zone.
pub fn fit_zone_map(samples: &[(Vec2, Vec2)]) -> Result<ZoneFit, ZoneMapError> {
    use nalgebra::DMatrix;
    let n = samples.len();
    if 2 * n < 16 {
        return Err(ZoneMapError::RankDeficient);
    }
    // Unknowns: [X0..X5, Y0..Y5, e, l0, l1, l2]
    let mut m = DMatrix::<f64>::zeros(2 * n, 16);
    for (si, &(p, q)) in samples.iter().enumerate() {
        let basis = [1.0, p.x, p.y, p.x * p.x, p.x * p.y, p.y * p.y];
        let rr = p.norm_squared();
        let rownorm = (1.0 + rr) * (1.0 + q.norm());
        for (k, b) in basis.iter().enumerate() {
            m[(2 * si, k)] = b / rownorm;
            m[(2 * si + 1, 6 + k)] = b / rownorm;
        }
        for (row, coord) in [(2 * si, q.x), (2 * si + 1, q.y)] {
            m[(row, 12)] = -coord * rr / rownorm;
            m[(row, 13)] = -coord / rownorm;
            m[(row, 14)] = -coord * p.x / rownorm;
            m[(row, 15)] = -coord * p.y / rownorm;
        }
    }
    let svd = m.clone().svd(false, true);
    let sv = &svd.singular_values;
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[a].total_cmp(&sv[b]));
    let smallest = order[0];
    let second = order[1];
    if sv[second] <= 1e-8 * sv[order[order.len() - 1]].max(1e-300) {
        return Err(ZoneMapError::RankDeficient);
    }
    let v: Vec<f64> = (0..16).map(|k| v_t[(smallest, k)]).collect();
    let residual = sv[smallest] / (2.0 * n as f64).sqrt();

    let e = v[12];
    let coeffs = if e.abs() > 1e-6 {
        let inv = 1.0 / e;
        RationalMapCoeffs {
            epsilon: 1,
            x: [
                v[0] * inv,
                v[1] * inv,
                v[2] * inv,
                v[3] * inv,
                v[4] * inv,
                v[5] * inv,
            ],
            y: [
                v[6] * inv,
                v[7] * inv,
                v[8] * inv,
                v[9] * inv,
                v[10] * inv,
                v[11] * inv,
            ],
            l: [v[13] * inv, v[14] * inv, v[15] * inv],
        }
    } else {
        // ε = 0: scale so the dominant coefficient of L is ±2 → +2.
        let k = (13..16).max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs())).unwrap();
        if v[k].abs() <= 1e-12 {
            return Err(ZoneMapError::RankDeficient);
        }
        let inv = 2.0 / v[k];
        RationalMapCoeffs {
            epsilon: 0,
            x: [
                v[0] * inv,
                v[1] * inv,
                v[2] * inv,
                v[3] * inv,
                v[4] * inv,
                v[5] * inv,
            ],
            y: [
                v[6] * inv,
                v[7] * inv,
                v[8] * inv,
                v[9] * inv,
                v[10] * inv,
                v[11] * inv,
            ],
            l: [v[13] * inv, v[14] * inv, v[15] * inv],
        }
    };
    Ok(ZoneFit { coeffs, residual })
}

// ---------------------------------------------------------------------------
// SVG export
// ---------------------------------------------------------------------------

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

fn label_color(label: &ZoneLabel) -> String {
    if *label == ZoneLabel::Boundary {
        return "#000000".to_string();
    }
    let h = fnv1a(label.as_string().as_bytes());
    // Spread hues; keep saturation/value high so neighboring zones contrast.
    let hue = (h % 360) as f64;
    let (r, g, b) = hsv_to_rgb(hue, 0.55 + 0.3 * ((h >> 9) % 2) as f64, 0.95);
    format!("#{r:02x}{g:02x}{b:02x}")
}

fn hsv_to_rgb(h: f64, s: f64, v: f64) -> (u8, u8, u8) {
    let c = v * s;
    let hp = h / 60.0;
    let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    (
        ((r + m) * 255.0).round() as u8,
        ((g + m) * 255.0).round() as u8,
        ((b + m) * 255.0).round() as u8,
    )
}

/// SVG rendering of a zone map: one square per sample cell, colored by label
/// hash; Boundary cells black; the face outline on top. 1000×1000 viewport.
pub fn zone_map_svg(poly: &Polyhedron, zm: &ZoneMap) -> String {
    use std::fmt::Write as _;
    let verts: Vec<Vec2> = poly
        .face_chart(zm.face)
        .iter()
        .map(|&q| poly.to_first_edge(zm.face, q))
        .collect();
    let (mut lo, mut hi) = (verts[0], verts[0]);
    for q in &verts {
        lo = Vec2::new(lo.x.min(q.x), lo.y.min(q.y));
        hi = Vec2::new(hi.x.max(q.x), hi.y.max(q.y));
    }
    let span = (hi.x - lo.x).max(hi.y - lo.y).max(1e-300);
    let margin = 20.0;
    let scale = (1000.0 - 2.0 * margin) / span;
    let map = |q: Vec2| -> (f64, f64) {
        (
            margin + (q.x - lo.x) * scale,
            // SVG y grows downward.
            1000.0 - margin - (q.y - lo.y) * scale,
        )
    };
    let cell = zm.grid_step.x.max(zm.grid_step.y) * scale;

    let mut s = String::new();
    s.push_str(r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    s.push('\n');
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 1000 1000" width="1000" height="1000">"#
    );
    let _ = writeln!(s, r##"<rect width="1000" height="1000" fill="#ffffff"/>"##);
    for sample in &zm.samples {
        let (cx, cy) = map(sample.position);
        let _ = writeln!(
            s,
            r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{}"/>"#,
            cx - cell / 2.0,
            cy - cell / 2.0,
            cell,
            cell,
            label_color(&sample.label)
        );
    }
    let pts: Vec<String> = verts
        .iter()
        .map(|&q| {
            let (x, y) = map(q);
            format!("{x:.3},{y:.3}")
        })
        .collect();
    let _ = writeln!(
        s,
        r##"<polygon points="{}" fill="none" stroke="#333333" stroke-width="2"/>"##,
        pts.join(" ")
    );
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::sampling::SplitMix64;
    use std::f64::consts::PI;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn lemma2_form_at_right_angle() {
        // θ = π/2: X = x²−y²−1, Y = (x+y)²−1, L = 2y.
        let m = lemma2_normal_form(PI / 2.0).unwrap();
        assert_eq!(m.epsilon, 0);
        let want_x = [-1.0, 0.0, 0.0, 1.0, 0.0, -1.0];
        let want_y = [-1.0, 0.0, 0.0, 1.0, 2.0, 1.0];
        for k in 0..6 {
            assert!(close(m.x[k], want_x[k], 1e-15), "X[{k}]");
            assert!(close(m.y[k], want_y[k], 1e-15), "Y[{k}]");
        }
        assert_eq!(m.l, [0.0, 0.0, 2.0]);
    }

    #[test]
    fn lemma2_form_at_straight_angle() {
        // θ = π: X = −2xy, Y = 2(x−1)(x+1) = 2x²−2, L = 2y.
        let m = lemma2_normal_form(PI).unwrap();
        assert!(close(m.x[4], -2.0, 1e-12));
        assert!(close(m.x[0], 0.0, 1e-15) && close(m.x[3], 0.0, 1e-15));
        assert!(close(m.y[0], -2.0, 1e-12) && close(m.y[3], 2.0, 1e-12));
        assert!(close(m.y[4], 0.0, 1e-12) && close(m.y[5], 0.0, 1e-12));
    }

    #[test]
    fn lemma2_rejects_degenerate_angle() {
        assert!(matches!(
            lemma2_normal_form(0.0),
            Err(ZoneMapError::DegenerateAngle)
        ));
        assert!(matches!(
            lemma2_normal_form(2.0 * PI),
            Err(ZoneMapError::DegenerateAngle)
        ));
        assert!(lemma2_normal_form(PI).is_ok());
    }

    #[test]
    fn lemma2_numeric_value() {
        // θ = π/2 at (0, −1): image (1, 0).
        let m = lemma2_normal_form(PI / 2.0).unwrap();
        let img = m.eval(Vec2::new(0.0, -1.0)).unwrap();
        assert!((img - Vec2::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn tau_matches_lemma2_in_canonical_frames() {
        let theta = PI / 2.0;
        let f1 = PlanarIsometry::rotation(theta, Vec2::new(1.0, 0.0));
        let fm1 = PlanarIsometry::rotation(theta, Vec2::new(-1.0, 0.0));
        let tau = tau_from_isometries(&f1, &fm1).unwrap();
        let lem = lemma2_normal_form(theta).unwrap();
        assert_eq!(tau.epsilon, 0);
        for k in 0..6 {
            assert!(close(tau.x[k], lem.x[k], 1e-12), "X[{k}]: {} vs {}", tau.x[k], lem.x[k]);
            assert!(close(tau.y[k], lem.y[k], 1e-12), "Y[{k}]");
        }
        for k in 0..3 {
            assert!(close(tau.l[k], lem.l[k], 1e-12), "L[{k}]");
        }
    }

    #[test]
    fn tau_agrees_with_lemma2_at_random_angles() {
        let mut rng = SplitMix64::new(12);
        for _ in 0..100 {
            let theta = 0.1 + rng.next_f64() * (PI - 0.2);
            let f1 = PlanarIsometry::rotation(theta, Vec2::new(1.0, 0.0));
            let fm1 = PlanarIsometry::rotation(theta, Vec2::new(-1.0, 0.0));
            let tau = tau_from_isometries(&f1, &fm1).unwrap();
            let lem = lemma2_normal_form(theta).unwrap();
            let x = rng.next_f64() * 4.0 - 2.0;
            let mut y = rng.next_f64() * 4.0 - 2.0;
            if y.abs() < 0.011 {
                y += 0.1;
            }
            let p = Vec2::new(x, y);
            let (a, b) = (tau.eval(p).unwrap(), lem.eval(p).unwrap());
            assert!(
                (a - b).norm() < 1e-10 * (1.0 + b.norm()),
                "θ={theta}: {a:?} vs {b:?}"
            );
        }
    }

    #[test]
    fn tau_equals_direct_circumcenter() {
        use crate::antipode::circumcenter;
        let mut rng = SplitMix64::new(77);
        for config in 0..10 {
            let th1 = 0.2 + rng.next_f64() * 2.5;
            let th2 = if config % 2 == 0 { th1 } else { 0.2 + rng.next_f64() * 2.5 };
            let c1 = Vec2::new(rng.next_f64() * 2.0 - 1.0, rng.next_f64() * 2.0 - 1.0);
            let c2 = Vec2::new(rng.next_f64() * 2.0 - 1.0, rng.next_f64() * 2.0 - 1.0);
            let f1 = PlanarIsometry::rotation(th1, c1);
            let fm1 = PlanarIsometry::rotation(th2, c2);
            let tau = tau_from_isometries(&f1, &fm1).unwrap();
            let mut checked = 0;
            while checked < 100 {
                let p = Vec2::new(rng.next_f64() * 6.0 - 3.0, rng.next_f64() * 6.0 - 3.0);
                let den = tau.denominator(p);
                if den.abs() < 1e-2 {
                    continue; // too near the locus for a fair comparison
                }
                let Ok(cc) = circumcenter(p, fm1.apply(p), f1.apply(p)) else {
                    continue;
                };
                let img = tau.eval(p).unwrap();
                let scale = cc.norm().max(1.0);
                assert!(
                    (img - cc).norm() < 1e-10 * scale,
                    "config {config}: {img:?} vs {cc:?}"
                );
                checked += 1;
            }
        }
    }

    #[test]
    fn locus_of_equal_angles_is_line_through_centers() {
        for theta in [0.5, PI / 2.0, 2.5] {
            let f1 = PlanarIsometry::rotation(theta, Vec2::new(1.0, 0.0));
            let fm1 = PlanarIsometry::rotation(theta, Vec2::new(-1.0, 0.0));
            let tau = tau_from_isometries(&f1, &fm1).unwrap();
            let locus = denominator_locus(&tau).unwrap();
            match locus {
                Locus::Line { .. } => {
                    for c in [Vec2::new(1.0, 0.0), Vec2::new(-1.0, 0.0)] {
                        assert!(locus.residual(c).abs() < 1e-12);
                    }
                }
                _ => panic!("expected a line"),
            }
        }
    }

    #[test]
    fn locus_of_distinct_angles_is_circle_through_three_centers() {
        // Rotations by π/2 about (0,0) and π/3 about (2,0). The circle passes
        // through both centers and the point where the two rotations agree:
        // center (1, 2+√3), radius² = 8 + 4√3, agreement point (−1−√3, 1+√3).
        let f1 = PlanarIsometry::rotation(PI / 2.0, Vec2::new(0.0, 0.0));
        let fm1 = PlanarIsometry::rotation(PI / 3.0, Vec2::new(2.0, 0.0));
        let tau = tau_from_isometries(&f1, &fm1).unwrap();
        assert_eq!(tau.epsilon, 1);
        let locus = denominator_locus(&tau).unwrap();
        let Locus::Circle { center, radius } = locus.clone() else {
            panic!("expected a circle");
        };
        let rt3 = 3.0_f64.sqrt();
        assert!((center - Vec2::new(1.0, 2.0 + rt3)).norm() < 1e-9);
        assert!((radius * radius - (8.0 + 4.0 * rt3)).abs() < 1e-9);
        let cp = classify_pair(&f1, &fm1).unwrap();
        assert_eq!(cp.centers.len(), 3);
        assert!((cp.centers[2] - Vec2::new(-1.0 - rt3, 1.0 + rt3)).norm() < 1e-9);
        for c in &cp.centers {
            assert!(locus.residual(*c).abs() < 1e-9, "center {c:?} off the locus");
        }
        // Direct circumcenter evaluation degenerates on the locus: the
        // denominator vanishes at sampled circle points.
        for p in locus.sample_points(8) {
            assert!(tau.denominator(p).abs() < 1e-9 * (1.0 + p.norm_squared()));
        }
    }

    #[test]
    fn empty_or_point_locus_detected() {
        // ε = 1 with x²+y²+1: empty real zero set.
        let m = RationalMapCoeffs {
            epsilon: 1,
            x: [0.0; 6],
            y: [0.0; 6],
            l: [1.0, 0.0, 0.0],
        };
        assert!(matches!(
            denominator_locus(&m),
            Err(ZoneMapError::EmptyOrPointLocus)
        ));
        // ε = 0 with constant L: no line.
        let m = RationalMapCoeffs {
            epsilon: 0,
            x: [0.0; 6],
            y: [0.0; 6],
            l: [1.0, 0.0, 0.0],
        };
        assert!(matches!(
            denominator_locus(&m),
            Err(ZoneMapError::EmptyOrPointLocus)
        ));
    }

    #[test]
    fn delta_examples() {
        let m = lemma2_normal_form(PI / 2.0).unwrap();
        // At (0, 1): image (−1, 0), δ = 2.
        assert!(close(delta(Vec2::new(0.0, 1.0), &m).unwrap(), 2.0, 1e-14));
        // At (0, −1): image (1, 0), δ = 2.
        assert!(close(delta(Vec2::new(0.0, -1.0), &m).unwrap(), 2.0, 1e-14));
        // On the locus y = 0.
        assert!(matches!(
            delta(Vec2::new(0.3, 0.0), &m),
            Err(ZoneMapError::OnLocus)
        ));
        // δ ≥ 0 wherever defined.
        let mut rng = SplitMix64::new(4);
        for _ in 0..100 {
            let p = Vec2::new(rng.next_f64() * 4.0 - 2.0, rng.next_f64() * 4.0 - 2.0);
            if let Ok(d) = delta(p, &m) {
                assert!(d >= 0.0);
            }
        }
    }

    #[test]
    fn fit_recovers_lemma2_map() {
        let m = lemma2_normal_form(1.0).unwrap();
        let mut samples = Vec::new();
        for i in 0..8 {
            for j in 0..8 {
                let p = Vec2::new(-1.5 + i as f64 * 0.4, 0.2 + j as f64 * 0.35);
                if let Ok(q) = m.eval(p) {
                    samples.push((p, q));
                }
            }
        }
        assert!(samples.len() >= 20);
        let fit = fit_zone_map(&samples).unwrap();
        assert!(fit.residual < 1e-10, "residual {}", fit.residual);
        assert_eq!(fit.coeffs.epsilon, 0);
        // Coefficients proportional: the canonical L-scaling makes them equal.
        for k in 0..6 {
            assert!(close(fit.coeffs.x[k], m.x[k], 1e-8), "X[{k}]");
            assert!(close(fit.coeffs.y[k], m.y[k], 1e-8), "Y[{k}]");
        }
        for k in 0..3 {
            assert!(close(fit.coeffs.l[k], m.l[k], 1e-8), "L[{k}]");
        }
    }

    #[test]
    fn fit_underdetermined_is_rank_deficient() {
        let m = lemma2_normal_form(1.0).unwrap();
        let samples: Vec<(Vec2, Vec2)> = (0..5)
            .map(|i| {
                let p = Vec2::new(0.3 * i as f64, 1.0 + 0.2 * i as f64);
                (p, m.eval(p).unwrap())
            })
            .collect();
        assert!(matches!(
            fit_zone_map(&samples),
            Err(ZoneMapError::RankDeficient)
        ));
    }

    #[test]
    fn scale_equivariance_of_circumcenter_map() {
        // Scaling centers and input by λ scales the output by λ.
        let theta = 0.9;
        let lam = 2.0;
        let tau1 = tau_from_isometries(
            &PlanarIsometry::rotation(theta, Vec2::new(1.0, 0.0)),
            &PlanarIsometry::rotation(theta, Vec2::new(-1.0, 0.0)),
        )
        .unwrap();
        let tau2 = tau_from_isometries(
            &PlanarIsometry::rotation(theta, Vec2::new(lam, 0.0)),
            &PlanarIsometry::rotation(theta, Vec2::new(-lam, 0.0)),
        )
        .unwrap();
        let p = Vec2::new(0.7, 1.3);
        let a = tau1.eval(p).unwrap();
        let b = tau2.eval(p * lam).unwrap();
        assert!((b - a * lam).norm() < 1e-12 * (1.0 + a.norm() * lam));
    }

    #[test]
    fn cube_face_zone_map_has_unique_interior_labels() {
        let p = fixtures::cube();
        let zm = sample_zone_map(&p, FaceId(5), 16, &AntipodeParams::default()).unwrap();
        assert!(!zm.samples.is_empty());
        // Interior samples away from the tie locus carry a unique non-Boundary
        // label; the boundary band stays a minority at this resolution.
        let frac = zm.boundary_fraction();
        assert!(frac < 0.5, "boundary fraction {frac}");
        assert!(!zm.label_set().is_empty());
        // SVG and JSON exports are well-formed and deterministic.
        let svg1 = zone_map_svg(&p, &zm);
        let svg2 = zone_map_svg(&p, &zm);
        assert_eq!(svg1, svg2);
        assert!(svg1.starts_with("<?xml"));
        assert!(svg1.contains("<polygon"));
        let js = zm.to_json();
        assert_eq!(js["face"], 5);
    }
}
