//! Exact arithmetic in Q[c,s,x,y]/(c²+s²−1) and the symbolic certificates
//! built on it.
//!
//! `c` and `s` stand for the cosine and sine of the unfolding angle; `x`, `y`
//! are free plane coordinates. Canonical form keeps the degree in `s` at most
//! one by rewriting `s² → 1 − c²`, which makes equality a coefficient check.
//! Coefficients are arbitrary-precision rationals; nothing in this module
//! ever rounds.
//!
//! Two certificates are provided: [`verify_lemma2`] re-derives the normal
//! form of the equal-angle circumcenter map from the perpendicular-bisector
//! equations and certifies the residuals vanish identically, and
//! [`verify_counterexample`] certifies that the two designated points are
//! both mapped to `(1, 0)`, the obstruction that rules out the antipodal map
//! being an involution.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SymtrigError {
    #[error("symbolic identity failed: {0}")]
    IdentityFails(String),
}

/// Monomial c^c · s^s · x^x · y^y. Canonical form has `s ≤ 1`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
struct Mono {
    c: u32,
    s: u32,
    x: u32,
    y: u32,
}

/// Element of Q[c,s,x,y]/(s² − (1 − c²)), in canonical form.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct TrigPoly {
    terms: BTreeMap<Mono, BigRational>,
}

fn big(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl TrigPoly {
    pub fn zero() -> Self {
        TrigPoly::default()
    }

    pub fn constant(n: i64) -> Self {
        let mut p = TrigPoly::default();
        if n != 0 {
            p.terms.insert(Mono { c: 0, s: 0, x: 0, y: 0 }, big(n));
        }
        p
    }

    pub fn one() -> Self {
        Self::constant(1)
    }

    fn var(c: u32, s: u32, x: u32, y: u32) -> Self {
        let mut p = TrigPoly::default();
        p.terms.insert(Mono { c, s, x, y }, big(1));
        p.reduce()
    }

    pub fn c() -> Self {
        Self::var(1, 0, 0, 0)
    }
    pub fn s() -> Self {
        Self::var(0, 1, 0, 0)
    }
    pub fn x() -> Self {
        Self::var(0, 0, 1, 0)
    }
    pub fn y() -> Self {
        Self::var(0, 0, 0, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Rewrite every `s^j` with `j ≥ 2` using `s² = 1 − c²` and drop zero
    /// coefficients. Idempotent.
    pub fn reduce(&self) -> TrigPoly {
        let mut out: BTreeMap<Mono, BigRational> = BTreeMap::new();
        for (m, coeff) in &self.terms {
            if coeff.is_zero() {
                continue;
            }
            let half = m.s / 2;
            let srem = m.s % 2;
            // (1 − c²)^half expanded binomially.
            let mut binom = BigInt::one();
            for k in 0..=half {
                let sign = if k % 2 == 0 { 1 } else { -1 };
                let mono = Mono {
                    c: m.c + 2 * k,
                    s: srem,
                    x: m.x,
                    y: m.y,
                };
                let add = coeff * BigRational::from_integer(&binom * BigInt::from(sign));
                let entry = out.entry(mono).or_insert_with(BigRational::zero);
                *entry += add;
                // next binomial coefficient C(half, k+1)
                if k < half {
                    binom = &binom * BigInt::from((half - k) as i64) / BigInt::from((k + 1) as i64);
                }
            }
        }
        out.retain(|_, c| !c.is_zero());
        TrigPoly { terms: out }
    }

    pub fn add(&self, other: &TrigPoly) -> TrigPoly {
        let mut out = self.terms.clone();
        for (m, c) in &other.terms {
            let entry = out.entry(*m).or_insert_with(BigRational::zero);
            *entry += c;
        }
        out.retain(|_, c| !c.is_zero());
        TrigPoly { terms: out }
    }

    pub fn neg(&self) -> TrigPoly {
        TrigPoly {
            terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect(),
        }
    }

    pub fn sub(&self, other: &TrigPoly) -> TrigPoly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &TrigPoly) -> TrigPoly {
        let mut out: BTreeMap<Mono, BigRational> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let mono = Mono {
                    c: ma.c + mb.c,
                    s: ma.s + mb.s,
                    x: ma.x + mb.x,
                    y: ma.y + mb.y,
                };
                let entry = out.entry(mono).or_insert_with(BigRational::zero);
                *entry += ca * cb;
            }
        }
        TrigPoly { terms: out }.reduce()
    }

    pub fn scale(&self, k: i64) -> TrigPoly {
        if k == 0 {
            return TrigPoly::zero();
        }
        TrigPoly {
            terms: self.terms.iter().map(|(m, c)| (*m, c * big(k))).collect(),
        }
    }

    /// Exact division by an integer.
    pub fn div_int(&self, k: i64) -> TrigPoly {
        assert!(k != 0);
        TrigPoly {
            terms: self.terms.iter().map(|(m, c)| (*m, c / big(k))).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> TrigPoly {
        let mut out = TrigPoly::one();
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// Substitute polynomials for `x` and `y` (`c`, `s` stay themselves).
    pub fn subst_xy(&self, px: &TrigPoly, py: &TrigPoly) -> TrigPoly {
        let mut out = TrigPoly::zero();
        for (m, coeff) in &self.terms {
            let mut term = TrigPoly {
                terms: BTreeMap::from([(
                    Mono { c: m.c, s: m.s, x: 0, y: 0 },
                    coeff.clone(),
                )]),
            };
            if m.x > 0 {
                term = term.mul(&px.pow(m.x));
            }
            if m.y > 0 {
                term = term.mul(&py.pow(m.y));
            }
            out = out.add(&term);
        }
        out.reduce()
    }

    /// Floating-point evaluation (used by the numeric bridge tests).
    pub fn eval(&self, c: f64, s: f64, x: f64, y: f64) -> f64 {
        let mut acc = 0.0;
        for (m, coeff) in &self.terms {
            let cf = rational_to_f64(coeff);
            acc += cf
                * c.powi(m.c as i32)
                * s.powi(m.s as i32)
                * x.powi(m.x as i32)
                * y.powi(m.y as i32);
        }
        acc
    }

    /// Serializable term list (canonical order).
    pub fn to_json(&self) -> PolyJson {
        PolyJson {
            terms: self
                .terms
                .iter()
                .map(|(m, coeff)| TermJson {
                    c: m.c,
                    s: m.s,
                    x: m.x,
                    y: m.y,
                    coeff: coeff.to_string(),
                })
                .collect(),
            is_zero: self.is_zero(),
            display: self.to_string(),
        }
    }
}

fn rational_to_f64(r: &BigRational) -> f64 {
    // Good enough for bridge tests: split into quotient and remainder to keep
    // precision for moderate magnitudes.
    let n = r.numer();
    let d = r.denom();
    let q = n / d;
    let rem = n - &q * d;
    let qf: f64 = q.to_string().parse().unwrap_or(f64::NAN);
    let remf: f64 = rem.to_string().parse().unwrap_or(f64::NAN);
    let df: f64 = d.to_string().parse().unwrap_or(f64::NAN);
    qf + remf / df
}

impl fmt::Display for TrigPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, coeff) in &self.terms {
            let neg = coeff.is_negative();
            let mag = coeff.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mut head = if mag.is_one() { String::new() } else { mag.to_string() };
            for (sym, e) in [("c", m.c), ("s", m.s), ("x", m.x), ("y", m.y)] {
                if e == 1 {
                    head += sym;
                } else if e > 1 {
                    head += &format!("{sym}^{e}");
                }
            }
            if head.is_empty() {
                head = mag.to_string();
            }
            write!(f, "{head}")?;
        }
        Ok(())
    }
}

impl std::ops::Add for &TrigPoly {
    type Output = TrigPoly;
    fn add(self, rhs: &TrigPoly) -> TrigPoly {
        TrigPoly::add(self, rhs)
    }
}
impl std::ops::Sub for &TrigPoly {
    type Output = TrigPoly;
    fn sub(self, rhs: &TrigPoly) -> TrigPoly {
        TrigPoly::sub(self, rhs)
    }
}
impl std::ops::Mul for &TrigPoly {
    type Output = TrigPoly;
    fn mul(self, rhs: &TrigPoly) -> TrigPoly {
        TrigPoly::mul(self, rhs)
    }
}

// ---------------------------------------------------------------------------
// The normal-form polynomials
// ---------------------------------------------------------------------------

/// `X(x,y) = 2xy·c + (x² − y² − 1)·s` of the equal-angle normal form.
pub fn normal_form_x() -> TrigPoly {
    let two_xy_c = TrigPoly::var(1, 0, 1, 1).scale(2);
    let quad = &(&TrigPoly::var(0, 0, 2, 0) - &TrigPoly::var(0, 0, 0, 2)) - &TrigPoly::one();
    two_xy_c.add(&quad.mul(&TrigPoly::s()))
}

/// `Y(x,y) = (1−c)x² + 2s·xy + (1+c)y² − (1−c)`, the expanded form of
/// `(1−c)(x + y·cot(θ/2) − 1)(x + y·cot(θ/2) + 1)`.
pub fn normal_form_y() -> TrigPoly {
    let one_minus_c = &TrigPoly::one() - &TrigPoly::c();
    let one_plus_c = &TrigPoly::one() + &TrigPoly::c();
    let mut out = one_minus_c.mul(&TrigPoly::var(0, 0, 2, 0));
    out = out.add(&TrigPoly::var(0, 1, 1, 1).scale(2));
    out = out.add(&one_plus_c.mul(&TrigPoly::var(0, 0, 0, 2)));
    out.sub(&one_minus_c)
}

/// `L(x,y) = 2y`.
pub fn normal_form_l() -> TrigPoly {
    TrigPoly::var(0, 0, 0, 1).scale(2)
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

#[derive(Serialize, Clone, Debug)]
pub struct TermJson {
    pub c: u32,
    pub s: u32,
    pub x: u32,
    pub y: u32,
    pub coeff: String,
}

#[derive(Serialize, Clone, Debug)]
pub struct PolyJson {
    pub terms: Vec<TermJson>,
    pub is_zero: bool,
    pub display: String,
}

#[derive(Serialize, Debug)]
pub struct Lemma2Report {
    /// Determinant of the 2×2 mediator system; equals `(2−2c)·y`.
    pub determinant: PolyJson,
    pub determinant_matches: bool,
    /// Numerators of the solved coordinates (before clearing `u²+v²`).
    pub xi_numerator: PolyJson,
    pub psi_numerator: PolyJson,
    /// `2·ξ_num − (u²+v²)·X` and `2·ψ_num − (u²+v²)·Y`; identically zero.
    pub residual_xi: PolyJson,
    pub residual_psi: PolyJson,
    pub ok: bool,
}

#[derive(Serialize, Debug)]
pub struct CounterexampleReport {
    /// `X(pᵢ) − L(pᵢ)` and `Y(pᵢ)` for the two points; all identically zero.
    pub residuals: Vec<PolyJson>,
    /// `L(p₁) = −2s`, `L(p₂) = 2s`: the denominators at the two points.
    pub denominators: Vec<PolyJson>,
    pub denominators_nonzero: bool,
    pub ok: bool,
}

#[derive(Serialize, Debug)]
pub struct ObstructionReport {
    pub theta: f64,
    pub p1: [f64; 2],
    pub p2: [f64; 2],
    pub q: [f64; 2],
    /// Images of p₁ and p₂ under the normal-form map; both equal `q`.
    pub image_p1: [f64; 2],
    pub image_p2: [f64; 2],
    /// `|p₁ − p₂| > 0`: a single-valued inverse would have to send `q` to
    /// both points at once.
    pub separation: f64,
}

/// Re-derive the equal-angle normal form from the two perpendicular-bisector
/// equations of the segments `p₀ fᵢ(p₀)` (`i = ±1`) and certify it.
///
/// With `u = c−1`, `v = s`, the half difference and half sum of the two
/// equations form a linear system in the unknown image `(ξ, ψ)`:
///
/// ```text
///      u·ξ +      v·ψ = −u·x + v·y
/// (ux−vy)·ξ + (uy+vx)·ψ = −u
/// ```
///
/// Cross-multiplication solves it exactly; after clearing the common factor
/// `u² + v² = 2 − 2c`, the solved coordinates match `X/2y` and `Y/2y`.
pub fn verify_lemma2() -> Result<Lemma2Report, SymtrigError> {
    let u = &TrigPoly::c() - &TrigPoly::one();
    let v = TrigPoly::s();
    let x = TrigPoly::x();
    let y = TrigPoly::y();

    // Mediator of p₀ fᵢ(p₀) in coordinates (ξ, ψ):
    //   aᵢ ξ + bᵢ ψ + dᵢ = 0, with
    //   aᵢ = u(x−i) − v y, bᵢ = u y + v(x−i), dᵢ = i v y + u(1 − i x).
    let build = |i: i64| {
        let xi = &x - &TrigPoly::constant(i);
        let a = &u.mul(&xi) - &v.mul(&y);
        let b = &u.mul(&y) + &v.mul(&xi);
        let d = &v.mul(&y).scale(i) + &u.mul(&(&TrigPoly::one() - &x.scale(i)));
        (a, b, d)
    };
    let (a_p, b_p, d_p) = build(1);
    let (a_m, b_m, d_m) = build(-1);

    // Half difference and half sum, constants moved to the right-hand side.
    // The difference row is taken as (E₋₁ − E₁)/2 so it reads
    // u·ξ + v·ψ = −ux + vy.
    let a1 = a_m.sub(&a_p).div_int(2);
    let b1 = b_m.sub(&b_p).div_int(2);
    let r1 = d_m.sub(&d_p).div_int(2).neg();
    let a2 = a_p.add(&a_m).div_int(2);
    let b2 = b_p.add(&b_m).div_int(2);
    let r2 = d_p.add(&d_m).div_int(2).neg();

    let det = &a1.mul(&b2) - &a2.mul(&b1);
    let xi_num = &r1.mul(&b2) - &r2.mul(&b1);
    let psi_num = &a1.mul(&r2) - &a2.mul(&r1);

    // det = (u² + v²)·y = (2 − 2c)·y
    let uu_vv = u.mul(&u).add(&v.mul(&v));
    let det_expected = (&TrigPoly::constant(2) - &TrigPoly::c().scale(2)).mul(&y);
    let determinant_matches = det == det_expected && det == uu_vv.mul(&y);

    // ξ = xi_num / det = X / (2y)  ⇔  2·xi_num − (u²+v²)·X = 0 (cleared y).
    let residual_xi = xi_num.scale(2).sub(&uu_vv.mul(&normal_form_x()));
    let residual_psi = psi_num.scale(2).sub(&uu_vv.mul(&normal_form_y()));

    let ok = determinant_matches && residual_xi.is_zero() && residual_psi.is_zero();
    let report = Lemma2Report {
        determinant: det.to_json(),
        determinant_matches,
        xi_numerator: xi_num.to_json(),
        psi_numerator: psi_num.to_json(),
        residual_xi: residual_xi.to_json(),
        residual_psi: residual_psi.to_json(),
        ok,
    };
    if !ok {
        return Err(SymtrigError::IdentityFails(format!(
            "normal-form derivation residuals: xi={}, psi={}, det={}",
            report.residual_xi.display, report.residual_psi.display, report.determinant.display
        )));
    }
    Ok(report)
}

/// Certify that the normal-form map `G = (X, Y)/2y` sends both
/// `p₁ = (c, −s)` and `p₂ = (−c−2, s)` to `q = (1, 0)`, for every angle at
/// once: `X(pᵢ) − L(pᵢ) ≡ 0` and `Y(pᵢ) ≡ 0` in the ring, with the
/// denominators `L(pᵢ) = ∓2s` not identically zero.
pub fn verify_counterexample() -> Result<CounterexampleReport, SymtrigError> {
    let xx = normal_form_x();
    let yy = normal_form_y();
    let ll = normal_form_l();

    let p1 = (TrigPoly::c(), TrigPoly::s().neg());
    let p2 = (
        &TrigPoly::c().neg() - &TrigPoly::constant(2),
        TrigPoly::s(),
    );

    let mut residuals = Vec::new();
    let mut denominators = Vec::new();
    let mut ok = true;
    for (px, py) in [&p1, &p2] {
        let den = ll.subst_xy(px, py);
        let rx = xx.subst_xy(px, py).sub(&den);
        let ry = yy.subst_xy(px, py);
        ok &= rx.is_zero() && ry.is_zero() && !den.is_zero();
        residuals.push(rx.to_json());
        residuals.push(ry.to_json());
        denominators.push(den.to_json());
    }
    let denominators_nonzero = denominators.iter().all(|d| !d.is_zero);
    let report = CounterexampleReport {
        residuals,
        denominators,
        denominators_nonzero,
        ok,
    };
    if !ok {
        return Err(SymtrigError::IdentityFails(format!(
            "counterexample residuals: {:?}",
            report
                .residuals
                .iter()
                .map(|r| r.display.clone())
                .collect::<Vec<_>>()
        )));
    }
    Ok(report)
}

/// Numeric demonstration that no single-valued rational map can invert the
/// normal-form map: it merges `p₁` and `p₂` into one point `q`, and the two
/// preimages stay a positive distance apart for every θ ∈ (0, π).
pub fn involution_obstruction_demo(theta: f64) -> ObstructionReport {
    let (s, c) = theta.sin_cos();
    let p1 = [c, -s];
    let p2 = [-c - 2.0, s];
    let q = [1.0, 0.0];
    let xx = normal_form_x();
    let yy = normal_form_y();
    let image = |p: [f64; 2]| {
        let den = 2.0 * p[1];
        [
            xx.eval(c, s, p[0], p[1]) / den,
            yy.eval(c, s, p[0], p[1]) / den,
        ]
    };
    let separation = ((p1[0] - p2[0]).powi(2) + (p1[1] - p2[1]).powi(2)).sqrt();
    ObstructionReport {
        theta,
        p1,
        p2,
        q,
        image_p1: image(p1),
        image_p2: image(p2),
        separation,
    }
}
