//! Primitives of the upper half-plane model: the conformal metric
//! `(dx² + dy²) / y²`, distances, Möbius isometries, Killing fields and
//! geodesics.
//!
//! Tangent vectors are always carried by their Euclidean components; the
//! hyperbolic length of `u` at `p` is `|u| / p.y`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        let p = Point { x, y };
        p.validate()?;
        Ok(p)
    }

    pub fn is_valid(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.y > 0.0
    }

    pub fn validate(&self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(Error::OutsideHalfPlane {
                x: self.x,
                y: self.y,
            })
        }
    }

    pub fn euclidean_distance(&self, other: &Point) -> f64 {
        let (dx, dy) = (self.x - other.x, self.y - other.y);
        (dx * dx + dy * dy).sqrt()
    }
}

/// Euclidean components of a tangent vector.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EucVector {
    pub u: f64,
    pub v: f64,
}

impl EucVector {
    pub const fn new(u: f64, v: f64) -> Self {
        EucVector { u, v }
    }

    pub fn dot(&self, other: &EucVector) -> f64 {
        self.u * other.u + self.v * other.v
    }

    pub fn norm(&self) -> f64 {
        self.u.hypot(self.v)
    }

    pub fn scale(&self, k: f64) -> EucVector {
        EucVector::new(self.u * k, self.v * k)
    }

    /// Counterclockwise rotation by a right angle.
    pub fn rotate_quarter(&self) -> EucVector {
        EucVector::new(-self.v, self.u)
    }
}

/// The three one-parameter isometry subgroups and their generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KillingKind {
    /// `H_t(z) = e^t z`
    Hyperbolic,
    /// `P_t(z) = z + t`
    Parabolic,
    /// `R_t(z) = (cos t z - sin t) / (sin t z + cos t)`, fixing `i`.
    Rotational,
}

impl KillingKind {
    pub const ALL: [KillingKind; 3] = [
        KillingKind::Hyperbolic,
        KillingKind::Parabolic,
        KillingKind::Rotational,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            KillingKind::Hyperbolic => "hyperbolic",
            KillingKind::Parabolic => "parabolic",
            KillingKind::Rotational => "rotational",
        }
    }
}

/// Orientation-preserving isometry `z ↦ (az + b) / (cz + d)` with `ad - bc = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobiusIsometry {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl MobiusIsometry {
    /// Normalizes the coefficients by `√(ad - bc)`; a non-positive
    /// determinant is rejected.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if !(det > 0.0) || !det.is_finite() {
            return Err(Error::NotOrientationPreserving { det });
        }
        let k = det.sqrt().recip();
        Ok(MobiusIsometry {
            a: a * k,
            b: b * k,
            c: c * k,
            d: d * k,
        })
    }

    pub fn identity() -> Self {
        MobiusIsometry {
            a: 1.0,
            b: 0.0,
            c: 0.0,
            d: 1.0,
        }
    }

    /// Element of parameter `t` in the subgroup generated by `kind`.
    pub fn subgroup(kind: KillingKind, t: f64) -> Self {
        match kind {
            KillingKind::Hyperbolic => {
                let h = (0.5 * t).exp();
                MobiusIsometry {
                    a: h,
                    b: 0.0,
                    c: 0.0,
                    d: h.recip(),
                }
            }
            KillingKind::Parabolic => MobiusIsometry {
                a: 1.0,
                b: t,
                c: 0.0,
                d: 1.0,
            },
            KillingKind::Rotational => {
                let (sin, cos) = t.sin_cos();
                MobiusIsometry {
                    a: cos,
                    b: -sin,
                    c: sin,
                    d: cos,
                }
            }
        }
    }

    pub fn coefficients(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn determinant(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    /// `T ∘ other`
    pub fn compose(&self, other: &MobiusIsometry) -> MobiusIsometry {
        MobiusIsometry {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }

    /// `cz + d` at `z = x + iy`, as (re, im).
    fn denominator(&self, p: &Point) -> (f64, f64) {
        (self.c * p.x + self.d, self.c * p.y)
    }
}

/// Hyperbolic inner product of two tangent vectors at `p`.
pub fn metric_inner(p: &Point, u: &EucVector, v: &EucVector) -> Result<f64> {
    p.validate()?;
    Ok(u.dot(v) / (p.y * p.y))
}

/// Hyperbolic norm of `u` at `p`.
pub fn hyperbolic_norm(p: &Point, u: &EucVector) -> Result<f64> {
    p.validate()?;
    Ok(u.norm() / p.y)
}

/// `arccosh(1 + |p - q|² / (2 p_y q_y))`, evaluated as `2 asinh(|p - q| / (2√(p_y q_y)))`
/// which keeps full relative precision for nearby points.
pub fn hyp_distance(p: &Point, q: &Point) -> Result<f64> {
    p.validate()?;
    q.validate()?;
    let chord = p.euclidean_distance(q);
    Ok(2.0 * (chord / (2.0 * (p.y * q.y).sqrt())).asinh())
}

/// Infinitesimal generator `d/dt|₀ T_t(z)` of the subgroup named by `kind`.
///
/// The rotational field is `−(1 + z²)`, i.e. `(−(1 + x² − y²), −2xy)`.
pub fn killing_field(kind: KillingKind, p: &Point) -> EucVector {
    let Point { x, y } = *p;
    match kind {
        KillingKind::Hyperbolic => EucVector::new(x, y),
        KillingKind::Parabolic => EucVector::new(1.0, 0.0),
        KillingKind::Rotational => EucVector::new(-(1.0 + x * x - y * y), -2.0 * x * y),
    }
}

pub fn apply_isometry(t: &MobiusIsometry, p: &Point) -> Result<Point> {
    p.validate()?;
    let (dr, di) = t.denominator(p);
    let den = dr * dr + di * di;
    if !(den > 0.0) {
        return Err(Error::OutsideHalfPlane { x: p.x, y: p.y });
    }
    // (az + b)(conj(cz + d)) / |cz + d|², imaginary part reduces to y·det.
    let nr = t.a * p.x + t.b;
    let ni = t.a * p.y;
    let x = (nr * dr + ni * di) / den;
    let y = p.y * t.determinant() / den;
    Point::new(x, y)
}

/// Differential of `t` at `p` applied to `u`: multiplication by `T'(z) = 1/(cz + d)²`.
pub fn pushforward(t: &MobiusIsometry, p: &Point, u: &EucVector) -> Result<EucVector> {
    p.validate()?;
    let (dr, di) = t.denominator(p);
    let den = dr * dr + di * di;
    if !(den > 0.0) {
        return Err(Error::OutsideHalfPlane { x: p.x, y: p.y });
    }
    // 1/(cz+d)² = conj(cz+d)² / |cz+d|⁴
    let den2 = den * den;
    let gr = (dr * dr - di * di) / den2;
    let gi = -2.0 * dr * di / den2;
    Ok(EucVector::new(gr * u.u - gi * u.v, gr * u.v + gi * u.u))
}

/// Point at parameter `t` on the geodesic with `η(0) = p` and `η'(0) = V`
/// (Euclidean components), traversed at constant hyperbolic speed `|V| / p.y`.
pub fn geodesic_point(p: &Point, velocity: &EucVector, t: f64) -> Result<Point> {
    p.validate()?;
    let EucVector { u: v, v: w } = *velocity;
    if v == 0.0 && w == 0.0 {
        return Err(Error::ZeroVelocity);
    }
    if !(v.is_finite() && w.is_finite()) {
        return Err(crate::error::invalid("velocity", "non-finite component"));
    }
    let q = if v == 0.0 {
        vertical_geodesic(p, w, t)
    } else if w == 0.0 {
        horizontal_geodesic(p, v, t)
    } else {
        general_geodesic(p, v, w, t)
    };
    q.validate()?;
    Ok(q)
}

/// `V = (0, w)`: the vertical half-line, `(x, y e^{wt/y})`.
fn vertical_geodesic(p: &Point, w: f64, t: f64) -> Point {
    Point {
        x: p.x,
        y: p.y * (w * t / p.y).exp(),
    }
}

/// `V = (v, 0)`: the semicircle centred below `p`, `(x + y tanh(σt), y / cosh(σt))`
/// with `σ = v / y`.
fn horizontal_geodesic(p: &Point, v: f64, t: f64) -> Point {
    let arg = v * t / p.y;
    Point {
        x: p.x + p.y * arg.tanh(),
        y: p.y / arg.cosh(),
    }
}

/// Semicircle through `p` with centre `a = x + (w/v) y` and Euclidean radius
/// `R = y|V|/|v|`, parametrized as `(a + R tanh(u₀ + σt), R sech(u₀ + σt))`
/// with `tanh u₀ = -w/|V|` and `σ = |V|/y`. Expanding with the addition
/// formulas removes `a` and `R`, which blow up as `v → 0`:
///
/// `x(t) = x + y (v/|V|) sinh(σt) / D`, `y(t) = y / D`,
/// `D = cosh(σt) - (w/|V|) sinh(σt)`.
///
/// Signed `v` covers the `v < 0` mirror case directly.
fn general_geodesic(p: &Point, v: f64, w: f64, t: f64) -> Point {
    let speed = v.hypot(w);
    let arg = speed * t / p.y;
    let (sh, ch) = (arg.sinh(), arg.cosh());
    let den = ch - (w / speed) * sh;
    Point {
        x: p.x + p.y * (v / speed) * sh / den,
        y: p.y / den,
    }
}

/// Euclidean centre and radius of the hyperbolic circle of radius `r` about `center`.
pub fn circle_to_euclidean(center: &Point, r: f64) -> Result<(Point, f64)> {
    center.validate()?;
    if !(r > 0.0) || !r.is_finite() {
        return Err(crate::error::invalid("radius", "must be positive"));
    }
    Ok((
        Point {
            x: center.x,
            y: center.y * r.cosh(),
        },
        center.y * r.sinh(),
    ))
}
