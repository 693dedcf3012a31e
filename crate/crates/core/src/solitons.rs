//! Solitons: curves that the flow moves by a one-parameter isometry subgroup.
//!
//! A curve is a soliton for the Killing field `X` exactly when its curvature
//! is `κ = ⟨N, X⟩`. With the unit tangent written `T = y (cos θ, sin θ)` and
//! `s` hyperbolic arclength this becomes the system
//!
//! ```text
//! x' = y cos θ,   y' = y sin θ,   θ' = κ − cos θ
//! ```
//!
//! which [`integrate_soliton`] solves with the classical Runge–Kutta method.

use serde::{Deserialize, Serialize};

use crate::curves::DiscreteCurve;
use crate::error::{invalid, Error, Result};
use crate::front_tracking::advance;
use crate::hypgeo::{
    apply_isometry, hyp_distance, killing_field, metric_inner, EucVector, KillingKind,
    MobiusIsometry, Point,
};

/// Integration stops once a node comes this close to the ideal boundary.
pub const MIN_Y: f64 = 1e-9;

/// Position and Euclidean tangent angle of a unit-speed curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolitonState {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl SolitonState {
    pub fn new(x: f64, y: f64, theta: f64) -> Result<Self> {
        let s = SolitonState { x, y, theta };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        self.point().validate()?;
        if !self.theta.is_finite() {
            return Err(invalid(
                "theta",
                format!("must be finite, got {}", self.theta),
            ));
        }
        Ok(())
    }

    pub fn point(&self) -> Point {
        Point {
            x: self.x,
            y: self.y,
        }
    }

    /// Unit normal `y (−sin θ, cos θ)`, the tangent turned a quarter to the left.
    pub fn normal(&self) -> EucVector {
        let (s, c) = self.theta.sin_cos();
        EucVector::new(-self.y * s, self.y * c)
    }

    /// `θ` reduced to `[0, 2π)`.
    pub fn wrapped_theta(&self) -> f64 {
        self.theta.rem_euclid(std::f64::consts::TAU)
    }
}

/// Derivative of a [`SolitonState`] with respect to arclength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateRate {
    pub dx: f64,
    pub dy: f64,
    pub dtheta: f64,
}

/// `⟨N, X⟩` for the Killing field of `kind`, with `N` the normal at angle `θ`.
///
/// `NaN` if `p` is not in the half-plane.
pub fn soliton_curvature(kind: KillingKind, p: &Point, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    let normal = EucVector::new(-p.y * s, p.y * c);
    metric_inner(p, &normal, &killing_field(kind, p)).unwrap_or(f64::NAN)
}

pub fn soliton_rhs(kind: KillingKind, state: &SolitonState) -> StateRate {
    let (s, c) = state.theta.sin_cos();
    let kappa = soliton_curvature(kind, &state.point(), state.theta);
    StateRate {
        dx: state.y * c,
        dy: state.y * s,
        dtheta: kappa - c,
    }
}

fn rk4_step(kind: KillingKind, s: &SolitonState, h: f64) -> SolitonState {
    let shift = |r: &StateRate, k: f64| SolitonState {
        x: s.x + k * r.dx,
        y: s.y + k * r.dy,
        theta: s.theta + k * r.dtheta,
    };
    let k1 = soliton_rhs(kind, s);
    let k2 = soliton_rhs(kind, &shift(&k1, 0.5 * h));
    let k3 = soliton_rhs(kind, &shift(&k2, 0.5 * h));
    let k4 = soliton_rhs(kind, &shift(&k3, h));
    let w = h / 6.0;
    SolitonState {
        x: s.x + w * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx),
        y: s.y + w * (k1.dy + 2.0 * k2.dy + 2.0 * k3.dy + k4.dy),
        theta: s.theta + w * (k1.dtheta + 2.0 * k2.dtheta + 2.0 * k3.dtheta + k4.dtheta),
    }
}

/// An integrated soliton: nodes at equal arclength steps with their states.
#[derive(Debug, Clone, PartialEq)]
pub struct SolitonCurve {
    pub kind: KillingKind,
    /// Open curve through the states.
    pub curve: DiscreteCurve,
    pub states: Vec<SolitonState>,
    /// Arclength of each node, `0` at the initial state.
    pub s: Vec<f64>,
}

/// Integrates the soliton through `state0` over `s ∈ [−s_span, s_span]`.
///
/// The step is the largest one not exceeding `h` that divides `s_span`
/// evenly, so the curve ends exactly at `±s_span`.
pub fn integrate_soliton(
    kind: KillingKind,
    state0: &SolitonState,
    s_span: f64,
    h: f64,
) -> Result<SolitonCurve> {
    state0.validate()?;
    if !(s_span > 0.0 && s_span.is_finite()) {
        return Err(invalid("s_span", format!("must be positive, got {s_span}")));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(invalid("h", format!("must be positive, got {h}")));
    }
    let steps = (s_span / h).ceil() as usize;
    let h = s_span / steps as f64;
    let run = |dir: f64| -> Result<Vec<SolitonState>> {
        let mut out = Vec::with_capacity(steps);
        let mut s = *state0;
        for i in 1..=steps {
            s = rk4_step(kind, &s, dir * h);
            if !(s.y >= MIN_Y) || !s.x.is_finite() || !s.theta.is_finite() {
                return Err(Error::IdealBoundary {
                    s: dir * i as f64 * h,
                });
            }
            out.push(s);
        }
        Ok(out)
    };
    let backward = run(-1.0)?;
    let forward = run(1.0)?;
    let states: Vec<SolitonState> = backward
        .into_iter()
        .rev()
        .chain(std::iter::once(*state0))
        .chain(forward)
        .collect();
    let s = (0..states.len())
        .map(|i| (i as f64 - steps as f64) * h)
        .collect();
    let curve = DiscreteCurve::new(states.iter().map(SolitonState::point).collect(), false)?;
    Ok(SolitonCurve {
        kind,
        curve,
        states,
        s,
    })
}

/// Nodes at each open end left out of [`verify_soliton_by_isometry`]: their
/// curvature is extrapolated, not measured.
pub const VERIFY_END_SKIP: usize = 2;

/// How far one flow step of size `dt` lands from moving `c` by the isometry
/// `kind` with parameter `dt`.
///
/// Returns the largest hyperbolic distance from an evolved node to the
/// isometry-moved polygon. End nodes of open curves, and nodes whose nearest
/// point is an end of the moved polygon (they have run past it), are skipped.
pub fn verify_soliton_by_isometry(c: &DiscreteCurve, kind: KillingKind, dt: f64) -> Result<f64> {
    let evolved = advance(c, dt)?;
    let t = MobiusIsometry::subgroup(kind, dt);
    let moved = c.try_map(|p| apply_isometry(&t, p))?;
    let n = c.len();
    let skip = if c.is_closed() { 0 } else { VERIFY_END_SKIP };
    if n <= 2 * skip {
        return Err(Error::TooFewNodes {
            got: n,
            min: 2 * skip + 1,
            kind: "open",
        });
    }
    let mut worst = 0.0f64;
    for p in &evolved.nodes()[skip..n - skip] {
        if let Some(q) = nearest_on_polygon(&moved, p) {
            worst = worst.max(hyp_distance(p, &q)?);
        }
    }
    Ok(worst)
}

/// Euclidean-nearest point to `p` on the polygon, or `None` if that point is
/// an end of an open polygon.
fn nearest_on_polygon(c: &DiscreteCurve, p: &Point) -> Option<Point> {
    let nodes = c.nodes();
    let n = nodes.len();
    let mut best: Option<(f64, Point, bool)> = None;
    for k in 0..c.segment_count() {
        let (a, b) = (&nodes[k], &nodes[(k + 1) % n]);
        let (dx, dy) = (b.x - a.x, b.y - a.y);
        let f = ((p.x - a.x) * dx + (p.y - a.y) * dy) / (dx * dx + dy * dy);
        let clamped = f.clamp(0.0, 1.0);
        let q = Point {
            x: a.x + clamped * dx,
            y: a.y + clamped * dy,
        };
        let at_end = !c.is_closed() && ((k == 0 && f < 0.0) || (k + 2 == n && f > 1.0));
        let d = (q.x - p.x).powi(2) + (q.y - p.y).powi(2);
        if best.is_none_or(|(bd, _, _)| d < bd) {
            best = Some((d, q, at_end));
        }
    }
    best.and_then(|(_, q, at_end)| (!at_end).then_some(q))
}

/// Initial state and span of the gallery curve for `kind`; the spans keep
/// every curve above `y = 1e-3`.
pub fn gallery_start(kind: KillingKind) -> (SolitonState, f64) {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
    match kind {
        KillingKind::Parabolic => (
            SolitonState {
                x: 0.0,
                y: 1.0,
                theta: FRAC_PI_2,
            },
            3.0,
        ),
        KillingKind::Hyperbolic => (
            SolitonState {
                x: 0.0,
                y: 1.0,
                theta: FRAC_PI_4,
            },
            3.0,
        ),
        KillingKind::Rotational => (
            SolitonState {
                x: 0.0,
                y: 2.0,
                theta: 0.0,
            },
            3.0,
        ),
    }
}
