//! Closed-form solutions of the curve shortening flow and a residual checker
//! that certifies a parametrized family `γ(t, s)` actually solves it.
//!
//! Radial families (circle, horocycle, equidistant) are Euclidean circles
//! shrinking toward `(0, 1)`, `(0, 0)` and the geodesic of radius `k`
//! respectively. The translation families move a Euclidean straight line by a
//! one-parameter group of isometries.

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::curves::{curvature_profile, DiscreteCurve};
use crate::error::{invalid, Error, Result};
use crate::hypgeo::{metric_inner, EucVector, Point};

/// Time step used for the central difference in `t` by [`csf_residual`].
pub const RESIDUAL_DT: f64 = 1e-5;

/// Points of radial embeddings closer than this to the ideal boundary are
/// excluded from default parameter spans.
const BOUNDARY_EPS: f64 = 1e-9;

/// Radius of the geodesic circle after time `t` of flow.
///
/// `r(t) = arccosh(cosh(R) e^{-t})`, defined until `t_max = ln cosh R`.
pub fn circle_flow(radius: f64, t: f64) -> Result<f64> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(invalid("radius", format!("must be positive, got {radius}")));
    }
    let t_max = circle_t_max(radius);
    if t >= t_max {
        return Err(Error::Collapsed { t, t_max });
    }
    // cosh r = 1 + ε with ε = cosh(R) e^{-t} − 1, and r = 2 asinh(√(ε/2)) keeps
    // full precision as r → 0
    let excess = (t_max - t).exp_m1();
    Ok(2.0 * (0.5 * excess).sqrt().asinh())
}

/// Collapse time `ln cosh R` of the geodesic circle of radius `R`.
pub fn circle_t_max(radius: f64) -> f64 {
    // ln cosh R = R + ln(1 + e^{-2R}) − ln 2, stable for large R
    radius + (-2.0 * radius).exp().ln_1p() - std::f64::consts::LN_2
}

/// Euclidean radius `R e^{-t}` of the horocycle tangent to the origin.
pub fn horocycle_flow(radius: f64, t: f64) -> Result<f64> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(invalid("radius", format!("must be positive, got {radius}")));
    }
    Ok(radius * (-t).exp())
}

/// Euclidean radius `√(k² + (R² − k²) e^{-2t})` of the equidistant circle
/// through `(±k, 0)`.
pub fn equidistant_flow(radius: f64, k: f64, t: f64) -> Result<f64> {
    check_equidistant(radius, k)?;
    Ok((k * k + (radius * radius - k * k) * (-2.0 * t).exp()).sqrt())
}

fn check_equidistant(radius: f64, k: f64) -> Result<()> {
    if !(k > 0.0 && k < radius) || !radius.is_finite() {
        return Err(invalid(
            "k",
            format!("need 0 < k < radius, got k={k}, radius={radius}"),
        ));
    }
    Ok(())
}

/// A named closed-form solution of the flow.
///
/// Every family is evaluated as `γ(t, s)`; the meaning of `s` depends on the
/// kind (polar angle for radial families, a linear parameter for the others).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AnalyticFamily {
    /// The static vertical geodesic `(x, e^s)`.
    Geodesic { x: f64 },
    /// Geodesic circle centered at `(0, 1)` with initial radius `radius`.
    Circle { radius: f64 },
    /// Horocycle `(0, r) + r(cos s, sin s)` with `r(0) = radius`.
    Horocycle { radius: f64 },
    /// Equidistant circle `(0, √(r² − k²)) + r(cos s, sin s)`.
    Equidistant { radius: f64, k: f64 },
    /// `(a s + c, (b s + d) e^t)`: a line moved by the hyperbolic subgroup.
    TransVertical { a: f64, b: f64, c: f64, d: f64 },
    /// Translation along the horizontal geodesic direction, defined for `s < m`.
    TransHorizontal { m: f64 },
    /// Translation along the geodesic direction `(v, w)`, normalized to unit length.
    TransGeneral { v: f64, w: f64, m: f64 },
}

impl AnalyticFamily {
    pub fn name(&self) -> &'static str {
        match self {
            AnalyticFamily::Geodesic { .. } => "geodesic",
            AnalyticFamily::Circle { .. } => "circle",
            AnalyticFamily::Horocycle { .. } => "horocycle",
            AnalyticFamily::Equidistant { .. } => "equidistant",
            AnalyticFamily::TransVertical { .. } => "trans_vertical",
            AnalyticFamily::TransHorizontal { .. } => "trans_horizontal",
            AnalyticFamily::TransGeneral { .. } => "trans_general",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |name: &'static str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(invalid(name, format!("must be finite, got {v}")))
            }
        };
        match *self {
            AnalyticFamily::Geodesic { x } => finite("x", x),
            AnalyticFamily::Circle { radius } | AnalyticFamily::Horocycle { radius } => {
                if radius > 0.0 && radius.is_finite() {
                    Ok(())
                } else {
                    Err(invalid("radius", format!("must be positive, got {radius}")))
                }
            }
            AnalyticFamily::Equidistant { radius, k } => check_equidistant(radius, k),
            AnalyticFamily::TransVertical { a, b, c, d } => {
                for (name, v) in [("a", a), ("b", b), ("c", c), ("d", d)] {
                    finite(name, v)?;
                }
                if a == 0.0 && b == 0.0 {
                    return Err(invalid("a", "a and b cannot both vanish"));
                }
                Ok(())
            }
            AnalyticFamily::TransHorizontal { m } => finite("m", m),
            AnalyticFamily::TransGeneral { v, w, m } => {
                for (name, val) in [("v", v), ("w", w), ("m", m)] {
                    finite(name, val)?;
                }
                if v == 0.0 {
                    return Err(invalid("v", "must be nonzero"));
                }
                Ok(())
            }
        }
    }

    /// Whether the fixed-time slices are closed curves.
    pub fn is_closed(&self) -> bool {
        matches!(self, AnalyticFamily::Circle { .. })
    }

    /// Finite extinction time, if any.
    pub fn t_max(&self) -> Option<f64> {
        match *self {
            AnalyticFamily::Circle { radius } => Some(circle_t_max(radius)),
            _ => None,
        }
    }

    /// `γ(t, s)`.
    pub fn point(&self, t: f64, s: f64) -> Result<Point> {
        self.validate()?;
        let (x, y) = match *self {
            AnalyticFamily::Geodesic { x } => (x, s.exp()),
            AnalyticFamily::Circle { radius } => {
                let r = circle_flow(radius, t)?;
                (r.sinh() * s.cos(), r.cosh() + r.sinh() * s.sin())
            }
            AnalyticFamily::Horocycle { radius } => {
                let r = horocycle_flow(radius, t)?;
                (r * s.cos(), r + r * s.sin())
            }
            AnalyticFamily::Equidistant { radius, k } => {
                let r = equidistant_flow(radius, k, t)?;
                let h = ((r - k) * (r + k)).sqrt();
                (r * s.cos(), h + r * s.sin())
            }
            AnalyticFamily::TransVertical { a, b, c, d } => (a * s + c, (b * s + d) * t.exp()),
            AnalyticFamily::TransHorizontal { m } => horizontal_xy(m, t, s),
            AnalyticFamily::TransGeneral { v, w, m } => {
                let (v, w) = normalize_direction(v, w)?;
                general_xy(v, w, m, t, s)
            }
        };
        Point::new(x, y).map_err(|_| Error::IdealBoundary { s })
    }

    /// Parameter interval used when sampling a slice at time `t`. Closed
    /// slices use `[0, 2π)`; open ones stay clear of the ideal boundary.
    pub fn default_span(&self, t: f64) -> Result<(f64, f64)> {
        self.validate()?;
        Ok(match *self {
            AnalyticFamily::Geodesic { .. } => (-1.0, 1.0),
            AnalyticFamily::Circle { .. } => (0.0, TAU),
            AnalyticFamily::Horocycle { .. } => {
                let r = horocycle_flow_unchecked(self, t);
                // y = r(1 + sin s) ≥ BOUNDARY_EPS away from s = −π/2
                let gap = arc_gap(BOUNDARY_EPS / r).max(0.3);
                (-FRAC_PI_2 + gap, 3.0 * FRAC_PI_2 - gap)
            }
            AnalyticFamily::Equidistant { radius, k } => {
                let r = equidistant_flow(radius, k, t)?;
                let h = ((r - k) * (r + k)).sqrt();
                let alpha = (h / r).asin();
                let margin = 0.05 * (PI + 2.0 * alpha);
                (-alpha + margin, PI + alpha - margin)
            }
            AnalyticFamily::TransVertical { b, d, .. } => {
                if b == 0.0 {
                    (-1.0, 1.0)
                } else {
                    let root = -d / b;
                    let dir = b.signum();
                    let (lo, hi) = (root + dir * 0.25, root + dir * 2.25);
                    (lo.min(hi), lo.max(hi))
                }
            }
            AnalyticFamily::TransHorizontal { m } => (m - 3.0, m - 0.1),
            AnalyticFamily::TransGeneral { v, w, m } => {
                let (v, w) = normalize_direction(v, w)?;
                // y > 0 iff m + s(w − 1)/v > 0
                let root = m * v / (1.0 - w);
                if v > 0.0 {
                    (root - 3.0, root - 0.1)
                } else {
                    (root + 0.1, root + 3.0)
                }
            }
        })
    }

    /// Parameter values of an `n`-node slice over the default span.
    pub fn s_grid(&self, t: f64, n: usize) -> Result<Vec<f64>> {
        let (lo, hi) = self.default_span(t)?;
        Ok(if self.is_closed() {
            (0..n)
                .map(|i| lo + (hi - lo) * i as f64 / n as f64)
                .collect()
        } else {
            let last = n.saturating_sub(1).max(1) as f64;
            (0..n).map(|i| lo + (hi - lo) * i as f64 / last).collect()
        })
    }

    /// The fixed-time curve sampled at `n` nodes.
    pub fn slice(&self, t: f64, n: usize) -> Result<DiscreteCurve> {
        let s = self.s_grid(t, n)?;
        sample(|s| self.point(t, s), &s, self.is_closed())
    }

    /// Geodesic curvature of the slice at time `t`, traversed in the
    /// direction of increasing `s`.
    pub fn exact_curvature(&self, t: f64) -> Result<f64> {
        self.validate()?;
        Ok(match *self {
            AnalyticFamily::Geodesic { .. } => 0.0,
            AnalyticFamily::Circle { radius } => 1.0 / circle_flow(radius, t)?.tanh(),
            AnalyticFamily::Horocycle { .. } => 1.0,
            AnalyticFamily::Equidistant { radius, k } => {
                let r = equidistant_flow(radius, k, t)?;
                ((r - k) * (r + k)).sqrt() / r
            }
            // Euclidean lines: κ = cos θ of the direction (a, b e^t)
            AnalyticFamily::TransVertical { a, b, .. } => {
                let by = b * t.exp();
                a / a.hypot(by)
            }
            AnalyticFamily::TransHorizontal { .. } => 1.0 / (1.0 + (2.0 * t).exp()).sqrt(),
            AnalyticFamily::TransGeneral { v, w, .. } => {
                let (v, w) = normalize_direction(v, w)?;
                // x increases with s, so κ = cos θ > 0 regardless of sign(v)
                v.abs() / (v * v + (2.0 * t).exp() * (w - 1.0).powi(2)).sqrt()
            }
        })
    }

    /// CSF residual of this family at time `t` on an `n`-node slice.
    pub fn residual(&self, t: f64, n: usize) -> Result<Vec<f64>> {
        let s = self.s_grid(t, n)?;
        csf_residual(|t, s| self.point(t, s), t, &s, self.is_closed())
    }
}

fn horocycle_flow_unchecked(f: &AnalyticFamily, t: f64) -> f64 {
    match *f {
        AnalyticFamily::Horocycle { radius } => radius * (-t).exp(),
        _ => unreachable!(),
    }
}

/// Angular distance from `−π/2` at which `1 + sin s` reaches `eps`.
fn arc_gap(eps: f64) -> f64 {
    (2.0 * eps.min(2.0)).sqrt()
}

fn normalize_direction(v: f64, w: f64) -> Result<(f64, f64)> {
    let n = v.hypot(w);
    if v == 0.0 || n == 0.0 {
        return Err(invalid("v", "must be nonzero"));
    }
    Ok((v / n, w / n))
}

/// `(a s + c, (b s + d) e^t)`.
pub fn translation_flow_vertical(a: f64, b: f64, c: f64, d: f64, t: f64, s: f64) -> Result<Point> {
    AnalyticFamily::TransVertical { a, b, c, d }.point(t, s)
}

/// `(s + (m − s) tanh t, (m − s) / cosh t)`, defined for `s < m`.
pub fn translation_flow_horizontal(m: f64, t: f64, s: f64) -> Result<Point> {
    AnalyticFamily::TransHorizontal { m }.point(t, s)
}

/// Translation of a line along the geodesic direction `(v, w)`; `(v, w)` is
/// normalized to unit length first.
pub fn translation_flow_general(v: f64, w: f64, m: f64, t: f64, s: f64) -> Result<Point> {
    AnalyticFamily::TransGeneral { v, w, m }.point(t, s)
}

fn horizontal_xy(m: f64, t: f64, s: f64) -> (f64, f64) {
    (s + (m - s) * t.tanh(), (m - s) / t.cosh())
}

fn general_xy(v: f64, w: f64, m: f64, t: f64, s: f64) -> (f64, f64) {
    let e2 = (2.0 * t).exp();
    let den = (w + 1.0) - e2 * (w - 1.0);
    let x = (m * (e2 - 1.0) * v + 2.0 * s) / den;
    let y = 2.0 * t.exp() * (m + s * (w - 1.0) / v) / den;
    (x, y)
}

/// Evaluates `γ` on a parameter grid and builds the curve.
pub fn sample(
    gamma: impl Fn(f64) -> Result<Point>,
    s_grid: &[f64],
    closed: bool,
) -> Result<DiscreteCurve> {
    let nodes = s_grid
        .iter()
        .map(|&s| gamma(s))
        .collect::<Result<Vec<_>>>()?;
    DiscreteCurve::new(nodes, closed)
}

/// Per-node residual `⟨∂_t γ, N⟩ − κ` of the flow equation at time `t`.
///
/// `∂_t γ` is a central difference with step [`RESIDUAL_DT`]; `κ` and `N` come
/// from [`curvature_profile`] of the fixed-`t` slice. Values near zero certify
/// that `γ` solves the curve shortening flow.
pub fn csf_residual(
    gamma: impl Fn(f64, f64) -> Result<Point>,
    t: f64,
    s_grid: &[f64],
    closed: bool,
) -> Result<Vec<f64>> {
    let h = RESIDUAL_DT;
    let curve = sample(|s| gamma(t, s), s_grid, closed)?;
    let frame = curvature_profile(&curve)?;
    s_grid
        .iter()
        .zip(curve.nodes())
        .enumerate()
        .map(|(i, (&s, p))| {
            let fwd = gamma(t + h, s)?;
            let bwd = gamma(t - h, s)?;
            let dt = EucVector::new((fwd.x - bwd.x) / (2.0 * h), (fwd.y - bwd.y) / (2.0 * h));
            Ok(metric_inner(p, &dt, &frame.normal[i])? - frame.kappa[i])
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::enclosed_area;

    fn max_abs(v: &[f64]) -> f64 {
        v.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    fn all_families() -> Vec<AnalyticFamily> {
        vec![
            AnalyticFamily::Geodesic { x: 0.5 },
            AnalyticFamily::Circle { radius: 1.0 },
            AnalyticFamily::Horocycle { radius: 1.0 },
            AnalyticFamily::Equidistant {
                radius: 2.0,
                k: 1.0,
            },
            AnalyticFamily::TransVertical {
                a: 1.0,
                b: 0.5,
                c: 0.0,
                d: 1.0,
            },
            AnalyticFamily::TransHorizontal { m: 1.0 },
            AnalyticFamily::TransGeneral {
                v: 0.6,
                w: 0.8,
                m: 1.0,
            },
        ]
    }

    #[test]
    fn circle_flow_examples() {
        assert_eq!(circle_flow(1.0, 0.0).unwrap(), 1.0);
        let want = (1f64.cosh() * (-0.2f64).exp()).acosh();
        assert!((circle_flow(1.0, 0.2).unwrap() - want).abs() < 1e-14);
        assert!((want - 0.710713).abs() < 1e-6);
        assert!((circle_t_max(1.0) - 1f64.cosh().ln()).abs() < 1e-15);
        assert!((circle_t_max(1.0) - 0.43378).abs() < 1e-5);
        assert!(circle_flow(1.0, circle_t_max(1.0) - 1e-12).unwrap() < 1e-5);
        assert!(matches!(
            circle_flow(1.0, circle_t_max(1.0)),
            Err(Error::Collapsed { .. })
        ));
        assert!(circle_flow(0.0, 0.1).is_err());
    }

    #[test]
    fn horocycle_and_equidistant_examples() {
        assert_eq!(horocycle_flow(2.0, 0.0).unwrap(), 2.0);
        assert!((horocycle_flow(2.0, 2f64.ln()).unwrap() - 1.0).abs() < 1e-15);
        assert!((horocycle_flow(2.0, 10.0).unwrap() - 2.0 * (-10f64).exp()).abs() < 1e-18);
        assert_eq!(equidistant_flow(2.0, 1.0, 0.0).unwrap(), 2.0);
        assert!((equidistant_flow(2.0, 1.0, 2f64.ln()).unwrap() - 1.75f64.sqrt()).abs() < 1e-15);
        assert!((equidistant_flow(2.0, 1.0, 40.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(equidistant_flow(1.0, 1.0, 0.0).is_err());
        assert!(equidistant_flow(1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn radius_odes_hold() {
        let h = 1e-5;
        let d = |f: &dyn Fn(f64) -> f64, t: f64| (f(t + h) - f(t - h)) / (2.0 * h);
        for t in [0.05, 0.2, 0.35] {
            let r = circle_flow(1.0, t).unwrap();
            let dr = d(&|t| circle_flow(1.0, t).unwrap(), t);
            assert!((dr + 1.0 / r.tanh()).abs() < 1e-8, "circle at t={t}");
        }
        for t in [0.0, 0.7, 3.0] {
            let r = horocycle_flow(2.0, t).unwrap();
            assert!((d(&|t| horocycle_flow(2.0, t).unwrap(), t) + r).abs() < 1e-8);
            let r = equidistant_flow(2.0, 1.0, t).unwrap();
            let dr = d(&|t| equidistant_flow(2.0, 1.0, t).unwrap(), t);
            assert!((dr + (r * r - 1.0) / r).abs() < 1e-8);
        }
    }

    #[test]
    fn embedding_examples() {
        let p = AnalyticFamily::Circle { radius: 1.0 }
            .point(0.0, FRAC_PI_2)
            .unwrap();
        assert!(p.x.abs() < 1e-15 && (p.y - 1f64.exp()).abs() < 1e-14);
        let p = AnalyticFamily::Horocycle { radius: 1.0 }
            .point(0.0, FRAC_PI_2)
            .unwrap();
        assert!(p.x.abs() < 1e-15 && (p.y - 2.0).abs() < 1e-15);
        let p = AnalyticFamily::Equidistant {
            radius: 2.0,
            k: 1.0,
        }
        .point(0.0, FRAC_PI_2)
        .unwrap();
        assert!(p.x.abs() < 1e-15 && (p.y - (3f64.sqrt() + 2.0)).abs() < 1e-14);
        // bottom of a horocycle is the ideal point
        assert!(AnalyticFamily::Horocycle { radius: 1.0 }
            .point(0.0, -FRAC_PI_2)
            .is_err());
    }

    #[test]
    fn circle_embedding_is_at_constant_distance() {
        let c = AnalyticFamily::Circle { radius: 1.0 };
        for t in [0.0, 0.2, 0.4] {
            let r = circle_flow(1.0, t).unwrap();
            let center = Point::new(0.0, 1.0).unwrap();
            for s in [0.0, 1.0, 2.5, 4.0] {
                let d = crate::hypgeo::hyp_distance(&center, &c.point(t, s).unwrap()).unwrap();
                assert!((d - r).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn translation_examples() {
        let p = translation_flow_vertical(1.0, 0.0, 0.0, 1.0, 0.0, 2.0).unwrap();
        assert_eq!((p.x, p.y), (2.0, 1.0));
        let p = translation_flow_vertical(1.0, 0.0, 0.0, 1.0, 1.0, 0.0).unwrap();
        assert!((p.y - 1f64.exp()).abs() < 1e-15);
        let p = translation_flow_vertical(0.0, 1.0, 0.0, 1.0, 0.7, 0.0).unwrap();
        assert!(p.x == 0.0 && (p.y - 0.7f64.exp()).abs() < 1e-15);

        let f = AnalyticFamily::TransHorizontal { m: 1.0 };
        let p = f.point(0.0, -0.5).unwrap();
        assert_eq!((p.x, p.y), (-0.5, 1.5));
        let p = f.point(1.0, 0.0).unwrap();
        assert!((p.x - 1f64.tanh()).abs() < 1e-15 && (p.y - 1.0 / 1f64.cosh()).abs() < 1e-15);

        let (v, w, m) = (0.6, 0.8, 1.0);
        let g = AnalyticFamily::TransGeneral { v, w, m };
        for s in [-3.0, -1.0, 0.5] {
            let p = g.point(0.0, s).unwrap();
            assert!((p.x - s).abs() < 1e-14);
            assert!((p.y - (m + s * (w - 1.0) / v)).abs() < 1e-14);
        }
    }

    #[test]
    fn slice_curvature_matches_closed_forms() {
        for f in all_families() {
            for t in [0.0, 0.2, 0.4] {
                let c = f.slice(t, 257).unwrap();
                let frame = curvature_profile(&c).unwrap();
                let want = f.exact_curvature(t).unwrap();
                let err = frame
                    .kappa
                    .iter()
                    .map(|k| (k - want).abs())
                    .fold(0.0, f64::max);
                assert!(err < 1e-6, "{} t={t}: err {err:e}", f.name());
            }
        }
        let h = AnalyticFamily::TransHorizontal { m: 1.0 };
        assert!((h.exact_curvature(0.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        let g = AnalyticFamily::TransGeneral {
            v: 1.0,
            w: 0.0,
            m: 1.0,
        };
        assert!((g.exact_curvature(0.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(g.exact_curvature(20.0).unwrap() < 1e-8);
    }

    #[test]
    fn general_translation_approaches_the_geodesic() {
        let g = AnalyticFamily::TransGeneral {
            v: 1.0,
            w: 0.0,
            m: 1.0,
        };
        let s = -1.0;
        let x = |t: f64| g.point(t, s).unwrap().x;
        assert!((x(10.0) - 1.0).abs() < (x(5.0) - 1.0).abs());
        assert!((x(20.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn general_slices_are_lines_with_the_predicted_slope() {
        let (v, w, m) = (0.6, -0.8, 0.3);
        let g = AnalyticFamily::TransGeneral { v, w, m };
        for t in [-1.0, 0.0, 0.8] {
            let c = g.slice(t, 32).unwrap();
            let p = c.nodes();
            let slope = t.exp() * (w - 1.0) / v;
            for q in &p[1..] {
                let residual = (q.y - p[0].y) - slope * (q.x - p[0].x);
                assert!(residual.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn residual_examples() {
        let circle = AnalyticFamily::Circle { radius: 1.0 };
        assert!(max_abs(&circle.residual(0.1, 256).unwrap()) < 1e-3);

        let t1 = AnalyticFamily::TransHorizontal { m: 1.0 };
        let s: Vec<f64> = (0..256).map(|i| -2.0 + 2.9 * i as f64 / 255.0).collect();
        let r = csf_residual(|t, s| t1.point(t, s), 0.5, &s, false).unwrap();
        assert!(max_abs(&r) < 1e-3);

        let geo = AnalyticFamily::Geodesic { x: 0.0 };
        assert!(max_abs(&geo.residual(0.3, 64).unwrap()) < 1e-6);
    }

    #[test]
    fn every_family_solves_the_flow() {
        for f in all_families() {
            for t in [0.0, 0.15, 0.3] {
                let r = max_abs(&f.residual(t, 256).unwrap());
                assert!(r < 1e-6, "{} at t={t}: {r:e}", f.name());
            }
        }
    }

    #[test]
    fn residual_detects_a_wrong_flow() {
        // circles shrinking at the wrong rate
        let wrong = |t: f64, s: f64| {
            let r = 1.0 - 0.5 * t;
            Point::new(r.sinh() * s.cos(), r.cosh() + r.sinh() * s.sin())
        };
        let s: Vec<f64> = (0..128).map(|i| TAU * i as f64 / 128.0).collect();
        assert!(max_abs(&csf_residual(wrong, 0.1, &s, true).unwrap()) > 0.1);
    }

    #[test]
    fn residual_stencil_outside_domain_is_an_error() {
        let circle = AnalyticFamily::Circle { radius: 1.0 };
        let t = circle_t_max(1.0) - 1e-6;
        assert!(matches!(
            circle.residual(t, 64),
            Err(Error::Collapsed { .. })
        ));
    }

    #[test]
    fn circle_area_decreases() {
        let f = AnalyticFamily::Circle { radius: 1.0 };
        let areas: Vec<f64> = (0..8)
            .map(|i| enclosed_area(&f.slice(0.05 * i as f64, 256).unwrap()).unwrap())
            .collect();
        assert!(areas.windows(2).all(|w| w[1] < w[0]), "{areas:?}");
    }

    #[test]
    fn family_config_round_trips() {
        let f = AnalyticFamily::Equidistant {
            radius: 2.0,
            k: 1.0,
        };
        let json = serde_json::to_string(&f).unwrap();
        assert_eq!(json, r#"{"kind":"equidistant","radius":2.0,"k":1.0}"#);
        assert_eq!(serde_json::from_str::<AnalyticFamily>(&json).unwrap(), f);
        assert!(
            serde_json::from_str::<AnalyticFamily>(r#"{"kind":"circle","radius":1,"x":2}"#)
                .is_err()
        );
    }
}
