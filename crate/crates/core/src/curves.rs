//! Polygonal curves in the half-plane and their geometric functionals.
//!
//! Curvature stencils work on the node index, so nodes should be close to
//! uniform in arclength for them to be second order;
//! [`resample_by_arclength`] restores that.

use std::f64::consts::TAU;

use crate::error::{invalid, Error, Result};
use crate::hypgeo::{EucVector, Point};

pub const MIN_CLOSED_NODES: usize = 8;
pub const MIN_OPEN_NODES: usize = 4;
const MIN_NODE_GAP: f64 = 1e-14;
pub(crate) const MIN_SPEED: f64 = 1e-12;

/// Ordered node list; the orientation is the node order.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteCurve {
    nodes: Vec<Point>,
    closed: bool,
}

impl DiscreteCurve {
    pub fn new(nodes: Vec<Point>, closed: bool) -> Result<Self> {
        let (min, kind) = if closed {
            (MIN_CLOSED_NODES, "closed")
        } else {
            (MIN_OPEN_NODES, "open")
        };
        if nodes.len() < min {
            return Err(Error::TooFewNodes {
                got: nodes.len(),
                min,
                kind,
            });
        }
        for p in &nodes {
            p.validate()?;
        }
        let n = nodes.len();
        let pairs = if closed { n } else { n - 1 };
        for i in 0..pairs {
            let j = if i + 1 == n { 0 } else { i + 1 };
            let (dx, dy) = (nodes[i].x - nodes[j].x, nodes[i].y - nodes[j].y);
            if dx * dx + dy * dy <= MIN_NODE_GAP * MIN_NODE_GAP {
                return Err(Error::CoincidentNodes { index: i, next: j });
            }
        }
        Ok(DiscreteCurve { nodes, closed })
    }

    pub fn closed(nodes: Vec<Point>) -> Result<Self> {
        Self::new(nodes, true)
    }

    pub fn open(nodes: Vec<Point>) -> Result<Self> {
        Self::new(nodes, false)
    }

    /// Samples `f` at `n` uniform parameters: `[0, 1)` when closed, `[0, 1]` when open.
    pub fn from_fn(n: usize, closed: bool, f: impl Fn(f64) -> (f64, f64)) -> Result<Self> {
        let denom = if closed { n } else { n.max(2) - 1 } as f64;
        let nodes = (0..n)
            .map(|k| {
                let (x, y) = f(k as f64 / denom);
                Point { x, y }
            })
            .collect();
        Self::new(nodes, closed)
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn into_nodes(self) -> Vec<Point> {
        self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Same nodes in the opposite order. A closed curve keeps its first node,
    /// so node `i` moves to index `(n - i) % n`.
    pub fn reversed(&self) -> Self {
        let mut nodes = self.nodes.clone();
        nodes.reverse();
        if self.closed {
            nodes.rotate_right(1);
        }
        DiscreteCurve {
            nodes,
            closed: self.closed,
        }
    }

    /// Applies `f` to every node and revalidates.
    pub fn try_map(&self, f: impl Fn(&Point) -> Result<Point>) -> Result<Self> {
        let nodes = self.nodes.iter().map(f).collect::<Result<Vec<_>>>()?;
        Self::new(nodes, self.closed)
    }

    pub fn min_y(&self) -> f64 {
        self.nodes.iter().map(|p| p.y).fold(f64::INFINITY, f64::min)
    }

    /// Number of edges: `n` for closed curves, `n − 1` for open ones.
    pub fn segment_count(&self) -> usize {
        if self.closed {
            self.nodes.len()
        } else {
            self.nodes.len() - 1
        }
    }

    /// Trapezoidal hyperbolic length of each edge (with the closing edge last).
    pub fn segment_lengths(&self) -> Vec<f64> {
        let n = self.nodes.len();
        (0..self.segment_count())
            .map(|i| segment_length(&self.nodes[i], &self.nodes[(i + 1) % n]))
            .collect()
    }

    /// Quadrature weights for `∫ f ds` with nodal values: half of each adjacent edge.
    pub fn node_weights(&self) -> Vec<f64> {
        weights_from_segments(&self.segment_lengths(), self.nodes.len(), self.closed)
    }
}

pub(crate) fn weights_from_segments(seg: &[f64], n: usize, closed: bool) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let before = if i > 0 {
                seg[i - 1]
            } else if closed {
                seg[n - 1]
            } else {
                0.0
            };
            let after = if i < seg.len() { seg[i] } else { 0.0 };
            0.5 * (before + after)
        })
        .collect()
}

/// `∫ ds` over the Euclidean segment `pq` by the trapezoid rule on `1/y`.
pub fn segment_length(p: &Point, q: &Point) -> f64 {
    // ½(1/p_y + 1/q_y) with a single division
    p.euclidean_distance(q) * (p.y + q.y) / (2.0 * p.y * q.y)
}

/// Index derivatives `(x', y', x'', y'')` at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexDerivatives {
    pub dx: f64,
    pub dy: f64,
    pub ddx: f64,
    pub ddy: f64,
}

impl IndexDerivatives {
    pub fn speed(&self) -> f64 {
        self.dx.hypot(self.dy)
    }
}

/// Central differences (periodic when closed, one-sided second order at open ends).
pub fn index_derivatives(c: &DiscreteCurve) -> Vec<IndexDerivatives> {
    let p = c.nodes();
    let n = p.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let d = if c.is_closed() || (i > 0 && i + 1 < n) {
            let a = &p[(i + n - 1) % n];
            let b = &p[i];
            let e = &p[(i + 1) % n];
            IndexDerivatives {
                dx: 0.5 * (e.x - a.x),
                dy: 0.5 * (e.y - a.y),
                ddx: e.x - 2.0 * b.x + a.x,
                ddy: e.y - 2.0 * b.y + a.y,
            }
        } else if i == 0 {
            let [f0, f1, f2, f3] = [&p[0], &p[1], &p[2], &p[3]];
            IndexDerivatives {
                dx: 0.5 * (-3.0 * f0.x + 4.0 * f1.x - f2.x),
                dy: 0.5 * (-3.0 * f0.y + 4.0 * f1.y - f2.y),
                ddx: 2.0 * f0.x - 5.0 * f1.x + 4.0 * f2.x - f3.x,
                ddy: 2.0 * f0.y - 5.0 * f1.y + 4.0 * f2.y - f3.y,
            }
        } else {
            let [f0, f1, f2, f3] = [&p[n - 1], &p[n - 2], &p[n - 3], &p[n - 4]];
            IndexDerivatives {
                dx: 0.5 * (3.0 * f0.x - 4.0 * f1.x + f2.x),
                dy: 0.5 * (3.0 * f0.y - 4.0 * f1.y + f2.y),
                ddx: 2.0 * f0.x - 5.0 * f1.x + 4.0 * f2.x - f3.x,
                ddy: 2.0 * f0.y - 5.0 * f1.y + 4.0 * f2.y - f3.y,
            }
        };
        out.push(d);
    }
    out
}

/// Geodesic curvature of a parametrized curve at height `y`:
/// `κ = y (x'y'' - x''y') / |γ'|³ + x' / |γ'|`.
pub fn geodesic_curvature(y: f64, d: &IndexDerivatives) -> f64 {
    let speed = d.speed();
    y * (d.dx * d.ddy - d.ddx * d.dy) / (speed * speed * speed) + d.dx / speed
}

/// Signed planar curvature `(x'y'' - x''y') / |γ'|³`.
pub fn planar_curvature(d: &IndexDerivatives) -> f64 {
    let speed = d.speed();
    (d.dx * d.ddy - d.ddx * d.dy) / (speed * speed * speed)
}

/// Per-node geodesic curvature with the hyperbolic unit tangent and normal.
///
/// `N` is `T` turned counterclockwise, so a counterclockwise circle has
/// inward normal and positive curvature. Reversing the node order flips
/// `κ` and `N` together.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveFrame {
    pub kappa: Vec<f64>,
    pub normal: Vec<EucVector>,
    pub tangent: Vec<EucVector>,
}

impl CurveFrame {
    /// `κN` per node, the curve-shortening velocity.
    pub fn velocity(&self) -> impl Iterator<Item = EucVector> + '_ {
        self.kappa
            .iter()
            .zip(&self.normal)
            .map(|(k, n)| n.scale(*k))
    }

    pub fn max_abs_kappa(&self) -> f64 {
        self.kappa.iter().fold(0.0, |m, k| m.max(k.abs()))
    }
}

/// Curvature, tangent and normal from the circle through each node and its
/// two neighbours.
///
/// Constant-curvature curves of the half-plane are exactly the Euclidean
/// circles and lines, and Möbius maps send the circle through three nodes to
/// the circle through their images. The three-point circle therefore plays
/// the role of the usual parabolic finite-difference stencil while keeping the
/// result covariant under isometries: for node `B` between `A` and `C`,
///
/// - `κ_e = 2 (B - A) × (C - B) / (|B - A| |C - B| |C - A|)`,
/// - the circle's tangent at `B` points along `(C - B)(B - A) / (C - A)` (complex),
/// - `κ = y κ_e + cos θ`, the curvature formula for a curve with tangent angle `θ`.
///
/// On a uniform node spacing the error is second order. Open curves take the
/// end tangent from the circle through the last three nodes and extrapolate
/// the end curvature from the nearest interior nodes (quadratically when
/// there are three of them, linearly otherwise).
pub fn curvature_profile(c: &DiscreteCurve) -> Result<CurveFrame> {
    let p = c.nodes();
    let n = p.len();
    let closed = c.is_closed();
    // edge i runs from node i to node i + 1; the closing edge comes last
    let m = if closed { n } else { n - 1 };
    let edges: Vec<((f64, f64), f64)> = (0..m)
        .map(|i| {
            let j = if i + 1 == n { 0 } else { i + 1 };
            let e = (p[j].x - p[i].x, p[j].y - p[i].y);
            (e, (e.0 * e.0 + e.1 * e.1).sqrt())
        })
        .collect();
    let mut frame = CurveFrame {
        kappa: Vec::with_capacity(n),
        normal: Vec::with_capacity(n),
        tangent: Vec::with_capacity(n),
    };
    for i in 0..n {
        let (kappa, dir) = if closed || (i > 0 && i + 1 < n) {
            let (ab, lab) = edges[if i == 0 { m - 1 } else { i - 1 }];
            let (bc, lbc) = edges[i];
            let circle = ThreePointCircle::from_edges(ab, lab, bc, lbc)
                .ok_or(Error::DegenerateStencil { index: i })?;
            let dir = circle.tangent_at_middle();
            (p[i].y * circle.kappa_e + dir.u, dir)
        } else {
            let (a, b, cc) = if i == 0 {
                (&p[0], &p[1], &p[2])
            } else {
                (&p[n - 3], &p[n - 2], &p[n - 1])
            };
            let circle =
                ThreePointCircle::new(a, b, cc).ok_or(Error::DegenerateStencil { index: i })?;
            let dir = if i == 0 {
                circle.tangent_at_first()
            } else {
                circle.tangent_at_last()
            };
            // patched below once the interior values exist
            (f64::NAN, dir)
        };
        let t = dir.scale(p[i].y);
        frame.kappa.push(kappa);
        frame.normal.push(t.rotate_quarter());
        frame.tangent.push(t);
    }
    if !c.is_closed() {
        let k = &mut frame.kappa;
        if n >= 5 {
            k[0] = 3.0 * (k[1] - k[2]) + k[3];
            k[n - 1] = 3.0 * (k[n - 2] - k[n - 3]) + k[n - 4];
        } else {
            k[0] = 2.0 * k[1] - k[2];
            k[n - 1] = 2.0 * k[n - 2] - k[n - 3];
        }
    }
    Ok(frame)
}

/// Euclidean circle (or line) through three consecutive nodes `a`, `b`, `c`.
pub(crate) struct ThreePointCircle {
    ab: (f64, f64),
    bc: (f64, f64),
    ac: (f64, f64),
    pub(crate) kappa_e: f64,
}

impl ThreePointCircle {
    fn new(a: &Point, b: &Point, c: &Point) -> Option<Self> {
        let ab = (b.x - a.x, b.y - a.y);
        let bc = (c.x - b.x, c.y - b.y);
        let norm = |v: (f64, f64)| (v.0 * v.0 + v.1 * v.1).sqrt();
        Self::from_edges(ab, norm(ab), bc, norm(bc))
    }

    pub(crate) fn from_edges(ab: (f64, f64), lab: f64, bc: (f64, f64), lbc: f64) -> Option<Self> {
        let ac = (ab.0 + bc.0, ab.1 + bc.1);
        let lac = (ac.0 * ac.0 + ac.1 * ac.1).sqrt();
        if !(lab >= MIN_SPEED && lbc >= MIN_SPEED && lac >= MIN_SPEED) {
            return None;
        }
        let cross = ab.0 * bc.1 - ab.1 * bc.0;
        Some(ThreePointCircle {
            ab,
            bc,
            ac,
            kappa_e: 2.0 * cross / (lab * lbc * lac),
        })
    }

    /// Unit tangent at `b`: direction of `bc · ab · conj(ac)`.
    pub(crate) fn tangent_at_middle(&self) -> EucVector {
        unit(cmul(cmul(self.bc, self.ab), conj(self.ac)))
    }

    /// Unit tangent at `a`: direction of `ab · ac · conj(bc)`.
    fn tangent_at_first(&self) -> EucVector {
        unit(cmul(cmul(self.ab, self.ac), conj(self.bc)))
    }

    /// Unit tangent at `c`: direction of `bc · ac · conj(ab)`.
    fn tangent_at_last(&self) -> EucVector {
        unit(cmul(cmul(self.bc, self.ac), conj(self.ab)))
    }
}

fn cmul(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

fn conj(a: (f64, f64)) -> (f64, f64) {
    (a.0, -a.1)
}

fn unit(a: (f64, f64)) -> EucVector {
    let r = (a.0 * a.0 + a.1 * a.1).sqrt();
    EucVector::new(a.0 / r, a.1 / r)
}

pub fn euclidean_curvature(c: &DiscreteCurve) -> Result<Vec<f64>> {
    index_derivatives(c)
        .iter()
        .enumerate()
        .map(|(i, d)| {
            if d.speed() >= MIN_SPEED {
                Ok(planar_curvature(d))
            } else {
                Err(Error::DegenerateStencil { index: i })
            }
        })
        .collect()
}

pub fn hyperbolic_length(c: &DiscreteCurve) -> f64 {
    c.segment_lengths().iter().sum()
}

/// Hyperbolic area `∬ dx dy / y²` enclosed by a closed curve, as the
/// boundary integral `∮ dx / y` (Green's theorem with `P = 1/y`), trapezoid
/// rule per edge. Positive for counterclockwise curves, negative for
/// clockwise ones. Simplicity is the caller's responsibility.
pub fn enclosed_area(c: &DiscreteCurve) -> Result<f64> {
    if !c.is_closed() {
        return Err(Error::OpenCurve);
    }
    let p = c.nodes();
    let n = p.len();
    Ok((0..n)
        .map(|i| {
            let (a, b) = (&p[i], &p[(i + 1) % n]);
            (b.x - a.x) * 0.5 * (a.y.recip() + b.y.recip())
        })
        .sum())
}

/// `∫ κ ds` with trapezoid node weights.
pub fn total_curvature(c: &DiscreteCurve, frame: &CurveFrame) -> f64 {
    total_curvature_with(&c.node_weights(), frame)
}

pub(crate) fn total_curvature_with(weights: &[f64], frame: &CurveFrame) -> f64 {
    weights.iter().zip(&frame.kappa).map(|(w, k)| w * k).sum()
}

/// `∫ κ ds - A - 2π`; zero for smooth simple positively oriented curves.
pub fn gauss_bonnet_defect(c: &DiscreteCurve) -> Result<f64> {
    if !c.is_closed() {
        return Err(Error::OpenCurve);
    }
    let frame = curvature_profile(c)?;
    Ok(total_curvature(c, &frame) - enclosed_area(c)? - TAU)
}

pub(crate) const RESAMPLE_RTOL: f64 = 1e-9;
const RESAMPLE_MAX_ITERS: usize = 30;

/// Redistributes `n` nodes at equal hyperbolic spacing along the polygon.
///
/// Between two input nodes, new nodes are placed on a blend of the circles
/// through the neighbouring triples of nodes, weighted linearly in chord
/// length over the four nodes as in Neville's scheme, so circles and lines
/// are reproduced exactly and smooth curves to fourth order; placing them on the polygon's chords instead would add
/// `O(1)` noise to the curvature. The first node is kept (and the last one
/// for open curves). Node positions are corrected a few times so that
/// the edges of the *output* polygon, measured by [`segment_length`], are
/// equal.
pub fn resample_by_arclength(c: &DiscreteCurve, n: usize) -> Result<DiscreteCurve> {
    let min = if c.is_closed() {
        MIN_CLOSED_NODES
    } else {
        MIN_OPEN_NODES
    };
    if n < min {
        return Err(Error::TooFewNodes {
            got: n,
            min,
            kind: if c.is_closed() { "closed" } else { "open" },
        });
    }
    resample_with_segments(c, n, &c.segment_lengths())
}

/// [`resample_by_arclength`] given the input's edge lengths.
pub(crate) fn resample_with_segments(
    c: &DiscreteCurve,
    n: usize,
    seg: &[f64],
) -> Result<DiscreteCurve> {
    if n == c.len() && is_uniform(seg) {
        return Ok(c.clone());
    }
    let mut out = Vec::with_capacity(n);
    Resampler::default().run(c.nodes(), seg, c.is_closed(), n, &mut out);
    DiscreteCurve::new(out, c.is_closed())
}

pub(crate) fn is_uniform(seg: &[f64]) -> bool {
    let (lo, hi) = min_max(seg);
    hi - lo <= RESAMPLE_RTOL * hi
}

pub(crate) fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &s| {
            (lo.min(s), hi.max(s))
        })
}

/// Scratch space for redistribution, reusable across calls.
#[derive(Debug, Default)]
pub(crate) struct Resampler {
    /// Cumulative length along the input polygon.
    poly_cum: Vec<f64>,
    /// Cumulative length along the current output polygon.
    out_cum: Vec<f64>,
    /// Per input edge: tangent-chord angles of the circles through the
    /// previous and the next node triple (`None` past an open end).
    bends: Vec<Bend>,
    knots: Vec<f64>,
    next_knots: Vec<f64>,
}

impl Resampler {
    /// Writes `n` nodes equally spaced along the polygon `input` (edge
    /// lengths `seg`) into `out`; see [`resample_by_arclength`].
    pub(crate) fn run(
        &mut self,
        input: &[Point],
        seg: &[f64],
        closed: bool,
        n: usize,
        out: &mut Vec<Point>,
    ) {
        let intervals = if closed { n } else { n - 1 };
        self.poly_cum.clear();
        self.poly_cum.push(0.0);
        let mut acc = 0.0;
        for s in seg {
            acc += s;
            self.poly_cum.push(acc);
        }
        let total = acc;
        fill_bends(input, closed, &mut self.bends);

        // knots[j]: polygon parameter of output node j; a closed curve gets
        // the wrap-around knot at the end
        self.knots.clear();
        self.knots
            .extend((0..=intervals).map(|j| total * j as f64 / intervals as f64));
        self.knots[intervals] = total;
        self.next_knots.clone_from(&self.knots);
        self.out_cum.resize(intervals + 1, 0.0);
        sample_curve(input, &self.poly_cum, &self.bends, &self.knots[..n], out);

        for _ in 0..RESAMPLE_MAX_ITERS {
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for i in 0..intervals {
                let j = if i + 1 == n { 0 } else { i + 1 };
                let s = segment_length(&out[i], &out[j]);
                lo = lo.min(s);
                hi = hi.max(s);
                self.out_cum[i + 1] = self.out_cum[i] + s;
            }
            if hi - lo <= RESAMPLE_RTOL * hi {
                break;
            }
            // move each node to where the output polygon's own arclength says
            // it should be, interpolating the parameter between old knots
            let out_total = self.out_cum[intervals];
            let mut k = 0;
            for j in 1..intervals {
                let target = out_total * j as f64 / intervals as f64;
                while k + 1 < intervals && self.out_cum[k + 1] < target {
                    k += 1;
                }
                let f = (target - self.out_cum[k]) / (self.out_cum[k + 1] - self.out_cum[k]);
                self.next_knots[j] = self.knots[k] + f * (self.knots[k + 1] - self.knots[k]);
            }
            std::mem::swap(&mut self.knots, &mut self.next_knots);
            sample_curve(input, &self.poly_cum, &self.bends, &self.knots[..n], out);
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Bend {
    left: Option<Arc>,
    right: Option<Arc>,
    /// Chord lengths of the previous, this and the next edge.
    chords: (f64, f64, f64),
}

/// A circular arc over an edge `b → c`, given by `(cos β, sin β)` for the
/// angle `β` from the chord to the tangent at `b`.
#[derive(Debug, Clone, Copy)]
struct Arc {
    cos: f64,
    sin: f64,
}

impl Arc {
    /// The arc whose tangent-chord angle is the argument of `z`.
    fn new(z: (f64, f64)) -> Option<Self> {
        let r = (z.0 * z.0 + z.1 * z.1).sqrt();
        // a triple turning back on itself (|β| ≥ π/2) has no usable arc
        (z.0 > 0.0 && r.is_finite()).then(|| Arc {
            cos: z.0 / r,
            sin: z.1 / r,
        })
    }

    /// `(P(τ) − b) / (c − b)` as a complex number, with `P` the rational
    /// quadratic Bézier form of the arc (weight `cos β` on the apex).
    fn ratio(&self, tau: f64) -> (f64, f64) {
        let m = tau * (1.0 - tau);
        let inv = 1.0 / (1.0 - 2.0 * m * (1.0 - self.cos));
        ((m * self.cos + tau * tau) * inv, m * self.sin * inv)
    }
}

fn fill_bends(p: &[Point], closed: bool, bends: &mut Vec<Bend>) {
    let n = p.len();
    let segs = if closed { n } else { n - 1 };
    // edge k = p[k+1] − p[k] and its length
    let edge = |k: usize| {
        let (u, v) = (&p[k], &p[if k + 1 == n { 0 } else { k + 1 }]);
        let e = (v.x - u.x, v.y - u.y);
        (e, (e.0 * e.0 + e.1 * e.1).sqrt())
    };
    let neighbour = |k: usize, forward: bool| -> Option<((f64, f64), f64)> {
        match (forward, closed) {
            (false, true) => Some(edge(if k == 0 { n - 1 } else { k - 1 })),
            (true, true) => Some(edge(if k + 1 == n { 0 } else { k + 1 })),
            (false, false) => k.checked_sub(1).map(edge),
            (true, false) => (k + 1 < segs).then(|| edge(k + 1)),
        }
    };
    let add = |u: (f64, f64), v: (f64, f64)| (u.0 + v.0, u.1 + v.1);
    bends.clear();
    bends.extend((0..segs).map(|k| {
        let (bc, lbc) = edge(k);
        let prev = neighbour(k, false);
        let next = neighbour(k, true);
        // inscribed angles: at a between a→c and a→b, at d between d→b and d→c
        let left = prev.and_then(|(ab, _)| Arc::new(cmul(ab, conj(add(ab, bc)))));
        let right = next.and_then(|(cd, _)| Arc::new(cmul(add(bc, cd), conj(cd))));
        Bend {
            left,
            right,
            chords: (prev.map_or(0.0, |e| e.1), lbc, next.map_or(0.0, |e| e.1)),
        }
    }));
}

/// Points at nondecreasing arclength parameters `params` along the curve
/// through `nodes` (cumulative edge lengths `cum`), found by a single
/// forward walk.
fn sample_curve(
    nodes: &[Point],
    cum: &[f64],
    bends: &[Bend],
    params: &[f64],
    out: &mut Vec<Point>,
) {
    let segs = cum.len() - 1;
    let mut k = 0;
    out.clear();
    out.extend(params.iter().map(|&s| {
        while k + 1 < segs && cum[k + 1] <= s {
            k += 1;
        }
        let a = &nodes[k];
        let b = &nodes[if k + 1 == nodes.len() { 0 } else { k + 1 }];
        let f = ((s - cum[k]) / (cum[k + 1] - cum[k])).clamp(0.0, 1.0);
        let bend = &bends[k];
        let (u, v) = match (bend.left, bend.right) {
            (Some(l), Some(r)) => {
                let (lu, lv) = l.ratio(f);
                let (ru, rv) = r.ratio(f);
                // weight of the right circle grows linearly from the node
                // before this edge to the node after it
                let (h0, h1, h2) = bend.chords;
                let w = (h0 + f * h1) / (h0 + h1 + h2);
                ((1.0 - w) * lu + w * ru, (1.0 - w) * lv + w * rv)
            }
            (Some(arc), None) | (None, Some(arc)) => arc.ratio(f),
            (None, None) => (f, 0.0),
        };
        let (dx, dy) = (b.x - a.x, b.y - a.y);
        Point {
            x: a.x + u * dx - v * dy,
            y: a.y + u * dy + v * dx,
        }
    }));
}

/// Counterclockwise hyperbolic circle of radius `r` about `center`, sampled
/// uniformly in the hyperbolic polar angle (hence uniformly in hyperbolic
/// arclength).
///
/// Node `j` is the point at distance `r` straight above `i`, rotated about
/// `i` by angle `2πj/n`, then carried to `center` by `z ↦ a + b z`.
pub fn hyperbolic_circle(center: &Point, r: f64, n: usize) -> Result<DiscreteCurve> {
    center.validate()?;
    if !(r > 0.0) || !r.is_finite() {
        return Err(invalid("radius", format!("must be positive, got {r}")));
    }
    let (er, e2r) = (r.exp(), (2.0 * r).exp_m1());
    DiscreteCurve::from_fn(n, true, |u| {
        // rotation R_{-φ/2} applied to i e^r, φ = 2πu
        let (sn, cs) = (-0.5 * TAU * u).sin_cos();
        let den = cs * cs + sn * sn * (e2r + 1.0);
        let x = sn * cs * e2r / den;
        let y = er / den;
        (center.x + center.y * x, center.y * y)
    })
}

/// Counterclockwise axis-aligned Euclidean ellipse `(cx + a cos s, cy + b sin s)`.
pub fn euclidean_ellipse(center: &Point, a: f64, b: f64, n: usize) -> Result<DiscreteCurve> {
    if !(a > 0.0 && b > 0.0) {
        return Err(invalid("semi_axes", "must be positive"));
    }
    DiscreteCurve::from_fn(n, true, |u| {
        let s = TAU * u;
        (center.x + a * s.cos(), center.y + b * s.sin())
    })
}

/// Hyperbolic circumference `2π sinh r` and area `2π (cosh r - 1)` of a circle.
pub fn circle_circumference(r: f64) -> f64 {
    TAU * r.sinh()
}

pub fn circle_area(r: f64) -> f64 {
    TAU * (r.cosh() - 1.0)
}

/// Unwrapped Euclidean direction angle of the tangent, `T = y (cos θ, sin θ)`.
pub fn tangent_angles(frame: &CurveFrame) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(frame.tangent.len());
    for t in &frame.tangent {
        let raw = t.v.atan2(t.u);
        let th = match out.last() {
            Some(&prev) => raw + TAU * ((prev - raw) / TAU).round(),
            None => raw,
        };
        out.push(th);
    }
    out
}
