//! Allocation-free stepping of a closed curve.
//!
//! Coordinates live in separate arrays and the per-node loops avoid index
//! arithmetic, so they vectorize; the wrap-around node is handled on its own.

use std::f64::consts::TAU;

use super::StepRecord;
use crate::curves::{DiscreteCurve, Resampler, MIN_SPEED, RESAMPLE_RTOL};
use crate::error::{Error, Result};
use crate::hypgeo::Point;

#[derive(Debug, Default)]
struct Nodes {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl Nodes {
    fn from_points(p: &[Point]) -> Self {
        Nodes {
            x: p.iter().map(|p| p.x).collect(),
            y: p.iter().map(|p| p.y).collect(),
        }
    }

    fn set_points(&mut self, p: &[Point]) {
        self.x.clear();
        self.y.clear();
        self.x.extend(p.iter().map(|p| p.x));
        self.y.extend(p.iter().map(|p| p.y));
    }

    fn points(&self) -> impl Iterator<Item = Point> + '_ {
        self.x.iter().zip(&self.y).map(|(&x, &y)| Point { x, y })
    }

    /// `self = from + dt·v`; fails if a node leaves the half-plane.
    fn displace(&mut self, from: &Nodes, v: &Velocity, dt: f64) -> Result<()> {
        for (o, (p, u)) in self.x.iter_mut().zip(from.x.iter().zip(&v.x)) {
            *o = p + dt * u;
        }
        for (o, (p, u)) in self.y.iter_mut().zip(from.y.iter().zip(&v.y)) {
            *o = p + dt * u;
        }
        // NaN and ±∞ survive the sums; the minimum catches y ≤ 0
        let finite = (fold(&self.x, 0.0, add) + fold(&self.y, 0.0, add)).is_finite();
        if finite && fold(&self.y, f64::INFINITY, f64::min) > 0.0 {
            return Ok(());
        }
        let bad = self.points().find(|q| !q.is_valid()).unwrap_or(Point {
            x: f64::NAN,
            y: f64::NAN,
        });
        Err(Error::OutsideHalfPlane { x: bad.x, y: bad.y })
    }
}

/// Euclidean edges: edge `i` runs from node `i` to node `i + 1` (cyclically).
#[derive(Debug, Default)]
struct Edges {
    dx: Vec<f64>,
    dy: Vec<f64>,
    len: Vec<f64>,
    /// `½(1/y_a + 1/y_b)`, set by `hyperbolic`.
    metric: Vec<f64>,
}

impl Edges {
    fn fill(&mut self, p: &Nodes) {
        let n = p.x.len();
        for (d, c) in [(&mut self.dx, &p.x), (&mut self.dy, &p.y)] {
            d.clear();
            d.extend(c[1..].iter().zip(&c[..n - 1]).map(|(b, a)| b - a));
            d.push(c[0] - c[n - 1]);
        }
        self.len.clear();
        self.len.extend(
            self.dx
                .iter()
                .zip(&self.dy)
                .map(|(u, v)| (u * u + v * v).sqrt()),
        );
    }

    /// Hyperbolic edge lengths, `|Δ| · ½(1/y_a + 1/y_b)`.
    fn hyperbolic(&mut self, p: &Nodes, seg: &mut Vec<f64>) {
        let n = p.y.len();
        let factor = |a: f64, b: f64| (a + b) / (2.0 * a * b);
        self.metric.clear();
        self.metric.extend(
            p.y[..n - 1]
                .iter()
                .zip(&p.y[1..])
                .map(|(&a, &b)| factor(a, b)),
        );
        self.metric.push(factor(p.y[n - 1], p.y[0]));
        seg.clear();
        seg.extend(self.len.iter().zip(&self.metric).map(|(l, w)| l * w));
    }
}

/// Curvature and Euclidean components of `κN` at the nodes.
#[derive(Debug, Default)]
struct Velocity {
    kappa: Vec<f64>,
    x: Vec<f64>,
    y: Vec<f64>,
}

impl Velocity {
    fn resize(&mut self, n: usize) {
        self.kappa.resize(n, 0.0);
        self.x.resize(n, 0.0);
        self.y.resize(n, 0.0);
    }

    /// From the circle through each node and its neighbours.
    fn fill(&mut self, p: &Nodes, e: &Edges) -> Result<()> {
        let n = p.y.len();
        let last = n - 1;
        let (k0, x0, y0, lac0) = node(
            (e.dx[last], e.dy[last], e.len[last]),
            (e.dx[0], e.dy[0], e.len[0]),
            p.y[0],
        );
        (self.kappa[0], self.x[0], self.y[0]) = (k0, x0, y0);
        let mut ok = lac0 >= MIN_SPEED;
        let prev = e.dx[..last].iter().zip(&e.dy[..last]).zip(&e.len[..last]);
        let next = e.dx[1..].iter().zip(&e.dy[1..]).zip(&e.len[1..]);
        let out = self.kappa[1..]
            .iter_mut()
            .zip(self.x[1..].iter_mut())
            .zip(self.y[1..].iter_mut());
        for ((((k, vx), vy), y), (((ax, ay), al), ((bx, by), bl))) in
            out.zip(&p.y[1..]).zip(prev.zip(next))
        {
            let r = node((*ax, *ay, *al), (*bx, *by, *bl), *y);
            (*k, *vx, *vy) = (r.0, r.1, r.2);
            ok &= r.3 >= MIN_SPEED;
        }
        if ok && e.len.iter().fold(true, |ok, l| ok & (*l >= MIN_SPEED)) {
            return Ok(());
        }
        let index = (0..n)
            .find(|&i| {
                let j = (i + last) % n;
                let (ax, ay) = (e.dx[j] + e.dx[i], e.dy[j] + e.dy[i]);
                e.len[i] < MIN_SPEED || ax.hypot(ay) < MIN_SPEED
            })
            .unwrap_or(0);
        Err(Error::DegenerateStencil { index })
    }
}

/// `(κ, κN_x, κN_y, |ac|)` at the node between edges `ab` and `bc`.
#[inline(always)]
fn node(ab: (f64, f64, f64), bc: (f64, f64, f64), y: f64) -> (f64, f64, f64, f64) {
    let (acx, acy) = (ab.0 + bc.0, ab.1 + bc.1);
    let lac = (acx * acx + acy * acy).sqrt();
    let inv = 1.0 / (ab.2 * bc.2 * lac);
    let kappa_e = 2.0 * (ab.0 * bc.1 - ab.1 * bc.0) * inv;
    // unit tangent: bc · ab · conj(ac), whose modulus is the product of lengths
    let (px, py) = (bc.0 * ab.0 - bc.1 * ab.1, bc.0 * ab.1 + bc.1 * ab.0);
    let (tu, tv) = ((px * acx + py * acy) * inv, (py * acx - px * acy) * inv);
    let k = y * kappa_e + tu;
    // N = y · (T_e rotated a quarter turn)
    (k, -k * y * tv, k * y * tu, lac)
}

/// Buffers for the explicit midpoint step; `nodes` is the current curve with
/// `edges`, `seg` and `vel` describing it between calls.
pub(super) struct Kernel {
    nodes: Nodes,
    half: Nodes,
    moved: Nodes,
    edges: Edges,
    seg: Vec<f64>,
    vel: Velocity,
    points: Vec<Point>,
    resampled: Vec<Point>,
    resampler: Resampler,
}

impl Kernel {
    pub(super) fn new(c: &DiscreteCurve) -> Result<Self> {
        let n = c.len();
        let nodes = Nodes::from_points(c.nodes());
        let blank = || Nodes {
            x: vec![0.0; n],
            y: vec![0.0; n],
        };
        let mut k = Kernel {
            half: blank(),
            moved: blank(),
            nodes,
            edges: Edges::default(),
            seg: Vec::with_capacity(n),
            vel: Velocity::default(),
            points: Vec::with_capacity(n),
            resampled: Vec::with_capacity(n),
            resampler: Resampler::default(),
        };
        k.vel.resize(n);
        k.edges.fill(&k.nodes);
        k.edges.hyperbolic(&k.nodes, &mut k.seg);
        k.vel.fill(&k.nodes, &k.edges)?;
        Ok(k)
    }

    /// Midpoint step; the result is left in `moved`.
    pub(super) fn advance(&mut self, dt: f64) -> Result<()> {
        self.half.displace(&self.nodes, &self.vel, 0.5 * dt)?;
        self.edges.fill(&self.half);
        self.vel.fill(&self.half, &self.edges)?;
        self.moved.displace(&self.nodes, &self.vel, dt)
    }

    /// Makes `moved` the current curve, redistributing it first if asked and
    /// not already uniform. Returns the spacing ratio before redistribution.
    pub(super) fn settle(&mut self, resample: bool) -> Result<f64> {
        self.edges.fill(&self.moved);
        self.edges.hyperbolic(&self.moved, &mut self.seg);
        let lo = fold(&self.seg, f64::INFINITY, f64::min);
        let hi = fold(&self.seg, 0.0, f64::max);
        std::mem::swap(&mut self.nodes, &mut self.moved);
        if resample && hi - lo > RESAMPLE_RTOL * hi {
            self.points.clear();
            self.points.extend(self.nodes.points());
            let n = self.points.len();
            self.resampler
                .run(&self.points, &self.seg, true, n, &mut self.resampled);
            self.nodes.set_points(&self.resampled);
            self.edges.fill(&self.nodes);
            self.edges.hyperbolic(&self.nodes, &mut self.seg);
        }
        self.vel.fill(&self.nodes, &self.edges)?;
        Ok(hi / lo)
    }

    /// Diagnostics of the current curve and its shortest hyperbolic edge.
    pub(super) fn record(&self, t: f64, area0: f64, ratio: f64) -> (StepRecord, f64) {
        let (e, s, k) = (&self.edges, &self.seg, &self.vel.kappa);
        let n = s.len();
        let length = fold(s, 0.0, add);
        // ∮ dx / y by the trapezoid rule, as in `enclosed_area`
        let area = dot(&e.dx, &e.metric);
        // trapezoid rule for ∫κ ds: edge i gets the mean of its end values
        let total_kappa = 0.5 * (dot(k, s) + dot(&k[1..], &s[..n - 1]) + k[0] * s[n - 1]);
        let h_min = fold(s, f64::INFINITY, f64::min);
        let min_y = fold(&self.nodes.y, f64::INFINITY, f64::min);
        let max_kappa = fold(k, 0.0, f64::max).max(-fold(k, 0.0, f64::min));
        let record = StepRecord {
            t,
            length,
            area,
            gb_defect: total_kappa - area - TAU,
            // (A − A₀) − (A₀ + 2π)(e^{-t} − 1): exactly zero at t = 0
            area_law_residual: (area - area0) - (area0 + TAU) * (-t).exp_m1(),
            min_y,
            max_kappa,
            spacing_ratio: ratio,
        };
        (record, h_min)
    }

    pub(super) fn curve(&self) -> Result<DiscreteCurve> {
        DiscreteCurve::new(self.nodes.points().collect(), true)
    }
}

fn add(a: f64, b: f64) -> f64 {
    a + b
}

/// Folds `v` with `op` over four interleaved accumulators, which breaks the
/// serial dependency of a plain fold and lets it vectorize.
#[inline(always)]
fn fold(v: &[f64], init: f64, op: impl Fn(f64, f64) -> f64) -> f64 {
    let mut acc = [init; 4];
    let chunks = v.chunks_exact(4);
    let rest = chunks.remainder();
    for c in chunks {
        for (a, x) in acc.iter_mut().zip(c) {
            *a = op(*a, *x);
        }
    }
    for x in rest {
        acc[0] = op(acc[0], *x);
    }
    op(op(acc[0], acc[1]), op(acc[2], acc[3]))
}

/// `Σ a_i b_i` over the common length, four lanes at a time.
#[inline(always)]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (ca, cb) = (a[..n].chunks_exact(4), b[..n].chunks_exact(4));
    let tail: f64 = ca
        .remainder()
        .iter()
        .zip(cb.remainder())
        .map(|(x, y)| x * y)
        .sum();
    let mut acc = [0.0; 4];
    for (x, y) in ca.zip(cb) {
        for l in 0..4 {
            acc[l] += x[l] * y[l];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}
