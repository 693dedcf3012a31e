//! Intrinsic evolution in Grayson's angle `φ`.
//!
//! For a convex curve the flow can be written on a fixed periodic `φ`-domain
//! of length `Φ = ∫κ ds`, with the curvature obeying
//!
//! ```text
//! κ_τ = κ² κ_φφ + κ³ − κ
//! ```
//!
//! and the pressure `p = κ²`, `q = p_φ` obeying
//!
//! ```text
//! p_τ = p p_φφ − ½ p_φ² + 2p² − 2p
//! q_τ = p (q_φφ + 4q) − 2q
//! ```
//!
//! All three are stepped with the classical Runge–Kutta method and periodic
//! central differences; the step is capped by the diffusion limit
//! `0.25 dφ² / max p` at every step.
//!
//! Solutions with `p = a(t) + b(φ)` are the shrinking circles, horocycles and
//! equidistant lines (`b ≡ 0`) or solitons (`a` constant); [`separable_fit`]
//! and [`classify_separable`] recover that split from a run.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::curves::{curvature_profile, total_curvature, DiscreteCurve};
use crate::error::{invalid, Error, Result};

/// Samples on a uniform periodic `φ`-grid at one time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiGrid {
    /// `values[i]` sits at `φ = i · Φ / n`.
    pub values: Vec<f64>,
    pub phi_period: f64,
    pub time: f64,
}

/// A [`PhiGrid`] holding `p = κ²`.
pub type PressureGrid = PhiGrid;

impl PhiGrid {
    pub const MIN_POINTS: usize = 16;

    /// Checks the grid invariants: at least [`Self::MIN_POINTS`] finite
    /// positive values and a positive period.
    pub fn new(values: Vec<f64>, phi_period: f64, time: f64) -> Result<Self> {
        if values.len() < Self::MIN_POINTS {
            return Err(invalid(
                "values",
                format!(
                    "need at least {} grid points, got {}",
                    Self::MIN_POINTS,
                    values.len()
                ),
            ));
        }
        if !(phi_period > 0.0 && phi_period.is_finite()) {
            return Err(invalid(
                "phi_period",
                format!("must be positive, got {phi_period}"),
            ));
        }
        if !time.is_finite() {
            return Err(invalid("time", "must be finite"));
        }
        if let Some(index) = first_non_positive(&values) {
            return Err(Error::LostPositivity { index, time });
        }
        Ok(PhiGrid {
            values,
            phi_period,
            time,
        })
    }

    /// `n` samples of `f(φ)` at time 0.
    pub fn from_fn(n: usize, phi_period: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        let d = phi_period / n as f64;
        PhiGrid::new((0..n).map(|i| f(i as f64 * d)).collect(), phi_period, 0.0)
    }

    pub fn constant(n: usize, phi_period: f64, value: f64) -> Result<Self> {
        PhiGrid::from_fn(n, phi_period, |_| value)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dphi(&self) -> f64 {
        self.phi_period / self.len() as f64
    }

    pub fn phis(&self) -> impl Iterator<Item = f64> + '_ {
        let d = self.dphi();
        (0..self.len()).map(move |i| i as f64 * d)
    }

    /// Periodic central first difference.
    pub fn derivative(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        first_difference(&self.values, self.dphi(), &mut out);
        out
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn with_values(&self, values: Vec<f64>, time: f64) -> PhiGrid {
        PhiGrid {
            values,
            phi_period: self.phi_period,
            time,
        }
    }
}

/// The `φ`-period of a closed convex curve: its total curvature, which
/// Gauss–Bonnet makes `2π + A`.
pub fn grayson_period(c: &DiscreteCurve) -> Result<f64> {
    if !c.is_closed() {
        return Err(Error::OpenCurve);
    }
    Ok(total_curvature(c, &curvature_profile(c)?))
}

/// Pressure of the circle of hyperbolic radius `r`: `coth² r` on its period
/// `2π cosh r`.
pub fn circle_pressure(r: f64, n: usize) -> Result<PressureGrid> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(invalid("r", format!("must be positive, got {r}")));
    }
    let k = r.tanh().recip();
    PhiGrid::constant(n, TAU * r.cosh(), k * k)
}

fn first_non_positive(v: &[f64]) -> Option<usize> {
    v.iter().position(|x| !(*x > 0.0 && x.is_finite()))
}

#[inline]
fn neighbours(n: usize, i: usize) -> (usize, usize) {
    (
        if i == 0 { n - 1 } else { i - 1 },
        if i + 1 == n { 0 } else { i + 1 },
    )
}

fn first_difference(u: &[f64], dphi: f64, out: &mut [f64]) {
    let n = u.len();
    let s = 0.5 / dphi;
    for i in 0..n {
        let (l, r) = neighbours(n, i);
        out[i] = (u[r] - u[l]) * s;
    }
}

fn kappa_rhs(k: &[f64], dphi: f64, out: &mut [f64]) {
    let n = k.len();
    let s = 1.0 / (dphi * dphi);
    for i in 0..n {
        let (l, r) = neighbours(n, i);
        let ki = k[i];
        out[i] = ki * ki * (k[l] - 2.0 * ki + k[r]) * s + ki * ki * ki - ki;
    }
}

fn pressure_rhs(p: &[f64], dphi: f64, out: &mut [f64]) {
    let n = p.len();
    let (s2, s1) = (1.0 / (dphi * dphi), 0.5 / dphi);
    for i in 0..n {
        let (l, r) = neighbours(n, i);
        let pi = p[i];
        let d1 = (p[r] - p[l]) * s1;
        out[i] = pi * (p[l] - 2.0 * pi + p[r]) * s2 - 0.5 * d1 * d1 + 2.0 * pi * pi - 2.0 * pi;
    }
}

/// Right-hand side of the joint `(p, q)` system stored as `[p.., q..]`.
fn pressure_q_rhs(pq: &[f64], dphi: f64, out: &mut [f64]) {
    let n = pq.len() / 2;
    let (p, q) = pq.split_at(n);
    let (dp, dq) = out.split_at_mut(n);
    pressure_rhs(p, dphi, dp);
    let s = 1.0 / (dphi * dphi);
    for i in 0..n {
        let (l, r) = neighbours(n, i);
        let qi = q[i];
        dq[i] = p[i] * ((q[l] - 2.0 * qi + q[r]) * s + 4.0 * qi) - 2.0 * qi;
    }
}

/// Classical Runge–Kutta with reusable stage buffers.
struct Rk4 {
    k: [Vec<f64>; 4],
    tmp: Vec<f64>,
}

impl Rk4 {
    fn new(len: usize) -> Self {
        Rk4 {
            k: std::array::from_fn(|_| vec![0.0; len]),
            tmp: vec![0.0; len],
        }
    }

    fn step(&mut self, u: &mut [f64], h: f64, rhs: &impl Fn(&[f64], &mut [f64])) {
        let [k1, k2, k3, k4] = &mut self.k;
        let tmp = &mut self.tmp;
        rhs(u, k1);
        for ((t, a), b) in tmp.iter_mut().zip(&*u).zip(&*k1) {
            *t = a + 0.5 * h * b;
        }
        rhs(tmp, k2);
        for ((t, a), b) in tmp.iter_mut().zip(&*u).zip(&*k2) {
            *t = a + 0.5 * h * b;
        }
        rhs(tmp, k3);
        for ((t, a), b) in tmp.iter_mut().zip(&*u).zip(&*k3) {
            *t = a + h * b;
        }
        rhs(tmp, k4);
        let w = h / 6.0;
        for i in 0..u.len() {
            u[i] += w * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
        }
    }
}

fn check_span(t_span: f64, dtau: f64) -> Result<()> {
    if !(t_span > 0.0 && t_span.is_finite()) {
        return Err(invalid("t_span", format!("must be positive, got {t_span}")));
    }
    if !(dtau > 0.0 && dtau.is_finite()) {
        return Err(invalid("dtau", format!("must be positive, got {dtau}")));
    }
    Ok(())
}

/// Steps `u0` to `t_span` and returns every step. `diffusion` gives the
/// largest diffusion coefficient of a state, which caps the step.
fn run(
    u0: &PhiGrid,
    t_span: f64,
    dtau: f64,
    diffusion: impl Fn(&[f64]) -> f64,
    rhs: impl Fn(&[f64], f64, &mut [f64]),
) -> Result<Vec<PhiGrid>> {
    check_span(t_span, dtau)?;
    let dphi = u0.dphi();
    let rhs = |u: &[f64], out: &mut [f64]| rhs(u, dphi, out);
    let mut rk = Rk4::new(u0.len());
    let mut u = u0.values.clone();
    let mut t = u0.time;
    let end = u0.time + t_span;
    let mut out = vec![u0.clone()];
    while t < end {
        let limit = 0.25 * dphi * dphi / diffusion(&u);
        let h = dtau.min(limit);
        let (h, next) = if t + h >= end {
            (end - t, end)
        } else {
            (h, t + h)
        };
        rk.step(&mut u, h, &rhs);
        if let Some(index) = first_non_positive(&u) {
            return Err(Error::LostPositivity { index, time: next });
        }
        t = next;
        out.push(u0.with_values(u.clone(), t));
    }
    Ok(out)
}

/// Evolves `κ_τ = κ² κ_φφ + κ³ − κ` from `kappa0` on the period `Φ`,
/// returning the grid after every step (the first entry is `kappa0`).
///
/// The step is `min(dtau, 0.25 dφ² / max κ²)`; the run aborts with
/// [`Error::LostPositivity`] if `κ` stops being positive.
pub fn evolve_kappa_phi(
    kappa0: &[f64],
    phi_period: f64,
    t_span: f64,
    dtau: f64,
) -> Result<Vec<PhiGrid>> {
    let g = PhiGrid::new(kappa0.to_vec(), phi_period, 0.0)?;
    run(
        &g,
        t_span,
        dtau,
        |k| k.iter().map(|k| k * k).fold(0.0, f64::max),
        kappa_rhs,
    )
}

/// Evolves `p_τ = p p_φφ − ½ p_φ² + 2p² − 2p`, returning every step.
///
/// Steps are `min(dtau, 0.25 dφ² / max p)`, so for matching inputs this run
/// takes the same steps as [`evolve_kappa_phi`].
pub fn evolve_pressure(p0: &PressureGrid, t_span: f64, dtau: f64) -> Result<Vec<PressureGrid>> {
    run(
        p0,
        t_span,
        dtau,
        |p| p.iter().copied().fold(0.0, f64::max),
        pressure_rhs,
    )
}

/// `q` evolved by its own equation alongside a pressure run.
#[derive(Debug, Clone, PartialEq)]
pub struct QRun {
    pub times: Vec<f64>,
    /// `q` at each time of the pressure series.
    pub q: Vec<Vec<f64>>,
    /// `max |q − p_φ|` over all times and grid points.
    pub gap: f64,
}

/// Evolves `q_τ = p (q_φφ + 4q) − 2q` from `q₀ = p₀_φ` and measures how far
/// it drifts from `p_φ` of the series.
///
/// `series` must hold every step of a run (as [`evolve_pressure`] returns);
/// `q` is stepped jointly with `p` over the same steps.
pub fn evolve_q(series: &[PressureGrid]) -> Result<QRun> {
    let Some(first) = series.first() else {
        return Err(Error::InsufficientData("empty pressure series".into()));
    };
    let n = first.len();
    let dphi = first.dphi();
    if series
        .iter()
        .any(|g| g.len() != n || g.phi_period != first.phi_period)
    {
        return Err(invalid("series", "grids differ in size or period"));
    }
    let rhs = |u: &[f64], out: &mut [f64]| pressure_q_rhs(u, dphi, out);
    let mut rk = Rk4::new(2 * n);
    let mut pq = first.values.clone();
    pq.extend(first.derivative());
    let mut out = QRun {
        times: vec![first.time],
        q: vec![pq[n..].to_vec()],
        gap: 0.0,
    };
    for w in series.windows(2) {
        let h = w[1].time - w[0].time;
        if !(h > 0.0) {
            return Err(invalid("series", "times must increase"));
        }
        rk.step(&mut pq, h, &rhs);
        out.times.push(w[1].time);
        out.q.push(pq[n..].to_vec());
    }
    for (g, q) in series.iter().zip(&out.q) {
        for (a, b) in g.derivative().iter().zip(q) {
            out.gap = out.gap.max((a - b).abs());
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    ShrinkingCircle,
    Horocycle,
    Equidistant,
}

/// One family of separable solutions `p = a(t)` with `b ≡ 0`.
///
/// With `kappa_separable` set, `a` is the curvature itself (`κ = a(t)`)
/// rather than the pressure, solving `a' = a³ − a` instead of
/// `a' = 2a² − 2a`; it is the square root of the pressure solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparableBranch {
    pub branch: Branch,
    /// Positive for circles and equidistant lines, zero for horocycles.
    pub c: f64,
    pub kappa_separable: bool,
}

impl SeparableBranch {
    pub fn new(branch: Branch, c: f64) -> Result<Self> {
        let s = SeparableBranch {
            branch,
            c,
            kappa_separable: false,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn horocycle() -> Self {
        SeparableBranch {
            branch: Branch::Horocycle,
            c: 0.0,
            kappa_separable: false,
        }
    }

    pub fn kappa(self) -> Self {
        SeparableBranch {
            kappa_separable: true,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.branch {
            Branch::Horocycle if self.c != 0.0 => Err(invalid(
                "c",
                format!("horocycles take c = 0, got {}", self.c),
            )),
            Branch::ShrinkingCircle | Branch::Equidistant
                if !(self.c > 0.0 && self.c.is_finite()) =>
            {
                Err(invalid("c", format!("must be positive, got {}", self.c)))
            }
            _ => Ok(()),
        }
    }

    /// The circle branch exists for `t < −½ ln C`; the others for all `t`.
    pub fn t_max(&self) -> f64 {
        match self.branch {
            Branch::ShrinkingCircle => -0.5 * self.c.ln(),
            _ => f64::INFINITY,
        }
    }

    /// Branch whose pressure at `t = 0` is `p0`.
    pub fn through(p0: f64) -> Result<Self> {
        if !(p0 > 0.0 && p0.is_finite()) {
            return Err(invalid("p0", format!("must be positive, got {p0}")));
        }
        // a(0) = 1/(1 ∓ C)
        Ok(if p0 > 1.0 {
            SeparableBranch::new(Branch::ShrinkingCircle, 1.0 - p0.recip())?
        } else if p0 < 1.0 {
            SeparableBranch::new(Branch::Equidistant, p0.recip() - 1.0)?
        } else {
            SeparableBranch::horocycle()
        })
    }
}

/// `a(t)` of the branch: `1/(1 − Ce^{2t})`, `1`, or `1/(1 + Ce^{2t})`, each
/// solving `a' = 2a² − 2a`; the square root of that for the κ-separable form.
pub fn separable_a(branch: &SeparableBranch, t: f64) -> Result<f64> {
    branch.validate()?;
    if !t.is_finite() {
        return Err(invalid("t", "must be finite"));
    }
    let u = branch.c * (2.0 * t).exp();
    let p = match branch.branch {
        Branch::Horocycle => return Ok(1.0),
        Branch::ShrinkingCircle => {
            if t >= branch.t_max() {
                return Err(invalid(
                    "t",
                    format!("circle branch ends at t = {}, got {t}", branch.t_max()),
                ));
            }
            1.0 / (1.0 - u)
        }
        Branch::Equidistant => 1.0 / (1.0 + u),
    };
    Ok(if branch.kappa_separable { p.sqrt() } else { p })
}

/// `1/√(1 + Ce^{2t})`, the solution of `a' = a³ − a` for curvature separable
/// in time and arclength. `C < 0` gives circles, `C > 0` equidistant lines.
pub fn cor47_a(c: f64, t: f64) -> Result<f64> {
    let u = 1.0 + c * (2.0 * t).exp();
    if !(u > 0.0 && u.is_finite()) {
        return Err(invalid(
            "t",
            format!("need 1 + Ce^(2t) > 0, got {u} at C = {c}, t = {t}"),
        ));
    }
    Ok(u.sqrt().recip())
}

/// Additive split `p(t, φ) ≈ a(t) + b(φ)` of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparableFit {
    pub times: Vec<f64>,
    pub a: Vec<f64>,
    /// Normalised to mean zero.
    pub b: Vec<f64>,
    /// `max |p − a − b|`.
    pub residual: f64,
}

/// Least-squares additive split: `a(t)` is the `φ`-mean of each slice and
/// `b(φ)` the time-mean of what is left.
pub fn separable_fit(series: &[PhiGrid]) -> Result<SeparableFit> {
    if series.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "separable fit needs at least 3 time slices, got {}",
            series.len()
        )));
    }
    let n = series[0].len();
    if series.iter().any(|g| g.len() != n) {
        return Err(invalid("series", "slices differ in size"));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let a: Vec<f64> = series.iter().map(|g| mean(&g.values)).collect();
    let mut b = vec![0.0; n];
    for (g, ai) in series.iter().zip(&a) {
        for (bj, p) in b.iter_mut().zip(&g.values) {
            *bj += p - ai;
        }
    }
    let m = series.len() as f64;
    b.iter_mut().for_each(|x| *x /= m);
    let mut residual = 0.0f64;
    for (g, ai) in series.iter().zip(&a) {
        for (bj, p) in b.iter().zip(&g.values) {
            residual = residual.max((p - ai - bj).abs());
        }
    }
    Ok(SeparableFit {
        times: series.iter().map(|g| g.time).collect(),
        a,
        b,
        residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeparableFamily {
    ShrinkingCircle,
    Horocycle,
    Equidistant,
    Soliton,
    Unclassified,
}

/// Relative spread below which samples count as constant.
pub const CONSTANT_RTOL: f64 = 1e-4;

/// `(max − min) < CONSTANT_RTOL · (1 + |mean|)`.
pub fn is_constant(v: &[f64]) -> bool {
    if v.is_empty() {
        return true;
    }
    let (lo, hi) = v
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    hi - lo < CONSTANT_RTOL * (1.0 + mean.abs())
}

/// Names the family of a separable pressure `a(t) + b(φ)`.
///
/// Nonconstant `b` forces `a` constant (a soliton). With `b` constant, `a`
/// must follow one of the branches of [`separable_a`]: increasing above 1
/// (circles), identically 1 (horocycles) or decreasing below 1 (equidistant
/// lines). Anything else is [`SeparableFamily::Unclassified`].
pub fn classify_separable(a: &[f64], b: &[f64]) -> SeparableFamily {
    if a.is_empty() || b.is_empty() || a.iter().chain(b).any(|x| !x.is_finite()) {
        return SeparableFamily::Unclassified;
    }
    let (a_const, b_const) = (is_constant(a), is_constant(b));
    if !b_const {
        return if a_const {
            SeparableFamily::Soliton
        } else {
            SeparableFamily::Unclassified
        };
    }
    if a_const {
        return if is_constant(&[a[0], 1.0]) {
            SeparableFamily::Horocycle
        } else {
            SeparableFamily::Unclassified
        };
    }
    let increasing = a.windows(2).all(|w| w[1] >= w[0]);
    let decreasing = a.windows(2).all(|w| w[1] <= w[0]);
    if increasing && a.iter().all(|&x| x > 1.0) {
        SeparableFamily::ShrinkingCircle
    } else if decreasing && a.iter().all(|&x| x < 1.0) {
        SeparableFamily::Equidistant
    } else {
        SeparableFamily::Unclassified
    }
}

/// `2b'/(b''' + 4b') − b` on the grid of `b`: the value `a(t)` would need
/// for `a + b` with nonconstant `b` to solve the pressure equation with
/// `q_t = 0`. It depends on `φ` unless `b` is special, which rules out any
/// nonconstant `a`.
pub fn separability_obstruction(b: &[f64], phi_period: f64) -> Result<Vec<f64>> {
    let n = b.len();
    if n < PhiGrid::MIN_POINTS {
        return Err(invalid(
            "b",
            format!("need at least {} points", PhiGrid::MIN_POINTS),
        ));
    }
    let d = phi_period / n as f64;
    let mut d1 = vec![0.0; n];
    first_difference(b, d, &mut d1);
    let d3: Vec<f64> = (0..n)
        .map(|i| {
            let (l, r) = neighbours(n, i);
            (d1[l] - 2.0 * d1[i] + d1[r]) / (d * d)
        })
        .collect();
    Ok((0..n)
        .map(|i| 2.0 * d1[i] / (d3[i] + 4.0 * d1[i]) - b[i])
        .collect())
}
