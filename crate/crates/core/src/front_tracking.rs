//! Explicit front tracking for the curve shortening flow.
//!
//! Each node moves with the Euclidean components of `κN` (explicit midpoint
//! rule); after every step the curve is redistributed to uniform hyperbolic
//! arclength. The redistribution only slides nodes along the curve, which
//! the flow leaves unconstrained.
//!
//! Runs record per-step diagnostics that compare against exact laws: the
//! Gauss–Bonnet identity `∫κ ds = 2π + A`, the area law
//! `A(t) = (A₀ + 2π)e^{-t} − 2π`, and the curvature evolution
//! `κ_t = κ_ss + κ³ − κ`.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

mod kernel;

use crate::curves::{curvature_profile, resample_by_arclength, CurveFrame, DiscreteCurve};
use crate::error::{invalid, Error, Result};
use crate::hypgeo::Point;
use kernel::Kernel;

/// Numerical settings for [`evolve`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolveParams {
    /// Step is `cfl · h_min²`, `h_min` the smallest hyperbolic edge length.
    pub cfl: f64,
    pub n_nodes: usize,
    pub t_end: f64,
    /// Redistribute nodes every this many steps.
    pub resample_every: usize,
    pub stop_min_y: f64,
    pub stop_min_length: f64,
    /// Keep a snapshot every this many steps (the first and last are always kept).
    pub snapshot_every: usize,
}

impl EvolveParams {
    pub const MIN_NODES: usize = 32;

    pub fn new(n_nodes: usize, t_end: f64) -> Self {
        EvolveParams {
            cfl: 0.1,
            n_nodes,
            t_end,
            resample_every: 1,
            stop_min_y: 1e-4,
            stop_min_length: 1e-3,
            snapshot_every: 100,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 0.5) {
            return Err(invalid(
                "cfl",
                format!("must lie in (0, 0.5], got {}", self.cfl),
            ));
        }
        if self.n_nodes < Self::MIN_NODES {
            return Err(invalid(
                "n_nodes",
                format!("must be at least {}, got {}", Self::MIN_NODES, self.n_nodes),
            ));
        }
        if !(self.t_end > 0.0) {
            return Err(invalid(
                "t_end",
                format!("must be positive, got {}", self.t_end),
            ));
        }
        if self.resample_every == 0 {
            return Err(invalid("resample_every", "must be at least 1"));
        }
        if self.snapshot_every == 0 {
            return Err(invalid("snapshot_every", "must be at least 1"));
        }
        if !(self.stop_min_y >= 0.0) {
            return Err(invalid("stop_min_y", "must be non-negative"));
        }
        if !(self.stop_min_length >= 0.0) {
            return Err(invalid("stop_min_length", "must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    ReachedTEnd,
    /// Total length fell below `stop_min_length`.
    Collapsed,
    /// Some node came closer to the ideal boundary than `stop_min_y`.
    HitBoundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: f64,
    pub length: f64,
    pub area: f64,
    pub gb_defect: f64,
    pub area_law_residual: f64,
    pub min_y: f64,
    pub max_kappa: f64,
    /// Longest over shortest edge before redistribution.
    pub spacing_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    pub curve: DiscreteCurve,
}

/// Result of [`evolve`]. Record `k` of `diagnostics` describes the curve
/// after `k` steps.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowTrace {
    pub params: EvolveParams,
    pub snapshots: Vec<Snapshot>,
    pub diagnostics: Vec<StepRecord>,
    pub termination: Termination,
}

impl FlowTrace {
    pub fn initial_area(&self) -> f64 {
        self.diagnostics[0].area
    }

    pub fn final_time(&self) -> f64 {
        self.diagnostics.last().map_or(0.0, |r| r.t)
    }
}

/// One explicit midpoint step of size `dt` without redistribution. Works on
/// open curves too (end nodes move with their extrapolated curvature).
pub fn advance(c: &DiscreteCurve, dt: f64) -> Result<DiscreteCurve> {
    if !(dt > 0.0) {
        return Err(invalid("dt", format!("must be positive, got {dt}")));
    }
    let frame = curvature_profile(c)?;
    advance_with(c, &frame, dt)
}

fn advance_with(c: &DiscreteCurve, frame: &CurveFrame, dt: f64) -> Result<DiscreteCurve> {
    let half = displace(c, frame, 0.5 * dt)?;
    let mid = curvature_profile(&half)?;
    displace(c, &mid, dt)
}

fn displace(c: &DiscreteCurve, frame: &CurveFrame, dt: f64) -> Result<DiscreteCurve> {
    // DiscreteCurve::new validates every node
    let nodes = c
        .nodes()
        .iter()
        .zip(frame.kappa.iter().zip(&frame.normal))
        .map(|(p, (k, n))| Point {
            x: p.x + dt * k * n.u,
            y: p.y + dt * k * n.v,
        })
        .collect();
    DiscreteCurve::new(nodes, c.is_closed())
}

/// One step of size `dt` followed by redistribution to uniform arclength
/// with the same node count. Closed curves only.
pub fn step(c: &DiscreteCurve, dt: f64) -> Result<DiscreteCurve> {
    if !c.is_closed() {
        return Err(Error::OpenCurve);
    }
    resample_by_arclength(&advance(c, dt)?, c.len())
}

/// `(A₀ + 2π) e^{-t} − 2π`.
pub fn area_law(area0: f64, t: f64) -> f64 {
    (area0 + TAU) * (-t).exp() - TAU
}

/// Runs the flow from `c0` (redistributed to `p.n_nodes` first) until
/// `t_end`, collapse, or approach to the ideal boundary.
pub fn evolve(c0: &DiscreteCurve, p: &EvolveParams) -> Result<FlowTrace> {
    p.validate()?;
    if !c0.is_closed() {
        return Err(Error::OpenCurve);
    }
    let c = resample_by_arclength(c0, p.n_nodes)?;
    let mut kernel = Kernel::new(&c)?;
    let area0 = kernel.record(0.0, 0.0, 1.0).0.area;
    let (first, mut h_min) = kernel.record(0.0, area0, 1.0);
    let mut diagnostics = vec![first];
    let mut snapshots = vec![Snapshot {
        step: 0,
        t: 0.0,
        curve: c,
    }];
    let mut t = 0.0;
    let mut steps = 0usize;
    let failed = |t: f64| {
        move |e: Error| Error::StepFailed {
            t,
            source: Box::new(e),
        }
    };
    let termination = loop {
        let last = diagnostics.last().expect("initial record");
        if t >= p.t_end {
            break Termination::ReachedTEnd;
        }
        if last.length < p.stop_min_length {
            break Termination::Collapsed;
        }
        if last.min_y < p.stop_min_y {
            break Termination::HitBoundary;
        }
        let dt = (p.cfl * h_min * h_min).min(p.t_end - t);
        kernel.advance(dt).map_err(failed(t))?;
        steps += 1;
        let ratio = kernel
            .settle(steps.is_multiple_of(p.resample_every))
            .map_err(failed(t))?;
        t = if dt >= p.t_end - t { p.t_end } else { t + dt };
        let (record, h) = kernel.record(t, area0, ratio);
        h_min = h;
        diagnostics.push(record);
        if steps.is_multiple_of(p.snapshot_every) {
            snapshots.push(Snapshot {
                step: steps,
                t,
                curve: kernel.curve().map_err(failed(t))?,
            });
        }
    };
    if snapshots.last().map(|s| s.step) != Some(steps) {
        snapshots.push(Snapshot {
            step: steps,
            t,
            curve: kernel.curve()?,
        });
    }
    Ok(FlowTrace {
        params: p.clone(),
        snapshots,
        diagnostics,
        termination,
    })
}

/// `A(t) − ((A₀ + 2π)e^{-t} − 2π)` at every recorded step.
pub fn area_law_residual(trace: &FlowTrace) -> Vec<f64> {
    trace
        .diagnostics
        .iter()
        .map(|r| r.area_law_residual)
        .collect()
}

/// Arclength derivatives of nodal values on a (nearly) uniform curve.
/// Ends of open curves get `NaN`.
struct ArcDerivatives {
    first: Vec<f64>,
    second: Vec<f64>,
}

fn arc_derivatives(c: &DiscreteCurve, f: &[f64]) -> ArcDerivatives {
    let n = c.len();
    let seg = c.segment_lengths();
    let mut first = vec![f64::NAN; n];
    let mut second = vec![f64::NAN; n];
    for i in 0..n {
        let (prev, next, hb, ha) = if c.is_closed() {
            ((i + n - 1) % n, (i + 1) % n, seg[(i + n - 1) % n], seg[i])
        } else if i == 0 || i == n - 1 {
            continue;
        } else {
            (i - 1, i + 1, seg[i - 1], seg[i])
        };
        let (fa, fb) = (f[next] - f[i], f[i] - f[prev]);
        first[i] = (fa * hb / ha + fb * ha / hb) / (ha + hb);
        second[i] = 2.0 * (fa / ha - fb / hb) / (ha + hb);
    }
    ArcDerivatives { first, second }
}

/// Residual of `κ_t = κ_ss + κ³ − κ` at each interior snapshot (max over nodes).
///
/// Needs snapshots of a run redistributed every step: then node 0 follows a
/// normal trajectory and node `i` sits at arclength fraction `i/n`, so the
/// index-wise time derivative is corrected by the tangential drift
/// `v_i = ∫₀^{s_i} κ² − (i/n) ∫ κ²` of the node relative to material points.
pub fn curvature_evolution_residual(trace: &FlowTrace) -> Result<Vec<f64>> {
    if trace.params.resample_every != 1 {
        return Err(invalid(
            "resample_every",
            "curvature residual needs redistribution every step",
        ));
    }
    let snaps = &trace.snapshots;
    if snaps.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need at least 3 snapshots, got {}",
            snaps.len()
        )));
    }
    let kappas = snaps
        .iter()
        .map(|s| curvature_profile(&s.curve).map(|f| f.kappa))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(snaps.len() - 2);
    for k in 1..snaps.len() - 1 {
        let (t0, t1, t2) = (snaps[k - 1].t, snaps[k].t, snaps[k + 1].t);
        let (h0, h1) = (t1 - t0, t2 - t1);
        // three-point derivative at the middle time on a non-uniform grid
        let w0 = -h1 / (h0 * (h0 + h1));
        let w1 = (h1 - h0) / (h0 * h1);
        let w2 = h0 / (h1 * (h0 + h1));
        let c = &snaps[k].curve;
        let kap = &kappas[k];
        let n = c.len();
        let d = arc_derivatives(c, kap);
        let seg = c.segment_lengths();
        let mut cum = 0.0;
        let mut partial = Vec::with_capacity(n);
        for i in 0..n {
            partial.push(cum);
            let next = kap[(i + 1) % n];
            cum += 0.5 * (kap[i] * kap[i] + next * next) * seg[i];
        }
        let total = cum;
        let mut worst = 0.0f64;
        for i in 0..n {
            let drift = partial[i] - total * i as f64 / n as f64;
            let kt =
                w0 * kappas[k - 1][i] + w1 * kap[i] + w2 * kappas[k + 1][i] - d.first[i] * drift;
            let r = kt - (d.second[i] + kap[i].powi(3) - kap[i]);
            worst = worst.max(r.abs());
        }
        out.push(worst);
    }
    Ok(out)
}

/// Residuals of the angle identities on one curve.
///
/// `r1 = max |θ_s − (κ − cos θ)|` with `θ` the Euclidean tangent angle and `s`
/// hyperbolic arclength; `r2 = max |(y − 1)(κ_ss + κ_s sin θ)|`, a diagnostic.
/// End nodes of open curves are skipped.
pub fn theta_residuals_of_curve(c: &DiscreteCurve) -> Result<(f64, f64)> {
    let frame = curvature_profile(c)?;
    let theta: Vec<f64> = frame.tangent.iter().map(|t| t.v.atan2(t.u)).collect();
    let n = c.len();
    let seg = c.segment_lengths();
    let dk = arc_derivatives(c, &frame.kappa);
    let wrap = |a: f64| (a + std::f64::consts::PI).rem_euclid(TAU) - std::f64::consts::PI;
    let (mut r1, mut r2) = (0.0f64, 0.0f64);
    for i in 0..n {
        let (prev, next, hb, ha) = if c.is_closed() {
            ((i + n - 1) % n, (i + 1) % n, seg[(i + n - 1) % n], seg[i])
        } else if i == 0 || i == n - 1 {
            continue;
        } else {
            (i - 1, i + 1, seg[i - 1], seg[i])
        };
        let (fa, fb) = (wrap(theta[next] - theta[i]), wrap(theta[i] - theta[prev]));
        let theta_s = (fa * hb / ha + fb * ha / hb) / (ha + hb);
        let th = theta[i];
        r1 = r1.max((theta_s - (frame.kappa[i] - th.cos())).abs());
        let y = c.nodes()[i].y;
        r2 = r2.max(((y - 1.0) * (dk.second[i] + dk.first[i] * th.sin())).abs());
    }
    Ok((r1, r2))
}

/// [`theta_residuals_of_curve`] for every snapshot.
pub fn theta_identity_residuals(trace: &FlowTrace) -> Result<Vec<(f64, f64)>> {
    trace
        .snapshots
        .iter()
        .map(|s| theta_residuals_of_curve(&s.curve))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularityEstimate {
    /// Extrapolated time at which the enclosed area vanishes.
    pub t_collapse: f64,
    /// Fitted constant of `A(t) + 2π = C e^{-t}`.
    pub c: f64,
    pub records_used: usize,
}

/// Fits `A(t) + 2π = C e^{-t}` to the last tenth of the records of a
/// collapsed run and solves `A = 0`, giving `t* = ln(C / 2π)`.
pub fn singularity_estimate(trace: &FlowTrace) -> Result<SingularityEstimate> {
    if trace.termination != Termination::Collapsed {
        return Err(invalid("trace", "run did not terminate by collapse"));
    }
    area_law_fit(&trace.diagnostics)
}

/// The same fit on any run: the area law holds for all time, so the tail of
/// a run stopped before collapse still predicts when it would collapse.
pub fn area_law_fit(d: &[StepRecord]) -> Result<SingularityEstimate> {
    let used = (d.len() / 10).max(3);
    if d.len() < used {
        return Err(Error::InsufficientData(format!(
            "need at least 3 records, got {}",
            d.len()
        )));
    }
    let tail = &d[d.len() - used..];
    let ln_c = tail.iter().map(|r| (r.area + TAU).ln() + r.t).sum::<f64>() / used as f64;
    let c = ln_c.exp();
    Ok(SingularityEstimate {
        t_collapse: ln_c - TAU.ln(),
        c,
        records_used: used,
    })
}
