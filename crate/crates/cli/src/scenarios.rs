//! Runs one scenario and writes its files into the output directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use hcsf_core::analytic_flows::AnalyticFamily;
use hcsf_core::curves::{
    curvature_profile, euclidean_ellipse, hyperbolic_circle, hyperbolic_length, DiscreteCurve,
};
use hcsf_core::front_tracking::{area_law_fit, evolve, EvolveParams, Termination};
use hcsf_core::hypgeo::Point;
use hcsf_core::intrinsic_pde::{
    circle_pressure, classify_separable, evolve_kappa_phi, evolve_pressure, evolve_q, is_constant,
    separable_a, separable_fit, PhiGrid, SeparableBranch, SeparableFamily,
};
use hcsf_core::solitons::{
    gallery_start, integrate_soliton, soliton_curvature, verify_soliton_by_isometry, SolitonState,
};
use serde::Serialize;

use crate::config::{
    AnalyticInitial, AnalyticSolver, CurveSpec, EvolveSolver, PdeSolver, PressureSpec,
    ScenarioConfig, Setup, SolitonInitial, SolitonSolver,
};
use crate::output::{
    num, snapshot_rows, write_json, DiagnosticsRow, Table, DIAGNOSTICS_HEADER, GRID_HEADER,
    SNAPSHOT_HEADER,
};
use crate::RunError;

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub scenario: String,
    pub termination: String,
    pub t_final: f64,
    pub steps: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fitted_collapse_time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fitted_c: Option<f64>,
    pub tags: Vec<String>,
    pub metrics: BTreeMap<String, f64>,
    pub files: Vec<String>,
    pub seed: u64,
}

impl Summary {
    fn new(scenario: &str, seed: u64) -> Self {
        Summary {
            scenario: scenario.into(),
            termination: "completed".into(),
            t_final: 0.0,
            steps: 0,
            fitted_collapse_time: None,
            fitted_c: None,
            tags: Vec::new(),
            metrics: BTreeMap::new(),
            files: Vec::new(),
            seed,
        }
    }

    fn metric(&mut self, name: impl Into<String>, v: f64) {
        self.metrics.insert(name.into(), v);
    }
}

/// Validates `cfg`, runs it, and writes its files plus `summary.json` into
/// `out`. Verify configurations are handled by [`crate::verify`].
pub fn run_scenario(cfg: &ScenarioConfig, out: &Path) -> Result<Summary, RunError> {
    let errors = cfg.validate();
    if !errors.is_empty() {
        return Err(RunError::Config(errors));
    }
    fs::create_dir_all(out)?;
    let mut summary = match cfg {
        ScenarioConfig::Evolve(s) => run_evolve(s, out)?,
        ScenarioConfig::Analytic(s) => run_analytic(s, out)?,
        ScenarioConfig::Soliton(s) => run_soliton(s, out)?,
        ScenarioConfig::Intrinsic(s) => run_intrinsic(s, out)?,
        ScenarioConfig::Verify(_) => {
            return Err(RunError::Usage(
                "verify runs through `hcsf verify`, not run_scenario".into(),
            ))
        }
    };
    summary.files.push("summary.json".into());
    write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}

fn point(p: [f64; 2]) -> Result<Point, RunError> {
    Ok(Point::new(p[0], p[1])?)
}

pub fn initial_curve(spec: &CurveSpec) -> Result<DiscreteCurve, RunError> {
    Ok(match spec {
        CurveSpec::Circle {
            center,
            radius,
            nodes,
        } => hyperbolic_circle(&point(*center)?, *radius, *nodes)?,
        CurveSpec::Ellipse {
            center,
            a,
            b,
            nodes,
        } => euclidean_ellipse(&point(*center)?, *a, *b, *nodes)?,
        CurveSpec::Points { points, .. } => DiscreteCurve::closed(
            points
                .iter()
                .map(|p| point(*p))
                .collect::<Result<Vec<_>, _>>()?,
        )?,
    })
}

fn run_evolve(s: &Setup<CurveSpec, EvolveSolver>, out: &Path) -> Result<Summary, RunError> {
    let c0 = initial_curve(&s.initial)?;
    let v = &s.solver;
    let params = EvolveParams {
        cfl: v.cfl,
        n_nodes: s.initial.nodes(),
        t_end: v.t_end,
        resample_every: v.resample_every,
        stop_min_y: v.stop_min_y,
        stop_min_length: v.stop_min_length,
        snapshot_every: s.snapshot_stride,
    };
    let trace = evolve(&c0, &params)?;

    let mut snaps = Table::create(&out.join("snapshots.csv"), &SNAPSHOT_HEADER)?;
    for snap in &trace.snapshots {
        snapshot_rows(&mut snaps, snap.t, &snap.curve)?;
    }
    snaps.finish()?;
    let mut diag = Table::create(&out.join("diagnostics.csv"), &DIAGNOSTICS_HEADER)?;
    for r in &trace.diagnostics {
        diag.row(&DiagnosticsRow::from(r).fields())?;
    }
    diag.finish()?;

    let mut sum = Summary::new("evolve", s.seed);
    sum.files = vec!["snapshots.csv".into(), "diagnostics.csv".into()];
    sum.termination = match trace.termination {
        Termination::ReachedTEnd => "reached_t_end",
        Termination::Collapsed => "collapsed",
        Termination::HitBoundary => "hit_boundary",
    }
    .into();
    sum.tags.push(sum.termination.clone());
    sum.t_final = trace.final_time();
    sum.steps = trace.diagnostics.len() - 1;
    if let Ok(fit) = area_law_fit(&trace.diagnostics) {
        sum.fitted_collapse_time = Some(fit.t_collapse);
        sum.fitted_c = Some(fit.c);
    }
    let a0 = trace.initial_area();
    let max_abs = |f: fn(&hcsf_core::front_tracking::StepRecord) -> f64| {
        trace
            .diagnostics
            .iter()
            .map(f)
            .fold(0.0f64, |m, x| m.max(x.abs()))
    };
    sum.metric("initial_area", a0);
    sum.metric("max_abs_gb_defect", max_abs(|r| r.gb_defect));
    sum.metric(
        "max_rel_area_law_residual",
        max_abs(|r| r.area_law_residual) / a0,
    );
    sum.metric(
        "area_law_collapse_time",
        ((a0 + std::f64::consts::TAU) / std::f64::consts::TAU).ln(),
    );
    if let CurveSpec::Circle { radius, .. } = s.initial {
        sum.metric("exact_collapse_time", radius.cosh().ln());
    }
    Ok(sum)
}

fn t_grid(v: &AnalyticSolver) -> Vec<f64> {
    if v.times == 1 {
        return vec![v.t_start];
    }
    let last = (v.times - 1) as f64;
    (0..v.times)
        .map(|i| v.t_start + (v.t_end - v.t_start) * i as f64 / last)
        .collect()
}

fn monotone_tag(values: &[f64]) -> &'static str {
    let up = values.windows(2).all(|w| w[1] >= w[0]);
    let down = values.windows(2).all(|w| w[1] <= w[0]);
    match (up, down) {
        (true, true) => "curvature_constant",
        (true, false) => "curvature_increasing",
        (false, true) => "curvature_decreasing",
        _ => "curvature_not_monotone",
    }
}

fn run_analytic(
    s: &Setup<AnalyticInitial, AnalyticSolver>,
    out: &Path,
) -> Result<Summary, RunError> {
    let f: AnalyticFamily = s.initial.family;
    let n = s.initial.nodes;
    let times = t_grid(&s.solver);
    let mut snaps = Table::create(&out.join("snapshots.csv"), &SNAPSHOT_HEADER)?;
    let mut diag = Table::create(&out.join("diagnostics.csv"), &DIAGNOSTICS_HEADER)?;
    let (mut residual, mut kappa_err) = (0.0f64, 0.0f64);
    let mut exact = Vec::with_capacity(times.len());
    let mut area0 = f64::NAN;
    for (k, &t) in times.iter().enumerate() {
        let c = f.slice(t, n).map_err(|e| RunError::solver_at(e, t))?;
        if k == 0 && c.is_closed() {
            area0 = hcsf_core::curves::enclosed_area(&c)?;
        }
        snapshot_rows(&mut snaps, t, &c)?;
        diag.row(&DiagnosticsRow::of_curve(t, &c, times[0], area0).fields())?;
        let e = f.exact_curvature(t)?;
        exact.push(e);
        let frame = curvature_profile(&c)?;
        kappa_err = frame
            .kappa
            .iter()
            .fold(kappa_err, |m, k| m.max((k - e).abs()));
        let r = f.residual(t, n).map_err(|e| RunError::solver_at(e, t))?;
        residual = r.iter().fold(residual, |m, x| m.max(x.abs()));
    }
    snaps.finish()?;
    diag.finish()?;

    let mut sum = Summary::new("analytic", s.seed);
    sum.files = vec!["snapshots.csv".into(), "diagnostics.csv".into()];
    sum.t_final = *times.last().expect("at least one time");
    sum.steps = times.len();
    sum.tags = vec![f.name().into(), monotone_tag(&exact).into()];
    sum.metric("max_abs_csf_residual", residual);
    sum.metric("max_abs_curvature_error", kappa_err);
    sum.metric("exact_curvature_first", exact[0]);
    sum.metric("exact_curvature_last", *exact.last().expect("nonempty"));
    Ok(sum)
}

/// Self-consistency and isometry residuals above which a soliton is not
/// tagged as certified.
const SOLITON_TOL: f64 = 1e-4;

fn run_soliton(s: &Setup<SolitonInitial, SolitonSolver>, out: &Path) -> Result<Summary, RunError> {
    let mut sum = Summary::new("soliton", s.seed);
    for &kind in &s.initial.kinds {
        let (gallery, gallery_span) = gallery_start(kind);
        let start = match s.initial.start {
            Some(st) => SolitonState::new(st.x, st.y, st.theta)?,
            None => gallery,
        };
        let span = s.initial.s_span.unwrap_or(gallery_span);
        let sol = integrate_soliton(kind, &start, span, s.solver.h)?;
        let frame = curvature_profile(&sol.curve)?;
        let name = format!("soliton_{}.csv", kind.name());
        let mut t = Table::create(
            &out.join(&name),
            &[
                "node_index",
                "s",
                "x",
                "y",
                "theta",
                "kappa",
                "soliton_kappa",
            ],
        )?;
        let mut consistency = 0.0f64;
        for (i, st) in sol.states.iter().enumerate() {
            let want = soliton_curvature(kind, &st.point(), st.theta);
            consistency = consistency.max((frame.kappa[i] - want).abs());
            t.row(&[
                i.to_string(),
                num(sol.s[i]),
                num(st.x),
                num(st.y),
                num(st.theta),
                num(frame.kappa[i]),
                num(want),
            ])?;
        }
        t.finish()?;
        let iso = verify_soliton_by_isometry(&sol.curve, kind, s.solver.verify_dt)?;
        let k = kind.name();
        sum.metric(format!("{k}.self_consistency"), consistency);
        sum.metric(format!("{k}.isometry_residual"), iso);
        sum.metric(
            format!("{k}.length_error"),
            hyperbolic_length(&sol.curve) - 2.0 * span,
        );
        sum.metric(format!("{k}.nodes"), sol.curve.len() as f64);
        if consistency < SOLITON_TOL && iso < SOLITON_TOL {
            sum.tags.push(format!("{k}:certified"));
        } else {
            sum.tags.push(format!("{k}:not_certified"));
        }
        sum.files.push(name);
    }
    Ok(sum)
}

fn initial_pressure(spec: &PressureSpec) -> Result<PhiGrid, RunError> {
    Ok(match *spec {
        PressureSpec::Circle { radius, points } => circle_pressure(radius, points)?,
        PressureSpec::Constant {
            value,
            period,
            points,
        } => PhiGrid::constant(points, period, value)?,
        PressureSpec::Wave {
            mean,
            amplitude,
            mode,
            period,
            points,
        } => PhiGrid::from_fn(points, period, |phi| {
            mean + amplitude * (std::f64::consts::TAU * mode as f64 * phi / period).sin()
        })?,
    })
}

fn write_grids<'a>(
    path: &Path,
    stride: usize,
    frames: impl ExactSizeIterator<Item = (f64, &'a [f64])>,
) -> Result<(), RunError> {
    let mut t = Table::create(path, &GRID_HEADER)?;
    let last = frames.len().saturating_sub(1);
    for (k, (tau, values)) in frames.enumerate() {
        if k % stride != 0 && k != last {
            continue;
        }
        for (i, v) in values.iter().enumerate() {
            t.row(&[num(tau), i.to_string(), num(*v)])?;
        }
    }
    Ok(t.finish()?)
}

fn run_intrinsic(s: &Setup<PressureSpec, PdeSolver>, out: &Path) -> Result<Summary, RunError> {
    let p0 = initial_pressure(&s.initial)?;
    let (span, dtau) = (s.solver.t_span, s.solver.dtau);
    let p_run = evolve_pressure(&p0, span, dtau)?;
    let k0: Vec<f64> = p0.values.iter().map(|p| p.sqrt()).collect();
    let k_run = evolve_kappa_phi(&k0, p0.phi_period, span, dtau)?;
    let q_run = evolve_q(&p_run)?;

    let stride = s.snapshot_stride;
    write_grids(
        &out.join("pressure.csv"),
        stride,
        p_run.iter().map(|g| (g.time, g.values.as_slice())),
    )?;
    write_grids(
        &out.join("kappa.csv"),
        stride,
        k_run.iter().map(|g| (g.time, g.values.as_slice())),
    )?;
    write_grids(
        &out.join("q.csv"),
        stride,
        q_run
            .times
            .iter()
            .copied()
            .zip(q_run.q.iter().map(Vec::as_slice)),
    )?;

    let mut sum = Summary::new("intrinsic", s.seed);
    sum.files = vec!["pressure.csv".into(), "kappa.csv".into(), "q.csv".into()];
    let last = p_run.last().expect("run holds its start");
    sum.t_final = last.time;
    sum.steps = p_run.len() - 1;
    sum.metric("phi_period", p0.phi_period);
    sum.metric("q_gap", q_run.gap);
    // frames are compared where both runs stepped to the same time
    let mut gap = 0.0f64;
    for (k, p) in k_run.iter().zip(&p_run) {
        if (k.time - p.time).abs() <= 1e-12 {
            for (a, b) in k.values.iter().zip(&p.values) {
                gap = gap.max((a * a - b).abs());
            }
        }
    }
    let (kl, pl) = (k_run.last().expect("nonempty"), last);
    for (a, b) in kl.values.iter().zip(&pl.values) {
        gap = gap.max((a * a - b).abs());
    }
    sum.metric("kappa_pressure_gap", gap);
    if is_constant(&p0.values) {
        let branch = SeparableBranch::through(p0.values[0])?;
        let mut err = 0.0f64;
        for g in &p_run {
            let a = separable_a(&branch, g.time)?;
            err = g.values.iter().fold(err, |m, v| m.max((v - a).abs()));
        }
        sum.metric("branch_error", err);
        sum.metric("branch_c", branch.c);
    }
    let family = match separable_fit(&p_run) {
        Ok(fit) => {
            sum.metric("separable_residual", fit.residual);
            classify_separable(&fit.a, &fit.b)
        }
        Err(_) => SeparableFamily::Unclassified,
    };
    sum.tags.push(
        serde_json::to_value(family)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default(),
    );
    Ok(sum)
}
