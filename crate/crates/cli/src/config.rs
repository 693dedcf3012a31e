//! Scenario configuration: a JSON document with `"version": 1` and a
//! `"scenario"` tag selecting the shape of `initial` and `solver`.

use std::fmt;
use std::path::{Path, PathBuf};

use hcsf_core::analytic_flows::AnalyticFamily;
use hcsf_core::hypgeo::KillingKind;
use serde::{Deserialize, Serialize};

pub const CONFIG_VERSION: u32 = 1;

/// A parsed scenario configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scenario", rename_all = "snake_case")]
pub enum ScenarioConfig {
    Analytic(Setup<AnalyticInitial, AnalyticSolver>),
    Evolve(Setup<CurveSpec, EvolveSolver>),
    Soliton(Setup<SolitonInitial, SolitonSolver>),
    Intrinsic(Setup<PressureSpec, PdeSolver>),
    Verify(VerifySetup),
}

/// Fields shared by every runnable scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Setup<I, S> {
    pub version: u32,
    pub initial: I,
    #[serde(default)]
    pub solver: S,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Steps between snapshots (evolve) or recorded grids (intrinsic).
    #[serde(default = "default_stride")]
    pub snapshot_stride: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_stride() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySetup {
    pub version: u32,
    #[serde(default = "all_suites")]
    pub suites: Vec<Suite>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

fn all_suites() -> Vec<Suite> {
    vec![Suite::All]
}

impl Default for VerifySetup {
    fn default() -> Self {
        VerifySetup {
            version: CONFIG_VERSION,
            suites: all_suites(),
            output: None,
            seed: 0,
        }
    }
}

/// Groups of checks run by `hcsf verify`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    All,
    Geometry,
    Analytic,
    AreaLaw,
    Collapse,
    Solitons,
    Intrinsic,
    Classification,
}

impl Suite {
    /// Every concrete suite, in report order.
    pub const EACH: [Suite; 7] = [
        Suite::Geometry,
        Suite::Analytic,
        Suite::AreaLaw,
        Suite::Collapse,
        Suite::Solitons,
        Suite::Intrinsic,
        Suite::Classification,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::All => "all",
            Suite::Geometry => "geometry",
            Suite::Analytic => "analytic",
            Suite::AreaLaw => "area-law",
            Suite::Collapse => "collapse",
            Suite::Solitons => "solitons",
            Suite::Intrinsic => "intrinsic",
            Suite::Classification => "classification",
        }
    }

    pub fn parse(s: &str) -> Option<Suite> {
        std::iter::once(Suite::All)
            .chain(Suite::EACH)
            .find(|x| x.name() == s)
    }

    /// Expands `all` and removes duplicates, keeping report order.
    pub fn expand(selection: &[Suite]) -> Vec<Suite> {
        Suite::EACH
            .into_iter()
            .filter(|s| selection.contains(&Suite::All) || selection.contains(s))
            .collect()
    }
}

/// Initial closed curve for `evolve`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveSpec {
    /// Hyperbolic circle of radius `radius` about `center`.
    Circle {
        center: [f64; 2],
        radius: f64,
        nodes: usize,
    },
    /// Euclidean ellipse with semi-axes `a` (horizontal) and `b`.
    Ellipse {
        center: [f64; 2],
        a: f64,
        b: f64,
        nodes: usize,
    },
    /// Closed polygon through `points` (counterclockwise), redistributed to `nodes`.
    Points { points: Vec<[f64; 2]>, nodes: usize },
}

impl CurveSpec {
    pub fn nodes(&self) -> usize {
        match *self {
            CurveSpec::Circle { nodes, .. }
            | CurveSpec::Ellipse { nodes, .. }
            | CurveSpec::Points { nodes, .. } => nodes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveSolver {
    pub cfl: f64,
    pub t_end: f64,
    pub resample_every: usize,
    pub stop_min_y: f64,
    pub stop_min_length: f64,
}

impl Default for EvolveSolver {
    fn default() -> Self {
        let p = hcsf_core::front_tracking::EvolveParams::new(64, 10.0);
        EvolveSolver {
            cfl: p.cfl,
            t_end: p.t_end,
            resample_every: p.resample_every,
            stop_min_y: p.stop_min_y,
            stop_min_length: p.stop_min_length,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyticInitial {
    pub family: AnalyticFamily,
    pub nodes: usize,
}

/// Time grid `t_start, …, t_end` with `times` points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyticSolver {
    pub t_start: f64,
    pub t_end: f64,
    pub times: usize,
}

impl Default for AnalyticSolver {
    fn default() -> Self {
        AnalyticSolver {
            t_start: 0.0,
            t_end: 1.0,
            times: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StartState {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolitonInitial {
    pub kinds: Vec<KillingKind>,
    /// Shared start state; each kind's gallery start when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<StartState>,
    /// Half-length in hyperbolic arclength; the gallery span when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_span: Option<f64>,
}

impl Default for SolitonInitial {
    fn default() -> Self {
        SolitonInitial {
            kinds: KillingKind::ALL.to_vec(),
            start: None,
            s_span: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolitonSolver {
    /// Arclength step.
    pub h: f64,
    /// Flow time of the isometry check.
    pub verify_dt: f64,
}

impl Default for SolitonSolver {
    fn default() -> Self {
        SolitonSolver {
            h: 1.0 / 256.0,
            verify_dt: 1e-3,
        }
    }
}

/// Initial pressure `p = κ²` on a periodic `φ`-grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PressureSpec {
    /// `coth² r` on the period `2π cosh r` of the circle of radius `r`.
    Circle { radius: f64, points: usize },
    Constant {
        value: f64,
        period: f64,
        points: usize,
    },
    /// `mean + amplitude · sin(2π mode φ / period)`.
    Wave {
        mean: f64,
        amplitude: f64,
        mode: u32,
        period: f64,
        points: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PdeSolver {
    pub t_span: f64,
    pub dtau: f64,
}

impl Default for PdeSolver {
    fn default() -> Self {
        PdeSolver {
            t_span: 0.2,
            dtau: 1e-3,
        }
    }
}

/// One problem with a configuration, located by a dotted path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Parses a configuration; structural errors carry the path of the
/// offending key.
///
/// The `scenario` tag is dispatched by hand rather than through serde's
/// internally tagged enums, which buffer their content and lose the path.
pub fn parse(text: &str) -> Result<ScenarioConfig, FieldError> {
    let root = |message: String| FieldError {
        field: "(root)".into(),
        message,
    };
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| root(e.to_string()))?;
    let serde_json::Value::Object(mut fields) = value else {
        return Err(root("expected a JSON object".into()));
    };
    let tag = match fields.remove("scenario") {
        Some(serde_json::Value::String(s)) => s,
        Some(other) => {
            return Err(FieldError {
                field: "scenario".into(),
                message: format!("expected a string, got {other}"),
            })
        }
        None => return Err(root("missing field `scenario`".into())),
    };
    let rest = serde_json::Value::Object(fields);
    Ok(match tag.as_str() {
        "analytic" => ScenarioConfig::Analytic(located(rest)?),
        "evolve" => ScenarioConfig::Evolve(located(rest)?),
        "soliton" => ScenarioConfig::Soliton(located(rest)?),
        "intrinsic" => ScenarioConfig::Intrinsic(located(rest)?),
        "verify" => ScenarioConfig::Verify(located(rest)?),
        _ => {
            return Err(FieldError {
                field: "scenario".into(),
                message: format!(
                "unknown scenario `{tag}`; expected analytic, evolve, soliton, intrinsic or verify"
            ),
            })
        }
    })
}

fn located<T: serde::de::DeserializeOwned>(v: serde_json::Value) -> Result<T, FieldError> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let path = e.path().to_string();
        FieldError {
            field: if path == "." { "(root)".into() } else { path },
            message: e.into_inner().to_string(),
        }
    })
}

pub fn load(path: &Path) -> Result<ScenarioConfig, FieldError> {
    let text = std::fs::read_to_string(path).map_err(|e| FieldError {
        field: "(file)".into(),
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    parse(&text)
}

struct Checker(Vec<FieldError>);

impl Checker {
    fn check(&mut self, ok: bool, field: &str, message: impl FnOnce() -> String) {
        if !ok {
            self.0.push(FieldError {
                field: field.into(),
                message: message(),
            });
        }
    }

    fn positive(&mut self, field: &str, v: f64) {
        self.check(v > 0.0 && v.is_finite(), field, || {
            format!("must be positive and finite, got {v}")
        });
    }

    fn finite(&mut self, field: &str, v: f64) {
        self.check(v.is_finite(), field, || format!("must be finite, got {v}"));
    }

    fn at_least(&mut self, field: &str, v: usize, min: usize) {
        self.check(v >= min, field, || {
            format!("must be at least {min}, got {v}")
        });
    }

    fn point(&mut self, field: &str, p: [f64; 2]) {
        self.check(
            p[0].is_finite() && p[1] > 0.0 && p[1].is_finite(),
            field,
            || format!("must lie in the upper half-plane, got ({}, {})", p[0], p[1]),
        );
    }

    fn core(&mut self, prefix: &str, r: hcsf_core::Result<()>) {
        if let Err(e) = r {
            let field = match &e {
                hcsf_core::Error::InvalidParameter { name, .. } => format!("{prefix}.{name}"),
                _ => prefix.to_string(),
            };
            self.0.push(FieldError {
                field,
                message: e.to_string(),
            });
        }
    }
}

impl ScenarioConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioConfig::Analytic(_) => "analytic",
            ScenarioConfig::Evolve(_) => "evolve",
            ScenarioConfig::Soliton(_) => "soliton",
            ScenarioConfig::Intrinsic(_) => "intrinsic",
            ScenarioConfig::Verify(_) => "verify",
        }
    }

    pub fn output(&self) -> Option<&Path> {
        match self {
            ScenarioConfig::Analytic(s) => s.output.as_deref(),
            ScenarioConfig::Evolve(s) => s.output.as_deref(),
            ScenarioConfig::Soliton(s) => s.output.as_deref(),
            ScenarioConfig::Intrinsic(s) => s.output.as_deref(),
            ScenarioConfig::Verify(s) => s.output.as_deref(),
        }
    }

    pub fn set_output(&mut self, out: PathBuf) {
        let slot = match self {
            ScenarioConfig::Analytic(s) => &mut s.output,
            ScenarioConfig::Evolve(s) => &mut s.output,
            ScenarioConfig::Soliton(s) => &mut s.output,
            ScenarioConfig::Intrinsic(s) => &mut s.output,
            ScenarioConfig::Verify(s) => &mut s.output,
        };
        *slot = Some(out);
    }

    pub fn seed(&self) -> u64 {
        match self {
            ScenarioConfig::Analytic(s) => s.seed,
            ScenarioConfig::Evolve(s) => s.seed,
            ScenarioConfig::Soliton(s) => s.seed,
            ScenarioConfig::Intrinsic(s) => s.seed,
            ScenarioConfig::Verify(s) => s.seed,
        }
    }

    pub fn set_seed(&mut self, seed: u64) {
        let slot = match self {
            ScenarioConfig::Analytic(s) => &mut s.seed,
            ScenarioConfig::Evolve(s) => &mut s.seed,
            ScenarioConfig::Soliton(s) => &mut s.seed,
            ScenarioConfig::Intrinsic(s) => &mut s.seed,
            ScenarioConfig::Verify(s) => &mut s.seed,
        };
        *slot = seed;
    }

    /// Every problem with the configuration, not just the first.
    pub fn validate(&self) -> Vec<FieldError> {
        let mut c = Checker(Vec::new());
        let version = match self {
            ScenarioConfig::Analytic(s) => s.version,
            ScenarioConfig::Evolve(s) => s.version,
            ScenarioConfig::Soliton(s) => s.version,
            ScenarioConfig::Intrinsic(s) => s.version,
            ScenarioConfig::Verify(s) => s.version,
        };
        c.check(version == CONFIG_VERSION, "version", || {
            format!("unsupported version {version}, expected {CONFIG_VERSION}")
        });
        let stride = match self {
            ScenarioConfig::Evolve(s) => Some(s.snapshot_stride),
            ScenarioConfig::Intrinsic(s) => Some(s.snapshot_stride),
            _ => None,
        };
        if let Some(stride) = stride {
            c.at_least("snapshot_stride", stride, 1);
        }
        match self {
            ScenarioConfig::Evolve(s) => validate_evolve(&mut c, s),
            ScenarioConfig::Analytic(s) => validate_analytic(&mut c, s),
            ScenarioConfig::Soliton(s) => validate_soliton(&mut c, s),
            ScenarioConfig::Intrinsic(s) => validate_intrinsic(&mut c, s),
            ScenarioConfig::Verify(s) => c.check(!s.suites.is_empty(), "suites", || {
                "must not be empty".into()
            }),
        }
        c.0
    }
}

fn validate_evolve(c: &mut Checker, s: &Setup<CurveSpec, EvolveSolver>) {
    let min = hcsf_core::front_tracking::EvolveParams::MIN_NODES;
    match &s.initial {
        CurveSpec::Circle { center, radius, .. } => {
            c.point("initial.center", *center);
            c.positive("initial.radius", *radius);
        }
        CurveSpec::Ellipse { center, a, b, .. } => {
            c.point("initial.center", *center);
            c.positive("initial.a", *a);
            c.positive("initial.b", *b);
            c.check(*b < center[1], "initial.b", || {
                format!(
                    "ellipse must stay above y = 0: b = {b} ≥ center y = {}",
                    center[1]
                )
            });
        }
        CurveSpec::Points { points, .. } => {
            c.at_least("initial.points", points.len(), 3);
            for (i, p) in points.iter().enumerate() {
                c.point(&format!("initial.points[{i}]"), *p);
            }
        }
    }
    c.at_least("initial.nodes", s.initial.nodes(), min);
    let v = &s.solver;
    c.check(v.cfl > 0.0 && v.cfl <= 0.5, "solver.cfl", || {
        format!("must lie in (0, 0.5], got {}", v.cfl)
    });
    c.positive("solver.t_end", v.t_end);
    c.at_least("solver.resample_every", v.resample_every, 1);
    c.check(v.stop_min_y >= 0.0, "solver.stop_min_y", || {
        format!("must be non-negative, got {}", v.stop_min_y)
    });
    c.check(v.stop_min_length >= 0.0, "solver.stop_min_length", || {
        format!("must be non-negative, got {}", v.stop_min_length)
    });
}

fn validate_analytic(c: &mut Checker, s: &Setup<AnalyticInitial, AnalyticSolver>) {
    c.core("initial.family", s.initial.family.validate());
    let min = if s.initial.family.is_closed() { 3 } else { 2 };
    c.at_least("initial.nodes", s.initial.nodes, min);
    let v = &s.solver;
    c.finite("solver.t_start", v.t_start);
    c.finite("solver.t_end", v.t_end);
    c.check(v.t_end >= v.t_start, "solver.t_end", || {
        format!("must not precede t_start = {}", v.t_start)
    });
    c.at_least("solver.times", v.times, 1);
    if let Some(t_max) = s.initial.family.t_max() {
        c.check(v.t_end < t_max, "solver.t_end", || {
            format!("must be before the extinction time {t_max}")
        });
    }
}

fn validate_soliton(c: &mut Checker, s: &Setup<SolitonInitial, SolitonSolver>) {
    c.check(!s.initial.kinds.is_empty(), "initial.kinds", || {
        "must name at least one kind".into()
    });
    if let Some(st) = s.initial.start {
        c.point("initial.start", [st.x, st.y]);
        c.finite("initial.start.theta", st.theta);
    }
    if let Some(span) = s.initial.s_span {
        c.positive("initial.s_span", span);
    }
    c.positive("solver.h", s.solver.h);
    c.positive("solver.verify_dt", s.solver.verify_dt);
}

fn validate_intrinsic(c: &mut Checker, s: &Setup<PressureSpec, PdeSolver>) {
    let min = hcsf_core::intrinsic_pde::PhiGrid::MIN_POINTS;
    let points = match &s.initial {
        PressureSpec::Circle { radius, points } => {
            c.positive("initial.radius", *radius);
            *points
        }
        PressureSpec::Constant {
            value,
            period,
            points,
        } => {
            c.positive("initial.value", *value);
            c.positive("initial.period", *period);
            *points
        }
        PressureSpec::Wave {
            mean,
            amplitude,
            period,
            points,
            ..
        } => {
            c.finite("initial.amplitude", *amplitude);
            c.check(
                mean.is_finite() && *mean > amplitude.abs(),
                "initial.mean",
                || format!("must exceed |amplitude| so the pressure stays positive, got {mean}"),
            );
            c.positive("initial.period", *period);
            *points
        }
    };
    c.at_least("initial.points", points, min);
    c.positive("solver.t_span", s.solver.t_span);
    c.positive("solver.dtau", s.solver.dtau);
}
