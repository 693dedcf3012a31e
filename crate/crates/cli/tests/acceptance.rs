//! Acceptance gate: one line per criterion. Runs without the test harness so
//! the lines are printed even when everything passes.
//!
//! Expected values come from closed forms evaluated here, not from the
//! library's own helpers, wherever such a form exists.

use std::f64::consts::TAU;
use std::process::Command;
use std::time::{Duration, Instant};

use hcsf_core::analytic_flows::{AnalyticFamily, RESIDUAL_DT};
use hcsf_core::curves::{
    curvature_profile, enclosed_area, euclidean_ellipse, geodesic_curvature, hyperbolic_circle,
    hyperbolic_length, index_derivatives, planar_curvature, DiscreteCurve, IndexDerivatives,
};
use hcsf_core::front_tracking::{
    evolve, singularity_estimate, EvolveParams, FlowTrace, StepRecord, Termination,
};
use hcsf_core::hypgeo::{
    apply_isometry, geodesic_point, hyp_distance, metric_inner, EucVector, KillingKind,
    MobiusIsometry, Point,
};
use hcsf_core::intrinsic_pde::{
    circle_pressure, classify_separable, cor47_a, evolve_kappa_phi, evolve_pressure, evolve_q,
    separable_a, separable_fit, Branch, PhiGrid, SeparableBranch, SeparableFamily,
};
use hcsf_core::solitons::{gallery_start, integrate_soliton, verify_soliton_by_isometry};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Gate {
    lines: Vec<(usize, bool, String)>,
}

impl Gate {
    fn record(&mut self, n: usize, pass: bool, detail: String) {
        println!(
            "criterion {n:>2}: {}  {detail}",
            if pass { "PASS" } else { "FAIL" }
        );
        self.lines.push((n, pass, detail));
    }
}

fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn run(c: &DiscreteCurve, t_end: f64) -> FlowTrace {
    let mut p = EvolveParams::new(c.len(), t_end);
    p.cfl = 0.1;
    p.snapshot_every = usize::MAX;
    evolve(c, &p).expect("run completes")
}

/// `|A − ((A₀+2π)e^{−t} − 2π)| / A₀` over the records up to `t_stop`.
fn area_law_error(d: &[StepRecord], t_stop: f64) -> f64 {
    let a0 = d[0].area;
    max_abs(
        d.iter()
            .filter(|r| r.t <= t_stop)
            .map(|r| (r.area - ((a0 + TAU) * (-r.t).exp() - TAU)) / a0),
    )
}

fn gb_error(d: &[StepRecord]) -> f64 {
    max_abs(d.iter().map(|r| r.gb_defect))
}

fn center() -> Point {
    Point { x: 0.0, y: 2.0 }
}

fn oval() -> DiscreteCurve {
    euclidean_ellipse(&Point { x: 0.0, y: 2.5 }, 1.8, 1.4, 512).unwrap()
}

/// Criteria 1–4 share their runs.
fn flow_criteria(gate: &mut Gate) {
    let t_star = 1f64.cosh().ln();

    let clock = Instant::now();
    let circle = run(&hyperbolic_circle(&center(), 1.0, 512).unwrap(), 10.0);
    let collapse_secs = clock.elapsed();
    let est = singularity_estimate(&circle).ok();
    let t_fit = est.map_or(f64::NAN, |e| e.t_collapse);
    gate.record(
        1,
        circle.termination == Termination::Collapsed
            && (t_fit - t_star).abs() < 1e-2
            && collapse_secs < Duration::from_secs(10),
        format!(
            "fitted collapse {t_fit:.6} vs ln cosh 1 = {t_star:.6} (error {:.1e}); {:?}, {:.1} s",
            (t_fit - t_star).abs(),
            circle.termination,
            collapse_secs.as_secs_f64()
        ),
    );

    let clock = Instant::now();
    let short = run(&hyperbolic_circle(&center(), 1.0, 512).unwrap(), 0.2);
    let radius_secs = clock.elapsed();
    let last = &short.snapshots.last().unwrap().curve;
    let mean_r = last
        .nodes()
        .iter()
        .map(|p| hyp_distance(&center(), p).unwrap())
        .sum::<f64>()
        / last.len() as f64;
    let want_r = (1f64.cosh() * (-0.2f64).exp()).acosh();
    let rel = (mean_r / want_r - 1.0).abs();
    gate.record(
        2,
        short.final_time() == 0.2 && rel < 1e-3 && radius_secs < Duration::from_secs(10),
        format!(
            "r(0.2) = {mean_r:.9} vs {want_r:.9} (relative {rel:.1e}); {:.1} s",
            radius_secs.as_secs_f64()
        ),
    );

    let clock = Instant::now();
    let oval0 = oval();
    let a0 = enclosed_area(&oval0).unwrap();
    let oval_star = ((a0 + TAU) / TAU).ln();
    let oval_run = run(&oval0, 0.9 * oval_star);
    let oval_secs = clock.elapsed();
    let circle_law = area_law_error(&circle.diagnostics, 0.9 * t_star);
    let oval_law = area_law_error(&oval_run.diagnostics, f64::INFINITY);
    let c_rel = est.map_or(f64::NAN, |e| {
        (e.c / (circle.initial_area() + TAU) - 1.0).abs()
    });
    let area_secs = collapse_secs + oval_secs;
    gate.record(
        3,
        circle_law < 1e-2
            && oval_law < 1e-2
            && c_rel < 1e-2
            && area_secs < Duration::from_secs(30),
        format!(
            "area law / A0: circle {circle_law:.1e}, oval {oval_law:.1e}; fitted C vs A0 + 2pi {c_rel:.1e}; {:.1} s",
            area_secs.as_secs_f64()
        ),
    );

    let gb = [
        gb_error(&circle.diagnostics),
        gb_error(&short.diagnostics),
        gb_error(&oval_run.diagnostics),
    ];
    let records = circle.diagnostics.len() + short.diagnostics.len() + oval_run.diagnostics.len();
    gate.record(
        4,
        gb.iter().all(|&g| g < 1e-2),
        format!(
            "max |int k ds - A - 2pi| over {records} records: collapse {:.1e}, t = 0.2 {:.1e}, oval {:.1e}",
            gb[0], gb[1], gb[2]
        ),
    );
}

fn families() -> [AnalyticFamily; 7] {
    [
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

/// CSF residual with finite-difference curvature and normal, which carries
/// the `O(h²)` error the three-point-circle scheme does not have on these
/// families.
fn fd_residual(f: &AnalyticFamily, t: f64, n: usize) -> f64 {
    let c = f.slice(t, n).unwrap();
    let s = f.s_grid(t, n).unwrap();
    let d = index_derivatives(&c);
    let h = RESIDUAL_DT;
    max_abs(c.nodes().iter().enumerate().map(|(i, p)| {
        let speed = d[i].speed();
        let normal = EucVector::new(-d[i].dy / speed * p.y, d[i].dx / speed * p.y);
        let (a, b) = (f.point(t + h, s[i]).unwrap(), f.point(t - h, s[i]).unwrap());
        let dt = EucVector::new((a.x - b.x) / (2.0 * h), (a.y - b.y) / (2.0 * h));
        metric_inner(p, &dt, &normal).unwrap() - geodesic_curvature(p.y, &d[i])
    }))
}

const FLOOR: f64 = 1e-8;

fn second_order(errors: &[f64]) -> bool {
    errors
        .windows(2)
        .all(|w| w[1] <= FLOOR || w[0] / w[1] >= 3.5)
}

fn analytic_criterion(gate: &mut Gate) {
    let clock = Instant::now();
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    let mut fd_ratios = Vec::new();
    for f in families() {
        let res: Vec<f64> = [64, 128, 256]
            .iter()
            .map(|&n| max_abs(f.residual(0.1, n).unwrap()))
            .collect();
        let fd: Vec<f64> = [64, 128, 256]
            .iter()
            .map(|&n| fd_residual(&f, 0.1, n))
            .collect();
        worst = worst.max(res[2]);
        if !(res[2] < 1e-3 && second_order(&res) && second_order(&fd)) {
            failures.push(f.name());
        }
        if fd[2] > FLOOR {
            fd_ratios.push(format!("{} {:.2}", f.name(), fd[1] / fd[2]));
        }
    }
    let secs = clock.elapsed();
    gate.record(
        5,
        failures.is_empty() && secs < Duration::from_secs(10),
        format!(
            "max residual at 256 nodes {worst:.1e}; finite-difference ratios [{}]; failing {failures:?}; {:.1} s",
            fd_ratios.join(", "),
            secs.as_secs_f64()
        ),
    );
}

/// `⟨N, X⟩` written out per kind, with `N = (−sin θ, cos θ)·y`.
fn soliton_oracle(kind: KillingKind, x: f64, y: f64, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    let field = match kind {
        KillingKind::Hyperbolic => (x, y),
        KillingKind::Parabolic => (1.0, 0.0),
        KillingKind::Rotational => (-(1.0 + x * x - y * y), -2.0 * x * y),
    };
    (-s * field.0 + c * field.1) / y
}

fn soliton_criterion(gate: &mut Gate) {
    let clock = Instant::now();
    let mut parts = Vec::new();
    let mut pass = true;
    for kind in KillingKind::ALL {
        let (s0, _) = gallery_start(kind);
        let sol = integrate_soliton(kind, &s0, 1.0, 1.0 / 256.0).unwrap();
        let kappa = curvature_profile(&sol.curve).unwrap().kappa;
        let consistency = max_abs(
            sol.states
                .iter()
                .zip(&kappa)
                .map(|(s, k)| k - soliton_oracle(kind, s.x, s.y, s.theta)),
        );
        let iso = verify_soliton_by_isometry(&sol.curve, kind, 1e-3).unwrap();
        pass &= consistency < 1e-4 && iso < 1e-4;
        parts.push(format!("{} {consistency:.1e}/{iso:.1e}", kind.name()));
    }
    let circle = hyperbolic_circle(&Point { x: 0.0, y: 1.0 }, 0.05, 512).unwrap();
    let control = KillingKind::ALL
        .iter()
        .map(|&k| verify_soliton_by_isometry(&circle, k, 1e-3).unwrap())
        .fold(f64::INFINITY, f64::min);
    let secs = clock.elapsed();
    gate.record(
        6,
        pass && control > 1e-2 && secs < Duration::from_secs(10),
        format!(
            "|k - <N,X>| / isometry residual: {}; circle control {control:.1e}; {:.1} s",
            parts.join(", "),
            secs.as_secs_f64()
        ),
    );
}

fn periodic_derivative(v: &[f64], dphi: f64) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|i| (v[(i + 1) % n] - v[(i + n - 1) % n]) / (2.0 * dphi))
        .collect()
}

fn squared_gap(k: &[PhiGrid], p: &[PhiGrid]) -> f64 {
    assert_eq!(k.len(), p.len());
    max_abs(
        k.iter()
            .zip(p)
            .flat_map(|(a, b)| a.values.iter().zip(&b.values).map(|(x, y)| x * x - y)),
    )
}

fn intrinsic_criterion(gate: &mut Gate) {
    let clock = Instant::now();
    let cosh2 = 1f64.cosh().powi(2);
    let p0 = PhiGrid::constant(256, TAU * 1f64.cosh(), cosh2 / (cosh2 - 1.0)).unwrap();
    let run = evolve_pressure(&p0, 0.2, 1e-3).unwrap();
    let branch = max_abs(run.iter().flat_map(|g| {
        let a = 1.0 / (1.0 - (2.0 * g.time).exp() / cosh2);
        g.values.iter().map(move |v| v - a)
    }));
    let reached = run.last().unwrap().time;

    let wave = PhiGrid::from_fn(256, TAU, |x| 2.0 + 0.1 * x.sin()).unwrap();
    let series = evolve_pressure(&wave, 0.1, 1e-3).unwrap();
    let q = evolve_q(&series).unwrap();
    let q_gap = max_abs(q.q.iter().zip(&series).flat_map(|(q, p)| {
        let dp = periodic_derivative(&p.values, p.dphi());
        q.iter().zip(dp).map(|(a, b)| a - b).collect::<Vec<_>>()
    }));

    let chain = |p0: &PhiGrid, span: f64, dtau: f64| {
        let k0: Vec<f64> = p0.values.iter().map(|p| p.sqrt()).collect();
        let k = evolve_kappa_phi(&k0, p0.phi_period, span, dtau).unwrap();
        squared_gap(&k, &evolve_pressure(p0, span, dtau).unwrap())
    };
    let chain_const = chain(&p0, 0.2, 1e-3);
    let chain_wave = chain(&wave, 0.1, 5e-5);
    let secs = clock.elapsed();
    gate.record(
        7,
        reached == 0.2
            && branch < 1e-4
            && q_gap < 1e-3
            && chain_const < 1e-5
            && chain_wave < 1e-5
            && secs < Duration::from_secs(10),
        format!(
            "p vs a(t) {branch:.1e}; q gap {q_gap:.1e}; k^2 vs p {chain_const:.1e} (constant), {chain_wave:.1e} (wave); {:.1} s",
            secs.as_secs_f64()
        ),
    );
}

fn classification_criterion(gate: &mut Gate) {
    let circle = evolve_pressure(&circle_pressure(1.0, 64).unwrap(), 0.2, 1e-3).unwrap();
    let fit = separable_fit(&circle).unwrap();
    let equidistant = SeparableBranch::new(Branch::Equidistant, 1.0).unwrap();
    let a_eq: Vec<f64> = (0..20)
        .map(|k| separable_a(&equidistant, 0.05 * k as f64).unwrap())
        .collect();
    let flat = vec![0.0; 32];
    let wavy: Vec<f64> = (0..32)
        .map(|i| 0.1 * (TAU * i as f64 / 32.0).sin())
        .collect();
    let got = [
        classify_separable(&fit.a, &fit.b),
        classify_separable(&[1.0; 20], &flat),
        classify_separable(&a_eq, &flat),
        classify_separable(&[0.7; 20], &wavy),
    ];
    let want = [
        SeparableFamily::ShrinkingCircle,
        SeparableFamily::Horocycle,
        SeparableFamily::Equidistant,
        SeparableFamily::Soliton,
    ];

    // a' = a³ − a by a fourth-order central difference; the step is small
    // because a⁽⁵⁾ is large next to the circle branch's blow-up
    let h = 2.5e-5;
    let mut ode = 0.0f64;
    for c in [-0.5, -0.2, 0.0, 1.0, 3.0] {
        for t in [-1.0, -0.25, 0.0, 0.3] {
            let a = |t: f64| cor47_a(c, t).unwrap();
            let d = (8.0 * (a(t + h) - a(t - h)) - (a(t + 2.0 * h) - a(t - 2.0 * h))) / (12.0 * h);
            let rhs = a(t).powi(3) - a(t);
            ode = ode.max((d - rhs).abs());
        }
    }
    gate.record(
        8,
        got == want && ode < 1e-10,
        format!("classified {got:?}; ODE residual {ode:.1e}"),
    );
}

fn ellipse_curvature_error(n: usize) -> f64 {
    let (a, b, cy) = (0.3, 0.2, 1.0);
    let c = euclidean_ellipse(&Point { x: 0.0, y: cy }, a, b, n).unwrap();
    let k = curvature_profile(&c).unwrap().kappa;
    max_abs(k.iter().enumerate().map(|(i, k)| {
        let s = TAU * i as f64 / n as f64;
        let (sn, cs) = s.sin_cos();
        // (ke): κ = y κ_e + x'/|γ'|, with the ellipse's planar curvature
        let speed = (a * a * sn * sn + b * b * cs * cs).sqrt();
        let kappa_e = a * b / speed.powi(3);
        k - ((cy + b * sn) * kappa_e + (-a * sn) / speed)
    }))
}

fn random_point(rng: &mut ChaCha8Rng) -> Point {
    Point {
        x: rng.gen_range(-3.0..3.0),
        y: rng.gen_range(0.05..4.0),
    }
}

fn random_isometry(rng: &mut ChaCha8Rng) -> MobiusIsometry {
    loop {
        let [a, b, c, d]: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-2.0..2.0));
        if a * d - b * c > 0.05 {
            return MobiusIsometry::new(a, b, c, d).unwrap();
        }
    }
}

fn geometry_criterion(gate: &mut Gate) {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);

    let mut distance = 0.0f64;
    for _ in 0..2000 {
        let (p, q, t) = (
            random_point(&mut rng),
            random_point(&mut rng),
            random_isometry(&mut rng),
        );
        let d0 = hyp_distance(&p, &q).unwrap();
        let d1 = hyp_distance(
            &apply_isometry(&t, &p).unwrap(),
            &apply_isometry(&t, &q).unwrap(),
        )
        .unwrap();
        distance = distance.max((d0 - d1).abs());
    }

    let oval = euclidean_ellipse(&Point { x: 0.2, y: 1.5 }, 0.8, 0.5, 512).unwrap();
    let base = curvature_profile(&oval).unwrap().kappa;
    let mut curvature = 0.0f64;
    for _ in 0..10 {
        let t = random_isometry(&mut rng);
        let moved = curvature_profile(&oval.try_map(|p| apply_isometry(&t, p)).unwrap())
            .unwrap()
            .kappa;
        curvature = curvature.max(max_abs(base.iter().zip(&moved).map(|(a, b)| a - b)));
    }

    // κ = ⟨∇_T T, N⟩ from the Christoffel symbols, against the closed form
    // y κ_e + x'/|γ'|, on random ellipses
    let mut identity = 0.0f64;
    for _ in 0..1000 {
        let (a, b, cy) = (
            rng.gen_range(0.1..2.0),
            rng.gen_range(0.1..2.0),
            rng.gen_range(2.5..5.0),
        );
        let s = rng.gen_range(0.0..TAU);
        let (sn, cs) = s.sin_cos();
        let d = IndexDerivatives {
            dx: -a * sn,
            dy: b * cs,
            ddx: -a * cs,
            ddy: -b * sn,
        };
        let y = cy + b * sn;
        // ∇_{γ'}γ' with Christoffel symbols of dx²+dy² over y²
        let acc_x = d.ddx - 2.0 * d.dx * d.dy / y;
        let acc_y = d.ddy + (d.dx * d.dx - d.dy * d.dy) / y;
        let speed_h = d.speed() / y;
        let (nx, ny) = (-d.dy / d.speed() * y, d.dx / d.speed() * y);
        let kappa = (acc_x * nx + acc_y * ny) / (y * y) / (speed_h * speed_h);
        identity = identity
            .max((kappa - geodesic_curvature(y, &d)).abs())
            .max((geodesic_curvature(y, &d) - (y * planar_curvature(&d) + d.dx / d.speed())).abs());
    }

    let mut start = 0.0f64;
    for _ in 0..500 {
        let p = random_point(&mut rng);
        let v = EucVector::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let q = geodesic_point(&p, &v, 0.0).unwrap();
        start = start.max((q.x - p.x).abs()).max((q.y - p.y).abs());
    }
    let p = Point { x: 0.3, y: 0.8 };
    let v = EucVector::new(0.0, 1.0);
    let vertical = geodesic_point(&p, &v, 0.0).unwrap();
    start = start
        .max((vertical.x - p.x).abs())
        .max((vertical.y - p.y).abs());

    let e: Vec<f64> = [128, 256, 512]
        .iter()
        .map(|&n| ellipse_curvature_error(n))
        .collect();
    let length_err = |n: usize| {
        (hyperbolic_length(&hyperbolic_circle(&center(), 1.0, n).unwrap()) - TAU * 1f64.sinh())
            .abs()
    };
    let l: Vec<f64> = [128, 256, 512].iter().map(|&n| length_err(n)).collect();
    let ratios = [e[0] / e[1], e[1] / e[2], l[0] / l[1], l[1] / l[2]];
    gate.record(
        9,
        distance < 1e-10
            && curvature < 1e-6
            && identity < 1e-8
            && start == 0.0
            && ratios.iter().all(|r| (3.5..=4.5).contains(r)),
        format!(
            "distance {distance:.1e}, curvature {curvature:.1e}, identity {identity:.1e}, geodesic start {start:.1e}, \
             curvature ratios {:.3}/{:.3}, length ratios {:.3}/{:.3}",
            ratios[0], ratios[1], ratios[2], ratios[3]
        ),
    );
}

fn determinism_criterion(gate: &mut Gate) {
    let verify = || {
        let dir = tempfile::tempdir().unwrap();
        let out = Command::new(env!("CARGO_BIN_EXE_hcsf"))
            .args(["verify", "--suite", "all", "--seed", "7", "--out"])
            .arg(dir.path())
            .output()
            .unwrap();
        let json = std::fs::read(dir.path().join("verify_report.json")).unwrap_or_default();
        let text = std::fs::read(dir.path().join("verify_report.txt")).unwrap_or_default();
        (out.status.code(), out.stdout, json, text)
    };
    let (a, b) = (verify(), verify());
    let identical = a == b && !a.2.is_empty();
    gate.record(
        10,
        identical && a.0 == Some(0),
        format!(
            "two runs byte-identical: {identical} ({} bytes of JSON); exit {:?}",
            a.2.len(),
            a.0
        ),
    );
}

fn main() {
    let mut gate = Gate { lines: Vec::new() };
    flow_criteria(&mut gate);
    analytic_criterion(&mut gate);
    soliton_criterion(&mut gate);
    intrinsic_criterion(&mut gate);
    classification_criterion(&mut gate);
    geometry_criterion(&mut gate);
    determinism_criterion(&mut gate);
    gate.lines.sort_by_key(|l| l.0);
    let failed: Vec<usize> = gate.lines.iter().filter(|l| !l.1).map(|l| l.0).collect();
    println!(
        "acceptance: {} of {} criteria pass",
        gate.lines.len() - failed.len(),
        gate.lines.len()
    );
    if !failed.is_empty() {
        eprintln!("failing criteria: {failed:?}");
        std::process::exit(1);
    }
}
