use hcsf_core::curves::hyperbolic_circle;
use hcsf_core::hypgeo::Point;
use hcsf_core::intrinsic_pde::{
    circle_pressure, classify_separable, cor47_a, evolve_kappa_phi, evolve_pressure, evolve_q,
    grayson_period, separability_obstruction, separable_a, separable_fit, Branch, PhiGrid,
    SeparableBranch, SeparableFamily,
};
use proptest::prelude::*;
use std::f64::consts::TAU;

fn max_gap(a: &[PhiGrid], b: &[PhiGrid], f: impl Fn(f64) -> f64) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| {
            assert!((x.time - y.time).abs() < 1e-12);
            x.values
                .iter()
                .zip(&y.values)
                .map(|(u, v)| (f(*u) - v).abs())
        })
        .fold(0.0, f64::max)
}

/// Central-difference residual of `a' = f(a)`, relative to the size of `a'`.
fn ode_residual(a: impl Fn(f64) -> f64, f: impl Fn(f64) -> f64, t: f64) -> f64 {
    let h = 1e-4;
    // fourth-order difference, so truncation stays far below 1e-10
    let d4 = (8.0 * (a(t + h) - a(t - h)) - (a(t + 2.0 * h) - a(t - 2.0 * h))) / (12.0 * h);
    (d4 - f(a(t))).abs() / (1.0 + f(a(t)).abs())
}

#[test]
fn constant_pressure_follows_the_circle_branch() {
    let p0 = circle_pressure(1.0, 256).unwrap();
    let branch = SeparableBranch::new(Branch::ShrinkingCircle, 1.0 / 1f64.cosh().powi(2)).unwrap();
    assert!((separable_a(&branch, 0.0).unwrap() - p0.values[0]).abs() < 1e-14);
    let run = evolve_pressure(&p0, 0.2, 1e-3).unwrap();
    let mut worst = 0.0f64;
    for g in &run {
        let a = separable_a(&branch, g.time).unwrap();
        for v in &g.values {
            worst = worst.max((v - a).abs());
        }
    }
    assert!(worst < 1e-4);
}

#[test]
fn constant_curvature_runs() {
    let n = 64;
    for (k0, expect) in [(1.0, 0), (1f64.tanh().recip(), 1), (0.5f64.sqrt(), -1)] {
        let run = evolve_kappa_phi(&vec![k0; n], TAU, 0.1, 1e-3).unwrap();
        let last = run.last().unwrap();
        let spread = last.max() - last.values.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(spread < 1e-14);
        // κ' = κ³ − κ is the κ-separable branch through k0
        let a = separable_a(&SeparableBranch::through(k0 * k0).unwrap().kappa(), 0.1).unwrap();
        assert!(
            (last.values[0] - a).abs() < 1e-10,
            "{k0}: {} vs {a}",
            last.values[0]
        );
        let moved = last.values[0] - k0;
        match expect {
            0 => assert_eq!(moved, 0.0),
            1 => assert!(moved > 0.0),
            _ => assert!(moved < 0.0),
        }
    }
}

#[test]
fn unit_pressure_is_stationary() {
    let run = evolve_pressure(&PhiGrid::constant(32, TAU, 1.0).unwrap(), 0.5, 1e-2).unwrap();
    assert!(run.iter().all(|g| g.values.iter().all(|&v| v == 1.0)));
}

#[test]
fn curvature_squared_matches_pressure() {
    // constant start: both runs are the same ODE in different variables
    let p0 = circle_pressure(1.0, 256).unwrap();
    let k0: Vec<f64> = p0.values.iter().map(|p| p.sqrt()).collect();
    let kr = evolve_kappa_phi(&k0, p0.phi_period, 0.2, 1e-3).unwrap();
    let pr = evolve_pressure(&p0, 0.2, 1e-3).unwrap();
    let gap = max_gap(&kr, &pr, |k| k * k);
    assert!(gap < 1e-5);

    // a wavy start differs by the two spatial discretisations; dτ sits under
    // the diffusion limit so both runs take identical steps
    let p0 = PhiGrid::from_fn(256, TAU, |x| 2.0 + 0.1 * x.sin()).unwrap();
    let k0: Vec<f64> = p0.values.iter().map(|p| p.sqrt()).collect();
    let kr = evolve_kappa_phi(&k0, TAU, 0.1, 5e-5).unwrap();
    let pr = evolve_pressure(&p0, 0.1, 5e-5).unwrap();
    let gap = max_gap(&kr, &pr, |k| k * k);
    assert!(gap < 1e-5);
}

fn q_gap(n: usize) -> f64 {
    let p0 = PhiGrid::from_fn(n, TAU, |x| 2.0 + 0.1 * x.sin()).unwrap();
    evolve_q(&evolve_pressure(&p0, 0.1, 1e-3).unwrap())
        .unwrap()
        .gap
}

#[test]
fn q_stays_consistent_with_the_pressure() {
    let p0 = PhiGrid::constant(64, TAU, 1.7).unwrap();
    let q = evolve_q(&evolve_pressure(&p0, 0.1, 1e-3).unwrap()).unwrap();
    assert!(q.q.iter().flatten().all(|&v| v == 0.0));

    let (g1, g2) = (q_gap(128), q_gap(256));
    assert!(g2 < 1e-3);
    assert!((3.5..=4.5).contains(&(g1 / g2)), "{}", g1 / g2);
}

#[test]
fn separable_a_values() {
    let eq = SeparableBranch::new(Branch::Equidistant, 1.0).unwrap();
    assert!((separable_a(&eq, 0.0).unwrap() - 0.5).abs() < 1e-15);
    assert!((separable_a(&eq.kappa(), 0.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
    for t in [-3.0, 0.0, 2.0] {
        assert_eq!(separable_a(&SeparableBranch::horocycle(), t).unwrap(), 1.0);
    }
    let circle = SeparableBranch::new(Branch::ShrinkingCircle, 1.0).unwrap();
    let want = 1.0 / (1.0 - (-2f64).exp());
    assert!((separable_a(&circle, -1.0).unwrap() - want).abs() < 1e-14);
    assert!((want - 1.15652).abs() < 1e-5);

    assert_eq!(cor47_a(0.0, 1.3).unwrap(), 1.0);
    assert!((cor47_a(1.0, 0.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
    assert!((cor47_a(-0.5, 0.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
}

#[test]
fn separable_solutions_solve_their_odes() {
    let branches = [
        SeparableBranch::new(Branch::ShrinkingCircle, 0.3).unwrap(),
        SeparableBranch::new(Branch::Equidistant, 0.7).unwrap(),
        SeparableBranch::horocycle(),
    ];
    for b in branches {
        for t in [-2.0, -0.5, 0.0, 0.3] {
            let r = ode_residual(
                |t| separable_a(&b, t).unwrap(),
                |a| 2.0 * a * a - 2.0 * a,
                t,
            );
            assert!(r < 1e-10, "{b:?} {t}: {r:e}");
            let r = ode_residual(
                |t| separable_a(&b.kappa(), t).unwrap(),
                |a| a * a * a - a,
                t,
            );
            assert!(r < 1e-10, "{b:?} κ {t}: {r:e}");
        }
    }
    for c in [-0.5, -0.1, 0.0, 0.4, 2.0] {
        for t in [-1.0, -0.2, 0.0, 0.3] {
            let r = ode_residual(|t| cor47_a(c, t).unwrap(), |a| a * a * a - a, t);
            assert!(r < 1e-10, "{c} {t}: {r:e}");
        }
    }
}

#[test]
fn fit_recovers_exact_splits() {
    let series: Vec<PhiGrid> = (0..5)
        .map(|k| {
            let t = 0.1 * k as f64;
            let mut g = PhiGrid::from_fn(32, TAU, |x| 3.0 + t * t + 0.2 * (2.0 * x).cos()).unwrap();
            g.time = t;
            g
        })
        .collect();
    let fit = separable_fit(&series).unwrap();
    assert!(fit.residual < 1e-12);
    assert!(fit.b.iter().sum::<f64>().abs() < 1e-12);
    for (k, a) in fit.a.iter().enumerate() {
        let t = 0.1 * k as f64;
        assert!((a - 3.0 - t * t).abs() < 1e-12);
    }

    // multiplicative data has no additive split
    let product: Vec<PhiGrid> = (0..5)
        .map(|k| {
            let t = 1.0 + 0.5 * k as f64;
            PhiGrid::from_fn(32, TAU, |x| t * (2.0 + x.sin())).unwrap()
        })
        .collect();
    assert!(separable_fit(&product).unwrap().residual > 0.1);
}

fn circle_fit() -> hcsf_core::intrinsic_pde::SeparableFit {
    let run = evolve_pressure(&circle_pressure(1.0, 64).unwrap(), 0.2, 1e-3).unwrap();
    separable_fit(&run).unwrap()
}

#[test]
fn circle_run_is_a_separable_shrinking_circle() {
    let fit = circle_fit();
    assert!(fit.residual < 1e-6);
    assert!(fit.b.iter().all(|b| b.abs() < 1e-6));
    assert_eq!(
        classify_separable(&fit.a, &fit.b),
        SeparableFamily::ShrinkingCircle
    );
}

#[test]
fn classification_of_constructed_inputs() {
    let zeros = vec![0.0; 32];
    let eq = SeparableBranch::new(Branch::Equidistant, 1.0).unwrap();
    let a_eq: Vec<f64> = (0..20)
        .map(|k| separable_a(&eq, 0.05 * k as f64).unwrap())
        .collect();
    let wavy: Vec<f64> = (0..32)
        .map(|i| 0.1 * (TAU * i as f64 / 32.0).sin())
        .collect();
    assert_eq!(
        classify_separable(&[1.0; 20], &zeros),
        SeparableFamily::Horocycle
    );
    assert_eq!(
        classify_separable(&a_eq, &zeros),
        SeparableFamily::Equidistant
    );
    assert_eq!(
        classify_separable(&[0.7; 20], &wavy),
        SeparableFamily::Soliton
    );
    let growing: Vec<f64> = (0..20).map(|k| 2.0 + 0.1 * k as f64).collect();
    assert_eq!(
        classify_separable(&growing, &wavy),
        SeparableFamily::Unclassified
    );
    assert_eq!(
        classify_separable(&[0.7; 20], &zeros),
        SeparableFamily::Unclassified
    );
}

#[test]
fn grayson_period_is_two_pi_plus_area() {
    let c = hyperbolic_circle(&Point::new(0.0, 2.0).unwrap(), 1.0, 512).unwrap();
    let phi = grayson_period(&c).unwrap();
    assert!((phi - TAU * 1f64.cosh()).abs() < 1e-4, "{phi}");
    assert!((circle_pressure(1.0, 16).unwrap().phi_period - TAU * 1f64.cosh()).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// For nonconstant `b` the value `a(t)` would have to take varies with `φ`.
    #[test]
    fn nonconstant_b_admits_no_separable_a(
        amp in 0.05f64..0.5,
        mode in prop::sample::select(vec![1usize, 3, 4, 5]),
        shift in 0.0f64..TAU,
    ) {
        let n = 128;
        let b: Vec<f64> = (0..n)
            .map(|i| amp * (mode as f64 * (TAU * i as f64 / n as f64) + shift).cos())
            .collect();
        let need = separability_obstruction(&b, TAU).unwrap();
        let finite: Vec<f64> = need.into_iter().filter(|v| v.is_finite()).collect();
        let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(hi - lo > amp);
    }
}
