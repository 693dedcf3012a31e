use hcsf_core::analytic_flows::{circle_flow, circle_t_max, AnalyticFamily, RESIDUAL_DT};
use hcsf_core::curves::{enclosed_area, geodesic_curvature, index_derivatives};
use hcsf_core::hypgeo::{metric_inner, EucVector};
use proptest::prelude::*;

fn families() -> Vec<AnalyticFamily> {
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

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Below this the residual is dominated by the O(δ²) time difference, not the grid.
const FLOOR: f64 = 1e-8;

#[test]
fn residual_shrinks_at_second_order_or_sits_at_the_floor() {
    for f in families() {
        let res: Vec<f64> = [64, 128, 256, 512]
            .iter()
            .map(|&n| max_abs(&f.residual(0.1, n).unwrap()))
            .collect();
        for w in res.windows(2) {
            assert!(
                w[1] <= FLOOR || w[0] / w[1] >= 3.5,
                "{}: {:?}",
                f.name(),
                res
            );
        }
    }
}

/// Same residual, but with the parabolic finite-difference curvature and
/// normal. That scheme is not exact on circles, so it exposes the O(h²) term.
fn fd_residual(f: &AnalyticFamily, t: f64, n: usize) -> f64 {
    let c = f.slice(t, n).unwrap();
    let s = f.s_grid(t, n).unwrap();
    let d = index_derivatives(&c);
    let h = RESIDUAL_DT;
    let mut worst = 0.0f64;
    for (i, p) in c.nodes().iter().enumerate() {
        let speed = d[i].speed();
        let normal = EucVector::new(-d[i].dy / speed * p.y, d[i].dx / speed * p.y);
        let a = f.point(t + h, s[i]).unwrap();
        let b = f.point(t - h, s[i]).unwrap();
        let dt = EucVector::new((a.x - b.x) / (2.0 * h), (a.y - b.y) / (2.0 * h));
        let r = metric_inner(p, &dt, &normal).unwrap() - geodesic_curvature(p.y, &d[i]);
        worst = worst.max(r.abs());
    }
    worst
}

#[test]
fn finite_difference_residual_is_second_order() {
    for f in [
        AnalyticFamily::Circle { radius: 1.0 },
        AnalyticFamily::Equidistant {
            radius: 2.0,
            k: 1.0,
        },
    ] {
        let (e1, e2, e3) = (
            fd_residual(&f, 0.1, 128),
            fd_residual(&f, 0.1, 256),
            fd_residual(&f, 0.1, 512),
        );
        for ratio in [e1 / e2, e2 / e3] {
            assert!(
                (3.5..=4.5).contains(&ratio),
                "{}: {e1:e} {e2:e} {e3:e}",
                f.name()
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_families_solve_the_flow(
        radius in 0.3f64..2.5,
        frac in 0.1f64..0.9,
        v in -1.0f64..1.0,
        w in -0.9f64..0.9,
        m in -1.0f64..1.0,
        t_frac in 0.0f64..0.8,
    ) {
        prop_assume!(v.abs() > 0.05);
        let t = t_frac * circle_t_max(radius);
        for f in [
            AnalyticFamily::Circle { radius },
            AnalyticFamily::Horocycle { radius },
            AnalyticFamily::Equidistant { radius, k: frac * radius },
            AnalyticFamily::TransGeneral { v, w, m },
            AnalyticFamily::TransVertical { a: v, b: w, c: m, d: 1.0 },
        ] {
            let r = max_abs(&f.residual(t, 128).unwrap());
            prop_assert!(r < 1e-6, "{} {:e}", f.name(), r);
        }
    }

    #[test]
    fn general_slices_are_collinear(v in -1.0f64..1.0, w in -0.9f64..0.9, m in -1.0f64..1.0, t in -1.0f64..1.5) {
        prop_assume!(v.abs() > 0.05);
        let f = AnalyticFamily::TransGeneral { v, w, m };
        let c = f.slice(t, 16).unwrap();
        let p = c.nodes();
        let n = v.hypot(w);
        let slope = t.exp() * (w / n - 1.0) / (v / n);
        for q in &p[1..] {
            let r = (q.y - p[0].y) - slope * (q.x - p[0].x);
            prop_assert!(r.abs() < 1e-10 * (1.0 + slope.abs()));
        }
    }

    #[test]
    fn circle_area_is_monotone(radius in 0.3f64..2.5) {
        let tm = circle_t_max(radius);
        let mut prev = f64::INFINITY;
        for i in 0..10 {
            let t = tm * i as f64 / 10.0;
            let a = enclosed_area(&AnalyticFamily::Circle { radius }.slice(t, 128).unwrap()).unwrap();
            prop_assert!(a < prev);
            prev = a;
        }
        prop_assert!(circle_flow(radius, tm * 0.999).unwrap() < circle_flow(radius, 0.0).unwrap());
    }
}
