use seglab::field::{holder_quotient, make_grid, Rect, ScalarField};
use seglab::geometry::{classify, detect_junctions, interface_coords, jacobian, InterfaceGeometry};
use seglab::presets::Preset;
use seglab::profiles::{h_plus, mollifier_constant, ramp_rho, sech4_layer_integral};
use seglab::quadrature::gauss_legendre;
use seglab::SegError;
use std::f64::consts::{PI, TAU};

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let whole = (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b));
    let l = (m - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + m)) + f(m));
    let r = (b - m) / 6.0 * (f(m) + 4.0 * f(0.5 * (m + b)) + f(b));
    if depth == 0 || (l + r - whole).abs() <= 15.0 * tol {
        l + r + (l + r - whole) / 15.0
    } else {
        simpson(f, a, m, 0.5 * tol, depth - 1) + simpson(f, m, b, 0.5 * tol, depth - 1)
    }
}

fn bump(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        (-1.0 / (t * (1.0 - t))).exp()
    }
}

#[test]
fn tanh_step_matches_logistic() {
    // (1 + tanh z)/2 = 1/(1 + e^{-2z})
    assert!((h_plus(1.0) - 0.8807970779778823).abs() < 1e-15);
    for z in [-3.0, -0.4, 0.0, 0.25, 2.0, 9.0] {
        assert!((h_plus(z) - 1.0 / (1.0 + (-2.0 * z).exp())).abs() < 1e-15);
    }
}

#[test]
fn mollifier_constant_vs_adaptive_quadrature() {
    let c = 1.0 / simpson(&bump, 0.0, 1.0, 1e-16, 40);
    assert!((mollifier_constant() - c).abs() / c < 1e-12, "{} vs {c}", mollifier_constant());
    assert!((mollifier_constant() - 142.25037577709585).abs() < 1e-9);
    for t in [0.1, 0.3, 0.5, 0.77] {
        let r = c * simpson(&bump, 0.0, t, 1e-16, 40);
        assert!((ramp_rho(t) - r).abs() < 1e-12, "t={t}");
    }
}

#[test]
fn gauss_legendre_integrates_polynomials_exactly() {
    for n in [1, 2, 5, 16, 48] {
        let (x, w) = gauss_legendre(n);
        for deg in 0..(2 * n) {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-13, "n={n} deg={deg}: {q} vs {exact}");
        }
    }
}

#[test]
fn layer_integral_full_line() {
    for eps in [1e-4, 1e-2, 1.0] {
        let v = sech4_layer_integral(f64::NEG_INFINITY, f64::INFINITY, eps).unwrap();
        assert!((v - 4.0 / 3.0 * eps.sqrt()).abs() < 1e-15);
    }
}

#[test]
fn holder_quotient_vs_brute_force() {
    let g = make_grid(Rect::new(-1.0, 1.0, -1.0, 1.0), (24, 20)).unwrap();
    let u = ScalarField::from_fn(g, |p| (3.0 * p[0]).sin() * p[1].abs().sqrt() + p[0] * p[0]);
    let k = Rect::new(-0.5, 0.5, -0.5, 0.6);
    let pts: Vec<([f64; 2], f64)> = (0..=g.ny)
        .flat_map(|j| (0..=g.nx).map(move |i| (i, j)))
        .map(|(i, j)| (g.node(i, j), u.at(i, j)))
        .filter(|(p, _)| p[0] >= k.x0 - 1e-12 && p[0] <= k.x1 + 1e-12 && p[1] >= k.y0 - 1e-12 && p[1] <= k.y1 + 1e-12)
        .collect();
    for alpha in [0.25, 0.5, 0.75] {
        let mut best = 0.0f64;
        for (a, (p, v)) in pts.iter().enumerate() {
            for (q, w) in &pts[a + 1..] {
                let d = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
                best = best.max((v - w).abs() / d.powf(alpha));
            }
        }
        let h = holder_quotient(&u, alpha, k).unwrap();
        assert!((h - best).abs() <= 1e-12 * best, "alpha={alpha}: {h} vs {best}");
    }
}

#[test]
fn circle_tube_jacobian_is_polar_area_ratio() {
    let r0 = 0.5;
    let g = InterfaceGeometry::Circle { center: [0.1, -0.2], radius: r0 };
    for s in [-0.3, -0.01, 0.0, 0.2, 1.0] {
        // r dr dθ against R ds dt with r = R + s
        let ratio = (r0 + s) / r0;
        assert!((jacobian(&g, s, 1.3).unwrap() - ratio).abs() < 1e-15);
    }
    assert!(matches!(jacobian(&g, -0.5, 0.0), Err(SegError::DegenerateTube(_))));
    let line = InterfaceGeometry::line([0.5, 0.0], [1.0, 0.0]);
    assert_eq!(jacobian(&line, 0.3, 0.1).unwrap(), 1.0);
}

#[test]
fn tubular_coordinates_round_trip() {
    let geoms = [
        InterfaceGeometry::Circle { center: [0.0, 0.0], radius: 0.5 },
        InterfaceGeometry::line([0.5, 0.0], [1.0, 0.0]),
        InterfaceGeometry::Segment { a: [0.0, 0.0], b: [0.8, 0.6] },
    ];
    for g in geoms {
        for x in [[0.3, 0.2], [0.61, 0.05], [0.2, 0.4]] {
            let (s, t) = interface_coords(&g, x).unwrap();
            let p = g.point(t);
            let n = g.normal(t);
            assert!((p[0] + s * n[0] - x[0]).abs() < 1e-14 && (p[1] + s * n[1] - x[1]).abs() < 1e-14, "{g:?} {x:?}");
            assert!((g.distance(x) - s.abs()).abs() < 1e-14);
        }
    }
}

#[test]
fn detects_three_sector_junction() {
    let p = Preset::ThreeSector;
    let t = p.candidate(p.grid(128).unwrap());
    let rm = classify(&t, 1e-10).unwrap();
    let js = detect_junctions(&rm).unwrap();
    assert_eq!(js.len(), 1, "{js:?}");
    let j = js[0];
    let h = t.grid().h_max();
    assert!(j.center[0].abs() <= 2.0 * h && j.center[1].abs() <= 2.0 * h, "{:?}", j.center);
    let truth = p.junctions()[0];
    for (a, b) in j.alphas().iter().zip(truth.alphas()) {
        assert!((a - b).abs() < 0.2, "{:?} vs {:?}", j.alphas(), truth.alphas());
    }
    assert!((j.alphas().iter().sum::<f64>() - TAU).abs() < 1e-12);
    assert!(j.alphas().iter().all(|a| *a > PI / 6.0));
}

#[test]
fn no_junction_for_two_phase_data() {
    let p = Preset::LineTypeI;
    let t = p.candidate(p.grid(64).unwrap());
    let rm = classify(&t, 1e-10).unwrap();
    assert!(detect_junctions(&rm).unwrap().is_empty());
}
