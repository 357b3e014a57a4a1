use proptest::prelude::*;
use seglab::energy::{energy_eps, penalty};
use seglab::field::{dirichlet_energy, l2_norm, make_grid, pairwise_sum, PhaseTriple, Rect, ScalarField};
use seglab::geometry::{classify_values, JunctionSpec, RegionLabel};
use seglab::presets::Preset;
use seglab::profiles::{
    angular_cutoff, h_minus, h_plus, psi_minus, psi_plus, ramp_rho, sech4_first_moment, sech4_layer_integral, step_minus,
    step_plus, ProfileFamily,
};
use seglab::recovery::{partition_weights, TripleSource};

const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

fn family() -> impl Strategy<Value = ProfileFamily> {
    prop_oneof![Just(ProfileFamily::SmoothTanh), Just(ProfileFamily::CompactRamp)]
}

fn nonneg() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), 0.0..2.0f64]
}

proptest! {
    #[test]
    fn classification_commutes_with_permutation(v in [nonneg(), nonneg(), nonneg()], p in 0..6usize, tol in 1e-12..1e-3f64) {
        let perm = PERMS[p];
        let mut w = [0.0; 3];
        for c in 0..3 {
            w[perm[c]] = v[c];
        }
        prop_assert_eq!(classify_values(w, tol), classify_values(v, tol).permute(perm));
    }

    #[test]
    fn ramp_is_symmetric_monotone_and_bounded(t in -0.5..1.5f64, dt in 0.0..0.5f64) {
        let r = ramp_rho(t);
        prop_assert!((0.0..=1.0).contains(&r));
        prop_assert!((r + ramp_rho(1.0 - t) - 1.0).abs() <= 1e-14);
        prop_assert!(ramp_rho(t + dt) >= r - 1e-15);
    }

    #[test]
    fn steps_partition_unity(z in -40.0..40.0f64, fam in family()) {
        prop_assert!((h_plus(z) + h_minus(z) - 1.0).abs() <= 1e-15);
        prop_assert!((step_plus(fam, z) + step_minus(fam, z) - 1.0).abs() <= 1e-14);
        prop_assert_eq!(psi_plus(z) * psi_minus(z), 0.0);
    }

    #[test]
    fn ramp_steps_are_flat_outside_band(z in 1.0..50.0f64) {
        prop_assert_eq!(step_plus(ProfileFamily::CompactRamp, z), 1.0);
        prop_assert_eq!(step_plus(ProfileFamily::CompactRamp, -z), 0.0);
    }

    #[test]
    fn angular_cutoffs_bounded(theta in -7.0..7.0f64, eps in 1e-4..1e-2f64, a0 in 1.2..2.6f64, a1 in 1.2..2.6f64, fam in family()) {
        let j = JunctionSpec::new([0.0, 0.0], 0.3, [a0, a1], [0, 1, 2]).unwrap();
        let chi: Vec<f64> = (0..3).map(|k| angular_cutoff(k, theta, eps, &j, fam).unwrap()).collect();
        prop_assert!(chi.iter().all(|c| (-1e-15..=1.0 + 1e-15).contains(c)));
        if fam == ProfileFamily::CompactRamp {
            prop_assert!(chi.iter().filter(|c| **c > 0.0).count() <= 2);
        }
    }

    #[test]
    fn layer_integral_is_additive(a in -2.0..2.0f64, d1 in 0.0..1.0f64, d2 in 0.0..1.0f64, eps in 1e-4..1.0f64) {
        let (b, c) = (a + d1, a + d1 + d2);
        let whole = sech4_layer_integral(a, c, eps).unwrap();
        let parts = sech4_layer_integral(a, b, eps).unwrap() + sech4_layer_integral(b, c, eps).unwrap();
        prop_assert!((whole - parts).abs() <= 1e-14);
        prop_assert!(whole >= 0.0 && whole <= 4.0 / 3.0 * eps.sqrt() + 1e-15);
        // odd integrand: symmetric limits cancel
        prop_assert!(sech4_first_moment(-c.abs(), c.abs(), eps).unwrap().abs() <= 1e-14);
    }

    #[test]
    fn dirichlet_exact_for_affine(a in -3.0..3.0f64, b in -3.0..3.0f64, c in -1.0..1.0f64, nx in 3..20usize, ny in 3..20usize) {
        let g = make_grid(Rect::new(-0.5, 1.5, 0.0, 0.7), (nx, ny)).unwrap();
        let u = ScalarField::from_fn(g, |p| a * p[0] + b * p[1] + c);
        let exact = (a * a + b * b) * 2.0 * 0.7;
        prop_assert!((dirichlet_energy(&u) - exact).abs() <= 1e-12 * (1.0 + exact));
        let k = ScalarField::from_fn(g, |_| c);
        prop_assert!((l2_norm(&k) - c.abs() * (1.4f64).sqrt()).abs() <= 1e-13);
    }

    #[test]
    fn pairwise_sum_matches_naive(v in proptest::collection::vec(-1e3..1e3f64, 0..300)) {
        let naive: f64 = v.iter().sum();
        let scale: f64 = v.iter().map(|x| x.abs()).sum::<f64>().max(1.0);
        prop_assert!((pairwise_sum(&v) - naive).abs() <= 1e-12 * scale);
    }

    #[test]
    fn energy_is_permutation_invariant(seed in 0u64..1000, p in 0..6usize, eps in 1e-3..1.0f64) {
        let g = make_grid(Rect::UNIT, (6, 5)).unwrap();
        let f = |c: usize| ScalarField::from_fn(g, move |x| ((seed as f64 + 1.0) * (x[0] + 2.0 * x[1] + c as f64)).sin().abs());
        let u = [f(0), f(1), f(2)];
        let t = PhaseTriple::new(u[0].clone(), u[1].clone(), u[2].clone()).unwrap();
        let perm = PERMS[p];
        let mut q: Vec<Option<ScalarField>> = vec![None, None, None];
        for c in 0..3 {
            q[perm[c]] = Some(u[c].clone());
        }
        let [a, b, c] = [q[0].take().unwrap(), q[1].take().unwrap(), q[2].take().unwrap()];
        let s = PhaseTriple::new(a, b, c).unwrap();
        let (e1, e2) = (energy_eps(&t, eps).unwrap(), energy_eps(&s, eps).unwrap());
        prop_assert!((e1.total_eps - e2.total_eps).abs() <= 1e-12 * e1.total_eps);
        prop_assert!(e1.penalty >= 0.0);
        prop_assert!((penalty(&t, eps).unwrap() - e1.penalty).abs() <= 1e-12 * (1.0 + e1.penalty));
    }

    #[test]
    fn cutoff_weights_partition_unity(pi in 0..9usize, u in 0.0..1.0f64, v in 0.0..1.0f64, eps in 1e-4..1e-1f64) {
        let p = Preset::ALL[pi];
        let d = p.domain();
        let x = [d.x0 + u * d.width(), d.y0 + v * d.height()];
        let cfg = p.recovery_config(eps, 1.0, ProfileFamily::CompactRamp);
        let region = classify_values(p.eval(x), cfg.zero_tol);
        let w = partition_weights(x, region, &cfg).unwrap();
        prop_assert!((w.sum() - 1.0).abs() <= 1e-12);
        prop_assert!(w.positive_count() <= 2);
        prop_assert!(w.region != RegionLabel::ConstraintViolation);
    }
}
