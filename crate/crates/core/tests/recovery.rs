use seglab::energy::{energy_constrained, junction_ball_split, junction_ball_split_grid};
use seglab::field::{l2_distance, make_grid, Rect};
use seglab::presets::Preset;
use seglab::profiles::ProfileFamily;
use seglab::recovery::{assemble_recovery_from, constraint_violation, recovery_at, JunctionPatch, TripleSource};

#[test]
fn junction_split_polar_vs_grid() {
    let p = Preset::JunctionSymmetric;
    let j = p.junctions()[0];
    for eps in [1e-2, 1e-3] {
        let patch = JunctionPatch::new(j, eps, 1.0, ProfileFamily::CompactRamp, &p).unwrap();
        let (ea, eb) = junction_ball_split(&patch, 1.0).unwrap();
        // grid route: sample the same patch on a fine grid around the ball
        let r = eps.sqrt();
        let c = j.center;
        let g = make_grid(Rect::new(c[0] - 1.2 * r, c[0] + 1.2 * r, c[1] - 1.2 * r, c[1] + 1.2 * r), (600, 600)).unwrap();
        let t = seglab::field::PhaseTriple::from_fn(g, |x| patch.eval(x).unwrap());
        let (ga, gb) = junction_ball_split_grid(&t, &j, eps, 1.0).unwrap();
        assert!((ga - ea).abs() < 0.05 * ea, "eps={eps}: E_A {ea} vs {ga}");
        assert!((gb - eb).abs() < 0.05 * eb, "eps={eps}: E_B {eb} vs {gb}");
    }
}

#[test]
fn ramp_recovery_leaves_bulk_untouched() {
    let p = Preset::CircleInterface;
    let eps = 1e-3f64;
    let cfg = p.recovery_config(eps, 1.0, ProfileFamily::CompactRamp);
    let se = eps.sqrt();
    for x in [[0.0f64, 0.1], [0.3, -0.2], [0.9, 0.8], [-0.7, 0.2]] {
        let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
        let d = cfg.domain.dist_to_boundary(x);
        if (r - 0.5).abs() > se && d > se {
            assert_eq!(recovery_at(&p, &cfg, x).unwrap(), p.eval(x), "{x:?}");
        }
    }
}

#[test]
fn recovery_is_segregated_and_converges() {
    for p in [Preset::LineTypeI, Preset::LineTypeIIa, Preset::LineTypeIII, Preset::JunctionAsymmetric] {
        let g = p.grid(128).unwrap();
        let target = p.candidate(g);
        let mut prev = f64::INFINITY;
        for eps in [1e-1f64, 1e-2, 1e-3] {
            if g.h_max() > eps.sqrt() / 4.0 {
                continue;
            }
            let t = assemble_recovery_from(&p, g, &p.recovery_config(eps, 1.0, ProfileFamily::CompactRamp)).unwrap();
            assert_eq!(constraint_violation(&t), 0.0, "{}", p.name());
            assert!(energy_constrained(&t, 1e-10).unwrap().is_some());
            let err: f64 = (0..3).map(|c| l2_distance(&t.u[c], &target.u[c]).unwrap().powi(2)).sum::<f64>().sqrt();
            assert!(err < prev, "{} eps={eps}: {err} !< {prev}", p.name());
            prev = err;
        }
    }
}

#[test]
fn recovery_keeps_boundary_traces() {
    let p = Preset::ThreeSector;
    let g = p.grid(128).unwrap();
    let phi = p.boundary_data(g);
    let t = assemble_recovery_from(&p, g, &p.recovery_config(1e-2, 1.0, ProfileFamily::SmoothTanh)).unwrap();
    for c in 0..3 {
        for &k in &g.boundary_indices() {
            assert_eq!(t.u[c].values[k], phi.u[c].values[k]);
        }
    }
}
