use seglab::gamma::{
    check_resolution, fit_linear, fit_slope, gamma_report, log_spaced, read_records, run_sweep, write_records, Experiment, Provenance,
    Quantity, Status, SweepRecord,
};
use seglab::presets::Preset;
use seglab::profiles::ProfileFamily;
use seglab::SegError;
use std::path::PathBuf;

fn reference() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/reference_records.csv")
}

#[test]
fn fit_recovers_exact_power_law() {
    let x: Vec<f64> = (0..6).map(|i| i as f64 * 0.7 - 2.0).collect();
    let y: Vec<f64> = x.iter().map(|x| 0.3 - 1.25 * x).collect();
    let f = fit_linear(&x, &y).unwrap();
    assert!((f.slope + 1.25).abs() < 1e-13 && (f.intercept - 0.3).abs() < 1e-13);
    assert!((f.r2 - 1.0).abs() < 1e-13);
    assert!(matches!(fit_linear(&[1.0], &[2.0]), Err(SegError::CannotFit(_))));
}

#[test]
fn log_spacing() {
    let v = log_spaced(1e-1, 1e-4, 4);
    for (a, b) in v.iter().zip([1e-1, 1e-2, 1e-3, 1e-4]) {
        assert!((a / b - 1.0).abs() < 1e-14);
    }
}

#[test]
fn sweep_guards() {
    let exp = Experiment::Recovery { preset: Preset::ThreeSector, n: 64, delta: 1.0, family: ProfileFamily::CompactRamp };
    assert!(matches!(run_sweep(&exp, &[1e-2, 1e-1]), Err(SegError::InvalidArgument(_))));
    // h = 1/32 on [−1,1]² needs eps ≥ 16 h² = 1/64
    assert!(matches!(run_sweep(&exp, &[1e-1, 1e-2]), Err(SegError::Resolution { .. })));
    assert!(check_resolution(Preset::ThreeSector, 64, 1.0 / 64.0).is_ok());
}

#[test]
fn junction_sweep_is_deterministic_and_sorted() {
    let exp = Experiment::JunctionScaling { preset: Preset::JunctionAsymmetric, delta: 1.5, family: ProfileFamily::SmoothTanh, band_factor: 1.0 };
    let eps = log_spaced(1e-1, 1e-3, 5);
    let a = run_sweep(&exp, &eps).unwrap();
    let b = run_sweep(&exp, &eps).unwrap();
    assert_eq!(a.len(), 10);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!((x.value, x.eps, x.quantity), (y.value, y.eps, y.quantity));
        assert_eq!(x.grid, 0);
        assert_eq!(x.provenance, Provenance::AnalyticQuadrature);
    }
    assert!(a.windows(2).all(|w| w[0].quantity < w[1].quantity || (w[0].quantity == w[1].quantity && w[0].eps > w[1].eps)));
}

#[test]
fn records_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    let exp = Experiment::Recovery { preset: Preset::CircleInterface, n: 64, delta: 1.0, family: ProfileFamily::CompactRamp };
    let recs = run_sweep(&exp, &[1e-1, 5e-2]).unwrap();
    write_records(&recs, &path, true).unwrap();
    let back = read_records(&path).unwrap();
    assert_eq!(back.len(), recs.len());
    for (a, b) in recs.iter().zip(&back) {
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.eps.to_bits(), b.eps.to_bits());
        assert_eq!((&a.experiment, a.quantity, a.grid, a.provenance), (&b.experiment, b.quantity, b.grid, b.provenance));
    }
    write_records(&recs, &path, false).unwrap();
    assert!(read_records(&path).unwrap().iter().all(|r| r.runtime_s == 0.0));
}

#[test]
fn reference_records_reproduce() {
    let shipped = read_records(&reference()).unwrap();
    let mut fresh: Vec<SweepRecord> = Vec::new();
    let eps = log_spaced(1e-1, 1e-4, 9);
    for d in [1.0, 1.5, 2.0] {
        let exp = Experiment::JunctionScaling { preset: Preset::JunctionSymmetric, delta: d, family: ProfileFamily::CompactRamp, band_factor: 1.0 };
        fresh.extend(run_sweep(&exp, &eps).unwrap());
    }
    for p in [Preset::ThreeSector, Preset::CircleInterface] {
        let exp = Experiment::Recovery { preset: p, n: 256, delta: 1.0, family: ProfileFamily::CompactRamp };
        fresh.extend(run_sweep(&exp, &[1e-1, 1e-2, 1e-3]).unwrap());
    }
    assert_eq!(shipped.len(), fresh.len());
    for s in &shipped {
        let f = fresh
            .iter()
            .find(|f| f.experiment == s.experiment && f.quantity == s.quantity && (f.eps / s.eps - 1.0).abs() < 1e-3)
            .unwrap_or_else(|| panic!("no fresh record for {s:?}"));
        assert!((f.value - s.value).abs() <= 1e-10 * s.value.abs().max(1e-300), "{s:?} vs {}", f.value);
    }
}

#[test]
fn report_on_reference_records_passes() {
    let rep = gamma_report(&read_records(&reference()).unwrap());
    assert!(rep.passed(), "{}", rep.render());
    for name in ["junction_EA_slope", "junction_EB_slope", "junction_total_slope", "l2_recovery_monotone", "constraint_exact"] {
        assert_eq!(rep.check(name).map(|c| c.status), Some(Status::Pass), "{name}");
    }
    assert!(rep.render().ends_with("overall status=PASS\n"));
}

#[test]
fn report_flags_synthetic_failures() {
    let mk = |q: Quantity, eps: f64, v: f64| SweepRecord {
        experiment: "penalty_decay:three_sector".into(),
        eps,
        grid: 256,
        quantity: q,
        value: v,
        runtime_s: 0.0,
        provenance: Provenance::Solver,
    };
    let mut recs = Vec::new();
    for (i, e) in [1e-1, 1e-2, 1e-3].into_iter().enumerate() {
        // slope 0.2 in eps, energy increasing with eps
        recs.push(mk(Quantity::PenaltyL2, e, e.powf(0.2)));
        recs.push(mk(Quantity::MinEnergy, e, 3.0 - i as f64));
        recs.push(mk(Quantity::CandidateEnergy, e, 5.0));
    }
    let rep = gamma_report(&recs);
    assert!(!rep.passed());
    assert_eq!(rep.check("penalty_slope").unwrap().status, Status::Fail);
    assert!(rep.render().contains("overall status=FAIL"));
    let f = fit_slope(&recs.iter().filter(|r| r.quantity == Quantity::PenaltyL2).cloned().collect::<Vec<_>>()).unwrap();
    assert!((f.slope - 0.2).abs() < 1e-12);
}
