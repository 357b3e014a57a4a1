//! ε-sweeps, log-log slope fits and the scaling report.

use crate::energy::{energy_eps, junction_ball_split, FEASIBILITY_TOL};
use crate::error::{Result, SegError};
use crate::field::{fmt17, holder_quotient, l2_distance, l2_norm, product_field, Rect};
use crate::presets::Preset;
use crate::profiles::ProfileFamily;
use crate::recovery::{assemble_recovery_from, constraint_violation, JunctionPatch};
use crate::solver::{solve_penalized, SolverConfig};
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Quantity {
    PenaltyL2,
    MinEnergy,
    CandidateEnergy,
    RecoveryExcess,
    JunctionEA,
    JunctionEB,
    L2RecoveryError,
    HolderQuotient,
    ConstraintViolation,
}

impl Quantity {
    pub const ALL: [Quantity; 9] = [
        Quantity::PenaltyL2,
        Quantity::MinEnergy,
        Quantity::CandidateEnergy,
        Quantity::RecoveryExcess,
        Quantity::JunctionEA,
        Quantity::JunctionEB,
        Quantity::L2RecoveryError,
        Quantity::HolderQuotient,
        Quantity::ConstraintViolation,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Quantity::PenaltyL2 => "penalty_l2",
            Quantity::MinEnergy => "min_energy",
            Quantity::CandidateEnergy => "candidate_energy",
            Quantity::RecoveryExcess => "recovery_excess",
            Quantity::JunctionEA => "junction_EA",
            Quantity::JunctionEB => "junction_EB",
            Quantity::L2RecoveryError => "l2_recovery_error",
            Quantity::HolderQuotient => "holder_quotient",
            Quantity::ConstraintViolation => "constraint_violation",
        }
    }

    pub fn parse(s: &str) -> Result<Quantity> {
        Quantity::ALL
            .iter()
            .copied()
            .find(|q| q.name() == s)
            .ok_or_else(|| SegError::InvalidArgument(format!("unknown quantity '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Provenance {
    Solver,
    Recovery,
    AnalyticQuadrature,
}

impl Provenance {
    pub fn name(&self) -> &'static str {
        match self {
            Provenance::Solver => "solver",
            Provenance::Recovery => "recovery",
            Provenance::AnalyticQuadrature => "analytic-quadrature",
        }
    }

    pub fn parse(s: &str) -> Result<Provenance> {
        match s {
            "solver" => Ok(Provenance::Solver),
            "recovery" => Ok(Provenance::Recovery),
            "analytic-quadrature" => Ok(Provenance::AnalyticQuadrature),
            _ => Err(SegError::InvalidArgument(format!("unknown provenance '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub experiment: String,
    pub eps: f64,
    /// Cells per side; 0 for grid-free records.
    pub grid: usize,
    pub quantity: Quantity,
    pub value: f64,
    pub runtime_s: f64,
    pub provenance: Provenance,
}

impl SweepRecord {
    fn key(&self) -> (String, Quantity, u64) {
        (self.experiment.clone(), self.quantity, self.eps.to_bits())
    }
}

/// Sorts by experiment, quantity, then decreasing ε.
pub fn sort_records(r: &mut [SweepRecord]) {
    r.sort_by(|a, b| {
        a.experiment
            .cmp(&b.experiment)
            .then(a.quantity.cmp(&b.quantity))
            .then(b.eps.partial_cmp(&a.eps).unwrap_or(std::cmp::Ordering::Equal))
    });
}

#[derive(Debug, Clone, PartialEq)]
pub enum Experiment {
    /// Minimizers of E^ε for a preset's boundary data on an n×n grid.
    PenaltyDecay { preset: Preset, n: usize, solver: SolverConfig },
    /// Analytic junction patch on B_{√ε}, polar quadrature.
    JunctionScaling { preset: Preset, delta: f64, family: ProfileFamily, band_factor: f64 },
    /// Recovery sequence of a preset's analytic triple on an n×n grid.
    Recovery { preset: Preset, n: usize, delta: f64, family: ProfileFamily },
}

impl Experiment {
    pub fn name(&self) -> String {
        match self {
            Experiment::PenaltyDecay { preset, .. } => format!("penalty_decay:{}", preset.name()),
            Experiment::JunctionScaling { preset, delta, family, .. } => {
                format!("junction_scaling:{}:{}:delta={}", preset.name(), family.name(), delta)
            }
            Experiment::Recovery { preset, family, delta, .. } => {
                format!("recovery:{}:{}:delta={}", preset.name(), family.name(), delta)
            }
        }
    }

    fn grid_n(&self) -> Option<(Preset, usize)> {
        match *self {
            Experiment::PenaltyDecay { preset, n, .. } | Experiment::Recovery { preset, n, .. } => Some((preset, n)),
            Experiment::JunctionScaling { .. } => None,
        }
    }
}

/// Checks h ≤ √ε/4 for a grid-based experiment.
pub fn check_resolution(preset: Preset, n: usize, eps: f64) -> Result<()> {
    let g = preset.grid(n)?;
    let limit = eps.sqrt() / 4.0;
    if g.h_max() > limit * (1.0 + 1e-12) {
        return Err(SegError::Resolution { eps, h: g.h_max(), limit });
    }
    Ok(())
}

fn interior_quarter(d: Rect) -> Rect {
    let (cx, cy) = (0.5 * (d.x0 + d.x1), 0.5 * (d.y0 + d.y1));
    let (hw, hh) = (0.25 * d.width(), 0.25 * d.height());
    Rect::new(cx - hw, cx + hw, cy - hh, cy + hh)
}

fn run_point(exp: &Experiment, eps: f64) -> Result<Vec<SweepRecord>> {
    let name = exp.name();
    let t0 = Instant::now();
    let mut out: Vec<(Quantity, f64, Provenance, usize)> = Vec::new();
    match exp {
        Experiment::PenaltyDecay { preset, n, solver } => {
            let g = preset.grid(*n)?;
            let r = solve_penalized(&preset.boundary_data(g), eps, solver)?;
            if !r.converged {
                return Err(SegError::SolverFailure(format!(
                    "no convergence at eps={eps} after {} sweeps (residual {:e})",
                    r.iterations, r.residual
                )));
            }
            let cand = energy_eps(&preset.candidate(g), eps)?;
            let k = interior_quarter(g.extent);
            let mut hq = 0.0f64;
            for u in &r.triple.u {
                hq = hq.max(holder_quotient(u, 0.75, k)?);
            }
            out.push((Quantity::PenaltyL2, l2_norm(&product_field(&r.triple)?), Provenance::Solver, *n));
            out.push((Quantity::MinEnergy, r.breakdown.total_eps, Provenance::Solver, *n));
            out.push((Quantity::CandidateEnergy, cand.total_eps, Provenance::Solver, *n));
            out.push((Quantity::HolderQuotient, hq, Provenance::Solver, *n));
        }
        Experiment::JunctionScaling { preset, delta, family, band_factor } => {
            let j = preset
                .junctions()
                .first()
                .copied()
                .ok_or_else(|| SegError::UnsupportedGeometry(format!("preset {} has no junction", preset.name())))?;
            let patch = JunctionPatch::new(j, eps, *delta, *family, preset)?;
            let (ea, eb) = junction_ball_split(&patch, *band_factor)?;
            out.push((Quantity::JunctionEA, ea, Provenance::AnalyticQuadrature, 0));
            out.push((Quantity::JunctionEB, eb, Provenance::AnalyticQuadrature, 0));
        }
        Experiment::Recovery { preset, n, delta, family } => {
            let g = preset.grid(*n)?;
            let cfg = preset.recovery_config(eps, *delta, *family);
            let rec = assemble_recovery_from(preset, g, &cfg)?;
            let cand = preset.candidate(g);
            let mut err2 = 0.0;
            for c in 0..3 {
                let d = l2_distance(&rec.u[c], &cand.u[c])?;
                err2 += d * d;
            }
            let e_rec = energy_eps(&rec, eps)?.total_eps;
            let e0 = crate::energy::energy_constrained(&cand, FEASIBILITY_TOL)?
                .ok_or_else(|| SegError::InvalidArgument(format!("preset {} is not feasible", preset.name())))?;
            out.push((Quantity::L2RecoveryError, err2.sqrt(), Provenance::Recovery, *n));
            out.push((Quantity::RecoveryExcess, e_rec - e0, Provenance::Recovery, *n));
            out.push((Quantity::ConstraintViolation, constraint_violation(&rec), Provenance::Recovery, *n));
        }
    }
    let rt = t0.elapsed().as_secs_f64();
    Ok(out
        .into_iter()
        .map(|(quantity, value, provenance, grid)| SweepRecord {
            experiment: name.clone(),
            eps,
            grid,
            quantity,
            value,
            runtime_s: rt,
            provenance,
        })
        .collect())
}

/// Runs one experiment over a strictly decreasing ε list; points run in parallel.
pub fn run_sweep(exp: &Experiment, eps_list: &[f64]) -> Result<Vec<SweepRecord>> {
    if eps_list.is_empty() {
        return Err(SegError::InvalidArgument("empty eps list".into()));
    }
    if eps_list.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(SegError::InvalidArgument("eps values must be positive and finite".into()));
    }
    if eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(SegError::InvalidArgument("eps list must be strictly decreasing".into()));
    }
    if let Some((preset, n)) = exp.grid_n() {
        for &e in eps_list {
            check_resolution(preset, n, e)?;
        }
    }
    let parts: Vec<Result<Vec<SweepRecord>>> = eps_list.par_iter().map(|&e| run_point(exp, e)).collect();
    let mut out = Vec::new();
    for p in parts {
        out.extend(p?);
    }
    sort_records(&mut out);
    Ok(out)
}

/// `n` log-spaced values from `hi` down to `lo`.
pub fn log_spaced(hi: f64, lo: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![hi];
    }
    let (a, b) = (hi.ln(), lo.ln());
    (0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub n: usize,
}

/// Ordinary least squares y = slope·x + intercept.
pub fn fit_linear(x: &[f64], y: &[f64]) -> Result<Fit> {
    let n = x.len();
    if n != y.len() || n < 3 {
        return Err(SegError::CannotFit(format!("need at least 3 paired points, got {n}")));
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(SegError::CannotFit("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - slope * a - intercept).powi(2)).sum();
    let ss_tot: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(Fit { slope, intercept, r2, n })
}

/// Log-log fit of value against ε.
pub fn fit_slope(records: &[SweepRecord]) -> Result<Fit> {
    if let Some(r) = records.iter().find(|r| !(r.value > 0.0)) {
        return Err(SegError::CannotFit(format!(
            "{} = {} at eps={} is not positive",
            r.quantity.name(),
            r.value,
            r.eps
        )));
    }
    let x: Vec<f64> = records.iter().map(|r| r.eps.ln()).collect();
    let y: Vec<f64> = records.iter().map(|r| r.value.ln()).collect();
    fit_linear(&x, &y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Reported, not asserted.
    Flag,
}

impl Status {
    pub fn name(&self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Flag => "FLAG",
        }
    }

    fn of(ok: bool) -> Status {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub experiment: String,
    pub measured: String,
    pub tolerance: String,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitRow {
    pub experiment: String,
    pub quantity: String,
    pub fit: Option<Fit>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub fits: Vec<FitRow>,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Plain-text table followed by one `status=` line per check.
    pub fn render(&self) -> String {
        let mut s = String::new();
        if self.fits.is_empty() && self.checks.is_empty() {
            s.push_str("no records\n");
            return s;
        }
        let _ = writeln!(s, "{:<48} {:<22} {:>10} {:>12} {:>8}  note", "experiment", "quantity", "slope", "intercept", "r2");
        for f in &self.fits {
            match f.fit {
                Some(fit) => {
                    let _ = writeln!(
                        s,
                        "{:<48} {:<22} {:>10.4} {:>12.4} {:>8.4}  {}",
                        f.experiment, f.quantity, fit.slope, fit.intercept, fit.r2, f.note
                    );
                }
                None => {
                    let _ = writeln!(s, "{:<48} {:<22} {:>10} {:>12} {:>8}  {}", f.experiment, f.quantity, "-", "-", "-", f.note);
                }
            }
        }
        s.push('\n');
        for c in &self.checks {
            let _ = writeln!(
                s,
                "check={} experiment={} measured={} tolerance={} status={}",
                c.name,
                c.experiment,
                c.measured,
                c.tolerance,
                c.status.name()
            );
        }
        let _ = writeln!(s, "overall status={}", if self.passed() { "PASS" } else { "FAIL" });
        s
    }
}

fn by_experiment(records: &[SweepRecord]) -> BTreeMap<String, BTreeMap<Quantity, Vec<SweepRecord>>> {
    let mut m: BTreeMap<String, BTreeMap<Quantity, Vec<SweepRecord>>> = BTreeMap::new();
    for r in records {
        m.entry(r.experiment.clone()).or_default().entry(r.quantity).or_default().push(r.clone());
    }
    for q in m.values_mut() {
        for v in q.values_mut() {
            // increasing ε
            v.sort_by(|a, b| a.eps.partial_cmp(&b.eps).unwrap_or(std::cmp::Ordering::Equal));
            v.dedup_by(|a, b| a.key() == b.key());
        }
    }
    m
}

fn delta_of(exp: &str) -> Option<f64> {
    exp.rsplit("delta=").next().and_then(|s| s.parse().ok())
}

fn family_of(exp: &str) -> Option<ProfileFamily> {
    exp.split(':').find_map(ProfileFamily::parse)
}

fn fmt_fit(f: &Fit) -> String {
    format!("slope={:.4},r2={:.4}", f.slope, f.r2)
}

/// Evaluates the scaling checklist on a record set.
pub fn gamma_report(records: &[SweepRecord]) -> Report {
    let mut rep = Report::default();
    let groups = by_experiment(records);
    for (exp, qs) in &groups {
        for (q, recs) in qs {
            if *q == Quantity::CandidateEnergy {
                continue;
            }
            let row = match fit_slope(recs) {
                Ok(f) => FitRow { experiment: exp.clone(), quantity: q.name().into(), fit: Some(f), note: String::new() },
                Err(e) => FitRow { experiment: exp.clone(), quantity: q.name().into(), fit: None, note: e.to_string() },
            };
            rep.fits.push(row);
        }
        if exp.starts_with("junction_scaling") {
            if let (Some(a), Some(b)) = (qs.get(&Quantity::JunctionEA), qs.get(&Quantity::JunctionEB)) {
                let total: Vec<SweepRecord> = a
                    .iter()
                    .zip(b)
                    .map(|(x, y)| SweepRecord { value: x.value + y.value, ..x.clone() })
                    .collect();
                let row = match fit_slope(&total) {
                    Ok(f) => FitRow { experiment: exp.clone(), quantity: "junction_total".into(), fit: Some(f), note: String::new() },
                    Err(e) => FitRow { experiment: exp.clone(), quantity: "junction_total".into(), fit: None, note: e.to_string() },
                };
                rep.fits.push(row);
            }
        }
    }
    let fit_of = |exp: &str, q: &str| {
        rep.fits.iter().find(|f| f.experiment == exp && f.quantity == q).and_then(|f| f.fit)
    };
    let mut checks = Vec::new();
    let mut ea_by_delta: Vec<(f64, f64, String)> = Vec::new();
    for (exp, qs) in &groups {
        if let Some(recs) = qs.get(&Quantity::PenaltyL2) {
            checks.push(match fit_of(exp, "penalty_l2") {
                Some(f) => Check {
                    name: "penalty_slope".into(),
                    experiment: exp.clone(),
                    measured: fmt_fit(&f),
                    tolerance: "slope>=0.45,r2>=0.98".into(),
                    status: Status::of(f.slope >= 0.45 && f.r2 >= 0.98),
                },
                None => Check {
                    name: "penalty_slope".into(),
                    experiment: exp.clone(),
                    measured: format!("unfit({} records)", recs.len()),
                    tolerance: "slope>=0.45,r2>=0.98".into(),
                    status: Status::Fail,
                },
            });
        }
        if let Some(me) = qs.get(&Quantity::MinEnergy) {
            // increasing ε order: energy must not increase
            let worst = me.windows(2).map(|w| w[1].value - w[0].value).fold(f64::NEG_INFINITY, f64::max);
            let ok = me.len() < 2 || worst <= 1e-8;
            checks.push(Check {
                name: "min_energy_monotone".into(),
                experiment: exp.clone(),
                measured: if me.len() < 2 { "single point".into() } else { format!("max_increase={:.3e}", worst) },
                tolerance: "<=1e-8".into(),
                status: Status::of(ok),
            });
            if let Some(cand) = qs.get(&Quantity::CandidateEnergy) {
                let mut gap = f64::NEG_INFINITY;
                let mut matched = 0;
                for r in me {
                    if let Some(c) = cand.iter().find(|c| c.eps == r.eps) {
                        gap = gap.max(r.value - c.value);
                        matched += 1;
                    }
                }
                checks.push(Check {
                    name: "min_energy_below_candidate".into(),
                    experiment: exp.clone(),
                    measured: format!("max(min-candidate)={:.3e}", gap),
                    tolerance: "<=1e-8".into(),
                    status: Status::of(matched == me.len() && gap <= 1e-8),
                });
            }
        }
        if let Some(hq) = qs.get(&Quantity::HolderQuotient) {
            let mx = hq.iter().map(|r| r.value).fold(f64::NEG_INFINITY, f64::max);
            let mn = hq.iter().map(|r| r.value).fold(f64::INFINITY, f64::min);
            let ratio = mx / mn;
            checks.push(Check {
                name: "holder_bounded".into(),
                experiment: exp.clone(),
                measured: format!("max/min={:.4}", ratio),
                tolerance: "<2".into(),
                status: Status::of(mn > 0.0 && ratio < 2.0),
            });
        }
        if exp.starts_with("junction_scaling") {
            let delta = delta_of(exp).unwrap_or(1.0);
            let ea = fit_of(exp, "junction_EA");
            if let Some(f) = ea {
                ea_by_delta.push((delta, f.slope, exp.clone()));
                let target = (delta - 0.25).min(0.75);
                checks.push(Check {
                    name: "junction_EA_slope".into(),
                    experiment: exp.clone(),
                    measured: fmt_fit(&f),
                    tolerance: format!("{:.4}+-0.15", target),
                    status: Status::of((f.slope - target).abs() <= 0.15),
                });
            }
            if delta == 1.0 {
                let eb = fit_of(exp, "junction_EB");
                let tot = fit_of(exp, "junction_total");
                checks.push(Check {
                    name: "junction_EB_slope".into(),
                    experiment: exp.clone(),
                    measured: eb.map(|f| fmt_fit(&f)).unwrap_or_else(|| "unfit".into()),
                    tolerance: "0.25+-0.10".into(),
                    status: Status::of(eb.map(|f| (f.slope - 0.25).abs() <= 0.10).unwrap_or(false)),
                });
                checks.push(Check {
                    name: "junction_EA_slope_delta1".into(),
                    experiment: exp.clone(),
                    measured: ea.map(|f| fmt_fit(&f)).unwrap_or_else(|| "unfit".into()),
                    tolerance: "0.75+-0.10".into(),
                    status: Status::of(ea.map(|f| (f.slope - 0.75).abs() <= 0.10).unwrap_or(false)),
                });
                checks.push(Check {
                    name: "junction_total_slope".into(),
                    experiment: exp.clone(),
                    measured: tot.map(|f| fmt_fit(&f)).unwrap_or_else(|| "unfit".into()),
                    tolerance: "[0.15,0.35]".into(),
                    status: Status::of(tot.map(|f| (0.15..=0.35).contains(&f.slope)).unwrap_or(false)),
                });
            }
        }
        if let Some(l2) = qs.get(&Quantity::L2RecoveryError) {
            let ok = l2.windows(2).all(|w| w[0].value < w[1].value);
            checks.push(Check {
                name: "l2_recovery_monotone".into(),
                experiment: exp.clone(),
                measured: l2.iter().map(|r| format!("{:.3e}", r.value)).collect::<Vec<_>>().join("<"),
                tolerance: "strictly decreasing as eps decreases".into(),
                status: Status::of(ok),
            });
        }
        if qs.contains_key(&Quantity::RecoveryExcess) {
            let f = fit_of(exp, "recovery_excess");
            checks.push(Check {
                name: "recovery_excess_slope".into(),
                experiment: exp.clone(),
                measured: f.map(|f| fmt_fit(&f)).unwrap_or_else(|| "unfit".into()),
                tolerance: "slope>=0.15 (reported)".into(),
                status: if f.map(|f| f.slope >= 0.15).unwrap_or(false) { Status::Pass } else { Status::Flag },
            });
        }
        if let Some(cv) = qs.get(&Quantity::ConstraintViolation) {
            match family_of(exp) {
                Some(ProfileFamily::CompactRamp) => {
                    let mx = cv.iter().map(|r| r.value).fold(0.0, f64::max);
                    checks.push(Check {
                        name: "constraint_exact".into(),
                        experiment: exp.clone(),
                        measured: format!("max={:e}", mx),
                        tolerance: "==0".into(),
                        status: Status::of(mx == 0.0),
                    });
                }
                _ => {
                    let res = if cv.iter().all(|r| r.value > 0.0) {
                        let x: Vec<f64> = cv.iter().map(|r| 1.0 / r.eps.sqrt()).collect();
                        let y: Vec<f64> = cv.iter().map(|r| r.value.ln()).collect();
                        fit_linear(&x, &y).ok()
                    } else {
                        None
                    };
                    checks.push(Check {
                        name: "constraint_exponential".into(),
                        experiment: exp.clone(),
                        measured: res.map(|f| fmt_fit(&f)).unwrap_or_else(|| "unfit".into()),
                        tolerance: "log(v) vs 1/sqrt(eps): slope<0,r2>=0.95".into(),
                        status: Status::of(res.map(|f| f.slope < 0.0 && f.r2 >= 0.95).unwrap_or(false)),
                    });
                }
            }
        }
    }
    if ea_by_delta.len() >= 2 {
        ea_by_delta.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let ok = ea_by_delta.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-9);
        checks.push(Check {
            name: "junction_EA_delta_order".into(),
            experiment: "junction_scaling".into(),
            measured: ea_by_delta.iter().map(|(d, s, _)| format!("{d}:{s:.4}")).collect::<Vec<_>>().join(","),
            tolerance: "non-decreasing in delta (1e-9)".into(),
            status: Status::of(ok),
        });
    }
    rep.checks = checks;
    rep
}

pub const RECORD_HEADER: [&str; 7] = ["experiment", "eps", "grid", "quantity", "value", "runtime_s", "provenance"];

/// Writes records as CSV; `timings = false` writes runtime 0 for byte-stable output.
pub fn write_records(records: &[SweepRecord], path: &Path, timings: bool) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(RECORD_HEADER)?;
    for r in records {
        let grid = if r.grid == 0 { "-".to_string() } else { format!("{0}x{0}", r.grid) };
        let rt = if timings { format!("{:.3}", r.runtime_s) } else { "0".into() };
        w.write_record([r.experiment.clone(), fmt17(r.eps), grid, r.quantity.name().into(), fmt17(r.value), rt, r.provenance.name().into()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records(path: &Path) -> Result<Vec<SweepRecord>> {
    let mut rd = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for (line, rec) in rd.records().enumerate() {
        let rec = rec?;
        let bad = |k: &str, m: String| SegError::Config { line: line + 2, key: k.into(), msg: m };
        if rec.len() != RECORD_HEADER.len() {
            return Err(bad("record", format!("expected {} fields, got {}", RECORD_HEADER.len(), rec.len())));
        }
        let num = |i: usize, k: &str| rec[i].trim().parse::<f64>().map_err(|e| bad(k, e.to_string()));
        let grid = match rec[2].trim() {
            "-" => 0,
            s => s.split('x').next().unwrap_or("").parse().map_err(|_| bad("grid", format!("bad grid '{s}'")))?,
        };
        let eps = num(1, "eps")?;
        let value = num(4, "value")?;
        if !(eps > 0.0) || !value.is_finite() {
            return Err(bad("eps", format!("eps must be positive and value finite ({eps}, {value})")));
        }
        out.push(SweepRecord {
            experiment: rec[0].to_string(),
            eps,
            grid,
            quantity: Quantity::parse(rec[3].trim()).map_err(|e| bad("quantity", e.to_string()))?,
            value,
            runtime_s: num(5, "runtime_s")?,
            provenance: Provenance::parse(rec[6].trim()).map_err(|e| bad("provenance", e.to_string()))?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synth(q: Quantity, f: impl Fn(f64) -> f64) -> Vec<SweepRecord> {
        log_spaced(1e-1, 1e-4, 7)
            .into_iter()
            .map(|eps| SweepRecord {
                experiment: "synthetic".into(),
                eps,
                grid: 0,
                quantity: q,
                value: f(eps),
                runtime_s: 0.0,
                provenance: Provenance::AnalyticQuadrature,
            })
            .collect()
    }

    #[test]
    fn exact_power_laws() {
        let f = fit_slope(&synth(Quantity::PenaltyL2, |e| e.sqrt())).unwrap();
        assert!((f.slope - 0.5).abs() < 1e-12 && (f.r2 - 1.0).abs() < 1e-12);
        let f = fit_slope(&synth(Quantity::PenaltyL2, |e| 3.0 * e.powf(0.25))).unwrap();
        assert!((f.slope - 0.25).abs() < 1e-12 && (f.intercept - 3f64.ln()).abs() < 1e-12);
        let f = fit_slope(&synth(Quantity::PenaltyL2, |_| 2.0)).unwrap();
        assert!(f.slope.abs() < 1e-12);
    }

    #[test]
    fn fit_errors() {
        assert!(matches!(fit_slope(&synth(Quantity::PenaltyL2, |_| 0.0)), Err(SegError::CannotFit(_))));
        assert!(fit_slope(&synth(Quantity::PenaltyL2, |e| e)[..2]).is_err());
    }

    #[test]
    fn empty_report() {
        let r = gamma_report(&[]);
        assert!(r.checks.is_empty() && r.fits.is_empty());
        assert_eq!(r.render(), "no records\n");
    }

    #[test]
    fn sweep_preconditions() {
        let exp = Experiment::PenaltyDecay { preset: Preset::ThreeSector, n: 64, solver: SolverConfig::default() };
        assert!(matches!(run_sweep(&exp, &[1e-2, 1e-1, 1e-3]), Err(SegError::InvalidArgument(_))));
        match run_sweep(&exp, &[1e-2, 1e-3]) {
            Err(SegError::Resolution { eps, .. }) => assert_eq!(eps, 1e-2),
            other => panic!("expected resolution error, got {other:?}"),
        }
    }
}
