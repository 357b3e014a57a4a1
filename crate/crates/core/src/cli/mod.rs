//! Commands behind the `seglab` binary: solve, recover, sweep, report.

pub mod config;
pub mod svg;

use crate::energy::energy_eps;
use crate::error::{Result, SegError};
use crate::field::{fmt17, l2_distance, l2_norm, make_grid, product_field, write_field_csv, PhaseTriple};
use crate::gamma::{fit_slope, gamma_report, read_records, run_sweep, write_records, Experiment, Quantity, SweepRecord};
use crate::geometry::{classify, default_tol};
use crate::presets::Preset;
use crate::profiles::ProfileFamily;
use crate::recovery::{assemble_recovery_from, constraint_violation};
use crate::solver::{solve_penalized, InitStrategy, SolveResult};
use config::{DataSource, ExperimentKind, RunConfig};
use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Recover,
    Sweep,
    Report,
}

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub eps: Option<Vec<f64>>,
    pub family: Option<ProfileFamily>,
    pub delta: Option<f64>,
}

/// Process exit code for an error: 2 for configuration/input problems, 3 for numerical failures.
pub fn exit_code(e: &SegError) -> i32 {
    match e {
        SegError::SolverFailure(_) | SegError::CannotFit(_) | SegError::DegenerateTube(_) | SegError::OutOfTube(_) => 3,
        _ => 2,
    }
}

pub fn load_config(path: &Path, ov: &Overrides) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| SegError::Config { line: 0, key: path.display().to_string(), msg: e.to_string() })?;
    let mut cfg = RunConfig::from_text(&text)?;
    if let Some(o) = &ov.out {
        cfg.out_dir = o.clone();
    }
    if let Some(e) = &ov.eps {
        if e.is_empty() || e.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(SegError::Config { line: 0, key: "--eps".into(), msg: "eps values must be positive and finite".into() });
        }
        cfg.eps = e.clone();
    }
    if let Some(f) = ov.family {
        cfg.family = f;
    }
    if let Some(d) = ov.delta {
        if !(d >= 1.0) {
            return Err(SegError::Config { line: 0, key: "--delta".into(), msg: "delta must be >= 1".into() });
        }
        cfg.delta = d;
        cfg.deltas = vec![d];
    }
    Ok(cfg)
}

/// Runs a command; returns a short human-readable summary.
pub fn run(cmd: Command, cfg: &RunConfig) -> Result<String> {
    match cmd {
        Command::Solve => cmd_solve(cfg),
        Command::Recover => cmd_recover(cfg),
        Command::Sweep => cmd_sweep(cfg),
        Command::Report => cmd_report(cfg),
    }
}

fn eps_dir(root: &Path, sub: &str, eps: f64) -> Result<PathBuf> {
    let d = root.join(sub).join(format!("eps_{eps:e}"));
    fs::create_dir_all(&d)?;
    Ok(d)
}

fn boundary_triple(cfg: &RunConfig) -> Result<PhaseTriple> {
    match &cfg.data {
        DataSource::Preset(p) => Ok(p.boundary_data(p.grid(cfg.n)?)),
        DataSource::Traces { extent, pieces } => {
            let g = make_grid(*extent, (cfg.n, cfg.n))?;
            let centre = [0.5 * (extent.x0 + extent.x1), 0.5 * (extent.y0 + extent.y1)];
            let mut t = PhaseTriple::from_fn(g, |x| {
                let mut v = [0.0; 3];
                for c in 0..3 {
                    v[c] = pieces[c].iter().map(|p| p.eval(x, centre)).sum();
                }
                v
            });
            for u in t.u.iter_mut() {
                for v in u.values.iter_mut() {
                    *v = 0.0;
                }
                u.pin_boundary();
            }
            Ok(t)
        }
    }
}

fn write_triple(t: &PhaseTriple, dir: &Path) -> Result<()> {
    for c in 0..3 {
        write_field_csv(&t.u[c], &dir.join(format!("u{}.csv", c + 1)))?;
        fs::write(dir.join(format!("u{}.svg", c + 1)), svg::heatmap(&t.u[c], &format!("u{}", c + 1)))?;
    }
    let rm = classify(t, default_tol(t))?;
    rm.write_csv(&dir.join("regions.csv"))?;
    fs::write(dir.join("regions.svg"), svg::region_map(&rm, "regions"))?;
    Ok(())
}

fn write_kv_csv(path: &Path, rows: &[(String, String)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["quantity", "value"])?;
    for (k, v) in rows {
        w.write_record([k, v])?;
    }
    w.flush()?;
    Ok(())
}

fn write_log(r: &SolveResult, dir: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(dir.join("log.csv"))?;
    w.write_record(["iteration", "energy", "residual"])?;
    for e in &r.log {
        w.write_record([e.iteration.to_string(), fmt17(e.energy), fmt17(e.residual)])?;
    }
    w.flush()?;
    let pts: Vec<(f64, f64)> = r.log.iter().filter(|e| e.residual > 0.0).map(|e| (e.iteration as f64, e.residual.ln())).collect();
    fs::write(dir.join("convergence.svg"), svg::xy_plot("EL residual", "sweep", "residual (log)", &pts, None, false))?;
    Ok(())
}

fn cmd_solve(cfg: &RunConfig) -> Result<String> {
    let phi = boundary_triple(cfg)?;
    let mut summary = String::new();
    for &eps in &cfg.eps {
        let r = solve_penalized(&phi, eps, &cfg.solver)?;
        let dir = eps_dir(&cfg.out_dir, "solve", eps)?;
        write_triple(&r.triple, &dir)?;
        write_log(&r, &dir)?;
        let b = &r.breakdown;
        let mut rows: Vec<(String, String)> = vec![
            ("dirichlet_1".into(), fmt17(b.dirichlet[0])),
            ("dirichlet_2".into(), fmt17(b.dirichlet[1])),
            ("dirichlet_3".into(), fmt17(b.dirichlet[2])),
            ("penalty".into(), fmt17(b.penalty)),
            ("total".into(), fmt17(b.total_eps)),
            ("total_constrained".into(), b.total_constrained.map(fmt17).unwrap_or_else(|| "inf".into())),
            ("penalty_l2".into(), fmt17(l2_norm(&product_field(&r.triple)?))),
            ("residual".into(), fmt17(r.residual)),
            ("iterations".into(), r.iterations.to_string()),
            ("converged".into(), r.converged.to_string()),
            ("init_clamped".into(), r.init_clamped.to_string()),
        ];
        for (l, e) in &b.per_region {
            rows.push((format!("region:{}", l.name()), fmt17(*e)));
        }
        if cfg.both_inits {
            let mut other = cfg.solver;
            other.init = match cfg.solver.init {
                InitStrategy::HarmonicExtension => InitStrategy::Zero,
                InitStrategy::Zero => InitStrategy::HarmonicExtension,
            };
            let r2 = solve_penalized(&phi, eps, &other)?;
            let differ = (r2.breakdown.total_eps - b.total_eps).abs() > 1e-6;
            rows.push(("alt_init_total".into(), fmt17(r2.breakdown.total_eps)));
            rows.push(("basins_differ".into(), differ.to_string()));
            if differ {
                let alt = dir.join("alt_init");
                fs::create_dir_all(&alt)?;
                write_triple(&r2.triple, &alt)?;
                write_log(&r2, &alt)?;
            }
        }
        write_kv_csv(&dir.join("breakdown.csv"), &rows)?;
        summary.push_str(&format!(
            "eps={eps:e} total={} penalty={} iterations={} converged={}\n",
            fmt17(b.total_eps),
            fmt17(b.penalty),
            r.iterations,
            r.converged
        ));
        if !r.converged {
            return Err(SegError::SolverFailure(format!(
                "eps={eps:e}: residual {:e} above tolerance after {} sweeps (outputs written to {})",
                r.residual,
                r.iterations,
                dir.display()
            )));
        }
    }
    Ok(summary)
}

fn need_preset(cfg: &RunConfig, what: &str) -> Result<Preset> {
    match cfg.data {
        DataSource::Preset(p) => Ok(p),
        DataSource::Traces { .. } => Err(SegError::Config { line: 0, key: "data.preset".into(), msg: format!("{what} needs a named preset") }),
    }
}

/// FNV-1a over the textual form of the declared geometry.
pub fn geometry_hash(p: Preset) -> String {
    let text = format!("{:?}|{:?}|{:?}|{:?}", p.domain(), p.interfaces(), p.junctions(), p.projection());
    let mut h: u64 = 0xcbf29ce484222325;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

fn cmd_recover(cfg: &RunConfig) -> Result<String> {
    let p = need_preset(cfg, "recover")?;
    let g = p.grid(cfg.n)?;
    let cand = p.candidate(g);
    let mut summary = String::new();
    for &eps in &cfg.eps {
        let rc = p.recovery_config(eps, cfg.delta, cfg.family);
        let rec = assemble_recovery_from(&p, g, &rc)?;
        let dir = eps_dir(&cfg.out_dir, "recover", eps)?;
        write_triple(&rec, &dir)?;
        let viol = constraint_violation(&rec);
        let mut err2 = 0.0;
        for c in 0..3 {
            let d = l2_distance(&rec.u[c], &cand.u[c])?;
            err2 += d * d;
        }
        let e = energy_eps(&rec, eps)?;
        let mut f = fs::File::create(dir.join("manifest.txt"))?;
        writeln!(f, "preset: {}", p.name())?;
        writeln!(f, "eps: {}", fmt17(eps))?;
        writeln!(f, "delta: {}", fmt17(cfg.delta))?;
        writeln!(f, "family: {}", cfg.family.name())?;
        writeln!(f, "grid: {0}x{0}", cfg.n)?;
        writeln!(f, "geometry_hash: {}", geometry_hash(p))?;
        writeln!(f, "constraint_violation: {}", fmt17(viol))?;
        writeln!(f, "l2_recovery_error: {}", fmt17(err2.sqrt()))?;
        writeln!(f, "energy_eps: {}", fmt17(e.total_eps))?;
        summary.push_str(&format!("eps={eps:e} constraint_violation={} l2_error={}\n", fmt17(viol), fmt17(err2.sqrt())));
    }
    Ok(summary)
}

/// Experiments described by a config.
pub fn experiments(cfg: &RunConfig) -> Result<Vec<Experiment>> {
    let p = need_preset(cfg, "sweep")?;
    Ok(match cfg.experiment {
        ExperimentKind::PenaltyDecay => vec![Experiment::PenaltyDecay { preset: p, n: cfg.n, solver: cfg.solver }],
        ExperimentKind::JunctionScaling => cfg
            .deltas
            .iter()
            .map(|&d| Experiment::JunctionScaling { preset: p, delta: d, family: cfg.family, band_factor: cfg.band_factor })
            .collect(),
        ExperimentKind::Recovery => cfg
            .deltas
            .iter()
            .map(|&d| Experiment::Recovery { preset: p, n: cfg.n, delta: d, family: cfg.family })
            .collect(),
    })
}

fn cmd_sweep(cfg: &RunConfig) -> Result<String> {
    let mut all: Vec<SweepRecord> = Vec::new();
    for e in experiments(cfg)? {
        all.extend(run_sweep(&e, &cfg.eps)?);
    }
    crate::gamma::sort_records(&mut all);
    fs::create_dir_all(&cfg.out_dir)?;
    let path = cfg.out_dir.join("records.csv");
    write_records(&all, &path, cfg.timings)?;
    Ok(format!("{} records written to {}\n", all.len(), path.display()))
}

fn sanitize(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' }).collect()
}

fn cmd_report(cfg: &RunConfig) -> Result<String> {
    let path = cfg.records.clone().unwrap_or_else(|| cfg.out_dir.join("records.csv"));
    let records = read_records(&path)?;
    let rep = gamma_report(&records);
    fs::create_dir_all(&cfg.out_dir)?;
    let text = rep.render();
    fs::write(cfg.out_dir.join("report.txt"), &text)?;
    let plots = cfg.out_dir.join("plots");
    fs::create_dir_all(&plots)?;
    let mut groups: BTreeMap<(String, Quantity), Vec<SweepRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.experiment.clone(), r.quantity)).or_default().push(r);
    }
    for ((exp, q), mut recs) in groups {
        recs.sort_by(|a, b| a.eps.partial_cmp(&b.eps).unwrap_or(std::cmp::Ordering::Equal));
        let pts: Vec<(f64, f64)> = recs.iter().filter(|r| r.value > 0.0).map(|r| (r.eps.ln(), r.value.ln())).collect();
        let line = fit_slope(&recs).ok().map(|f| (f.intercept, f.slope));
        let title = match line {
            Some((_, s)) => format!("{exp} {} slope={s:.4}", q.name()),
            None => format!("{exp} {}", q.name()),
        };
        let name = format!("{}__{}.svg", sanitize(&exp), q.name());
        fs::write(plots.join(name), svg::xy_plot(&title, "eps", q.name(), &pts, line, true))?;
    }
    Ok(text)
}
