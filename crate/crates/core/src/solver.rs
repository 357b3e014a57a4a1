//! Minimization of the penalized energy over non-negative fields with
//! Dirichlet data, via the discrete Euler–Lagrange system
//! Δ_h u_i = (1/ε) u_i ∏_{j≠i} u_j².

use crate::energy::{energy_eps, EnergyBreakdown};
use crate::error::{Result, SegError};
use crate::field::{Grid, PhaseTriple};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    NonlinearGaussSeidel,
    ProjectedGradient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ordering {
    /// Lexicographic nodes, components 1, 2, 3.
    Lexicographic,
    /// Red nodes then black nodes per component; rows of one colour are
    /// updated in parallel. Changes the iterate path, not the fixed point.
    RedBlack,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitStrategy {
    HarmonicExtension,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub method: Method,
    pub ordering: Ordering,
    /// Relaxation factor for the nodal update; 1 is plain Gauss–Seidel,
    /// `None` picks 2/(1 + sin(π h / L)).
    pub omega: Option<f64>,
    /// Residual tolerance relative to the boundary-data scale.
    pub tol_residual: f64,
    pub max_iter: usize,
    pub init: InitStrategy,
    /// Residual/energy evaluation period (sweeps).
    pub check_every: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            method: Method::NonlinearGaussSeidel,
            ordering: Ordering::Lexicographic,
            omega: Some(1.0),
            tol_residual: 1e-8,
            max_iter: 100_000,
            init: InitStrategy::HarmonicExtension,
            check_every: 10,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_residual > 0.0) {
            return Err(SegError::InvalidArgument("tol_residual must be positive".into()));
        }
        if self.max_iter < 1 || self.check_every < 1 {
            return Err(SegError::InvalidArgument("max_iter and check_every must be >= 1".into()));
        }
        if let Some(w) = self.omega {
            if !(w > 0.0 && w < 2.0) {
                return Err(SegError::InvalidArgument(format!("omega must lie in (0, 2), got {w}")));
            }
        }
        Ok(())
    }
}

/// 2/(1 + sin(π h / L)) for the longer grid side.
pub fn optimal_omega(g: &Grid) -> f64 {
    let n = g.nx.max(g.ny) as f64;
    2.0 / (1.0 + (std::f64::consts::PI / n).sin())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogEntry {
    pub iteration: usize,
    pub energy: f64,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub triple: PhaseTriple,
    pub breakdown: EnergyBreakdown,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    pub log: Vec<LogEntry>,
    /// Nodes clamped to zero by the initial guess.
    pub init_clamped: usize,
}

#[inline]
fn others_sq(a: &[f64], b: &[f64], k: usize) -> f64 {
    let p = a[k] * b[k];
    p * p
}

/// max over interior nodes/components of the Euler–Lagrange defect.
///
/// Where u_i > 0 the defect is |Δ_h u_i − (1/ε) u_i ∏_{j≠i} u_j²|; where
/// u_i = 0 it is the complementarity violation max(0, Δ_h u_i), i.e. the
/// energy would still decrease by raising u_i.
pub fn el_residual(t: &PhaseTriple, eps: f64) -> f64 {
    let g = t.grid();
    let (ax, ay) = (1.0 / (g.hx * g.hx), 1.0 / (g.hy * g.hy));
    let w = g.nx + 1;
    let mut worst = 0.0f64;
    for c in 0..3 {
        let u = &t.u[c].values;
        let a = &t.u[(c + 1) % 3].values;
        let b = &t.u[(c + 2) % 3].values;
        for j in 1..g.ny {
            for i in 1..g.nx {
                let k = j * w + i;
                let lap = ax * (u[k - 1] - 2.0 * u[k] + u[k + 1]) + ay * (u[k - w] - 2.0 * u[k] + u[k + w]);
                let l = lap - u[k] * others_sq(a, b, k) / eps;
                let d = if u[k] > 0.0 { l.abs() } else { l.max(0.0) };
                if d > worst {
                    worst = d;
                }
            }
        }
    }
    worst
}

fn data_scale(phi: &PhaseTriple) -> f64 {
    phi.u.iter().flat_map(|u| u.boundary_values.iter()).fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE)
}

fn check_data(phi: &PhaseTriple) -> Result<()> {
    let g = phi.grid();
    let b = &phi.u;
    for m in 0..b[0].boundary_values.len() {
        let v = [b[0].boundary_values[m], b[1].boundary_values[m], b[2].boundary_values[m]];
        if v.iter().any(|x| *x < 0.0 || !x.is_finite()) {
            return Err(SegError::InvalidBoundaryData(format!("negative or non-finite trace {v:?}")));
        }
        if v[0] * v[1] * v[2] != 0.0 {
            let k = g.boundary_indices()[m];
            let (i, j) = g.ij(k);
            return Err(SegError::InvalidBoundaryData(format!("traces not segregated at {:?}", g.node(i, j))));
        }
    }
    Ok(())
}

// One relaxation sweep of component `c`; `q` is the reaction coefficient per node.
fn sweep_lex(u: &mut [f64], q: impl Fn(usize) -> f64, g: &Grid, omega: f64) {
    let (ax, ay) = (1.0 / (g.hx * g.hx), 1.0 / (g.hy * g.hy));
    let diag = 2.0 * (ax + ay);
    let w = g.nx + 1;
    for j in 1..g.ny {
        for i in 1..g.nx {
            let k = j * w + i;
            let nb = ax * (u[k - 1] + u[k + 1]) + ay * (u[k - w] + u[k + w]);
            let new = nb / (diag + q(k));
            let v = u[k] + omega * (new - u[k]);
            u[k] = if v > 0.0 { v } else { 0.0 };
        }
    }
}

fn sweep_red_black(u: &mut [f64], qv: &[f64], g: &Grid, omega: f64) {
    let (ax, ay) = (1.0 / (g.hx * g.hx), 1.0 / (g.hy * g.hy));
    let diag = 2.0 * (ax + ay);
    let w = g.nx + 1;
    for color in 0..2 {
        let snap = u.to_vec();
        u.par_chunks_mut(w).enumerate().for_each(|(j, row)| {
            if j == 0 || j == g.ny {
                return;
            }
            let start = 1 + (j + 1 + color) % 2;
            let mut i = start;
            while i < g.nx {
                let k = j * w + i;
                let nb = ax * (snap[k - 1] + snap[k + 1]) + ay * (snap[k - w] + snap[k + w]);
                let new = nb / (diag + qv[k]);
                let v = row[i] + omega * (new - row[i]);
                row[i] = if v > 0.0 { v } else { 0.0 };
                i += 2;
            }
        });
    }
}

/// Initial iterate with the traces of `phi`.
///
/// `HarmonicExtension` solves three decoupled Laplace problems (SOR to a
/// residual of 1e-12 relative to the data scale) and clamps negatives at 0;
/// the number of clamped nodes is returned.
pub fn init_guess(phi: &PhaseTriple, strategy: InitStrategy) -> (PhaseTriple, usize) {
    let mut t = phi.clone();
    for u in t.u.iter_mut() {
        for v in u.values.iter_mut() {
            *v = 0.0;
        }
        u.pin_boundary();
    }
    if strategy == InitStrategy::Zero {
        return (t, 0);
    }
    let g = t.grid();
    let omega = optimal_omega(&g);
    let scale = data_scale(phi);
    let (ax, ay) = (1.0 / (g.hx * g.hx), 1.0 / (g.hy * g.hy));
    let w = g.nx + 1;
    let mut clamped = 0;
    for u in t.u.iter_mut() {
        let vals = &mut u.values;
        for it in 0..200_000 {
            // unclamped SOR for the linear problem
            for j in 1..g.ny {
                for i in 1..g.nx {
                    let k = j * w + i;
                    let nb = ax * (vals[k - 1] + vals[k + 1]) + ay * (vals[k - w] + vals[k + w]);
                    vals[k] += omega * (nb / (2.0 * (ax + ay)) - vals[k]);
                }
            }
            if it % 10 == 9 {
                let mut r = 0.0f64;
                for j in 1..g.ny {
                    for i in 1..g.nx {
                        let k = j * w + i;
                        let lap = ax * (vals[k - 1] - 2.0 * vals[k] + vals[k + 1]) + ay * (vals[k - w] - 2.0 * vals[k] + vals[k + w]);
                        r = r.max(lap.abs());
                    }
                }
                if r <= 1e-12 * scale * (ax + ay) {
                    break;
                }
            }
        }
        for v in vals.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
                clamped += 1;
            }
        }
    }
    (t, clamped)
}

/// Stationary point of E^ε with the traces of `phi` (interior values of
/// `phi` are ignored; the start is `init_guess(phi, cfg.init)`).
pub fn solve_penalized(phi: &PhaseTriple, eps: f64, cfg: &SolverConfig) -> Result<SolveResult> {
    let (t0, clamped) = init_guess(phi, cfg.init);
    solve_from(phi, t0, clamped, eps, cfg)
}

/// Same as [`solve_penalized`] from a caller-supplied start (traces are re-imposed).
pub fn solve_from(phi: &PhaseTriple, mut t: PhaseTriple, init_clamped: usize, eps: f64, cfg: &SolverConfig) -> Result<SolveResult> {
    if !(eps > 0.0) {
        return Err(SegError::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    cfg.validate()?;
    check_data(phi)?;
    if t.grid() != phi.grid() {
        return Err(SegError::InvalidArgument("start and data live on different grids".into()));
    }
    for c in 0..3 {
        t.u[c].boundary_values = phi.u[c].boundary_values.clone();
        t.u[c].pin_boundary();
        for v in t.u[c].values.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
    }
    let g = t.grid();
    let tol = cfg.tol_residual * data_scale(phi);
    let mut log = Vec::new();
    let mut residual = el_residual(&t, eps);
    log.push(LogEntry { iteration: 0, energy: energy_eps(&t, eps)?.total_eps, residual });
    let mut iterations = 0;
    let mut converged = residual <= tol;
    match cfg.method {
        Method::NonlinearGaussSeidel => {
            let omega = cfg.omega.unwrap_or_else(|| optimal_omega(&g));
            let inv = 1.0 / eps;
            while !converged && iterations < cfg.max_iter {
                iterations += 1;
                for c in 0..3 {
                    let [u0, u1, u2] = &mut t.u;
                    let (cur, a, b) = match c {
                        0 => (&mut u0.values, &u1.values, &u2.values),
                        1 => (&mut u1.values, &u2.values, &u0.values),
                        _ => (&mut u2.values, &u0.values, &u1.values),
                    };
                    match cfg.ordering {
                        Ordering::Lexicographic => sweep_lex(cur, |k| inv * others_sq(a, b, k), &g, omega),
                        Ordering::RedBlack => {
                            let qv: Vec<f64> = (0..g.n_nodes()).map(|k| inv * others_sq(a, b, k)).collect();
                            sweep_red_black(cur, &qv, &g, omega)
                        }
                    }
                }
                if iterations % cfg.check_every == 0 || iterations == cfg.max_iter {
                    residual = el_residual(&t, eps);
                    let e = energy_eps(&t, eps)?.total_eps;
                    if !e.is_finite() {
                        return Err(SegError::SolverFailure(format!("non-finite energy at sweep {iterations}")));
                    }
                    log.push(LogEntry { iteration: iterations, energy: e, residual });
                    converged = residual <= tol;
                }
            }
        }
        Method::ProjectedGradient => {
            let mut e = energy_eps(&t, eps)?.total_eps;
            let area = g.hx * g.hy;
            let mut tau = 0.25 / (1.0 / (g.hx * g.hx) + 1.0 / (g.hy * g.hy));
            while !converged && iterations < cfg.max_iter {
                iterations += 1;
                let grad = crate::energy::energy_eps_gradient(&t, eps);
                let mut accepted = false;
                for _ in 0..60 {
                    let mut trial = t.clone();
                    let mut decrease = 0.0;
                    for c in 0..3 {
                        for k in 0..g.n_nodes() {
                            let (i, j) = g.ij(k);
                            if g.is_boundary(i, j) {
                                continue;
                            }
                            let old = t.u[c].values[k];
                            let new = (old - tau * grad[c][k] / area).max(0.0);
                            trial.u[c].values[k] = new;
                            decrease += grad[c][k] * (old - new);
                        }
                    }
                    let et = energy_eps(&trial, eps)?.total_eps;
                    if et <= e - 1e-4 * decrease {
                        t = trial;
                        e = et;
                        accepted = true;
                        tau *= 1.5;
                        break;
                    }
                    tau *= 0.5;
                }
                residual = el_residual(&t, eps);
                log.push(LogEntry { iteration: iterations, energy: e, residual });
                converged = residual <= tol;
                if !accepted && !converged {
                    return Err(SegError::SolverFailure(format!(
                        "no descent after backtracking at iteration {iterations} (energy {e}, residual {residual})"
                    )));
                }
            }
        }
    }
    let breakdown = energy_eps(&t, eps)?;
    Ok(SolveResult { triple: t, breakdown, iterations, residual, converged, log, init_clamped })
}
