//! Dirichlet, penalized and constrained energies, plus the junction-ball split.

use crate::error::{Result, SegError};
use crate::field::{cell_energies, dirichlet_energy, l2_norm, pairwise_sum, product_field, PhaseTriple};
use crate::geometry::{classify_values, default_tol, JunctionSpec, RegionLabel};
use crate::quadrature;
use crate::recovery::JunctionPatch;
use std::collections::BTreeMap;
use std::f64::consts::TAU;

/// Relative feasibility threshold for the constrained energy: ‖∏u‖ ≤ 1e-10·scale³.
pub const FEASIBILITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyBreakdown {
    pub dirichlet: [f64; 3],
    pub penalty: f64,
    pub total_eps: f64,
    /// `None` marks an infeasible triple (E⁰ = +∞).
    pub total_constrained: Option<f64>,
    pub per_region: BTreeMap<RegionLabel, f64>,
}

impl EnergyBreakdown {
    pub fn dirichlet_total(&self) -> f64 {
        self.dirichlet.iter().sum()
    }
}

/// (1/ε)·‖u₁u₂u₃‖².
pub fn penalty(t: &PhaseTriple, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(SegError::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    let n = l2_norm(&product_field(t)?);
    Ok(n * n / eps)
}

/// E⁰: the Dirichlet energy if the triple is feasible, `None` otherwise.
///
/// Feasible means ‖∏u‖ ≤ tol·scale³, no value below −tol·scale, and every
/// boundary node equal to its trace.
pub fn energy_constrained(t: &PhaseTriple, tol: f64) -> Result<Option<f64>> {
    if !(tol > 0.0) {
        return Err(SegError::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    let scale = t.u.iter().map(|u| u.max_abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let prod = l2_norm(&product_field(t)?);
    if prod > tol * scale.powi(3) {
        return Ok(None);
    }
    for u in &t.u {
        if u.values.iter().any(|&v| v < -tol * scale) {
            return Ok(None);
        }
        for (b, &k) in u.grid.boundary_indices().iter().enumerate() {
            if u.values[k] != u.boundary_values[b] {
                return Ok(None);
            }
        }
    }
    Ok(Some(t.u.iter().map(dirichlet_energy).sum()))
}

/// Full breakdown of E^ε. Per-region Dirichlet parts use the label of each
/// cell's corner average.
pub fn energy_eps(t: &PhaseTriple, eps: f64) -> Result<EnergyBreakdown> {
    let p = penalty(t, eps)?;
    let g = t.grid();
    let cells: Vec<Vec<f64>> = t.u.iter().map(cell_energies).collect();
    let dirichlet = [pairwise_sum(&cells[0]), pairwise_sum(&cells[1]), pairwise_sum(&cells[2])];
    let tol = default_tol(t);
    let mut buckets: BTreeMap<RegionLabel, Vec<f64>> = BTreeMap::new();
    for j in 0..g.ny {
        for i in 0..g.nx {
            let mut avg = [0.0; 3];
            for c in 0..3 {
                avg[c] = 0.25 * (t.u[c].at(i, j) + t.u[c].at(i + 1, j) + t.u[c].at(i, j + 1) + t.u[c].at(i + 1, j + 1));
            }
            let k = j * g.nx + i;
            buckets
                .entry(classify_values(avg, tol))
                .or_default()
                .push(cells[0][k] + cells[1][k] + cells[2][k]);
        }
    }
    let per_region = buckets.into_iter().map(|(l, v)| (l, pairwise_sum(&v))).collect();
    let total_constrained = energy_constrained(t, FEASIBILITY_TOL)?;
    Ok(EnergyBreakdown {
        dirichlet,
        penalty: p,
        total_eps: dirichlet.iter().sum::<f64>() + p,
        total_constrained,
        per_region,
    })
}

/// Gradient of the discrete E^ε with respect to every nodal value.
pub fn energy_eps_gradient(t: &PhaseTriple, eps: f64) -> [Vec<f64>; 3] {
    let g = t.grid();
    let (ax, ay) = (1.0 / (g.hx * g.hx), 1.0 / (g.hy * g.hy));
    let w = 0.5 * g.hx * g.hy;
    let mut out = [vec![0.0; g.n_nodes()], vec![0.0; g.n_nodes()], vec![0.0; g.n_nodes()]];
    for c in 0..3 {
        let u = &t.u[c];
        let o = &mut out[c];
        for j in 0..g.ny {
            for i in 0..g.nx {
                let (ka, kb, kc, kd) = (g.idx(i, j), g.idx(i + 1, j), g.idx(i, j + 1), g.idx(i + 1, j + 1));
                let (a, b, cc, d) = (u.values[ka], u.values[kb], u.values[kc], u.values[kd]);
                // x-edges (a,b) and (c,d); y-edges (a,c) and (b,d)
                let fx1 = 2.0 * w * ax * (b - a);
                let fx2 = 2.0 * w * ax * (d - cc);
                let fy1 = 2.0 * w * ay * (cc - a);
                let fy2 = 2.0 * w * ay * (d - b);
                o[ka] += -fx1 - fy1;
                o[kb] += fx1 - fy2;
                o[kc] += -fx2 + fy1;
                o[kd] += fx2 + fy2;
            }
        }
    }
    for k in 0..g.n_nodes() {
        let (i, j) = g.ij(k);
        let wk = g.weight(i, j);
        let v = t.node_values(k);
        let p = v[0] * v[1] * v[2];
        for c in 0..3 {
            let others = p_without(v, c);
            out[c][k] += 2.0 / eps * wk * p * others;
        }
    }
    out
}

#[inline]
fn p_without(v: [f64; 3], c: usize) -> f64 {
    match c {
        0 => v[1] * v[2],
        1 => v[0] * v[2],
        _ => v[0] * v[1],
    }
}

/// Angular distance from `theta` to the nearest sector boundary of `j`.
pub fn boundary_angle_distance(j: &JunctionSpec, theta: f64) -> f64 {
    j.starts()
        .iter()
        .map(|&b| {
            let d = (theta - b).rem_euclid(TAU);
            d.min(TAU - d)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Radial Gauss–Legendre nodes on [0, √ε].
pub const RADIAL_NODES: usize = 64;
/// Minimum total number of angular nodes.
pub const ANGULAR_NODES: usize = 256;

/// (E_A, E_B) of the analytic junction patch over B_{√ε}.
///
/// E_B collects angles within `band_factor·√ε` of a sector boundary. The
/// angular direction uses composite Gauss–Legendre panels whose breakpoints
/// include every sector boundary, cutoff-transition edge and band edge.
pub fn junction_ball_split(patch: &JunctionPatch, band_factor: f64) -> Result<(f64, f64)> {
    let eps = patch.eps;
    let se = eps.sqrt();
    let j = &patch.spec;
    let band = band_factor * se;
    let mut breaks: Vec<f64> = vec![j.theta0, j.theta0 + TAU];
    for b in j.starts() {
        for off in [-2.0 * se, -se, -band, 0.0, band, se, 2.0 * se] {
            let t = j.theta0 + (b + off - j.theta0).rem_euclid(TAU);
            breaks.push(t);
        }
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    // subdivide panels so that none exceeds se/2 near boundaries and the
    // total node count reaches ANGULAR_NODES
    let per_panel = 16usize;
    let min_panels = ANGULAR_NODES.div_ceil(per_panel);
    let coarse = TAU / min_panels as f64;
    let mut panels: Vec<(f64, f64)> = Vec::new();
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b - a <= 0.0 {
            continue;
        }
        let mid = 0.5 * (a + b);
        let near = boundary_angle_distance(j, mid) < 2.5 * se.max(band);
        let cap = if near { (0.5 * se).min(coarse) } else { coarse };
        let m = ((b - a) / cap).ceil().max(1.0) as usize;
        for q in 0..m {
            panels.push((a + (b - a) * q as f64 / m as f64, a + (b - a) * (q + 1) as f64 / m as f64));
        }
    }
    let (rx, rw) = quadrature::rule(RADIAL_NODES);
    let (tx, tw) = quadrature::rule(per_panel);
    let (mut ea, mut eb) = (Vec::new(), Vec::new());
    for &(a, b) in &panels {
        let in_band = boundary_angle_distance(j, 0.5 * (a + b)) < band;
        let (tc, th) = (0.5 * (a + b), 0.5 * (b - a));
        let mut acc = 0.0;
        for q in 0..tx.len() {
            let theta = tc + th * tx[q];
            let mut inner = 0.0;
            for m in 0..rx.len() {
                let r = 0.5 * se * (1.0 + rx[m]);
                let mut dens = 0.0;
                for c in 0..3 {
                    let (_, vr, vt) = patch.polar_eval(c, r, theta)?;
                    dens += vr * vr + vt * vt / (r * r);
                }
                inner += rw[m] * dens * r;
            }
            acc += tw[q] * inner * 0.5 * se;
        }
        let e = acc * th;
        if in_band {
            eb.push(e);
        } else {
            ea.push(e);
        }
    }
    Ok((pairwise_sum(&ea), pairwise_sum(&eb)))
}

/// Grid version of the split: cells whose centre lies in B_{√ε}(p_j).
pub fn junction_ball_split_grid(t: &PhaseTriple, j: &JunctionSpec, eps: f64, band_factor: f64) -> Result<(f64, f64)> {
    let g = t.grid();
    let se = eps.sqrt();
    if g.extent.dist_to_boundary(j.center) <= se {
        return Err(SegError::InvalidGeometry("junction ball leaves the domain".into()));
    }
    let cells: Vec<Vec<f64>> = t.u.iter().map(cell_energies).collect();
    let (mut ea, mut eb) = (Vec::new(), Vec::new());
    for jj in 0..g.ny {
        for i in 0..g.nx {
            let p = g.node(i, jj);
            let c = [p[0] + 0.5 * g.hx, p[1] + 0.5 * g.hy];
            let (r, th) = j.polar(c);
            if r >= se {
                continue;
            }
            let k = jj * g.nx + i;
            let e = cells[0][k] + cells[1][k] + cells[2][k];
            if boundary_angle_distance(j, th) < band_factor * se {
                eb.push(e);
            } else {
                ea.push(e);
            }
        }
    }
    Ok((pairwise_sum(&ea), pairwise_sum(&eb)))
}
