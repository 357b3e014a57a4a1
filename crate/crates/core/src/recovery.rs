//! Recovery sequence: local patches blended by a hierarchical partition of unity.

use crate::error::{Result, SegError};
use crate::field::{Grid, PhaseTriple, Rect, ScalarField};
use crate::geometry::{classify_values, detect_junctions, dist, interface_coords, InterfaceKind, InterfaceSpec, JunctionSpec, RegionLabel};
use crate::profiles::{
    angular_cutoff_with_derivative, onset_minus, onset_plus, radial_regularizer, ramp_rho, step_minus, step_plus,
    ProfileFamily,
};
use rayon::prelude::*;
use std::f64::consts::PI;

/// A triple that can be evaluated anywhere in the domain.
pub trait TripleSource: Sync {
    fn eval(&self, x: [f64; 2]) -> [f64; 3];

    /// Gradients of the three components; central differences by default.
    fn grad(&self, x: [f64; 2]) -> [[f64; 2]; 3] {
        let h = 1e-6;
        let xp = self.eval([x[0] + h, x[1]]);
        let xm = self.eval([x[0] - h, x[1]]);
        let yp = self.eval([x[0], x[1] + h]);
        let ym = self.eval([x[0], x[1] - h]);
        let mut g = [[0.0; 2]; 3];
        for c in 0..3 {
            g[c] = [(xp[c] - xm[c]) / (2.0 * h), (yp[c] - ym[c]) / (2.0 * h)];
        }
        g
    }
}

impl TripleSource for PhaseTriple {
    fn eval(&self, x: [f64; 2]) -> [f64; 3] {
        [self.u[0].interpolate(x), self.u[1].interpolate(x), self.u[2].interpolate(x)]
    }
}

/// How boundary-layer points are mapped onto ∂Ω.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryProjection {
    /// Closest boundary point.
    ClosestPoint,
    /// Exit point of the ray from `center` through x; keeps angular sectors
    /// around a junction intact when interfaces meet ∂Ω obliquely.
    Radial { center: [f64; 2] },
}

#[derive(Debug, Clone)]
pub struct RecoveryConfig {
    pub eps: f64,
    pub delta: f64,
    pub family: ProfileFamily,
    pub domain: Rect,
    pub interfaces: Vec<InterfaceSpec>,
    pub junctions: Vec<JunctionSpec>,
    pub projection: BoundaryProjection,
    /// Threshold below which a component counts as zero when labelling regions.
    pub zero_tol: f64,
}

impl RecoveryConfig {
    pub fn new(eps: f64, domain: Rect) -> Self {
        RecoveryConfig {
            eps,
            delta: 1.0,
            family: ProfileFamily::CompactRamp,
            domain,
            interfaces: Vec::new(),
            junctions: Vec::new(),
            projection: BoundaryProjection::ClosestPoint,
            zero_tol: 1e-12,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) {
            return Err(SegError::InvalidArgument(format!("eps must be positive, got {}", self.eps)));
        }
        if !(self.delta >= 1.0) {
            return Err(SegError::InvalidArgument(format!("delta must be >= 1, got {}", self.delta)));
        }
        let se = self.eps.sqrt();
        for j in &self.junctions {
            for w in j.alphas() {
                if w <= 4.0 * se {
                    return Err(SegError::DegenerateSector { width: w, limit: 4.0 * se });
                }
            }
            if self.domain.dist_to_boundary(j.center) <= 2.0 * se {
                return Err(SegError::InvalidGeometry(format!(
                    "junction ball of radius {} around {:?} leaves the domain",
                    2.0 * se,
                    j.center
                )));
            }
        }
        Ok(())
    }

    /// Radius factor κ such that interface tubes are disjoint outside B_{κ√ε}
    /// of every junction: κ = 1/sin(min(α, π)/2) over all sector angles.
    pub fn junction_exclusion(&self) -> f64 {
        let mut k = 1.0f64;
        for j in &self.junctions {
            for a in j.alphas() {
                k = k.max(1.0 / (0.5 * a.min(PI)).sin());
            }
        }
        k
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CutoffWeights {
    pub boundary: f64,
    /// Weight of the nearest junction (index in `junction_index`).
    pub junction: f64,
    pub junction_index: Option<usize>,
    pub interface: Vec<f64>,
    /// Bulk weight, carried entirely by `region`.
    pub bulk: f64,
    pub region: RegionLabel,
    pub d_bd: f64,
    pub d_junc: f64,
    pub d_gamma: Vec<f64>,
}

impl CutoffWeights {
    pub fn sum(&self) -> f64 {
        self.boundary + self.junction + self.interface.iter().sum::<f64>() + self.bulk
    }

    pub fn positive_count(&self) -> usize {
        [self.boundary, self.junction, self.bulk].iter().filter(|w| **w > 0.0).count()
            + self.interface.iter().filter(|w| **w > 0.0).count()
    }
}

#[inline]
fn rho2(num: f64, se: f64) -> f64 {
    ramp_rho(2.0 * num / se)
}

/// Hierarchical cutoffs: boundary, then junction, then interfaces; the bulk
/// region containing `x` takes the remainder.
pub fn partition_weights(x: [f64; 2], region: RegionLabel, cfg: &RecoveryConfig) -> Result<CutoffWeights> {
    let se = cfg.eps.sqrt();
    let d_bd = cfg.domain.dist_to_boundary(x);
    let (d_junc, junction_index) = cfg
        .junctions
        .iter()
        .enumerate()
        .map(|(k, j)| (dist(x, j.center), Some(k)))
        .fold((f64::INFINITY, None), |a, b| if b.0 < a.0 { b } else { a });
    let psi_bd = rho2(se - d_bd, se);
    let bd_gate = rho2(d_bd - se, se);
    let psi_junc = if junction_index.is_some() { (1.0 - psi_bd) * rho2(se - d_junc, se) * bd_gate } else { 0.0 };
    let kappa = cfg.junction_exclusion();
    let junc_gate = if d_junc.is_finite() { rho2(d_junc - kappa * se, se) } else { 1.0 };
    let d_gamma: Vec<f64> = cfg.interfaces.iter().map(|g| g.geom.distance(x)).collect();
    let interface: Vec<f64> = d_gamma
        .iter()
        .map(|&d| (1.0 - psi_bd) * (1.0 - psi_junc) * rho2(se - d, se) * junc_gate * bd_gate)
        .collect();
    if interface.iter().filter(|w| **w > 0.0).count() > 1 {
        return Err(SegError::InvalidGeometry(format!("interface neighbourhoods overlap at {x:?}")));
    }
    let special = psi_bd + psi_junc + interface.iter().sum::<f64>();
    let bulk = 1.0 - special;
    if bulk < -1e-14 {
        return Err(SegError::InvalidGeometry(format!("cutoffs exceed one at {x:?}")));
    }
    Ok(CutoffWeights {
        boundary: psi_bd,
        junction: psi_junc,
        junction_index,
        interface,
        bulk: bulk.max(0.0),
        region,
        d_bd,
        d_junc,
        d_gamma,
    })
}

/// Interface patch evaluated at `x` in tubular coordinates of `spec`.
pub fn build_interface_patch(spec: &InterfaceSpec, src: &dyn TripleSource, eps: f64, family: ProfileFamily, x: [f64; 2]) -> Result<[f64; 3]> {
    let (s, t) = interface_coords(&spec.geom, x)?;
    let se = eps.sqrt();
    let foot = spec.geom.point(t);
    let n = spec.geom.normal(t);
    let plus = src.eval([foot[0] + 2.0 * se * n[0], foot[1] + 2.0 * se * n[1]]);
    let minus = src.eval([foot[0] - 2.0 * se * n[0], foot[1] - 2.0 * se * n[1]]);
    let z = s / se;
    let mut out = [0.0; 3];
    let shared = |c: usize| minus[c] + (plus[c] - minus[c]) * step_plus(family, z);
    match spec.kind {
        InterfaceKind::I { plus: p, minus: m } => {
            out[p] = plus[p] * step_plus(family, z);
            out[m] = minus[m] * step_minus(family, z);
        }
        InterfaceKind::IIa { shared: a, onset } => {
            out[a] = shared(a);
            out[onset] = plus[onset] * onset_plus(family, z);
        }
        InterfaceKind::IIb { shared: a, onset } => {
            out[a] = shared(a);
            out[onset] = minus[onset] * onset_minus(family, z);
        }
        InterfaceKind::III { shared: a, minus: m, plus: p } => {
            out[a] = shared(a);
            out[m] = minus[m] * onset_minus(family, z);
            out[p] = plus[p] * onset_plus(family, z);
        }
    }
    Ok(out)
}

/// Junction construction χ_k(θ)·u_c(2√ε, θ)·(r/2√ε)^δ inside B_{2√ε}.
pub struct JunctionPatch<'a> {
    pub spec: JunctionSpec,
    pub eps: f64,
    pub delta: f64,
    pub family: ProfileFamily,
    pub src: &'a dyn TripleSource,
}

impl<'a> JunctionPatch<'a> {
    pub fn new(spec: JunctionSpec, eps: f64, delta: f64, family: ProfileFamily, src: &'a dyn TripleSource) -> Result<Self> {
        if !(delta >= 1.0) {
            return Err(SegError::InvalidArgument(format!("delta must be >= 1, got {delta}")));
        }
        let limit = 4.0 * eps.sqrt();
        for w in spec.alphas() {
            if w <= limit {
                return Err(SegError::DegenerateSector { width: w, limit });
            }
        }
        Ok(JunctionPatch { spec, eps, delta, family, src })
    }

    fn ring_point(&self, theta: f64) -> [f64; 2] {
        let r0 = 2.0 * self.eps.sqrt();
        [self.spec.center[0] + r0 * theta.cos(), self.spec.center[1] + r0 * theta.sin()]
    }

    pub fn eval(&self, x: [f64; 2]) -> Result<[f64; 3]> {
        let (r, theta) = self.spec.polar(x);
        if r >= 2.0 * self.eps.sqrt() {
            return Ok(self.src.eval(x));
        }
        let ring = self.src.eval(self.ring_point(theta));
        let rad = radial_regularizer(r, self.eps, self.delta)?;
        let mut out = [0.0; 3];
        for k in 0..3 {
            let c = self.spec.sector_component[k];
            let (chi, _) = angular_cutoff_with_derivative(k, theta, self.eps, &self.spec, self.family)?;
            if chi > 0.0 {
                out[c] += chi * ring[c] * rad;
            }
        }
        Ok(out)
    }

    /// Value and polar derivatives (∂_r, ∂_θ) of component `c` for r < 2√ε.
    pub fn polar_eval(&self, c: usize, r: f64, theta: f64) -> Result<(f64, f64, f64)> {
        let se = self.eps.sqrt();
        let q = r / (2.0 * se);
        let rad = q.powf(self.delta);
        let drad = if r > 0.0 { self.delta * rad / r } else if self.delta == 1.0 { 1.0 / (2.0 * se) } else { 0.0 };
        let p = self.ring_point(theta);
        let ring = self.src.eval(p)[c];
        let g = self.src.grad(p)[c];
        // d/dθ of the ring value: ∇u · (−sin θ, cos θ)·2√ε
        let dring = 2.0 * se * (-g[0] * theta.sin() + g[1] * theta.cos());
        let (mut v, mut vr, mut vt) = (0.0, 0.0, 0.0);
        for k in 0..3 {
            if self.spec.sector_component[k] != c {
                continue;
            }
            let (chi, dchi) = angular_cutoff_with_derivative(k, theta, self.eps, &self.spec, self.family)?;
            v += chi * ring * rad;
            vr += chi * ring * drad;
            vt += (dchi * ring + chi * dring) * rad;
        }
        Ok((v, vr, vt))
    }
}

pub fn build_junction_patch<'a>(
    j: &JunctionSpec,
    src: &'a dyn TripleSource,
    cfg: &RecoveryConfig,
) -> Result<JunctionPatch<'a>> {
    if cfg.domain.dist_to_boundary(j.center) <= 2.0 * cfg.eps.sqrt() {
        return Err(SegError::InvalidGeometry("junction ball leaves the domain".into()));
    }
    JunctionPatch::new(*j, cfg.eps, cfg.delta, cfg.family, src)
}

fn project(cfg: &RecoveryConfig, x: [f64; 2]) -> [f64; 2] {
    if cfg.domain.dist_to_boundary(x) <= 0.0 {
        return x;
    }
    match cfg.projection {
        BoundaryProjection::ClosestPoint => cfg.domain.project_to_boundary(x),
        BoundaryProjection::Radial { center } => {
            let th = (x[1] - center[1]).atan2(x[0] - center[0]);
            cfg.domain.ray_exit(center, th)
        }
    }
}

/// φ∘π + (u − φ∘π)·ρ(dist/√ε) at one point; φ is the trace of `src`.
pub fn boundary_layer_at(src: &dyn TripleSource, cfg: &RecoveryConfig, x: [f64; 2]) -> [f64; 3] {
    let se = cfg.eps.sqrt();
    let d = cfg.domain.dist_to_boundary(x);
    let phi = src.eval(project(cfg, x));
    let w = ramp_rho(d / se);
    if w == 0.0 {
        return phi;
    }
    let u = src.eval(x);
    [phi[0] + (u[0] - phi[0]) * w, phi[1] + (u[1] - phi[1]) * w, phi[2] + (u[2] - phi[2]) * w]
}

fn check_boundary_data(t: &PhaseTriple) -> Result<()> {
    let g = t.grid();
    for k in g.boundary_indices() {
        let v = t.node_values(k);
        if v[0] * v[1] * v[2] != 0.0 {
            let (i, j) = g.ij(k);
            return Err(SegError::InvalidBoundaryData(format!("product of traces nonzero at {:?}", g.node(i, j))));
        }
    }
    Ok(())
}

/// Boundary-layer triple on the grid of `t`.
pub fn build_boundary_layer(t: &PhaseTriple, cfg: &RecoveryConfig) -> Result<PhaseTriple> {
    check_boundary_data(t)?;
    let g = t.grid();
    let mut out = PhaseTriple::from_fn(g, |x| boundary_layer_at(t, cfg, x));
    for c in 0..3 {
        out.u[c].boundary_values = t.u[c].boundary_values.clone();
        out.u[c].pin_boundary();
    }
    Ok(out)
}

/// u^ε(x) = Σ_α ψ_α(x)·patch_α(x); only patches with positive weight are evaluated.
pub fn recovery_at(src: &dyn TripleSource, cfg: &RecoveryConfig, x: [f64; 2]) -> Result<[f64; 3]> {
    let u = src.eval(x);
    let region = classify_values(u, cfg.zero_tol);
    let w = partition_weights(x, region, cfg)?;
    let mut out = [0.0; 3];
    let mut add = |wt: f64, p: [f64; 3]| {
        for c in 0..3 {
            out[c] += wt * p[c];
        }
    };
    if w.bulk > 0.0 {
        add(w.bulk, u);
    }
    if w.boundary > 0.0 {
        add(w.boundary, boundary_layer_at(src, cfg, x));
    }
    if w.junction > 0.0 {
        let j = &cfg.junctions[w.junction_index.expect("junction weight without junction")];
        let patch = JunctionPatch::new(*j, cfg.eps, cfg.delta, cfg.family, src)?;
        add(w.junction, patch.eval(x)?);
    }
    for (k, &wi) in w.interface.iter().enumerate() {
        if wi > 0.0 {
            add(wi, build_interface_patch(&cfg.interfaces[k], src, cfg.eps, cfg.family, x)?);
        }
    }
    Ok(out)
}

/// Recovery triple on `grid` from any evaluable source.
pub fn assemble_recovery_from(src: &dyn TripleSource, grid: Grid, cfg: &RecoveryConfig) -> Result<PhaseTriple> {
    cfg.validate()?;
    let rows: Vec<Result<Vec<[f64; 3]>>> = (0..=grid.ny)
        .into_par_iter()
        .map(|j| (0..=grid.nx).map(|i| recovery_at(src, cfg, grid.node(i, j))).collect())
        .collect();
    let mut vals = [Vec::with_capacity(grid.n_nodes()), Vec::with_capacity(grid.n_nodes()), Vec::with_capacity(grid.n_nodes())];
    for row in rows {
        for v in row? {
            for c in 0..3 {
                vals[c].push(v[c]);
            }
        }
    }
    let bidx = grid.boundary_indices();
    let [a, b, c] = vals;
    let mk = |values: Vec<f64>| {
        let boundary_values = bidx.iter().map(|&k| values[k]).collect();
        ScalarField { grid, values, boundary_values }
    };
    Ok(PhaseTriple { u: [mk(a), mk(b), mk(c)] })
}

/// Recovery triple for a segregated grid triple; every junction present in
/// the input must be declared in `cfg`.
pub fn assemble_recovery(t: &PhaseTriple, cfg: &RecoveryConfig) -> Result<PhaseTriple> {
    let tol = crate::geometry::default_tol(t);
    let rm = crate::geometry::classify(t, tol)?;
    if rm.violations() > 0 {
        return Err(SegError::InvalidArgument(format!(
            "input violates the segregation constraint at {} nodes; no recovery sequence (penalty blow-up case)",
            rm.violations()
        )));
    }
    check_boundary_data(t)?;
    let g = t.grid();
    for found in detect_junctions(&rm)? {
        let declared = cfg.junctions.iter().any(|j| dist(j.center, found.center) <= 4.0 * g.h_max());
        if !declared {
            return Err(SegError::InvalidGeometry(format!("undeclared junction near {:?}", found.center)));
        }
    }
    let mut out = assemble_recovery_from(t, g, cfg)?;
    for c in 0..3 {
        out.u[c].boundary_values = t.u[c].boundary_values.clone();
        out.u[c].pin_boundary();
    }
    Ok(out)
}

/// Largest nodal |u₁u₂u₃|.
pub fn constraint_violation(t: &PhaseTriple) -> f64 {
    (0..t.grid().n_nodes())
        .map(|k| {
            let v = t.node_values(k);
            (v[0] * v[1] * v[2]).abs()
        })
        .fold(0.0, f64::max)
}
