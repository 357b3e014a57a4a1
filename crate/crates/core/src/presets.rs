//! Shipped boundary-data presets and synthetic geometry fixtures.
//!
//! Every preset is an analytic feasible triple with exact gradients. Its
//! trace is the boundary data for solves, and the triple itself is the
//! input of the recovery construction.

use crate::error::{Result, SegError};
use crate::field::{make_grid, Grid, PhaseTriple, Rect};
use crate::geometry::{InterfaceGeometry, InterfaceKind, InterfaceSpec, JunctionSpec, RegionLabel};
use crate::profiles::ProfileFamily;
use crate::recovery::{BoundaryProjection, RecoveryConfig, TripleSource};
use std::f64::consts::{FRAC_PI_2, PI, TAU};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Preset {
    OnePhaseHarmonic,
    TwoPhaseLinear,
    ThreeSector,
    JunctionSymmetric,
    JunctionAsymmetric,
    CircleInterface,
    LineTypeI,
    LineTypeIIa,
    LineTypeIII,
}

const SQUARE: Rect = Rect { x0: -1.0, x1: 1.0, y0: -1.0, y1: 1.0 };
const CIRCLE_R: f64 = 0.5;

impl Preset {
    pub const ALL: [Preset; 9] = [
        Preset::OnePhaseHarmonic,
        Preset::TwoPhaseLinear,
        Preset::ThreeSector,
        Preset::JunctionSymmetric,
        Preset::JunctionAsymmetric,
        Preset::CircleInterface,
        Preset::LineTypeI,
        Preset::LineTypeIIa,
        Preset::LineTypeIII,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::OnePhaseHarmonic => "one_phase_harmonic",
            Preset::TwoPhaseLinear => "two_phase_linear",
            Preset::ThreeSector => "three_sector",
            Preset::JunctionSymmetric => "junction_symmetric",
            Preset::JunctionAsymmetric => "junction_asymmetric",
            Preset::CircleInterface => "circle_interface",
            Preset::LineTypeI => "line_type_i",
            Preset::LineTypeIIa => "line_type_iia",
            Preset::LineTypeIII => "line_type_iii",
        }
    }

    pub fn parse(s: &str) -> Result<Preset> {
        Preset::ALL
            .iter()
            .copied()
            .find(|p| p.name() == s)
            .ok_or_else(|| SegError::InvalidArgument(format!("unknown preset '{s}'")))
    }

    pub fn domain(&self) -> Rect {
        match self {
            Preset::OnePhaseHarmonic | Preset::TwoPhaseLinear | Preset::LineTypeI | Preset::LineTypeIIa | Preset::LineTypeIII => Rect::UNIT,
            _ => SQUARE,
        }
    }

    pub fn grid(&self, n: usize) -> Result<Grid> {
        make_grid(self.domain(), (n, n))
    }

    fn sectors(&self) -> Option<SectorField> {
        match self {
            Preset::ThreeSector => Some(SectorField::new(JunctionSpec::symmetric([0.0, 0.0], 0.0), Radial::MaxNorm)),
            Preset::JunctionSymmetric => Some(SectorField::new(JunctionSpec::symmetric([0.0, 0.0], 0.0), Radial::Power)),
            Preset::JunctionAsymmetric => Some(SectorField::new(
                JunctionSpec { center: [0.0, 0.0], theta0: 0.0, alpha: [FRAC_PI_2, FRAC_PI_2], sector_component: [0, 1, 2] },
                Radial::Power,
            )),
            _ => None,
        }
    }

    pub fn junctions(&self) -> Vec<JunctionSpec> {
        self.sectors().map(|s| vec![s.spec]).unwrap_or_default()
    }

    /// Declared interfaces with their type.
    pub fn interfaces(&self) -> Vec<InterfaceSpec> {
        let vertical = InterfaceGeometry::line([0.5, 0.5], [1.0, 0.0]);
        match self {
            Preset::CircleInterface => vec![InterfaceSpec {
                geom: InterfaceGeometry::Circle { center: [0.0, 0.0], radius: CIRCLE_R },
                kind: InterfaceKind::I { plus: 1, minus: 0 },
            }],
            Preset::LineTypeI => vec![InterfaceSpec { geom: vertical, kind: InterfaceKind::I { plus: 1, minus: 0 } }],
            Preset::LineTypeIIa => vec![InterfaceSpec { geom: vertical, kind: InterfaceKind::IIa { shared: 0, onset: 1 } }],
            Preset::LineTypeIII => {
                vec![InterfaceSpec { geom: vertical, kind: InterfaceKind::III { shared: 0, minus: 1, plus: 2 } }]
            }
            _ => match self.sectors() {
                Some(s) => s.rays(self.domain()),
                None => Vec::new(),
            },
        }
    }

    pub fn projection(&self) -> BoundaryProjection {
        match self.sectors() {
            Some(s) => BoundaryProjection::Radial { center: s.spec.center },
            None => BoundaryProjection::ClosestPoint,
        }
    }

    pub fn recovery_config(&self, eps: f64, delta: f64, family: ProfileFamily) -> RecoveryConfig {
        let mut cfg = RecoveryConfig::new(eps, self.domain());
        cfg.delta = delta;
        cfg.family = family;
        cfg.interfaces = self.interfaces();
        cfg.junctions = self.junctions();
        cfg.projection = self.projection();
        cfg
    }

    /// The analytic triple sampled on `grid`; its trace is the boundary data.
    pub fn candidate(&self, grid: Grid) -> PhaseTriple {
        PhaseTriple::from_fn(grid, |x| self.eval(x))
    }

    /// Boundary data only: trace of the preset, zero interior.
    pub fn boundary_data(&self, grid: Grid) -> PhaseTriple {
        let mut t = self.candidate(grid);
        for u in t.u.iter_mut() {
            for v in u.values.iter_mut() {
                *v = 0.0;
            }
            u.pin_boundary();
        }
        t
    }
}

impl TripleSource for Preset {
    fn eval(&self, p: [f64; 2]) -> [f64; 3] {
        let [x, y] = p;
        match self {
            Preset::OnePhaseHarmonic => [x * x - y * y + 1.0, 0.0, 0.0],
            Preset::TwoPhaseLinear => [x, 1.0 - x, 0.0],
            Preset::CircleInterface => {
                let r2 = x * x + y * y;
                let r = r2.sqrt();
                [(CIRCLE_R * CIRCLE_R - r2).max(0.0), if r > CIRCLE_R { (r / CIRCLE_R).ln() } else { 0.0 }, 0.0]
            }
            Preset::LineTypeI => [(0.5 - x).max(0.0), (x - 0.5).max(0.0), 0.0],
            Preset::LineTypeIIa => [1.0 + 0.5 * y, (x - 0.5).max(0.0), 0.0],
            Preset::LineTypeIII => [1.0 + 0.5 * y, (0.5 - x).max(0.0), (x - 0.5).max(0.0)],
            _ => self.sectors().expect("sector preset").eval(p),
        }
    }

    fn grad(&self, p: [f64; 2]) -> [[f64; 2]; 3] {
        let [x, y] = p;
        let z = [0.0, 0.0];
        let step = |on: bool, g: [f64; 2]| if on { g } else { z };
        match self {
            Preset::OnePhaseHarmonic => [[2.0 * x, -2.0 * y], z, z],
            Preset::TwoPhaseLinear => [[1.0, 0.0], [-1.0, 0.0], z],
            Preset::CircleInterface => {
                let r2 = x * x + y * y;
                let inside = r2 < CIRCLE_R * CIRCLE_R;
                [step(inside, [-2.0 * x, -2.0 * y]), step(!inside && r2 > 0.0, [x / r2, y / r2]), z]
            }
            Preset::LineTypeI => [step(x < 0.5, [-1.0, 0.0]), step(x > 0.5, [1.0, 0.0]), z],
            Preset::LineTypeIIa => [[0.0, 0.5], step(x > 0.5, [1.0, 0.0]), z],
            Preset::LineTypeIII => [[0.0, 0.5], step(x < 0.5, [-1.0, 0.0]), step(x > 0.5, [1.0, 0.0])],
            _ => self.sectors().expect("sector preset").grad(p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Radial {
    /// r^λ: harmonic in each support wedge.
    Power,
    /// ‖x − c‖_∞^λ: equals (r/R(θ))^λ on the square [−1, 1]², so the trace
    /// is the angular bump alone.
    MaxNorm,
}

/// Component k = sin(λ_k φ)₊·radial, supported on sectors k and k+1 with
/// λ_k = π / (α_k + α_{k+1}); every sector is two-phase.
#[derive(Debug, Clone, Copy, PartialEq)]
struct SectorField {
    spec: JunctionSpec,
    radial: Radial,
}

impl SectorField {
    fn new(spec: JunctionSpec, radial: Radial) -> Self {
        SectorField { spec, radial }
    }

    fn arc(&self, k: usize) -> (f64, f64, f64) {
        let a = self.spec.alphas();
        let width = a[k] + a[(k + 1) % 3];
        (self.spec.starts()[k], width, PI / width)
    }

    fn component_of(&self, k: usize) -> usize {
        self.spec.sector_component[k]
    }

    fn label(&self, sector: usize) -> RegionLabel {
        // sector k holds the arcs starting at k and at k − 1
        RegionLabel::two(self.component_of(sector), self.component_of((sector + 2) % 3))
    }

    /// Type-III rays from the centre to ∂Ω; s > 0 is the sector before the ray.
    fn rays(&self, domain: Rect) -> Vec<InterfaceSpec> {
        let starts = self.spec.starts();
        (0..3)
            .map(|k| {
                let b = domain.ray_exit(self.spec.center, starts[k]);
                let minus = self.label(k);
                let plus = self.label((k + 2) % 3);
                let kind = InterfaceKind::from_sides(minus, plus).expect("adjacent two-phase sectors");
                InterfaceSpec { geom: InterfaceGeometry::Segment { a: self.spec.center, b }, kind }
            })
            .collect()
    }

    fn radial(&self, d: [f64; 2], lam: f64) -> (f64, [f64; 2]) {
        match self.radial {
            Radial::Power => {
                let r2 = d[0] * d[0] + d[1] * d[1];
                if r2 == 0.0 {
                    return (0.0, [0.0, 0.0]);
                }
                let v = r2.powf(0.5 * lam);
                (v, [lam * v * d[0] / r2, lam * v * d[1] / r2])
            }
            Radial::MaxNorm => {
                let (ax, ay) = (d[0].abs(), d[1].abs());
                let m = ax.max(ay);
                if m == 0.0 {
                    return (0.0, [0.0, 0.0]);
                }
                let v = m.powf(lam);
                let dv = lam * v / m;
                if ax >= ay {
                    (v, [dv * d[0].signum(), 0.0])
                } else {
                    (v, [0.0, dv * d[1].signum()])
                }
            }
        }
    }

    fn eval(&self, p: [f64; 2]) -> [f64; 3] {
        let d = [p[0] - self.spec.center[0], p[1] - self.spec.center[1]];
        let theta = d[1].atan2(d[0]);
        let mut out = [0.0; 3];
        for k in 0..3 {
            let (start, width, lam) = self.arc(k);
            let phi = (theta - start).rem_euclid(TAU);
            if phi > 0.0 && phi < width {
                out[self.component_of(k)] = (lam * phi).sin() * self.radial(d, lam).0;
            }
        }
        out
    }

    fn grad(&self, p: [f64; 2]) -> [[f64; 2]; 3] {
        let d = [p[0] - self.spec.center[0], p[1] - self.spec.center[1]];
        let r2 = d[0] * d[0] + d[1] * d[1];
        let mut out = [[0.0; 2]; 3];
        if r2 == 0.0 {
            return out;
        }
        let theta = d[1].atan2(d[0]);
        let dtheta = [-d[1] / r2, d[0] / r2];
        for k in 0..3 {
            let (start, width, lam) = self.arc(k);
            let phi = (theta - start).rem_euclid(TAU);
            if phi > 0.0 && phi < width {
                let (a, da) = ((lam * phi).sin(), lam * (lam * phi).cos());
                let (v, dv) = self.radial(d, lam);
                out[self.component_of(k)] = [da * dtheta[0] * v + a * dv[0], da * dtheta[1] * v + a * dv[1]];
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recovery::constraint_violation;

    #[test]
    fn names_round_trip() {
        for p in Preset::ALL {
            assert_eq!(Preset::parse(p.name()).unwrap(), p);
        }
        assert!(Preset::parse("nope").is_err());
    }

    #[test]
    fn candidates_are_segregated_and_nonnegative() {
        for p in Preset::ALL {
            let t = p.candidate(p.grid(64).unwrap());
            assert_eq!(constraint_violation(&t), 0.0, "{}", p.name());
            assert!(t.u.iter().all(|u| u.values.iter().all(|v| *v >= 0.0)));
        }
    }

    #[test]
    fn analytic_gradients_match_differences() {
        let pts = [[0.31, 0.17], [0.73, 0.41], [-0.6, 0.35], [-0.2, -0.7], [0.45, -0.52], [0.12, 0.83]];
        for p in Preset::ALL {
            let dom = p.domain();
            for q in pts {
                let x = [dom.x0 + (q[0] + 1.0) / 2.0 * dom.width(), dom.y0 + (q[1] + 1.0) / 2.0 * dom.height()];
                let h = 1e-6;
                let g = p.grad(x);
                for c in 0..3 {
                    let fx = (p.eval([x[0] + h, x[1]])[c] - p.eval([x[0] - h, x[1]])[c]) / (2.0 * h);
                    let fy = (p.eval([x[0], x[1] + h])[c] - p.eval([x[0], x[1] - h])[c]) / (2.0 * h);
                    assert!((fx - g[c][0]).abs() < 1e-6 && (fy - g[c][1]).abs() < 1e-6, "{} at {x:?} comp {c}", p.name());
                }
            }
        }
    }

    #[test]
    fn symmetric_rays_are_type_three() {
        let rays = Preset::JunctionSymmetric.interfaces();
        assert_eq!(rays.len(), 3);
        assert_eq!(rays[1].kind, InterfaceKind::III { shared: 0, minus: 1, plus: 2 });
        for r in &rays {
            assert_eq!(r.kind.tag(), "III");
        }
    }

    #[test]
    fn three_sector_trace_is_angular_bump() {
        let p = Preset::ThreeSector;
        let v = p.eval([1.0, 1.0]);
        // θ = π/4: component 1 is sin(3π/16), component 3 is sin(3/4·(π/4 + 2π/3))
        assert!((v[0] - (3.0 * PI / 16.0).sin()).abs() < 1e-15);
        assert_eq!(v[1], 0.0);
        assert!((v[2] - (0.75 * (PI / 4.0 + 2.0 * PI / 3.0)).sin()).abs() < 1e-14);
    }
}
