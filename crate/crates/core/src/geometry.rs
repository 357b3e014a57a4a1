//! Region classification, interface coordinates and junction detection.

use crate::error::{Result, SegError};
use crate::field::{Grid, PhaseTriple};
use std::f64::consts::TAU;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RegionLabel {
    Pure1,
    Pure2,
    Pure3,
    Two12,
    Two13,
    Two23,
    Zero,
    NearInterface(usize),
    NearJunction(usize),
    BoundaryLayer,
    /// All three components above threshold; impossible for a segregated triple.
    ConstraintViolation,
}

impl RegionLabel {
    pub const BULK: [RegionLabel; 7] = [
        RegionLabel::Pure1,
        RegionLabel::Pure2,
        RegionLabel::Pure3,
        RegionLabel::Two12,
        RegionLabel::Two13,
        RegionLabel::Two23,
        RegionLabel::Zero,
    ];

    /// Bulk label from a sign pattern.
    pub fn from_pattern(p: [bool; 3]) -> RegionLabel {
        match p {
            [true, false, false] => RegionLabel::Pure1,
            [false, true, false] => RegionLabel::Pure2,
            [false, false, true] => RegionLabel::Pure3,
            [true, true, false] => RegionLabel::Two12,
            [true, false, true] => RegionLabel::Two13,
            [false, true, true] => RegionLabel::Two23,
            [false, false, false] => RegionLabel::Zero,
            [true, true, true] => RegionLabel::ConstraintViolation,
        }
    }

    /// Sign pattern of a bulk label.
    pub fn pattern(&self) -> Option<[bool; 3]> {
        Some(match self {
            RegionLabel::Pure1 => [true, false, false],
            RegionLabel::Pure2 => [false, true, false],
            RegionLabel::Pure3 => [false, false, true],
            RegionLabel::Two12 => [true, true, false],
            RegionLabel::Two13 => [true, false, true],
            RegionLabel::Two23 => [false, true, true],
            RegionLabel::Zero => [false, false, false],
            _ => return None,
        })
    }

    pub fn is_bulk(&self) -> bool {
        self.pattern().is_some()
    }

    pub fn pure(c: usize) -> RegionLabel {
        let mut p = [false; 3];
        p[c] = true;
        RegionLabel::from_pattern(p)
    }

    pub fn two(a: usize, b: usize) -> RegionLabel {
        let mut p = [false; 3];
        p[a] = true;
        p[b] = true;
        RegionLabel::from_pattern(p)
    }

    /// Relabels components by `perm` (component c becomes perm[c]).
    pub fn permute(&self, perm: [usize; 3]) -> RegionLabel {
        match self.pattern() {
            Some(p) => {
                let mut q = [false; 3];
                for c in 0..3 {
                    q[perm[c]] = p[c];
                }
                RegionLabel::from_pattern(q)
            }
            None => *self,
        }
    }

    pub fn name(&self) -> String {
        match self {
            RegionLabel::Pure1 => "Pure1".into(),
            RegionLabel::Pure2 => "Pure2".into(),
            RegionLabel::Pure3 => "Pure3".into(),
            RegionLabel::Two12 => "Two12".into(),
            RegionLabel::Two13 => "Two13".into(),
            RegionLabel::Two23 => "Two23".into(),
            RegionLabel::Zero => "Zero".into(),
            RegionLabel::NearInterface(k) => format!("NearInterface{k}"),
            RegionLabel::NearJunction(k) => format!("NearJunction{k}"),
            RegionLabel::BoundaryLayer => "BoundaryLayer".into(),
            RegionLabel::ConstraintViolation => "ConstraintViolation".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionMap {
    pub grid: Grid,
    pub labels: Vec<RegionLabel>,
}

impl RegionMap {
    pub fn violations(&self) -> usize {
        self.labels.iter().filter(|l| **l == RegionLabel::ConstraintViolation).count()
    }

    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        use std::io::Write;
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "x,y,label")?;
        for (k, l) in self.labels.iter().enumerate() {
            let (i, j) = self.grid.ij(k);
            let p = self.grid.node(i, j);
            writeln!(w, "{},{},{}", crate::field::fmt17(p[0]), crate::field::fmt17(p[1]), l.name())?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Default zero threshold: 1e-8 times the largest component value.
pub fn default_tol(t: &PhaseTriple) -> f64 {
    let m = t.u.iter().map(|u| u.max_abs()).fold(0.0, f64::max);
    if m > 0.0 {
        1e-8 * m
    } else {
        1e-8
    }
}

pub fn classify_values(v: [f64; 3], tol: f64) -> RegionLabel {
    RegionLabel::from_pattern([v[0] > tol, v[1] > tol, v[2] > tol])
}

/// Bulk label per node by thresholding; all-positive nodes get `ConstraintViolation`.
pub fn classify(t: &PhaseTriple, tol: f64) -> Result<RegionMap> {
    if !(tol > 0.0) {
        return Err(SegError::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    let g = t.grid();
    let labels = (0..g.n_nodes()).map(|k| classify_values(t.node_values(k), tol)).collect();
    Ok(RegionMap { grid: g, labels })
}

/// Overlays `Near*`/`BoundaryLayer` labels within √ε of declared geometry.
/// Priority follows the cutoff hierarchy: boundary, junction, interface.
pub fn mark_neighborhoods(rm: &RegionMap, eps: f64, interfaces: &[InterfaceGeometry], junctions: &[JunctionSpec]) -> RegionMap {
    let se = eps.sqrt();
    let g = rm.grid;
    let labels = rm
        .labels
        .iter()
        .enumerate()
        .map(|(k, &l)| {
            let (i, j) = g.ij(k);
            let p = g.node(i, j);
            if g.extent.dist_to_boundary(p) < se {
                return RegionLabel::BoundaryLayer;
            }
            for (m, jn) in junctions.iter().enumerate() {
                if dist(p, jn.center) < se {
                    return RegionLabel::NearJunction(m);
                }
            }
            for (m, ig) in interfaces.iter().enumerate() {
                if ig.distance(p) < se {
                    return RegionLabel::NearInterface(m);
                }
            }
            l
        })
        .collect();
    RegionMap { grid: g, labels }
}

#[inline]
pub fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Analytic interface curves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InterfaceGeometry {
    /// Infinite line through `point` with unit `normal`; tangent is the normal rotated by +90°.
    Line { point: [f64; 2], normal: [f64; 2] },
    /// Segment from `a` to `b`; the normal is the direction rotated by −90°.
    Segment { a: [f64; 2], b: [f64; 2] },
    /// Circle with outward normal; parameter is the polar angle.
    Circle { center: [f64; 2], radius: f64 },
}

impl InterfaceGeometry {
    pub fn line(point: [f64; 2], normal: [f64; 2]) -> Self {
        let n = (normal[0] * normal[0] + normal[1] * normal[1]).sqrt();
        InterfaceGeometry::Line { point, normal: [normal[0] / n, normal[1] / n] }
    }

    fn seg_frame(a: [f64; 2], b: [f64; 2]) -> ([f64; 2], [f64; 2], f64) {
        let l = dist(a, b);
        let d = [(b[0] - a[0]) / l, (b[1] - a[1]) / l];
        (d, [d[1], -d[0]], l)
    }

    pub fn point(&self, t: f64) -> [f64; 2] {
        match *self {
            InterfaceGeometry::Line { point, normal } => [point[0] - t * normal[1], point[1] + t * normal[0]],
            InterfaceGeometry::Segment { a, b } => {
                let (d, _, _) = Self::seg_frame(a, b);
                [a[0] + t * d[0], a[1] + t * d[1]]
            }
            InterfaceGeometry::Circle { center, radius } => [center[0] + radius * t.cos(), center[1] + radius * t.sin()],
        }
    }

    pub fn normal(&self, t: f64) -> [f64; 2] {
        match *self {
            InterfaceGeometry::Line { normal, .. } => normal,
            InterfaceGeometry::Segment { a, b } => Self::seg_frame(a, b).1,
            InterfaceGeometry::Circle { .. } => [t.cos(), t.sin()],
        }
    }

    /// Curvature with the sign convention J = 1 + s·κ.
    pub fn curvature(&self, _t: f64) -> f64 {
        match *self {
            InterfaceGeometry::Circle { radius, .. } => 1.0 / radius,
            _ => 0.0,
        }
    }

    pub fn max_curvature(&self) -> f64 {
        self.curvature(0.0).abs()
    }

    /// Unsigned distance to the curve (segment endpoints included).
    pub fn distance(&self, x: [f64; 2]) -> f64 {
        match *self {
            InterfaceGeometry::Line { point, normal } => ((x[0] - point[0]) * normal[0] + (x[1] - point[1]) * normal[1]).abs(),
            InterfaceGeometry::Segment { a, b } => {
                let (d, n, l) = Self::seg_frame(a, b);
                let r = [x[0] - a[0], x[1] - a[1]];
                let t = r[0] * d[0] + r[1] * d[1];
                if t < 0.0 {
                    dist(x, a)
                } else if t > l {
                    dist(x, b)
                } else {
                    (r[0] * n[0] + r[1] * n[1]).abs()
                }
            }
            InterfaceGeometry::Circle { center, radius } => (dist(x, center) - radius).abs(),
        }
    }
}

/// Signed distance `s` and foot parameter `t` with `x = point(t) + s·normal(t)`.
pub fn interface_coords(g: &InterfaceGeometry, x: [f64; 2]) -> Result<(f64, f64)> {
    match *g {
        InterfaceGeometry::Line { point, normal } => {
            let r = [x[0] - point[0], x[1] - point[1]];
            Ok((r[0] * normal[0] + r[1] * normal[1], -r[0] * normal[1] + r[1] * normal[0]))
        }
        InterfaceGeometry::Segment { a, b } => {
            let (d, n, l) = InterfaceGeometry::seg_frame(a, b);
            let r = [x[0] - a[0], x[1] - a[1]];
            let t = r[0] * d[0] + r[1] * d[1];
            if t < 0.0 || t > l {
                return Err(SegError::OutOfTube(format!("foot of {x:?} beyond segment end")));
            }
            Ok((r[0] * n[0] + r[1] * n[1], t))
        }
        InterfaceGeometry::Circle { center, radius } => {
            let r = dist(x, center);
            if r <= 1e-14 * radius {
                return Err(SegError::OutOfTube("circle center has no unique foot point".into()));
            }
            Ok((r - radius, (x[1] - center[1]).atan2(x[0] - center[0])))
        }
    }
}

/// Area element ratio 1 + s·κ(t) of tubular coordinates.
pub fn jacobian(g: &InterfaceGeometry, s: f64, t: f64) -> Result<f64> {
    let j = 1.0 + s * g.curvature(t);
    if j <= 0.0 {
        return Err(SegError::DegenerateTube(j));
    }
    Ok(j)
}

/// Interface type with component roles (0-based component indices).
///
/// `plus`/`minus` refer to the sides s > 0 and s < 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterfaceKind {
    /// Pure–pure: `plus` positive on s > 0, `minus` on s < 0.
    I { plus: usize, minus: usize },
    /// Pure–two-phase: `shared` on both sides, `onset` only on s > 0.
    IIa { shared: usize, onset: usize },
    /// Two-phase–pure: `shared` on both sides, `onset` only on s < 0.
    IIb { shared: usize, onset: usize },
    /// Two-phase–two-phase: `shared` on both sides.
    III { shared: usize, minus: usize, plus: usize },
}

impl InterfaceKind {
    pub fn tag(&self) -> &'static str {
        match self {
            InterfaceKind::I { .. } => "I",
            InterfaceKind::IIa { .. } => "IIa",
            InterfaceKind::IIb { .. } => "IIb",
            InterfaceKind::III { .. } => "III",
        }
    }

    /// Adjacent bulk labels (minus side, plus side).
    pub fn sides(&self) -> (RegionLabel, RegionLabel) {
        match *self {
            InterfaceKind::I { plus, minus } => (RegionLabel::pure(minus), RegionLabel::pure(plus)),
            InterfaceKind::IIa { shared, onset } => (RegionLabel::pure(shared), RegionLabel::two(shared, onset)),
            InterfaceKind::IIb { shared, onset } => (RegionLabel::two(shared, onset), RegionLabel::pure(shared)),
            InterfaceKind::III { shared, minus, plus } => (RegionLabel::two(shared, minus), RegionLabel::two(shared, plus)),
        }
    }

    /// Type from the adjacent labels; `None` for pairs touching the vacuum
    /// region or otherwise outside the taxonomy (left untyped).
    pub fn from_sides(minus: RegionLabel, plus: RegionLabel) -> Option<InterfaceKind> {
        let (pm, pp) = (minus.pattern()?, plus.pattern()?);
        let cm: Vec<usize> = (0..3).filter(|&c| pm[c]).collect();
        let cp: Vec<usize> = (0..3).filter(|&c| pp[c]).collect();
        match (cm.len(), cp.len()) {
            (1, 1) if cm[0] != cp[0] => Some(InterfaceKind::I { plus: cp[0], minus: cm[0] }),
            (1, 2) if pp[cm[0]] => {
                let onset = *cp.iter().find(|&&c| c != cm[0])?;
                Some(InterfaceKind::IIa { shared: cm[0], onset })
            }
            (2, 1) if pm[cp[0]] => {
                let onset = *cm.iter().find(|&&c| c != cp[0])?;
                Some(InterfaceKind::IIb { shared: cp[0], onset })
            }
            (2, 2) => {
                let shared = (0..3).find(|&c| pm[c] && pp[c])?;
                let minus = *cm.iter().find(|&&c| c != shared)?;
                let plus = *cp.iter().find(|&&c| c != shared)?;
                if minus == plus {
                    None
                } else {
                    Some(InterfaceKind::III { shared, minus, plus })
                }
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceSpec {
    pub geom: InterfaceGeometry,
    pub kind: InterfaceKind,
}

/// Triple junction: sectors start at `theta0`, `theta0 + α₁`, `theta0 + α₁ + α₂`
/// (counterclockwise); `sector_component[k]` is the component carried by sector k.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JunctionSpec {
    pub center: [f64; 2],
    pub theta0: f64,
    pub alpha: [f64; 2],
    pub sector_component: [usize; 3],
}

impl JunctionSpec {
    pub fn new(center: [f64; 2], theta0: f64, alpha: [f64; 2], sector_component: [usize; 3]) -> Result<Self> {
        if !(alpha[0] > 0.0 && alpha[1] > 0.0 && alpha[0] + alpha[1] < TAU) {
            return Err(SegError::InvalidGeometry(format!("invalid sector angles {alpha:?}")));
        }
        Ok(JunctionSpec { center, theta0, alpha, sector_component })
    }

    pub fn symmetric(center: [f64; 2], theta0: f64) -> Self {
        let a = TAU / 3.0;
        JunctionSpec { center, theta0, alpha: [a, a], sector_component: [0, 1, 2] }
    }

    pub fn alphas(&self) -> [f64; 3] {
        [self.alpha[0], self.alpha[1], TAU - self.alpha[0] - self.alpha[1]]
    }

    pub fn starts(&self) -> [f64; 3] {
        [self.theta0, self.theta0 + self.alpha[0], self.theta0 + self.alpha[0] + self.alpha[1]]
    }

    /// Sector containing angle `theta`.
    pub fn sector_of(&self, theta: f64) -> usize {
        let phi = (theta - self.theta0).rem_euclid(TAU);
        if phi < self.alpha[0] {
            0
        } else if phi < self.alpha[0] + self.alpha[1] {
            1
        } else {
            2
        }
    }

    pub fn polar(&self, x: [f64; 2]) -> (f64, f64) {
        let dx = x[0] - self.center[0];
        let dy = x[1] - self.center[1];
        ((dx * dx + dy * dy).sqrt(), dy.atan2(dx))
    }
}

/// Points where three bulk labels meet.
///
/// Candidates are 2×2 node blocks holding three or more distinct bulk labels;
/// nearby candidates are merged and each cluster is confirmed on a ring of
/// radius 6h, where the label runs give the sector angles.
pub fn detect_junctions(rm: &RegionMap) -> Result<Vec<JunctionSpec>> {
    let g = rm.grid;
    let lab = |i: usize, j: usize| rm.labels[g.idx(i, j)];
    let mut cands: Vec<[f64; 2]> = Vec::new();
    for j in 0..g.ny {
        for i in 0..g.nx {
            let mut set: Vec<RegionLabel> = Vec::with_capacity(4);
            for (a, b) in [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)] {
                let l = lab(a, b);
                if l.is_bulk() && !set.contains(&l) {
                    set.push(l);
                }
            }
            if set.len() >= 3 {
                let p = g.node(i, j);
                cands.push([p[0] + 0.5 * g.hx, p[1] + 0.5 * g.hy]);
            }
        }
    }
    // greedy clustering within 3h
    let reach = 3.0 * g.h_max();
    let mut clusters: Vec<Vec<[f64; 2]>> = Vec::new();
    for c in cands {
        match clusters.iter_mut().find(|cl| cl.iter().any(|q| dist(*q, c) <= reach)) {
            Some(cl) => cl.push(c),
            None => clusters.push(vec![c]),
        }
    }
    let ring = 6.0 * g.h_max();
    let samples = 1440;
    let mut out = Vec::new();
    for cl in clusters {
        let n = cl.len() as f64;
        let center = [cl.iter().map(|p| p[0]).sum::<f64>() / n, cl.iter().map(|p| p[1]).sum::<f64>() / n];
        if g.extent.dist_to_boundary(center) <= ring + g.h_max() {
            continue;
        }
        let mut seq: Vec<RegionLabel> = Vec::with_capacity(samples);
        for m in 0..samples {
            let th = TAU * m as f64 / samples as f64;
            let p = [center[0] + ring * th.cos(), center[1] + ring * th.sin()];
            let i = ((p[0] - g.origin[0]) / g.hx).round().clamp(0.0, g.nx as f64) as usize;
            let j = ((p[1] - g.origin[1]) / g.hy).round().clamp(0.0, g.ny as f64) as usize;
            seq.push(lab(i, j));
        }
        // runs on the circle, starting at a label change
        let Some(shift) = (0..samples).find(|&m| seq[m] != seq[(m + samples - 1) % samples]) else {
            continue;
        };
        let mut runs: Vec<(RegionLabel, usize, usize)> = Vec::new();
        for q in 0..samples {
            let m = (q + shift) % samples;
            match runs.last_mut() {
                Some(r) if r.0 == seq[m] => r.2 += 1,
                _ => runs.push((seq[m], m, 1)),
            }
        }
        // drop runs thinner than two cells of arc, then merge equal neighbours
        let min_len = ((2.0 * g.h_max() / ring) / TAU * samples as f64).ceil() as usize;
        let mut kept: Vec<(RegionLabel, usize, usize)> = Vec::new();
        for r in runs.into_iter().filter(|r| r.2 >= min_len && r.0.is_bulk()) {
            match kept.last_mut() {
                Some(k) if k.0 == r.0 => k.2 += r.2,
                _ => kept.push(r),
            }
        }
        if kept.len() > 1 && kept[0].0 == kept[kept.len() - 1].0 {
            let last = kept.pop().unwrap();
            kept[0].1 = last.1;
        }
        let distinct: Vec<RegionLabel> = {
            let mut d: Vec<RegionLabel> = kept.iter().map(|r| r.0).collect();
            d.sort();
            d.dedup();
            d
        };
        if kept.len() > 3 || distinct.len() > 3 {
            return Err(SegError::UnsupportedGeometry(format!(
                "{} regions meet near ({:.4}, {:.4})",
                kept.len(),
                center[0],
                center[1]
            )));
        }
        if kept.len() < 3 || distinct.len() < 3 {
            continue;
        }
        // recompute arc lengths from run starts to stay consistent after merging
        let starts: Vec<usize> = kept.iter().map(|r| r.1).collect();
        let width = |k: usize| ((starts[(k + 1) % 3] + samples - starts[k]) % samples) as f64 * TAU / samples as f64;
        // first sector: the one whose start angle is smallest
        let first = (0..3).min_by_key(|&k| starts[k]).unwrap();
        let order = [first, (first + 1) % 3, (first + 2) % 3];
        let theta0 = TAU * starts[first] as f64 / samples as f64;
        let pats: Vec<[bool; 3]> = order.iter().map(|&k| kept[k].0.pattern().unwrap()).collect();
        let mut comp = [0usize; 3];
        for s in 0..3 {
            let prev = pats[(s + 2) % 3];
            let cur = pats[s];
            comp[s] = (0..3)
                .find(|&c| cur[c] && !prev[c])
                .or_else(|| (0..3).find(|&c| cur[c]))
                .unwrap_or(s);
        }
        out.push(JunctionSpec::new(center, theta0, [width(order[0]), width(order[1])], comp)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{make_grid, Rect};

    #[test]
    fn classify_examples() {
        assert_eq!(classify_values([0.5, 0.0, 0.0], 1e-8), RegionLabel::Pure1);
        assert_eq!(classify_values([0.3, 0.2, 0.0], 1e-8), RegionLabel::Two12);
        assert_eq!(classify_values([0.1, 0.1, 0.1], 1e-8), RegionLabel::ConstraintViolation);
    }

    #[test]
    fn coords_examples() {
        let line = InterfaceGeometry::line([0.5, 0.0], [1.0, 0.0]);
        let (s, t) = interface_coords(&line, [0.6, 0.3]).unwrap();
        assert!((s - 0.1).abs() < 1e-15);
        let foot = line.point(t);
        assert!((foot[0] - 0.5).abs() < 1e-15 && (foot[1] - 0.3).abs() < 1e-15);
        assert_eq!(interface_coords(&line, [0.5, 0.7]).unwrap().0, 0.0);
        let c = InterfaceGeometry::Circle { center: [0.5, 0.5], radius: 0.25 };
        let (s, _) = interface_coords(&c, [0.9, 0.5]).unwrap();
        assert!((s - 0.15).abs() < 1e-15);
        assert!(interface_coords(&c, [0.5, 0.5]).is_err());
    }

    #[test]
    fn jacobian_examples() {
        let c = InterfaceGeometry::Circle { center: [0.5, 0.5], radius: 0.25 };
        assert_eq!(jacobian(&c, 0.0, 1.0).unwrap(), 1.0);
        assert!((jacobian(&c, 0.1, 0.3).unwrap() - 1.4).abs() < 1e-15);
        assert!(jacobian(&c, -0.3, 0.0).is_err());
        let line = InterfaceGeometry::line([0.5, 0.0], [1.0, 0.0]);
        assert_eq!(jacobian(&line, 0.37, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn no_junction_in_simple_maps() {
        let g = make_grid(Rect::UNIT, (32, 32)).unwrap();
        let labels = (0..g.n_nodes())
            .map(|k| {
                let (i, j) = g.ij(k);
                if g.node(i, j)[0] < 0.5 {
                    RegionLabel::Pure1
                } else {
                    RegionLabel::Two12
                }
            })
            .collect();
        assert!(detect_junctions(&RegionMap { grid: g, labels }).unwrap().is_empty());
        let labels = vec![RegionLabel::Pure1; g.n_nodes()];
        assert!(detect_junctions(&RegionMap { grid: g, labels }).unwrap().is_empty());
    }

    #[test]
    fn kind_from_sides() {
        let k = InterfaceKind::from_sides(RegionLabel::Two12, RegionLabel::Two13).unwrap();
        assert_eq!(k, InterfaceKind::III { shared: 0, minus: 1, plus: 2 });
        assert_eq!(k.sides(), (RegionLabel::Two12, RegionLabel::Two13));
        assert!(InterfaceKind::from_sides(RegionLabel::Zero, RegionLabel::Pure1).is_none());
        let k = InterfaceKind::from_sides(RegionLabel::Pure1, RegionLabel::Two12).unwrap();
        assert_eq!(k.tag(), "IIa");
    }
}
