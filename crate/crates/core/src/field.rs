//! Uniform-grid scalar fields, discrete Dirichlet energy, norms and
//! deterministic reductions.
//!
//! Nodes are indexed `(i, j)` with `0 <= i <= nx`, `0 <= j <= ny`, stored
//! row-major (`j` outer). Boundary nodes are Dirichlet-pinned.

use crate::error::{Result, SegError};
use std::io::Write;
use std::path::Path;

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub const UNIT: Rect = Rect { x0: 0.0, x1: 1.0, y0: 0.0, y1: 1.0 };

    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Rect { x0, x1, y0, y1 }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        p[0] >= self.x0 && p[0] <= self.x1 && p[1] >= self.y0 && p[1] <= self.y1
    }

    /// Distance from an interior point to the rectangle boundary.
    pub fn dist_to_boundary(&self, p: [f64; 2]) -> f64 {
        (p[0] - self.x0)
            .min(self.x1 - p[0])
            .min(p[1] - self.y0)
            .min(self.y1 - p[1])
    }

    /// Closest point on the boundary (for interior points).
    pub fn project_to_boundary(&self, p: [f64; 2]) -> [f64; 2] {
        let d = [p[0] - self.x0, self.x1 - p[0], p[1] - self.y0, self.y1 - p[1]];
        let mut k = 0;
        for m in 1..4 {
            if d[m] < d[k] {
                k = m;
            }
        }
        match k {
            0 => [self.x0, p[1]],
            1 => [self.x1, p[1]],
            2 => [p[0], self.y0],
            _ => [p[0], self.y1],
        }
    }

    /// Exit point of the ray from interior point `c` through direction `theta`.
    pub fn ray_exit(&self, c: [f64; 2], theta: f64) -> [f64; 2] {
        let (dx, dy) = (theta.cos(), theta.sin());
        let mut t = f64::INFINITY;
        if dx > 1e-300 {
            t = t.min((self.x1 - c[0]) / dx);
        } else if dx < -1e-300 {
            t = t.min((self.x0 - c[0]) / dx);
        }
        if dy > 1e-300 {
            t = t.min((self.y1 - c[1]) / dy);
        } else if dy < -1e-300 {
            t = t.min((self.y0 - c[1]) / dy);
        }
        [c[0] + t * dx, c[1] + t * dy]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub hx: f64,
    pub hy: f64,
    pub origin: [f64; 2],
    pub extent: Rect,
}

pub fn make_grid(extent: Rect, n: (usize, usize)) -> Result<Grid> {
    let (nx, ny) = n;
    if nx < 3 || ny < 3 {
        return Err(SegError::InvalidArgument(format!(
            "grid needs at least 3 cells per direction, got {nx}x{ny}"
        )));
    }
    let (w, h) = (extent.width(), extent.height());
    if !(w > 0.0 && h > 0.0 && w.is_finite() && h.is_finite()) {
        return Err(SegError::InvalidArgument(format!("non-positive extent {w}x{h}")));
    }
    Ok(Grid {
        nx,
        ny,
        hx: w / nx as f64,
        hy: h / ny as f64,
        origin: [extent.x0, extent.y0],
        extent,
    })
}

impl Grid {
    pub fn n_nodes(&self) -> usize {
        (self.nx + 1) * (self.ny + 1)
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    #[inline]
    pub fn ij(&self, k: usize) -> (usize, usize) {
        (k % (self.nx + 1), k / (self.nx + 1))
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize) -> [f64; 2] {
        // endpoints are placed exactly on the extent to keep traces bit-exact
        let x = if i == self.nx { self.extent.x1 } else { self.origin[0] + i as f64 * self.hx };
        let y = if j == self.ny { self.extent.y1 } else { self.origin[1] + j as f64 * self.hy };
        [x, y]
    }

    #[inline]
    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.nx || j == self.ny
    }

    /// Boundary node indices in row-major order.
    pub fn boundary_indices(&self) -> Vec<usize> {
        (0..self.n_nodes())
            .filter(|&k| {
                let (i, j) = self.ij(k);
                self.is_boundary(i, j)
            })
            .collect()
    }

    /// Trapezoidal nodal quadrature weight.
    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let wx = if i == 0 || i == self.nx { 0.5 } else { 1.0 };
        let wy = if j == 0 || j == self.ny { 0.5 } else { 1.0 };
        wx * wy * self.hx * self.hy
    }

    pub fn h_max(&self) -> f64 {
        self.hx.max(self.hy)
    }
}

/// Sum in a fixed binary-tree order; bit-identical across runs.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    const BASE: usize = 32;
    if v.len() <= BASE {
        let mut s = 0.0;
        for x in v {
            s += x;
        }
        return s;
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: Grid,
    pub values: Vec<f64>,
    /// Trace on `grid.boundary_indices()`, in that order.
    pub boundary_values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        let nb = grid.boundary_indices().len();
        ScalarField { grid, values: vec![0.0; grid.n_nodes()], boundary_values: vec![0.0; nb] }
    }

    /// Samples `f` at every node; the trace is `f` on the boundary.
    pub fn from_fn(grid: Grid, f: impl Fn([f64; 2]) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.n_nodes());
        for j in 0..=grid.ny {
            for i in 0..=grid.nx {
                values.push(f(grid.node(i, j)));
            }
        }
        let boundary_values = grid.boundary_indices().iter().map(|&k| values[k]).collect();
        ScalarField { grid, values, boundary_values }
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.len() != self.grid.n_nodes() {
            return Err(SegError::InvalidArgument("field length does not match grid".into()));
        }
        if let Some(v) = self.values.iter().find(|v| !v.is_finite()) {
            return Err(SegError::InvalidArgument(format!("non-finite field value {v}")));
        }
        Ok(())
    }

    /// Re-imposes the trace on boundary nodes.
    pub fn pin_boundary(&mut self) {
        for (b, &k) in self.grid.boundary_indices().iter().enumerate() {
            self.values[k] = self.boundary_values[b];
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Bilinear interpolation; points outside the grid are clamped to it.
    pub fn interpolate(&self, p: [f64; 2]) -> f64 {
        let g = &self.grid;
        let fx = ((p[0] - g.origin[0]) / g.hx).clamp(0.0, g.nx as f64);
        let fy = ((p[1] - g.origin[1]) / g.hy).clamp(0.0, g.ny as f64);
        let i = (fx.floor() as usize).min(g.nx - 1);
        let j = (fy.floor() as usize).min(g.ny - 1);
        let (tx, ty) = (fx - i as f64, fy - j as f64);
        let a = self.at(i, j);
        let b = self.at(i + 1, j);
        let c = self.at(i, j + 1);
        let d = self.at(i + 1, j + 1);
        (1.0 - ty) * ((1.0 - tx) * a + tx * b) + ty * ((1.0 - tx) * c + tx * d)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTriple {
    pub u: [ScalarField; 3],
}

impl PhaseTriple {
    pub fn new(u1: ScalarField, u2: ScalarField, u3: ScalarField) -> Result<Self> {
        if u1.grid != u2.grid || u1.grid != u3.grid {
            return Err(SegError::InvalidArgument("components live on different grids".into()));
        }
        for u in [&u1, &u2, &u3] {
            u.validate()?;
        }
        Ok(PhaseTriple { u: [u1, u2, u3] })
    }

    pub fn from_fn(grid: Grid, f: impl Fn([f64; 2]) -> [f64; 3]) -> Self {
        let mut vals = [Vec::new(), Vec::new(), Vec::new()];
        for j in 0..=grid.ny {
            for i in 0..=grid.nx {
                let v = f(grid.node(i, j));
                for c in 0..3 {
                    vals[c].push(v[c]);
                }
            }
        }
        let bidx = grid.boundary_indices();
        let mk = |values: Vec<f64>| {
            let boundary_values = bidx.iter().map(|&k| values[k]).collect();
            ScalarField { grid, values, boundary_values }
        };
        let [a, b, c] = vals;
        PhaseTriple { u: [mk(a), mk(b), mk(c)] }
    }

    pub fn grid(&self) -> Grid {
        self.u[0].grid
    }

    pub fn node_values(&self, k: usize) -> [f64; 3] {
        [self.u[0].values[k], self.u[1].values[k], self.u[2].values[k]]
    }
}

/// Per-cell contributions to the discrete Dirichlet integral.
///
/// Each cell averages the squared forward differences of its two parallel
/// edges, so an interior edge carries weight `hx*hy` and a boundary edge half
/// of it. The gradient of the sum with respect to an interior node is
/// `-2 hx hy` times the 5-point Laplacian.
pub fn cell_energies(u: &ScalarField) -> Vec<f64> {
    let g = &u.grid;
    let (ax, ay) = (1.0 / (g.hx * g.hx), 1.0 / (g.hy * g.hy));
    let w = 0.5 * g.hx * g.hy;
    let mut out = Vec::with_capacity(g.nx * g.ny);
    for j in 0..g.ny {
        for i in 0..g.nx {
            let a = u.at(i, j);
            let b = u.at(i + 1, j);
            let c = u.at(i, j + 1);
            let d = u.at(i + 1, j + 1);
            let ex = (b - a) * (b - a) + (d - c) * (d - c);
            let ey = (c - a) * (c - a) + (d - b) * (d - b);
            out.push(w * (ax * ex + ay * ey));
        }
    }
    out
}

pub fn dirichlet_energy(u: &ScalarField) -> f64 {
    pairwise_sum(&cell_energies(u))
}

pub fn l2_norm(u: &ScalarField) -> f64 {
    let g = &u.grid;
    let mut terms = Vec::with_capacity(g.n_nodes());
    for j in 0..=g.ny {
        for i in 0..=g.nx {
            let v = u.at(i, j);
            terms.push(v * v * g.weight(i, j));
        }
    }
    pairwise_sum(&terms).sqrt()
}

pub fn product_field(t: &PhaseTriple) -> Result<ScalarField> {
    let g = t.u[0].grid;
    if t.u[1].grid != g || t.u[2].grid != g {
        return Err(SegError::InvalidArgument("components live on different grids".into()));
    }
    let values: Vec<f64> = (0..g.n_nodes())
        .map(|k| t.u[0].values[k] * t.u[1].values[k] * t.u[2].values[k])
        .collect();
    let boundary_values = g.boundary_indices().iter().map(|&k| values[k]).collect();
    Ok(ScalarField { grid: g, values, boundary_values })
}

/// Discrete L2 distance between two fields on one grid.
pub fn l2_distance(a: &ScalarField, b: &ScalarField) -> Result<f64> {
    if a.grid != b.grid {
        return Err(SegError::InvalidArgument("fields live on different grids".into()));
    }
    let g = &a.grid;
    let mut terms = Vec::with_capacity(g.n_nodes());
    for j in 0..=g.ny {
        for i in 0..=g.nx {
            let d = a.at(i, j) - b.at(i, j);
            terms.push(d * d * g.weight(i, j));
        }
    }
    Ok(pairwise_sum(&terms).sqrt())
}

/// Empirical Hölder seminorm `sup |u(x)-u(y)| / |x-y|^alpha` over node pairs in `k`.
///
/// Uses all nodes of `k` when there are at most 10^4 of them, otherwise a
/// uniform stride in both directions.
pub fn holder_quotient(u: &ScalarField, alpha: f64, k: Rect) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(SegError::InvalidArgument(format!("alpha must lie in (0,1), got {alpha}")));
    }
    let g = &u.grid;
    let e = g.extent;
    if !(k.x0 > e.x0 && k.x1 < e.x1 && k.y0 > e.y0 && k.y1 < e.y1 && k.x0 < k.x1 && k.y0 < k.y1) {
        return Err(SegError::InvalidArgument("K must lie strictly inside the domain".into()));
    }
    let tol = 1e-12 * g.h_max();
    let is: Vec<usize> = (0..=g.nx)
        .filter(|&i| {
            let x = g.node(i, 0)[0];
            x >= k.x0 - tol && x <= k.x1 + tol
        })
        .collect();
    let js: Vec<usize> = (0..=g.ny)
        .filter(|&j| {
            let y = g.node(0, j)[1];
            y >= k.y0 - tol && y <= k.y1 + tol
        })
        .collect();
    let count = is.len() * js.len();
    let stride = if count <= 10_000 {
        1
    } else {
        ((count as f64 / 10_000.0).sqrt().ceil()) as usize
    };
    let is: Vec<usize> = is.into_iter().step_by(stride).collect();
    let js: Vec<usize> = js.into_iter().step_by(stride).collect();
    let (mi, mj) = (is.len(), js.len());
    let vals: Vec<f64> = js.iter().flat_map(|&j| is.iter().map(move |&i| (i, j))).map(|(i, j)| u.at(i, j)).collect();
    let dxs = g.hx * stride as f64;
    let dys = g.hy * stride as f64;
    let mut best = 0.0f64;
    // pairs sharing an offset share a distance; loop over offsets with (dj > 0) or (dj == 0, di > 0)
    for dj in 0..mj {
        let di_lo: isize = if dj == 0 { 1 } else { -(mi as isize - 1) };
        for di in di_lo..mi as isize {
            let dist = ((di as f64 * dxs).powi(2) + (dj as f64 * dys).powi(2)).sqrt();
            let inv = 1.0 / dist.powf(alpha);
            let mut m = 0.0f64;
            for b in 0..(mj - dj) {
                let row_a = b * mi;
                let row_b = (b + dj) * mi;
                let (a_lo, a_hi) = if di >= 0 { (0, mi - di as usize) } else { ((-di) as usize, mi) };
                for a in a_lo..a_hi {
                    let q = (vals[row_a + a] - vals[row_b + (a as isize + di) as usize]).abs();
                    if q > m {
                        m = q;
                    }
                }
            }
            best = best.max(m * inv);
        }
    }
    Ok(best)
}

/// Writes `x,y,value` rows (row-major, 17 significant digits).
pub fn write_field_csv(u: &ScalarField, path: &Path) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "x,y,value")?;
    let g = &u.grid;
    for j in 0..=g.ny {
        for i in 0..=g.nx {
            let p = g.node(i, j);
            writeln!(w, "{},{},{}", fmt17(p[0]), fmt17(p[1]), fmt17(u.at(i, j)))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// 17 significant digits in scientific notation.
pub fn fmt17(v: f64) -> String {
    format!("{:.16e}", v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spacing() {
        let g = make_grid(Rect::UNIT, (4, 4)).unwrap();
        assert_eq!((g.hx, g.hy), (0.25, 0.25));
        let g = make_grid(Rect::new(0.0, 2.0, 0.0, 1.0), (8, 4)).unwrap();
        assert_eq!((g.hx, g.hy), (0.25, 0.25));
        assert!(make_grid(Rect::UNIT, (2, 2)).is_err());
        assert!(make_grid(Rect::new(0.0, 0.0, 0.0, 1.0), (4, 4)).is_err());
    }

    #[test]
    fn affine_energies_exact() {
        let g = make_grid(Rect::UNIT, (4, 4)).unwrap();
        assert_eq!(dirichlet_energy(&ScalarField::from_fn(g, |_| 3.0)), 0.0);
        let e = dirichlet_energy(&ScalarField::from_fn(g, |p| p[0]));
        assert!((e - 1.0).abs() < 1e-14);
        let e = dirichlet_energy(&ScalarField::from_fn(g, |p| p[0] + 2.0 * p[1]));
        assert!((e - 5.0).abs() < 1e-13);
    }

    #[test]
    fn norms_and_products() {
        let g = make_grid(Rect::UNIT, (4, 4)).unwrap();
        assert!((l2_norm(&ScalarField::from_fn(g, |_| 1.0)) - 1.0).abs() < 1e-15);
        let t = PhaseTriple::from_fn(g, |_| [1.0, 1.0, 0.0]);
        assert!(product_field(&t).unwrap().values.iter().all(|&v| v == 0.0));
        let t = PhaseTriple::from_fn(g, |_| [2.0, 3.0, 4.0]);
        assert!(product_field(&t).unwrap().values.iter().all(|&v| v == 24.0));
        let g2 = make_grid(Rect::UNIT, (5, 5)).unwrap();
        let bad = PhaseTriple::new(ScalarField::zeros(g), ScalarField::zeros(g2), ScalarField::zeros(g));
        assert!(bad.is_err());
    }

    #[test]
    fn holder_preconditions() {
        let g = make_grid(Rect::UNIT, (16, 16)).unwrap();
        let u = ScalarField::from_fn(g, |p| p[0]);
        let k = Rect::new(0.25, 0.75, 0.25, 0.75);
        assert!(holder_quotient(&u, 1.0, k).is_err());
        assert!(holder_quotient(&u, 0.75, Rect::UNIT).is_err());
        let c = ScalarField::from_fn(g, |_| 2.0);
        assert_eq!(holder_quotient(&c, 0.75, k).unwrap(), 0.0);
    }

    #[test]
    fn pairwise_sum_matches_naive_on_integers() {
        let v: Vec<f64> = (0..1000).map(|k| k as f64).collect();
        assert_eq!(pairwise_sum(&v), 499500.0);
    }
}
