//! Minimal SVG output: field heatmaps, region maps and log-log plots.

use crate::field::ScalarField;
use crate::geometry::{RegionLabel, RegionMap};
use std::fmt::Write as _;

const MAX_CELLS: usize = 128;
const SIZE: f64 = 512.0;

// five-stop viridis approximation
fn colormap(t: f64) -> (u8, u8, u8) {
    const STOPS: [(f64, f64, f64); 5] = [
        (68.0, 1.0, 84.0),
        (59.0, 82.0, 139.0),
        (33.0, 145.0, 140.0),
        (94.0, 201.0, 98.0),
        (253.0, 231.0, 37.0),
    ];
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let x = t * 4.0;
    let i = (x.floor() as usize).min(3);
    let f = x - i as f64;
    let (a, b) = (STOPS[i], STOPS[i + 1]);
    let m = |p: f64, q: f64| (p + (q - p) * f).round() as u8;
    (m(a.0, b.0), m(a.1, b.1), m(a.2, b.2))
}

fn label_color(l: RegionLabel) -> &'static str {
    match l {
        RegionLabel::Pure1 => "#d62728",
        RegionLabel::Pure2 => "#2ca02c",
        RegionLabel::Pure3 => "#1f77b4",
        RegionLabel::Two12 => "#bcbd22",
        RegionLabel::Two13 => "#9467bd",
        RegionLabel::Two23 => "#17becf",
        RegionLabel::Zero => "#ffffff",
        RegionLabel::NearInterface(_) => "#7f7f7f",
        RegionLabel::NearJunction(_) => "#000000",
        RegionLabel::BoundaryLayer => "#c7c7c7",
        RegionLabel::ConstraintViolation => "#ff00ff",
    }
}

fn header(w: f64, h: f64) -> String {
    format!("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.0} {h:.0}\">\n")
}

// cells drawn on a coarsened lattice; each block shows the value at its lower-left node
fn lattice(nx: usize, ny: usize) -> (usize, usize, usize) {
    let stride = nx.max(ny).div_ceil(MAX_CELLS).max(1);
    (stride, nx.div_ceil(stride), ny.div_ceil(stride))
}

pub fn heatmap(u: &ScalarField, title: &str) -> String {
    let g = &u.grid;
    let (stride, cx, cy) = lattice(g.nx, g.ny);
    let lo = u.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = u.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let (cw, ch) = (SIZE / cx as f64, SIZE / cy as f64);
    let mut s = header(SIZE, SIZE + 24.0);
    let _ = writeln!(s, "<text x=\"4\" y=\"16\" font-size=\"13\" font-family=\"monospace\">{} [{:.4e}, {:.4e}]</text>", title, lo, hi);
    for bj in 0..cy {
        for bi in 0..cx {
            let v = u.at((bi * stride).min(g.nx), (bj * stride).min(g.ny));
            let (r, gr, b) = colormap((v - lo) / span);
            let y = 24.0 + SIZE - (bj + 1) as f64 * ch;
            let _ = writeln!(
                s,
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"#{:02x}{:02x}{:02x}\"/>",
                bi as f64 * cw,
                y,
                cw + 0.05,
                ch + 0.05,
                r,
                gr,
                b
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

pub fn region_map(rm: &RegionMap, title: &str) -> String {
    let g = &rm.grid;
    let (stride, cx, cy) = lattice(g.nx, g.ny);
    let (cw, ch) = (SIZE / cx as f64, SIZE / cy as f64);
    let mut s = header(SIZE, SIZE + 24.0);
    let _ = writeln!(s, "<text x=\"4\" y=\"16\" font-size=\"13\" font-family=\"monospace\">{title}</text>");
    for bj in 0..cy {
        for bi in 0..cx {
            let l = rm.labels[g.idx((bi * stride).min(g.nx), (bj * stride).min(g.ny))];
            let y = 24.0 + SIZE - (bj + 1) as f64 * ch;
            let _ = writeln!(
                s,
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/>",
                bi as f64 * cw,
                y,
                cw + 0.05,
                ch + 0.05,
                label_color(l)
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

/// Scatter of (x, y) with optional fitted line y = a + b x, in the coordinates given.
/// Callers pass log values; tick labels show 10^k.
pub fn xy_plot(title: &str, xlabel: &str, ylabel: &str, pts: &[(f64, f64)], line: Option<(f64, f64)>, log_axes: bool) -> String {
    let (w, h, m) = (560.0, 420.0, 60.0);
    let mut s = header(w, h);
    let _ = writeln!(s, "<text x=\"{m}\" y=\"20\" font-size=\"13\" font-family=\"monospace\">{title}</text>");
    let fin: Vec<(f64, f64)> = pts.iter().copied().filter(|(x, y)| x.is_finite() && y.is_finite()).collect();
    if fin.is_empty() {
        s.push_str("</svg>\n");
        return s;
    }
    let (mut x0, mut x1) = fin.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, p| (a.0.min(p.0), a.1.max(p.0)));
    let (mut y0, mut y1) = fin.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, p| (a.0.min(p.1), a.1.max(p.1)));
    if x1 - x0 < 1e-12 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 - y0 < 1e-12 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let px = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let py = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);
    let _ = writeln!(
        s,
        "<rect x=\"{m}\" y=\"{m}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#444\"/>",
        w - 2.0 * m,
        h - 2.0 * m
    );
    let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" font-size=\"12\" font-family=\"monospace\">{xlabel}</text>", w / 2.0 - 20.0, h - 15.0);
    let _ = writeln!(
        s,
        "<text x=\"14\" y=\"{}\" font-size=\"12\" font-family=\"monospace\" transform=\"rotate(-90 14 {})\">{ylabel}</text>",
        h / 2.0,
        h / 2.0
    );
    let tick = |v: f64| if log_axes { format!("{:.1e}", 10f64.powf(v / std::f64::consts::LN_10)) } else { format!("{v:.3}") };
    for (v, anchor) in [(x0, "start"), (x1, "end")] {
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"10\" text-anchor=\"{anchor}\" font-family=\"monospace\">{}</text>",
            px(v),
            h - m + 14.0,
            tick(v)
        );
    }
    for v in [y0, y1] {
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"10\" text-anchor=\"end\" font-family=\"monospace\">{}</text>",
            m - 4.0,
            py(v) + 3.0,
            tick(v)
        );
    }
    if let Some((a, b)) = line {
        let _ = writeln!(
            s,
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#d62728\" stroke-width=\"1.5\"/>",
            px(x0),
            py(a + b * x0),
            px(x1),
            py(a + b * x1)
        );
    }
    for (x, y) in fin {
        let _ = writeln!(s, "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3.5\" fill=\"#1f77b4\"/>", px(x), py(y));
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{make_grid, Rect};

    #[test]
    fn outputs_are_closed_svg() {
        let g = make_grid(Rect::UNIT, (300, 300)).unwrap();
        let u = ScalarField::from_fn(g, |p| p[0]);
        let s = heatmap(&u, "u1");
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
        assert_eq!(s.matches("<rect").count(), 100 * 100);
        let p = xy_plot("t", "x", "y", &[(0.0, 0.0), (1.0, 2.0)], Some((0.0, 2.0)), true);
        assert!(p.contains("<line") && p.matches("<circle").count() == 2);
        assert_eq!(colormap(0.0), (68, 1, 84));
        assert_eq!(colormap(1.0), (253, 231, 37));
    }
}
