//! Flat sectioned `key = value` configuration.
//!
//! ```text
//! # comment
//! [grid]
//! n = 128
//! [data]
//! preset = three_sector
//! [eps]
//! values = 1e-1, 1e-2
//! ```

use crate::error::{Result, SegError};
use crate::field::Rect;
use crate::presets::Preset;
use crate::profiles::ProfileFamily;
use crate::solver::{InitStrategy, Method, Ordering, SolverConfig};
use std::collections::BTreeMap;
use std::path::PathBuf;

/// Raw parsed entries: (section, key) → (value, line).
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    pub entries: BTreeMap<(String, String), (String, usize)>,
}

const KNOWN: &[(&str, &[&str])] = &[
    ("grid", &["n", "extent"]),
    ("data", &["preset", "phi1", "phi2", "phi3"]),
    ("eps", &["values"]),
    ("solver", &["method", "ordering", "omega", "tol_residual", "max_iter", "init", "check_every", "both_inits"]),
    ("recovery", &["delta", "family", "band_factor"]),
    ("sweep", &["experiment", "deltas"]),
    ("report", &["records"]),
    ("output", &["dir", "timings"]),
];

pub fn parse_raw(text: &str) -> Result<RawConfig> {
    let mut section = String::new();
    let mut raw = RawConfig::default();
    for (ln, line) in text.lines().enumerate() {
        let line_no = ln + 1;
        let l = line.split('#').next().unwrap_or("").trim();
        if l.is_empty() {
            continue;
        }
        if l.starts_with('[') {
            if !l.ends_with(']') || l.len() < 3 {
                return Err(SegError::Config { line: line_no, key: l.into(), msg: "malformed section header".into() });
            }
            section = l[1..l.len() - 1].trim().to_string();
            if !KNOWN.iter().any(|(s, _)| *s == section) {
                return Err(SegError::Config { line: line_no, key: section, msg: "unknown section".into() });
            }
            continue;
        }
        let (k, v) = l
            .split_once('=')
            .ok_or_else(|| SegError::Config { line: line_no, key: l.into(), msg: "expected key = value".into() })?;
        let (k, v) = (k.trim().to_string(), v.trim().to_string());
        if section.is_empty() {
            return Err(SegError::Config { line: line_no, key: k, msg: "key outside of any section".into() });
        }
        let allowed = KNOWN.iter().find(|(s, _)| *s == section).map(|(_, ks)| *ks).unwrap_or(&[]);
        if !allowed.contains(&k.as_str()) {
            return Err(SegError::Config { line: line_no, key: format!("{section}.{k}"), msg: "unknown key".into() });
        }
        if raw.entries.insert((section.clone(), k.clone()), (v, line_no)).is_some() {
            return Err(SegError::Config { line: line_no, key: format!("{section}.{k}"), msg: "duplicate key".into() });
        }
    }
    Ok(raw)
}

impl RawConfig {
    pub fn get(&self, section: &str, key: &str) -> Option<(&str, usize)> {
        self.entries.get(&(section.to_string(), key.to_string())).map(|(v, l)| (v.as_str(), *l))
    }

    fn err(&self, section: &str, key: &str, msg: impl Into<String>) -> SegError {
        let line = self.get(section, key).map(|(_, l)| l).unwrap_or(0);
        SegError::Config { line, key: format!("{section}.{key}"), msg: msg.into() }
    }

    fn parse_f64(&self, section: &str, key: &str) -> Result<Option<f64>> {
        match self.get(section, key) {
            None => Ok(None),
            Some((v, _)) => v.parse::<f64>().map(Some).map_err(|_| self.err(section, key, format!("not a number: '{v}'"))),
        }
    }

    fn parse_usize(&self, section: &str, key: &str) -> Result<Option<usize>> {
        match self.get(section, key) {
            None => Ok(None),
            Some((v, _)) => v.parse::<usize>().map(Some).map_err(|_| self.err(section, key, format!("not a non-negative integer: '{v}'"))),
        }
    }

    fn parse_list(&self, section: &str, key: &str) -> Result<Option<Vec<f64>>> {
        match self.get(section, key) {
            None => Ok(None),
            Some((v, _)) => parse_f64_list(v).map(Some).map_err(|m| self.err(section, key, m)),
        }
    }
}

pub fn parse_f64_list(v: &str) -> std::result::Result<Vec<f64>, String> {
    v.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| format!("not a number: '{s}'")))
        .collect()
}

/// One summand of a custom trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TracePiece {
    /// amp·sin(π(θ − start)/width)₊ on the polar arc [start, start + width] (degrees) around the domain centre.
    Arc { start_deg: f64, width_deg: f64, amp: f64 },
    /// (a + b x + c y)₊.
    Affine { a: f64, b: f64, c: f64 },
}

impl TracePiece {
    pub fn eval(&self, x: [f64; 2], centre: [f64; 2]) -> f64 {
        match *self {
            TracePiece::Arc { start_deg, width_deg, amp } => {
                let th = (x[1] - centre[1]).atan2(x[0] - centre[0]);
                let phi = (th - start_deg.to_radians()).rem_euclid(std::f64::consts::TAU);
                let w = width_deg.to_radians();
                if phi > 0.0 && phi < w {
                    amp * (std::f64::consts::PI * phi / w).sin()
                } else {
                    0.0
                }
            }
            TracePiece::Affine { a, b, c } => (a + b * x[0] + c * x[1]).max(0.0),
        }
    }
}

fn parse_trace(v: &str) -> std::result::Result<Vec<TracePiece>, String> {
    let mut out = Vec::new();
    for piece in v.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let mut it = piece.split_whitespace();
        let kind = it.next().unwrap_or("");
        let nums: Vec<f64> = it.map(|s| s.parse::<f64>().map_err(|_| format!("not a number: '{s}'"))).collect::<std::result::Result<_, _>>()?;
        match (kind, nums.len()) {
            ("arc", 3) => {
                if !(nums[1] > 0.0 && nums[1] <= 360.0) {
                    return Err("arc width must lie in (0, 360]".into());
                }
                out.push(TracePiece::Arc { start_deg: nums[0], width_deg: nums[1], amp: nums[2] })
            }
            ("affine", 3) => out.push(TracePiece::Affine { a: nums[0], b: nums[1], c: nums[2] }),
            ("zero", 0) => {}
            _ => return Err(format!("expected 'arc start width amp', 'affine a b c' or 'zero', got '{piece}'")),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Preset(Preset),
    Traces { extent: Rect, pieces: [Vec<TracePiece>; 3] },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    PenaltyDecay,
    JunctionScaling,
    Recovery,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub data: DataSource,
    pub eps: Vec<f64>,
    pub solver: SolverConfig,
    pub both_inits: bool,
    pub delta: f64,
    pub family: ProfileFamily,
    pub band_factor: f64,
    pub experiment: ExperimentKind,
    pub deltas: Vec<f64>,
    pub records: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub timings: bool,
}

impl RunConfig {
    pub fn from_text(text: &str) -> Result<RunConfig> {
        let raw = parse_raw(text)?;
        let n = raw.parse_usize("grid", "n")?.unwrap_or(128);
        if n < 3 {
            return Err(raw.err("grid", "n", "need at least 3 cells per side"));
        }
        let preset = match raw.get("data", "preset") {
            Some((v, _)) => Some(Preset::parse(v).map_err(|e| raw.err("data", "preset", e.to_string()))?),
            None => None,
        };
        let has_traces = ["phi1", "phi2", "phi3"].iter().any(|k| raw.get("data", k).is_some());
        let data = match (preset, has_traces) {
            (Some(_), true) => return Err(raw.err("data", "preset", "give either a preset or phi1..phi3, not both")),
            (Some(p), false) => {
                if raw.get("grid", "extent").is_some() {
                    return Err(raw.err("grid", "extent", "extent is fixed by the preset"));
                }
                DataSource::Preset(p)
            }
            (None, true) => {
                let extent = match raw.parse_list("grid", "extent")? {
                    None => Rect::UNIT,
                    Some(v) if v.len() == 4 && v[1] > v[0] && v[3] > v[2] => Rect::new(v[0], v[1], v[2], v[3]),
                    Some(_) => return Err(raw.err("grid", "extent", "expected x0 x1 y0 y1 with x0 < x1, y0 < y1")),
                };
                let mut pieces: [Vec<TracePiece>; 3] = Default::default();
                for (c, key) in ["phi1", "phi2", "phi3"].iter().enumerate() {
                    if let Some((v, _)) = raw.get("data", key) {
                        pieces[c] = parse_trace(v).map_err(|m| raw.err("data", key, m))?;
                    }
                }
                DataSource::Traces { extent, pieces }
            }
            (None, false) => DataSource::Preset(Preset::TwoPhaseLinear),
        };
        let eps = raw.parse_list("eps", "values")?.unwrap_or_else(|| vec![1e-2]);
        if eps.is_empty() || eps.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return Err(raw.err("eps", "values", "eps values must be positive and finite"));
        }
        let mut solver = SolverConfig::default();
        if let Some((v, _)) = raw.get("solver", "method") {
            solver.method = match v {
                "gauss_seidel" | "nonlinear_gauss_seidel" => Method::NonlinearGaussSeidel,
                "projected_gradient" => Method::ProjectedGradient,
                _ => return Err(raw.err("solver", "method", format!("unknown method '{v}'"))),
            };
        }
        if let Some((v, _)) = raw.get("solver", "ordering") {
            solver.ordering = match v {
                "lexicographic" => Ordering::Lexicographic,
                "red_black" => Ordering::RedBlack,
                _ => return Err(raw.err("solver", "ordering", format!("unknown ordering '{v}'"))),
            };
        }
        if let Some((v, _)) = raw.get("solver", "omega") {
            solver.omega = if v == "auto" {
                None
            } else {
                let w = raw.parse_f64("solver", "omega")?.unwrap_or(1.0);
                if !(w > 0.0 && w < 2.0) {
                    return Err(raw.err("solver", "omega", "omega must lie in (0, 2) or be 'auto'"));
                }
                Some(w)
            };
        }
        if let Some(t) = raw.parse_f64("solver", "tol_residual")? {
            if !(t > 0.0) {
                return Err(raw.err("solver", "tol_residual", "must be positive"));
            }
            solver.tol_residual = t;
        }
        if let Some(m) = raw.parse_usize("solver", "max_iter")? {
            if m == 0 {
                return Err(raw.err("solver", "max_iter", "must be at least 1"));
            }
            solver.max_iter = m;
        }
        if let Some(m) = raw.parse_usize("solver", "check_every")? {
            if m == 0 {
                return Err(raw.err("solver", "check_every", "must be at least 1"));
            }
            solver.check_every = m;
        }
        if let Some((v, _)) = raw.get("solver", "init") {
            solver.init = match v {
                "harmonic" => InitStrategy::HarmonicExtension,
                "zero" => InitStrategy::Zero,
                _ => return Err(raw.err("solver", "init", format!("unknown init '{v}'"))),
            };
        }
        let both_inits = parse_bool(&raw, "solver", "both_inits")?.unwrap_or(false);
        let delta = raw.parse_f64("recovery", "delta")?.unwrap_or(1.0);
        if !(delta >= 1.0) {
            return Err(raw.err("recovery", "delta", "delta must be >= 1"));
        }
        let family = match raw.get("recovery", "family") {
            Some((v, _)) => ProfileFamily::parse(v).ok_or_else(|| raw.err("recovery", "family", format!("unknown family '{v}'")))?,
            None => ProfileFamily::CompactRamp,
        };
        let band_factor = raw.parse_f64("recovery", "band_factor")?.unwrap_or(1.0);
        if !(band_factor > 0.0) {
            return Err(raw.err("recovery", "band_factor", "must be positive"));
        }
        let experiment = match raw.get("sweep", "experiment") {
            None | Some(("penalty_decay", _)) => ExperimentKind::PenaltyDecay,
            Some(("junction_scaling", _)) => ExperimentKind::JunctionScaling,
            Some(("recovery", _)) => ExperimentKind::Recovery,
            Some((v, _)) => return Err(raw.err("sweep", "experiment", format!("unknown experiment '{v}'"))),
        };
        let deltas = raw.parse_list("sweep", "deltas")?.unwrap_or_else(|| vec![delta]);
        if deltas.is_empty() || deltas.iter().any(|d| !(*d >= 1.0)) {
            return Err(raw.err("sweep", "deltas", "every delta must be >= 1"));
        }
        let records = raw.get("report", "records").map(|(v, _)| PathBuf::from(v));
        let out_dir = raw.get("output", "dir").map(|(v, _)| PathBuf::from(v)).unwrap_or_else(|| PathBuf::from("out"));
        let timings = parse_bool(&raw, "output", "timings")?.unwrap_or(true);
        Ok(RunConfig {
            n,
            data,
            eps,
            solver,
            both_inits,
            delta,
            family,
            band_factor,
            experiment,
            deltas,
            records,
            out_dir,
            timings,
        })
    }
}

fn parse_bool(raw: &RawConfig, section: &str, key: &str) -> Result<Option<bool>> {
    match raw.get(section, key) {
        None => Ok(None),
        Some(("true", _)) => Ok(Some(true)),
        Some(("false", _)) => Ok(Some(false)),
        Some((v, _)) => Err(raw.err(section, key, format!("expected true or false, got '{v}'"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections() {
        let c = RunConfig::from_text("# demo\n[grid]\nn = 64\n[data]\npreset = three_sector\n[eps]\nvalues = 1e-1, 3e-2\n[solver]\nomega = auto\n").unwrap();
        assert_eq!(c.n, 64);
        assert_eq!(c.data, DataSource::Preset(Preset::ThreeSector));
        assert_eq!(c.eps, vec![1e-1, 3e-2]);
        assert_eq!(c.solver.omega, None);
    }

    #[test]
    fn diagnostics_name_line_and_key() {
        match RunConfig::from_text("[grid]\nn = 64\n\n[solver]\nmax_iter = lots\n") {
            Err(SegError::Config { line, key, .. }) => {
                assert_eq!(line, 5);
                assert_eq!(key, "solver.max_iter");
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_raw("n = 3"), Err(SegError::Config { line: 1, .. })));
        assert!(matches!(parse_raw("[grid]\nfoo = 1"), Err(SegError::Config { line: 2, .. })));
        assert!(matches!(parse_raw("[nope]"), Err(SegError::Config { line: 1, .. })));
    }

    #[test]
    fn custom_traces() {
        let c = RunConfig::from_text("[grid]\nextent = -1 1 -1 1\n[data]\nphi1 = arc 0 180 1\nphi2 = arc 180 180 2; affine 0 0 0\n").unwrap();
        match c.data {
            DataSource::Traces { extent, pieces } => {
                assert_eq!(extent, Rect::new(-1.0, 1.0, -1.0, 1.0));
                assert_eq!(pieces[0].len(), 1);
                assert_eq!(pieces[1].len(), 2);
                assert!(pieces[2].is_empty());
                assert!((pieces[0][0].eval([0.0, 1.0], [0.0, 0.0]) - 1.0).abs() < 1e-15);
            }
            _ => panic!(),
        }
    }
}
