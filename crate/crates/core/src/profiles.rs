//! One-dimensional and angular transition profiles.
//!
//! Two families: `SmoothTanh` uses `(1 ± tanh z)/2` steps, `CompactRamp`
//! replaces every tanh step by the mollifier ramp ρ of the same width, so
//! that profiles are exactly 0 or 1 outside their transition band.

use crate::error::{Result, SegError};
use crate::geometry::JunctionSpec;
use crate::quadrature;
use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProfileFamily {
    SmoothTanh,
    CompactRamp,
}

impl ProfileFamily {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "tanh" | "smooth_tanh" | "SmoothTanh" => Some(ProfileFamily::SmoothTanh),
            "ramp" | "compact_ramp" | "CompactRamp" => Some(ProfileFamily::CompactRamp),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ProfileFamily::SmoothTanh => "tanh",
            ProfileFamily::CompactRamp => "ramp",
        }
    }
}

pub fn h_plus(z: f64) -> f64 {
    0.5 * (1.0 + z.tanh())
}

pub fn h_minus(z: f64) -> f64 {
    0.5 * (1.0 - z.tanh())
}

pub fn psi_plus(z: f64) -> f64 {
    z.tanh().max(0.0)
}

pub fn psi_minus(z: f64) -> f64 {
    (-z.tanh()).max(0.0)
}

const RHO_NODES: usize = 48;

#[inline]
fn bump(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        (-1.0 / (t * (1.0 - t))).exp()
    }
}

// unnormalized integral of the bump over [0, t], 0 <= t <= 1/2
fn bump_integral(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    quadrature::integrate(bump, 0.0, t, RHO_NODES)
}

/// Normalizing constant `C` with `∫₀¹ η = 1`.
pub fn mollifier_constant() -> f64 {
    static C: OnceLock<f64> = OnceLock::new();
    *C.get_or_init(|| 1.0 / (2.0 * bump_integral(0.5)))
}

pub fn mollifier_eta(t: f64) -> f64 {
    mollifier_constant() * bump(t)
}

/// ρ(t) = ∫₀ᵗ η; evaluated on [0, 1/2] and reflected, so ρ(t) + ρ(1 − t) = 1.
pub fn ramp_rho(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else if t <= 0.5 {
        mollifier_constant() * bump_integral(t)
    } else {
        1.0 - mollifier_constant() * bump_integral(1.0 - t)
    }
}

/// Increasing step over `z ∈ [-1, 1]` (ramp) or `(1 + tanh z)/2` (tanh).
pub fn step_plus(family: ProfileFamily, z: f64) -> f64 {
    match family {
        ProfileFamily::SmoothTanh => h_plus(z),
        ProfileFamily::CompactRamp => ramp_rho(0.5 * (z + 1.0)),
    }
}

pub fn step_minus(family: ProfileFamily, z: f64) -> f64 {
    match family {
        ProfileFamily::SmoothTanh => h_minus(z),
        ProfileFamily::CompactRamp => ramp_rho(0.5 * (1.0 - z)),
    }
}

/// d/dz of `step_plus`.
pub fn step_plus_deriv(family: ProfileFamily, z: f64) -> f64 {
    match family {
        ProfileFamily::SmoothTanh => {
            let c = z.cosh();
            0.5 / (c * c)
        }
        ProfileFamily::CompactRamp => 0.5 * mollifier_eta(0.5 * (z + 1.0)),
    }
}

/// One-sided activation: ψ₊ for tanh, ρ(z) for ramp.
pub fn onset_plus(family: ProfileFamily, z: f64) -> f64 {
    match family {
        ProfileFamily::SmoothTanh => psi_plus(z),
        ProfileFamily::CompactRamp => ramp_rho(z),
    }
}

pub fn onset_minus(family: ProfileFamily, z: f64) -> f64 {
    onset_plus(family, -z)
}

fn layer_antiderivative(z: f64) -> f64 {
    let t = z.tanh();
    t - t * t * t / 3.0
}

/// ∫_a^b sech⁴(s/√ε) ds in closed form; infinite limits allowed.
pub fn sech4_layer_integral(a: f64, b: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0) || a > b || a.is_nan() || b.is_nan() {
        return Err(SegError::InvalidArgument(format!("need eps > 0 and a <= b, got a={a}, b={b}, eps={eps}")));
    }
    let se = eps.sqrt();
    Ok(se * (layer_antiderivative(b / se) - layer_antiderivative(a / se)))
}

fn ln_cosh(z: f64) -> f64 {
    let a = z.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

// antiderivative of z sech⁴ z; bounded, with limit (2/3) ln 2 - 1/6 at ±∞
fn moment_antiderivative(z: f64) -> f64 {
    if z.is_infinite() {
        return 2.0 / 3.0 * std::f64::consts::LN_2 - 1.0 / 6.0;
    }
    let t = z.tanh();
    z * layer_antiderivative(z) - 2.0 / 3.0 * ln_cosh(z) - t * t / 6.0
}

/// ∫_a^b s·sech⁴(s/√ε) ds in closed form.
pub fn sech4_first_moment(a: f64, b: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0) || a > b || a.is_nan() || b.is_nan() {
        return Err(SegError::InvalidArgument(format!("need eps > 0 and a <= b, got a={a}, b={b}, eps={eps}")));
    }
    let se = eps.sqrt();
    Ok(eps * (moment_antiderivative(b / se) - moment_antiderivative(a / se)))
}

/// Angle of `theta` relative to `start`, in a window centred on the sector
/// of width `width` (the complement is split at its midpoint).
pub fn sector_offset(theta: f64, start: f64, width: f64) -> f64 {
    let phi = (theta - start).rem_euclid(TAU);
    if phi <= width + 0.5 * (TAU - width) {
        phi
    } else {
        phi - TAU
    }
}

fn check_sectors(j: &JunctionSpec, eps: f64) -> Result<()> {
    if !(eps > 0.0) {
        return Err(SegError::InvalidArgument("eps must be positive".into()));
    }
    let limit = 4.0 * eps.sqrt();
    for w in j.alphas() {
        if w <= limit {
            return Err(SegError::DegenerateSector { width: w, limit });
        }
    }
    Ok(())
}

/// χ_k(θ) for sector `k` (0-based) and its θ-derivative.
pub fn angular_cutoff_with_derivative(
    k: usize,
    theta: f64,
    eps: f64,
    j: &JunctionSpec,
    family: ProfileFamily,
) -> Result<(f64, f64)> {
    check_sectors(j, eps)?;
    if k > 2 {
        return Err(SegError::InvalidArgument(format!("sector index {k} out of range")));
    }
    let se = eps.sqrt();
    let width = j.alphas()[k];
    let z = sector_offset(theta, j.starts()[k], width);
    let a = z / se;
    let b = (z - width) / se;
    let up = step_plus(family, a);
    let down = step_minus(family, b);
    let d = (step_plus_deriv(family, a) * down - up * step_plus_deriv(family, b)) / se;
    Ok((up * down, d))
}

pub fn angular_cutoff(k: usize, theta: f64, eps: f64, j: &JunctionSpec, family: ProfileFamily) -> Result<f64> {
    Ok(angular_cutoff_with_derivative(k, theta, eps, j, family)?.0)
}

/// (r / 2√ε)^δ, clamped to 1 for r ≥ 2√ε.
pub fn radial_regularizer(r: f64, eps: f64, delta: f64) -> Result<f64> {
    if !(delta >= 1.0) {
        return Err(SegError::InvalidArgument(format!("delta must be >= 1, got {delta}")));
    }
    if !(eps > 0.0) || r < 0.0 {
        return Err(SegError::InvalidArgument("need eps > 0 and r >= 0".into()));
    }
    let q = r / (2.0 * eps.sqrt());
    Ok(if q >= 1.0 { 1.0 } else { q.powf(delta) })
}

/// Leading term r^{3/4} sin(3θ/4 − 2(i−1)π/3), `i` in 1..=3, taken literally.
pub fn junction_profile(i: usize, r: f64, theta: f64) -> f64 {
    let shift = 2.0 * (i as f64 - 1.0) * PI / 3.0;
    r.powf(0.75) * (0.75 * theta - shift).sin()
}

pub fn junction_profile_plus(i: usize, r: f64, theta: f64) -> f64 {
    junction_profile(i, r, theta).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn steps_and_identities() {
        assert_eq!(h_plus(0.0), 0.5);
        for z in [-3.0, -1.0, 0.0, 1.0, 3.0] {
            assert!((h_plus(z) + h_minus(z) - 1.0).abs() < 1e-15);
        }
        assert_eq!(psi_plus(-2.0), 0.0);
        for z in [-1.0, 0.0, 1.0] {
            assert_eq!(psi_plus(z) * psi_minus(z), 0.0);
        }
        assert_eq!(ramp_rho(-0.5), 0.0);
        assert_eq!(ramp_rho(1.5), 1.0);
        assert!((ramp_rho(0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn regularizer_values() {
        let eps = 0.01;
        assert_eq!(radial_regularizer(0.0, eps, 1.0).unwrap(), 0.0);
        assert_eq!(radial_regularizer(0.2, eps, 1.0).unwrap(), 1.0);
        assert!((radial_regularizer(0.1, eps, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(radial_regularizer(0.1, eps, 0.5).is_err());
    }

    #[test]
    fn literal_junction_profile() {
        assert_eq!(junction_profile(1, 1.0, 0.0), 0.0);
        assert!((junction_profile(1, 1.0, 2.0 * PI / 3.0) - 1.0).abs() < 1e-15);
        assert!((junction_profile(2, 1.0, 2.0 * PI / 3.0) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn layer_integrals() {
        let v = sech4_layer_integral(f64::NEG_INFINITY, f64::INFINITY, 0.04).unwrap();
        assert!((v - 4.0 * 0.2 / 3.0).abs() < 1e-15);
        let v = sech4_layer_integral(0.0, f64::INFINITY, 0.04).unwrap();
        assert!((v - 2.0 * 0.2 / 3.0).abs() < 1e-15);
        let m = sech4_first_moment(f64::NEG_INFINITY, f64::INFINITY, 0.04).unwrap();
        assert_eq!(m, 0.0);
    }
}
