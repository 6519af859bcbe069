//! Mean-field amplitude of the driven cavity and its fixed points.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linearized::DriftDiffusion;
use crate::params::{MediumParams, Susceptibilities};

/// Coefficients of the mean-field amplitude equation
/// ∂ₜz = (g_lin + g_cubic|z|²) z − (C/2) z + a₀ e^{i(ω−ω_L)t}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AmplitudeCoefficients {
    /// (iκ₁ − κ₂)(f₁ˢ − f₂ˢ)
    pub g_lin: Complex64,
    /// (−iχ₁ + χ₂)(f₁ˢ − f₂ˢ)
    pub g_cubic: Complex64,
    pub half_c: f64,
    pub a0: f64,
    /// ω − ω_L
    pub omega_offset: f64,
}

impl AmplitudeCoefficients {
    /// Cold transparent medium: absorption (κ₂, χ₂) dropped.
    pub fn transparent(p: &MediumParams, s: &Susceptibilities) -> Self {
        let inv = p.f1s - p.f2s;
        AmplitudeCoefficients {
            g_lin: Complex64::new(0.0, s.kappa1() * inv),
            g_cubic: Complex64::new(0.0, -s.chi1_re() * inv),
            half_c: p.decay(),
            a0: p.a0,
            omega_offset: p.omega_offset,
        }
    }

    /// Full amplitude equation including absorption.
    pub fn with_absorption(p: &MediumParams, s: &Susceptibilities) -> Self {
        let inv = p.f1s - p.f2s;
        AmplitudeCoefficients {
            g_lin: Complex64::new(-s.kappa2(), s.kappa1()) * inv,
            g_cubic: Complex64::new(s.chi2(), -s.chi1_re()) * inv,
            half_c: p.decay(),
            a0: p.a0,
            omega_offset: p.omega_offset,
        }
    }

    /// Linear coefficient in the frame co-rotating with the drive,
    /// L(U) = g_lin + g_cubic U − C/2 − i(ω − ω_L).
    fn frame_rate(&self, u: f64) -> Complex64 {
        self.g_lin + self.g_cubic * u - self.half_c - Complex64::new(0.0, self.omega_offset)
    }
}

/// Right-hand side of the amplitude equation in the lab frame at time `t`.
pub fn amplitude_rhs(z: Complex64, c: &AmplitudeCoefficients, t: f64) -> Complex64 {
    let drive = Complex64::from_polar(c.a0, c.omega_offset * t);
    (c.g_lin + c.g_cubic * z.norm_sqr()) * z - c.half_c * z + drive
}

/// Right-hand side in the frame co-rotating with the drive (time independent).
pub fn amplitude_rhs_drive_frame(w: Complex64, c: &AmplitudeCoefficients) -> Complex64 {
    c.frame_rate(w.norm_sqr()) * w + c.a0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteadyState {
    /// Dimensionless intensity |z|².
    pub u: f64,
    /// arg z (radians).
    pub phi0: f64,
    pub z: Complex64,
    /// Linearly stable fixed point of the amplitude equation.
    pub stable: bool,
    /// Lowest branch: the one followed when the drive is ramped up from zero.
    pub reachable_from_dark: bool,
}

/// All fixed points of the amplitude equation in the drive frame, sorted by U.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteadyStates {
    pub roots: Vec<SteadyState>,
}

impl SteadyStates {
    pub fn is_bistable(&self) -> bool {
        self.roots.iter().filter(|r| r.stable).count() > 1
    }

    /// The branch reached from the dark cavity.
    pub fn primary(&self) -> &SteadyState {
        self.roots
            .iter()
            .find(|r| r.reachable_from_dark)
            .unwrap_or(&self.roots[0])
    }
}

/// Real roots of c3 x³ + c2 x² + c1 x + c0, each polished by Newton steps.
pub(crate) fn real_cubic_roots(c3: f64, c2: f64, c1: f64, c0: f64) -> Vec<f64> {
    let poly = |x: f64| ((c3 * x + c2) * x + c1) * x + c0;
    let dpoly = |x: f64| (3.0 * c3 * x + 2.0 * c2) * x + c1;
    let scale = c3.abs().max(c2.abs()).max(c1.abs()).max(c0.abs());
    let mut roots = Vec::with_capacity(3);
    if scale == 0.0 {
        return roots;
    }
    // Cardano needs c2/c3 etc. to stay representable when cubed.
    if c3 == 0.0 || c3.abs() < 1e-80 * scale {
        if c2 == 0.0 {
            if c1 != 0.0 {
                roots.push(-c0 / c1);
            }
        } else {
            let disc = c1 * c1 - 4.0 * c2 * c0;
            if disc >= 0.0 {
                let sgn = if c1 >= 0.0 { 1.0 } else { -1.0 };
                let q = -0.5 * (c1 + sgn * disc.sqrt());
                if q != 0.0 {
                    roots.push(q / c2);
                    roots.push(c0 / q);
                } else {
                    roots.push(0.0);
                }
            }
        }
    } else {
        let a = c2 / c3;
        let b = c1 / c3;
        let c = c0 / c3;
        let shift = a / 3.0;
        let p = b - a * a / 3.0;
        let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
        let disc = 0.25 * q * q + p * p * p / 27.0;
        if disc > 0.0 {
            let s = disc.sqrt();
            let big = if q > 0.0 { -0.5 * q - s } else { -0.5 * q + s };
            let u = big.cbrt();
            let t = if u != 0.0 { u - p / (3.0 * u) } else { 0.0 };
            roots.push(t - shift);
        } else if p == 0.0 {
            roots.push(-shift);
        } else {
            let r = 2.0 * (-p / 3.0).sqrt();
            let arg = (3.0 * q / (p * r)).clamp(-1.0, 1.0);
            let theta = arg.acos() / 3.0;
            for k in 0..3 {
                let t = r * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos();
                roots.push(t - shift);
            }
        }
    }
    for r in roots.iter_mut() {
        for _ in 0..8 {
            let d = dpoly(*r);
            if d == 0.0 {
                break;
            }
            let step = poly(*r) / d;
            *r -= step;
            if step.abs() <= 1e-16 * r.abs().max(1e-300) {
                break;
            }
        }
    }
    roots.retain(|r| r.is_finite());
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * a.abs().max(b.abs()));
    roots
}

/// Fixed points of the amplitude equation in the frame co-rotating with the
/// drive.
///
/// Eliminating the phase turns the two real fixed-point conditions into a
/// cubic in U, U[(a − bU)² + (c − dU)²] = a₀², solved in closed form and
/// polished with Newton steps. The amplitude then follows as z = −a₀/L(U).
pub fn steady_states(c: &AmplitudeCoefficients) -> Result<SteadyStates> {
    if c.a0 == 0.0 {
        let rate = c.frame_rate(0.0);
        return Ok(SteadyStates {
            roots: vec![SteadyState {
                u: 0.0,
                phi0: 0.0,
                z: Complex64::new(0.0, 0.0),
                stable: rate.re < 0.0,
                reachable_from_dark: true,
            }],
        });
    }
    // L(U) = −(a − bU) + i(c − dU)
    let l0 = c.frame_rate(0.0);
    let a = -l0.re;
    let cc = l0.im;
    let b = c.g_cubic.re;
    let d = -c.g_cubic.im;
    let a0sq = c.a0 * c.a0;
    let lin = a * a + cc * cc;
    if lin == 0.0 && b == 0.0 && d == 0.0 {
        return Err(Error::NoSteadyState("undamped resonant cavity with drive".into()));
    }
    // Work in v = U / U_lin when the linear term is present.
    let u_scale = if lin > 0.0 { a0sq / lin } else { (a0sq / (b * b + d * d)).cbrt() };
    let c3 = (b * b + d * d) * u_scale * u_scale * u_scale;
    let c2 = -2.0 * (a * b + cc * d) * u_scale * u_scale;
    let c1 = lin * u_scale;
    let c0 = -a0sq;
    let norm = c1.abs().max(c3.abs());
    let vs = real_cubic_roots(c3 / norm, c2 / norm, c1 / norm, c0 / norm);
    let mut roots: Vec<SteadyState> = vs
        .into_iter()
        .filter(|v| *v > 0.0)
        .map(|v| {
            let u = v * u_scale;
            let l = c.frame_rate(u);
            let z = -c.a0 / l;
            // Jacobian of F(w) = L(|w|²)w + a₀: P dw + Q dw̄
            let dl = c.g_cubic;
            let p = l + dl * u;
            let q = z * z * dl;
            let stable = p.re < 0.0 && p.norm_sqr() > q.norm_sqr();
            SteadyState { u, phi0: z.arg(), z, stable, reachable_from_dark: false }
        })
        .collect();
    if roots.is_empty() {
        return Err(Error::NoSteadyState("no real positive root of the intensity cubic".into()));
    }
    if let Some(first_stable) = roots.iter_mut().find(|r| r.stable) {
        first_stable.reachable_from_dark = true;
    }
    Ok(SteadyStates { roots })
}

/// Fixed points of the transparent cold medium, absorption neglected.
pub fn steady_state(p: &MediumParams, s: &Susceptibilities) -> Result<SteadyStates> {
    steady_states(&AmplitudeCoefficients::transparent(p, s))
}

/// Intensity of a linear medium, U = a₀²/(A² + κ₁²).
pub fn linear_intensity(a0: f64, decay: f64, kappa1: f64) -> f64 {
    a0 * a0 / (decay * decay + kappa1 * kappa1)
}

/// Output power relative to the injected power:
/// P/P₀ = 1/(1+t²) · 4ε/(1+ε)², with t = 2κ₁/C and ε = T_in/T_out.
pub fn power_ratio(t: f64, eps: f64) -> f64 {
    1.0 / (1.0 + t * t) * 4.0 * eps / ((1.0 + eps) * (1.0 + eps))
}

/// Ω² = −A₁₂A₂₁, signed.
pub fn oscillation_frequency(dd: &DriftDiffusion) -> f64 {
    -dd.a12 * dd.a21
}
