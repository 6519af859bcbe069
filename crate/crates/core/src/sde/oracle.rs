use serde::Serialize;

use super::{c, inverse, mat_mul, transpose, LinearSDE, Mat2, SdeModel, Vec2, C64};
use crate::error::{Error, Result};
use crate::invfree::{InvFreeCoeffs, SteadyMoments};

/// Stationary spectrum of y = wᵀx for a linear system,
/// S(ω) = wᵀ(−iω − M)⁻¹ Q (iω − Mᵀ)⁻¹ w, without a 1/2π factor so that
/// ∫S dω = 2π Var y. Multiply by 2C_out for shot-noise units.
pub fn ou_spectrum_oracle(sde: &LinearSDE, omega: &[f64], weights: &Vec2) -> Result<Vec<f64>> {
    if !sde.is_stable() {
        return Err(Error::Unstable("spectrum of an undamped linear system".into()));
    }
    omega
        .iter()
        .map(|&w| {
            let iw = C64::new(0.0, w);
            let shift = |s: C64| {
                let mut m = sde.drift;
                for (i, row) in m.iter_mut().enumerate() {
                    for (j, x) in row.iter_mut().enumerate() {
                        *x = if i == j { s - *x } else { -*x };
                    }
                }
                m
            };
            let left = inverse(&shift(-iw)).ok_or_else(|| Error::Domain(format!("singular resolvent at {w}")))?;
            let right = inverse(&transpose(&shift(iw))).ok_or_else(|| Error::Domain(format!("singular resolvent at {w}")))?;
            let s = mat_mul(&mat_mul(&left, &sde.diffusion), &right);
            let mut y = c(0.0);
            for i in 0..2 {
                for j in 0..2 {
                    y += weights[i] * s[i][j] * weights[j];
                }
            }
            Ok(y.re)
        })
        .collect()
}

/// Settings for the moment integrators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleOptions {
    /// Integration horizon; `None` means 400 slowest relaxation times.
    pub t_max: Option<f64>,
    /// Stop once |d(state)/dt| / (rate · |state|) falls below this.
    pub tol: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions { t_max: None, tol: 1e-12 }
    }
}

/// Stationary mean and covariance ⟨x xᵀ⟩ − ⟨x⟩⟨x⟩ᵀ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearMoments {
    pub mean: Vec2,
    pub cov: Mat2,
    /// Time at which the integration settled.
    pub t: f64,
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Classical RK4 from zero until the derivative vanishes.
fn settle(
    dim: usize,
    fastest: f64,
    slowest: f64,
    opts: &OracleOptions,
    rhs: impl Fn(&[C64], &mut [C64]),
) -> Result<(Vec<C64>, f64)> {
    if !(slowest > 0.0) {
        return Err(Error::Unstable(format!("slowest moment rate {slowest:.4e} is not damped")));
    }
    let h = 0.25 / fastest;
    let t_max = opts.t_max.unwrap_or(400.0 / slowest);
    let mut y = vec![c(0.0); dim];
    let mut k = vec![vec![c(0.0); dim]; 4];
    let mut tmp = vec![c(0.0); dim];
    let mut t = 0.0;
    let mut residual = f64::INFINITY;
    while t < t_max {
        rhs(&y, &mut k[0]);
        residual = norm(&k[0]) / (slowest * norm(&y).max(f64::MIN_POSITIVE));
        if t > 0.0 && residual < opts.tol {
            return Ok((y, t));
        }
        for stage in 1..4 {
            let f = if stage == 3 { h } else { 0.5 * h };
            for i in 0..dim {
                tmp[i] = y[i] + f * k[stage - 1][i];
            }
            rhs(&tmp, &mut k[stage]);
        }
        for i in 0..dim {
            y[i] += h / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
        }
        t += h;
    }
    Err(Error::NoConvergence { t_max, residual })
}

/// Integrates dm/dt = Mm + drive and dΣ/dt = MΣ + ΣMᵀ + Q to stationarity.
pub fn linear_moment_oracle(sde: &LinearSDE, opts: &OracleOptions) -> Result<LinearMoments> {
    let m = sde.drift;
    let q = sde.diffusion;
    let drive = sde.drive;
    let fastest = 2.0 * sde.max_rate().max(f64::MIN_POSITIVE);
    let (y, t) = settle(6, fastest, sde.slowest_decay(), opts, |y, out| {
        for i in 0..2 {
            out[i] = m[i][0] * y[0] + m[i][1] * y[1] + drive[i];
        }
        let s = [[y[2], y[3]], [y[4], y[5]]];
        for i in 0..2 {
            for j in 0..2 {
                let mut v = q[i][j];
                for l in 0..2 {
                    v += m[i][l] * s[l][j] + s[i][l] * m[j][l];
                }
                out[2 + 2 * i + j] = v;
            }
        }
    })?;
    Ok(LinearMoments { mean: [y[0], y[1]], cov: [[y[2], y[3]], [y[4], y[5]]], t })
}

/// Moments of the inversion-free equation from its exact low-order moment
/// equations, integrated to stationarity:
/// d⟨α⟩ = k⟨α⟩ + a₀, d⟨α²⟩ = 2(k + Λ_αα)⟨α²⟩ + 2a₀⟨α⟩,
/// d⟨n⟩ = 2(Re k + Λ_αα*)⟨n⟩ + 2a₀ Re⟨α⟩ + 2b.
pub fn invfree_moment_oracle(cf: &InvFreeCoeffs, theta: f64, opts: &OracleOptions) -> Result<SteadyMoments> {
    let k = cf.k;
    let lam = cf.lam_aa;
    let rates = [k, 2.0 * (k + lam), c(2.0 * (k.re + cf.lam_aas))];
    let fastest = rates.iter().map(|r| r.norm()).fold(0.0, f64::max);
    let slowest = rates.iter().map(|r| -r.re).fold(f64::INFINITY, f64::min);
    let a0 = cf.a0;
    let (y, _) = settle(3, fastest, slowest, opts, |y, out| {
        out[0] = k * y[0] + a0;
        out[1] = 2.0 * (k + lam) * y[1] + 2.0 * a0 * y[0];
        out[2] = c(2.0 * (k.re + cf.lam_aas) * y[2].re + 2.0 * a0 * y[0].re + 2.0 * cf.b);
    })?;
    let mean_alpha = y[0];
    let var = y[1] - mean_alpha * mean_alpha;
    Ok(SteadyMoments {
        mean_alpha,
        mean_n: y[2].re,
        s: y[2].re - mean_alpha.norm_sqr(),
        mu: C64::from_polar(1.0, -2.0 * theta) * var,
        theta,
    })
}
