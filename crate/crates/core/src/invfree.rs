//! Cavity field driven through a medium with equal working-level populations.
//!
//! The medium has no linear gain or loss, but its cubic response damps the
//! field and feeds a spontaneous-emission-like source. The quasi-probability
//! equation is linear in α, so all first and second moments are exact.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linearized::DriftDiffusion;
use crate::params::{MediumParams, Model, ModelInputs, Susceptibilities};

/// Coefficients of the full quasi-probability equation for an inversion-free
/// medium, each standing in front of its derivative operator (the complex
/// conjugate terms are implied).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactFpeCoeffs {
    /// ∂_α α
    pub drift: Complex64,
    /// ∂²_αα α²
    pub diff_aa: Complex64,
    /// ∂²_αα*, intensity-independent part
    pub diff_aas_const: f64,
    /// ∂²_αα* |α|²
    pub diff_aas_intensity: f64,
    /// ∂³_α*αα α
    pub third: Complex64,
    /// ∂⁴_ααα*α*
    pub fourth: f64,
}

/// Full coefficient set at population f₀ per level.
pub fn exact_fpe_coeffs(p: &MediumParams, s: &Susceptibilities, f0: f64) -> ExactFpeCoeffs {
    let x = p.x();
    let chi2 = s.chi2();
    let kappa2 = s.kappa2();
    let gsum = p.gamma1 + p.gamma2;
    let asym = (p.gamma2 - p.gamma1) / gsum;
    let half = 0.5 * f0;
    ExactFpeCoeffs {
        drift: half * chi2 * Complex64::new(3.0 + x * x, -2.0 * x),
        diff_aa: Complex64::new(-half * chi2 * chi2 * (1.0 + x * x), 0.0),
        diff_aas_const: half
            * (2.0 * kappa2 + chi2 * (-1.0 + (2.0 * f0 * (p.gamma2 - p.gamma1) - p.gamma2) / gsum)),
        diff_aas_intensity: half * chi2 * (x * x - 1.0),
        third: half * 2.0 * chi2 * Complex64::new(1.0 - f0 * asym, x * (f0 - 1.0) * asym),
        fourth: half * 2.0 * chi2 * f0 * p.gamma1 / gsum,
    }
}

/// Coefficients of the solvable equation
/// ∂ₜP = [−∂_α(kα + a₀) + ∂²_αα α²Λ_αα + ∂²_αα*(b + |α|²Λ_αα*) + c.c.] P.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InvFreeCoeffs {
    pub k: Complex64,
    pub lam_aa: Complex64,
    pub lam_aas: f64,
    pub b: f64,
    pub a0: f64,
}

impl InvFreeCoeffs {
    /// Checks Re k < 0, Re k + Λ_αα* < 0 and Re(k + Λ_αα) < 0, naming the
    /// first one that fails.
    pub fn check_stability(&self) -> Result<()> {
        let checks = [
            ("Re k < 0", self.k.re),
            ("Re k + Lam_aas < 0", self.k.re + self.lam_aas),
            ("Re(k + Lam_aa) < 0", (self.k + self.lam_aa).re),
        ];
        for (inequality, value) in checks {
            if !(value < 0.0) {
                return Err(Error::Stability { inequality, value });
            }
        }
        Ok(())
    }

    /// Resonantly driven medium with real k, in the notation q₀ = 2f₀κ₂/C.
    ///
    /// `b` keeps its exact factor (1 − 3β/4).
    pub fn from_resonant(q0: f64, beta: f64, x: f64, a0: f64, c: f64) -> Self {
        let bq = beta * q0;
        InvFreeCoeffs {
            k: Complex64::new(-0.5 * c * (1.0 + 0.5 * bq * (3.0 + x * x)), 0.0),
            lam_aa: Complex64::new(-0.25 * c * bq * (1.0 + x * x), 0.0),
            lam_aas: 0.25 * c * bq * (x * x - 1.0),
            b: 0.5 * c * q0 * (1.0 - 0.75 * beta),
            a0,
        }
    }
}

/// Frequency of the injected signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum DriveTuning {
    /// ω_L equal to the mode frequency pulled by the medium: k is real.
    ShiftedResonance,
    /// Explicit ω − ω_L (rad/s).
    Offset(f64),
}

/// Solvable equation for population f₀ per level, with Γ₁ = Γ₂.
pub fn approx_fpe_coeffs(
    p: &MediumParams,
    s: &Susceptibilities,
    f0: f64,
    drive: DriveTuning,
) -> Result<InvFreeCoeffs> {
    if (p.gamma1 - p.gamma2).abs() > 1e-12 * (p.gamma1 + p.gamma2) {
        return Err(Error::Domain("the approximate equation assumes equal level decay rates".into()));
    }
    if !(f0 > 0.0 && f0 <= 1.0) {
        return Err(Error::InvalidParameter { name: "f0", reason: format!("{f0} outside (0, 1]") });
    }
    let x = p.x();
    let chi2 = s.chi2();
    let pulling = f0 * chi2 * x;
    let offset = match drive {
        DriveTuning::ShiftedResonance => pulling,
        DriveTuning::Offset(w) => w,
    };
    let c = InvFreeCoeffs {
        k: Complex64::new(-p.decay() - 0.5 * f0 * chi2 * (3.0 + x * x), pulling - offset),
        lam_aa: Complex64::new(-0.5 * f0 * chi2 * (1.0 + x * x), 0.0),
        lam_aas: 0.5 * f0 * chi2 * (x * x - 1.0),
        b: f0 * s.kappa2() - 0.75 * f0 * chi2,
        a0: p.a0,
    };
    c.check_stability()?;
    Ok(c)
}

/// Weak-saturation form of the two-level models in the same parameterization.
///
/// `f1s` is the lower-level population (1 for the multi-atom model).
pub fn small_beta_reduction(model: Model, m: &ModelInputs, f1s: f64, a0: f64) -> Result<InvFreeCoeffs> {
    let (fc, x) = match model {
        Model::Hm => (m.fc, 0.0),
        Model::Slm => (1.0, m.x),
        Model::Eha => return Err(Error::Domain("the Kerr-Hamiltonian model has no medium diffusion of this form".into())),
    };
    let chi1 = m.chi1;
    Ok(InvFreeCoeffs {
        k: Complex64::new(-m.decay(), m.kappa1),
        lam_aa: Complex64::new(-chi1 * x / 4.0, -0.5 * chi1 * fc) * f1s,
        lam_aas: f1s * x * chi1 / 4.0,
        b: 0.0,
        a0,
    })
}

/// Linearization around the mean field ⟨α⟩ = √U e^{iφ₀}: intensity
/// fluctuation ε and phase fluctuation ψ.
pub fn linearize(c: &InvFreeCoeffs, u: f64) -> DriftDiffusion {
    DriftDiffusion {
        a: -c.k.re,
        a12: -2.0 * u * c.k.im,
        a21: c.k.im / (2.0 * u),
        d_ee: 4.0 * u * u * (c.lam_aa.re + c.lam_aas) + 4.0 * u * c.b,
        d_ep: 2.0 * u * c.lam_aa.im,
        d_pp: -c.lam_aa.re + (c.b + u * c.lam_aas) / u,
    }
}

/// Stationary first and second moments of the P-distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteadyMoments {
    pub mean_alpha: Complex64,
    /// ⟨|α|²⟩
    pub mean_n: f64,
    /// ⟨|α|²⟩ − |⟨α⟩|²; may be negative for nonclassical light.
    pub s: f64,
    /// e^{−2iΘ}(⟨α²⟩ − ⟨α⟩²)
    pub mu: Complex64,
    /// Local-oscillator phase μ refers to.
    pub theta: f64,
}

impl SteadyMoments {
    /// μ re-referenced to another local-oscillator phase.
    pub fn mu_at(&self, theta: f64) -> Complex64 {
        self.mu * Complex64::from_polar(1.0, -2.0 * (theta - self.theta))
    }
}

pub fn steady_moments(c: &InvFreeCoeffs, theta: f64) -> Result<SteadyMoments> {
    c.check_stability()?;
    let k = c.k;
    let mean_alpha = -c.a0 / k;
    let two_re_k = 2.0 * k.re;
    let kk = k.norm_sqr();
    let a0sq = c.a0 * c.a0;
    let den = two_re_k + 2.0 * c.lam_aas;
    let mean_n = (a0sq / kk * two_re_k - 2.0 * c.b) / den;
    let s = -2.0 * (a0sq / kk * c.lam_aas + c.b) / den;
    let var = -a0sq * c.lam_aa / (k * k * (k + c.lam_aa));
    let mu = Complex64::from_polar(1.0, -2.0 * theta) * var;
    Ok(SteadyMoments { mean_alpha, mean_n, s, mu, theta })
}

/// Quadrature noise spectrum Y(ω, Θ) of the intracavity field, `omega` in
/// rad/s relative to the carrier.
pub fn spectrum_y(c: &InvFreeCoeffs, m: &SteadyMoments, omega: f64, theta: f64) -> f64 {
    let a = -c.k.re;
    let t = c.k.im / a;
    let wb2 = (omega / a) * (omega / a);
    let mu = m.mu_at(theta);
    let v = wb2 + 1.0 - t * t;
    let den = v * v + 4.0 * t * t;
    4.0 / a / den * ((m.s + mu.re) * (1.0 + wb2 + t * t) + t * mu.im * (wb2 - 1.0 - t * t))
}

/// Phases of extremal Y at frequency `omega`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct YExtrema {
    pub theta_min: f64,
    pub y_min: f64,
    pub y_max: f64,
}

pub fn spectrum_y_extrema(c: &InvFreeCoeffs, m: &SteadyMoments, omega: f64) -> YExtrema {
    // Y(Θ) = mean + p cos 2Θ + q sin 2Θ
    let y0 = spectrum_y(c, m, omega, 0.0);
    let y90 = spectrum_y(c, m, omega, std::f64::consts::FRAC_PI_2);
    let y45 = spectrum_y(c, m, omega, std::f64::consts::FRAC_PI_4);
    let mean = 0.5 * (y0 + y90);
    let p = 0.5 * (y0 - y90);
    let q = y45 - mean;
    let amp = p.hypot(q);
    YExtrema { theta_min: 0.5 * (-q).atan2(-p), y_min: mean - amp, y_max: mean + amp }
}

/// Moments of the resonantly driven medium in the closed forms that neglect
/// the (1 − 3β/4) correction.
pub fn resonant_moments(q0: f64, beta: f64, x: f64, a0: f64, c: f64, theta: f64) -> SteadyMoments {
    let bq = beta * q0;
    let k = -0.5 * c * (1.0 + 0.5 * bq * (3.0 + x * x));
    let r = 1.0 / (1.0 + 2.0 * bq);
    let drive = a0 * a0 / (k * k);
    SteadyMoments {
        mean_alpha: Complex64::new(-a0 / k, 0.0),
        mean_n: (q0 + drive * (1.0 + 0.5 * bq * (3.0 + x * x))) * r,
        s: (q0 - 0.5 * beta * drive * q0 * (1.0 - x * x)) * r,
        mu: Complex64::from_polar(-0.5 * beta * drive * q0 * (1.0 + x * x) * r, -2.0 * theta),
        theta,
    }
}

/// Light generated without injection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GenerationStats {
    pub mean_n: f64,
    /// Lorentzian half-width (rad/s).
    pub linewidth: f64,
    /// Mandel parameter in the closed form.
    pub mandel_xi: f64,
}

pub fn generation_stats(q0: f64, beta: f64, c: f64) -> Result<GenerationStats> {
    if !(q0 >= 0.0 && beta >= 0.0 && c > 0.0) {
        return Err(Error::Domain(format!("need q0 >= 0, beta >= 0, C > 0 (got {q0}, {beta}, {c})")));
    }
    let bq = beta * q0;
    let mean_n = q0 / (1.0 + 2.0 * bq);
    Ok(GenerationStats {
        mean_n,
        linewidth: 0.5 * c * (1.0 + 1.5 * bq),
        mandel_xi: mean_n * (1.0 - beta * mean_n) * (1.0 + 2.0 * bq) / (1.0 + 2.5 * bq),
    })
}

/// ⟨|α|⁴⟩ − ⟨|α|²⟩² over ⟨|α|²⟩ from the closed intensity-moment hierarchy
/// of the undriven equation (a₀ = 0).
pub fn mandel_from_moments(c: &InvFreeCoeffs) -> Result<f64> {
    if c.a0 != 0.0 {
        return Err(Error::Domain("intensity hierarchy closes only without injection".into()));
    }
    c.check_stability()?;
    let rate1 = 2.0 * c.k.re + 2.0 * c.lam_aas;
    let rate2 = 4.0 * c.k.re + 4.0 * c.lam_aa.re + 8.0 * c.lam_aas;
    if !(rate2 < 0.0) {
        return Err(Error::Stability { inequality: "4 Re k + 4 Re Lam_aa + 8 Lam_aas < 0", value: rate2 });
    }
    let n1 = -2.0 * c.b / rate1;
    let n2 = -8.0 * c.b * n1 / rate2;
    Ok(n2 / n1 - n1)
}
