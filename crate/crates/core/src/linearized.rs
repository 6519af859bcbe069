//! Linearized intensity/phase fluctuations and their homodyne noise spectra.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{susceptibilities, MediumParams, Model, ModelInputs};
use crate::semiclassical;

/// Smallest intensity accepted by the linearization.
pub const U_MIN: f64 = 1e-12;

/// Drift and diffusion of the fluctuation pair (ε, ψ):
/// d(ε, ψ) = [[−A, A₁₂], [A₂₁, −A]] (ε, ψ) dt + D^{1/2} dW.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriftDiffusion {
    pub a: f64,
    pub a12: f64,
    pub a21: f64,
    pub d_ee: f64,
    pub d_ep: f64,
    pub d_pp: f64,
}

impl DriftDiffusion {
    pub fn drift_matrix(&self) -> [[f64; 2]; 2] {
        [[-self.a, self.a12], [self.a21, -self.a]]
    }

    pub fn diffusion_matrix(&self) -> [[f64; 2]; 2] {
        [[self.d_ee, self.d_ep], [self.d_ep, self.d_pp]]
    }

    /// Both drift eigenvalues −A ± √(A₁₂A₂₁) in the open left half plane.
    pub fn is_stable(&self) -> bool {
        self.a > 0.0 && self.a12 * self.a21 < self.a * self.a
    }

    pub fn check_stable(&self) -> Result<()> {
        if self.is_stable() {
            Ok(())
        } else {
            Err(Error::Unstable(format!(
                "A = {:.4e}, A12*A21 = {:.4e} (need A > 0 and A12*A21 < A^2)",
                self.a,
                self.a12 * self.a21
            )))
        }
    }

    /// |det(iω + M)|² = (ω² + S₁²)(ω² + S₂²).
    pub fn denominator(&self, omega: f64) -> f64 {
        let w2 = omega * omega;
        let a2 = self.a * self.a;
        let om2 = -self.a12 * self.a21;
        w2 * w2 + 2.0 * w2 * (a2 - om2) + (a2 + om2) * (a2 + om2)
    }
}

/// Which intensity dependence of the drift to keep for the dispersive models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DriftForm {
    /// Full expressions including the χ₁U corrections.
    #[default]
    Exact,
    /// Leading order in βU: A₁₂ = −2Uκ₁, A₂₁ = κ₁/(2U). Reproduces the
    /// tabulated scaled spectra exactly. No effect on EHA.
    WeakField,
}

impl std::str::FromStr for DriftForm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(DriftForm::Exact),
            "weak-field" | "weak_field" | "weak" => Ok(DriftForm::WeakField),
            other => Err(Error::Config(format!("unknown drift form `{other}`"))),
        }
    }
}

/// Drift and diffusion for `model` at intensity U.
pub fn drift_diffusion(model: Model, p: &MediumParams, u: f64) -> Result<DriftDiffusion> {
    let s = susceptibilities(p)?;
    drift_diffusion_from_inputs(model, &ModelInputs::new(p, &s), u, DriftForm::Exact)
}

/// Drift and diffusion from the reduced model inputs.
///
/// The EHA and HM expressions are built with the same operation order so that
/// HM with κ₁ = 0, f_c = 1 equals EHA with k = χ₁ bit for bit.
pub fn drift_diffusion_from_inputs(
    model: Model,
    m: &ModelInputs,
    u: f64,
    form: DriftForm,
) -> Result<DriftDiffusion> {
    if !(u >= 0.0) || !u.is_finite() {
        return Err(Error::Domain(format!("intensity U = {u} must be finite and >= 0")));
    }
    let a = m.c_total / 2.0;
    match model {
        Model::Eha => {
            let k = m.k;
            Ok(DriftDiffusion {
                a,
                a12: 2.0 * k * u * u,
                a21: -1.5 * k,
                d_ee: 0.0,
                d_ep: -k * u,
                d_pp: 0.0,
            })
        }
        Model::Hm | Model::Slm => {
            if u <= U_MIN {
                return Err(Error::Domain(format!(
                    "intensity U = {u:e} below {U_MIN:e}: the phase coupling is singular at U = 0"
                )));
            }
            let chi1 = m.chi1;
            let kappa1 = m.kappa1;
            let (a12, a21) = match form {
                DriftForm::Exact => (
                    2.0 * chi1 * u * u - 2.0 * u * kappa1,
                    -1.5 * chi1 + 0.5 * kappa1 / u,
                ),
                DriftForm::WeakField => (-2.0 * u * kappa1, 0.5 * kappa1 / u),
            };
            let (d_ep, d_pp) = if model == Model::Hm {
                (-chi1 * u * m.fc, 0.0)
            } else {
                (-chi1 * u, 0.5 * m.x * chi1)
            };
            Ok(DriftDiffusion { a, a12, a21, d_ee: 0.0, d_ep, d_pp })
        }
    }
}

/// Quadrature weights (μ, ν) on (ψ, ε) for θ = Θ − φ₀.
fn weights(u: f64, theta_rel: f64) -> (f64, f64) {
    let r = (2.0 * u).sqrt();
    (r * theta_rel.sin(), theta_rel.cos() / r)
}

/// Quadratic-form coefficients of the spectrum numerator in (μ, ν).
fn numerator_form(dd: &DriftDiffusion, omega: f64) -> (f64, f64, f64) {
    let w2 = omega * omega;
    let a = dd.a;
    let (a12, a21) = (dd.a12, dd.a21);
    let mm = dd.d_pp * (a * a + w2) + 2.0 * dd.d_ep * a * a21 + dd.d_ee * a21 * a21;
    let mn = dd.d_pp * a * a12 + dd.d_ep * (a * a + a12 * a21 + w2) + dd.d_ee * a21 * a;
    let nn = dd.d_pp * a12 * a12 + 2.0 * dd.d_ep * a12 * a + dd.d_ee * (a * a + w2);
    (mm, mn, nn)
}

fn check_u(u: f64) -> Result<()> {
    if u > U_MIN && u.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("intensity U = {u:e} must exceed {U_MIN:e}")))
    }
}

/// Normally ordered homodyne spectrum g(ω, Θ) in shot-noise units.
///
/// `omega` is the physical detuning from the carrier (rad/s); only Θ − φ₀
/// matters.
pub fn spectrum_g_raw(
    dd: &DriftDiffusion,
    u: f64,
    phi0: f64,
    c_out: f64,
    omega: f64,
    theta: f64,
) -> Result<f64> {
    dd.check_stable()?;
    check_u(u)?;
    let (mu, nu) = weights(u, theta - phi0);
    let w2 = omega * omega;
    let (a, a12, a21) = (dd.a, dd.a12, dd.a21);
    let p = mu * a + nu * a12;
    let q = mu * a21 + nu * a;
    let bracket = dd.d_pp * (p * p + mu * mu * w2)
        + 2.0 * dd.d_ep * (p * q + mu * nu * w2)
        + dd.d_ee * (q * q + nu * nu * w2);
    Ok(2.0 * c_out * bracket / dd.denominator(omega))
}

/// g(ω, Θ) = mean + sin_coef·sin 2(Θ−φ₀) + cos_coef·cos 2(Θ−φ₀).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureDecomposition {
    pub mean: f64,
    pub sin_coef: f64,
    pub cos_coef: f64,
}

pub fn quadrature_decomposition(
    dd: &DriftDiffusion,
    u: f64,
    c_out: f64,
    omega: f64,
) -> Result<QuadratureDecomposition> {
    dd.check_stable()?;
    check_u(u)?;
    let (mm, mn, nn) = numerator_form(dd, omega);
    let scale = 2.0 * c_out / dd.denominator(omega);
    Ok(QuadratureDecomposition {
        mean: scale * (u * mm + nn / (4.0 * u)),
        sin_coef: scale * mn,
        cos_coef: scale * (-u * mm + nn / (4.0 * u)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimalPhase {
    /// Local-oscillator phase Θ₀ minimizing g, reduced to (−π/2, π/2] + φ₀.
    pub theta0: f64,
    pub g_min: f64,
    /// Attained at Θ₀ + π/2.
    pub g_max: f64,
    /// Noise independent of Θ: no preferred phase.
    pub degenerate: bool,
}

/// Local-oscillator phase that minimizes the spectrum at frequency `omega`.
pub fn optimal_phase(
    dd: &DriftDiffusion,
    u: f64,
    phi0: f64,
    c_out: f64,
    omega: f64,
) -> Result<OptimalPhase> {
    let q = quadrature_decomposition(dd, u, c_out, omega)?;
    let amp = q.sin_coef.hypot(q.cos_coef);
    if amp <= 1e-14 * q.mean.abs() || amp == 0.0 {
        return Ok(OptimalPhase { theta0: 0.0, g_min: q.mean, g_max: q.mean, degenerate: true });
    }
    let rel = 0.5 * (-q.sin_coef).atan2(-q.cos_coef);
    Ok(OptimalPhase {
        theta0: phi0 + rel,
        g_min: q.mean - amp,
        g_max: q.mean + amp,
        degenerate: false,
    })
}

/// Coefficients of the scaled spectrum
/// g = 4/(1+ε) · (W t² + V ω̄²) / ((ω̄² + 1 − t²)² + 4t²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaledCoeffs {
    /// Amplitude quadrature, Θ = φ₀.
    pub w0: f64,
    pub v0: f64,
    /// Phase quadrature, Θ = φ₀ + π/2.
    pub w_half_pi: f64,
    pub v_half_pi: f64,
    pub t: f64,
}

/// Dispersion parameter κ₁/A of the two-level models.
pub fn t_disp(m: &ModelInputs) -> f64 {
    m.kappa1 / m.decay()
}

/// Kerr parameter √3 kU/A of the effective-Hamiltonian model.
pub fn t_eha(m: &ModelInputs, u: f64) -> f64 {
    3f64.sqrt() * m.k * u / m.decay()
}

pub fn scaled_coeffs(model: Model, m: &ModelInputs, u: f64) -> Result<ScaledCoeffs> {
    let bu = m.beta * u;
    match model {
        Model::Eha => Ok(ScaledCoeffs {
            w0: -2.0 / 3.0,
            v0: 0.0,
            w_half_pi: 2.0,
            v_half_pi: 0.0,
            t: t_eha(m, u),
        }),
        Model::Hm => Ok(ScaledCoeffs {
            w0: 2.0 * bu * m.fc,
            v0: 0.0,
            w_half_pi: -2.0 * bu * m.fc,
            v_half_pi: 0.0,
            t: t_disp(m),
        }),
        Model::Slm => {
            let t = t_disp(m);
            if t == 0.0 {
                return Err(Error::Domain("phase-quadrature coefficient needs t != 0".into()));
            }
            Ok(ScaledCoeffs {
                w0: 2.0 * bu * (1.0 + m.x * t / 2.0),
                v0: 0.0,
                w_half_pi: -2.0 * bu * (1.0 - m.x / (2.0 * t)),
                v_half_pi: bu * m.x * t,
                t,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quadrature {
    /// Θ = φ₀
    Amplitude,
    /// Θ = φ₀ + π/2
    Phase,
}

impl Quadrature {
    pub fn offset(self) -> f64 {
        match self {
            Quadrature::Amplitude => 0.0,
            Quadrature::Phase => std::f64::consts::FRAC_PI_2,
        }
    }
}

/// (ω̄² + 1 − t²)² + 4t²
fn scaled_den(t: f64, wb: f64) -> f64 {
    let v = wb * wb + 1.0 - t * t;
    v * v + 4.0 * t * t
}

pub fn spectrum_scaled(c: &ScaledCoeffs, eps: f64, omega_bar: f64, which: Quadrature) -> f64 {
    let (w, v) = match which {
        Quadrature::Amplitude => (c.w0, c.v0),
        Quadrature::Phase => (c.w_half_pi, c.v_half_pi),
    };
    if w == 0.0 && v == 0.0 {
        return 0.0;
    }
    4.0 / (1.0 + eps) * (w * c.t * c.t + v * omega_bar * omega_bar) / scaled_den(c.t, omega_bar)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Lower,
    Upper,
}

/// Spectrum at the optimal and the conjugate local-oscillator phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimalBranches {
    pub lower: f64,
    pub upper: f64,
}

impl OptimalBranches {
    pub fn get(&self, b: Branch) -> f64 {
        match b {
            Branch::Lower => self.lower,
            Branch::Upper => self.upper,
        }
    }
}

/// √(4t² + (1 − t² + ω̄²)²)
fn m_factor(t: f64, wb: f64) -> f64 {
    let v = 1.0 - t * t + wb * wb;
    (4.0 * t * t + v * v).sqrt()
}

/// Closed-form spectrum at the optimal phase, both branches, scaled frequency.
///
/// The two-level models use the weak-field drift, as do the scaled spectra.
pub fn spectrum_optimal(model: Model, m: &ModelInputs, u: f64, eps: f64, omega_bar: f64) -> Result<OptimalBranches> {
    let bu = m.beta * u;
    let wb2 = omega_bar * omega_bar;
    let (t, g1, g2) = match model {
        Model::Eha => {
            let t = t_eha(m, u);
            let v = 1.0 - t * t + wb2;
            let root = (16.0 * t * t + 3.0 * v * v).sqrt();
            let pre = 2.0 * t / 3.0;
            (t, pre * (2.0 * t + root), pre * (2.0 * t - root))
        }
        Model::Hm => {
            let t = t_disp(m);
            let g = 2.0 * m.fc * bu * t.abs() * m_factor(t, omega_bar);
            (t, g, -g)
        }
        Model::Slm => {
            let t = t_disp(m);
            let base = m.x * (1.0 + wb2 + t * t);
            let spread = (m.x * m.x + 4.0).sqrt() * m_factor(t, omega_bar);
            (t, bu * t * (base + spread), bu * t * (base - spread))
        }
    };
    let scale = 2.0 / (1.0 + eps) / scaled_den(t, omega_bar);
    let (a, b) = (scale * g1, scale * g2);
    Ok(OptimalBranches { lower: a.min(b), upper: a.max(b) })
}

/// Frequency and depth of the squeezing minimum of the effective-Hamiltonian
/// model at the phase tan(Θ − φ₀) = 1/(√3 t).
///
/// `c_norm` = 1 + ε for an asymmetric cavity.
pub fn eha_band_minimum(t: f64, c_norm: f64) -> (f64, f64) {
    let t2 = t * t;
    ((1.0 + t2).sqrt(), -2.0 * t2 / (c_norm * (1.0 + 3.0 * t2)))
}

/// Effective-Hamiltonian spectrum at tan(Θ − φ₀) = 1/(√3 t).
pub fn eha_band_spectrum(t: f64, eps: f64, omega_bar: f64) -> f64 {
    let t2 = t * t;
    let wb2 = omega_bar * omega_bar;
    -8.0 / (1.0 + eps) * t2 * wb2 / ((1.0 + 3.0 * t2) * scaled_den(t, omega_bar))
}

/// Photocurrent noise relative to shot noise, i² = 1 + ηg.
pub fn photocurrent(g: f64, eta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::Domain(format!("detection efficiency {eta} outside [0, 1]")));
    }
    Ok(1.0 + eta * g)
}

/// Spectrum sampled on a scaled-frequency grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumSeries {
    pub omega_bar: Vec<f64>,
    pub values: Vec<f64>,
    pub model: Model,
    /// Local-oscillator phase relative to the mean field (rad).
    pub theta: f64,
    pub convention: String,
}

impl SpectrumSeries {
    pub fn new(omega_bar: Vec<f64>, values: Vec<f64>, model: Model, theta: f64) -> Result<Self> {
        if omega_bar.len() != values.len() {
            return Err(Error::Domain("grid and values differ in length".into()));
        }
        if omega_bar.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("frequency grid must be strictly increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite spectrum value".into()));
        }
        Ok(SpectrumSeries {
            omega_bar,
            values,
            model,
            theta,
            convention: "normally ordered, shot noise = 0, omega_bar = omega / A".into(),
        })
    }
}

/// A model linearized around its semiclassical operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearizedModel {
    pub model: Model,
    pub inputs: ModelInputs,
    pub u: f64,
    pub phi0: f64,
    pub form: DriftForm,
    pub dd: DriftDiffusion,
}

impl LinearizedModel {
    /// Operating point from the transparent-medium steady state.
    pub fn from_params(model: Model, p: &MediumParams, form: DriftForm) -> Result<Self> {
        p.validate()?;
        let s = susceptibilities(p)?;
        let ss = semiclassical::steady_state(p, &s)?;
        let op = ss.primary();
        Self::new(model, ModelInputs::new(p, &s), op.u, op.phi0, form)
    }

    pub fn new(model: Model, inputs: ModelInputs, u: f64, phi0: f64, form: DriftForm) -> Result<Self> {
        let dd = drift_diffusion_from_inputs(model, &inputs, u, form)?;
        Ok(LinearizedModel { model, inputs, u, phi0, form, dd })
    }

    pub fn decay(&self) -> f64 {
        self.dd.a
    }

    pub fn eps(&self) -> f64 {
        self.inputs.coupling_ratio()
    }

    pub fn beta_u(&self) -> f64 {
        self.inputs.beta * self.u
    }

    /// g at scaled frequency ω̄ and phase Θ − φ₀ = `theta_rel`.
    pub fn g(&self, omega_bar: f64, theta_rel: f64) -> Result<f64> {
        spectrum_g_raw(
            &self.dd,
            self.u,
            self.phi0,
            self.inputs.c_out,
            omega_bar * self.dd.a,
            self.phi0 + theta_rel,
        )
    }

    pub fn quadrature(&self, omega_bar: f64, q: Quadrature) -> Result<f64> {
        self.g(omega_bar, q.offset())
    }

    pub fn optimal_phase(&self, omega_bar: f64) -> Result<OptimalPhase> {
        optimal_phase(&self.dd, self.u, self.phi0, self.inputs.c_out, omega_bar * self.dd.a)
    }

    pub fn optimal(&self, omega_bar: f64) -> Result<OptimalBranches> {
        spectrum_optimal(self.model, &self.inputs, self.u, self.eps(), omega_bar)
    }

    pub fn scaled_coeffs(&self) -> Result<ScaledCoeffs> {
        scaled_coeffs(self.model, &self.inputs, self.u)
    }

    pub fn series(&self, grid: &[f64], q: Quadrature) -> Result<SpectrumSeries> {
        let values = grid.iter().map(|&w| self.quadrature(w, q)).collect::<Result<Vec<_>>>()?;
        SpectrumSeries::new(grid.to_vec(), values, self.model, q.offset())
    }
}
