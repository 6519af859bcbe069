//! Physical parameters of the medium and cavity, the susceptibilities derived
//! from them, and the checks that decide which reduced model applies.
//!
//! All rates are angular (rad/s). `a0` is the injected amplitude inside the
//! cavity expressed in the same units as the field amplitude per unit time.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Atomic and cavity constants. Every other module reads from this.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MediumParams {
    /// Transverse relaxation rate γ (rad/s).
    pub gamma: f64,
    /// Effective relaxation rate of level 1, Γ₁ (rad/s).
    pub gamma1: f64,
    /// Effective relaxation rate of level 2, Γ₂ (rad/s).
    pub gamma2: f64,
    /// Atomic detuning ω₂₁ − ω (rad/s).
    pub delta: f64,
    /// Atom-field coupling constant (rad/s).
    pub g: f64,
    /// Number of atoms.
    pub n_atoms: f64,
    /// Steady population of the lower working level, in [0, 1].
    pub f1s: f64,
    /// Steady population of the upper working level, in [0, 1].
    pub f2s: f64,
    /// Input mirror coupling rate (rad/s).
    pub c_in: f64,
    /// Output mirror coupling rate (rad/s).
    pub c_out: f64,
    /// Injected amplitude inside the cavity (real).
    pub a0: f64,
    /// ω − ω_L, offset between cavity and drive (rad/s).
    pub omega_offset: f64,
    /// γ∥ / 2γ⊥ for the Haken model, in (0, 1].
    pub fc: f64,
}

impl Default for MediumParams {
    /// Far-detuned cold medium (x = 100) whose relaxation rates satisfy the
    /// effective-Hamiltonian condition, with t ≈ 2 and βU ≈ 0.01.
    fn default() -> Self {
        MediumParams {
            gamma: 1.0e8,
            gamma1: 2.0e8,
            gamma2: 2.0e8,
            delta: 1.0e10,
            g: 1.0e6,
            n_atoms: 2.0e5,
            f1s: 1.0,
            f2s: 0.0,
            c_in: 1.0e7,
            c_out: 1.0e7,
            a0: 1.6e10,
            omega_offset: 0.0,
            fc: 1.0,
        }
    }
}

fn check(ok: bool, name: &'static str, reason: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, reason: reason.to_string() })
    }
}

impl MediumParams {
    /// Checks every construction invariant.
    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("gamma", self.gamma),
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
            ("delta", self.delta),
            ("g", self.g),
            ("n_atoms", self.n_atoms),
            ("f1s", self.f1s),
            ("f2s", self.f2s),
            ("c_in", self.c_in),
            ("c_out", self.c_out),
            ("a0", self.a0),
            ("omega_offset", self.omega_offset),
            ("fc", self.fc),
        ];
        for (name, v) in finite {
            check(v.is_finite(), name, "must be finite")?;
        }
        check(self.gamma > 0.0, "gamma", "must be > 0")?;
        check(self.gamma1 > 0.0, "gamma1", "must be > 0")?;
        check(self.gamma2 > 0.0, "gamma2", "must be > 0")?;
        check(self.c_in >= 0.0, "c_in", "must be >= 0")?;
        check(self.c_out > 0.0, "c_out", "must be > 0")?;
        check(self.n_atoms >= 1.0, "n_atoms", "must be >= 1")?;
        check((0.0..=1.0).contains(&self.f1s), "f1s", "must lie in [0, 1]")?;
        check((0.0..=1.0).contains(&self.f2s), "f2s", "must lie in [0, 1]")?;
        check(self.fc > 0.0 && self.fc <= 1.0, "fc", "must lie in (0, 1]")?;
        Ok(())
    }

    /// Total cavity loss rate C = C_in + C_out.
    pub fn c_total(&self) -> f64 {
        self.c_in + self.c_out
    }

    /// Field decay rate A = C/2.
    pub fn decay(&self) -> f64 {
        0.5 * self.c_total()
    }

    /// Mirror coupling ratio ε = T_in / T_out = C_in / C_out.
    pub fn coupling_ratio(&self) -> f64 {
        self.c_in / self.c_out
    }

    /// Dimensionless detuning x = Δ/γ.
    pub fn x(&self) -> f64 {
        self.delta / self.gamma
    }

    /// Complex relaxation δ = γ + iΔ.
    pub fn delta_c(&self) -> Complex64 {
        Complex64::new(self.gamma, self.delta)
    }

    /// The Γ₁Γ₂ / ((Γ₁+Γ₂)γ) ratio that controls the model reductions.
    pub fn relaxation_ratio(&self) -> f64 {
        self.gamma1 * self.gamma2 / ((self.gamma1 + self.gamma2) * self.gamma)
    }
}

/// Linear and cubic susceptibilities with the saturation parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Susceptibilities {
    /// χ⁽¹⁾ = κ₁ + iκ₂.
    pub chi1: Complex64,
    /// χ⁽³⁾ = χ₁ + iχ₂ = β χ⁽¹⁾.
    pub chi3: Complex64,
    /// Saturation parameter β (per unit |α|²).
    pub beta: f64,
}

impl Susceptibilities {
    /// Linear dispersion κ₁.
    pub fn kappa1(&self) -> f64 {
        self.chi1.re
    }
    /// Linear absorption κ₂.
    pub fn kappa2(&self) -> f64 {
        self.chi1.im
    }
    /// Nonlinear dispersion χ₁.
    pub fn chi1_re(&self) -> f64 {
        self.chi3.re
    }
    /// Nonlinear absorption χ₂.
    pub fn chi2(&self) -> f64 {
        self.chi3.im
    }
}

/// χ⁽¹⁾ = Ng²/(Δ − iγ), β = 2g²γ(Γ₁+Γ₂)/(Γ₁Γ₂|δ|²), χ⁽³⁾ = βχ⁽¹⁾.
pub fn susceptibilities(p: &MediumParams) -> Result<Susceptibilities> {
    let mod2 = p.gamma * p.gamma + p.delta * p.delta;
    if mod2 == 0.0 {
        return Err(Error::Domain("singular detuning: γ = 0 and Δ = 0".into()));
    }
    let g2 = p.g * p.g;
    let chi1 = Complex64::new(p.n_atoms * g2, 0.0) / Complex64::new(p.delta, -p.gamma);
    let beta = 2.0 * g2 * p.gamma * (p.gamma1 + p.gamma2) / (p.gamma1 * p.gamma2 * mod2);
    Ok(Susceptibilities { chi1, chi3: chi1 * beta, beta })
}

/// Raw level-scheme constants from which Γ₁ and Γ₂ are formed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawRelaxation {
    pub gamma_up: f64,
    pub gamma_down: f64,
    pub gamma_1: f64,
    pub gamma_2: f64,
    pub lambda_1: f64,
    pub lambda_2: f64,
}

impl RawRelaxation {
    /// The substitution ↑↔↓, 1↔2 that maps the Γ₂ formula onto Γ₁.
    pub fn swapped(&self) -> Self {
        RawRelaxation {
            gamma_up: self.gamma_down,
            gamma_down: self.gamma_up,
            gamma_1: self.gamma_2,
            gamma_2: self.gamma_1,
            lambda_1: self.lambda_2,
            lambda_2: self.lambda_1,
        }
    }

    /// γ′ₖ = γₖ(1 − Λₖ/(Λ₁+Λ₂)); equals γₖ when there is no pumping.
    fn primed(&self) -> (f64, f64) {
        let sum = self.lambda_1 + self.lambda_2;
        if sum == 0.0 {
            (self.gamma_1, self.gamma_2)
        } else {
            (
                self.gamma_1 * (1.0 - self.lambda_1 / sum),
                self.gamma_2 * (1.0 - self.lambda_2 / sum),
            )
        }
    }

    fn upper_rate(&self) -> Result<f64> {
        let sum = self.lambda_1 + self.lambda_2;
        let den = sum + self.gamma_1;
        if den == 0.0 {
            return Err(Error::Domain("Λ₁ + Λ₂ + γ₁ = 0".into()));
        }
        let (g1p, g2p) = self.primed();
        Ok((self.gamma_down + g2p) + (self.gamma_up + g1p) * (sum + self.gamma_2) / den)
    }
}

/// Effective relaxation constants (Γ₁, Γ₂) from the raw level constants.
pub fn effective_gammas(raw: &RawRelaxation) -> Result<(f64, f64)> {
    let values = [
        raw.gamma_up,
        raw.gamma_down,
        raw.gamma_1,
        raw.gamma_2,
        raw.lambda_1,
        raw.lambda_2,
    ];
    if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::Domain("raw relaxation constants must be finite and >= 0".into()));
    }
    let gamma2 = raw.upper_rate()?;
    let gamma1 = raw.swapped().upper_rate()?;
    Ok((gamma1, gamma2))
}

/// Thresholds that quantify the "≪" of the validity conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegimeThresholds {
    /// βU must stay below this.
    pub tol_weak: f64,
    /// |x| must exceed this.
    pub tol_x: f64,
    /// βU must stay below tol_frac / 3.
    pub tol_frac: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        RegimeThresholds { tol_weak: 0.1, tol_x: 10.0, tol_frac: 0.1 }
    }
}

/// One validity check: whether it passed and by how much.
///
/// `margin` is positive when the check passes and equals the distance to the
/// threshold in the quantity's own units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeFlag {
    pub pass: bool,
    pub value: f64,
    pub threshold: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeReport {
    pub weak_field: RegimeFlag,
    pub far_detuned: RegimeFlag,
    pub oscillator: RegimeFlag,
}

impl RegimeReport {
    pub fn all_pass(&self) -> bool {
        self.weak_field.pass && self.far_detuned.pass && self.oscillator.pass
    }

    /// Human-readable list of failed inequalities.
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.weak_field.pass {
            out.push(format!(
                "weak field: βU = {:.4e} not < {:.4e}",
                self.weak_field.value, self.weak_field.threshold
            ));
        }
        if !self.far_detuned.pass {
            out.push(format!(
                "far detuning: |x| = {:.4e} not > {:.4e}",
                self.far_detuned.value, self.far_detuned.threshold
            ));
        }
        if !self.oscillator.pass {
            out.push(format!(
                "oscillator regime: βU = {:.4e} not < {:.4e}",
                self.oscillator.value, self.oscillator.threshold
            ));
        }
        out
    }
}

/// Reports, never fails. `beta_u` is the dimensionless intensity βU.
pub fn validate_regime_beta_u(beta_u: f64, x: f64, th: &RegimeThresholds) -> RegimeReport {
    let below = |value: f64, threshold: f64| RegimeFlag {
        pass: value < threshold,
        value,
        threshold,
        margin: threshold - value,
    };
    let ax = x.abs();
    RegimeReport {
        weak_field: below(beta_u, th.tol_weak),
        far_detuned: RegimeFlag { pass: ax > th.tol_x, value: ax, threshold: th.tol_x, margin: ax - th.tol_x },
        oscillator: below(beta_u, th.tol_frac / 3.0),
    }
}

/// Validity of the weak-field, far-detuned and oscillator approximations at
/// intensity `u` (= |z|²).
pub fn validate_regime(p: &MediumParams, u: f64, th: &RegimeThresholds) -> Result<RegimeReport> {
    let s = susceptibilities(p)?;
    Ok(validate_regime_beta_u(s.beta * u, p.x(), th))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tag {
    pub holds: bool,
    /// Largest deviation from the defining equalities.
    pub deviation: f64,
}

/// Which reduced descriptions the parameter set supports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReductionTags {
    /// f₁ˢ = 1 and Γ₁Γ₂/((Γ₁+Γ₂)γ) ∈ (0, 1]: same FPE as the Haken model.
    pub hm_equivalent: Tag,
    /// The relaxation ratio, i.e. the f_c the Haken model would need.
    pub implied_fc: f64,
    /// f₁ˢ = 1 and the relaxation ratio equals 1.
    pub eha_valid: Tag,
    /// Both populations nonzero with squares below the pump threshold.
    pub slm_weak_pump: Tag,
}

/// Tolerances for [`model_reduction_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReductionTolerances {
    pub equality: f64,
    /// (fₖˢ)² must be below this for the weak-pump tag.
    pub pump_square: f64,
}

impl Default for ReductionTolerances {
    fn default() -> Self {
        ReductionTolerances { equality: 1e-9, pump_square: 1e-2 }
    }
}

pub fn model_reduction_check(p: &MediumParams, tol: &ReductionTolerances) -> ReductionTags {
    let ratio = p.relaxation_ratio();
    let f1_dev = (p.f1s - 1.0).abs();
    let hm_dev = if ratio > 0.0 && ratio <= 1.0 + tol.equality {
        f1_dev
    } else {
        f1_dev.max((ratio - 1.0).abs())
    };
    let eha_dev = f1_dev.max((ratio - 1.0).abs());
    let pump_dev = (p.f1s * p.f1s).max(p.f2s * p.f2s);
    ReductionTags {
        hm_equivalent: Tag { holds: hm_dev <= tol.equality, deviation: hm_dev },
        implied_fc: ratio,
        eha_valid: Tag { holds: eha_dev <= tol.equality, deviation: eha_dev },
        slm_weak_pump: Tag {
            holds: p.f1s > 0.0 && p.f2s > 0.0 && pump_dev < tol.pump_square,
            deviation: pump_dev,
        },
    }
}

/// The three descriptions of the cold transparent medium.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// Kerr effective Hamiltonian with coupling k.
    Eha,
    /// Haken model.
    Hm,
    /// Scully–Lamb model.
    Slm,
}

impl Model {
    pub const ALL: [Model; 3] = [Model::Eha, Model::Hm, Model::Slm];

    pub fn name(self) -> &'static str {
        match self {
            Model::Eha => "eha",
            Model::Hm => "hm",
            Model::Slm => "slm",
        }
    }
}

impl std::str::FromStr for Model {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "eha" => Ok(Model::Eha),
            "hm" => Ok(Model::Hm),
            "slm" | "lsm" => Ok(Model::Slm),
            other => Err(Error::Config(format!("unknown model `{other}`"))),
        }
    }
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// The handful of scalars the linearized models actually consume.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelInputs {
    pub kappa1: f64,
    pub chi1: f64,
    /// Kerr coupling of the effective Hamiltonian; defaults to Re χ⁽³⁾.
    pub k: f64,
    pub fc: f64,
    pub x: f64,
    pub beta: f64,
    pub c_total: f64,
    pub c_out: f64,
}

impl ModelInputs {
    pub fn new(p: &MediumParams, s: &Susceptibilities) -> Self {
        ModelInputs {
            kappa1: s.kappa1(),
            chi1: s.chi1_re(),
            k: s.chi1_re(),
            fc: p.fc,
            x: p.x(),
            beta: s.beta,
            c_total: p.c_total(),
            c_out: p.c_out,
        }
    }

    pub fn decay(&self) -> f64 {
        0.5 * self.c_total
    }

    /// ε = C_in / C_out.
    pub fn coupling_ratio(&self) -> f64 {
        (self.c_total - self.c_out) / self.c_out
    }
}
