//! Headless property suite behind `chi3 check`.

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::invfree::{generation_stats, spectrum_y, steady_moments, InvFreeCoeffs};
use crate::linearized::{
    drift_diffusion_from_inputs, eha_band_minimum, optimal_phase, spectrum_g_raw, spectrum_optimal, spectrum_scaled,
    scaled_coeffs, DriftDiffusion, DriftForm, Quadrature,
};
use crate::params::{Model, ModelInputs};
use crate::sde::{
    balanced_weights, invfree_moment_oracle, noise_factorization, ou_spectrum_oracle, LinearSDE, OracleOptions, C64,
};

/// Deliberate corruptions used to prove the suite can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Fault {
    /// Scales the multi-atom cross-diffusion constant by 1.01.
    NoiseConstant,
}

impl std::str::FromStr for Fault {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "noise-constant" => Ok(Fault::NoiseConstant),
            other => Err(format!("unknown fault `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyResult {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckSummary {
    pub pass: bool,
    pub first_failure: Option<&'static str>,
    pub properties: Vec<PropertyResult>,
}

/// A random point in the validity region: linear coupling and operating
/// intensity with |t| ∈ [0.2, 5], |x| ∈ [20, 500] with the sign of t,
/// βU < 0.03, A = 1.
pub struct SamplePoint {
    pub inputs: ModelInputs,
    pub u: f64,
}

pub fn sample_point(model: Model, rng: &mut ChaCha8Rng) -> SamplePoint {
    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let t = sign * rng.gen_range(0.2..5.0);
    let x = sign * rng.gen_range(20.0..500.0);
    let bu = rng.gen_range(1e-4..0.03);
    let u = 10f64.powf(rng.gen_range(0.0..6.0));
    let c_out = rng.gen_range(0.2..1.8);
    let beta = bu / u;
    let kappa1 = t;
    let chi1 = beta * kappa1;
    let k = if model == Model::Eha { t / (3f64.sqrt() * u) } else { chi1 };
    SamplePoint {
        inputs: ModelInputs { kappa1, chi1, k, fc: rng.gen_range(0.1..=1.0), x, beta, c_total: 2.0, c_out },
        u,
    }
}

struct Ctx {
    fault: Option<Fault>,
}

impl Ctx {
    fn dd(&self, model: Model, m: &ModelInputs, u: f64, form: DriftForm) -> crate::Result<DriftDiffusion> {
        let mut dd = drift_diffusion_from_inputs(model, m, u, form)?;
        if self.fault == Some(Fault::NoiseConstant) && model == Model::Hm {
            dd.d_ep *= 1.01;
        }
        Ok(dd)
    }
}

type Outcome = Result<String, String>;

fn e2s(e: crate::Error) -> String {
    e.to_string()
}

fn noise_factorization_reconstructs(_: &Ctx) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let mut r = || C64::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
        let off = r();
        let d = [[r(), off], [off, r()]];
        let b = noise_factorization(&d);
        for i in 0..2 {
            for j in 0..2 {
                let v = b[i][0] * b[j][0] + b[i][1] * b[j][1];
                worst = worst.max((v - d[i][j]).norm() / 5.0);
            }
        }
    }
    if worst < 1e-14 { Ok(format!("max error {worst:.2e}")) } else { Err(format!("B·Bᵀ off by {worst:.2e}")) }
}

fn spectra_match_oracle(ctx: &Ctx) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let grid: Vec<f64> = (0..64).map(|i| -6.0 + 12.0 * i as f64 / 63.0).collect();
    let mut worst: f64 = 0.0;
    for model in Model::ALL {
        for _ in 0..20 {
            let p = sample_point(model, &mut rng);
            let dd = ctx.dd(model, &p.inputs, p.u, DriftForm::Exact).map_err(e2s)?;
            let sde = LinearSDE::balanced(&dd, p.u);
            for th in [0.0, 0.7, FRAC_PI_2] {
                let s = ou_spectrum_oracle(&sde, &grid, &balanced_weights(th)).map_err(e2s)?;
                let g: Vec<f64> = grid
                    .iter()
                    .map(|&w| spectrum_g_raw(&dd, p.u, 0.0, p.inputs.c_out, w, th))
                    .collect::<crate::Result<_>>()
                    .map_err(e2s)?;
                let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                for (g, s) in g.iter().zip(s) {
                    worst = worst.max((g - 2.0 * p.inputs.c_out * s).abs() / scale);
                }
            }
        }
    }
    if worst < 1e-8 { Ok(format!("max relative deviation {worst:.2e}")) } else { Err(format!("deviation {worst:.2e}")) }
}

fn scaled_forms_match_raw(ctx: &Ctx) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut worst: f64 = 0.0;
    for model in Model::ALL {
        for _ in 0..20 {
            let p = sample_point(model, &mut rng);
            let m = &p.inputs;
            let dd = ctx.dd(model, m, p.u, DriftForm::WeakField).map_err(e2s)?;
            let tc = scaled_coeffs(model, m, p.u).map_err(e2s)?;
            let eps = m.coupling_ratio();
            for wb in [0.0, 0.5, 1.5, 4.0] {
                for q in [Quadrature::Amplitude, Quadrature::Phase] {
                    let raw = spectrum_g_raw(&dd, p.u, 0.0, m.c_out, wb, q.offset()).map_err(e2s)?;
                    let closed = spectrum_scaled(&tc, eps, wb, q);
                    worst = worst.max((raw - closed).abs() / raw.abs().max(closed.abs()).max(1e-300));
                }
                let num = optimal_phase(&dd, p.u, 0.0, m.c_out, wb).map_err(e2s)?;
                let closed = spectrum_optimal(model, m, p.u, eps, wb).map_err(e2s)?;
                for (a, b) in [(num.g_min, closed.lower), (num.g_max, closed.upper)] {
                    worst = worst.max((a - b).abs() / a.abs().max(b.abs()).max(1e-300));
                }
            }
        }
    }
    if worst < 1e-9 { Ok(format!("max relative deviation {worst:.2e}")) } else { Err(format!("deviation {worst:.2e}")) }
}

fn invfree_moments_match_oracle(_: &Ctx) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let c = rng.gen_range(0.5..3.0);
        let cf = InvFreeCoeffs::from_resonant(
            rng.gen_range(0.0..50.0),
            rng.gen_range(0.0..0.05),
            rng.gen_range(-3.0..3.0),
            rng.gen_range(0.0..5.0),
            c,
        );
        let theta = rng.gen_range(0.0..3.0);
        let a = steady_moments(&cf, theta).map_err(e2s)?;
        let b = invfree_moment_oracle(&cf, theta, &OracleOptions::default()).map_err(e2s)?;
        let scale = a.mean_n.abs().max(1e-6);
        worst = worst
            .max((a.mean_n - b.mean_n).abs() / scale)
            .max((a.s - b.s).abs() / scale)
            .max((a.mu - b.mu).norm() / scale);
    }
    if worst < 1e-8 { Ok(format!("max relative deviation {worst:.2e}")) } else { Err(format!("deviation {worst:.2e}")) }
}

fn eha_drop(_: &Ctx) -> Outcome {
    let (_, g10) = eha_band_minimum(10.0, 1.0);
    let (_, g30) = eha_band_minimum(30.0, 1.0);
    if (-g10 - 200.0 / 301.0).abs() < 1e-14 && (-g30 - 2.0 / 3.0).abs() < 1e-3 {
        Ok(format!("drop {:.6} at t=10, {:.6} at t=30", -g10, -g30))
    } else {
        Err(format!("drop {} at t=10, {} at t=30", -g10, -g30))
    }
}

fn hm_zero_frequency(_: &Ctx) -> Outcome {
    // fc = 1, βU = 0.1, t = 1 with A = 1 and a one-sided cavity
    let m = ModelInputs { kappa1: 1.0, chi1: 0.1, k: 0.1, fc: 1.0, x: 50.0, beta: 0.1, c_total: 2.0, c_out: 2.0 };
    let g = spectrum_optimal(Model::Hm, &m, 1.0, 0.0, 0.0).map_err(e2s)?;
    if (g.lower + 0.2).abs() < 1e-15 && (g.upper - 0.2).abs() < 1e-15 {
        Ok(format!("branches {:.16} / {:.16}", g.lower, g.upper))
    } else {
        Err(format!("branches {} / {}", g.lower, g.upper))
    }
}

fn hm_reduces_to_eha(ctx: &Ctx) -> Outcome {
    for &(chi1, u, c) in &[(1e-3, 2.0, 3.0), (-7.3e-9, 5.1e5, 2e7), (0.123, 0.77, 0.01)] {
        let hm = ModelInputs { kappa1: 0.0, chi1, k: 0.0, fc: 1.0, x: 3.0, beta: 0.1, c_total: c, c_out: c / 2.0 };
        let eha = ModelInputs { k: chi1, ..hm };
        let a = ctx.dd(Model::Hm, &hm, u, DriftForm::Exact).map_err(e2s)?;
        let b = ctx.dd(Model::Eha, &eha, u, DriftForm::Exact).map_err(e2s)?;
        if a != b {
            return Err(format!("drift/diffusion differ at χ₁ = {chi1:e}: {a:?} vs {b:?}"));
        }
    }
    Ok("bitwise equal".into())
}

fn slm_noisier_in_phase(ctx: &Ctx) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for _ in 0..20 {
        let mut p = sample_point(Model::Slm, &mut rng);
        p.inputs.kappa1 = p.inputs.kappa1.abs();
        p.inputs.chi1 = p.inputs.beta * p.inputs.kappa1;
        p.inputs.x = p.inputs.x.abs();
        let slm = ctx.dd(Model::Slm, &p.inputs, p.u, DriftForm::Exact).map_err(e2s)?;
        let hm = ctx.dd(Model::Hm, &p.inputs, p.u, DriftForm::Exact).map_err(e2s)?;
        for i in 0..101 {
            let w = 8.0 * i as f64 / 100.0;
            let a = spectrum_g_raw(&slm, p.u, 0.0, p.inputs.c_out, w, FRAC_PI_2).map_err(e2s)?;
            let b = spectrum_g_raw(&hm, p.u, 0.0, p.inputs.c_out, w, FRAC_PI_2).map_err(e2s)?;
            if a < b {
                return Err(format!("phase noise {a:e} < {b:e} at ω̄ = {w}"));
            }
        }
    }
    Ok("phase quadrature ordering holds".into())
}

fn mandel_bounds(_: &Ctx) -> Outcome {
    for i in 0..100 {
        for j in 0..100 {
            let q0 = 10f64.powf(-2.0 + 6.0 * i as f64 / 99.0);
            let beta = 10f64.powf(-6.0 + 6.0 * j as f64 / 99.0);
            let s = generation_stats(q0, beta, 1.0).map_err(e2s)?;
            let ratio = s.mandel_xi / s.mean_n;
            if beta * s.mean_n > 0.5 + 1e-12 || !(0.4 - 1e-12..1.0).contains(&ratio) {
                return Err(format!("q0 = {q0:e}, β = {beta:e}: β⟨n⟩ = {}, ξ/⟨n⟩ = {ratio}", beta * s.mean_n));
            }
        }
    }
    Ok("β⟨n⟩ ≤ 1/2 and ξ/⟨n⟩ ∈ [0.4, 1) on 10⁴ points".into())
}

fn linewidth(_: &Ctx) -> Outcome {
    for &(beta, q0, c) in &[(0.01, 10.0, 1.0), (0.1, 50.0, 2e7), (1e-3, 1e3, 3.0)] {
        let cf = InvFreeCoeffs::from_resonant(q0, beta, 0.0, 0.0, c);
        let m = steady_moments(&cf, 0.0).map_err(e2s)?;
        let y0 = spectrum_y(&cf, &m, 0.0, 0.0);
        let (mut lo, mut hi) = (0.0, 1e3 * c);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if spectrum_y(&cf, &m, mid, 0.0) > 0.5 * y0 { lo = mid } else { hi = mid }
        }
        let expected = generation_stats(q0, beta, c).map_err(e2s)?.linewidth;
        if (lo - expected).abs() > 1e-3 * expected {
            return Err(format!("half-width {lo:e} vs {expected:e}"));
        }
    }
    Ok("half-widths within 0.1%".into())
}

type Property = (&'static str, fn(&Ctx) -> Outcome);

const PROPERTIES: [Property; 10] = [
    ("noise_factorization", noise_factorization_reconstructs),
    ("spectra_vs_ou_oracle", spectra_match_oracle),
    ("scaled_and_optimal_forms", scaled_forms_match_raw),
    ("invfree_moments_vs_ode_oracle", invfree_moments_match_oracle),
    ("eha_maximum_drop", eha_drop),
    ("hm_zero_frequency", hm_zero_frequency),
    ("hm_eha_reduction", hm_reduces_to_eha),
    ("slm_excess_phase_noise", slm_noisier_in_phase),
    ("mandel_bounds", mandel_bounds),
    ("invfree_linewidth", linewidth),
];

pub fn run_checks(fault: Option<Fault>) -> CheckSummary {
    let ctx = Ctx { fault };
    let properties: Vec<PropertyResult> = PROPERTIES
        .iter()
        .map(|(name, f)| match f(&ctx) {
            Ok(detail) => PropertyResult { name, pass: true, detail },
            Err(detail) => PropertyResult { name, pass: false, detail },
        })
        .collect();
    let first_failure = properties.iter().find(|p| !p.pass).map(|p| p.name);
    CheckSummary { pass: first_failure.is_none(), first_failure, properties }
}
