use std::path::PathBuf;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use super::config::{Format, RunConfig};
use super::output::{ensure_dir, write_csv, write_json, write_svg, Metadata};
use super::svg::{Plot, Series};
use super::CliError;
use crate::error::{Error, Result};
use crate::invfree::{generation_stats, spectrum_y, steady_moments, InvFreeCoeffs};
use crate::linearized::{
    drift_diffusion_from_inputs, eha_band_minimum, t_disp, t_eha, DriftForm, LinearizedModel, Quadrature,
};
use crate::params::{model_reduction_check, validate_regime, Model, ModelInputs, ReductionTolerances};
use crate::sde::{
    balanced_weights, linear_moment_oracle, ou_spectrum_oracle, simulate_reduce, write_trajectory_dump, LinearSDE,
    OracleOptions, SdeModel, SimConfig, TrajectoryEnsemble, Vec2, WelchConfig, WelchEstimator,
};

/// Header of the spectrum tables.
pub const SPECTRUM_COLUMNS: [&str; 5] = ["omega_bar", "g_amplitude", "g_phase", "g_opt_minus", "g_opt_plus"];

fn linearized(cfg: &RunConfig, model: Model) -> std::result::Result<LinearizedModel, CliError> {
    let lm = LinearizedModel::from_params(model, &cfg.params, cfg.settings.drift_form)?;
    let report = validate_regime(&cfg.params, lm.u, &cfg.thresholds())?;
    if !report.all_pass() {
        return Err(CliError::Physics(format!("{model}: regime check failed: {}", report.failures().join("; "))));
    }
    Ok(lm)
}

/// Rows of [`SPECTRUM_COLUMNS`] on the ω̄ grid.
pub fn spectrum_rows(lm: &LinearizedModel, grid: &[f64]) -> Result<Vec<Vec<f64>>> {
    grid.iter()
        .map(|&wb| {
            let opt = lm.optimal_phase(wb)?;
            Ok(vec![
                wb,
                lm.quadrature(wb, Quadrature::Amplitude)?,
                lm.quadrature(wb, Quadrature::Phase)?,
                opt.g_min,
                opt.g_max,
            ])
        })
        .collect()
}

fn view(cfg: &RunConfig, g: &[f64]) -> Vec<f64> {
    if cfg.settings.photocurrent {
        g.iter().map(|v| 1.0 + cfg.settings.eta * v).collect()
    } else {
        g.to_vec()
    }
}

fn reference(cfg: &RunConfig) -> (f64, String) {
    if cfg.settings.photocurrent {
        (1.0, "shot noise".into())
    } else {
        (0.0, "shot noise".into())
    }
}

fn y_label(cfg: &RunConfig) -> String {
    if cfg.settings.photocurrent {
        "photocurrent noise (shot noise = 1)".into()
    } else {
        "g (shot noise = 0)".into()
    }
}

pub fn cmd_spectrum(cfg: &RunConfig) -> std::result::Result<Vec<PathBuf>, CliError> {
    ensure_dir(&cfg.out)?;
    let mut files = Vec::new();
    let mut phase_curves = Vec::new();
    for &model in &cfg.models {
        let lm = linearized(cfg, model)?;
        let grid = cfg.grid.omega_bar(lm.decay());
        let rows = spectrum_rows(&lm, &grid)?;
        let meta = Metadata::new(cfg)
            .with("model", model)
            .with("u", lm.u)
            .with("phi0", lm.phi0)
            .with("convention", "normally ordered g, shot noise = 0, omega_bar = omega / A");
        let stem = format!("spectrum_{model}");
        if cfg.wants(Format::Csv) {
            files.push(write_csv(&cfg.out.join(format!("{stem}.csv")), &meta, &SPECTRUM_COLUMNS, &rows)?);
        }
        let col = |i: usize| rows.iter().map(|r| r[i]).collect::<Vec<f64>>();
        if cfg.wants(Format::Json) {
            let data = json!({
                "columns": SPECTRUM_COLUMNS,
                "omega_bar": col(0), "g_amplitude": col(1), "g_phase": col(2),
                "g_opt_minus": col(3), "g_opt_plus": col(4),
            });
            files.push(write_json(&cfg.out.join(format!("{stem}.json")), &meta, &data)?);
        }
        if cfg.wants(Format::Svg) {
            let names = ["amplitude", "phase", "optimal (min)", "optimal (max)"];
            let plot = Plot {
                title: format!("{} noise spectrum", model.name().to_uppercase()),
                x_label: "omega / A".into(),
                y_label: y_label(cfg),
                series: (1..5).map(|i| Series::line(names[i - 1], &grid, &view(cfg, &col(i)))).collect(),
                reference: Some(reference(cfg)),
                log_y: cfg.settings.log_scale,
            };
            files.push(write_svg(&cfg.out.join(format!("{stem}.svg")), &meta, &plot.render())?);
        }
        phase_curves.push(Series::line(&format!("{} phase", model.name().to_uppercase()), &grid, &view(cfg, &col(2))));
    }
    if cfg.wants(Format::Svg) && phase_curves.len() > 1 {
        let plot = Plot {
            title: "phase-quadrature spectra".into(),
            x_label: "omega / A".into(),
            y_label: y_label(cfg),
            series: phase_curves,
            reference: Some(reference(cfg)),
            log_y: cfg.settings.log_scale,
        };
        files.push(write_svg(&cfg.out.join("spectrum_phase_overlay.svg"), &Metadata::new(cfg), &plot.render())?);
    }
    Ok(files)
}

/// Largest |g − 2C_out S_oracle| over the grid for both quadratures.
pub fn oracle_deviation(lm: &LinearizedModel, grid: &[f64]) -> Result<f64> {
    let sde = LinearSDE::balanced(&lm.dd, lm.u);
    let omega: Vec<f64> = grid.iter().map(|w| w * lm.decay()).collect();
    let mut worst: f64 = 0.0;
    for q in [Quadrature::Amplitude, Quadrature::Phase] {
        let s = ou_spectrum_oracle(&sde, &omega, &balanced_weights(q.offset()))?;
        for (&wb, s) in grid.iter().zip(s) {
            worst = worst.max((lm.quadrature(wb, q)? - 2.0 * lm.inputs.c_out * s).abs());
        }
    }
    Ok(worst)
}

fn compare_model(cfg: &RunConfig, model: Model) -> Result<Value> {
    let lm = LinearizedModel::from_params(model, &cfg.params, cfg.settings.drift_form)?;
    let grid = cfg.grid.omega_bar(lm.decay());
    let table = lm.scaled_coeffs()?;
    let zero = lm.optimal(0.0)?;
    let t = match model {
        Model::Eha => t_eha(&lm.inputs, lm.u),
        _ => t_disp(&lm.inputs),
    };
    let band = if model == Model::Eha {
        let (wb, g) = eha_band_minimum(t, 1.0 + lm.eps());
        json!({ "omega_bar": wb, "g_min": g, "normalized_drop": -g * (1.0 + lm.eps()) })
    } else {
        Value::Null
    };
    Ok(json!({
        "u": lm.u,
        "phi0": lm.phi0,
        "beta_u": lm.beta_u(),
        "t": t,
        "scaled_coeffs": table,
        "zero_frequency": { "lower": zero.lower, "upper": zero.upper },
        "eha_band_minimum": band,
        "oracle_max_abs_deviation": oracle_deviation(&lm, &grid)?,
    }))
}

/// Drift/diffusion of the multi-atom model with κ₁ = 0, f_c = 1 against the
/// Kerr model with k = χ₁, at the operating intensity of the defaults.
fn reduction_identity(cfg: &RunConfig) -> Result<Value> {
    let lm = LinearizedModel::from_params(Model::Hm, &cfg.params, DriftForm::Exact)?;
    let hm_in = ModelInputs { kappa1: 0.0, fc: 1.0, ..lm.inputs };
    let eha_in = ModelInputs { k: lm.inputs.chi1, ..lm.inputs };
    let hm = drift_diffusion_from_inputs(Model::Hm, &hm_in, lm.u, DriftForm::Exact)?;
    let eha = drift_diffusion_from_inputs(Model::Eha, &eha_in, lm.u, DriftForm::Exact)?;
    Ok(json!({ "holds": hm == eha, "hm": hm, "eha": eha }))
}

pub fn cmd_compare(cfg: &RunConfig) -> std::result::Result<Vec<PathBuf>, CliError> {
    ensure_dir(&cfg.out)?;
    let mut models = serde_json::Map::new();
    for &model in &cfg.models {
        let entry = compare_model(cfg, model).unwrap_or_else(|e| json!({ "error": e.to_string() }));
        models.insert(model.name().into(), entry);
    }
    let regime = crate::semiclassical::steady_state(&cfg.params, &crate::params::susceptibilities(&cfg.params)?)
        .and_then(|ss| validate_regime(&cfg.params, ss.primary().u, &cfg.thresholds()))
        .map(|r| json!({ "all_pass": r.all_pass(), "report": r, "failures": r.failures() }))
        .unwrap_or_else(|e| json!({ "error": e.to_string() }));
    let report = json!({
        "models": models,
        "reduction_tags": model_reduction_check(&cfg.params, &ReductionTolerances::default()),
        "hm_eha_drift_identity": reduction_identity(cfg).unwrap_or_else(|e| json!({ "error": e.to_string() })),
        "regime": regime,
    });
    let meta = Metadata::new(cfg);
    Ok(vec![write_json(&cfg.out.join("compare.json"), &meta, &report)?])
}

/// Settings of a Monte Carlo spectrum run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McSettings {
    pub n_traj: usize,
    pub seed: u64,
    /// Θ − φ₀ of the simulated quadrature.
    pub theta_rel: f64,
    pub welch: WelchConfig,
    pub segments: usize,
    /// Report bins with ω̄ up to this.
    pub max_omega_bar: f64,
    pub threads: Option<usize>,
    pub keep_trajectories: bool,
}

impl McSettings {
    pub fn new(n_traj: usize, seed: u64, theta_rel: f64) -> Self {
        McSettings {
            n_traj,
            seed,
            theta_rel,
            welch: WelchConfig::default(),
            segments: 16,
            max_omega_bar: 5.0,
            threads: None,
            keep_trajectories: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentRow {
    pub name: &'static str,
    pub mc: f64,
    pub std_err: f64,
    pub exact: f64,
}

/// Monte Carlo estimate of a linearized spectrum next to its closed form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McRun {
    pub omega_bar: Vec<f64>,
    pub g_mc: Vec<f64>,
    pub std_err: Vec<f64>,
    pub g_exact: Vec<f64>,
    /// "real" when the noise factor is real, "complex" for the doubled
    /// phase space.
    pub noise_mode: &'static str,
    pub n_traj: usize,
    pub n_segments: usize,
    pub dt: f64,
    pub sample_dt: f64,
    pub burn_in: f64,
    pub moments: Vec<MomentRow>,
    #[serde(skip)]
    pub trajectories: Option<TrajectoryEnsemble>,
}

impl McRun {
    /// Index of the largest |g_exact|.
    pub fn peak(&self) -> usize {
        (0..self.g_exact.len()).fold(0, |b, i| if self.g_exact[i].abs() > self.g_exact[b].abs() { i } else { b })
    }
}

const MOMENT_NAMES: [&str; 6] = ["mean_eps_bal", "mean_psi_bal", "sq_eps_bal", "cross_bal", "sq_psi_bal", "sq_quadrature"];

/// Simulates the linearized fluctuations in the balanced pair
/// (ε/(2√U), √U ψ) and estimates the homodyne spectrum by Welch averaging.
pub fn simulate_linearized(lm: &LinearizedModel, s: &McSettings) -> Result<McRun> {
    lm.dd.check_stable()?;
    let sde = LinearSDE::balanced(&lm.dd, lm.u);
    let w = balanced_weights(s.theta_rel);
    let decay = lm.decay();
    let n_samples = s.welch.samples_for(s.segments);
    let mut cfg = SimConfig::for_decay(decay, s.n_traj, n_samples, s.seed);
    cfg.threads = s.threads;
    let est = WelchEstimator::new(s.welch, cfg.sample_dt())?;
    est.check_resolution(sde.slowest_decay())?;
    let keep = s.keep_trajectories;
    let per = simulate_reduce(&sde, &cfg, |_, xs| {
        let y: Vec<Complex64> = xs.iter().map(|x| w[0] * x[0] + w[1] * x[1]).collect();
        let n = xs.len() as f64;
        let mut m = [Complex64::new(0.0, 0.0); 6];
        for (x, y) in xs.iter().zip(&y) {
            let v = [x[0], x[1], x[0] * x[0], x[0] * x[1], x[1] * x[1], y * y];
            for (a, b) in m.iter_mut().zip(v) {
                *a += b / n;
            }
        }
        let kept: Option<Vec<Vec2>> = keep.then(|| xs.to_vec());
        est.periodogram(&y).map(|p| (p, m, kept))
    })?;
    let mut pgrams = Vec::with_capacity(per.len());
    let mut mom = Vec::with_capacity(per.len());
    let mut samples = Vec::new();
    for r in per {
        let (p, m, kept) = r?;
        pgrams.push(p);
        mom.push(m);
        if let Some(k) = kept {
            samples.push(k);
        }
    }
    let spec = crate::sde::welch_estimate(&est, n_samples, &pgrams)?.scaled(2.0 * lm.inputs.c_out);
    let wb_all = spec.omega_bar(decay);
    let keep_bins: Vec<usize> = (0..wb_all.len()).filter(|&k| wb_all[k] <= s.max_omega_bar).collect();
    let omega_bar: Vec<f64> = keep_bins.iter().map(|&k| wb_all[k]).collect();
    let g_exact = omega_bar.iter().map(|&wb| lm.g(wb, s.theta_rel)).collect::<Result<Vec<_>>>()?;

    let exact = linear_moment_oracle(&sde, &OracleOptions::default())?;
    let second = |i: usize, j: usize| (exact.cov[i][j] + exact.mean[i] * exact.mean[j]).re;
    let mut sq_y = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            sq_y += (w[i] * w[j]).re * second(i, j);
        }
    }
    let exact_vals = [exact.mean[0].re, exact.mean[1].re, second(0, 0), second(0, 1), second(1, 1), sq_y];
    let m = mom.len() as f64;
    let moments = (0..6)
        .map(|i| {
            let mean = mom.iter().map(|v| v[i].re).sum::<f64>() / m;
            let var = mom.iter().map(|v| (v[i].re - mean).powi(2)).sum::<f64>() / (m - 1.0);
            MomentRow { name: MOMENT_NAMES[i], mc: mean, std_err: (var / m).sqrt(), exact: exact_vals[i] }
        })
        .collect();
    let burn_in = 10.0 / sde.slowest_decay();
    let trajectories = keep.then(|| TrajectoryEnsemble {
        n_traj: s.n_traj,
        dt: cfg.dt,
        sample_dt: cfg.sample_dt(),
        burn_in,
        t_max: burn_in + cfg.sample_dt() * n_samples as f64,
        seed: s.seed,
        scheme: "euler-maruyama",
        samples,
    });
    Ok(McRun {
        g_mc: keep_bins.iter().map(|&k| spec.value[k]).collect(),
        std_err: keep_bins.iter().map(|&k| spec.std_err[k]).collect(),
        omega_bar,
        g_exact,
        noise_mode: if sde.is_real() { "real" } else { "complex" },
        n_traj: s.n_traj,
        n_segments: spec.n_segments,
        dt: cfg.dt,
        sample_dt: cfg.sample_dt(),
        burn_in,
        moments,
        trajectories,
    })
}

pub fn cmd_simulate(cfg: &RunConfig) -> std::result::Result<Vec<PathBuf>, CliError> {
    ensure_dir(&cfg.out)?;
    let mut files = Vec::new();
    for &model in &cfg.models {
        let lm = linearized(cfg, model)?;
        let settings = McSettings {
            welch: WelchConfig { segment_len: cfg.settings.segment_len, overlap: 0.5 },
            segments: cfg.settings.segments,
            max_omega_bar: cfg.grid.omega_bar(lm.decay()).last().copied().unwrap_or(5.0).abs(),
            threads: cfg.threads,
            keep_trajectories: cfg.settings.dump,
            ..McSettings::new(cfg.settings.ntraj, cfg.settings.seed, cfg.settings.quadrature.offset())
        };
        let run = simulate_linearized(&lm, &settings)?;
        let meta = Metadata::new(cfg)
            .with("model", model)
            .with("noise_mode", run.noise_mode)
            .with("quadrature", cfg.settings.quadrature)
            .with("n_traj", run.n_traj)
            .with("n_segments", run.n_segments)
            .with("dt", run.dt)
            .with("sample_dt", run.sample_dt)
            .with("burn_in", run.burn_in)
            .with("scheme", "euler-maruyama")
            .with("window", "hann, 50% overlap");
        let stem = format!("simulate_{model}");
        let rows: Vec<Vec<f64>> = (0..run.omega_bar.len())
            .map(|k| vec![run.omega_bar[k], run.g_mc[k], run.std_err[k], run.g_exact[k]])
            .collect();
        let mom_rows: Vec<Vec<f64>> = run.moments.iter().enumerate().map(|(i, r)| vec![i as f64, r.mc, r.std_err, r.exact]).collect();
        let mom_meta = meta.clone().with("moment_index", MOMENT_NAMES);
        if cfg.wants(Format::Csv) {
            files.push(write_csv(&cfg.out.join(format!("{stem}.csv")), &meta, &["omega_bar", "g_mc", "std_err", "g_exact"], &rows)?);
            files.push(write_csv(&cfg.out.join(format!("moments_{model}.csv")), &mom_meta, &["index", "mc", "std_err", "exact"], &mom_rows)?);
        }
        if cfg.wants(Format::Json) {
            files.push(write_json(&cfg.out.join(format!("{stem}.json")), &meta, &run)?);
        }
        if cfg.wants(Format::Svg) {
            let plot = Plot {
                title: format!("{} Monte Carlo spectrum", model.name().to_uppercase()),
                x_label: "omega / A".into(),
                y_label: y_label(cfg),
                series: vec![
                    Series::line("closed form", &run.omega_bar, &view(cfg, &run.g_exact)),
                    Series {
                        name: format!("Welch, {} traj", run.n_traj),
                        x: run.omega_bar.clone(),
                        y: view(cfg, &run.g_mc),
                        err: Some(run.std_err.iter().map(|e| e * if cfg.settings.photocurrent { cfg.settings.eta } else { 1.0 }).collect()),
                    },
                ],
                reference: Some(reference(cfg)),
                log_y: cfg.settings.log_scale,
            };
            files.push(write_svg(&cfg.out.join(format!("{stem}.svg")), &meta, &plot.render())?);
        }
        if let Some(ens) = &run.trajectories {
            let path = cfg.out.join(format!("trajectories_{model}.bin"));
            let f = std::fs::File::create(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            write_trajectory_dump(ens, std::io::BufWriter::new(f))?;
            files.push(path);
        }
    }
    Ok(files)
}

/// ⟨n⟩ and ξ/⟨n⟩ of the undriven medium over a log grid of βq₀ in
/// [1e−3, 1e3]. Columns: beta_q0, mean_n, xi, xi_over_n.
pub fn mandel_sweep(beta: f64, c: f64, points: usize) -> Result<Vec<Vec<f64>>> {
    let beta = if beta > 0.0 { beta } else { 1.0 };
    (0..points)
        .map(|i| {
            let bq = 10f64.powf(-3.0 + 6.0 * i as f64 / (points - 1) as f64);
            let st = generation_stats(bq / beta, beta, c)?;
            Ok(vec![bq, st.mean_n, st.mandel_xi, st.mandel_xi / st.mean_n])
        })
        .collect()
}

pub fn cmd_invfree(cfg: &RunConfig) -> std::result::Result<Vec<PathBuf>, CliError> {
    ensure_dir(&cfg.out)?;
    let s = &cfg.settings;
    let c = s.invfree_c.unwrap_or_else(|| cfg.params.c_total());
    if !(c > 0.0) {
        return Err(CliError::Physics(format!("total cavity loss must be positive (got {c})")));
    }
    let coeffs = InvFreeCoeffs::from_resonant(s.invfree_q0, s.invfree_beta, s.invfree_x, s.invfree_a0, c);
    coeffs.check_stability().map_err(|e| match e {
        Error::Stability { inequality, value } => CliError::Physics(format!("stability violated: {inequality} (value {value:.6e})")),
        other => other.into(),
    })?;
    let moments = steady_moments(&coeffs, 0.0)?;
    let stats = generation_stats(s.invfree_q0, s.invfree_beta, c)?;
    let decay = -coeffs.k.re;
    let grid = cfg.grid.omega_bar(decay);
    let y_rows: Vec<Vec<f64>> = grid
        .iter()
        .map(|&wb| {
            let w = wb * decay;
            vec![wb, spectrum_y(&coeffs, &moments, w, 0.0), spectrum_y(&coeffs, &moments, w, std::f64::consts::FRAC_PI_2)]
        })
        .collect();
    let sweep = mandel_sweep(s.invfree_beta, c, s.sweep_points)?;
    let meta = Metadata::new(cfg).with("coefficients", coeffs).with("omega_bar_unit", decay);
    let stats_row = vec![vec![stats.mean_n, stats.linewidth, stats.mandel_xi, stats.mandel_xi / stats.mean_n]];
    let moment_row = vec![vec![
        moments.mean_alpha.re,
        moments.mean_alpha.im,
        moments.mean_n,
        moments.s,
        moments.mu.re,
        moments.mu.im,
    ]];
    let mut files = Vec::new();
    let out = |name: &str| cfg.out.join(name);
    if cfg.wants(Format::Csv) {
        files.push(write_csv(&out("invfree_moments.csv"), &meta, &["mean_alpha_re", "mean_alpha_im", "mean_n", "s", "mu_re", "mu_im"], &moment_row)?);
        files.push(write_csv(&out("invfree_stats.csv"), &meta, &["mean_n", "linewidth", "mandel_xi", "xi_over_n"], &stats_row)?);
        files.push(write_csv(&out("invfree_y.csv"), &meta, &["omega_bar", "y_theta_0", "y_theta_half_pi"], &y_rows)?);
        files.push(write_csv(&out("invfree_mandel.csv"), &meta, &["beta_q0", "mean_n", "xi", "xi_over_n"], &sweep)?);
    }
    if cfg.wants(Format::Json) {
        let data = json!({
            "moments": moments,
            "stats": stats,
            "y": { "omega_bar": grid, "theta_0": y_rows.iter().map(|r| r[1]).collect::<Vec<_>>(),
                   "theta_half_pi": y_rows.iter().map(|r| r[2]).collect::<Vec<_>>() },
            "mandel_sweep": sweep,
        });
        files.push(write_json(&out("invfree.json"), &meta, &data)?);
    }
    if cfg.wants(Format::Svg) {
        let col = |i: usize| y_rows.iter().map(|r| r[i]).collect::<Vec<f64>>();
        let plot = Plot {
            title: "intracavity quadrature spectrum".into(),
            x_label: "omega / |Re k|".into(),
            y_label: "Y".into(),
            series: vec![Series::line("Theta = 0", &grid, &col(1)), Series::line("Theta = pi/2", &grid, &col(2))],
            reference: Some((0.0, "coherent".into())),
            log_y: s.log_scale,
        };
        files.push(write_svg(&out("invfree_y.svg"), &meta, &plot.render())?);
        let bq: Vec<f64> = sweep.iter().map(|r| r[0].log10()).collect();
        let plot = Plot {
            title: "Mandel ratio".into(),
            x_label: "log10(beta q0)".into(),
            y_label: "xi / <n>".into(),
            series: vec![Series::line("xi / <n>", &bq, &sweep.iter().map(|r| r[3]).collect::<Vec<_>>())],
            reference: Some((0.4, "2/5".into())),
            log_y: false,
        };
        files.push(write_svg(&out("invfree_mandel.svg"), &meta, &plot.render())?);
    }
    Ok(files)
}
