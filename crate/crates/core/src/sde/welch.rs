use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use super::{c, C64};
use crate::error::{Error, Result};

/// Segmenting of a sampled series for Welch averaging with a Hann window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WelchConfig {
    pub segment_len: usize,
    /// Fraction of a segment shared with the next one, in [0, 1).
    pub overlap: f64,
}

impl Default for WelchConfig {
    fn default() -> Self {
        WelchConfig { segment_len: 2048, overlap: 0.5 }
    }
}

impl WelchConfig {
    pub fn hop(&self) -> usize {
        ((self.segment_len as f64 * (1.0 - self.overlap)).round() as usize).max(1)
    }

    /// Samples needed for `n_segments` segments.
    pub fn samples_for(&self, n_segments: usize) -> usize {
        self.segment_len + self.hop() * n_segments.saturating_sub(1)
    }
}

/// Periodogram averaging for one sampling interval, reusable across
/// trajectories.
pub struct WelchEstimator {
    cfg: WelchConfig,
    sample_dt: f64,
    window: Vec<f64>,
    scale: f64,
    fft: Arc<dyn Fft<f64>>,
}

impl WelchEstimator {
    pub fn new(cfg: WelchConfig, sample_dt: f64) -> Result<Self> {
        let n = cfg.segment_len;
        if n < 4 || !(0.0..1.0).contains(&cfg.overlap) {
            return Err(Error::InvalidParameter {
                name: "segment_len",
                reason: "need at least 4 samples per segment and overlap in [0, 1)".into(),
            });
        }
        if !(sample_dt > 0.0) {
            return Err(Error::InvalidParameter { name: "sample_dt", reason: "must be positive".into() });
        }
        // periodic Hann
        let window: Vec<f64> = (0..n).map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos()).collect();
        let power: f64 = window.iter().map(|w| w * w).sum();
        let fft = FftPlanner::new().plan_fft_forward(n);
        Ok(WelchEstimator { cfg, sample_dt, window, scale: sample_dt / power, fft })
    }

    pub fn config(&self) -> &WelchConfig {
        &self.cfg
    }

    pub fn segment_duration(&self) -> f64 {
        self.cfg.segment_len as f64 * self.sample_dt
    }

    /// Angular frequencies of the returned bins, 0 to Nyquist.
    pub fn omega(&self) -> Vec<f64> {
        let n = self.cfg.segment_len;
        (0..=n / 2).map(|k| 2.0 * PI * k as f64 / (n as f64 * self.sample_dt)).collect()
    }

    /// Refuses segments too short to resolve a Lorentzian of half-width
    /// `linewidth` (rad/s): the segment must span 8 decay times.
    pub fn check_resolution(&self, linewidth: f64) -> Result<()> {
        let required = 8.0 / linewidth;
        let segment = self.segment_duration();
        if segment < required {
            return Err(Error::SpectralResolution { segment, required });
        }
        Ok(())
    }

    pub fn n_segments(&self, len: usize) -> usize {
        if len < self.cfg.segment_len {
            0
        } else {
            1 + (len - self.cfg.segment_len) / self.cfg.hop()
        }
    }

    /// Segment-averaged estimate of ∫⟨y(t+τ)y(t)⟩e^{iωτ}dτ from one
    /// zero-mean series. Uses Y(ω)Y(−ω) rather than |Y(ω)|², which agrees
    /// for real series and stays unbiased for doubled phase-space samples.
    pub fn periodogram(&self, y: &[C64]) -> Result<Vec<f64>> {
        let n = self.cfg.segment_len;
        let segments = self.n_segments(y.len());
        if segments == 0 {
            return Err(Error::InvalidParameter {
                name: "n_samples",
                reason: format!("{} samples is shorter than one segment of {n}", y.len()),
            });
        }
        let mut acc = vec![0.0; n / 2 + 1];
        let mut buf = vec![c(0.0); n];
        let mut scratch = vec![c(0.0); self.fft.get_inplace_scratch_len()];
        for s in 0..segments {
            let start = s * self.cfg.hop();
            for (i, b) in buf.iter_mut().enumerate() {
                *b = y[start + i] * self.window[i];
            }
            self.fft.process_with_scratch(&mut buf, &mut scratch);
            for (k, a) in acc.iter_mut().enumerate() {
                *a += (buf[k] * buf[(n - k) % n]).re;
            }
        }
        let norm = self.scale / segments as f64;
        acc.iter_mut().for_each(|a| *a *= norm);
        Ok(acc)
    }
}

/// Ensemble spectrum: mean over per-trajectory periodograms with the
/// standard error of that mean.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WelchSpectrum {
    pub omega: Vec<f64>,
    pub value: Vec<f64>,
    pub std_err: Vec<f64>,
    pub n_segments: usize,
    pub n_traj: usize,
}

impl WelchSpectrum {
    pub fn omega_bar(&self, decay: f64) -> Vec<f64> {
        self.omega.iter().map(|w| w / decay).collect()
    }

    /// Multiplies value and standard error, e.g. by 2C_out for shot-noise units.
    pub fn scaled(mut self, factor: f64) -> Self {
        self.value.iter_mut().for_each(|v| *v *= factor);
        self.std_err.iter_mut().for_each(|v| *v *= factor.abs());
        self
    }
}

/// Combines per-trajectory periodograms from [`WelchEstimator::periodogram`].
pub fn welch_estimate(est: &WelchEstimator, n_samples: usize, per_traj: &[Vec<f64>]) -> Result<WelchSpectrum> {
    let m = per_traj.len();
    if m < 2 {
        return Err(Error::InvalidParameter { name: "n_traj", reason: "standard error needs two trajectories".into() });
    }
    let bins = per_traj[0].len();
    let mut value = vec![0.0; bins];
    let mut std_err = vec![0.0; bins];
    for k in 0..bins {
        let mean = per_traj.iter().map(|p| p[k]).sum::<f64>() / m as f64;
        let var = per_traj.iter().map(|p| (p[k] - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
        value[k] = mean;
        std_err[k] = (var / m as f64).sqrt();
    }
    Ok(WelchSpectrum { omega: est.omega(), value, std_err, n_segments: est.n_segments(n_samples), n_traj: m })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn white(seed: u64, len: usize, sigma: f64) -> Vec<C64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..len).map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            c(sigma * z)
        }).collect()
    }

    #[test]
    fn white_noise_level() {
        // variance σ² sampled every Δs has flat two-sided density σ²Δs
        let (sigma, ds) = (1.5, 0.01);
        let cfg = WelchConfig { segment_len: 256, overlap: 0.5 };
        let est = WelchEstimator::new(cfg, ds).unwrap();
        let len = cfg.samples_for(32);
        let per: Vec<Vec<f64>> = (0..64).map(|i| est.periodogram(&white(i, len, sigma)).unwrap()).collect();
        let spec = welch_estimate(&est, len, &per).unwrap();
        assert_eq!(spec.n_segments, 32);
        let level = sigma * sigma * ds;
        let inner = &spec.value[5..120];
        let avg = inner.iter().sum::<f64>() / inner.len() as f64;
        assert!((avg / level - 1.0).abs() < 0.01, "{avg} vs {level}");
        let bad = spec.value.iter().zip(&spec.std_err).skip(1).filter(|(v, e)| (*v - level).abs() > 4.0 * *e).count();
        assert!(bad <= 2, "{bad} bins beyond 4 SE");
    }

    #[test]
    fn std_err_scales_with_trajectories() {
        let cfg = WelchConfig { segment_len: 128, overlap: 0.5 };
        let est = WelchEstimator::new(cfg, 1.0).unwrap();
        let len = cfg.samples_for(8);
        let per: Vec<Vec<f64>> = (0..400).map(|i| est.periodogram(&white(i, len, 1.0)).unwrap()).collect();
        let mean_se = |m: usize| {
            let s = welch_estimate(&est, len, &per[..m]).unwrap();
            s.std_err[5..60].iter().sum::<f64>() / 55.0
        };
        let ratio = mean_se(100) / mean_se(400);
        assert!((ratio - 2.0).abs() < 0.2, "{ratio}");
    }

    #[test]
    fn sinusoid_peaks_in_its_bin() {
        let cfg = WelchConfig { segment_len: 64, overlap: 0.0 };
        let est = WelchEstimator::new(cfg, 1.0).unwrap();
        let w0 = est.omega()[8];
        let y: Vec<C64> = (0..256).map(|i| c((w0 * i as f64).cos())).collect();
        let p = est.periodogram(&y).unwrap();
        let peak = p.iter().enumerate().fold(0, |b, (i, v)| if *v > p[b] { i } else { b });
        assert_eq!(peak, 8);
    }

    #[test]
    fn resolution_and_length_guards() {
        let est = WelchEstimator::new(WelchConfig { segment_len: 100, overlap: 0.5 }, 0.01).unwrap();
        assert!(est.check_resolution(8.0).is_ok());
        assert!(matches!(est.check_resolution(1.0), Err(Error::SpectralResolution { .. })));
        assert!(est.periodogram(&[c(0.0); 50]).is_err());
        assert!(WelchEstimator::new(WelchConfig { segment_len: 100, overlap: 1.0 }, 0.01).is_err());
    }
}
