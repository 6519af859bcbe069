use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use super::{c, Mat2, SdeModel, Vec2};
use crate::error::{Error, Result};

/// Euler–Maruyama run settings. Times are in seconds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub n_traj: usize,
    pub dt: f64,
    /// Recorded samples per trajectory after burn-in.
    pub n_samples: usize,
    /// Integration steps between recorded samples.
    pub sample_stride: usize,
    /// Discarded lead-in; raised to 10 relaxation times when shorter.
    pub burn_in: Option<f64>,
    pub seed: u64,
    /// Allow unstable drift and skip the burn-in.
    pub transient: bool,
    pub initial: Option<Vec2>,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl SimConfig {
    /// Sampling suited to spectra of a system with decay rate `decay`:
    /// dt = 0.002/A, samples every 0.05/A, `n_samples` recorded.
    pub fn for_decay(decay: f64, n_traj: usize, n_samples: usize, seed: u64) -> Self {
        SimConfig {
            n_traj,
            dt: 0.002 / decay,
            n_samples,
            sample_stride: 25,
            burn_in: None,
            seed,
            transient: false,
            initial: None,
            threads: None,
        }
    }

    pub fn sample_dt(&self) -> f64 {
        self.dt * self.sample_stride as f64
    }
}

/// Recorded trajectories of an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryEnsemble {
    pub n_traj: usize,
    pub dt: f64,
    pub sample_dt: f64,
    pub burn_in: f64,
    /// End time of the recorded window.
    pub t_max: f64,
    pub seed: u64,
    pub scheme: &'static str,
    pub samples: Vec<Vec<Vec2>>,
}

struct Plan {
    burn_steps: usize,
    burn_in: f64,
}

fn plan<M: SdeModel>(model: &M, cfg: &SimConfig) -> Result<Plan> {
    if cfg.n_traj == 0 || cfg.sample_stride == 0 {
        return Err(Error::InvalidParameter { name: "n_traj", reason: "need n_traj > 0 and sample_stride > 0".into() });
    }
    if !(cfg.dt > 0.0) {
        return Err(Error::InvalidParameter { name: "dt", reason: "must be positive".into() });
    }
    let guard = cfg.dt * model.max_rate();
    if guard >= 0.1 {
        return Err(Error::InvalidParameter {
            name: "dt",
            reason: format!("dt * max|rate| = {guard:.3e} must stay below 0.1"),
        });
    }
    let slow = model.slowest_decay();
    if cfg.transient {
        return Ok(Plan { burn_steps: 0, burn_in: 0.0 });
    }
    if !(slow > 0.0) {
        return Err(Error::Unstable(format!(
            "slowest drift rate {slow:.4e} is not damped; stationary statistics refused"
        )));
    }
    let burn_in = cfg.burn_in.unwrap_or(0.0).max(10.0 / slow);
    Ok(Plan { burn_steps: (burn_in / cfg.dt).ceil() as usize, burn_in })
}

fn run_one<M: SdeModel>(model: &M, cfg: &SimConfig, plan: &Plan, index: usize) -> Vec<Vec2> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);
    let sq = cfg.dt.sqrt();
    let mut x = cfg.initial.unwrap_or_else(|| model.fixed_point());
    let mut b: Mat2 = [[c(0.0); 2]; 2];
    let mut step = |x: &mut Vec2, rng: &mut ChaCha8Rng| {
        let a = model.drift(x);
        model.noise_factor(x, &mut b);
        let w0: f64 = StandardNormal.sample(rng);
        let w1: f64 = StandardNormal.sample(rng);
        let (w0, w1) = (w0 * sq, w1 * sq);
        x[0] += a[0] * cfg.dt + b[0][0] * w0 + b[0][1] * w1;
        x[1] += a[1] * cfg.dt + b[1][0] * w0 + b[1][1] * w1;
    };
    for _ in 0..plan.burn_steps {
        step(&mut x, &mut rng);
    }
    let mut out = Vec::with_capacity(cfg.n_samples);
    for _ in 0..cfg.n_samples {
        for _ in 0..cfg.sample_stride {
            step(&mut x, &mut rng);
        }
        out.push(x);
    }
    out
}

fn in_pool<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Runs every trajectory and hands its recorded samples to `reduce`,
/// dropping them afterwards. Results come back in trajectory order, so the
/// output is independent of scheduling.
pub fn simulate_reduce<M, R, F>(model: &M, cfg: &SimConfig, reduce: F) -> Result<Vec<R>>
where
    M: SdeModel,
    R: Send,
    F: Fn(usize, &[Vec2]) -> R + Sync + Send,
{
    let plan = plan(model, cfg)?;
    in_pool(cfg.threads, || {
        (0..cfg.n_traj)
            .into_par_iter()
            .map(|i| {
                let samples = run_one(model, cfg, &plan, i);
                reduce(i, &samples)
            })
            .collect()
    })
}

/// Runs the ensemble and keeps every recorded sample.
pub fn simulate<M: SdeModel>(model: &M, cfg: &SimConfig) -> Result<TrajectoryEnsemble> {
    let p = plan(model, cfg)?;
    let samples = simulate_reduce(model, cfg, |_, s| s.to_vec())?;
    Ok(TrajectoryEnsemble {
        n_traj: cfg.n_traj,
        dt: cfg.dt,
        sample_dt: cfg.sample_dt(),
        burn_in: p.burn_in,
        t_max: p.burn_in + cfg.sample_dt() * cfg.n_samples as f64,
        seed: cfg.seed,
        scheme: "euler-maruyama",
        samples,
    })
}

const DUMP_MAGIC: &[u8; 8] = b"CHI3TRJ1";

/// Raw little-endian dump: magic, n_traj, n_samples (u64), dt, sample_dt,
/// t_max (f64), seed (u64), then per trajectory and sample the four f64
/// values re x₀, im x₀, re x₁, im x₁.
pub fn write_trajectory_dump<W: Write>(ens: &TrajectoryEnsemble, mut w: W) -> Result<()> {
    let n_samples = ens.samples.first().map_or(0, |s| s.len());
    w.write_all(DUMP_MAGIC)?;
    w.write_all(&(ens.n_traj as u64).to_le_bytes())?;
    w.write_all(&(n_samples as u64).to_le_bytes())?;
    for v in [ens.dt, ens.sample_dt, ens.t_max] {
        w.write_all(&v.to_le_bytes())?;
    }
    w.write_all(&ens.seed.to_le_bytes())?;
    for traj in &ens.samples {
        for x in traj {
            for v in [x[0].re, x[0].im, x[1].re, x[1].im] {
                w.write_all(&v.to_le_bytes())?;
            }
        }
    }
    Ok(())
}

/// Reads a dump written by [`write_trajectory_dump`]. Burn-in is not stored
/// and comes back as zero.
pub fn read_trajectory_dump<R: Read>(mut r: R) -> Result<TrajectoryEnsemble> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != DUMP_MAGIC {
        return Err(Error::Io("not a trajectory dump".into()));
    }
    let mut word = [0u8; 8];
    let mut next = |r: &mut R| -> Result<[u8; 8]> {
        r.read_exact(&mut word)?;
        Ok(word)
    };
    let n_traj = u64::from_le_bytes(next(&mut r)?) as usize;
    let n_samples = u64::from_le_bytes(next(&mut r)?) as usize;
    let dt = f64::from_le_bytes(next(&mut r)?);
    let sample_dt = f64::from_le_bytes(next(&mut r)?);
    let t_max = f64::from_le_bytes(next(&mut r)?);
    let seed = u64::from_le_bytes(next(&mut r)?);
    let mut samples = Vec::with_capacity(n_traj);
    for _ in 0..n_traj {
        let mut traj = Vec::with_capacity(n_samples);
        for _ in 0..n_samples {
            let mut v = [0.0; 4];
            for x in v.iter_mut() {
                *x = f64::from_le_bytes(next(&mut r)?);
            }
            traj.push([super::C64::new(v[0], v[1]), super::C64::new(v[2], v[3])]);
        }
        samples.push(traj);
    }
    Ok(TrajectoryEnsemble { n_traj, dt, sample_dt, burn_in: 0.0, t_max, seed, scheme: "euler-maruyama", samples })
}
