//! Experiment pipelines: build resource → run pattern → tomography → fits →
//! artifacts. Noiseless output is checked against the channel model before
//! any noisy run starts.

use anyhow::Result;
use mbqc::engine::{purity_loss, Tomography};
use mbqc::rng::child_seed;
use mbqc::vqe::{optimize_theta, thermo_limit_theta, Objective};
use rayon::prelude::*;

use crate::config::{Config, Experiment, ThetaFrom};
use crate::output::Artifacts;

pub mod exp0;
pub mod exp1;
pub mod exp2;
pub mod exp3;
pub mod exp4;
pub mod tools;

/// Tolerance for noiseless simulation vs closed-form channel model.
pub const PIPELINE_TOL: f64 = 1e-9;

pub fn run(cfg: &Config) -> Result<Artifacts> {
    log::info!("running {} (config {})", cfg.experiment, &cfg.hash()[..12]);
    match cfg.experiment {
        Experiment::Exp0 => Ok(exp0::run(cfg)?.artifacts),
        Experiment::Exp1 => Ok(exp1::run(cfg)?.artifacts),
        Experiment::Exp2 => Ok(exp2::run(cfg)?.artifacts),
        Experiment::Exp3 => Ok(exp3::run(cfg)?.artifacts),
        Experiment::Exp4 => Ok(exp4::run(cfg)?.artifacts),
        Experiment::ChannelGrid => Ok(tools::channel_grid(cfg)?.artifacts),
        Experiment::Packing => tools::packing(cfg),
        Experiment::Crossover => Ok(tools::crossover(cfg)?.artifacts),
    }
}

/// VQE angle for a given α.
pub fn theta_for(alpha: f64, n: usize, from: ThetaFrom) -> mbqc::Result<f64> {
    match from {
        ThetaFrom::Finite => Ok(optimize_theta(Objective::Analytic, alpha, n, 64, 100)?.theta),
        ThetaFrom::Thermodynamic => thermo_limit_theta(alpha),
    }
}

/// (α, θ) pairs from a config: explicit θ (α unknown) or θ derived from α.
pub fn angles(cfg: &Config, n: usize, default_alpha: &[f64], from: ThetaFrom) -> Result<Vec<(Option<f64>, f64)>> {
    if let Some(t) = &cfg.theta {
        return Ok(t.iter().map(|&t| (None, t)).collect());
    }
    let alphas = cfg.alpha.clone().unwrap_or_else(|| default_alpha.to_vec());
    alphas.iter().map(|&a| Ok((Some(a), theta_for(a, n, cfg.theta_from.unwrap_or(from))?))).collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointStats {
    pub x: f64,
    pub y: f64,
    pub err_x: f64,
    pub err_y: f64,
    pub lp: f64,
    pub lp_err: f64,
    pub accepted_fraction: f64,
    /// Shots per readout axis, summed over trials.
    pub shots: usize,
}

/// Averages `trials` independent tomography runs. With one trial the
/// per-shot standard error is kept; otherwise the standard error of the
/// trial means is reported, as for repeated hardware runs.
pub fn trial_average<F>(trials: usize, seed: u64, f: F) -> Result<PointStats>
where
    F: Fn(u64) -> mbqc::Result<Tomography> + Sync,
{
    let runs: Vec<Tomography> =
        (0..trials as u64).into_par_iter().map(|t| f(child_seed(seed, t))).collect::<mbqc::Result<_>>()?;
    let k = runs.len() as f64;
    let (x, y, err_x, err_y) = if runs.len() == 1 {
        (runs[0].x, runs[0].y, runs[0].err_x, runs[0].err_y)
    } else {
        let mean = |g: fn(&Tomography) -> f64| runs.iter().map(g).sum::<f64>() / k;
        let sem = |g: fn(&Tomography) -> f64, m: f64| {
            (runs.iter().map(|r| (g(r) - m).powi(2)).sum::<f64>() / (k - 1.0) / k).sqrt()
        };
        let (mx, my) = (mean(|r| r.x), mean(|r| r.y));
        (mx, my, sem(|r| r.x, mx), sem(|r| r.y, my))
    };
    Ok(PointStats {
        x,
        y,
        err_x,
        err_y,
        lp: purity_loss(x, y),
        lp_err: ((x * err_x).powi(2) + (y * err_y).powi(2)).sqrt(),
        accepted_fraction: runs.iter().map(|r| r.accepted_fraction).sum::<f64>() / k,
        shots: runs.iter().map(|r| r.shots).sum(),
    })
}

/// β split evenly over `sites`.
pub fn split(sites: &[usize], beta: f64) -> Vec<(usize, f64)> {
    sites.iter().map(|&s| (s, beta / sites.len() as f64)).collect()
}

pub fn opt(v: Option<f64>) -> String {
    v.map(crate::output::num).unwrap_or_default()
}
