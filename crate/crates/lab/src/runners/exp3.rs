//! Rotation splitting on the deformed 9-site chain: small-angle purity loss
//! for a total angle β split over m sites; curvature ∝ 1/m.

use std::f64::consts::FRAC_PI_3;

use anyhow::{bail, Result};
use mbqc::channel::split_purity_loss;
use mbqc::engine::{purity_loss, sample_tomography, BranchTable, MeasurementPattern, Mode};
use mbqc::noise::{noisy_tomography, NoiseSpec};
use mbqc::rng::child_seed;
use mbqc::states::{ResourceKind, ResourceSpec};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{linspace, Config, ThetaFrom};
use crate::fit::{fit_line, fit_quadratic_offset, fit_quadratic_offset_with_errors, FitResult};
use crate::output::{num, Artifacts, Table};
use crate::plot::{Chart, Series};

use super::{opt, split, theta_for, trial_average, PointStats, PIPELINE_TOL};

pub struct Curve {
    pub m: usize,
    pub noise_p: f64,
    pub points: Vec<(f64, PointStats)>,
    pub fit: FitResult,
}

pub struct Exp3 {
    pub alpha: Option<f64>,
    pub theta: f64,
    pub sigma: f64,
    pub betas: Vec<f64>,
    pub curves: Vec<Curve>,
    pub noisy: Vec<Curve>,
    /// Quadratic-with-offset fits of the closed-form split purity loss on
    /// the same β grid, one per m.
    pub theory: Vec<(usize, FitResult)>,
    /// Curvature against 1/m, data and theory; needs at least three m.
    pub slope_fit: Option<FitResult>,
    pub theory_slope_fit: Option<FitResult>,
    pub artifacts: Artifacts,
}

impl Exp3 {
    pub fn curvature(&self, m: usize) -> (f64, f64) {
        let c = self.curves.iter().find(|c| c.m == m).expect("m in run").fit.get("c");
        (c.value, c.stderr)
    }
    pub fn theory_curvature(&self, m: usize) -> f64 {
        self.theory.iter().find(|t| t.0 == m).expect("m in run").1.get("c").value
    }
}

pub fn sites(m: usize) -> Vec<usize> {
    (0..m).map(|k| 3 + 2 * k).collect()
}

pub fn run(cfg: &Config) -> Result<Exp3> {
    let n = cfg.n.unwrap_or(9);
    let shots = cfg.shots.unwrap_or(10_000);
    let trials = cfg.trials_or(240);
    let mode = cfg.mode.unwrap_or(Mode::Adaptive);
    let ms = cfg.m.clone().unwrap_or_else(|| vec![1, 2, 3]);
    let betas = cfg.beta.clone().unwrap_or_else(|| linspace(0.0, 0.3, 25));
    let (alpha, theta) = match &cfg.theta {
        Some(t) if t.len() == 1 => (None, t[0]),
        Some(_) => bail!("exp3 takes a single theta"),
        None => {
            let a = match cfg.alpha.as_deref() {
                None => FRAC_PI_3,
                Some([a]) => *a,
                Some(_) => bail!("exp3 takes a single alpha"),
            };
            (Some(a), theta_for(a, n, cfg.theta_from.unwrap_or(ThetaFrom::Thermodynamic))?)
        }
    };
    let sigma = theta.cos();
    let spec = ResourceSpec::new(ResourceKind::Deformed(theta), n);
    let resource = spec.build()?;

    // noiseless pipeline: exact simulation must match the channel model first
    let mut curves = Vec::new();
    for &m in &ms {
        let tables: Vec<(f64, BranchTable)> = betas
            .iter()
            .map(|&b| {
                let p = MeasurementPattern::new(n, &split(&sites(m), b), None, mode)?;
                Ok((b, BranchTable::new(&resource, &p)?))
            })
            .collect::<mbqc::Result<_>>()?;
        if mode != Mode::SignAgnostic {
            for (b, t) in &tables {
                let e = t.exact()?;
                let dev = (purity_loss(e.x, e.y) - split_purity_loss(sigma, *b, m)).abs();
                if dev > PIPELINE_TOL {
                    bail!("noiseless m={m} β={b}: simulation deviates from the channel model by {dev:e}");
                }
            }
        }
        let points: Vec<(f64, PointStats)> = tables
            .par_iter()
            .enumerate()
            .map(|(j, (b, t))| {
                let seed = child_seed(cfg.seed, ((m as u64) << 20) + j as u64);
                Ok((*b, trial_average(trials, seed, |s| sample_tomography(t, shots, s))?))
            })
            .collect::<Result<_>>()?;
        let fit = lp_fit(&points)?;
        curves.push(Curve { m, noise_p: 0.0, points, fit });
    }

    let mut noisy = Vec::new();
    for (pi, &p) in cfg.noise_p.clone().unwrap_or_default().iter().enumerate().filter(|(_, &p)| p > 0.0) {
        for &m in &ms {
            let points: Vec<(f64, PointStats)> = betas
                .par_iter()
                .enumerate()
                .map(|(j, &b)| {
                    let pat = MeasurementPattern::new(n, &split(&sites(m), b), None, mode)?;
                    let seed = child_seed(cfg.seed, (1 << 40) + ((pi as u64) << 24) + ((m as u64) << 20) + j as u64);
                    Ok((b, trial_average(1, seed, |s| noisy_tomography(&spec, &pat, &NoiseSpec::new(p, s)?, shots))?))
                })
                .collect::<Result<_>>()?;
            let fit = lp_fit(&points)?;
            noisy.push(Curve { m, noise_p: p, points, fit });
        }
    }

    let theory: Vec<(usize, FitResult)> = ms
        .iter()
        .map(|&m| {
            let lp: Vec<f64> = betas.iter().map(|&b| split_purity_loss(sigma, b, m)).collect();
            Ok((m, fit_quadratic_offset(&betas, &lp)?))
        })
        .collect::<Result<_>>()?;
    let inv_m: Vec<f64> = ms.iter().map(|&m| 1.0 / m as f64).collect();
    let c_data: Vec<f64> = curves.iter().map(|c| c.fit.get("c").value).collect();
    let c_theory: Vec<f64> = theory.iter().map(|t| t.1.get("c").value).collect();
    let (slope_fit, theory_slope_fit) = if ms.len() >= 3 {
        (Some(fit_line(&inv_m, &c_data)?), Some(fit_line(&inv_m, &c_theory)?))
    } else {
        log::info!("fewer than three values of m: no curvature-vs-1/m fit");
        (None, None)
    };

    let mut art = Artifacts::new("exp3", &cfg.hash(), cfg.seed);
    let header = ["alpha", "theta", "beta", "exp_x", "exp_y", "err_x", "err_y", "shots", "seed", "m", "lp", "lp_err"];
    let mut tables = vec![Table::new("exp3", &header)];
    for c in curves.iter().chain(&noisy) {
        let name = if c.noise_p == 0.0 { "exp3".to_string() } else { format!("exp3_noisy_p{}", c.noise_p) };
        if !tables.iter().any(|t| t.name == name) {
            tables.push(Table::new(&name, &header));
        }
        let t = tables.iter_mut().find(|t| t.name == name).expect("table exists");
        for (b, s) in &c.points {
            t.push(vec![
                opt(alpha),
                num(theta),
                num(*b),
                num(s.x),
                num(s.y),
                num(s.err_x),
                num(s.err_y),
                s.shots.to_string(),
                cfg.seed.to_string(),
                c.m.to_string(),
                num(s.lp),
                num(s.lp_err),
            ]);
        }
    }
    art.tables = tables;

    art.metrics.insert("n".into(), json!(n));
    art.metrics.insert("sigma".into(), json!(sigma));
    art.metrics.insert("trials".into(), json!(trials));
    art.metrics.insert("shots_per_trial".into(), json!(shots));
    art.metrics.insert("mode".into(), json!(format!("{mode:?}")));
    let c1 = c_data[ms.iter().position(|&m| m == 1).unwrap_or(0)];
    art.metrics.insert(
        "curvatures".into(),
        json!(curves
            .iter()
            .zip(&c_theory)
            .map(|(c, &th)| {
                let f = c.fit.get("c");
                json!({
                    "m": c.m, "c": f.value, "c_err": f.stderr, "c_theory": th,
                    "c_times_m_over_c1": f.value * c.m as f64 / c1,
                    "relative_deviation_from_theory": f.value / th - 1.0,
                    "offset": c.fit.get("d").value,
                })
            })
            .collect::<Vec<_>>()),
    );
    art.metrics.insert(
        "noisy_offsets".into(),
        json!(noisy.iter().map(|c| json!({"p": c.noise_p, "m": c.m, "offset": c.fit.get("d").value, "offset_err": c.fit.get("d").stderr})).collect::<Vec<_>>()),
    );
    if let (Some(f), Some(t)) = (&slope_fit, &theory_slope_fit) {
        art.fits.insert("curvature_vs_inverse_m".into(), serde_json::to_value(f)?);
        art.fits.insert("theory_curvature_vs_inverse_m".into(), serde_json::to_value(t)?);
    }
    for c in curves.iter().chain(&noisy) {
        art.fits.insert(format!("lp_m{}_p{}", c.m, c.noise_p), serde_json::to_value(&c.fit)?);
    }

    let dense = linspace(betas[0], *betas.last().unwrap_or(&0.3), 100);
    let mut chart = Chart::new(&format!("Purity loss under splitting, sigma = {sigma:.3}"), "beta", "loss of purity");
    for c in curves.iter().chain(&noisy) {
        let tag = if c.noise_p == 0.0 { format!("m = {}", c.m) } else { format!("m = {}, p = {}", c.m, c.noise_p) };
        chart = chart.with(Series::points(
            &tag,
            c.points.iter().map(|(b, s)| (*b, s.lp)).collect(),
            Some(c.points.iter().map(|(_, s)| s.lp_err).collect()),
        ));
    }
    for &m in &ms {
        chart = chart.with(Series::line(
            &format!("theory m = {m}"),
            dense.iter().map(|&b| (b, split_purity_loss(sigma, b, m))).collect(),
        ));
    }
    art.plots.push(("exp3_purity_loss".into(), chart.render()));
    let chart = Chart::new("Curvature vs inverse splitting", "1/m", "curvature")
        .with(Series::points(
            "fitted",
            inv_m.iter().copied().zip(c_data.iter().copied()).collect(),
            Some(curves.iter().map(|c| c.fit.get("c").stderr).collect()),
        ))
        .with(Series::line("theory", inv_m.iter().copied().zip(c_theory.iter().copied()).collect()));
    art.plots.push(("exp3_curvature".into(), chart.render()));

    Ok(Exp3 { alpha, theta, sigma, betas, curves, noisy, theory, slope_fit, theory_slope_fit, artifacts: art })
}

fn lp_fit(points: &[(f64, PointStats)]) -> Result<FitResult> {
    let b: Vec<f64> = points.iter().map(|p| p.0).collect();
    let lp: Vec<f64> = points.iter().map(|p| p.1.lp).collect();
    let err: Vec<f64> = points.iter().map(|p| p.1.lp_err).collect();
    Ok(fit_quadratic_offset_with_errors(&b, &lp, Some(&err))?)
}
