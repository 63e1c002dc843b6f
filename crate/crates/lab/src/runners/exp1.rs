//! Logical rotation on the deformed 5-site chain: (⟨X⟩, ⟨Y⟩) trace an
//! ellipse whose vertical half-axis is the string order parameter cos θ.

use std::f64::consts::PI;

use mbqc::engine::{sample_tomography, BranchTable, MeasurementPattern, Mode, Tomography};
use mbqc::rng::child_seed;
use mbqc::states::{build_cluster, build_deformed};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{linspace, Config, ThetaFrom};
use crate::fit::{fit_ellipse_at_angles, fit_ellipse_with_errors, FitError, FitResult};
use crate::output::{num, Artifacts, Table};
use crate::plot::{Chart, Series};

use super::{angles, opt};

pub struct EllipseRun {
    pub alpha: Option<f64>,
    pub theta: f64,
    pub points: Vec<(f64, Tomography)>,
    /// Fit at the known measurement angles (primary).
    pub fit: Result<FitResult, FitError>,
    /// Algebraic fit in (1/a², 1/b²); singular as b → 0.
    pub algebraic: Result<FitResult, FitError>,
}

pub struct Exp1 {
    pub runs: Vec<EllipseRun>,
    pub artifacts: Artifacts,
}

pub fn default_betas() -> Vec<f64> {
    (0..12).map(|k| 2.0 * PI * k as f64 / 12.0).collect()
}

/// One (⟨X⟩, ⟨Y⟩) point: rotation β on site 3, wires elsewhere. With
/// `reweight` the undeformed cluster is measured in the transformed basis.
pub fn point(n: usize, theta: f64, beta: f64, reweight: bool, shots: usize, seed: u64) -> mbqc::Result<Tomography> {
    let (res, def) = if reweight { (build_cluster(n)?, Some(theta)) } else { (build_deformed(n, theta)?, None) };
    let p = MeasurementPattern::new(n, &[(3, beta)], def, Mode::Adaptive)?;
    sample_tomography(&BranchTable::new(&res, &p)?, shots, seed)
}

pub fn run(cfg: &Config) -> anyhow::Result<Exp1> {
    let n = cfg.n.unwrap_or(5);
    let shots = cfg.shots.unwrap_or(10_000);
    let reweight = cfg.reweight.unwrap_or(true);
    let betas = cfg.beta.clone().unwrap_or_else(default_betas);
    let pairs = angles(cfg, n, &linspace(0.0, 1.2, 4), ThetaFrom::Finite)?;

    let runs: Vec<EllipseRun> = pairs
        .iter()
        .enumerate()
        .map(|(i, &(alpha, theta))| {
            let points: Vec<(f64, Tomography)> = betas
                .par_iter()
                .enumerate()
                .map(|(j, &b)| {
                    let seed = child_seed(cfg.seed, ((i as u64) << 20) + j as u64);
                    Ok((b, point(n, theta, b, reweight, shots, seed)?))
                })
                .collect::<mbqc::Result<_>>()?;
            let xy: Vec<(f64, f64)> = points.iter().map(|(_, t)| (t.x, t.y)).collect();
            let bs: Vec<f64> = points.iter().map(|p| p.0).collect();
            let errs: Vec<(f64, f64)> = points.iter().map(|(_, t)| (t.err_x, t.err_y)).collect();
            let fit = fit_ellipse_at_angles(&bs, &xy, Some(&errs));
            Ok(EllipseRun { alpha, theta, fit, algebraic: fit_ellipse_with_errors(&xy, Some(&errs)), points })
        })
        .collect::<mbqc::Result<_>>()?;

    let mut art = Artifacts::new("exp1", &cfg.hash(), cfg.seed);
    let mut t = Table::new("exp1", &["alpha", "theta", "beta", "exp_x", "exp_y", "err_x", "err_y", "shots", "seed"]);
    for r in &runs {
        for (b, p) in &r.points {
            t.push(vec![
                opt(r.alpha),
                num(r.theta),
                num(*b),
                num(p.x),
                num(p.y),
                num(p.err_x),
                num(p.err_y),
                shots.to_string(),
                cfg.seed.to_string(),
            ]);
        }
    }
    art.tables.push(t);
    art.metrics.insert("n".into(), json!(n));
    art.metrics.insert("reweighted".into(), json!(reweight));
    let describe = |f: &Result<FitResult, FitError>| match f {
        Ok(f) => json!({
            "a": f.get("a").value, "a_err": f.get("a").stderr,
            "b": f.get("b").value, "b_err": f.get("b").stderr,
            "residual_norm": f.residual_norm,
        }),
        Err(e) => json!({ "error": e.to_string() }),
    };
    for (i, r) in runs.iter().enumerate() {
        art.fits.insert(
            format!("ellipse_{i}"),
            json!({
                "alpha": r.alpha, "theta": r.theta, "expected_b": r.theta.cos(),
                "at_angles": describe(&r.fit), "algebraic": describe(&r.algebraic),
            }),
        );
    }

    let mut chart = Chart::new(&format!("Logical rotation ellipses, n = {n}"), "<X>", "<Y>");
    chart.square = true;
    let circle = linspace(0.0, 2.0 * PI, 120);
    for r in &runs {
        let label = match r.alpha {
            Some(a) => format!("alpha = {a:.3}"),
            None => format!("theta = {:.3}", r.theta),
        };
        chart = chart.with(Series::points(&label, r.points.iter().map(|(_, p)| (p.x, p.y)).collect(), None));
        if let Ok(f) = &r.fit {
            let (a, b) = (f.get("a").value, f.get("b").value);
            chart = chart.with(Series::line(
                &format!("{label} fit"),
                circle.iter().map(|t| (a * t.cos(), b * t.sin())).collect(),
            ));
        }
    }
    art.plots.push(("exp1_ellipses".into(), chart.render()));
    Ok(Exp1 { runs, artifacts: art })
}
