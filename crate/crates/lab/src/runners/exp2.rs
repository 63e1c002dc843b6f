//! Computational order ν (slope of tan β_log vs tan β) against the string
//! order σ read off the VQE boundary-stabilizer circuit.

use std::f64::consts::FRAC_PI_4;

use anyhow::{Context, Result};
use mbqc::engine::Tomography;
use mbqc::rng::child_seed;
use mbqc::vqe::sampled_expectations;
use rayon::prelude::*;
use serde_json::json;

use crate::config::{linspace, Config, ThetaFrom};
use crate::fit::{fit_line_with_errors, FitResult};
use crate::output::{num, Artifacts, Table};
use crate::plot::{Chart, Series};

use super::{angles, opt};

pub struct OrderPoint {
    pub alpha: f64,
    pub theta: f64,
    pub sop: f64,
    pub sop_err: f64,
    pub cop: f64,
    pub cop_err: f64,
    pub points: Vec<(f64, Tomography)>,
    pub fit: FitResult,
}

impl OrderPoint {
    /// |ν − σ| in units of the combined standard error.
    pub fn z(&self) -> f64 {
        (self.cop - self.sop).abs() / self.sop_err.hypot(self.cop_err)
    }
}

pub struct Exp2 {
    pub points: Vec<OrderPoint>,
    pub artifacts: Artifacts,
}

pub fn default_alphas() -> Vec<f64> {
    linspace(0.0, 1.25, 6)
}

pub fn run(cfg: &Config) -> Result<Exp2> {
    let n = cfg.n.unwrap_or(5);
    let shots = cfg.shots.unwrap_or(10_000);
    let betas = cfg.beta.clone().unwrap_or_else(|| linspace(-FRAC_PI_4, FRAC_PI_4, 17));
    let pairs = angles(cfg, n, &default_alphas(), ThetaFrom::Finite)?;

    let points: Vec<OrderPoint> = pairs
        .par_iter()
        .enumerate()
        .map(|(i, &(alpha, theta))| -> Result<OrderPoint> {
            let alpha = alpha.context("exp2 derives theta from alpha")?;
            let base = child_seed(cfg.seed, i as u64);
            // σ end to end: the boundary stabilizer from the compiled VQE circuit
            let vqe = sampled_expectations(theta, alpha, n, shots, child_seed(base, 0))?;
            let pts: Vec<(f64, Tomography)> = betas
                .iter()
                .enumerate()
                .map(|(j, &b)| Ok((b, super::exp1::point(n, theta, b, true, shots, child_seed(base, 1 + j as u64))?)))
                .collect::<mbqc::Result<_>>()?;
            let tx: Vec<f64> = pts.iter().map(|(b, _)| b.tan()).collect();
            let ty: Vec<f64> = pts.iter().map(|(_, t)| t.y / t.x).collect();
            // first-order error of the ratio ⟨Y⟩/⟨X⟩
            let sy: Vec<f64> = pts.iter().map(|(_, t)| t.err_y.hypot(t.y / t.x * t.err_x) / t.x.abs()).collect();
            let fit = fit_line_with_errors(&tx, &ty, Some(&sy))?;
            Ok(OrderPoint {
                alpha,
                theta,
                sop: vqe.k_boundary,
                sop_err: vqe.err_k_boundary,
                cop: fit.get("slope").value,
                cop_err: fit.get("slope").stderr,
                points: pts,
                fit,
            })
        })
        .collect::<Result<_>>()?;

    let mut art = Artifacts::new("exp2", &cfg.hash(), cfg.seed);
    let mut t = Table::new("exp2", &["alpha", "theta", "beta", "exp_x", "exp_y", "err_x", "err_y", "shots", "seed"]);
    let mut o = Table::new("exp2_orders", &["alpha", "theta", "sop", "sop_err", "cop", "cop_err", "sigma_analytic"]);
    for p in &points {
        for (b, tm) in &p.points {
            t.push(vec![
                opt(Some(p.alpha)),
                num(p.theta),
                num(*b),
                num(tm.x),
                num(tm.y),
                num(tm.err_x),
                num(tm.err_y),
                shots.to_string(),
                cfg.seed.to_string(),
            ]);
        }
        o.push(vec![
            num(p.alpha),
            num(p.theta),
            num(p.sop),
            num(p.sop_err),
            num(p.cop),
            num(p.cop_err),
            num(p.theta.cos()),
        ]);
    }
    art.tables.push(t);
    art.tables.push(o);
    art.metrics.insert("n".into(), json!(n));
    art.metrics.insert("string_operator".into(), json!("Z3 X4 Z5 (boundary-class stabilizer, compiled VQE circuit)"));
    art.metrics.insert(
        "pairs".into(),
        json!(points
            .iter()
            .map(|p| json!({"alpha": p.alpha, "sop": p.sop, "sop_err": p.sop_err, "cop": p.cop, "cop_err": p.cop_err, "z": p.z()}))
            .collect::<Vec<_>>()),
    );
    for (i, p) in points.iter().enumerate() {
        art.fits.insert(format!("line_{i}"), serde_json::to_value(&p.fit)?);
    }
    let chart = Chart::new("String order vs computational order", "alpha", "order parameter")
        .with(Series::points(
            "SOP (boundary stabilizer)",
            points.iter().map(|p| (p.alpha, p.sop)).collect(),
            Some(points.iter().map(|p| p.sop_err).collect()),
        ))
        .with(Series::points(
            "COP (fitted slope)",
            points.iter().map(|p| (p.alpha + 0.01, p.cop)).collect(),
            Some(points.iter().map(|p| p.cop_err).collect()),
        ))
        .with(Series::line("cos theta_min", points.iter().map(|p| (p.alpha, p.theta.cos())).collect()));
    art.plots.push(("exp2_orders".into(), chart.render()));
    Ok(Exp2 { points, artifacts: art })
}
