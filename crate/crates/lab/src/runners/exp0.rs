//! VQE: sampled energy terms over θ and the optimal θ per α.

use std::f64::consts::{FRAC_PI_2, PI};

use anyhow::Result;
use mbqc::rng::child_seed;
use mbqc::vqe::{optimize_theta, sampled_expectations, EnergyBreakdown, Objective, ThetaOptimum};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{linspace, Config};
use crate::output::{num, Artifacts, Table};
use crate::plot::{Chart, Series};

#[derive(Clone, Debug)]
pub struct Optimum {
    pub alpha: f64,
    pub analytic: ThetaOptimum,
    pub thermodynamic: ThetaOptimum,
    pub sampled: ThetaOptimum,
}

pub struct Exp0 {
    pub n: usize,
    pub terms: Vec<EnergyBreakdown>,
    pub optima: Vec<Optimum>,
    pub artifacts: Artifacts,
}

pub fn run(cfg: &Config) -> Result<Exp0> {
    let n = cfg.n.unwrap_or(5);
    let shots = cfg.shots.unwrap_or(10_000);
    let alphas = cfg.alpha.clone().unwrap_or_else(|| linspace(0.0, FRAC_PI_2, 11));
    let thetas = cfg.theta.clone().unwrap_or_else(|| linspace(0.0, PI, 25));

    let jobs: Vec<(usize, f64, f64)> =
        alphas.iter().enumerate().flat_map(|(i, &a)| thetas.iter().map(move |&t| (i, a, t))).collect();
    let terms: Vec<EnergyBreakdown> = jobs
        .par_iter()
        .enumerate()
        .map(|(k, &(_, a, t))| sampled_expectations(t, a, n, shots, child_seed(cfg.seed, k as u64)))
        .collect::<mbqc::Result<_>>()?;

    let optima: Vec<Optimum> = alphas
        .par_iter()
        .enumerate()
        .map(|(i, &a)| {
            let sampled_seed = child_seed(cfg.seed, (1 << 32) + i as u64);
            Ok(Optimum {
                alpha: a,
                analytic: optimize_theta(Objective::Analytic, a, n, 64, 100)?,
                thermodynamic: optimize_theta(Objective::Thermodynamic, a, n, 64, 100)?,
                sampled: optimize_theta(Objective::Sampled { shots, seed: sampled_seed }, a, n, 32, 40)?,
            })
        })
        .collect::<mbqc::Result<_>>()?;

    let mut art = Artifacts::new("exp0", &cfg.hash(), cfg.seed);
    let mut t = Table::new("exp0_energy", &["alpha", "theta", "term", "value", "stderr", "shots", "seed"]);
    for b in &terms {
        for (term, v, e) in [
            ("k_boundary", b.k_boundary, b.err_k_boundary),
            ("k_bulk", b.k_bulk, b.err_k_bulk),
            ("x_field", b.x_field, b.err_x_field),
            ("energy", b.total_energy, b.err_total),
        ] {
            t.push(vec![
                num(b.alpha),
                num(b.theta),
                term.into(),
                num(v),
                num(e),
                shots.to_string(),
                cfg.seed.to_string(),
            ]);
        }
    }
    art.tables.push(t);
    let mut t = Table::new("exp0_optimum", &["alpha", "theta_min", "theta_err", "energy_min", "mode"]);
    for o in &optima {
        for (mode, r) in [("analytic", &o.analytic), ("thermodynamic", &o.thermodynamic), ("sampled", &o.sampled)] {
            t.push(vec![
                num(o.alpha),
                num(r.theta),
                r.theta_err.map(num).unwrap_or_default(),
                num(r.energy),
                mode.into(),
            ]);
        }
    }
    art.tables.push(t);

    art.metrics.insert("n".into(), json!(n));
    art.metrics.insert("shots".into(), json!(shots));
    art.metrics.insert("transition_alpha_thermodynamic".into(), json!(2f64.atan()));
    art.metrics.insert(
        "optima".into(),
        json!(optima
            .iter()
            .map(|o| json!({
                "alpha": o.alpha,
                "theta_analytic": o.analytic.theta,
                "theta_thermodynamic": o.thermodynamic.theta,
                "theta_sampled": o.sampled.theta,
                "theta_sampled_err": o.sampled.theta_err,
                "sampled_within_err": o.sampled.theta_err.map(|e| (o.sampled.theta - o.analytic.theta).abs() <= e),
            }))
            .collect::<Vec<_>>()),
    );
    art.conventions.insert(
        "theta_uncertainty".into(),
        json!("half-width of the theta range whose sampled energy is within one standard error of the minimum"),
    );

    // terms at the first α (the K and X terms do not depend on α)
    let first: Vec<&EnergyBreakdown> = terms.iter().filter(|b| b.alpha == alphas[0]).collect();
    let dense = linspace(0.0, PI, 200);
    let pts = |g: fn(&EnergyBreakdown) -> (f64, f64)| -> (Vec<(f64, f64)>, Vec<f64>) {
        first.iter().map(|b| ((b.theta, g(b).0), g(b).1)).unzip()
    };
    let mut chart = Chart::new(&format!("VQE energy terms, n = {n}"), "theta", "expectation value");
    for (label, g, th) in [
        (
            "<K> boundary",
            (|b: &EnergyBreakdown| (b.k_boundary, b.err_k_boundary)) as fn(&EnergyBreakdown) -> (f64, f64),
            (|t: f64| t.cos()) as fn(f64) -> f64,
        ),
        ("<K> bulk", |b| (b.k_bulk, b.err_k_bulk), |t| t.cos().powi(2)),
        ("<X> bulk", |b| (b.x_field, b.err_x_field), |t| t.sin()),
    ] {
        let (xy, e) = pts(g);
        chart = chart.with(Series::points(label, xy, Some(e)));
        chart = chart.with(Series::line(&format!("{label} theory"), dense.iter().map(|&t| (t, th(t))).collect()));
    }
    art.plots.push(("exp0_terms".into(), chart.render()));

    let a_dense = linspace(0.0, FRAC_PI_2, 100);
    let finite: Vec<(f64, f64)> = a_dense
        .iter()
        .map(|&a| Ok((a, optimize_theta(Objective::Analytic, a, n, 64, 60)?.theta)))
        .collect::<mbqc::Result<_>>()?;
    let thermo: Vec<(f64, f64)> =
        a_dense.iter().map(|&a| Ok((a, mbqc::vqe::thermo_limit_theta(a)?))).collect::<mbqc::Result<_>>()?;
    let chart = Chart::new("Optimal variational angle", "alpha", "theta_min")
        .with(Series::points(
            "sampled",
            optima.iter().map(|o| (o.alpha, o.sampled.theta)).collect(),
            Some(optima.iter().map(|o| o.sampled.theta_err.unwrap_or(0.0)).collect()),
        ))
        .with(Series::line(&format!("analytic n = {n}"), finite))
        .with(Series::dashed("thermodynamic limit", thermo));
    art.plots.push(("exp0_optimum".into(), chart.render()));

    Ok(Exp0 { n, terms, optima, artifacts: art })
}
