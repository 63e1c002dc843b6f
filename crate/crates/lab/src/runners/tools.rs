//! Closed-form studies: channel identity grid, packing tables, crossover.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use anyhow::{bail, Result};
use mbqc::channel::{
    decompose, epsilon, find_crossover, logical_angle, lp_difference, packing_compare, purity_loss_of, rotation_ptm,
    single_step_purity_loss, split_compose, split_purity_loss, v_beta, Axis, ChannelParams, Crossover,
};
use mbqc::ptm::frobenius_error;
use serde_json::json;

use crate::config::{linspace, Config};
use crate::output::{num, Artifacts, Table};
use crate::plot::{Chart, Series};

use super::exp4::default_schemes;

#[derive(Clone, Copy, Debug)]
pub struct GridRow {
    pub sigma: f64,
    pub beta: f64,
    pub beta_log: f64,
    pub epsilon: f64,
    /// max |decompose reassembly − 𝒱_β|
    pub decompose_err: f64,
    /// |𝒟(𝒱_β, RZ(β_log)) − ε|
    pub frobenius_err: f64,
    /// |LP(𝒱_β) − (ε/2)(1 − ε/4)|
    pub lp_err: f64,
}

pub struct ChannelGrid {
    pub rows: Vec<GridRow>,
    pub artifacts: Artifacts,
}

pub fn grid_row(sigma: f64, beta: f64) -> mbqc::Result<GridRow> {
    let p = ChannelParams::new(sigma, beta)?;
    let v = v_beta(&p);
    let (bl, deph) = decompose(&p);
    let e = epsilon(sigma, beta);
    Ok(GridRow {
        sigma,
        beta,
        beta_log: logical_angle(sigma, beta),
        epsilon: e,
        decompose_err: (rotation_ptm(Axis::Z, bl) * deph).max_abs_diff(&v),
        frobenius_err: (frobenius_error(&v, &rotation_ptm(Axis::Z, bl)) - e).abs(),
        lp_err: (purity_loss_of(&v) - single_step_purity_loss(sigma, beta))
            .abs()
            .max((single_step_purity_loss(sigma, beta) - e / 2.0 * (1.0 - e / 4.0)).abs()),
    })
}

pub fn channel_grid(cfg: &Config) -> Result<ChannelGrid> {
    let sigmas = cfg.sigma.clone().unwrap_or_else(|| linspace(-0.95, 0.95, 20));
    let betas = cfg.beta.clone().unwrap_or_else(|| linspace(-PI, PI, 20));
    let ms = cfg.m.clone().unwrap_or_else(|| vec![1, 2, 3]);
    let mut rows = Vec::new();
    for &s in &sigmas {
        for &b in &betas {
            rows.push(grid_row(s, b)?);
        }
    }
    let mut art = Artifacts::new("channel-grid", &cfg.hash(), cfg.seed);
    let mut t = Table::new(
        "channel_grid",
        &["sigma", "beta", "beta_log", "epsilon", "decompose_err", "frobenius_err", "lp_err"],
    );
    for r in &rows {
        t.push(vec![
            num(r.sigma),
            num(r.beta),
            num(r.beta_log),
            num(r.epsilon),
            num(r.decompose_err),
            num(r.frobenius_err),
            num(r.lp_err),
        ]);
    }
    art.tables.push(t);
    let mut t = Table::new("channel_grid_split", &["sigma", "beta", "m", "lp_split", "lp_composed"]);
    for &s in &sigmas {
        for &b in &betas {
            for &m in &ms {
                t.push(vec![
                    num(s),
                    num(b),
                    m.to_string(),
                    num(split_purity_loss(s, b, m)),
                    num(purity_loss_of(&split_compose(s, b, m))),
                ]);
            }
        }
    }
    art.tables.push(t);
    let worst = |g: fn(&GridRow) -> f64| rows.iter().map(g).fold(0.0, f64::max);
    art.metrics.insert("max_decompose_err".into(), json!(worst(|r| r.decompose_err)));
    art.metrics.insert("max_frobenius_err".into(), json!(worst(|r| r.frobenius_err)));
    art.metrics.insert("max_lp_err".into(), json!(worst(|r| r.lp_err)));
    let mid = sigmas[sigmas.len() / 2];
    let dense = linspace(-PI, PI, 200);
    let chart = Chart::new(&format!("Logical error, sigma = {mid:.3}"), "beta", "epsilon")
        .with(Series::line("epsilon", dense.iter().map(|&b| (b, epsilon(mid, b))).collect()))
        .with(Series::dashed(
            "single-step purity loss",
            dense.iter().map(|&b| (b, single_step_purity_loss(mid, b))).collect(),
        ));
    art.plots.push(("channel_grid".into(), chart.render()));
    Ok(ChannelGrid { rows, artifacts: art })
}

pub fn packing(cfg: &Config) -> Result<Artifacts> {
    let n = cfg.n.unwrap_or(11);
    let phis = cfg.phi.clone().unwrap_or_else(|| vec![FRAC_PI_4]);
    let betas = cfg.beta.clone().unwrap_or_else(|| linspace(0.0, FRAC_PI_2, 11));
    let schemes: Vec<(String, Vec<usize>)> =
        cfg.schemes.clone().unwrap_or_else(default_schemes).into_iter().map(|s| (s.label, s.sites)).collect();
    let mut art = Artifacts::new("packing", &cfg.hash(), cfg.seed);
    let mut t = Table::new("packing", &["n", "phi", "beta", "scheme", "lp_exact"]);
    let mut chart = Chart::new(&format!("Exact purity loss, n = {n}"), "beta", "loss of purity");
    for &phi in &phis {
        let rows = packing_compare(n, phi, &betas, &schemes)?;
        for r in &rows {
            t.push(vec![r.n.to_string(), num(r.phi), num(r.beta), r.scheme.clone(), num(r.lp_exact)]);
        }
        for (label, _) in &schemes {
            let xy = rows.iter().filter(|r| &r.scheme == label).map(|r| (r.beta, r.lp_exact)).collect();
            chart = chart.with(Series::line(&format!("({label}) phi = {phi:.3}"), xy));
        }
    }
    art.tables.push(t);
    art.plots.push(("packing".into(), chart.render()));
    Ok(art)
}

pub struct CrossoverRun {
    pub result: Crossover,
    pub diffs: Vec<(f64, f64)>,
    pub artifacts: Artifacts,
}

pub fn crossover(cfg: &Config) -> Result<CrossoverRun> {
    let n = cfg.n.unwrap_or(11);
    let beta = cfg.beta.as_ref().map_or(FRAC_PI_2, |b| b[0]);
    let grid = cfg.phi.clone().unwrap_or_else(|| linspace(0.05, FRAC_PI_2 - 0.05, 41));
    let schemes = cfg.schemes.clone().unwrap_or_else(|| {
        let d = default_schemes();
        // sparse-then-dense (3, 7, 9) against the densest packing
        vec![crate::config::Scheme { label: "sparse".into(), sites: vec![3, 7, 9] }, d[2].clone()]
    });
    if schemes.len() != 2 {
        bail!("crossover compares exactly two schemes");
    }
    let (a, b) = (&schemes[0].sites, &schemes[1].sites);
    let result = find_crossover(n, beta, a, b, &grid)?;
    let diffs: Vec<(f64, f64)> =
        grid.iter().map(|&p| Ok((p, lp_difference(n, beta, a, b, p)?))).collect::<mbqc::Result<_>>()?;

    let mut art = Artifacts::new("crossover", &cfg.hash(), cfg.seed);
    let mut t = Table::new("crossover", &["n", "beta", "phi", "lp_difference"]);
    for (p, d) in &diffs {
        t.push(vec![n.to_string(), num(beta), num(*p), num(*d)]);
    }
    art.tables.push(t);
    art.metrics.insert(
        "schemes".into(),
        json!([{"label": schemes[0].label, "sites": a}, {"label": schemes[1].label, "sites": b}]),
    );
    art.metrics.insert(
        "crossover".into(),
        match &result {
            Crossover::Found { phi_c, bracket } => json!({"phi_c": phi_c, "bracket": [bracket.0, bracket.1]}),
            Crossover::NoSignChange { min_diff, max_diff } => {
                json!({"phi_c": null, "min_diff": min_diff, "max_diff": max_diff})
            }
        },
    );
    let chart = Chart::new(
        &format!("LP({}) - LP({}), n = {n}", schemes[0].label, schemes[1].label),
        "phi",
        "difference in loss of purity",
    )
    .with(Series::line("difference", diffs.clone()))
    .with(Series::dashed("zero", vec![(grid[0], 0.0), (*grid.last().unwrap_or(&grid[0]), 0.0)]));
    art.plots.push(("crossover".into(), chart.render()));
    Ok(CrossoverRun { result, diffs, artifacts: art })
}
