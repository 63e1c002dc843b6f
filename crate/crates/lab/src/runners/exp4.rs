//! Correlated regime on the XX-rotated 11-site chain: packing schemes
//! compared by post-selected purity loss.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use anyhow::{bail, Result};
use mbqc::channel::{exact_logical_evolution, PackingScheme};
use mbqc::engine::{purity_loss, sample_tomography, BranchTable, MeasurementPattern, Mode};
use mbqc::noise::{noisy_tomography, NoiseSpec};
use mbqc::rng::child_seed;
use mbqc::states::{CompileMode, ResourceKind, ResourceSpec};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{linspace, Config, Scheme};
use crate::output::{num, Artifacts, Table};
use crate::plot::{Chart, Series};

use super::{split, trial_average, PointStats, PIPELINE_TOL};

pub struct SchemeCurve {
    pub label: String,
    pub sites: Vec<usize>,
    pub noise_p: f64,
    /// (β, sampled statistics, exact noiseless LP)
    pub points: Vec<(f64, PointStats, f64)>,
}

pub struct Exp4 {
    pub phi: f64,
    pub curves: Vec<SchemeCurve>,
    pub artifacts: Artifacts,
}

pub fn default_schemes() -> Vec<Scheme> {
    [("i", vec![3, 5]), ("ii", vec![3, 9]), ("iii", vec![3, 5, 7, 9])]
        .into_iter()
        .map(|(l, s)| Scheme { label: l.into(), sites: s })
        .collect()
}

pub fn run(cfg: &Config) -> Result<Exp4> {
    let n = cfg.n.unwrap_or(11);
    let shots = cfg.shots.unwrap_or(10_000);
    let trials = cfg.trials_or(240);
    let phi = match cfg.phi.as_deref() {
        None => FRAC_PI_4,
        Some([p]) => *p,
        Some(_) => bail!("exp4 takes a single phi"),
    };
    let schemes = cfg.schemes.clone().unwrap_or_else(default_schemes);
    let betas = cfg.beta.clone().unwrap_or_else(|| linspace(0.0, FRAC_PI_2, 11));
    let spec = ResourceSpec::new(ResourceKind::XxRotated(phi), n)
        .with_compile(cfg.compile.unwrap_or(CompileMode::SwapCompiled));
    let resource = spec.build()?;

    let mut curves = Vec::new();
    for (si, s) in schemes.iter().enumerate() {
        let tables: Vec<(f64, BranchTable, f64)> = betas
            .iter()
            .map(|&b| -> Result<_> {
                let p = MeasurementPattern::new(n, &split(&s.sites, b), None, Mode::PostSelected)?;
                let t = BranchTable::new(&resource, &p)?;
                let e = t.exact()?;
                let f = exact_logical_evolution(&resource, &PackingScheme::even_split(&s.label, &s.sites, b)?)?;
                let dev = (e.x - f[0]).abs().max((e.y - f[1]).abs());
                if dev > PIPELINE_TOL {
                    bail!(
                        "noiseless scheme {} β={b}: simulation deviates from the string expansion by {dev:e}",
                        s.label
                    );
                }
                Ok((b, t, purity_loss(e.x, e.y)))
            })
            .collect::<Result<_>>()?;
        let points = tables
            .par_iter()
            .enumerate()
            .map(|(j, (b, t, lp))| {
                let seed = child_seed(cfg.seed, ((si as u64) << 20) + j as u64);
                Ok((*b, trial_average(trials, seed, |sd| sample_tomography(t, shots, sd))?, *lp))
            })
            .collect::<Result<_>>()?;
        curves.push(SchemeCurve { label: s.label.clone(), sites: s.sites.clone(), noise_p: 0.0, points });
    }

    for (pi, &p) in cfg.noise_p.clone().unwrap_or_default().iter().enumerate().filter(|(_, &p)| p > 0.0) {
        for (si, s) in schemes.iter().enumerate() {
            let points = betas
                .par_iter()
                .enumerate()
                .map(|(j, &b)| {
                    let pat = MeasurementPattern::new(n, &split(&s.sites, b), None, Mode::PostSelected)?;
                    let seed = child_seed(cfg.seed, (1 << 40) + ((pi as u64) << 24) + ((si as u64) << 20) + j as u64);
                    let st =
                        trial_average(1, seed, |sd| noisy_tomography(&spec, &pat, &NoiseSpec::new(p, sd)?, shots))?;
                    Ok((b, st, f64::NAN))
                })
                .collect::<Result<_>>()?;
            curves.push(SchemeCurve { label: s.label.clone(), sites: s.sites.clone(), noise_p: p, points });
        }
    }

    let mut art = Artifacts::new("exp4", &cfg.hash(), cfg.seed);
    let header =
        ["alpha", "theta", "beta", "exp_x", "exp_y", "err_x", "err_y", "shots", "seed", "scheme", "accepted_fraction"];
    let mut tables: Vec<Table> = vec![Table::new("exp4", &header)];
    for c in &curves {
        let name = if c.noise_p == 0.0 { "exp4".to_string() } else { format!("exp4_noisy_p{}", c.noise_p) };
        if !tables.iter().any(|t| t.name == name) {
            tables.push(Table::new(&name, &header));
        }
        let t = tables.iter_mut().find(|t| t.name == name).expect("table exists");
        for (b, s, _) in &c.points {
            t.push(vec![
                String::new(),
                String::new(),
                num(*b),
                num(s.x),
                num(s.y),
                num(s.err_x),
                num(s.err_y),
                s.shots.to_string(),
                cfg.seed.to_string(),
                c.label.clone(),
                num(s.accepted_fraction),
            ]);
        }
    }
    art.tables = tables;
    art.metrics.insert("n".into(), json!(n));
    art.metrics.insert("phi".into(), json!(phi));
    art.metrics.insert("trials".into(), json!(trials));
    art.metrics.insert("two_qubit_gates".into(), json!(spec.two_qubit_gate_count()?));
    art.metrics.insert(
        "schemes".into(),
        json!(curves
            .iter()
            .map(|c| json!({
                "label": c.label, "sites": c.sites, "noise_p": c.noise_p,
                "lp": c.points.iter().map(|p| p.1.lp).collect::<Vec<_>>(),
                "lp_err": c.points.iter().map(|p| p.1.lp_err).collect::<Vec<_>>(),
                "lp_exact": c.points.iter().map(|p| p.2).collect::<Vec<_>>(),
                "accepted_fraction": c.points.iter().map(|p| p.1.accepted_fraction).collect::<Vec<_>>(),
            }))
            .collect::<Vec<_>>()),
    );
    art.conventions.insert(
        "post_selection".into(),
        json!("keep shots with +1 on the opposite-sublattice wire sites between the first and last rotation"),
    );

    let mut chart = Chart::new(&format!("Packing schemes, phi = {phi:.3}"), "beta", "loss of purity");
    for c in &curves {
        let tag = if c.noise_p == 0.0 { format!("({})", c.label) } else { format!("({}) p = {}", c.label, c.noise_p) };
        chart = chart.with(Series::points(
            &tag,
            c.points.iter().map(|p| (p.0, p.1.lp)).collect(),
            Some(c.points.iter().map(|p| p.1.lp_err).collect()),
        ));
        if c.noise_p == 0.0 {
            chart = chart
                .with(Series::line(&format!("({}) exact", c.label), c.points.iter().map(|p| (p.0, p.2)).collect()));
        }
    }
    art.plots.push(("exp4_purity_loss".into(), chart.render()));
    Ok(Exp4 { phi, curves, artifacts: art })
}
