//! Flat `key = value` experiment configs.
//!
//! Lines are `key = value`; `#` starts a comment. Numbers accept `pi`
//! expressions (`pi/3`, `2*pi/5`). Lists are comma separated; a grid may be
//! written `start:stop:count` (inclusive linspace). Schemes are
//! `label:site,site;label:site,...`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;

use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Experiment {
    Exp0,
    Exp1,
    Exp2,
    Exp3,
    Exp4,
    ChannelGrid,
    Packing,
    Crossover,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::Exp0,
        Experiment::Exp1,
        Experiment::Exp2,
        Experiment::Exp3,
        Experiment::Exp4,
        Experiment::ChannelGrid,
        Experiment::Packing,
        Experiment::Crossover,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Exp0 => "exp0",
            Experiment::Exp1 => "exp1",
            Experiment::Exp2 => "exp2",
            Experiment::Exp3 => "exp3",
            Experiment::Exp4 => "exp4",
            Experiment::ChannelGrid => "channel-grid",
            Experiment::Packing => "packing",
            Experiment::Crossover => "crossover",
        }
    }

    /// Keys each experiment understands besides `experiment`, `seed`, `out`.
    fn keys(self) -> &'static [&'static str] {
        match self {
            Experiment::Exp0 => &["n", "alpha", "theta", "shots", "profile"],
            Experiment::Exp1 => &["n", "alpha", "theta", "theta_from", "beta", "shots", "reweight", "profile"],
            Experiment::Exp2 => &["n", "alpha", "theta_from", "beta", "shots", "profile"],
            Experiment::Exp3 => {
                &["n", "alpha", "theta", "theta_from", "beta", "m", "shots", "trials", "noise_p", "mode", "profile"]
            }
            Experiment::Exp4 => &["n", "phi", "beta", "schemes", "shots", "trials", "noise_p", "compile", "profile"],
            Experiment::ChannelGrid => &["sigma", "beta", "m"],
            Experiment::Packing => &["n", "phi", "beta", "schemes"],
            Experiment::Crossover => &["n", "phi", "beta", "schemes"],
        }
    }
}

impl std::str::FromStr for Experiment {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Experiment::ALL.into_iter().find(|e| e.name() == s).ok_or_else(|| format!("unknown experiment '{s}'"))
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThetaFrom {
    /// Analytic finite-n VQE optimum.
    Finite,
    /// Thermodynamic-limit optimum θ*(α).
    Thermodynamic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Profile {
    Full,
    /// Trials scaled down tenfold.
    Fast,
}

#[derive(Debug)]
pub struct ConfigError(pub Vec<String>);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "invalid config ({} problem{}):", self.0.len(), if self.0.len() == 1 { "" } else { "s" })?;
        for e in &self.0 {
            writeln!(f, "  - {e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Debug, PartialEq)]
pub struct Scheme {
    pub label: String,
    pub sites: Vec<usize>,
}

/// A validated experiment config. Optional fields fall back to the
/// experiment's defaults in the runner.
#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub experiment: Experiment,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub n: Option<usize>,
    pub alpha: Option<Vec<f64>>,
    pub theta: Option<Vec<f64>>,
    pub theta_from: Option<ThetaFrom>,
    pub phi: Option<Vec<f64>>,
    pub sigma: Option<Vec<f64>>,
    pub beta: Option<Vec<f64>>,
    pub m: Option<Vec<usize>>,
    pub schemes: Option<Vec<Scheme>>,
    pub shots: Option<usize>,
    pub trials: Option<usize>,
    pub noise_p: Option<Vec<f64>>,
    pub reweight: Option<bool>,
    pub mode: Option<mbqc::engine::Mode>,
    pub compile: Option<mbqc::states::CompileMode>,
    pub profile: Profile,
    raw: BTreeMap<String, String>,
}

pub fn parse_number(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(r) => (true, r.trim()),
        None => (false, s),
    };
    let mut parts = body.split('/');
    let num = parts.next().unwrap_or("");
    let den = parts.next();
    if parts.next().is_some() {
        return Err(format!("'{s}' is not a number"));
    }
    let mut v = 1.0;
    for f in num.split('*') {
        let f = f.trim();
        v *= match f {
            "pi" => PI,
            _ => f.parse::<f64>().map_err(|_| format!("'{s}' is not a number"))?,
        };
    }
    if let Some(d) = den {
        let d: f64 = d.trim().parse().map_err(|_| format!("'{s}' is not a number"))?;
        if d == 0.0 {
            return Err(format!("'{s}' divides by zero"));
        }
        v /= d;
    }
    if !v.is_finite() {
        return Err(format!("'{s}' is not finite"));
    }
    Ok(if neg { -v } else { v })
}

pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let a = parse_number(parts[0])?;
        let b = parse_number(parts[1])?;
        let k: usize = parts[2].trim().parse().map_err(|_| format!("grid count in '{s}' is not an integer"))?;
        return match k {
            0 => Err(format!("grid '{s}' has no points")),
            1 => Ok(vec![a]),
            _ => Ok(linspace(a, b, k)),
        };
    }
    s.split(',').map(parse_number).collect()
}

pub fn linspace(a: f64, b: f64, k: usize) -> Vec<f64> {
    if k == 1 {
        return vec![a];
    }
    (0..k).map(|i| a + (b - a) * i as f64 / (k - 1) as f64).collect()
}

fn parse_usizes(s: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| format!("'{}' is not a non-negative integer", t.trim())))
        .collect()
}

fn parse_schemes(s: &str) -> Result<Vec<Scheme>, String> {
    s.split(';')
        .map(|part| {
            let (label, sites) = part.split_once(':').ok_or_else(|| format!("scheme '{part}' needs label:sites"))?;
            let label = label.trim();
            if label.is_empty() {
                return Err(format!("scheme '{part}' has an empty label"));
            }
            Ok(Scheme { label: label.to_string(), sites: parse_usizes(sites)? })
        })
        .collect()
}

/// Splits `key = value` lines; comments and blank lines are skipped.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    let mut errs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match line.split_once('=') {
            Some((k, v)) => out.push((k.trim().to_string(), v.trim().to_string())),
            None => errs.push(format!("line {}: expected key = value", i + 1)),
        }
    }
    if errs.is_empty() {
        Ok(out)
    } else {
        Err(ConfigError(errs))
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Self::from_pairs(parse_pairs(text)?)
    }

    /// Typed parsing plus validation; every problem is collected before
    /// anything is returned.
    pub fn from_pairs(pairs: Vec<(String, String)>) -> Result<Self, ConfigError> {
        let mut errs = Vec::new();
        let mut raw = BTreeMap::new();
        for (k, v) in pairs {
            if raw.insert(k.clone(), v).is_some() {
                errs.push(format!("duplicate key '{k}'"));
            }
        }
        let experiment = match raw.get("experiment") {
            Some(v) => v.parse::<Experiment>().map_err(|e| errs.push(e)).ok(),
            None => {
                errs.push("missing required key 'experiment'".into());
                None
            }
        };
        let seed = match raw.get("seed") {
            Some(v) => v.parse::<u64>().map_err(|_| errs.push(format!("seed '{v}' is not a u64"))).ok(),
            None => {
                errs.push("missing required key 'seed'".into());
                None
            }
        };
        if let Some(e) = experiment {
            for k in raw.keys() {
                if !["experiment", "seed", "out"].contains(&k.as_str()) && !e.keys().contains(&k.as_str()) {
                    let known = Experiment::ALL.iter().any(|x| x.keys().contains(&k.as_str()));
                    errs.push(if known {
                        format!("key '{k}' is not used by {e}")
                    } else {
                        format!("unknown key '{k}'")
                    });
                }
            }
        }

        fn field<T>(
            raw: &BTreeMap<String, String>,
            errs: &mut Vec<String>,
            key: &str,
            f: impl Fn(&str) -> Result<T, String>,
        ) -> Option<T> {
            raw.get(key).and_then(|v| f(v).map_err(|e| errs.push(format!("{key}: {e}"))).ok())
        }
        let pos = |s: &str| -> Result<usize, String> {
            match s.trim().parse::<usize>() {
                Ok(0) | Err(_) => Err(format!("'{s}' must be a positive integer")),
                Ok(v) => Ok(v),
            }
        };
        let cfg = Config {
            experiment: experiment.unwrap_or(Experiment::Exp0),
            seed: seed.unwrap_or(0),
            out: raw.get("out").map(PathBuf::from),
            n: field(&raw, &mut errs, "n", pos),
            alpha: field(&raw, &mut errs, "alpha", parse_list),
            theta: field(&raw, &mut errs, "theta", parse_list),
            theta_from: field(&raw, &mut errs, "theta_from", |s| match s {
                "finite" => Ok(ThetaFrom::Finite),
                "thermodynamic" => Ok(ThetaFrom::Thermodynamic),
                _ => Err(format!("'{s}' is not finite|thermodynamic")),
            }),
            phi: field(&raw, &mut errs, "phi", parse_list),
            sigma: field(&raw, &mut errs, "sigma", parse_list),
            beta: field(&raw, &mut errs, "beta", parse_list),
            m: field(&raw, &mut errs, "m", parse_usizes),
            schemes: field(&raw, &mut errs, "schemes", parse_schemes),
            shots: field(&raw, &mut errs, "shots", pos),
            trials: field(&raw, &mut errs, "trials", pos),
            noise_p: field(&raw, &mut errs, "noise_p", parse_list),
            reweight: field(&raw, &mut errs, "reweight", |s| {
                s.parse::<bool>().map_err(|_| format!("'{s}' is not true|false"))
            }),
            mode: field(&raw, &mut errs, "mode", |s| match s {
                "adaptive" => Ok(mbqc::engine::Mode::Adaptive),
                "sign_agnostic" => Ok(mbqc::engine::Mode::SignAgnostic),
                "post_selected" => Ok(mbqc::engine::Mode::PostSelected),
                _ => Err(format!("'{s}' is not adaptive|sign_agnostic|post_selected")),
            }),
            compile: field(&raw, &mut errs, "compile", |s| match s {
                "direct" => Ok(mbqc::states::CompileMode::Direct),
                "swap" => Ok(mbqc::states::CompileMode::SwapCompiled),
                _ => Err(format!("'{s}' is not direct|swap")),
            }),
            profile: field(&raw, &mut errs, "profile", |s| match s {
                "full" => Ok(Profile::Full),
                "fast" => Ok(Profile::Fast),
                _ => Err(format!("'{s}' is not full|fast")),
            })
            .unwrap_or(Profile::Full),
            raw,
        };
        if experiment.is_some() {
            cfg.check(&mut errs);
        }
        if errs.is_empty() {
            Ok(cfg)
        } else {
            Err(ConfigError(errs))
        }
    }

    fn check(&self, errs: &mut Vec<String>) {
        let e = self.experiment;
        let half_pi = PI / 2.0;
        if e != Experiment::Exp0 && self.alpha.is_some() && self.theta.is_some() {
            errs.push("give either alpha or theta, not both".into());
        }
        if e != Experiment::Exp0 && self.theta.is_some() && self.theta_from.is_some() {
            errs.push("theta_from only applies when theta is derived from alpha".into());
        }
        if let Some(a) = &self.alpha {
            if a.is_empty() || a.iter().any(|&x| !(0.0..=half_pi).contains(&x)) {
                errs.push("alpha values must lie in [0, π/2]".into());
            }
            if e == Experiment::Exp2 && a.iter().any(|&x| x >= half_pi) {
                errs.push("exp2 needs alpha < π/2 (σ = 0 leaves no computational order to fit)".into());
            }
        }
        if let Some(t) = &self.theta {
            if t.is_empty() || t.iter().any(|&x| !(0.0..=PI).contains(&x)) {
                errs.push("theta values must lie in [0, π]".into());
            }
        }
        if let Some(n) = self.n {
            let (lo, hi) = match e {
                Experiment::Exp0 | Experiment::Exp1 | Experiment::Exp2 | Experiment::Exp3 => (5, 15),
                Experiment::Exp4 => (7, 13),
                _ => (7, 17),
            };
            if n % 2 == 0 || n < lo || n > hi {
                errs.push(format!("n = {n} must be odd and within {lo}..={hi} for {e}"));
            }
        }
        if let Some(p) = &self.noise_p {
            if p.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
                errs.push("noise_p values must lie in [0, 1]".into());
            }
        }
        if let Some(s) = &self.sigma {
            if s.iter().any(|&x| !(-1.0..=1.0).contains(&x)) {
                errs.push("sigma values must lie in [-1, 1]".into());
            }
        }
        if let Some(b) = &self.beta {
            if b.is_empty() {
                errs.push("beta grid is empty".into());
            }
            if e == Experiment::Exp2 && b.len() < 3 {
                errs.push("exp2 needs at least 3 beta points for the line fit".into());
            }
            if e == Experiment::Exp3 && b.len() < 4 {
                errs.push("exp3 needs at least 4 beta points for the quadratic fit".into());
            }
            if e == Experiment::Exp1 && b.len() < 5 {
                errs.push("exp1 needs at least 5 beta points for the ellipse fit".into());
            }
            if e == Experiment::Crossover && b.len() != 1 {
                errs.push("crossover takes a single beta".into());
            }
        }
        if let Some(ms) = &self.m {
            if ms.is_empty() || ms.contains(&0) {
                errs.push("m values must be positive".into());
            }
            let n = self.n.unwrap_or(9);
            if e == Experiment::Exp3 && ms.iter().any(|&m| 2 * m + 1 > n - 2) {
                errs.push(format!("m rotations on sites 3,5,… do not fit a chain of {n} sites"));
            }
        }
        if let Some(sch) = &self.schemes {
            let n = self.n.unwrap_or(11);
            for s in sch {
                if s.sites.is_empty() {
                    errs.push(format!("scheme '{}' has no sites", s.label));
                }
                if s.sites.windows(2).any(|w| w[1] <= w[0] || (w[1] - w[0]) % 2 == 1) {
                    errs.push(format!("scheme '{}': sites must increase with even spacing", s.label));
                }
                if s.sites.iter().any(|&x| x < 2 || x > n.saturating_sub(2)) {
                    errs.push(format!(
                        "scheme '{}': sites must lie in 2..={} for n = {n}",
                        s.label,
                        n.saturating_sub(2)
                    ));
                }
            }
            if e == Experiment::Crossover && sch.len() != 2 {
                errs.push("crossover compares exactly two schemes".into());
            }
        }
        if let Some(phi) = &self.phi {
            if e == Experiment::Crossover && phi.len() < 2 {
                errs.push("crossover needs a phi grid of at least 2 points".into());
            }
        }
    }

    /// Canonical `key=value` text (sorted), the input of the config hash.
    pub fn canonical(&self) -> String {
        self.raw.iter().filter(|(k, _)| k.as_str() != "out").map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }

    pub fn raw(&self) -> &BTreeMap<String, String> {
        &self.raw
    }

    /// Trials after the profile scaling (never below one).
    pub fn trials_or(&self, default: usize) -> usize {
        let t = self.trials.unwrap_or(default);
        match self.profile {
            Profile::Full => t,
            Profile::Fast => (t / 10).max(1),
        }
    }
}
