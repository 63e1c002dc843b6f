use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use mbqc_lab::config::{parse_pairs, Config, Experiment};
use mbqc_lab::{acceptance, runners};

#[derive(Parser)]
#[command(name = "mbqc-lab", version, about = "Simulated MBQC experiments in the cluster phase")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one experiment from a key = value config file.
    Run {
        config: PathBuf,
        /// Output directory (overrides `out` in the config).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance suite.
    Verify {
        /// Only these criteria (1-10).
        #[arg(long, value_delimiter = ',')]
        only: Vec<usize>,
    },
    /// Run an experiment over the cartesian product of parameter values;
    /// alternatives are separated by '|', e.g. `--param alpha=0.3|0.6`.
    Sweep {
        #[arg(long)]
        experiment: Experiment,
        #[arg(long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("MBQC_LAB_THREADS") {
        let k: usize = v.parse().with_context(|| format!("MBQC_LAB_THREADS='{v}' is not a positive integer"))?;
        if k == 0 {
            bail!("MBQC_LAB_THREADS must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(k).build_global()?;
    }
    Ok(())
}

fn execute(cfg: &Config, out: &Path) -> Result<()> {
    let art = runners::run(cfg)?;
    for p in art.write(out)? {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> Result<ExitCode> {
    let cli = Cli::parse();
    init_threads()?;
    match cli.cmd {
        Cmd::Run { config, out } => {
            let text = std::fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let cfg = Config::parse(&text)?;
            let dir =
                out.or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("results").join(cfg.experiment.name()));
            execute(&cfg, &dir)?;
        }
        Cmd::Verify { only } => {
            let ids: Vec<usize> = if only.is_empty() { (1..=acceptance::CRITERIA.len()).collect() } else { only };
            let mut failed = 0;
            for id in ids {
                if !(1..=acceptance::CRITERIA.len()).contains(&id) {
                    bail!("no criterion {id}");
                }
                let o = acceptance::run_one(id);
                println!("{o}");
                failed += usize::from(!o.pass);
            }
            if failed > 0 {
                println!("{failed} criterion(s) failed");
                return Ok(ExitCode::FAILURE);
            }
        }
        Cmd::Sweep { experiment, params, out } => {
            let mut axes: Vec<(String, Vec<String>)> = Vec::new();
            for p in &params {
                let (k, v) = p.split_once('=').with_context(|| format!("--param '{p}' is not key=value"))?;
                axes.push((k.trim().to_string(), v.split('|').map(|s| s.trim().to_string()).collect()));
            }
            // validate every combination before running any of them
            let mut combos: Vec<Vec<(String, String)>> = vec![Vec::new()];
            for (k, vs) in &axes {
                combos = combos
                    .into_iter()
                    .flat_map(|c| vs.iter().map(move |v| [c.clone(), vec![(k.clone(), v.clone())]].concat()))
                    .collect();
            }
            let mut cfgs = Vec::new();
            for c in &combos {
                let mut pairs = vec![("experiment".to_string(), experiment.name().to_string())];
                pairs.extend(c.iter().cloned());
                let text: String = pairs.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
                cfgs.push((c.clone(), Config::from_pairs(parse_pairs(&text)?)?));
            }
            for (i, (c, cfg)) in cfgs.iter().enumerate() {
                let tag: Vec<String> = c
                    .iter()
                    .filter(|(k, _)| axes.iter().any(|(a, v)| a == k && v.len() > 1))
                    .map(|(k, v)| format!("{k}={v}"))
                    .collect();
                let dir = out.join(experiment.name()).join(format!("run{i:03}"));
                println!("# run {i}: {}", if tag.is_empty() { "(single point)".into() } else { tag.join(" ") });
                execute(cfg, &dir)?;
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
