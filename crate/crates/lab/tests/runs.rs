use std::f64::consts::FRAC_PI_2;
use std::process::Command;

use mbqc_lab::config::Config;
use mbqc_lab::runners;

fn cfg(text: &str) -> Config {
    Config::parse(text).unwrap()
}

fn csvs(c: &Config) -> Vec<String> {
    let art = runners::run(c).unwrap();
    art.tables.iter().map(|t| art.csv_text(t)).collect()
}

#[test]
fn outputs_are_reproducible_across_thread_counts() {
    let c = cfg("experiment = exp3\nseed = 11\nm = 1,2\nbeta = 0:0.3:5\nshots = 500\ntrials = 6\nnoise_p = 0.01");
    let pool = |k| rayon::ThreadPoolBuilder::new().num_threads(k).build().unwrap();
    let one = pool(1).install(|| csvs(&c));
    let four = pool(4).install(|| csvs(&c));
    assert!(!one.is_empty());
    assert_eq!(one, four);
    assert_eq!(one, csvs(&c));
    assert!(one[0].starts_with(&format!("# config_hash={} seed=11\n", c.hash())));
    let other =
        csvs(&cfg("experiment = exp3\nseed = 12\nm = 1,2\nbeta = 0:0.3:5\nshots = 500\ntrials = 6\nnoise_p = 0.01"));
    assert_ne!(one, other);
}

#[test]
fn correlated_schemes_are_ordered_without_noise() {
    let r = runners::exp4::run(&cfg("experiment = exp4\nseed = 5\nphi = pi/4\nshots = 10000\nprofile = fast")).unwrap();
    assert_eq!(r.curves.len(), 3);
    let (i, ii, iii) = (&r.curves[0].points, &r.curves[1].points, &r.curves[2].points);
    for k in 0..i.len() {
        let beta = i[k].0;
        if beta == 0.0 {
            for c in [i, ii, iii] {
                assert!(c[k].2.abs() < 1e-12);
            }
            continue;
        }
        assert!(i[k].2 > ii[k].2 && ii[k].2 > iii[k].2, "exact ordering at β={beta}");
        for c in [i, ii, iii] {
            let s = &c[k].1;
            assert!((s.lp - c[k].2).abs() <= 5.0 * s.lp_err + 1e-9, "sampled vs exact at β={beta}");
        }
    }
    assert!((i.last().unwrap().0 - FRAC_PI_2).abs() < 1e-12);
}

#[test]
fn noisy_offset_is_positive() {
    let r = runners::exp3::run(&cfg(
        "experiment = exp3\nseed = 2\nm = 1\nbeta = 0:0.3:6\nshots = 2000\ntrials = 2\nnoise_p = 0.02",
    ))
    .unwrap();
    let noisy = &r.noisy[0];
    assert!(noisy.noise_p > 0.0);
    assert!(noisy.fit.get("d").value > 0.0);
}

fn lab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mbqc-lab"))
}

#[test]
fn cli_run_and_sweep_write_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("grid.cfg");
    std::fs::write(&conf, "experiment = channel-grid\nseed = 1\nsigma = 0:0.5:3\nbeta = 0:1:3\n").unwrap();
    let out = dir.path().join("grid");
    let st = lab().arg("run").arg(&conf).arg("--out").arg(&out).env("MBQC_LAB_THREADS", "2").status().unwrap();
    assert!(st.success());
    assert!(out.join("channel_grid.csv").exists());
    let json = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.to_string_lossy().ends_with("summary.json"))
        .unwrap();
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(summary["seed"], 1);
    assert_eq!(summary["experiment"], "channel-grid");

    let sweep = dir.path().join("sweep");
    let st = lab()
        .args([
            "sweep",
            "--experiment",
            "channel-grid",
            "--param",
            "seed=1",
            "--param",
            "sigma=0.1|0.2",
            "--param",
            "beta=0,1",
        ])
        .arg("--out")
        .arg(&sweep)
        .status()
        .unwrap();
    assert!(st.success());
    assert!(sweep.join("channel-grid/run000/channel_grid.csv").exists());
    assert!(sweep.join("channel-grid/run001/channel_grid.csv").exists());
}

#[test]
fn cli_rejects_bad_sweeps_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab()
        .args(["sweep", "--experiment", "channel-grid", "--param", "seed=1", "--param", "sigma=0.1|7"])
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sigma"));
    assert!(!dir.path().join("channel-grid").exists());
    let o = lab().args(["run", "/nonexistent.cfg"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}
