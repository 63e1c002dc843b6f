use std::f64::consts::PI;

use mbqc_lab::config::{linspace, parse_list, parse_number, Config, Experiment, Profile};

fn errors(text: &str) -> Vec<String> {
    Config::parse(text).unwrap_err().0
}

#[test]
fn numbers_and_lists() {
    assert_eq!(parse_number("pi/3").unwrap(), PI / 3.0);
    assert_eq!(parse_number("-2*pi").unwrap(), -2.0 * PI);
    assert_eq!(parse_number("0.25").unwrap(), 0.25);
    assert!(parse_number("pie").is_err());
    assert_eq!(parse_list("0:1:5").unwrap(), linspace(0.0, 1.0, 5));
    assert_eq!(parse_list("0, pi/2").unwrap(), vec![0.0, PI / 2.0]);
    assert_eq!(linspace(0.0, 1.0, 1), vec![0.0]);
}

#[test]
fn minimal_config_parses() {
    let c = Config::parse("# comment\nexperiment = exp3\nseed = 7\nm = 1,2\nprofile = fast\n").unwrap();
    assert_eq!(c.experiment, Experiment::Exp3);
    assert_eq!(c.seed, 7);
    assert_eq!(c.m, Some(vec![1, 2]));
    assert_eq!(c.profile, Profile::Fast);
    assert_eq!(c.trials_or(240), 24);
}

#[test]
fn seed_is_mandatory() {
    assert!(errors("experiment = exp1").iter().any(|e| e.contains("'seed'")));
}

#[test]
fn all_problems_are_reported_together() {
    let e = errors("experiment = exp1\nseed = x\nbogus = 1\nm = 2\nalpha = 0.3\ntheta = 0.2\nn = 4\nshots = 0\n");
    for want in ["seed 'x'", "unknown key 'bogus'", "key 'm' is not used by exp1", "not both", "n = 4", "shots"] {
        assert!(e.iter().any(|m| m.contains(want)), "missing '{want}' in {e:?}");
    }
    assert!(e.len() >= 6);
}

#[test]
fn duplicates_and_ranges() {
    let e = errors("experiment = exp3\nseed = 1\nseed = 2\nnoise_p = 1.5\nm = 9\n");
    assert!(e.iter().any(|m| m.contains("duplicate key 'seed'")));
    assert!(e.iter().any(|m| m.contains("noise_p")));
    assert!(e.iter().any(|m| m.contains("do not fit")));
    let e = errors("experiment = exp4\nseed = 1\nschemes = a:3,4\n");
    assert!(e.iter().any(|m| m.contains("even spacing")), "{e:?}");
    let e = errors("experiment = exp2\nseed = 1\nalpha = pi/2\n");
    assert!(e.iter().any(|m| m.contains("alpha < π/2")), "{e:?}");
}

#[test]
fn hash_ignores_output_directory_only() {
    let a = Config::parse("experiment = exp1\nseed = 3\nout = /tmp/a\n").unwrap();
    let b = Config::parse("seed = 3\nexperiment = exp1\nout = /tmp/b\n").unwrap();
    let c = Config::parse("experiment = exp1\nseed = 4\n").unwrap();
    assert_eq!(a.hash(), b.hash());
    assert_ne!(a.hash(), c.hash());
    assert_eq!(a.hash().len(), 64);
}
