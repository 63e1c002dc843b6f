use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

use mbqc::vqe::{
    closed_form_energy, optimize_theta, sampled_expectations, thermo_energy_density, thermo_limit_theta, Objective,
};

/// Brute-force minimiser at 1e-8 resolution: coarse scan, then a dense
/// window around the coarse minimum.
fn scan_min<F: Fn(f64) -> f64>(f: F) -> f64 {
    let coarse = 100_000;
    let k = (0..=coarse)
        .min_by(|&a, &b| f(PI * a as f64 / coarse as f64).total_cmp(&f(PI * b as f64 / coarse as f64)))
        .unwrap();
    let c = PI * k as f64 / coarse as f64;
    let (lo, hi) = ((c - 1e-4).max(0.0), (c + 1e-4).min(PI));
    let steps = ((hi - lo) / 1e-8) as usize;
    let j = (0..=steps).min_by(|&a, &b| f(lo + a as f64 * 1e-8).total_cmp(&f(lo + b as f64 * 1e-8))).unwrap();
    lo + j as f64 * 1e-8
}

#[test]
fn analytic_optimum_matches_scan_oracle() {
    for (alpha, n) in [(0.3, 5), (0.8, 7), (1.2, 9), (1.5, 5)] {
        let o = optimize_theta(Objective::Analytic, alpha, n, 64, 100).unwrap();
        let s = scan_min(|t| closed_form_energy(t, alpha, n));
        assert!((o.theta - s).abs() < 1e-5, "α={alpha} n={n}: {} vs {s}", o.theta);
        assert!(o.bracketed);
    }
}

#[test]
fn thermodynamic_optimum_matches_closed_form() {
    for alpha in [0.1, 0.5, 0.9, 1.2, 1.4] {
        let o = optimize_theta(Objective::Thermodynamic, alpha, 0, 64, 100).unwrap();
        let want = thermo_limit_theta(alpha).unwrap();
        assert!((o.theta - want).abs() < 1e-5, "α={alpha} {o:?} {want}");
        let s = scan_min(|t| thermo_energy_density(t, alpha));
        assert!((s - want).abs() < 1e-5);
    }
}

#[test]
fn optimum_is_monotone_in_alpha() {
    let mut last = -1.0;
    for k in 0..=40 {
        let alpha = FRAC_PI_2 * k as f64 / 40.0;
        let o = optimize_theta(Objective::Analytic, alpha, 7, 64, 100).unwrap();
        assert!(o.theta >= last - 1e-9, "α={alpha}");
        last = o.theta;
    }
}

#[test]
fn thermodynamic_transition_at_arctan_two() {
    let a = 2f64.atan();
    assert_eq!(thermo_limit_theta(a).unwrap(), FRAC_PI_2);
    assert!(thermo_limit_theta(a - 1e-6).unwrap() < FRAC_PI_2);
    // the interior branch approaches the saturated one continuously
    assert!((thermo_limit_theta(a - 1e-12).unwrap() - FRAC_PI_2).abs() < 1e-5);
}

#[test]
fn sampled_expectations_within_four_sigma() {
    let t = FRAC_PI_3;
    let b = sampled_expectations(t, 0.5, 7, 1_000_000, 8).unwrap();
    assert!((b.x_field - t.sin()).abs() < 4.0 * b.err_x_field);
    assert!((b.k_boundary - t.cos()).abs() < 4.0 * b.err_k_boundary);
    assert!((b.k_bulk - 0.25).abs() < 4.0 * b.err_k_bulk);
    assert!((b.total_energy - closed_form_energy(t, 0.5, 7)).abs() < 4.0 * b.err_total);
}

#[test]
fn sampling_error_scales_as_inverse_root_shots() {
    let t = 0.9;
    // mean absolute error over independent seeds, at four shot counts
    let shots = [1_000usize, 10_000, 100_000, 1_000_000];
    let pts: Vec<(f64, f64)> = shots
        .iter()
        .map(|&s| {
            let err: f64 = (0..24)
                .map(|seed| (sampled_expectations(t, 0.4, 5, s, 1000 + seed).unwrap().k_bulk - t.cos().powi(2)).abs())
                .sum::<f64>()
                / 24.0;
            ((s as f64).ln(), err.ln())
        })
        .collect();
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    let slope =
        pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    assert!((slope + 0.5).abs() < 0.1, "slope {slope}");
}

#[test]
fn sampled_objective_reports_theta_uncertainty() {
    let o = optimize_theta(Objective::Sampled { shots: 20_000, seed: 3 }, 0.6, 7, 32, 30).unwrap();
    let exact = optimize_theta(Objective::Analytic, 0.6, 7, 64, 100).unwrap();
    let err = o.theta_err.unwrap();
    assert!(err > 0.0);
    assert!((o.theta - exact.theta).abs() < 0.1);
}
