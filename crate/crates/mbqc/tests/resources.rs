use std::f64::consts::{FRAC_PI_4, PI};

use mbqc::pauli::{stabilizer_k, symmetry_generators, Pauli, PauliString};
use mbqc::rng;
use mbqc::states::{
    build_cluster, build_deformed, build_deformed_gadget, build_xx_rotated, exact_ground_state, hamiltonian_energy,
    perturbative_gs, CompileMode, GadgetMode, ResourceKind, ResourceSpec,
};
use mbqc::sv::{c, Gate1, SiteInit};
use mbqc::vqe::analytic_expectations;

#[test]
fn deformed_expectations_match_closed_forms() {
    for n in [5, 7, 9] {
        for k in 0..64 {
            let t = PI * k as f64 / 63.0;
            let sv = build_deformed(n, t).unwrap();
            let e = analytic_expectations(t, n).unwrap();
            for i in 1..=n {
                let k_sim = sv.expect_pauli(&stabilizer_k(i, n).unwrap()).unwrap();
                let x_sim = sv.expect_pauli(&PauliString::from_sites(n, &[(i, Pauli::X)]).unwrap()).unwrap();
                assert!((k_sim - e.k[i - 1]).abs() < 1e-10, "K_{i} n={n} θ={t}");
                assert!((x_sim - e.x[i - 1]).abs() < 1e-10, "X_{i} n={n} θ={t}");
            }
        }
    }
}

#[test]
fn deformation_preserves_norm_for_any_input() {
    // ⟨C|Π M²|C⟩ = 1: every X-string in the expansion has zero cluster expectation.
    let spec = ResourceSpec::new(ResourceKind::Deformed(1.1), 7);
    for inp in [[c(1.0), c(0.0)], [c(0.6), c(0.8)], SiteInit::Plus.amplitudes()] {
        let sv = spec.build_with_input(inp).unwrap();
        assert!((sv.computed_norm_sq() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn deformed_state_is_symmetric() {
    let (a, b) = symmetry_generators(9).unwrap();
    for t in [0.3, 1.2, 2.0] {
        let sv = build_deformed(9, t).unwrap();
        assert!((sv.expect_pauli(&a).unwrap() - 1.0).abs() < 1e-12);
        assert!((sv.expect_pauli(&b).unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn gadget_reproduces_direct_preparation() {
    let (n, t) = (7, 0.9);
    let direct = build_deformed(n, t).unwrap();
    for seed in 0..8 {
        let mut r = rng::stream(seed, 0);
        let out = build_deformed_gadget(n, t, GadgetMode::Corrected, 1, &mut r).unwrap();
        let mut s = out.state.clone();
        s.apply_pauli(&out.x_byproduct).unwrap();
        assert!((s.fidelity(&direct).unwrap() - 1.0).abs() < 1e-10, "seed {seed}");
        assert!((out.branch_probability - 1.0 / 32.0).abs() < 1e-12);

        let mut r = rng::stream(seed, 1);
        let out = build_deformed_gadget(n, t, GadgetMode::Postselect, 10_000, &mut r).unwrap();
        assert!(out.ancilla_outcomes.iter().all(|&o| o == 1));
        assert!((out.state.fidelity(&direct).unwrap() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn gadget_retry_cap_is_enforced() {
    let mut r = rng::stream(3, 0);
    let mut hit = false;
    for _ in 0..20 {
        if build_deformed_gadget(11, 0.4, GadgetMode::Postselect, 1, &mut r).is_err() {
            hit = true;
        }
    }
    assert!(hit);
}

#[test]
fn swap_compiled_xx_state_matches_direct() {
    for phi in [0.2, FRAC_PI_4, 1.3] {
        let a = build_xx_rotated(11, phi, CompileMode::Direct).unwrap();
        let b = build_xx_rotated(11, phi, CompileMode::SwapCompiled).unwrap();
        assert!((a.fidelity(&b).unwrap() - 1.0).abs() < 1e-12);
    }
    let d = ResourceSpec::new(ResourceKind::XxRotated(0.5), 11);
    let s = d.with_compile(CompileMode::SwapCompiled);
    assert_eq!(s.two_qubit_gate_count().unwrap(), d.two_qubit_gate_count().unwrap() + 2 * 3);
}

#[test]
fn xx_rotated_state_is_symmetric() {
    let (a, b) = symmetry_generators(11).unwrap();
    let sv = build_xx_rotated(11, 0.7, CompileMode::Direct).unwrap();
    assert!((sv.expect_pauli(&a).unwrap() - 1.0).abs() < 1e-12);
    assert!((sv.expect_pauli(&b).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn exact_ground_state_is_variational_lower_bound() {
    let n = 7;
    for alpha in [0.2, 0.6, 1.0] {
        let gs = exact_ground_state(alpha, n).unwrap();
        assert!((hamiltonian_energy(&gs.state, alpha).unwrap() - gs.energy).abs() < 1e-9);
        for k in 0..32 {
            let t = PI * k as f64 / 31.0;
            let e = hamiltonian_energy(&build_deformed(n, t).unwrap(), alpha).unwrap();
            assert!(e >= gs.energy - 1e-9);
        }
    }
}

fn infidelity(alpha: f64) -> f64 {
    let exact = exact_ground_state(alpha, 5).unwrap();
    1.0 - perturbative_gs(alpha, 5).unwrap().fidelity(&exact.state).unwrap()
}

#[test]
fn perturbative_ground_state_error_is_fourth_order() {
    let al = [0.05f64, 0.1, 0.2];
    let pts: Vec<(f64, f64)> = al.iter().map(|&a| (a.ln(), infidelity(a).ln())).collect();
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / 3.0;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / 3.0;
    let slope =
        pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    assert!((slope - 4.0).abs() < 0.3, "slope {slope}");
}

#[test]
fn cluster_is_ground_state_at_zero_field() {
    let gs = exact_ground_state(0.0, 5).unwrap();
    assert!((gs.energy + 5.0).abs() < 1e-12);
    assert_eq!(gs.degeneracy, 1);
    assert!((gs.state.fidelity(&build_cluster(5).unwrap()).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn rotated_cluster_expectation_sign() {
    // RY(θ)|+⟩ has ⟨Z⟩ = −sin θ for the standard gate.
    let mut s = mbqc::StateVector::new(1, &[SiteInit::Plus]).unwrap();
    s.apply_1q(1, &Gate1::ry(0.4)).unwrap();
    let z = s.expect_pauli(&"+Z".parse().unwrap()).unwrap();
    assert!((z + 0.4f64.sin()).abs() < 1e-12);
}
