//! Resource states: cluster, deformed ansatz (direct and gadget), XX-rotated
//! cluster, and exact / first-order ground states of the interpolating
//! Hamiltonian.

use nalgebra::DMatrix;
use rand::Rng;

use crate::pauli::{stabilizer_k, Pauli, PauliString};
use crate::sv::{c, mat, Gate1, Gate2, Mat2, MeasBasis, SiteInit, StateVector, C64};
use crate::{Error, Result};

/// M(θ) = cos(θ/2) I + sin(θ/2) X.
pub fn m_theta(theta: f64) -> Mat2 {
    let (s, co) = (theta / 2.0).sin_cos();
    mat::add(&mat::scale(&mat::identity(), c(co)), &mat::scale(&mat::x(), c(s)))
}

#[derive(Clone, Debug)]
pub enum Op {
    One(usize, Gate1),
    Two(usize, usize, Gate2),
    /// Non-unitary single-site map.
    Map(usize, Mat2),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CompileMode {
    #[default]
    Direct,
    /// RXX(i, i+2) routed as SWAP(i+1, i+2) · RXX(i, i+1) · SWAP(i+1, i+2).
    SwapCompiled,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ResourceKind {
    Cluster,
    Deformed(f64),
    DeformedGadget(f64),
    XxRotated(f64),
    ExactGs(f64),
    PerturbativeGs(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResourceSpec {
    pub kind: ResourceKind,
    pub n: usize,
    pub compile: CompileMode,
}

impl ResourceSpec {
    pub fn new(kind: ResourceKind, n: usize) -> Self {
        ResourceSpec { kind, n, compile: CompileMode::Direct }
    }

    pub fn with_compile(mut self, compile: CompileMode) -> Self {
        self.compile = compile;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        let odd = |n: usize| if n % 2 == 1 { Ok(()) } else { Err(Error::EvenChain(n)) };
        let range = |v: f64, hi: f64, what: &str| {
            if (0.0..=hi + 1e-12).contains(&v) {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{what} = {v} outside [0, {hi}]")))
            }
        };
        use std::f64::consts::{FRAC_PI_2, PI};
        match self.kind {
            ResourceKind::Cluster => {
                if n < 2 {
                    return Err(Error::QubitCount(n));
                }
            }
            ResourceKind::Deformed(t) | ResourceKind::DeformedGadget(t) => {
                odd(n)?;
                if n < 3 {
                    return Err(Error::QubitCount(n));
                }
                range(t, PI, "theta")?;
            }
            ResourceKind::XxRotated(p) => {
                odd(n)?;
                if n < 7 {
                    return Err(Error::InvalidParameter(format!("XX-rotated state needs n >= 7, got {n}")));
                }
                range(p, FRAC_PI_2, "phi")?;
            }
            ResourceKind::ExactGs(a) | ResourceKind::PerturbativeGs(a) => {
                if !(3..=12).contains(&n) {
                    return Err(Error::QubitCount(n));
                }
                range(a, FRAC_PI_2, "alpha")?;
            }
        }
        Ok(())
    }

    /// Gate sequence applied to |in⟩|+⟩^{n−1}. Only the circuit-prepared
    /// kinds have one; the gadget kind is represented by its post-selected
    /// equivalent (the deformation maps).
    pub fn ops(&self) -> Result<Vec<Op>> {
        self.validate()?;
        let n = self.n;
        let mut ops: Vec<Op> = (1..n).map(|i| Op::Two(i, i + 1, Gate2::cz())).collect();
        match self.kind {
            ResourceKind::Cluster => {}
            ResourceKind::Deformed(t) | ResourceKind::DeformedGadget(t) => {
                let m = m_theta(t);
                ops.extend((2..n).map(|i| Op::Map(i, m)));
            }
            ResourceKind::XxRotated(phi) => {
                for i in xx_pairs(n) {
                    match self.compile {
                        CompileMode::Direct => ops.push(Op::Two(i, i + 2, Gate2::rxx(phi))),
                        CompileMode::SwapCompiled => {
                            ops.push(Op::Two(i + 1, i + 2, Gate2::swap()));
                            ops.push(Op::Two(i, i + 1, Gate2::rxx(phi)));
                            ops.push(Op::Two(i + 1, i + 2, Gate2::swap()));
                        }
                    }
                }
                for b in [3, n - 2] {
                    ops.push(Op::One(b, Gate1::rx(phi)));
                }
            }
            ResourceKind::ExactGs(_) | ResourceKind::PerturbativeGs(_) => {
                return Err(Error::InvalidParameter("ground-state oracles are not circuit-prepared".into()))
            }
        }
        Ok(ops)
    }

    pub fn build(&self) -> Result<StateVector> {
        self.build_with_input(SiteInit::Plus.amplitudes())
    }

    /// Same preparation with site 1 starting in `input` instead of |+⟩; this
    /// sets the logical input of the wire.
    pub fn build_with_input(&self, input: [C64; 2]) -> Result<StateVector> {
        match self.kind {
            ResourceKind::ExactGs(a) => {
                check_plus_input(&input)?;
                Ok(exact_ground_state(a, self.n)?.state)
            }
            ResourceKind::PerturbativeGs(a) => {
                check_plus_input(&input)?;
                perturbative_gs(a, self.n)
            }
            _ => run_ops(self.n, input, &self.ops()?, |_, _, _| Ok(())),
        }
    }

    pub fn two_qubit_gate_count(&self) -> Result<usize> {
        Ok(self.ops()?.iter().filter(|o| matches!(o, Op::Two(..))).count())
    }
}

fn check_plus_input(input: &[C64; 2]) -> Result<()> {
    if (input[0] - input[1]).norm() > 1e-12 {
        return Err(Error::InvalidParameter("ground-state oracles only support the |+⟩ input".into()));
    }
    Ok(())
}

/// Runs a gate sequence on |in⟩|+⟩^{n−1}; `after_two` is called after every
/// two-qubit gate (noise injection point).
pub fn run_ops<F>(n: usize, input: [C64; 2], ops: &[Op], mut after_two: F) -> Result<StateVector>
where
    F: FnMut(&mut StateVector, usize, usize) -> Result<()>,
{
    let mut sites = vec![SiteInit::Plus.amplitudes(); n];
    sites[0] = input;
    let mut sv = StateVector::product(&sites)?;
    for op in ops {
        match op {
            Op::One(s, g) => sv.apply_1q(*s, g)?,
            Op::Two(a, b, g) => {
                sv.apply_2q(*a, *b, g)?;
                after_two(&mut sv, *a, *b)?;
            }
            Op::Map(s, m) => {
                sv.apply_nonunitary_1q(*s, m)?;
            }
        }
    }
    Ok(sv)
}

/// Left ends of the RXX(i, i+2) pairs: odd i from 3 to n−4.
pub fn xx_pairs(n: usize) -> Vec<usize> {
    if n < 7 {
        return Vec::new();
    }
    (3..=n - 4).step_by(2).collect()
}

/// The closed-form two-point correlators (cos²φ, cos⁴φ) are only established for n ≥ 11.
pub fn xx_rotated_validated(n: usize) -> bool {
    n >= 11
}

pub fn build_cluster(n: usize) -> Result<StateVector> {
    ResourceSpec::new(ResourceKind::Cluster, n).build()
}

pub fn build_deformed(n: usize, theta: f64) -> Result<StateVector> {
    ResourceSpec::new(ResourceKind::Deformed(theta), n).build()
}

pub fn build_xx_rotated(n: usize, phi: f64, compile: CompileMode) -> Result<StateVector> {
    ResourceSpec::new(ResourceKind::XxRotated(phi), n).with_compile(compile).build()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GadgetMode {
    /// Retry until every ancilla reads +1.
    Postselect,
    /// Fix the sign of −1 branches with Z corrections, leaving X byproducts.
    Corrected,
}

#[derive(Clone, Debug)]
pub struct GadgetOutcome {
    /// System state over the n chain sites (ancillas measured and removed).
    pub state: StateVector,
    /// Ancilla Z outcomes for bulk sites 2..n−1 of the accepted attempt.
    pub ancilla_outcomes: Vec<i8>,
    pub attempts: u64,
    /// X byproduct left on the system: `state ∝ x_byproduct · |Ψ(θ)⟩`.
    pub x_byproduct: PauliString,
    /// Born probability of the realised ancilla record.
    pub branch_probability: f64,
}

/// Prepares |Ψ(θ)⟩ with one ancilla per bulk site: CX(ancilla → site),
/// RY(−θ) on the ancilla, Z measurement. Outcome +1 applies M(θ); −1 applies
/// X·M(−θ).
pub fn build_deformed_gadget<R: Rng + ?Sized>(
    n: usize,
    theta: f64,
    mode: GadgetMode,
    retry_cap: u64,
    rng: &mut R,
) -> Result<GadgetOutcome> {
    ResourceSpec::new(ResourceKind::DeformedGadget(theta), n).validate()?;
    let total = 2 * n - 2;
    if total > crate::sv::MAX_QUBITS {
        return Err(Error::QubitCount(total));
    }
    let anc = |i: usize| n + i - 1;
    for attempt in 1..=retry_cap.max(1) {
        let mut sv = StateVector::new(total, &vec![SiteInit::Plus; total])?;
        for i in 1..n {
            sv.apply_2q(i, i + 1, &Gate2::cz())?;
        }
        let mut outcomes = Vec::with_capacity(n - 2);
        let mut prob = 1.0;
        let mut rejected = false;
        let mut xmask = vec![false; n];
        for i in 2..n {
            sv.apply_2q(anc(i), i, &Gate2::cx())?;
            sv.apply_1q(anc(i), &Gate1::ry(-theta))?;
            let (o, p) = sv.project_measure(anc(i), &MeasBasis::z(), rng)?;
            outcomes.push(o);
            prob *= p;
            if o < 0 {
                match mode {
                    GadgetMode::Postselect => {
                        rejected = true;
                        break;
                    }
                    GadgetMode::Corrected => {
                        // Z_i|C⟩ = R_i|C⟩ with R_i an X string to the right
                        // (ending in Z_n when the stabilizer chain stops at
                        // K_{n−1}); apply the Z part, record the X part.
                        sv.apply_1q(i, &Gate1::z())?;
                        xmask[i - 1] ^= true;
                        let mut k = i + 1;
                        while k <= n {
                            xmask[k - 1] ^= true;
                            k += 2;
                        }
                        if (n - i).is_multiple_of(2) {
                            sv.apply_1q(n, &Gate1::z())?;
                        }
                    }
                }
            }
        }
        if rejected {
            continue;
        }
        // drop the ancillas, highest index first
        let mut sys = sv;
        for (k, i) in (2..n).enumerate().rev() {
            let v = if outcomes[k] > 0 { MeasBasis::z().plus } else { MeasBasis::z().minus };
            sys = sys.contract_site(anc(i), &v)?.0;
        }
        let letters = xmask.iter().map(|&b| if b { Pauli::X } else { Pauli::I }).collect();
        return Ok(GadgetOutcome {
            state: sys,
            ancilla_outcomes: outcomes,
            attempts: attempt,
            x_byproduct: PauliString::new(letters, 1),
            branch_probability: prob,
        });
    }
    Err(Error::RetryCap(retry_cap))
}

/// ⟨ψ|H(α)|ψ⟩ for H(α) = −cos α Σ K_i − sin α Σ_{i=2}^{n−1} X_i.
pub fn hamiltonian_energy(state: &StateVector, alpha: f64) -> Result<f64> {
    let n = state.n_qubits();
    let mut e = 0.0;
    for i in 1..=n {
        e -= alpha.cos() * state.expect_pauli(&stabilizer_k(i, n)?)?;
    }
    for i in 2..n {
        e -= alpha.sin() * state.expect_pauli(&PauliString::from_sites(n, &[(i, Pauli::X)])?)?;
    }
    Ok(e)
}

pub fn hamiltonian_matrix(alpha: f64, n: usize) -> Result<DMatrix<f64>> {
    if !(2..=12).contains(&n) {
        return Err(Error::QubitCount(n));
    }
    let dim = 1usize << n;
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    let mut terms: Vec<(f64, PauliString)> = Vec::new();
    for i in 1..=n {
        terms.push((-alpha.cos(), stabilizer_k(i, n)?));
    }
    for i in 2..n {
        terms.push((-alpha.sin(), PauliString::from_sites(n, &[(i, Pauli::X)])?));
    }
    for (w, p) in &terms {
        let (xm, zm, _) = p.masks();
        for j in 0..dim {
            let s = if (j & zm).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            h[(j ^ xm, j)] += w * s;
        }
    }
    Ok(h)
}

#[derive(Clone, Debug)]
pub struct GroundState {
    pub energy: f64,
    pub state: StateVector,
    /// Dimension of the lowest eigenspace (gap < 1e−10).
    pub degeneracy: usize,
}

/// Dense diagonalisation of H(α), n ≤ 12.
pub fn exact_ground_state(alpha: f64, n: usize) -> Result<GroundState> {
    let h = hamiltonian_matrix(alpha, n)?;
    let eig = h.symmetric_eigen();
    let (k, &e0) = eig.eigenvalues.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).expect("non-empty spectrum");
    let degeneracy = eig.eigenvalues.iter().filter(|&&e| e - e0 < 1e-10).count();
    let amps = eig.eigenvectors.column(k).iter().map(|&v| c(v)).collect();
    Ok(GroundState { energy: e0, state: StateVector::from_amplitudes(amps)?, degeneracy })
}

/// First-order state (1 + (α/4) Σ_{i=2}^{n−1} X_i)|C_n⟩, normalised.
pub fn perturbative_gs(alpha: f64, n: usize) -> Result<StateVector> {
    let cl = build_cluster(n)?;
    let mut acc: Vec<C64> = cl.amplitudes().to_vec();
    for i in 2..n {
        let mut t = cl.clone();
        t.apply_1q(i, &Gate1::x())?;
        for (a, b) in acc.iter_mut().zip(t.amplitudes()) {
            *a += b * (alpha / 4.0);
        }
    }
    let mut sv = StateVector::from_amplitudes(acc)?;
    sv.renormalize();
    Ok(sv)
}
