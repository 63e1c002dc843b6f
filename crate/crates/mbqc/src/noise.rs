//! Two-qubit depolarizing noise by trajectory unraveling, plus a small dense
//! density-matrix evolution used to check the unraveling.

use nalgebra::DMatrix;
use rand::Rng;

use crate::engine::{self, MeasurementPattern, ReadoutAxis, ShotRecord, Tomography};
use crate::pauli::{Pauli, PauliString};
use crate::rng;
use crate::states::{run_ops, Op, ResourceKind, ResourceSpec};
use crate::sv::{c, mat, Gate1, Mat2, SiteInit, StateVector, C64};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSpec {
    pub p: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(p: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("noise p={p} outside [0, 1]")));
        }
        Ok(NoiseSpec { p, seed })
    }
}

const PAULIS: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

/// With probability p applies one of the 15 non-identity two-qubit Paulis,
/// uniformly. Returns the applied pair, if any.
pub fn depolarize_2q<R: Rng + ?Sized>(
    state: &mut StateVector,
    a: usize,
    b: usize,
    p: f64,
    rng: &mut R,
) -> Result<Option<(Pauli, Pauli)>> {
    if a == b {
        return Err(Error::SiteCollision(a));
    }
    if p <= 0.0 || rng.random::<f64>() >= p {
        return Ok(None);
    }
    let k = rng.random_range(1..16usize);
    let (pa, pb) = (PAULIS[k % 4], PAULIS[k / 4]);
    for (s, q) in [(a, pa), (b, pb)] {
        if q != Pauli::I {
            let g = match q {
                Pauli::X => Gate1::x(),
                Pauli::Y => Gate1::y(),
                _ => Gate1::z(),
            };
            state.apply_1q(s, &g)?;
        }
    }
    Ok(Some((pa, pb)))
}

/// One noisy preparation of `spec` with site 1 in `input`.
pub fn noisy_build<R: Rng + ?Sized>(spec: &ResourceSpec, input: [C64; 2], p: f64, rng: &mut R) -> Result<StateVector> {
    if matches!(spec.kind, ResourceKind::ExactGs(_) | ResourceKind::PerturbativeGs(_)) {
        return Err(Error::InvalidParameter("ground-state oracles have no gate decomposition".into()));
    }
    let ops = spec.ops()?;
    run_ops(spec.n, input, &ops, |sv, a, b| depolarize_2q(sv, a, b, p, rng).map(|_| ()))
}

/// Noisy records: X batch then Y batch, one fresh trajectory per shot.
/// At p = 0 this is exactly `engine::run_pattern` (same seed, same records).
pub fn noisy_run(
    spec: &ResourceSpec,
    pattern: &MeasurementPattern,
    noise: &NoiseSpec,
    shots: usize,
) -> Result<Vec<ShotRecord>> {
    if noise.p == 0.0 {
        return engine::run_pattern(&spec.build()?, pattern, shots, noise.seed);
    }
    let plus = SiteInit::Plus.amplitudes();
    let mut out = Vec::with_capacity(2 * shots);
    for (ai, axis) in [ReadoutAxis::X, ReadoutAxis::Y].into_iter().enumerate() {
        for k in 0..shots {
            let mut r = rng::stream(noise.seed, ((ai as u64) << 40) + k as u64);
            let sv = noisy_build(spec, plus, noise.p, &mut r)?;
            out.push(engine::sample_sequential(&sv, pattern, axis, &mut r)?);
        }
    }
    Ok(out)
}

/// Streaming noisy tomography (parallel over shot blocks).
pub fn noisy_tomography(
    spec: &ResourceSpec,
    pattern: &MeasurementPattern,
    noise: &NoiseSpec,
    shots: usize,
) -> Result<Tomography> {
    if noise.p == 0.0 {
        let table = engine::BranchTable::new(&spec.build()?, pattern)?;
        return engine::sample_tomography(&table, shots, noise.seed);
    }
    let ops = spec.ops()?;
    let plus = SiteInit::Plus.amplitudes();
    engine::sequential_tomography(pattern, shots, noise.seed, |r| {
        run_ops(spec.n, plus, &ops, |sv, a, b| depolarize_2q(sv, a, b, noise.p, r).map(|_| ()))
    })
}

/// Dense ρ over n ≤ 6 qubits, evolved through the same gate list with the
/// exact depolarizing channel after every two-qubit gate.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    n: usize,
    rho: DMatrix<C64>,
}

fn bit(i: usize, s: usize) -> usize {
    (i >> (s - 1)) & 1
}

fn embed1(n: usize, s: usize, m: &Mat2) -> DMatrix<C64> {
    let d = 1 << n;
    let mask = 1usize << (s - 1);
    DMatrix::from_fn(d, d, |i, j| if i & !mask == j & !mask { m[bit(i, s)][bit(j, s)] } else { c(0.0) })
}

fn embed2(n: usize, a: usize, b: usize, m: &[[C64; 4]; 4]) -> DMatrix<C64> {
    let d = 1 << n;
    let mask = (1usize << (a - 1)) | (1usize << (b - 1));
    DMatrix::from_fn(d, d, |i, j| {
        if i & !mask == j & !mask {
            m[bit(i, a) + 2 * bit(i, b)][bit(j, a) + 2 * bit(j, b)]
        } else {
            c(0.0)
        }
    })
}

impl DensityMatrix {
    pub fn pure(amps: &[C64]) -> Result<Self> {
        let d = amps.len();
        if !d.is_power_of_two() || !(2..=64).contains(&d) {
            return Err(Error::QubitCount(d.trailing_zeros() as usize));
        }
        let v = nalgebra::DVector::from_column_slice(amps);
        Ok(DensityMatrix { n: d.trailing_zeros() as usize, rho: &v * v.adjoint() })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    fn conj(&mut self, u: &DMatrix<C64>) {
        self.rho = u * &self.rho * u.adjoint();
    }

    pub fn depolarize(&mut self, a: usize, b: usize, p: f64) {
        let mut acc = &self.rho * c(1.0 - p);
        for k in 1..16 {
            let u = embed1(self.n, a, &mat::pauli(PAULIS[k % 4])) * embed1(self.n, b, &mat::pauli(PAULIS[k / 4]));
            acc += &u * &self.rho * u.adjoint() * c(p / 15.0);
        }
        self.rho = acc;
    }

    pub fn run(&mut self, ops: &[Op], p: f64) -> Result<()> {
        for op in ops {
            match op {
                Op::One(s, g) => self.conj(&embed1(self.n, *s, &g.m)),
                Op::Two(a, b, g) => {
                    self.conj(&embed2(self.n, *a, *b, &g.m));
                    self.depolarize(*a, *b, p);
                }
                Op::Map(..) => {
                    return Err(Error::InvalidParameter("density-matrix oracle supports unitary circuits only".into()))
                }
            }
        }
        Ok(())
    }

    pub fn trace(&self) -> f64 {
        self.rho.trace().re
    }

    pub fn expect_pauli(&self, op: &PauliString) -> Result<f64> {
        if op.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: op.len() });
        }
        let mut m = DMatrix::<C64>::identity(1 << self.n, 1 << self.n) * c(f64::from(op.sign()));
        for s in 1..=self.n {
            let p = op.get(s);
            if p != Pauli::I {
                m = embed1(self.n, s, &mat::pauli(p)) * m;
            }
        }
        Ok((m * &self.rho).trace().re)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sv::Gate2;

    #[test]
    fn zero_noise_is_identity() {
        let mut sv = StateVector::new(2, &[SiteInit::Zero, SiteInit::Zero]).unwrap();
        let before = sv.clone();
        let mut r = rng::stream(1, 0);
        for _ in 0..100 {
            assert!(depolarize_2q(&mut sv, 1, 2, 0.0, &mut r).unwrap().is_none());
        }
        assert_eq!(sv.amplitudes(), before.amplitudes());
    }

    #[test]
    fn full_depolarizing_never_identity() {
        let mut r = rng::stream(2, 0);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..2000 {
            let mut sv = StateVector::new(2, &[SiteInit::Zero, SiteInit::Zero]).unwrap();
            let k = depolarize_2q(&mut sv, 1, 2, 1.0, &mut r).unwrap().unwrap();
            assert_ne!(k, (Pauli::I, Pauli::I));
            seen.insert(format!("{k:?}"));
        }
        assert_eq!(seen.len(), 15);
    }

    #[test]
    fn density_matrix_channel_trace() {
        let mut dm =
            DensityMatrix::pure(StateVector::new(2, &[SiteInit::Plus, SiteInit::Zero]).unwrap().amplitudes()).unwrap();
        dm.run(&[Op::Two(1, 2, Gate2::cx())], 0.3).unwrap();
        assert!((dm.trace() - 1.0).abs() < 1e-12);
        let zz: PauliString = "+ZZ".parse().unwrap();
        // Bell state ZZ = 1; 8 of the 15 Paulis anticommute with ZZ
        assert!((dm.expect_pauli(&zz).unwrap() - (1.0 - 16.0 * 0.3 / 15.0)).abs() < 1e-12);
    }
}
