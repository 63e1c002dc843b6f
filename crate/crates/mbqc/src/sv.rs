//! Dense statevector over chain sites.
//!
//! Site `i` (1-based) is bit `i - 1` of a basis index, so site 1 is the least
//! significant bit. Every other module inherits this.

use num_complex::Complex64;
use rand::Rng;

use crate::pauli::{Pauli, PauliString};
use crate::{Error, Result};

pub type C64 = Complex64;
pub type Mat2 = [[C64; 2]; 2];
/// Two-qubit matrix in the basis index `a + 2b` for a gate applied to `(a, b)`.
pub type Mat4 = [[C64; 4]; 4];

pub const MAX_QUBITS: usize = 24;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub mod mat {
    use super::*;

    pub fn identity() -> Mat2 {
        [[ONE, ZERO], [ZERO, ONE]]
    }
    pub fn x() -> Mat2 {
        [[ZERO, ONE], [ONE, ZERO]]
    }
    pub fn y() -> Mat2 {
        [[ZERO, -I], [I, ZERO]]
    }
    pub fn z() -> Mat2 {
        [[ONE, ZERO], [ZERO, -ONE]]
    }
    pub fn h() -> Mat2 {
        let s = c(std::f64::consts::FRAC_1_SQRT_2);
        [[s, s], [s, -s]]
    }
    pub fn pauli(p: Pauli) -> Mat2 {
        match p {
            Pauli::I => identity(),
            Pauli::X => x(),
            Pauli::Y => y(),
            Pauli::Z => z(),
        }
    }

    /// exp(-i t P / 2) for a single-qubit Pauli P.
    pub fn rot(p: Pauli, t: f64) -> Mat2 {
        let (s, co) = (t / 2.0).sin_cos();
        let m = pauli(p);
        let mut out = [[ZERO; 2]; 2];
        for r in 0..2 {
            for k in 0..2 {
                let id = if r == k { c(co) } else { ZERO };
                out[r][k] = id - I * s * m[r][k];
            }
        }
        out
    }

    pub fn mul(a: &Mat2, b: &Mat2) -> Mat2 {
        let mut out = [[ZERO; 2]; 2];
        for r in 0..2 {
            for k in 0..2 {
                out[r][k] = a[r][0] * b[0][k] + a[r][1] * b[1][k];
            }
        }
        out
    }

    pub fn dagger(a: &Mat2) -> Mat2 {
        [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
    }

    pub fn scale(a: &Mat2, s: C64) -> Mat2 {
        [[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]]
    }

    pub fn add(a: &Mat2, b: &Mat2) -> Mat2 {
        [[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]]
    }

    pub fn trace(a: &Mat2) -> C64 {
        a[0][0] + a[1][1]
    }

    /// Kronecker product with `a` acting on the low bit, `b` on the high bit.
    pub fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
        let mut out = [[ZERO; 4]; 4];
        for r in 0..4 {
            for k in 0..4 {
                out[r][k] = a[r & 1][k & 1] * b[r >> 1][k >> 1];
            }
        }
        out
    }

    pub fn is_unitary2(m: &Mat2, tol: f64) -> bool {
        let p = mul(&dagger(m), m);
        (0..2).all(|r| (0..2).all(|k| (p[r][k] - if r == k { ONE } else { ZERO }).norm() <= tol))
    }

    pub fn is_unitary4(m: &Mat4, tol: f64) -> bool {
        for r in 0..4 {
            for k in 0..4 {
                let mut acc = ZERO;
                for j in 0..4 {
                    acc += m[j][r].conj() * m[j][k];
                }
                let target = if r == k { ONE } else { ZERO };
                if (acc - target).norm() > tol {
                    return false;
                }
            }
        }
        true
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Label1 {
    H,
    X,
    Y,
    Z,
    Rx(f64),
    Ry(f64),
    Rz(f64),
    Custom(String),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Label2 {
    Cz,
    Cx,
    Swap,
    Rxx(f64),
    Custom(String),
}

#[derive(Clone, Debug)]
pub struct Gate1 {
    pub label: Label1,
    pub m: Mat2,
}

impl Gate1 {
    /// Checked construction; rejects non-unitary matrices.
    pub fn new(label: Label1, m: Mat2) -> Result<Self> {
        if !mat::is_unitary2(&m, 1e-12) {
            return Err(Error::NotUnitary(format!("{label:?}")));
        }
        Ok(Gate1 { label, m })
    }
    pub fn h() -> Self {
        Gate1 { label: Label1::H, m: mat::h() }
    }
    pub fn x() -> Self {
        Gate1 { label: Label1::X, m: mat::x() }
    }
    pub fn y() -> Self {
        Gate1 { label: Label1::Y, m: mat::y() }
    }
    pub fn z() -> Self {
        Gate1 { label: Label1::Z, m: mat::z() }
    }
    pub fn rx(t: f64) -> Self {
        Gate1 { label: Label1::Rx(t), m: mat::rot(Pauli::X, t) }
    }
    pub fn ry(t: f64) -> Self {
        Gate1 { label: Label1::Ry(t), m: mat::rot(Pauli::Y, t) }
    }
    pub fn rz(t: f64) -> Self {
        Gate1 { label: Label1::Rz(t), m: mat::rot(Pauli::Z, t) }
    }
}

#[derive(Clone, Debug)]
pub struct Gate2 {
    pub label: Label2,
    pub m: Mat4,
}

impl Gate2 {
    pub fn new(label: Label2, m: Mat4) -> Result<Self> {
        if !mat::is_unitary4(&m, 1e-12) {
            return Err(Error::NotUnitary(format!("{label:?}")));
        }
        Ok(Gate2 { label, m })
    }
    pub fn cz() -> Self {
        let mut m = [[ZERO; 4]; 4];
        m[0][0] = ONE;
        m[1][1] = ONE;
        m[2][2] = ONE;
        m[3][3] = -ONE;
        Gate2 { label: Label2::Cz, m }
    }
    /// Control on the first site, target on the second.
    pub fn cx() -> Self {
        let mut m = [[ZERO; 4]; 4];
        m[0][0] = ONE;
        m[3][1] = ONE;
        m[2][2] = ONE;
        m[1][3] = ONE;
        Gate2 { label: Label2::Cx, m }
    }
    pub fn swap() -> Self {
        let mut m = [[ZERO; 4]; 4];
        m[0][0] = ONE;
        m[2][1] = ONE;
        m[1][2] = ONE;
        m[3][3] = ONE;
        Gate2 { label: Label2::Swap, m }
    }
    /// exp(-i t X⊗X / 2)
    pub fn rxx(t: f64) -> Self {
        let (s, co) = (t / 2.0).sin_cos();
        let xx = mat::kron(&mat::x(), &mat::x());
        let mut m = [[ZERO; 4]; 4];
        for r in 0..4 {
            for k in 0..4 {
                let id = if r == k { c(co) } else { ZERO };
                m[r][k] = id - I * s * xx[r][k];
            }
        }
        Gate2 { label: Label2::Rxx(t), m }
    }
    pub fn pauli_pair(a: Pauli, b: Pauli) -> Self {
        Gate2 { label: Label2::Custom(format!("{a:?}{b:?}")), m: mat::kron(&mat::pauli(a), &mat::pauli(b)) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SiteInit {
    Zero,
    Plus,
}

impl SiteInit {
    pub fn amplitudes(self) -> [C64; 2] {
        match self {
            SiteInit::Zero => [ONE, ZERO],
            SiteInit::Plus => [c(std::f64::consts::FRAC_1_SQRT_2); 2],
        }
    }
}

/// Orthonormal measurement basis; `plus` carries outcome +1.
#[derive(Clone, Copy, Debug)]
pub struct MeasBasis {
    pub plus: [C64; 2],
    pub minus: [C64; 2],
}

impl MeasBasis {
    pub fn z() -> Self {
        MeasBasis { plus: [ONE, ZERO], minus: [ZERO, ONE] }
    }
    pub fn x() -> Self {
        let s = c(std::f64::consts::FRAC_1_SQRT_2);
        MeasBasis { plus: [s, s], minus: [s, -s] }
    }
    pub fn y() -> Self {
        let s = c(std::f64::consts::FRAC_1_SQRT_2);
        MeasBasis { plus: [s, s * I], minus: [s, -s * I] }
    }

    /// Eigenbasis of a 2x2 Hermitian matrix, returned with its eigenvalues
    /// `(λ_plus, λ_minus)`, `λ_plus ≥ λ_minus`. When the two eigenvalues
    /// coincide the basis falls back to {|0⟩, |1⟩}.
    pub fn from_hermitian(h: &Mat2) -> Result<(Self, f64, f64)> {
        if (h[0][1] - h[1][0].conj()).norm() > 1e-12 || h[0][0].im.abs() > 1e-12 || h[1][1].im.abs() > 1e-12 {
            return Err(Error::NotHermitian);
        }
        let a0 = 0.5 * (h[0][0].re + h[1][1].re);
        let rz = 0.5 * (h[0][0].re - h[1][1].re);
        let rx = h[0][1].re;
        let ry = -h[0][1].im;
        let r = (rx * rx + ry * ry + rz * rz).sqrt();
        if r < 1e-15 {
            return Ok((MeasBasis::z(), a0, a0));
        }
        let theta = (rz / r).clamp(-1.0, 1.0).acos();
        let phi = ry.atan2(rx);
        let (sh, ch) = (theta / 2.0).sin_cos();
        let e = C64::from_polar(1.0, phi);
        let plus = [c(ch), e * sh];
        let minus = [-e.conj() * sh, c(ch)];
        Ok((MeasBasis { plus, minus }, a0 + r, a0 - r))
    }

    pub fn vector(&self, outcome_plus: bool) -> [C64; 2] {
        if outcome_plus {
            self.plus
        } else {
            self.minus
        }
    }
}

#[derive(Clone, Debug)]
pub struct StateVector {
    n: usize,
    amps: Vec<C64>,
    norm_sq: f64,
}

impl StateVector {
    pub fn new(n: usize, sites: &[SiteInit]) -> Result<Self> {
        if sites.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: sites.len() });
        }
        let per: Vec<[C64; 2]> = sites.iter().map(|s| s.amplitudes()).collect();
        Self::product(&per)
    }

    /// Product state from per-site amplitude pairs (site 1 first).
    pub fn product(sites: &[[C64; 2]]) -> Result<Self> {
        let n = sites.len();
        check_qubits(n)?;
        let mut amps = vec![ONE];
        for (k, s) in sites.iter().enumerate() {
            let norm = (s[0].norm_sqr() + s[1].norm_sqr()).sqrt();
            if norm < 1e-15 {
                return Err(Error::ZeroNorm);
            }
            let mut next = vec![ZERO; amps.len() * 2];
            let half = 1usize << k;
            for (j, a) in amps.iter().enumerate() {
                next[j] = *a * s[0] / norm;
                next[j + half] = *a * s[1] / norm;
            }
            amps = next;
        }
        Ok(StateVector { n, amps, norm_sq: 1.0 })
    }

    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let len = amps.len();
        if !len.is_power_of_two() {
            return Err(Error::LengthMismatch { expected: len.next_power_of_two(), got: len });
        }
        let n = len.trailing_zeros() as usize;
        check_qubits(n)?;
        let norm_sq = amps.iter().map(|a| a.norm_sqr()).sum();
        Ok(StateVector { n, amps, norm_sq })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }
    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }
    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }
    pub fn computed_norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn renormalize(&mut self) {
        let nrm = self.computed_norm_sq();
        let s = 1.0 / nrm.sqrt();
        self.amps.iter_mut().for_each(|a| *a *= s);
        self.norm_sq = 1.0;
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site == 0 || site > self.n {
            return Err(Error::SiteOutOfRange { site, n: self.n });
        }
        Ok(())
    }

    /// Raw 2x2 action on one site, no unitarity check, norm bookkeeping left
    /// to the caller.
    fn act1(&mut self, site: usize, m: &Mat2) {
        let stride = 1usize << (site - 1);
        let len = self.amps.len();
        let mut base = 0;
        while base < len {
            for j in base..base + stride {
                let a0 = self.amps[j];
                let a1 = self.amps[j + stride];
                self.amps[j] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[j + stride] = m[1][0] * a0 + m[1][1] * a1;
            }
            base += 2 * stride;
        }
    }

    pub fn apply_1q(&mut self, site: usize, gate: &Gate1) -> Result<()> {
        self.check_site(site)?;
        self.act1(site, &gate.m);
        Ok(())
    }

    pub fn apply_2q(&mut self, a: usize, b: usize, gate: &Gate2) -> Result<()> {
        self.check_site(a)?;
        self.check_site(b)?;
        if a == b {
            return Err(Error::SiteCollision(a));
        }
        let ma = 1usize << (a - 1);
        let mb = 1usize << (b - 1);
        let m = &gate.m;
        for j in 0..self.amps.len() {
            if j & ma != 0 || j & mb != 0 {
                continue;
            }
            let idx = [j, j | ma, j | mb, j | ma | mb];
            let v = [self.amps[idx[0]], self.amps[idx[1]], self.amps[idx[2]], self.amps[idx[3]]];
            for r in 0..4 {
                self.amps[idx[r]] = m[r][0] * v[0] + m[r][1] * v[1] + m[r][2] * v[2] + m[r][3] * v[3];
            }
        }
        Ok(())
    }

    /// Applies an arbitrary 2x2 map and returns new_norm / old_norm.
    pub fn apply_nonunitary_1q(&mut self, site: usize, m: &Mat2) -> Result<f64> {
        self.check_site(site)?;
        let old = self.norm_sq;
        self.act1(site, m);
        self.norm_sq = self.computed_norm_sq();
        Ok((self.norm_sq / old).sqrt())
    }

    /// Applies a Pauli string as an operator (sign included).
    pub fn apply_pauli(&mut self, op: &PauliString) -> Result<()> {
        if op.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: op.len() });
        }
        for (k, p) in op.letters().iter().enumerate() {
            if *p != Pauli::I {
                self.act1(k + 1, &mat::pauli(*p));
            }
        }
        if op.sign() < 0 {
            self.amps.iter_mut().for_each(|a| *a = -*a);
        }
        Ok(())
    }

    pub fn expect_pauli(&self, op: &PauliString) -> Result<f64> {
        if op.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: op.len() });
        }
        let (xm, zm, ny) = op.masks();
        // P|j⟩ = i^ny (-1)^{|j ∧ zm|} |j ⊕ xm⟩, with Y = iXZ folded into zm.
        let mut acc = ZERO;
        for (j, a) in self.amps.iter().enumerate() {
            let sign = if (j & zm).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            acc += self.amps[j ^ xm].conj() * *a * sign;
        }
        let phase = match ny % 4 {
            0 => ONE,
            1 => I,
            2 => -ONE,
            _ => -I,
        };
        let v = acc * phase * f64::from(op.sign());
        Ok(v.re / self.computed_norm_sq())
    }

    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.n != other.n {
            return Err(Error::LengthMismatch { expected: self.n, got: other.n });
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// |⟨a|b⟩|² / (⟨a|a⟩⟨b|b⟩), insensitive to global phase.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        let ov = self.inner(other)?;
        Ok(ov.norm_sqr() / (self.computed_norm_sq() * other.computed_norm_sq()))
    }

    /// Probability (relative to the current norm) of projecting `site` onto `v`.
    pub fn branch_probability(&self, site: usize, v: &[C64; 2]) -> Result<f64> {
        self.check_site(site)?;
        let stride = 1usize << (site - 1);
        let mut p = 0.0;
        for j in 0..self.amps.len() {
            if j & stride == 0 {
                let amp = v[0].conj() * self.amps[j] + v[1].conj() * self.amps[j | stride];
                p += amp.norm_sqr();
            }
        }
        Ok(p / self.computed_norm_sq())
    }

    /// Projects `site` onto `v` in place and renormalises; returns the branch
    /// probability. Zero-probability branches are an error.
    pub fn project_onto(&mut self, site: usize, v: &[C64; 2]) -> Result<f64> {
        let p = self.branch_probability(site, v)?;
        if p < 1e-15 {
            return Err(Error::ZeroBranch(p));
        }
        let stride = 1usize << (site - 1);
        for j in 0..self.amps.len() {
            if j & stride == 0 {
                let amp = v[0].conj() * self.amps[j] + v[1].conj() * self.amps[j | stride];
                self.amps[j] = v[0] * amp;
                self.amps[j | stride] = v[1] * amp;
            }
        }
        self.renormalize();
        Ok(p)
    }

    /// Born-rule measurement of `site` in `basis`. Returns (±1, probability of
    /// the realised outcome); the state is collapsed and renormalised.
    pub fn project_measure<R: Rng + ?Sized>(
        &mut self,
        site: usize,
        basis: &MeasBasis,
        rng: &mut R,
    ) -> Result<(i8, f64)> {
        let p_plus = self.branch_probability(site, &basis.plus)?;
        let plus = rng.random::<f64>() < p_plus;
        let p = self.project_onto(site, &basis.vector(plus))?;
        Ok((if plus { 1 } else { -1 }, p))
    }

    /// Contracts `site` with ⟨v| and removes it, returning the unnormalised
    /// remainder over the other sites (order preserved) and its squared norm
    /// relative to this state's norm.
    pub fn contract_site(&self, site: usize, v: &[C64; 2]) -> Result<(StateVector, f64)> {
        self.check_site(site)?;
        if self.n == 1 {
            return Err(Error::QubitCount(0));
        }
        let low = (1usize << (site - 1)) - 1;
        let stride = 1usize << (site - 1);
        let half = self.amps.len() / 2;
        let (v0, v1) = (v[0].conj(), v[1].conj());
        let mut out = Vec::with_capacity(half);
        for k in 0..half {
            let j = ((k & !low) << 1) | (k & low);
            out.push(v0 * self.amps[j] + v1 * self.amps[j | stride]);
        }
        let nrm: f64 = out.iter().map(|a| a.norm_sqr()).sum();
        let p = nrm / self.computed_norm_sq();
        Ok((StateVector { n: self.n - 1, amps: out, norm_sq: nrm }, p))
    }
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::QubitCount(n));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn product_states() {
        let s = StateVector::new(1, &[SiteInit::Plus]).unwrap();
        assert!(s.amplitudes().iter().all(|a| close(a.re, FRAC_1_SQRT_2, 1e-15)));
        let s = StateVector::new(2, &[SiteInit::Zero, SiteInit::Zero]).unwrap();
        assert_eq!(s.amplitudes()[0], ONE);
        assert!(s.amplitudes()[1..].iter().all(|a| *a == ZERO));
        let s = StateVector::new(3, &[SiteInit::Plus; 3]).unwrap();
        assert!(s.amplitudes().iter().all(|a| close(a.re, 8f64.sqrt().recip(), 1e-15)));
        assert!(StateVector::new(0, &[]).is_err());
        assert!(StateVector::new(25, &[SiteInit::Zero; 25]).is_err());
    }

    #[test]
    fn single_qubit_examples() {
        let mut s = StateVector::new(1, &[SiteInit::Zero]).unwrap();
        s.apply_1q(1, &Gate1::h()).unwrap();
        assert!(close(s.expect_pauli(&"+X".parse().unwrap()).unwrap(), 1.0, 1e-12));

        let mut s = StateVector::new(1, &[SiteInit::Plus]).unwrap();
        s.apply_1q(1, &Gate1::rz(PI)).unwrap();
        assert!(close(s.expect_pauli(&"+X".parse().unwrap()).unwrap(), -1.0, 1e-12));
        assert!(s.apply_1q(2, &Gate1::h()).is_err());
    }

    #[test]
    fn ry_on_plus_gives_minus_sin_under_standard_convention() {
        // 2x2 oracle: RY(t)|+> = (cos(t/2) - sin(t/2), sin(t/2) + cos(t/2))/√2,
        // so <Z> = -sin t. The compiled circuits therefore use RY(-t).
        for &t in &[0.2, 1.0, 2.5] {
            let mut s = StateVector::new(1, &[SiteInit::Plus]).unwrap();
            s.apply_1q(1, &Gate1::ry(t)).unwrap();
            let (h, co) = (t / 2.0).sin_cos();
            let a0 = (co - h) * FRAC_1_SQRT_2;
            let a1 = (h + co) * FRAC_1_SQRT_2;
            let z = s.expect_pauli(&"+Z".parse().unwrap()).unwrap();
            assert!(close(z, a0 * a0 - a1 * a1, 1e-12));
            let mut s = StateVector::new(1, &[SiteInit::Plus]).unwrap();
            s.apply_1q(1, &Gate1::ry(-t)).unwrap();
            assert!(close(s.expect_pauli(&"+Z".parse().unwrap()).unwrap(), t.sin(), 1e-12));
        }
    }

    #[test]
    fn cz_on_plus_plus() {
        let mut s = StateVector::new(2, &[SiteInit::Plus; 2]).unwrap();
        s.apply_2q(1, 2, &Gate2::cz()).unwrap();
        assert!(close(s.expect_pauli(&"+XZ".parse().unwrap()).unwrap(), 1.0, 1e-12));
        assert!(matches!(s.apply_2q(1, 1, &Gate2::cz()), Err(Error::SiteCollision(1))));
    }

    #[test]
    fn rxx_zero_is_identity() {
        let mut s = StateVector::new(3, &[SiteInit::Plus, SiteInit::Zero, SiteInit::Plus]).unwrap();
        s.apply_1q(2, &Gate1::ry(0.4)).unwrap();
        let before = s.clone();
        s.apply_2q(1, 3, &Gate2::rxx(0.0)).unwrap();
        assert!(close(s.fidelity(&before).unwrap(), 1.0, 1e-15));
    }

    #[test]
    fn cx_orientation() {
        let mut s = StateVector::product(&[[ZERO, ONE], [ONE, ZERO]]).unwrap();
        s.apply_2q(1, 2, &Gate2::cx()).unwrap();
        assert!(close(s.amplitudes()[3].re, 1.0, 1e-15));
    }

    #[test]
    fn nonunitary_norm_factor() {
        let mut s = StateVector::new(1, &[SiteInit::Zero]).unwrap();
        assert!(close(s.apply_nonunitary_1q(1, &mat::identity()).unwrap(), 1.0, 1e-15));
        let half = c(FRAC_1_SQRT_2);
        let m = [[half, half], [half, half]];
        let f = s.apply_nonunitary_1q(1, &m).unwrap();
        assert!(close(f, 1.0, 1e-12));
        assert!(close(s.expect_pauli(&"+X".parse().unwrap()).unwrap(), 1.0, 1e-12));
    }

    #[test]
    fn hermitian_eigenbasis() {
        let (b, lp, lm) = MeasBasis::from_hermitian(&mat::x()).unwrap();
        assert!(close(lp, 1.0, 1e-15) && close(lm, -1.0, 1e-15));
        assert!(close(b.plus[0].re, FRAC_1_SQRT_2, 1e-15) && close(b.plus[1].re, FRAC_1_SQRT_2, 1e-15));
        // degenerate: tie goes to |0>
        let (b, _, _) = MeasBasis::from_hermitian(&mat::identity()).unwrap();
        assert_eq!(b.plus, [ONE, ZERO]);
        // -Y: plus eigenvector is |-i>
        let (b, _, _) = MeasBasis::from_hermitian(&mat::scale(&mat::y(), c(-1.0))).unwrap();
        let yb = MeasBasis::y();
        let ov = b.plus[0].conj() * yb.minus[0] + b.plus[1].conj() * yb.minus[1];
        assert!(close(ov.norm(), 1.0, 1e-12));
    }

    #[test]
    fn measurement_examples() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let mut s = StateVector::new(1, &[SiteInit::Plus]).unwrap();
        let (o, p) = s.project_measure(1, &MeasBasis::x(), &mut rng).unwrap();
        assert_eq!(o, 1);
        assert!(close(p, 1.0, 1e-12));
        let s = StateVector::new(1, &[SiteInit::Plus]).unwrap();
        assert!(close(s.branch_probability(1, &MeasBasis::z().plus).unwrap(), 0.5, 1e-12));
        let mut s = StateVector::new(1, &[SiteInit::Zero]).unwrap();
        assert!(matches!(s.project_onto(1, &[ZERO, ONE]), Err(Error::ZeroBranch(_))));
    }

    #[test]
    fn contract_middle_site() {
        // |0>|1>|+> contracted on site 2 with <1| leaves |0>|+>.
        let s = StateVector::product(&[[ONE, ZERO], [ZERO, ONE], SiteInit::Plus.amplitudes()]).unwrap();
        let (r, p) = s.contract_site(2, &[ZERO, ONE]).unwrap();
        assert!(close(p, 1.0, 1e-12));
        let want = StateVector::product(&[[ONE, ZERO], SiteInit::Plus.amplitudes()]).unwrap();
        assert!(close(r.fidelity(&want).unwrap(), 1.0, 1e-12));
    }
}
