//! Single-qubit Pauli transfer matrices, basis order (I, X, Y, Z).

use std::ops::Mul;

use nalgebra::{Complex, Matrix4};

use crate::pauli::Pauli;
use crate::sv::{c, mat, Mat2, C64};
use crate::{Error, Result};

const BASIS: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ptm(pub [[f64; 4]; 4]);

impl Ptm {
    pub fn identity() -> Self {
        let mut r = [[0.0; 4]; 4];
        (0..4).for_each(|k| r[k][k] = 1.0);
        Ptm(r)
    }

    pub fn from_unitary(u: &Mat2) -> Self {
        ptm_of(&[(1.0, *u)])
    }

    /// Dephasing about Z with flip probability p: (1−p)[I] + p[Z].
    pub fn dephasing(p: f64) -> Self {
        let mut r = Self::identity();
        r.0[1][1] = 1.0 - 2.0 * p;
        r.0[2][2] = 1.0 - 2.0 * p;
        r
    }

    /// Dephasing about an arbitrary Pauli axis.
    pub fn dephasing_about(axis: Pauli, p: f64) -> Self {
        let mut r = Self::identity();
        for k in 1..4 {
            if BASIS[k] != axis {
                r.0[k][k] = 1.0 - 2.0 * p;
            }
        }
        r
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.0[a][b]
    }

    pub fn block(&self) -> [[f64; 3]; 3] {
        let mut b = [[0.0; 3]; 3];
        for r in 0..3 {
            for k in 0..3 {
                b[r][k] = self.0[r + 1][k + 1];
            }
        }
        b
    }

    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        (self.0[0][0] - 1.0).abs() <= tol && (1..4).all(|k| self.0[0][k].abs() <= tol)
    }

    /// Image of a Bloch vector under the channel.
    pub fn apply_bloch(&self, v: [f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (r, o) in out.iter_mut().enumerate() {
            *o = self.0[r + 1][0] + (0..3).map(|k| self.0[r + 1][k + 1] * v[k]).sum::<f64>();
        }
        out
    }

    /// Minimum eigenvalue of the (trace-normalised) Choi matrix.
    pub fn choi_min_eigenvalue(&self) -> f64 {
        // J = ½ Σ_ab R[a,b] P_bᵀ ⊗ P_a  (input factor first)
        let mut j = Matrix4::<Complex<f64>>::zeros();
        for a in 0..4 {
            for b in 0..4 {
                let w = self.0[a][b] * 0.25;
                if w == 0.0 {
                    continue;
                }
                let pa = mat::pauli(BASIS[a]);
                let pb = mat::pauli(BASIS[b]);
                for r in 0..4 {
                    for k in 0..4 {
                        // transpose on the input factor
                        let v = pb[k >> 1][r >> 1] * pa[r & 1][k & 1];
                        j[(r, k)] += Complex::new(v.re * w, v.im * w);
                    }
                }
            }
        }
        j.symmetric_eigen().eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn is_cptp(&self, tol: f64) -> bool {
        self.is_trace_preserving(tol) && self.choi_min_eigenvalue() >= -tol
    }

    pub fn max_abs_diff(&self, other: &Ptm) -> f64 {
        let mut m: f64 = 0.0;
        for r in 0..4 {
            for k in 0..4 {
                m = m.max((self.0[r][k] - other.0[r][k]).abs());
            }
        }
        m
    }

    pub fn pow(&self, m: usize) -> Ptm {
        (0..m).fold(Ptm::identity(), |acc, _| *self * acc)
    }
}

impl Mul for Ptm {
    type Output = Ptm;
    /// Matrix product; `a * b` applies `b` first.
    fn mul(self, rhs: Ptm) -> Ptm {
        let mut out = [[0.0; 4]; 4];
        for r in 0..4 {
            for k in 0..4 {
                out[r][k] = (0..4).map(|j| self.0[r][j] * rhs.0[j][k]).sum();
            }
        }
        Ptm(out)
    }
}

fn ptm_of(ops: &[(f64, Mat2)]) -> Ptm {
    let mut r = [[0.0; 4]; 4];
    for b in 0..4 {
        let pb = mat::pauli(BASIS[b]);
        let mut img = [[C64::new(0.0, 0.0); 2]; 2];
        for (w, k) in ops {
            let t = mat::mul(&mat::mul(k, &pb), &mat::dagger(k));
            img = mat::add(&img, &mat::scale(&t, c(*w)));
        }
        for a in 0..4 {
            let pa = mat::pauli(BASIS[a]);
            r[a][b] = 0.5 * mat::trace(&mat::mul(&pa, &img)).re;
        }
    }
    Ptm(r)
}

/// PTM of ρ ↦ Σ_k w_k K_k ρ K_k†. The Kraus set must be complete.
pub fn ptm_from_map(ops: &[(f64, Mat2)]) -> Result<Ptm> {
    let mut comp = [[C64::new(0.0, 0.0); 2]; 2];
    for (w, k) in ops {
        if *w < 0.0 {
            return Err(Error::NotTracePreserving);
        }
        comp = mat::add(&comp, &mat::scale(&mat::mul(&mat::dagger(k), k), c(*w)));
    }
    let id = mat::identity();
    let dev = (0..2).flat_map(|r| (0..2).map(move |k| (r, k))).map(|(r, k)| (comp[r][k] - id[r][k]).norm());
    if dev.fold(0.0, f64::max) > 1e-10 {
        return Err(Error::NotTracePreserving);
    }
    Ok(ptm_of(ops))
}

/// √2 · ‖V − U‖_F over the 3×3 traceless block.
pub fn frobenius_error(v: &Ptm, u: &Ptm) -> f64 {
    let mut s = 0.0;
    for r in 1..4 {
        for k in 1..4 {
            s += (v.0[r][k] - u.0[r][k]).powi(2);
        }
    }
    (2.0 * s).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_channel() {
        let p = ptm_from_map(&[(1.0, mat::identity())]).unwrap();
        assert!(p.max_abs_diff(&Ptm::identity()) < 1e-15);
        assert!(p.is_cptp(1e-10));
    }

    #[test]
    fn rotation_mixture_block() {
        let (s, b) = (0.6, 0.7);
        let p = ptm_from_map(&[((1.0 + s) / 2.0, mat::rot(Pauli::Z, b)), ((1.0 - s) / 2.0, mat::rot(Pauli::Z, -b))])
            .unwrap();
        assert!((p.get(1, 1) - b.cos()).abs() < 1e-12);
        assert!((p.get(1, 2) + s * b.sin()).abs() < 1e-12);
        assert!((p.get(2, 1) - s * b.sin()).abs() < 1e-12);
        assert!((p.get(2, 2) - b.cos()).abs() < 1e-12);
    }

    #[test]
    fn dephasing_from_kraus() {
        let e = 0.3;
        let p = ptm_from_map(&[(1.0 - e / 4.0, mat::identity()), (e / 4.0, mat::z())]).unwrap();
        assert!(p.max_abs_diff(&Ptm::dephasing(e / 4.0)) < 1e-15);
        assert!((p.get(1, 1) - (1.0 - e / 2.0)).abs() < 1e-15);
        assert!((frobenius_error(&p, &Ptm::identity()) - e).abs() < 1e-12);
    }

    #[test]
    fn incomplete_kraus_rejected() {
        assert!(matches!(ptm_from_map(&[(0.5, mat::identity())]), Err(Error::NotTracePreserving)));
    }

    #[test]
    fn choi_detects_non_cp() {
        // transpose map: diag(1, 1, -1, 1) is positive but not completely positive
        let mut t = Ptm::identity();
        t.0[2][2] = -1.0;
        assert!(t.choi_min_eigenvalue() < -0.1);
        assert!(Ptm::dephasing(0.5).choi_min_eigenvalue() > -1e-12);
    }
}
