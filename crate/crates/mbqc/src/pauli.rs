//! Real-signed Pauli strings and the chain operators built from them.

use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// Single-letter product `self * other` as (phase exponent of i, letter).
    fn mul(self, other: Pauli) -> (u8, Pauli) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (0, p),
            (a, b) if a == b => (0, I),
            (X, Y) => (1, Z),
            (Y, Z) => (1, X),
            (Z, X) => (1, Y),
            (Y, X) => (3, Z),
            (Z, Y) => (3, X),
            (X, Z) => (3, Y),
            _ => unreachable!(),
        }
    }

    fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    letters: Vec<Pauli>,
    sign: i8,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>, sign: i8) -> Self {
        assert!(sign == 1 || sign == -1, "sign must be ±1");
        PauliString { letters, sign }
    }

    pub fn identity(n: usize) -> Self {
        PauliString { letters: vec![Pauli::I; n], sign: 1 }
    }

    /// Builds a string from (1-based site, letter) pairs.
    pub fn from_sites(n: usize, sites: &[(usize, Pauli)]) -> Result<Self> {
        let mut p = Self::identity(n);
        for &(s, l) in sites {
            if s == 0 || s > n {
                return Err(Error::SiteOutOfRange { site: s, n });
            }
            p.letters[s - 1] = l;
        }
        Ok(p)
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }
    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }
    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }
    pub fn sign(&self) -> i8 {
        self.sign
    }
    pub fn get(&self, site: usize) -> Pauli {
        self.letters[site - 1]
    }
    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|p| **p != Pauli::I).count()
    }

    /// (x mask, z mask, number of Y letters); bit `k` is site `k + 1`.
    pub fn masks(&self) -> (usize, usize, u32) {
        let (mut xm, mut zm, mut ny) = (0usize, 0usize, 0u32);
        for (k, p) in self.letters.iter().enumerate() {
            match p {
                Pauli::X => xm |= 1 << k,
                Pauli::Z => zm |= 1 << k,
                Pauli::Y => {
                    xm |= 1 << k;
                    zm |= 1 << k;
                    ny += 1;
                }
                Pauli::I => {}
            }
        }
        (xm, zm, ny)
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let anti = self
            .letters
            .iter()
            .zip(&other.letters)
            .filter(|(a, b)| **a != Pauli::I && **b != Pauli::I && a != b)
            .count();
        anti % 2 == 0
    }

    /// Operator product `self · other`. A product that picks up a phase of
    /// ±i is rejected: only real-signed strings are representable.
    pub fn mul(&self, other: &PauliString) -> Result<PauliString> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch { expected: self.len(), got: other.len() });
        }
        let mut phase = 0u8;
        let letters = self
            .letters
            .iter()
            .zip(&other.letters)
            .map(|(a, b)| {
                let (ph, l) = a.mul(*b);
                phase += ph;
                l
            })
            .collect();
        let phase = phase % 4;
        if phase % 2 == 1 {
            return Err(Error::ImaginaryPhase);
        }
        let sign = self.sign * other.sign * if phase == 2 { -1 } else { 1 };
        Ok(PauliString { letters, sign })
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", if self.sign > 0 { '+' } else { '-' })?;
        for p in &self.letters {
            write!(f, "{}", p.letter())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (sign, body) = match s.chars().next() {
            Some('+') => (1, &s[1..]),
            Some('-') => (-1, &s[1..]),
            _ => (1, s),
        };
        let letters = body
            .chars()
            .map(|ch| match ch {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::Parse(format!("bad Pauli letter {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PauliString { letters, sign })
    }
}

/// Cluster stabilizer centred at site `i`.
pub fn stabilizer_k(i: usize, n: usize) -> Result<PauliString> {
    if i == 0 || i > n || n < 2 {
        return Err(Error::SiteOutOfRange { site: i, n });
    }
    let mut sites = vec![(i, Pauli::X)];
    if i > 1 {
        sites.push((i - 1, Pauli::Z));
    }
    if i < n {
        sites.push((i + 1, Pauli::Z));
    }
    PauliString::from_sites(n, &sites)
}

/// The two ℤ₂×ℤ₂ generators Z₁X₂I₃…X_{n−1}Z_n and X₁I₂X₃…I_{n−1}X_n.
pub fn symmetry_generators(n: usize) -> Result<(PauliString, PauliString)> {
    if n.is_multiple_of(2) || n < 3 {
        return Err(Error::EvenChain(n));
    }
    let mut a = vec![(1, Pauli::Z), (n, Pauli::Z)];
    a.extend((2..n).step_by(2).map(|s| (s, Pauli::X)));
    let b: Vec<_> = (1..=n).step_by(2).map(|s| (s, Pauli::X)).collect();
    Ok((PauliString::from_sites(n, &a)?, PauliString::from_sites(n, &b)?))
}

/// String order operator anchored at `k`: Z_k followed by X on every other
/// site to the right. If the X run would stop at n−1, the last site carries Z.
pub fn string_order_op(k: usize, n: usize) -> Result<PauliString> {
    if k == 0 || k >= n {
        return Err(Error::SiteOutOfRange { site: k, n });
    }
    let mut sites = vec![(k, Pauli::Z)];
    sites.extend((k + 1..=n).step_by(2).map(|s| (s, Pauli::X)));
    if (n - k).is_multiple_of(2) {
        sites.push((n, Pauli::Z));
    }
    PauliString::from_sites(n, &sites)
}

/// Z_k X_{k+1} I X … X_{k+l−1} Z_{k+l}, for even l.
pub fn two_point_string_op(k: usize, l: usize, n: usize) -> Result<PauliString> {
    if l == 0 || l % 2 == 1 {
        return Err(Error::OddSeparation(l));
    }
    if k == 0 || k + l > n {
        return Err(Error::SiteOutOfRange { site: k + l, n });
    }
    let mut sites = vec![(k, Pauli::Z), (k + l, Pauli::Z)];
    sites.extend((k + 1..k + l).step_by(2).map(|s| (s, Pauli::X)));
    PauliString::from_sites(n, &sites)
}

/// S_j = Z_j X_{j+1} I X_{j+3} … X_{n−1} Z_n: the string that carries a
/// rotation at site j to the output site.
pub fn tail_string(j: usize, n: usize) -> Result<PauliString> {
    if j == 0 || j >= n || (n - j) % 2 == 1 {
        return Err(Error::SiteOutOfRange { site: j, n });
    }
    two_point_string_op(j, n - j, n)
}
