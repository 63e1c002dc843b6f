//! Closed-form logical channel of a symmetry-breaking measurement and the
//! exact string-operator evolution used for packing comparisons.

use std::f64::consts::PI;

use crate::pauli::{tail_string, Pauli, PauliString};
use crate::ptm::Ptm;
use crate::states::{CompileMode, ResourceKind, ResourceSpec};
use crate::sv::{mat, StateVector};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Axis {
    X,
    #[default]
    Z,
}

impl Axis {
    fn pauli(self) -> Pauli {
        match self {
            Axis::X => Pauli::X,
            Axis::Z => Pauli::Z,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelParams {
    pub sigma: f64,
    pub beta: f64,
    pub axis: Axis,
}

impl ChannelParams {
    pub fn new(sigma: f64, beta: f64) -> Result<Self> {
        if sigma.abs() > 1.0 + 1e-12 {
            return Err(Error::InvalidParameter(format!("|sigma| = {} > 1", sigma.abs())));
        }
        Ok(ChannelParams { sigma, beta, axis: Axis::Z })
    }
}

/// Mixture of rotations by ±β about T with weights (1 ± σ)/2.
pub fn v_beta(p: &ChannelParams) -> Ptm {
    let ax = p.axis.pauli();
    let wp = (1.0 + p.sigma) / 2.0;
    let plus = Ptm::from_unitary(&mat::rot(ax, p.beta));
    let minus = Ptm::from_unitary(&mat::rot(ax, -p.beta));
    let mut r = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            r[a][b] = wp * plus.0[a][b] + (1.0 - wp) * minus.0[a][b];
        }
    }
    Ptm(r)
}

/// β_log with tan β_log = σ tan β, continued continuously from β = 0.
pub fn logical_angle(sigma: f64, beta: f64) -> f64 {
    let k = (beta / PI).round();
    let r = beta - k * PI;
    let core = (sigma.abs() * r.tan()).atan();
    sigma.signum() * (k * PI + core)
}

/// ε = 2(1 − √(1 − (1 − σ²) sin²β)).
pub fn epsilon(sigma: f64, beta: f64) -> f64 {
    2.0 * (1.0 - (1.0 - (1.0 - sigma * sigma) * beta.sin().powi(2)).sqrt())
}

/// Unitary-then-dephasing split: (β_log, 𝒟(ε/4)).
pub fn decompose(p: &ChannelParams) -> (f64, Ptm) {
    let bl = logical_angle(p.sigma, p.beta);
    (bl, Ptm::dephasing_about(p.axis.pauli(), epsilon(p.sigma, p.beta) / 4.0))
}

pub fn rotation_ptm(axis: Axis, angle: f64) -> Ptm {
    Ptm::from_unitary(&mat::rot(axis.pauli(), angle))
}

/// ν = σ.
pub fn computational_order(sigma: f64) -> f64 {
    sigma
}

/// ν̂ from the logical rotation angle at a small measurement angle β₀,
/// read off the channel's X/Y block.
pub fn computational_order_numeric<F: Fn(f64) -> Ptm>(channel: F, beta0: f64) -> f64 {
    let r = channel(beta0);
    r.get(2, 1).atan2(r.get(1, 1)) / beta0
}

pub fn kappa(sigma: f64) -> Result<f64> {
    if sigma == 0.0 {
        return Err(Error::UnboundedKappa);
    }
    Ok((1.0 - sigma * sigma) / (sigma * sigma))
}

/// κ in the correlated regime: (1/σ²)(1 − σ² + 2 Σ_{j=1}^{m−1}(σ²(jΔ) − σ²)).
pub fn kappa_correlated<F: Fn(usize) -> f64>(sigma_sq: f64, corr: F, m: usize, delta: usize) -> Result<f64> {
    if sigma_sq == 0.0 {
        return Err(Error::UnboundedKappa);
    }
    let extra: f64 = (1..m).map(|j| corr(j * delta) - sigma_sq).sum();
    Ok((1.0 - sigma_sq + 2.0 * extra) / sigma_sq)
}

/// Leading-order logical error of an m-fold split rotation.
pub fn epsilon_m(kappa: f64, beta: f64, m: usize) -> f64 {
    kappa * beta * beta / m as f64
}

/// Exact m-fold product of 𝒱(σ, β/m).
pub fn split_compose(sigma: f64, beta: f64, m: usize) -> Ptm {
    v_beta(&ChannelParams { sigma, beta: beta / m as f64, axis: Axis::Z }).pow(m)
}

/// LP of the channel's output for the |+⟩ input.
pub fn purity_loss_of(ptm: &Ptm) -> f64 {
    let v = ptm.apply_bloch([1.0, 0.0, 0.0]);
    (1.0 - v[0] * v[0] - v[1] * v[1]) / 2.0
}

/// Closed form for the split rotation on |+⟩.
pub fn split_purity_loss(sigma: f64, beta: f64, m: usize) -> f64 {
    let s2 = 1.0 - (1.0 - sigma * sigma) * (beta / m as f64).sin().powi(2);
    (1.0 - s2.powi(m as i32)) / 2.0
}

/// (ε/2)(1 − ε/4).
pub fn single_step_purity_loss(sigma: f64, beta: f64) -> f64 {
    let e = epsilon(sigma, beta);
    e / 2.0 * (1.0 - e / 4.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PackingScheme {
    pub label: String,
    pub sites: Vec<usize>,
    pub angles: Vec<f64>,
}

impl PackingScheme {
    pub fn new(label: &str, sites: Vec<usize>, angles: Vec<f64>) -> Result<Self> {
        if sites.len() != angles.len() {
            return Err(Error::LengthMismatch { expected: sites.len(), got: angles.len() });
        }
        for w in sites.windows(2) {
            if w[1] <= w[0] || (w[1] - w[0]) % 2 == 1 {
                return Err(Error::InvalidPattern(format!("rotation sites {sites:?} must increase with even spacing")));
            }
        }
        Ok(PackingScheme { label: label.to_string(), sites, angles })
    }

    /// β split evenly over the given sites.
    pub fn even_split(label: &str, sites: &[usize], beta: f64) -> Result<Self> {
        let m = sites.len().max(1) as f64;
        Self::new(label, sites.to_vec(), vec![beta / m; sites.len()])
    }

    pub fn check_chain(&self, n: usize) -> Result<()> {
        for &s in &self.sites {
            if s < 2 || s >= n {
                return Err(Error::SiteOutOfRange { site: s, n });
            }
        }
        Ok(())
    }
}

/// Precomputed ⟨Π_{j∈T} S_j⟩ for every subset T of the rotation sites.
pub struct LogicalStrings {
    pub sites: Vec<usize>,
    values: Vec<f64>,
}

impl LogicalStrings {
    pub fn new(resource: &StateVector, sites: &[usize]) -> Result<Self> {
        let n = resource.n_qubits();
        let strings = sites.iter().map(|&j| tail_string(j, n)).collect::<Result<Vec<_>>>()?;
        let mut values = Vec::with_capacity(1 << sites.len());
        for t in 0..(1usize << sites.len()) {
            let mut op = PauliString::identity(n);
            for (k, s) in strings.iter().enumerate() {
                if t >> k & 1 == 1 {
                    op = op.mul(s)?;
                }
            }
            values.push(resource.expect_pauli(&op)?);
        }
        Ok(LogicalStrings { sites: sites.to_vec(), values })
    }

    /// (⟨X⟩, ⟨Y⟩, ⟨Z⟩) after the rotations, starting from |+⟩:
    /// ⟨X⟩ + i⟨Y⟩ = Σ_T Π_{j∉T} cos β_j Π_{j∈T} (i sin β_j) ⟨Π_{j∈T} S_j⟩.
    pub fn evolve(&self, angles: &[f64]) -> [f64; 3] {
        let (mut re, mut im) = (0.0, 0.0);
        for (t, v) in self.values.iter().enumerate() {
            let mut mag = 1.0;
            let mut ipow = 0;
            for (k, b) in angles.iter().enumerate() {
                if t >> k & 1 == 1 {
                    mag *= b.sin();
                    ipow += 1;
                } else {
                    mag *= b.cos();
                }
            }
            let w = mag * v;
            match ipow % 4 {
                0 => re += w,
                1 => im += w,
                2 => re -= w,
                _ => im -= w,
            }
        }
        [re, im, 0.0]
    }
}

pub fn exact_logical_evolution(resource: &StateVector, scheme: &PackingScheme) -> Result<[f64; 3]> {
    scheme.check_chain(resource.n_qubits())?;
    Ok(LogicalStrings::new(resource, &scheme.sites)?.evolve(&scheme.angles))
}

pub fn purity_loss_xy(v: [f64; 3]) -> f64 {
    (1.0 - v[0] * v[0] - v[1] * v[1]) / 2.0
}

#[derive(Clone, Debug, PartialEq)]
pub struct PackingRow {
    pub n: usize,
    pub phi: f64,
    pub beta: f64,
    pub scheme: String,
    pub lp_exact: f64,
}

/// LP for each (scheme, β) on the XX-rotated resource; β is split evenly
/// across each scheme's sites.
pub fn packing_compare(n: usize, phi: f64, betas: &[f64], schemes: &[(String, Vec<usize>)]) -> Result<Vec<PackingRow>> {
    let resource = ResourceSpec::new(ResourceKind::XxRotated(phi), n).build()?;
    let mut rows = Vec::new();
    for (label, sites) in schemes {
        let ls = LogicalStrings::new(&resource, sites)?;
        for &b in betas {
            let sch = PackingScheme::even_split(label, sites, b)?;
            sch.check_chain(n)?;
            rows.push(PackingRow {
                n,
                phi,
                beta: b,
                scheme: label.clone(),
                lp_exact: purity_loss_xy(ls.evolve(&sch.angles)),
            });
        }
    }
    Ok(rows)
}

/// LP_a − LP_b on the XX-rotated resource at angle φ.
pub fn lp_difference(n: usize, beta: f64, a: &[usize], b: &[usize], phi: f64) -> Result<f64> {
    let resource = ResourceSpec::new(ResourceKind::XxRotated(phi), n).with_compile(CompileMode::Direct).build()?;
    let lp = |sites: &[usize]| -> Result<f64> {
        let sch = PackingScheme::even_split("", sites, beta)?;
        Ok(purity_loss_xy(exact_logical_evolution(&resource, &sch)?))
    };
    Ok(lp(a)? - lp(b)?)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Crossover {
    Found { phi_c: f64, bracket: (f64, f64) },
    NoSignChange { min_diff: f64, max_diff: f64 },
}

/// First sign change of LP_a − LP_b along the φ grid, refined by bisection.
pub fn find_crossover(n: usize, beta: f64, a: &[usize], b: &[usize], phi_grid: &[f64]) -> Result<Crossover> {
    let diffs = phi_grid.iter().map(|&p| lp_difference(n, beta, a, b, p)).collect::<Result<Vec<_>>>()?;
    for k in 1..diffs.len() {
        if diffs[k - 1] == 0.0 {
            return Ok(Crossover::Found { phi_c: phi_grid[k - 1], bracket: (phi_grid[k - 1], phi_grid[k - 1]) });
        }
        if diffs[k - 1].signum() != diffs[k].signum() {
            let (mut lo, mut hi) = (phi_grid[k - 1], phi_grid[k]);
            let mut flo = diffs[k - 1];
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let fm = lp_difference(n, beta, a, b, mid)?;
                if fm.signum() == flo.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-12 {
                    break;
                }
            }
            return Ok(Crossover::Found { phi_c: 0.5 * (lo + hi), bracket: (phi_grid[k - 1], phi_grid[k]) });
        }
    }
    let min_diff = diffs.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_diff = diffs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(Crossover::NoSignChange { min_diff, max_diff })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ptm::frobenius_error;
    use crate::states::build_cluster;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn v_beta_limits() {
        let b = 0.9;
        let ideal = rotation_ptm(Axis::Z, b);
        assert!(v_beta(&ChannelParams::new(1.0, b).unwrap()).max_abs_diff(&ideal) < 1e-15);
        assert!(v_beta(&ChannelParams::new(0.4, 0.0).unwrap()).max_abs_diff(&Ptm::identity()) < 1e-15);
        let r = v_beta(&ChannelParams::new(0.8, FRAC_PI_4).unwrap());
        let det = r.get(1, 1) * r.get(2, 2) - r.get(1, 2) * r.get(2, 1);
        assert!((det - 0.82).abs() < 1e-12);
    }

    #[test]
    fn angle_and_epsilon_examples() {
        assert_eq!(logical_angle(1.0, 0.7), 0.7);
        assert!(epsilon(1.0, 0.7).abs() < 1e-15);
        assert!((epsilon(0.0, std::f64::consts::FRAC_PI_2) - 2.0).abs() < 1e-15);
        let b = 1e-4;
        for s in [0.3, 0.9] {
            assert!((logical_angle(s, b) / b / s - 1.0).abs() < 1e-6);
            assert!((epsilon(s, b) / (b * b) / (1.0 - s * s) - 1.0).abs() < 1e-6);
        }
        // continuity through β = π/2 and beyond
        let a = logical_angle(0.5, PI / 2.0 - 1e-9);
        let c = logical_angle(0.5, PI / 2.0 + 1e-9);
        assert!((a - c).abs() < 1e-6);
        assert!((logical_angle(0.5, PI) - PI).abs() < 1e-12);
        assert!(logical_angle(-0.5, 0.3) < 0.0);
    }

    #[test]
    fn decompose_examples() {
        let p = ChannelParams::new(0.9, 0.3).unwrap();
        let (bl, d) = decompose(&p);
        let re = d * rotation_ptm(Axis::Z, bl);
        assert!(re.max_abs_diff(&v_beta(&p)) < 1e-12);
        assert!((frobenius_error(&v_beta(&p), &rotation_ptm(Axis::Z, bl)) - epsilon(0.9, 0.3)).abs() < 1e-12);
        let (bl, d) = decompose(&ChannelParams::new(0.9, 0.0).unwrap());
        assert_eq!(bl, 0.0);
        assert!(d.max_abs_diff(&Ptm::identity()) < 1e-15);
    }

    #[test]
    fn x_axis_channel_decomposes_too() {
        let p = ChannelParams { sigma: 0.7, beta: 0.5, axis: Axis::X };
        let (bl, d) = decompose(&p);
        assert!((d * rotation_ptm(Axis::X, bl)).max_abs_diff(&v_beta(&p)) < 1e-12);
    }

    #[test]
    fn computational_order_examples() {
        assert_eq!(computational_order(1.0), 1.0);
        let nu = computational_order_numeric(|b| v_beta(&ChannelParams::new(0.75, b).unwrap()), 1e-5);
        assert!((nu - 0.75).abs() < 1e-8);
    }

    #[test]
    fn kappa_examples() {
        assert_eq!(kappa(1.0).unwrap(), 0.0);
        assert!(matches!(kappa(0.0), Err(Error::UnboundedKappa)));
        let s2 = 0.36;
        let k = kappa_correlated(s2, |_| s2, 3, 2).unwrap();
        assert!((k - kappa(0.6).unwrap()).abs() < 1e-12);
        let k = kappa_correlated(0.25, |l| if l == 2 { 0.5 } else { 0.25 }, 2, 2).unwrap();
        assert!((k - 5.0).abs() < 1e-12);
    }

    #[test]
    fn split_examples() {
        assert!((epsilon_m(0.5, 0.2, 2) * 2.0 - epsilon_m(0.5, 0.2, 1)).abs() < 1e-15);
        for m in 1..=4 {
            let lp = purity_loss_of(&split_compose(0.6, 0.3, m));
            assert!((lp - split_purity_loss(0.6, 0.3, m)).abs() < 1e-12);
        }
        assert!((split_purity_loss(0.6, 0.3, 1) - single_step_purity_loss(0.6, 0.3)).abs() < 1e-12);
    }

    #[test]
    fn exact_evolution_on_cluster() {
        let cl = build_cluster(9).unwrap();
        let s = PackingScheme::new("z", vec![3, 5], vec![0.0, 0.0]).unwrap();
        assert_eq!(exact_logical_evolution(&cl, &s).unwrap(), [1.0, 0.0, 0.0]);
        let s = PackingScheme::new("one", vec![5], vec![0.8]).unwrap();
        let v = exact_logical_evolution(&cl, &s).unwrap();
        assert!((v[0] - 0.8f64.cos()).abs() < 1e-12 && (v[1] - 0.8f64.sin()).abs() < 1e-12);
        assert!(PackingScheme::new("bad", vec![3, 4], vec![0.1, 0.1]).is_err());
        let s = PackingScheme::new("edge", vec![9], vec![0.1]).unwrap();
        assert!(exact_logical_evolution(&cl, &s).is_err());
    }
}
