//! Variational energy of H(α) on the one-parameter deformed ansatz.
//!
//! Expectations come either from closed forms or from the compiled
//! few-qubit measurement circuits (single-qubit X-field and boundary-K
//! circuits, and the coin-flipped two-stage bulk-K circuit). All circuits
//! use RY(−θ); see `states` for the sign convention.

use rand::Rng;
use rayon::prelude::*;

use crate::rng;
use crate::sv::{Gate1, Gate2, MeasBasis, SiteInit, StateVector};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SiteExpectations {
    /// ⟨X_i⟩ for i = 1..n (zero at the two ends).
    pub x: Vec<f64>,
    /// ⟨K_i⟩ for i = 1..n.
    pub k: Vec<f64>,
}

fn check_n(n: usize) -> Result<()> {
    if n.is_multiple_of(2) {
        return Err(Error::EvenChain(n));
    }
    if n < 5 {
        return Err(Error::QubitCount(n));
    }
    Ok(())
}

/// Sites whose stabilizer only sees one deformed neighbour pattern
/// (⟨K⟩ = cos θ); all others give cos²θ.
pub fn is_boundary_class(i: usize, n: usize) -> bool {
    i <= 2 || i >= n - 1
}

pub fn analytic_expectations(theta: f64, n: usize) -> Result<SiteExpectations> {
    check_n(n)?;
    let x = (1..=n).map(|i| if i == 1 || i == n { 0.0 } else { theta.sin() }).collect();
    let k = (1..=n).map(|i| if is_boundary_class(i, n) { theta.cos() } else { theta.cos().powi(2) }).collect();
    Ok(SiteExpectations { x, k })
}

/// E(θ; α) = −cos α [4 cos θ + (n−4) cos²θ] − sin α (n−2) sin θ.
pub fn closed_form_energy(theta: f64, alpha: f64, n: usize) -> f64 {
    let (s, c) = theta.sin_cos();
    -alpha.cos() * (4.0 * c + (n as f64 - 4.0) * c * c) - alpha.sin() * (n as f64 - 2.0) * s
}

/// Energy per site as n → ∞.
pub fn thermo_energy_density(theta: f64, alpha: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    -alpha.cos() * c * c - alpha.sin() * s
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyBreakdown {
    pub alpha: f64,
    pub theta: f64,
    pub n: usize,
    pub k_boundary: f64,
    pub k_bulk: f64,
    pub x_field: f64,
    pub total_energy: f64,
    /// Standard errors; zero for the analytic breakdown.
    pub err_k_boundary: f64,
    pub err_k_bulk: f64,
    pub err_x_field: f64,
    pub err_total: f64,
}

impl EnergyBreakdown {
    fn assemble(alpha: f64, theta: f64, n: usize, kb: (f64, f64), kk: (f64, f64), x: (f64, f64)) -> Self {
        let m = n as f64;
        let (ca, sa) = (alpha.cos(), alpha.sin());
        let total = -ca * (4.0 * kb.0 + (m - 4.0) * kk.0) - sa * (m - 2.0) * x.0;
        let err = ((ca * 4.0 * kb.1).powi(2) + (ca * (m - 4.0) * kk.1).powi(2) + (sa * (m - 2.0) * x.1).powi(2)).sqrt();
        EnergyBreakdown {
            alpha,
            theta,
            n,
            k_boundary: kb.0,
            k_bulk: kk.0,
            x_field: x.0,
            total_energy: total,
            err_k_boundary: kb.1,
            err_k_bulk: kk.1,
            err_x_field: x.1,
            err_total: err,
        }
    }
}

pub fn analytic_breakdown(theta: f64, alpha: f64, n: usize) -> Result<EnergyBreakdown> {
    check_n(n)?;
    let (s, c) = theta.sin_cos();
    Ok(EnergyBreakdown::assemble(alpha, theta, n, (c, 0.0), (c * c, 0.0), (s, 0.0)))
}

/// P(Z = +1) after RY(−θ) on a single qubit prepared in `init`.
fn single_qubit_circuit(theta: f64, init: SiteInit) -> Result<f64> {
    let mut sv = StateVector::new(1, &[init])?;
    sv.apply_1q(1, &Gate1::ry(-theta))?;
    sv.branch_probability(1, &MeasBasis::z().plus)
}

/// Outcome distribution of the two-qubit bulk circuit for given (s₀, s_i):
/// index s_{i−1} + 2 s_{i+1}.
fn bulk_circuit(theta: f64, s0: bool, si: bool) -> Result<[f64; 4]> {
    let mut sv = StateVector::new(2, &[SiteInit::Plus, SiteInit::Plus])?;
    sv.apply_2q(1, 2, &Gate2::cz())?;
    if s0 {
        sv.apply_1q(1, &Gate1::z())?;
    }
    if si {
        sv.apply_1q(2, &Gate1::z())?;
    }
    sv.apply_1q(2, &Gate1::h())?;
    sv.apply_1q(1, &Gate1::ry(-theta))?;
    sv.apply_1q(2, &Gate1::ry(-theta))?;
    let a = sv.amplitudes();
    Ok([a[0].norm_sqr(), a[1].norm_sqr(), a[2].norm_sqr(), a[3].norm_sqr()])
}

/// Exact ⟨K_bulk⟩ of the compiled bulk circuit (averaged over s_i and the coin).
pub fn bulk_circuit_expectation(theta: f64) -> Result<f64> {
    let p_si0 = single_qubit_circuit(theta, SiteInit::Plus)?;
    let mut e = 0.0;
    for si in [false, true] {
        let psi = if si { 1.0 - p_si0 } else { p_si0 };
        for s0 in [false, true] {
            let d = bulk_circuit(theta, s0, si)?;
            for (idx, p) in d.iter().enumerate() {
                let parity = (idx & 1) + (idx >> 1) + si as usize;
                e += psi * 0.5 * p * if parity.is_multiple_of(2) { 1.0 } else { -1.0 };
            }
        }
    }
    Ok(e)
}

fn mean_err(sum: f64, sum_sq: f64, k: usize) -> (f64, f64) {
    let kf = k as f64;
    let m = sum / kf;
    if k < 2 {
        return (m, f64::NAN);
    }
    let var = ((sum_sq - sum * m) / (kf - 1.0)).max(0.0);
    (m, (var / kf).sqrt())
}

const BLOCK: usize = 1 << 15;

fn sample_pm<F>(shots: usize, seed: u64, tag: u64, draw: F) -> (f64, f64)
where
    F: Fn(&mut rng::Rng) -> f64 + Sync,
{
    let parts: Vec<(f64, f64)> = (0..shots.div_ceil(BLOCK))
        .into_par_iter()
        .map(|b| {
            let len = BLOCK.min(shots - b * BLOCK);
            let mut r = rng::stream(seed, (tag << 40) + b as u64);
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..len {
                let v = draw(&mut r);
                s += v;
                s2 += v * v;
            }
            (s, s2)
        })
        .collect();
    let (s, s2) = parts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    mean_err(s, s2, shots)
}

fn pm(b: bool) -> f64 {
    if b {
        -1.0
    } else {
        1.0
    }
}

/// Shot-sampled expectations from the compiled circuits, `shots` per circuit.
pub fn sampled_expectations(theta: f64, alpha: f64, n: usize, shots: usize, seed: u64) -> Result<EnergyBreakdown> {
    check_n(n)?;
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be at least 1".into()));
    }
    let p_plus = single_qubit_circuit(theta, SiteInit::Plus)?;
    let p_zero = single_qubit_circuit(theta, SiteInit::Zero)?;
    let mut table = [[0.0; 4]; 4];
    for si in 0..2 {
        for s0 in 0..2 {
            let d = bulk_circuit(theta, s0 == 1, si == 1)?;
            let mut acc = 0.0;
            for (k, p) in d.iter().enumerate() {
                acc += p;
                table[2 * si + s0][k] = acc;
            }
        }
    }
    let x = sample_pm(shots, seed, 0, |r| pm(r.random::<f64>() >= p_plus));
    let kb = sample_pm(shots, seed, 1, |r| pm(r.random::<f64>() >= p_zero));
    let kk = sample_pm(shots, seed, 2, |r| {
        let si = r.random::<f64>() >= p_plus;
        let s0 = r.random::<bool>();
        let cdf = &table[2 * si as usize + s0 as usize];
        let u = r.random::<f64>() * cdf[3];
        let idx = cdf.iter().position(|&c| u < c).unwrap_or(3);
        pm(((idx & 1) ^ (idx >> 1) ^ si as usize) == 1)
    });
    Ok(EnergyBreakdown::assemble(alpha, theta, n, kb, kk, x))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Objective {
    Analytic,
    Thermodynamic,
    /// Common random numbers: every θ is evaluated with the same seed.
    Sampled {
        shots: usize,
        seed: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaOptimum {
    pub theta: f64,
    pub energy: f64,
    /// Half-width of the θ range whose energy lies within one standard error
    /// of the minimum (sampled objective only).
    pub theta_err: Option<f64>,
    /// False when the grid minimum sits on the boundary of [0, π].
    pub bracketed: bool,
}

fn eval(obj: Objective, theta: f64, alpha: f64, n: usize) -> Result<(f64, f64)> {
    Ok(match obj {
        Objective::Analytic => (closed_form_energy(theta, alpha, n), 0.0),
        Objective::Thermodynamic => (thermo_energy_density(theta, alpha), 0.0),
        Objective::Sampled { shots, seed } => {
            let e = sampled_expectations(theta, alpha, n, shots, seed)?;
            (e.total_energy, e.err_total)
        }
    })
}

/// Coarse grid over [0, π] followed by golden-section refinement of the
/// bracketing interval.
pub fn optimize_theta(
    obj: Objective,
    alpha: f64,
    n: usize,
    grid_points: usize,
    refine_iters: usize,
) -> Result<ThetaOptimum> {
    if grid_points < 16 {
        return Err(Error::InvalidParameter("grid_points must be at least 16".into()));
    }
    if obj != Objective::Thermodynamic {
        check_n(n)?;
    }
    let pi = std::f64::consts::PI;
    let grid: Vec<f64> = (0..grid_points).map(|k| pi * k as f64 / (grid_points - 1) as f64).collect();
    let vals = grid.iter().map(|&t| eval(obj, t, alpha, n)).collect::<Result<Vec<_>>>()?;
    let k = (0..grid_points).min_by(|&a, &b| vals[a].0.total_cmp(&vals[b].0)).expect("non-empty grid");
    let bracketed = k > 0 && k + 1 < grid_points;
    let (mut a, mut b) = (grid[k.saturating_sub(1)], grid[(k + 1).min(grid_points - 1)]);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let f = |t: f64| eval(obj, t, alpha, n).map(|v| v.0);
    let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    for _ in 0..refine_iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
    }
    let mut theta = 0.5 * (a + b);
    let mut energy = f(theta)?;
    if vals[k].0 < energy {
        theta = grid[k];
        energy = vals[k].0;
    }
    if obj == Objective::Thermodynamic && theta > pi / 2.0 {
        // e(θ) = e(π − θ); report the representative in [0, π/2]
        theta = pi - theta;
    }
    let theta_err = match obj {
        Objective::Sampled { .. } => {
            let (_, err) = eval(obj, theta, alpha, n)?;
            let inside: Vec<f64> =
                grid.iter().zip(&vals).filter(|(_, v)| v.0 <= energy + err).map(|(t, _)| *t).collect();
            let lo = inside.iter().copied().fold(theta, f64::min);
            let hi = inside.iter().copied().fold(theta, f64::max);
            Some(0.5 * (hi - lo))
        }
        _ => None,
    };
    Ok(ThetaOptimum { theta, energy, theta_err, bracketed })
}

/// Thermodynamic-limit optimum: sin θ* = tan(α)/2, saturating at π/2 once
/// tan α ≥ 2.
pub fn thermo_limit_theta(alpha: f64) -> Result<f64> {
    if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("alpha {alpha} outside [0, π/2]")));
    }
    if alpha >= 2f64.atan() {
        return Ok(std::f64::consts::FRAC_PI_2);
    }
    Ok((alpha.tan() / 2.0).min(1.0).asin())
}
