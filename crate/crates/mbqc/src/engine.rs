//! Measurement patterns on 1D resource states.
//!
//! Sites are measured left to right. Measuring site i in the eigenbasis of
//! O = cos β X − sin β Y applies X^s H Rz(β) to the logical register
//! (outcome +1 ↔ s = 0). The byproduct frame (x, z) starts at (0, 0) and
//! updates as x' = z ⊕ s, z' = x; the output site then reads
//! X_log = (−1)^z X_n, Y_log = (−1)^{x⊕z} Y_n. Adaptive mode measures
//! rotated sites at (−1)^x β. The non-adaptive modes never flip; they undo
//! the global flip inherited from the wire before the first rotation in
//! post-processing.
//!
//! Deformation θ (reweighting): the undeformed cluster is measured in the
//! eigenbasis of M†(θ) O M(θ) on bulk sites and each shot carries the
//! product of the eigenvalue magnitudes as weight.

use rand::Rng;
use rayon::prelude::*;

use crate::ptm::Ptm;
use crate::rng;
use crate::states::{m_theta, ResourceKind, ResourceSpec};
use crate::sv::{c, mat, Mat2, MeasBasis, SiteInit, StateVector, C64};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SiteEntry {
    Wire,
    Rotated(f64),
    /// Last site; read out in X and Y in separate batches.
    Output,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Adaptive,
    SignAgnostic,
    PostSelected,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReadoutAxis {
    X,
    Y,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementPattern {
    pub entries: Vec<SiteEntry>,
    pub deformation: Option<f64>,
    pub mode: Mode,
    /// Sites that must read +1 in post-selected mode.
    pub post_sites: Vec<usize>,
}

impl MeasurementPattern {
    /// Wire pattern on n sites with the given (site, β) rotations.
    pub fn new(n: usize, rotations: &[(usize, f64)], deformation: Option<f64>, mode: Mode) -> Result<Self> {
        let mut entries = vec![SiteEntry::Wire; n];
        if n < 2 {
            return Err(Error::InvalidPattern("need at least two sites".into()));
        }
        entries[n - 1] = SiteEntry::Output;
        for &(s, b) in rotations {
            if s < 2 || s >= n {
                return Err(Error::InvalidPattern(format!("rotated site {s} outside the bulk 2..{}", n - 1)));
            }
            entries[s - 1] = SiteEntry::Rotated(b);
        }
        let mut p = MeasurementPattern { entries, deformation, mode, post_sites: Vec::new() };
        p.post_sites = default_post_sites(&p.rotated_sites());
        p.validate()?;
        Ok(p)
    }

    pub fn with_post_sites(mut self, sites: Vec<usize>) -> Result<Self> {
        self.post_sites = sites;
        self.validate()?;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.entries.len()
    }

    pub fn rotated_sites(&self) -> Vec<usize> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, e)| matches!(e, SiteEntry::Rotated(_)))
            .map(|(k, _)| k + 1)
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        let outs: Vec<usize> =
            self.entries.iter().enumerate().filter(|(_, e)| **e == SiteEntry::Output).map(|(k, _)| k + 1).collect();
        if outs != [n] {
            return Err(Error::InvalidPattern("exactly one output site, the last".into()));
        }
        let rot = self.rotated_sites();
        if rot.iter().any(|&s| s < 2 || s >= n) {
            return Err(Error::InvalidPattern("rotated sites must lie in the bulk".into()));
        }
        if self.mode != Mode::Adaptive && rot.windows(2).any(|w| (w[1] - w[0]) % 2 == 1) {
            return Err(Error::InvalidPattern("non-adaptive modes need rotations on one sublattice".into()));
        }
        if self.mode == Mode::PostSelected {
            if self.deformation.is_some() {
                return Err(Error::InvalidPattern("post-selection needs a prepared resource, not reweighting".into()));
            }
            if self.post_sites.iter().any(|&s| s == 0 || s >= n || rot.contains(&s)) {
                return Err(Error::InvalidPattern("post-selected sites must be wire sites".into()));
            }
        }
        if let Some(t) = self.deformation {
            if !(0.0..=std::f64::consts::PI).contains(&t) {
                return Err(Error::InvalidParameter(format!("deformation {t} outside [0, π]")));
            }
        }
        Ok(())
    }
}

/// Wire sites whose outcome flips the sign of a later rotation: the opposite
/// sublattice, strictly between the first and last rotated site.
pub fn default_post_sites(rotated: &[usize]) -> Vec<usize> {
    match (rotated.first(), rotated.last()) {
        (Some(&a), Some(&b)) if b > a => ((a + 1)..b).step_by(2).filter(|s| !rotated.contains(s)).collect(),
        _ => Vec::new(),
    }
}

/// O(β) = cos β X − sin β Y.
pub fn rotated_observable(beta: f64) -> Mat2 {
    mat::add(&mat::scale(&mat::x(), c(beta.cos())), &mat::scale(&mat::y(), c(-beta.sin())))
}

#[derive(Clone, Copy, Debug)]
pub struct DeformedObservable {
    /// `plus` is |λ⟩, `minus` is |λ⊥⟩.
    pub basis: MeasBasis,
    pub lambda: f64,
    pub lambda_perp: f64,
    pub degenerate: bool,
}

/// Eigen-decomposition of M†(θ) O M(θ), with λ the eigenvalue whose
/// eigenvector connects to the +1 eigenvector of O as θ → 0.
pub fn deformed_observable(theta: f64, base: &Mat2) -> Result<DeformedObservable> {
    let (ob, hi, lo) = MeasBasis::from_hermitian(base)?;
    if (hi - 1.0).abs() > 1e-10 || (lo + 1.0).abs() > 1e-10 {
        return Err(Error::InvalidParameter("observable must have eigenvalues ±1".into()));
    }
    let m = m_theta(theta);
    let h = mat::mul(&mat::dagger(&m), &mat::mul(base, &m));
    let (b, hi, lo) = MeasBasis::from_hermitian(&h)?;
    let ov = ob.plus[0].conj() * b.plus[0] + ob.plus[1].conj() * b.plus[1];
    let degenerate = (hi - lo).abs() < 1e-12;
    let keep = ov.norm_sqr() > 0.5 + 1e-12 || ((ov.norm_sqr() - 0.5).abs() <= 1e-12 && hi >= lo);
    Ok(if keep {
        DeformedObservable { basis: b, lambda: hi, lambda_perp: lo, degenerate }
    } else {
        DeformedObservable {
            basis: MeasBasis { plus: b.minus, minus: b.plus },
            lambda: lo,
            lambda_perp: hi,
            degenerate,
        }
    })
}

#[derive(Clone, Copy, Debug)]
struct SiteMeas {
    basis: MeasBasis,
    /// weight for s = 0 and s = 1
    lam: [f64; 2],
}

fn site_meas(site: usize, n: usize, angle: f64, deformation: Option<f64>) -> Result<SiteMeas> {
    let obs = rotated_observable(angle);
    match deformation {
        Some(t) if site >= 2 && site < n => {
            let d = deformed_observable(t, &obs)?;
            Ok(SiteMeas { basis: d.basis, lam: [d.lambda, d.lambda_perp] })
        }
        _ => {
            let (b, _, _) = MeasBasis::from_hermitian(&obs)?;
            Ok(SiteMeas { basis: b, lam: [1.0, -1.0] })
        }
    }
}

/// Per-site bases for both rotation signs, precomputed once.
struct Compiled {
    n: usize,
    meas: Vec<[SiteMeas; 2]>,
    rotated: Vec<bool>,
    first_rot: Option<usize>,
    post: Vec<bool>,
    mode: Mode,
}

impl Compiled {
    fn new(p: &MeasurementPattern) -> Result<Self> {
        p.validate()?;
        let n = p.n();
        let mut meas = Vec::with_capacity(n - 1);
        let mut rotated = Vec::with_capacity(n - 1);
        for (k, e) in p.entries[..n - 1].iter().enumerate() {
            let b = match e {
                SiteEntry::Rotated(b) => *b,
                _ => 0.0,
            };
            rotated.push(matches!(e, SiteEntry::Rotated(_)));
            meas.push([site_meas(k + 1, n, b, p.deformation)?, site_meas(k + 1, n, -b, p.deformation)?]);
        }
        let first_rot = rotated.iter().position(|&r| r).map(|k| k + 1);
        let mut post = vec![false; n];
        if p.mode == Mode::PostSelected {
            for &s in &p.post_sites {
                post[s - 1] = true;
            }
        }
        Ok(Compiled { n, meas, rotated, first_rot, post, mode: p.mode })
    }

    fn flip_at(&self, site: usize, frame: &Frame) -> bool {
        self.mode == Mode::Adaptive && self.rotated[site - 1] && frame.x
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Frame {
    pub x: bool,
    pub z: bool,
    /// x at the first rotated site (used by the non-adaptive modes).
    pub x_first_rotation: bool,
}

impl Frame {
    fn step(self, s: bool) -> Frame {
        Frame { x: self.z ^ s, z: self.x, x_first_rotation: self.x_first_rotation }
    }

    /// Signs applied to the raw output-site (X, Y, Z) readings.
    pub fn signs(&self, mode: Mode) -> [f64; 3] {
        let sg = |b: bool| if b { -1.0 } else { 1.0 };
        let g = mode != Mode::Adaptive && self.x_first_rotation;
        [sg(self.z), sg(self.x ^ self.z ^ g), sg(self.x ^ g)]
    }
}

#[derive(Clone, Debug)]
pub struct Leaf {
    /// bit i−1 set ⇔ s_i = 1 (outcome −1), for sites 1..n−1
    pub outcomes: u64,
    pub prob: f64,
    pub lambdas: Vec<f64>,
    /// Π |λ_i| over measured sites
    pub weight: f64,
    pub frame: Frame,
    /// normalised output-site state
    pub out: [C64; 2],
    pub accepted: bool,
}

impl Leaf {
    pub fn raw_bloch(&self) -> [f64; 3] {
        let [a, b] = self.out;
        let xy = a.conj() * b;
        [2.0 * xy.re, 2.0 * xy.im, a.norm_sqr() - b.norm_sqr()]
    }

    pub fn corrected_bloch(&self, mode: Mode) -> [f64; 3] {
        let r = self.raw_bloch();
        let s = self.frame.signs(mode);
        [r[0] * s[0], r[1] * s[1], r[2] * s[2]]
    }
}

/// Exhaustive outcome-branch enumeration with exact probabilities.
pub fn enumerate_branches(resource: &StateVector, pattern: &MeasurementPattern) -> Result<Vec<Leaf>> {
    let cp = Compiled::new(pattern)?;
    if resource.n_qubits() != cp.n {
        return Err(Error::LengthMismatch { expected: cp.n, got: resource.n_qubits() });
    }
    let mut leaves = Vec::with_capacity(1 << (cp.n - 1));
    let mut lambdas = Vec::with_capacity(cp.n);
    let mut start = resource.clone();
    start.renormalize();
    recurse(&cp, start, 1, Frame::default(), 1.0, 0, true, &mut lambdas, &mut leaves)?;
    Ok(leaves)
}

#[allow(clippy::too_many_arguments)]
fn recurse(
    cp: &Compiled,
    state: StateVector,
    site: usize,
    mut frame: Frame,
    prob: f64,
    bits: u64,
    accepted: bool,
    lambdas: &mut Vec<f64>,
    leaves: &mut Vec<Leaf>,
) -> Result<()> {
    if site == cp.n {
        let a = state.amplitudes();
        let nrm = (a[0].norm_sqr() + a[1].norm_sqr()).sqrt();
        leaves.push(Leaf {
            outcomes: bits,
            prob,
            lambdas: lambdas.clone(),
            weight: lambdas.iter().map(|l| l.abs()).product(),
            frame,
            out: [a[0] / nrm, a[1] / nrm],
            accepted,
        });
        return Ok(());
    }
    if Some(site) == cp.first_rot {
        frame.x_first_rotation = frame.x;
    }
    let m = &cp.meas[site - 1][cp.flip_at(site, &frame) as usize];
    for s in [false, true] {
        let (mut child, p) = state.contract_site(1, &m.basis.vector(!s))?;
        if p < 1e-15 {
            continue;
        }
        child.renormalize();
        lambdas.push(m.lam[s as usize]);
        let acc = accepted && !(s && cp.post[site - 1]);
        recurse(cp, child, site + 1, frame.step(s), prob * p, bits | (s as u64) << (site - 1), acc, lambdas, leaves)?;
        lambdas.pop();
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExactLogical {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub acceptance: f64,
}

/// Exact byproduct-corrected logical Bloch vector (accepted branches only,
/// reweighted, normalised by the acceptance probability).
pub fn exact_logical(resource: &StateVector, pattern: &MeasurementPattern) -> Result<ExactLogical> {
    let leaves = enumerate_branches(resource, pattern)?;
    reduce_leaves(&leaves, pattern.mode, pattern.deformation.is_some())
}

/// `z` is NaN for reweighted patterns: the |λ| product only reproduces the
/// logical X and Y readouts, whose byproduct masks contain every rotated site.
fn reduce_leaves(leaves: &[Leaf], mode: Mode, reweighted: bool) -> Result<ExactLogical> {
    let mut v = [0.0; 3];
    let mut acc = 0.0;
    for l in leaves.iter().filter(|l| l.accepted) {
        let b = l.corrected_bloch(mode);
        for k in 0..3 {
            v[k] += l.prob * l.weight * b[k];
        }
        acc += l.prob;
    }
    if acc < 1e-15 {
        return Err(Error::ZeroBranch(acc));
    }
    let z = if reweighted { f64::NAN } else { v[2] / acc };
    Ok(ExactLogical { x: v[0] / acc, y: v[1] / acc, z, acceptance: acc })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShotRecord {
    /// ±1 per site; the last entry is the output-site reading.
    pub outcomes: Vec<i8>,
    /// Signed eigenvalue weight λ_i per site (±1 at undeformed sites).
    pub weights: Vec<f64>,
    pub frame: Frame,
    pub axis: ReadoutAxis,
    pub accepted: bool,
}

impl ShotRecord {
    /// Single-shot estimate of the logical observable on `axis`.
    pub fn value(&self, mode: Mode) -> f64 {
        let n = self.outcomes.len();
        let w: f64 = self.weights[..n - 1].iter().map(|l| l.abs()).product();
        let s = self.frame.signs(mode);
        let sign = match self.axis {
            ReadoutAxis::X => s[0],
            ReadoutAxis::Y => s[1],
        };
        sign * f64::from(self.outcomes[n - 1]) * w
    }
}

fn readout_basis(axis: ReadoutAxis) -> MeasBasis {
    match axis {
        ReadoutAxis::X => MeasBasis::x(),
        ReadoutAxis::Y => MeasBasis::y(),
    }
}

/// Cumulative table for Born sampling of leaves.
pub struct BranchTable {
    leaves: Vec<Leaf>,
    cdf: Vec<f64>,
    mode: Mode,
    reweighted: bool,
}

impl BranchTable {
    pub fn new(resource: &StateVector, pattern: &MeasurementPattern) -> Result<Self> {
        let leaves = enumerate_branches(resource, pattern)?;
        let mut cdf = Vec::with_capacity(leaves.len());
        let mut acc = 0.0;
        for l in &leaves {
            acc += l.prob;
            cdf.push(acc);
        }
        Ok(BranchTable { leaves, cdf, mode: pattern.mode, reweighted: pattern.deformation.is_some() })
    }

    pub fn leaves(&self) -> &[Leaf] {
        &self.leaves
    }

    pub fn exact(&self) -> Result<ExactLogical> {
        reduce_leaves(&self.leaves, self.mode, self.reweighted)
    }

    fn sample<R: Rng + ?Sized>(&self, axis: ReadoutAxis, rng: &mut R) -> (usize, i8) {
        let total = *self.cdf.last().expect("non-empty table");
        let u = rng.random::<f64>() * total;
        let k = self.cdf.partition_point(|&c| c <= u).min(self.leaves.len() - 1);
        let b = self.leaves[k].raw_bloch();
        let e = match axis {
            ReadoutAxis::X => b[0],
            ReadoutAxis::Y => b[1],
        };
        let plus = rng.random::<f64>() < 0.5 * (1.0 + e);
        (k, if plus { 1 } else { -1 })
    }

    fn record(&self, k: usize, m: i8, axis: ReadoutAxis) -> ShotRecord {
        let l = &self.leaves[k];
        let n = l.lambdas.len() + 1;
        let mut outcomes: Vec<i8> = (0..n - 1).map(|i| if l.outcomes >> i & 1 == 1 { -1 } else { 1 }).collect();
        outcomes.push(m);
        let mut weights = l.lambdas.clone();
        weights.push(f64::from(m));
        ShotRecord { outcomes, weights, frame: l.frame, axis, accepted: l.accepted }
    }

    fn shot_value(&self, k: usize, m: i8, axis: ReadoutAxis) -> f64 {
        let l = &self.leaves[k];
        let s = l.frame.signs(self.mode);
        let sign = match axis {
            ReadoutAxis::X => s[0],
            ReadoutAxis::Y => s[1],
        };
        sign * f64::from(m) * l.weight
    }
}

pub const SHOT_BLOCK: usize = 4096;

fn axis_tag(axis: ReadoutAxis) -> u64 {
    match axis {
        ReadoutAxis::X => 0,
        ReadoutAxis::Y => 1 << 40,
    }
}

fn blocks(shots: usize) -> Vec<(usize, usize)> {
    (0..shots.div_ceil(SHOT_BLOCK)).map(|b| (b, SHOT_BLOCK.min(shots - b * SHOT_BLOCK))).collect()
}

/// Samples `shots` records per readout axis (X batch, then Y batch).
pub fn run_pattern(
    resource: &StateVector,
    pattern: &MeasurementPattern,
    shots: usize,
    seed: u64,
) -> Result<Vec<ShotRecord>> {
    let table = BranchTable::new(resource, pattern)?;
    let mut out = Vec::with_capacity(2 * shots);
    for axis in [ReadoutAxis::X, ReadoutAxis::Y] {
        let parts: Vec<Vec<ShotRecord>> = blocks(shots)
            .into_par_iter()
            .map(|(b, len)| {
                let mut r = rng::stream(seed, axis_tag(axis) + b as u64);
                (0..len)
                    .map(|_| {
                        let (k, m) = table.sample(axis, &mut r);
                        table.record(k, m, axis)
                    })
                    .collect()
            })
            .collect();
        out.extend(parts.into_iter().flatten());
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Moments {
    pub sum: f64,
    pub sum_sq: f64,
    pub count: usize,
    pub total: usize,
}

impl Moments {
    pub fn push(&mut self, v: f64, accepted: bool) {
        self.total += 1;
        if accepted {
            self.sum += v;
            self.sum_sq += v * v;
            self.count += 1;
        }
    }
    pub fn merge(&mut self, o: &Moments) {
        self.sum += o.sum;
        self.sum_sq += o.sum_sq;
        self.count += o.count;
        self.total += o.total;
    }
    pub fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }
    /// Standard error of the mean (sample standard deviation / √count).
    pub fn stderr(&self) -> f64 {
        let k = self.count as f64;
        if self.count < 2 {
            return f64::NAN;
        }
        let var = (self.sum_sq - self.sum * self.sum / k) / (k - 1.0);
        (var.max(0.0) / k).sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tomography {
    pub x: f64,
    pub y: f64,
    pub err_x: f64,
    pub err_y: f64,
    pub accepted_fraction: f64,
    pub shots: usize,
}

impl Tomography {
    fn from_moments(mx: &Moments, my: &Moments) -> Result<Self> {
        if mx.count == 0 || my.count == 0 {
            return Err(Error::NoAcceptedShots);
        }
        Ok(Tomography {
            x: mx.mean(),
            y: my.mean(),
            err_x: mx.stderr(),
            err_y: my.stderr(),
            accepted_fraction: (mx.count + my.count) as f64 / (mx.total + my.total) as f64,
            shots: mx.total,
        })
    }

    pub fn purity_loss(&self) -> f64 {
        purity_loss(self.x, self.y)
    }

    /// First-order propagated standard error of the purity loss.
    pub fn purity_loss_err(&self) -> f64 {
        ((self.x * self.err_x).powi(2) + (self.y * self.err_y).powi(2)).sqrt()
    }
}

/// ⟨X⟩, ⟨Y⟩ from records: mean over accepted shots of the weighted,
/// byproduct-corrected output reading.
pub fn logical_tomography(records: &[ShotRecord], pattern: &MeasurementPattern) -> Result<Tomography> {
    let (mut mx, mut my) = (Moments::default(), Moments::default());
    for r in records {
        if r.outcomes.len() != pattern.n() {
            return Err(Error::LengthMismatch { expected: pattern.n(), got: r.outcomes.len() });
        }
        let v = r.value(pattern.mode);
        match r.axis {
            ReadoutAxis::X => mx.push(v, r.accepted),
            ReadoutAxis::Y => my.push(v, r.accepted),
        }
    }
    Tomography::from_moments(&mx, &my)
}

/// Streaming equivalent of `run_pattern` followed by `logical_tomography`.
pub fn sample_tomography(table: &BranchTable, shots: usize, seed: u64) -> Result<Tomography> {
    let mut m = [Moments::default(); 2];
    for (ai, axis) in [ReadoutAxis::X, ReadoutAxis::Y].into_iter().enumerate() {
        let parts: Vec<Moments> = blocks(shots)
            .into_par_iter()
            .map(|(b, len)| {
                let mut r = rng::stream(seed, axis_tag(axis) + b as u64);
                let mut mm = Moments::default();
                for _ in 0..len {
                    let (k, o) = table.sample(axis, &mut r);
                    mm.push(table.shot_value(k, o, axis), table.leaves[k].accepted);
                }
                mm
            })
            .collect();
        parts.iter().for_each(|p| m[ai].merge(p));
    }
    Tomography::from_moments(&m[0], &m[1])
}

/// One shot by sequential collapse (used for noisy trajectories, where the
/// resource differs shot to shot).
pub fn sample_sequential<R: Rng + ?Sized>(
    resource: &StateVector,
    pattern: &MeasurementPattern,
    axis: ReadoutAxis,
    rng: &mut R,
) -> Result<ShotRecord> {
    let cp = Compiled::new(pattern)?;
    sample_compiled(&cp, resource, axis, rng)
}

fn sample_compiled<R: Rng + ?Sized>(
    cp: &Compiled,
    resource: &StateVector,
    axis: ReadoutAxis,
    rng: &mut R,
) -> Result<ShotRecord> {
    let n = cp.n;
    let mut state = resource.clone();
    state.renormalize();
    let mut frame = Frame::default();
    let mut outcomes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let mut accepted = true;
    for site in 1..n {
        if Some(site) == cp.first_rot {
            frame.x_first_rotation = frame.x;
        }
        let m = &cp.meas[site - 1][cp.flip_at(site, &frame) as usize];
        let (c0, p0) = state.contract_site(1, &m.basis.plus)?;
        let s = rng.random::<f64>() >= p0;
        let mut child = if s { state.contract_site(1, &m.basis.minus)?.0 } else { c0 };
        child.renormalize();
        state = child;
        outcomes.push(if s { -1 } else { 1 });
        weights.push(m.lam[s as usize]);
        if s && cp.post[site - 1] {
            accepted = false;
        }
        frame = frame.step(s);
    }
    let (o, _) = state.project_measure(1, &readout_basis(axis), rng)?;
    outcomes.push(o);
    weights.push(f64::from(o));
    Ok(ShotRecord { outcomes, weights, frame, axis, accepted })
}

/// Sequential-collapse tomography where every shot gets a fresh resource
/// from `make` (called with the shot's own RNG stream).
pub fn sequential_tomography<F>(pattern: &MeasurementPattern, shots: usize, seed: u64, make: F) -> Result<Tomography>
where
    F: Fn(&mut rng::Rng) -> Result<StateVector> + Sync,
{
    let cp = Compiled::new(pattern)?;
    let mut m = [Moments::default(); 2];
    for (ai, axis) in [ReadoutAxis::X, ReadoutAxis::Y].into_iter().enumerate() {
        let parts: Vec<Result<Moments>> = blocks(shots)
            .into_par_iter()
            .map(|(b, len)| {
                let mut r = rng::stream(seed, axis_tag(axis) + b as u64);
                let mut mm = Moments::default();
                for _ in 0..len {
                    let res = make(&mut r)?;
                    let rec = sample_compiled(&cp, &res, axis, &mut r)?;
                    mm.push(rec.value(pattern.mode), rec.accepted);
                }
                Ok(mm)
            })
            .collect();
        for p in parts {
            m[ai].merge(&p?);
        }
    }
    Tomography::from_moments(&m[0], &m[1])
}

/// (1 − ⟨X⟩² − ⟨Y⟩²)/2, with inputs clipped to [−1, 1].
pub fn purity_loss(x: f64, y: f64) -> f64 {
    let clip = |v: f64| {
        if v.abs() > 1.0 + 1e-6 {
            log::warn!("logical expectation {v} exceeds 1; clipping");
        }
        v.clamp(-1.0, 1.0)
    };
    let (x, y) = (clip(x), clip(y));
    (1.0 - x * x - y * y) / 2.0
}

pub const MAX_EXTRACT_SITES: usize = 11;

/// Brute-force logical channel: the resource is rebuilt with site 1 in
/// |0⟩, |1⟩, |+⟩, |+i⟩, every outcome branch is enumerated with its exact
/// probability, and the averaged corrected outputs are assembled into a PTM.
/// A reweighted pattern on the cluster is realised on the prepared deformed
/// resource, since reweighting only reproduces the X and Y readouts.
pub fn extract_logical_channel(resource: &ResourceSpec, pattern: &MeasurementPattern) -> Result<Ptm> {
    if resource.n > MAX_EXTRACT_SITES {
        return Err(Error::InvalidParameter(format!("channel extraction limited to n <= {MAX_EXTRACT_SITES}")));
    }
    if let Some(t) = pattern.deformation {
        if resource.kind != ResourceKind::Cluster {
            return Err(Error::InvalidPattern("reweighting applies to the undeformed cluster only".into()));
        }
        let prepared = ResourceSpec { kind: ResourceKind::Deformed(t), ..*resource };
        let plain = MeasurementPattern { deformation: None, ..pattern.clone() };
        return extract_logical_channel(&prepared, &plain);
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let inputs: [[C64; 2]; 4] =
        [[c(1.0), c(0.0)], [c(0.0), c(1.0)], SiteInit::Plus.amplitudes(), [c(h), C64::new(0.0, h)]];
    let mut t = [[0.0f64; 4]; 4]; // t[input][a] = Tr(P_a ρ_out)
    for (k, inp) in inputs.iter().enumerate() {
        let sv = resource.build_with_input(*inp)?;
        let leaves = enumerate_branches(&sv, pattern)?;
        let mut tr = 0.0;
        let mut v = [0.0; 3];
        let mut acc = 0.0;
        for l in leaves.iter().filter(|l| l.accepted) {
            let b = l.corrected_bloch(pattern.mode);
            tr += l.prob * l.weight;
            for a in 0..3 {
                v[a] += l.prob * l.weight * b[a];
            }
            acc += l.prob;
        }
        if acc < 1e-15 {
            return Err(Error::ZeroBranch(acc));
        }
        t[k] = [tr / acc, v[0] / acc, v[1] / acc, v[2] / acc];
    }
    let mut r = [[0.0; 4]; 4];
    for a in 0..4 {
        let li = t[0][a] + t[1][a];
        r[a][0] = 0.5 * li;
        r[a][3] = 0.5 * (t[0][a] - t[1][a]);
        r[a][1] = t[2][a] - 0.5 * li;
        r[a][2] = t[3][a] - 0.5 * li;
    }
    Ok(Ptm(r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{split_compose, v_beta, ChannelParams};
    use crate::states::{build_cluster, build_deformed};
    use std::f64::consts::{FRAC_PI_4, PI};

    #[test]
    fn deformed_observable_examples() {
        let d = deformed_observable(0.0, &mat::x()).unwrap();
        assert!((d.lambda - 1.0).abs() < 1e-12 && (d.lambda_perp + 1.0).abs() < 1e-12);
        let t = 0.9;
        let (s, co) = (t / 2.0f64).sin_cos();
        let d = deformed_observable(t, &mat::x()).unwrap();
        assert!((d.lambda - (co + s).powi(2)).abs() < 1e-12);
        assert!((d.lambda_perp + (co - s).powi(2)).abs() < 1e-12);
        let d = deformed_observable(PI / 3.0, &rotated_observable(FRAC_PI_4)).unwrap();
        let m = m_theta(PI / 3.0);
        let target = mat::mul(&m, &mat::mul(&rotated_observable(FRAC_PI_4), &m));
        for r in 0..2 {
            for k in 0..2 {
                let v = d.lambda * (d.basis.plus[r] * d.basis.plus[k].conj())
                    + d.lambda_perp * (d.basis.minus[r] * d.basis.minus[k].conj());
                assert!((v - target[r][k]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn cluster_wire_is_identity() {
        let p = MeasurementPattern::new(5, &[], None, Mode::Adaptive).unwrap();
        let r = extract_logical_channel(&ResourceSpec::new(ResourceKind::Cluster, 5), &p).unwrap();
        assert!(r.max_abs_diff(&Ptm::identity()) < 1e-10);
    }

    #[test]
    fn extraction_matches_v_beta_both_paths() {
        let (t, b) = (0.8f64, 0.6);
        let p = MeasurementPattern::new(5, &[(3, b)], None, Mode::Adaptive).unwrap();
        let want = v_beta(&ChannelParams::new(t.cos(), b).unwrap());
        let prepared = extract_logical_channel(&ResourceSpec::new(ResourceKind::Deformed(t), 5), &p).unwrap();
        assert!(prepared.max_abs_diff(&want) < 1e-9);
        let p = MeasurementPattern::new(5, &[(3, b)], Some(t), Mode::Adaptive).unwrap();
        let reweighted = extract_logical_channel(&ResourceSpec::new(ResourceKind::Cluster, 5), &p).unwrap();
        assert!(reweighted.max_abs_diff(&want) < 1e-9, "{reweighted:?}\n{want:?}\n{prepared:?}");
    }

    #[test]
    fn extraction_matches_split_compose() {
        let (t, b) = (1.0f64, 0.9);
        let rot: Vec<_> = [3, 5, 7].iter().map(|&s| (s, b / 3.0)).collect();
        let p = MeasurementPattern::new(9, &rot, None, Mode::Adaptive).unwrap();
        let r = extract_logical_channel(&ResourceSpec::new(ResourceKind::Deformed(t), 9), &p).unwrap();
        assert!(r.max_abs_diff(&split_compose(t.cos(), b, 3)) < 1e-9);
    }

    #[test]
    fn exact_logical_ellipse_point() {
        let (t, b) = (PI / 3.0, 1.1);
        let p = MeasurementPattern::new(5, &[(3, b)], Some(t), Mode::Adaptive).unwrap();
        let e = exact_logical(&build_cluster(5).unwrap(), &p).unwrap();
        assert!((e.x - b.cos()).abs() < 1e-12 && (e.y - t.cos() * b.sin()).abs() < 1e-12);
        let p = MeasurementPattern::new(5, &[(3, b)], None, Mode::Adaptive).unwrap();
        let e = exact_logical(&build_deformed(5, t).unwrap(), &p).unwrap();
        assert!((e.x - b.cos()).abs() < 1e-12 && (e.y - t.cos() * b.sin()).abs() < 1e-12);
    }

    #[test]
    fn post_sites_default() {
        assert_eq!(default_post_sites(&[3, 5, 7, 9]), vec![4, 6, 8]);
        assert_eq!(default_post_sites(&[3, 9]), vec![4, 6, 8]);
        assert_eq!(default_post_sites(&[3]), Vec::<usize>::new());
    }

    #[test]
    fn purity_loss_examples() {
        assert_eq!(purity_loss(1.0, 0.0), 0.0);
        assert_eq!(purity_loss(0.0, 0.0), 0.5);
        let (s, b) = (0.6f64, 0.7f64);
        assert!((purity_loss(b.cos(), s * b.sin()) - (1.0 - s * s) * b.sin().powi(2) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn pattern_validation() {
        assert!(MeasurementPattern::new(5, &[(5, 0.1)], None, Mode::Adaptive).is_err());
        assert!(MeasurementPattern::new(7, &[(3, 0.1), (4, 0.1)], None, Mode::SignAgnostic).is_err());
        assert!(MeasurementPattern::new(7, &[(3, 0.1)], Some(0.3), Mode::PostSelected).is_err());
    }
}
