//! Ordinary least-squares fits. The covariance is s²(AᵀA)⁻¹ from the
//! residuals or, for heteroscedastic data, the sandwich (AᵀA)⁻¹AᵀΣA(AᵀA)⁻¹
//! with Σ from known per-point errors.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum FitError {
    #[error("{model} fit needs at least {need} points, got {got}")]
    TooFewPoints { model: &'static str, need: usize, got: usize },
    #[error("design matrix is rank deficient")]
    RankDeficient,
    #[error("non-finite input data")]
    NonFinite,
    #[error("fitted coefficients do not describe a closed ellipse (1/a² = {0:.3e}, 1/b² = {1:.3e})")]
    NotAnEllipse(f64, f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Ellipse,
    Line,
    QuadraticOffset,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Param {
    pub name: &'static str,
    pub value: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitResult {
    pub model: Model,
    pub params: Vec<Param>,
    pub residual_norm: f64,
    pub dof: usize,
}

impl FitResult {
    pub fn get(&self, name: &str) -> &Param {
        self.params.iter().find(|p| p.name == name).unwrap_or_else(|| panic!("no fit parameter '{name}'"))
    }
}

struct Ols {
    coef: DVector<f64>,
    cov: DMatrix<f64>,
    rss: f64,
    dof: usize,
}

enum Noise<'a> {
    Homoscedastic,
    Known(&'a [f64]),
    /// per-point variance as a function of the fitted coefficients; with
    /// `scaled` only its shape is trusted and the scale comes from the residuals
    Propagated {
        var: &'a dyn Fn(&DVector<f64>, usize) -> f64,
        scaled: bool,
    },
}

fn ols(a: DMatrix<f64>, y: DVector<f64>, sigma: Option<&[f64]>) -> Result<Ols, FitError> {
    ols_with(a, y, sigma.map_or(Noise::Homoscedastic, Noise::Known))
}

fn ols_with(a: DMatrix<f64>, y: DVector<f64>, noise: Noise) -> Result<Ols, FitError> {
    let known: &[f64] = if let Noise::Known(s) = noise { s } else { &[] };
    if a.iter().chain(y.iter()).chain(known.iter()).any(|v| !v.is_finite()) {
        return Err(FitError::NonFinite);
    }
    let (n, p) = a.shape();
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if smax == 0.0 || svd.singular_values.min() <= smax * 1e-12 {
        return Err(FitError::RankDeficient);
    }
    let coef = svd.solve(&y, 0.0).map_err(|_| FitError::RankDeficient)?;
    let r = &y - &a * &coef;
    let rss = r.norm_squared();
    let dof = n - p;
    let s2 = if dof > 0 { rss / dof as f64 } else { 0.0 };
    let ata_inv = (a.transpose() * &a).try_inverse().ok_or(FitError::RankDeficient)?;
    let var: Vec<f64> = match noise {
        Noise::Homoscedastic => return Ok(Ols { coef, cov: ata_inv * s2, rss, dof }),
        Noise::Known(sd) => sd.iter().map(|s| s * s).collect(),
        Noise::Propagated { var, scaled } => {
            let w: Vec<f64> = (0..n).map(|i| var(&coef, i)).collect();
            let k = if scaled && dof > 0 {
                (0..n).filter(|&i| w[i] > 0.0).map(|i| r[i] * r[i] / w[i]).sum::<f64>() / dof as f64
            } else {
                1.0
            };
            w.into_iter().map(|v| k * v).collect()
        }
    };
    let aw = DMatrix::from_fn(n, p, |i, j| a[(i, j)] * var[i].sqrt());
    let cov = &ata_inv * aw.transpose() * aw * &ata_inv;
    Ok(Ols { coef, cov, rss, dof })
}

fn need(model: &'static str, need: usize, got: usize) -> Result<(), FitError> {
    if got < need {
        Err(FitError::TooFewPoints { model, need, got })
    } else {
        Ok(())
    }
}

/// Axis-aligned, origin-centred ellipse x²/a² + y²/b² = 1, solved linearly
/// for (1/a², 1/b²); half-axis errors by first-order propagation. The
/// equation residuals are heteroscedastic (the noise enters through x², y²),
/// so the covariance is a sandwich with var r_i ≈ 4(u²x_i²σx_i² + v²y_i²σy_i²).
/// Without per-point errors σ is taken common to all coordinates and
/// estimated from the residuals.
pub fn fit_ellipse(points: &[(f64, f64)]) -> Result<FitResult, FitError> {
    fit_ellipse_with_errors(points, None)
}

pub fn fit_ellipse_with_errors(points: &[(f64, f64)], errors: Option<&[(f64, f64)]>) -> Result<FitResult, FitError> {
    need("ellipse", 5, points.len())?;
    let a = DMatrix::from_fn(points.len(), 2, |i, j| if j == 0 { points[i].0.powi(2) } else { points[i].1.powi(2) });
    let y = DVector::from_element(points.len(), 1.0);
    let var = |c: &DVector<f64>, i: usize| {
        let ((x, yv), (sx, sy)) = (points[i], errors.map_or((1.0, 1.0), |e| e[i]));
        4.0 * ((c[0] * x * sx).powi(2) + (c[1] * yv * sy).powi(2))
    };
    let f = ols_with(a, y, Noise::Propagated { var: &var, scaled: errors.is_none() })?;
    let (u, v) = (f.coef[0], f.coef[1]);
    if u <= 0.0 || v <= 0.0 {
        return Err(FitError::NotAnEllipse(u, v));
    }
    // d(w^{-1/2})/dw = −w^{-3/2}/2
    let ha = u.powf(-0.5);
    let hb = v.powf(-0.5);
    Ok(FitResult {
        model: Model::Ellipse,
        params: vec![
            Param { name: "a", value: ha, stderr: 0.5 * u.powf(-1.5) * f.cov[(0, 0)].sqrt() },
            Param { name: "b", value: hb, stderr: 0.5 * v.powf(-1.5) * f.cov[(1, 1)].sqrt() },
        ],
        residual_norm: f.rss.sqrt(),
        dof: f.dof,
    })
}

/// Ellipse from points at known parameter angles: x = a cos β, y = b sin β,
/// two independent one-parameter OLS fits. Unlike the algebraic fit this
/// stays well posed as b → 0, where the points collapse onto a segment.
pub fn fit_ellipse_at_angles(
    angles: &[f64],
    points: &[(f64, f64)],
    errors: Option<&[(f64, f64)]>,
) -> Result<FitResult, FitError> {
    need("ellipse", 5, angles.len().min(points.len()))?;
    let k = angles.len();
    let ex: Option<Vec<f64>> = errors.map(|e| e.iter().map(|p| p.0).collect());
    let ey: Option<Vec<f64>> = errors.map(|e| e.iter().map(|p| p.1).collect());
    let fx =
        ols(DMatrix::from_fn(k, 1, |i, _| angles[i].cos()), DVector::from_fn(k, |i, _| points[i].0), ex.as_deref())?;
    let fy =
        ols(DMatrix::from_fn(k, 1, |i, _| angles[i].sin()), DVector::from_fn(k, |i, _| points[i].1), ey.as_deref())?;
    Ok(FitResult {
        model: Model::Ellipse,
        params: vec![
            Param { name: "a", value: fx.coef[0], stderr: fx.cov[(0, 0)].sqrt() },
            Param { name: "b", value: fy.coef[0], stderr: fy.cov[(0, 0)].sqrt() },
        ],
        residual_norm: (fx.rss + fy.rss).sqrt(),
        dof: fx.dof + fy.dof,
    })
}

/// y = slope·x + intercept.
pub fn fit_line(x: &[f64], y: &[f64]) -> Result<FitResult, FitError> {
    fit_line_with_errors(x, y, None)
}

pub fn fit_line_with_errors(x: &[f64], y: &[f64], sy: Option<&[f64]>) -> Result<FitResult, FitError> {
    need("line", 3, x.len().min(y.len()))?;
    let a = DMatrix::from_fn(x.len(), 2, |i, j| if j == 0 { x[i] } else { 1.0 });
    let f = ols(a, DVector::from_column_slice(y), sy)?;
    Ok(FitResult {
        model: Model::Line,
        params: vec![
            Param { name: "slope", value: f.coef[0], stderr: f.cov[(0, 0)].sqrt() },
            Param { name: "intercept", value: f.coef[1], stderr: f.cov[(1, 1)].sqrt() },
        ],
        residual_norm: f.rss.sqrt(),
        dof: f.dof,
    })
}

/// y = c·x² + d. No linear term: the purity loss is even in β.
pub fn fit_quadratic_offset(x: &[f64], y: &[f64]) -> Result<FitResult, FitError> {
    fit_quadratic_offset_with_errors(x, y, None)
}

pub fn fit_quadratic_offset_with_errors(x: &[f64], y: &[f64], sy: Option<&[f64]>) -> Result<FitResult, FitError> {
    need("quadratic", 4, x.len().min(y.len()))?;
    let a = DMatrix::from_fn(x.len(), 2, |i, j| if j == 0 { x[i] * x[i] } else { 1.0 });
    let f = ols(a, DVector::from_column_slice(y), sy)?;
    Ok(FitResult {
        model: Model::QuadraticOffset,
        params: vec![
            Param { name: "c", value: f.coef[0], stderr: f.cov[(0, 0)].sqrt() },
            Param { name: "d", value: f.coef[1], stderr: f.cov[(1, 1)].sqrt() },
        ],
        residual_norm: f.rss.sqrt(),
        dof: f.dof,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_generators_are_recovered() {
        let pts: Vec<(f64, f64)> = (0..12)
            .map(|k| {
                let b = 2.0 * std::f64::consts::PI * k as f64 / 12.0;
                (b.cos(), 0.8 * b.sin())
            })
            .collect();
        let e = fit_ellipse(&pts).unwrap();
        assert!((e.get("a").value - 1.0).abs() < 1e-9 && (e.get("b").value - 0.8).abs() < 1e-9);
        let angles: Vec<f64> = (0..12).map(|k| 2.0 * std::f64::consts::PI * k as f64 / 12.0).collect();
        let e = fit_ellipse_at_angles(&angles, &pts, None).unwrap();
        assert!((e.get("a").value - 1.0).abs() < 1e-12 && (e.get("b").value - 0.8).abs() < 1e-12);
        // the degenerate ellipse (b = 0) is still fitted
        let flat: Vec<(f64, f64)> = angles.iter().map(|b| (b.cos(), 0.0)).collect();
        assert_eq!(fit_ellipse_at_angles(&angles, &flat, None).unwrap().get("b").value, 0.0);

        let x = [0.0, 1.0, 2.0, 3.0];
        let l = fit_line(&x, &x.map(|v| 0.7 * v)).unwrap();
        assert!((l.get("slope").value - 0.7).abs() < 1e-12 && l.get("intercept").value.abs() < 1e-12);

        let q = fit_quadratic_offset(&x, &x.map(|v| 0.3 * v * v + 0.01)).unwrap();
        assert!((q.get("c").value - 0.3).abs() < 1e-12 && (q.get("d").value - 0.01).abs() < 1e-12);
    }

    #[test]
    fn unit_circle_gives_unit_axes() {
        let pts: Vec<(f64, f64)> = (0..7).map(|k| (k as f64).sin_cos()).collect();
        let e = fit_ellipse(&pts).unwrap();
        assert!((e.get("a").value - 1.0).abs() < 1e-12 && (e.get("b").value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        // all points on the x axis: 1/b² is unconstrained
        let pts: Vec<(f64, f64)> = (0..6).map(|k| (k as f64 * 0.1, 0.0)).collect();
        assert_eq!(fit_ellipse(&pts).unwrap_err(), FitError::RankDeficient);
        assert_eq!(fit_line(&[1.0, 1.0, 1.0], &[0.0, 1.0, 2.0]).unwrap_err(), FitError::RankDeficient);
        assert!(matches!(fit_quadratic_offset(&[1.0; 3], &[0.0; 3]), Err(FitError::TooFewPoints { .. })));
        assert_eq!(fit_line(&[0.0, 1.0, f64::NAN], &[0.0; 3]).unwrap_err(), FitError::NonFinite);
    }

    #[test]
    fn propagated_errors_match_closed_form() {
        // slope-only design: var(â) = Σ c_i² σ_i² / (Σ c_i²)²
        let ang = [0.1, 0.7, 1.3, 2.0, 2.9];
        let pts: Vec<(f64, f64)> = ang.iter().map(|b: &f64| (b.cos(), b.sin())).collect();
        let errs: Vec<(f64, f64)> = (0..5).map(|i| (0.01 * (i + 1) as f64, 0.0)).collect();
        let f = fit_ellipse_at_angles(&ang, &pts, Some(&errs)).unwrap();
        let s2: f64 = ang.iter().map(|b| b.cos().powi(2)).sum();
        let v: f64 = ang.iter().zip(&errs).map(|(b, e)| (b.cos() * e.0).powi(2)).sum::<f64>() / (s2 * s2);
        assert!((f.get("a").stderr - v.sqrt()).abs() < 1e-15);
        assert_eq!(f.get("b").stderr, 0.0);
    }
}
