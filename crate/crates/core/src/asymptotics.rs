//! Small-t expansions of the interval heat content and the harness that
//! compares them with quadrature: residual-exponent fits, log-coefficient
//! fits with fitted smooth nuisance terms, and the a-shift recursion.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::coefficients::{c_boundary, c_n, log_coefficient, theta, y_fn, ParamPair};
use crate::error::{Error, Result};
use crate::quadrature::{heat_content_interval, QuadResult};
use crate::special_fn::gamma_real;
use crate::Complex;

pub const DEFAULT_SLOPE_TOL: f64 = 0.15;
pub const DEFAULT_LOG_REL_TOL: f64 = 0.05;
/// Quadrature tolerance used by the verification routines.
pub const VERIFY_TOL: f64 = 1e-13;
/// Residuals below this multiple of the quadrature error are excluded from fits.
pub const FLOOR_FACTOR: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeriesTerm {
    pub power: f64,
    pub log_power: u8,
    pub coeff: Complex,
}

/// Σ coeff · t^power · (log t)^log_power, kept sorted by (power, log_power)
/// with coinciding keys merged.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct AsymptoticSeries {
    terms: Vec<SeriesTerm>,
}

const KEY_TOL: f64 = 1e-12;

impl AsymptoticSeries {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, power: f64, log_power: u8, coeff: Complex) {
        if let Some(t) = self
            .terms
            .iter_mut()
            .find(|t| t.log_power == log_power && (t.power - power).abs() < KEY_TOL)
        {
            t.coeff += coeff;
            return;
        }
        let at = self
            .terms
            .iter()
            .position(|t| (t.power, t.log_power) > (power, log_power))
            .unwrap_or(self.terms.len());
        self.terms.insert(
            at,
            SeriesTerm {
                power,
                log_power,
                coeff,
            },
        );
    }

    pub fn with_term(mut self, power: f64, log_power: u8, coeff: Complex) -> Self {
        self.add(power, log_power, coeff);
        self
    }

    pub fn terms(&self) -> &[SeriesTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, power: f64, log_power: u8) -> Option<Complex> {
        self.terms
            .iter()
            .find(|t| t.log_power == log_power && (t.power - power).abs() < KEY_TOL)
            .map(|t| t.coeff)
    }

    /// Drops the (power, log_power) term, if present.
    pub fn without(mut self, power: f64, log_power: u8) -> Self {
        self.terms
            .retain(|t| !(t.log_power == log_power && (t.power - power).abs() < KEY_TOL));
        self
    }

    pub fn eval(&self, t: f64) -> Complex {
        let lt = t.ln();
        self.terms
            .iter()
            .map(|term| {
                let base = t.powf(term.power) * if term.log_power == 1 { lt } else { 1.0 };
                term.coeff * base
            })
            .sum()
    }
}

/// c(a,b) t^{(1−a−b)/2} + Σ_{n=0}^{N} c_n(a,b) t^{n/2}.
pub fn series_thm31(p: &ParamPair, n: usize) -> Result<AsymptoticSeries> {
    p.require_off_log_plane()?;
    let mut s = AsymptoticSeries::new();
    let power = (1.0 - p.s()) / 2.0;
    if power.im.abs() > 0.0 {
        return Err(Error::Domain("series evaluation needs real a+b".into()));
    }
    s.add(power.re, 0, c_boundary(p)?);
    for k in 0..=n {
        s.add(k as f64 / 2.0, 0, c_n(k, p)?);
    }
    Ok(s)
}

/// −½ log t + C + Σ_{n=1}^{N} c_n(a, 1−a) t^{n/2} with C = −𝒴(a), the constant
/// the heat content actually approaches (see `y_fn`).
pub fn series_logplane_k0(a: f64, n: usize) -> Result<AsymptoticSeries> {
    series_logplane_k0_with_constant(a, n, -y_fn(a)?)
}

/// As `series_logplane_k0` with an explicit constant term.
pub fn series_logplane_k0_with_constant(a: f64, n: usize, constant: f64) -> Result<AsymptoticSeries> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::Domain(format!("need 0 < a < 1, got {a}")));
    }
    let p = ParamPair::real(a, 1.0 - a)?;
    let mut s = AsymptoticSeries::new()
        .with_term(0.0, 1, Complex::new(-0.5, 0.0))
        .with_term(0.0, 0, Complex::new(constant, 0.0));
    for k in 1..=n {
        s.add(k as f64 / 2.0, 0, c_n(k, &p)?);
    }
    Ok(s)
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub t_grid: Vec<f64>,
    pub quad_values: Vec<f64>,
    pub quad_errors: Vec<f64>,
    pub series_values: Vec<f64>,
    pub residuals: Vec<f64>,
    /// NaN when every residual is below the quadrature floor.
    pub fitted_exponent: f64,
    pub fitted_log_coeff: Option<f64>,
    pub predicted_exponent: f64,
    pub pass: bool,
    pub tolerance_used: f64,
    pub below_floor: bool,
    pub points_used: usize,
}

/// Log-spaced grid from t_max down to t_min.
pub fn log_grid(t_min: f64, t_max: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 || !(t_min > 0.0 && t_max > t_min) {
        return Err(Error::Domain(format!(
            "need 0 < t_min < t_max and at least 2 points, got [{t_min}, {t_max}] x {points}"
        )));
    }
    let (l0, l1) = (t_max.ln(), t_min.ln());
    let mut grid: Vec<f64> = (0..points)
        .map(|i| (l0 + (l1 - l0) * i as f64 / (points - 1) as f64).exp())
        .collect();
    grid[0] = t_max;
    grid[points - 1] = t_min;
    Ok(grid)
}

/// Ordinary least squares y ≈ α + βx; returns (β, α).
pub fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let beta = sxy / sxx;
    (beta, my - beta * mx)
}

/// Fits |r| ≈ C t^s on log-log axes; returns s.
pub fn fit_exponent(t: &[f64], r: &[f64]) -> f64 {
    let lx: Vec<f64> = t.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = r.iter().map(|v| v.abs().ln()).collect();
    fit_line(&lx, &ly).0
}

/// Least squares y ≈ Σ β_j X_j with each column scaled to unit norm; returns
/// the coefficients and their standard errors.
pub fn least_squares(columns: &[Vec<f64>], y: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = y.len();
    let n = columns.len();
    if m <= n {
        return Err(Error::Domain(format!(
            "least squares needs more points ({m}) than columns ({n})"
        )));
    }
    let norms: Vec<f64> = columns
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    let a = DMatrix::from_fn(m, n, |i, j| columns[j][i] / norms[j]);
    let b = DVector::from_column_slice(y);
    let svd = a.clone().svd(true, true);
    let x = svd
        .solve(&b, 1e-15)
        .map_err(|e| Error::Domain(format!("least squares failed: {e}")))?;
    let resid = &a * &x - &b;
    let sigma2 = resid.norm_squared() / (m - n) as f64;
    let ata_inv = (a.transpose() * &a)
        .try_inverse()
        .ok_or_else(|| Error::Domain("singular normal matrix".into()))?;
    let coeffs = (0..n).map(|j| x[j] / norms[j]).collect();
    let stderr = (0..n)
        .map(|j| (sigma2 * ata_inv[(j, j)]).max(0.0).sqrt() / norms[j])
        .collect();
    Ok((coeffs, stderr))
}

/// Quadrature values on the grid, evaluated concurrently.
pub fn quad_on_grid(p: &ParamPair, t_grid: &[f64], tol: f64) -> Result<Vec<QuadResult>> {
    t_grid
        .par_iter()
        .map(|&t| heat_content_interval(p, t, None, tol))
        .collect()
}

/// Builds a report from quadrature results and series values, fitting the
/// residual exponent on the points that clear the quadrature floor.
pub fn residual_report(
    t_grid: &[f64],
    quad: &[QuadResult],
    series_values: Vec<f64>,
    predicted: f64,
    slope_tol: f64,
) -> VerificationReport {
    let residuals: Vec<f64> = quad.iter().zip(&series_values).map(|(q, s)| q.value - s).collect();
    let usable: Vec<usize> = (0..t_grid.len())
        .filter(|&i| residuals[i].abs() >= FLOOR_FACTOR * quad[i].error_estimate && residuals[i] != 0.0)
        .collect();
    let below_floor = usable.len() < 3;
    let fitted = if below_floor {
        f64::NAN
    } else {
        let t: Vec<f64> = usable.iter().map(|&i| t_grid[i]).collect();
        let r: Vec<f64> = usable.iter().map(|&i| residuals[i]).collect();
        fit_exponent(&t, &r)
    };
    VerificationReport {
        t_grid: t_grid.to_vec(),
        quad_values: quad.iter().map(|q| q.value).collect(),
        quad_errors: quad.iter().map(|q| q.error_estimate).collect(),
        series_values,
        residuals,
        fitted_exponent: fitted,
        fitted_log_coeff: None,
        predicted_exponent: predicted,
        pass: below_floor || (fitted - predicted).abs() <= slope_tol,
        tolerance_used: slope_tol,
        below_floor,
        points_used: usable.len(),
    }
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.len() < 4 {
        return Err(Error::Domain(format!("need points >= 4, got {}", t_grid.len())));
    }
    Ok(())
}

/// Residual of quadrature against the N-term series, fitted as C t^s; passes
/// when s is within `slope_tol` of (N+1)/2.
pub fn verify_expansion(
    p: &ParamPair,
    t_grid: &[f64],
    n: usize,
    tol: f64,
    slope_tol: f64,
) -> Result<VerificationReport> {
    check_grid(t_grid)?;
    let series = series_thm31(p, n)?;
    let quad = quad_on_grid(p, t_grid, tol)?;
    let sv = t_grid.iter().map(|&t| series.eval(t).re).collect();
    Ok(residual_report(t_grid, &quad, sv, (n as f64 + 1.0) / 2.0, slope_tol))
}

/// Integer-b case: the same series and fit as `verify_expansion`.
pub fn verify_smooth_rho_case(a: f64, b: i32, t_grid: &[f64], n: usize, slope_tol: f64) -> Result<VerificationReport> {
    if !(-2..=0).contains(&b) {
        return Err(Error::Domain(format!(
            "smooth-rho case needs b in {{0, -1, -2}}, got {b}"
        )));
    }
    let p = ParamPair::real(a, b as f64)?;
    verify_expansion(&p, t_grid, n, VERIFY_TOL, slope_tol)
}

/// Columns t^{j/2} for j = 0..=max_half_power and t^k log t.
fn nuisance_columns(t_grid: &[f64], max_half_power: usize, k: u32) -> Vec<Vec<f64>> {
    let mut cols: Vec<Vec<f64>> = (0..=max_half_power)
        .map(|j| t_grid.iter().map(|t| t.powf(j as f64 / 2.0)).collect())
        .collect();
    cols.push(t_grid.iter().map(|t| t.powi(k as i32) * t.ln()).collect());
    cols
}

/// Fitted coefficient of t^k log t in the values y on the grid, with the
/// smooth powers t^{j/2}, j ≤ 2k+2, fitted alongside; returns (L, stderr).
pub fn fit_log_coefficient(t_grid: &[f64], y: &[f64], k: u32) -> Result<(f64, f64)> {
    let cols = nuisance_columns(t_grid, 2 * k as usize + 2, k);
    let (c, se) = least_squares(&cols, y)?;
    Ok((c[c.len() - 1], se[se.len() - 1]))
}

/// Below this size a fitted log coefficient counts as absent.
pub const LOG_NOISE_FLOOR: f64 = 1e-6;

/// Log-plane check at a + b = 1 − 2k.
///
/// k = 0: the OLS slope of h against log t must be −½ within 0.02, and the
/// residual after `series_logplane_k0` must decay with exponent ≥ 0.4.
/// k ≥ 1: the fitted t^k log t coefficient must match `log_coefficient`
/// within `rel_tol`, or be below `LOG_NOISE_FLOOR` when that vanishes.
pub fn verify_logplane(a: f64, k: u32, t_grid: &[f64], rel_tol: f64) -> Result<VerificationReport> {
    check_grid(t_grid)?;
    let b = 1.0 - 2.0 * k as f64 - a;
    let p = ParamPair::real(a, b)?;
    let quad = quad_on_grid(&p, t_grid, VERIFY_TOL)?;
    let values: Vec<f64> = quad.iter().map(|q| q.value).collect();
    if k == 0 {
        let lt: Vec<f64> = t_grid.iter().map(|t| t.ln()).collect();
        let (slope, _) = fit_line(&lt, &values);
        let series = series_logplane_k0(a, 2)?;
        let sv = t_grid.iter().map(|&t| series.eval(t).re).collect();
        let mut report = residual_report(t_grid, &quad, sv, 0.4, 0.0);
        report.fitted_log_coeff = Some(slope);
        report.tolerance_used = 0.02;
        let decays = report.below_floor || report.fitted_exponent >= 0.4;
        report.pass = (slope + 0.5).abs() <= 0.02 && decays;
        return Ok(report);
    }
    let (fitted, _) = fit_log_coefficient(t_grid, &values, k)?;
    let expected = log_coefficient(a, k);
    let pass = if expected == 0.0 {
        fitted.abs() < LOG_NOISE_FLOOR
    } else {
        ((fitted - expected) / expected).abs() <= rel_tol
    };
    let series: Vec<f64> = t_grid.iter().map(|&t| expected * t.powi(k as i32) * t.ln()).collect();
    let residuals = values.iter().zip(&series).map(|(v, s)| v - s).collect();
    Ok(VerificationReport {
        t_grid: t_grid.to_vec(),
        quad_errors: quad.iter().map(|q| q.error_estimate).collect(),
        quad_values: values,
        series_values: series,
        residuals,
        fitted_exponent: f64::NAN,
        fitted_log_coeff: Some(fitted),
        predicted_exponent: k as f64,
        pass,
        tolerance_used: rel_tol,
        below_floor: false,
        points_used: t_grid.len(),
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct RecursionCheck {
    pub residual: f64,
    /// Quadrature error propagated through the identity.
    pub floor: f64,
}

/// 𝒵_N(b; t) = π^{−1/2} Σ_{n=0}^{N} t^{(n+2)/2} 2^n θ_n(b) Γ((n+1)/2) / n!,
/// the expansion of 2t (4πt)^{−1/2} ∫₀¹ x̃^{−b} e^{−(1−x̃)²/4t} dx̃, which is the
/// boundary term at x = 1 left by integrating x^{−a} by parts.
pub fn z_series(b: f64, t: f64, n: usize) -> Result<f64> {
    let mut sum = 0.0;
    let mut fact = 1.0;
    for k in 0..=n {
        if k > 0 {
            fact *= k as f64;
        }
        sum +=
            t.powf((k as f64 + 2.0) / 2.0) * 2f64.powi(k as i32) * theta(k, &b) * gamma_real((k as f64 + 1.0) / 2.0)?
                / fact;
    }
    Ok(sum / std::f64::consts::PI.sqrt())
}

/// |h_{a,b} − (h_{a−2,b} − h_{a−1,b−1} + 𝒵_N) / (2t(1−a))| from three quadratures.
pub fn verify_recursion(p: &ParamPair, t: f64, n: usize) -> Result<RecursionCheck> {
    let (a, b) = p.real_parts()?;
    let tol = 1e-14;
    let pairs = [(a, b), (a - 2.0, b), (a - 1.0, b - 1.0)];
    let q: Vec<QuadResult> = pairs
        .par_iter()
        .map(|&(x, y)| heat_content_interval(&ParamPair::real(x, y)?, t, None, tol))
        .collect::<Result<_>>()?;
    let scale = 1.0 / (2.0 * t * (1.0 - a));
    let rhs = scale * (q[1].value - q[2].value + z_series(b, t, n)?);
    Ok(RecursionCheck {
        residual: (q[0].value - rhs).abs(),
        floor: q[0].error_estimate + scale * (q[1].error_estimate + q[2].error_estimate),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn series_terms_merge_and_sort() {
        let s = series_thm31(&ParamPair::real(0.0, 0.0).unwrap(), 1).unwrap();
        assert_eq!(s.len(), 2);
        assert_relative_eq!(s.terms()[0].coeff.re, 1.0, max_relative = 1e-14);
        assert_relative_eq!(
            s.terms()[1].coeff.re,
            -2.0 / std::f64::consts::PI.sqrt(),
            max_relative = 1e-13
        );
        let s = series_thm31(&ParamPair::real(0.3, 0.4).unwrap(), 2).unwrap();
        let powers: Vec<f64> = s.terms().iter().map(|t| t.power).collect();
        assert_eq!(powers.len(), 4);
        assert!((powers[0] - 0.0).abs() < 1e-15 && (powers[1] - 0.15).abs() < 1e-12);
        assert_eq!(series_thm31(&ParamPair::real(0.3, 0.1).unwrap(), 0).unwrap().len(), 2);
    }

    #[test]
    fn log_terms_evaluate() {
        let s = AsymptoticSeries::new().with_term(1.0, 1, Complex::new(2.0, 0.0));
        assert_relative_eq!(s.eval(0.01).re, 2.0 * 0.01 * 0.01f64.ln(), max_relative = 1e-15);
        let k0 = series_logplane_k0(0.5, 2).unwrap();
        assert_eq!(k0.coefficient(0.0, 1).unwrap().re, -0.5);
        assert_relative_eq!(
            k0.coefficient(0.5, 0).unwrap().re,
            -1.0 / std::f64::consts::PI.sqrt(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn least_squares_recovers_coefficients() {
        let t = log_grid(1e-5, 1e-2, 12).unwrap();
        let y: Vec<f64> = t
            .iter()
            .map(|&t| 1.0 - 0.3 * t.sqrt() + 0.7 * t + 0.105 * t * t.ln())
            .collect();
        let (l, _) = fit_log_coefficient(&t, &y, 1).unwrap();
        assert!((l - 0.105).abs() < 1e-8);
    }

    #[test]
    fn grid_shape() {
        let g = log_grid(1e-5, 1e-2, 6).unwrap();
        assert_eq!(g.len(), 6);
        assert_relative_eq!(g[0], 1e-2, max_relative = 1e-14);
        assert_relative_eq!(g[5], 1e-5, max_relative = 1e-12);
    }
}
