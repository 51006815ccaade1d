//! Dirichlet and Neumann heat content on [0, 1] by the method of images.
//!
//! The interval kernel is
//! K(x, x̃) = Σ_{|m| ≤ M} (σ₀σ₁)^{|m|} [G(x − x̃ − 2m) + σ₀ G(x + x̃ − 2m)]
//! with σ = +1 at a Neumann end and −1 at a Dirichlet end. Against x^{−a}x̃^{−b}
//! the m = 0 terms are h_{a,b} and σ₀β̃(a,b); the image at the right end,
//! σ₁G(x + x̃ − 2), produces the smooth-corner series
//! R(t) = π^{−1/2} Σ_n 2^n Γ((n+2)/2)/(n+1)! Σ_{i+j=n} θ_i(a)θ_j(b) · t^{(n+1)/2}.

use std::f64::consts::PI;

use serde::Serialize;

use crate::asymptotics::{fit_log_coefficient, residual_report, series_thm31, VerificationReport};
use crate::coefficients::{bc_correction_coefficient, log_coefficient, theta, ParamPair};
use crate::error::{Error, Result};
use crate::quadrature::{heat_content_interval, quadrant_correction_tol, DataFunction, QuadResult, TanhSinh};
use crate::special_fn::gamma_real;
use crate::Complex;

pub const DEFAULT_IMAGES: usize = 3;
pub const BC_T_MIN: f64 = 1e-6;
pub const BC_T_MAX: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
}

impl BoundaryCondition {
    pub fn sign(self) -> f64 {
        match self {
            BoundaryCondition::Dirichlet => -1.0,
            BoundaryCondition::Neumann => 1.0,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "d" | "dirichlet" => Some(BoundaryCondition::Dirichlet),
            "n" | "neumann" => Some(BoundaryCondition::Neumann),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BCSpec {
    pub left: BoundaryCondition,
    pub right: BoundaryCondition,
}

impl BCSpec {
    pub fn new(left: BoundaryCondition, right: BoundaryCondition) -> Self {
        Self { left, right }
    }

    pub fn dirichlet() -> Self {
        Self::new(BoundaryCondition::Dirichlet, BoundaryCondition::Dirichlet)
    }

    pub fn neumann() -> Self {
        Self::new(BoundaryCondition::Neumann, BoundaryCondition::Neumann)
    }

    /// Parses "DD", "NN", "DN", "ND" (or "D,N" forms).
    pub fn parse(s: &str) -> Option<Self> {
        let chars: Vec<char> = s.chars().filter(|c| c.is_ascii_alphabetic()).collect();
        if chars.len() != 2 {
            return None;
        }
        Some(Self::new(
            BoundaryCondition::parse(&chars[0].to_string())?,
            BoundaryCondition::parse(&chars[1].to_string())?,
        ))
    }
}

fn gauss(d: f64, t: f64) -> f64 {
    (-d * d / (4.0 * t)).exp() / (4.0 * PI * t).sqrt()
}

/// Truncated reflection sum of the interval heat kernel.
pub fn image_kernel(x: f64, xt: f64, t: f64, bc: BCSpec, images: usize) -> f64 {
    let (s0, s1) = (bc.left.sign(), bc.right.sign());
    let m_max = images as i64;
    (-m_max..=m_max)
        .map(|m| {
            let sign = if m % 2 == 0 { 1.0 } else { s0 * s1 };
            let shift = 2.0 * m as f64;
            sign * (gauss(x - xt - shift, t) + s0 * gauss(x + xt - shift, t))
        })
        .sum()
}

/// Smallest image count whose first omitted term is below 1e-17.
pub fn images_needed(t: f64) -> usize {
    let mut m = 1;
    while gauss(2.0 * m as f64 + 1.0, t) > 1e-17 {
        m += 1;
    }
    m
}

/// Images other than the two m = 0 terms, written with accurate distances to
/// the corner each one concentrates on.
fn far_images(
    nx: &crate::quadrature::Node<f64>,
    ny: &crate::quadrature::Node<f64>,
    t: f64,
    bc: BCSpec,
    images: usize,
) -> f64 {
    let (s0, s1) = (bc.left.sign(), bc.right.sign());
    let m_max = images as i64;
    let mut k = 0.0;
    for m in -m_max..=m_max {
        let sign = if m % 2 == 0 { 1.0 } else { s0 * s1 };
        let mf = m as f64;
        if m != 0 {
            // x − x̃ − 2m, nearest the corner (1,0) for m > 0 and (0,1) for m < 0
            let d = if m > 0 {
                nx.from_right + ny.from_left + (2.0 * mf - 1.0)
            } else {
                nx.from_left + ny.from_right + (-2.0 * mf - 1.0)
            };
            k += sign * gauss(d, t);
        }
        if m != 0 {
            // x + x̃ − 2m, nearest (1,1) for m > 0; m < 0 is far from every corner
            let d = if m > 0 {
                nx.from_right + ny.from_right + (2.0 * mf - 2.0)
            } else {
                nx.x + ny.x - 2.0 * mf
            };
            k += sign * s0 * gauss(d, t);
        }
    }
    k
}

/// β_bc(t) = ∫∫ K_bc(x, x̃) x^{−a} x̃^{−b} with the default image count.
pub fn heat_content_bc(p: &ParamPair, t: f64, bc: BCSpec) -> Result<QuadResult> {
    if !(BC_T_MIN..=BC_T_MAX).contains(&t) {
        return Err(Error::Domain(format!(
            "t must lie in [{BC_T_MIN:e}, {BC_T_MAX}], got {t:e}"
        )));
    }
    heat_content_bc_with(p, t, bc, DEFAULT_IMAGES, 1e-12)
}

/// As `heat_content_bc` with an explicit image count and absolute tolerance.
pub fn heat_content_bc_with(p: &ParamPair, t: f64, bc: BCSpec, images: usize, tol: f64) -> Result<QuadResult> {
    let (a, b) = p.real_parts()?;
    if images < 1 {
        return Err(Error::Domain("need at least one image".into()));
    }
    if images < images_needed(t) {
        return Err(Error::Domain(format!(
            "{images} images truncate the kernel at t={t}; need {}",
            images_needed(t)
        )));
    }
    let direct = heat_content_interval(p, t, None, tol / 3.0)?;
    let quadrant = quadrant_correction_tol(p, t, tol / 3.0)?;
    let quad = TanhSinh::new(tol / 3.0).with_rel_tol(1e-13);
    let inner = TanhSinh::new(tol / 30.0).with_rel_tol(1e-14);
    let mut inner_err = None;
    let mut inner_bound = 0.0f64;
    let rest = quad.integrate(
        |nx| {
            let fx = nx.x.powf(-a);
            match inner.integrate(|ny| far_images(&nx, &ny, t, bc, images) * ny.x.powf(-b), 0.0, 1.0) {
                Ok(r) => {
                    inner_bound = inner_bound.max(r.error_estimate);
                    fx * r.value
                }
                Err(e) => {
                    inner_err.get_or_insert(e);
                    0.0
                }
            }
        },
        0.0,
        1.0,
    )?;
    if let Some(e) = inner_err {
        return Err(e);
    }
    let s0 = bc.left.sign();
    let error_estimate =
        direct.error_estimate + quadrant.error_estimate + rest.error_estimate + inner_bound / (1.0 - a);
    Ok(QuadResult {
        value: direct.value + s0 * quadrant.value + rest.value,
        error_estimate,
        nodes_used: direct.nodes_used + quadrant.nodes_used + rest.nodes_used,
    })
}

/// ∫₀¹∫₀¹ K_bc dx dx̃; equals 1 for Neumann at both ends.
pub fn kernel_mass(t: f64, bc: BCSpec, images: usize) -> Result<QuadResult> {
    heat_content_bc_with(&ParamPair::real(0.0, 0.0)?, t, bc, images, 1e-12)
}

/// Coefficient of t^{(n+1)/2} in the right-corner image term R(t).
pub fn right_corner_coefficient(a: f64, b: f64, n: usize) -> Result<f64> {
    let mut fact = 1.0;
    for k in 1..=n + 1 {
        fact *= k as f64;
    }
    let mut conv = 0.0;
    for i in 0..=n {
        let (fi, fj) = (factorial(i), factorial(n - i));
        conv += theta(i, &a) / fi * theta(n - i, &b) / fj * fi * fj;
    }
    Ok(2f64.powi(n as i32) * gamma_real((n as f64 + 2.0) / 2.0)? / fact * conv / PI.sqrt())
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Free series through t^{N/2}, σ₀Q t^{(1−a−b)/2}, and the right-corner terms
/// through t^{N/2} weighted by σ₁.
pub fn series_bc(p: &ParamPair, n: usize, bc: BCSpec) -> Result<crate::asymptotics::AsymptoticSeries> {
    let (a, b) = p.real_parts()?;
    let mut s = series_thm31(p, n)?;
    let q = bc_correction_coefficient(p)?;
    s.add((1.0 - a - b) / 2.0, 0, q * bc.left.sign());
    for k in 0..n {
        let c = right_corner_coefficient(a, b, k)? * bc.right.sign();
        s.add((k as f64 + 1.0) / 2.0, 0, Complex::new(c, 0.0));
    }
    Ok(s)
}

/// Residual fit of β_bc against `series_bc`, or on the odd planes
/// a + b = −2k−1 a fit of the t^k log t coefficient (smooth powers fitted
/// as nuisance terms). `tol` bounds the exponent error, or the relative error
/// of the log coefficient.
pub fn verify_theorem51(p: &ParamPair, t_grid: &[f64], bc: BCSpec, n: usize, tol: f64) -> Result<VerificationReport> {
    if t_grid.len() < 4 {
        return Err(Error::Domain(format!("need points >= 4, got {}", t_grid.len())));
    }
    let (a, _) = p.real_parts()?;
    use rayon::prelude::*;
    let quad: Vec<QuadResult> = t_grid
        .par_iter()
        .map(|&t| heat_content_bc(p, t, bc))
        .collect::<Result<_>>()?;
    match p.log_plane() {
        None => {
            let series = series_bc(p, n, bc)?;
            let sv = t_grid.iter().map(|&t| series.eval(t).re).collect();
            Ok(residual_report(t_grid, &quad, sv, (n as f64 + 1.0) / 2.0, tol))
        }
        Some(0) => Err(Error::LogPlane { k: 0 }),
        Some(k) => {
            let values: Vec<f64> = quad.iter().map(|q| q.value).collect();
            let (fitted, _) = fit_log_coefficient(t_grid, &values, k)?;
            let expected = log_coefficient(a, k);
            let pass = if expected == 0.0 {
                fitted.abs() < crate::asymptotics::LOG_NOISE_FLOOR
            } else {
                ((fitted - expected) / expected).abs() <= tol
            };
            let sv: Vec<f64> = t_grid.iter().map(|&t| expected * t.powi(k as i32) * t.ln()).collect();
            Ok(VerificationReport {
                t_grid: t_grid.to_vec(),
                quad_errors: quad.iter().map(|q| q.error_estimate).collect(),
                residuals: values.iter().zip(&sv).map(|(v, s)| v - s).collect(),
                quad_values: values,
                series_values: sv,
                fitted_exponent: f64::NAN,
                fitted_log_coeff: Some(fitted),
                predicted_exponent: k as f64,
                pass,
                tolerance_used: tol,
                below_floor: false,
                points_used: t_grid.len(),
            })
        }
    }
}

/// (Tφ)(x) = (4πt)^{−1/2} ∫₀^∞ e^{−(x+x̃)²/4t} φ(x̃) dx̃ for φ supported in
/// [δ, 1].
pub fn half_line_operator(phi: &DataFunction, x: f64, t: f64, delta: f64) -> Result<f64> {
    // absolute floor relative to the kernel peak, for x where Tφ changes sign
    let r = TanhSinh::new(1e-15 * gauss(x + delta, t))
        .with_rel_tol(1e-12)
        .integrate(
            |n| {
                let d = x + n.x;
                gauss(d, t) * phi.eval(n.x)
            },
            delta,
            1.0,
        )?;
    Ok(r.value)
}

/// ‖T(χ_{[δ,∞)}φ)‖_{L¹(0,∞)}.
pub fn half_line_l1(phi: &DataFunction, t: f64, delta: f64) -> Result<f64> {
    if !(t > 0.0 && (0.0..1.0).contains(&delta)) {
        return Err(Error::Domain(format!(
            "need t > 0 and 0 <= delta < 1, got t={t}, delta={delta}"
        )));
    }
    // beyond x = 40√t past the support the kernel is below e^{−400}
    let x_end = 40.0 * t.sqrt();
    let err = std::cell::RefCell::new(None);
    let value = |x: f64| match half_line_operator(phi, x, t, delta) {
        Ok(v) => v,
        Err(e) => {
            err.borrow_mut().get_or_insert(e);
            0.0
        }
    };
    // |Tφ| has a kink wherever Tφ changes sign
    let mut breaks = vec![0.0];
    breaks.extend(sign_changes(value, 0.0, x_end, 128));
    breaks.push(x_end);
    let quad = TanhSinh::new(1e-16).with_rel_tol(1e-10);
    let mut total = 0.0;
    for w in breaks.windows(2) {
        total += quad.integrate(|n| value(n.x).abs(), w[0], w[1])?.value;
    }
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    Ok(total)
}

/// ‖φ‖_{L¹(0,1)}, integrated panel by panel between the cutoff breakpoints.
pub fn l1_norm(phi: &DataFunction) -> Result<f64> {
    let mut breaks = vec![0.0];
    match phi {
        DataFunction::Power { cutoff, .. } => {
            breaks.extend(
                [cutoff.plateau_end(), cutoff.support_end()]
                    .into_iter()
                    .filter(|&x| x > 0.0 && x < 1.0),
            );
        }
        // |φ| has a kink at every sign change
        DataFunction::Polynomial(_) => breaks.extend(sign_changes(|x| phi.eval(x), 0.0, 1.0, 256)),
    }
    breaks.push(1.0);
    let quad = TanhSinh::new(1e-13).with_rel_tol(1e-12);
    let mut total = 0.0;
    for w in breaks.windows(2) {
        total += quad.integrate(|n| phi.eval(n.x).abs(), w[0], w[1])?.value;
    }
    Ok(total)
}

/// Roots of sign changes of f on [lo, hi], located on a uniform sample grid
/// and refined by bisection.
fn sign_changes(f: impl Fn(f64) -> f64, lo: f64, hi: f64, samples: usize) -> Vec<f64> {
    let h = (hi - lo) / samples as f64;
    let mut out = Vec::new();
    let mut prev = f(lo);
    for i in 1..=samples {
        let (mut l, mut r) = (lo + (i - 1) as f64 * h, lo + i as f64 * h);
        let next = f(r);
        if prev * next < 0.0 {
            let fl = prev;
            for _ in 0..60 {
                let mid = 0.5 * (l + r);
                if f(mid) * fl > 0.0 {
                    l = mid;
                } else {
                    r = mid;
                }
            }
            out.push(0.5 * (l + r));
        }
        prev = next;
    }
    out
}
