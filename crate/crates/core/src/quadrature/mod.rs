//! Singular integrals of the interval problem: the heat content h_{a,b}(t),
//! its cut-off variant, the quadrant correction and the regularized
//! half-line constants C_k(a, b).
//!
//! The double integrals are reduced with x̃ = ηx, which turns the Gaussian
//! into e^{−c x²} with c = (1 ∓ η)²/4t. Without cut-offs the x-integral is the
//! incomplete moment `gaussian_moment`, leaving a single endpoint-singular
//! integral in η.

mod cutoff;
mod tanh_sinh;

pub use cutoff::{CutoffSpec, DataFunction};
pub use tanh_sinh::{Node, QuadResult, TanhSinh};

use crate::coefficients::{bc_correction_coefficient, require_region, ParamPair};
use crate::error::{Error, Result};
use crate::ladder::{sigma_table, GEvaluator};
use crate::special_fn::{gamma_real, gaussian_moment};
use crate::Complex;

pub const DEFAULT_TOL: f64 = 1e-11;
pub const T_MIN: f64 = 1e-7;
pub const T_MAX: f64 = 1.0;

// e^{−700} is below every tolerance in use
const GAUSS_NEGLIGIBLE: f64 = 700.0;

/// Heat kernel of the line, (4πt)^{−1/2} e^{−(x−x̃)²/4t}.
pub fn kernel_line(x: f64, xt: f64, t: f64) -> f64 {
    let d = x - xt;
    (-d * d / (4.0 * t)).exp() / (4.0 * std::f64::consts::PI * t).sqrt()
}

fn check_inputs(p: &ParamPair, t: f64) -> Result<(f64, f64)> {
    let (a, b) = p.real_parts()?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("need t > 0, got {t}")));
    }
    Ok((a, b))
}

fn check_t_range(t: f64) -> Result<()> {
    if !(T_MIN..=T_MAX).contains(&t) {
        return Err(Error::Domain(format!("t must lie in [{T_MIN:e}, {T_MAX}], got {t:e}")));
    }
    Ok(())
}

fn combine(parts: &[QuadResult], scale: f64) -> QuadResult {
    QuadResult {
        value: scale * parts.iter().map(|r| r.value).sum::<f64>(),
        error_estimate: scale * parts.iter().map(|r| r.error_estimate).sum::<f64>(),
        nodes_used: parts.iter().map(|r| r.nodes_used).sum(),
    }
}

/// Integrates f(η, 1 − η) over [0, 1] with a break at 1 − w, where the
/// Gaussian ridge lives in the last piece.
fn eta_integral<F>(quad: &TanhSinh<f64>, w: f64, mut f: F) -> Result<[QuadResult; 2]>
where
    F: FnMut(f64, f64) -> f64,
{
    let brk = 1.0 - w;
    let left = quad.integrate(|n| f(n.x, 1.0 - n.x), 0.0, brk)?;
    let right = quad.integrate(|n| f(n.x, n.from_right), brk, 1.0)?;
    Ok([left, right])
}

fn ridge_width(t: f64) -> f64 {
    (12.0 * t.sqrt()).min(0.5)
}

/// h_{a,b}(t) = (4πt)^{−1/2} ∫₀¹∫₀¹ e^{−(x−x̃)²/4t} x^{−a} x̃^{−b}, optionally with
/// cut-offs (Ξ₁, Ξ₂) multiplying x^{−a} and x̃^{−b}.
pub fn heat_content_interval(
    p: &ParamPair,
    t: f64,
    cutoffs: Option<(CutoffSpec, CutoffSpec)>,
    tol: f64,
) -> Result<QuadResult> {
    let (a, b) = check_inputs(p, t)?;
    check_t_range(t)?;
    let pref = 1.0 / (4.0 * std::f64::consts::PI * t).sqrt();
    let s2 = (2.0 - a - b) / 2.0;
    let (xi1, xi2) = cutoffs.unwrap_or((CutoffSpec::None, CutoffSpec::None));
    let plateau = xi1.plateau_end().min(xi2.plateau_end()).min(1.0);
    let outer = TanhSinh::new(0.5 * tol / pref);

    if plateau >= 1.0 {
        let parts = eta_integral(&outer, ridge_width(t), |eta, d| {
            (eta.powf(-a) + eta.powf(-b)) * gaussian_moment(s2, d * d / (4.0 * t))
        })?;
        return Ok(combine(&parts, pref));
    }

    let support = xi1.support_end().max(xi2.support_end()).min(1.0);
    // the inner integral is normalised by η^{−a} + η^{−b}, whose η-integral is
    // `eta_mass`, so a uniform inner error e costs at most pref·eta_mass·e
    let eta_mass = 1.0 / (1.0 - a) + 1.0 / (1.0 - b);
    let inner = TanhSinh::new(0.05 * tol / (pref * eta_mass)).with_rel_tol(1e-14);
    let mut inner_err: Option<Error> = None;
    let mut inner_bound = 0.0f64;
    let parts = eta_integral(&outer, ridge_width(t), |eta, d| {
        let c = d * d / (4.0 * t);
        let (ea, eb) = (eta.powf(-a), eta.powf(-b));
        let norm = ea + eb;
        let (wa, wb) = (ea / norm, eb / norm);
        let mut v = norm * plateau.powf(2.0 * s2) * gaussian_moment(s2, c * plateau * plateau);
        if c * plateau * plateau < GAUSS_NEGLIGIBLE {
            let r = inner.integrate(
                |n| {
                    let x = n.x;
                    x.powf(1.0 - a - b)
                        * (-c * x * x).exp()
                        * (wb * xi1.eval(x) * xi2.eval(eta * x) + wa * xi2.eval(x) * xi1.eval(eta * x))
                },
                plateau,
                support,
            );
            match r {
                Ok(r) => {
                    v += norm * r.value;
                    inner_bound = inner_bound.max(r.error_estimate);
                }
                Err(e) => {
                    inner_err.get_or_insert(e);
                }
            }
        }
        v
    })?;
    if let Some(e) = inner_err {
        return Err(e);
    }
    let mut out = combine(&parts, pref);
    out.error_estimate += pref * eta_mass * inner_bound;
    if out.error_estimate > tol {
        return Err(Error::MaxRefinement {
            tol,
            levels: outer.max_levels,
            estimate: out.error_estimate,
        });
    }
    Ok(out)
}

/// β̃(a,b;t) = (4πt)^{−1/2} ∫₀¹∫₀¹ e^{−(x+x̃)²/4t} x^{−a} x̃^{−b}, the image of the
/// corner at 0 under reflection.
pub fn quadrant_correction(p: &ParamPair, t: f64) -> Result<QuadResult> {
    quadrant_correction_tol(p, t, DEFAULT_TOL)
}

pub fn quadrant_correction_tol(p: &ParamPair, t: f64, tol: f64) -> Result<QuadResult> {
    let (a, b) = check_inputs(p, t)?;
    let pref = 1.0 / (4.0 * std::f64::consts::PI * t).sqrt();
    let s2 = (2.0 - a - b) / 2.0;
    let r = TanhSinh::new(tol / pref).integrate(
        |n| {
            let q = 1.0 + n.x;
            (n.x.powf(-a) + n.x.powf(-b)) * gaussian_moment(s2, q * q / (4.0 * t))
        },
        0.0,
        1.0,
    )?;
    Ok(combine(&[r], pref))
}

/// π^{−1/2} 2^{−s} Γ((2−s)/2), the prefactor shared by C_k and the corner coefficients.
fn corner_prefactor(s: f64) -> Result<f64> {
    Ok(gamma_real((2.0 - s) / 2.0)? * 2f64.powf(-s) / std::f64::consts::PI.sqrt())
}

/// C_k(a,b) = π^{−1/2} 2^{−a−b} Γ((2−a−b)/2) ∫₀¹ G_k(η) (1−η)^{a+b−2} dη for
/// real (a, b) ∈ O_k.
pub fn c_k_integral(k: i32, p: &ParamPair) -> Result<QuadResult> {
    require_region(k, p)?;
    let (a, b) = p.real_parts()?;
    let s = a + b;
    let g = GEvaluator::new(k, p)?;
    // the leading term c(1−η)^n integrates in closed form; near the strip
    // edges its weight (1−η)^{n+s−2} is too close to non-integrable for DE nodes
    let (order, c0) = g.leading_term();
    let mut r = TanhSinh::new(1e-13).with_rel_tol(1e-13).integrate(
        |n| g.eval_weighted_tail(n.x, n.from_right, s - 2.0),
        0.0,
        1.0,
    )?;
    r.value += c0 / (order as f64 + s - 1.0);
    Ok(combine(&[r], corner_prefactor(s)?))
}

/// Corner coefficient c(a+b+ℓ, −ℓ) = (−1)^{ℓ+1} Q(a+b+ℓ, −ℓ) of a subtracted
/// homogeneous term x^{−a−b−ℓ} x̃^ℓ.
fn subtracted_term_coefficient(s: f64, l: usize) -> Result<f64> {
    let lf = l as f64;
    let q = corner_prefactor(s)? * gamma_real(1.0 - s - lf)? * gamma_real(1.0 + lf)? / gamma_real(2.0 - s)?;
    Ok(if l.is_multiple_of(2) { -q } else { q })
}

/// c(a,b) reconstructed from the O_k regularization: C_k plus the corner
/// coefficients of the subtracted terms σ_{k,ℓ}(x^{−a−b−ℓ}x̃^ℓ + x^ℓx̃^{−a−b−ℓ}).
/// Agrees with `c_boundary` and with the k+1 reconstruction on overlaps.
pub fn c_k_reconstructed(k: i32, p: &ParamPair) -> Result<QuadResult> {
    let mut r = c_k_integral(k, p)?;
    if k >= 0 {
        let (a, b) = p.real_parts()?;
        let sigma = sigma_table(k as usize)?.eval(a, b);
        for (l, sg) in sigma.iter().enumerate() {
            r.value += sg * subtracted_term_coefficient(a + b, l)?;
        }
    }
    Ok(r)
}

/// Leading small-t coefficient of the quadrant correction, for comparison with fits.
pub fn quadrant_leading(p: &ParamPair, t: f64) -> Result<f64> {
    let q: Complex = bc_correction_coefficient(p)?;
    Ok(q.re * t.powf((1.0 - p.s().re) / 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::c_boundary;
    use approx::assert_relative_eq;

    fn pr(a: f64, b: f64) -> ParamPair {
        ParamPair::real(a, b).unwrap()
    }

    #[test]
    fn kernel_examples() {
        assert_relative_eq!(
            kernel_line(0.0, 0.0, 1.0 / (4.0 * std::f64::consts::PI)),
            1.0,
            max_relative = 1e-15
        );
        let r = TanhSinh::new(1e-13)
            .integrate(|n| kernel_line(n.x, 0.0, 0.3) + kernel_line(-n.x, 0.0, 0.3), 0.0, 20.0)
            .unwrap();
        assert_relative_eq!(r.value, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn constant_data() {
        for &t in &[1e-4, 1e-2, 1e-6] {
            let h = heat_content_interval(&pr(0.0, 0.0), t, None, DEFAULT_TOL).unwrap();
            let expect = 1.0 - 2.0 * (t / std::f64::consts::PI).sqrt();
            assert!((h.value - expect).abs() < 1e-10, "t={t}: {} vs {expect}", h.value);
            assert!(h.error_estimate <= DEFAULT_TOL);
        }
    }

    #[test]
    fn symmetric_in_parameters() {
        let h1 = heat_content_interval(&pr(0.3, -0.4), 1e-3, None, DEFAULT_TOL).unwrap();
        let h2 = heat_content_interval(&pr(-0.4, 0.3), 1e-3, None, DEFAULT_TOL).unwrap();
        assert!((h1.value - h2.value).abs() < 1e-12);
    }

    #[test]
    fn cutoff_route_matches_plain_route_for_wide_plateau() {
        // plateau covering [0,1] reduces to the plain integral
        let xi = CutoffSpec::smooth_step(0.999, 1.5).unwrap();
        let c = heat_content_interval(&pr(0.3, 0.2), 1e-3, Some((xi, xi)), DEFAULT_TOL).unwrap();
        let plain = heat_content_interval(&pr(0.3, 0.2), 1e-3, None, DEFAULT_TOL).unwrap();
        assert!((c.value - plain.value).abs() < 1e-10);
    }

    #[test]
    fn quadrant_constant_data() {
        let t = 1e-2;
        let r = quadrant_correction(&pr(0.0, 0.0), t).unwrap();
        let exact = (t / std::f64::consts::PI).sqrt();
        assert!((r.value - exact).abs() < (-1.0 / (5.0 * t)).exp());
    }

    #[test]
    fn half_line_constant_k_minus_one() {
        let p = pr(0.8, 0.7);
        let c = c_k_integral(-1, &p).unwrap();
        assert!((c.value - c_boundary(&p).unwrap().re).abs() < 1e-8);
    }

    #[test]
    fn overlap_reconstruction() {
        for &(a, b, k) in &[(-0.2, -0.3, 0), (-1.5, -0.8, 1)] {
            let p = pr(a, b);
            let lo = c_k_reconstructed(k, &p).unwrap().value;
            let hi = c_k_reconstructed(k + 1, &p).unwrap().value;
            let exact = c_boundary(&p).unwrap().re;
            assert!((lo - hi).abs() < 1e-8, "({a},{b}): {lo} vs {hi}");
            assert!((lo - exact).abs() < 1e-8, "({a},{b}): {lo} vs {exact}");
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            heat_content_interval(&pr(0.0, 0.0), 0.0, None, DEFAULT_TOL),
            Err(Error::Domain(_))
        ));
        assert!(matches!(c_k_integral(1, &pr(0.3, 0.4)), Err(Error::Region { .. })));
    }
}
