//! Closed-form coefficients of the small-time expansion of the interval heat
//! content with data x^{-a}, x^{-b}.

use std::ops::{Add, Mul};

use num_traits::One;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ladder::poly::RationalPoly;
use crate::quadrature::{CutoffSpec, TanhSinh};
use crate::special_fn::{cos_pi_c, digamma_real, gamma, sin_pi_c};
use crate::Complex;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

/// Distance to a log plane (or excluded hyperplane) treated as lying on it.
pub const PLANE_TOL: f64 = 1e-12;

/// Exponent pair (a, b) with Re(a) < 1 and Re(b) < 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ParamPair {
    pub a: Complex,
    pub b: Complex,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RegionKind {
    InO,
    LogPlane(u32),
    Invalid,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RegionTag {
    pub kind: RegionKind,
    /// Every k in −1..=3 with (a, b) in the strip O_k.
    pub sub_regions: Vec<i32>,
}

impl ParamPair {
    pub fn new(a: Complex, b: Complex) -> Result<Self> {
        if !(a.re < 1.0 && b.re < 1.0) || !(a.is_finite() && b.is_finite()) {
            return Err(Error::Domain(format!("need Re(a) < 1 and Re(b) < 1, got a={a}, b={b}")));
        }
        Ok(Self { a, b })
    }

    pub fn real(a: f64, b: f64) -> Result<Self> {
        Self::new(Complex::new(a, 0.0), Complex::new(b, 0.0))
    }

    pub fn s(&self) -> Complex {
        self.a + self.b
    }

    pub fn is_real(&self) -> bool {
        self.a.im == 0.0 && self.b.im == 0.0
    }

    /// Real parts, or a domain error for complex parameters.
    pub fn real_parts(&self) -> Result<(f64, f64)> {
        if !self.is_real() {
            return Err(Error::Domain("real exponents required".into()));
        }
        Ok((self.a.re, self.b.re))
    }

    pub fn swapped(&self) -> Self {
        Self { a: self.b, b: self.a }
    }

    /// k ≥ 0 with a + b = 1 − 2k (within PLANE_TOL), for real pairs.
    pub fn log_plane(&self) -> Option<u32> {
        if !self.is_real() {
            return None;
        }
        odd_plane(self.s())
    }

    pub fn classify(&self) -> RegionTag {
        let sub_regions = (-1..=3).filter(|&k| in_region(k, self)).collect();
        let kind = if let Some(k) = self.log_plane() {
            RegionKind::LogPlane(k)
        } else if odd_plane(self.s()).is_some() {
            RegionKind::Invalid
        } else {
            RegionKind::InO
        };
        RegionTag { kind, sub_regions }
    }

    pub fn require_off_log_plane(&self) -> Result<()> {
        match odd_plane(self.s()) {
            Some(k) => Err(Error::LogPlane { k }),
            None => Ok(()),
        }
    }
}

// k with s = 1 − 2k, k ≥ 0
fn odd_plane(s: Complex) -> Option<u32> {
    if s.im.abs() > PLANE_TOL {
        return None;
    }
    let k = ((1.0 - s.re) / 2.0).round();
    if k >= 0.0 && (s.re - (1.0 - 2.0 * k)).abs() < PLANE_TOL {
        Some(k as u32)
    } else {
        None
    }
}

/// Strip bounds and excluded integer values of a + b for O_k, k = −1..=3.
pub fn region_strip(k: i32) -> Option<(f64, f64, &'static [i32])> {
    match k {
        -1 => Some((1.0, 2.0, &[])),
        0 => Some((-1.0, 1.0, &[])),
        1 => Some((-3.0, 0.0, &[-1])),
        2 => Some((-5.0, -1.0, &[-1, -2, -3])),
        3 => Some((-7.0, -2.0, &[-1, -2, -3, -4, -5])),
        _ => None,
    }
}

pub fn in_region(k: i32, p: &ParamPair) -> bool {
    let Some((lo, hi, excluded)) = region_strip(k) else {
        return false;
    };
    let s = p.s();
    if !(s.re > lo && s.re < hi) {
        return false;
    }
    excluded
        .iter()
        .all(|&j| (s - Complex::new(j as f64, 0.0)).norm() > PLANE_TOL)
}

pub fn require_region(k: i32, p: &ParamPair) -> Result<()> {
    if in_region(k, p) {
        return Ok(());
    }
    let reason = match region_strip(k) {
        None => format!("k={k} outside -1..=3"),
        Some((lo, hi, ex)) => format!("need {lo} < Re(a+b) < {hi}, a+b not in {ex:?}; a+b = {}", p.s()),
    };
    Err(Error::Region { k, reason })
}

/// Rising factorial θ_n(a) = a(a+1)…(a+n−1), θ_0 = 1, over any commutative ring.
pub fn theta<R>(n: usize, a: &R) -> R
where
    R: Clone + One + Add<Output = R> + Mul<Output = R>,
{
    let mut out = R::one();
    let mut cur = a.clone();
    for _ in 0..n {
        out = out * cur.clone();
        cur = cur + R::one();
    }
    out
}

fn c(re: f64) -> Complex {
    Complex::new(re, 0.0)
}

/// Coefficient of t^{(1−a−b)/2} in the quadrant correction:
/// 2^{−a−b} π^{−1/2} Γ((2−a−b)/2) Γ(1−a) Γ(1−b) / Γ(2−a−b).
pub fn bc_correction_coefficient(p: &ParamPair) -> Result<Complex> {
    let s = p.s();
    if s.re >= 2.0 {
        return Err(Error::Domain(format!("need Re(a+b) < 2, got {s}")));
    }
    let one = c(1.0);
    let two = c(2.0);
    let num = gamma((two - s) / 2.0)? * gamma(one - p.a)? * gamma(one - p.b)?;
    let den = gamma(two - s)?;
    Ok(two.powc(-s) * FRAC_1_SQRT_PI * num / den)
}

/// c(a,b), the coefficient of t^{(1−a−b)/2}, in the form
/// −Q(a,b) cos(π(a−b)/2) / cos(π(a+b)/2) with Q the quadrant coefficient.
/// Finite through a+b = 0, −2, −4, …; poles only on the log planes.
pub fn c_boundary(p: &ParamPair) -> Result<Complex> {
    p.require_off_log_plane()?;
    let q = bc_correction_coefficient(p)?;
    Ok(-q * cos_pi_c((p.a - p.b) / 2.0) / cos_pi_c(p.s() / 2.0))
}

/// c(a,b) evaluated literally as
/// 2^{−a−b} π^{−1/2} Γ((2−a−b)/2) Γ(a+b−1) (Γ(1−a)/Γ(b) + Γ(1−b)/Γ(a)).
/// Fails at the removable points where Γ(a), Γ(b) or Γ(a+b−1) hit poles.
pub fn c_boundary_displayed(p: &ParamPair) -> Result<Complex> {
    let s = p.s();
    let one = c(1.0);
    let two = c(2.0);
    let pre = two.powc(-s) * FRAC_1_SQRT_PI * gamma((two - s) / 2.0)? * gamma(s - one)?;
    let sum = gamma(one - p.a)? / gamma(p.b)? + gamma(one - p.b)? / gamma(p.a)?;
    Ok(pre * sum)
}

// 2^{n−1} Γ((1+n)/2) / (√π n!)
fn c_n_prefactor(n: usize) -> f64 {
    let m = n / 2;
    let m_fact: f64 = (1..=m).map(|k| k as f64).product();
    if n.is_multiple_of(2) {
        0.5 / m_fact
    } else {
        let n_fact: f64 = (1..=n).map(|k| k as f64).product();
        4f64.powi(m as i32) * m_fact * FRAC_1_SQRT_PI / n_fact
    }
}

/// Distance to the odd pole a+b = 1−n below which c_n uses exact division.
pub const EXACT_DIVISION_BAND: f64 = 1e-6;

/// c_n(a,b) = (θ_n(a)+θ_n(b)) 2^{n−1} Γ((1+n)/2) / (√π (1−a−b−n) n!).
pub fn c_n(n: usize, p: &ParamPair) -> Result<Complex> {
    let s = p.s();
    let denom = c(1.0 - n as f64) - s;
    if n.is_multiple_of(2) {
        if denom.norm() < PLANE_TOL {
            return Err(Error::LogPlane { k: (n / 2) as u32 });
        }
        let num = theta(n, &p.a) + theta(n, &p.b);
        return Ok(num * c_n_prefactor(n) / denom);
    }
    if denom.norm() < EXACT_DIVISION_BAND {
        // θ_n(a) + θ_n(b) vanishes on a+b = 1−n for odd n; divide it out exactly.
        let quotient = odd_quotient(n)?;
        return Ok(quotient.eval_complex(p.a, p.b) * c_n_prefactor(n));
    }
    let num = theta(n, &p.a) + theta(n, &p.b);
    Ok(num * c_n_prefactor(n) / denom)
}

/// (θ_n(a) + θ_n(b)) / (1 − n − a − b) as an exact polynomial, for odd n.
pub fn odd_quotient(n: usize) -> Result<RationalPoly> {
    let num = theta(n, &RationalPoly::a()) + theta(n, &RationalPoly::b());
    let den = RationalPoly::int(1 - n as i64) - RationalPoly::a() - RationalPoly::b();
    num.exact_div(&den).ok_or_else(|| Error::DivisionNotExact {
        step: format!("theta_{n}(a)+theta_{n}(b) by (1-{n}-a-b)"),
        order: n,
        coefficient: "remainder nonzero".into(),
    })
}

// u / sin(πu/2), analytic at u = 0
fn u_over_sin(u: Complex) -> Complex {
    let x = u * (std::f64::consts::PI / 2.0);
    if x.norm() < 1e-4 {
        let x2 = x * x;
        let inv_sinc = c(1.0) + x2 / 6.0 + x2 * x2 * (7.0 / 360.0);
        return inv_sinc * (2.0 / std::f64::consts::PI);
    }
    u / sin_pi_c(u / 2.0)
}

/// 𝒳(a,b) = (1−a−b) c(a,b), extended across a+b = 1 where it equals −1.
pub fn x_fn(p: &ParamPair) -> Result<Complex> {
    let s = p.s();
    if let Some(k) = odd_plane(s) {
        if k >= 1 {
            return Err(Error::LogPlane { k });
        }
    }
    let q = bc_correction_coefficient(p)?;
    Ok(-q * cos_pi_c((p.a - p.b) / 2.0) * u_over_sin(c(1.0) - s))
}

/// 𝒴(a) = ∂_δ 𝒳(a+δ, 1−a) at δ = 0, for 0 < a < 1.
///
/// Since 𝒳(a, 1−a) = −1, 𝒴 is minus the logarithmic derivative of the product
/// 2^{−s}π^{−1/2}Γ((2−s)/2)Γ(1−a−δ)Γ(a)/Γ(2−s) · cos(π(a−b)/2) · u/sin(πu/2),
/// whose last factor is even in u = −δ.
pub fn y_fn(a: f64) -> Result<f64> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::Domain(format!("y_fn needs 0 < a < 1, got {a}")));
    }
    let pi = std::f64::consts::PI;
    let d_log_q = -std::f64::consts::LN_2 - 0.5 * digamma_real(0.5)? - digamma_real(1.0 - a)? + digamma_real(1.0)?;
    let d_log_cos = 0.5 * pi * crate::special_fn::cos_pi(a) / crate::special_fn::sin_pi(a);
    Ok(-(d_log_q + d_log_cos))
}

/// Coefficient of t^k log t on the log plane a+b = 1−2k: −θ_{2k}(a) / (2·k!).
pub fn log_coefficient(a: f64, k: u32) -> f64 {
    let k_fact: f64 = (1..=k).map(|i| i as f64).product();
    -theta(2 * k as usize, &a) / (2.0 * k_fact)
}

/// Constant term β₀ of the cut-off heat content on a + b = 1:
/// ½log ε² + ½γ + log(√2−1) + 2 log 2 + ∫_ε^{1/2} Ξ₁Ξ₂/x dx + ½∫₀¹ q-integrand.
pub fn beta0_theorem12(a: f64, b: f64, epsilon: f64, xi1: CutoffSpec, xi2: CutoffSpec) -> Result<f64> {
    if (a + b - 1.0).abs() > PLANE_TOL {
        return Err(Error::Domain(format!("beta0 needs a+b = 1, got {}", a + b)));
    }
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::Domain(format!("beta0 needs 0 < a < 1, got {a}")));
    }
    for xi in [xi1, xi2] {
        if !(xi.support_end() < 0.5) {
            return Err(Error::Domain(
                "cut-offs must vanish on a neighbourhood of [1/2, 1]".into(),
            ));
        }
    }
    let plateau = xi1.plateau_end().min(xi2.plateau_end());
    if !(epsilon > 0.0 && epsilon < plateau) {
        return Err(Error::Domain(format!(
            "need 0 < epsilon < {plateau} (cut-off plateau), got {epsilon}"
        )));
    }
    let quad = TanhSinh::new(1e-14).with_rel_tol(1e-14);
    let support = xi1.support_end().min(xi2.support_end());
    let taper = quad
        .integrate(|n| xi1.eval(n.x) * xi2.eval(n.x) / n.x, plateau, support)?
        .value;
    let head = quad.integrate(|n| 1.0 / n.x, epsilon, plateau)?.value;
    let cut_integral = head + taper;

    let q_integral = quad
        .integrate(
            |n| {
                let q = n.x;
                let lp = q.ln_1p();
                let lm = n.from_right.ln();
                let v = ((a - 1.0) * lp - a * lm).exp() + ((a - 1.0) * lm - a * lp).exp() - 2.0 / (1.0 + q * q).sqrt();
                v / q
            },
            0.0,
            1.0,
        )?
        .value;

    let closed =
        epsilon.ln() + 0.5 * EULER_GAMMA + (std::f64::consts::SQRT_2 - 1.0).ln() + 2.0 * std::f64::consts::LN_2;
    Ok(closed + cut_integral + 0.5 * q_integral)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pr(a: f64, b: f64) -> ParamPair {
        ParamPair::real(a, b).unwrap()
    }

    #[test]
    fn theta_examples() {
        assert_eq!(theta(0, &0.7), 1.0);
        assert_eq!(theta(3, &2.0), 24.0);
        assert_eq!(theta(2, &-1.0), 0.0);
    }

    #[test]
    fn boundary_coefficient_examples() {
        let v = c_boundary(&pr(0.0, 0.0)).unwrap();
        assert_relative_eq!(v.re, -FRAC_1_SQRT_PI, max_relative = 1e-14);
        let direct = c_boundary_displayed(&pr(0.8, 0.7)).unwrap();
        let stable = c_boundary(&pr(0.8, 0.7)).unwrap();
        assert!((direct - stable).norm() < 1e-12 * direct.norm());
        assert!(matches!(c_boundary(&pr(0.5, 0.5)), Err(Error::LogPlane { k: 0 })));
        assert!(matches!(c_boundary(&pr(-0.3, -0.7)), Err(Error::LogPlane { k: 1 })));
    }

    #[test]
    fn removable_point_matches_neighbour_average() {
        let at = c_boundary(&pr(0.25, -2.25)).unwrap();
        let lo = c_boundary_displayed(&pr(0.25 - 1e-6, -2.25)).unwrap();
        let hi = c_boundary_displayed(&pr(0.25 + 1e-6, -2.25)).unwrap();
        assert!((at - (lo + hi) / 2.0).norm() < 1e-6);
    }

    #[test]
    fn quadrant_coefficient_examples() {
        assert_relative_eq!(
            bc_correction_coefficient(&pr(0.0, 0.0)).unwrap().re,
            FRAC_1_SQRT_PI,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            bc_correction_coefficient(&pr(0.5, 0.5)).unwrap().re,
            std::f64::consts::FRAC_PI_2,
            max_relative = 1e-14
        );
    }

    #[test]
    fn c_n_examples() {
        let p = pr(0.3, 0.4);
        assert_relative_eq!(c_n(0, &p).unwrap().re, 1.0 / 0.3, max_relative = 1e-14);
        assert_relative_eq!(c_n(1, &p).unwrap().re, -FRAC_1_SQRT_PI, max_relative = 1e-14);
        assert_eq!(c_n(2, &pr(0.0, 0.0)).unwrap().norm(), 0.0);
        assert!(matches!(c_n(2, &pr(-0.5, -0.5)), Err(Error::LogPlane { k: 1 })));
    }

    #[test]
    fn odd_pole_uses_exact_division() {
        // a+b = −2 is the pole of c_3; the limit is smooth across it
        let on = c_n(3, &pr(0.3, -2.3)).unwrap();
        let near = c_n(3, &pr(0.3, -2.3 + 1e-4)).unwrap();
        assert!((on - near).norm() < 1e-3);
        assert!(on.is_finite());
    }

    #[test]
    fn x_and_y() {
        assert_relative_eq!(x_fn(&pr(0.3, 0.7)).unwrap().re, -1.0, max_relative = 1e-13);
        let p = pr(0.8, 0.7);
        let expect = c_boundary(&p).unwrap() * (1.0 - 1.5);
        assert!((x_fn(&p).unwrap() - expect).norm() < 1e-13 * expect.norm());
        let d = 1e-5;
        let fd = (x_fn(&pr(0.5 + d, 0.5)).unwrap().re - x_fn(&pr(0.5 - d, 0.5)).unwrap().re) / (2.0 * d);
        assert!((fd - y_fn(0.5).unwrap()).abs() < 1e-7);
        // symmetric closed form γ/2 + (ψ(a) + ψ(1−a))/2
        for &a in &[0.1, 0.37, 0.5, 0.8] {
            let sym = 0.5 * EULER_GAMMA + 0.5 * (digamma_real(a).unwrap() + digamma_real(1.0 - a).unwrap());
            assert_relative_eq!(y_fn(a).unwrap(), sym, max_relative = 1e-12);
        }
    }

    #[test]
    fn log_coefficient_examples() {
        assert_eq!(log_coefficient(0.3, 0), -0.5);
        assert_eq!(log_coefficient(-1.0, 1), 0.0);
        assert_relative_eq!(log_coefficient(0.5, 1), -0.375);
        assert_relative_eq!(log_coefficient(-0.3, 1), 0.105, max_relative = 1e-14);
    }

    #[test]
    fn region_tags() {
        let t = pr(-0.2, -0.3).classify();
        assert_eq!(t.kind, RegionKind::InO);
        assert_eq!(t.sub_regions, vec![0, 1]);
        assert_eq!(pr(0.5, 0.5).classify().kind, RegionKind::LogPlane(0));
        assert_eq!(pr(-1.0, 0.0).classify().kind, RegionKind::LogPlane(1));
        let cx = ParamPair::new(Complex::new(-0.5, 0.2), Complex::new(-0.5, -0.2)).unwrap();
        assert_eq!(cx.classify().kind, RegionKind::Invalid);
        assert!(ParamPair::real(1.0, 0.0).is_err());
        assert_eq!(pr(-1.5, -0.8).classify().sub_regions, vec![1, 2, 3]);
    }
}
