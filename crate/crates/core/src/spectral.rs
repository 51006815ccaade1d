//! Heat content on the circle of circumference 2π with [0, 1] embedded in
//! [−π, π): Fourier coefficients of power-type data, the spectral sum, the
//! coefficient identities and the comparison with the line.

use std::f64::consts::PI;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{DataFunction, TanhSinh};
use crate::Complex;

pub const DEFAULT_N_MAX: usize = 4096;

/// Smallest tail e^{−tN²}·max|γ(φ)|·max|γ(ρ)| accepted by the spectral sum.
pub const TRUNCATION_FLOOR: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Provenance {
    FromSamples,
    FromClosedForm,
}

/// γ_n = (2π)^{−1/2} ∫ f(x) e^{−inx} dx for |n| ≤ n_max.
#[derive(Clone, Debug, Serialize)]
pub struct FourierProfile {
    coeffs: Vec<Complex>,
    pub n_max: usize,
    pub provenance: Provenance,
}

impl FourierProfile {
    pub fn get(&self, n: i64) -> Complex {
        self.coeffs[(n + self.n_max as i64) as usize]
    }

    /// Coefficients ordered n = −n_max ..= n_max.
    pub fn coefficients(&self) -> &[Complex] {
        &self.coeffs
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// max_n |γ_{−n} − conj(γ_n)|
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let n = self.n_max as i64;
        (0..=n)
            .map(|k| (self.get(-k) - self.get(k).conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Σ|γ_n|² over the stored range.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Closed form for the indicator of [0, 1]: (1 − e^{−in}) / (in√(2π)).
    pub fn indicator(n_max: usize) -> Self {
        let norm = 1.0 / (2.0 * PI).sqrt();
        let coeffs = (-(n_max as i64)..=n_max as i64)
            .map(|n| {
                if n == 0 {
                    Complex::new(norm, 0.0)
                } else {
                    let nf = n as f64;
                    (Complex::new(1.0, 0.0) - Complex::new(0.0, -nf).exp()) / Complex::new(0.0, nf) * norm
                }
            })
            .collect();
        Self {
            coeffs,
            n_max,
            provenance: Provenance::FromClosedForm,
        }
    }

    /// Profile of f″ from that of f, γ_n(f″) = −n²γ_n(f), valid when f and f′ vanish at 0 and 1.
    pub fn second_derivative(&self) -> Self {
        let n = self.n_max as i64;
        Self {
            coeffs: (-n..=n).map(|k| self.get(k) * -((k * k) as f64)).collect(),
            n_max: self.n_max,
            provenance: self.provenance,
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|z| z * c).collect(),
            ..self.clone()
        }
    }
}

const GL_POINTS: usize = 20;

// Gauss-Legendre nodes and weights on [−1, 1] by Newton iteration on P_n.
fn gauss_legendre() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_POINTS;
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
        }
        out
    })
}

/// f = coef·x^p on [0, plateau] for power data.
fn leading_form(f: &DataFunction) -> Option<(f64, f64, f64)> {
    match f {
        DataFunction::Power {
            exponent: a,
            cutoff,
            order,
        } => {
            let coef = match order {
                0 => 1.0,
                1 => -a,
                _ => a * (a + 1.0),
            };
            Some((coef, f.singular_power(), cutoff.plateau_end().min(1.0)))
        }
        DataFunction::Polynomial(_) => None,
    }
}

fn support_end(f: &DataFunction) -> f64 {
    match f {
        DataFunction::Power { cutoff, .. } => cutoff.support_end().min(1.0),
        DataFunction::Polynomial(_) => 1.0,
    }
}

struct Panels {
    nodes: Vec<(f64, f64)>,
    /// (coef, p, x0) of the analytic piece on [0, x0]
    head: Option<(f64, f64, f64)>,
}

fn build_panels(f: &DataFunction, n_max: usize) -> Panels {
    let u = (2.0 * PI / n_max.max(1) as f64).min(0.05);
    let end = support_end(f);
    let mut breaks = Vec::new();
    let mut head = None;
    let mut graded_until = 0.0;
    if let Some((coef, p, plateau)) = leading_form(f) {
        let x0 = plateau.min(0.25 / n_max.max(1) as f64);
        head = Some((coef, p, x0));
        breaks.push(x0);
        graded_until = plateau;
    } else {
        breaks.push(0.0);
    }
    for b in [graded_until, end] {
        if b > breaks[breaks.len() - 1] && b <= end {
            breaks.push(b);
        }
    }
    let rule = gauss_legendre();
    let mut nodes = Vec::new();
    let mut push_panel = |lo: f64, hi: f64| {
        let (c, h) = ((lo + hi) / 2.0, (hi - lo) / 2.0);
        for &(x, w) in rule {
            nodes.push((c + h * x, h * w));
        }
    };
    for win in breaks.windows(2) {
        let (lo, hi) = (win[0], win[1]);
        let graded = head.is_some() && lo < graded_until && lo == breaks[0];
        let mut x = lo;
        while x < hi {
            let step = if graded { x.min(u) } else { u };
            let next = if hi - (x + step) < 0.25 * step { hi } else { x + step };
            push_panel(x, next);
            x = next;
        }
    }
    Panels { nodes, head }
}

/// γ_n for |n| ≤ n_max by composite Gauss-Legendre (20 nodes per panel) on
/// panels graded toward the x^p singularity at 0, plus the series
/// Σ_m (−in)^m x₀^{m+p+1} / (m!(m+p+1)) on [0, x₀].
pub fn fourier_coefficients(f: &DataFunction, n_max: usize) -> Result<FourierProfile> {
    f.check_integrable()?;
    let panels = build_panels(f, n_max);
    let values: Vec<(f64, f64, f64)> = panels.nodes.iter().map(|&(x, w)| (x, w, w * f.eval(x))).collect();
    let norm = 1.0 / (2.0 * PI).sqrt();
    let coeffs = (-(n_max as i64)..=n_max as i64)
        .into_par_iter()
        .map(|n| {
            let nf = n as f64;
            let mut acc = Complex::new(0.0, 0.0);
            for &(x, _, wf) in &values {
                let (s, c) = (nf * x).sin_cos();
                acc += Complex::new(wf * c, -wf * s);
            }
            if let Some((coef, p, x0)) = panels.head {
                let z = Complex::new(0.0, -nf * x0);
                let mut zm = Complex::new(1.0, 0.0);
                let mut fact = 1.0;
                let mut series = Complex::new(0.0, 0.0);
                for m in 0..60 {
                    if m > 0 {
                        zm *= z;
                        fact *= m as f64;
                    }
                    let term = zm / (fact * (m as f64 + p + 1.0));
                    series += term;
                    if term.norm() < 1e-18 * series.norm() {
                        break;
                    }
                }
                acc += series * coef * x0.powf(p + 1.0);
            }
            acc * norm
        })
        .collect();
    Ok(FourierProfile {
        coeffs,
        n_max,
        provenance: Provenance::FromSamples,
    })
}

/// N with e^{−tN²}·scale < TRUNCATION_FLOOR.
pub fn suggested_n_max(scale: f64, t: f64) -> usize {
    if scale <= TRUNCATION_FLOOR {
        return 1;
    }
    ((scale / TRUNCATION_FLOOR).ln() / t).sqrt().ceil() as usize
}

/// β(φ, ρ, D_{S¹})(t) = Σ_n e^{−tn²} γ_n(φ) γ_{−n}(ρ).
pub fn heat_content_circle(phi: &FourierProfile, rho: &FourierProfile, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("need t > 0, got {t}")));
    }
    let n = phi.n_max.min(rho.n_max);
    let scale = phi.max_abs() * rho.max_abs();
    let nf = n as f64;
    if (-t * nf * nf).exp() * scale >= TRUNCATION_FLOOR {
        return Err(Error::Truncation {
            n_max: n,
            suggested: suggested_n_max(scale, t),
        });
    }
    let n = n as i64;
    let mut sum = Complex::new(0.0, 0.0);
    for k in -n..=n {
        let kf = k as f64;
        sum += phi.get(k) * rho.get(-k) * (-t * kf * kf).exp();
    }
    if sum.im.abs() >= 1e-10 {
        return Err(Error::Domain(format!("spectral sum has imaginary part {:e}", sum.im)));
    }
    Ok(sum.re)
}

fn check_vanishing(f: &DataFunction, what: &str) -> Result<()> {
    let (l, r) = f.endpoint_values();
    if l.abs() > 1e-12 || r.abs() > 1e-12 {
        return Err(Error::Domain(format!(
            "{what} must vanish at 0 and 1, got {l:e}, {r:e}"
        )));
    }
    Ok(())
}

/// max_{|n| ≤ n_max} |γ_n(f′) − in·γ_n(f)| for f vanishing at both ends.
pub fn verify_derivative_identity(f: &DataFunction, n_max: usize) -> Result<f64> {
    check_vanishing(f, "f")?;
    let df = f.derivative()?;
    let g = fourier_coefficients(f, n_max)?;
    let dg = fourier_coefficients(&df, n_max)?;
    let n = n_max as i64;
    Ok((-n..=n)
        .map(|k| (dg.get(k) - Complex::new(0.0, k as f64) * g.get(k)).norm())
        .fold(0.0, f64::max))
}

/// Largest relative gap between β(φ″, ρ)(t) and the centred difference
/// (β(φ, ρ)(t+dt) − β(φ, ρ)(t−dt)) / 2dt over the grid, with γ(φ″) computed
/// from samples of φ″.
pub fn verify_time_derivative(
    phi: &DataFunction,
    rho: &DataFunction,
    t_grid: &[f64],
    dt: f64,
    n_max: usize,
) -> Result<f64> {
    check_vanishing(phi, "phi")?;
    let dphi = phi.derivative()?;
    check_vanishing(&dphi, "phi'")?;
    let d2phi = dphi.derivative()?;
    let gp = fourier_coefficients(phi, n_max)?;
    let gp2 = fourier_coefficients(&d2phi, n_max)?;
    let gr = fourier_coefficients(rho, n_max)?;
    let mut worst = 0.0f64;
    for &t in t_grid {
        if !(t > dt) {
            return Err(Error::Domain(format!("need t > dt, got t={t}, dt={dt}")));
        }
        let lhs = heat_content_circle(&gp2, &gr, t)?;
        let fd = (heat_content_circle(&gp, &gr, t + dt)? - heat_content_circle(&gp, &gr, t - dt)?) / (2.0 * dt);
        worst = worst.max((lhs - fd).abs() / lhs.abs().max(f64::MIN_POSITIVE));
    }
    Ok(worst)
}

const CIRCUMFERENCE: f64 = 2.0 * PI;
const WINDINGS: i32 = 3;

/// ln(β_circle − β_line) for nonnegative data on [0, 1], from the winding
/// terms Σ_{m≠0} ∫∫ G(x − x̃ + 2πm) φ(x) ρ(x̃) computed with the factor
/// e^{−(2π−1)²/4t} pulled out, so the result is meaningful far below the
/// resolution of either heat content.
pub fn circle_line_log_excess(phi: &DataFunction, rho: &DataFunction, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("need t > 0, got {t}")));
    }
    let gap = CIRCUMFERENCE - 1.0;
    let pref = 1.0 / (4.0 * PI * t).sqrt();
    let quad = TanhSinh::new(0.0).with_rel_tol(1e-11);
    let mut inner_err = None;
    let outer = quad.integrate(
        |nx| {
            let fx = phi.eval(nx.x);
            if fx == 0.0 {
                return 0.0;
            }
            let r = quad.integrate(
                |ny| {
                    let mut k = 0.0;
                    for m in (-WINDINGS..=WINDINGS).filter(|&m| m != 0) {
                        // distance to the winding image, written to keep x near 0 and x̃ near 1 accurate
                        let d = if m > 0 {
                            nx.from_left + ny.from_right + (m as f64 * CIRCUMFERENCE - 1.0)
                        } else {
                            nx.from_right + ny.from_left + (-m as f64 * CIRCUMFERENCE - 1.0)
                        };
                        k += (-(d - gap) * (d + gap) / (4.0 * t)).exp();
                    }
                    k * rho.eval(ny.x)
                },
                0.0,
                1.0,
            );
            match r {
                Ok(r) => fx * r.value,
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
    let scaled = pref * outer.value;
    if !(scaled > 0.0) {
        return Err(Error::Domain(
            "circle-line excess is not positive for these data".into(),
        ));
    }
    Ok(scaled.ln() - gap * gap / (4.0 * t))
}

/// ∫∫ G(x − x̃; t) φ(x) ρ(x̃) on the line by nested quadrature; for t large
/// enough that the kernel is broad (t ≥ 0.05).
pub fn heat_content_line_data(phi: &DataFunction, rho: &DataFunction, t: f64) -> Result<f64> {
    if t < 0.05 {
        return Err(Error::Domain(format!(
            "nested line quadrature needs t >= 0.05, got {t}"
        )));
    }
    let pref = 1.0 / (4.0 * PI * t).sqrt();
    let quad = TanhSinh::new(1e-15).with_rel_tol(1e-13);
    let mut inner_err = None;
    let r = quad.integrate(
        |nx| {
            let fx = phi.eval(nx.x);
            if fx == 0.0 {
                return 0.0;
            }
            match quad.integrate(
                |ny| {
                    let d = nx.x - ny.x;
                    (-d * d / (4.0 * t)).exp() * rho.eval(ny.x)
                },
                0.0,
                1.0,
            ) {
                Ok(r) => fx * r.value,
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
    Ok(pref * r.value)
}
