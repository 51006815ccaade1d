//! Exact regularization ladder: the A/B/…/H and X_j series in w = η − 1,
//! certified divisions, and the subtraction coefficients σ_{k,ℓ}.
//!
//! G_k(η) = η^{−a} + η^{−b} − Σ_ℓ σ_{k,ℓ} A_ℓ(η), with A_ℓ(η) = η^{−a−b−ℓ} + η^ℓ,
//! vanishes to order 2k+2 at η = 1. (G_{−1} is η^{−a} + η^{−b}; a printed
//! variant with η^{−a} twice is a misprint.)

pub mod poly;
pub mod ratfn;
pub mod series;

use std::sync::OnceLock;

use serde_json::json;

use crate::coefficients::{region_strip, require_region, ParamPair};
use crate::error::{Error, Result};
use poly::{rat, RationalPoly};
use ratfn::RationalFunction;
use series::FormalSeries;

/// Default truncation order; enough to certify G_3 = O(w^8) with slack.
pub const DEFAULT_ORDER: usize = 18;

/// Number of ladder levels (B through H).
pub const LEVELS: usize = 7;

/// One certified division step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub step: String,
    /// Numerator coefficients of w^0 and w^1 are identically zero.
    pub vanishes_to_w1: bool,
    /// Every numerator coefficient is divisible by the step's polynomial factor.
    pub factor_divides: bool,
}

impl Certificate {
    pub fn passed(&self) -> bool {
        self.vanishes_to_w1 && self.factor_divides
    }
}

#[derive(Clone, Debug)]
pub struct Ladder {
    pub order: usize,
    /// A_0 ..= A_7
    pub a_fns: Vec<FormalSeries>,
    /// levels[r-1][i] is the level-r function with index i (B = level 1, …, H = level 7)
    pub levels: Vec<Vec<FormalSeries>>,
    /// X_0 ..= X_7
    pub x_fns: Vec<FormalSeries>,
    /// η^{−a} + η^{−b}
    pub target: FormalSeries,
    pub certificates: Vec<Certificate>,
}

fn s_poly() -> RationalPoly {
    &RationalPoly::a() + &RationalPoly::b()
}

/// Level multiplier 4r − 2 (2, 6, 10, … for B, C, D, …).
fn level_multiplier(r: usize) -> i64 {
    4 * r as i64 - 2
}

/// Factor −2i − r − a − b dividing the level-r step with index i.
fn level_factor(r: usize, i: usize) -> RationalPoly {
    &RationalPoly::int(-(2 * i as i64) - r as i64) - &s_poly()
}

/// (2j+1)(2j+2) for the X_j step.
fn x_multiplier(j: usize) -> i64 {
    (2 * j as i64 + 1) * (2 * j as i64 + 2)
}

/// −j² − j(a+b) − ab = −(j+a)(j+b) for the X_j step.
fn x_factor(j: usize) -> RationalPoly {
    let j = j as i64;
    let ab = &RationalPoly::a() * &RationalPoly::b();
    &(&RationalPoly::int(-j * j) - &s_poly().scale(&rat(j, 1))) - &ab
}

fn level_name(r: usize) -> char {
    (b'A' + r as u8) as char
}

/// num / (factor · w²) with both divisibility claims certified exactly.
fn certified_step(
    step: String,
    num: &FormalSeries,
    factor: &RationalPoly,
    certificates: &mut Vec<Certificate>,
) -> Result<FormalSeries> {
    let shifted = num.div_w2();
    let vanishes = shifted.is_ok();
    let divided = shifted.as_ref().ok().map(|s| s.div_poly_exact(factor));
    let divides = matches!(divided, Some(Ok(_)));
    certificates.push(Certificate {
        step: step.clone(),
        vanishes_to_w1: vanishes,
        factor_divides: divides,
    });
    match (shifted, divided) {
        (Err(k), _) => Err(Error::DivisionNotExact {
            step,
            order: k,
            coefficient: num.coeff(k).to_string(),
        }),
        (Ok(s), Some(Err(k))) => Err(Error::DivisionNotExact {
            step: format!("{step} (factor {factor})"),
            order: k + 2,
            coefficient: s.coeff(k).to_string(),
        }),
        (Ok(_), Some(Ok(q))) => Ok(q),
        (Ok(_), None) => unreachable!(),
    }
}

/// Builds every ladder function to order T and certifies each division.
pub fn build_ladder(order: usize) -> Result<Ladder> {
    if order < DEFAULT_ORDER {
        return Err(Error::Domain(format!(
            "ladder needs order >= {DEFAULT_ORDER}, got {order}"
        )));
    }
    let s = s_poly();
    let a_fns: Vec<FormalSeries> = (0..=LEVELS)
        .map(|i| {
            let neg = -&(&s + &RationalPoly::int(i as i64));
            &FormalSeries::binomial(&neg, order) + &FormalSeries::binomial(&RationalPoly::int(i as i64), order)
        })
        .collect();
    let target =
        &FormalSeries::binomial(&-&RationalPoly::a(), order) + &FormalSeries::binomial(&-&RationalPoly::b(), order);

    let mut certificates = Vec::new();
    let mut levels: Vec<Vec<FormalSeries>> = Vec::with_capacity(LEVELS);
    for r in 1..=LEVELS {
        let prev: &[FormalSeries] = if r == 1 { &a_fns } else { &levels[r - 2] };
        let mut cur = Vec::with_capacity(prev.len() - 1);
        for i in 0..prev.len() - 1 {
            let num = (&prev[i] - &prev[i + 1]).scale(&RationalFunction::constant(rat(level_multiplier(r), 1)));
            let step = format!("{}_{i}", level_name(r));
            cur.push(certified_step(step, &num, &level_factor(r, i), &mut certificates)?);
        }
        levels.push(cur);
    }

    let mut x_fns = Vec::with_capacity(LEVELS + 1);
    let ab = &RationalPoly::a() * &RationalPoly::b();
    x_fns.push(certified_step(
        "X_0".into(),
        &(&a_fns[0] - &target),
        &ab,
        &mut certificates,
    )?);
    let half = RationalFunction::constant(rat(1, 2));
    for j in 1..=LEVELS {
        let diff = &x_fns[j - 1] - &levels[j - 1][0].scale(&half);
        let num = diff.scale(&RationalFunction::constant(rat(x_multiplier(j), 1)));
        x_fns.push(certified_step(format!("X_{j}"), &num, &x_factor(j), &mut certificates)?);
    }

    Ok(Ladder {
        order,
        a_fns,
        levels,
        x_fns,
        target,
        certificates,
    })
}

/// The default ladder, built once and shared.
pub fn default_ladder() -> Result<&'static Ladder> {
    static LADDER: OnceLock<Result<Ladder>> = OnceLock::new();
    LADDER
        .get_or_init(|| build_ladder(DEFAULT_ORDER))
        .as_ref()
        .map_err(Clone::clone)
}

/// Polynomial with f64 coefficients for fast repeated evaluation.
#[derive(Clone, Debug)]
struct NumericPoly(Vec<(i32, i32, f64)>);

impl NumericPoly {
    fn from(p: &RationalPoly) -> Self {
        NumericPoly(
            p.terms()
                .map(|((i, j), c)| (*i as i32, *j as i32, poly::to_f64(c)))
                .collect(),
        )
    }

    fn eval(&self, a: f64, b: f64) -> f64 {
        self.0.iter().map(|(i, j, c)| c * a.powi(*i) * b.powi(*j)).sum()
    }
}

#[derive(Clone, Debug)]
pub struct SigmaTable {
    pub k: usize,
    /// σ_{k,0} ..= σ_{k,k}
    pub entries: Vec<RationalFunction>,
    /// Integers j ≥ 1 with multiplicity such that the common denominator is
    /// const · Π (a + b + j)^m.
    pub denominator_factors: Vec<(i64, u32)>,
    /// The solve route agrees with the chain expansion.
    pub chain_agrees: bool,
    numeric: Vec<(NumericPoly, NumericPoly)>,
}

// Bareiss fraction-free determinant over Q[a, b].
fn bareiss_det(mut m: Vec<Vec<RationalPoly>>) -> Result<RationalPoly> {
    let n = m.len();
    let mut sign = 1i64;
    let mut prev = RationalPoly::int(1);
    for k in 0..n {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(k, i);
                    sign = -sign;
                }
                None => return Ok(RationalPoly::zero()),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &(&m[i][j] * &m[k][k]) - &(&m[i][k] * &m[k][j]);
                m[i][j] = num.exact_div(&prev).ok_or_else(|| Error::DivisionNotExact {
                    step: format!("Bareiss elimination, pivot {k}"),
                    order: k,
                    coefficient: num.to_string(),
                })?;
            }
        }
        prev = m[k][k].clone();
    }
    Ok(m[n - 1][n - 1].scale(&rat(sign, 1)))
}

fn as_poly(r: &RationalFunction) -> RationalPoly {
    debug_assert!(r.is_polynomial());
    r.num.clone()
}

// candidates cancelled from σ numerators and denominators
fn cancellation_candidates(k: usize) -> Vec<RationalPoly> {
    let mut out = Vec::new();
    let s = s_poly();
    for j in 0..=(2 * k as i64 + 2) {
        out.push(&s + &RationalPoly::int(j));
        out.push(&RationalPoly::a() + &RationalPoly::int(j));
        out.push(&RationalPoly::b() + &RationalPoly::int(j));
    }
    out
}

impl Ladder {
    pub fn all_certified(&self) -> bool {
        self.certificates.iter().all(Certificate::passed)
    }

    /// σ_{k,ℓ} by Cramer's rule on the even w-orders 0, 2, …, 2k, with the
    /// residual certified through order 2k+1 and cross-checked against the chain.
    pub fn extract_sigma(&self, k: usize) -> Result<SigmaTable> {
        if k > 3 {
            return Err(Error::Domain(format!("sigma table available for k in 0..=3, got {k}")));
        }
        let n = k + 1;
        let matrix: Vec<Vec<RationalPoly>> = (0..n)
            .map(|m| (0..n).map(|l| as_poly(self.a_fns[l].coeff(2 * m))).collect())
            .collect();
        let rhs: Vec<RationalPoly> = (0..n).map(|m| as_poly(self.target.coeff(2 * m))).collect();
        let det = bareiss_det(matrix.clone())?;
        if det.is_zero() {
            return Err(Error::DivisionNotExact {
                step: format!("sigma system k={k}"),
                order: 0,
                coefficient: "singular matrix".into(),
            });
        }
        let mut numerators = Vec::with_capacity(n);
        for l in 0..n {
            let mut m = matrix.clone();
            for (row, r) in m.iter_mut().zip(rhs.iter()) {
                row[l] = r.clone();
            }
            numerators.push(bareiss_det(m)?);
        }

        // det·G_k = det·target − Σ num_ℓ A_ℓ must vanish through w^{2k+1}
        let mut scaled = self.target.scale(&RationalFunction::poly(det.clone()));
        for (l, num) in numerators.iter().enumerate() {
            scaled = &scaled - &self.a_fns[l].scale(&RationalFunction::poly(num.clone()));
        }
        if let Some(v) = scaled.valuation() {
            if v <= 2 * k + 1 {
                return Err(Error::DivisionNotExact {
                    step: format!("G_{k} residual"),
                    order: v,
                    coefficient: scaled.coeff(v).to_string(),
                });
            }
        }

        let candidates = cancellation_candidates(k);
        let entries: Vec<RationalFunction> = numerators
            .into_iter()
            .map(|num| {
                let mut r = RationalFunction::new(num, det.clone());
                for c in &candidates {
                    r.cancel(c);
                }
                r
            })
            .collect();

        let chain = self.chain_sigma(k);
        let chain_agrees = chain.iter().zip(entries.iter()).all(|(x, y)| x.equals(y));

        let denominator_factors = factor_denominator(&entries, k)?;
        let numeric = entries
            .iter()
            .map(|e| (NumericPoly::from(&e.num), NumericPoly::from(&e.den)))
            .collect();
        Ok(SigmaTable {
            k,
            entries,
            denominator_factors,
            chain_agrees,
            numeric,
        })
    }

    /// σ_k read off the chain f = A_0 − ab w² X_0,
    /// X_{j−1} = ½L^{(j)}_0 + (q_j / m_j) w² X_j, with
    /// w^{2r} L^{(r)}_i expanded back into A_i … A_{i+r}.
    pub fn chain_sigma(&self, k: usize) -> Vec<RationalFunction> {
        let n = k + 1;
        let zero_vec = || vec![RationalFunction::zero(); n + LEVELS + 1];
        // expansions[i] = coefficient vector of w^{2r} L^{(r)}_i over A_0, A_1, …
        let mut expansions: Vec<Vec<RationalFunction>> = (0..=LEVELS)
            .map(|i| {
                let mut v = zero_vec();
                v[i] = RationalFunction::constant(rat(1, 1));
                v
            })
            .collect();
        let ab = RationalFunction::poly(&RationalPoly::a() * &RationalPoly::b());
        let mut sigma = zero_vec();
        sigma[0] = RationalFunction::constant(rat(1, 1));
        let mut prod = RationalFunction::constant(rat(1, 1));
        for r in 1..=k {
            let next: Vec<Vec<RationalFunction>> = (0..expansions.len() - 1)
                .map(|i| {
                    let coef = RationalFunction::new(RationalPoly::int(level_multiplier(r)), level_factor(r, i));
                    expansions[i]
                        .iter()
                        .zip(expansions[i + 1].iter())
                        .map(|(x, y)| &(x - y) * &coef)
                        .collect()
                })
                .collect();
            expansions = next;
            let weight = &(&ab * &prod) * &RationalFunction::constant(rat(1, 2));
            for (sl, el) in sigma.iter_mut().zip(expansions[0].iter()) {
                *sl = &*sl - &(&weight * el);
            }
            prod = &prod * &RationalFunction::new(x_factor(r), RationalPoly::int(x_multiplier(r)));
        }
        sigma.truncate(n);
        sigma
    }
}

// Splits the common denominator into (a+b+j)^m factors times a constant.
fn factor_denominator(entries: &[RationalFunction], k: usize) -> Result<Vec<(i64, u32)>> {
    let mut factors: Vec<(i64, u32)> = Vec::new();
    for e in entries {
        let mut den = e.den.clone();
        for j in 1..=(2 * k as i64 + 2) {
            let f = &s_poly() + &RationalPoly::int(j);
            let mut m = 0;
            while let Some(q) = den.exact_div(&f) {
                den = q;
                m += 1;
            }
            if m > 0 {
                match factors.iter_mut().find(|(jj, _)| *jj == j) {
                    Some(entry) => entry.1 = entry.1.max(m),
                    None => factors.push((j, m)),
                }
            }
        }
        if den.as_constant().is_none() {
            return Err(Error::DivisionNotExact {
                step: format!("denominator factorization k={k}"),
                order: 0,
                coefficient: den.to_string(),
            });
        }
    }
    factors.sort();
    Ok(factors)
}

impl SigmaTable {
    /// Every denominator root a+b = −j is excluded from O_k or lies outside its strip.
    pub fn poles_excluded(&self) -> bool {
        let Some((lo, hi, excluded)) = region_strip(self.k as i32) else {
            return false;
        };
        self.denominator_factors.iter().all(|(j, _)| {
            let root = -(*j as f64);
            !(root > lo && root < hi) || excluded.contains(&(-*j as i32))
        })
    }

    pub fn eval(&self, a: f64, b: f64) -> Vec<f64> {
        self.numeric.iter().map(|(n, d)| n.eval(a, b) / d.eval(a, b)).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.entries
                .iter()
                .enumerate()
                .map(|(l, e)| {
                    json!({
                        "k": self.k,
                        "l": l,
                        "numerator": e.num.to_json(),
                        "denominator": e.den.to_json(),
                    })
                })
                .collect(),
        )
    }

    /// Parses the output of `to_json` back into (ℓ, σ_{k,ℓ}) pairs.
    pub fn entries_from_json(v: &serde_json::Value) -> Option<Vec<(usize, RationalFunction)>> {
        v.as_array()?
            .iter()
            .map(|e| {
                let l = e.get("l")?.as_u64()? as usize;
                let num = RationalPoly::from_json(e.get("numerator")?)?;
                let den = RationalPoly::from_json(e.get("denominator")?)?;
                if den.is_zero() {
                    return None;
                }
                Some((l, RationalFunction::new(num, den)))
            })
            .collect()
    }
}

/// The σ table for k in 0..=3 from the shared ladder.
pub fn sigma_table(k: usize) -> Result<&'static SigmaTable> {
    static TABLES: OnceLock<Result<Vec<SigmaTable>>> = OnceLock::new();
    let tables = TABLES
        .get_or_init(|| {
            let ladder = default_ladder()?;
            (0..=3).map(|k| ladder.extract_sigma(k)).collect()
        })
        .as_ref()
        .map_err(Clone::clone)?;
    tables
        .get(k)
        .ok_or_else(|| Error::Domain(format!("sigma table available for k in 0..=3, got {k}")))
}

/// Taylor coefficients g_n of G_k at η = 1 (in powers of w = η − 1) for n ≤ n_max;
/// those below 2k+2 are exactly zero by the ladder certificate.
fn g_taylor(k: usize, a: f64, b: f64, sigma: &[f64], n_max: usize) -> Vec<f64> {
    let s = a + b;
    let mut exps: Vec<(f64, f64)> = vec![(-a, 1.0), (-b, 1.0)];
    for (l, sg) in sigma.iter().enumerate() {
        exps.push((-s - l as f64, -sg));
        exps.push((l as f64, -sg));
    }
    let mut binom: Vec<f64> = vec![1.0; exps.len()];
    let mut out = vec![0.0; n_max + 1];
    for (n, slot) in out.iter_mut().enumerate() {
        if n > 0 {
            for (bn, (c, _)) in binom.iter_mut().zip(exps.iter()) {
                *bn *= (c - (n as f64 - 1.0)) / n as f64;
            }
        }
        if n >= 2 * k + 2 {
            *slot = binom.iter().zip(exps.iter()).map(|(bn, (_, w))| bn * w).sum();
        }
    }
    out
}

/// Below this distance 1 − η, G_k is summed from its Taylor series at η = 1.
const SERIES_RADIUS: f64 = 0.5;
const SERIES_TERMS: usize = 110;

/// Evaluator for G_k(η; a, b) at fixed real (a, b) ∈ O_k.
#[derive(Clone, Debug)]
pub struct GEvaluator {
    k: i32,
    a: f64,
    b: f64,
    sigma: Vec<f64>,
    taylor: Vec<f64>,
}

impl GEvaluator {
    pub fn new(k: i32, p: &ParamPair) -> Result<Self> {
        require_region(k, p)?;
        let (a, b) = p.real_parts()?;
        if k < 0 {
            return Ok(Self {
                k,
                a,
                b,
                sigma: Vec::new(),
                taylor: Vec::new(),
            });
        }
        let sigma = sigma_table(k as usize)?.eval(a, b);
        let taylor = g_taylor(k as usize, a, b, &sigma, SERIES_TERMS + 2 * k as usize + 2);
        Ok(Self { k, a, b, sigma, taylor })
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// G_k at η = 1 − d, with d = 1 − η supplied directly for accuracy near η = 1.
    pub fn eval_from_right(&self, eta: f64, d: f64) -> f64 {
        let (a, b) = (self.a, self.b);
        if self.k >= 0 && d <= SERIES_RADIUS {
            let w = -d;
            return self.taylor.iter().rev().fold(0.0, |acc, c| acc * w + c);
        }
        let ln = eta.ln();
        let mut v = (-a * ln).exp() + (-b * ln).exp();
        let s = a + b;
        for (l, sg) in self.sigma.iter().enumerate() {
            let l = l as f64;
            v -= sg * (((-s - l) * ln).exp() + (l * ln).exp());
        }
        v
    }

    pub fn eval(&self, eta: f64) -> f64 {
        self.eval_from_right(eta, 1.0 - eta)
    }

    /// G_k(η)·d^p with d = 1 − η, keeping d^{2k+2} together with d^p so that
    /// the product stays finite as d → 0.
    pub fn eval_weighted(&self, eta: f64, d: f64, p: f64) -> f64 {
        if self.k >= 0 && d <= SERIES_RADIUS {
            let order = 2 * self.k as usize + 2;
            let w = -d;
            let reduced = self.taylor[order..].iter().rev().fold(0.0, |acc, c| acc * w + c);
            return reduced * d.powf(p + order as f64);
        }
        self.eval_from_right(eta, d) * d.powf(p)
    }

    /// Order n and coefficient c of the leading term c(1−η)^n of G_k at η = 1
    /// (for k = −1 the constant G_{−1}(1) = 2).
    pub fn leading_term(&self) -> (usize, f64) {
        if self.k < 0 {
            return (0, 2.0);
        }
        let order = 2 * self.k as usize + 2;
        (order, self.taylor[order])
    }

    /// (G_k(η) − c(1−η)^n)·d^p with c(1−η)^n from `leading_term`.
    pub fn eval_weighted_tail(&self, eta: f64, d: f64, p: f64) -> f64 {
        let (order, c0) = self.leading_term();
        if self.k < 0 {
            let ln = if d < 0.5 { (-d).ln_1p() } else { eta.ln() };
            return ((-self.a * ln).exp_m1() + (-self.b * ln).exp_m1()) * d.powf(p);
        }
        if d <= SERIES_RADIUS {
            let w = -d;
            let reduced = self.taylor[order + 1..].iter().rev().fold(0.0, |acc, c| acc * w + c);
            // w^{order+1} = −d^{order+1} for even order
            return -reduced * d.powf(p + order as f64 + 1.0);
        }
        (self.eval_from_right(eta, d) - c0 * d.powi(order as i32)) * d.powf(p)
    }

    /// The defining sum evaluated term by term, without the series switch.
    pub fn eval_direct(&self, eta: f64) -> f64 {
        let (a, b) = (self.a, self.b);
        let s = a + b;
        let mut v = eta.powf(-a) + eta.powf(-b);
        for (l, sg) in self.sigma.iter().enumerate() {
            v -= sg * (eta.powf(-s - l as f64) + eta.powi(l as i32));
        }
        v
    }

    /// Majorant C with |G_k(η)| ≤ C (1−η)^{2k+2} for 1 − η ≤ radius ≤ 1.
    pub fn taylor_majorant(&self, radius: f64) -> f64 {
        let start = 2 * self.k.max(0) as usize + 2;
        self.taylor
            .iter()
            .enumerate()
            .skip(start)
            .map(|(n, c)| c.abs() * radius.powi((n - start) as i32))
            .sum()
    }
}

/// G_k(η; a, b) for k in −1..=3.
pub fn eval_g(k: i32, eta: f64, p: &ParamPair) -> Result<f64> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::Domain(format!("eta must lie in (0, 1], got {eta}")));
    }
    Ok(GEvaluator::new(k, p)?.eval(eta))
}

/// F_k(x, x̃; a, b) = max(x,x̃)^{−a−b} G_k(min/max), symmetric in (x, x̃).
pub fn eval_f(k: i32, x: f64, xt: f64, p: &ParamPair) -> Result<f64> {
    if !(x > 0.0 && xt > 0.0) {
        return Err(Error::Domain("F_k needs x, xt > 0".into()));
    }
    let g = GEvaluator::new(k, p)?;
    let (hi, lo) = if x >= xt { (x, xt) } else { (xt, x) };
    let s = g.a + g.b;
    Ok(hi.powf(-s) * g.eval_from_right(lo / hi, (hi - lo) / hi))
}
