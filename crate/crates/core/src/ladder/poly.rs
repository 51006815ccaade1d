use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Polynomial in (a, b) with exact rational coefficients.
///
/// Terms are keyed by exponent pairs (i, j) for a^i b^j; zero coefficients are
/// never stored, so structural equality is polynomial equality.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct RationalPoly {
    terms: BTreeMap<(u32, u32), BigRational>,
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl RationalPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: BigRational) -> Self {
        let mut p = Self::zero();
        p.add_term((0, 0), c);
        p
    }

    pub fn int(c: i64) -> Self {
        Self::constant(BigRational::from_integer(BigInt::from(c)))
    }

    pub fn a() -> Self {
        Self::monomial(1, 0, BigRational::one())
    }

    pub fn b() -> Self {
        Self::monomial(0, 1, BigRational::one())
    }

    pub fn monomial(i: u32, j: u32, c: BigRational) -> Self {
        let mut p = Self::zero();
        p.add_term((i, j), c);
        p
    }

    /// c0 + ca·a + cb·b
    pub fn affine(c0: BigRational, ca: BigRational, cb: BigRational) -> Self {
        let mut p = Self::zero();
        p.add_term((0, 0), c0);
        p.add_term((1, 0), ca);
        p.add_term((0, 1), cb);
        p
    }

    pub fn from_terms<I: IntoIterator<Item = ((u32, u32), BigRational)>>(it: I) -> Self {
        let mut p = Self::zero();
        for (k, c) in it {
            p.add_term(k, c);
        }
        p
    }

    fn add_term(&mut self, key: (u32, u32), c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(key).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &BigRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The constant value if the polynomial has degree 0.
    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&(0, 0)).cloned(),
            _ => None,
        }
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|(i, j)| i + j).max().unwrap_or(0)
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(k, v)| (*k, v * c)).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::int(1);
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    // lexicographic leading term (largest a-degree, then b-degree)
    fn leading(&self) -> Option<((u32, u32), &BigRational)> {
        self.terms.iter().next_back().map(|(k, v)| (*k, v))
    }

    /// Exact quotient self / d, or None when d does not divide self.
    pub fn exact_div(&self, d: &RationalPoly) -> Option<RationalPoly> {
        let ((di, dj), dc) = d.leading()?;
        let dc = dc.clone();
        let mut rem = self.clone();
        let mut quot = RationalPoly::zero();
        while let Some(((ri, rj), rc)) = rem.leading() {
            if ri < di || rj < dj {
                return None;
            }
            let q = RationalPoly::monomial(ri - di, rj - dj, rc / &dc);
            rem = &rem - &(&q * d);
            quot = &quot + &q;
        }
        Some(quot)
    }

    pub fn eval_rational(&self, a: &BigRational, b: &BigRational) -> BigRational {
        let mut sum = BigRational::zero();
        for ((i, j), c) in &self.terms {
            sum += c * pow_rat(a, *i) * pow_rat(b, *j);
        }
        sum
    }

    pub fn eval_f64(&self, a: f64, b: f64) -> f64 {
        self.terms
            .iter()
            .map(|((i, j), c)| to_f64(c) * a.powi(*i as i32) * b.powi(*j as i32))
            .sum()
    }

    pub fn eval_complex(&self, a: Complex<f64>, b: Complex<f64>) -> Complex<f64> {
        self.terms
            .iter()
            .map(|((i, j), c)| a.powu(*i) * b.powu(*j) * to_f64(c))
            .sum()
    }

    /// Terms as [i, j, "p/q"] triples.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.terms
                .iter()
                .map(|((i, j), c)| serde_json::json!([i, j, c.to_string()]))
                .collect(),
        )
    }

    pub fn from_json(v: &serde_json::Value) -> Option<Self> {
        let mut p = Self::zero();
        for t in v.as_array()? {
            let t = t.as_array()?;
            let i = t.first()?.as_u64()? as u32;
            let j = t.get(1)?.as_u64()? as u32;
            let c: BigRational = t.get(2)?.as_str()?.parse().ok()?;
            p.add_term((i, j), c);
        }
        Some(p)
    }
}

pub fn to_f64(c: &BigRational) -> f64 {
    c.to_f64().unwrap_or_else(|| {
        // fall back through the integer parts when the ratio overflows intermediate conversion
        c.numer().to_f64().unwrap_or(f64::NAN) / c.denom().to_f64().unwrap_or(f64::NAN)
    })
}

fn pow_rat(x: &BigRational, n: u32) -> BigRational {
    let mut out = BigRational::one();
    for _ in 0..n {
        out *= x;
    }
    out
}

impl<'a> Add<&'a RationalPoly> for &'a RationalPoly {
    type Output = RationalPoly;
    fn add(self, rhs: &RationalPoly) -> RationalPoly {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(*k, c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a RationalPoly> for &'a RationalPoly {
    type Output = RationalPoly;
    fn sub(self, rhs: &RationalPoly) -> RationalPoly {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(*k, -c.clone());
        }
        out
    }
}

impl<'a> Mul<&'a RationalPoly> for &'a RationalPoly {
    type Output = RationalPoly;
    fn mul(self, rhs: &RationalPoly) -> RationalPoly {
        let mut out = RationalPoly::zero();
        for ((i1, j1), c1) in &self.terms {
            for ((i2, j2), c2) in &rhs.terms {
                out.add_term((i1 + i2, j1 + j2), c1 * c2);
            }
        }
        out
    }
}

impl Neg for &RationalPoly {
    type Output = RationalPoly;
    fn neg(self) -> RationalPoly {
        RationalPoly {
            terms: self.terms.iter().map(|(k, v)| (*k, -v.clone())).collect(),
        }
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for RationalPoly {
            type Output = RationalPoly;
            fn $m(self, rhs: RationalPoly) -> RationalPoly {
                (&self).$m(&rhs)
            }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul);

impl Neg for RationalPoly {
    type Output = RationalPoly;
    fn neg(self) -> RationalPoly {
        -&self
    }
}

impl Zero for RationalPoly {
    fn zero() -> Self {
        RationalPoly::zero()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for RationalPoly {
    fn one() -> Self {
        RationalPoly::int(1)
    }
}

impl fmt::Display for RationalPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for ((i, j), c) in self.terms.iter().rev() {
            let neg = c.is_negative();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let mag = c.abs();
            let mut parts = Vec::new();
            if !(mag.is_one() && (*i > 0 || *j > 0)) {
                parts.push(mag.to_string());
            }
            for (v, e) in [("a", *i), ("b", *j)] {
                match e {
                    0 => {}
                    1 => parts.push(v.to_string()),
                    _ => parts.push(format!("{v}^{e}")),
                }
            }
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_division_detects_remainders() {
        let s = &RationalPoly::a() + &RationalPoly::b();
        let one = RationalPoly::int(1);
        let f = &(&s + &one) * &(&s - &RationalPoly::int(3));
        assert_eq!(f.exact_div(&(&s + &one)).unwrap(), &s - &RationalPoly::int(3));
        assert!(f.exact_div(&(&s + &RationalPoly::int(2))).is_none());
        assert!(f.exact_div(&RationalPoly::a()).is_none());
    }

    #[test]
    fn display_is_readable() {
        let p = &(&RationalPoly::a() * &RationalPoly::b()) - &RationalPoly::constant(rat(1, 2));
        assert_eq!(p.to_string(), "a*b - 1/2");
    }

    #[test]
    fn json_round_trip() {
        let p = &RationalPoly::a().pow(3) - &RationalPoly::b().scale(&rat(-7, 3));
        assert_eq!(RationalPoly::from_json(&p.to_json()).unwrap(), p);
    }
}
