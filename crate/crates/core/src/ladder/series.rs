use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::Zero;

use super::poly::RationalPoly;
use super::ratfn::RationalFunction;

/// Truncated power series in w = η − 1 with coefficients rational in (a, b).
/// Holds the coefficients of w^0 ..= w^order.
#[derive(Clone, Debug, PartialEq)]
pub struct FormalSeries {
    coeffs: Vec<RationalFunction>,
}

impl FormalSeries {
    pub fn from_coeffs(coeffs: Vec<RationalFunction>) -> Self {
        assert!(!coeffs.is_empty());
        Self { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Self {
            coeffs: vec![RationalFunction::zero(); order + 1],
        }
    }

    pub fn constant(c: RationalFunction, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = c;
        s
    }

    /// (1 + w)^c, whose k-th coefficient is c(c−1)…(c−k+1)/k!.
    pub fn binomial(c: &RationalPoly, order: usize) -> Self {
        let mut coeffs = Vec::with_capacity(order + 1);
        let mut cur = RationalPoly::int(1);
        coeffs.push(RationalFunction::poly(cur.clone()));
        for k in 1..=order {
            let factor = c - &RationalPoly::int(k as i64 - 1);
            cur = (&cur * &factor).scale(&BigRational::new(BigInt::from(1), BigInt::from(k)));
            coeffs.push(RationalFunction::poly(cur.clone()));
        }
        Self { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> &RationalFunction {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[RationalFunction] {
        &self.coeffs
    }

    pub fn truncate(&self, order: usize) -> Self {
        Self {
            coeffs: self.coeffs[..=order.min(self.order())].to_vec(),
        }
    }

    pub fn scale(&self, c: &RationalFunction) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    /// Index of the first coefficient that is not identically zero.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    /// Divides by w²; Err(k) names the first nonzero coefficient among w^0, w^1.
    pub fn div_w2(&self) -> Result<Self, usize> {
        for k in 0..2.min(self.coeffs.len()) {
            if !self.coeffs[k].is_zero() {
                return Err(k);
            }
        }
        assert!(self.order() >= 2, "series too short to divide by w^2");
        Ok(Self {
            coeffs: self.coeffs[2..].to_vec(),
        })
    }

    /// Divides every coefficient numerator by `p`; Err(k) names the first
    /// coefficient whose numerator is not divisible.
    pub fn div_poly_exact(&self, p: &RationalPoly) -> Result<Self, usize> {
        let mut out = Vec::with_capacity(self.coeffs.len());
        for (k, c) in self.coeffs.iter().enumerate() {
            let q = c.num.exact_div(p).ok_or(k)?;
            out.push(RationalFunction::new(q, c.den.clone()));
        }
        Ok(Self { coeffs: out })
    }

    pub fn eval_f64(&self, a: f64, b: f64, w: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * w + c.eval_f64(a, b))
    }

    pub fn eval_complex(&self, a: Complex<f64>, b: Complex<f64>, w: Complex<f64>) -> Complex<f64> {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex::zero(), |acc, c| acc * w + c.eval_complex(a, b))
    }
}

impl<'a> Add<&'a FormalSeries> for &'a FormalSeries {
    type Output = FormalSeries;
    fn add(self, rhs: &FormalSeries) -> FormalSeries {
        let n = self.coeffs.len().min(rhs.coeffs.len());
        FormalSeries {
            coeffs: (0..n).map(|k| &self.coeffs[k] + &rhs.coeffs[k]).collect(),
        }
    }
}

impl<'a> Sub<&'a FormalSeries> for &'a FormalSeries {
    type Output = FormalSeries;
    fn sub(self, rhs: &FormalSeries) -> FormalSeries {
        let n = self.coeffs.len().min(rhs.coeffs.len());
        FormalSeries {
            coeffs: (0..n).map(|k| &self.coeffs[k] - &rhs.coeffs[k]).collect(),
        }
    }
}

impl<'a> Mul<&'a FormalSeries> for &'a FormalSeries {
    type Output = FormalSeries;
    fn mul(self, rhs: &FormalSeries) -> FormalSeries {
        let n = self.coeffs.len().min(rhs.coeffs.len());
        let mut coeffs = vec![RationalFunction::zero(); n];
        for i in 0..n {
            if self.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..n - i {
                coeffs[i + j] = &coeffs[i + j] + &(&self.coeffs[i] * &rhs.coeffs[j]);
            }
        }
        FormalSeries { coeffs }
    }
}

impl Neg for &FormalSeries {
    type Output = FormalSeries;
    fn neg(self) -> FormalSeries {
        FormalSeries {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}
