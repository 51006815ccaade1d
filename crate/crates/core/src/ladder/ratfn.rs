use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::poly::RationalPoly;

/// Quotient of two polynomials in (a, b). Not kept in lowest terms; equality
/// is decided by cross multiplication.
#[derive(Clone, Debug)]
pub struct RationalFunction {
    pub num: RationalPoly,
    pub den: RationalPoly,
}

impl RationalFunction {
    pub fn new(num: RationalPoly, den: RationalPoly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let mut r = Self { num, den };
        r.normalize_constant();
        r
    }

    pub fn poly(p: RationalPoly) -> Self {
        Self {
            num: p,
            den: RationalPoly::int(1),
        }
    }

    pub fn constant(c: BigRational) -> Self {
        Self::poly(RationalPoly::constant(c))
    }

    pub fn zero() -> Self {
        Self::poly(RationalPoly::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.as_constant().is_some()
    }

    // fold a constant denominator into the numerator
    fn normalize_constant(&mut self) {
        if let Some(c) = self.den.as_constant() {
            if !c.is_one() {
                self.num = self.num.scale(&c.recip());
                self.den = RationalPoly::int(1);
            }
        }
        if self.num.is_zero() {
            self.den = RationalPoly::int(1);
        }
    }

    /// Cancels `factor` from numerator and denominator as often as it divides both.
    pub fn cancel(&mut self, factor: &RationalPoly) {
        while let (Some(n), Some(d)) = (self.num.exact_div(factor), self.den.exact_div(factor)) {
            if self.num.is_zero() {
                break;
            }
            self.num = n;
            self.den = d;
        }
        self.normalize_constant();
    }

    pub fn recip(&self) -> Self {
        Self::new(self.den.clone(), self.num.clone())
    }

    pub fn equals(&self, other: &Self) -> bool {
        (&self.num * &other.den) == (&other.num * &self.den)
    }

    pub fn eval_f64(&self, a: f64, b: f64) -> f64 {
        self.num.eval_f64(a, b) / self.den.eval_f64(a, b)
    }

    pub fn eval_complex(&self, a: Complex<f64>, b: Complex<f64>) -> Complex<f64> {
        self.num.eval_complex(a, b) / self.den.eval_complex(a, b)
    }
}

impl PartialEq for RationalFunction {
    fn eq(&self, other: &Self) -> bool {
        self.equals(other)
    }
}

impl<'a> Add<&'a RationalFunction> for &'a RationalFunction {
    type Output = RationalFunction;
    fn add(self, rhs: &RationalFunction) -> RationalFunction {
        if self.den == rhs.den {
            return RationalFunction::new(&self.num + &rhs.num, self.den.clone());
        }
        RationalFunction::new(&(&self.num * &rhs.den) + &(&rhs.num * &self.den), &self.den * &rhs.den)
    }
}

impl<'a> Sub<&'a RationalFunction> for &'a RationalFunction {
    type Output = RationalFunction;
    fn sub(self, rhs: &RationalFunction) -> RationalFunction {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a RationalFunction> for &'a RationalFunction {
    type Output = RationalFunction;
    fn mul(self, rhs: &RationalFunction) -> RationalFunction {
        RationalFunction::new(&self.num * &rhs.num, &self.den * &rhs.den)
    }
}

impl<'a> Div<&'a RationalFunction> for &'a RationalFunction {
    type Output = RationalFunction;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: &RationalFunction) -> RationalFunction {
        self * &rhs.recip()
    }
}

impl Neg for &RationalFunction {
    type Output = RationalFunction;
    fn neg(self) -> RationalFunction {
        RationalFunction {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_polynomial() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}

impl Zero for RationalFunction {
    fn zero() -> Self {
        RationalFunction::zero()
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

impl Add for RationalFunction {
    type Output = RationalFunction;
    fn add(self, rhs: Self) -> Self {
        &self + &rhs
    }
}
