use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smooth cut-off Ξ: 1 on [0, plateau_end], 0 on [support_end, ∞), C^∞ and
/// decreasing in between (built from e^{−1/s}).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum CutoffSpec {
    None,
    SmoothStep { plateau_end: f64, support_end: f64 },
}

impl Default for CutoffSpec {
    fn default() -> Self {
        CutoffSpec::SmoothStep {
            plateau_end: 1.0 / 3.0,
            support_end: 2.0 / 3.0,
        }
    }
}

impl CutoffSpec {
    pub fn smooth_step(plateau_end: f64, support_end: f64) -> Result<Self> {
        if !(plateau_end > 0.0 && support_end > plateau_end) {
            return Err(Error::Domain(format!(
                "cut-off needs 0 < plateau_end < support_end, got {plateau_end}, {support_end}"
            )));
        }
        Ok(CutoffSpec::SmoothStep {
            plateau_end,
            support_end,
        })
    }

    /// Right end of the region where Ξ ≡ 1 (∞ without cut-off).
    pub fn plateau_end(&self) -> f64 {
        match self {
            CutoffSpec::None => f64::INFINITY,
            CutoffSpec::SmoothStep { plateau_end, .. } => *plateau_end,
        }
    }

    /// Left end of the region where Ξ ≡ 0 (∞ without cut-off).
    pub fn support_end(&self) -> f64 {
        match self {
            CutoffSpec::None => f64::INFINITY,
            CutoffSpec::SmoothStep { support_end, .. } => *support_end,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.derivative(x, 0)
    }

    /// d^order Ξ / dx^order for order ≤ 2.
    pub fn derivative(&self, x: f64, order: u8) -> f64 {
        let (p, q) = match self {
            CutoffSpec::None => return if order == 0 { 1.0 } else { 0.0 },
            CutoffSpec::SmoothStep {
                plateau_end,
                support_end,
            } => (*plateau_end, *support_end),
        };
        if x <= p {
            return if order == 0 { 1.0 } else { 0.0 };
        }
        if x >= q {
            return 0.0;
        }
        let len = q - p;
        let u = (x - p) / len;
        let v = 1.0 - u;
        // Ξ = 1 / (1 + e^g) with g = 1/v − 1/u
        let g = 1.0 / v - 1.0 / u;
        let xi = if g > 0.0 {
            let e = (-g).exp();
            e / (1.0 + e)
        } else {
            1.0 / (1.0 + g.exp())
        };
        if order == 0 {
            return xi;
        }
        // Ξ(1 − Ξ) without cancellation
        let e = (-g.abs()).exp();
        let xi_c = e / ((1.0 + e) * (1.0 + e));
        let g1 = 1.0 / (u * u) + 1.0 / (v * v);
        let d1 = -xi_c * g1;
        if order == 1 {
            return d1 / len;
        }
        let g2 = -2.0 / (u * u * u) + 2.0 / (v * v * v);
        let d2 = -d1 * (1.0 - 2.0 * xi) * g1 - xi_c * g2;
        d2 / (len * len)
    }
}

/// Source function supported in [0, 1] for the spectral and image-kernel
/// checks: a derivative of x^{−a}Ξ(x), or a polynomial restricted to [0, 1].
#[derive(Clone, Debug, PartialEq)]
pub enum DataFunction {
    Power {
        exponent: f64,
        cutoff: CutoffSpec,
        order: u8,
    },
    Polynomial(Vec<f64>),
}

impl DataFunction {
    /// x^{−a}Ξ(x) on [0, 1].
    pub fn power(a: f64, cutoff: CutoffSpec) -> Self {
        DataFunction::Power {
            exponent: a,
            cutoff,
            order: 0,
        }
    }

    /// Indicator of [0, 1].
    pub fn indicator() -> Self {
        DataFunction::Polynomial(vec![1.0])
    }

    pub fn derivative(&self) -> Result<Self> {
        match self {
            DataFunction::Power {
                exponent,
                cutoff,
                order,
            } => {
                if *order >= 2 {
                    return Err(Error::Domain("only two derivatives of x^-a Xi are available".into()));
                }
                Ok(DataFunction::Power {
                    exponent: *exponent,
                    cutoff: *cutoff,
                    order: order + 1,
                })
            }
            DataFunction::Polynomial(c) => {
                let d: Vec<f64> = c.iter().enumerate().skip(1).map(|(k, v)| k as f64 * v).collect();
                Ok(DataFunction::Polynomial(if d.is_empty() { vec![0.0] } else { d }))
            }
        }
    }

    /// Leading power of x at 0 (the function behaves like x^p); L¹ needs p > −1.
    pub fn singular_power(&self) -> f64 {
        match self {
            DataFunction::Power { exponent, order, .. } => -exponent - *order as f64,
            DataFunction::Polynomial(_) => 0.0,
        }
    }

    pub fn check_integrable(&self) -> Result<()> {
        if self.singular_power() <= -1.0 {
            return Err(Error::Domain(format!(
                "source not in L1: behaves like x^{} at 0",
                self.singular_power()
            )));
        }
        Ok(())
    }

    /// Value at x; zero outside [0, 1].
    pub fn eval(&self, x: f64) -> f64 {
        if !(0.0..=1.0).contains(&x) {
            return 0.0;
        }
        match self {
            DataFunction::Polynomial(c) => c.iter().rev().fold(0.0, |acc, v| acc * x + v),
            DataFunction::Power {
                exponent: a,
                cutoff,
                order,
            } => {
                if x == 0.0 {
                    return 0.0;
                }
                let p = x.powf(-a);
                match order {
                    0 => p * cutoff.eval(x),
                    1 => -a * p / x * cutoff.eval(x) + p * cutoff.derivative(x, 1),
                    _ => {
                        a * (a + 1.0) * p / (x * x) * cutoff.eval(x) - 2.0 * a * p / x * cutoff.derivative(x, 1)
                            + p * cutoff.derivative(x, 2)
                    }
                }
            }
        }
    }

    /// Limits at 0⁺ and 1⁻.
    pub fn endpoint_values(&self) -> (f64, f64) {
        match self {
            DataFunction::Polynomial(c) => (c[0], c.iter().sum()),
            DataFunction::Power { .. } => {
                let p = self.singular_power();
                let left = if p > 0.0 {
                    0.0
                } else if p == 0.0 {
                    self.eval(f64::MIN_POSITIVE)
                } else {
                    f64::INFINITY
                };
                (left, self.eval(1.0))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_step_shape() {
        let c = CutoffSpec::default();
        assert_eq!(c.eval(0.2), 1.0);
        assert_eq!(c.eval(0.7), 0.0);
        assert!((c.eval(0.5) - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for i in 0..=100 {
            let v = c.eval(1.0 / 3.0 + i as f64 / 300.0);
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn smooth_step_derivatives_match_differences() {
        let c = CutoffSpec::smooth_step(0.1, 0.4).unwrap();
        let h = 1e-6;
        for &x in &[0.12, 0.2, 0.25, 0.33, 0.39] {
            let fd1 = (c.eval(x + h) - c.eval(x - h)) / (2.0 * h);
            assert!((fd1 - c.derivative(x, 1)).abs() < 1e-6 * (1.0 + fd1.abs()));
            let fd2 = (c.derivative(x + h, 1) - c.derivative(x - h, 1)) / (2.0 * h);
            assert!((fd2 - c.derivative(x, 2)).abs() < 1e-5 * (1.0 + fd2.abs()));
        }
    }

    #[test]
    fn power_derivatives_match_differences() {
        let f = DataFunction::power(-1.5, CutoffSpec::default());
        let d1 = f.derivative().unwrap();
        let d2 = d1.derivative().unwrap();
        let h = 1e-6;
        for &x in &[0.1, 0.4, 0.5, 0.6] {
            let fd = (f.eval(x + h) - f.eval(x - h)) / (2.0 * h);
            assert!((fd - d1.eval(x)).abs() < 1e-6);
            let fd = (d1.eval(x + h) - d1.eval(x - h)) / (2.0 * h);
            assert!((fd - d2.eval(x)).abs() < 1e-5);
        }
        assert_eq!(d2.singular_power(), -0.5);
    }
}
