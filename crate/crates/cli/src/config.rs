use std::collections::HashMap;
use std::path::Path;
use std::str::FromStr;

use heatcontent::Complex;

use crate::Failure;

/// Values from a key=value file. Keys are the long flag names; `#` starts a
/// comment. Command-line flags take precedence over anything read here.
#[derive(Debug, Default)]
pub struct FileConfig {
    values: HashMap<String, String>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, Failure> {
        let mut values = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Failure::Config(format!(
                    "config line {}: expected key=value, got {raw:?}",
                    i + 1
                )));
            };
            values.insert(k.trim().replace('_', "-"), v.trim().to_string());
        }
        Ok(Self { values })
    }

    /// The flag value if given, else the file value, else None.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, Failure>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| Failure::Config(format!("config key {key}: cannot parse {v:?}: {e}"))),
        }
    }

    pub fn or<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, Failure>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.pick(flag, key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<T, Failure>
    where
        T::Err: std::fmt::Display,
    {
        self.pick(flag, key)?
            .ok_or_else(|| Failure::Config(format!("missing required value: {key}")))
    }
}

/// A real or complex exponent written "re", "re+imi", "re-imi" or "imi".
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Exponent(pub Complex);

impl FromStr for Exponent {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || format!("expected re[+imi], got {s:?}");
        let Some(body) = s.strip_suffix('i') else {
            return s.parse().map(|re| Exponent(Complex::new(re, 0.0))).map_err(|_| bad());
        };
        // the sign that separates the parts is the last one not following an exponent marker
        let split = body
            .char_indices()
            .skip(1)
            .filter(|&(i, c)| (c == '+' || c == '-') && !matches!(body.as_bytes()[i - 1], b'e' | b'E'))
            .map(|(i, _)| i)
            .last();
        let (re, im) = match split {
            Some(i) => (body[..i].parse().map_err(|_| bad())?, &body[i..]),
            None => (0.0, body),
        };
        let im = match im {
            "" | "+" => 1.0,
            "-" => -1.0,
            v => v.parse().map_err(|_| bad())?,
        };
        Ok(Exponent(Complex::new(re, im)))
    }
}

/// Grid of t values, log-spaced from t_max down to t_min.
#[derive(Clone, Copy, Debug)]
pub struct GridSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
}

pub const GRID_T_MIN: f64 = 1e-7;
pub const GRID_T_MAX: f64 = 1.0;

impl GridSpec {
    pub fn validate(&self) -> Result<(), Failure> {
        if self.points < 4 {
            return Err(Failure::Config(format!("points >= 4 required, got {}", self.points)));
        }
        if !(self.t_min >= GRID_T_MIN && self.t_max <= GRID_T_MAX && self.t_min < self.t_max) {
            return Err(Failure::Config(format!(
                "grid needs {GRID_T_MIN:e} <= t-min < t-max <= {GRID_T_MAX}, got [{:e}, {:e}]",
                self.t_min, self.t_max
            )));
        }
        Ok(())
    }

    pub fn build(&self) -> Result<Vec<f64>, Failure> {
        self.validate()?;
        Ok(heatcontent::asymptotics::log_grid(self.t_min, self.t_max, self.points)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponents() {
        let p = |s: &str| s.parse::<Exponent>().map(|e| (e.0.re, e.0.im));
        assert_eq!(p("0.3"), Ok((0.3, 0.0)));
        assert_eq!(p("-0.3"), Ok((-0.3, 0.0)));
        assert_eq!(p("0.3+0.2i"), Ok((0.3, 0.2)));
        assert_eq!(p("-0.3-2i"), Ok((-0.3, -2.0)));
        assert_eq!(p("1e-3-1e-2i"), Ok((1e-3, -1e-2)));
        assert_eq!(p("0.5i"), Ok((0.0, 0.5)));
        assert_eq!(p("2-i"), Ok((2.0, -1.0)));
        assert!(p("abc").is_err() && p("1+xi").is_err());
    }

    #[test]
    fn file_values_yield_to_flags() {
        let c = FileConfig::parse("# run\npoints = 7\nt_min=1e-4 # lower end\n").unwrap();
        assert_eq!(c.or(None, "points", 6usize).unwrap(), 7);
        assert_eq!(c.or(Some(5usize), "points", 6).unwrap(), 5);
        assert_eq!(c.pick::<f64>(None, "t-min").unwrap(), Some(1e-4));
        assert!(c.pick::<f64>(None, "tol").unwrap().is_none());
        assert!(FileConfig::parse("points 7").is_err());
        assert!(FileConfig::parse("points=x")
            .unwrap()
            .pick::<usize>(None, "points")
            .is_err());
    }
}
