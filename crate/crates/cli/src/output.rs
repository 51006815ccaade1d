use std::fmt::Write as _;

use clap::ValueEnum;
use heatcontent::asymptotics::VerificationReport;
use serde_json::{json, Value};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

/// 17 significant digits, enough to round-trip an f64.
pub fn num(x: f64) -> String {
    // no "-0" in reports
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

/// CSV rows of key,value pairs, or one JSON object.
pub struct Record {
    fields: Vec<(String, Value, String)>,
}

impl Record {
    pub fn new() -> Self {
        Self { fields: Vec::new() }
    }

    pub fn real(mut self, key: &str, v: f64) -> Self {
        self.fields.push((key.into(), json!(v), num(v)));
        self
    }

    pub fn int(mut self, key: &str, v: usize) -> Self {
        self.fields.push((key.into(), json!(v), v.to_string()));
        self
    }

    pub fn flag(mut self, key: &str, v: bool) -> Self {
        self.fields.push((key.into(), json!(v), v.to_string()));
        self
    }

    pub fn value(mut self, key: &str, v: Value, shown: String) -> Self {
        self.fields.push((key.into(), v, shown));
        self
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut out = String::new();
                for (k, _, shown) in &self.fields {
                    let _ = writeln!(out, "{k},{shown}");
                }
                out
            }
            Format::Json => {
                let map = self.fields.iter().map(|(k, v, _)| (k.clone(), v.clone())).collect();
                json_line(&Value::Object(map))
            }
        }
    }
}

pub fn json_line(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

/// Columns t, quad_value, quad_error, series_value, residual, then the
/// fitted_exponent / predicted_exponent / pass trailer.
pub fn verification(r: &VerificationReport, format: Format) -> String {
    match format {
        Format::Csv => {
            let mut out = String::from("t,quad_value,quad_error,series_value,residual\n");
            for i in 0..r.t_grid.len() {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    num(r.t_grid[i]),
                    num(r.quad_values[i]),
                    num(r.quad_errors[i]),
                    num(r.series_values[i]),
                    num(r.residuals[i])
                );
            }
            let _ = writeln!(out, "fitted_exponent,{}", num(r.fitted_exponent));
            let _ = writeln!(out, "predicted_exponent,{}", num(r.predicted_exponent));
            if let Some(l) = r.fitted_log_coeff {
                let _ = writeln!(out, "fitted_log_coeff,{}", num(l));
            }
            let _ = writeln!(out, "pass,{}", r.pass);
            out
        }
        Format::Json => json_line(&json!({
            "t": r.t_grid,
            "quad_value": r.quad_values,
            "quad_error": r.quad_errors,
            "series_value": r.series_values,
            "residual": r.residuals,
            "fitted_exponent": r.fitted_exponent,
            "predicted_exponent": r.predicted_exponent,
            "fitted_log_coeff": r.fitted_log_coeff,
            "tolerance_used": r.tolerance_used,
            "below_floor": r.below_floor,
            "points_used": r.points_used,
            "pass": r.pass,
        })),
    }
}
