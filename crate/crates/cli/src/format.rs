//! Deterministic text output: CSV with 12 significant digits and the JSON
//! envelope shared by every subcommand.

use serde_json::{json, Value};

pub const SIGNIFICANT_DIGITS: usize = 12;

/// `%.12g`-style rendering: fixed notation for moderate exponents,
/// scientific otherwise, trailing zeros removed.
pub fn sig(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..SIGNIFICANT_DIGITS as i32).contains(&exp) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// A table with a fixed header row.
pub struct Csv {
    out: String,
    width: usize,
}

impl Csv {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        let cols: Vec<&str> = header.iter().map(|s| s.as_ref()).collect();
        Self { out: format!("{}\n", cols.join(",")), width: cols.len() }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        assert_eq!(cells.len(), self.width, "row width matches the header");
        self.out.push_str(&cells.join(","));
        self.out.push('\n');
    }

    pub fn finish(self) -> String {
        self.out
    }
}

pub fn envelope(command: &str, result: Value) -> String {
    pretty(&json!({ "version": 1, "command": command, "result": result }))
}

pub fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}
