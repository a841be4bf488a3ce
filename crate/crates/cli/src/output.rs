//! Number formatting, CSV tables and grid specifications.

use std::io::{self, Write};

use crate::CliError;

pub const SIGNIFICANT_DIGITS: usize = 12;

/// Shortest rendering of `x` with at most 12 significant digits, in the
/// style of C's `%.12g`: fixed notation for decimal exponents in
/// `-4..12`, scientific otherwise, trailing zeros dropped.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    // rounding to 12 digits first settles the exponent (9.9999999999996 -> 10)
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..SIGNIFICANT_DIGITS as i32).contains(&exp) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Rectangular table of numbers with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl ResultTable {
    pub fn new(header: Vec<String>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.header.len(), "ragged table row");
        self.rows.push(row);
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Comma separated, one header line, LF endings.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "{}", self.header.join(","))?;
        let mut line = String::new();
        for row in &self.rows {
            line.clear();
            for (k, &v) in row.iter().enumerate() {
                if k > 0 {
                    line.push(',');
                }
                line.push_str(&fmt_sig(v));
            }
            line.push('\n');
            out.write_all(line.as_bytes())?;
        }
        Ok(())
    }
}

/// Parses `a:b:step` into the points `a, a + step, ...` not exceeding `b`.
/// `b` itself is included when it lies on the grid up to rounding.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = |why: &str| CliError::Usage(format!("grid {spec:?}: {why}"));
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(bad("expected start:end:step"));
    }
    let mut v = [0.0; 3];
    for (slot, p) in v.iter_mut().zip(&parts) {
        *slot = p
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| bad("bounds and step must be finite numbers"))?;
    }
    let [a, b, step] = v;
    if !(step > 0.0) {
        return Err(bad("step must be positive"));
    }
    if b < a {
        return Err(bad("end lies before start"));
    }
    let span = (b - a) / step;
    let count = (span + 1e-9 * span.max(1.0)).floor() as usize + 1;
    if count > 10_000_000 {
        return Err(bad("too many points"));
    }
    Ok((0..count).map(|i| (a + i as f64 * step).min(b)).collect())
}
