//! Input syntax.
//!
//! Inline polynomials are comma-separated `freq:re[:im]` terms, e.g.
//! `0:1,1:1,3:-1` or `-2:0.5:0.25`. Files hold the JSON triple list
//! `[[freq, re, im], ...]`. Frequency sets are comma-separated integers.

use std::collections::BTreeSet;
use std::fmt;

use majorant_core::TrigPoly;
use num_complex::Complex64;

/// A syntax error, located by 1-based column (inline input) or line and
/// column (files).
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub what: &'static str,
    pub line: Option<usize>,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "{}: line {line}, column {}: {}", self.what, self.column, self.message),
            None => write!(f, "{}: column {}: {}", self.what, self.column, self.message),
        }
    }
}

impl std::error::Error for ParseError {}

/// Splits `s` on `sep`, yielding each piece with its byte offset.
fn pieces(s: &str, sep: char) -> impl Iterator<Item = (usize, &str)> {
    let mut offset = 0;
    s.split(sep).map(move |piece| {
        let at = offset;
        offset += piece.len() + sep.len_utf8();
        (at, piece)
    })
}

/// Trimmed piece and the offset of its first non-blank byte.
fn trimmed(at: usize, piece: &str) -> (usize, &str) {
    let lead = piece.len() - piece.trim_start().len();
    (at + lead, piece.trim())
}

pub fn parse_poly(s: &str) -> Result<TrigPoly, ParseError> {
    let err = |at: usize, message: String| ParseError { what: "polynomial", line: None, column: at + 1, message };
    if s.trim().is_empty() {
        return Err(err(0, "empty polynomial; write terms as freq:re[:im]".into()));
    }
    let mut seen = BTreeSet::new();
    let mut terms = Vec::new();
    for (at, term) in pieces(s, ',') {
        let (at, term) = trimmed(at, term);
        if term.is_empty() {
            return Err(err(at, "empty term".into()));
        }
        let fields: Vec<(usize, &str)> = pieces(term, ':').map(|(o, f)| trimmed(at + o, f)).collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(err(at, format!("expected freq:re[:im], found '{term}'")));
        }
        let (fat, ftext) = fields[0];
        let freq: i64 = ftext
            .parse()
            .map_err(|_| err(fat, format!("invalid frequency '{ftext}'")))?;
        if !seen.insert(freq) {
            return Err(err(fat, format!("frequency {freq} appears more than once")));
        }
        let part = |i: usize, name: &str| -> Result<f64, ParseError> {
            let (o, text) = fields[i];
            match text.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(err(o, format!("invalid {name} part '{text}'"))),
            }
        };
        let re = part(1, "real")?;
        let im = if fields.len() == 3 { part(2, "imaginary")? } else { 0.0 };
        terms.push((freq, Complex64::new(re, im)));
    }
    Ok(TrigPoly::make(terms))
}

pub fn parse_poly_json(text: &str) -> Result<TrigPoly, ParseError> {
    serde_json::from_str(text).map_err(|e| ParseError {
        what: "polynomial file",
        line: Some(e.line()),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Strictly increasing after sorting; duplicates are rejected.
pub fn parse_lambda(s: &str) -> Result<Vec<i64>, ParseError> {
    let err = |at: usize, message: String| ParseError { what: "frequency set", line: None, column: at + 1, message };
    let mut out = Vec::new();
    for (at, piece) in pieces(s, ',') {
        let (at, piece) = trimmed(at, piece);
        let n: i64 = piece.parse().map_err(|_| err(at, format!("invalid integer '{piece}'")))?;
        if out.contains(&n) {
            return Err(err(at, format!("{n} appears more than once")));
        }
        out.push(n);
    }
    out.sort_unstable();
    Ok(out)
}

/// `D,k` as used by `--digit-set`.
pub fn parse_base_digits(s: &str) -> Result<(u64, u32), ParseError> {
    let err = |at: usize, message: String| ParseError { what: "D,k pair", line: None, column: at + 1, message };
    let parts: Vec<(usize, &str)> = pieces(s, ',').map(|(o, p)| trimmed(o, p)).collect();
    if parts.len() != 2 {
        return Err(err(0, format!("expected D,k, found '{s}'")));
    }
    let d = parts[0].1.parse().map_err(|_| err(parts[0].0, format!("invalid base '{}'", parts[0].1)))?;
    let k = parts[1].1.parse().map_err(|_| err(parts[1].0, format!("invalid digit count '{}'", parts[1].1)))?;
    Ok((d, k))
}
