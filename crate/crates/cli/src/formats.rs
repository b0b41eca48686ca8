//! Human-readable, JSON and CSV renderings of command results.

use std::io::Write;

use serde_json::Value;

use crate::args::Format;
use crate::error::{CliError, Result};

/// Column-oriented summary. A single row prints as a key/value list.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

fn cell(v: Option<&Value>) -> String {
    match v {
        None | Some(Value::Null) => "-".into(),
        Some(Value::String(s)) => s.clone(),
        Some(Value::Array(xs)) if xs.iter().all(|x| x.is_number()) => {
            xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
        }
        Some(v) => v.to_string(),
    }
}

fn pick(results: &Value, fields: &[(&str, &str)]) -> Table {
    Table {
        columns: fields.iter().map(|(name, _)| name.to_string()).collect(),
        rows: vec![fields.iter().map(|(_, ptr)| cell(results.pointer(ptr))).collect()],
    }
}

/// The summary printed for a command's results. `report` calls this on the
/// results stored in a manifest, so both print the same thing.
pub fn summarize(command: &str, results: &Value) -> Table {
    match command {
        "norm" => pick(
            results,
            &[
                ("p", "/estimate/p"),
                ("value", "/estimate/value"),
                ("method", "/estimate/method"),
                ("error_bound", "/estimate/error_bound"),
                ("grid_size", "/estimate/grid_size"),
                ("terms", "/terms"),
                ("degree", "/degree"),
            ],
        ),
        "construct" => pick(
            results,
            &[
                ("D", "/D"),
                ("k", "/k"),
                ("size", "/size"),
                ("p", "/p"),
                ("norm_F", "/norm_big/value"),
                ("norm_f", "/norm_small/value"),
                ("method", "/norm_big/method"),
                ("ratio", "/ratio"),
                ("eta", "/eta"),
            ],
        ),
        "search" => pick(
            results,
            &[
                ("method", "/method"),
                ("p", "/p"),
                ("size", "/lambda"),
                ("best_ratio", "/best_ratio"),
                ("pattern", "/best_pattern"),
                ("evaluations", "/evaluations"),
                ("grid_size", "/grid_size"),
                ("max_error_estimate", "/max_error_estimate"),
                ("digit_sign_ratio", "/digit_sign_ratio"),
            ],
        )
        .with_size_count(results.pointer("/lambda")),
        "lemma" => pick(
            results,
            &[
                ("alpha", "/alpha"),
                ("D", "/D"),
                ("k", "/k"),
                ("delta", "/delta"),
                ("lower", "/lower"),
                ("target", "/target"),
                ("upper", "/upper"),
                ("epsilon", "/epsilon"),
                ("max_cell_width", "/max_cell_width"),
                ("within_delta", "/within_delta"),
                ("certified", "/certified"),
            ],
        ),
        "bounds" if results.get("rows").is_some() => rows_table(results),
        "bounds" => pick(
            results,
            &[
                ("size", "/chain/lambda_size"),
                ("N", "/chain/n"),
                ("norm_Ta3", "/chain/norm_ta3"),
                ("norm_F3", "/chain/norm_f3"),
                ("slack_interp", "/chain/slack_interp"),
                ("slack_l2_l3", "/chain/slack_l2_l3"),
                ("slack_l4_l3", "/chain/slack_l4_l3"),
                ("slack_combined", "/chain/slack_combined"),
                ("C", "/chain/implied_constant"),
                ("holds", "/holds"),
                ("peak_holds", "/peak/holds"),
                ("exponent", "/upper_exponent"),
                ("label", "/chain/label"),
            ],
        ),
        _ => Table { columns: vec!["results".into()], rows: vec![vec![results.to_string()]] },
    }
}

impl Table {
    fn with_size_count(mut self, lambda: Option<&Value>) -> Self {
        if let (Some(i), Some(Value::Array(xs))) = (self.columns.iter().position(|c| c == "size"), lambda) {
            self.rows[0][i] = xs.len().to_string();
        }
        self
    }
}

fn rows_table(results: &Value) -> Table {
    let rows = results["rows"].as_array().cloned().unwrap_or_default();
    let columns: Vec<String> = match rows.first() {
        Some(Value::Object(m)) => m.keys().cloned().collect(),
        _ => Vec::new(),
    };
    Table {
        rows: rows.iter().map(|r| columns.iter().map(|c| cell(r.get(c))).collect()).collect(),
        columns,
    }
}

pub fn write_table(out: &mut dyn Write, t: &Table) -> Result<()> {
    let io = |e: std::io::Error| CliError::Output(e.to_string());
    if t.rows.len() == 1 {
        let w = t.columns.iter().map(|c| c.len()).max().unwrap_or(0);
        for (c, v) in t.columns.iter().zip(&t.rows[0]) {
            writeln!(out, "{c:<w$}  {v}").map_err(io)?;
        }
        return Ok(());
    }
    let widths: Vec<usize> = (0..t.columns.len())
        .map(|i| t.rows.iter().map(|r| r[i].len()).chain([t.columns[i].len()]).max().unwrap_or(0))
        .collect();
    let line = |cells: &[String]| {
        cells.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect::<Vec<_>>().join("  ")
    };
    writeln!(out, "{}", line(&t.columns)).map_err(io)?;
    for r in &t.rows {
        writeln!(out, "{}", line(r)).map_err(io)?;
    }
    Ok(())
}

pub fn write_csv(out: &mut dyn Write, t: &Table) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&t.columns)?;
    for r in &t.rows {
        w.write_record(r)?;
    }
    w.flush().map_err(|e| CliError::Output(e.to_string()))
}

pub fn write_json(out: &mut dyn Write, v: &Value) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, v).map_err(|e| CliError::Output(e.to_string()))?;
    writeln!(out).map_err(|e| CliError::Output(e.to_string()))
}

/// Prints one command's results in the chosen format.
pub fn render(out: &mut dyn Write, format: Format, command: &str, results: &Value) -> Result<()> {
    match format {
        Format::Json => write_json(out, results),
        Format::Csv => write_csv(out, &summarize(command, results)),
        Format::Table => write_table(out, &summarize(command, results)),
    }
}
