//! Command-line front end for `majorant-core`.
//!
//! Every computing subcommand writes a [`RunManifest`] holding its resolved
//! parameters, seed and results; `majorant report --verify` replays them.

pub mod args;
pub mod commands;
mod error;
pub mod formats;
pub mod manifest;
pub mod parse;

use std::io::Write;
use std::path::PathBuf;

use serde_json::{json, Value};

pub use args::Cli;
use args::{CommandArgs, Format, GlobalArgs, ReportArgs};
pub use commands::Request;
pub use error::{CliError, Result};
use formats::{render, summarize, write_json, write_table};
pub use manifest::{compare_results, RunManifest};

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match threads {
        None => f(),
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Output(format!("cannot start {n} worker threads: {e}")))?
            .install(f),
    }
}

/// Runs a parsed command line, printing results to `out` and notes to `note`.
pub fn run(cli: &Cli, out: &mut dyn Write, note: &mut dyn Write) -> Result<()> {
    let g = &cli.global;
    let request = match &cli.command {
        CommandArgs::Norm(a) => a.resolve()?,
        CommandArgs::Construct(a) => a.resolve()?,
        CommandArgs::Search(a) => a.resolve(g.seed)?,
        CommandArgs::Lemma(a) => a.resolve()?,
        CommandArgs::Bounds(a) => a.resolve(g.seed)?,
        CommandArgs::Report(a) => return report(g, a, out, note),
    };
    let results = with_threads(g.threads, || request.run())?;
    let manifest = RunManifest::new(&request, results);
    let path = match &g.manifest {
        Some(p) => manifest.save(p).map(|_| p.clone())?,
        None => manifest.save_in(&g.manifest_dir)?,
    };
    let _ = writeln!(note, "manifest: {}", path.display());
    render(out, g.format(), &manifest.command, &manifest.results)
}

struct Reviewed {
    path: PathBuf,
    manifest: RunManifest,
    differences: Option<Vec<String>>,
}

fn report(g: &GlobalArgs, a: &ReportArgs, out: &mut dyn Write, note: &mut dyn Write) -> Result<()> {
    let mut reviewed = Vec::new();
    for path in &a.manifests {
        let manifest = RunManifest::load(path)?;
        let differences = if a.verify {
            Some(with_threads(g.threads, || manifest.verify())?)
        } else {
            None
        };
        reviewed.push(Reviewed { path: path.clone(), manifest, differences });
    }
    match g.format() {
        Format::Json => {
            let items: Vec<Value> = reviewed
                .iter()
                .map(|r| {
                    json!({
                        "file": r.path.display().to_string(),
                        "command": r.manifest.command,
                        "seed": r.manifest.seed,
                        "timestamp": r.manifest.timestamp,
                        "results": r.manifest.results,
                        "reproduced": r.differences.as_ref().map(|d| d.is_empty()),
                    })
                })
                .collect();
            write_json(out, &Value::Array(items))?;
        }
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().flexible(true).from_writer(&mut *out);
            let mut last: Option<Vec<String>> = None;
            for r in &reviewed {
                let t = summarize(&r.manifest.command, &r.manifest.results);
                if last.as_ref() != Some(&t.columns) {
                    w.write_record(["file", "command"].into_iter().map(String::from).chain(t.columns.clone()))?;
                    last = Some(t.columns.clone());
                }
                for row in &t.rows {
                    let file = r.path.display().to_string();
                    w.write_record([file, r.manifest.command.clone()].into_iter().chain(row.iter().cloned()))?;
                }
            }
            w.flush().map_err(|e| CliError::Output(e.to_string()))?;
        }
        Format::Table => {
            for (i, r) in reviewed.iter().enumerate() {
                let io = |e: std::io::Error| CliError::Output(e.to_string());
                if reviewed.len() > 1 {
                    if i > 0 {
                        writeln!(out).map_err(io)?;
                    }
                    writeln!(out, "# {} ({}, {})", r.path.display(), r.manifest.command, r.manifest.timestamp).map_err(io)?;
                }
                if reviewed.len() == 1 {
                    render(out, Format::Table, &r.manifest.command, &r.manifest.results)?;
                } else {
                    write_table(out, &summarize(&r.manifest.command, &r.manifest.results))?;
                }
            }
        }
    }
    for r in &reviewed {
        match &r.differences {
            Some(d) if !d.is_empty() => {
                return Err(CliError::Mismatch { path: r.path.clone(), details: d.clone() });
            }
            Some(_) => {
                let _ = writeln!(note, "reproduced: {}", r.path.display());
            }
            None => {}
        }
    }
    Ok(())
}
