use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use loglin_core::io::read_table;
use loglin_core::report::{analyze, emit_report, AnalysisOptions, ReportFormat};
use loglin_core::{verify_theorem1, Error};
use rayon::prelude::*;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Usage error.
const EXIT_USAGE: u8 = 64;
/// Malformed table or formula.
const EXIT_DATA: u8 = 65;
/// Input file missing or unreadable.
const EXIT_NO_INPUT: u8 = 66;
/// Internal consistency failure.
const EXIT_SOFTWARE: u8 = 70;
/// Output could not be written.
const EXIT_IO: u8 = 74;

#[derive(Parser)]
#[command(name = "loglin", version, about = "Parameter redundancy and MLE existence for log-linear models on sparse tables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => ReportFormat::Json,
            Format::Text => ReportFormat::Text,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Analyze one table. Exit status: 0 case-i, 10 case-ii, 11 case-iii.
    Analyze {
        /// Long CSV (`X,Y,count`) or dense JSON table.
        #[arg(long)]
        table: PathBuf,
        /// Model formula, e.g. "(XY,XZ,YZ)"; overrides a model stored in the table file.
        #[arg(long)]
        model: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Fit the reduced models (default).
        #[arg(long, overrides_with = "no_fit")]
        fit: bool,
        #[arg(long)]
        no_fit: bool,
        /// Drop the intercept from the model.
        #[arg(long)]
        no_intercept: bool,
        /// Write the report here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Check the single-zero rule for saturated models on every cell of a shape.
    #[command(name = "verify-theorem1")]
    VerifyTheorem1 {
        /// Comma-separated level counts, e.g. 3,3,3. Repeatable.
        #[arg(long, required = true)]
        shape: Vec<String>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Analyze every .json/.csv table in a directory in parallel.
    Batch {
        #[arg(long)]
        dir: PathBuf,
        /// Formula for tables that do not carry one.
        #[arg(long)]
        model: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        no_fit: bool,
        /// Worker threads; 0 uses all cores.
        #[arg(long, env = "LOGLIN_THREADS", default_value_t = 0)]
        threads: usize,
    },
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::Io(_) => EXIT_NO_INPUT,
                Error::Internal(_) => EXIT_SOFTWARE,
                _ => EXIT_DATA,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return EXIT_IO;
        }
    }
    EXIT_USAGE
}

fn analyze_file(path: &Path, model: Option<&str>, opts: AnalysisOptions) -> anyhow::Result<loglin_core::AnalysisReport> {
    let input = read_table(path).with_context(|| format!("reading {}", path.display()))?;
    let formula = match (model, input.model.as_deref()) {
        (Some(m), _) | (None, Some(m)) => m.to_string(),
        (None, None) => bail!("no model given for {}; pass --model", path.display()),
    };
    analyze(&input.table, &formula, opts).with_context(|| format!("analyzing {}", path.display()))
}

fn parse_shape(text: &str) -> anyhow::Result<Vec<usize>> {
    text.split(',')
        .map(|s| s.trim().parse::<usize>().with_context(|| format!("bad shape {text:?}")))
        .collect()
}

#[derive(Serialize)]
struct BatchEntry {
    file: String,
    classification: Option<String>,
    exit_code: u8,
    summary: Option<String>,
    error: Option<String>,
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Analyze {
            table,
            model,
            format,
            fit: _,
            no_fit,
            no_intercept,
            output,
        } => {
            let opts = AnalysisOptions {
                fit: !no_fit,
                intercept: !no_intercept,
            };
            let report = analyze_file(&table, model.as_deref(), opts)?;
            let text = emit_report(&report, format.into())?;
            match output {
                Some(p) => std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?,
                None => print!("{text}"),
            }
            Ok(report.classification.exit_code() as u8)
        }
        Command::VerifyTheorem1 { shape, format } => {
            let mut all_pass = true;
            let mut reports = Vec::new();
            for s in &shape {
                let r = verify_theorem1(&parse_shape(s)?)?;
                all_pass &= r.passed();
                reports.push(r);
            }
            match format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&reports)?),
                Format::Text => {
                    println!("{:<12} {:>7} {:>9}  result", "shape", "cells", "agreeing");
                    for r in &reports {
                        let shape: Vec<String> = r.shape.iter().map(|l| l.to_string()).collect();
                        println!(
                            "{:<12} {:>7} {:>9}  {}",
                            shape.join("x"),
                            r.cells_checked,
                            r.cells_agreeing,
                            if r.passed() { "pass" } else { "FAIL" }
                        );
                        for d in &r.discrepancies {
                            println!(
                                "  cell {} ({}): rule {{{}}} vs exact {{{}}}",
                                d.cell,
                                d.label,
                                d.combinatorial.join(", "),
                                d.exact.join(", ")
                            );
                        }
                    }
                }
            }
            Ok(if all_pass { 0 } else { 1 })
        }
        Command::Batch {
            dir,
            model,
            format,
            no_fit,
            threads,
        } => {
            let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)
                .with_context(|| format!("listing {}", dir.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| {
                    p.is_file()
                        && matches!(p.extension().and_then(|e| e.to_str()), Some("json" | "csv"))
                })
                .collect();
            files.sort();
            let opts = AnalysisOptions {
                fit: !no_fit,
                intercept: true,
            };
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
            let entries: Vec<BatchEntry> = pool.install(|| {
                files
                    .par_iter()
                    .map(|f| {
                        let file = f.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
                        match analyze_file(f, model.as_deref(), opts) {
                            Ok(r) => BatchEntry {
                                file,
                                classification: Some(r.classification.as_str().to_string()),
                                exit_code: r.classification.exit_code() as u8,
                                summary: Some(r.summary),
                                error: None,
                            },
                            Err(e) => BatchEntry {
                                file,
                                classification: None,
                                exit_code: exit_code_for(&e),
                                summary: None,
                                error: Some(format!("{e:#}")),
                            },
                        }
                    })
                    .collect()
            });
            match format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&entries)?),
                Format::Text => {
                    for e in &entries {
                        match (&e.classification, &e.error) {
                            (Some(c), _) => println!("{:<32} {:<9} {}", e.file, c, e.summary.as_deref().unwrap_or("")),
                            (None, Some(err)) => println!("{:<32} error     {}", e.file, err),
                            _ => {}
                        }
                    }
                }
            }
            Ok(entries.iter().map(|e| e.exit_code).filter(|&c| c > 63).max().unwrap_or(0))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
