//! Batch command-line front end for the exact q-series engine: expand named
//! series, run verification suites, print the constant pairing tables, and
//! export results as JSON/CSV.

use clap::{Parser, ValueEnum};
use d4frob::render::{
    named_series, reports_csv, reports_text, series_csv, series_json, series_text, table_entries,
    table_json, SERIES_NAMES,
};
use d4frob::report::{self, SUITE_NAMES};
use std::io::Write as _;
use std::process::ExitCode;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Parser, Debug)]
#[command(
    name = "d4frob",
    about = "Exact q-series engine for the rank-4 elliptic root system D4",
    long_about = "Expands named q-series, verifies the identity suites of the flat \
                  (Frobenius) structure, and prints the constant pairing tables. All \
                  arithmetic is exact-rational; a verification passes only when the \
                  residual is identically zero at the requested truncation order."
)]
struct Cli {
    /// expand | verify | table | export
    verb: String,
    /// Named series, suite, or table (see --help for registries)
    target: String,
    /// Truncation order in powers of q: an integer "N" or a rational "a/b"
    #[arg(long, default_value = "4")]
    order: String,
    /// Output format
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Write output to a file instead of stdout
    #[arg(long)]
    out: Option<String>,
}

/// Parse an order string "N" or "a/b" into a truncation bound in 24ths.
fn parse_order(s: &str) -> Result<i64, String> {
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (
            a.trim().parse::<i64>().map_err(|e| e.to_string())?,
            b.trim().parse::<i64>().map_err(|e| e.to_string())?,
        ),
        None => (s.trim().parse::<i64>().map_err(|e| e.to_string())?, 1),
    };
    if num <= 0 || den <= 0 {
        return Err("order must be positive".into());
    }
    if (24 * num) % den != 0 {
        return Err("order denominator must divide 24".into());
    }
    Ok(24 * num / den)
}

fn emit(cli: &Cli, text: String) -> ExitCode {
    match &cli.out {
        None => {
            print!("{}", text);
            if !text.ends_with('\n') {
                println!();
            }
            ExitCode::SUCCESS
        }
        Some(path) => {
            match std::fs::File::create(path).and_then(|mut f| f.write_all(text.as_bytes())) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: cannot write {}: {}", path, e);
                    ExitCode::from(2)
                }
            }
        }
    }
}

fn run() -> ExitCode {
    let cli = Cli::parse();
    let trunc = match parse_order(&cli.order) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: invalid --order {:?}: {}", cli.order, e);
            return ExitCode::from(2);
        }
    };
    let verb = if cli.verb == "export" {
        // export = the matching verb with a serializable format, written to --out
        if cli.out.is_none() {
            eprintln!("error: export requires --out FILE");
            return ExitCode::from(2);
        }
        if SERIES_NAMES.contains(&cli.target.as_str()) {
            "expand"
        } else if cli.target == "all" || SUITE_NAMES.contains(&cli.target.as_str()) {
            "verify"
        } else {
            "table"
        }
    } else {
        cli.verb.as_str()
    };
    let format = if cli.verb == "export" && cli.format == Format::Text {
        Format::Json
    } else {
        cli.format
    };
    match verb {
        "expand" => {
            let Some(s) = named_series(&cli.target, trunc) else {
                eprintln!(
                    "error: unknown series {:?}; known: {}",
                    cli.target,
                    SERIES_NAMES.join(", ")
                );
                return ExitCode::from(2);
            };
            let text = match format {
                Format::Text => format!("{} = {}\n", cli.target, series_text(&s)),
                Format::Json => format!(
                    "{}\n",
                    serde_json::to_string_pretty(&series_json(&cli.target, &s)).unwrap()
                ),
                Format::Csv => series_csv(&s),
            };
            emit(&cli, text)
        }
        "verify" => {
            let Some(reports) = report::run_suites(&cli.target, trunc) else {
                eprintln!(
                    "error: unknown suite {:?}; known: all, {}",
                    cli.target,
                    SUITE_NAMES.join(", ")
                );
                return ExitCode::from(2);
            };
            let ok = reports.iter().all(|r| r.passed());
            let text = match format {
                Format::Text => reports_text(&reports),
                Format::Json => format!("{}\n", serde_json::to_string_pretty(&reports).unwrap()),
                Format::Csv => reports_csv(&reports),
            };
            let code = emit(&cli, text);
            if code != ExitCode::SUCCESS {
                return code;
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        "table" => {
            let Some((title, rows)) = table_entries(&cli.target, trunc) else {
                eprintln!("error: unknown table {:?}; known: j0, j1, duality", cli.target);
                return ExitCode::from(2);
            };
            let text = match format {
                Format::Text => {
                    let mut out = format!("# {}\n", title);
                    let widths: Vec<usize> = (0..rows[0].len())
                        .map(|j| rows.iter().map(|r| r[j].len()).max().unwrap())
                        .collect();
                    for r in &rows {
                        let cells: Vec<String> = r
                            .iter()
                            .enumerate()
                            .map(|(j, c)| format!("{:>w$}", c, w = widths[j]))
                            .collect();
                        out.push_str(&format!("[ {} ]\n", cells.join("  ")));
                    }
                    out
                }
                Format::Json => format!(
                    "{}\n",
                    serde_json::to_string_pretty(&table_json(&cli.target, &title, &rows)).unwrap()
                ),
                Format::Csv => rows.iter().map(|r| format!("{}\n", r.join(","))).collect(),
            };
            emit(&cli, text)
        }
        other => {
            eprintln!("error: unknown verb {:?}; known: expand, verify, table, export", other);
            ExitCode::from(2)
        }
    }
}

fn main() -> ExitCode {
    run()
}
