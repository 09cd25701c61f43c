use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use powergeom::fd::StepPolicy;
use powergeom::lcr::{self, GridRange, LcrModel, LcrState};
use powergeom::lr::{self, LrState};
use powergeom::network::{self, analyze_network, load_network, to_case_file};
use powergeom::verify::{verify_reference, Which};
use powergeom::Error;

#[derive(Parser)]
#[command(name = "powergeom", version, about = "Hessian-metric reliability and stability analysis of transmission lines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum SampleKind {
    Lr,
    Lcr,
}

#[derive(Subcommand)]
enum Command {
    /// Verdict for a single line; LR unless --c is given.
    AnalyzeLine {
        #[arg(long)]
        r: f64,
        #[arg(long)]
        l: f64,
        #[arg(long)]
        c: Option<f64>,
        /// Angular frequency: a number, `pi` or `2pi50`.
        #[arg(long, default_value = "pi", value_parser = parse_omega)]
        omega: f64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Per-line and per-bus verdicts for a case file.
    AnalyzeNetwork {
        case: PathBuf,
        /// Overrides the file's omega.
        #[arg(long, value_parser = parse_omega)]
        omega: Option<f64>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Classify an (L, C) grid at fixed r and write CSV.
    Sweep {
        #[arg(long)]
        r: f64,
        /// start:stop:count, endpoints included.
        #[arg(long)]
        l: GridRange,
        /// start:stop:count, endpoints included.
        #[arg(long)]
        c: GridRange,
        #[arg(long, default_value = "1", value_parser = parse_omega)]
        omega: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Compare computed values with the published reference tables.
    VerifyPaper {
        #[arg(long, default_value = "all", value_parser = parse_which)]
        which: Which,
        #[arg(long, default_value = "pi", value_parser = parse_omega)]
        omega: f64,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Print a bundled five-bus case file.
    SampleCase {
        #[arg(long, value_enum, default_value = "lr")]
        kind: SampleKind,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn parse_omega(s: &str) -> Result<f64, String> {
    let w = match s {
        "pi" => std::f64::consts::PI,
        "2pi50" => 2.0 * std::f64::consts::PI * 50.0,
        _ => s
            .parse::<f64>()
            .map_err(|_| format!("expected a number, `pi` or `2pi50`, got {s:?}"))?,
    };
    if w > 0.0 && w.is_finite() {
        Ok(w)
    } else {
        Err(format!("omega must be positive, got {s}"))
    }
}

fn parse_which(s: &str) -> Result<Which, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

enum Failure {
    Input(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn emit(output: &Option<PathBuf>, body: &[u8]) -> Result<(), Failure> {
    match output {
        Some(path) => fs::write(path, body)
            .map_err(|e| Failure::Input(format!("{}: {e}", path.display()))),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(body)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn key_values(value: &serde_json::Value, prefix: &str, out: &mut String) {
    match value {
        serde_json::Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                key_values(v, &key, out);
            }
        }
        other => out.push_str(&format!("{prefix} = {other}\n")),
    }
}

fn analyze_line(r: f64, l: f64, c: Option<f64>, omega: f64) -> Result<serde_json::Value, Failure> {
    Ok(match c {
        None => {
            let state = LrState::new(r, l, omega)?;
            let verdict = lr::classify_lr(&state)?;
            let boundary = if r > 0.0 { Some(lr::lr_reliability_boundary(r, omega)?) } else { None };
            json!({
                "kind": "lr",
                "state": state,
                "power": lr::lr_power(&state)?,
                "verdict": verdict,
                "boundary_l": boundary,
            })
        }
        Some(c) => {
            let state = LcrState::new(r, l, c, omega)?;
            let analysis = LcrModel::default().analyze(&state)?;
            json!({
                "kind": "lcr",
                "state": state,
                "power": lcr::lcr_effective_power(&state)?,
                "verdict": analysis.verdict,
                "closed_form_discrepancies": analysis.discrepancies,
            })
        }
    })
}

fn render(value: &serde_json::Value, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(value).expect("serializable") + "\n",
        Format::Text => {
            let mut s = String::new();
            key_values(value, "", &mut s);
            s
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::AnalyzeLine { r, l, c, omega, format, output } => {
            let value = analyze_line(r, l, c, omega)?;
            emit(&output, render(&value, format).as_bytes())
        }
        Command::AnalyzeNetwork { case, omega, format, output } => {
            let src = fs::read_to_string(&case)
                .map_err(|e| Failure::Input(format!("{}: {e}", case.display())))?;
            let mut spec = load_network(&src)?;
            if let Some(w) = omega {
                spec.omega = w;
                network::validate(&spec)?;
            }
            let report = analyze_network(&spec, &LcrModel::default());
            let body = match format {
                Format::Json => report.to_json(),
                Format::Text => report.to_text(),
            };
            emit(&output, body.as_bytes())
        }
        Command::Sweep { r, l, c, omega, output } => {
            let rows = lcr::sweep_grid(r, &l, &c, omega, &LcrModel::default())?;
            let mut buf = Vec::new();
            lcr::write_grid_csv(&rows, &mut buf)?;
            emit(&output, &buf)
        }
        Command::VerifyPaper { which, omega, format, output } => {
            eprintln!("verify: omega = {omega} for the LR table and flatness scan");
            let report = verify_reference(which, omega, &StepPolicy::default());
            let body = match format {
                Format::Json => report.to_json(),
                Format::Text => report.to_text(),
            };
            emit(&output, body.as_bytes())
        }
        Command::SampleCase { kind, output } => {
            let src = match kind {
                SampleKind::Lr => network::SAMPLE_LR,
                SampleKind::Lcr => network::SAMPLE_LCR,
            };
            let canonical = to_case_file(&load_network(src)?);
            emit(&output, canonical.as_bytes())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(2)
        }
    }
}
