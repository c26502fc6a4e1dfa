use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use dethunt::analysis::{symbol, symbol_table_csv};
use dethunt::gallery::{self, GalleryConfig};
use dethunt::process::{sample_path, GridConfig};
use dethunt::specdsl::{emit_spec, parse_spec_bytes, ParseDiagnostic};
use dethunt::structure::Structure;
use dethunt::Execution;

mod svg;

#[derive(Debug, Parser)]
#[command(name = "dethunt", version, about = "Deterministic Hunt processes on the real line")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and validate a spec file.
    Validate,
    /// Run every classifier on a spec and print the reports.
    Classify,
    /// Sample the trajectories from the `--x` starting points.
    Eval,
    /// Tabulate the symbol on the `--x` by `--xi` grid.
    Symbol,
    /// Run the gallery regression.
    Gallery,
    /// Write the spec back in canonical form.
    Export,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Debug, clap::Args)]
struct Opts {
    #[arg(long, global = true)]
    spec: Option<PathBuf>,
    /// Comma-separated starting points.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    x: Vec<f64>,
    /// Time horizon.
    #[arg(long = "T", global = true, allow_hyphen_values = true)]
    horizon: Option<f64>,
    /// Dyadic sampling level.
    #[arg(long, global = true)]
    level: Option<u32>,
    /// Comma-separated frequencies.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    xi: Vec<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    tol: Option<f64>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

const MAX_LEVEL: u32 = 24;

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid spec")]
    InvalidSpec(Vec<ParseDiagnostic>),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::InvalidSpec(_) => 1,
            CliError::Io { .. } => 2,
            CliError::Internal(_) => 3,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

fn json<T: Serialize>(v: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(v).map(|s| s + "\n").map_err(|e| CliError::Internal(e.to_string()))
}

impl Opts {
    fn grid(&self) -> Result<GridConfig, CliError> {
        let mut g = GridConfig::default();
        if let Some(t) = self.horizon {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::Usage(format!("--T must be positive and finite, got {t}")));
            }
            g.horizon = t;
        }
        if let Some(l) = self.level {
            if l > MAX_LEVEL {
                return Err(CliError::Usage(format!("--level must be at most {MAX_LEVEL}, got {l}")));
            }
            g.level = l;
        }
        if let Some(tol) = self.tol {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(CliError::Usage(format!("--tol must be positive, got {tol}")));
            }
            g.tol = tol;
        }
        Ok(g)
    }

    fn format(&self, default: Format, allowed: &[Format]) -> Result<Format, CliError> {
        let f = self.format.unwrap_or(default);
        if allowed.contains(&f) {
            Ok(f)
        } else {
            Err(CliError::Usage(format!("format {f:?} is not available for this command").to_lowercase()))
        }
    }

    fn xs(&self) -> Result<&[f64], CliError> {
        if self.x.is_empty() {
            return Err(CliError::Usage("--x is required".into()));
        }
        if let Some(x) = self.x.iter().find(|x| !x.is_finite()) {
            return Err(CliError::Usage(format!("starting points must be finite, got {x}")));
        }
        Ok(&self.x)
    }

    fn spec_path(&self) -> Result<&Path, CliError> {
        self.spec.as_deref().ok_or_else(|| CliError::Usage("--spec is required".into()))
    }

    fn load(&self) -> Result<Structure, CliError> {
        let path = self.spec_path()?;
        let bytes = fs::read(path).map_err(io_err(path))?;
        let doc = parse_spec_bytes(&bytes).map_err(CliError::InvalidSpec)?;
        doc.build(path.parent()).map_err(CliError::InvalidSpec)
    }

    fn emit(&self, text: &str) -> Result<(), CliError> {
        match &self.out {
            Some(p) => fs::write(p, text).map_err(io_err(p)),
            None => {
                let mut out = io::stdout().lock();
                out.write_all(text.as_bytes()).map_err(io_err(Path::new("<stdout>")))
            }
        }
    }
}

#[derive(Serialize)]
struct ValidateOutput {
    valid: bool,
    #[serde(rename = "type")]
    type_string: String,
    domains: usize,
    warnings: Vec<ParseDiagnostic>,
}

fn validate(opts: &Opts) -> Result<(), CliError> {
    let path = opts.spec_path()?;
    let bytes = fs::read(path).map_err(io_err(path))?;
    let doc = parse_spec_bytes(&bytes).map_err(CliError::InvalidSpec)?;
    let warnings = doc.warnings.clone();
    let s = doc.build(path.parent()).map_err(CliError::InvalidSpec)?;
    for w in &warnings {
        eprintln!("{w}");
    }
    opts.emit(&json(&ValidateOutput { valid: true, type_string: s.type_string(), domains: s.len(), warnings })?)
}

const CLASSIFY_REQUIRED: [&str; 6] = [
    gallery::HUNT,
    gallery::FINITE_VARIATION,
    gallery::CB_FELLER,
    gallery::FELLER,
    gallery::RICH,
    gallery::HOMOGENEITY,
];

fn classify(opts: &Opts) -> Result<(), CliError> {
    opts.format(Format::Json, &[Format::Json])?;
    let s = opts.load()?;
    let cfg = GalleryConfig { grid: opts.grid()?, ..GalleryConfig::default() }.with_exec(Execution::default());
    let reports = gallery::classify_structure(&s, &cfg);
    if let Some(missing) = CLASSIFY_REQUIRED.iter().find(|k| !reports.contains_key(**k)) {
        return Err(CliError::Internal(format!("check {missing} did not run")));
    }
    opts.emit(&json(&reports)?)
}

#[derive(Serialize)]
struct EvalPath {
    x: f64,
    times: Vec<f64>,
    values: Vec<f64>,
}

fn eval(opts: &Opts) -> Result<(), CliError> {
    let format = opts.format(Format::Csv, &[Format::Csv, Format::Svg, Format::Json])?;
    let s = opts.load()?;
    let grid = opts.grid()?;
    let mut paths = Vec::new();
    for &x in opts.xs()? {
        let ps = sample_path(&s, x, grid.horizon, grid.level, Execution::default())
            .map_err(|e| CliError::Internal(e.to_string()))?;
        paths.push(EvalPath { x, times: ps.times, values: ps.values });
    }
    let text = match format {
        Format::Csv => {
            let mut out = String::from("x,t,value\n");
            for p in &paths {
                for (t, v) in p.times.iter().zip(&p.values) {
                    out.push_str(&format!("{:.16e},{t:.16e},{v:.16e}\n", p.x));
                }
            }
            out
        }
        Format::Svg => svg::polylines(paths.iter().map(|p| (p.times.as_slice(), p.values.as_slice()))),
        Format::Json => json(&paths)?,
    };
    opts.emit(&text)
}

#[derive(Serialize)]
struct SymbolRow {
    x: f64,
    xi: f64,
    re: Option<f64>,
    im: Option<f64>,
}

fn symbol_cmd(opts: &Opts) -> Result<(), CliError> {
    let format = opts.format(Format::Csv, &[Format::Csv, Format::Json])?;
    let s = opts.load()?;
    let xs = opts.xs()?;
    if opts.xi.is_empty() {
        return Err(CliError::Usage("--xi is required".into()));
    }
    let text = match format {
        Format::Json => {
            let rows: Vec<SymbolRow> = xs
                .iter()
                .flat_map(|&x| opts.xi.iter().map(move |&xi| (x, xi)))
                .map(|(x, xi)| {
                    let p = symbol(&s, x, xi).ok();
                    SymbolRow { x, xi, re: p.map(|p| p.real_part), im: p.map(|p| p.imag_part) }
                })
                .collect();
            json(&rows)?
        }
        _ => symbol_table_csv(&s, xs, &opts.xi),
    };
    opts.emit(&text)
}

fn gallery_cmd(opts: &Opts) -> Result<(), CliError> {
    let format = opts.format(Format::Csv, &[Format::Csv, Format::Json])?;
    let cfg = GalleryConfig::default().with_exec(Execution::default());
    let outcomes = gallery::run_gallery(&cfg);
    let text = match format {
        Format::Json => json(&outcomes)?,
        _ => {
            let mut out = String::from("name,result,mismatches\n");
            for o in &outcomes {
                let status = if o.mismatches.is_empty() { "PASS" } else { "FAIL" };
                let detail: Vec<String> =
                    o.mismatches.iter().map(|(k, want, got)| format!("{k} expected {want} got {got}")).collect();
                out.push_str(&format!("{},{status},{}\n", o.name, detail.join("; ")));
            }
            out
        }
    };
    opts.emit(&text)?;
    let failed = outcomes.iter().filter(|o| !o.mismatches.is_empty()).count();
    if failed > 0 {
        return Err(CliError::Internal(format!("{failed} gallery entries disagree with their expected classification")));
    }
    Ok(())
}

fn export(opts: &Opts) -> Result<(), CliError> {
    let s = opts.load()?;
    let text = emit_spec(&s).map_err(|e| CliError::Internal(e.to_string()))?;
    opts.emit(&text)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Validate => validate(&cli.opts),
        Command::Classify => classify(&cli.opts),
        Command::Eval => eval(&cli.opts),
        Command::Symbol => symbol_cmd(&cli.opts),
        Command::Gallery => gallery_cmd(&cli.opts),
        Command::Export => export(&cli.opts),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::InvalidSpec(diags) => {
                    eprintln!("{}", serde_json::to_string_pretty(diags).unwrap_or_default());
                }
                other => eprintln!("dethunt: {other}"),
            }
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_negative_lists_and_the_horizon_flag() {
        let cli = Cli::try_parse_from(["dethunt", "eval", "--x", "-1.5,0,2", "--T", "3", "--level", "4"]).unwrap();
        assert_eq!(cli.opts.x, vec![-1.5, 0.0, 2.0]);
        assert_eq!(cli.opts.horizon, Some(3.0));
        assert_eq!(cli.opts.grid().unwrap().level, 4);
    }

    #[test]
    fn rejects_bad_overrides() {
        let cli = Cli::try_parse_from(["dethunt", "classify", "--tol", "-1"]).unwrap();
        assert!(matches!(cli.opts.grid(), Err(CliError::Usage(_))));
        let cli = Cli::try_parse_from(["dethunt", "eval", "--level", "40"]).unwrap();
        assert_eq!(cli.opts.grid().unwrap_err().exit_code(), 1);
    }
}
