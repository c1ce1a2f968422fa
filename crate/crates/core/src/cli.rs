//! Command line front end. Every subcommand parses its arguments, calls into
//! the library and formats the result; no combinatorics lives here.
//!
//! Settings resolve in the order defaults, `--config` file, `PATHMORPH_*`
//! environment variables, command line flags; later sources win.

use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, Write};
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bijections::{Bijection, Markers};
use crate::error::{Error, Result};
use crate::path::{read_jsonl, Path};
use crate::render::{render_gallery, RenderSpec};
use crate::sets::{count_formula, enumerate, Sampler, SetId, DEFAULT_EXHAUSTIVE_LIMIT, MAX_ENUMERABLE_N};
use crate::verify::{run_check, Check, VerifyConfig};

pub const ENV_PREFIX: &str = "PATHMORPH_";

/// Exit code for success.
pub const EXIT_OK: i32 = 0;
/// Exit code when a verification check fails.
pub const EXIT_CHECK_FAILED: i32 = 1;
/// Exit code for usage, parse and domain errors.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Tuple,
    Jsonl,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        <OutputFormat as ValueEnum>::from_str(s.trim(), true)
            .map_err(|_| Error::Syntax(format!("unknown output format {s:?}")))
    }
}

/// Resolved settings shared by all subcommands.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    pub exhaustive_limit: usize,
    pub output_format: OutputFormat,
    pub counterexample_cap: usize,
    pub workers: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            exhaustive_limit: DEFAULT_EXHAUSTIVE_LIMIT,
            output_format: OutputFormat::Tuple,
            counterexample_cap: 10,
            workers: 1,
        }
    }
}

impl Config {
    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let positive = |v: &str| -> Result<usize> {
            match v.trim().parse::<usize>() {
                Ok(x) if x >= 1 => Ok(x),
                _ => Err(Error::Syntax(format!("{key} must be a positive integer, got {v:?}"))),
            }
        };
        match key {
            "exhaustive_limit" => self.exhaustive_limit = positive(value)?,
            "output_format" => self.output_format = value.parse()?,
            "counterexample_cap" => self.counterexample_cap = positive(value)?,
            "workers" => self.workers = positive(value)?,
            other => return Err(Error::Syntax(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Applies `key=value` lines; blank lines and `#` comments are skipped.
    pub fn apply_file(&mut self, text: &str) -> Result<()> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Syntax(format!("config line {}: expected key=value", lineno + 1)))?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    /// Applies `PATHMORPH_<KEY>` variables, e.g. `PATHMORPH_EXHAUSTIVE_LIMIT`.
    pub fn apply_env(&mut self, env: &HashMap<String, String>) -> Result<()> {
        for key in ["exhaustive_limit", "output_format", "counterexample_cap", "workers"] {
            if let Some(value) = env.get(&format!("{ENV_PREFIX}{}", key.to_ascii_uppercase())) {
                self.set(key, value)?;
            }
        }
        Ok(())
    }

    fn verify_config(&self) -> VerifyConfig {
        VerifyConfig {
            exhaustive_limit: self.exhaustive_limit,
            counterexample_cap: self.counterexample_cap,
            workers: self.workers,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "pathmorph", version, about = "Bijections between families of simple random walk paths")]
struct Cli {
    /// Read settings from a key=value file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Allow exhaustive sweeps above the configured limit.
    #[arg(long, global = true)]
    limit_override: bool,
    #[arg(long, global = true)]
    exhaustive_limit: Option<usize>,
    #[arg(long, global = true)]
    counterexample_cap: Option<usize>,
    /// Worker count hint for exhaustive sweeps.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List every member of a family.
    Enumerate(SetArgs),
    /// Size of a family.
    Count {
        #[command(flatten)]
        target: Target,
        #[arg(long, value_enum, default_value_t = CountMethod::Formula)]
        method: CountMethod,
    },
    /// Seeded uniform draws from a family.
    Sample {
        #[command(flatten)]
        set: SetArgs,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
    /// Apply a map to one path, or to JSON lines on standard input.
    Map {
        #[arg(long, value_parser = parse_with::<Bijection>)]
        bijection: Bijection,
        #[arg(long, value_parser = parse_with::<Path>, allow_hyphen_values = true)]
        path: Option<Path>,
        #[arg(long, value_enum)]
        format: Option<OutputFormat>,
    },
    /// Exhaustively check the maps and counts at one size.
    Verify {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "all", value_parser = parse_with::<Check>)]
        check: Check,
        #[arg(long, value_enum)]
        format: Option<ReportFormat>,
    },
    /// Draw every (input, image) pair of a map as an SVG gallery.
    Render {
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = parse_with::<Bijection>)]
        bijection: Bijection,
        /// Output file, or `-` for standard output.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        columns: Option<usize>,
        /// Pixels per lattice cell, as WIDTHxHEIGHT.
        #[arg(long, value_parser = parse_cell)]
        cell: Option<(u32, u32)>,
    },
}

#[derive(Debug, Args)]
struct Target {
    #[arg(long)]
    n: usize,
    #[arg(long, value_parser = parse_with::<SetId>)]
    set: SetId,
}

#[derive(Debug, Args)]
struct SetArgs {
    #[command(flatten)]
    target: Target,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CountMethod {
    Formula,
    Enumerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

fn parse_with<T: FromStr<Err = Error>>(s: &str) -> std::result::Result<T, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_cell(s: &str) -> std::result::Result<(u32, u32), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WIDTHxHEIGHT, got {s:?}"))?;
    let parse = |v: &str| match v.trim().parse::<u32>() {
        Ok(x) if x > 0 => Ok(x),
        _ => Err(format!("cell size must be positive integers, got {s:?}")),
    };
    Ok((parse(w)?, parse(h)?))
}

#[derive(Serialize)]
struct MapRecord<'a> {
    input: &'a Path,
    output: &'a Path,
    markers: Markers,
}

enum Failure {
    Usage(Error),
    Io(std::io::Error),
    Checks,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

/// Runs one invocation. `args` includes the program name; `env` holds the
/// process environment (only `PATHMORPH_*` keys are read).
pub fn run<I, T>(
    args: I,
    env: &HashMap<String, String>,
    stdin: &mut dyn BufRead,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(cli, env, stdin, stdout) {
        Ok(()) => EXIT_OK,
        Err(Failure::Checks) => EXIT_CHECK_FAILED,
        Err(Failure::Usage(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
        Err(Failure::Io(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn resolve_config(cli: &Cli, env: &HashMap<String, String>) -> Result<Config> {
    let mut config = Config::default();
    if let Some(file) = &cli.config {
        let text = fs::read_to_string(file)
            .map_err(|e| Error::Syntax(format!("cannot read config {}: {e}", file.display())))?;
        config.apply_file(&text)?;
    }
    config.apply_env(env)?;
    if let Some(limit) = cli.exhaustive_limit {
        config.set("exhaustive_limit", &limit.to_string())?;
    }
    if let Some(cap) = cli.counterexample_cap {
        config.set("counterexample_cap", &cap.to_string())?;
    }
    if let Some(workers) = cli.workers {
        config.set("workers", &workers.to_string())?;
    }
    if cli.limit_override {
        config.exhaustive_limit = MAX_ENUMERABLE_N;
    }
    Ok(config)
}

fn write_path(out: &mut dyn Write, path: &Path, format: OutputFormat) -> std::io::Result<()> {
    match format {
        OutputFormat::Tuple => writeln!(out, "{path}"),
        OutputFormat::Jsonl | OutputFormat::Json => writeln!(out, "{}", path.to_json_line()),
    }
}

fn execute(
    cli: Cli,
    env: &HashMap<String, String>,
    stdin: &mut dyn BufRead,
    stdout: &mut dyn Write,
) -> std::result::Result<(), Failure> {
    let config = resolve_config(&cli, env)?;
    match cli.command {
        Command::Enumerate(SetArgs { target, format }) => {
            let format = format.unwrap_or(config.output_format);
            for path in enumerate(target.n, target.set, config.exhaustive_limit)? {
                write_path(stdout, &path, format)?;
            }
        }
        Command::Count { target, method } => {
            if target.n == 0 {
                return Err(Error::InvalidLength(0).into());
            }
            let value = match method {
                CountMethod::Formula => count_formula(target.n, target.set).to_string(),
                CountMethod::Enumerate => enumerate(target.n, target.set, config.exhaustive_limit)?
                    .count()
                    .to_string(),
            };
            writeln!(stdout, "{value}")?;
        }
        Command::Sample { set, seed, count } => {
            let format = set.format.unwrap_or(config.output_format);
            let sampler = Sampler::new(set.target.n, set.target.set, seed, config.exhaustive_limit)?;
            for path in sampler.take(count) {
                write_path(stdout, &path, format)?;
            }
        }
        Command::Map { bijection, path, format } => {
            // Batch input defaults to JSON records; a single path to a tuple.
            let batch = match format {
                Some(f) => f != OutputFormat::Tuple,
                None => path.is_none() || config.output_format != OutputFormat::Tuple,
            };
            let inputs = match path {
                Some(p) => vec![p],
                None => read_jsonl(stdin)?,
            };
            for input in &inputs {
                let output = bijection.apply(input)?;
                if batch {
                    let record = MapRecord {
                        input,
                        output: &output,
                        markers: bijection.markers(input)?,
                    };
                    let line = serde_json::to_string(&record).expect("records always serialize");
                    writeln!(stdout, "{line}")?;
                } else {
                    writeln!(stdout, "{output}")?;
                }
            }
        }
        Command::Verify { n, check, format } => {
            let format = format.unwrap_or(match config.output_format {
                OutputFormat::Json | OutputFormat::Jsonl => ReportFormat::Json,
                OutputFormat::Tuple => ReportFormat::Text,
            });
            let reports = run_check(check, n, &config.verify_config())?;
            match format {
                ReportFormat::Text => {
                    for r in &reports {
                        write!(stdout, "{r}")?;
                    }
                }
                ReportFormat::Json => {
                    let text = serde_json::to_string_pretty(&reports).expect("reports always serialize");
                    writeln!(stdout, "{text}")?;
                }
            }
            if reports.iter().any(|r| !r.passed) {
                return Err(Failure::Checks);
            }
        }
        Command::Render {
            n,
            bijection,
            out,
            columns,
            cell,
        } => {
            let mut spec = RenderSpec::default();
            if let Some(c) = columns {
                spec.columns = c;
            }
            if let Some((w, h)) = cell {
                spec.cell_width = w;
                spec.cell_height = h;
            }
            let svg = render_gallery(n, bijection, &spec, config.exhaustive_limit)?;
            if out.as_os_str() == "-" {
                stdout.write_all(svg.as_bytes())?;
            } else {
                fs::write(&out, svg)?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        call_with(args, &HashMap::new(), "")
    }

    fn call_with(args: &[&str], env: &HashMap<String, String>, input: &str) -> (i32, String, String) {
        let mut argv = vec!["pathmorph"];
        argv.extend_from_slice(args);
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(argv, env, &mut input.as_bytes(), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn count_example() {
        assert_eq!(call(&["count", "--n", "4", "--set", "C"]), (0, "5\n".into(), String::new()));
        assert_eq!(call(&["count", "--n", "3", "--set", "Aprime", "--method", "enumerate"]).1, "10\n");
        assert_eq!(call(&["count", "--n", "40", "--set", "A"]).1, "107507208733336176461620\n");
    }

    #[test]
    fn map_examples() {
        let (code, out, _) = call(&["map", "--bijection", "phi1", "--path", "(0,1,2,3,2,1,0)"]);
        assert_eq!((code, out.as_str()), (0, "(0,1,2,3,4,5,6)\n"));
        let (code, out, err) = call(&["map", "--bijection", "phi2", "--path", "(0,1,0)"]);
        assert_eq!(code, 2);
        assert!(out.is_empty());
        assert_eq!(err, "error: phi2 needs n >= 2, got n = 1\n");
        let (code, out, _) = call(&["map", "--bijection", "phi1full", "--path", "(0,-1,0,-1,0,-1,0)"]);
        assert_eq!((code, out.as_str()), (0, "(0,-1,-2,-1,-2,-1,-2)\n"));
    }

    #[test]
    fn map_batch() {
        let input = "[0,1,2,1,0]\n[0,1,0,1,0,1,0]\n";
        let (code, out, _) = call_with(&["map", "--bijection", "phi1"], &HashMap::new(), input);
        assert_eq!(code, 0);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(
            lines[0],
            r#"{"input":[0,1,2,1,0],"output":[0,1,2,3,4],"markers":{"kind":"valleys","negated":false,"M":2,"a":[1,2],"b":[0,1]}}"#
        );
        assert_eq!(lines.len(), 2);
        let (_, out, _) = call_with(&["map", "--bijection", "phi1", "--format", "tuple"], &HashMap::new(), input);
        assert_eq!(out, "(0,1,2,3,4)\n(0,1,2,1,2,1,2)\n");
        let (code, _, err) = call_with(&["map", "--bijection", "psi1"], &HashMap::new(), "[0,1,0]\n");
        assert_eq!(code, 2);
        assert!(err.starts_with("error: psi1 is not defined"));
    }

    #[test]
    fn enumerate_and_sample() {
        let (code, out, _) = call(&["enumerate", "--n", "1", "--set", "A"]);
        assert_eq!((code, out.as_str()), (0, "(0,-1,0)\n(0,1,0)\n"));
        let (_, out, _) = call(&["enumerate", "--n", "1", "--set", "A", "--format", "jsonl"]);
        assert_eq!(out, "[0,-1,0]\n[0,1,0]\n");
        let (code, _, err) = call(&["enumerate", "--n", "13", "--set", "C"]);
        assert_eq!(code, 2);
        assert!(err.contains("exhaustive limit"));
        let a = call(&["sample", "--n", "4", "--set", "C", "--seed", "7", "--count", "5"]);
        let b = call(&["sample", "--n", "4", "--set", "C", "--seed", "7", "--count", "5"]);
        assert_eq!(a, b);
        assert_eq!(a.1.lines().count(), 5);
        assert_eq!(call(&["sample", "--n", "1", "--set", "D", "--seed", "0"]).0, 2);
    }

    #[test]
    fn verify_exit_codes() {
        let (code, out, _) = call(&["verify", "--n", "3", "--check", "counts"]);
        assert_eq!(code, 0);
        assert!(out.starts_with("PASS counts n=3"));
        let (code, out, _) = call(&["verify", "--n", "3", "--format", "json"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v.as_array().unwrap().len(), 6);
        assert_eq!(call(&["verify", "--n", "1", "--check", "bijection2"]).0, 2);
        assert_eq!(call(&["verify", "--n", "1"]).0, 0);
        assert_eq!(call(&["verify", "--n", "13"]).0, 2);
        assert_eq!(call(&["verify", "--n", "3", "--check", "nope"]).0, 2);
    }

    #[test]
    fn usage_errors() {
        assert_eq!(call(&[]).0, 2);
        assert_eq!(call(&["frobnicate"]).0, 2);
        assert_eq!(call(&["count", "--n", "4"]).0, 2);
        assert_eq!(call(&["map", "--bijection", "phi1", "--path", "(0,2)"]).0, 2);
        assert_eq!(call(&["--help"]).0, 0);
        assert_eq!(call(&["render", "--n", "2", "--bijection", "phi1", "--out", "-", "--cell", "0x3"]).0, 2);
    }

    #[test]
    fn config_precedence() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("pm.conf");
        fs::write(&file, "# settings\nexhaustive_limit = 2\noutput_format=jsonl\n").unwrap();
        let conf = file.to_str().unwrap();

        let (code, _, _) = call(&["--config", conf, "enumerate", "--n", "3", "--set", "C"]);
        assert_eq!(code, 2);
        let (_, out, _) = call(&["--config", conf, "enumerate", "--n", "2", "--set", "C"]);
        assert_eq!(out, "[0,1,2,1,0]\n");

        let env: HashMap<String, String> = [("PATHMORPH_EXHAUSTIVE_LIMIT".to_string(), "3".to_string())].into();
        let (code, _, _) = call_with(&["--config", conf, "enumerate", "--n", "3", "--set", "C"], &env, "");
        assert_eq!(code, 0);
        let (code, _, _) = call_with(
            &["--config", conf, "--exhaustive-limit", "2", "enumerate", "--n", "3", "--set", "C"],
            &env,
            "",
        );
        assert_eq!(code, 2);
        let (code, _, _) = call(&["--config", conf, "--limit-override", "enumerate", "--n", "3", "--set", "C"]);
        assert_eq!(code, 0);

        let bad: HashMap<String, String> = [("PATHMORPH_WORKERS".to_string(), "0".to_string())].into();
        assert_eq!(call_with(&["count", "--n", "1", "--set", "A"], &bad, "").0, 2);
        let mut c = Config::default();
        assert!(c.apply_file("what\n").is_err());
        assert!(c.apply_file("colour=red\n").is_err());
    }

    #[test]
    fn render_to_stdout_and_file() {
        let (code, out, _) = call(&["render", "--n", "3", "--bijection", "phi1", "--out", "-"]);
        assert_eq!(code, 0);
        assert_eq!(crate::render::extract_panels(&out).unwrap().len(), 10);
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("g.svg");
        let (code, out, _) = call(&[
            "render", "--n", "4", "--bijection", "phi2", "--out", file.to_str().unwrap(), "--columns", "5",
            "--cell", "10x12",
        ]);
        assert_eq!((code, out.as_str()), (0, ""));
        let svg = fs::read_to_string(file).unwrap();
        assert!(svg.contains(r#"data-cell-width="10" data-cell-height="12""#));
        assert_eq!(crate::render::extract_panels(&svg).unwrap().len(), 5);
    }
}
