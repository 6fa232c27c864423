//! `splumb`: analyze resolution graphs and build plumbing certificates.
//!
//! Exit codes: 0 success, 1 verification failure, 2 parse or usage error,
//! 3 intersection form not negative definite (or graph disconnected),
//! 4 certify failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use surface_plumbing::classify::AdeFamily;
use surface_plumbing::corpus::{self, GenError, RandomNdParams};
use surface_plumbing::graph::{canonical_cycle, GraphError, WeightedDualGraph};
use surface_plumbing::plumbing::{
    build_certificate, verify_certificate, CertifyError, CertifyOutcome, CheckStatus,
    PlumbingCertificate,
};
use surface_plumbing::report::analyze;

const EXIT_VERIFY: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_NOT_ND: u8 = 3;
const EXIT_CERTIFY: u8 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "splumb",
    version,
    about = "Exact analysis of surface singularity resolution graphs and plumbing certificates",
    after_help = "Exit codes: 0 success, 1 verification failure, 2 parse/usage error, \
                  3 not negative definite or disconnected, 4 certify failure."
)]
struct Cli {
    /// TOML file supplying defaults for input, output, seed, count and format.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct Io {
    /// Input file (graph JSON, or certificate JSON for `verify`).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Canonical cycle, index, classification and structure checks.
    Analyze(Io),
    /// Build a plumbing certificate (or a classification bypass).
    Certify(Io),
    /// Re-verify a certificate produced by `certify`.
    Verify(Io),
    /// Generate corpus graphs.
    Gen(GenArgs),
    /// DOT rendering of a graph, with discrepancies when computable.
    Dot(Io),
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(value_enum)]
    kind: GenKind,
    /// Rank for `ade`.
    #[arg(long)]
    n: Option<usize>,
    /// Family for `ade`.
    #[arg(long = "type", value_enum, default_value = "a")]
    family: Family,
    /// Cycle lengths for `cusp` (comma separated).
    #[arg(long, value_delimiter = ',')]
    len: Vec<usize>,
    /// Self-intersection magnitude for `cusp` (>= 3) and `elliptic` (>= 1).
    #[arg(long)]
    e: Option<i64>,
    /// Seed for `random-nd`.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of `random-nd` graphs.
    #[arg(long)]
    count: Option<usize>,
    /// Largest vertex count for `random-nd`.
    #[arg(long, default_value_t = 8)]
    max_vertices: usize,
    /// Output directory; one JSON line per graph on stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    /// File format for written graphs.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Dot,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum GenKind {
    Ade,
    Cusp,
    Elliptic,
    RandomNd,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Family {
    A,
    D,
    E,
}

impl From<Family> for AdeFamily {
    fn from(f: Family) -> Self {
        match f {
            Family::A => AdeFamily::A,
            Family::D => AdeFamily::D,
            Family::E => AdeFamily::E,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Config {
    input: Option<PathBuf>,
    output: Option<PathBuf>,
    seed: Option<u64>,
    count: Option<usize>,
    format: Option<Format>,
}

/// A command failure: exit code plus a diagnostic for stderr.
struct Fail(u8, String);

impl From<GenError> for Fail {
    fn from(e: GenError) -> Self {
        Fail(EXIT_PARSE, e.to_string())
    }
}

fn io_fail(path: &Path, e: std::io::Error) -> Fail {
    Fail(EXIT_PARSE, format!("{}: {e}", path.display()))
}

fn load_config(path: Option<&Path>) -> Result<Config, Fail> {
    let Some(path) = path else {
        return Ok(Config::default());
    };
    let text = fs::read_to_string(path).map_err(|e| io_fail(path, e))?;
    toml::from_str(&text).map_err(|e| Fail(EXIT_PARSE, format!("config {}: {e}", path.display())))
}

impl Io {
    fn merged(mut self, cfg: &Config) -> Self {
        self.input = self.input.or_else(|| cfg.input.clone());
        self.output = self.output.or_else(|| cfg.output.clone());
        self.format = self.format.or(cfg.format);
        self
    }

    fn read_input(&self) -> Result<String, Fail> {
        let path = self
            .input
            .as_deref()
            .ok_or_else(|| Fail(EXIT_PARSE, "missing --input".into()))?;
        fs::read_to_string(path).map_err(|e| io_fail(path, e))
    }

    fn read_graph(&self) -> Result<WeightedDualGraph, Fail> {
        WeightedDualGraph::from_json(&self.read_input()?)
            .map_err(|e| Fail(EXIT_PARSE, format!("parse error: {e}")))
    }

    fn write(&self, text: &str) -> Result<(), Fail> {
        match &self.output {
            Some(path) => fs::write(path, text).map_err(|e| io_fail(path, e)),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

fn graph_fail(e: GraphError) -> Fail {
    match e {
        GraphError::NotNegativeDefinite | GraphError::Disconnected => {
            Fail(EXIT_NOT_ND, e.to_string())
        }
        other => Fail(EXIT_PARSE, other.to_string()),
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn cmd_analyze(io: &Io) -> Result<(), Fail> {
    let g = io.read_graph()?;
    if io.format == Some(Format::Dot) {
        let z = canonical_cycle(&g).map_err(graph_fail)?;
        return io.write(&g.to_dot(Some(&z)));
    }
    let report = analyze(&g).map_err(graph_fail)?;
    io.write(&to_json(&report))
}

fn cmd_certify(io: &Io) -> Result<(), Fail> {
    let g = io.read_graph()?;
    let z = canonical_cycle(&g).map_err(graph_fail)?;
    let outcome = build_certificate(&g, &z);
    io.write(&to_json(&outcome))?;
    match outcome {
        CertifyOutcome::Failure(e) => {
            let code = match e {
                CertifyError::NotNegativeDefinite | CertifyError::Disconnected => EXIT_NOT_ND,
                _ => EXIT_CERTIFY,
            };
            Err(Fail(code, format!("certify failed: {e}")))
        }
        _ => Ok(()),
    }
}

fn cmd_verify(io: &Io) -> Result<(), Fail> {
    let value: serde_json::Value = serde_json::from_str(&io.read_input()?)
        .map_err(|e| Fail(EXIT_PARSE, format!("parse error: {e}")))?;
    if let Some(outcome) = value.get("outcome").and_then(|o| o.as_str()) {
        if outcome != "certificate" {
            return Err(Fail(
                EXIT_PARSE,
                format!("not a certificate: outcome is {outcome}"),
            ));
        }
    }
    let cert: PlumbingCertificate =
        serde_json::from_value(value).map_err(|e| Fail(EXIT_PARSE, format!("parse error: {e}")))?;
    let transcript = verify_certificate(&cert);
    io.write(&to_json(&transcript))?;
    let failed: Vec<&str> = transcript
        .iter()
        .filter(|t| t.status == CheckStatus::Fail)
        .map(|t| t.check.as_str())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Fail(
            EXIT_VERIFY,
            format!("failed checks: {}", failed.join(", ")),
        ))
    }
}

fn cmd_dot(io: &Io) -> Result<(), Fail> {
    let g = io.read_graph()?;
    let z = canonical_cycle(&g).ok();
    io.write(&g.to_dot(z.as_ref()))
}

fn cmd_gen(args: &GenArgs, cfg: &Config) -> Result<(), Fail> {
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    let count = args.count.or(cfg.count).unwrap_or(1);
    let output = args.output.clone().or_else(|| cfg.output.clone());
    let format = args.format.or(cfg.format).unwrap_or(Format::Json);

    let named: Vec<(String, WeightedDualGraph)> = match args.kind {
        GenKind::Ade => {
            let n = args
                .n
                .ok_or_else(|| Fail(EXIT_PARSE, "ade needs --n".into()))?;
            let family = AdeFamily::from(args.family);
            vec![(format!("{family:?}{n}"), corpus::ade(family, n)?)]
        }
        GenKind::Cusp => {
            let e = args.e.unwrap_or(3);
            if e < 3 {
                return Err(GenError::BadParams("cusp needs --e >= 3".into()).into());
            }
            if args.len.is_empty() {
                return Err(GenError::BadParams("cusp needs --len".into()).into());
            }
            args.len
                .iter()
                .map(|&len| Ok((format!("cusp-{len}-e{e}"), corpus::cusp(&vec![e; len])?)))
                .collect::<Result<_, GenError>>()?
        }
        GenKind::Elliptic => {
            let e = args.e.unwrap_or(1);
            vec![(format!("elliptic-e{e}"), corpus::elliptic(e)?)]
        }
        GenKind::RandomNd => {
            let params = RandomNdParams {
                max_vertices: args.max_vertices,
                ..RandomNdParams::default()
            };
            corpus::random_nd(seed, count, params)?
                .into_iter()
                .enumerate()
                .map(|(i, g)| (format!("random-{seed}-{i:04}"), g))
                .collect()
        }
    };

    let render = |g: &WeightedDualGraph| match format {
        Format::Json => format!("{}\n", serde_json::to_string(g).expect("serializable")),
        Format::Dot => g.to_dot(canonical_cycle(g).ok().as_ref()),
    };
    match output {
        None => {
            for (_, g) in &named {
                print!("{}", render(g));
            }
        }
        Some(dir) => {
            fs::create_dir_all(&dir).map_err(|e| io_fail(&dir, e))?;
            let ext = if format == Format::Dot { "dot" } else { "json" };
            for (name, g) in &named {
                let path = dir.join(format!("{name}.{ext}"));
                fs::write(&path, render(g)).map_err(|e| io_fail(&path, e))?;
            }
            log::info!("wrote {} graphs to {}", named.len(), dir.display());
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Fail> {
    let cfg = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Analyze(io) => cmd_analyze(&io.merged(&cfg)),
        Command::Certify(io) => cmd_certify(&io.merged(&cfg)),
        Command::Verify(io) => cmd_verify(&io.merged(&cfg)),
        Command::Dot(io) => cmd_dot(&io.merged(&cfg)),
        Command::Gen(args) => cmd_gen(&args, &cfg),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
