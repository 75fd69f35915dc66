//! The `segment-forge` command line.
//!
//! Exit codes: 0 success, 1 usage or I/O, 2 parse or compile failure,
//! 3 evaluation failure.

use std::ffi::OsString;
use std::fs;
use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{ArgGroup, Args, Parser, Subcommand};
use segment_forge::compile::compile_source;
use segment_forge::construct::{expand, Program};
use segment_forge::emit::{locus_to_json, locus_to_svg, program_from_json, program_to_json, SvgStyle};
use segment_forge::expr::CoeffEnv;
use segment_forge::locus::{TraceOptions, DEFAULT_CLIP_Y, DEFAULT_SAMPLES};
use segment_forge::registry::Registry;

use crate::shared::{display_scalar, env_for, parse_assignments, rational, run_trace};

pub const PORT_ENV: &str = "SEGMENT_FORGE_PORT";
pub const DEFAULT_PORT: u16 = 7878;

#[derive(Debug, Parser)]
#[command(
    name = "segment-forge",
    version,
    about = "Compile algebraic expressions into ruler-and-compass constructions and trace their graphs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compile an expression into a construction program (JSON).
    Compile(CompileArgs),
    /// Evaluate a program at one value of x.
    Eval(EvalArgs),
    /// Trace the locus of Y′ as x sweeps a range.
    Trace(TraceArgs),
    /// Serve the HTTP API.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct StrategyArgs {
    /// Power schedule: square-and-multiply or left-chain.
    #[arg(long)]
    pub schedule: Option<String>,
    /// Product and quotient layout: quarter-circle or parallel-transport.
    #[arg(long)]
    pub layout: Option<String>,
    /// Build equal subexpressions once.
    #[arg(long, overrides_with = "no_share")]
    pub share: bool,
    /// Build every occurrence separately.
    #[arg(long)]
    pub no_share: bool,
}

#[derive(Debug, Args)]
pub struct CompileArgs {
    /// Expression in x, e.g. `a0 + a1*x + a2*x^2`.
    pub expr: String,
    #[command(flatten)]
    pub strategy: StrategyArgs,
    /// Replace macro steps by primitive ones.
    #[arg(long)]
    pub expand: bool,
    /// Default coefficient value recorded in the program.
    #[arg(long = "coeff", value_name = "NAME=VALUE")]
    pub coeffs: Vec<String>,
    /// Output file; standard output when absent.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["program", "expr"])))]
pub struct SourceArgs {
    /// Program JSON file.
    pub program: Option<PathBuf>,
    /// Compile this expression instead of reading a program.
    #[arg(long)]
    pub expr: Option<String>,
    #[command(flatten)]
    pub strategy: StrategyArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Value of x: integer, decimal or p/q.
    #[arg(long, allow_hyphen_values = true)]
    pub x: String,
    #[arg(long = "coeff", value_name = "NAME=VALUE")]
    pub coeffs: Vec<String>,
    /// f64, float, interval or exact.
    #[arg(long, default_value = "f64")]
    pub backend: String,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Sweep range `a:b` with 0 <= a < b.
    #[arg(long, default_value = "0:4")]
    pub range: String,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: usize,
    /// Largest |y| kept on a branch.
    #[arg(long, default_value_t = DEFAULT_CLIP_Y)]
    pub clip: f64,
    /// Reflect the locus in the diagonal.
    #[arg(long)]
    pub inverse: bool,
    /// Keep only the uniform samples.
    #[arg(long)]
    pub no_refine: bool,
    #[arg(long, default_value = "f64")]
    pub backend: String,
    #[arg(long = "coeff", value_name = "NAME=VALUE")]
    pub coeffs: Vec<String>,
    /// `.svg` writes a drawing, anything else JSON; standard output when absent.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Port; the SEGMENT_FORGE_PORT environment variable takes precedence.
    #[arg(long, default_value_t = DEFAULT_PORT)]
    pub port: u16,
    #[arg(long, default_value_t = IpAddr::V4(Ipv4Addr::LOCALHOST))]
    pub host: IpAddr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Failure {
    Usage(String),
    Compile(String),
    Eval(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Compile(_) => 2,
            Failure::Eval(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Compile(m) | Failure::Eval(m) => m,
        }
    }
}

/// Parses `args` (program name first), runs the command and maps the
/// outcome to an exit code.
pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

pub fn run(cli: Cli) -> Result<(), Failure> {
    let registry = Registry::builtin();
    match cli.command {
        Command::Compile(a) => cmd_compile(&registry, a),
        Command::Eval(a) => cmd_eval(&registry, a),
        Command::Trace(a) => cmd_trace(&registry, a),
        Command::Serve(a) => cmd_serve(a),
    }
}

fn compile_with(
    registry: &Registry,
    text: &str,
    strategy: &StrategyArgs,
    defaults: CoeffEnv,
) -> Result<Program, Failure> {
    let mut opts = registry
        .compile_options(
            strategy.schedule.as_deref(),
            strategy.layout.as_deref(),
            !strategy.no_share,
        )
        .map_err(|e| Failure::Usage(e.to_string()))?;
    opts.defaults = defaults;
    compile_source(text, &opts).map_err(|e| Failure::Compile(format!("{} error: {e}", e.stage())))
}

fn load(registry: &Registry, source: &SourceArgs) -> Result<Program, Failure> {
    match (&source.expr, &source.program) {
        (Some(text), _) => compile_with(registry, text, &source.strategy, CoeffEnv::new()),
        (None, Some(path)) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
            program_from_json(&text)
                .map_err(|e| Failure::Compile(format!("{}: {e}", path.display())))
        }
        (None, None) => Err(Failure::Usage("give a program file or --expr".into())),
    }
}

fn write_out(path: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, bytes)
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(bytes)
                .map_err(|e| Failure::Usage(format!("cannot write output: {e}")))
        }
    }
}

fn cmd_compile(registry: &Registry, a: CompileArgs) -> Result<(), Failure> {
    let mut defaults = CoeffEnv::new();
    for (name, v) in parse_assignments(&a.coeffs).map_err(Failure::Usage)? {
        defaults.insert(&name, v).map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let mut program = compile_with(registry, &a.expr, &a.strategy, defaults)?;
    if a.expand {
        program = expand(&program).map_err(|d| {
            Failure::Compile(format!("expansion failed: {}", d.first().map(|d| d.to_string()).unwrap_or_default()))
        })?;
    }
    write_out(a.output.as_deref(), program_to_json(&program).as_bytes())
}

fn cmd_eval(registry: &Registry, a: EvalArgs) -> Result<(), Failure> {
    let backend = registry.backend(&a.backend).map_err(|e| Failure::Usage(e.to_string()))?;
    let x = rational(&a.x, "--x").map_err(Failure::Usage)?;
    let overrides = parse_assignments(&a.coeffs).map_err(Failure::Usage)?;
    let program = load(registry, &a.source)?;
    let env = env_for(&program, &overrides).map_err(Failure::Usage)?;
    let fig = backend
        .interpret(&program, &x, &env)
        .map_err(|e| Failure::Eval(e.to_string()))?;
    println!("{}", display_scalar(&fig.output()));
    Ok(())
}

fn parse_range(text: &str) -> Result<(num_rational::BigRational, num_rational::BigRational), Failure> {
    let (lo, hi) = text
        .split_once(':')
        .ok_or_else(|| Failure::Usage(format!("--range expects a:b, got `{text}`")))?;
    Ok((
        rational(lo, "--range").map_err(Failure::Usage)?,
        rational(hi, "--range").map_err(Failure::Usage)?,
    ))
}

fn cmd_trace(registry: &Registry, a: TraceArgs) -> Result<(), Failure> {
    let backend = registry.backend(&a.backend).map_err(|e| Failure::Usage(e.to_string()))?;
    let (lo, hi) = parse_range(&a.range)?;
    let overrides = parse_assignments(&a.coeffs).map_err(Failure::Usage)?;
    let program = load(registry, &a.source)?;
    let env = env_for(&program, &overrides).map_err(Failure::Usage)?;
    let opts = TraceOptions {
        clip_y: a.clip,
        refine: !a.no_refine,
        backend: backend.clone(),
    };
    let locus = run_trace(&program, &env, (&lo, &hi), a.samples, &opts, a.inverse)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let svg = a
        .output
        .as_deref()
        .and_then(Path::extension)
        .is_some_and(|e| e.eq_ignore_ascii_case("svg"));
    let bytes = if svg {
        let fig = if a.inverse {
            None
        } else {
            backend.interpret(&program, &hi, &env).ok().map(|f| f.to_f64())
        };
        locus_to_svg(&locus, fig.as_ref(), &SvgStyle::default())
    } else {
        locus_to_json(&locus).into_bytes()
    };
    write_out(a.output.as_deref(), &bytes)
}

/// The listening port: the environment variable wins over the flag.
pub fn resolve_port(flag: u16, env: Option<&str>) -> Result<u16, Failure> {
    match env {
        Some(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("{PORT_ENV}=`{v}` is not a port number"))),
        None => Ok(flag),
    }
}

fn cmd_serve(a: ServeArgs) -> Result<(), Failure> {
    let env = std::env::var(PORT_ENV).ok();
    let port = resolve_port(a.port, env.as_deref())?;
    let addr = SocketAddr::new(a.host, port);
    let rt = tokio::runtime::Runtime::new().map_err(|e| Failure::Usage(e.to_string()))?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| Failure::Usage(format!("cannot bind {addr}: {e}")))?;
        eprintln!("listening on http://{addr}");
        crate::server::serve(listener)
            .await
            .map_err(|e| Failure::Usage(e.to_string()))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn env_port_wins() {
        assert_eq!(resolve_port(80, Some("9000")), Ok(9000));
        assert_eq!(resolve_port(80, None), Ok(80));
        assert_eq!(resolve_port(80, Some("x")).unwrap_err().code(), 1);
    }

    #[test]
    fn ranges() {
        let (lo, hi) = parse_range("0:3/2").unwrap();
        assert_eq!(lo.to_string(), "0");
        assert_eq!(hi.to_string(), "3/2");
        assert!(parse_range("1").is_err());
    }
}
