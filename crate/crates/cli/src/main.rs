use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gwregion::surface::{evaluate, surface, write_csv, Quantity, Source};
use gwregion::verify::{run_criterion, VerifyOptions, CRITERIA};
use gwregion::{DsbsSource, GaussianSource, GwError};

use gwregion_cli::record::{self, EvalRecord, SurfaceRecord};

#[derive(Parser)]
#[command(name = "gwregion", version, about = "Gray-Wyner region envelopes for binary and Gaussian sources")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one quantity at one point and print a JSON record.
    Eval(EvalArgs),
    /// Sweep a quantity over a square grid and write CSV or JSON.
    Surface(SurfaceArgs),
    /// Run the verification suite; exits 1 if any check fails.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SourceKind {
    Dsbs,
    Gaussian,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Which {
    Increasing,
    Lower,
    Upper,
    Rd,
    PsiLower,
    PhiUpper,
    PhiQ,
    ConvPhi,
    Lossy,
}

#[derive(Args)]
struct SourceArgs {
    /// Source family.
    source: SourceKind,
    /// Crossover probability of the binary source, in (0, 1/2).
    #[arg(long)]
    p: Option<f64>,
    /// Correlation of the Gaussian source, in (0, 1).
    #[arg(long)]
    rho: Option<f64>,
}

#[derive(Args)]
struct QuantityArgs {
    /// Quantity to evaluate.
    #[arg(long, value_enum, default_value = "increasing")]
    which: Which,
    /// Exponent for `phi-q`, negative.
    #[arg(long, allow_hyphen_values = true)]
    q: Option<f64>,
    /// First distortion for `lossy`.
    #[arg(long)]
    d1: Option<f64>,
    /// Second distortion for `lossy`.
    #[arg(long)]
    d2: Option<f64>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    quantity: QuantityArgs,
    /// First coordinate (rate, distortion for `rd`, private rate for `lossy`).
    #[arg(long, alias = "r1", alias = "x")]
    alpha: f64,
    /// Second coordinate; ignored by `phi-q`.
    #[arg(long, alias = "r2", alias = "y", default_value_t = 0.0)]
    beta: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct SurfaceArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    quantity: QuantityArgs,
    /// Grid points per axis.
    #[arg(long, default_value_t = 101)]
    steps: usize,
    /// Upper end of both axes; defaults to 1 (binary), 2 (Gaussian), 1/2 for `rd`.
    #[arg(long)]
    extent: Option<f64>,
    /// Output format.
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Output file; standard output when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Reduced grids and restart counts.
    #[arg(long)]
    quick: bool,
    /// Seed for all sampled checks and multistart searches.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Run only these criteria (1 to 9); all when omitted.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=i64::from(CRITERIA)))]
    criterion: Vec<u8>,
    /// Print the checks as JSON instead of text.
    #[arg(long)]
    json: bool,
    /// Shift every reference value by this amount (negative control).
    #[arg(long, hide = true, default_value_t = 0.0, allow_hyphen_values = true)]
    offset: f64,
}

enum Failure {
    Domain(String),
    Io(io::Error),
}

impl From<GwError> for Failure {
    fn from(e: GwError) -> Self {
        Failure::Domain(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

fn build_source(args: &SourceArgs) -> Result<Source, Failure> {
    match args.source {
        SourceKind::Dsbs => {
            let p = args
                .p
                .ok_or_else(|| Failure::Domain("dsbs requires --p".into()))?;
            Ok(Source::Dsbs(DsbsSource::new(p)?))
        }
        SourceKind::Gaussian => {
            let rho = args
                .rho
                .ok_or_else(|| Failure::Domain("gaussian requires --rho".into()))?;
            Ok(Source::Gaussian(GaussianSource::new(rho)?))
        }
    }
}

fn build_quantity(args: &QuantityArgs) -> Result<Quantity, Failure> {
    let need = |v: Option<f64>, flag: &str| {
        v.ok_or_else(|| Failure::Domain(format!("--which {} requires {flag}", args.which.name())))
    };
    Ok(match args.which {
        Which::Increasing => Quantity::Increasing,
        Which::Lower => Quantity::Lower,
        Which::Upper => Quantity::Upper,
        Which::Rd => Quantity::Rd,
        Which::PsiLower => Quantity::PsiLower,
        Which::PhiUpper => Quantity::PhiUpper,
        Which::PhiQ => Quantity::PhiQ {
            q: need(args.q, "--q")?,
        },
        Which::ConvPhi => Quantity::ConvPhi,
        Which::Lossy => Quantity::Lossy {
            d1: need(args.d1, "--d1")?,
            d2: need(args.d2, "--d2")?,
        },
    })
}

impl Which {
    fn name(self) -> String {
        self.to_possible_value()
            .map(|v| v.get_name().to_string())
            .unwrap_or_default()
    }
}

fn open_output(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn cmd_eval(args: &EvalArgs) -> Result<ExitCode, Failure> {
    let source = build_source(&args.source)?;
    let quantity = build_quantity(&args.quantity)?;
    let eval = evaluate(&source, &quantity, args.alpha, args.beta)?;
    let record = EvalRecord::new(source, quantity, args.alpha, args.beta, eval);
    let mut out = io::stdout().lock();
    serde_json::to_writer(&mut out, &record).map_err(io::Error::from)?;
    writeln!(out)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_surface(args: &SurfaceArgs) -> Result<ExitCode, Failure> {
    let source = build_source(&args.source)?;
    let quantity = build_quantity(&args.quantity)?;
    let extent = args.extent.unwrap_or(match quantity {
        Quantity::Rd => 0.5,
        _ => source.default_extent(),
    });
    let rows = surface(&source, &quantity, args.steps, extent)?;
    let mut out = open_output(&args.output)?;
    match args.format {
        Format::Csv => write_csv(&mut out, source.units(), &rows)?,
        Format::Json => {
            let record = SurfaceRecord::new(source, quantity, rows);
            serde_json::to_writer(&mut out, &record).map_err(io::Error::from)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: &VerifyArgs) -> Result<ExitCode, Failure> {
    let opts = VerifyOptions {
        quick: args.quick,
        seed: args.seed,
        offset: args.offset,
    };
    let criteria: Vec<u8> = if args.criterion.is_empty() {
        (1..=CRITERIA).collect()
    } else {
        args.criterion.clone()
    };
    let mut out = io::stdout().lock();
    let mut checks = Vec::new();
    for c in criteria {
        let report = run_criterion(c, &opts);
        eprintln!("criterion {c}: {:.2} s", report.elapsed.as_secs_f64());
        if !args.json {
            for check in &report.checks {
                writeln!(out, "{}", check.report_line())?;
            }
            out.flush()?;
        }
        checks.extend(report.checks);
    }
    if args.json {
        serde_json::to_writer(&mut out, &record::checks_json(&checks)).map_err(io::Error::from)?;
        writeln!(out)?;
    }
    let failed: Vec<_> = checks.iter().filter(|c| !c.passed).collect();
    if failed.is_empty() {
        if !args.json {
            writeln!(out, "all {} checks passed", checks.len())?;
        }
        Ok(ExitCode::SUCCESS)
    } else {
        for c in &failed {
            eprintln!("failed: {}", c.report_line());
        }
        Ok(ExitCode::from(1))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Eval(a) => cmd_eval(a),
        Command::Surface(a) => cmd_surface(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
