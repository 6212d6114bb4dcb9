use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gumbel_order::{Relation, Topology};
use gumbel_order_cli::commands::{run_check, run_entropy, run_scan_command, run_simulate};
use gumbel_order_cli::report::render_json;
use gumbel_order_cli::scan::{parse_count_range, parse_float_list, ScanMode, ScanSpec};
use gumbel_order_cli::spec::Overrides;
use gumbel_order_cli::{Failure, Output, EXIT_OK, EXIT_USAGE};

/// Stochastic-order checks for series and parallel systems of Gumbel components.
#[derive(Parser, Debug)]
#[command(name = "gumbel-order", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Number of abscissa grid points.
    #[arg(long, global = true)]
    grid_points: Option<usize>,

    /// Tail mass cut from each end of the evaluation grids.
    #[arg(long, global = true)]
    tail_cutoff: Option<f64>,

    /// Relative tolerance for quadrature.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Print the JSON report on standard output instead of the text summary.
    #[arg(long, global = true)]
    json: bool,

    /// Also write the JSON report to this file.
    #[arg(long, short = 'o', global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the relations listed in a spec file (`-` reads standard input).
    Check { file: String },
    /// Sweep random pairs satisfying a hypothesis, or explore freely.
    Scan(ScanArgs),
    /// Shannon and residual entropy of the systems in a spec file.
    Entropy { file: String },
    /// Monte Carlo cross-check of a pair of systems.
    Simulate { file: String },
}

#[derive(Args, Debug)]
struct ScanArgs {
    /// dominance-lr, majorized-rh, majorized-hr, majorized-disp-lu or free.
    #[arg(long)]
    mode: String,

    #[arg(long, default_value_t = 100)]
    trials: usize,

    /// Component count, or an inclusive range such as 2..5.
    #[arg(long, default_value = "2..5")]
    n: String,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Location range as lo,hi.
    #[arg(long, default_value = "-3,3", allow_hyphen_values = true)]
    mu_range: String,

    /// Comma-separated scale values drawn uniformly per trial.
    #[arg(long, default_value = "0.5,1,2")]
    sigma: String,

    /// Let the dominance mode draw identical location vectors.
    #[arg(long)]
    allow_degenerate: bool,

    /// Relations audited in free mode.
    #[arg(long, default_value = "lr,hr,rh,st")]
    relations: String,

    /// Fix the topology in free mode.
    #[arg(long)]
    topology: Option<String>,
}

fn read_spec(file: &str) -> Result<String, Failure> {
    if file == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(|e| Failure::usage(format!("cannot read standard input: {e}")))?;
        Ok(s)
    } else {
        fs::read_to_string(file).map_err(|e| Failure::usage(format!("cannot read {file}: {e}")))
    }
}

fn scan_spec(args: &ScanArgs) -> Result<ScanSpec, Failure> {
    let mode: ScanMode = args.mode.parse()?;
    let mut spec = ScanSpec::new(mode, args.trials, parse_count_range(&args.n)?, args.seed);
    let range = parse_float_list(&args.mu_range)?;
    let [lo, hi] = range[..] else {
        return Err(Failure::usage("--mu-range takes exactly two numbers, lo,hi"));
    };
    spec.mu_range = (lo, hi);
    spec.sigma_set = parse_float_list(&args.sigma)?;
    spec.allow_degenerate = args.allow_degenerate;
    spec.relations =
        args.relations.split(',').map(|r| r.parse::<Relation>().map_err(Failure::from)).collect::<Result<_, _>>()?;
    spec.topology = match args.topology.as_deref() {
        None => None,
        Some("series") => Some(Topology::Series),
        Some("parallel") => Some(Topology::Parallel),
        Some(other) => return Err(Failure::usage(format!("unknown topology {other:?}"))),
    };
    Ok(spec)
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    let overrides = Overrides { grid_points: cli.grid_points, tail_cutoff: cli.tail_cutoff, tol: cli.tol };
    match &cli.command {
        Command::Check { file } => run_check(&read_spec(file)?, &overrides),
        Command::Scan(args) => run_scan_command(&scan_spec(args)?, &overrides),
        Command::Entropy { file } => run_entropy(&read_spec(file)?, &overrides),
        Command::Simulate { file } => run_simulate(&read_spec(file)?, &overrides),
    }
}

fn exit(code: i32) -> ExitCode {
    ExitCode::from(u8::try_from(code).unwrap_or(1))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return exit(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    match run(&cli) {
        Ok(out) => {
            let json = render_json(&out.json);
            if let Some(path) = &cli.output {
                if let Err(e) = fs::write(path, &json) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return exit(EXIT_USAGE);
                }
            }
            let body = if cli.json { json } else { out.text };
            let _ = io::stdout().write_all(body.as_bytes());
            exit(out.code)
        }
        Err(f) => {
            eprintln!("error: {f}");
            exit(f.code)
        }
    }
}
