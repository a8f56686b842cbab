use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use tvp::automata::{InferenceQuery, Mode};
use tvp::pipeline::{self, export_product, Loaded, OutputFormat, PipelineError, RunConfig};
use tvp::rational::{parse_rational, Rational};
use tvp::semantics::{wp_iterate, wp_product, wp_source, wp_sync, WpOp, WpResult};
use tvp::syntax::{parse_program, typecheck, Context, Signature};

const EXIT_NOT_CONVERGED: u8 = 2;
const EXIT_THEOREM: u8 = 3;
const EXIT_INPUT: u8 = 4;

#[derive(Parser)]
#[command(name = "tvp", version, about = "Temporal verification of effectful higher-order programs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Text => OutputFormat::Text,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Side {
    Source,
    Sync,
    Product,
}

#[derive(Args)]
struct Target {
    program: PathBuf,
    #[arg(long)]
    spec: PathBuf,
}

#[derive(Args)]
struct WpArgs {
    #[command(flatten)]
    target: Target,
    #[arg(long)]
    mode: Mode,
    /// Report only this state (text output).
    #[arg(long)]
    state: Option<String>,
    #[arg(long, conflicts_with_all = ["tol", "fuel_cap"])]
    fuel: Option<u32>,
    #[arg(long, default_value = "1e-9")]
    tol: String,
    #[arg(long, default_value_t = 500)]
    fuel_cap: u32,
    #[arg(long, value_enum, default_value = "product")]
    side: Side,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the type of a closed program.
    Typecheck { program: PathBuf },
    /// Print the product program.
    Transform {
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        simplify: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Weakest pre-condition at a fixed fuel or iterated to a tolerance.
    Wp(WpArgs),
    /// Full report with the three-way equality checked at fuels 1..fuel-cap.
    Check {
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        mode: Mode,
        #[arg(long)]
        state: Option<String>,
        #[arg(long, default_value_t = 10)]
        fuel_cap: u32,
        #[arg(long, default_value = "1e-9")]
        tol: String,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long)]
        timings: bool,
    },
    /// Full report: three sides at the comparison fuel and a limit estimate.
    Verify {
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        mode: Mode,
        #[arg(long)]
        state: Option<String>,
        #[arg(long, default_value_t = 500)]
        fuel_cap: u32,
        #[arg(long, default_value = "1e-9")]
        tol: String,
        #[arg(long, default_value_t = 5)]
        compare_fuel: u32,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long)]
        timings: bool,
    },
    /// Three-way equality on random programs and automata.
    Corpus {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        count: usize,
        #[arg(long, default_value_t = 4)]
        max_depth: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

fn tolerance(s: &str) -> Result<Rational, PipelineError> {
    parse_rational(s).map_err(|e| PipelineError::Config(e.to_string()))
}

fn print_wp(r: &WpResult, state: Option<&str>, format: Format) -> Result<(), PipelineError> {
    if let Some(s) = state {
        if r.get(s).is_none() {
            return Err(PipelineError::Config(format!("no state `{s}` in the specification")));
        }
    }
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(r).expect("serializes")),
        Format::Text => {
            println!(
                "mode {}, fuel {}, {}, delta {}",
                r.mode,
                r.fuel,
                if r.converged { "converged" } else { "not converged" },
                r.delta
            );
            for (st, v) in &r.per_state {
                if state.is_none_or(|s| s == st) {
                    println!("{st}: {v}");
                }
            }
        }
    }
    Ok(())
}

fn wp_cmd(args: &WpArgs) -> Result<u8, PipelineError> {
    let WpArgs { target, mode, state, fuel, tol, fuel_cap, side, format } = args;
    let (mode, fuel_cap, side, format, state) = (*mode, *fuel_cap, *side, *format, state.as_deref());
    let loaded = Loaded::from_paths(&target.program, &target.spec)?;
    let q: InferenceQuery = loaded.query(mode)?;
    let simplified = loaded.simplified();
    let p = &loaded.program;
    let op = match side {
        Side::Source => WpOp::Source { term: &p.term, sig: &p.signature, query: &q },
        Side::Sync => WpOp::Sync { term: &p.term, sig: &p.signature, query: &q },
        Side::Product => WpOp::Product { term: &simplified, sig: &loaded.product.signature, query: &q },
    };
    let r = match *fuel {
        Some(n) => {
            let mut r = match side {
                Side::Source => wp_source(&p.term, &p.signature, &q, n)?,
                Side::Sync => wp_sync(&p.term, &p.signature, &q, n)?,
                Side::Product => wp_product(&simplified, &loaded.product.signature, &q, n)?,
            };
            r.converged = true;
            r
        }
        None => {
            let tol = tolerance(tol)?;
            RunConfig { fuel_cap, tol: tol.clone(), ..RunConfig::new("", "", mode) }.validate()?;
            wp_iterate(&op, &tol, fuel_cap)?
        }
    };
    print_wp(&r, state, format)?;
    Ok(if r.converged { 0 } else { EXIT_NOT_CONVERGED })
}

fn report(cfg: &RunConfig) -> Result<u8, PipelineError> {
    let r = pipeline::run_verification(cfg)?;
    match cfg.output_format {
        OutputFormat::Json => println!("{}", r.to_json()),
        OutputFormat::Text => print!("{}", r.to_text()),
    }
    Ok(r.exit_code() as u8)
}

fn run(cli: Cli) -> Result<u8, PipelineError> {
    match cli.cmd {
        Cmd::Typecheck { program } => {
            let text = pipeline::read_file(&program)?;
            let p = parse_program(&text, &Signature::standard())?;
            println!("{}", typecheck(&Context::new(), &p.term, &p.signature)?);
            Ok(0)
        }
        Cmd::Transform { target, simplify, format } => {
            let loaded = Loaded::from_paths(&target.program, &target.spec)?;
            let e = export_product(&loaded, simplify)?;
            match format {
                Format::Text => println!("{}", e.text),
                Format::Json => println!("{}", serde_json::to_string_pretty(&e).expect("serializes")),
            }
            Ok(0)
        }
        Cmd::Wp(args) => wp_cmd(&args),
        Cmd::Check { target, mode, state, fuel_cap, tol, format, timings } => {
            let cfg = RunConfig {
                initial_state: state,
                fuel_cap,
                tol: tolerance(&tol)?,
                output_format: format.into(),
                check_theorems: true,
                timings,
                ..RunConfig::new(target.program, target.spec, mode)
            };
            report(&cfg)
        }
        Cmd::Verify { target, mode, state, fuel_cap, tol, compare_fuel, format, timings } => {
            let cfg = RunConfig {
                initial_state: state,
                fuel_cap,
                tol: tolerance(&tol)?,
                output_format: format.into(),
                compare_fuel,
                timings,
                ..RunConfig::new(target.program, target.spec, mode)
            };
            report(&cfg)
        }
        Cmd::Corpus { seed, count, max_depth, format } => {
            if count == 0 {
                return Err(PipelineError::Config("count must be at least 1".into()));
            }
            let s = pipeline::corpus_check(seed, count, max_depth);
            match format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&s).expect("serializes")),
                Format::Text => {
                    println!(
                        "seed {} count {} fuels 1..{}: {} passed, {} failed, {} type-preserving",
                        s.seed, s.count, s.fuels, s.passed, s.failed, s.type_preserved
                    );
                    for f in &s.failures {
                        println!(
                            "FAIL #{} (case seed {}, {}): {}\n  {}",
                            f.index, f.case_seed, f.mode, f.detail, f.program
                        );
                    }
                }
            }
            Ok(if s.failed == 0 { 0 } else { EXIT_THEOREM })
        }
    }
}

fn main() -> ExitCode {
    tvp::exec::init_threads_from_env();
    // Usage errors share the input-error code; 2 means "not converged".
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error[{}]: {e}", e.stage());
            ExitCode::from(EXIT_INPUT)
        }
    }
}
