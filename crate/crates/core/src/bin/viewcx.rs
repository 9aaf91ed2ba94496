use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use viewcx::complex::{count_formulas, ComplexKind, DEFAULT_BUDGET};
use viewcx::io::{self, OutputFormat, RunConfig, CACHE_DIR_ENV};
use viewcx::morse::{equivariant_sequence, plain_sequence, verify_sequence, CollapseMode, Target, VerifyReport};
use viewcx::oracle::cross_validate;
use viewcx::Error;

const EXIT_VERIFY: u8 = 1;
const EXIT_RESOURCE: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(name = "viewcx", version, about = "View complexes, chromatic subdivisions and their collapses")]
struct Cli {
    /// Cap on worker threads used for enumeration.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build View^n or χ(Δ^n) and report its counts.
    Build {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "view")]
        kind: KindArg,
        #[arg(long, value_enum, default_value = "summary")]
        format: FormatArg,
        /// With --format dot, emit the face-poset Hasse diagram (n ≤ 2).
        #[arg(long)]
        hasse: bool,
    },
    /// Generate a collapsing sequence and write it as JSON.
    Collapse {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "view")]
        kind: KindArg,
        #[arg(long, value_enum, default_value = "plain")]
        mode: ModeArg,
        #[arg(long, value_enum, default_value = "void")]
        target: TargetArg,
    },
    /// Replay a sequence file against a fresh build.
    Verify {
        sequence: PathBuf,
        /// Write the JSON report here.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, env = CACHE_DIR_ENV)]
        cache_dir: Option<PathBuf>,
    },
    /// Cross-check the complexes against enumerated executions.
    Oracle {
        #[arg(long)]
        n: u8,
    },
    /// Per-n table of invariants for both complexes.
    Stats {
        #[arg(long)]
        n: u8,
        /// Last n of the range (defaults to --n).
        #[arg(long)]
        to: Option<u8>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    n: u8,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    #[arg(long, env = CACHE_DIR_ENV)]
    cache_dir: Option<PathBuf>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    View,
    Chromatic,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Dot,
    Summary,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Plain,
    Equivariant,
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetArg {
    Chromatic,
    Void,
}

impl From<KindArg> for ComplexKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::View => ComplexKind::View,
            KindArg::Chromatic => ComplexKind::Chromatic,
        }
    }
}

fn config(common: Common, kind: KindArg) -> RunConfig {
    let mut cfg = RunConfig::new(common.n, kind.into());
    cfg.budget = common.budget;
    cfg.cache_dir = common.cache_dir;
    cfg.output = common.output;
    cfg
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::ResourceLimit { .. } | Error::InvalidN(..) => EXIT_RESOURCE,
        Error::Io(_) => EXIT_IO,
        _ => EXIT_VERIFY,
    }
}

fn cmd_build(cfg: &RunConfig, hasse: bool) -> Result<(), Error> {
    cfg.validate()?;
    let c = io::load_or_build(cfg.n, cfg.kind, &cfg.build_options(), cfg.cache_dir.as_deref())?;
    let f = c.f_vector()?;
    let artifact = match cfg.format {
        OutputFormat::Json => Some(io::complex_to_json(&c)?),
        OutputFormat::Dot if hasse => Some(io::hasse_to_dot(&c)?),
        OutputFormat::Dot => Some(io::complex_to_dot(&c)),
        OutputFormat::Summary => None,
    };
    if let (Some(text), None) = (&artifact, &cfg.output) {
        print!("{text}");
        return Ok(());
    }
    if let (Some(text), Some(path)) = (&artifact, &cfg.output) {
        fs::write(path, text)?;
    }
    println!("{} n = {}", cfg.kind, cfg.n);
    println!("{}  χ = {}", io::f_summary(&f), f.euler_characteristic());
    if cfg.kind == ComplexKind::View {
        let (v, e) = count_formulas(cfg.n);
        let verdict = |a: u64, b: u64| if a == b { "ok" } else { "MISMATCH" };
        println!("f_0 = {} (formula {v}) {}", f.get(0), verdict(f.get(0), v));
        println!("f_1 = {} (formula {e}) {}", f.get(1), verdict(f.get(1), e));
    }
    Ok(())
}

fn cmd_collapse(cfg: &RunConfig) -> Result<(), Error> {
    cfg.validate()?;
    let c = io::load_or_build(cfg.n, cfg.kind, &cfg.build_options(), cfg.cache_dir.as_deref())?;
    let seq = match cfg.mode {
        CollapseMode::Plain => plain_sequence(&c, cfg.target)?,
        CollapseMode::Equivariant => equivariant_sequence(&c, cfg.target)?,
    };
    let text = io::sequence_to_json(&seq)? + "\n";
    match &cfg.output {
        Some(path) => {
            fs::write(path, text)?;
            let sizes = seq.batch_sizes();
            println!(
                "{} batches (phase boundary {}), batch sizes {:?}",
                sizes.len(),
                seq.phase_boundary,
                sizes
            );
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_verify(path: &Path, output: Option<&Path>, cache_dir: Option<&Path>) -> Result<bool, Error> {
    let text = fs::read_to_string(path)?;
    let seq = match io::sequence_from_json(&text) {
        Ok(seq) => seq,
        Err(e) => {
            println!("malformed sequence file: {e}");
            return Ok(false);
        }
    };
    if seq.source == ComplexKind::Derived {
        println!("sequence source must be view or chromatic");
        return Ok(false);
    }
    let c = match io::load_or_build(seq.n, seq.source, &Default::default(), cache_dir) {
        Ok(c) => c,
        Err(Error::Io(e)) => return Err(Error::Io(e)),
        Err(e) => {
            println!("cannot rebuild the source complex: {e}");
            return Ok(false);
        }
    };
    let report = verify_sequence(&c, &seq);
    if let Some(out) = output {
        fs::write(out, serde_json::to_string_pretty(&report)? + "\n")?;
    }
    print_report(&report);
    Ok(report.ok)
}

fn print_report(report: &VerifyReport) {
    match &report.violation {
        None => println!("OK: {} steps, {} simplices removed", report.steps.len(), report.removed_total),
        Some(v) => {
            let at = v.step.map_or("sequence".to_string(), |s| format!("step {s}"));
            println!("FAILED at {at}: {:?}: {}", v.kind, v.detail);
        }
    }
}

fn cmd_stats(n: u8, to: u8, budget: u64) -> Result<(), Error> {
    let opts = viewcx::BuildOptions { budget };
    let mut rows = Vec::new();
    for m in n..=to {
        for kind in [ComplexKind::View, ComplexKind::Chromatic] {
            rows.push(io::stats_row(&io::build(m, kind, &opts)?)?);
        }
    }
    print!("{}", io::stats_table(&rows));
    Ok(())
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Build { common, kind, format, hasse } => {
            let mut cfg = config(common, kind);
            cfg.format = match format {
                FormatArg::Json => OutputFormat::Json,
                FormatArg::Dot => OutputFormat::Dot,
                FormatArg::Summary => OutputFormat::Summary,
            };
            cmd_build(&cfg, hasse)?;
        }
        Command::Collapse { common, kind, mode, target } => {
            let mut cfg = config(common, kind);
            cfg.mode = match mode {
                ModeArg::Plain => CollapseMode::Plain,
                ModeArg::Equivariant => CollapseMode::Equivariant,
            };
            cfg.target = match target {
                TargetArg::Chromatic => Target::Chromatic,
                TargetArg::Void => Target::Void,
            };
            cmd_collapse(&cfg)?;
        }
        Command::Verify { sequence, output, cache_dir } => {
            if !cmd_verify(&sequence, output.as_deref(), cache_dir.as_deref())? {
                return Ok(EXIT_VERIFY);
            }
        }
        Command::Oracle { n } => {
            let report = cross_validate(n)?;
            println!("{}", report.summary());
            if !report.matches() {
                return Ok(EXIT_VERIFY);
            }
        }
        Command::Stats { n, to, budget } => cmd_stats(n, to.unwrap_or(n), budget)?,
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("viewcx: {e}");
        }
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("viewcx: {e}");
            let code = match &e {
                Error::Json(_) => EXIT_IO,
                other => exit_code(other),
            };
            ExitCode::from(code)
        }
    }
}
