use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use qcoh_cli::format::{Loaded, MatrixFile};
use qcoh_cli::json;
use qcoh_cli::views::{
    ClassifyView, CoherenceView, DecompositionView, OutcomeView, PropertyReportView,
    SuperValidationView, ValidationView,
};
use qcoh_core::channel::{validate_choi, Channel};
use qcoh_core::coherence::{channel_coherence, state_coherence, Measure};
use qcoh_core::harness::{run_suite, EnsembleConfig, Property, ALL_PROPERTIES};
use qcoh_core::incoherent::{ic_decompose, is_incoherent};
use qcoh_core::mat::{eigvalsh, DimPair};
use qcoh_core::superchannel::{
    apply_superchannel, selective_apply, superkraus_from_choi, validate_super_choi, Superchannel,
};

/// Analyze quantum channels and superchannels through their Choi
/// matrices: validate, classify, measure coherence, construct maximally
/// coherent channels, and run randomized property suites.
#[derive(Parser)]
#[command(name = "qcoh", version)]
struct Cli {
    /// Tolerance for validity and classification checks.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,

    /// Emit machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,

    /// Seed for the randomized property suites.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MeasureArg {
    L1,
    #[value(name = "rel_ent")]
    RelEnt,
}

impl From<MeasureArg> for Measure {
    fn from(arg: MeasureArg) -> Measure {
        match arg {
            MeasureArg::L1 => Measure::L1,
            MeasureArg::RelEnt => Measure::RelEnt,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check a channel, superchannel or state file for validity.
    Validate {
        path: PathBuf,
        /// Read the channel from its `kraus` field instead of `matrix`.
        #[arg(long)]
        kraus: bool,
    },
    /// Evaluate a coherence measure of a channel or state file.
    Coherence {
        path: PathBuf,
        #[arg(long, value_enum, default_value = "l1")]
        measure: MeasureArg,
        /// Read the channel from its `kraus` field instead of `matrix`.
        #[arg(long)]
        kraus: bool,
    },
    /// Classify a channel: incoherence, the diagonal-image condition, and
    /// (when incoherent) its decomposition into deterministic relabelings.
    Classify {
        path: PathBuf,
        /// Read the channel from its `kraus` field instead of `matrix`.
        #[arg(long)]
        kraus: bool,
    },
    /// Write the maximally coherent channel for the given dimensions.
    Maxcoh {
        /// Input dimension.
        da: usize,
        /// Output dimension (at least the input dimension).
        db: usize,
        /// Output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply a superchannel file to a channel file.
    Superapply {
        superchannel: PathBuf,
        channel: PathBuf,
        /// Report per-outcome probabilities and subnormalized Choi
        /// matrices instead of the deterministic image.
        #[arg(long)]
        selective: bool,
        /// Output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the randomized property suites.
    Propcheck {
        #[arg(long, default_value_t = 500)]
        trials: usize,
        /// Channel dimensions to sample, e.g. "2x2,2x3,3x3".
        #[arg(long)]
        dims: Option<String>,
        /// Comma-separated property names (all when omitted).
        #[arg(long)]
        properties: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(error) => {
            eprintln!("error: {error:#}");
            ExitCode::from(2)
        }
    }
}

const PASS: ExitCode = ExitCode::SUCCESS;
const FAIL: ExitCode = ExitCode::FAILURE;

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Validate { ref path, kraus } => validate_cmd(&cli, path, kraus),
        Command::Coherence {
            ref path,
            measure,
            kraus,
        } => coherence_cmd(&cli, path, measure.into(), kraus),
        Command::Classify { ref path, kraus } => classify_cmd(&cli, path, kraus),
        Command::Maxcoh { da, db, ref out } => maxcoh_cmd(da, db, out.as_deref()),
        Command::Superapply {
            ref superchannel,
            ref channel,
            selective,
            ref out,
        } => superapply_cmd(&cli, superchannel, channel, selective, out.as_deref()),
        Command::Propcheck {
            trials,
            ref dims,
            ref properties,
        } => propcheck_cmd(&cli, trials, dims.as_deref(), properties.as_deref()),
    }
}

fn read_file(path: &Path) -> Result<MatrixFile> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    MatrixFile::parse(&text).with_context(|| format!("cannot parse {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)
            .with_context(|| format!("cannot write {}", path.display()))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn validate_cmd(cli: &Cli, path: &Path, kraus: bool) -> Result<ExitCode> {
    let loaded = read_file(path)?.load(kraus)?;
    match loaded {
        Loaded::Channel { dims, matrix } => {
            let report = validate_choi(&matrix, dims, cli.tol)?;
            let view = ValidationView::channel(&report);
            if cli.json {
                println!("{}", json::to_string(&view));
            } else {
                print_validation(&view);
            }
            Ok(if report.verdict { PASS } else { FAIL })
        }
        Loaded::Superchannel {
            in_dims,
            out_dims,
            matrix,
        } => {
            let report = validate_super_choi(&matrix, in_dims, out_dims, cli.tol)?;
            let view = SuperValidationView::from(&report);
            if cli.json {
                println!("{}", json::to_string(&view));
            } else {
                println!("kind: superchannel");
                println!("hermitian: {}", view.is_hermitian);
                println!("min eigenvalue: {}", json::format_f64(view.min_eigenvalue));
                println!("slice residual: {}", json::format_f64(view.slice_residual));
                println!(
                    "completeness residual: {}",
                    json::format_f64(view.completeness_residual)
                );
                println!("trace residual: {}", json::format_f64(view.trace_residual));
                println!("verdict: {}", verdict_word(view.verdict));
            }
            Ok(if report.verdict { PASS } else { FAIL })
        }
        Loaded::State { matrix } => {
            let is_hermitian = matrix.herm_residual() <= cli.tol;
            let min_eigenvalue = eigvalsh(&matrix)?.first().copied().unwrap_or(0.0);
            let trace_residual = (matrix.trace().re - 1.0).abs();
            let verdict =
                is_hermitian && min_eigenvalue >= -cli.tol && trace_residual <= cli.tol;
            let view = ValidationView {
                kind: "state",
                is_hermitian,
                min_eigenvalue,
                trace_residual,
                verdict,
            };
            if cli.json {
                println!("{}", json::to_string(&view));
            } else {
                print_validation(&view);
            }
            Ok(if verdict { PASS } else { FAIL })
        }
    }
}

fn print_validation(view: &ValidationView) {
    println!("kind: {}", view.kind);
    println!("hermitian: {}", view.is_hermitian);
    println!("min eigenvalue: {}", json::format_f64(view.min_eigenvalue));
    println!("trace residual: {}", json::format_f64(view.trace_residual));
    println!("verdict: {}", verdict_word(view.verdict));
}

fn verdict_word(verdict: bool) -> &'static str {
    if verdict {
        "valid"
    } else {
        "invalid"
    }
}

fn load_channel(cli: &Cli, path: &Path, kraus: bool) -> Result<std::result::Result<Channel, String>> {
    match read_file(path)?.load(kraus)? {
        Loaded::Channel { dims, matrix } => match Channel::new(matrix, dims, cli.tol) {
            Ok(channel) => Ok(Ok(channel)),
            Err(error) => Ok(Err(format!("{}: {error}", path.display()))),
        },
        other => bail!(
            "{} holds a {}, expected a channel",
            path.display(),
            kind_word(&other)
        ),
    }
}

fn kind_word(loaded: &Loaded) -> &'static str {
    match loaded {
        Loaded::Channel { .. } => "channel",
        Loaded::Superchannel { .. } => "superchannel",
        Loaded::State { .. } => "state",
    }
}

fn coherence_cmd(cli: &Cli, path: &Path, measure: Measure, kraus: bool) -> Result<ExitCode> {
    let value = match read_file(path)?.load(kraus)? {
        Loaded::Channel { dims, matrix } => match Channel::new(matrix, dims, cli.tol) {
            Ok(channel) => channel_coherence(&channel, measure),
            Err(error) => {
                eprintln!("invalid channel: {error}");
                return Ok(FAIL);
            }
        },
        Loaded::State { matrix } => state_coherence(&matrix, measure),
        Loaded::Superchannel { .. } => {
            bail!("coherence takes a channel or state file, not a superchannel")
        }
    };
    match value {
        Ok(value) => {
            if cli.json {
                println!("{}", json::to_string(&CoherenceView::from(&value)));
            } else {
                println!("{}", json::format_f64(value.value));
            }
            Ok(PASS)
        }
        Err(error) => {
            eprintln!("invalid object: {error}");
            Ok(FAIL)
        }
    }
}

fn classify_cmd(cli: &Cli, path: &Path, kraus: bool) -> Result<ExitCode> {
    let channel = match load_channel(cli, path, kraus)? {
        Ok(channel) => channel,
        Err(message) => {
            eprintln!("invalid channel: {message}");
            return Ok(FAIL);
        }
    };
    let incoherent = is_incoherent(&channel, cli.tol);
    let mio_condition = qcoh_core::channel::is_mio(&channel, cli.tol);
    let decomposition = if incoherent {
        Some(DecompositionView::from(&ic_decompose(&channel, cli.tol)?))
    } else {
        None
    };
    let view = ClassifyView {
        incoherent,
        mio_condition,
        decomposition,
    };
    if cli.json {
        println!("{}", json::to_string(&view));
    } else {
        println!("incoherent: {incoherent}");
        println!("mio condition: {mio_condition}");
        if let Some(decomposition) = &view.decomposition {
            for (weight, assignment) in decomposition
                .weights
                .iter()
                .zip(&decomposition.assignments)
            {
                println!("  weight {} assignment {assignment:?}", json::format_f64(*weight));
            }
        }
    }
    Ok(PASS)
}

fn maxcoh_cmd(da: usize, db: usize, out: Option<&Path>) -> Result<ExitCode> {
    let dims = DimPair::new(da, db)?;
    let channel = qcoh_core::coherence::max_coherent_channel(dims, None)
        .context("cannot build a maximally coherent channel")?;
    let file = MatrixFile::channel(&channel);
    emit(out, &json::to_string(&file))?;
    Ok(PASS)
}

fn superapply_cmd(
    cli: &Cli,
    super_path: &Path,
    channel_path: &Path,
    selective: bool,
    out: Option<&Path>,
) -> Result<ExitCode> {
    let superchannel = match read_file(super_path)?.load(false)? {
        Loaded::Superchannel {
            in_dims,
            out_dims,
            matrix,
        } => match Superchannel::new(matrix, in_dims, out_dims, cli.tol) {
            Ok(s) => s,
            Err(error) => {
                eprintln!("invalid superchannel: {error}");
                return Ok(FAIL);
            }
        },
        other => bail!(
            "{} holds a {}, expected a superchannel",
            super_path.display(),
            kind_word(&other)
        ),
    };
    let channel = match load_channel(cli, channel_path, false)? {
        Ok(channel) => channel,
        Err(message) => {
            eprintln!("invalid channel: {message}");
            return Ok(FAIL);
        }
    };
    if channel.dims() != superchannel.in_dims() {
        bail!(
            "dimension mismatch: superchannel expects a {}x{} channel, file holds {}x{}",
            superchannel.in_dims().a,
            superchannel.in_dims().b,
            channel.dims().a,
            channel.dims().b
        );
    }
    if selective {
        let kraus = superkraus_from_choi(&superchannel)?;
        let outcomes = selective_apply(&kraus, &channel)?;
        let views: Vec<OutcomeView> = outcomes.iter().map(OutcomeView::from).collect();
        if cli.json {
            emit(out, &json::to_string(&views))?;
        } else {
            for (index, outcome) in outcomes.iter().enumerate() {
                println!(
                    "outcome {index}: probability {}",
                    json::format_f64(outcome.probability)
                );
            }
        }
    } else {
        let image = apply_superchannel(&superchannel, &channel)?;
        let file = MatrixFile::channel(&image);
        emit(out, &json::to_string(&file))?;
    }
    Ok(PASS)
}

fn parse_dims_list(text: &str) -> Result<Vec<DimPair>> {
    let mut dims = Vec::new();
    for part in text.split(',') {
        let (a, b) = part
            .trim()
            .split_once('x')
            .with_context(|| format!("bad dims entry {part:?}, expected AxB"))?;
        let a: usize = a.trim().parse().context("bad input dimension")?;
        let b: usize = b.trim().parse().context("bad output dimension")?;
        dims.push(DimPair::new(a, b)?);
    }
    if dims.is_empty() {
        bail!("dims list is empty");
    }
    Ok(dims)
}

fn parse_properties(text: &str) -> Result<Vec<Property>> {
    let mut properties = Vec::new();
    for part in text.split(',') {
        let name = part.trim();
        let property = Property::parse(name).with_context(|| {
            let known: Vec<&str> = ALL_PROPERTIES.iter().map(|p| p.name()).collect();
            format!("unknown property {name:?}; known: {}", known.join(", "))
        })?;
        properties.push(property);
    }
    Ok(properties)
}

fn propcheck_cmd(
    cli: &Cli,
    trials: usize,
    dims: Option<&str>,
    properties: Option<&str>,
) -> Result<ExitCode> {
    if trials == 0 {
        bail!("--trials must be at least 1");
    }
    let mut config = EnsembleConfig {
        trials,
        tol: cli.tol,
        ..EnsembleConfig::default()
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(dims) = dims {
        config.dims = parse_dims_list(dims)?;
    }
    let selection = match properties {
        Some(text) => parse_properties(text)?,
        None => ALL_PROPERTIES.to_vec(),
    };
    let reports = run_suite(&config, &selection);
    let all_pass = reports.iter().all(|r| r.pass);
    if cli.json {
        let views: Vec<PropertyReportView> = reports.iter().map(PropertyReportView::from).collect();
        println!("{}", json::to_string(&views));
    } else {
        println!(
            "{:<32} {:>8} {:>9} {:>14}  result",
            "property", "trials", "failures", "worst"
        );
        for report in &reports {
            println!(
                "{:<32} {:>8} {:>9} {:>14.3e}  {}",
                report.property,
                report.trials,
                report.failures + report.generator_failures,
                report.worst_residual,
                if report.pass { "pass" } else { "FAIL" }
            );
        }
        println!(
            "seed {} tol {}  overall: {}",
            config.seed,
            config.tol,
            if all_pass { "pass" } else { "FAIL" }
        );
    }
    Ok(if all_pass { PASS } else { FAIL })
}
