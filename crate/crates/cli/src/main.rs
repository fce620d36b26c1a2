//! `segsynth` command-line tool.

use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use segsynth::contour_synth::{synthesize, table1_segmentors, SegmentorConfig, SynthError};
use segsynth::mask_io::{load_mask, save_mask, write_contour, MaskError, MaskFormat};
use segsynth::metrics::{
    confusion, evaluate_all_with, ConfusionCounts, EvalOptions, MetricReport, MetricsError,
};
use segsynth::study::{
    convex_truths, group_metrics, load_corpus, range_experiment, rank_correlation, run_battery,
    table3_fixture, tn_experiment, write_outputs, BatteryStore, Padding, RankTable, StudyError,
    DEFAULT_THRESHOLD,
};
use segsynth_service::{ServiceConfig, ServiceError};

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Mask(#[from] MaskError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Study(#[from] StudyError),
    #[error(transparent)]
    Service(#[from] ServiceError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{0}")]
    Usage(String),
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "segsynth",
    version,
    about = "Synthetic segmentation errors and metric studies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Emulate segmentors on one truth mask.
    Synth(SynthArgs),
    /// Evaluate all twenty metrics for one prediction.
    Evaluate(EvaluateArgs),
    /// Battery, ranking, correlation and metric probes.
    #[command(subcommand)]
    Study(StudyCommand),
    /// Run the local HTTP preview service.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Png,
    Pgm,
}

impl From<FormatArg> for MaskFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Png => MaskFormat::Png,
            FormatArg::Pgm => MaskFormat::Pgm,
        }
    }
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    truth: PathBuf,
    /// JSON file holding one segmentor config or an array of them.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Only run the config with this id.
    #[arg(long)]
    segmentor: Option<String>,
    #[arg(long, value_enum, default_value = "png")]
    format: FormatArg,
    /// Pixels above this intensity are foreground.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: u8,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(long)]
    truth: PathBuf,
    #[arg(long)]
    pred: PathBuf,
    /// `.json` or `.csv`; prints JSON when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    msi_tolerance: f64,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: u8,
}

#[derive(Debug, Subcommand)]
enum StudyCommand {
    /// Run the battery and write the store plus ranks, correlations and groups.
    Run(RunArgs),
    /// Mode ranks from a store.
    Rank(RankArgs),
    /// Correlate metric rank rows and group them.
    Correlate(CorrelateArgs),
    /// Best/middle/worst value ranges per metric.
    Ranges(RangesArgs),
    /// Metric values as true negatives are added by padding.
    Tn(TnArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Directory of `.png`/`.pgm` truth masks.
    #[arg(
        long,
        required_unless_present = "convex_truths",
        conflicts_with = "convex_truths"
    )]
    corpus: Option<PathBuf>,
    /// Generate this many convex truths instead of reading a corpus.
    #[arg(long)]
    convex_truths: Option<usize>,
    /// Frame size of generated truths.
    #[arg(long, default_value_t = 128)]
    size: usize,
    /// Segmentor configs (JSON array); the ten reference segmentors when omitted.
    #[arg(long)]
    configs: Option<PathBuf>,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0.95)]
    threshold: f64,
    #[arg(long, default_value_t = 1.0)]
    msi_tolerance: f64,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    mask_threshold: u8,
}

#[derive(Debug, Args)]
struct RankArgs {
    #[arg(long)]
    store: PathBuf,
    /// Defaults to `table3_mode_ranks.csv` in the store.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CorrelateArgs {
    /// Store directory holding `table3_mode_ranks.csv`.
    #[arg(long, group = "source")]
    store: Option<PathBuf>,
    /// A mode-rank CSV.
    #[arg(long, group = "source")]
    ranks: Option<PathBuf>,
    /// Use the shipped reference rank table.
    #[arg(long, group = "source")]
    fixture: bool,
    #[arg(long, default_value_t = 0.95)]
    threshold: f64,
    /// Output directory; defaults to the store.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RangesArgs {
    #[arg(long)]
    truth: PathBuf,
    /// Defaults to the truth itself.
    #[arg(long)]
    best: Option<PathBuf>,
    #[arg(long)]
    middle: PathBuf,
    #[arg(long)]
    worst: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    msi_tolerance: f64,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: u8,
}

#[derive(Debug, Args)]
struct TnArgs {
    #[arg(long)]
    truth: PathBuf,
    #[arg(long)]
    pred: PathBuf,
    /// `k` (all sides) or `top,bottom,left,right`; repeat for each row.
    #[arg(long = "pad", value_parser = parse_padding, default_values = ["0", "10", "50"])]
    pads: Vec<Padding>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    msi_tolerance: f64,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: u8,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long, default_value = segsynth_service::DEFAULT_BIND)]
    bind: SocketAddr,
    /// Idle seconds before a session is dropped.
    #[arg(long, default_value_t = 3600)]
    session_ttl: u64,
    /// Serve static UI assets from this directory.
    #[arg(long)]
    serve_ui: Option<PathBuf>,
}

fn parse_padding(s: &str) -> std::result::Result<Padding, String> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    match parts[..] {
        [k] => Ok(Padding::uniform(k)),
        [top, bottom, left, right] => Ok(Padding {
            top,
            bottom,
            left,
            right,
        }),
        _ => Err("expected `k` or `top,bottom,left,right`".into()),
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|source| CliError::Json {
        path: path.to_path_buf(),
        source,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("serializable");
    bytes.push(b'\n');
    fs::write(path, bytes).map_err(io_err(path))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(io_err(path))
}

fn eval_options(msi_tolerance: f64) -> Result<EvalOptions> {
    if !(msi_tolerance.is_finite() && msi_tolerance > 0.0) {
        return Err(MetricsError::InvalidTolerance(msi_tolerance).into());
    }
    Ok(EvalOptions { msi_tolerance })
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ConfigFile {
    One(Box<SegmentorConfig>),
    Many(Vec<SegmentorConfig>),
}

fn read_configs(path: &Path) -> Result<Vec<SegmentorConfig>> {
    Ok(match read_json(path)? {
        ConfigFile::One(c) => vec![*c],
        ConfigFile::Many(v) => v,
    })
}

fn synth(args: SynthArgs) -> Result<()> {
    let truth = load_mask(&args.truth, args.threshold)?;
    let mut configs = read_configs(&args.config)?;
    if let Some(id) = &args.segmentor {
        configs.retain(|c| &c.id == id);
        if configs.is_empty() {
            return Err(CliError::Usage(format!(
                "no segmentor `{id}` in {}",
                args.config.display()
            )));
        }
    }
    let stem = args
        .truth
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("truth")
        .to_string();
    let format = MaskFormat::from(args.format);
    create_dir(&args.out)?;
    for config in &configs {
        let s = synthesize(&truth, config, args.seed)?;
        let base = args.out.join(format!("{stem}_seg{}", config.id));
        let mask_path = base.with_extension(format.extension());
        save_mask(&s.mask, &mask_path, format)?;
        let contour_path = base.with_extension("contour");
        fs::write(&contour_path, write_contour(&s.contour)).map_err(io_err(&contour_path))?;
        write_json(&base.with_extension("json"), &s.provenance)?;
        println!(
            "segmentor {}: {} -> {} px, {}",
            config.id,
            s.provenance.truth_area,
            s.provenance.synthetic_area,
            mask_path.display()
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct Evaluation {
    counts: ConfusionCounts,
    report: MetricReport,
}

fn evaluate(args: EvaluateArgs) -> Result<()> {
    let opts = eval_options(args.msi_tolerance)?;
    let truth = load_mask(&args.truth, args.threshold)?;
    let pred = load_mask(&args.pred, args.threshold)?;
    let eval = Evaluation {
        counts: confusion(&truth, &pred)?,
        report: evaluate_all_with(&truth, &pred, &opts)?,
    };
    match args.out {
        None => println!(
            "{}",
            serde_json::to_string_pretty(&eval).expect("serializable")
        ),
        Some(path) => match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => {
                let text = format!(
                    "{}\n{}\n",
                    MetricReport::csv_header(),
                    eval.report.csv_row()
                );
                fs::write(&path, text).map_err(io_err(&path))?;
            }
            Some("json") => write_json(&path, &eval)?,
            _ => {
                return Err(CliError::Usage(format!(
                    "{}: output must end in .json or .csv",
                    path.display()
                )))
            }
        },
    }
    Ok(())
}

fn study_run(args: RunArgs) -> Result<()> {
    let opts = eval_options(args.msi_tolerance)?;
    let corpus = match (&args.corpus, args.convex_truths) {
        (Some(dir), _) => load_corpus(dir, args.mask_threshold)?,
        (None, Some(n)) => convex_truths(n, args.size, args.seed),
        (None, None) => unreachable!("clap requires one source"),
    };
    let configs = match &args.configs {
        Some(path) => read_configs(path)?,
        None => table1_segmentors(),
    };
    let start = Instant::now();
    let store = run_battery(&corpus, &configs, args.seed, &opts)?;
    tracing::info!(elapsed = ?start.elapsed(), "battery finished");
    store.write(&args.out)?;
    let (_, _, groups) = write_outputs(&store, args.threshold, &args.out)?;
    println!(
        "{} cells ({} failed) over {} patients and {} segmentors",
        store.manifest.cells,
        store.manifest.failed,
        corpus.len(),
        configs.len()
    );
    print_groups(&groups.groups);
    Ok(())
}

fn print_groups(groups: &[Vec<segsynth::metrics::Metric>]) {
    for (i, g) in groups.iter().enumerate() {
        let names: Vec<&str> = g.iter().map(|m| m.symbol()).collect();
        println!("group {}: {}", i + 1, names.join(" "));
    }
}

fn study_rank(args: RankArgs) -> Result<()> {
    let store = BatteryStore::load(&args.store)?;
    let table = store.mode_ranks()?;
    let out = args
        .out
        .unwrap_or_else(|| args.store.join("table3_mode_ranks.csv"));
    table.write_csv(&out)?;
    println!("{}", out.display());
    Ok(())
}

fn study_correlate(args: CorrelateArgs) -> Result<()> {
    let (table, default_out) = match (&args.store, &args.ranks, args.fixture) {
        (Some(dir), _, _) => (
            RankTable::read_csv(&dir.join("table3_mode_ranks.csv"))?,
            Some(dir.clone()),
        ),
        (None, Some(path), _) => (RankTable::read_csv(path)?, None),
        (None, None, true) => (table3_fixture(), None),
        (None, None, false) => {
            return Err(CliError::Usage(
                "one of --store, --ranks or --fixture is required".into(),
            ))
        }
    };
    let out = args
        .out
        .or(default_out)
        .ok_or_else(|| CliError::Usage("--out is required without --store".into()))?;
    let matrix = rank_correlation(&table)?;
    let groups = group_metrics(&matrix, args.threshold)?;
    create_dir(&out)?;
    matrix.write_csv(&out.join("corr_matrix.csv"))?;
    groups.write_json(&out.join("groups.json"))?;
    print_groups(&groups.groups);
    Ok(())
}

fn study_ranges(args: RangesArgs) -> Result<()> {
    let opts = eval_options(args.msi_tolerance)?;
    let truth = load_mask(&args.truth, args.threshold)?;
    let best = match &args.best {
        Some(p) => load_mask(p, args.threshold)?,
        None => truth.clone(),
    };
    let middle = load_mask(&args.middle, args.threshold)?;
    let worst = load_mask(&args.worst, args.threshold)?;
    let table = range_experiment(&truth, &best, &middle, &worst, &opts)?;
    table.write_csv(&args.out)?;
    println!("{}", args.out.display());
    Ok(())
}

fn study_tn(args: TnArgs) -> Result<()> {
    let opts = eval_options(args.msi_tolerance)?;
    let truth = load_mask(&args.truth, args.threshold)?;
    let pred = load_mask(&args.pred, args.threshold)?;
    let table = tn_experiment(&truth, &pred, &args.pads, &opts)?;
    table.write_csv(&args.out)?;
    let (changed, fixed): (Vec<_>, Vec<_>) = table.changed.iter().partition(|(_, c)| *c);
    let names = |v: &[&(segsynth::metrics::Metric, bool)]| {
        v.iter()
            .map(|(m, _)| m.symbol())
            .collect::<Vec<_>>()
            .join(" ")
    };
    println!("changed: {}", names(&changed));
    println!("invariant: {}", names(&fixed));
    Ok(())
}

fn serve(args: ServeArgs) -> Result<()> {
    let config = ServiceConfig {
        bind: args.bind,
        session_ttl: Duration::from_secs(args.session_ttl),
        ui_dir: args.serve_ui,
    };
    let runtime = tokio::runtime::Runtime::new().map_err(|source| CliError::Io {
        path: PathBuf::from("<tokio runtime>"),
        source,
    })?;
    runtime.block_on(segsynth_service::serve(config))?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth(a) => synth(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Study(StudyCommand::Run(a)) => study_run(a),
        Command::Study(StudyCommand::Rank(a)) => study_rank(a),
        Command::Study(StudyCommand::Correlate(a)) => study_correlate(a),
        Command::Study(StudyCommand::Ranges(a)) => study_ranges(a),
        Command::Study(StudyCommand::Tn(a)) => study_tn(a),
        Command::Serve(a) => serve(a),
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_target(false)
        .init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn paddings_parse() {
        assert_eq!(parse_padding("3").unwrap(), Padding::uniform(3));
        let p = parse_padding("1,2,3,4").unwrap();
        assert_eq!((p.top, p.bottom, p.left, p.right), (1, 2, 3, 4));
        assert!(parse_padding("1,2").is_err());
        assert!(parse_padding("x").is_err());
    }
}
