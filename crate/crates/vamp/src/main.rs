//! Thin command-line front end over the library pipeline. Option
//! precedence is flags > JSON config file > built-in defaults. Exit
//! codes: 0 success (including segmentation failure, which is a valid
//! measurement), 2 configuration error, 3 I/O error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use vamp::appearance::ShapeMode;
use vamp::corruption::CorruptionKind;
use vamp::media::load_frames;
use vamp::motion::Normalization;
use vamp::pipeline::{
    run_corrupt, run_experiment, run_score, sweep_csv, PipelineError, SamplerConfig, SamplerKind,
};
use vamp::regions::TrackerParams;
use vamp::scoring::{flat_weights_to_config, ScoreConfig, CSV_HEADER};

#[derive(Parser)]
#[command(name = "vamp", version, about = "Reference-free video quality scoring")]
struct Cli {
    /// JSON config file mirroring the flags; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker thread count (results are identical at any value).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Track objects in a frame directory and compute the VAMP score.
    Score(ScoreArgs),
    /// Write corrupted copies of a clip at one or more severity levels.
    Corrupt(CorruptArgs),
    /// Score the original plus all 5 kinds x 5 levels of corruption.
    Experiment(ExperimentArgs),
    /// Recompute VAMP across appearance weights alpha.
    Sweep(SweepArgs),
}

#[derive(Args, Clone)]
struct CommonScoreArgs {
    /// Directory of lossless frames, lexicographic order.
    input_dir: PathBuf,
    /// Filename glob for frames.
    #[arg(long)]
    pattern: Option<String>,
    /// Weight preset: sift-default or sam-default.
    #[arg(long)]
    preset: Option<String>,
    /// Flat color,shape,texture,motion weights (overrides --preset).
    #[arg(long)]
    weights: Option<String>,
    /// single_wrap (default) or as_written.
    #[arg(long)]
    shape_mode: Option<String>,
    /// frame_diagonal (default) or raw_pixels.
    #[arg(long)]
    motion_norm: Option<String>,
    /// Sampler for first-frame seeding: random, grid, or sift.
    #[arg(long)]
    sampler: Option<String>,
    /// RNG seed (random sampler, corruption).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ScoreArgs {
    #[command(flatten)]
    common: CommonScoreArgs,
    /// Label-map manifest JSON; wins over --sampler when given.
    #[arg(long)]
    masks: Option<PathBuf>,
    /// Report JSON output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CorruptArgs {
    input_dir: PathBuf,
    #[arg(long)]
    pattern: Option<String>,
    /// brightness, gaussian_noise, impulse_noise, defocus_blur, black_shapes.
    #[arg(long)]
    kind: String,
    /// Levels, e.g. "3", "1,3,5", or "1-5".
    #[arg(long, default_value = "1-5")]
    levels: String,
    #[arg(long)]
    seed: Option<u64>,
    /// Re-sample black-shape geometry every frame instead of per clip.
    #[arg(long)]
    per_frame: bool,
    /// Output root; one subdirectory per level.
    #[arg(long)]
    out_root: PathBuf,
}

#[derive(Args)]
struct ExperimentArgs {
    #[command(flatten)]
    common: CommonScoreArgs,
    /// Score every corruption kind (the default and only mode).
    #[arg(long)]
    all_corruptions: bool,
    /// Table CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Percent-change JSON output path (defaults to --out with .json).
    #[arg(long)]
    out_json: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonScoreArgs,
    /// Comma-separated alphas in [0,1].
    #[arg(long)]
    alphas: Option<String>,
    /// Sweep CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Optional JSON file mirroring the flags; any present field acts as the
/// default for the matching flag.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    pattern: Option<String>,
    preset: Option<String>,
    weights: Option<String>,
    shape_mode: Option<String>,
    motion_norm: Option<String>,
    sampler: Option<String>,
    seed: Option<u64>,
    alphas: Option<String>,
    workers: Option<usize>,
}

enum CliError {
    Config(String),
    Io(String),
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Media(_) | PipelineError::Io(_) => CliError::Io(e.to_string()),
            PipelineError::Region(ref r) => {
                use vamp::regions::RegionError::*;
                match r {
                    ManifestMissing(_) | LabelMapDimMismatch { .. } => CliError::Io(e.to_string()),
                    _ => CliError::Config(e.to_string()),
                }
            }
            _ => CliError::Config(e.to_string()),
        }
    }
}

fn load_file_config(path: Option<&Path>) -> Result<FileConfig, CliError> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn parse_weights(s: &str) -> Result<[f64; 4], CliError> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Config(format!("bad --weights {s:?}: {e}")))?;
    parts
        .try_into()
        .map_err(|_| CliError::Config(format!("--weights needs 4 values, got {s:?}")))
}

fn parse_levels(s: &str) -> Result<Vec<u8>, CliError> {
    let bad = || CliError::Config(format!("bad --levels {s:?}"));
    if let Some((a, b)) = s.split_once('-') {
        let (a, b): (u8, u8) = (
            a.trim().parse().map_err(|_| bad())?,
            b.trim().parse().map_err(|_| bad())?,
        );
        if a > b || b > 5 {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',')
        .map(|p| p.trim().parse::<u8>().map_err(|_| bad()))
        .collect()
}

/// flags > config file > defaults, field by field.
fn resolve_common(
    c: &CommonScoreArgs,
    file: &FileConfig,
) -> Result<(String, SamplerConfig, ScoreConfig), CliError> {
    let pick = |flag: &Option<String>, filed: &Option<String>| -> Option<String> {
        flag.clone().or_else(|| filed.clone())
    };
    let pattern = pick(&c.pattern, &file.pattern).unwrap_or_else(|| "*.png".into());

    let mut score_cfg = match pick(&c.preset, &file.preset) {
        Some(name) => ScoreConfig::preset(&name)
            .ok_or_else(|| CliError::Config(format!("unknown preset {name:?}")))?,
        None => ScoreConfig::default(),
    };
    if let Some(w) = pick(&c.weights, &file.weights) {
        let preset_name = score_cfg.preset_name.take();
        score_cfg = flat_weights_to_config(parse_weights(&w)?)
            .map_err(|e| CliError::Config(e.to_string()))?;
        let _ = preset_name; // explicit weights replace the preset
    }
    if let Some(m) = pick(&c.shape_mode, &file.shape_mode) {
        score_cfg.shape_mode = match m.as_str() {
            "single_wrap" => ShapeMode::SingleWrap,
            "as_written" => ShapeMode::AsWritten,
            other => return Err(CliError::Config(format!("unknown shape mode {other:?}"))),
        };
    }
    if let Some(m) = pick(&c.motion_norm, &file.motion_norm) {
        score_cfg.motion_normalization = match m.as_str() {
            "frame_diagonal" => Normalization::FrameDiagonal,
            "raw_pixels" => Normalization::RawPixels,
            other => return Err(CliError::Config(format!("unknown motion norm {other:?}"))),
        };
    }

    let mut sampler = SamplerConfig::default();
    if let Some(s) = pick(&c.sampler, &file.sampler) {
        sampler.kind = SamplerKind::parse(&s).map_err(|e| CliError::Config(e.to_string()))?;
    }
    if let Some(seed) = c.seed.or(file.seed) {
        sampler.seed = seed;
    }
    Ok((pattern, sampler, score_cfg))
}

fn clip_id(dir: &Path) -> String {
    dir.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| dir.display().to_string())
}

fn write_out(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .map_err(|e| CliError::Io(format!("{}: {e}", parent.display())))?;
        }
    }
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = load_file_config(cli.config.as_deref())?;
    if let Some(workers) = cli.workers.or(file.workers) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let tracker = TrackerParams::default();
    match cli.command {
        Command::Score(args) => {
            let (pattern, sampler, score_cfg) = resolve_common(&args.common, &file)?;
            let clip = load_frames(&args.common.input_dir, &pattern)
                .map_err(|e| CliError::Io(e.to_string()))?;
            let report = run_score(
                &clip,
                &clip_id(&args.common.input_dir),
                args.masks.as_deref(),
                &sampler,
                &tracker,
                &score_cfg,
            )?;
            if let Some(out) = &args.out {
                let text = serde_json::to_string_pretty(&report).expect("report serializes");
                write_out(out, &(text + "\n"))?;
            }
            println!("{CSV_HEADER}");
            println!("{}", report.breakdown.csv_row(&report.clip_id));
            Ok(())
        }
        Command::Corrupt(args) => {
            let pattern = args
                .pattern
                .or_else(|| file.pattern.clone())
                .unwrap_or_else(|| "*.png".into());
            let kind = CorruptionKind::parse(&args.kind)
                .ok_or_else(|| CliError::Config(format!("unknown kind {:?}", args.kind)))?;
            let levels = parse_levels(&args.levels)?;
            let seed = args.seed.or(file.seed).unwrap_or(0);
            let manifests = run_corrupt(
                &args.input_dir,
                &pattern,
                kind,
                &levels,
                seed,
                args.per_frame,
                &args.out_root,
            )?;
            for m in &manifests {
                println!("{} level {} -> {}", m.kind.name(), m.level, m.output.as_deref().unwrap_or("?"));
            }
            Ok(())
        }
        Command::Experiment(args) => {
            let (pattern, sampler, score_cfg) = resolve_common(&args.common, &file)?;
            let clip = load_frames(&args.common.input_dir, &pattern)
                .map_err(|e| CliError::Io(e.to_string()))?;
            let seed = args.common.seed.or(file.seed).unwrap_or(0);
            let result = run_experiment(
                &clip,
                &clip_id(&args.common.input_dir),
                &sampler,
                &tracker,
                &score_cfg,
                seed,
            )?;
            let csv = result.to_csv();
            match &args.out {
                Some(out) => {
                    write_out(out, &csv)?;
                    let json_path = args
                        .out_json
                        .clone()
                        .unwrap_or_else(|| out.with_extension("json"));
                    let json = serde_json::to_string_pretty(&result.percent_change_json())
                        .expect("json serializes");
                    write_out(&json_path, &(json + "\n"))?;
                }
                None => print!("{csv}"),
            }
            Ok(())
        }
        Command::Sweep(args) => {
            let (pattern, sampler, score_cfg) = resolve_common(&args.common, &file)?;
            let alphas_text = args
                .alphas
                .or_else(|| file.alphas.clone())
                .unwrap_or_else(|| "0,0.25,0.5,0.75,1".into());
            let alphas: Vec<f64> = alphas_text
                .split(',')
                .map(|p| p.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| CliError::Config(format!("bad --alphas {alphas_text:?}: {e}")))?;
            let clip = load_frames(&args.common.input_dir, &pattern)
                .map_err(|e| CliError::Io(e.to_string()))?;
            let report = run_score(
                &clip,
                &clip_id(&args.common.input_dir),
                None,
                &sampler,
                &tracker,
                &score_cfg,
            )?;
            let csv = sweep_csv(&report.breakdown, &alphas)?;
            match &args.out {
                Some(out) => write_out(out, &csv)?,
                None => print!("{csv}"),
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
