//! End-to-end orchestration: seed regions on the first frame, track them
//! through the clip, score, and assemble serializable reports. This is
//! the layer the CLI and the examples call into.

use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corruption::{corrupt_clip_with, mix_seed, CorruptionKind, CorruptionManifest, CorruptionSpec};
use crate::media::{load_frames, save_frames, to_grayscale, VideoClip};
use crate::regions::{load_masks, region_from_seed, track_regions, ObjectTrack, RegionMask, TrackerParams};
use crate::sampling::{cluster_centroids, dbscan, detect_keypoints, sample_grid, sample_random, DetectorParams, Point2D};
use crate::scoring::{score_clip, sweep_from_breakdown, ScoreBreakdown, ScoreConfig};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Media(#[from] crate::media::MediaError),
    #[error(transparent)]
    Sampling(#[from] crate::sampling::SamplingError),
    #[error(transparent)]
    Region(#[from] crate::regions::RegionError),
    #[error(transparent)]
    Score(#[from] crate::scoring::ScoreError),
    #[error(transparent)]
    Corruption(#[from] crate::corruption::CorruptionError),
    #[error("unknown sampler {0:?} (expected random, grid, or sift)")]
    UnknownSampler(String),
    #[error("unknown corruption kind {0:?}")]
    UnknownKind(String),
    #[error("{0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    Random,
    Grid,
    #[default]
    Sift,
}

impl SamplerKind {
    pub fn parse(name: &str) -> Result<Self, PipelineError> {
        match name {
            "random" => Ok(SamplerKind::Random),
            "grid" => Ok(SamplerKind::Grid),
            "sift" => Ok(SamplerKind::Sift),
            other => Err(PipelineError::UnknownSampler(other.into())),
        }
    }
}

/// First-frame seeding knobs; echoed verbatim into reports.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerConfig {
    pub kind: SamplerKind,
    /// Point count for the random sampler.
    pub n: usize,
    /// Grid cells per axis for the grid sampler.
    pub nx: usize,
    pub ny: usize,
    pub seed: u64,
    /// DBSCAN eps as a fraction of the frame diagonal.
    pub eps_fraction: f64,
    pub min_pts: usize,
    /// Keep at most this many clusters, by descending member count.
    pub max_regions: usize,
    pub detector: DetectorParams,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            kind: SamplerKind::Sift,
            n: 200,
            nx: 16,
            ny: 12,
            seed: 17,
            eps_fraction: 0.05,
            min_pts: 4,
            max_regions: 10,
            detector: DetectorParams::default(),
        }
    }
}

/// Sample first-frame points, cluster them, and grow one rectangular
/// region per kept cluster. An empty result is not an error: it signals
/// segmentation failure to the scorer.
pub fn seed_regions(
    clip: &VideoClip,
    cfg: &SamplerConfig,
) -> Result<Vec<RegionMask>, PipelineError> {
    let frame0 = clip.frame(0);
    let (w, h) = (clip.width(), clip.height());
    let points: Vec<Point2D> = match cfg.kind {
        SamplerKind::Random => sample_random(w, h, cfg.n, cfg.seed)?,
        SamplerKind::Grid => sample_grid(w, h, cfg.nx, cfg.ny)?,
        SamplerKind::Sift => detect_keypoints(&to_grayscale(frame0), &cfg.detector)?
            .iter()
            .map(|k| k.location)
            .collect(),
    };
    if points.is_empty() {
        return Ok(Vec::new());
    }
    let eps = cfg.eps_fraction * clip.diagonal();
    let result = dbscan(&points, eps, cfg.min_pts)?;
    let centroids = cluster_centroids(&points, &result);
    // stable sort keeps the original cluster order among equal sizes
    let mut order: Vec<usize> = (0..result.clusters.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(result.clusters[i].len()));
    order.truncate(cfg.max_regions);
    order.sort_unstable();
    let mut regions = Vec::with_capacity(order.len());
    for i in order {
        let members: Vec<Point2D> = result.clusters[i].iter().map(|&j| points[j]).collect();
        regions.push(region_from_seed(frame0, centroids[i], &members)?);
    }
    Ok(regions)
}

/// Everything that determined a scoring run, echoed into its report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub score: ScoreConfig,
    pub sampler: Option<SamplerConfig>,
    pub tracker: TrackerParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub masks: Option<String>,
}

/// JSON scoring report. `timestamp_unix` is the only field allowed to
/// differ between reruns of the same command.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub clip_id: String,
    pub config: ResolvedConfig,
    pub breakdown: ScoreBreakdown,
    pub timestamp_unix: u64,
}

fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Build tracks for a clip: external label maps when a manifest is given
/// (masks win over samplers), first-frame seeding + tracking otherwise.
pub fn build_tracks(
    clip: &VideoClip,
    masks: Option<&Path>,
    sampler: &SamplerConfig,
    tracker: &TrackerParams,
) -> Result<Vec<ObjectTrack>, PipelineError> {
    if let Some(manifest) = masks {
        return Ok(load_masks(manifest, clip.len(), (clip.width(), clip.height()))?);
    }
    let regions = seed_regions(clip, sampler)?;
    if regions.is_empty() {
        return Ok(Vec::new());
    }
    Ok(track_regions(clip, &regions, tracker)?)
}

/// Track and score a clip, producing the full report.
pub fn run_score(
    clip: &VideoClip,
    clip_id: &str,
    masks: Option<&Path>,
    sampler: &SamplerConfig,
    tracker: &TrackerParams,
    score_cfg: &ScoreConfig,
) -> Result<Report, PipelineError> {
    let tracks = build_tracks(clip, masks, sampler, tracker)?;
    let breakdown = score_clip(clip, &tracks, score_cfg)?;
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        clip_id: clip_id.to_string(),
        config: ResolvedConfig {
            score: score_cfg.clone(),
            sampler: if masks.is_some() { None } else { Some(sampler.clone()) },
            tracker: tracker.clone(),
            masks: masks.map(|p| p.display().to_string()),
        },
        breakdown,
        timestamp_unix: now_unix(),
    })
}

/// Write one corrupted copy of the clip per requested level under
/// `out_root/<kind>_L<level>/`, plus a manifest JSON next to each.
/// Returns the manifests in level order.
pub fn run_corrupt(
    input_dir: &Path,
    pattern: &str,
    kind: CorruptionKind,
    levels: &[u8],
    seed: u64,
    per_frame_shapes: bool,
    out_root: &Path,
) -> Result<Vec<CorruptionManifest>, PipelineError> {
    let clip = load_frames(input_dir, pattern)?;
    let mut manifests = Vec::with_capacity(levels.len());
    for &level in levels {
        let spec = CorruptionSpec { kind, level, seed };
        let (out, mut manifest) = corrupt_clip_with(&clip, &spec, per_frame_shapes)?;
        let dir = out_root.join(format!("{}_L{}", kind.name(), level));
        save_frames(&out, &dir)?;
        manifest.source = Some(input_dir.display().to_string());
        manifest.output = Some(dir.display().to_string());
        let manifest_path = out_root.join(format!("{}_L{}.json", kind.name(), level));
        let text = serde_json::to_string_pretty(&manifest)
            .expect("manifest serializes");
        fs::write(&manifest_path, text + "\n")
            .map_err(|e| PipelineError::Io(format!("{}: {e}", manifest_path.display())))?;
        manifests.push(manifest);
    }
    Ok(manifests)
}

/// One scored corruption variant of the experiment grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentCell {
    pub kind: CorruptionKind,
    pub level: u8,
    pub vamp_a: f64,
    pub vamp_m: f64,
    pub vamp: f64,
    pub segmentation_failed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub schema_version: u32,
    pub clip_id: String,
    pub config: ResolvedConfig,
    pub seed: u64,
    /// Uncorrupted (level 0) scores, shared across kinds.
    pub baseline: ExperimentCell,
    /// 5 kinds x 5 levels, fixed (kind, level) order.
    pub cells: Vec<ExperimentCell>,
    pub timestamp_unix: u64,
}

/// Score the original plus every (kind, level in 1..=5) variant.
/// Variants fan out over the rayon pool; each gets a seed mixed from the
/// base seed and its grid position, so results are identical at any
/// worker count.
pub fn run_experiment(
    clip: &VideoClip,
    clip_id: &str,
    sampler: &SamplerConfig,
    tracker: &TrackerParams,
    score_cfg: &ScoreConfig,
    seed: u64,
) -> Result<ExperimentResult, PipelineError> {
    let cell = |kind, level, b: &ScoreBreakdown| ExperimentCell {
        kind,
        level,
        vamp_a: b.vamp_a,
        vamp_m: b.vamp_m,
        vamp: b.vamp,
        segmentation_failed: b.segmentation_failed,
    };
    let base_tracks = build_tracks(clip, None, sampler, tracker)?;
    let baseline = cell(
        CorruptionKind::Brightness, // kind is meaningless at level 0
        0,
        &score_clip(clip, &base_tracks, score_cfg)?,
    );
    let jobs: Vec<(CorruptionKind, u8)> = CorruptionKind::ALL
        .iter()
        .flat_map(|&k| (1..=5u8).map(move |l| (k, l)))
        .collect();
    let cells: Vec<ExperimentCell> = jobs
        .par_iter()
        .map(|&(kind, level)| -> Result<ExperimentCell, PipelineError> {
            let ki = CorruptionKind::ALL.iter().position(|&k| k == kind).unwrap() as u64;
            let spec = CorruptionSpec {
                kind,
                level,
                seed: mix_seed(seed, ki * 8 + level as u64),
            };
            let (corrupted, _) = corrupt_clip_with(clip, &spec, false)?;
            let tracks = build_tracks(&corrupted, None, sampler, tracker)?;
            let breakdown = score_clip(&corrupted, &tracks, score_cfg)?;
            Ok(cell(kind, level, &breakdown))
        })
        .collect::<Result<_, _>>()?;
    Ok(ExperimentResult {
        schema_version: SCHEMA_VERSION,
        clip_id: clip_id.to_string(),
        config: ResolvedConfig {
            score: score_cfg.clone(),
            sampler: Some(sampler.clone()),
            tracker: tracker.clone(),
            masks: None,
        },
        seed,
        baseline,
        cells,
        timestamp_unix: now_unix(),
    })
}

impl ExperimentResult {
    fn levels_for(&self, kind: CorruptionKind, f: impl Fn(&ExperimentCell) -> f64) -> [f64; 6] {
        let mut row = [0.0; 6];
        row[0] = f(&self.baseline);
        for c in self.cells.iter().filter(|c| c.kind == kind) {
            row[c.level as usize] = f(c);
        }
        row
    }

    /// CSV with one row per (kind, metric) and one column per level,
    /// level-0 column repeated from the shared baseline.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# schema_version: {}\n", self.schema_version);
        out.push_str("kind,metric,level_0,level_1,level_2,level_3,level_4,level_5\n");
        for kind in CorruptionKind::ALL {
            for (metric, f) in [
                ("vamp_a", (|c: &ExperimentCell| c.vamp_a) as fn(&ExperimentCell) -> f64),
                ("vamp_m", |c| c.vamp_m),
                ("vamp", |c| c.vamp),
            ] {
                let row = self.levels_for(kind, f);
                out.push_str(&format!(
                    "{},{},{}\n",
                    kind.name(),
                    metric,
                    row.map(|v| format!("{v:.6}")).join(",")
                ));
            }
        }
        out
    }

    /// Per-level percent change of each metric relative to level 0
    /// (heatmap-ready). Level 0 maps to 0 by definition.
    pub fn percent_change_json(&self) -> serde_json::Value {
        let pct = |row: [f64; 6]| -> Vec<f64> {
            row.iter()
                .map(|&v| {
                    if row[0].abs() < 1e-12 {
                        0.0
                    } else {
                        (v - row[0]) / row[0] * 100.0
                    }
                })
                .collect()
        };
        let mut kinds = serde_json::Map::new();
        for kind in CorruptionKind::ALL {
            kinds.insert(
                kind.name().to_string(),
                serde_json::json!({
                    "vamp_a": pct(self.levels_for(kind, |c| c.vamp_a)),
                    "vamp_m": pct(self.levels_for(kind, |c| c.vamp_m)),
                    "vamp": pct(self.levels_for(kind, |c| c.vamp)),
                }),
            );
        }
        serde_json::json!({
            "schema_version": self.schema_version,
            "clip_id": self.clip_id,
            "levels": [0, 1, 2, 3, 4, 5],
            "percent_change": kinds,
        })
    }
}

/// Alpha sensitivity rows as CSV; sub-scores are computed once.
pub fn sweep_csv(breakdown: &ScoreBreakdown, alphas: &[f64]) -> Result<String, PipelineError> {
    let rows = sweep_from_breakdown(breakdown, alphas)?;
    let mut out = format!("# schema_version: {SCHEMA_VERSION}\nalpha,vamp\n");
    for (a, v) in rows {
        out.push_str(&format!("{a},{v:.6}\n"));
    }
    Ok(out)
}
