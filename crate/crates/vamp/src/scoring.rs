//! Aggregation of per-object, per-pair sub-scores into the final VAMP
//! score, plus the alpha sensitivity sweep and JSON/CSV report shapes.
//!
//! The aggregate is the mean over actually-present (object, consecutive
//! pair) records; when every track spans the whole clip this reduces to
//! the uniform object-by-frame average. An empty track set is a
//! segmentation failure and scores 0.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::appearance::{appearance_parts, AppearanceWeights, ShapeMode};
use crate::media::VideoClip;
use crate::motion::{motion_score, MotionWeights, Normalization, Trajectory};
use crate::regions::{extract_patch, ObjectTrack};

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error("flat weight tuple must have a positive sum")]
    AllZero,
    #[error("track {object_id} spans frames {start}..={end} but the clip has {frames} frames")]
    InconsistentTracks {
        object_id: u32,
        start: usize,
        end: usize,
        frames: usize,
    },
    #[error("alpha {0} outside [0, 1]")]
    AlphaOutOfRange(f64),
    #[error(transparent)]
    Appearance(#[from] crate::appearance::AppearanceError),
    #[error(transparent)]
    Motion(#[from] crate::motion::MotionError),
    #[error(transparent)]
    Region(#[from] crate::regions::RegionError),
}

/// All weights and algorithm knobs for one scoring run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreConfig {
    pub appearance_weights: AppearanceWeights,
    pub motion_weights: MotionWeights,
    pub alpha: f64,
    pub beta: f64,
    pub shape_mode: ShapeMode,
    pub motion_normalization: Normalization,
    pub center_contours: bool,
    pub preset_name: Option<String>,
}

impl ScoreConfig {
    pub fn validate(&self) -> Result<(), ScoreError> {
        self.appearance_weights.validate()?;
        self.motion_weights.validate()?;
        if self.alpha < 0.0 || self.beta < 0.0 || (self.alpha + self.beta - 1.0).abs() > 1e-9 {
            return Err(ScoreError::AlphaOutOfRange(self.alpha));
        }
        Ok(())
    }

    /// The (color, shape, texture, motion) tuple used for the SIFT-based
    /// experiments.
    pub fn sift_default() -> Self {
        let mut cfg = flat_weights_to_config([0.3, 0.05, 0.05, 0.6]).expect("valid preset");
        cfg.preset_name = Some("sift-default".into());
        cfg
    }

    /// The (color, shape, texture, motion) tuple used for the SAM-based
    /// experiments; its published sum is 0.999 and renormalizes here.
    pub fn sam_default() -> Self {
        let mut cfg = flat_weights_to_config([0.069, 0.138, 0.092, 0.7]).expect("valid preset");
        cfg.preset_name = Some("sam-default".into());
        cfg
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "sift-default" => Some(Self::sift_default()),
            "sam-default" => Some(Self::sam_default()),
            _ => None,
        }
    }
}

impl Default for ScoreConfig {
    fn default() -> Self {
        Self::sift_default()
    }
}

/// Split a flat (color, shape, texture, motion) tuple into alpha/beta and
/// normalized appearance weights. Tuples whose sum differs from 1 are
/// renormalized. Motion weights default to an even velocity/acceleration
/// split; the tuples never constrain them.
pub fn flat_weights_to_config(tuple: [f64; 4]) -> Result<ScoreConfig, ScoreError> {
    let [c, s, t, m] = tuple;
    if tuple.iter().any(|&v| v < 0.0) || c + s + t + m <= 0.0 {
        return Err(ScoreError::AllZero);
    }
    let total = c + s + t + m;
    let beta = m / total;
    let alpha = 1.0 - beta;
    let app_sum = c + s + t;
    let appearance_weights = if app_sum > 0.0 {
        AppearanceWeights {
            w_color: c / app_sum,
            w_shape: s / app_sum,
            w_texture: t / app_sum,
        }
    } else {
        // motion-only: appearance weights unused, placeholder keeps the
        // invariant satisfied
        AppearanceWeights {
            w_color: 1.0 / 3.0,
            w_shape: 1.0 / 3.0,
            w_texture: 1.0 / 3.0,
        }
    };
    Ok(ScoreConfig {
        appearance_weights,
        motion_weights: MotionWeights { w_vel: 0.5, w_acc: 0.5 },
        alpha,
        beta,
        shape_mode: ShapeMode::default(),
        motion_normalization: Normalization::default(),
        center_contours: true,
        preset_name: None,
    })
}

/// One scored (object, consecutive frame pair) record.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PairRecord {
    pub object_id: u32,
    /// First frame of the pair (t, t+1).
    pub t: usize,
    pub s_color: f64,
    pub s_shape: f64,
    pub s_texture: f64,
    pub s_appearance: f64,
    /// Whole-trajectory motion score broadcast to every pair of this
    /// object.
    pub s_motion: f64,
    pub pair_score: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoreBreakdown {
    pub records: Vec<PairRecord>,
    /// Mean appearance sub-score over all records (VAMP-A).
    pub vamp_a: f64,
    /// Mean motion sub-score over all records (VAMP-M).
    pub vamp_m: f64,
    /// alpha * VAMP-A + beta * VAMP-M.
    pub vamp: f64,
    pub object_count: usize,
    pub pair_count: usize,
    pub segmentation_failed: bool,
}

impl ScoreBreakdown {
    fn failed() -> Self {
        ScoreBreakdown {
            records: Vec::new(),
            vamp_a: 0.0,
            vamp_m: 0.0,
            vamp: 0.0,
            object_count: 0,
            pair_count: 0,
            segmentation_failed: true,
        }
    }

    pub fn csv_row(&self, clip_id: &str) -> String {
        format!(
            "{},{:.6},{:.6},{:.6}",
            clip_id, self.vamp_a, self.vamp_m, self.vamp
        )
    }
}

pub const CSV_HEADER: &str = "clip_id,vamp_a,vamp_m,vamp";

/// Score a clip against its object tracks. Tracks shorter than two frames
/// carry no consecutive pair and are skipped; if nothing remains the
/// result is a segmentation failure with score 0.
pub fn score_clip(
    clip: &VideoClip,
    tracks: &[ObjectTrack],
    cfg: &ScoreConfig,
) -> Result<ScoreBreakdown, ScoreError> {
    cfg.validate()?;
    for track in tracks {
        if track.end_frame() >= clip.len() {
            return Err(ScoreError::InconsistentTracks {
                object_id: track.object_id,
                start: track.start_frame,
                end: track.end_frame(),
                frames: clip.len(),
            });
        }
    }
    let mut usable: Vec<&ObjectTrack> = tracks.iter().filter(|t| t.len() >= 2).collect();
    usable.sort_by_key(|t| t.object_id);
    if usable.is_empty() {
        return Ok(ScoreBreakdown::failed());
    }

    // (track, pair start) work items in fixed record order
    let mut jobs = Vec::new();
    for track in &usable {
        let traj = Trajectory::new(
            track.centroids().to_vec(),
            cfg.motion_normalization,
            clip.diagonal(),
        );
        let motion = motion_score(&traj, &cfg.motion_weights)?;
        for t in track.start_frame..track.end_frame() {
            jobs.push((*track, t, motion.score));
        }
    }
    let records: Vec<PairRecord> = jobs
        .par_iter()
        .map(|&(track, t, s_motion)| -> Result<PairRecord, ScoreError> {
            let mask_a = track.mask_at(t).expect("pair start within track");
            let mask_b = track.mask_at(t + 1).expect("pair end within track");
            let p = extract_patch(clip.frame(t), mask_a, t)?;
            let q = extract_patch(clip.frame(t + 1), mask_b, t + 1)?;
            let parts = appearance_parts(
                &p,
                &q,
                &cfg.appearance_weights,
                cfg.shape_mode,
                cfg.center_contours,
            )?;
            Ok(PairRecord {
                object_id: track.object_id,
                t,
                s_color: parts.color,
                s_shape: parts.shape,
                s_texture: parts.texture,
                s_appearance: parts.combined,
                s_motion,
                pair_score: cfg.alpha * parts.combined + cfg.beta * s_motion,
            })
        })
        .collect::<Result<_, _>>()?;

    let n = records.len() as f64;
    let vamp_a = records.iter().map(|r| r.s_appearance).sum::<f64>() / n;
    let vamp_m = records.iter().map(|r| r.s_motion).sum::<f64>() / n;
    Ok(ScoreBreakdown {
        vamp_a,
        vamp_m,
        vamp: cfg.alpha * vamp_a + cfg.beta * vamp_m,
        object_count: usable.len(),
        pair_count: records.len(),
        records,
        segmentation_failed: false,
    })
}

/// Recombine cached sub-scores for each alpha; sub-scores are
/// alpha-independent so the breakdown is computed once.
pub fn sensitivity_sweep(
    clip: &VideoClip,
    tracks: &[ObjectTrack],
    base_cfg: &ScoreConfig,
    alphas: &[f64],
) -> Result<Vec<(f64, f64)>, ScoreError> {
    let breakdown = score_clip(clip, tracks, base_cfg)?;
    sweep_from_breakdown(&breakdown, alphas)
}

/// The recombination step of [`sensitivity_sweep`], reusable when a
/// breakdown is already at hand. Output sorted by alpha.
pub fn sweep_from_breakdown(
    breakdown: &ScoreBreakdown,
    alphas: &[f64],
) -> Result<Vec<(f64, f64)>, ScoreError> {
    for &a in alphas {
        if !(0.0..=1.0).contains(&a) {
            return Err(ScoreError::AlphaOutOfRange(a));
        }
    }
    let mut out: Vec<(f64, f64)> = alphas
        .iter()
        .map(|&a| (a, a * breakdown.vamp_a + (1.0 - a) * breakdown.vamp_m))
        .collect();
    out.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    Ok(out)
}
