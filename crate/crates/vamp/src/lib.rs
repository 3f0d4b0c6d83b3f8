//! Reference-free video quality toolkit.
//!
//! The VAMP score combines per-object appearance consistency (color,
//! shape, texture between consecutive frames) with motion plausibility
//! (velocity and acceleration consistency of centroid trajectories),
//! averaged over every tracked object and frame pair. A deterministic
//! corruption harness (brightness, Gaussian noise, impulse noise,
//! defocus blur, black occluders, severities 1-5) supports
//! degradation-response experiments.
//!
//! Start with [`pipeline::run_score`] for the whole flow, or see the
//! `examples/` directory for one runnable program per capability.

pub mod appearance;
pub mod corruption;
pub mod media;
pub mod motion;
pub mod pipeline;
pub mod regions;
pub mod sampling;
pub mod scoring;
pub mod synthetic;

pub use appearance::{AppearanceWeights, ShapeMode};
pub use corruption::{CorruptionKind, CorruptionSpec};
pub use media::{load_frames, save_frames, Frame, GrayFrame, VideoClip};
pub use motion::{MotionWeights, Normalization};
pub use pipeline::{run_experiment, run_score, Report, SamplerConfig, SamplerKind};
pub use regions::{ObjectTrack, RegionMask, TrackerParams};
pub use sampling::Point2D;
pub use scoring::{score_clip, ScoreBreakdown, ScoreConfig};
