//! Deterministic corruption injection: brightness shift, Gaussian noise,
//! salt-and-pepper impulse noise, disk-kernel defocus blur, and static
//! black occluder rectangles, each at severities 1-5 (0 = identity).
//!
//! The severity parameter tables are artifact decisions in the
//! ImageNet-C tradition of roughly geometric growth; every manifest
//! records them so runs are self-describing. Noise is seeded per
//! (clip_seed, frame_index), so frame-parallel generation is
//! order-independent.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::media::{Frame, VideoClip};

#[derive(Debug, Error)]
pub enum CorruptionError {
    #[error("severity level must be 1-5, got {0}")]
    BadLevel(u8),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorruptionKind {
    Brightness,
    GaussianNoise,
    ImpulseNoise,
    DefocusBlur,
    BlackShapes,
}

impl CorruptionKind {
    pub const ALL: [CorruptionKind; 5] = [
        CorruptionKind::Brightness,
        CorruptionKind::GaussianNoise,
        CorruptionKind::ImpulseNoise,
        CorruptionKind::DefocusBlur,
        CorruptionKind::BlackShapes,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CorruptionKind::Brightness => "brightness",
            CorruptionKind::GaussianNoise => "gaussian_noise",
            CorruptionKind::ImpulseNoise => "impulse_noise",
            CorruptionKind::DefocusBlur => "defocus_blur",
            CorruptionKind::BlackShapes => "black_shapes",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|k| k.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorruptionSpec {
    pub kind: CorruptionKind,
    /// 0 means identity; 1-5 index the severity tables.
    pub level: u8,
    pub seed: u64,
}

/// Additive brightness shift per level (8-bit units, about 0.1-0.5 of range).
pub const BRIGHTNESS_SHIFT: [i32; 5] = [26, 51, 77, 102, 128];
/// Gaussian noise sigma per level (8-bit units).
pub const GAUSSIAN_SIGMA: [f64; 5] = [8.0, 16.0, 26.0, 38.0, 51.0];
/// Fraction of pixels replaced by salt or pepper per level.
pub const IMPULSE_FRACTION: [f64; 5] = [0.02, 0.05, 0.10, 0.17, 0.25];
/// Disk kernel radius per level, pixels.
pub const DEFOCUS_RADIUS: [u32; 5] = [2, 3, 5, 7, 9];
/// Number of occluder rectangles per level.
pub const BLACK_SHAPE_COUNT: [usize; 5] = [1, 2, 3, 4, 5];

/// Severity parameters must grow strictly with level for every kind.
pub fn validate_severity_tables() {
    fn strictly_increasing<T: PartialOrd>(t: &[T]) -> bool {
        t.windows(2).all(|w| w[0] < w[1])
    }
    assert!(strictly_increasing(&BRIGHTNESS_SHIFT));
    assert!(strictly_increasing(&GAUSSIAN_SIGMA));
    assert!(strictly_increasing(&IMPULSE_FRACTION));
    assert!(strictly_increasing(&DEFOCUS_RADIUS));
    assert!(strictly_increasing(&BLACK_SHAPE_COUNT));
}

fn check_level(level: u8) -> Result<usize, CorruptionError> {
    if (1..=5).contains(&level) {
        Ok(level as usize - 1)
    } else {
        Err(CorruptionError::BadLevel(level))
    }
}

/// splitmix64; decorrelates the per-frame seeds derived from the clip seed.
pub(crate) fn mix_seed(seed: u64, frame_index: u64) -> u64 {
    let mut z = seed ^ frame_index.wrapping_mul(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Additive brightness shift, clamped to [0, 255].
pub fn corrupt_brightness(frame: &Frame, level: u8) -> Result<Frame, CorruptionError> {
    let shift = BRIGHTNESS_SHIFT[check_level(level)?];
    let data = frame
        .data()
        .iter()
        .map(|&v| (v as i32 + shift).clamp(0, 255) as u8)
        .collect();
    Ok(Frame::new(frame.width(), frame.height(), data))
}

/// I.i.d. zero-mean Gaussian noise per channel, rounded and clamped.
/// `seed` should already be mixed per frame (see [`corrupt_clip`]).
pub fn corrupt_gaussian(frame: &Frame, level: u8, seed: u64) -> Result<Frame, CorruptionError> {
    let sigma = GAUSSIAN_SIGMA[check_level(level)?];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).expect("positive sigma");
    let data = frame
        .data()
        .iter()
        .map(|&v| {
            let noisy = v as f64 + normal.sample(&mut rng);
            noisy.round().clamp(0.0, 255.0) as u8
        })
        .collect();
    Ok(Frame::new(frame.width(), frame.height(), data))
}

/// Salt-and-pepper noise: a level-dependent fraction of pixels becomes
/// all-black or all-white with equal probability.
pub fn corrupt_impulse(frame: &Frame, level: u8, seed: u64) -> Result<Frame, CorruptionError> {
    let fraction = IMPULSE_FRACTION[check_level(level)?];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = frame.clone();
    for y in 0..frame.height() {
        for x in 0..frame.width() {
            if rng.gen::<f64>() < fraction {
                let v = if rng.gen::<bool>() { 255 } else { 0 };
                out.set_pixel(x, y, [v, v, v]);
            }
        }
    }
    Ok(out)
}

/// Normalized disk-kernel convolution with edge-replicate padding.
/// The kernel is uniform over pixels with dx^2 + dy^2 <= r^2, so row
/// prefix sums on a replicate-padded copy evaluate it exactly.
pub fn corrupt_defocus(frame: &Frame, level: u8) -> Result<Frame, CorruptionError> {
    let r = DEFOCUS_RADIUS[check_level(level)?] as i64;
    let (w, h) = (frame.width() as i64, frame.height() as i64);
    // per-row half-widths of the disk
    let half_widths: Vec<i64> = (-r..=r)
        .map(|dy| ((r * r - dy * dy) as f64).sqrt().floor() as i64)
        .collect();
    let kernel_area: i64 = half_widths.iter().map(|hw| 2 * hw + 1).sum();

    let (pw, ph) = (w + 2 * r, h + 2 * r);
    let mut out = frame.clone();
    for c in 0..3usize {
        // replicate-padded channel plane
        let mut padded = vec![0f64; (pw * ph) as usize];
        for py in 0..ph {
            let sy = (py - r).clamp(0, h - 1) as u32;
            for px in 0..pw {
                let sx = (px - r).clamp(0, w - 1) as u32;
                padded[(py * pw + px) as usize] = frame.pixel(sx, sy)[c] as f64;
            }
        }
        // row prefix sums: prefix[y][x] = sum of padded[y][0..x]
        let mut prefix = vec![0f64; (pw as usize + 1) * ph as usize];
        for py in 0..ph as usize {
            let row = py * (pw as usize + 1);
            for px in 0..pw as usize {
                prefix[row + px + 1] = prefix[row + px] + padded[py * pw as usize + px];
            }
        }
        for y in 0..h {
            for x in 0..w {
                let mut acc = 0.0;
                for (i, &hw) in half_widths.iter().enumerate() {
                    let py = (y + i as i64) as usize; // padded row y + dy + r
                    let x0 = (x + r - hw) as usize;
                    let x1 = (x + r + hw + 1) as usize;
                    let row = py * (pw as usize + 1);
                    acc += prefix[row + x1] - prefix[row + x0];
                }
                let v = (acc / kernel_area as f64).round().clamp(0.0, 255.0) as u8;
                let mut px = out.pixel(x as u32, y as u32);
                px[c] = v;
                out.set_pixel(x as u32, y as u32, px);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OccluderRect {
    pub x0: u32,
    pub y0: u32,
    pub width: u32,
    pub height: u32,
}

/// Sample the occluder geometry for [`corrupt_black_shapes`]: each
/// rectangle covers 2-5% of the frame area at an aspect ratio in
/// [0.5, 2], positioned uniformly.
pub fn sample_occluders(
    width: u32,
    height: u32,
    level: u8,
    seed: u64,
) -> Result<Vec<OccluderRect>, CorruptionError> {
    let count = BLACK_SHAPE_COUNT[check_level(level)?];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let area = width as f64 * height as f64;
    let rects = (0..count)
        .map(|_| {
            let frac = rng.gen_range(0.02..=0.05);
            let aspect = rng.gen_range(0.5..=2.0);
            let rw = ((area * frac * aspect).sqrt().round() as u32).clamp(1, width);
            let rh = (((area * frac) / rw as f64).round() as u32).clamp(1, height);
            let x0 = rng.gen_range(0..=width - rw);
            let y0 = rng.gen_range(0..=height - rh);
            OccluderRect {
                x0,
                y0,
                width: rw,
                height: rh,
            }
        })
        .collect();
    Ok(rects)
}

/// Paint level-many black rectangles, sampled once per clip and held at
/// the same positions in every frame (temporally static occluders).
pub fn corrupt_black_shapes(
    clip: &VideoClip,
    level: u8,
    seed: u64,
) -> Result<VideoClip, CorruptionError> {
    let rects = sample_occluders(clip.width(), clip.height(), level, seed)?;
    let frames = clip
        .frames()
        .par_iter()
        .map(|frame| {
            let mut f = frame.clone();
            for r in &rects {
                for y in r.y0..r.y0 + r.height {
                    for x in r.x0..r.x0 + r.width {
                        f.set_pixel(x, y, [0, 0, 0]);
                    }
                }
            }
            f
        })
        .collect();
    Ok(VideoClip::new(frames, clip.fps()))
}

/// Alternative to [`corrupt_black_shapes`]: rectangle geometry
/// re-sampled every frame, conflating appearance and motion corruption
/// on purpose.
pub fn corrupt_black_shapes_per_frame(
    clip: &VideoClip,
    level: u8,
    seed: u64,
) -> Result<VideoClip, CorruptionError> {
    check_level(level)?;
    let frames: Result<Vec<Frame>, CorruptionError> = clip
        .frames()
        .par_iter()
        .enumerate()
        .map(|(i, frame)| {
            let rects =
                sample_occluders(frame.width(), frame.height(), level, mix_seed(seed, i as u64))?;
            let mut f = frame.clone();
            for r in &rects {
                for y in r.y0..r.y0 + r.height {
                    for x in r.x0..r.x0 + r.width {
                        f.set_pixel(x, y, [0, 0, 0]);
                    }
                }
            }
            Ok(f)
        })
        .collect();
    Ok(VideoClip::new(frames?, clip.fps()))
}

/// Self-describing record of one corruption application.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorruptionManifest {
    pub kind: CorruptionKind,
    pub level: u8,
    pub seed: u64,
    pub params: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

/// Apply `spec` to the whole clip. Level 0 returns the input unchanged.
/// Per-frame kinds run frame-parallel; the per-frame seeds depend only on
/// (clip seed, frame index), so the output is identical at any thread
/// count.
pub fn corrupt_clip(
    clip: &VideoClip,
    spec: &CorruptionSpec,
) -> Result<(VideoClip, CorruptionManifest), CorruptionError> {
    corrupt_clip_with(clip, spec, false)
}

/// [`corrupt_clip`] with the per-frame occluder variant selectable;
/// `per_frame_shapes` only affects [`CorruptionKind::BlackShapes`].
pub fn corrupt_clip_with(
    clip: &VideoClip,
    spec: &CorruptionSpec,
    per_frame_shapes: bool,
) -> Result<(VideoClip, CorruptionManifest), CorruptionError> {
    validate_severity_tables();
    if spec.level > 5 {
        return Err(CorruptionError::BadLevel(spec.level));
    }
    let manifest = |params: serde_json::Value| CorruptionManifest {
        kind: spec.kind,
        level: spec.level,
        seed: spec.seed,
        params,
        source: None,
        output: None,
    };
    if spec.level == 0 {
        return Ok((clip.clone(), manifest(serde_json::json!({"identity": true}))));
    }
    let idx = spec.level as usize - 1;
    let per_frame = |f: &(dyn Fn(&Frame, usize) -> Result<Frame, CorruptionError> + Sync)| {
        let frames: Result<Vec<Frame>, CorruptionError> = clip
            .frames()
            .par_iter()
            .enumerate()
            .map(|(i, frame)| f(frame, i))
            .collect();
        Ok::<_, CorruptionError>(VideoClip::new(frames?, clip.fps()))
    };
    let (out, params) = match spec.kind {
        CorruptionKind::Brightness => (
            per_frame(&|frame, _| corrupt_brightness(frame, spec.level))?,
            serde_json::json!({"shift": BRIGHTNESS_SHIFT[idx], "mode": "additive"}),
        ),
        CorruptionKind::GaussianNoise => (
            per_frame(&|frame, i| corrupt_gaussian(frame, spec.level, mix_seed(spec.seed, i as u64)))?,
            serde_json::json!({"sigma": GAUSSIAN_SIGMA[idx]}),
        ),
        CorruptionKind::ImpulseNoise => (
            per_frame(&|frame, i| corrupt_impulse(frame, spec.level, mix_seed(spec.seed, i as u64)))?,
            serde_json::json!({"fraction": IMPULSE_FRACTION[idx]}),
        ),
        CorruptionKind::DefocusBlur => (
            per_frame(&|frame, _| corrupt_defocus(frame, spec.level))?,
            serde_json::json!({"radius": DEFOCUS_RADIUS[idx]}),
        ),
        CorruptionKind::BlackShapes if per_frame_shapes => (
            corrupt_black_shapes_per_frame(clip, spec.level, spec.seed)?,
            serde_json::json!({"count": BLACK_SHAPE_COUNT[idx], "temporal": "per_frame"}),
        ),
        CorruptionKind::BlackShapes => {
            let rects = sample_occluders(clip.width(), clip.height(), spec.level, spec.seed)?;
            (
                corrupt_black_shapes(clip, spec.level, spec.seed)?,
                serde_json::json!({"count": BLACK_SHAPE_COUNT[idx], "rects": rects, "temporal": "static"}),
            )
        }
    };
    Ok((out, manifest(params)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_clip(n: usize, w: u32, h: u32, value: u8) -> VideoClip {
        VideoClip::new(vec![Frame::filled(w, h, [value; 3]); n], 10.0)
    }

    #[test]
    fn severity_tables_strictly_monotone() {
        validate_severity_tables();
    }

    #[test]
    fn level_zero_is_identity_for_every_kind() {
        let clip = flat_clip(3, 16, 16, 100);
        for kind in CorruptionKind::ALL {
            let spec = CorruptionSpec {
                kind,
                level: 0,
                seed: 42,
            };
            let (out, _) = corrupt_clip(&clip, &spec).unwrap();
            for (a, b) in clip.frames().iter().zip(out.frames()) {
                assert_eq!(a, b, "{kind:?}");
            }
        }
    }

    #[test]
    fn bad_level_rejected() {
        let clip = flat_clip(2, 8, 8, 0);
        let spec = CorruptionSpec {
            kind: CorruptionKind::Brightness,
            level: 6,
            seed: 0,
        };
        assert!(matches!(
            corrupt_clip(&clip, &spec),
            Err(CorruptionError::BadLevel(6))
        ));
        assert!(matches!(
            corrupt_brightness(&Frame::filled(4, 4, [0; 3]), 0),
            Err(CorruptionError::BadLevel(0))
        ));
    }

    #[test]
    fn brightness_shift_and_clamp() {
        let mid = Frame::filled(4, 4, [128; 3]);
        let out = corrupt_brightness(&mid, 1).unwrap();
        assert!(out.data().iter().all(|&v| v == 154));
        let bright = Frame::filled(4, 4, [250; 3]);
        let out = corrupt_brightness(&bright, 5).unwrap();
        assert!(out.data().iter().all(|&v| v == 255));
    }

    #[test]
    fn gaussian_deterministic_and_statistically_sane() {
        let frame = Frame::filled(320, 240, [128; 3]);
        let a = corrupt_gaussian(&frame, 3, 99).unwrap();
        let b = corrupt_gaussian(&frame, 3, 99).unwrap();
        assert_eq!(a, b);
        let n = a.data().len() as f64;
        let mean = a.data().iter().map(|&v| v as f64).sum::<f64>() / n;
        assert!((mean - 128.0).abs() < 1.0, "mean = {mean}");
        let std =
            (a.data().iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / n).sqrt();
        assert!((std - 26.0).abs() < 2.0, "std = {std}");
    }

    #[test]
    fn gaussian_std_monotone_in_level() {
        let frame = Frame::filled(160, 120, [128; 3]);
        let mut last = 0.0;
        for level in 1..=5u8 {
            let out = corrupt_gaussian(&frame, level, 7).unwrap();
            let n = out.data().len() as f64;
            let mean = out.data().iter().map(|&v| v as f64).sum::<f64>() / n;
            let std = (out
                .data()
                .iter()
                .map(|&v| (v as f64 - mean).powi(2))
                .sum::<f64>()
                / n)
                .sqrt();
            assert!(std > last, "level {level}: {std} <= {last}");
            last = std;
        }
    }

    #[test]
    fn impulse_fraction_within_binomial_bounds() {
        let frame = Frame::filled(320, 240, [128; 3]);
        let out = corrupt_impulse(&frame, 1, 5).unwrap();
        assert_eq!(out, corrupt_impulse(&frame, 1, 5).unwrap());
        let n = (320 * 240) as f64;
        let hits = (0..240)
            .flat_map(|y| (0..320).map(move |x| (x, y)))
            .filter(|&(x, y)| {
                let p = out.pixel(x, y);
                p == [0, 0, 0] || p == [255, 255, 255]
            })
            .count() as f64;
        let p = 0.02;
        let sigma = (n * p * (1.0 - p)).sqrt();
        assert!((hits - n * p).abs() < 3.0 * sigma, "hits = {hits}");
    }

    #[test]
    fn impulse_fraction_monotone() {
        let frame = Frame::filled(160, 120, [128; 3]);
        let count_hits = |f: &Frame| {
            f.data()
                .chunks_exact(3)
                .filter(|p| *p == [0, 0, 0] || *p == [255, 255, 255])
                .count()
        };
        let lo = count_hits(&corrupt_impulse(&frame, 1, 3).unwrap());
        let hi = count_hits(&corrupt_impulse(&frame, 5, 3).unwrap());
        assert!(hi > lo);
    }

    #[test]
    fn defocus_constant_frame_unchanged() {
        let frame = Frame::filled(32, 32, [77; 3]);
        for level in 1..=5 {
            assert_eq!(corrupt_defocus(&frame, level).unwrap(), frame);
        }
    }

    #[test]
    fn defocus_preserves_impulse_energy() {
        let mut frame = Frame::filled(41, 41, [0; 3]);
        frame.set_pixel(20, 20, [255, 255, 255]);
        let out = corrupt_defocus(&frame, 1).unwrap();
        // disk r=2 has 13 pixels; rounding distributes 255/13 ~ 19.6 each
        let sum: u32 = out.data().iter().step_by(3).map(|&v| v as u32).sum();
        assert!((sum as i64 - 255).abs() <= 13, "sum = {sum}");
        // energy spread confined to the disk
        assert_eq!(out.pixel(20, 20)[0], 20);
        assert_eq!(out.pixel(23, 20)[0], 0);
        assert_eq!(out.pixel(22, 20)[0], 20);
    }

    #[test]
    fn defocus_softens_edges_monotonically() {
        let mut frame = Frame::filled(64, 64, [0; 3]);
        for y in 0..64 {
            for x in 32..64 {
                frame.set_pixel(x, y, [255, 255, 255]);
            }
        }
        let sharpness = |f: &Frame| {
            let mut max_diff = 0i32;
            for x in 0..63 {
                let d = (f.pixel(x + 1, 32)[0] as i32 - f.pixel(x, 32)[0] as i32).abs();
                max_diff = max_diff.max(d);
            }
            max_diff
        };
        let mut last = sharpness(&frame);
        for level in 1..=5 {
            let s = sharpness(&corrupt_defocus(&frame, level).unwrap());
            assert!(s < last, "level {level}: {s} >= {last}");
            last = s;
        }
    }

    #[test]
    fn black_shapes_static_across_frames() {
        let clip = flat_clip(6, 100, 80, 200);
        let out = corrupt_black_shapes(&clip, 1, 11).unwrap();
        let black_pixels = |f: &Frame| {
            (0..80u32)
                .flat_map(|y| (0..100u32).map(move |x| (x, y)))
                .filter(|&(x, y)| f.pixel(x, y) == [0, 0, 0])
                .collect::<Vec<_>>()
        };
        let first = black_pixels(out.frame(0));
        assert!(!first.is_empty());
        let rects = sample_occluders(100, 80, 1, 11).unwrap();
        assert_eq!(rects.len(), 1);
        for t in 1..6 {
            assert_eq!(black_pixels(out.frame(t)), first);
        }
    }

    #[test]
    fn black_shapes_coverage_monotone() {
        let clip = flat_clip(2, 128, 96, 255);
        let mut last = 0usize;
        for level in 1..=5u8 {
            let out = corrupt_black_shapes(&clip, level, 4).unwrap();
            let covered = out
                .frame(0)
                .data()
                .chunks_exact(3)
                .filter(|p| *p == [0, 0, 0])
                .count();
            assert!(covered > last, "level {level}");
            last = covered;
        }
    }

    #[test]
    fn corrupt_clip_deterministic_manifest_round_trip() {
        let clip = flat_clip(4, 32, 24, 90);
        let spec = CorruptionSpec {
            kind: CorruptionKind::GaussianNoise,
            level: 2,
            seed: 1234,
        };
        let (a, manifest) = corrupt_clip(&clip, &spec).unwrap();
        let text = serde_json::to_string(&manifest).unwrap();
        let back: CorruptionManifest = serde_json::from_str(&text).unwrap();
        let respec = CorruptionSpec {
            kind: back.kind,
            level: back.level,
            seed: back.seed,
        };
        let (b, _) = corrupt_clip(&clip, &respec).unwrap();
        for (fa, fb) in a.frames().iter().zip(b.frames()) {
            assert_eq!(fa, fb);
        }
    }
}
