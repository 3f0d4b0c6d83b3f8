//! Appearance sub-scores for a pair of corresponding object patches in
//! consecutive frames: color (1-D EMD on per-channel histograms), shape
//! (symmetric Hausdorff on centroid-centered contours), and texture
//! (cosine similarity of GLCM features), plus their weighted aggregate.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::media::{to_grayscale, GrayFrame};
use crate::regions::{contour, ObjectPatch};
use crate::sampling::Point2D;

#[derive(Debug, Error)]
pub enum AppearanceError {
    #[error("patch mask has no pixels")]
    EmptyMask,
    #[error("histogram is not normalized (sum = {0})")]
    UnnormalizedInput(f64),
    #[error("point set is empty")]
    EmptySet,
    #[error("patch must be at least 2x2 for GLCM, got {0}x{1}")]
    PatchTooSmall(u32, u32),
    #[error("GLCM is not normalized (sum = {0})")]
    Unnormalized(f64),
    #[error("texture feature vector has zero norm")]
    DegenerateFeatureVector,
    #[error("appearance weights must be >= 0 and sum to 1")]
    InvalidWeights,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    R,
    G,
    B,
}

impl Channel {
    fn offset(self) -> usize {
        match self {
            Channel::R => 0,
            Channel::G => 1,
            Channel::B => 2,
        }
    }
}

/// 256-bin normalized histogram of one color channel over mask pixels.
#[derive(Debug, Clone)]
pub struct ColorHistogram {
    pub bins: [f64; 256],
    pub channel: Channel,
}

pub fn color_histogram(patch: &ObjectPatch, channel: Channel) -> Result<ColorHistogram, AppearanceError> {
    let mut bins = [0.0f64; 256];
    let mut count = 0usize;
    let mask = &patch.mask;
    for ly in 0..mask.height() {
        for lx in 0..mask.width() {
            if mask.get_local(lx, ly) {
                let px = patch.pixels.pixel(lx, ly);
                bins[px[channel.offset()] as usize] += 1.0;
                count += 1;
            }
        }
    }
    if count == 0 {
        return Err(AppearanceError::EmptyMask);
    }
    for b in &mut bins {
        *b /= count as f64;
    }
    Ok(ColorHistogram { bins, channel })
}

/// Earth Mover's Distance with ground distance |j - k| / 255, via the
/// 1-D closed form: sum of |CDF_a - CDF_b| over bins, divided by 255.
/// Lands in [0, 1] for normalized inputs.
pub fn emd_1d(a: &ColorHistogram, b: &ColorHistogram) -> Result<f64, AppearanceError> {
    for h in [a, b] {
        let sum: f64 = h.bins.iter().sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(AppearanceError::UnnormalizedInput(sum));
        }
    }
    let (mut cdf_a, mut cdf_b, mut total) = (0.0, 0.0, 0.0);
    for j in 0..256 {
        cdf_a += a.bins[j];
        cdf_b += b.bins[j];
        total += (cdf_a - cdf_b).abs();
    }
    Ok(total / 255.0)
}

/// Color similarity: 1 - mean EMD over the three channels.
pub fn color_similarity(p: &ObjectPatch, q: &ObjectPatch) -> Result<f64, AppearanceError> {
    let mut total = 0.0;
    for channel in [Channel::R, Channel::G, Channel::B] {
        let a = color_histogram(p, channel)?;
        let b = color_histogram(q, channel)?;
        total += emd_1d(&a, &b)?;
    }
    Ok(1.0 - total / 3.0)
}

/// Directed Hausdorff distance: max over a of min over b of |a - b|.
/// Early-exits each inner scan once the running minimum drops below the
/// current maximum.
pub fn hausdorff_directed(a: &[Point2D], b: &[Point2D]) -> Result<f64, AppearanceError> {
    if a.is_empty() || b.is_empty() {
        return Err(AppearanceError::EmptySet);
    }
    let mut h2 = 0.0f64; // squared distances until the end
    for pa in a {
        let mut min2 = f64::INFINITY;
        for pb in b {
            let dx = pa.x - pb.x;
            let dy = pa.y - pb.y;
            let d2 = dx * dx + dy * dy;
            if d2 < min2 {
                min2 = d2;
                if min2 <= h2 {
                    break;
                }
            }
        }
        if min2 > h2 {
            h2 = min2;
        }
    }
    Ok(h2.sqrt())
}

/// Literal two-wrap composition versus the single-wrap reading; see
/// [`shape_similarity`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ShapeMode {
    /// S = 1 / (1 + 1 / (1 + H)); identical shapes score 0.5.
    AsWritten,
    /// S = 1 / (1 + H); identical shapes score 1.
    #[default]
    SingleWrap,
}

fn centered(points: &[Point2D]) -> Vec<Point2D> {
    let n = points.len() as f64;
    let cx = points.iter().map(|p| p.x).sum::<f64>() / n;
    let cy = points.iter().map(|p| p.y).sum::<f64>() / n;
    points
        .iter()
        .map(|p| Point2D::new(p.x - cx, p.y - cy))
        .collect()
}

/// Shape similarity from the symmetric Hausdorff distance between the
/// two mask contours. When `center` is set (the default configuration),
/// each contour is translated so its centroid sits at the origin, so
/// translation is left to the motion score.
pub fn shape_similarity(
    p: &ObjectPatch,
    q: &ObjectPatch,
    mode: ShapeMode,
    center: bool,
) -> Result<f64, AppearanceError> {
    let mut ca = contour(&p.mask);
    let mut cb = contour(&q.mask);
    if ca.is_empty() || cb.is_empty() {
        return Err(AppearanceError::EmptyMask);
    }
    if center {
        ca = centered(&ca);
        cb = centered(&cb);
    }
    let h = hausdorff_directed(&ca, &cb)?.max(hausdorff_directed(&cb, &ca)?);
    Ok(match mode {
        ShapeMode::AsWritten => 1.0 / (1.0 + 1.0 / (1.0 + h)),
        ShapeMode::SingleWrap => 1.0 / (1.0 + h),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GlcmAngle {
    /// offset (1, 0)
    Deg0,
    /// offset (1, -1)
    Deg45,
    /// offset (0, -1)
    Deg90,
    /// offset (-1, -1)
    Deg135,
}

impl GlcmAngle {
    pub const ALL: [GlcmAngle; 4] = [
        GlcmAngle::Deg0,
        GlcmAngle::Deg45,
        GlcmAngle::Deg90,
        GlcmAngle::Deg135,
    ];

    fn offset(self) -> (i64, i64) {
        match self {
            GlcmAngle::Deg0 => (1, 0),
            GlcmAngle::Deg45 => (1, -1),
            GlcmAngle::Deg90 => (0, -1),
            GlcmAngle::Deg135 => (-1, -1),
        }
    }
}

pub const GLCM_LEVELS: usize = 256;

/// Symmetric normalized co-occurrence matrix at distance 1 for one angle.
/// Counts pairs at the angle's offset, adds the transpose, normalizes to
/// sum 1. Indexed \[i * 256 + j\].
pub fn glcm(gray: &GrayFrame, angle: GlcmAngle) -> Result<Vec<f64>, AppearanceError> {
    let (w, h) = (gray.width() as i64, gray.height() as i64);
    if w < 2 || h < 2 {
        return Err(AppearanceError::PatchTooSmall(gray.width(), gray.height()));
    }
    let (dx, dy) = angle.offset();
    let mut m = vec![0.0f64; GLCM_LEVELS * GLCM_LEVELS];
    let mut pairs = 0u64;
    for y in 0..h {
        for x in 0..w {
            let (nx, ny) = (x + dx, y + dy);
            if nx < 0 || ny < 0 || nx >= w || ny >= h {
                continue;
            }
            let a = gray.value(x as u32, y as u32) as usize;
            let b = gray.value(nx as u32, ny as u32) as usize;
            m[a * GLCM_LEVELS + b] += 1.0;
            m[b * GLCM_LEVELS + a] += 1.0;
            pairs += 2;
        }
    }
    let total = pairs as f64;
    for v in &mut m {
        *v /= total;
    }
    Ok(m)
}

/// The five GLCM properties: contrast, dissimilarity, homogeneity,
/// energy, correlation. Correlation of a constant patch (zero marginal
/// variance) is defined as 1.
pub fn glcm_features(m: &[f64]) -> Result<[f64; 5], AppearanceError> {
    assert_eq!(m.len(), GLCM_LEVELS * GLCM_LEVELS);
    let sum: f64 = m.iter().sum();
    if (sum - 1.0).abs() > 1e-6 {
        return Err(AppearanceError::Unnormalized(sum));
    }
    let (mut contrast, mut dissimilarity, mut homogeneity, mut energy) = (0.0, 0.0, 0.0, 0.0);
    let (mut mu_i, mut mu_j) = (0.0, 0.0);
    for i in 0..GLCM_LEVELS {
        for j in 0..GLCM_LEVELS {
            let p = m[i * GLCM_LEVELS + j];
            if p == 0.0 {
                continue;
            }
            let d = i as f64 - j as f64;
            contrast += p * d * d;
            dissimilarity += p * d.abs();
            homogeneity += p / (1.0 + d * d);
            energy += p * p;
            mu_i += p * i as f64;
            mu_j += p * j as f64;
        }
    }
    let (mut var_i, mut var_j, mut cov) = (0.0, 0.0, 0.0);
    for i in 0..GLCM_LEVELS {
        for j in 0..GLCM_LEVELS {
            let p = m[i * GLCM_LEVELS + j];
            if p == 0.0 {
                continue;
            }
            let (di, dj) = (i as f64 - mu_i, j as f64 - mu_j);
            var_i += p * di * di;
            var_j += p * dj * dj;
            cov += p * di * dj;
        }
    }
    let sigma = (var_i * var_j).sqrt();
    let correlation = if sigma < 1e-12 { 1.0 } else { cov / sigma };
    Ok([contrast, dissimilarity, homogeneity, energy, correlation])
}

pub const TEXTURE_TARGET: u32 = 64;

/// 20-element texture descriptor: for each angle 0, 45, 90, 135 in order,
/// the five GLCM properties. The ordering is a stable contract; cached
/// vectors stay comparable across versions.
pub fn texture_features(gray: &GrayFrame) -> Result<[f64; 20], AppearanceError> {
    let mut out = [0.0; 20];
    for (ai, angle) in GlcmAngle::ALL.iter().enumerate() {
        let m = glcm(gray, *angle)?;
        let f = glcm_features(&m)?;
        out[ai * 5..ai * 5 + 5].copy_from_slice(&f);
    }
    Ok(out)
}

fn patch_gray_64(p: &ObjectPatch) -> Result<GrayFrame, AppearanceError> {
    if p.mask.true_pixel_count() == 0 {
        return Err(AppearanceError::EmptyMask);
    }
    let resized = crate::media::resize(&p.pixels, TEXTURE_TARGET, TEXTURE_TARGET)
        .expect("fixed nonzero target");
    Ok(to_grayscale(&resized))
}

/// Cosine similarity between the GLCM texture descriptors of the two
/// patches, both resized to 64x64 grayscale first.
pub fn texture_similarity(p: &ObjectPatch, q: &ObjectPatch) -> Result<f64, AppearanceError> {
    let fa = texture_features(&patch_gray_64(p)?)?;
    let fb = texture_features(&patch_gray_64(q)?)?;
    let dot: f64 = fa.iter().zip(&fb).map(|(a, b)| a * b).sum();
    let na: f64 = fa.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nb: f64 = fb.iter().map(|b| b * b).sum::<f64>().sqrt();
    if na < 1e-12 || nb < 1e-12 {
        return Err(AppearanceError::DegenerateFeatureVector);
    }
    Ok(dot / (na * nb))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AppearanceWeights {
    pub w_color: f64,
    pub w_shape: f64,
    pub w_texture: f64,
}

impl AppearanceWeights {
    pub fn new(w_color: f64, w_shape: f64, w_texture: f64) -> Result<Self, AppearanceError> {
        let w = AppearanceWeights {
            w_color,
            w_shape,
            w_texture,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<(), AppearanceError> {
        let ok = self.w_color >= 0.0
            && self.w_shape >= 0.0
            && self.w_texture >= 0.0
            && (self.w_color + self.w_shape + self.w_texture - 1.0).abs() <= 1e-9;
        if ok {
            Ok(())
        } else {
            Err(AppearanceError::InvalidWeights)
        }
    }
}

/// The three sub-scores plus their weighted aggregate.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AppearanceParts {
    pub color: f64,
    pub shape: f64,
    pub texture: f64,
    pub combined: f64,
}

pub fn appearance_parts(
    p: &ObjectPatch,
    q: &ObjectPatch,
    w: &AppearanceWeights,
    mode: ShapeMode,
    center_contours: bool,
) -> Result<AppearanceParts, AppearanceError> {
    w.validate()?;
    let color = color_similarity(p, q)?;
    let shape = shape_similarity(p, q, mode, center_contours)?;
    let texture = texture_similarity(p, q)?;
    Ok(AppearanceParts {
        color,
        shape,
        texture,
        combined: w.w_color * color + w.w_shape * shape + w.w_texture * texture,
    })
}

/// Weighted appearance score: w_c * S_color + w_s * S_shape + w_t * S_texture.
pub fn appearance_score(
    p: &ObjectPatch,
    q: &ObjectPatch,
    w: &AppearanceWeights,
    mode: ShapeMode,
    center_contours: bool,
) -> Result<f64, AppearanceError> {
    Ok(appearance_parts(p, q, w, mode, center_contours)?.combined)
}
