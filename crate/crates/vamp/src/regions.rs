//! Per-object region masks tracked across frames.
//!
//! Two paths produce tracks: ingesting label maps written by an external
//! segmenter (the fidelity path), or seeding rectangles from sample points
//! and following them with a translation-only template tracker. The
//! internal tracker searches a window around the previous centroid for the
//! translation of the previous bbox that maximizes RGB-histogram
//! intersection with the previous patch.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::media::{Frame, VideoClip};
use crate::sampling::Point2D;

#[derive(Debug, Error)]
pub enum RegionError {
    #[error("mask manifest not found: {0}")]
    ManifestMissing(PathBuf),
    #[error("bad mask manifest: {0}")]
    ManifestInvalid(String),
    #[error("label map {path} is {got_w}x{got_h}, expected {want_w}x{want_h}")]
    LabelMapDimMismatch {
        path: PathBuf,
        got_w: u32,
        got_h: u32,
        want_w: u32,
        want_h: u32,
    },
    #[error("manifest covers {got} frames, clip has {want}")]
    FrameCountMismatch { got: usize, want: usize },
    #[error("seed point ({0}, {1}) is outside the frame")]
    SeedOutOfBounds(f64, f64),
    #[error("mask bbox exceeds frame bounds")]
    MaskOutOfBounds,
    #[error("initial region set is empty")]
    EmptyInitialSet,
}

/// Boolean bitmap within an inclusive pixel rectangle (x0, y0, x1, y1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionMask {
    pub x0: u32,
    pub y0: u32,
    pub x1: u32,
    pub y1: u32,
    bitmap: Vec<bool>,
}

impl RegionMask {
    pub fn new(x0: u32, y0: u32, x1: u32, y1: u32, bitmap: Vec<bool>) -> Self {
        assert!(x1 >= x0 && y1 >= y0);
        let (w, h) = ((x1 - x0 + 1) as usize, (y1 - y0 + 1) as usize);
        assert_eq!(bitmap.len(), w * h);
        assert!(bitmap.iter().any(|&b| b), "mask must have >= 1 true pixel");
        RegionMask {
            x0,
            y0,
            x1,
            y1,
            bitmap,
        }
    }

    pub fn solid_rect(x0: u32, y0: u32, x1: u32, y1: u32) -> Self {
        let n = ((x1 - x0 + 1) * (y1 - y0 + 1)) as usize;
        RegionMask::new(x0, y0, x1, y1, vec![true; n])
    }

    pub fn width(&self) -> u32 {
        self.x1 - self.x0 + 1
    }

    pub fn height(&self) -> u32 {
        self.y1 - self.y0 + 1
    }

    /// Bitmap lookup in bbox-local coordinates.
    pub fn get_local(&self, lx: u32, ly: u32) -> bool {
        self.bitmap[(ly * self.width() + lx) as usize]
    }

    /// True-pixel test in frame coordinates; false outside the bbox.
    pub fn contains(&self, x: u32, y: u32) -> bool {
        x >= self.x0
            && x <= self.x1
            && y >= self.y0
            && y <= self.y1
            && self.get_local(x - self.x0, y - self.y0)
    }

    pub fn true_pixel_count(&self) -> usize {
        self.bitmap.iter().filter(|&&b| b).count()
    }

    /// Mean of true-pixel coordinates, in frame coordinates.
    pub fn centroid(&self) -> Point2D {
        let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
        for ly in 0..self.height() {
            for lx in 0..self.width() {
                if self.get_local(lx, ly) {
                    sx += (self.x0 + lx) as f64;
                    sy += (self.y0 + ly) as f64;
                    n += 1;
                }
            }
        }
        Point2D::new(sx / n as f64, sy / n as f64)
    }

    /// Copy of this mask translated by (dx, dy). Caller keeps it in-frame.
    pub fn translated(&self, dx: i32, dy: i32) -> Self {
        RegionMask {
            x0: (self.x0 as i32 + dx) as u32,
            y0: (self.y0 as i32 + dy) as u32,
            x1: (self.x1 as i32 + dx) as u32,
            y1: (self.y1 as i32 + dy) as u32,
            bitmap: self.bitmap.clone(),
        }
    }

    pub fn fits_in(&self, width: u32, height: u32) -> bool {
        self.x1 < width && self.y1 < height
    }
}

/// One object's masks and centroids over a contiguous frame range.
#[derive(Debug, Clone)]
pub struct ObjectTrack {
    pub object_id: u32,
    /// Label the object carried in its source (label-map value or seed
    /// index); sub-tracks split at gaps share it.
    pub source_label: u32,
    pub start_frame: usize,
    masks: Vec<RegionMask>,
    centroids: Vec<Point2D>,
}

impl ObjectTrack {
    pub fn new(object_id: u32, source_label: u32, start_frame: usize, masks: Vec<RegionMask>) -> Self {
        assert!(!masks.is_empty());
        let centroids = masks.iter().map(|m| m.centroid()).collect();
        ObjectTrack {
            object_id,
            source_label,
            start_frame,
            masks,
            centroids,
        }
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn end_frame(&self) -> usize {
        self.start_frame + self.masks.len() - 1
    }

    pub fn mask_at(&self, frame_index: usize) -> Option<&RegionMask> {
        frame_index
            .checked_sub(self.start_frame)
            .and_then(|i| self.masks.get(i))
    }

    pub fn centroid_at(&self, frame_index: usize) -> Option<Point2D> {
        frame_index
            .checked_sub(self.start_frame)
            .and_then(|i| self.centroids.get(i))
            .copied()
    }

    pub fn centroids(&self) -> &[Point2D] {
        &self.centroids
    }
}

/// Masked, cropped view of one object in one frame. `pixels` holds the
/// RGB crop under the bbox; histogram and texture consumers decide via
/// the mask which pixels count.
#[derive(Debug, Clone)]
pub struct ObjectPatch {
    pub pixels: Frame,
    pub mask: RegionMask,
    pub frame_index: usize,
}

#[derive(Debug, Deserialize)]
struct ManifestFrame {
    index: usize,
    labelmap: String,
}

#[derive(Debug, Deserialize)]
struct Manifest {
    frames: Vec<ManifestFrame>,
    #[serde(default)]
    #[allow(dead_code)]
    objects: Vec<serde_json::Value>,
}

/// Serializable manifest for writing label maps (the inverse of
/// [`load_masks`]); useful for tests and for exporting tracker output.
#[derive(Debug, Serialize)]
pub struct ManifestOut {
    pub frames: Vec<ManifestFrameOut>,
}

#[derive(Debug, Serialize)]
pub struct ManifestFrameOut {
    pub index: usize,
    pub labelmap: String,
}

/// Ingest external segmentation: one 8-bit grayscale label map per frame,
/// pixel value k > 0 meaning object k, 0 background. Objects present in
/// non-contiguous frame ranges are split into contiguous sub-tracks.
pub fn load_masks(
    manifest_path: &Path,
    frame_count: usize,
    dims: (u32, u32),
) -> Result<Vec<ObjectTrack>, RegionError> {
    let text = fs::read_to_string(manifest_path)
        .map_err(|_| RegionError::ManifestMissing(manifest_path.to_path_buf()))?;
    let manifest: Manifest =
        serde_json::from_str(&text).map_err(|e| RegionError::ManifestInvalid(e.to_string()))?;
    if manifest.frames.len() != frame_count {
        return Err(RegionError::FrameCountMismatch {
            got: manifest.frames.len(),
            want: frame_count,
        });
    }
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    // label -> frame_index -> mask
    let mut per_label: BTreeMap<u32, BTreeMap<usize, RegionMask>> = BTreeMap::new();
    for mf in &manifest.frames {
        if mf.index >= frame_count {
            return Err(RegionError::ManifestInvalid(format!(
                "frame index {} out of range",
                mf.index
            )));
        }
        let path = base.join(&mf.labelmap);
        let img = image::open(&path)
            .map_err(|e| RegionError::ManifestInvalid(format!("{}: {e}", path.display())))?
            .into_luma8();
        if (img.width(), img.height()) != dims {
            return Err(RegionError::LabelMapDimMismatch {
                path,
                got_w: img.width(),
                got_h: img.height(),
                want_w: dims.0,
                want_h: dims.1,
            });
        }
        let mut extents: BTreeMap<u8, (u32, u32, u32, u32)> = BTreeMap::new();
        for (x, y, p) in img.enumerate_pixels() {
            let k = p.0[0];
            if k == 0 {
                continue;
            }
            let e = extents.entry(k).or_insert((x, y, x, y));
            e.0 = e.0.min(x);
            e.1 = e.1.min(y);
            e.2 = e.2.max(x);
            e.3 = e.3.max(y);
        }
        for (k, (x0, y0, x1, y1)) in extents {
            let (w, h) = (x1 - x0 + 1, y1 - y0 + 1);
            let mut bitmap = vec![false; (w * h) as usize];
            for ly in 0..h {
                for lx in 0..w {
                    bitmap[(ly * w + lx) as usize] =
                        img.get_pixel(x0 + lx, y0 + ly).0[0] == k;
                }
            }
            per_label
                .entry(k as u32)
                .or_default()
                .insert(mf.index, RegionMask::new(x0, y0, x1, y1, bitmap));
        }
    }
    let mut tracks = Vec::new();
    let mut next_id = 0u32;
    for (label, mut by_frame) in per_label {
        while !by_frame.is_empty() {
            let start = *by_frame.keys().next().unwrap();
            let mut masks = Vec::new();
            let mut t = start;
            while let Some(mask) = by_frame.remove(&t) {
                masks.push(mask);
                t += 1;
            }
            tracks.push(ObjectTrack::new(next_id, label, start, masks));
            next_id += 1;
        }
    }
    Ok(tracks)
}

/// Rectangle seed region: the bounding box of `cluster_points` dilated by
/// 10% per side and clamped to the frame, or a 31x31 square centered at
/// `seed` when fewer than 2 cluster points are given.
pub fn region_from_seed(
    frame: &Frame,
    seed: Point2D,
    cluster_points: &[Point2D],
) -> Result<RegionMask, RegionError> {
    let (w, h) = (frame.width() as f64, frame.height() as f64);
    if seed.x < 0.0 || seed.y < 0.0 || seed.x >= w || seed.y >= h {
        return Err(RegionError::SeedOutOfBounds(seed.x, seed.y));
    }
    let (x0, y0, x1, y1) = if cluster_points.len() >= 2 {
        let min_x = cluster_points.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
        let max_x = cluster_points.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
        let min_y = cluster_points.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
        let max_y = cluster_points.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
        let (dx, dy) = ((max_x - min_x) * 0.1, (max_y - min_y) * 0.1);
        (min_x - dx, min_y - dy, max_x + dx, max_y + dy)
    } else {
        (seed.x - 15.0, seed.y - 15.0, seed.x + 15.0, seed.y + 15.0)
    };
    let x0 = x0.round().max(0.0) as u32;
    let y0 = y0.round().max(0.0) as u32;
    let x1 = (x1.round() as i64).clamp(x0 as i64, frame.width() as i64 - 1) as u32;
    let y1 = (y1.round() as i64).clamp(y0 as i64, frame.height() as i64 - 1) as u32;
    Ok(RegionMask::solid_rect(x0, y0, x1, y1))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct TrackerParams {
    /// Search window half-width around the previous centroid, in pixels.
    pub search_radius: u32,
    /// Minimum histogram intersection to keep a track alive.
    pub accept_threshold: f64,
    /// Bins per channel for the match histogram (independent of the
    /// 256-bin scoring histograms).
    pub bins: usize,
}

impl Default for TrackerParams {
    fn default() -> Self {
        TrackerParams {
            search_radius: 16,
            accept_threshold: 0.6,
            bins: 16,
        }
    }
}

/// Normalized per-channel histogram of the rectangle pixels covered by a
/// mask bitmap translated to (x0, y0).
fn window_histogram(frame: &Frame, mask: &RegionMask, x0: u32, y0: u32, bins: usize) -> Vec<f64> {
    let mut hist = vec![0.0; bins * 3];
    let mut count = 0usize;
    for ly in 0..mask.height() {
        for lx in 0..mask.width() {
            if !mask.get_local(lx, ly) {
                continue;
            }
            let px = frame.pixel(x0 + lx, y0 + ly);
            for (c, &v) in px.iter().enumerate() {
                hist[c * bins + (v as usize * bins) / 256] += 1.0;
            }
            count += 1;
        }
    }
    for v in &mut hist {
        *v /= count as f64;
    }
    hist
}

fn histogram_intersection(a: &[f64], b: &[f64]) -> f64 {
    // per-channel intersections averaged; each channel sums to 1
    a.iter().zip(b).map(|(x, y)| x.min(*y)).sum::<f64>() / 3.0
}

struct Candidate {
    dx: i32,
    dy: i32,
    quality: f64,
}

/// Follow each initial region through the clip by translation-only
/// template search. A track ends when no candidate window reaches the
/// acceptance threshold or the region would leave the frame. Assignment
/// across objects is greedy by descending match quality; no two objects
/// may claim the same window position in the same frame.
pub fn track_regions(
    clip: &VideoClip,
    initial: &[RegionMask],
    params: &TrackerParams,
) -> Result<Vec<ObjectTrack>, RegionError> {
    if initial.is_empty() {
        return Err(RegionError::EmptyInitialSet);
    }
    let (fw, fh) = (clip.width(), clip.height());
    for mask in initial {
        if !mask.fits_in(fw, fh) {
            return Err(RegionError::MaskOutOfBounds);
        }
    }
    let r = params.search_radius as i32;

    struct Live {
        mask: RegionMask,
        reference: Vec<f64>,
        history: Vec<RegionMask>,
    }
    let mut finished: Vec<(usize, Vec<RegionMask>)> = Vec::new();
    let mut live: Vec<Option<Live>> = initial
        .iter()
        .map(|mask| {
            let reference =
                window_histogram(clip.frame(0), mask, mask.x0, mask.y0, params.bins);
            Some(Live {
                mask: mask.clone(),
                reference,
                history: vec![mask.clone()],
            })
        })
        .collect();

    for t in 1..clip.len() {
        let frame = clip.frame(t);
        // candidate lists per live object, best first
        let mut proposals: Vec<(usize, Vec<Candidate>)> = Vec::new();
        for (obj, slot) in live.iter().enumerate() {
            let Some(state) = slot else { continue };
            let mut cands = Vec::new();
            for dy in -r..=r {
                for dx in -r..=r {
                    let nx0 = state.mask.x0 as i64 + dx as i64;
                    let ny0 = state.mask.y0 as i64 + dy as i64;
                    let nx1 = state.mask.x1 as i64 + dx as i64;
                    let ny1 = state.mask.y1 as i64 + dy as i64;
                    if nx0 < 0 || ny0 < 0 || nx1 >= fw as i64 || ny1 >= fh as i64 {
                        continue;
                    }
                    let hist = window_histogram(
                        frame,
                        &state.mask,
                        nx0 as u32,
                        ny0 as u32,
                        params.bins,
                    );
                    let quality = histogram_intersection(&state.reference, &hist);
                    if quality >= params.accept_threshold {
                        cands.push(Candidate { dx, dy, quality });
                    }
                }
            }
            cands.sort_by(|a, b| {
                b.quality
                    .partial_cmp(&a.quality)
                    .unwrap()
                    .then_with(|| {
                        (a.dx * a.dx + a.dy * a.dy).cmp(&(b.dx * b.dx + b.dy * b.dy))
                    })
                    .then_with(|| (a.dy, a.dx).cmp(&(b.dy, b.dx)))
            });
            proposals.push((obj, cands));
        }
        // greedy assignment: repeatedly take the best remaining proposal;
        // a claimed window position excludes identical claims by others
        let mut claimed: Vec<(u32, u32, u32, u32)> = Vec::new();
        let mut cursor: BTreeMap<usize, usize> = proposals.iter().map(|(o, _)| (*o, 0)).collect();
        let mut assigned: BTreeMap<usize, (i32, i32)> = BTreeMap::new();
        loop {
            let mut best: Option<(f64, usize)> = None;
            for (obj, cands) in &proposals {
                if assigned.contains_key(obj) {
                    continue;
                }
                let mut i = cursor[obj];
                while i < cands.len() {
                    let c = &cands[i];
                    let m = &live[*obj].as_ref().unwrap().mask;
                    let pos = (
                        (m.x0 as i32 + c.dx) as u32,
                        (m.y0 as i32 + c.dy) as u32,
                        (m.x1 as i32 + c.dx) as u32,
                        (m.y1 as i32 + c.dy) as u32,
                    );
                    if claimed.contains(&pos) {
                        i += 1;
                    } else {
                        break;
                    }
                }
                cursor.insert(*obj, i);
                if i < cands.len() {
                    let q = cands[i].quality;
                    // ties resolved by fixed object order
                    if best.map(|(bq, bo)| q > bq || (q == bq && *obj < bo)).unwrap_or(true) {
                        best = Some((q, *obj));
                    }
                }
            }
            let Some((_, obj)) = best else { break };
            let i = cursor[&obj];
            let cand = &proposals.iter().find(|(o, _)| *o == obj).unwrap().1[i];
            let state = live[obj].as_mut().unwrap();
            let new_mask = state.mask.translated(cand.dx, cand.dy);
            claimed.push((new_mask.x0, new_mask.y0, new_mask.x1, new_mask.y1));
            state.reference =
                window_histogram(frame, &new_mask, new_mask.x0, new_mask.y0, params.bins);
            state.mask = new_mask.clone();
            state.history.push(new_mask);
            assigned.insert(obj, (cand.dx, cand.dy));
        }
        // objects with no accepted candidate terminate at t-1
        for obj in 0..live.len() {
            if live[obj].is_some() && !assigned.contains_key(&obj) {
                let state = live[obj].take().unwrap();
                finished.push((obj, state.history));
            }
        }
    }
    for obj in 0..live.len() {
        if let Some(state) = live[obj].take() {
            finished.push((obj, state.history));
        }
    }
    finished.sort_by_key(|(obj, _)| *obj);
    Ok(finished
        .into_iter()
        .map(|(obj, masks)| ObjectTrack::new(obj as u32, obj as u32, 0, masks))
        .collect())
}

/// Crop `frame` to the mask's bbox; the mask rides along so downstream
/// consumers can exclude non-mask pixels.
pub fn extract_patch(
    frame: &Frame,
    mask: &RegionMask,
    frame_index: usize,
) -> Result<ObjectPatch, RegionError> {
    if !mask.fits_in(frame.width(), frame.height()) {
        return Err(RegionError::MaskOutOfBounds);
    }
    let (w, h) = (mask.width(), mask.height());
    let mut data = Vec::with_capacity((w * h * 3) as usize);
    for ly in 0..h {
        for lx in 0..w {
            data.extend_from_slice(&frame.pixel(mask.x0 + lx, mask.y0 + ly));
        }
    }
    Ok(ObjectPatch {
        pixels: Frame::new(w, h, data),
        mask: mask.clone(),
        frame_index,
    })
}

/// Boundary pixels of the mask: true pixels with at least one false or
/// out-of-bbox 4-neighbor, in frame coordinates, row-major order.
pub fn contour(mask: &RegionMask) -> Vec<Point2D> {
    let (w, h) = (mask.width() as i64, mask.height() as i64);
    let mut out = Vec::new();
    for ly in 0..h {
        for lx in 0..w {
            if !mask.get_local(lx as u32, ly as u32) {
                continue;
            }
            let boundary = [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)].iter().any(|&(dx, dy)| {
                let (nx, ny) = (lx + dx, ly + dy);
                nx < 0 || ny < 0 || nx >= w || ny >= h || !mask.get_local(nx as u32, ny as u32)
            });
            if boundary {
                out.push(Point2D::new(
                    (mask.x0 as i64 + lx) as f64,
                    (mask.y0 as i64 + ly) as f64,
                ));
            }
        }
    }
    out
}
