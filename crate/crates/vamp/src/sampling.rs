//! Seed-point generation for the first frame: uniform random, grid centers,
//! difference-of-Gaussians keypoints, and DBSCAN clustering of keypoints.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::media::GrayFrame;

#[derive(Debug, Error)]
pub enum SamplingError {
    #[error("point count must be >= 1")]
    ZeroCount,
    #[error("frame must be at least 16x16 for keypoint detection, got {0}x{1}")]
    FrameTooSmall(u32, u32),
    #[error("dbscan eps must be > 0")]
    InvalidEps,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub fn new(x: f64, y: f64) -> Self {
        Point2D { x, y }
    }

    pub fn distance(&self, other: &Point2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Scale-space extremum of the DoG detector. Descriptors are never
/// computed; only the location feeds region seeding.
#[derive(Debug, Clone, Copy)]
pub struct Keypoint {
    pub location: Point2D,
    pub scale: f64,
    pub response: f64,
}

/// Exactly n points uniform over [0,width) x [0,height), reproducible
/// for a fixed seed.
pub fn sample_random(
    width: u32,
    height: u32,
    n: usize,
    seed: u64,
) -> Result<Vec<Point2D>, SamplingError> {
    if n == 0 {
        return Err(SamplingError::ZeroCount);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|_| {
            let x = rng.gen_range(0.0..width as f64);
            let y = rng.gen_range(0.0..height as f64);
            Point2D::new(x, y)
        })
        .collect())
}

/// nx * ny points at grid-cell centers, row-major.
pub fn sample_grid(
    width: u32,
    height: u32,
    nx: usize,
    ny: usize,
) -> Result<Vec<Point2D>, SamplingError> {
    if nx == 0 || ny == 0 {
        return Err(SamplingError::ZeroCount);
    }
    let mut points = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            points.push(Point2D::new(
                (i as f64 + 0.5) * width as f64 / nx as f64,
                (j as f64 + 0.5) * height as f64 / ny as f64,
            ));
        }
    }
    Ok(points)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectorParams {
    pub octaves: usize,
    pub scales_per_octave: usize,
    /// Threshold on |DoG| with pixel values scaled to [0,1].
    pub contrast_threshold: f64,
    /// Principal-curvature ratio bound for edge rejection.
    pub edge_threshold: f64,
    pub base_sigma: f64,
}

impl Default for DetectorParams {
    fn default() -> Self {
        DetectorParams {
            octaves: 4,
            scales_per_octave: 3,
            contrast_threshold: 0.03,
            edge_threshold: 10.0,
            base_sigma: 1.6,
        }
    }
}

struct FloatImage {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl FloatImage {
    fn at(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    fn from_gray(gray: &GrayFrame) -> Self {
        FloatImage {
            width: gray.width() as usize,
            height: gray.height() as usize,
            data: gray.data().iter().map(|&v| v as f32 / 255.0).collect(),
        }
    }

    fn downsample(&self) -> Self {
        let (w, h) = (self.width / 2, self.height / 2);
        let mut data = Vec::with_capacity(w * h);
        for y in 0..h {
            for x in 0..w {
                data.push(self.at(2 * x, 2 * y));
            }
        }
        FloatImage {
            width: w,
            height: h,
            data,
        }
    }
}

fn gaussian_kernel(sigma: f64) -> Vec<f32> {
    let radius = (3.0 * sigma).ceil().max(1.0) as usize;
    let mut k: Vec<f32> = (0..=2 * radius)
        .map(|i| {
            let d = i as f64 - radius as f64;
            (-d * d / (2.0 * sigma * sigma)).exp() as f32
        })
        .collect();
    let sum: f32 = k.iter().sum();
    for v in &mut k {
        *v /= sum;
    }
    k
}

/// Separable Gaussian blur with edge-replicate padding.
fn blur(img: &FloatImage, sigma: f64) -> FloatImage {
    let kernel = gaussian_kernel(sigma);
    let radius = kernel.len() / 2;
    let (w, h) = (img.width, img.height);
    let mut tmp = vec![0.0f32; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (i, &kv) in kernel.iter().enumerate() {
                let sx = (x as isize + i as isize - radius as isize).clamp(0, w as isize - 1);
                acc += kv * img.at(sx as usize, y);
            }
            tmp[y * w + x] = acc;
        }
    }
    let mut out = vec![0.0f32; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (i, &kv) in kernel.iter().enumerate() {
                let sy = (y as isize + i as isize - radius as isize).clamp(0, h as isize - 1);
                acc += kv * tmp[sy as usize * w + x];
            }
            out[y * w + x] = acc;
        }
    }
    FloatImage {
        width: w,
        height: h,
        data: out,
    }
}

/// Difference-of-Gaussians scale-space extrema with contrast and
/// edge-response rejection, sorted by descending response. Deterministic.
pub fn detect_keypoints(
    gray: &GrayFrame,
    params: &DetectorParams,
) -> Result<Vec<Keypoint>, SamplingError> {
    if gray.width() < 16 || gray.height() < 16 {
        return Err(SamplingError::FrameTooSmall(gray.width(), gray.height()));
    }
    let s = params.scales_per_octave.max(1);
    let k = 2f64.powf(1.0 / s as f64);
    let mut keypoints = Vec::new();
    let mut base = FloatImage::from_gray(gray);
    let max_octaves = {
        let mut o = 0usize;
        let mut d = gray.width().min(gray.height()) as usize;
        while d >= 16 {
            o += 1;
            d /= 2;
        }
        o
    };
    for octave in 0..params.octaves.min(max_octaves) {
        let sigmas: Vec<f64> = (0..s + 3)
            .map(|i| params.base_sigma * k.powi(i as i32))
            .collect();
        let gaussians: Vec<FloatImage> = sigmas.iter().map(|&sg| blur(&base, sg)).collect();
        let dogs: Vec<FloatImage> = gaussians
            .windows(2)
            .map(|pair| FloatImage {
                width: pair[0].width,
                height: pair[0].height,
                data: pair[1]
                    .data
                    .iter()
                    .zip(&pair[0].data)
                    .map(|(a, b)| a - b)
                    .collect(),
            })
            .collect();
        let (w, h) = (base.width, base.height);
        let scale_factor = (1u32 << octave) as f64;
        for si in 1..=s {
            let (below, here, above) = (&dogs[si - 1], &dogs[si], &dogs[si + 1]);
            for y in 1..h - 1 {
                for x in 1..w - 1 {
                    let v = here.at(x, y);
                    if (v.abs() as f64) < params.contrast_threshold {
                        continue;
                    }
                    let mut is_max = true;
                    let mut is_min = true;
                    'nb: for dy in -1i32..=1 {
                        for dx in -1i32..=1 {
                            let (nx, ny) = ((x as i32 + dx) as usize, (y as i32 + dy) as usize);
                            for img in [below, here, above] {
                                let nv = img.at(nx, ny);
                                if std::ptr::eq(img, here) && dx == 0 && dy == 0 {
                                    continue;
                                }
                                if nv >= v {
                                    is_max = false;
                                }
                                if nv <= v {
                                    is_min = false;
                                }
                                if !is_max && !is_min {
                                    break 'nb;
                                }
                            }
                        }
                    }
                    if !is_max && !is_min {
                        continue;
                    }
                    // 2x2 spatial Hessian for edge rejection
                    let dxx = (here.at(x + 1, y) + here.at(x - 1, y) - 2.0 * v) as f64;
                    let dyy = (here.at(x, y + 1) + here.at(x, y - 1) - 2.0 * v) as f64;
                    let dxy = ((here.at(x + 1, y + 1) - here.at(x - 1, y + 1)
                        - here.at(x + 1, y - 1)
                        + here.at(x - 1, y - 1)) as f64)
                        / 4.0;
                    let tr = dxx + dyy;
                    let det = dxx * dyy - dxy * dxy;
                    let r = params.edge_threshold;
                    if det <= 0.0 || tr * tr * r >= (r + 1.0) * (r + 1.0) * det {
                        continue;
                    }
                    keypoints.push(Keypoint {
                        location: Point2D::new(x as f64 * scale_factor, y as f64 * scale_factor),
                        scale: sigmas[si] * scale_factor,
                        response: v.abs() as f64,
                    });
                }
            }
        }
        base = base.downsample();
        if base.width < 16 || base.height < 16 {
            break;
        }
    }
    keypoints.sort_by(|a, b| {
        b.response
            .partial_cmp(&a.response)
            .unwrap()
            .then(a.location.y.partial_cmp(&b.location.y).unwrap())
            .then(a.location.x.partial_cmp(&b.location.x).unwrap())
            .then(a.scale.partial_cmp(&b.scale).unwrap())
    });
    Ok(keypoints)
}

/// Clusters and noise partition the input indices; each cluster holds
/// at least `min_pts` members.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterResult {
    pub clusters: Vec<Vec<usize>>,
    pub noise: Vec<usize>,
}

/// Density-based clustering with Euclidean distance. A point is core when
/// its eps-neighborhood (self included) holds at least `min_pts` points;
/// border points join the cluster of their lowest-indexed core neighbor.
pub fn dbscan(
    points: &[Point2D],
    eps: f64,
    min_pts: usize,
) -> Result<ClusterResult, SamplingError> {
    if !(eps > 0.0) {
        return Err(SamplingError::InvalidEps);
    }
    let min_pts = min_pts.max(1);
    let n = points.len();
    let neighbors: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| points[i].distance(&points[j]) <= eps)
                .collect()
        })
        .collect();
    let core: Vec<bool> = neighbors.iter().map(|nb| nb.len() >= min_pts).collect();

    // Expand clusters over core points; assign each border point to its
    // lowest-indexed core neighbor's cluster.
    const UNVISITED: usize = usize::MAX;
    let mut label = vec![UNVISITED; n];
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for start in 0..n {
        if !core[start] || label[start] != UNVISITED {
            continue;
        }
        let id = clusters.len();
        let mut members = Vec::new();
        let mut stack = vec![start];
        label[start] = id;
        while let Some(p) = stack.pop() {
            members.push(p);
            for &q in &neighbors[p] {
                if core[q] && label[q] == UNVISITED {
                    label[q] = id;
                    stack.push(q);
                }
            }
        }
        clusters.push(members);
    }
    let mut noise = Vec::new();
    for i in 0..n {
        if core[i] {
            continue;
        }
        match neighbors[i].iter().find(|&&q| core[q]) {
            Some(&q) => clusters[label[q]].push(i),
            None => noise.push(i),
        }
    }
    for c in &mut clusters {
        c.sort_unstable();
    }
    Ok(ClusterResult { clusters, noise })
}

/// Arithmetic mean of member coordinates, one centroid per cluster,
/// cluster order preserved.
pub fn cluster_centroids(points: &[Point2D], clusters: &ClusterResult) -> Vec<Point2D> {
    clusters
        .clusters
        .iter()
        .map(|members| {
            let (sx, sy) = members
                .iter()
                .fold((0.0, 0.0), |(sx, sy), &i| (sx + points[i].x, sy + points[i].y));
            Point2D::new(sx / members.len() as f64, sy / members.len() as f64)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::media::{to_grayscale, Frame};

    #[test]
    fn random_is_deterministic_per_seed() {
        let a = sample_random(100, 100, 5, 7).unwrap();
        let b = sample_random(100, 100, 5, 7).unwrap();
        assert_eq!(a, b);
        let c = sample_random(100, 100, 5, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn random_degenerate_domain() {
        let pts = sample_random(1, 1, 3, 0).unwrap();
        assert_eq!(pts.len(), 3);
        for p in pts {
            assert!(p.x >= 0.0 && p.x < 1.0);
            assert!(p.y >= 0.0 && p.y < 1.0);
        }
    }

    #[test]
    fn random_mean_near_center() {
        let pts = sample_random(320, 240, 1000, 1).unwrap();
        let mean_x = pts.iter().map(|p| p.x).sum::<f64>() / pts.len() as f64;
        assert!((mean_x - 160.0).abs() < 10.0, "mean_x = {mean_x}");
    }

    #[test]
    fn random_zero_count() {
        assert!(matches!(
            sample_random(10, 10, 0, 0),
            Err(SamplingError::ZeroCount)
        ));
    }

    #[test]
    fn grid_known_points() {
        let single = sample_grid(100, 100, 1, 1).unwrap();
        assert_eq!(single, vec![Point2D::new(50.0, 50.0)]);
        let two = sample_grid(100, 50, 2, 1).unwrap();
        assert_eq!(two, vec![Point2D::new(25.0, 25.0), Point2D::new(75.0, 25.0)]);
    }

    #[test]
    fn grid_spacing_and_interiority() {
        let pts = sample_grid(8, 8, 4, 4).unwrap();
        assert_eq!(pts.len(), 16);
        for (i, a) in pts.iter().enumerate() {
            assert!(a.x > 0.0 && a.x < 8.0 && a.y > 0.0 && a.y < 8.0);
            for b in &pts[i + 1..] {
                assert!(a.distance(b) >= 2.0 - 1e-12);
            }
        }
    }

    fn blob_frame(w: u32, h: u32, cx: f64, cy: f64) -> GrayFrame {
        let mut data = vec![0u8; (w * h * 3) as usize];
        for y in 0..h {
            for x in 0..w {
                let d2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
                let v = (255.0 * (-d2 / 18.0).exp()).round() as u8;
                let i = ((y * w + x) * 3) as usize;
                data[i..i + 3].copy_from_slice(&[v, v, v]);
            }
        }
        to_grayscale(&Frame::new(w, h, data))
    }

    #[test]
    fn keypoints_empty_on_constant_image() {
        let gray = to_grayscale(&Frame::filled(64, 64, [90, 90, 90]));
        let kps = detect_keypoints(&gray, &DetectorParams::default()).unwrap();
        assert!(kps.is_empty());
    }

    #[test]
    fn keypoints_find_bright_blob() {
        let gray = blob_frame(64, 64, 32.0, 32.0);
        let kps = detect_keypoints(&gray, &DetectorParams::default()).unwrap();
        assert!(!kps.is_empty());
        let best = &kps[0];
        assert!(
            (best.location.x - 32.0).abs() <= 2.0 && (best.location.y - 32.0).abs() <= 2.0,
            "best keypoint at ({}, {})",
            best.location.x,
            best.location.y
        );
    }

    #[test]
    fn keypoints_translation_covariant() {
        let base = detect_keypoints(&blob_frame(96, 96, 40.0, 40.0), &DetectorParams::default())
            .unwrap();
        let shifted =
            detect_keypoints(&blob_frame(96, 96, 47.0, 43.0), &DetectorParams::default()).unwrap();
        assert!(!base.is_empty() && !shifted.is_empty());
        let b = base[0].location;
        let s = shifted[0].location;
        assert!((s.x - b.x - 7.0).abs() <= 1.0);
        assert!((s.y - b.y - 3.0).abs() <= 1.0);
    }

    #[test]
    fn keypoints_deterministic_on_noise() {
        let pts = sample_random(64, 64, 4096, 9).unwrap();
        let mut data = vec![0u8; 64 * 64];
        for (i, p) in pts.iter().enumerate() {
            data[i % (64 * 64)] = ((p.x * 31.0 + p.y * 17.0) as u64 % 256) as u8;
        }
        let gray = GrayFrame::new(64, 64, data);
        let a = detect_keypoints(&gray, &DetectorParams::default()).unwrap();
        let b = detect_keypoints(&gray, &DetectorParams::default()).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.location, y.location);
            assert_eq!(x.response, y.response);
        }
    }

    #[test]
    fn keypoints_reject_small_frames() {
        let gray = GrayFrame::new(8, 8, vec![0; 64]);
        assert!(matches!(
            detect_keypoints(&gray, &DetectorParams::default()),
            Err(SamplingError::FrameTooSmall(8, 8))
        ));
    }

    #[test]
    fn dbscan_two_tight_groups() {
        let mut pts = Vec::new();
        for i in 0..5 {
            pts.push(Point2D::new(i as f64, 0.0));
        }
        for i in 0..5 {
            pts.push(Point2D::new(100.0 + i as f64, 0.0));
        }
        let res = dbscan(&pts, 5.0, 3).unwrap();
        assert_eq!(res.clusters.len(), 2);
        assert!(res.noise.is_empty());
    }

    #[test]
    fn dbscan_all_noise() {
        let pts = vec![
            Point2D::new(0.0, 0.0),
            Point2D::new(50.0, 0.0),
            Point2D::new(0.0, 50.0),
            Point2D::new(50.0, 50.0),
        ];
        let res = dbscan(&pts, 1.0, 2).unwrap();
        assert!(res.clusters.is_empty());
        assert_eq!(res.noise, vec![0, 1, 2, 3]);
    }

    #[test]
    fn dbscan_empty_input() {
        let res = dbscan(&[], 1.0, 3).unwrap();
        assert!(res.clusters.is_empty());
        assert!(res.noise.is_empty());
    }

    #[test]
    fn dbscan_invalid_eps() {
        assert!(matches!(dbscan(&[], 0.0, 3), Err(SamplingError::InvalidEps)));
    }

    #[test]
    fn centroids_of_simple_clusters() {
        let pts = vec![
            Point2D::new(0.0, 0.0),
            Point2D::new(2.0, 0.0),
            Point2D::new(9.0, 9.0),
        ];
        let clusters = ClusterResult {
            clusters: vec![vec![0, 1], vec![2]],
            noise: vec![],
        };
        let c = cluster_centroids(&pts, &clusters);
        assert_eq!(c, vec![Point2D::new(1.0, 0.0), Point2D::new(9.0, 9.0)]);
    }

    #[test]
    fn centroid_of_square_is_center() {
        let pts = vec![
            Point2D::new(0.0, 0.0),
            Point2D::new(0.0, 2.0),
            Point2D::new(2.0, 0.0),
            Point2D::new(2.0, 2.0),
        ];
        let clusters = ClusterResult {
            clusters: vec![vec![0, 1, 2, 3]],
            noise: vec![],
        };
        assert_eq!(cluster_centroids(&pts, &clusters), vec![Point2D::new(1.0, 1.0)]);
    }
}
