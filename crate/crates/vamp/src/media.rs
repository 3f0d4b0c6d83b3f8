//! Frame I/O and pixel-level primitives shared by every other module.
//!
//! Clips are directories of lossless still images (PNG or binary PPM/PGM),
//! ordered lexicographically by filename. There is no container demuxing;
//! extract frames with any external tool first.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MediaError {
    #[error("directory not found: {0}")]
    MissingDirectory(PathBuf),
    #[error("need at least 2 frames, found {0}")]
    TooFewFrames(usize),
    #[error("frame {path} is {got_w}x{got_h}, expected {want_w}x{want_h}")]
    DimensionMismatch {
        path: PathBuf,
        got_w: u32,
        got_h: u32,
        want_w: u32,
        want_h: u32,
    },
    #[error("failed to decode {path}: {source}")]
    DecodeFailure {
        path: PathBuf,
        source: image::ImageError,
    },
    #[error("failed to write {path}: {0}", path = .1.display())]
    WriteFailure(String, PathBuf),
    #[error("resize target dimensions must be >= 1")]
    ZeroTargetDimension,
}

/// 8-bit RGB image, row-major, 3 bytes per pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl Frame {
    pub fn new(width: u32, height: u32, data: Vec<u8>) -> Self {
        assert!(width >= 1 && height >= 1);
        assert_eq!(data.len(), (width * height * 3) as usize);
        Frame {
            width,
            height,
            data,
        }
    }

    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Self {
        let data = rgb
            .iter()
            .copied()
            .cycle()
            .take((width * height * 3) as usize)
            .collect();
        Frame::new(width, height, data)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        let i = ((y * self.width + x) * 3) as usize;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set_pixel(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let i = ((y * self.width + x) * 3) as usize;
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    pub fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }
}

/// 8-bit single-channel luma image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayFrame {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl GrayFrame {
    pub fn new(width: u32, height: u32, data: Vec<u8>) -> Self {
        assert!(width >= 1 && height >= 1);
        assert_eq!(data.len(), (width * height) as usize);
        GrayFrame {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn value(&self, x: u32, y: u32) -> u8 {
        self.data[(y * self.width + x) as usize]
    }
}

/// Ordered sequence of same-dimension frames.
#[derive(Debug, Clone)]
pub struct VideoClip {
    frames: Vec<Frame>,
    fps: f64,
}

impl VideoClip {
    pub fn new(frames: Vec<Frame>, fps: f64) -> Self {
        assert!(frames.len() >= 2, "a clip needs at least 2 frames");
        let (w, h) = (frames[0].width(), frames[0].height());
        assert!(frames.iter().all(|f| f.width() == w && f.height() == h));
        VideoClip { frames, fps }
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn frame(&self, index: usize) -> &Frame {
        &self.frames[index]
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn width(&self) -> u32 {
        self.frames[0].width()
    }

    pub fn height(&self) -> u32 {
        self.frames[0].height()
    }

    pub fn diagonal(&self) -> f64 {
        let (w, h) = (self.width() as f64, self.height() as f64);
        (w * w + h * h).sqrt()
    }
}

/// Minimal glob matcher supporting `*` and `?`.
fn glob_match(pattern: &str, name: &str) -> bool {
    let p: Vec<char> = pattern.chars().collect();
    let n: Vec<char> = name.chars().collect();
    // dp[j] = pattern[..i] matches name[..j]
    let mut dp = vec![false; n.len() + 1];
    dp[0] = true;
    for &pc in &p {
        let mut next = vec![false; n.len() + 1];
        if pc == '*' {
            let mut any = false;
            for j in 0..=n.len() {
                any |= dp[j];
                next[j] = any;
            }
        } else {
            for j in 0..n.len() {
                next[j + 1] = dp[j] && (pc == '?' || pc == n[j]);
            }
        }
        dp = next;
    }
    dp[n.len()]
}

/// Load all images in `dir_path` whose filename matches `pattern`,
/// in lexicographic filename order.
pub fn load_frames(dir_path: &Path, pattern: &str) -> Result<VideoClip, MediaError> {
    if !dir_path.is_dir() {
        return Err(MediaError::MissingDirectory(dir_path.to_path_buf()));
    }
    let mut paths: Vec<PathBuf> = fs::read_dir(dir_path)
        .map_err(|_| MediaError::MissingDirectory(dir_path.to_path_buf()))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| {
            p.is_file()
                && p.file_name()
                    .and_then(|n| n.to_str())
                    .map(|n| glob_match(pattern, n))
                    .unwrap_or(false)
        })
        .collect();
    paths.sort();
    if paths.len() < 2 {
        return Err(MediaError::TooFewFrames(paths.len()));
    }
    let mut frames = Vec::with_capacity(paths.len());
    for path in &paths {
        let img = image::open(path)
            .map_err(|source| MediaError::DecodeFailure {
                path: path.clone(),
                source,
            })?
            .into_rgb8();
        let frame = Frame::new(img.width(), img.height(), img.into_raw());
        if let Some(first) = frames.first() {
            let first: &Frame = first;
            if frame.width() != first.width() || frame.height() != first.height() {
                return Err(MediaError::DimensionMismatch {
                    path: path.clone(),
                    got_w: frame.width(),
                    got_h: frame.height(),
                    want_w: first.width(),
                    want_h: first.height(),
                });
            }
        }
        frames.push(frame);
    }
    Ok(VideoClip::new(frames, 0.0))
}

/// Write the clip as zero-padded numbered PNGs; returns the file count.
/// Creates `dir_path` if missing. Round-trip through [`load_frames`] is
/// bit-exact.
pub fn save_frames(clip: &VideoClip, dir_path: &Path) -> Result<usize, MediaError> {
    fs::create_dir_all(dir_path)
        .map_err(|e| MediaError::WriteFailure(e.to_string(), dir_path.to_path_buf()))?;
    for (i, frame) in clip.frames().iter().enumerate() {
        let path = dir_path.join(format!("frame_{i:05}.png"));
        let buf = image::RgbImage::from_raw(frame.width(), frame.height(), frame.data().to_vec())
            .expect("frame buffer size");
        buf.save(&path)
            .map_err(|e| MediaError::WriteFailure(e.to_string(), path.clone()))?;
    }
    Ok(clip.len())
}

/// ITU-R BT.601 luma: round(0.299 R + 0.587 G + 0.114 B).
pub fn to_grayscale(frame: &Frame) -> GrayFrame {
    let data = frame
        .data()
        .chunks_exact(3)
        .map(|px| {
            let y = 0.299 * px[0] as f64 + 0.587 * px[1] as f64 + 0.114 * px[2] as f64;
            y.round().clamp(0.0, 255.0) as u8
        })
        .collect();
    GrayFrame::new(frame.width(), frame.height(), data)
}

fn resize_channels(
    data: &[u8],
    w: u32,
    h: u32,
    channels: usize,
    tw: u32,
    th: u32,
) -> Vec<u8> {
    if tw == w && th == h {
        return data.to_vec();
    }
    let mut out = vec![0u8; (tw * th) as usize * channels];
    let sx = w as f64 / tw as f64;
    let sy = h as f64 / th as f64;
    for ty in 0..th {
        let src_y = ((ty as f64 + 0.5) * sy - 0.5).clamp(0.0, (h - 1) as f64);
        let y0 = src_y.floor() as u32;
        let y1 = (y0 + 1).min(h - 1);
        let fy = src_y - y0 as f64;
        for tx in 0..tw {
            let src_x = ((tx as f64 + 0.5) * sx - 0.5).clamp(0.0, (w - 1) as f64);
            let x0 = src_x.floor() as u32;
            let x1 = (x0 + 1).min(w - 1);
            let fx = src_x - x0 as f64;
            for c in 0..channels {
                let at = |x: u32, y: u32| data[(y * w + x) as usize * channels + c] as f64;
                let top = at(x0, y0) * (1.0 - fx) + at(x1, y0) * fx;
                let bot = at(x0, y1) * (1.0 - fx) + at(x1, y1) * fx;
                let v = top * (1.0 - fy) + bot * fy;
                out[(ty * tw + tx) as usize * channels + c] = v.round().clamp(0.0, 255.0) as u8;
            }
        }
    }
    out
}

/// Bilinear resize. Identity when the target equals the source dims.
pub fn resize(frame: &Frame, target_w: u32, target_h: u32) -> Result<Frame, MediaError> {
    if target_w == 0 || target_h == 0 {
        return Err(MediaError::ZeroTargetDimension);
    }
    let data = resize_channels(
        frame.data(),
        frame.width(),
        frame.height(),
        3,
        target_w,
        target_h,
    );
    Ok(Frame::new(target_w, target_h, data))
}

/// Bilinear resize of a grayscale image.
pub fn resize_gray(frame: &GrayFrame, target_w: u32, target_h: u32) -> Result<GrayFrame, MediaError> {
    if target_w == 0 || target_h == 0 {
        return Err(MediaError::ZeroTargetDimension);
    }
    let data = resize_channels(
        frame.data(),
        frame.width(),
        frame.height(),
        1,
        target_w,
        target_h,
    );
    Ok(GrayFrame::new(target_w, target_h, data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn small_clip(n: usize, w: u32, h: u32) -> VideoClip {
        let frames = (0..n)
            .map(|i| Frame::filled(w, h, [i as u8, 2 * i as u8, 255 - i as u8]))
            .collect();
        VideoClip::new(frames, 10.0)
    }

    #[test]
    fn save_load_round_trip_is_bit_exact() {
        let dir = tempdir().unwrap();
        let clip = small_clip(32, 32, 24);
        let n = save_frames(&clip, dir.path()).unwrap();
        assert_eq!(n, 32);
        let back = load_frames(dir.path(), "*.png").unwrap();
        assert_eq!(back.len(), 32);
        for (a, b) in clip.frames().iter().zip(back.frames()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn load_rejects_single_frame() {
        let dir = tempdir().unwrap();
        let clip = small_clip(2, 8, 8);
        save_frames(&clip, dir.path()).unwrap();
        std::fs::remove_file(dir.path().join("frame_00001.png")).unwrap();
        match load_frames(dir.path(), "*.png") {
            Err(MediaError::TooFewFrames(1)) => {}
            other => panic!("expected TooFewFrames, got {other:?}"),
        }
    }

    #[test]
    fn load_rejects_dimension_mismatch() {
        let dir = tempdir().unwrap();
        save_frames(&small_clip(2, 8, 8), dir.path()).unwrap();
        let odd = Frame::filled(16, 8, [1, 2, 3]);
        let buf = image::RgbImage::from_raw(16, 8, odd.data().to_vec()).unwrap();
        buf.save(dir.path().join("frame_99999.png")).unwrap();
        assert!(matches!(
            load_frames(dir.path(), "*.png"),
            Err(MediaError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn load_missing_directory() {
        assert!(matches!(
            load_frames(Path::new("/nonexistent/clearly"), "*.png"),
            Err(MediaError::MissingDirectory(_))
        ));
    }

    #[test]
    fn grayscale_known_values() {
        let white = Frame::filled(2, 2, [255, 255, 255]);
        assert!(to_grayscale(&white).data().iter().all(|&v| v == 255));
        let red = Frame::filled(1, 1, [255, 0, 0]);
        assert_eq!(to_grayscale(&red).value(0, 0), 76);
        let mixed = Frame::filled(1, 1, [10, 20, 30]);
        // round(0.299*10 + 0.587*20 + 0.114*30) = round(18.15)
        assert_eq!(to_grayscale(&mixed).value(0, 0), 18);
    }

    #[test]
    fn grayscale_preserves_gray_pixels() {
        for v in 0..=255u8 {
            let f = Frame::filled(1, 1, [v, v, v]);
            assert_eq!(to_grayscale(&f).value(0, 0), v);
        }
    }

    #[test]
    fn resize_constant_stays_constant() {
        let f = Frame::filled(64, 64, [123, 45, 67]);
        let r = resize(&f, 32, 32).unwrap();
        assert_eq!(r.width(), 32);
        assert!(r.data().chunks_exact(3).all(|p| p == [123, 45, 67]));
    }

    #[test]
    fn resize_identity_is_bit_exact() {
        let f = Frame::new(3, 2, (0..18).collect());
        let r = resize(&f, 3, 2).unwrap();
        assert_eq!(f, r);
    }

    #[test]
    fn resize_upsample_is_monotone_ramp() {
        let f = GrayFrame::new(2, 1, vec![0, 255]);
        let r = resize_gray(&f, 4, 1).unwrap();
        // src_x for tx=0..4 at scale 0.5: -0.25, 0.25, 0.75, 1.25 (clamped)
        assert_eq!(r.data(), &[0, 64, 191, 255]);
        for w in r.data().windows(2) {
            assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn resize_zero_target_rejected() {
        let f = Frame::filled(4, 4, [0, 0, 0]);
        assert!(matches!(resize(&f, 0, 4), Err(MediaError::ZeroTargetDimension)));
    }

    #[test]
    fn glob_matching() {
        assert!(glob_match("*.png", "frame_0001.png"));
        assert!(glob_match("frame_????.png", "frame_0001.png"));
        assert!(!glob_match("frame_????.png", "frame_001.png"));
        assert!(!glob_match("*.png", "frame.ppm"));
        assert!(glob_match("*", "anything"));
    }
}
