//! Score with externally supplied segmentation instead of the built-in
//! tracker: write per-frame label maps (8-bit gray, pixel value = object
//! id) plus a JSON manifest, ingest them, and score the clip.

use std::fs;

use vamp::media::save_frames;
use vamp::regions::load_masks;
use vamp::scoring::{score_clip, ScoreConfig};
use vamp::synthetic::{moving_square_clip, SyntheticParams};

fn main() {
    let params = SyntheticParams::default();
    let clip = moving_square_clip(&params);

    let dir = std::env::temp_dir().join("vamp_external_masks_demo");
    fs::create_dir_all(&dir).expect("temp dir");
    save_frames(&clip, &dir.join("frames")).expect("frames written");

    // label maps straight from the ground truth: value 1 on the square
    let mut manifest_frames = Vec::new();
    for t in 0..clip.len() {
        let mask = params.mask(t).expect("square stays in frame");
        let mut label = image::GrayImage::new(clip.width(), clip.height());
        for y in mask.y0..=mask.y1 {
            for x in mask.x0..=mask.x1 {
                label.put_pixel(x, y, image::Luma([1u8]));
            }
        }
        let name = format!("label_{t:05}.png");
        label.save(dir.join(&name)).expect("label map written");
        manifest_frames.push(serde_json::json!({"index": t, "labelmap": name}));
    }
    let manifest_path = dir.join("masks.json");
    fs::write(
        &manifest_path,
        serde_json::to_string_pretty(&serde_json::json!({"frames": manifest_frames})).unwrap(),
    )
    .expect("manifest written");

    let tracks = load_masks(&manifest_path, clip.len(), (clip.width(), clip.height()))
        .expect("manifest loads");
    println!("loaded {} track(s) from {}", tracks.len(), manifest_path.display());
    for t in &tracks {
        println!(
            "  object {} (label {}): frames {}..={}",
            t.object_id,
            t.source_label,
            t.start_frame,
            t.end_frame()
        );
    }

    let b = score_clip(&clip, &tracks, &ScoreConfig::sift_default()).expect("scoring succeeds");
    println!(
        "VAMP-A {:.6}  VAMP-M {:.6}  VAMP {:.6}",
        b.vamp_a, b.vamp_m, b.vamp
    );
}
