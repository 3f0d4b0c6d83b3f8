//! First-frame seeding, step by step: difference-of-Gaussians keypoints
//! on the synthetic frame, DBSCAN clustering, and the resulting seed
//! regions.

use vamp::media::to_grayscale;
use vamp::pipeline::{seed_regions, SamplerConfig};
use vamp::sampling::{cluster_centroids, dbscan, detect_keypoints, DetectorParams, Point2D};
use vamp::synthetic::{moving_square_clip, SyntheticParams};

fn main() {
    let params = SyntheticParams::default();
    let clip = moving_square_clip(&params);
    let gray = to_grayscale(clip.frame(0));

    let keypoints = detect_keypoints(&gray, &DetectorParams::default()).expect("frame large enough");
    println!("{} keypoints (strongest first):", keypoints.len());
    for k in keypoints.iter().take(8) {
        println!(
            "  ({:6.1}, {:6.1})  scale {:4.2}  response {:.4}",
            k.location.x, k.location.y, k.scale, k.response
        );
    }

    let points: Vec<Point2D> = keypoints.iter().map(|k| k.location).collect();
    let eps = 0.05 * clip.diagonal();
    let result = dbscan(&points, eps, 4).expect("eps > 0");
    let centroids = cluster_centroids(&points, &result);
    println!(
        "dbscan (eps {:.1}, min_pts 4): {} cluster(s), {} noise point(s)",
        eps,
        result.clusters.len(),
        result.noise.len()
    );
    for (members, c) in result.clusters.iter().zip(&centroids) {
        println!("  {} members, centroid ({:.1}, {:.1})", members.len(), c.x, c.y);
    }

    let regions = seed_regions(&clip, &SamplerConfig::default()).expect("sampling succeeds");
    let truth = params.mask(0).unwrap();
    println!("seed regions (ground-truth square is ({},{})-({},{})):", truth.x0, truth.y0, truth.x1, truth.y1);
    for r in &regions {
        println!("  ({}, {})-({}, {})", r.x0, r.y0, r.x1, r.y1);
    }
}
