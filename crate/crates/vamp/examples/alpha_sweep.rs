//! Sensitivity of the final score to the appearance/motion balance:
//! sub-scores are computed once, then recombined for each alpha.
//! The sweep is affine — alpha 0 gives pure motion, alpha 1 pure
//! appearance.

use vamp::pipeline::{run_score, sweep_csv, SamplerConfig};
use vamp::regions::TrackerParams;
use vamp::scoring::ScoreConfig;
use vamp::synthetic::{moving_square_clip, SyntheticParams};

fn main() {
    let clip = moving_square_clip(&SyntheticParams::default());
    let report = run_score(
        &clip,
        "synthetic",
        None,
        &SamplerConfig::default(),
        &TrackerParams::default(),
        &ScoreConfig::sift_default(),
    )
    .expect("scoring succeeds");
    println!(
        "VAMP-A = {:.6}, VAMP-M = {:.6}",
        report.breakdown.vamp_a, report.breakdown.vamp_m
    );
    let alphas = [0.0, 0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875, 1.0];
    print!("{}", sweep_csv(&report.breakdown, &alphas).expect("alphas in range"));
}
