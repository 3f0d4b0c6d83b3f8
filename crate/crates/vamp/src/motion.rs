//! Velocity and acceleration consistency of an object's centroid
//! trajectory, and their weighted motion score.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sampling::Point2D;

#[derive(Debug, Error)]
pub enum MotionError {
    #[error("trajectory too short: need {need} centroids, got {got}")]
    TooShort { need: usize, got: usize },
    #[error("empty input series")]
    Empty,
    #[error("motion weights must be >= 0 and sum to 1")]
    InvalidWeights,
}

/// Speeds in raw pixels per step, or divided by the frame diagonal so
/// exp(-Var(a)) stays meaningful at high resolutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    RawPixels,
    #[default]
    FrameDiagonal,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub centroids: Vec<Point2D>,
    pub normalization: Normalization,
    /// Frame diagonal in pixels; only consulted in FrameDiagonal mode.
    pub diagonal: f64,
}

impl Trajectory {
    pub fn new(centroids: Vec<Point2D>, normalization: Normalization, diagonal: f64) -> Self {
        Trajectory {
            centroids,
            normalization,
            diagonal,
        }
    }
}

/// Per-step speeds ||c_{t+1} - c_t||, length n - 1.
pub fn velocities(traj: &Trajectory) -> Result<Vec<f64>, MotionError> {
    if traj.centroids.len() < 2 {
        return Err(MotionError::TooShort {
            need: 2,
            got: traj.centroids.len(),
        });
    }
    let scale = match traj.normalization {
        Normalization::RawPixels => 1.0,
        Normalization::FrameDiagonal => traj.diagonal,
    };
    Ok(traj
        .centroids
        .windows(2)
        .map(|w| w[0].distance(&w[1]) / scale)
        .collect())
}

fn population_mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// exp(-std(v) / mean(v)) with population statistics. A static object
/// (mean speed below 1e-9) is maximally consistent and scores 1.
pub fn velocity_consistency(v: &[f64]) -> Result<f64, MotionError> {
    if v.is_empty() {
        return Err(MotionError::Empty);
    }
    let (mean, std) = population_mean_std(v);
    if mean < 1e-9 {
        return Ok(1.0);
    }
    Ok((-std / mean).exp())
}

/// Successive velocity differences, length n - 1.
pub fn accelerations(v: &[f64]) -> Result<Vec<f64>, MotionError> {
    if v.len() < 2 {
        return Err(MotionError::TooShort {
            need: 2,
            got: v.len(),
        });
    }
    Ok(v.windows(2).map(|w| w[1] - w[0]).collect())
}

/// exp(-Var(a)) with population variance, in the trajectory's
/// normalization units.
pub fn acceleration_consistency(a: &[f64]) -> Result<f64, MotionError> {
    if a.is_empty() {
        return Err(MotionError::Empty);
    }
    let (_, std) = population_mean_std(a);
    Ok((-std * std).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionWeights {
    pub w_vel: f64,
    pub w_acc: f64,
}

impl MotionWeights {
    pub fn new(w_vel: f64, w_acc: f64) -> Result<Self, MotionError> {
        let w = MotionWeights { w_vel, w_acc };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<(), MotionError> {
        if self.w_vel >= 0.0 && self.w_acc >= 0.0 && (self.w_vel + self.w_acc - 1.0).abs() <= 1e-9 {
            Ok(())
        } else {
            Err(MotionError::InvalidWeights)
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MotionScore {
    pub s_vel: f64,
    pub s_acc: f64,
    pub score: f64,
    /// Set for length-2 trajectories, where S_acc defaults to 1 because
    /// no acceleration evidence exists.
    pub partial: bool,
}

/// w_vel * S_vel + w_acc * S_acc over the whole trajectory.
pub fn motion_score(traj: &Trajectory, w: &MotionWeights) -> Result<MotionScore, MotionError> {
    w.validate()?;
    let v = velocities(traj)?;
    let s_vel = velocity_consistency(&v)?;
    let (s_acc, partial) = if v.len() >= 2 {
        (acceleration_consistency(&accelerations(&v)?)?, false)
    } else {
        (1.0, true)
    };
    Ok(MotionScore {
        s_vel,
        s_acc,
        score: w.w_vel * s_vel + w.w_acc * s_acc,
        partial,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw_traj(points: &[(f64, f64)]) -> Trajectory {
        Trajectory::new(
            points.iter().map(|&(x, y)| Point2D::new(x, y)).collect(),
            Normalization::RawPixels,
            400.0,
        )
    }

    #[test]
    fn velocities_three_four_five() {
        let v = velocities(&raw_traj(&[(0.0, 0.0), (3.0, 4.0), (6.0, 8.0)])).unwrap();
        assert_eq!(v, vec![5.0, 5.0]);
    }

    #[test]
    fn velocities_static_object() {
        let v = velocities(&raw_traj(&[(2.0, 2.0); 5])).unwrap();
        assert_eq!(v, vec![0.0; 4]);
    }

    #[test]
    fn velocities_uneven_steps() {
        let v = velocities(&raw_traj(&[(0.0, 0.0), (1.0, 0.0), (3.0, 0.0)])).unwrap();
        assert_eq!(v, vec![1.0, 2.0]);
    }

    #[test]
    fn velocities_diagonal_normalization() {
        let mut t = raw_traj(&[(0.0, 0.0), (3.0, 4.0)]);
        t.normalization = Normalization::FrameDiagonal;
        t.diagonal = 10.0;
        assert_eq!(velocities(&t).unwrap(), vec![0.5]);
    }

    #[test]
    fn velocities_too_short() {
        assert!(matches!(
            velocities(&raw_traj(&[(0.0, 0.0)])),
            Err(MotionError::TooShort { need: 2, got: 1 })
        ));
    }

    #[test]
    fn velocity_consistency_cases() {
        assert_eq!(velocity_consistency(&[5.0, 5.0, 5.0]).unwrap(), 1.0);
        assert_eq!(velocity_consistency(&[0.0, 0.0, 0.0]).unwrap(), 1.0);
        let s = velocity_consistency(&[1.0, 3.0]).unwrap();
        assert!((s - (-0.5f64).exp()).abs() < 1e-12); // std 1, mean 2
        assert!(matches!(velocity_consistency(&[]), Err(MotionError::Empty)));
    }

    #[test]
    fn accelerations_cases() {
        assert_eq!(accelerations(&[5.0, 5.0, 5.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(accelerations(&[1.0, 2.0, 4.0]).unwrap(), vec![1.0, 2.0]);
        assert_eq!(accelerations(&[3.0, 1.0]).unwrap(), vec![-2.0]);
        assert!(matches!(
            accelerations(&[1.0]),
            Err(MotionError::TooShort { .. })
        ));
    }

    #[test]
    fn acceleration_consistency_cases() {
        assert_eq!(acceleration_consistency(&[0.0, 0.0]).unwrap(), 1.0);
        let s = acceleration_consistency(&[1.0, -1.0]).unwrap();
        assert!((s - (-1.0f64).exp()).abs() < 1e-12); // Var = 1
        assert_eq!(acceleration_consistency(&[7.5]).unwrap(), 1.0);
    }

    #[test]
    fn motion_score_uniform_linear_motion() {
        let traj = raw_traj(&[(0.0, 0.0), (2.0, 0.0), (4.0, 0.0), (6.0, 0.0)]);
        let w = MotionWeights::new(0.5, 0.5).unwrap();
        let m = motion_score(&traj, &w).unwrap();
        assert_eq!(m.score, 1.0);
        assert!(!m.partial);
    }

    #[test]
    fn motion_score_velocity_only() {
        let traj = raw_traj(&[(0.0, 0.0), (1.0, 0.0), (4.0, 0.0)]);
        let w = MotionWeights::new(1.0, 0.0).unwrap();
        let m = motion_score(&traj, &w).unwrap();
        assert!((m.score - (-0.5f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn motion_score_weighted_mix() {
        let w = MotionWeights::new(0.5, 0.5).unwrap();
        let combined = w.w_vel * 1.0 + w.w_acc * (-1.0f64).exp();
        assert!((combined - 0.6839397205857212).abs() < 1e-9);
    }

    #[test]
    fn motion_score_length_two_is_partial() {
        let traj = raw_traj(&[(0.0, 0.0), (5.0, 0.0)]);
        let w = MotionWeights::new(0.5, 0.5).unwrap();
        let m = motion_score(&traj, &w).unwrap();
        assert!(m.partial);
        assert_eq!(m.s_acc, 1.0);
    }

    #[test]
    fn s_vel_scale_invariance_exact() {
        // axis-aligned integer steps (speeds 1,3,1,3) keep every
        // intermediate value exact: var = k^2, mean = 2k, ratio k/2k
        let base = [(0.0, 0.0), (1.0, 0.0), (4.0, 0.0), (5.0, 0.0), (8.0, 0.0)];
        let v0 = velocities(&raw_traj(&base)).unwrap();
        let s0 = velocity_consistency(&v0).unwrap();
        for k in [0.5, 2.0, 10.0] {
            let scaled: Vec<(f64, f64)> = base.iter().map(|&(x, y)| (k * x, k * y)).collect();
            let v = velocities(&raw_traj(&scaled)).unwrap();
            let s = velocity_consistency(&v).unwrap();
            assert_eq!(s, s0, "k = {k}");
        }
    }

    #[test]
    fn var_a_invariant_under_reversal() {
        let v = velocities(&raw_traj(&[(0.0, 0.0), (1.0, 2.0), (3.0, 3.0), (7.0, 1.0)])).unwrap();
        let a_fwd = accelerations(&v).unwrap();
        let mut v_rev = v.clone();
        v_rev.reverse();
        let a_rev = accelerations(&v_rev).unwrap();
        assert_eq!(
            acceleration_consistency(&a_fwd).unwrap(),
            acceleration_consistency(&a_rev).unwrap()
        );
    }

    #[test]
    fn consistency_scores_in_unit_interval() {
        for v in [&[0.1, 9.0, 2.5][..], &[100.0, 0.0, 50.0], &[1e-3, 1e3]] {
            let s = velocity_consistency(v).unwrap();
            assert!(s > 0.0 && s <= 1.0);
            let a = accelerations(v).unwrap();
            let sa = acceleration_consistency(&a).unwrap();
            // exp(-Var) may underflow to exactly 0 for wild inputs
            assert!((0.0..=1.0).contains(&sa));
        }
    }
}
