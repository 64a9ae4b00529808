use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal;
use crate::statespace::Trajectory;

pub const MIN_OSCILLATION_SAMPLES: usize = 8;

const DIVERGENCE_FACTOR: f64 = 1e6;

/// Last-third envelope must shrink below this fraction of the first-third
/// envelope for an oscillation to count as decaying.
const DECAY_RATIO: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Oscillation {
    None,
    Decaying,
    Sustained,
    Divergent,
}

impl std::fmt::Display for Oscillation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Oscillation::None => "None",
            Oscillation::Decaying => "Decaying",
            Oscillation::Sustained => "Sustained",
            Oscillation::Divergent => "Divergent",
        };
        f.write_str(s)
    }
}

/// Classifies the oscillatory behavior of one state component.
pub fn detect_oscillation(traj: &Trajectory, component: usize) -> Result<Oscillation> {
    if component >= traj.state_dim() {
        return Err(Error::invalid(
            "oscillation component",
            format!("index {component} out of range for {} states", traj.state_dim()),
        ));
    }
    let series = traj.component(component);
    classify_series(&series)
}

pub(crate) fn classify_series(series: &[f64]) -> Result<Oscillation> {
    let len = series.len();
    if len < MIN_OSCILLATION_SAMPLES {
        return Err(Error::TrajectoryTooShort {
            len,
            min: MIN_OSCILLATION_SAMPLES,
        });
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Ok(Oscillation::Divergent);
    }
    let quarter = len / 4;
    let initial = series[..quarter.max(1)].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if initial > 0.0 && series.iter().any(|v| v.abs() > DIVERGENCE_FACTOR * initial) {
        return Ok(Oscillation::Divergent);
    }
    if signal::sign_changes(&series[quarter..]) < 2 {
        return Ok(Oscillation::None);
    }
    let third = len / 3;
    let last = &series[len - third..];
    let center = last.iter().sum::<f64>() / third as f64;
    let first_env = signal::envelope(&series[..third], center);
    let last_env = signal::envelope(last, center);
    Ok(if last_env < DECAY_RATIO * first_env {
        Oscillation::Decaying
    } else {
        Oscillation::Sustained
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{Matrix, Vector};
    use crate::statespace::{simulate, LinearModel};
    use std::f64::consts::PI;

    #[test]
    fn constant_is_none() {
        assert_eq!(classify_series(&[3.0; 20]).unwrap(), Oscillation::None);
    }

    #[test]
    fn damped_cosine_decays() {
        let s: Vec<f64> = (0..64).map(|t| 0.9f64.powi(t) * (PI * t as f64 / 4.0).cos()).collect();
        assert_eq!(classify_series(&s).unwrap(), Oscillation::Decaying);
    }

    #[test]
    fn pure_cosine_is_sustained() {
        let s: Vec<f64> = (0..64).map(|t| (PI * t as f64 / 4.0).cos()).collect();
        assert_eq!(classify_series(&s).unwrap(), Oscillation::Sustained);
    }

    #[test]
    fn alternating_growth_diverges() {
        let model = LinearModel::new(Matrix::diag(&[-1.1]), Matrix::zeros(1, 1)).unwrap();
        let u = vec![Vector::zeros(1); 199];
        let traj = simulate(&model, &Vector::new(vec![1.0]).unwrap(), &u).unwrap();
        assert_eq!(detect_oscillation(&traj, 0).unwrap(), Oscillation::Divergent);
    }

    #[test]
    fn short_trajectory_is_rejected() {
        assert!(matches!(
            classify_series(&[1.0; 7]),
            Err(Error::TrajectoryTooShort { len: 7, min: 8 })
        ));
    }
}
