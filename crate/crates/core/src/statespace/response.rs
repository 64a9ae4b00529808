use serde::{Deserialize, Serialize};

use super::{simulate, LinearModel, Trajectory};
use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::signal;

pub const MIN_STEP_HORIZON: usize = 8;

/// Horizon used by the CLI when none is given.
pub const DEFAULT_STEP_HORIZON: usize = 64;

/// Growth factor over the input gain beyond which a response is divergent.
const DIVERGENCE_FACTOR: f64 = 1e6;

/// Terminal amplitude, relative to the peak deviation, that counts as settled.
const SETTLING_BAND: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ResponseClass {
    MonotoneConvergent,
    OscillatoryConvergent,
    OscillatorySustained,
    Divergent,
}

impl std::fmt::Display for ResponseClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ResponseClass::MonotoneConvergent => "MonotoneConvergent",
            ResponseClass::OscillatoryConvergent => "OscillatoryConvergent",
            ResponseClass::OscillatorySustained => "OscillatorySustained",
            ResponseClass::Divergent => "Divergent",
        };
        f.write_str(s)
    }
}

/// Response to a unit step on control `channel`, starting from rest.
///
/// Classification looks at the state component with the largest excursion:
/// * divergent once `|x|` passes `1e6` times the norm of the input column;
/// * oscillatory when its increments change sign at least twice after the
///   first quarter of the horizon, monotone otherwise;
/// * convergent when the last 10% of samples stay within 1% of the peak
///   deviation from their mean. A monotone response that has not settled
///   counts as convergent only while its increments are still shrinking.
pub fn step_response(model: &LinearModel, channel: usize, horizon: usize) -> Result<(Trajectory, ResponseClass)> {
    if horizon < MIN_STEP_HORIZON {
        return Err(Error::HorizonTooShort {
            horizon,
            min: MIN_STEP_HORIZON,
        });
    }
    let m = model.controls();
    if channel >= m {
        return Err(Error::invalid(
            "step channel",
            format!("control index {channel} out of range for {m} controls"),
        ));
    }
    let mut unit = vec![0.0; m];
    unit[channel] = 1.0;
    let controls = vec![Vector::from_raw(unit); horizon];
    let x0 = Vector::zeros(model.states());
    let traj = simulate(model, &x0, &controls)?;
    let class = classify(model, channel, &traj);
    Ok((traj, class))
}

fn classify(model: &LinearModel, channel: usize, traj: &Trajectory) -> ResponseClass {
    let gain = model.b().column(channel).norm();
    let limit = DIVERGENCE_FACTOR * if gain > 0.0 { gain } else { 1.0 };
    if traj.states().iter().any(|x| !x.is_finite() || x.norm() > limit) {
        return ResponseClass::Divergent;
    }

    let dominant = (0..traj.state_dim())
        .map(|i| {
            let peak = traj.states().iter().fold(0.0f64, |p, x| p.max(x[i].abs()));
            (i, peak)
        })
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map_or(0, |(i, _)| i);
    let series = traj.component(dominant);

    let settle = series.len() / 4;
    let oscillating = signal::sign_changes(&series[settle..]) >= 2;

    let tail = signal::tail_len(series.len(), 0.1);
    let (terminal, peak) = signal::terminal_amplitude(&series, tail);
    let settled = peak == 0.0 || terminal < SETTLING_BAND * peak;

    match (oscillating, settled) {
        (true, true) => ResponseClass::OscillatoryConvergent,
        (true, false) => ResponseClass::OscillatorySustained,
        (false, true) => ResponseClass::MonotoneConvergent,
        (false, false) => {
            let tail_series = &series[series.len() - tail - 1..];
            let first = (tail_series[1] - tail_series[0]).abs();
            let last = (tail_series[tail_series.len() - 1] - tail_series[tail_series.len() - 2]).abs();
            if last < first {
                ResponseClass::MonotoneConvergent
            } else {
                ResponseClass::Divergent
            }
        }
    }
}
