//! Feedback control around [`LinearModel`]s.
//!
//! Loop closure follows the sign convention `A + BK` for positive feedback
//! and `A - BK` for negative feedback, so the same gain matrix can be wired
//! either way.

pub mod io;
mod oscillation;
mod threshold;

pub use oscillation::{detect_oscillation, Oscillation, MIN_OSCILLATION_SAMPLES};
pub use threshold::{threshold_step, ThresholdPolicy};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_dim, Matrix};
use crate::statespace::{spectral_radius, LinearModel};

/// Largest `n * m` accepted by [`stabilizing_gain_search`].
pub const MAX_SEARCH_ENTRIES: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FeedbackSign {
    Positive,
    Negative,
}

/// State feedback `u = +/- K x` with `K` of shape `m x n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GainMatrix {
    pub k: Matrix,
    pub sign: FeedbackSign,
}

impl GainMatrix {
    pub fn new(k: Matrix, sign: FeedbackSign) -> Self {
        GainMatrix { k, sign }
    }

    pub fn zero(model: &LinearModel, sign: FeedbackSign) -> Self {
        GainMatrix {
            k: Matrix::zeros(model.controls(), model.states()),
            sign,
        }
    }
}

/// Closed-loop model with `A_cl = A + BK` (positive) or `A - BK` (negative).
/// `B` and both boxes are carried over unchanged.
pub fn close_loop(model: &LinearModel, gain: &GainMatrix) -> Result<LinearModel> {
    check_dim("gain rows vs controls", model.controls(), gain.k.rows())?;
    check_dim("gain cols vs states", model.states(), gain.k.cols())?;
    let bk = model.b().mul(&gain.k)?;
    let a_cl = match gain.sign {
        FeedbackSign::Positive => model.a().add(&bk)?,
        FeedbackSign::Negative => model.a().sub(&bk)?,
    };
    Ok(model.with_a(a_cl))
}

/// Candidate values tried independently for every entry of `K`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GainGrid {
    pub values: Vec<f64>,
}

impl GainGrid {
    pub fn new(values: Vec<f64>) -> Self {
        GainGrid { values }
    }

    /// `count` evenly spaced values from `lo` to `hi` inclusive.
    pub fn linspace(lo: f64, hi: f64, count: usize) -> Self {
        let values = match count {
            0 => Vec::new(),
            1 => vec![lo],
            _ => (0..count)
                .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
                .collect(),
        };
        GainGrid { values }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GainSearch {
    /// Grid point with the smallest closed-loop spectral radius.
    pub best: GainMatrix,
    pub spectral_radius: f64,
    pub evaluated: usize,
}

impl GainSearch {
    /// The best gain, if it makes the loop asymptotically stable.
    pub fn stabilizing_gain(&self) -> Option<&GainMatrix> {
        (self.spectral_radius < 1.0 - crate::statespace::STABILITY_MARGIN).then_some(&self.best)
    }
}

/// Exhaustive search over negative-feedback gains on a grid.
///
/// Every entry of `K` ranges over `grid.values`; ties in spectral radius
/// keep the first candidate in odometer order (last entry varies fastest).
pub fn stabilizing_gain_search(model: &LinearModel, grid: &GainGrid) -> Result<GainSearch> {
    if grid.values.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if let Some(i) = grid.values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: "gain grid",
            index: i,
        });
    }
    let (n, m) = (model.states(), model.controls());
    let entries = n * m;
    if entries > MAX_SEARCH_ENTRIES {
        return Err(Error::invalid(
            "gain search",
            format!("n*m = {entries} exceeds the limit of {MAX_SEARCH_ENTRIES}"),
        ));
    }
    let g = grid.values.len();
    let mut idx = vec![0usize; entries];
    let mut best: Option<(GainMatrix, f64)> = None;
    let mut evaluated = 0;
    loop {
        let k = Matrix::from_fn(m, n, |i, j| grid.values[idx[i * n + j]]);
        let gain = GainMatrix::new(k, FeedbackSign::Negative);
        let rho = spectral_radius(close_loop(model, &gain)?.a())?;
        evaluated += 1;
        if best.as_ref().is_none_or(|(_, r)| rho < *r) {
            best = Some((gain, rho));
        }
        // odometer increment
        let mut pos = entries;
        loop {
            if pos == 0 {
                let (best, spectral_radius) = best.expect("at least one candidate evaluated");
                return Ok(GainSearch {
                    best,
                    spectral_radius,
                    evaluated,
                });
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < g {
                break;
            }
            idx[pos] = 0;
        }
    }
}
