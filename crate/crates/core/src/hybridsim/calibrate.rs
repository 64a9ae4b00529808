//! Least-squares fit of topology constants to a reference timing series.
//!
//! The local total for a batch of `N` articles with total size `S(N)` is
//!
//! ```text
//! T_L(N) = N (overhead + cpu) + io S(N) + contention N (N - 1) / 2
//! ```
//!
//! and with the channel transfer rate equal to `io`, the hybrid total is
//! `T_H(N) = T_L(N) + session + rtt N`. Overhead and cpu enter only as a
//! sum, and io is confounded with the per-article term whenever sizes are
//! near their mean, so the fit pins channel, io and overhead and estimates
//! the rest:
//!
//! 1. `(cpu, contention)` from the local totals, relative residuals;
//! 2. `(session, rtt)` from the hybrid minus local differences.
//!
//! Both fits clamp at zero and refit the other parameter when a clamp binds.

use super::bench::BENCH_AUTHOR;
use super::corpus::{ArticleCorpus, QueryRequest};
use super::reference::ReferenceSeries;
use super::topology::Topology;
use crate::error::{Error, Result};

pub const PINNED_CHANNEL_MBIT_PER_S: f64 = 100.0;
pub const PINNED_SERVICE_OVERHEAD_MS: f64 = 10.0;

/// Local read cost matching the pinned channel, so a body costs the same
/// time on either path.
pub fn pinned_local_io_per_mb_ms() -> f64 {
    8.0 * 1000.0 / PINNED_CHANNEL_MBIT_PER_S
}

#[derive(Clone, Debug, PartialEq)]
pub struct Calibration {
    pub topology: Topology,
    /// `(model - reference) / reference` per local row.
    pub local_relative_residuals: Vec<f64>,
    /// `model - reference` of the hybrid minus local difference, ms.
    pub difference_residuals_ms: Vec<f64>,
}

impl Calibration {
    pub fn max_local_residual(&self) -> f64 {
        self.local_relative_residuals.iter().fold(0.0, |m, r| m.max(r.abs()))
    }
}

/// Solves the weighted 2-parameter problem `y ~ p x + q z`, clamping both
/// parameters to be nonnegative.
fn nonneg_ls2(x: &[f64], z: &[f64], y: &[f64], w: &[f64]) -> (f64, f64) {
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).zip(w).map(|((a, b), w)| w * a * b).sum::<f64>();
    let (sxx, sxz, szz) = (dot(x, x), dot(x, z), dot(z, z));
    let (sxy, szy) = (dot(x, y), dot(z, y));
    let det = sxx * szz - sxz * sxz;
    if det.abs() > 1e-12 * sxx * szz {
        let p = (szz * sxy - sxz * szy) / det;
        let q = (sxx * szy - sxz * sxy) / det;
        if p >= 0.0 && q >= 0.0 {
            return (p, q);
        }
    }
    // best single-parameter fits on the boundary
    let only_p = if sxx > 0.0 { (sxy / sxx).max(0.0) } else { 0.0 };
    let only_q = if szz > 0.0 { (szy / szz).max(0.0) } else { 0.0 };
    let cost = |p: f64, q: f64| {
        x.iter()
            .zip(z)
            .zip(y)
            .zip(w)
            .map(|(((x, z), y), w)| w * (p * x + q * z - y).powi(2))
            .sum::<f64>()
    };
    if cost(only_p, 0.0) <= cost(0.0, only_q) {
        (only_p, 0.0)
    } else {
        (0.0, only_q)
    }
}

fn batch_size_mb(corpus: &ArticleCorpus, n: usize) -> Result<f64> {
    let picked = corpus.select(&QueryRequest::new(BENCH_AUTHOR, n)?)?;
    Ok(picked.iter().map(|a| a.size_mb).sum())
}

pub fn calibrate(series: &ReferenceSeries, corpus: &ArticleCorpus) -> Result<Calibration> {
    let rows = series.batches.len();
    if rows < 2 || series.local_s.len() != rows || series.hybrid_s.len() != rows {
        return Err(Error::invalid("reference series", "needs at least two complete rows"));
    }
    let io = pinned_local_io_per_mb_ms();
    let n: Vec<f64> = series.batches.iter().map(|&b| b as f64).collect();
    let sizes = series
        .batches
        .iter()
        .map(|&b| batch_size_mb(corpus, b))
        .collect::<Result<Vec<_>>>()?;
    let local_ms: Vec<f64> = series.local_s.iter().map(|s| s * 1000.0).collect();

    let pairs: Vec<f64> = n.iter().map(|n| n * (n - 1.0) / 2.0).collect();
    let y: Vec<f64> = local_ms.iter().zip(&sizes).map(|(t, s)| t - io * s).collect();
    let w: Vec<f64> = local_ms.iter().map(|t| 1.0 / (t * t)).collect();
    let (per_article, contention) = nonneg_ls2(&n, &pairs, &y, &w);

    let diff_ms: Vec<f64> = series
        .hybrid_s
        .iter()
        .zip(series.local_s)
        .map(|(h, l)| (h - l) * 1000.0)
        .collect();
    let ones = vec![1.0; rows];
    let (session, rtt) = nonneg_ls2(&ones, &n, &diff_ms, &ones);

    let topology = Topology {
        local_cpu_per_article_ms: (per_article - PINNED_SERVICE_OVERHEAD_MS).max(0.0),
        local_io_per_mb_ms: io,
        cloud_request_rtt_ms: rtt,
        cloud_session_ms: session,
        channel_mbit_per_s: PINNED_CHANNEL_MBIT_PER_S,
        service_overhead_ms: PINNED_SERVICE_OVERHEAD_MS,
        contention_coeff: contention,
    };
    let local_relative_residuals = (0..rows)
        .map(|i| {
            let model = n[i] * (topology.service_overhead_ms + topology.local_cpu_per_article_ms)
                + io * sizes[i]
                + contention * pairs[i];
            (model - local_ms[i]) / local_ms[i]
        })
        .collect();
    let difference_residuals_ms = (0..rows).map(|i| session + rtt * n[i] - diff_ms[i]).collect();
    Ok(Calibration {
        topology,
        local_relative_residuals,
        difference_residuals_ms,
    })
}
