//! Scalar time-series helpers shared by the transient classifiers.

/// Increments smaller than this fraction of the series' peak magnitude are
/// treated as flat and do not participate in sign-change counting.
const FLAT_TOLERANCE: f64 = 1e-12;

/// Number of sign reversals among the non-negligible increments of `series`.
pub(crate) fn sign_changes(series: &[f64]) -> usize {
    let scale = series.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = FLAT_TOLERANCE * scale;
    let mut last_sign = 0.0;
    let mut changes = 0;
    for w in series.windows(2) {
        let d = w[1] - w[0];
        if d.abs() <= tol {
            continue;
        }
        let s = d.signum();
        if last_sign != 0.0 && s != last_sign {
            changes += 1;
        }
        last_sign = s;
    }
    changes
}

/// `ceil(frac * len)`, at least one sample.
pub(crate) fn tail_len(len: usize, frac: f64) -> usize {
    ((len as f64 * frac).ceil() as usize).clamp(1, len.max(1))
}

/// Largest deviation from the tail mean, over the tail and over the whole series.
pub(crate) fn terminal_amplitude(series: &[f64], tail: usize) -> (f64, f64) {
    let tail_part = &series[series.len() - tail..];
    let center = tail_part.iter().sum::<f64>() / tail as f64;
    let dev = |xs: &[f64]| xs.iter().fold(0.0f64, |m, v| m.max((v - center).abs()));
    (dev(tail_part), dev(series))
}

/// Largest deviation from `center` over `xs`.
pub(crate) fn envelope(xs: &[f64], center: f64) -> f64 {
    xs.iter().fold(0.0f64, |m, v| m.max((v - center).abs()))
}
