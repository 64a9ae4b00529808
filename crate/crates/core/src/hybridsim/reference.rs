//! Measured batch timings that the shipped profiles are calibrated against,
//! total seconds per batch.
//!
//! The throughput recorded alongside these timings equals 100 divided by the
//! total time for every row, so only totals are kept here and throughput is
//! recomputed as articles / total.

pub const TEST1_BATCHES: [usize; 4] = [100, 200, 300, 400];

pub const TEST1_LOCAL_S: [f64; 4] = [110.1231453, 297.6383233, 474.969978, 662.533218];

pub const TEST1_HYBRID_S: [f64; 4] = [121.0354227, 303.2433013, 480.2488007, 669.136332];

pub const TEST2_BATCHES: [usize; 10] = [100, 200, 300, 400, 500, 600, 700, 800, 900, 1000];

pub const TEST2_LOCAL_S: [f64; 10] = [
    170.2648023,
    383.3185936,
    585.8428519,
    799.76944,
    1056.250566,
    1347.565385,
    1619.206815,
    1913.022702,
    2224.643836,
    2559.199781,
];

pub const TEST2_HYBRID_S: [f64; 10] = [
    177.0691164,
    388.6920493,
    590.4366272,
    805.6650491,
    1062.042418,
    1353.779514,
    1625.511459,
    1919.462269,
    2231.100424,
    2565.93466,
];

/// One measured series: batch sizes with local and hybrid totals.
#[derive(Clone, Copy, Debug)]
pub struct ReferenceSeries {
    pub name: &'static str,
    pub batches: &'static [usize],
    pub local_s: &'static [f64],
    pub hybrid_s: &'static [f64],
}

pub const TEST1: ReferenceSeries = ReferenceSeries {
    name: "test1",
    batches: &TEST1_BATCHES,
    local_s: &TEST1_LOCAL_S,
    hybrid_s: &TEST1_HYBRID_S,
};

pub const TEST2: ReferenceSeries = ReferenceSeries {
    name: "test2",
    batches: &TEST2_BATCHES,
    local_s: &TEST2_LOCAL_S,
    hybrid_s: &TEST2_HYBRID_S,
};

pub fn reference_series(name: &str) -> Option<ReferenceSeries> {
    [TEST1, TEST2].into_iter().find(|s| s.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recorded_throughput_is_100_over_total() {
        // first and last recorded throughput of each series
        let printed = [
            (TEST1_LOCAL_S[0], 0.908074),
            (TEST1_LOCAL_S[3], 0.150936),
            (TEST1_HYBRID_S[0], 0.826204),
            (TEST2_HYBRID_S[9], 0.038972),
            (TEST2_LOCAL_S[0], 0.58732),
            (TEST2_LOCAL_S[9], 0.039075),
        ];
        for (total, rps) in printed {
            assert!((100.0 / total - rps).abs() < 5e-6, "{total} {rps}");
        }
    }

    #[test]
    fn overhead_shrinks_with_batch_size() {
        for s in [TEST1, TEST2] {
            let first = s.hybrid_s[0] / s.local_s[0] - 1.0;
            let last = s.hybrid_s[s.batches.len() - 1] / s.local_s[s.batches.len() - 1] - 1.0;
            assert!(first > last);
        }
    }
}
