//! Batch retrieval benchmark in the layout of the reference timing series.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::corpus::{ArticleCorpus, QueryRequest};
use super::protocol::{execute_hybrid, execute_local, execute_routed};
use super::router::{RoutePolicy, Router};
use super::topology::Topology;
use crate::error::{Error, Result};

/// Author whose articles every benchmark query requests.
pub const BENCH_AUTHOR: u32 = 0;

pub const BENCH_HEADER: [&str; 4] = [
    "query_index",
    "articles_extracted",
    "records_per_second",
    "total_time_s",
];
pub const RATIO_HEADER: [&str; 4] = [
    "articles_extracted",
    "local_total_time_s",
    "hybrid_total_time_s",
    "ratio",
];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    /// 1-based position in the batch ladder.
    pub query_index: usize,
    pub articles_extracted: usize,
    pub records_per_second: f64,
    pub total_time_s: f64,
}

/// Runs one query per batch size. Controlled routing starts every query
/// with a fresh router.
pub fn run_benchmark(
    topology: &Topology,
    corpus: &ArticleCorpus,
    policy: &RoutePolicy,
    batch_sizes: &[usize],
) -> Result<Vec<BenchRow>> {
    if batch_sizes.is_empty() {
        return Err(Error::invalid("batch sizes", "list is empty"));
    }
    batch_sizes
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let request = QueryRequest::new(BENCH_AUTHOR, n)?;
            let trace = match policy {
                RoutePolicy::AlwaysLocal => execute_local(topology, corpus, &request)?,
                RoutePolicy::AlwaysHybrid => execute_hybrid(topology, corpus, &request)?,
                RoutePolicy::Controlled { .. } => {
                    execute_routed(topology, corpus, &request, &mut Router::new(policy.clone()))?
                }
            };
            let total_time_s = trace.total_ms / 1000.0;
            Ok(BenchRow {
                query_index: i + 1,
                articles_extracted: n,
                records_per_second: n as f64 / total_time_s,
                total_time_s,
            })
        })
        .collect()
}

pub fn write_bench_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BENCH_HEADER)?;
    for r in rows {
        w.write_record([
            r.query_index.to_string(),
            r.articles_extracted.to_string(),
            r.records_per_second.to_string(),
            r.total_time_s.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub articles_extracted: usize,
    pub local_total_time_s: f64,
    pub hybrid_total_time_s: f64,
    /// hybrid / local
    pub ratio: f64,
}

/// Pairs local and hybrid rows with equal batch size, in local order.
pub fn ratio_rows(local: &[BenchRow], hybrid: &[BenchRow]) -> Vec<RatioRow> {
    local
        .iter()
        .filter_map(|l| {
            let h = hybrid.iter().find(|h| h.articles_extracted == l.articles_extracted)?;
            Some(RatioRow {
                articles_extracted: l.articles_extracted,
                local_total_time_s: l.total_time_s,
                hybrid_total_time_s: h.total_time_s,
                ratio: h.total_time_s / l.total_time_s,
            })
        })
        .collect()
}

pub fn write_ratio_csv<W: Write>(rows: &[RatioRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RATIO_HEADER)?;
    for r in rows {
        w.write_record([
            r.articles_extracted.to_string(),
            r.local_total_time_s.to_string(),
            r.hybrid_total_time_s.to_string(),
            r.ratio.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hybridsim::corpus::build_corpus;

    fn topo() -> Topology {
        Topology {
            local_cpu_per_article_ms: 500.0,
            local_io_per_mb_ms: 80.0,
            cloud_request_rtt_ms: 2.0,
            cloud_session_ms: 3000.0,
            channel_mbit_per_s: 100.0,
            service_overhead_ms: 10.0,
            contention_coeff: 2.0,
        }
    }

    #[test]
    fn rows_are_consistent() {
        let corpus = build_corpus(2013, 300).unwrap();
        // no size term, so throughput depends on contention alone
        let flat = Topology {
            local_io_per_mb_ms: 0.0,
            ..topo()
        };
        let rows = run_benchmark(&flat, &corpus, &RoutePolicy::AlwaysLocal, &[10, 20, 40]).unwrap();
        assert_eq!(rows.len(), 3);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.query_index, i + 1);
            let rps = r.articles_extracted as f64 / r.total_time_s;
            assert!((r.records_per_second - rps).abs() <= 1e-6 * rps);
        }
        assert!(rows.windows(2).all(|w| w[1].total_time_s > w[0].total_time_s));
        assert!(rows
            .windows(2)
            .all(|w| w[1].records_per_second < w[0].records_per_second));
    }

    #[test]
    fn empty_ladder_is_an_error() {
        let corpus = build_corpus(1, 10).unwrap();
        assert!(run_benchmark(&topo(), &corpus, &RoutePolicy::AlwaysLocal, &[]).is_err());
        assert!(run_benchmark(&topo(), &corpus, &RoutePolicy::AlwaysLocal, &[0]).is_err());
    }

    #[test]
    fn ratio_matches_batches() {
        let corpus = build_corpus(7, 100).unwrap();
        let local = run_benchmark(&topo(), &corpus, &RoutePolicy::AlwaysLocal, &[5, 10]).unwrap();
        let hybrid = run_benchmark(&topo(), &corpus, &RoutePolicy::AlwaysHybrid, &[10, 20]).unwrap();
        let ratio = ratio_rows(&local, &hybrid);
        assert_eq!(ratio.len(), 1);
        assert_eq!(ratio[0].articles_extracted, 10);
        assert_eq!(ratio[0].ratio, hybrid[0].total_time_s / local[1].total_time_s);
    }

    #[test]
    fn csv_layout() {
        let rows = [BenchRow {
            query_index: 1,
            articles_extracted: 100,
            records_per_second: 0.5,
            total_time_s: 200.0,
        }];
        let mut buf = Vec::new();
        write_bench_csv(&rows, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "query_index,articles_extracted,records_per_second,total_time_s\n1,100,0.5,200\n"
        );
    }
}
