use hcdyn::hybridsim::{
    build_corpus, builtin_profile, execute_hybrid, execute_hybrid_with, execute_local, reference, run_benchmark,
    ArticleCorpus, HybridOptions, Profile, QueryRequest, RoutePolicy, Topology,
};
use proptest::prelude::*;

fn topology() -> impl Strategy<Value = Topology> {
    (
        0.0..2000.0f64,
        0.0..200.0f64,
        0.0..100.0f64,
        0.0..10_000.0f64,
        1.0..1000.0f64,
        0.0..50.0f64,
        0.0..5.0f64,
    )
        .prop_map(|(cpu, io, rtt, session, channel, overhead, contention)| Topology {
            local_cpu_per_article_ms: cpu,
            local_io_per_mb_ms: io,
            cloud_request_rtt_ms: rtt,
            cloud_session_ms: session,
            channel_mbit_per_s: channel,
            service_overhead_ms: overhead,
            contention_coeff: contention,
        })
}

fn corpus() -> ArticleCorpus {
    build_corpus(2013, 400).unwrap()
}

fn test2() -> (Profile, ArticleCorpus) {
    let p = builtin_profile("test2").unwrap();
    let c = p.corpus.build().unwrap();
    (p, c)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn totals_conserve_step_durations(topo in topology(), n in 1usize..200, author in 0u32..10) {
        let corpus = corpus();
        let req = QueryRequest::new(author, n).unwrap();
        for trace in [execute_local(&topo, &corpus, &req).unwrap(), execute_hybrid(&topo, &corpus, &req).unwrap()] {
            let mut sum = 0.0;
            for article in &trace.articles {
                for &(_, ms) in &article.steps {
                    sum += ms;
                }
            }
            prop_assert_eq!(trace.total_ms, sum);
            prop_assert_eq!(trace.articles.len(), n);
        }
    }

    #[test]
    fn step_keys_follow_the_protocols(topo in topology(), n in 1usize..20) {
        let corpus = corpus();
        let req = QueryRequest::new(0, n).unwrap();
        for a in execute_local(&topo, &corpus, &req).unwrap().articles {
            prop_assert_eq!(a.steps.iter().map(|s| s.0).collect::<Vec<_>>(), vec![1, 2, 3, 4]);
        }
        for a in execute_hybrid(&topo, &corpus, &req).unwrap().articles {
            prop_assert_eq!(a.steps.iter().map(|s| s.0).collect::<Vec<_>>(), vec![1, 2, 3, 4, 5]);
        }
    }

    #[test]
    fn hybrid_without_cloud_costs_is_local(topo in topology(), n in 1usize..200) {
        let free_cloud = Topology {
            cloud_request_rtt_ms: 0.0,
            cloud_session_ms: 0.0,
            channel_mbit_per_s: f64::INFINITY,
            ..topo
        };
        let corpus = corpus();
        let req = QueryRequest::new(1, n).unwrap();
        let local = execute_local(&free_cloud, &corpus, &req).unwrap().total_ms;
        let hybrid = execute_hybrid_with(&free_cloud, &corpus, &req, HybridOptions { body_via_local: true }).unwrap().total_ms;
        prop_assert!((hybrid - local).abs() <= 1e-9 * local.max(1.0), "{hybrid} vs {local}");
    }

    #[test]
    fn totals_grow_with_every_cost(topo in topology(), which in 0usize..7, bump in 0.0..100.0f64, n in 1usize..100) {
        let mut more = topo.clone();
        match which {
            0 => more.local_cpu_per_article_ms += bump,
            1 => more.local_io_per_mb_ms += bump,
            2 => more.cloud_request_rtt_ms += bump,
            3 => more.cloud_session_ms += bump,
            // a slower channel costs more
            4 => more.channel_mbit_per_s /= 1.0 + bump,
            5 => more.service_overhead_ms += bump,
            _ => more.contention_coeff += bump,
        }
        let corpus = corpus();
        let req = QueryRequest::new(2, n).unwrap();
        let bigger = QueryRequest::new(2, n + 1).unwrap();
        for exec in [execute_local, execute_hybrid] {
            let base = exec(&topo, &corpus, &req).unwrap().total_ms;
            prop_assert!(exec(&more, &corpus, &req).unwrap().total_ms >= base);
            prop_assert!(exec(&topo, &corpus, &bigger).unwrap().total_ms >= base);
        }
    }
}

#[test]
fn benchmark_is_deterministic() {
    let (p, corpus) = test2();
    for policy in [RoutePolicy::AlwaysLocal, RoutePolicy::AlwaysHybrid] {
        let a = run_benchmark(&p.topology, &corpus, &policy, &p.batches).unwrap();
        let again = p.corpus.build().unwrap();
        let b = run_benchmark(&p.topology, &again, &policy, &p.batches).unwrap();
        let bits = |rows: &[hcdyn::hybridsim::BenchRow]| {
            rows.iter()
                .map(|r| (r.records_per_second.to_bits(), r.total_time_s.to_bits()))
                .collect::<Vec<_>>()
        };
        assert_eq!(bits(&a), bits(&b));
    }
}

#[test]
fn without_contention_totals_are_linear_in_batch() {
    let (p, corpus) = test2();
    let flat = Topology {
        contention_coeff: 0.0,
        ..p.topology
    };
    // batches are whole multiples of one author's articles, so S(N) is linear too
    for policy in [RoutePolicy::AlwaysLocal, RoutePolicy::AlwaysHybrid] {
        let rows = run_benchmark(&flat, &corpus, &policy, &p.batches).unwrap();
        let session = if policy == RoutePolicy::AlwaysHybrid {
            flat.cloud_session_ms / 1000.0
        } else {
            0.0
        };
        let per = (rows[0].total_time_s - session) / rows[0].articles_extracted as f64;
        for r in &rows {
            let want = per * r.articles_extracted as f64 + session;
            assert!(
                (r.total_time_s - want).abs() <= 1e-9 * want,
                "{} vs {want}",
                r.total_time_s
            );
        }
    }
}

#[test]
fn throughput_falls_and_overhead_shrinks_with_batch() {
    for name in ["test1", "test2"] {
        let p = builtin_profile(name).unwrap();
        let corpus = p.corpus.build().unwrap();
        let local = run_benchmark(&p.topology, &corpus, &RoutePolicy::AlwaysLocal, &p.batches).unwrap();
        let hybrid = run_benchmark(&p.topology, &corpus, &RoutePolicy::AlwaysHybrid, &p.batches).unwrap();
        for rows in [&local, &hybrid] {
            assert!(
                rows.windows(2)
                    .all(|w| w[1].records_per_second < w[0].records_per_second),
                "{name}"
            );
            assert!(rows.windows(2).all(|w| w[1].total_time_s > w[0].total_time_s), "{name}");
        }
        let overhead = |i: usize| hybrid[i].total_time_s / local[i].total_time_s - 1.0;
        assert!(overhead(0) > overhead(local.len() - 1), "{name}");
    }
}

#[test]
fn calibrated_local_totals_track_the_tables() {
    for (name, reference_s) in [
        ("test1", &reference::TEST1_LOCAL_S[..]),
        ("test2", &reference::TEST2_LOCAL_S[..]),
    ] {
        let p = builtin_profile(name).unwrap();
        let corpus = p.corpus.build().unwrap();
        let rows = run_benchmark(&p.topology, &corpus, &RoutePolicy::AlwaysLocal, &p.batches).unwrap();
        for (r, want) in rows.iter().zip(reference_s) {
            let err = (r.total_time_s - want).abs() / want;
            assert!(
                err <= 0.15,
                "{name} N={}: {} vs {want}",
                r.articles_extracted,
                r.total_time_s
            );
        }
    }
}

#[test]
fn hybrid_overhead_at_400_articles() {
    // last row of the test1 series: 669.136332 / 662.533218 = 1.00997
    let (p, corpus) = test2();
    let req = QueryRequest::new(0, 400).unwrap();
    let local = execute_local(&p.topology, &corpus, &req).unwrap().total_ms;
    let hybrid = execute_hybrid(&p.topology, &corpus, &req).unwrap().total_ms;
    assert!(hybrid / local <= 1.02, "{}", hybrid / local);
}
