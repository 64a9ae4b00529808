//! The article retrieval protocols, executed one article at a time.
//!
//! Local route, per article:
//! 1. client asks the service for the author's articles (`service_overhead_ms`)
//! 2. service queries the database (`local_cpu_per_article_ms` plus contention)
//! 3. database returns metadata and body (`local_io_per_mb_ms * size`)
//! 4. service hands the result to the client (no extra cost)
//!
//! Hybrid route: steps 1, 2 and 4 as above, step 3 returns metadata and the
//! blob address only, and
//! 5. client fetches the body from the cloud (`cloud_request_rtt_ms` plus
//!    channel transfer, plus `cloud_session_ms` on the first cloud fetch of
//!    the query).
//!
//! Articles of one query are served back to back, so contention grows with
//! the number of articles already served in the batch.

use serde::{Deserialize, Serialize};

use super::corpus::{Article, ArticleCorpus, QueryRequest};
use super::router::{Route, Router};
use super::state::SystemState;
use super::topology::Topology;
use crate::error::Result;

/// Trailing window over which the control unit measures utilization
/// during a batch.
pub const CONTROL_WINDOW_MS: f64 = 10_000.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArticleTrace {
    pub article_id: u32,
    pub route: Route,
    /// `(protocol step, duration ms)` in execution order.
    pub steps: Vec<(u8, f64)>,
}

impl ArticleTrace {
    pub fn total_ms(&self) -> f64 {
        self.steps.iter().map(|(_, ms)| ms).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryTrace {
    pub articles: Vec<ArticleTrace>,
    pub total_ms: f64,
}

impl QueryTrace {
    fn from_articles(articles: Vec<ArticleTrace>) -> Self {
        let total_ms = sum_steps(&articles);
        QueryTrace { articles, total_ms }
    }

    /// The route shared by every article, or `None` for a mixed query.
    pub fn route(&self) -> Option<Route> {
        let first = self.articles.first()?.route;
        self.articles.iter().all(|a| a.route == first).then_some(first)
    }

    pub fn hybrid_share(&self) -> f64 {
        let h = self.articles.iter().filter(|a| a.route == Route::Hybrid).count();
        h as f64 / self.articles.len().max(1) as f64
    }
}

/// Sum of all step durations, article by article in execution order.
pub fn sum_steps(articles: &[ArticleTrace]) -> f64 {
    let mut total = 0.0;
    for a in articles {
        for (_, ms) in &a.steps {
            total += ms;
        }
    }
    total
}

/// Knobs of the hybrid protocol that exist for analysis.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct HybridOptions {
    /// Ship the body through the local tier in step 3 as the local protocol does.
    pub body_via_local: bool,
}

fn article_steps(
    topo: &Topology,
    article: &Article,
    route: Route,
    served_before: usize,
    session_due: bool,
    opts: HybridOptions,
) -> ArticleTrace {
    let overhead = topo.service_overhead_ms;
    let query = topo.local_cpu_per_article_ms + topo.contention_coeff * served_before as f64;
    let body_local = topo.local_io_per_mb_ms * article.size_mb;
    let steps = match route {
        Route::Local => vec![(1, overhead), (2, query), (3, body_local), (4, 0.0)],
        Route::Hybrid => {
            let session = if session_due { topo.cloud_session_ms } else { 0.0 };
            let fetch = session + topo.cloud_request_rtt_ms + topo.transfer_ms(article.size_mb);
            let step3 = if opts.body_via_local { body_local } else { 0.0 };
            vec![(1, overhead), (2, query), (3, step3), (4, 0.0), (5, fetch)]
        }
    };
    ArticleTrace {
        article_id: article.id,
        route,
        steps,
    }
}

/// Server and channel busy intervals seen during a batch.
#[derive(Default)]
struct Utilization {
    server: Vec<(f64, f64)>,
    channel: Vec<(f64, f64)>,
}

impl Utilization {
    fn busy(intervals: &[(f64, f64)], from: f64, to: f64) -> f64 {
        intervals
            .iter()
            .rev()
            .take_while(|(_, end)| *end > from)
            .map(|(s, e)| (e.min(to) - s.max(from)).max(0.0))
            .sum()
    }

    fn state(&self, now: f64) -> SystemState {
        if now <= 0.0 {
            return SystemState::idle(0.0);
        }
        let from = (now - CONTROL_WINDOW_MS).max(0.0);
        let span = now - from;
        SystemState::clamped(
            Self::busy(&self.server, from, now) / span,
            Self::busy(&self.channel, from, now) / span,
            1.0,
        )
    }
}

fn execute_with(
    topo: &Topology,
    corpus: &ArticleCorpus,
    request: &QueryRequest,
    opts: HybridOptions,
    mut choose: impl FnMut(&SystemState) -> Route,
) -> Result<QueryTrace> {
    topo.validate()?;
    let picked = corpus.select(request)?;
    let mut util = Utilization::default();
    let mut clock = 0.0;
    let mut session_open = false;
    let mut articles = Vec::with_capacity(picked.len());
    for (k, article) in picked.into_iter().enumerate() {
        let route = choose(&util.state(clock));
        let session_due = route == Route::Hybrid && !session_open;
        session_open |= route == Route::Hybrid;
        let trace = article_steps(topo, article, route, k, session_due, opts);

        let server_ms: f64 = trace.steps.iter().filter(|(s, _)| *s <= 3).map(|(_, ms)| ms).sum();
        util.server.push((clock, clock + server_ms));
        let end = clock + trace.total_ms();
        if route == Route::Hybrid {
            let transfer = topo.transfer_ms(article.size_mb);
            util.channel.push((end - transfer, end));
        }
        clock = end;
        articles.push(trace);
    }
    Ok(QueryTrace::from_articles(articles))
}

pub fn execute_local(topo: &Topology, corpus: &ArticleCorpus, request: &QueryRequest) -> Result<QueryTrace> {
    execute_with(topo, corpus, request, HybridOptions::default(), |_| Route::Local)
}

pub fn execute_hybrid(topo: &Topology, corpus: &ArticleCorpus, request: &QueryRequest) -> Result<QueryTrace> {
    execute_hybrid_with(topo, corpus, request, HybridOptions::default())
}

pub fn execute_hybrid_with(
    topo: &Topology,
    corpus: &ArticleCorpus,
    request: &QueryRequest,
    opts: HybridOptions,
) -> Result<QueryTrace> {
    execute_with(topo, corpus, request, opts, |_| Route::Hybrid)
}

/// Routes every article through `router`, which sees server and channel
/// utilization over the trailing [`CONTROL_WINDOW_MS`] of the batch.
pub fn execute_routed(
    topo: &Topology,
    corpus: &ArticleCorpus,
    request: &QueryRequest,
    router: &mut Router,
) -> Result<QueryTrace> {
    execute_with(topo, corpus, request, HybridOptions::default(), |s| router.route(s))
}
