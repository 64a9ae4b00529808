//! Discrete-event model of a two-tier article store.
//!
//! A client asks a service for an author's articles. Metadata always comes
//! from the local relational tier; article bodies come either from the local
//! tier or from a cloud blob store over a bandwidth-limited channel, as the
//! control unit decides.
//!
//! * [`execute_local`] / [`execute_hybrid`] / [`execute_routed`]: one query,
//!   article by article, with a per-step timing trace.
//! * [`run_benchmark`]: one query per batch size, in the layout of the
//!   reference timing series.
//! * [`StreamSim`]: a continuous stream of queries against FIFO server and
//!   channel queues, measured once per control period as a [`SystemState`].

mod bench;
pub mod calibrate;
mod corpus;
mod profiles;
mod protocol;
pub mod reference;
mod router;
mod state;
mod stream;
mod topology;

pub use bench::{
    ratio_rows, run_benchmark, write_bench_csv, write_ratio_csv, BenchRow, RatioRow, BENCH_AUTHOR, BENCH_HEADER,
    RATIO_HEADER,
};
pub use calibrate::{calibrate, Calibration};
pub use corpus::{
    build_corpus, build_corpus_with_authors, Article, ArticleCorpus, CorpusConfig, QueryRequest, DEFAULT_AUTHORS,
    MAX_ARTICLE_MB, MAX_COAUTHORS, MIN_ARTICLE_MB,
};
pub use profiles::{builtin_profile, Profile, DEFAULT_PROFILE, PROFILE_NAMES};
pub use protocol::{
    execute_hybrid, execute_hybrid_with, execute_local, execute_routed, sum_steps, ArticleTrace, HybridOptions,
    QueryTrace, CONTROL_WINDOW_MS,
};
pub use router::{route, Route, RoutePolicy, Router};
pub use state::{state_vector, StateComponent, SystemState, STATE_DIM};
pub use stream::{replay_state, LogEntry, Resource, StreamConfig, StreamSim, TraceInput};
pub use topology::Topology;
