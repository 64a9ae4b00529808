//! Discrete-event simulation of a continuous stream of queries.
//!
//! Time advances in control periods. During each period queries arrive at
//! the admission rate chosen for that period, the control unit routes each
//! one from the state measured at the end of the previous period, and the
//! period closes with a fresh [`SystemState`] measurement.
//!
//! Resources:
//! * the database server, a FIFO single server doing steps 1 to 3;
//! * the cloud store, a pure delay (session plus request round trips);
//! * the client channel, a FIFO single server carrying cloud bodies.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::corpus::ArticleCorpus;
use super::router::{Route, RoutePolicy, Router};
use super::state::{state_vector, SystemState};
use super::topology::Topology;
use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::statespace::Trajectory;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StreamConfig {
    /// Length of one control period.
    pub period_ms: f64,
    pub articles_per_request: usize,
    pub baseline_workers: f64,
    /// Seeds the choice of articles per request.
    pub seed: u64,
}

impl Default for StreamConfig {
    fn default() -> Self {
        StreamConfig {
            period_ms: 20_000.0,
            articles_per_request: 1,
            baseline_workers: 1.0,
            seed: 1,
        }
    }
}

impl StreamConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.period_ms.is_finite() && self.period_ms > 0.0) {
            return Err(Error::invalid("stream config", "period_ms must be finite and > 0"));
        }
        if self.articles_per_request == 0 {
            return Err(Error::invalid("stream config", "articles_per_request must be >= 1"));
        }
        if !(self.baseline_workers.is_finite() && self.baseline_workers >= 0.0) {
            return Err(Error::invalid(
                "stream config",
                "baseline_workers must be finite and >= 0",
            ));
        }
        Ok(())
    }
}

/// What [`StreamSim::run_trace_with`] records as the control `u(t)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceInput {
    /// `u = (admission rate)`.
    #[default]
    AdmissionRate,
    /// `u = (requests routed local, requests routed hybrid)` in the period.
    /// Keeps the state linear in `u` when the control unit switches routes.
    RoutedAdmissions,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Resource {
    Server,
    Channel,
}

/// Append-only record of everything that changes utilization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum LogEntry {
    Arrival {
        time: f64,
        request: usize,
        route: Route,
    },
    Busy {
        resource: Resource,
        start: f64,
        end: f64,
        request: usize,
    },
    Departure {
        time: f64,
        request: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum EventKind {
    Arrival(usize),
    ServerDone(usize),
    CloudDone(usize),
    ChannelDone(usize),
}

#[derive(Clone, Copy, Debug)]
struct Event {
    time: f64,
    seq: u64,
    kind: EventKind,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time.total_cmp(&other.time).then(self.seq.cmp(&other.seq))
    }
}

struct Request {
    route: Route,
    articles: Vec<usize>,
}

pub struct StreamSim {
    topology: Topology,
    corpus: ArticleCorpus,
    config: StreamConfig,
    router: Router,
    rng: ChaCha8Rng,

    clock: f64,
    seq: u64,
    events: BinaryHeap<Reverse<Event>>,
    requests: Vec<Request>,
    server_queue: VecDeque<usize>,
    server_busy: bool,
    channel_queue: VecDeque<usize>,
    channel_busy: bool,
    in_system: usize,
    arrival_credit: f64,
    period_routes: [usize; 2],

    // integrals over the current period
    last_advance: f64,
    acc_server: f64,
    acc_channel: f64,
    acc_in_system: f64,

    observed: SystemState,
    log: Vec<LogEntry>,
}

impl StreamSim {
    pub fn new(topology: Topology, corpus: ArticleCorpus, config: StreamConfig, policy: RoutePolicy) -> Result<Self> {
        topology.validate()?;
        config.validate()?;
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        let observed = SystemState::idle(config.baseline_workers);
        Ok(StreamSim {
            topology,
            corpus,
            config,
            router: Router::new(policy),
            rng,
            clock: 0.0,
            seq: 0,
            events: BinaryHeap::new(),
            requests: Vec::new(),
            server_queue: VecDeque::new(),
            server_busy: false,
            channel_queue: VecDeque::new(),
            channel_busy: false,
            in_system: 0,
            arrival_credit: 0.0,
            period_routes: [0, 0],
            last_advance: 0.0,
            acc_server: 0.0,
            acc_channel: 0.0,
            acc_in_system: 0.0,
            observed,
            log: Vec::new(),
        })
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn config(&self) -> &StreamConfig {
        &self.config
    }

    /// State measured over the last completed period.
    pub fn observe_state(&self) -> SystemState {
        self.observed
    }

    pub fn event_log(&self) -> &[LogEntry] {
        &self.log
    }

    pub fn in_system(&self) -> usize {
        self.in_system
    }

    /// Requests routed `(local, hybrid)` during the last completed period.
    pub fn period_routes(&self) -> (usize, usize) {
        (self.period_routes[0], self.period_routes[1])
    }

    /// Runs one control period with `admission_rate` arrivals per period
    /// and returns the state measured at its end.
    ///
    /// Fractional rates carry over: the arrival count is the integer part
    /// of the accumulated credit. Arrivals are spread evenly in the period.
    pub fn run_period(&mut self, admission_rate: f64) -> Result<SystemState> {
        if !(admission_rate.is_finite() && admission_rate >= 0.0) {
            return Err(Error::invalid(
                "admission rate",
                format!("{admission_rate} is not a finite rate >= 0"),
            ));
        }
        let start = self.clock;
        let period = self.config.period_ms;
        self.period_routes = [0, 0];
        let end = start + period;

        self.arrival_credit += admission_rate;
        let count = self.arrival_credit.floor();
        self.arrival_credit -= count;
        let count = count as usize;
        for k in 0..count {
            let t = start + (k as f64 + 0.5) * period / count as f64;
            let id = self.requests.len();
            let articles = (0..self.config.articles_per_request)
                .map(|_| self.rng.random_range(0..self.corpus.len()))
                .collect();
            self.requests.push(Request {
                route: Route::Local,
                articles,
            });
            self.schedule(t, EventKind::Arrival(id));
        }

        while let Some(Reverse(ev)) = self.events.peek().copied() {
            if ev.time >= end {
                break;
            }
            self.events.pop();
            self.advance(ev.time);
            self.handle(ev);
        }
        self.advance(end);
        self.clock = end;
        self.observed = SystemState::clamped(
            self.acc_server / period,
            self.acc_channel / period,
            self.config.baseline_workers + self.acc_in_system / period,
        );
        self.acc_server = 0.0;
        self.acc_channel = 0.0;
        self.acc_in_system = 0.0;
        Ok(self.observed)
    }

    /// Runs one period per admission rate and records the state trajectory,
    /// `x(t) = (cpu_load, channel_load, active_workers)`, `u(t) = (rate)`.
    pub fn run_trace(&mut self, admission: &[f64]) -> Result<Trajectory> {
        self.run_trace_with(admission, TraceInput::AdmissionRate)
    }

    pub fn run_trace_with(&mut self, admission: &[f64], input: TraceInput) -> Result<Trajectory> {
        let mut states = vec![state_vector(&self.observed)];
        let mut controls = Vec::with_capacity(admission.len());
        for &rate in admission {
            let s = self.run_period(rate)?;
            states.push(state_vector(&s));
            let u = match input {
                TraceInput::AdmissionRate => vec![rate],
                TraceInput::RoutedAdmissions => {
                    let (l, h) = self.period_routes();
                    vec![l as f64, h as f64]
                }
            };
            controls.push(Vector::new(u)?);
        }
        Trajectory::new(states, controls)
    }

    fn schedule(&mut self, time: f64, kind: EventKind) {
        self.seq += 1;
        self.events.push(Reverse(Event {
            time,
            seq: self.seq,
            kind,
        }));
    }

    fn advance(&mut self, t: f64) {
        let dt = t - self.last_advance;
        if self.server_busy {
            self.acc_server += dt;
        }
        if self.channel_busy {
            self.acc_channel += dt;
        }
        self.acc_in_system += dt * self.in_system as f64;
        self.last_advance = t;
    }

    fn handle(&mut self, ev: Event) {
        let now = ev.time;
        match ev.kind {
            EventKind::Arrival(id) => {
                let route = self.router.route(&self.observed);
                self.requests[id].route = route;
                self.period_routes[route as usize] += 1;
                self.in_system += 1;
                self.log.push(LogEntry::Arrival {
                    time: now,
                    request: id,
                    route,
                });
                self.server_queue.push_back(id);
                self.start_server(now);
            }
            EventKind::ServerDone(id) => {
                self.server_busy = false;
                match self.requests[id].route {
                    Route::Local => self.depart(now, id),
                    Route::Hybrid => {
                        let n = self.requests[id].articles.len() as f64;
                        let delay = self.topology.cloud_session_ms + self.topology.cloud_request_rtt_ms * n;
                        self.schedule(now + delay, EventKind::CloudDone(id));
                    }
                }
                self.start_server(now);
            }
            EventKind::CloudDone(id) => {
                self.channel_queue.push_back(id);
                self.start_channel(now);
            }
            EventKind::ChannelDone(id) => {
                self.channel_busy = false;
                self.depart(now, id);
                self.start_channel(now);
            }
        }
    }

    fn depart(&mut self, now: f64, id: usize) {
        self.in_system -= 1;
        self.log.push(LogEntry::Departure { time: now, request: id });
    }

    fn start_server(&mut self, now: f64) {
        if self.server_busy {
            return;
        }
        let Some(id) = self.server_queue.pop_front() else {
            return;
        };
        let waiting: usize = self.server_queue.iter().map(|&r| self.requests[r].articles.len()).sum();
        let topo = &self.topology;
        let req = &self.requests[id];
        let duration: f64 = req
            .articles
            .iter()
            .map(|&a| {
                let size = self.corpus.articles()[a].size_mb;
                let body = match req.route {
                    Route::Local => topo.local_io_per_mb_ms * size,
                    Route::Hybrid => 0.0,
                };
                topo.service_overhead_ms + topo.local_cpu_per_article_ms + topo.contention_coeff * waiting as f64 + body
            })
            .sum();
        self.server_busy = true;
        self.log.push(LogEntry::Busy {
            resource: Resource::Server,
            start: now,
            end: now + duration,
            request: id,
        });
        self.schedule(now + duration, EventKind::ServerDone(id));
    }

    fn start_channel(&mut self, now: f64) {
        if self.channel_busy {
            return;
        }
        let Some(id) = self.channel_queue.pop_front() else {
            return;
        };
        let duration: f64 = self.requests[id]
            .articles
            .iter()
            .map(|&a| self.topology.transfer_ms(self.corpus.articles()[a].size_mb))
            .sum();
        self.channel_busy = true;
        self.log.push(LogEntry::Busy {
            resource: Resource::Channel,
            start: now,
            end: now + duration,
            request: id,
        });
        self.schedule(now + duration, EventKind::ChannelDone(id));
    }
}

/// Recomputes the state of the window `[from, to]` from an event log.
pub fn replay_state(log: &[LogEntry], from: f64, to: f64, baseline_workers: f64) -> SystemState {
    let span = to - from;
    let overlap = |s: f64, e: f64| (e.min(to) - s.max(from)).max(0.0);
    let mut server = 0.0;
    let mut channel = 0.0;
    let mut arrivals = std::collections::BTreeMap::new();
    let mut departures = std::collections::BTreeMap::new();
    for entry in log {
        match *entry {
            LogEntry::Busy {
                resource, start, end, ..
            } => match resource {
                Resource::Server => server += overlap(start, end),
                Resource::Channel => channel += overlap(start, end),
            },
            LogEntry::Arrival { time, request, .. } => {
                arrivals.insert(request, time);
            }
            LogEntry::Departure { time, request } => {
                departures.insert(request, time);
            }
        }
    }
    let in_system: f64 = arrivals
        .iter()
        .map(|(r, &a)| overlap(a, departures.get(r).copied().unwrap_or(f64::INFINITY)))
        .sum();
    SystemState::clamped(server / span, channel / span, baseline_workers + in_system / span)
}
