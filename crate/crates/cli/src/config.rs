//! Benchmark run configuration.
//!
//! Every key is optional; anything left out comes from the selected profile.
//!
//! ```toml
//! profile = "test1"              # shipped profile, default "test2"
//! topology = "my-topology.toml"  # paths are relative to this file
//! batches = [100, 200, 300, 400]
//! modes = ["local", "hybrid", "controlled"]
//! out = "results"
//!
//! [corpus]
//! seed = 2013
//! articles = 1000
//! authors = 10
//!
//! [controlled]                   # routing for mode "controlled" and the stream run
//! component = "cpu_load"
//! policy = { low_watermark = 0.5, high_watermark = 0.8, increment = 1.0, u_min = 0.0, u_max = 1.0 }
//!
//! [stream]                       # identification run behind summary.csv
//! periods = 400
//! max_rate = 12.0
//! period_ms = 20000.0
//! articles_per_request = 1
//! baseline_workers = 1.0
//! input = "routed_admissions"
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use hcdyn::controller::ThresholdPolicy;
use hcdyn::hybridsim::{
    builtin_profile, CorpusConfig, RoutePolicy, StateComponent, Topology, TraceInput, DEFAULT_PROFILE,
};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Local,
    Hybrid,
    Controlled,
}

impl Mode {
    pub fn file_name(self) -> &'static str {
        match self {
            Mode::Local => "local.csv",
            Mode::Hybrid => "hybrid.csv",
            Mode::Controlled => "controlled.csv",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlledSection {
    pub component: StateComponent,
    pub policy: ThresholdPolicy,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StreamSection {
    pub periods: usize,
    pub max_rate: f64,
    pub period_ms: f64,
    pub articles_per_request: usize,
    pub baseline_workers: f64,
    pub input: TraceInput,
}

impl Default for StreamSection {
    fn default() -> Self {
        StreamSection {
            periods: 400,
            max_rate: 12.0,
            period_ms: 20_000.0,
            articles_per_request: 1,
            baseline_workers: 1.0,
            input: TraceInput::RoutedAdmissions,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfigFile {
    profile: Option<String>,
    topology: Option<PathBuf>,
    corpus: Option<CorpusConfig>,
    batches: Option<Vec<usize>>,
    modes: Option<Vec<Mode>>,
    out: Option<PathBuf>,
    controlled: Option<ControlledSection>,
    stream: Option<StreamSection>,
}

/// Fully resolved benchmark run.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub profile: String,
    pub topology: Topology,
    pub corpus: CorpusConfig,
    pub batches: Vec<usize>,
    pub modes: Vec<Mode>,
    pub out: PathBuf,
    pub controlled: ControlledSection,
    pub stream: StreamSection,
    /// Seeds the stream run's article picks and admission rates.
    pub stream_seed: u64,
}

/// Command-line overrides, highest precedence.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub profile: Option<String>,
    pub seed: Option<u64>,
}

pub fn default_controlled() -> ControlledSection {
    ControlledSection {
        component: StateComponent::CpuLoad,
        policy: ThresholdPolicy::new(0.5, 0.8, 1.0, 0.0, 1.0).expect("valid default policy"),
    }
}

impl RunConfig {
    pub fn load(ov: &Overrides) -> CliResult<Self> {
        let (file, base_dir) = match &ov.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                let file: RunConfigFile = toml::from_str(&text)
                    .map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.to_string().trim_end())))?;
                let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
                (file, dir)
            }
            None => (RunConfigFile::default(), PathBuf::new()),
        };

        let profile_name = ov
            .profile
            .clone()
            .or(file.profile)
            .unwrap_or_else(|| DEFAULT_PROFILE.to_string());
        let profile = builtin_profile(&profile_name)?;

        let topology = match file.topology {
            Some(rel) => {
                let path = base_dir.join(rel);
                if !path.is_file() {
                    return Err(CliError::Config(format!(
                        "topology file {} does not exist",
                        path.display()
                    )));
                }
                let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
                Topology::from_toml(&text, &path.display().to_string())?
            }
            None => profile.topology,
        };

        let mut corpus = file.corpus.unwrap_or(profile.corpus);
        if let Some(seed) = ov.seed {
            corpus.seed = seed;
        }
        if corpus.articles == 0 || corpus.authors == 0 {
            return Err(CliError::Config(
                "corpus needs at least one article and one author".into(),
            ));
        }

        let batches = file.batches.unwrap_or(profile.batches);
        if batches.is_empty() {
            return Err(CliError::Config("batch list is empty".into()));
        }
        if batches.contains(&0) {
            return Err(CliError::Config("batch sizes must be >= 1".into()));
        }

        let modes = file.modes.unwrap_or_else(|| vec![Mode::Local, Mode::Hybrid]);
        if !(modes.contains(&Mode::Local) && modes.contains(&Mode::Hybrid)) {
            return Err(CliError::Config(
                "modes must include `local` and `hybrid` for the ratio table".into(),
            ));
        }

        let stream = file.stream.unwrap_or_default();
        if stream.periods < 4 {
            return Err(CliError::Config("stream.periods must be at least 4".into()));
        }
        if !(stream.max_rate.is_finite() && stream.max_rate > 0.0) {
            return Err(CliError::Config("stream.max_rate must be finite and > 0".into()));
        }

        let controlled = file.controlled.unwrap_or_else(default_controlled);
        controlled.policy.validate()?;

        Ok(RunConfig {
            profile: profile_name,
            topology,
            stream_seed: corpus.seed,
            corpus,
            batches,
            modes,
            out: ov
                .out
                .clone()
                .or(file.out.map(|o| base_dir.join(o)))
                .unwrap_or_else(|| PathBuf::from(".")),
            controlled,
            stream,
        })
    }

    pub fn route_policy(&self, mode: Mode) -> RoutePolicy {
        match mode {
            Mode::Local => RoutePolicy::AlwaysLocal,
            Mode::Hybrid => RoutePolicy::AlwaysHybrid,
            Mode::Controlled => RoutePolicy::Controlled {
                policy: self.controlled.policy,
                component: self.controlled.component,
            },
        }
    }
}
