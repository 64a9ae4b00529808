//! Named calibration profiles shipped with the crate.
//!
//! A profile file holds the corpus recipe, the batch ladder and the fitted
//! topology:
//!
//! ```toml
//! name = "test2"
//! batches = [100, 200, 300]
//!
//! [corpus]
//! seed = 2013
//! articles = 1000
//! authors = 10
//!
//! [topology]
//! local_cpu_per_article_ms = 1500.0
//! # ... every Topology field
//! ```

use serde::{Deserialize, Serialize};

use super::corpus::CorpusConfig;
use super::topology::Topology;
use crate::error::{Error, Result};

const TEST1_TOML: &str = include_str!("../../profiles/test1.toml");
const TEST2_TOML: &str = include_str!("../../profiles/test2.toml");

pub const PROFILE_NAMES: [&str; 2] = ["test1", "test2"];
pub const DEFAULT_PROFILE: &str = "test2";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Profile {
    pub name: String,
    pub batches: Vec<usize>,
    pub corpus: CorpusConfig,
    pub topology: Topology,
}

impl Profile {
    pub fn from_toml(text: &str, source: &str) -> Result<Self> {
        let p: Profile = toml::from_str(text).map_err(|e| Error::Parse {
            source_name: source.to_string(),
            message: e.to_string().trim_end().to_string(),
        })?;
        p.validate()?;
        Ok(p)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("profile is serializable")
    }

    pub fn validate(&self) -> Result<()> {
        if self.batches.is_empty() {
            return Err(Error::invalid("profile", "`batches` is empty"));
        }
        if self.batches.contains(&0) {
            return Err(Error::invalid("profile", "`batches` entries must be >= 1"));
        }
        self.topology.validate()
    }
}

/// Looks up a shipped profile by name.
pub fn builtin_profile(name: &str) -> Result<Profile> {
    let text = match name {
        "test1" => TEST1_TOML,
        "test2" => TEST2_TOML,
        other => {
            return Err(Error::invalid(
                "profile",
                format!(
                    "unknown profile `{other}`, expected one of {}",
                    PROFILE_NAMES.join(", ")
                ),
            ))
        }
    };
    Profile::from_toml(text, &format!("profiles/{name}.toml"))
}
