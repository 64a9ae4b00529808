//! TOML forms of gains and threshold policies.
//!
//! ```toml
//! sign = "Negative"
//! k = [[0.5, 0.0]]      # m x n
//! ```
//!
//! ```toml
//! low_watermark = 0.3
//! high_watermark = 0.7
//! increment = 1.0
//! u_min = 0.0
//! u_max = 10.0
//! ```

use crate::error::{Error, Result};

use super::{GainMatrix, ThresholdPolicy};

fn parse_err(source: &str, e: impl std::fmt::Display) -> Error {
    Error::Parse {
        source_name: source.to_string(),
        message: e.to_string().trim_end().to_string(),
    }
}

pub fn parse_gain(text: &str, source: &str) -> Result<GainMatrix> {
    toml::from_str(text).map_err(|e| parse_err(source, e))
}

pub fn gain_to_toml(gain: &GainMatrix) -> String {
    toml::to_string(gain).expect("gain is serializable")
}

pub fn parse_policy(text: &str, source: &str) -> Result<ThresholdPolicy> {
    let p: ThresholdPolicy = toml::from_str(text).map_err(|e| parse_err(source, e))?;
    p.validate()?;
    Ok(p)
}

pub fn policy_to_toml(policy: &ThresholdPolicy) -> String {
    toml::to_string(policy).expect("policy is serializable")
}
