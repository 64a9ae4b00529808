use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cost parameters of the two-tier system. All times in milliseconds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Topology {
    /// Database server work per article, metadata included.
    pub local_cpu_per_article_ms: f64,
    /// Reading and returning an article body from the local tier.
    pub local_io_per_mb_ms: f64,
    /// Per-blob request latency of the cloud store.
    pub cloud_request_rtt_ms: f64,
    /// One-time cost of opening the blob client, paid by the first cloud
    /// fetch of each query.
    #[serde(default)]
    pub cloud_session_ms: f64,
    /// Client link bandwidth used for cloud body transfers.
    pub channel_mbit_per_s: f64,
    pub service_overhead_ms: f64,
    /// Extra milliseconds per article already served in the same batch.
    pub contention_coeff: f64,
}

impl Topology {
    /// Every cost zero and an unlimited channel.
    pub fn zero() -> Self {
        Topology {
            local_cpu_per_article_ms: 0.0,
            local_io_per_mb_ms: 0.0,
            cloud_request_rtt_ms: 0.0,
            cloud_session_ms: 0.0,
            channel_mbit_per_s: f64::INFINITY,
            service_overhead_ms: 0.0,
            contention_coeff: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let costs = [
            ("local_cpu_per_article_ms", self.local_cpu_per_article_ms),
            ("local_io_per_mb_ms", self.local_io_per_mb_ms),
            ("cloud_request_rtt_ms", self.cloud_request_rtt_ms),
            ("cloud_session_ms", self.cloud_session_ms),
            ("service_overhead_ms", self.service_overhead_ms),
            ("contention_coeff", self.contention_coeff),
        ];
        for (name, v) in costs {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::invalid(
                    "topology",
                    format!("`{name}` must be finite and >= 0, got {v}"),
                ));
            }
        }
        if self.channel_mbit_per_s.is_nan() || self.channel_mbit_per_s <= 0.0 {
            return Err(Error::invalid(
                "topology",
                format!("`channel_mbit_per_s` must be > 0, got {}", self.channel_mbit_per_s),
            ));
        }
        Ok(())
    }

    /// Time to move `size_mb` over the channel.
    pub fn transfer_ms(&self, size_mb: f64) -> f64 {
        size_mb * 8.0 / self.channel_mbit_per_s * 1000.0
    }

    pub fn from_toml(text: &str, source: &str) -> Result<Self> {
        let t: Topology = toml::from_str(text).map_err(|e| Error::Parse {
            source_name: source.to_string(),
            message: e.to_string().trim_end().to_string(),
        })?;
        t.validate()?;
        Ok(t)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("topology is serializable")
    }
}
