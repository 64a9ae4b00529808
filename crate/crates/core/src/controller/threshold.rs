use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Watermark-band increment control.
///
/// A measurement above `high_watermark` raises the control by `increment`,
/// one below `low_watermark` lowers it, anything in between holds it. The
/// result saturates at `[u_min, u_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdPolicy {
    pub low_watermark: f64,
    pub high_watermark: f64,
    pub increment: f64,
    pub u_min: f64,
    pub u_max: f64,
}

impl ThresholdPolicy {
    pub fn new(low_watermark: f64, high_watermark: f64, increment: f64, u_min: f64, u_max: f64) -> Result<Self> {
        let p = ThresholdPolicy {
            low_watermark,
            high_watermark,
            increment,
            u_min,
            u_max,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            self.low_watermark,
            self.high_watermark,
            self.increment,
            self.u_min,
            self.u_max,
        ];
        if let Some(index) = fields.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "threshold policy",
                index,
            });
        }
        if self.low_watermark >= self.high_watermark {
            return Err(Error::invalid(
                "threshold policy",
                "low_watermark must be below high_watermark",
            ));
        }
        if self.u_min > self.u_max {
            return Err(Error::invalid("threshold policy", "u_min exceeds u_max"));
        }
        if self.increment <= 0.0 {
            return Err(Error::invalid("threshold policy", "increment must be positive"));
        }
        Ok(())
    }
}

pub fn threshold_step(policy: &ThresholdPolicy, u_prev: f64, measurement: f64) -> Result<f64> {
    policy.validate()?;
    if !(policy.u_min..=policy.u_max).contains(&u_prev) {
        return Err(Error::invalid(
            "threshold step",
            format!("previous control {u_prev} outside [{}, {}]", policy.u_min, policy.u_max),
        ));
    }
    let u = if measurement > policy.high_watermark {
        u_prev + policy.increment
    } else if measurement < policy.low_watermark {
        u_prev - policy.increment
    } else {
        u_prev
    };
    Ok(u.clamp(policy.u_min, policy.u_max))
}
