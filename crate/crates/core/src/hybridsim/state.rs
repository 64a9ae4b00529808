use serde::{Deserialize, Serialize};

use crate::linalg::Vector;

/// Resource utilization seen by the control unit. This is the state vector
/// handed to the identification and control tooling.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemState {
    /// Busy fraction of the database server, in `[0, 1]`.
    pub cpu_load: f64,
    /// Busy fraction of the client channel, in `[0, 1]`.
    pub channel_load: f64,
    /// Baseline plus the mean number of queries in flight.
    pub active_workers: f64,
}

impl SystemState {
    pub fn idle(baseline_workers: f64) -> Self {
        SystemState {
            cpu_load: 0.0,
            channel_load: 0.0,
            active_workers: baseline_workers,
        }
    }

    /// Builds a state, clamping loads to `[0, 1]` and workers to `>= 0`.
    pub fn clamped(cpu_load: f64, channel_load: f64, active_workers: f64) -> Self {
        SystemState {
            cpu_load: cpu_load.clamp(0.0, 1.0),
            channel_load: channel_load.clamp(0.0, 1.0),
            active_workers: active_workers.max(0.0),
        }
    }

    pub fn component(&self, c: StateComponent) -> f64 {
        match c {
            StateComponent::CpuLoad => self.cpu_load,
            StateComponent::ChannelLoad => self.channel_load,
            StateComponent::ActiveWorkers => self.active_workers,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateComponent {
    CpuLoad,
    ChannelLoad,
    ActiveWorkers,
}

impl StateComponent {
    pub fn index(self) -> usize {
        match self {
            StateComponent::CpuLoad => 0,
            StateComponent::ChannelLoad => 1,
            StateComponent::ActiveWorkers => 2,
        }
    }
}

pub const STATE_DIM: usize = 3;

/// Packs `(cpu_load, channel_load, active_workers)`.
pub fn state_vector(state: &SystemState) -> Vector {
    Vector::from_raw(vec![state.cpu_load, state.channel_load, state.active_workers])
}
