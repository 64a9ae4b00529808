use serde::{Deserialize, Serialize};

use super::state::{StateComponent, SystemState};
use crate::controller::ThresholdPolicy;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Route {
    Local,
    Hybrid,
}

impl std::fmt::Display for Route {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Route::Local => "local",
            Route::Hybrid => "hybrid",
        })
    }
}

/// Where the control unit sends article-body retrieval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RoutePolicy {
    AlwaysLocal,
    AlwaysHybrid,
    /// Offload to the cloud above the high watermark, come back below the
    /// low one, hold the previous decision in between.
    Controlled {
        policy: ThresholdPolicy,
        component: StateComponent,
    },
}

/// Pure routing rule. `previous` is `None` before the first decision.
pub fn route(policy: &RoutePolicy, state: &SystemState, previous: Option<Route>) -> Route {
    match policy {
        RoutePolicy::AlwaysLocal => Route::Local,
        RoutePolicy::AlwaysHybrid => Route::Hybrid,
        RoutePolicy::Controlled { policy, component } => {
            let v = state.component(*component);
            if v > policy.high_watermark {
                Route::Hybrid
            } else if v < policy.low_watermark {
                Route::Local
            } else {
                previous.unwrap_or(Route::Local)
            }
        }
    }
}

/// [`route`] with the previous decision remembered.
#[derive(Clone, Debug)]
pub struct Router {
    policy: RoutePolicy,
    last: Option<Route>,
}

impl Router {
    pub fn new(policy: RoutePolicy) -> Self {
        Router { policy, last: None }
    }

    pub fn policy(&self) -> &RoutePolicy {
        &self.policy
    }

    pub fn route(&mut self, state: &SystemState) -> Route {
        let r = route(&self.policy, state, self.last);
        self.last = Some(r);
        r
    }
}
