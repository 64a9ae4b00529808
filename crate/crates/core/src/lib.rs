//! Hybrid cloud database simulation and discrete-time linear systems toolkit.
//!
//! * [`statespace`]: `x(t+1) = A x(t) + B u(t)` models, simulation under box
//!   constraints, stability, controllability, observability and step responses.
//! * [`controller`]: feedback loop closure, gain search, watermark-band control
//!   and oscillation detection.
//! * [`hybridsim`]: discrete-event model of a local relational tier, a cloud
//!   blob tier and the control unit routing between them.
//! * [`sysid`]: least-squares identification of `(A, B)` from trajectories.

pub mod controller;
pub mod error;
pub mod hybridsim;
pub mod linalg;
mod signal;
pub mod statespace;
pub mod sysid;

pub use error::{Error, Result};
pub use linalg::{Matrix, Vector};
