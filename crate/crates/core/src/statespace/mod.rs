//! Discrete-time linear state-space models `x(t+1) = A x(t) + B u(t)`.
//!
//! State and control constraints are axis-aligned boxes. Simulation treats
//! them as saturation: a component that leaves its box is projected back
//! and the event is logged as a [`Violation`], the run continues.

mod analysis;
pub mod io;
mod response;

pub use analysis::{
    classify_stability, controllability_matrix, eigenvalues, is_controllable, is_observable, observability_matrix,
    reachable_set_bruteforce, spectral_radius, QuantizedState, ReachableSet, Stability, DEFAULT_ENUMERATION_CAP,
    RANK_TOLERANCE, REACH_RESOLUTION, STABILITY_MARGIN,
};
pub use response::{step_response, ResponseClass, DEFAULT_STEP_HORIZON, MIN_STEP_HORIZON};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_dim, Matrix, Vector};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBox", into = "RawBox")]
pub struct BoxConstraint {
    lower: Vector,
    upper: Vector,
}

#[derive(Serialize, Deserialize)]
struct RawBox {
    lower: Vector,
    upper: Vector,
}

impl TryFrom<RawBox> for BoxConstraint {
    type Error = Error;

    fn try_from(r: RawBox) -> Result<Self> {
        BoxConstraint::new(r.lower, r.upper)
    }
}

impl From<BoxConstraint> for RawBox {
    fn from(b: BoxConstraint) -> Self {
        RawBox {
            lower: b.lower,
            upper: b.upper,
        }
    }
}

/// Which side of a box a clipped component crossed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Bound {
    Lower,
    Upper,
}

impl BoxConstraint {
    pub fn new(lower: Vector, upper: Vector) -> Result<Self> {
        check_dim("box bounds", lower.dim(), upper.dim())?;
        if let Some(i) = (0..lower.dim()).find(|&i| lower[i] > upper[i]) {
            return Err(Error::invalid(
                "box constraint",
                format!("lower[{i}] = {} exceeds upper[{i}] = {}", lower[i], upper[i]),
            ));
        }
        Ok(BoxConstraint { lower, upper })
    }

    /// Symmetric box `[-r, r]` in every component.
    pub fn symmetric(dim: usize, r: f64) -> Result<Self> {
        BoxConstraint::new(Vector::new(vec![-r; dim])?, Vector::new(vec![r; dim])?)
    }

    pub fn dim(&self) -> usize {
        self.lower.dim()
    }

    pub fn lower(&self) -> &Vector {
        &self.lower
    }

    pub fn upper(&self) -> &Vector {
        &self.upper
    }

    /// Projects `v` onto the box, returning the clipped components.
    pub fn clip(&self, v: &Vector) -> (Vector, Vec<(usize, Bound)>) {
        let mut out = v.clone();
        let mut hits = Vec::new();
        for i in 0..v.dim() {
            if v[i] < self.lower[i] {
                out[i] = self.lower[i];
                hits.push((i, Bound::Lower));
            } else if v[i] > self.upper[i] {
                out[i] = self.upper[i];
                hits.push((i, Bound::Upper));
            }
        }
        (out, hits)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearModel {
    a: Matrix,
    b: Matrix,
    state_box: Option<BoxConstraint>,
    control_box: Option<BoxConstraint>,
}

impl LinearModel {
    pub fn new(a: Matrix, b: Matrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch {
                what: "A must be square",
                expected: a.rows(),
                found: a.cols(),
            });
        }
        check_dim("B rows vs state dimension", a.rows(), b.rows())?;
        Ok(LinearModel {
            a,
            b,
            state_box: None,
            control_box: None,
        })
    }

    pub fn with_state_box(mut self, bx: BoxConstraint) -> Result<Self> {
        check_dim("state box", self.states(), bx.dim())?;
        self.state_box = Some(bx);
        Ok(self)
    }

    pub fn with_control_box(mut self, bx: BoxConstraint) -> Result<Self> {
        check_dim("control box", self.controls(), bx.dim())?;
        self.control_box = Some(bx);
        Ok(self)
    }

    /// Same model with both boxes removed.
    pub fn unconstrained(&self) -> Self {
        LinearModel {
            a: self.a.clone(),
            b: self.b.clone(),
            state_box: None,
            control_box: None,
        }
    }

    pub(crate) fn with_a(&self, a: Matrix) -> Self {
        LinearModel { a, ..self.clone() }
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    pub fn state_box(&self) -> Option<&BoxConstraint> {
        self.state_box.as_ref()
    }

    pub fn control_box(&self) -> Option<&BoxConstraint> {
        self.control_box.as_ref()
    }

    /// State dimension `n`.
    pub fn states(&self) -> usize {
        self.a.rows()
    }

    /// Control dimension `m`.
    pub fn controls(&self) -> usize {
        self.b.cols()
    }
}

/// Output map `y = C x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputMap {
    c: Matrix,
}

impl OutputMap {
    pub fn new(c: Matrix) -> Self {
        OutputMap { c }
    }

    /// Full-state measurement.
    pub fn identity(n: usize) -> Self {
        OutputMap { c: Matrix::identity(n) }
    }

    pub fn c(&self) -> &Matrix {
        &self.c
    }

    pub fn outputs(&self) -> usize {
        self.c.rows()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SignalKind {
    State,
    Control,
}

/// One saturation event recorded during simulation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub t: usize,
    pub kind: SignalKind,
    pub component: usize,
    pub bound: Bound,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    states: Vec<Vector>,
    controls: Vec<Vector>,
    violations: Vec<Violation>,
}

impl Trajectory {
    /// Assembles a measured trajectory. Needs `states.len() == controls.len() + 1`
    /// and consistent dimensions throughout.
    pub fn new(states: Vec<Vector>, controls: Vec<Vector>) -> Result<Self> {
        check_dim("trajectory length", controls.len() + 1, states.len())?;
        let n = states[0].dim();
        for s in &states {
            check_dim("trajectory state", n, s.dim())?;
        }
        if let Some(m) = controls.first().map(Vector::dim) {
            for u in &controls {
                check_dim("trajectory control", m, u.dim())?;
            }
        }
        Ok(Trajectory {
            states,
            controls,
            violations: Vec::new(),
        })
    }

    pub fn states(&self) -> &[Vector] {
        &self.states
    }

    pub fn controls(&self) -> &[Vector] {
        &self.controls
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }

    /// Number of transitions `T`.
    pub fn horizon(&self) -> usize {
        self.controls.len()
    }

    pub fn state_dim(&self) -> usize {
        self.states[0].dim()
    }

    pub fn control_dim(&self) -> Option<usize> {
        self.controls.first().map(Vector::dim)
    }

    /// Time series of one state component.
    pub fn component(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[i]).collect()
    }

    /// Sub-trajectory covering states `start..=end`.
    pub fn window(&self, start: usize, end: usize) -> Result<Trajectory> {
        if start >= end || end > self.horizon() {
            return Err(Error::invalid(
                "trajectory window",
                format!("{start}..={end} outside 0..={}", self.horizon()),
            ));
        }
        Trajectory::new(self.states[start..=end].to_vec(), self.controls[start..end].to_vec())
    }

    /// Translates every state by `-offset`. Controls are untouched.
    pub fn shifted_states(&self, offset: &Vector) -> Result<Trajectory> {
        let states = self.states.iter().map(|s| s.sub(offset)).collect::<Result<Vec<_>>>()?;
        Trajectory::new(states, self.controls.clone())
    }

    /// Translates every control by `-offset`. States are untouched.
    pub fn shifted_controls(&self, offset: &Vector) -> Result<Trajectory> {
        let controls = self
            .controls
            .iter()
            .map(|u| u.sub(offset))
            .collect::<Result<Vec<_>>>()?;
        Trajectory::new(self.states.clone(), controls)
    }

    /// Per-component mean of the states.
    pub fn state_mean(&self) -> Vector {
        mean_of(&self.states, self.state_dim())
    }

    /// Per-component mean of the controls, `None` when there are none.
    pub fn control_mean(&self) -> Option<Vector> {
        Some(mean_of(&self.controls, self.control_dim()?))
    }
}

fn mean_of(vs: &[Vector], dim: usize) -> Vector {
    let count = vs.len() as f64;
    let mut mean = vec![0.0; dim];
    for v in vs {
        for (m, x) in mean.iter_mut().zip(v.iter()) {
            *m += x;
        }
    }
    Vector::from_raw(mean.into_iter().map(|m| m / count).collect())
}

/// One application of the difference equation, without any clipping.
pub fn step(model: &LinearModel, x: &Vector, u: &Vector) -> Result<Vector> {
    check_dim("state vector", model.states(), x.dim())?;
    check_dim("control vector", model.controls(), u.dim())?;
    model.a.mul_vec(x)?.add(&model.b.mul_vec(u)?)
}

/// Iterates the model over `controls`, clipping to the boxes when present.
///
/// The stored state is the clipped value; each clipped component adds one
/// violation record at the index of the state or control it belongs to.
pub fn simulate(model: &LinearModel, x0: &Vector, controls: &[Vector]) -> Result<Trajectory> {
    check_dim("initial state", model.states(), x0.dim())?;
    for u in controls {
        check_dim("control vector", model.controls(), u.dim())?;
    }
    let mut violations = Vec::new();
    let mut clip_state = |t: usize, x: Vector| match &model.state_box {
        Some(bx) => {
            let (x, hits) = bx.clip(&x);
            violations.extend(hits.into_iter().map(|(component, bound)| Violation {
                t,
                kind: SignalKind::State,
                component,
                bound,
            }));
            x
        }
        None => x,
    };
    let mut states = Vec::with_capacity(controls.len() + 1);
    states.push(clip_state(0, x0.clone()));
    let mut control_hits = Vec::new();
    let mut applied = Vec::with_capacity(controls.len());
    for (t, u) in controls.iter().enumerate() {
        let u = match &model.control_box {
            Some(bx) => {
                let (u, hits) = bx.clip(u);
                control_hits.extend(hits.into_iter().map(|(component, bound)| Violation {
                    t,
                    kind: SignalKind::Control,
                    component,
                    bound,
                }));
                u
            }
            None => u.clone(),
        };
        let next = step(model, &states[t], &u)?;
        states.push(clip_state(t + 1, next));
        applied.push(u);
    }
    violations.extend(control_hits);
    violations.sort_by_key(|v| (v.t, v.kind == SignalKind::Control, v.component));
    Ok(Trajectory {
        states,
        controls: applied,
        violations,
    })
}
