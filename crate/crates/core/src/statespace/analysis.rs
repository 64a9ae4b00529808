use std::collections::BTreeSet;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{step, LinearModel, OutputMap};
use crate::error::{Error, Result};
use crate::linalg::{check_dim, Matrix, Vector};

/// Pivot threshold for Kalman rank tests, relative to the largest entry.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Half-width of the band around `rho = 1` classified as marginal.
pub const STABILITY_MARGIN: f64 = 1e-9;

/// Maximum number of control paths [`reachable_set_bruteforce`] will enumerate.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1_000_000;

/// Grid spacing used to quantize reached states for set membership.
pub const REACH_RESOLUTION: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stability {
    Stable,
    Marginal,
    Unstable,
}

impl std::fmt::Display for Stability {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Stability::Stable => "Stable",
            Stability::Marginal => "Marginal",
            Stability::Unstable => "Unstable",
        };
        f.write_str(s)
    }
}

pub fn eigenvalues(a: &Matrix) -> Result<Vec<Complex64>> {
    a.eigenvalues()
}

pub fn spectral_radius(a: &Matrix) -> Result<f64> {
    Ok(a.eigenvalues()?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

pub fn classify_stability(a: &Matrix) -> Result<Stability> {
    let rho = spectral_radius(a)?;
    Ok(if rho < 1.0 - STABILITY_MARGIN {
        Stability::Stable
    } else if rho > 1.0 + STABILITY_MARGIN {
        Stability::Unstable
    } else {
        Stability::Marginal
    })
}

/// `[B | AB | ... | A^(n-1) B]`, an `n x n*m` matrix.
pub fn controllability_matrix(model: &LinearModel) -> Matrix {
    let n = model.states();
    let mut block = model.b().clone();
    let mut out = block.clone();
    for _ in 1..n {
        block = model.a().mul(&block).expect("A is n x n and block has n rows");
        out = out.hstack(&block).expect("row counts agree");
    }
    out
}

pub fn is_controllable(model: &LinearModel) -> bool {
    controllability_matrix(model).rank(RANK_TOLERANCE) == model.states()
}

/// `[C; CA; ... ; C A^(n-1)]`, an `n*p x n` matrix.
pub fn observability_matrix(model: &LinearModel, out: &OutputMap) -> Result<Matrix> {
    check_dim("output map columns", model.states(), out.c().cols())?;
    let mut block = out.c().clone();
    let mut stacked = block.clone();
    for _ in 1..model.states() {
        block = block.mul(model.a())?;
        stacked = stacked.vstack(&block)?;
    }
    Ok(stacked)
}

pub fn is_observable(model: &LinearModel, out: &OutputMap) -> Result<bool> {
    Ok(observability_matrix(model, out)?.rank(RANK_TOLERANCE) == model.states())
}

/// A state rounded onto a grid of spacing [`REACH_RESOLUTION`].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QuantizedState(pub Vec<i64>);

impl QuantizedState {
    pub fn from_vector(v: &Vector, resolution: f64) -> Self {
        QuantizedState(v.iter().map(|x| (x / resolution).round() as i64).collect())
    }

    pub fn to_vector(&self, resolution: f64) -> Vector {
        Vector::from_raw(self.0.iter().map(|&q| q as f64 * resolution).collect())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReachableSet {
    pub resolution: f64,
    pub points: BTreeSet<QuantizedState>,
}

impl ReachableSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, v: &Vector) -> bool {
        self.points.contains(&QuantizedState::from_vector(v, self.resolution))
    }

    /// Dimension of the affine hull of the reached points.
    pub fn affine_rank(&self) -> usize {
        let mut it = self.points.iter();
        let Some(base) = it.next() else { return 0 };
        let base = base.to_vector(self.resolution);
        let rows: Vec<Vec<f64>> = it
            .map(|p| {
                p.to_vector(self.resolution)
                    .sub(&base)
                    .expect("points share one dimension")
                    .into_inner()
            })
            .collect();
        if rows.is_empty() {
            return 0;
        }
        Matrix::from_rows(&rows).map_or(0, |m| m.rank(RANK_TOLERANCE))
    }
}

/// Exhaustive enumeration of the states reachable in exactly `horizon` steps
/// when every control is drawn from `control_grid`.
///
/// States are propagated with [`step`] and clipped to the state box if the
/// model has one, matching [`super::simulate`].
pub fn reachable_set_bruteforce(
    model: &LinearModel,
    x0: &Vector,
    horizon: usize,
    control_grid: &[Vector],
    cap: u128,
) -> Result<ReachableSet> {
    check_dim("initial state", model.states(), x0.dim())?;
    for u in control_grid {
        check_dim("control grid vector", model.controls(), u.dim())?;
    }
    if horizon > 0 && control_grid.is_empty() {
        return Err(Error::invalid("control grid", "empty grid with positive horizon"));
    }
    let paths = (control_grid.len() as u128)
        .checked_pow(horizon as u32)
        .unwrap_or(u128::MAX);
    if paths > cap {
        return Err(Error::EnumerationCap { paths, cap });
    }

    let clip = |x: Vector| match model.state_box() {
        Some(bx) => bx.clip(&x).0,
        None => x,
    };
    // Merging identical states level by level preserves the exact set of
    // endpoints since the dynamics are memoryless.
    let mut frontier: Vec<Vector> = vec![clip(x0.clone())];
    for _ in 0..horizon {
        let mut next = BTreeSet::new();
        let mut level = Vec::new();
        for x in &frontier {
            for u in control_grid {
                let u = match model.control_box() {
                    Some(bx) => bx.clip(u).0,
                    None => u.clone(),
                };
                let y = clip(step(model, x, &u)?);
                if next.insert(QuantizedState::from_vector(&y, REACH_RESOLUTION)) {
                    level.push(y);
                }
            }
        }
        frontier = level;
    }
    Ok(ReachableSet {
        resolution: REACH_RESOLUTION,
        points: frontier
            .iter()
            .map(|v| QuantizedState::from_vector(v, REACH_RESOLUTION))
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn v(x: &[f64]) -> Vector {
        Vector::new(x.to_vec()).unwrap()
    }

    #[test]
    fn stability_classes() {
        assert_eq!(spectral_radius(&Matrix::zeros(2, 2)).unwrap(), 0.0);
        assert_eq!(classify_stability(&Matrix::zeros(2, 2)).unwrap(), Stability::Stable);
        assert_relative_eq!(spectral_radius(&Matrix::identity(2)).unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!(classify_stability(&Matrix::identity(2)).unwrap(), Stability::Marginal);
        let a = m(&[&[0.0, 1.0], &[-0.5, 0.9]]);
        assert_relative_eq!(spectral_radius(&a).unwrap(), 0.5f64.sqrt(), epsilon = 1e-12);
        assert_eq!(classify_stability(&a).unwrap(), Stability::Stable);
        assert_eq!(classify_stability(&m(&[&[1.1]])).unwrap(), Stability::Unstable);
    }

    #[test]
    fn controllability_examples() {
        let model = LinearModel::new(Matrix::identity(2), m(&[&[1.0], &[0.0]])).unwrap();
        assert_eq!(controllability_matrix(&model), m(&[&[1.0, 1.0], &[0.0, 0.0]]));
        assert!(!is_controllable(&model));

        let model = LinearModel::new(m(&[&[0.0, 1.0], &[0.0, 0.0]]), m(&[&[0.0], &[1.0]])).unwrap();
        assert_eq!(controllability_matrix(&model), m(&[&[0.0, 1.0], &[1.0, 0.0]]));
        assert!(is_controllable(&model));
    }

    #[test]
    fn observability_examples() {
        let a = m(&[&[0.3, 2.0, 0.0], &[0.0, 0.1, 0.0], &[1.0, 0.0, 0.0]]);
        let model = LinearModel::new(a, Matrix::zeros(3, 1)).unwrap();
        assert!(is_observable(&model, &OutputMap::identity(3)).unwrap());

        let model = LinearModel::new(Matrix::identity(2), Matrix::zeros(2, 1)).unwrap();
        let c = OutputMap::new(m(&[&[1.0, 0.0]]));
        assert_eq!(observability_matrix(&model, &c).unwrap().rank(RANK_TOLERANCE), 1);
        assert!(!is_observable(&model, &c).unwrap());

        // x1 <- x2 <- x3: reading x1 recovers x3 after two shifts
        let shift = m(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], &[0.0, 0.0, 0.0]]);
        let model = LinearModel::new(shift, Matrix::zeros(3, 1)).unwrap();
        let c = OutputMap::new(m(&[&[1.0, 0.0, 0.0]]));
        assert_eq!(observability_matrix(&model, &c).unwrap(), Matrix::identity(3));
        assert!(is_observable(&model, &c).unwrap());

        let bad = OutputMap::new(m(&[&[1.0, 0.0, 0.0]]));
        let model = LinearModel::new(Matrix::identity(2), Matrix::zeros(2, 1)).unwrap();
        assert!(is_observable(&model, &bad).is_err());
    }

    #[test]
    fn reachable_set_examples() {
        let model = LinearModel::new(m(&[&[1.0]]), m(&[&[1.0]])).unwrap();
        let grid = [v(&[-1.0]), v(&[0.0]), v(&[1.0])];
        let r0 = reachable_set_bruteforce(&model, &v(&[0.0]), 0, &grid, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(r0.len(), 1);
        assert!(r0.contains(&v(&[0.0])));

        let r2 = reachable_set_bruteforce(&model, &v(&[0.0]), 2, &grid, DEFAULT_ENUMERATION_CAP).unwrap();
        let got: Vec<i64> = r2
            .points
            .iter()
            .map(|q| (q.0[0] as f64 * REACH_RESOLUTION).round() as i64)
            .collect();
        assert_eq!(got, vec![-2, -1, 0, 1, 2]);
    }

    #[test]
    fn uncontrollable_pair_reaches_a_line() {
        let model = LinearModel::new(Matrix::identity(2), m(&[&[1.0], &[0.0]])).unwrap();
        let grid = [v(&[-1.0]), v(&[0.0]), v(&[1.0])];
        let r = reachable_set_bruteforce(&model, &v(&[0.0, 0.0]), 3, &grid, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(r.affine_rank(), 1);
        assert!(r.points.iter().all(|q| q.0[1] == 0));
        assert!(!is_controllable(&model));
    }

    #[test]
    fn enumeration_cap_refuses() {
        let model = LinearModel::new(m(&[&[1.0]]), m(&[&[1.0]])).unwrap();
        let grid = vec![v(&[0.0]); 10];
        let err = reachable_set_bruteforce(&model, &v(&[0.0]), 7, &grid, DEFAULT_ENUMERATION_CAP).unwrap_err();
        assert!(matches!(err, Error::EnumerationCap { paths: 10_000_000, .. }));
    }
}
