//! Batch least-squares identification of `x(t+1) = A x(t) + B u(t)`.
//!
//! The model class has no intercept. Data around a nonzero operating point
//! should be centered first (see [`OperatingPoint`]), otherwise the offset
//! leaks into `A` and `B`.

use std::io::Write;

use nalgebra::{DMatrix, SVD};

use crate::error::{Error, Result};
use crate::linalg::{check_dim, Matrix, Vector};
use crate::statespace::{simulate, step, LinearModel, Trajectory};

/// Singular values below this fraction of the largest count as missing excitation.
pub const EXCITATION_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct FitResult {
    pub model: LinearModel,
    /// Root mean square of the one-step residuals over the fitting data.
    pub residual_rms: f64,
    /// Ratio of largest to smallest singular value of the regressor matrix.
    pub condition_indicator: f64,
    pub transitions: usize,
}

/// One observed transition `(x(t), u(t), x(t+1))`.
pub type Transition = (Vector, Vector, Vector);

pub fn transitions(traj: &Trajectory) -> Vec<Transition> {
    traj.controls()
        .iter()
        .enumerate()
        .map(|(t, u)| (traj.states()[t].clone(), u.clone(), traj.states()[t + 1].clone()))
        .collect()
}

/// Fits `(A, B)` minimizing `sum_t |x(t+1) - A x(t) - B u(t)|^2`.
pub fn fit_linear(traj: &Trajectory) -> Result<FitResult> {
    let m = traj
        .control_dim()
        .ok_or_else(|| Error::invalid("identification data", "trajectory has no controls"))?;
    if traj.horizon() == 0 {
        return Err(Error::TrajectoryTooShort {
            len: 0,
            min: traj.state_dim() + m + 1,
        });
    }
    fit_transitions(&transitions(traj))
}

/// [`fit_linear`] over transitions in any order.
pub fn fit_transitions(pairs: &[Transition]) -> Result<FitResult> {
    let Some((x0, u0, _)) = pairs.first() else {
        return Err(Error::invalid("identification data", "no transitions"));
    };
    let (n, m) = (x0.dim(), u0.dim());
    for (x, u, next) in pairs {
        check_dim("transition state", n, x.dim())?;
        check_dim("transition control", m, u.dim())?;
        check_dim("transition successor", n, next.dim())?;
    }
    let p = n + m;
    let t_len = pairs.len();
    if t_len < p + 1 {
        return Err(Error::TrajectoryTooShort { len: t_len, min: p + 1 });
    }

    let regressors = DMatrix::from_fn(t_len, p, |t, j| if j < n { pairs[t].0[j] } else { pairs[t].1[j - n] });
    let targets = DMatrix::from_fn(t_len, n, |t, i| pairs[t].2[i]);

    let svd = SVD::new(regressors.clone(), true, true);
    let sigma = &svd.singular_values;
    let s_max = sigma.max();
    let cutoff = EXCITATION_TOLERANCE * s_max;
    let rank = sigma.iter().filter(|&&s| s > cutoff && s > 0.0).count();
    if rank < p {
        let v_t = svd.v_t.as_ref().expect("v_t requested");
        let names: Vec<String> = (1..=n)
            .map(|i| format!("x{i}"))
            .chain((1..=m).map(|i| format!("u{i}")))
            .collect();
        let directions = (0..p)
            .filter(|&k| !(sigma[k] > cutoff && sigma[k] > 0.0))
            .map(|k| describe_direction(v_t.row(k).iter().copied(), &names))
            .collect::<Vec<_>>()
            .join("; ");
        return Err(Error::InsufficientExcitation {
            rank,
            needed: p,
            directions,
        });
    }

    let theta = svd
        .solve(&targets, 0.0)
        .map_err(|e| Error::invalid("least squares", e.to_string()))?;
    let a = Matrix::from_fn(n, n, |i, j| theta[(j, i)]);
    let b = Matrix::from_fn(n, m, |i, j| theta[(n + j, i)]);
    let model = LinearModel::new(a, b)?;

    let residual = targets - regressors * &theta;
    let residual_rms = (residual.iter().map(|r| r * r).sum::<f64>() / (t_len * n) as f64).sqrt();
    let s_min = sigma.min();
    Ok(FitResult {
        model,
        residual_rms,
        condition_indicator: s_max / s_min,
        transitions: t_len,
    })
}

fn describe_direction(coeffs: impl Iterator<Item = f64>, names: &[String]) -> String {
    let terms: Vec<String> = coeffs
        .zip(names)
        .filter(|(c, _)| c.abs() > 1e-6)
        .map(|(c, name)| format!("{c:+.3}*{name}"))
        .collect();
    format!("[{}]", terms.join(" "))
}

/// Multi-step prediction from `x0`, identical to [`simulate`].
pub fn predict(model: &LinearModel, x0: &Vector, controls: &[Vector]) -> Result<Trajectory> {
    simulate(model, x0, controls)
}

/// One-step-ahead RMSE of `model` against measured `traj`.
pub fn prediction_rmse(model: &LinearModel, traj: &Trajectory) -> Result<f64> {
    check_dim("trajectory state", model.states(), traj.state_dim())?;
    if traj.horizon() == 0 {
        return Err(Error::TrajectoryTooShort { len: 0, min: 1 });
    }
    let mut sum = 0.0;
    for (t, u) in traj.controls().iter().enumerate() {
        let pred = step(model, &traj.states()[t], u)?;
        let err = traj.states()[t + 1].sub(&pred)?;
        sum += err.iter().map(|e| e * e).sum::<f64>();
    }
    Ok((sum / (traj.horizon() * model.states()) as f64).sqrt())
}

/// RMS over all components of all states.
pub fn state_rms(traj: &Trajectory) -> f64 {
    let count = (traj.states().len() * traj.state_dim()) as f64;
    (traj.states().iter().flat_map(|s| s.iter()).map(|v| v * v).sum::<f64>() / count).sqrt()
}

/// State and control means of a trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatingPoint {
    pub state: Vector,
    pub control: Vector,
}

impl OperatingPoint {
    pub fn of(traj: &Trajectory) -> Result<Self> {
        let control = traj
            .control_mean()
            .ok_or_else(|| Error::invalid("operating point", "trajectory has no controls"))?;
        Ok(OperatingPoint {
            state: traj.state_mean(),
            control,
        })
    }

    /// Deviations of `traj` from this point.
    pub fn center(&self, traj: &Trajectory) -> Result<Trajectory> {
        traj.shifted_states(&self.state)?.shifted_controls(&self.control)
    }
}

/// Writes a one-row fit report with header
/// `residual_rms,condition_indicator,transitions,states,controls`.
pub fn write_fit_report<W: Write>(fit: &FitResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "residual_rms",
        "condition_indicator",
        "transitions",
        "states",
        "controls",
    ])?;
    w.write_record([
        fit.residual_rms.to_string(),
        fit.condition_indicator.to_string(),
        fit.transitions.to_string(),
        fit.model.states().to_string(),
        fit.model.controls().to_string(),
    ])?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn model() -> LinearModel {
        let a = Matrix::from_rows(&[vec![0.6, 0.2], vec![-0.1, 0.8]]).unwrap();
        let b = Matrix::from_rows(&[vec![1.0], vec![0.5]]).unwrap();
        LinearModel::new(a, b).unwrap()
    }

    fn excited(model: &LinearModel, len: usize, seed: u64) -> Trajectory {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u: Vec<Vector> = (0..len)
            .map(|_| Vector::new(vec![rng.random_range(-1.0..1.0)]).unwrap())
            .collect();
        simulate(model, &Vector::new(vec![0.3, -0.2]).unwrap(), &u).unwrap()
    }

    #[test]
    fn recovers_generating_model() {
        let truth = model();
        let traj = excited(&truth, 50, 7);
        let fit = fit_linear(&traj).unwrap();
        let err = fit.model.a().sub(truth.a()).unwrap().frobenius_norm() / truth.a().frobenius_norm();
        assert!(err < 1e-6, "{err}");
        assert!(fit.residual_rms < 1e-9);
        assert!(prediction_rmse(&fit.model, &traj).unwrap() < 1e-9);
    }

    #[test]
    fn zero_trajectory_is_not_exciting() {
        let z = Vector::zeros(2);
        let traj = Trajectory::new(vec![z.clone(); 11], vec![Vector::zeros(1); 10]).unwrap();
        match fit_linear(&traj) {
            Err(Error::InsufficientExcitation {
                rank: 0,
                needed: 3,
                directions,
            }) => {
                assert!(directions.contains("x1") && directions.contains("u1"), "{directions}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn constant_input_names_the_collinear_direction() {
        // u constant and x stuck at an equilibrium: x1, x2 and u1 all collinear
        let traj = Trajectory::new(
            vec![Vector::new(vec![1.0, 2.0]).unwrap(); 9],
            vec![Vector::new(vec![1.0]).unwrap(); 8],
        )
        .unwrap();
        let err = fit_linear(&traj).unwrap_err();
        assert!(
            matches!(err, Error::InsufficientExcitation { rank: 1, needed: 3, .. }),
            "{err}"
        );
    }

    #[test]
    fn too_short() {
        let traj = excited(&model(), 3, 1);
        assert!(matches!(fit_linear(&traj), Err(Error::TrajectoryTooShort { .. })));
    }

    #[test]
    fn zero_model_zero_data() {
        let zero = LinearModel::new(Matrix::zeros(2, 2), Matrix::zeros(2, 1)).unwrap();
        let traj = Trajectory::new(vec![Vector::zeros(2); 5], vec![Vector::zeros(1); 4]).unwrap();
        assert_eq!(prediction_rmse(&zero, &traj).unwrap(), 0.0);
    }

    #[test]
    fn centering_removes_most_of_an_offset() {
        // y = x + 4 obeys y(t+1) = 0.5 y + u + 2, an affine model
        let truth = LinearModel::new(Matrix::diag(&[0.5]), Matrix::diag(&[1.0])).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let u: Vec<Vector> = (0..200)
            .map(|_| Vector::new(vec![3.0 + rng.random_range(-1.0..1.0)]).unwrap())
            .collect();
        let raw = simulate(&truth, &Vector::new(vec![6.0]).unwrap(), &u).unwrap();
        let shifted = raw.shifted_states(&Vector::new(vec![-4.0]).unwrap()).unwrap();
        let a_err = |t: &Trajectory| (fit_linear(t).unwrap().model.a()[(0, 0)] - 0.5).abs();
        let op = OperatingPoint::of(&shifted).unwrap();
        let centered = a_err(&op.center(&shifted).unwrap());
        let uncentered = a_err(&shifted);
        assert!(centered < 0.02, "{centered}");
        assert!(uncentered > 5.0 * centered, "{uncentered} vs {centered}");
    }

    #[test]
    fn report_layout() {
        let fit = fit_linear(&excited(&model(), 20, 3)).unwrap();
        let mut buf = Vec::new();
        write_fit_report(&fit, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("residual_rms,condition_indicator,transitions,states,controls\n"));
        assert!(text.lines().nth(1).unwrap().ends_with(",20,2,1"));
    }
}
