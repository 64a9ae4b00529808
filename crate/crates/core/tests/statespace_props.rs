use hcdyn::statespace::{
    classify_stability, controllability_matrix, is_controllable, is_observable, observability_matrix, simulate, step,
    LinearModel, OutputMap, Stability,
};
use hcdyn::{Matrix, Vector};
use num_complex::Complex64;
use proptest::prelude::*;

fn matrix(rows: usize, cols: usize, lo: f64, hi: f64) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(lo..hi, rows * cols).prop_map(move |d| Matrix::new(rows, cols, d).unwrap())
}

fn vector(n: usize) -> impl Strategy<Value = Vector> {
    prop::collection::vec(-10.0..10.0f64, n).prop_map(|d| Vector::new(d).unwrap())
}

fn model(n: usize, m: usize) -> impl Strategy<Value = LinearModel> {
    (matrix(n, n, -2.0, 2.0), matrix(n, m, -2.0, 2.0)).prop_map(|(a, b)| LinearModel::new(a, b).unwrap())
}

fn dims() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=5, 1usize..=3)
}

fn close(a: &Vector, b: &Vector, scale: f64, rel: f64) -> bool {
    a.sub(b).unwrap().max_abs() <= rel * scale.max(f64::MIN_POSITIVE)
}

proptest! {
    #[test]
    fn step_is_linear(
        (model, x1, x2, u1, u2) in dims().prop_flat_map(|(n, m)| (model(n, m), vector(n), vector(n), vector(m), vector(m))),
        alpha in -5.0..5.0f64,
        beta in -5.0..5.0f64,
    ) {
        let lhs = step(&model, &x1.scaled(alpha).add(&x2.scaled(beta)).unwrap(), &u1.scaled(alpha).add(&u2.scaled(beta)).unwrap()).unwrap();
        let s1 = step(&model, &x1, &u1).unwrap();
        let s2 = step(&model, &x2, &u2).unwrap();
        let rhs = s1.scaled(alpha).add(&s2.scaled(beta)).unwrap();
        // the error bound scales with the magnitudes that went into the sum
        let scale = (alpha.abs() * (x1.max_abs() + u1.max_abs()) + beta.abs() * (x2.max_abs() + u2.max_abs()))
            * (model.a().max_abs() + model.b().max_abs()) * 8.0;
        prop_assert!(close(&lhs, &rhs, scale, 1e-9), "{lhs} vs {rhs}");
    }

    #[test]
    fn eigenvalues_match_trace_and_determinant(a in (1usize..=6).prop_flat_map(|n| matrix(n, n, -3.0, 3.0))) {
        let eig = a.eigenvalues().unwrap();
        prop_assert_eq!(eig.len(), a.rows());
        let sum: Complex64 = eig.iter().sum();
        let prod: Complex64 = eig.iter().product();
        let det = a.determinant().unwrap();
        let trace = a.trace();
        // relative to the natural size of each quantity for entries up to 3
        let trace_scale = trace.abs().max(a.rows() as f64 * a.max_abs());
        let det_scale = det.abs().max(a.frobenius_norm().powi(a.rows() as i32));
        prop_assert!((sum.re - trace).abs() <= 1e-8 * trace_scale, "{sum} vs {trace}");
        prop_assert!(sum.im.abs() <= 1e-8 * trace_scale);
        prop_assert!((prod.re - det).abs() <= 1e-8 * det_scale, "{prod} vs {det}");
        prop_assert!(prod.im.abs() <= 1e-8 * det_scale);
    }

    #[test]
    fn simulate_is_a_fold_of_step(
        (model, x0, us) in dims().prop_flat_map(|(n, m)| (model(n, m), vector(n), prop::collection::vec(vector(m), 0..30))),
    ) {
        let traj = simulate(&model, &x0, &us).unwrap();
        let mut x = x0.clone();
        prop_assert_eq!(&traj.states()[0], &x);
        for (t, u) in us.iter().enumerate() {
            x = step(&model, &x, u).unwrap();
            // bit for bit, including the sign of zero
            let a: Vec<u64> = traj.states()[t + 1].iter().map(|v| v.to_bits()).collect();
            let b: Vec<u64> = x.iter().map(|v| v.to_bits()).collect();
            prop_assert_eq!(a, b);
        }
        prop_assert!(traj.violations().is_empty());
    }

    #[test]
    fn observability_is_dual_to_controllability(
        (a, c) in (1usize..=4, 1usize..=3).prop_flat_map(|(n, p)| {
            let small = prop::collection::vec(-1i8..=1, n * n);
            let out = prop::collection::vec(-1i8..=1, p * n);
            (small, out).prop_map(move |(a, c)| {
                let a = Matrix::new(n, n, a.into_iter().map(f64::from).collect()).unwrap();
                let c = Matrix::new(p, n, c.into_iter().map(f64::from).collect()).unwrap();
                (a, c)
            })
        }),
    ) {
        let n = a.rows();
        let model = LinearModel::new(a.clone(), Matrix::zeros(n, 1)).unwrap();
        let out = OutputMap::new(c.clone());
        let dual = LinearModel::new(a.transpose(), c.transpose()).unwrap();
        prop_assert_eq!(is_observable(&model, &out).unwrap(), is_controllable(&dual));
        prop_assert_eq!(observability_matrix(&model, &out).unwrap().transpose(), controllability_matrix(&dual));
    }
}

#[test]
fn scalar_stability_boundaries() {
    let cases = [
        (0.5, Stability::Stable),
        (1.0, Stability::Marginal),
        (-1.0, Stability::Marginal),
        (1.01, Stability::Unstable),
    ];
    for (a, want) in cases {
        let m = Matrix::from_rows(&[vec![a]]).unwrap();
        assert_eq!(classify_stability(&m).unwrap(), want, "a = {a}");
    }
}
