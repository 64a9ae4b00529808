use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use hcdyn::controller::{detect_oscillation, Oscillation};
use hcdyn::hybridsim::{
    builtin_profile, calibrate, ratio_rows, reference, run_benchmark, write_bench_csv, write_ratio_csv, Profile,
    StreamConfig, StreamSim,
};
use hcdyn::statespace::io::{parse_model, read_controls_csv, read_trajectory_csv, trajectory_to_csv, ModelSpec};
use hcdyn::statespace::{
    classify_stability, is_controllable, is_observable, simulate, spectral_radius, step_response, LinearModel,
    OutputMap, DEFAULT_STEP_HORIZON,
};
use hcdyn::sysid::{fit_linear, prediction_rmse, state_rms, write_fit_report, OperatingPoint};
use hcdyn::Vector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{Mode, Overrides, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::Staged;

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn load_model(path: &Path) -> CliResult<ModelSpec> {
    Ok(parse_model(&read_text(path)?, &path.display().to_string())?)
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> hcdyn::Result<()>) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

pub fn bench(ov: &Overrides) -> CliResult<Vec<PathBuf>> {
    let cfg = RunConfig::load(ov)?;
    let corpus = cfg.corpus.build()?;

    let mut tables = Vec::new();
    for &mode in &cfg.modes {
        let rows = run_benchmark(&cfg.topology, &corpus, &cfg.route_policy(mode), &cfg.batches)?;
        tables.push((mode, rows));
    }
    let rows_of = |m: Mode| {
        &tables
            .iter()
            .find(|(mode, _)| *mode == m)
            .expect("mode checked at load")
            .1
    };
    let ratio = ratio_rows(rows_of(Mode::Local), rows_of(Mode::Hybrid));
    let summary = stream_summary(&cfg)?;

    let mut staged = Staged::new(&cfg.out)?;
    for (mode, rows) in &tables {
        staged.add(mode.file_name(), &csv_bytes(|b| write_bench_csv(rows, b))?)?;
    }
    staged.add("ratio.csv", &csv_bytes(|b| write_ratio_csv(&ratio, b))?)?;
    staged.add("summary.csv", &summary)?;
    staged.commit()
}

/// Drives the stream simulator with random admission, fits a model to the
/// first half and scores it on the second, then analyzes the fitted model.
fn stream_summary(cfg: &RunConfig) -> CliResult<Vec<u8>> {
    let s = &cfg.stream;
    let stream_cfg = StreamConfig {
        period_ms: s.period_ms,
        articles_per_request: s.articles_per_request,
        baseline_workers: s.baseline_workers,
        seed: cfg.stream_seed,
    };
    let mut sim = StreamSim::new(
        cfg.topology.clone(),
        cfg.corpus.build()?,
        stream_cfg,
        cfg.route_policy(Mode::Controlled),
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.stream_seed);
    let rates: Vec<f64> = (0..s.periods).map(|_| rng.random_range(0.0..s.max_rate)).collect();
    let trace = sim.run_trace_with(&rates, s.input)?;

    let half = s.periods / 2;
    let train = trace.window(0, half)?;
    let test = trace.window(half, s.periods)?;
    let op = OperatingPoint::of(&train)?;

    let mut rows = vec![
        ("profile".to_string(), cfg.profile.clone()),
        ("stream_periods".into(), s.periods.to_string()),
    ];
    let fit = match fit_linear(&op.center(&train)?) {
        Ok(fit) => fit,
        // e.g. the router never offloaded, so channel load never moved
        Err(e @ hcdyn::Error::InsufficientExcitation { .. }) => {
            rows.push(("fit_error".into(), e.to_string()));
            return metric_csv(&rows);
        }
        Err(e) => return Err(e.into()),
    };
    let centered_test = op.center(&test)?;
    let rmse = prediction_rmse(&fit.model, &centered_test)?;
    let model = &fit.model;
    let cpu_only = OutputMap::new(hcdyn::Matrix::from_rows(&[vec![1.0, 0.0, 0.0]])?);
    rows.extend([
        ("fit_transitions".into(), fit.transitions.to_string()),
        ("fit_residual_rms".into(), fit.residual_rms.to_string()),
        ("fit_condition_indicator".into(), fit.condition_indicator.to_string()),
        ("prediction_rmse".into(), rmse.to_string()),
        (
            "prediction_rmse_over_state_rms".into(),
            (rmse / state_rms(&centered_test)).to_string(),
        ),
        ("spectral_radius".into(), spectral_radius(model.a())?.to_string()),
        ("stability".into(), classify_stability(model.a())?.to_string()),
        ("controllable".into(), is_controllable(model).to_string()),
        (
            "observable_from_cpu_load".into(),
            is_observable(model, &cpu_only)?.to_string(),
        ),
    ]);
    for ch in 0..model.controls() {
        let (traj, class) = step_response(model, ch, DEFAULT_STEP_HORIZON)?;
        rows.push((format!("step_response_u{}", ch + 1), class.to_string()));
        for i in 0..model.states() {
            let osc = detect_oscillation(&traj, i).unwrap_or(Oscillation::None);
            rows.push((format!("step_oscillation_u{}_x{}", ch + 1, i + 1), osc.to_string()));
        }
    }
    metric_csv(&rows)
}

fn metric_csv(rows: &[(String, String)]) -> CliResult<Vec<u8>> {
    csv_bytes(|b| {
        let mut w = csv::Writer::from_writer(b);
        w.write_record(["metric", "value"])?;
        for (k, v) in rows {
            w.write_record([k, v])?;
        }
        w.flush()?;
        Ok(())
    })
}

pub fn analyze(model_path: &Path, out: Option<&Path>) -> CliResult<String> {
    let spec = load_model(model_path)?;
    let model = &spec.model;
    let mut rows: Vec<(String, String)> = vec![
        ("spectral_radius".into(), spectral_radius(model.a())?.to_string()),
        ("stability".into(), classify_stability(model.a())?.to_string()),
        ("controllable".into(), is_controllable(model).to_string()),
    ];
    let observable = match &spec.output {
        Some(c) => is_observable(model, c)?.to_string(),
        None => "n/a".to_string(),
    };
    rows.push(("observable".into(), observable));
    for ch in 0..model.controls() {
        let (_, class) = step_response(model, ch, DEFAULT_STEP_HORIZON)?;
        rows.push((format!("step_response_u{}", ch + 1), class.to_string()));
    }

    if let Some(dir) = out {
        let csv = metric_csv(&rows)?;
        let mut staged = Staged::new(dir)?;
        staged.add("analysis.csv", &csv)?;
        staged.commit()?;
    }
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    Ok(rows.iter().map(|(k, v)| format!("{k:<width$}  {v}\n")).collect())
}

pub fn fit(trace_path: &Path, out: &Path) -> CliResult<Vec<PathBuf>> {
    let file = fs::File::open(trace_path).map_err(|e| CliError::io(trace_path, e))?;
    let traj = read_trajectory_csv(file, &trace_path.display().to_string())?;
    let fit = fit_linear(&traj)?;
    let model_text = hcdyn::statespace::io::model_to_toml(&fit.model, None);
    let report = csv_bytes(|b| write_fit_report(&fit, b))?;
    let mut staged = Staged::new(out)?;
    staged.add("model.toml", model_text.as_bytes())?;
    staged.add("fit_report.csv", &report)?;
    staged.commit()
}

fn parse_x0(text: Option<&str>, model: &LinearModel) -> CliResult<Vector> {
    let Some(text) = text else {
        return Ok(Vector::zeros(model.states()));
    };
    let values = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Config(format!("--x0: {e}")))?;
    if values.len() != model.states() {
        return Err(CliError::Config(format!(
            "--x0 has {} entries, the model has {} states",
            values.len(),
            model.states()
        )));
    }
    Ok(Vector::new(values)?)
}

pub fn simulate_cmd(
    model_path: &Path,
    controls_path: &Path,
    x0: Option<&str>,
    out: Option<&Path>,
) -> CliResult<String> {
    let spec = load_model(model_path)?;
    let file = fs::File::open(controls_path).map_err(|e| CliError::io(controls_path, e))?;
    let controls = read_controls_csv(file, &controls_path.display().to_string())?;
    let x0 = parse_x0(x0, &spec.model)?;
    let traj = simulate(&spec.model, &x0, &controls)?;
    let csv = trajectory_to_csv(&traj);
    match out {
        Some(dir) => {
            let mut staged = Staged::new(dir)?;
            staged.add("trajectory.csv", csv.as_bytes())?;
            staged.commit()?;
            Ok(String::new())
        }
        None => Ok(csv),
    }
}

pub fn step_cmd(model_path: &Path, channel: usize, horizon: usize, out: &Path) -> CliResult<String> {
    let spec = load_model(model_path)?;
    if channel == 0 || channel > spec.model.controls() {
        return Err(CliError::Config(format!(
            "--channel {channel} out of range 1..={}",
            spec.model.controls()
        )));
    }
    let (traj, class) = step_response(&spec.model, channel - 1, horizon)?;
    let mut staged = Staged::new(out)?;
    staged.add("step.csv", trajectory_to_csv(&traj).as_bytes())?;
    staged.commit()?;
    Ok(format!("{class}\n"))
}

/// Refits a shipped profile and writes it as `<name>.toml`, with a residual
/// report on standard output.
pub fn calibrate_cmd(ov: &Overrides) -> CliResult<(Vec<PathBuf>, String)> {
    let name = ov
        .profile
        .clone()
        .unwrap_or_else(|| hcdyn::hybridsim::DEFAULT_PROFILE.to_string());
    let series = reference::reference_series(&name)
        .ok_or_else(|| CliError::Config(format!("no reference series for profile `{name}`")))?;
    let mut corpus_cfg = builtin_profile(&name)?.corpus;
    if let Some(seed) = ov.seed {
        corpus_cfg.seed = seed;
    }
    let cal = calibrate(&series, &corpus_cfg.build()?)?;
    let profile = Profile {
        name: name.clone(),
        batches: series.batches.to_vec(),
        corpus: corpus_cfg,
        topology: cal.topology.clone(),
    };
    let mut report = String::from("articles_extracted,local_relative_residual,difference_residual_ms\n");
    for (i, n) in series.batches.iter().enumerate() {
        writeln!(
            report,
            "{n},{},{}",
            cal.local_relative_residuals[i], cal.difference_residuals_ms[i]
        )
        .expect("string write");
    }
    let mut staged = Staged::new(ov.out.as_deref().unwrap_or(Path::new(".")))?;
    staged.add(&format!("{name}.toml"), profile.to_toml().as_bytes())?;
    Ok((staged.commit()?, report))
}
