//! Text formats for models and trajectories.
//!
//! Models are TOML documents:
//!
//! ```toml
//! a = [[0.5, 0.1], [0.0, 0.25]]   # n x n, one inner array per row
//! b = [[1.0], [2.0]]              # n x m
//!
//! [state_box]                     # optional, n entries each
//! lower = [-10.0, -10.0]
//! upper = [10.0, 10.0]
//!
//! [control_box]                   # optional, m entries each
//! lower = [0.0]
//! upper = [1.0]
//!
//! [output]                        # optional, p x n
//! c = [[1.0, 0.0]]
//! ```
//!
//! Trajectories are CSV with header `t,x1..xn,u1..um`. The final row has
//! no control, its `u` fields are left empty.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BoxConstraint, LinearModel, OutputMap, Trajectory};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state_box: Option<BoxSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control_box: Option<BoxSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSection {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub c: Vec<Vec<f64>>,
}

/// A model together with its optional output map, as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub model: LinearModel,
    pub output: Option<OutputMap>,
}

fn bad(source: &str, key: &str, reason: impl std::fmt::Display) -> Error {
    Error::Parse {
        source_name: source.to_string(),
        message: format!("key `{key}`: {reason}"),
    }
}

pub(crate) fn matrix_field(source: &str, key: &str, rows: &[Vec<f64>], cols: Option<usize>) -> Result<Matrix> {
    if rows.is_empty() {
        return Err(bad(source, key, "matrix has no rows"));
    }
    let width = cols.unwrap_or(rows[0].len());
    for (i, r) in rows.iter().enumerate() {
        if r.len() != width {
            return Err(bad(
                source,
                key,
                format!("row {i} has {} entries, expected {width}", r.len()),
            ));
        }
        if let Some(j) = r.iter().position(|v| !v.is_finite()) {
            return Err(bad(source, key, format!("entry ({i}, {j}) is not finite")));
        }
    }
    Matrix::from_rows(rows).map_err(|e| bad(source, key, e))
}

fn box_field(source: &str, key: &str, sec: &BoxSection, dim: usize) -> Result<BoxConstraint> {
    for (name, side) in [("lower", &sec.lower), ("upper", &sec.upper)] {
        if side.len() != dim {
            return Err(bad(
                source,
                &format!("{key}.{name}"),
                format!("has {} entries, expected {dim}", side.len()),
            ));
        }
    }
    let lower = Vector::new(sec.lower.clone()).map_err(|e| bad(source, &format!("{key}.lower"), e))?;
    let upper = Vector::new(sec.upper.clone()).map_err(|e| bad(source, &format!("{key}.upper"), e))?;
    BoxConstraint::new(lower, upper).map_err(|e| bad(source, key, e))
}

impl ModelFile {
    pub fn into_spec(self, source: &str) -> Result<ModelSpec> {
        let a = matrix_field(source, "a", &self.a, None)?;
        if !a.is_square() {
            return Err(bad(
                source,
                "a",
                format!("must be square, got {}x{}", a.rows(), a.cols()),
            ));
        }
        let n = a.rows();
        if self.b.len() != n {
            return Err(bad(source, "b", format!("has {} rows, expected {n}", self.b.len())));
        }
        let b = matrix_field(source, "b", &self.b, None)?;
        let mut model = LinearModel::new(a, b)?;
        if let Some(sec) = &self.state_box {
            model = model.with_state_box(box_field(source, "state_box", sec, n)?)?;
        }
        if let Some(sec) = &self.control_box {
            let m = model.controls();
            model = model.with_control_box(box_field(source, "control_box", sec, m)?)?;
        }
        let output = match &self.output {
            Some(sec) => Some(OutputMap::new(matrix_field(source, "output.c", &sec.c, Some(n))?)),
            None => None,
        };
        Ok(ModelSpec { model, output })
    }

    pub fn from_spec(model: &LinearModel, output: Option<&OutputMap>) -> Self {
        let sec = |b: &BoxConstraint| BoxSection {
            lower: b.lower().as_slice().to_vec(),
            upper: b.upper().as_slice().to_vec(),
        };
        ModelFile {
            a: model.a().to_rows(),
            b: model.b().to_rows(),
            state_box: model.state_box().map(sec),
            control_box: model.control_box().map(sec),
            output: output.map(|o| OutputSection { c: o.c().to_rows() }),
        }
    }
}

pub fn parse_model(text: &str, source: &str) -> Result<ModelSpec> {
    let file: ModelFile = toml::from_str(text).map_err(|e| Error::Parse {
        source_name: source.to_string(),
        message: e.to_string().trim_end().to_string(),
    })?;
    file.into_spec(source)
}

pub fn model_to_toml(model: &LinearModel, output: Option<&OutputMap>) -> String {
    toml::to_string(&ModelFile::from_spec(model, output)).expect("model file is always serializable")
}

pub fn read_model(path: &Path) -> Result<ModelSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_model(&text, &path.display().to_string())
}

pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, out: W) -> Result<()> {
    let n = traj.state_dim();
    let m = traj.control_dim().unwrap_or(0);
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|i| format!("x{i}")));
    header.extend((1..=m).map(|i| format!("u{i}")));
    w.write_record(&header)?;
    for (t, x) in traj.states().iter().enumerate() {
        let mut rec = vec![t.to_string()];
        rec.extend(x.iter().map(|v| v.to_string()));
        match traj.controls().get(t) {
            Some(u) => rec.extend(u.iter().map(|v| v.to_string())),
            None => rec.extend(std::iter::repeat_n(String::new(), m)),
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn trajectory_to_csv(traj: &Trajectory) -> String {
    let mut buf = Vec::new();
    write_trajectory_csv(traj, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("csv output is utf-8")
}

fn parse_cell(source: &str, row: usize, col: &str, s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|e| Error::Parse {
        source_name: source.to_string(),
        message: format!("row {row}, column `{col}`: {e}"),
    })
}

/// Reads a trajectory written by [`write_trajectory_csv`].
pub fn read_trajectory_csv<R: Read>(input: R, source: &str) -> Result<Trajectory> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let perr = |msg: String| Error::Parse {
        source_name: source.to_string(),
        message: msg,
    };
    if header.first().map(String::as_str) != Some("t") {
        return Err(perr("first column must be `t`".into()));
    }
    let x_cols: Vec<usize> = (1..header.len()).filter(|&i| header[i].starts_with('x')).collect();
    let u_cols: Vec<usize> = (1..header.len()).filter(|&i| header[i].starts_with('u')).collect();
    if x_cols.is_empty() || x_cols.len() + u_cols.len() + 1 != header.len() {
        return Err(perr("header must be `t,x1..xn,u1..um`".into()));
    }
    let mut states = Vec::new();
    let mut controls = Vec::new();
    let mut finished = false;
    for (row, rec) in r.records().enumerate() {
        let rec = rec?;
        if finished {
            return Err(perr(format!("row {row}: data after the final state row")));
        }
        let x = x_cols
            .iter()
            .map(|&i| parse_cell(source, row, &header[i], &rec[i]))
            .collect::<Result<Vec<_>>>()?;
        states.push(Vector::new(x).map_err(|e| perr(format!("row {row}: {e}")))?);
        if u_cols.iter().all(|&i| rec[i].trim().is_empty()) {
            finished = true;
            continue;
        }
        let u = u_cols
            .iter()
            .map(|&i| parse_cell(source, row, &header[i], &rec[i]))
            .collect::<Result<Vec<_>>>()?;
        controls.push(Vector::new(u).map_err(|e| perr(format!("row {row}: {e}")))?);
    }
    if states.is_empty() {
        return Err(perr("no data rows".into()));
    }
    if !finished && !u_cols.is_empty() {
        return Err(perr("last row must leave the control columns empty".into()));
    }
    Trajectory::new(states, controls)
}

/// Reads a control sequence: CSV with header `u1..um`, one row per step.
pub fn read_controls_csv<R: Read>(input: R, source: &str) -> Result<Vec<Vector>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header.is_empty() || header.iter().any(|h| !h.starts_with('u')) {
        return Err(Error::Parse {
            source_name: source.to_string(),
            message: "header must be `u1..um`".into(),
        });
    }
    r.records()
        .enumerate()
        .map(|(row, rec)| {
            let rec = rec?;
            let u = header
                .iter()
                .enumerate()
                .map(|(i, h)| parse_cell(source, row, h, &rec[i]))
                .collect::<Result<Vec<_>>>()?;
            Vector::new(u)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statespace::simulate;

    const EXAMPLE: &str = r#"
a = [[0.5, 0.1], [0.0, 0.25]]
b = [[1.0], [2.0]]

[state_box]
lower = [-10.0, -10.0]
upper = [10.0, 10.0]

[output]
c = [[1.0, 0.0]]
"#;

    #[test]
    fn parses_documented_schema() {
        let spec = parse_model(EXAMPLE, "example").unwrap();
        assert_eq!(spec.model.states(), 2);
        assert_eq!(spec.model.controls(), 1);
        assert!(spec.model.state_box().is_some());
        assert!(spec.model.control_box().is_none());
        assert_eq!(spec.output.unwrap().outputs(), 1);
    }

    #[test]
    fn model_text_round_trip() {
        let spec = parse_model(EXAMPLE, "example").unwrap();
        let text = model_to_toml(&spec.model, spec.output.as_ref());
        assert_eq!(parse_model(&text, "again").unwrap(), spec);
    }

    #[test]
    fn diagnostics_name_the_key() {
        let err = parse_model("a = [[1.0, 0.0], [0.0]]\nb = [[1.0], [1.0]]\n", "f").unwrap_err();
        assert!(err.to_string().contains("`a`"), "{err}");

        let err = parse_model(
            "a = [[1.0]]\nb = [[1.0]]\n[state_box]\nlower = [0.0, 1.0]\nupper = [1.0]\n",
            "f",
        )
        .unwrap_err();
        assert!(err.to_string().contains("state_box.lower"), "{err}");

        let err = parse_model("a = [[1.0]]\n", "f").unwrap_err();
        assert!(err.to_string().contains("`b`"), "{err}");

        let err = parse_model("a = [[1.0]]\nb = [[1.0]]\ngain = 2\n", "f").unwrap_err();
        assert!(err.to_string().contains("gain"), "{err}");

        let err = parse_model("a = [[nan]]\nb = [[1.0]]\n", "f").unwrap_err();
        assert!(err.to_string().contains("not finite"), "{err}");
    }

    #[test]
    fn trajectory_csv_layout() {
        let spec = parse_model(EXAMPLE, "example").unwrap();
        let u = vec![Vector::new(vec![1.0]).unwrap(); 2];
        let traj = simulate(&spec.model, &Vector::new(vec![0.1, 0.2]).unwrap(), &u).unwrap();
        let text = trajectory_to_csv(&traj);
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "t,x1,x2,u1");
        assert_eq!(lines.len(), 4);
        assert!(lines[3].ends_with(','));
        let back = read_trajectory_csv(text.as_bytes(), "mem").unwrap();
        assert_eq!(back.states(), traj.states());
        assert_eq!(back.controls(), traj.controls());
    }

    #[test]
    fn controls_csv() {
        let u = read_controls_csv("u1,u2\n1,2\n3,4.5\n".as_bytes(), "mem").unwrap();
        assert_eq!(u.len(), 2);
        assert_eq!(u[1].as_slice(), &[3.0, 4.5]);
        assert!(read_controls_csv("u1\n".as_bytes(), "mem").unwrap().is_empty());
        assert!(read_controls_csv("x1\n1\n".as_bytes(), "mem").is_err());
    }
}
