//! JSON and CSV formats.
//!
//! * Step graphon: `{"breakpoints": [...], "blocks": [[...], ...], "bound": K}`.
//! * Finite network: `{"weights": [[...], ...], "row_bound": C}` (bound optional)
//!   or a dense CSV matrix (an optional non-numeric header row is skipped).
//! * Sampled step function: CSV `x,u` where `u` holds on `(x_prev, x]` and the
//!   first cell starts at 0.
//!
//! All CSV output is comma-separated with a header row and `\n` line endings;
//! floats use the shortest representation that round-trips.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::graphon::{FiniteNetwork, Partition, StepGraphon};
use crate::ode::Trajectory;
use crate::piecewise::PiecewiseFn;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepGraphonJson {
    pub breakpoints: Vec<f64>,
    pub blocks: Vec<Vec<f64>>,
    pub bound: f64,
}

impl From<&StepGraphon> for StepGraphonJson {
    fn from(g: &StepGraphon) -> Self {
        StepGraphonJson {
            breakpoints: g.partition().breakpoints().to_vec(),
            blocks: rows_of(g.blocks()),
            bound: g.bound(),
        }
    }
}

impl TryFrom<&StepGraphonJson> for StepGraphon {
    type Error = Error;

    fn try_from(j: &StepGraphonJson) -> Result<Self> {
        let blocks = matrix_from_rows(&j.blocks).map_err(|e| Error::InvalidGraphon(e.to_string()))?;
        StepGraphon::new(Partition::new(j.breakpoints.clone())?, blocks, j.bound)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkJson {
    pub weights: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub row_bound: Option<f64>,
}

impl TryFrom<&NetworkJson> for FiniteNetwork {
    type Error = Error;

    fn try_from(j: &NetworkJson) -> Result<Self> {
        let w = matrix_from_rows(&j.weights).map_err(|e| Error::InvalidNetwork(e.to_string()))?;
        match j.row_bound {
            Some(c) => FiniteNetwork::with_row_bound(w, c),
            None => FiniteNetwork::new(w),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: String, source: serde_json::Error },
    #[error("{path}: {source}")]
    Csv { path: String, source: csv::Error },
    #[error("{path}: {msg}")]
    Format { path: String, msg: String },
    #[error(transparent)]
    Model(#[from] Error),
}

pub fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().find(|r| r.len() != m) {
        return Err(Error::DimensionMismatch { expected: m, got: bad.len() });
    }
    Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

fn read_to_string(path: &Path) -> Result<String, IoError> {
    let mut s = String::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_string(&mut s))
        .map_err(|source| IoError::File { path: path.display().to_string(), source })?;
    Ok(s)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, IoError> {
    let s = read_to_string(path)?;
    serde_json::from_str(&s).map_err(|source| IoError::Json { path: path.display().to_string(), source })
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serialisable values are finite");
    s.push('\n');
    s
}

pub fn write_file(path: &Path, contents: &[u8]) -> Result<(), IoError> {
    std::fs::File::create(path)
        .and_then(|mut f| f.write_all(contents))
        .map_err(|source| IoError::File { path: path.display().to_string(), source })
}

pub fn read_graphon_json(path: &Path) -> Result<StepGraphon, IoError> {
    let j: StepGraphonJson = read_json(path)?;
    Ok(StepGraphon::try_from(&j)?)
}

/// Network from `.json` or dense `.csv`, by extension.
pub fn read_network(path: &Path) -> Result<FiniteNetwork, IoError> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        let j: NetworkJson = read_json(path)?;
        Ok(FiniteNetwork::try_from(&j)?)
    } else {
        let rows = read_numeric_csv(path)?;
        let w = matrix_from_rows(&rows)?;
        Ok(FiniteNetwork::new(w)?)
    }
}

/// Rows of numbers; a first row that does not parse is taken as a header.
pub fn read_numeric_csv(path: &Path) -> Result<Vec<Vec<f64>>, IoError> {
    let p = path.display().to_string();
    let s = read_to_string(path)?;
    let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(s.as_bytes());
    let mut rows = Vec::new();
    for (k, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|source| IoError::Csv { path: p.clone(), source })?;
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(r) => rows.push(r),
            Err(_) if k == 0 => continue,
            Err(e) => return Err(IoError::Format { path: p, msg: format!("row {}: {e}", k + 1) }),
        }
    }
    Ok(rows)
}

/// Sampled step function from an `x,u` CSV.
pub fn read_step_csv(path: &Path) -> Result<PiecewiseFn, IoError> {
    let p = path.display().to_string();
    let rows = read_numeric_csv(path)?;
    if rows.iter().any(|r| r.len() != 2) {
        return Err(IoError::Format { path: p, msg: "expected two columns x,u".into() });
    }
    let mut edges = vec![0.0];
    edges.extend(rows.iter().map(|r| r[0]));
    let values = rows.iter().map(|r| r[1]).collect();
    Ok(PiecewiseFn::new(edges, values)?)
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Vec<u8> {
    w.into_inner().expect("in-memory writer")
}

/// `x,u` rows for the given sample points.
pub fn samples_csv(f: &PiecewiseFn, xs: &[f64]) -> Vec<u8> {
    let mut w = csv_writer();
    w.write_record(["x", "u"]).expect("in-memory");
    for &x in xs {
        w.write_record([x.to_string(), f.eval(x).to_string()]).expect("in-memory");
    }
    finish(w)
}

/// `n` uniform points at cell midpoints `(k + 1/2) / n`.
pub fn midpoint_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| (k as f64 + 0.5) / n as f64).collect()
}

/// Long format: `t,i,u` with agents numbered from 1.
pub fn trajectory_long_csv(traj: &Trajectory) -> Vec<u8> {
    let mut w = csv_writer();
    w.write_record(["t", "i", "u"]).expect("in-memory");
    for (t, state) in traj.times.iter().zip(&traj.states) {
        for (i, u) in state.iter().enumerate() {
            w.write_record([t.to_string(), (i + 1).to_string(), u.to_string()]).expect("in-memory");
        }
    }
    finish(w)
}

/// Wide format: `t,u_1,...,u_M`.
pub fn trajectory_wide_csv(traj: &Trajectory) -> Vec<u8> {
    let m = traj.states.first().map_or(0, Vec::len);
    let mut w = csv_writer();
    let mut header = vec!["t".to_string()];
    header.extend((1..=m).map(|i| format!("u_{i}")));
    w.write_record(&header).expect("in-memory");
    for (t, state) in traj.times.iter().zip(&traj.states) {
        let mut row = vec![t.to_string()];
        row.extend(state.iter().map(f64::to_string));
        w.write_record(&row).expect("in-memory");
    }
    finish(w)
}

/// `i,x,u` with `x` the midpoint of agent `i`'s cell.
pub fn agents_csv(u: &[f64]) -> Vec<u8> {
    let m = u.len();
    let mut w = csv_writer();
    w.write_record(["i", "x", "u"]).expect("in-memory");
    for (i, v) in u.iter().enumerate() {
        w.write_record([(i + 1).to_string(), ((i as f64 + 0.5) / m as f64).to_string(), v.to_string()])
            .expect("in-memory");
    }
    finish(w)
}

pub fn convergence_csv(rows: &[crate::ConvergenceRow]) -> Vec<u8> {
    let mut w = csv_writer();
    w.write_record(["M", "l2_error"]).expect("in-memory");
    for r in rows {
        w.write_record([r.agents.to_string(), r.l2_error.to_string()]).expect("in-memory");
    }
    finish(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn graphon_json_round_trip() {
        let g = StepGraphon::new(
            Partition::new(vec![0.0, 0.1, 1.0 / 3.0, 1.0]).unwrap(),
            DMatrix::from_row_slice(3, 3, &[0.1, -0.2, 0.3, -0.2, 1.0 / 7.0, 2.0, 0.3, 2.0, -1e-17]),
            2.5,
        )
        .unwrap();
        let s = to_json(&StepGraphonJson::from(&g));
        let back: StepGraphonJson = serde_json::from_str(&s).unwrap();
        assert_eq!(StepGraphon::try_from(&back).unwrap(), g);
        assert!(s.find("breakpoints").unwrap() < s.find("blocks").unwrap());
    }

    #[test]
    fn ragged_blocks_rejected() {
        let j = StepGraphonJson { breakpoints: vec![0.0, 0.5, 1.0], blocks: vec![vec![1.0, 0.0], vec![0.0]], bound: 1.0 };
        assert!(StepGraphon::try_from(&j).is_err());
    }

    #[test]
    fn csv_layouts() {
        let traj = Trajectory { times: vec![0.0, 0.5], states: vec![vec![1.0, -1.0], vec![0.25, -0.25]] };
        let long = String::from_utf8(trajectory_long_csv(&traj)).unwrap();
        assert_eq!(long, "t,i,u\n0,1,1\n0,2,-1\n0.5,1,0.25\n0.5,2,-0.25\n");
        let wide = String::from_utf8(trajectory_wide_csv(&traj)).unwrap();
        assert_eq!(wide, "t,u_1,u_2\n0,1,-1\n0.5,0.25,-0.25\n");
        let agents = String::from_utf8(agents_csv(&[3.0, 4.0])).unwrap();
        assert_eq!(agents, "i,x,u\n1,0.25,3\n2,0.75,4\n");
    }

    #[test]
    fn numeric_csv_with_and_without_header() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.csv");
        std::fs::write(&a, "0,1\n1,0\n").unwrap();
        let b = dir.path().join("b.csv");
        std::fs::write(&b, "c1,c2\n0, 1\n1, 0\n").unwrap();
        assert_eq!(read_numeric_csv(&a).unwrap(), read_numeric_csv(&b).unwrap());
        let net = read_network(&a).unwrap();
        assert_eq!(net.size(), 2);
        let bad = dir.path().join("c.csv");
        std::fs::write(&bad, "0,1\n1,x\n").unwrap();
        assert!(read_network(&bad).is_err());
    }

    #[test]
    fn step_csv() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("u0.csv");
        std::fs::write(&p, "x,u\n0.25,1\n1,3\n").unwrap();
        let f = read_step_csv(&p).unwrap();
        assert_eq!(f.edges(), &[0.0, 0.25, 1.0]);
        assert_eq!(f.integral(), 0.25 + 2.25);
    }

    proptest! {
        #[test]
        fn samples_csv_round_trips_values(vals in prop::collection::vec(-1e6f64..1e6, 1..16)) {
            let f = PiecewiseFn::uniform(vals.clone()).unwrap();
            let xs = midpoint_grid(vals.len());
            let text = String::from_utf8(samples_csv(&f, &xs)).unwrap();
            let parsed: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
            prop_assert_eq!(parsed, vals);
        }
    }
}
