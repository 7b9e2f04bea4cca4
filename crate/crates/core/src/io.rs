//! Problem files (JSON), iteration traces (CSV) and solution summaries.
//!
//! Reals are written as shortest round-trip decimals, so reading back a file
//! reproduces every number bit for bit.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cones::ConeSpec;
use crate::error::{Error, Result};
use crate::hsd::{ConicProblem, Status};
use crate::linalg::DenseMatrix;
use crate::solver::{IterationRecord, Mode, SolveResult, Termination};

/// On-disk form of a conic problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub m: usize,
    pub n: usize,
    /// `[row, col, value]`, 0-based; duplicates are summed.
    #[serde(rename = "A")]
    pub a: Vec<(usize, usize, f64)>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub cones: Vec<ConeEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeEntry {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

impl ConeEntry {
    fn to_spec(&self, index: usize) -> Result<ConeSpec> {
        let ctx = |msg: String| Error::InvalidCone(format!("cones[{index}]: {msg}"));
        match self.kind.as_str() {
            "nonneg" => {
                if self.alpha.is_some() {
                    return Err(ctx("\"alpha\" is only valid for \"pow\"".into()));
                }
                match self.dim {
                    Some(d) if d >= 1 => Ok(ConeSpec::NonnegOrthant(d)),
                    Some(_) => Err(ctx("\"dim\" must be at least 1".into())),
                    None => Err(ctx("\"nonneg\" needs \"dim\"".into())),
                }
            }
            "exp" | "pow" => {
                if let Some(d) = self.dim.filter(|&d| d != 3) {
                    return Err(ctx(format!("\"{}\" has dimension 3, not {d}", self.kind)));
                }
                if self.kind == "exp" {
                    if self.alpha.is_some() {
                        return Err(ctx("\"alpha\" is only valid for \"pow\"".into()));
                    }
                    return Ok(ConeSpec::Exponential);
                }
                match self.alpha {
                    Some(a) if a > 0.0 && a < 1.0 => Ok(ConeSpec::Power(a)),
                    Some(a) => Err(ctx(format!("power exponent {a} is outside (0, 1)"))),
                    None => Err(ctx("\"pow\" needs \"alpha\"".into())),
                }
            }
            other => Err(Error::UnknownConeType(other.to_string())),
        }
    }

    fn from_spec(spec: &ConeSpec) -> Vec<Self> {
        match spec {
            ConeSpec::NonnegOrthant(d) => vec![Self {
                kind: "nonneg".into(),
                dim: Some(*d),
                alpha: None,
            }],
            ConeSpec::Exponential => vec![Self {
                kind: "exp".into(),
                dim: Some(3),
                alpha: None,
            }],
            ConeSpec::Power(a) => vec![Self {
                kind: "pow".into(),
                dim: Some(3),
                alpha: Some(*a),
            }],
            ConeSpec::Product(parts) => parts.iter().flat_map(Self::from_spec).collect(),
        }
    }
}

impl ProblemFile {
    pub fn from_problem(problem: &ConicProblem) -> Self {
        let (m, n) = (problem.m(), problem.n());
        let mut a = Vec::new();
        for i in 0..m {
            for j in 0..n {
                let v = problem.a.get(i, j);
                if v != 0.0 {
                    a.push((i, j, v));
                }
            }
        }
        Self {
            m,
            n,
            a,
            b: problem.b.clone(),
            c: problem.c.clone(),
            cones: ConeEntry::from_spec(&problem.cone),
        }
    }

    /// Validates the file and builds the problem. A single cone entry becomes
    /// that cone; several become their product.
    pub fn to_problem(&self) -> Result<ConicProblem> {
        let (m, n) = (self.m, self.n);
        if self.b.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "\"b\" has {} entries, m = {m}",
                self.b.len()
            )));
        }
        if self.c.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "\"c\" has {} entries, n = {n}",
                self.c.len()
            )));
        }
        let mut a = DenseMatrix::zeros(m, n);
        for (k, &(i, j, v)) in self.a.iter().enumerate() {
            if i >= m || j >= n {
                return Err(Error::DimensionMismatch(format!(
                    "A[{k}] = [{i}, {j}, {v}] is outside the {m}x{n} matrix"
                )));
            }
            a.set(i, j, a.get(i, j) + v);
        }
        if self.cones.is_empty() {
            return Err(Error::InvalidCone("\"cones\" is empty".into()));
        }
        let mut parts = self
            .cones
            .iter()
            .enumerate()
            .map(|(k, c)| c.to_spec(k))
            .collect::<Result<Vec<_>>>()?;
        let cone = if parts.len() == 1 {
            parts.remove(0)
        } else {
            ConeSpec::Product(parts)
        };
        if cone.dim() != n {
            return Err(Error::DimensionMismatch(format!(
                "cone dimensions sum to {}, n = {n}",
                cone.dim()
            )));
        }
        ConicProblem::new(a, self.b.clone(), self.c.clone(), cone)
    }
}

pub fn parse_problem_str(text: &str) -> Result<ConicProblem> {
    let file: ProblemFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.to_problem()
}

pub fn parse_problem(path: impl AsRef<Path>) -> Result<ConicProblem> {
    let path = path.as_ref();
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    parse_problem_str(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn problem_to_string(problem: &ConicProblem) -> String {
    serde_json::to_string_pretty(&ProblemFile::from_problem(problem))
        .expect("problem files always serialize")
}

pub fn write_problem(path: impl AsRef<Path>, problem: &ConicProblem) -> Result<()> {
    let mut f = File::create(path)?;
    f.write_all(problem_to_string(problem).as_bytes())?;
    f.write_all(b"\n")?;
    Ok(())
}

pub const TRACE_HEADER: [&str; 14] = [
    "iter",
    "mu_e",
    "res_norm",
    "tau",
    "kappa",
    "delta_p_norm_x",
    "alpha",
    "gamma",
    "a1",
    "a2",
    "a3",
    "a4",
    "a5",
    "verdict_failures",
];

#[derive(Debug, Serialize, Deserialize)]
struct TraceRow {
    iter: usize,
    mu_e: f64,
    res_norm: f64,
    tau: f64,
    kappa: f64,
    delta_p_norm_x: f64,
    alpha: f64,
    gamma: f64,
    a1: u8,
    a2: u8,
    a3: u8,
    a4: u8,
    a5: u8,
    verdict_failures: usize,
}

impl From<&IterationRecord> for TraceRow {
    fn from(r: &IterationRecord) -> Self {
        let [a1, a2, a3, a4, a5] = r.assumptions.map(u8::from);
        Self {
            iter: r.iter,
            mu_e: r.mu_e,
            res_norm: r.res_norm,
            tau: r.tau,
            kappa: r.kappa,
            delta_p_norm_x: r.delta_p_norm_x,
            alpha: r.alpha,
            gamma: r.gamma,
            a1,
            a2,
            a3,
            a4,
            a5,
            verdict_failures: r.verdict_failures,
        }
    }
}

impl TraceRow {
    fn into_record(self, line: u64) -> Result<IterationRecord> {
        let flags = [self.a1, self.a2, self.a3, self.a4, self.a5];
        if let Some(k) = flags.iter().position(|&f| f > 1) {
            return Err(Error::Parse(format!(
                "line {line}: field a{} must be 0 or 1",
                k + 1
            )));
        }
        Ok(IterationRecord {
            iter: self.iter,
            mu_e: self.mu_e,
            res_norm: self.res_norm,
            tau: self.tau,
            kappa: self.kappa,
            delta_p_norm_x: self.delta_p_norm_x,
            alpha: self.alpha,
            gamma: self.gamma,
            assumptions: flags.map(|f| f == 1),
            verdict_failures: self.verdict_failures,
            scaling_fallback: false,
            report: None,
            audit: None,
        })
    }
}

pub fn write_trace_to<W: Write>(out: W, records: &[IterationRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(TraceRow::from(r)).map_err(csv_error)?;
    }
    if records.is_empty() {
        w.write_record(TRACE_HEADER).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trace(path: impl AsRef<Path>, records: &[IterationRecord]) -> Result<()> {
    write_trace_to(File::create(path)?, records)
}

/// Reads a trace. Only the CSV columns survive: the scaling fallback flag,
/// the neighborhood report and the step audit are not stored.
pub fn read_trace_from<R: Read>(input: R) -> Result<Vec<IterationRecord>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(csv_error)?.clone();
    if header.iter().ne(TRACE_HEADER.iter().copied()) {
        return Err(Error::Parse(format!(
            "trace header is `{}`, expected `{}`",
            header.iter().collect::<Vec<_>>().join(","),
            TRACE_HEADER.join(",")
        )));
    }
    let mut out = Vec::new();
    for row in r.deserialize::<TraceRow>() {
        let row = row.map_err(csv_error)?;
        let line = out.len() as u64 + 2;
        out.push(row.into_record(line)?);
    }
    Ok(out)
}

pub fn read_trace(path: impl AsRef<Path>) -> Result<Vec<IterationRecord>> {
    read_trace_from(File::open(path)?)
}

fn csv_error(e: csv::Error) -> Error {
    let at = e
        .position()
        .map(|p| format!("line {}: ", p.line()))
        .unwrap_or_default();
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        kind => Error::Parse(format!("{at}{kind:?}")),
    }
}

/// What `solve --json-out` writes: the classified solution without the trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionReport {
    pub status: Status,
    pub termination: Termination,
    pub mode: Mode,
    pub iterations: usize,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub mu_e: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub s: Vec<f64>,
    pub tau: f64,
    pub kappa: f64,
    pub verdicts_checked: usize,
    pub verdicts_applicable: usize,
    pub verdict_failures: usize,
    pub reading_violations: usize,
}

impl SolutionReport {
    pub fn new(r: &SolveResult) -> Self {
        Self {
            status: r.status,
            termination: r.termination,
            mode: r.mode,
            iterations: r.iterations,
            primal_objective: r.primal_objective,
            dual_objective: r.dual_objective,
            primal_residual: r.primal_residual,
            dual_residual: r.dual_residual,
            mu_e: r.mu_e,
            x: r.classification.x.clone(),
            y: r.classification.y.clone(),
            s: r.classification.s.clone(),
            tau: r.final_point.tau,
            kappa: r.final_point.kappa,
            verdicts_checked: r.verdicts.checked + r.fixed_parameter_checks.len(),
            verdicts_applicable: r.verdicts.applicable
                + r.fixed_parameter_checks
                    .iter()
                    .filter(|v| v.applicable)
                    .count(),
            verdict_failures: r.verdict_failures(),
            reading_violations: r.verdicts.reading_violations,
        }
    }
}

pub fn write_solution(path: impl AsRef<Path>, r: &SolveResult) -> Result<()> {
    let text =
        serde_json::to_string_pretty(&SolutionReport::new(r)).expect("reports always serialize");
    let mut f = File::create(path)?;
    f.write_all(text.as_bytes())?;
    f.write_all(b"\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems;
    use crate::solver::{solve, SolverConfig};

    const MINIMAL_LP: &str = r#"{"m": 1, "n": 2, "A": [[0, 0, 1.0], [0, 1, 1.0]],
        "b": [1.0], "c": [1.0, 2.0], "cones": [{"type": "nonneg", "dim": 2}]}"#;

    #[test]
    fn minimal_lp_parses() {
        let p = parse_problem_str(MINIMAL_LP).unwrap();
        assert_eq!(p, problems::tiny_lp());
    }

    #[test]
    fn duplicate_triplets_are_summed() {
        let text = MINIMAL_LP.replace("[0, 1, 1.0]]", "[0, 1, 0.25], [0, 1, 0.75]]");
        let p = parse_problem_str(&text).unwrap();
        assert_eq!(p.a.get(0, 1), 1.0);
    }

    #[test]
    fn power_exponent_outside_unit_interval_is_rejected() {
        let text = r#"{"m": 0, "n": 3, "A": [], "b": [], "c": [0, 0, 1],
            "cones": [{"type": "pow", "alpha": 1.2}]}"#;
        assert!(matches!(
            parse_problem_str(text),
            Err(Error::InvalidCone(_))
        ));
    }

    #[test]
    fn unknown_cone_type_is_rejected() {
        let text = MINIMAL_LP.replace("\"nonneg\"", "\"psd\"");
        assert!(matches!(parse_problem_str(&text), Err(Error::UnknownConeType(t)) if t == "psd"));
    }

    #[test]
    fn cone_dimensions_must_sum_to_n() {
        let text = MINIMAL_LP.replace("\"dim\": 2", "\"dim\": 1");
        assert!(matches!(
            parse_problem_str(&text),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn out_of_range_triplet_is_rejected() {
        let text = MINIMAL_LP.replace("[0, 1, 1.0]", "[1, 1, 1.0]");
        assert!(matches!(
            parse_problem_str(&text),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn malformed_json_reports_position() {
        let err = parse_problem_str("{\"m\": 1,\n \"n\": }").unwrap_err();
        let Error::Parse(msg) = err else {
            panic!("{err:?}")
        };
        assert!(msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn product_cone_round_trips() {
        let text = r#"{"m": 1, "n": 5, "A": [[0, 0, 1.0], [0, 3, -0.1]], "b": [1.0],
            "c": [1.0, 0.5, 0, 0, -1],
            "cones": [{"type": "nonneg", "dim": 2}, {"type": "pow", "dim": 3, "alpha": 0.3}]}"#;
        let p = parse_problem_str(text).unwrap();
        assert_eq!(p.cone.dim(), 5);
        assert_eq!(parse_problem_str(&problem_to_string(&p)).unwrap(), p);
    }

    #[test]
    fn trace_round_trips_exactly() {
        let r = solve(&problems::tiny_lp(), &SolverConfig::adaptive(1e-6)).unwrap();
        let mut buf = Vec::new();
        write_trace_to(&mut buf, &r.trace).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(&TRACE_HEADER.join(",")));
        let back = read_trace_from(buf.as_slice()).unwrap();
        assert_eq!(back.len(), r.trace.len());
        for (a, b) in back.iter().zip(&r.trace) {
            assert_eq!(a.mu_e.to_bits(), b.mu_e.to_bits());
            assert_eq!(a.delta_p_norm_x.to_bits(), b.delta_p_norm_x.to_bits());
            assert_eq!(a.assumptions, b.assumptions);
        }
    }

    #[test]
    fn corrupted_trace_is_a_parse_error() {
        let text = TRACE_HEADER.join(",") + "\n0,1.0,abc,1,1,0,0,0,1,1,1,1,1,0\n";
        assert!(matches!(
            read_trace_from(text.as_bytes()),
            Err(Error::Parse(_))
        ));
        let flags = TRACE_HEADER.join(",") + "\n0,1.0,1,1,1,0,0,0,2,1,1,1,1,0\n";
        assert!(matches!(
            read_trace_from(flags.as_bytes()),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            read_trace_from("iter,mu\n0,1\n".as_bytes()),
            Err(Error::Parse(_))
        ));
    }
}
