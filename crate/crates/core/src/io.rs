//! Problem and matrix files.
//!
//! A problem file is a JSON object
//!
//! ```json
//! {
//!   "dimension": 2,
//!   "terms": [
//!     {
//!       "weight": 1.0,
//!       "state": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]],
//!       "operator": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, -1.0]]]
//!     }
//!   ]
//! }
//! ```
//!
//! where every matrix is a list of rows and every entry a `[re, im]` pair.
//! A matrix file holds one such nested array.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Complex;
use serde::Deserialize;

use crate::ensemble::{EnsembleProblem, Term};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{real, to_f64, Real};

type RawMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    weight: f64,
    state: RawMatrix,
    operator: RawMatrix,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    dimension: usize,
    terms: Vec<RawTerm>,
}

fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

fn to_matrix<T: Real>(raw: &RawMatrix, dim: Option<usize>, field: &str) -> Result<CMatrix<T>> {
    let n = dim.unwrap_or(raw.len());
    if raw.len() != n {
        return Err(Error::Field {
            field: field.into(),
            message: format!("expected {n} rows, found {}", raw.len()),
        });
    }
    for (i, row) in raw.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Field {
                field: format!("{field}[{i}]"),
                message: format!("expected {n} entries, found {}", row.len()),
            });
        }
    }
    Ok(CMatrix::<T>::from_fn(n, n, |i, j| {
        let [re, im] = raw[i][j];
        Complex::new(real(re), real(im))
    }))
}

/// Parses problem-file text.
pub fn parse_problem<T: Real>(text: &str) -> Result<EnsembleProblem<T>> {
    let raw: RawProblem = serde_json::from_str(text).map_err(parse_error)?;
    let terms = raw
        .terms
        .iter()
        .enumerate()
        .map(|(m, t)| {
            Ok(Term::new(
                real(t.weight),
                to_matrix(&t.state, Some(raw.dimension), &format!("terms[{m}].state"))?,
                to_matrix(&t.operator, Some(raw.dimension), &format!("terms[{m}].operator"))?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    EnsembleProblem::new(raw.dimension, terms)
}

pub fn load_problem<T: Real>(path: impl AsRef<Path>) -> Result<EnsembleProblem<T>> {
    parse_problem(&std::fs::read_to_string(path)?)
}

fn number(x: f64) -> String {
    serde_json::to_string(&x).expect("finite number")
}

fn write_matrix<T: Real>(out: &mut String, x: &CMatrix<T>, indent: &str) {
    out.push_str("[\n");
    for i in 0..x.nrows() {
        out.push_str(indent);
        out.push_str("  [");
        for j in 0..x.ncols() {
            if j > 0 {
                out.push_str(", ");
            }
            let z = x[(i, j)];
            let _ = write!(out, "[{}, {}]", number(to_f64(z.re)), number(to_f64(z.im)));
        }
        out.push(']');
        if i + 1 < x.nrows() {
            out.push(',');
        }
        out.push('\n');
    }
    out.push_str(indent);
    out.push(']');
}

/// Serializes a problem with one matrix row per line. Numbers use the
/// shortest representation that round-trips exactly.
pub fn problem_to_string<T: Real>(problem: &EnsembleProblem<T>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{{\n  \"dimension\": {},\n  \"terms\": [", problem.dimension());
    for (m, t) in problem.terms().iter().enumerate() {
        let _ = writeln!(out, "    {{\n      \"weight\": {},", number(to_f64(t.weight)));
        out.push_str("      \"state\": ");
        write_matrix(&mut out, &t.state, "      ");
        out.push_str(",\n      \"operator\": ");
        write_matrix(&mut out, &t.operator, "      ");
        out.push_str("\n    }");
        if m + 1 < problem.len() {
            out.push(',');
        }
        out.push('\n');
    }
    out.push_str("  ]\n}");
    out
}

pub fn save_problem<T: Real>(problem: &EnsembleProblem<T>, path: impl AsRef<Path>) -> Result<()> {
    let mut text = problem_to_string(problem);
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Parses a square matrix file.
pub fn parse_matrix<T: Real>(text: &str) -> Result<CMatrix<T>> {
    let raw: RawMatrix = serde_json::from_str(text).map_err(parse_error)?;
    if raw.is_empty() {
        return Err(Error::Field {
            field: "matrix".into(),
            message: "matrix is empty".into(),
        });
    }
    to_matrix(&raw, None, "matrix")
}

pub fn load_matrix<T: Real>(path: impl AsRef<Path>) -> Result<CMatrix<T>> {
    parse_matrix(&std::fs::read_to_string(path)?)
}

pub fn matrix_to_string<T: Real>(x: &CMatrix<T>) -> String {
    let mut out = String::new();
    write_matrix(&mut out, x, "");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;
    use crate::random::{random_problem, random_unitary};

    #[test]
    fn round_trip_is_bitwise() {
        for p in [bundled::opt1::<f64>(), random_problem(11, 3, 2)] {
            let back: EnsembleProblem<f64> = parse_problem(&problem_to_string(&p)).unwrap();
            assert_eq!(back, p);
        }
    }

    #[test]
    fn negative_weight_is_invalid_state() {
        let text = bundled::file_contents("opt1")
            .unwrap()
            .replacen("\"weight\": 0.3333333333333333", "\"weight\": -0.1", 1);
        assert!(matches!(
            parse_problem::<f64>(&text),
            Err(Error::InvalidState { term: 0, .. })
        ));
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse_problem::<f64>("{\n  \"dimension\": 2,\n  \"terms\": [,]\n}").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn shape_errors_name_the_field() {
        let text = r#"{"dimension": 2, "terms": [{"weight": 1,
            "state": [[[1,0],[0,0]],[[0,0]]],
            "operator": [[[1,0],[0,0]],[[0,0],[0,0]]]}]}"#;
        match parse_problem::<f64>(text).unwrap_err() {
            Error::Field { field, .. } => assert_eq!(field, "terms[0].state[1]"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn exponent_notation_accepted() {
        let text = r#"{"dimension": 1, "terms": [{"weight": 5e-1,
            "state": [[[1E0, 0]]], "operator": [[[2.5e+0, 0.0]]]}]}"#;
        let p = parse_problem::<f64>(text).unwrap();
        assert_eq!(p.terms()[0].weight, 0.5);
        assert_eq!(p.terms()[0].operator[(0, 0)].re, 2.5);
    }

    #[test]
    fn matrix_round_trip() {
        let u = random_unitary::<f64>(5, 3);
        assert_eq!(parse_matrix::<f64>(&matrix_to_string(&u)).unwrap(), u);
    }
}
