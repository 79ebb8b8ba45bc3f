//! Problem-definition files (TOML).
//!
//! ```toml
//! horizon = 1.0
//! state_dim = 2
//! control_dim = 1
//!
//! [coefficients.A]
//! kind = "constant"
//! data = [[0.0, 1.0], [0.0, 0.0]]
//!
//! [coefficients.B]
//! kind = "polynomial"            # sum of coeff * t^t_pow * s^s_pow
//! data = [{ coeff = [[0.0], [1.0]] }, { t_pow = 1, coeff = [[0.0], [0.5]] }]
//!
//! [coefficients.Q]
//! kind = "table"                 # bilinear in (t, s)
//! data = { t = [0.0, 1.0], s = [0.0, 1.0], values = [[[[1, 0], [0, 1]], [[1, 0], [0, 1]]],
//!                                                     [[[2, 0], [0, 2]], [[2, 0], [0, 2]]]] }
//!
//! [coefficients.R]
//! kind = "constant"
//! data = 1.0                     # a bare number is a 1x1 matrix
//!
//! [coefficients.G]
//! kind = "table"                 # no `s` grid: linear in t
//! data = { t = [0.0, 1.0], values = [[[1, 0], [0, 1]], [[2, 0], [0, 2]]] }
//! ```
//!
//! The scalar problem with `A = 0, B = 1, Q = 0, R = 1, G = h` is written as
//!
//! ```toml
//! horizon = 1.0
//! [problem_c.h]
//! kind = "affine"                # or "constant" (data = 2.0) / "table" (data = { t, values })
//! data = { intercept = 1.0, slope = 1.0 }
//! ```

use std::path::Path;

use serde::Deserialize;

use super::coeff::{CoefficientFn, CoefficientSet, PolyTerm, Table1, Table2};
use super::problem_c::{make_problem_c, ScalarFn};
use crate::error::{Error, Result};
use crate::numerics::Matrix;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    horizon: f64,
    state_dim: Option<usize>,
    control_dim: Option<usize>,
    coefficients: Option<RawCoefficients>,
    problem_c: Option<RawProblemC>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct RawCoefficients {
    A: RawCoeff,
    B: RawCoeff,
    Q: RawCoeff,
    R: RawCoeff,
    G: RawCoeff,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblemC {
    h: RawScalar,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum MatrixLit {
    Scalar(f64),
    Rows(Vec<Vec<f64>>),
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "snake_case", deny_unknown_fields)]
enum RawCoeff {
    Constant(MatrixLit),
    Polynomial(Vec<RawTerm>),
    Table(RawTable),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    #[serde(default)]
    t_pow: u32,
    #[serde(default)]
    s_pow: u32,
    coeff: MatrixLit,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTable {
    t: Vec<f64>,
    s: Option<Vec<f64>>,
    values: toml::Value,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "snake_case", deny_unknown_fields)]
enum RawScalar {
    Constant(f64),
    Affine { intercept: f64, slope: f64 },
    Table { t: Vec<f64>, values: Vec<f64> },
}

fn field_err(field: &str, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("{field}: {msg}"))
}

fn to_matrix(lit: &MatrixLit, field: &str) -> Result<Matrix> {
    match lit {
        MatrixLit::Scalar(v) => Ok(Matrix::from_element(1, 1, *v)),
        MatrixLit::Rows(rows) => {
            let nrows = rows.len();
            let ncols = rows.first().map_or(0, Vec::len);
            if nrows == 0 || ncols == 0 {
                return Err(field_err(field, "matrix must be non-empty"));
            }
            if let Some(i) = rows.iter().position(|r| r.len() != ncols) {
                return Err(field_err(
                    field,
                    format!("row {i} has {} entries, expected {ncols}", rows[i].len()),
                ));
            }
            let flat: Vec<f64> = rows.iter().flatten().copied().collect();
            Ok(Matrix::from_row_slice(nrows, ncols, &flat))
        }
    }
}

fn convert_coeff(raw: &RawCoeff, field: &str) -> Result<CoefficientFn> {
    match raw {
        RawCoeff::Constant(lit) => Ok(CoefficientFn::Constant(to_matrix(lit, &format!("{field}.data"))?)),
        RawCoeff::Polynomial(terms) => {
            if terms.is_empty() {
                return Err(field_err(&format!("{field}.data"), "polynomial needs at least one term"));
            }
            let terms = terms
                .iter()
                .enumerate()
                .map(|(i, t)| {
                    Ok(PolyTerm {
                        t_pow: t.t_pow,
                        s_pow: t.s_pow,
                        coeff: to_matrix(&t.coeff, &format!("{field}.data[{i}].coeff"))?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(CoefficientFn::Polynomial(terms))
        }
        RawCoeff::Table(table) => {
            let vfield = format!("{field}.data.values");
            match &table.s {
                Some(s) => {
                    let lits: Vec<Vec<MatrixLit>> = table
                        .values
                        .clone()
                        .try_into()
                        .map_err(|e| field_err(&vfield, format!("expected len(t) x len(s) matrices ({e})")))?;
                    let values = lits
                        .iter()
                        .enumerate()
                        .map(|(i, row)| {
                            row.iter()
                                .enumerate()
                                .map(|(j, lit)| to_matrix(lit, &format!("{vfield}[{i}][{j}]")))
                                .collect::<Result<Vec<_>>>()
                        })
                        .collect::<Result<Vec<_>>>()?;
                    Ok(CoefficientFn::Table(Table2 { t: table.t.clone(), s: s.clone(), values }))
                }
                None => {
                    let lits: Vec<MatrixLit> = table
                        .values
                        .clone()
                        .try_into()
                        .map_err(|e| field_err(&vfield, format!("expected len(t) matrices ({e})")))?;
                    let values = lits
                        .iter()
                        .enumerate()
                        .map(|(i, lit)| to_matrix(lit, &format!("{vfield}[{i}]")))
                        .collect::<Result<Vec<_>>>()?;
                    Ok(CoefficientFn::TableT(Table1 { t: table.t.clone(), values }))
                }
            }
        }
    }
}

fn convert_scalar(raw: &RawScalar) -> ScalarFn {
    match raw {
        RawScalar::Constant(c) => ScalarFn::Constant(*c),
        RawScalar::Affine { intercept, slope } => ScalarFn::Affine { intercept: *intercept, slope: *slope },
        RawScalar::Table { t, values } => ScalarFn::Table { t: t.clone(), values: values.clone() },
    }
}

/// Parses a problem definition from TOML text.
pub fn parse_problem(text: &str) -> Result<CoefficientSet> {
    let raw: RawProblem = toml::from_str(text).map_err(|e| Error::Parse(e.to_string().trim_end().to_string()))?;
    match (&raw.coefficients, &raw.problem_c) {
        (Some(_), Some(_)) => Err(Error::Parse(
            "specify exactly one of `coefficients` and `problem_c`".into(),
        )),
        (None, None) => Err(Error::Parse("missing `coefficients` or `problem_c` table".into())),
        (None, Some(pc)) => {
            for (name, dim) in [("state_dim", raw.state_dim), ("control_dim", raw.control_dim)] {
                if dim.is_some_and(|d| d != 1) {
                    return Err(field_err(name, "problem_c is scalar; dimension must be 1"));
                }
            }
            make_problem_c(convert_scalar(&pc.h), raw.horizon).map_err(|e| field_err("problem_c.h", e))
        }
        (Some(coeffs), None) => {
            let n = raw.state_dim.ok_or_else(|| field_err("state_dim", "required with `coefficients`"))?;
            let m = raw
                .control_dim
                .ok_or_else(|| field_err("control_dim", "required with `coefficients`"))?;
            let a = convert_coeff(&coeffs.A, "coefficients.A")?;
            let b = convert_coeff(&coeffs.B, "coefficients.B")?;
            let q = convert_coeff(&coeffs.Q, "coefficients.Q")?;
            let r = convert_coeff(&coeffs.R, "coefficients.R")?;
            let g = convert_coeff(&coeffs.G, "coefficients.G")?;
            CoefficientSet::new(raw.horizon, n, m, a, b, q, r, g).map_err(|e| match e {
                Error::DimensionMismatch(msg) => field_err("coefficients", msg),
                Error::InvalidArgument(msg) => Error::Parse(msg),
                other => other,
            })
        }
    }
}

pub fn load_problem(path: &Path) -> Result<CoefficientSet> {
    let text = std::fs::read_to_string(path)?;
    parse_problem(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn problem_c_affine() {
        let c = parse_problem(
            "horizon = 1.0\n[problem_c.h]\nkind = \"affine\"\ndata = { intercept = 1.0, slope = 1.0 }\n",
        )
        .unwrap();
        assert_eq!(c.g(0.5)[(0, 0)], 1.5);
        assert!(c.problem_c().is_some());
    }

    #[test]
    fn problem_c_integer_constant() {
        let c = parse_problem("horizon = 1\n[problem_c.h]\nkind = \"constant\"\ndata = 2\n").unwrap();
        assert_eq!(c.g(0.3)[(0, 0)], 2.0);
    }

    #[test]
    fn general_problem_with_all_kinds() {
        let text = r#"
horizon = 1.0
state_dim = 2
control_dim = 1

[coefficients.A]
kind = "constant"
data = [[0.0, 1.0], [0.0, 0.0]]

[coefficients.B]
kind = "polynomial"
data = [{ coeff = [[0.0], [1.0]] }, { t_pow = 1, coeff = [[0.0], [0.5]] }]

[coefficients.Q]
kind = "table"
data = { t = [0.0, 1.0], s = [0.0, 1.0], values = [[[[1, 0], [0, 1]], [[1, 0], [0, 1]]], [[[2, 0], [0, 2]], [[2, 0], [0, 2]]]] }

[coefficients.R]
kind = "constant"
data = 1.0

[coefficients.G]
kind = "table"
data = { t = [0.0, 1.0], values = [[[1, 0], [0, 1]], [[3, 0], [0, 3]]] }
"#;
        let c = parse_problem(text).unwrap();
        assert_eq!(c.state_dim(), 2);
        assert_eq!(c.b(0.5, 0.0)[(1, 0)], 1.25);
        assert!((c.q(0.5, 0.3)[(0, 0)] - 1.5).abs() < 1e-15);
        assert_eq!(c.g(0.5)[(1, 1)], 2.0);
    }

    #[test]
    fn dimension_error_names_field() {
        let text = r#"
horizon = 1.0
state_dim = 2
control_dim = 1
[coefficients.A]
kind = "constant"
data = [[0.0, 1.0], [0.0]]
[coefficients.B]
kind = "constant"
data = [[0.0], [1.0]]
[coefficients.Q]
kind = "constant"
data = [[1.0, 0.0], [0.0, 1.0]]
[coefficients.R]
kind = "constant"
data = 1.0
[coefficients.G]
kind = "constant"
data = [[1.0, 0.0], [0.0, 1.0]]
"#;
        let msg = parse_problem(text).unwrap_err().to_string();
        assert!(msg.contains("coefficients.A.data"), "{msg}");
    }

    #[test]
    fn syntax_error_carries_line() {
        let msg = parse_problem("horizon = 1.0\n[problem_c.h\nkind = 3\n")
            .unwrap_err()
            .to_string();
        assert!(msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn unknown_kind_rejected() {
        let msg = parse_problem("horizon = 1.0\n[problem_c.h]\nkind = \"cubic\"\ndata = 1.0\n")
            .unwrap_err()
            .to_string();
        assert!(msg.contains("cubic"), "{msg}");
    }

    #[test]
    fn non_positive_h_rejected() {
        let err = parse_problem("horizon = 1.0\n[problem_c.h]\nkind = \"constant\"\ndata = 0.0\n").unwrap_err();
        assert!(err.to_string().contains("problem_c.h"));
    }
}
