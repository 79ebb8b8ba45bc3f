use std::fmt;
use std::sync::Arc;

use super::coeff::{CoefficientFn, CoefficientSet, PolyTerm, Table1};
use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::oracles::ScalarProblemC;

const WEIGHT_SAMPLES: usize = 1001;

/// A real function of one variable, used for the scalar terminal weight `h(t)`.
#[derive(Clone)]
pub enum ScalarFn {
    Constant(f64),
    /// `intercept + slope * t`
    Affine { intercept: f64, slope: f64 },
    /// Piecewise linear through `(t[i], values[i])`, constant outside.
    Table { t: Vec<f64>, values: Vec<f64> },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarFn::Constant(c) => write!(f, "Constant({c})"),
            ScalarFn::Affine { intercept, slope } => write!(f, "Affine({intercept} + {slope} t)"),
            ScalarFn::Table { t, values } => f
                .debug_struct("Table")
                .field("t", t)
                .field("values", values)
                .finish(),
            ScalarFn::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl ScalarFn {
    pub fn custom<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        ScalarFn::Custom(Arc::new(f))
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            ScalarFn::Constant(c) => *c,
            ScalarFn::Affine { intercept, slope } => intercept + slope * t,
            ScalarFn::Table { t: grid, values } => {
                if t <= grid[0] {
                    return values[0];
                }
                let last = grid.len() - 1;
                if t >= grid[last] {
                    return values[last];
                }
                let i = grid.partition_point(|&g| g <= t) - 1;
                let w = (t - grid[i]) / (grid[i + 1] - grid[i]);
                values[i] * (1.0 - w) + values[i + 1] * w
            }
            ScalarFn::Custom(f) => f(t),
        }
    }

    fn validate(&self) -> Result<()> {
        if let ScalarFn::Table { t, values } = self {
            if t.is_empty() || t.len() != values.len() {
                return Err(Error::InvalidArgument(
                    "h table needs matching non-empty t and values".into(),
                ));
            }
            if t.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::InvalidArgument("h table grid must be increasing".into()));
            }
        }
        Ok(())
    }

    fn to_coefficient(&self) -> CoefficientFn {
        let m = |v: f64| Matrix::from_element(1, 1, v);
        match self {
            ScalarFn::Constant(c) => CoefficientFn::Constant(m(*c)),
            ScalarFn::Affine { intercept, slope } => CoefficientFn::Polynomial(vec![
                PolyTerm { t_pow: 0, s_pow: 0, coeff: m(*intercept) },
                PolyTerm { t_pow: 1, s_pow: 0, coeff: m(*slope) },
            ]),
            ScalarFn::Table { t, values } => CoefficientFn::TableT(Table1 {
                t: t.clone(),
                values: values.iter().map(|&v| m(v)).collect(),
            }),
            ScalarFn::Custom(_) => {
                let h = self.clone();
                CoefficientFn::custom(1, 1, move |t, _| m(h.eval(t)))
            }
        }
    }
}

/// The scalar problem `dX = u ds`, cost `∫ u² ds + h(t) X(T)²`:
/// `n = m = 1`, `A = 0`, `B = 1`, `Q = 0`, `R = 1`, `G(t) = h(t)`.
pub fn make_problem_c(h: ScalarFn, horizon: f64) -> Result<CoefficientSet> {
    h.validate()?;
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidArgument(format!("horizon must be positive, got {horizon}")));
    }
    for i in 0..WEIGHT_SAMPLES {
        let t = horizon * i as f64 / (WEIGHT_SAMPLES - 1) as f64;
        let value = h.eval(t);
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::InvalidTerminalWeight { t, value });
        }
    }
    let m = |v: f64| Matrix::from_element(1, 1, v);
    let set = CoefficientSet::new(
        horizon,
        1,
        1,
        CoefficientFn::Constant(m(0.0)),
        CoefficientFn::Constant(m(1.0)),
        CoefficientFn::Constant(m(0.0)),
        CoefficientFn::Constant(m(1.0)),
        h.to_coefficient(),
    )?;
    Ok(set.with_problem_c(ScalarProblemC::new(h, horizon)?))
}
