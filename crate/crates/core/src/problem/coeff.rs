use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::{Matrix, SymMatrix};
use crate::oracles::ScalarProblemC;

/// One monomial `coeff · t^t_pow · s^s_pow` of a polynomial coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyTerm {
    pub t_pow: u32,
    pub s_pow: u32,
    pub coeff: Matrix,
}

/// Matrix values on a tensor grid in `(t, s)`, bilinearly interpolated.
#[derive(Debug, Clone, PartialEq)]
pub struct Table2 {
    pub t: Vec<f64>,
    pub s: Vec<f64>,
    /// `values[i][j]` is the matrix at `(t[i], s[j])`.
    pub values: Vec<Vec<Matrix>>,
}

/// Matrix values on a grid in `t` only, linearly interpolated.
#[derive(Debug, Clone, PartialEq)]
pub struct Table1 {
    pub t: Vec<f64>,
    pub values: Vec<Matrix>,
}

type DynFn = dyn Fn(f64, f64) -> Matrix + Send + Sync;

/// A matrix-valued function of `(t, s)`.
#[derive(Clone)]
pub enum CoefficientFn {
    Constant(Matrix),
    Polynomial(Vec<PolyTerm>),
    Table(Table2),
    TableT(Table1),
    Custom {
        rows: usize,
        cols: usize,
        f: Arc<DynFn>,
    },
}

impl fmt::Debug for CoefficientFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoefficientFn::Constant(m) => f.debug_tuple("Constant").field(m).finish(),
            CoefficientFn::Polynomial(t) => f.debug_tuple("Polynomial").field(t).finish(),
            CoefficientFn::Table(t) => f.debug_tuple("Table").field(t).finish(),
            CoefficientFn::TableT(t) => f.debug_tuple("TableT").field(t).finish(),
            CoefficientFn::Custom { rows, cols, .. } => {
                write!(f, "Custom({rows}x{cols})")
            }
        }
    }
}

fn bracket(grid: &[f64], x: f64) -> (usize, f64) {
    if grid.len() == 1 {
        return (0, 0.0);
    }
    let last = grid.len() - 1;
    let i = match grid.iter().rposition(|&g| g <= x) {
        Some(i) => i.min(last - 1),
        None => 0,
    };
    let w = ((x - grid[i]) / (grid[i + 1] - grid[i])).clamp(0.0, 1.0);
    (i, w)
}

impl CoefficientFn {
    pub fn custom<F>(rows: usize, cols: usize, f: F) -> Self
    where
        F: Fn(f64, f64) -> Matrix + Send + Sync + 'static,
    {
        CoefficientFn::Custom {
            rows,
            cols,
            f: Arc::new(f),
        }
    }

    pub fn eval(&self, t: f64, s: f64) -> Matrix {
        match self {
            CoefficientFn::Constant(m) => m.clone(),
            CoefficientFn::Polynomial(terms) => {
                let mut out = Matrix::zeros(terms[0].coeff.nrows(), terms[0].coeff.ncols());
                for term in terms {
                    let w = t.powi(term.t_pow as i32) * s.powi(term.s_pow as i32);
                    out += &term.coeff * w;
                }
                out
            }
            CoefficientFn::Table(table) => {
                let (i, wt) = bracket(&table.t, t);
                let (j, ws) = bracket(&table.s, s);
                let i1 = (i + 1).min(table.t.len() - 1);
                let j1 = (j + 1).min(table.s.len() - 1);
                let v = &table.values;
                &v[i][j] * ((1.0 - wt) * (1.0 - ws))
                    + &v[i1][j] * (wt * (1.0 - ws))
                    + &v[i][j1] * ((1.0 - wt) * ws)
                    + &v[i1][j1] * (wt * ws)
            }
            CoefficientFn::TableT(table) => {
                let (i, w) = bracket(&table.t, t);
                let i1 = (i + 1).min(table.t.len() - 1);
                &table.values[i] * (1.0 - w) + &table.values[i1] * w
            }
            CoefficientFn::Custom { f, .. } => f(t, s),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        match self {
            CoefficientFn::Constant(m) => m.shape(),
            CoefficientFn::Polynomial(terms) => terms[0].coeff.shape(),
            CoefficientFn::Table(t) => t.values[0][0].shape(),
            CoefficientFn::TableT(t) => t.values[0].shape(),
            CoefficientFn::Custom { rows, cols, .. } => (*rows, *cols),
        }
    }

    /// Whether the representation itself carries an `s` dependence.
    /// Custom closures are taken at their word.
    pub fn has_structural_s(&self) -> bool {
        match self {
            CoefficientFn::Polynomial(terms) => terms.iter().any(|t| t.s_pow > 0),
            CoefficientFn::Table(_) => true,
            _ => false,
        }
    }

    fn validate(&self, name: &str, rows: usize, cols: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::DimensionMismatch(format!("{name}: {msg}")));
        match self {
            CoefficientFn::Polynomial(terms) if terms.is_empty() => {
                return bad("polynomial needs at least one term".into())
            }
            CoefficientFn::Polynomial(terms) => {
                if terms.iter().any(|t| t.coeff.shape() != (rows, cols)) {
                    return bad(format!("every term must be {rows}x{cols}"));
                }
            }
            CoefficientFn::Table(table) => {
                if table.t.is_empty() || table.s.is_empty() {
                    return bad("table grids must be non-empty".into());
                }
                if !strictly_increasing(&table.t) || !strictly_increasing(&table.s) {
                    return bad("table grids must be strictly increasing".into());
                }
                if table.values.len() != table.t.len()
                    || table.values.iter().any(|row| row.len() != table.s.len())
                {
                    return bad("table values must have shape len(t) x len(s)".into());
                }
                if table.values.iter().flatten().any(|m| m.shape() != (rows, cols)) {
                    return bad(format!("every table entry must be {rows}x{cols}"));
                }
            }
            CoefficientFn::TableT(table) => {
                if table.t.is_empty() || !strictly_increasing(&table.t) {
                    return bad("table grid must be non-empty and strictly increasing".into());
                }
                if table.values.len() != table.t.len() {
                    return bad("table values must match len(t)".into());
                }
                if table.values.iter().any(|m| m.shape() != (rows, cols)) {
                    return bad(format!("every table entry must be {rows}x{cols}"));
                }
            }
            _ => {}
        }
        if self.shape() != (rows, cols) {
            let (r, c) = self.shape();
            return bad(format!("expected {rows}x{cols}, got {r}x{c}"));
        }
        Ok(())
    }
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

/// Problem data `A(t,s)`, `B(t,s)`, `Q(t,s)`, `R(t,s)`, `G(t)` on a horizon `[0, T]`.
///
/// `t` is the initial time of the self whose preferences apply and `s` the
/// running time.
#[derive(Debug, Clone)]
pub struct CoefficientSet {
    horizon: f64,
    state_dim: usize,
    control_dim: usize,
    a: CoefficientFn,
    b: CoefficientFn,
    q: CoefficientFn,
    r: CoefficientFn,
    g: CoefficientFn,
    problem_c: Option<ScalarProblemC>,
}

impl CoefficientSet {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        horizon: f64,
        state_dim: usize,
        control_dim: usize,
        a: CoefficientFn,
        b: CoefficientFn,
        q: CoefficientFn,
        r: CoefficientFn,
        g: CoefficientFn,
    ) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidArgument(format!("horizon must be positive, got {horizon}")));
        }
        if state_dim == 0 || control_dim == 0 {
            return Err(Error::InvalidArgument("dimensions must be positive".into()));
        }
        let (n, m) = (state_dim, control_dim);
        a.validate("A", n, n)?;
        b.validate("B", n, m)?;
        q.validate("Q", n, n)?;
        r.validate("R", m, m)?;
        g.validate("G", n, n)?;
        if g.has_structural_s() {
            return Err(Error::DimensionMismatch(
                "G: terminal weight must depend on t only".into(),
            ));
        }
        let set = CoefficientSet {
            horizon,
            state_dim,
            control_dim,
            a,
            b,
            q,
            r,
            g,
            problem_c: None,
        };
        set.probe_finite()?;
        Ok(set)
    }

    /// Constant coefficients, independent of both arguments.
    pub fn constant(
        horizon: f64,
        a: Matrix,
        b: Matrix,
        q: Matrix,
        r: Matrix,
        g: Matrix,
    ) -> Result<Self> {
        let (n, m) = (a.nrows(), b.ncols());
        CoefficientSet::new(
            horizon,
            n,
            m,
            CoefficientFn::Constant(a),
            CoefficientFn::Constant(b),
            CoefficientFn::Constant(q),
            CoefficientFn::Constant(r),
            CoefficientFn::Constant(g),
        )
    }

    pub(crate) fn with_problem_c(mut self, pc: ScalarProblemC) -> Self {
        self.problem_c = Some(pc);
        self
    }

    fn probe_finite(&self) -> Result<()> {
        let samples = [0.0, 0.5 * self.horizon, self.horizon];
        for &t in &samples {
            for &s in &samples {
                for (name, f) in self.named() {
                    let v = if name == "G" { f.eval(t, 0.0) } else { f.eval(t, s) };
                    if v.iter().any(|x| !x.is_finite()) {
                        return Err(Error::CoefficientEvaluation {
                            name: name.into(),
                            t,
                            s,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub(crate) fn named(&self) -> [(&'static str, &CoefficientFn); 5] {
        [("A", &self.a), ("B", &self.b), ("Q", &self.q), ("R", &self.r), ("G", &self.g)]
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn control_dim(&self) -> usize {
        self.control_dim
    }

    /// The scalar problem this set was built from, if any.
    pub fn problem_c(&self) -> Option<&ScalarProblemC> {
        self.problem_c.as_ref()
    }

    pub fn a(&self, t: f64, s: f64) -> Matrix {
        self.a.eval(t, s)
    }

    pub fn b(&self, t: f64, s: f64) -> Matrix {
        self.b.eval(t, s)
    }

    pub fn q(&self, t: f64, s: f64) -> SymMatrix {
        sym(self.q.eval(t, s))
    }

    pub fn r(&self, t: f64, s: f64) -> SymMatrix {
        sym(self.r.eval(t, s))
    }

    pub fn g(&self, t: f64) -> SymMatrix {
        sym(self.g.eval(t, 0.0))
    }

    /// Whether every coefficient ignores its first argument on a sample grid.
    pub fn is_time_consistent(&self, density: usize, tol: f64) -> bool {
        let density = density.max(2);
        let grid: Vec<f64> = (0..density)
            .map(|i| self.horizon * i as f64 / (density - 1) as f64)
            .collect();
        for &s in &grid {
            for (name, f) in self.named() {
                let s_eff = if name == "G" { 0.0 } else { s };
                let base = f.eval(0.0, s_eff);
                for &t in &grid[1..] {
                    let diff = (f.eval(t, s_eff) - &base).amax();
                    if diff > tol {
                        return false;
                    }
                }
            }
        }
        true
    }
}

// Non-finite entries pass through so the integrators can report where they appear.
fn sym(m: Matrix) -> SymMatrix {
    SymMatrix::symmetrized(m)
}
