use super::matrix::Matrix;
use crate::error::{Error, Result};

/// Samples of a matrix-valued function on a uniform time grid.
///
/// `times` runs from the start of integration to its end, so for a backward
/// solve the times are decreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPath {
    pub times: Vec<f64>,
    pub values: Vec<Matrix>,
}

impl MatrixPath {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn first(&self) -> &Matrix {
        &self.values[0]
    }

    pub fn last(&self) -> &Matrix {
        &self.values[self.values.len() - 1]
    }

    /// Signed spacing between consecutive samples.
    pub fn step(&self) -> f64 {
        if self.times.len() < 2 {
            0.0
        } else {
            self.times[1] - self.times[0]
        }
    }

    /// Samples reordered so that time increases.
    pub fn into_forward(mut self) -> MatrixPath {
        if self.step() < 0.0 {
            self.times.reverse();
            self.values.reverse();
        }
        self
    }
}

/// Number of uniform steps covering `span` with spacing at most `step`.
///
/// Spans that are an integer multiple of `step` up to rounding noise get
/// exactly that many steps.
pub fn step_count(span: f64, step: f64) -> usize {
    let ratio = span.abs() / step;
    let rounded = ratio.round();
    let n = if (ratio - rounded).abs() <= 1e-9 * ratio.max(1.0) {
        rounded
    } else {
        ratio.ceil()
    };
    (n as usize).max(1)
}

/// One classical RK4 step of `y' = rhs(t, y)`.
pub fn rk4_step<F>(rhs: &mut F, t: f64, y: &Matrix, h: f64) -> Matrix
where
    F: FnMut(f64, &Matrix) -> Matrix,
{
    let k1 = rhs(t, y);
    let k2 = rhs(t + 0.5 * h, &(y + &k1 * (0.5 * h)));
    let k3 = rhs(t + 0.5 * h, &(y + &k2 * (0.5 * h)));
    let k4 = rhs(t + h, &(y + &k3 * h));
    y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

/// RK4 propagator of the linear system `y' = F(t) y` over one step, given the
/// drift at the start, midpoint and end of the step.
pub fn rk4_linear_propagator(f0: &Matrix, fm: &Matrix, f1: &Matrix, h: f64) -> Matrix {
    let n = f0.nrows();
    let id = Matrix::identity(n, n);
    let k1 = f0.clone();
    let k2 = fm * (&id + &k1 * (0.5 * h));
    let k3 = fm * (&id + &k2 * (0.5 * h));
    let k4 = f1 * (&id + &k3 * h);
    id + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

/// Fixed-step RK4 integration of `y' = rhs(t, y)` from `a` to `b`.
///
/// `b < a` integrates backward. The step actually used is `(b - a) / n` with
/// `n = step_count(b - a, step)`, so both endpoints are sampled exactly.
pub fn integrate_matrix_ode<F>(
    mut rhs: F,
    initial: &Matrix,
    a: f64,
    b: f64,
    step: f64,
) -> Result<MatrixPath>
where
    F: FnMut(f64, &Matrix) -> Matrix,
{
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
    }
    if !a.is_finite() || !b.is_finite() || a == b {
        return Err(Error::InvalidArgument(format!("empty or non-finite span [{a}, {b}]")));
    }
    if initial.iter().any(|v| !v.is_finite()) {
        return Err(Error::Divergence { t: a });
    }
    let n = step_count(b - a, step);
    let h = (b - a) / n as f64;
    let mut times = Vec::with_capacity(n + 1);
    let mut values = Vec::with_capacity(n + 1);
    times.push(a);
    values.push(initial.clone());
    let mut y = initial.clone();
    for i in 0..n {
        let t = a + i as f64 * h;
        y = rk4_step(&mut rhs, t, &y, h);
        let t_next = if i + 1 == n { b } else { a + (i + 1) as f64 * h };
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { t: t_next });
        }
        times.push(t_next);
        values.push(y.clone());
    }
    Ok(MatrixPath { times, values })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(v: f64) -> Matrix {
        Matrix::from_element(1, 1, v)
    }

    #[test]
    fn zero_rhs_keeps_identity() {
        let id = Matrix::identity(2, 2);
        let path = integrate_matrix_ode(|_, y| y * 0.0, &id, 0.0, 1.0, 0.1).unwrap();
        assert_eq!(path.len(), 11);
        assert!(path.values.iter().all(|v| v == &id));
        assert_eq!(path.times[10], 1.0);
    }

    #[test]
    fn backward_scalar_riccati() {
        // p' = p^2 with p(1) = 1 has p(t) = 1/(2 - t)
        let path =
            integrate_matrix_ode(|_, p| p.component_mul(p), &scalar(1.0), 1.0, 0.0, 1e-3).unwrap();
        assert_eq!(*path.times.last().unwrap(), 0.0);
        assert!((path.last()[(0, 0)] - 0.5).abs() <= 1e-10);
    }

    #[test]
    fn forward_exponential() {
        let path = integrate_matrix_ode(|_, x| x.clone(), &scalar(1.0), 0.0, 1.0, 1e-3).unwrap();
        assert!((path.last()[(0, 0)] - std::f64::consts::E).abs() <= 1e-9);
    }

    #[test]
    fn blow_up_reports_time() {
        // p' = p^2, p(0) = 1 blows up at t = 1
        let err = integrate_matrix_ode(|_, p| p.component_mul(p), &scalar(1.0), 0.0, 2.0, 0.01)
            .unwrap_err();
        match err {
            Error::Divergence { t } => assert!(t > 0.9 && t <= 2.0),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn step_count_handles_rounding_noise() {
        assert_eq!(step_count(1.0 / 64.0, 1.0 / 1024.0), 16);
        assert_eq!(step_count(0.1, 0.03), 4);
        assert_eq!(step_count(1e-3, 1.0), 1);
    }

    #[test]
    fn linear_propagator_matches_rk4_step() {
        let f = Matrix::from_row_slice(2, 2, &[0.1, 1.0, -0.5, 0.2]);
        let y = Matrix::from_row_slice(2, 1, &[1.0, -2.0]);
        let direct = rk4_step(&mut |_, y: &Matrix| &f * y, 0.0, &y, 0.05);
        let via = rk4_linear_propagator(&f, &f, &f, 0.05) * &y;
        assert!((direct - via).norm() < 1e-15);
    }
}
