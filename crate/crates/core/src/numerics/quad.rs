use super::matrix::Matrix;
use crate::error::{Error, Result};

/// Composite trapezoid rule over uniformly spaced samples.
pub fn trapezoid_quad(samples: &[Matrix], step: f64) -> Result<Matrix> {
    if samples.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: samples.len(),
        });
    }
    let last = samples.len() - 1;
    let mut acc = (&samples[0] + &samples[last]) * 0.5;
    for s in &samples[1..last] {
        acc += s;
    }
    Ok(acc * step)
}

/// Simpson's rule on one interval of width `h` from its endpoint and midpoint values.
pub fn simpson_interval(f0: &Matrix, fm: &Matrix, f1: &Matrix, h: f64) -> Matrix {
    (f0 + fm * 4.0 + f1) * (h / 6.0)
}

/// Composite Simpson rule over uniformly spaced samples.
///
/// An odd number of intervals closes with Simpson's 3/8 rule on the last
/// three; two samples fall back to the trapezoid rule.
pub fn simpson_quad(samples: &[Matrix], step: f64) -> Result<Matrix> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: n });
    }
    if n == 2 {
        return trapezoid_quad(samples, step);
    }
    let intervals = n - 1;
    let simpson_end = if intervals.is_multiple_of(2) { n - 1 } else { n - 4 };
    let mut acc = Matrix::zeros(samples[0].nrows(), samples[0].ncols());
    let mut i = 0;
    while i + 2 <= simpson_end {
        acc += (&samples[i] + &samples[i + 1] * 4.0 + &samples[i + 2]) * (step / 3.0);
        i += 2;
    }
    if intervals % 2 == 1 {
        let j = n - 4;
        acc += (&samples[j] + &samples[j + 1] * 3.0 + &samples[j + 2] * 3.0 + &samples[j + 3])
            * (3.0 * step / 8.0);
    }
    Ok(acc)
}
