use super::matrix::Matrix;

/// Cubic Hermite interpolation between `(p0, d0)` at the left end and
/// `(p1, d1)` at the right end of an interval of width `h`, at fraction `theta`.
pub fn hermite(p0: &Matrix, p1: &Matrix, d0: &Matrix, d1: &Matrix, h: f64, theta: f64) -> Matrix {
    let t2 = theta * theta;
    let t3 = t2 * theta;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + theta;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    p0 * h00 + d0 * (h10 * h) + p1 * h01 + d1 * (h11 * h)
}

/// Four-point Lagrange interpolation on uniform samples starting at `t0` with
/// spacing `h`. The stencil is shifted inward near either end.
pub fn cubic_uniform(samples: &[Matrix], t0: f64, h: f64, t: f64) -> Matrix {
    let n = samples.len();
    assert!(n >= 1, "cubic_uniform needs samples");
    if n == 1 {
        return samples[0].clone();
    }
    let x = (t - t0) / h;
    if n < 4 {
        let i = (x.floor().max(0.0) as usize).min(n - 2);
        let w = x - i as f64;
        return &samples[i] * (1.0 - w) + &samples[i + 1] * w;
    }
    let i = (x.floor().max(0.0) as usize).min(n - 2);
    let start = i.saturating_sub(1).min(n - 4);
    let nodes = [start as f64, start as f64 + 1.0, start as f64 + 2.0, start as f64 + 3.0];
    let mut out = Matrix::zeros(samples[0].nrows(), samples[0].ncols());
    for (a, &xa) in nodes.iter().enumerate() {
        let mut w = 1.0;
        for (b, &xb) in nodes.iter().enumerate() {
            if a != b {
                w *= (x - xb) / (xa - xb);
            }
        }
        out += &samples[start + a] * w;
    }
    out
}
