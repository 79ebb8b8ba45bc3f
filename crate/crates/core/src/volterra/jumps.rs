use crate::error::Result;
use crate::game::PiecewiseRiccatiSolution;
use crate::numerics::{frobenius, SymMatrix};

/// Continuous path obtained by spreading each knot jump linearly over the
/// segment to its left:
/// `P̃(t) = P(t) + (t - t_{k-1})/(t_k - t_{k-1}) ΔP(t_k)` on `(t_{k-1}, t_k)`,
/// unchanged on the last segment.
#[derive(Debug, Clone)]
pub struct JumpRemovedPath {
    riccati: PiecewiseRiccatiSolution,
    pub times: Vec<f64>,
    pub values: Vec<SymMatrix>,
}

fn weight(riccati: &PiecewiseRiccatiSolution, j: usize, t: f64) -> f64 {
    let p = riccati.partition();
    if j + 1 == p.segments() {
        0.0
    } else {
        ((t - p.knot(j)) / p.segment_len(j)).clamp(0.0, 1.0)
    }
}

fn absorbed(riccati: &PiecewiseRiccatiSolution, j: usize, t: f64, p: &SymMatrix) -> SymMatrix {
    let w = weight(riccati, j, t);
    if w == 0.0 {
        return p.clone();
    }
    SymMatrix::symmetrized(p.as_matrix() + riccati.jumps()[j].as_matrix() * w)
}

pub fn remove_jumps(riccati: &PiecewiseRiccatiSolution) -> JumpRemovedPath {
    let n_seg = riccati.partition().segments();
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (j, seg) in riccati.segments().iter().enumerate() {
        let end = if j + 1 == n_seg { seg.times.len() } else { seg.times.len() - 1 };
        for l in 0..end {
            times.push(seg.times[l]);
            values.push(absorbed(riccati, j, seg.times[l], &seg.values[l]));
        }
    }
    JumpRemovedPath {
        riccati: riccati.clone(),
        times,
        values,
    }
}

impl JumpRemovedPath {
    pub fn value_at(&self, t: f64) -> Result<SymMatrix> {
        let j = self.riccati.partition().segment_of(t)?;
        Ok(absorbed(&self.riccati, j, t, &self.riccati.value_on_segment(j, t)))
    }

    /// `sup_t ‖P̃(t) - P(t)‖` over the samples, left limits at knots included.
    pub fn max_deviation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (j, seg) in self.riccati.segments().iter().enumerate() {
            for (t, p) in seg.times.iter().zip(&seg.values) {
                let d = absorbed(&self.riccati, j, *t, p);
                worst = worst.max(frobenius(&(d.as_matrix() - p.as_matrix())));
            }
        }
        worst
    }

    /// Largest `‖P̃(t_{i+1}) - P̃(t_i)‖ / (t_{i+1} - t_i)` over adjacent samples.
    pub fn max_slope(&self) -> f64 {
        self.times
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(t, v)| frobenius(&(v[1].as_matrix() - v[0].as_matrix())) / (t[1] - t[0]))
            .fold(0.0, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| frobenius(v)).fold(0.0, f64::max)
    }
}
