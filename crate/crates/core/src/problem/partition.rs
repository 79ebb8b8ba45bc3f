use crate::error::{Error, Result};

/// Grid `0 = t_0 < t_1 < ... < t_N = T`.
///
/// Segments are indexed from zero: segment `j` is `[t_j, t_{j+1})` and is
/// controlled by player `j + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    knots: Vec<f64>,
    mesh: f64,
}

impl Partition {
    pub fn new(knots: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::EmptyPartition);
        }
        if knots[0] != 0.0 {
            return Err(Error::InvalidPartition(format!(
                "first knot must be 0, got {}",
                knots[0]
            )));
        }
        if knots.iter().any(|k| !k.is_finite()) {
            return Err(Error::InvalidPartition("non-finite knot".into()));
        }
        let mut mesh = 0.0f64;
        for w in knots.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidPartition(format!(
                    "knots must be strictly increasing ({} then {})",
                    w[0], w[1]
                )));
            }
            mesh = mesh.max(w[1] - w[0]);
        }
        Ok(Partition { knots, mesh })
    }

    pub fn uniform(segments: usize, horizon: f64) -> Result<Self> {
        if segments == 0 {
            return Err(Error::EmptyPartition);
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidArgument(format!("horizon must be positive, got {horizon}")));
        }
        let mut knots: Vec<f64> = (0..=segments)
            .map(|k| k as f64 * horizon / segments as f64)
            .collect();
        knots[segments] = horizon;
        Partition::new(knots)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn knot(&self, k: usize) -> f64 {
        self.knots[k]
    }

    /// Number of segments `N`.
    pub fn segments(&self) -> usize {
        self.knots.len() - 1
    }

    pub fn mesh(&self) -> f64 {
        self.mesh
    }

    pub fn horizon(&self) -> f64 {
        self.knots[self.knots.len() - 1]
    }

    pub fn segment_len(&self, j: usize) -> f64 {
        self.knots[j + 1] - self.knots[j]
    }

    /// Segment containing `s` under the right-open convention; `s = T`
    /// belongs to the last segment.
    pub fn segment_of(&self, s: f64) -> Result<usize> {
        let horizon = self.horizon();
        if !(0.0..=horizon).contains(&s) {
            return Err(Error::OutOfHorizon(s));
        }
        let n = self.segments();
        if s == horizon {
            return Ok(n - 1);
        }
        let j = self.knots.partition_point(|&k| k <= s) - 1;
        Ok(j.min(n - 1))
    }
}

/// Uniform partition `t_k = kT/N`.
pub fn build_uniform_partition(segments: usize, horizon: f64) -> Result<Partition> {
    Partition::uniform(segments, horizon)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_examples() {
        let p = build_uniform_partition(4, 1.0).unwrap();
        assert_eq!(p.knots(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        let p = build_uniform_partition(1, 2.0).unwrap();
        assert_eq!(p.knots(), &[0.0, 2.0]);
        assert_eq!(p.mesh(), 2.0);
        let p = build_uniform_partition(3, 1.0).unwrap();
        assert_eq!(p.knots(), &[0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0]);
        assert!((p.mesh() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn empty_partition() {
        assert!(matches!(build_uniform_partition(0, 1.0), Err(Error::EmptyPartition)));
    }

    #[test]
    fn non_uniform_mesh_is_true_max_gap() {
        let p = Partition::new(vec![0.0, 0.1, 0.5, 0.6, 1.0]).unwrap();
        assert!((p.mesh() - 0.4).abs() < 1e-15);
        assert!(Partition::new(vec![0.0, 0.5, 0.5, 1.0]).is_err());
        assert!(Partition::new(vec![0.1, 1.0]).is_err());
    }

    #[test]
    fn segment_lookup_is_right_open() {
        let p = build_uniform_partition(2, 1.0).unwrap();
        assert_eq!(p.segment_of(0.0).unwrap(), 0);
        assert_eq!(p.segment_of(0.49).unwrap(), 0);
        assert_eq!(p.segment_of(0.5).unwrap(), 1);
        assert_eq!(p.segment_of(1.0).unwrap(), 1);
        assert!(p.segment_of(1.5).is_err());
        assert!(p.segment_of(-0.1).is_err());
    }
}
