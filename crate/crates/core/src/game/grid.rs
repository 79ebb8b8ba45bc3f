use crate::error::{Error, Result};
use crate::numerics::{step_count, Matrix};
use crate::problem::{CoefficientSet, Partition};

/// Fine time grid refining a partition, with the frozen dynamics cached at
/// the RK4 stage times of every interval.
///
/// Each segment `[t_j, t_{j+1}]` is split into an integer number of equal
/// intervals no longer than the requested step; knots are grid nodes.
#[derive(Debug, Clone)]
pub struct FineGrid {
    partition: Partition,
    nodes: Vec<f64>,
    seg_start: Vec<usize>,
    interval_segment: Vec<usize>,
    /// `A(t_j, ·)` at fractions 0, 1/2, 1 of each interval
    a: Vec<[Matrix; 3]>,
    b: Vec<[Matrix; 3]>,
}

impl FineGrid {
    pub fn new(c: &CoefficientSet, partition: &Partition, step: f64) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
        }
        if (partition.horizon() - c.horizon()).abs() > 1e-12 * c.horizon().max(1.0) {
            return Err(Error::InvalidPartition(format!(
                "partition ends at {} but the horizon is {}",
                partition.horizon(),
                c.horizon()
            )));
        }
        let segments = partition.segments();
        let mut nodes = Vec::new();
        let mut seg_start = Vec::with_capacity(segments + 1);
        let mut interval_segment = Vec::new();
        for j in 0..segments {
            let (lo, hi) = (partition.knot(j), partition.knot(j + 1));
            let m = step_count(hi - lo, step);
            let h = (hi - lo) / m as f64;
            seg_start.push(nodes.len());
            for i in 0..m {
                nodes.push(lo + i as f64 * h);
                interval_segment.push(j);
            }
        }
        seg_start.push(nodes.len());
        nodes.push(partition.horizon());

        let mut a = Vec::with_capacity(interval_segment.len());
        let mut b = Vec::with_capacity(interval_segment.len());
        for (i, &j) in interval_segment.iter().enumerate() {
            let anchor = partition.knot(j);
            let (s0, s1) = (nodes[i], nodes[i + 1]);
            let sm = 0.5 * (s0 + s1);
            a.push([c.a(anchor, s0), c.a(anchor, sm), c.a(anchor, s1)]);
            b.push([c.b(anchor, s0), c.b(anchor, sm), c.b(anchor, s1)]);
        }
        Ok(FineGrid {
            partition: partition.clone(),
            nodes,
            seg_start,
            interval_segment,
            a,
            b,
        })
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn intervals(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Node index of knot `t_j`, `j = 0..=N`.
    pub fn knot_node(&self, j: usize) -> usize {
        self.seg_start[j]
    }

    pub fn substeps(&self, j: usize) -> usize {
        self.seg_start[j + 1] - self.seg_start[j]
    }

    pub fn segment_of_interval(&self, i: usize) -> usize {
        self.interval_segment[i]
    }

    /// Segment owning node `i` under the right-open convention (`T` belongs
    /// to the last segment).
    pub fn segment_of_node(&self, i: usize) -> usize {
        self.interval_segment[i.min(self.intervals() - 1)]
    }

    pub fn interval_len(&self, i: usize) -> f64 {
        self.nodes[i + 1] - self.nodes[i]
    }

    pub(crate) fn dynamics(&self, i: usize) -> (&[Matrix; 3], &[Matrix; 3]) {
        (&self.a[i], &self.b[i])
    }

    /// Whether a control sampled on `nodes` lives on this grid.
    pub fn matches(&self, nodes: &[f64]) -> bool {
        nodes.len() == self.nodes.len()
            && nodes
                .iter()
                .zip(&self.nodes)
                .all(|(a, b)| (a - b).abs() <= 1e-12 * self.partition.horizon().max(1.0))
    }
}
