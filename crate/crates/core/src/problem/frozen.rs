use super::coeff::CoefficientSet;
use super::partition::Partition;
use crate::error::{Error, Result};
use crate::numerics::{Matrix, SymMatrix};

/// Coefficients with their first argument frozen at the left knot of the
/// segment containing `s`: `A^Δ(s) = A(t_{k-1}, s)` for `s ∈ [t_{k-1}, t_k)`.
#[derive(Debug, Clone, Copy)]
pub struct FrozenCoefficients<'a> {
    coeffs: &'a CoefficientSet,
    partition: &'a Partition,
}

pub fn freeze<'a>(
    coeffs: &'a CoefficientSet,
    partition: &'a Partition,
) -> Result<FrozenCoefficients<'a>> {
    if (coeffs.horizon() - partition.horizon()).abs() > 1e-12 * coeffs.horizon() {
        return Err(Error::InvalidPartition(format!(
            "partition ends at {} but the horizon is {}",
            partition.horizon(),
            coeffs.horizon()
        )));
    }
    Ok(FrozenCoefficients { coeffs, partition })
}

impl<'a> FrozenCoefficients<'a> {
    pub fn coefficients(&self) -> &'a CoefficientSet {
        self.coeffs
    }

    pub fn partition(&self) -> &'a Partition {
        self.partition
    }

    /// The freezing time `t_{k-1}` used at `s`.
    pub fn anchor(&self, s: f64) -> Result<f64> {
        Ok(self.partition.knot(self.partition.segment_of(s)?))
    }

    pub fn a(&self, s: f64) -> Result<Matrix> {
        Ok(self.coeffs.a(self.anchor(s)?, s))
    }

    pub fn b(&self, s: f64) -> Result<Matrix> {
        Ok(self.coeffs.b(self.anchor(s)?, s))
    }

    pub fn q(&self, s: f64) -> Result<SymMatrix> {
        Ok(self.coeffs.q(self.anchor(s)?, s))
    }

    pub fn r(&self, s: f64) -> Result<SymMatrix> {
        Ok(self.coeffs.r(self.anchor(s)?, s))
    }
}
