use super::solver::VolterraSolution;
use crate::numerics::{cubic_uniform, Matrix, Vector};

/// Limit equilibrium `X̄(s) = Φ(s;0)x`, `ū(s) = -R(s)⁻¹B(s)ᵀP(s)X̄(s)` on the
/// anchor grid.
#[derive(Debug, Clone)]
pub struct EquilibriumControl {
    pub x: Vector,
    pub times: Vec<f64>,
    pub states: Vec<Vector>,
    pub controls: Vec<Vector>,
}

fn column(v: &Vector) -> Matrix {
    Matrix::from_column_slice(v.len(), 1, v.as_slice())
}

fn interpolate(samples: &[Vector], h: f64, t: f64) -> Vector {
    let n = samples.len();
    let i = ((t / h).floor().max(0.0) as usize).min(n - 2);
    let lo = i.saturating_sub(1).min(n.saturating_sub(4));
    let hi = (lo + 4).min(n);
    let window: Vec<Matrix> = samples[lo..hi].iter().map(column).collect();
    let m = cubic_uniform(&window, lo as f64 * h, h, t);
    Vector::from_column_slice(m.as_slice())
}

impl EquilibriumControl {
    fn spacing(&self) -> f64 {
        self.times[self.times.len() - 1] / (self.times.len() - 1) as f64
    }

    /// Cubic interpolation of the state between anchors.
    pub fn state_at(&self, s: f64) -> Vector {
        interpolate(&self.states, self.spacing(), s)
    }

    /// Cubic interpolation of the control between anchors.
    pub fn control_at(&self, s: f64) -> Vector {
        interpolate(&self.controls, self.spacing(), s)
    }
}

pub fn equilibrium_from_volterra(v: &VolterraSolution, x: &Vector) -> EquilibriumControl {
    let states: Vec<Vector> = v.phi[0].iter().map(|phi| phi * x).collect();
    let controls = states.iter().zip(&v.gains).map(|(x, k)| -(k * x)).collect();
    EquilibriumControl {
        x: x.clone(),
        times: v.anchors.clone(),
        states,
        controls,
    }
}
