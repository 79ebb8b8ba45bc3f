use super::jumps::remove_jumps;
use crate::error::{Error, Result};
use crate::game::{solve_game, solve_lyapunov_bounds};
use crate::numerics::{cubic_uniform, frobenius, rk4_linear_propagator, simpson_quad, symmetrize, Matrix, SymMatrix, Vector};
use crate::parallel::map_range;
use crate::problem::{CoefficientSet, Partition};
use std::fmt;
use std::str::FromStr;

/// Starting iterate for the fixed-point solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VolterraInit {
    Zero,
    /// jump-free Lyapunov bound of a coarse game
    Lyapunov,
    /// jump-removed Riccati path of a coarse game
    GameSolution,
}

impl FromStr for VolterraInit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(VolterraInit::Zero),
            "lyapunov" => Ok(VolterraInit::Lyapunov),
            "game-solution" | "game" => Ok(VolterraInit::GameSolution),
            other => Err(Error::InvalidArgument(format!(
                "unknown init `{other}` (expected zero, lyapunov or game-solution)"
            ))),
        }
    }
}

impl fmt::Display for VolterraInit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VolterraInit::Zero => "zero",
            VolterraInit::Lyapunov => "lyapunov",
            VolterraInit::GameSolution => "game-solution",
        })
    }
}

#[derive(Debug, Clone)]
pub struct VolterraConfig {
    /// number of anchor intervals on `[0, T]`
    pub resolution: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub init: VolterraInit,
    /// relaxation factor θ in `(0, 1]`
    pub damping: f64,
    /// segments of the coarse game used by the non-zero initializations
    pub init_segments: usize,
    pub init_step: f64,
}

impl Default for VolterraConfig {
    fn default() -> Self {
        VolterraConfig {
            resolution: 256,
            tol: 1e-10,
            max_iter: 200,
            init: VolterraInit::GameSolution,
            damping: 1.0,
            init_segments: 4,
            init_step: 1e-3,
        }
    }
}

/// Fixed point of the forward-backward Volterra system on a uniform anchor
/// grid `t_i = iT/L`.
#[derive(Debug, Clone)]
pub struct VolterraSolution {
    pub anchors: Vec<f64>,
    /// `P(t_i)`
    pub p: Vec<SymMatrix>,
    /// `phi[i][l] = Φ(t_{i+l}; t_i)`
    pub phi: Vec<Vec<Matrix>>,
    /// `R(t_i)⁻¹B(t_i)ᵀP(t_i)` with the diagonal coefficients
    pub gains: Vec<Matrix>,
    /// `A(t_i, t_i)`, `B(t_i, t_i)`, `R(t_i, t_i)`
    pub diag_a: Vec<Matrix>,
    pub diag_b: Vec<Matrix>,
    pub diag_r: Vec<SymMatrix>,
    /// size of the last undamped update
    pub residual: f64,
    pub iterations: usize,
    pub history: Vec<f64>,
    /// `‖U(P) - P‖` at each anchor, recomputed from the converged pair
    pub consistency: Vec<f64>,
    /// relaxation factor in force at the end
    pub damping: f64,
    pub init: VolterraInit,
}

impl VolterraSolution {
    pub fn horizon(&self) -> f64 {
        *self.anchors.last().expect("anchors")
    }

    pub fn spacing(&self) -> f64 {
        self.horizon() / (self.anchors.len() - 1) as f64
    }

    /// Cubic interpolation of `P` between anchors.
    pub fn p_at(&self, t: f64) -> SymMatrix {
        let samples: Vec<&Matrix> = self.p.iter().map(|p| p.as_matrix()).collect();
        interpolate(&samples, self.spacing(), t)
    }

    pub fn max_consistency(&self) -> f64 {
        self.consistency.iter().copied().fold(0.0, f64::max)
    }
}

pub(crate) fn interpolate(samples: &[&Matrix], h: f64, t: f64) -> SymMatrix {
    // four-point stencil around t
    let n = samples.len();
    let i = ((t / h).floor().max(0.0) as usize).min(n - 2);
    let lo = i.saturating_sub(1).min(n.saturating_sub(4));
    let hi = (lo + 4).min(n);
    let window: Vec<Matrix> = samples[lo..hi].iter().map(|m| (*m).clone()).collect();
    SymMatrix::symmetrized(cubic_uniform(&window, lo as f64 * h, h, t))
}

struct Cache {
    h: f64,
    a: Vec<Matrix>,
    b: Vec<Matrix>,
    r_inv: Vec<Matrix>,
    a_mid: Vec<Matrix>,
    b_mid: Vec<Matrix>,
    r_inv_mid: Vec<Matrix>,
    g: Vec<Matrix>,
    /// `q[i][l] = Q(t_i, t_{i+l})`, `r[i][l] = R(t_i, t_{i+l})`
    q: Vec<Vec<Matrix>>,
    r: Vec<Vec<Matrix>>,
}

impl Cache {
    fn new(c: &CoefficientSet, anchors: &[f64]) -> Result<Self> {
        let big_l = anchors.len() - 1;
        let h = anchors[1] - anchors[0];
        let inv = |s: f64| crate::game::control_inverse(&c.r(s, s), s);
        let mids: Vec<f64> = (0..big_l).map(|l| 0.5 * (anchors[l] + anchors[l + 1])).collect();
        let rows = map_range(anchors.len(), |i| {
            let t = anchors[i];
            let q: Vec<Matrix> = anchors[i..].iter().map(|&s| c.q(t, s).into_inner()).collect();
            let r: Vec<Matrix> = anchors[i..].iter().map(|&s| c.r(t, s).into_inner()).collect();
            (q, r)
        });
        let (q, r) = rows.into_iter().unzip();
        Ok(Cache {
            h,
            a: anchors.iter().map(|&s| c.a(s, s)).collect(),
            b: anchors.iter().map(|&s| c.b(s, s)).collect(),
            r_inv: anchors.iter().map(|&s| inv(s)).collect::<Result<_>>()?,
            a_mid: mids.iter().map(|&s| c.a(s, s)).collect(),
            b_mid: mids.iter().map(|&s| c.b(s, s)).collect(),
            r_inv_mid: mids.iter().map(|&s| inv(s)).collect::<Result<_>>()?,
            g: anchors.iter().map(|&t| c.g(t).into_inner()).collect(),
            q,
            r,
        })
    }

    fn gains(&self, p: &[Matrix]) -> Vec<Matrix> {
        p.iter()
            .enumerate()
            .map(|(l, p)| &self.r_inv[l] * self.b[l].transpose() * p)
            .collect()
    }

    /// One Picard sweep: transitions with the closed loop of `p`, then the
    /// integral update using `p` inside the control-cost term.
    fn sweep(&self, p: &[Matrix]) -> (Vec<Matrix>, Vec<Vec<Matrix>>) {
        let big_l = p.len() - 1;
        let gains = self.gains(p);
        let drift: Vec<Matrix> = (0..=big_l).map(|l| &self.a[l] - &self.b[l] * &gains[l]).collect();
        let refs: Vec<&Matrix> = p.iter().collect();
        let props: Vec<Matrix> = map_range(big_l, |l| {
            let t = (l as f64 + 0.5) * self.h;
            let p_mid = interpolate(&refs, self.h, t);
            let k_mid = &self.r_inv_mid[l] * self.b_mid[l].transpose() * p_mid.as_matrix();
            let f_mid = &self.a_mid[l] - &self.b_mid[l] * k_mid;
            rk4_linear_propagator(&drift[l], &f_mid, &drift[l + 1], self.h)
        });
        let results = map_range(big_l + 1, |i| {
            let n = p[0].nrows();
            let mut phi = Vec::with_capacity(big_l + 1 - i);
            phi.push(Matrix::identity(n, n));
            for prop in &props[i..] {
                let next = prop * phi.last().expect("non-empty");
                phi.push(next);
            }
            let samples: Vec<Matrix> = (i..=big_l)
                .map(|l| {
                    let k = &gains[l];
                    let w = &self.q[i][l - i] + k.transpose() * &self.r[i][l - i] * k;
                    let f = &phi[l - i];
                    f.transpose() * w * f
                })
                .collect();
            let phi_t = phi.last().expect("non-empty");
            let mut value = phi_t.transpose() * &self.g[i] * phi_t;
            if samples.len() >= 2 {
                value += simpson_quad(&samples, self.h).expect("at least two samples");
            }
            symmetrize(&mut value);
            (value, phi)
        });
        results.into_iter().unzip()
    }
}

fn update_size(a: &[Matrix], b: &[Matrix]) -> f64 {
    a.iter().zip(b).map(|(x, y)| frobenius(&(x - y))).fold(0.0, f64::max)
}

fn initial_iterate(c: &CoefficientSet, config: &VolterraConfig, anchors: &[f64]) -> Result<Vec<Matrix>> {
    let n = c.state_dim();
    if config.init == VolterraInit::Zero {
        return Ok(vec![Matrix::zeros(n, n); anchors.len()]);
    }
    let partition = Partition::uniform(config.init_segments.max(1), c.horizon())?;
    let game = solve_game(c, &partition, &Vector::zeros(n), config.init_step)?;
    match config.init {
        VolterraInit::GameSolution => {
            let tilde = remove_jumps(&game.riccati);
            anchors.iter().map(|&t| Ok(tilde.value_at(t)?.into_inner())).collect()
        }
        _ => {
            let bounds = solve_lyapunov_bounds(c, &game)?;
            anchors.iter().map(|&t| Ok(bounds.p0_bar_at(t)?.into_inner())).collect()
        }
    }
}

/// Picard iteration for
///
/// `Φ(s;t) = I + ∫_t^s [A(r) - B(r)R(r)⁻¹B(r)ᵀP(r)] Φ(r;t) dr`,
/// `P(t) = Φ(T;t)ᵀG(t)Φ(T;t) + ∫_t^T Φᵀ[Q(t,r) + P B R⁻¹ R(t,r) R⁻¹ Bᵀ P]Φ dr`,
///
/// with `A(r) = A(r,r)` and likewise for `B`, `R`. Stops when the undamped
/// update falls below `tol`; switches to θ = 0.5 after three consecutive
/// increases of the update size.
pub fn solve_volterra(c: &CoefficientSet, config: &VolterraConfig) -> Result<VolterraSolution> {
    if config.resolution < 2 {
        return Err(Error::InvalidArgument(format!(
            "resolution must be at least 2, got {}",
            config.resolution
        )));
    }
    if !(config.tol > 0.0) || !(config.damping > 0.0 && config.damping <= 1.0) || config.max_iter == 0 {
        return Err(Error::InvalidArgument(
            "tol and max_iter must be positive and damping in (0, 1]".into(),
        ));
    }
    let big_l = config.resolution;
    let horizon = c.horizon();
    let anchors: Vec<f64> = (0..=big_l)
        .map(|i| if i == big_l { horizon } else { horizon * i as f64 / big_l as f64 })
        .collect();
    let cache = Cache::new(c, &anchors)?;
    let mut p = initial_iterate(c, config, &anchors)?;
    let mut theta = config.damping;
    let mut history = Vec::new();
    let mut converged = false;
    for _ in 0..config.max_iter {
        let (next, _) = cache.sweep(&p);
        let residual = update_size(&next, &p);
        if !residual.is_finite() {
            history.push(residual);
            break;
        }
        history.push(residual);
        if residual < config.tol {
            p = next;
            converged = true;
            break;
        }
        let rising = history.len() >= 4 && history[history.len() - 4..].windows(2).all(|w| w[1] > w[0]);
        if rising && theta > 0.5 {
            theta = 0.5;
        }
        p = p
            .iter()
            .zip(&next)
            .map(|(old, new)| {
                let mut m = old * (1.0 - theta) + new * theta;
                symmetrize(&mut m);
                m
            })
            .collect();
    }
    let residual = *history.last().unwrap_or(&f64::INFINITY);
    if !converged {
        return Err(Error::NoConvergence {
            iterations: history.len(),
            residual,
            history,
        });
    }
    let (check, phi) = cache.sweep(&p);
    let consistency = check.iter().zip(&p).map(|(a, b)| frobenius(&(a - b))).collect();
    let gains = cache.gains(&p);
    Ok(VolterraSolution {
        diag_a: cache.a.clone(),
        diag_b: cache.b.clone(),
        diag_r: anchors.iter().map(|&s| c.r(s, s)).collect(),
        anchors,
        p: p.into_iter().map(SymMatrix::symmetrized).collect(),
        phi,
        gains,
        residual,
        iterations: history.len(),
        history,
        consistency,
        damping: theta,
        init: config.init,
    })
}
