use super::coeff::CoefficientSet;
use crate::error::{Error, Result};
use crate::numerics::{psd_check, Matrix, SymMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    QNotPsd,
    GNotPsd,
    RNotPositive,
    GNotMonotone,
    QNotMonotone,
    RNotMonotone,
}

/// One failed sample. For monotonicity failures `t < r` are the compared
/// initial times; for definiteness failures `r` is `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub t: f64,
    pub r: Option<f64>,
    pub s: Option<f64>,
    pub min_eigenvalue: f64,
}

/// Sampled check of continuity/coercivity (H1) and monotonicity (H2).
#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub density: usize,
    pub grid: Vec<f64>,
    pub sample_count: usize,
    pub h1_psd_ok: bool,
    /// min over samples of `λ_min(R(t,s))`
    pub h1_r_delta: f64,
    /// max finite-difference ratio in the first argument
    pub h1_lipschitz_estimate: f64,
    pub h2_g_ok: bool,
    pub h2_q_ok: bool,
    pub h2_r_ok: bool,
    pub h2_monotone_ok: bool,
    pub violations: Vec<Violation>,
}

impl AssumptionReport {
    pub fn h1_ok(&self) -> bool {
        self.h1_psd_ok && self.h1_r_delta > 0.0
    }
}

fn psd_tol(m: &Matrix) -> f64 {
    1e-12 * m.amax().max(1.0)
}

fn finite_or_err(m: &Matrix, name: &str, t: f64, s: f64) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::CoefficientEvaluation { name: name.into(), t, s })
    }
}

/// Evaluates the coefficients on a `density × density` grid over `[0,T]²`.
///
/// A failed (H2) only marks the report; the game solver needs (H1) alone.
pub fn check_assumptions(c: &CoefficientSet, density: usize) -> Result<AssumptionReport> {
    if density < 2 {
        return Err(Error::InvalidArgument(format!("grid density must be at least 2, got {density}")));
    }
    let horizon = c.horizon();
    let grid: Vec<f64> = (0..density)
        .map(|i| horizon * i as f64 / (density - 1) as f64)
        .collect();

    // values[i][j] at (grid[i], grid[j])
    let mut a_vals = Vec::with_capacity(density);
    let mut b_vals = Vec::with_capacity(density);
    let mut q_vals = Vec::with_capacity(density);
    let mut r_vals = Vec::with_capacity(density);
    let mut g_vals = Vec::with_capacity(density);
    for &t in &grid {
        let mut ar = Vec::with_capacity(density);
        let mut br = Vec::with_capacity(density);
        let mut qr = Vec::with_capacity(density);
        let mut rr = Vec::with_capacity(density);
        for &s in &grid {
            let a = c.a(t, s);
            finite_or_err(&a, "A", t, s)?;
            let b = c.b(t, s);
            finite_or_err(&b, "B", t, s)?;
            let q = c.q(t, s);
            finite_or_err(&q, "Q", t, s)?;
            let r = c.r(t, s);
            finite_or_err(&r, "R", t, s)?;
            ar.push(a);
            br.push(b);
            qr.push(q);
            rr.push(r);
        }
        let g = c.g(t);
        finite_or_err(&g, "G", t, 0.0)?;
        a_vals.push(ar);
        b_vals.push(br);
        q_vals.push(qr);
        r_vals.push(rr);
        g_vals.push(g);
    }

    let mut violations = Vec::new();
    let mut h1_psd_ok = true;
    let mut r_delta = f64::INFINITY;
    for (i, &t) in grid.iter().enumerate() {
        let g = psd_check(&g_vals[i], psd_tol(&g_vals[i]));
        if !g.is_psd {
            h1_psd_ok = false;
            violations.push(Violation {
                kind: ViolationKind::GNotPsd,
                t,
                r: None,
                s: None,
                min_eigenvalue: g.min_eigenvalue,
            });
        }
        for (j, &s) in grid.iter().enumerate() {
            let q = psd_check(&q_vals[i][j], psd_tol(&q_vals[i][j]));
            if !q.is_psd {
                h1_psd_ok = false;
                violations.push(Violation {
                    kind: ViolationKind::QNotPsd,
                    t,
                    r: None,
                    s: Some(s),
                    min_eigenvalue: q.min_eigenvalue,
                });
            }
            let r = psd_check(&r_vals[i][j], 0.0);
            r_delta = r_delta.min(r.min_eigenvalue);
            if r.min_eigenvalue <= 0.0 {
                violations.push(Violation {
                    kind: ViolationKind::RNotPositive,
                    t,
                    r: None,
                    s: Some(s),
                    min_eigenvalue: r.min_eigenvalue,
                });
            }
        }
    }

    let mut lipschitz = 0.0f64;
    for i in 0..density {
        for l in (i + 1)..density {
            let dt = grid[l] - grid[i];
            let g_diff = (&*g_vals[l] - &*g_vals[i]).norm();
            for j in 0..density {
                let total = (&a_vals[l][j] - &a_vals[i][j]).norm()
                    + (&b_vals[l][j] - &b_vals[i][j]).norm()
                    + (&*q_vals[l][j] - &*q_vals[i][j]).norm()
                    + (&*r_vals[l][j] - &*r_vals[i][j]).norm()
                    + g_diff;
                lipschitz = lipschitz.max(total / dt);
            }
        }
    }

    // Adjacent sample pairs suffice: the Loewner order is transitive.
    let mut h2_g_ok = true;
    let mut h2_q_ok = true;
    let mut h2_r_ok = true;
    let increment = |hi: &SymMatrix, lo: &SymMatrix| {
        let d = SymMatrix::symmetrized(&**hi - &**lo);
        let tol = 1e-12 * hi.amax().max(lo.amax()).max(1.0);
        psd_check(&d, tol)
    };
    for i in 0..density - 1 {
        let (t, r) = (grid[i], grid[i + 1]);
        let g = increment(&g_vals[i + 1], &g_vals[i]);
        if !g.is_psd {
            h2_g_ok = false;
            violations.push(Violation {
                kind: ViolationKind::GNotMonotone,
                t,
                r: Some(r),
                s: None,
                min_eigenvalue: g.min_eigenvalue,
            });
        }
        for j in (i + 1)..density {
            let s = grid[j];
            let q = increment(&q_vals[i + 1][j], &q_vals[i][j]);
            if !q.is_psd {
                h2_q_ok = false;
                violations.push(Violation {
                    kind: ViolationKind::QNotMonotone,
                    t,
                    r: Some(r),
                    s: Some(s),
                    min_eigenvalue: q.min_eigenvalue,
                });
            }
            let rr = increment(&r_vals[i + 1][j], &r_vals[i][j]);
            if !rr.is_psd {
                h2_r_ok = false;
                violations.push(Violation {
                    kind: ViolationKind::RNotMonotone,
                    t,
                    r: Some(r),
                    s: Some(s),
                    min_eigenvalue: rr.min_eigenvalue,
                });
            }
        }
    }

    Ok(AssumptionReport {
        density,
        sample_count: density * density,
        grid,
        h1_psd_ok,
        h1_r_delta: r_delta,
        h1_lipschitz_estimate: lipschitz,
        h2_g_ok,
        h2_q_ok,
        h2_r_ok,
        h2_monotone_ok: h2_g_ok && h2_q_ok && h2_r_ok,
        violations,
    })
}
