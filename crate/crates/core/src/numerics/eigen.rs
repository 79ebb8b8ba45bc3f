use super::matrix::SymMatrix;

const MAX_SWEEPS: usize = 100;

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn symmetric_eigenvalues(m: &SymMatrix) -> Vec<f64> {
    let n = m.dim();
    let mut a = m.as_matrix().clone();
    if n == 1 {
        return vec![a[(0, 0)]];
    }
    let scale = a.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if scale == 0.0 {
        return vec![0.0; n];
    }
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    eig.sort_by(|x, y| x.total_cmp(y));
    eig
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdReport {
    pub is_psd: bool,
    pub min_eigenvalue: f64,
}

/// `is_psd` iff the smallest eigenvalue is at least `-tol`.
pub fn psd_check(m: &SymMatrix, tol: f64) -> PsdReport {
    let min_eigenvalue = symmetric_eigenvalues(m)[0];
    PsdReport {
        is_psd: min_eigenvalue >= -tol,
        min_eigenvalue,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Matrix;

    #[test]
    fn identity_is_psd() {
        let r = psd_check(&SymMatrix::identity(3), 0.0);
        assert!(r.is_psd);
        assert_eq!(r.min_eigenvalue, 1.0);
    }

    #[test]
    fn indefinite_diagonal() {
        let r = psd_check(&SymMatrix::from_diagonal(&[1.0, -0.5]).unwrap(), 1e-8);
        assert!(!r.is_psd);
        assert_eq!(r.min_eigenvalue, -0.5);
    }

    #[test]
    fn two_by_two_hand_eigenvalues() {
        // [[2,1],[1,2]] has eigenvalues 1 and 3
        let m = SymMatrix::new(Matrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0])).unwrap();
        let eig = symmetric_eigenvalues(&m);
        assert!((eig[0] - 1.0).abs() < 1e-14);
        assert!((eig[1] - 3.0).abs() < 1e-14);
        assert!(psd_check(&m, 0.0).is_psd);
    }

    #[test]
    fn matches_nalgebra_on_3x3() {
        let m = Matrix::from_row_slice(3, 3, &[4.0, -1.0, 0.5, -1.0, 3.0, 2.0, 0.5, 2.0, -1.0]);
        let ours = symmetric_eigenvalues(&SymMatrix::new(m.clone()).unwrap());
        let mut reference: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        reference.sort_by(|a, b| a.total_cmp(b));
        for (a, b) in ours.iter().zip(&reference) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }
}
