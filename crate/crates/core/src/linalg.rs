//! Small dense kernels: cyclic Jacobi for Hermitian matrices and Pfaffians.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations.
///
/// Returns eigenvalues in ascending order and the matching orthonormal
/// eigenvectors as columns. Only the upper triangle is trusted to be
/// consistent with the lower one; callers check Hermiticity.
pub fn hermitian_eigen(a: &DMatrix<C64>) -> Result<(Vec<f64>, DMatrix<C64>)> {
    let m = a.nrows();
    assert_eq!(m, a.ncols(), "matrix must be square");
    let mut a = a.clone();
    let mut v = DMatrix::<C64>::identity(m, m);
    let scale = a.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok((vec![0.0; m], v));
    }
    let off = |a: &DMatrix<C64>| -> f64 {
        let mut s = 0.0;
        for p in 0..m {
            for q in (p + 1)..m {
                s += a[(p, q)].norm_sqr();
            }
        }
        s.sqrt()
    };
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off(&a) <= 1e-15 * scale {
            converged = true;
            break;
        }
        for p in 0..m {
            for q in (p + 1)..m {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                let phase = apq / mag;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * mag);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let t = if tau == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // U acts on columns p, q:
                //   U[p,p] = c, U[p,q] = s, U[q,p] = -s e^{-iφ}, U[q,q] = c e^{-iφ}
                let up_p = C64::new(c, 0.0);
                let up_q = C64::new(s, 0.0);
                let uq_p = -phase.conj() * s;
                let uq_q = phase.conj() * c;
                for k in 0..m {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * up_p + akq * uq_p;
                    a[(k, q)] = akp * up_q + akq * uq_q;
                }
                for k in 0..m {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = up_p.conj() * apk + uq_p.conj() * aqk;
                    a[(q, k)] = up_q.conj() * apk + uq_q.conj() * aqk;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                for k in 0..m {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * up_p + vkq * uq_p;
                    v[(k, q)] = vkp * up_q + vkq * uq_q;
                }
            }
        }
    }
    if !converged && off(&a) > 1e-12 * scale {
        return Err(Error::NoConvergence);
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = DMatrix::from_fn(m, m, |r, c| v[(r, order[c])]);
    Ok((values, vectors))
}

/// Relative Hermitian defect `‖H − H*‖_max / ‖H‖_max`.
pub fn hermitian_defect(h: &DMatrix<C64>) -> f64 {
    let scale = h.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    let mut worst = 0.0f64;
    for i in 0..h.nrows() {
        for j in 0..h.ncols() {
            worst = worst.max((h[(i, j)] - h[(j, i)].conj()).norm());
        }
    }
    worst / scale
}

/// Pfaffian of a real antisymmetric matrix of even order, by skew-symmetric
/// Gaussian elimination with pivoting.
pub fn pfaffian(a: &DMatrix<f64>) -> f64 {
    let m = a.nrows();
    assert_eq!(m, a.ncols());
    if m % 2 == 1 {
        return 0.0;
    }
    let mut a = a.clone();
    let mut pf = 1.0;
    let mut k = 0;
    while k + 1 < m {
        // pivot: largest entry in row k beyond the diagonal
        let (mut piv, mut best) = (k + 1, a[(k, k + 1)].abs());
        for j in (k + 2)..m {
            if a[(k, j)].abs() > best {
                best = a[(k, j)].abs();
                piv = j;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if piv != k + 1 {
            a.swap_rows(k + 1, piv);
            a.swap_columns(k + 1, piv);
            pf = -pf;
        }
        let akk1 = a[(k, k + 1)];
        pf *= akk1;
        for i in (k + 2)..m {
            let f = a[(k, i)] / akk1;
            // eliminate row/col i against k+1
            for j in 0..m {
                let delta = f * a[(k + 1, j)];
                a[(i, j)] -= delta;
            }
            for j in 0..m {
                let delta = f * a[(j, k + 1)];
                a[(j, i)] -= delta;
            }
        }
        k += 2;
    }
    pf
}
