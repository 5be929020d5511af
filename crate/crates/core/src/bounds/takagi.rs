//! Takagi factorization `Q = UᵗΛU` of complex symmetric matrices and the
//! ellipsoid normal form built on it.
//!
//! Writing `Q = A + iB`, the real symmetric matrix `[[A, B], [B, −A]]` has
//! eigenvalues `±σ_k`; an eigenvector `[x; y]` for `+σ` gives `v = x + iy`
//! with `Q v̄ = σ v`. Collecting these as columns of `V` yields
//! `Q = V Σ Vᵗ`, so `U = Vᵗ`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::hermitian_eigen;
use crate::wirtinger::{ComplexPolynomial, DefiningFunction, DefiningKind, Monomial};

const SYMMETRY_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct Takagi {
    /// Unitary factor.
    pub u: DMatrix<C64>,
    /// Nonnegative diagonal of `Λ`, descending.
    pub lambda: Vec<f64>,
}

impl Takagi {
    /// `UᵗΛU`.
    pub fn reconstruct(&self) -> DMatrix<C64> {
        let m = self.lambda.len();
        let l = DMatrix::from_fn(m, m, |i, j| {
            if i == j {
                C64::new(self.lambda[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        self.u.transpose() * l * &self.u
    }
}

pub fn takagi_factorize(q: &DMatrix<C64>) -> Result<Takagi> {
    let m = q.nrows();
    if q.ncols() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: q.ncols(),
        });
    }
    let scale = q.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let asymmetry = if scale == 0.0 {
        0.0
    } else {
        (q - q.transpose()).iter().map(|x| x.norm()).fold(0.0, f64::max) / scale
    };
    if asymmetry > SYMMETRY_TOLERANCE {
        return Err(Error::NotSymmetric { asymmetry });
    }
    if scale == 0.0 {
        return Ok(Takagi {
            u: DMatrix::identity(m, m),
            lambda: vec![0.0; m],
        });
    }
    let embed = DMatrix::from_fn(2 * m, 2 * m, |i, j| {
        let (a, b) = (q[(i % m, j % m)].re, q[(i % m, j % m)].im);
        let v = match (i < m, j < m) {
            (true, true) => a,
            (false, false) => -a,
            _ => b,
        };
        C64::new(v, 0.0)
    });
    let (vals, vecs) = hermitian_eigen(&embed)?;
    let zero_tol = 1e-13 * scale * m as f64;

    let mut lambda = Vec::with_capacity(m);
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(m);
    let as_complex = |c: usize| -> Vec<C64> {
        (0..m)
            .map(|i| C64::new(vecs[(i, c)].re, vecs[(i + m, c)].re))
            .collect()
    };
    // positive part, descending
    for c in (0..2 * m).rev() {
        if vals[c] <= zero_tol || cols.len() == m {
            break;
        }
        lambda.push(vals[c]);
        cols.push(as_complex(c));
    }
    // null part: complex Gram–Schmidt over the (closed under v ↦ iv) zero cluster
    for c in 0..2 * m {
        if cols.len() == m {
            break;
        }
        if vals[c].abs() > zero_tol {
            continue;
        }
        let mut v = as_complex(c);
        for _ in 0..2 {
            for u in &cols {
                let dot: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= dot * ui;
                }
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.5 {
            v.iter_mut().for_each(|x| *x /= norm);
            lambda.push(0.0);
            cols.push(v);
        }
    }
    if cols.len() != m {
        return Err(Error::NoConvergence);
    }
    // normalize the positive columns (the embedding eigenvectors are unit in ℝ^{2m})
    for v in cols.iter_mut() {
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
    }
    let u = DMatrix::from_fn(m, m, |i, j| cols[i][j]);
    Ok(Takagi { u, lambda })
}

/// Coefficient matrix `Q` of the holomorphic quadratic part of `ρ`, with
/// `ρ = ‖Z‖² + Re(ZᵗQZ)`.
pub fn quadratic_coefficients(f: &DefiningFunction) -> Result<DMatrix<C64>> {
    let p = match f.kind() {
        DefiningKind::Polynomial(p) if f.is_flat_quadratic() => p,
        _ => {
            return Err(Error::Config {
                key: "rho".into(),
                message: "not of the form |Z|^2 + Re(Z^t Q Z)".into(),
            })
        }
    };
    let nv = f.n_vars();
    let mut q = DMatrix::zeros(nv, nv);
    for j in 0..nv {
        for k in j..nv {
            let mut m = Monomial::ONE;
            m.hol[j] += 1;
            m.hol[k] += 1;
            let c = p.coeff(&m);
            if j == k {
                q[(j, j)] = c * 2.0;
            } else {
                q[(j, k)] = c;
                q[(k, j)] = c;
            }
        }
    }
    Ok(q)
}

#[derive(Clone, Debug, Serialize)]
pub struct NormalForm {
    /// `A_j`, descending.
    pub a: Vec<f64>,
    /// Unitary change of variables `W = UZ`.
    #[serde(skip)]
    pub u: DMatrix<C64>,
}

/// `A` with `ρ(U⁻¹W) = ‖W‖² + Re Σ A_j w_j²` for `ρ = ‖Z‖² + Re(ZᵗQZ)`.
pub fn ellipsoid_normal_form(q: &DMatrix<C64>) -> Result<NormalForm> {
    let t = takagi_factorize(q)?;
    if let Some((index, &value)) = t.lambda.iter().enumerate().find(|(_, &a)| a >= 1.0) {
        return Err(Error::NonCompact { index, value });
    }
    Ok(NormalForm { a: t.lambda, u: t.u })
}

/// `‖Z‖² + Re(ZᵗQZ)` as a polynomial.
pub fn quadratic_defining_polynomial(q: &DMatrix<C64>) -> ComplexPolynomial {
    let nv = q.nrows();
    let mut hol = ComplexPolynomial::zero(nv);
    for j in 0..nv {
        for k in 0..nv {
            hol = hol + (ComplexPolynomial::z(nv, j) * ComplexPolynomial::z(nv, k)).scale(q[(j, k)] * 0.5);
        }
    }
    ComplexPolynomial::norm_sq(nv) + hol.twice_real_part()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn check(q: &DMatrix<C64>) -> Takagi {
        let t = takagi_factorize(q).unwrap();
        assert!((t.reconstruct() - q).camax() < 1e-12);
        let m = q.nrows();
        assert!((t.u.adjoint() * &t.u - DMatrix::identity(m, m)).camax() < 1e-12);
        assert!(t.lambda.windows(2).all(|w| w[0] >= w[1]));
        t
    }

    #[test]
    fn diagonal_and_phase() {
        let q = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.7, 0.0), c(0.2, 0.0)]));
        let t = check(&q);
        assert!((t.lambda[0] - 0.7).abs() < 1e-15 && (t.lambda[1] - 0.2).abs() < 1e-15);

        let phase = C64::from_polar(1.0, 1.1);
        let q = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![phase * 0.4, c(0.0, 0.0)]));
        let t = check(&q);
        assert!((t.lambda[0] - 0.4).abs() < 1e-15 && t.lambda[1] == 0.0);

        let t = check(&DMatrix::zeros(3, 3));
        assert_eq!(t.lambda, vec![0.0; 3]);
    }

    #[test]
    fn rejects_nonsymmetric() {
        let mut q = DMatrix::zeros(2, 2);
        q[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(takagi_factorize(&q), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn normal_forms() {
        let a = ellipsoid_normal_form(&DMatrix::zeros(2, 2)).unwrap().a;
        assert_eq!(a, vec![0.0, 0.0]);
        let mut q = DMatrix::zeros(2, 2);
        q[(0, 1)] = c(0.5, 0.0);
        q[(1, 0)] = c(0.5, 0.0);
        let a = ellipsoid_normal_form(&q).unwrap().a;
        assert!((a[0] - 0.5).abs() < 1e-14 && (a[1] - 0.5).abs() < 1e-14);
        q[(0, 1)] = c(1.2, 0.0);
        q[(1, 0)] = c(1.2, 0.0);
        assert!(matches!(ellipsoid_normal_form(&q), Err(Error::NonCompact { .. })));
    }

    #[test]
    fn coefficient_round_trip() {
        let q = DMatrix::from_row_slice(2, 2, &[c(0.3, 0.1), c(0.2, -0.4), c(0.2, -0.4), c(0.0, 0.5)]);
        let f = DefiningFunction::polynomial(quadratic_defining_polynomial(&q)).unwrap();
        assert!((quadratic_coefficients(&f).unwrap() - &q).camax() < 1e-15);
        let z = [c(0.4, -0.3), c(1.1, 0.2)];
        let zt = nalgebra::DVector::from_row_slice(&z);
        let direct = z.iter().map(|v| v.norm_sqr()).sum::<f64>() + (zt.transpose() * &q * &zt)[(0, 0)].re;
        assert!((f.value(&z) - direct).abs() < 1e-14);
    }
}
