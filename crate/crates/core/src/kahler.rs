//! Pointwise Kähler-metric algebra from the complex Hessian of `ρ`.
//!
//! Matrix convention: `hess_inv` is the matrix inverse of `H = [ρ_{jk̄}]`, so
//! the raised-index symbol is `ρ^{jk̄} = hess_inv[(k, j)]` and
//! `Σ_k ρ^{jk̄} ρ_{lk̄} = δ_{jl}`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_defect, hermitian_eigen};
use crate::wirtinger::{DefiningFunction, Jet3};

/// Relative positive-definiteness threshold for the complex Hessian.
pub const PSH_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct MetricPoint {
    pub z: Vec<C64>,
    pub jet: Jet3,
    /// `H⁻¹`.
    pub hess_inv: DMatrix<C64>,
    /// `ρ^j = Σ_k ρ_k̄ ρ^{jk̄}`.
    pub grad_raised: Vec<C64>,
    /// `|∂ρ|²_ρ`.
    pub grad_len_sq: f64,
    /// Spectral radius of `[ρ^{jk̄}]`.
    pub r: f64,
    /// `trace [ρ^{jk̄}] − r`.
    pub s: f64,
}

impl MetricPoint {
    pub fn n_vars(&self) -> usize {
        self.z.len()
    }

    /// `ρ^{jk̄}`.
    pub fn upper(&self, j: usize, k: usize) -> C64 {
        self.hess_inv[(k, j)]
    }

    /// `ρ^{j̄} = conj(ρ^j) = Σ_k (H⁻¹)_{jk} ρ_k`.
    pub fn grad_raised_bar(&self, j: usize) -> C64 {
        self.grad_raised[j].conj()
    }

    /// `|∂ρ|²_ρ` as the double contraction `Σ ρ^{jk̄} ρ_j ρ_k̄`.
    pub fn grad_len_sq_contracted(&self) -> f64 {
        let nv = self.n_vars();
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..nv {
            for k in 0..nv {
                acc += self.upper(j, k) * self.jet.grad[j] * self.jet.grad_bar[k];
            }
        }
        acc.re
    }
}

/// Builds the metric data at `z`; fails if the Hessian is not positive
/// definite there.
pub fn metric_at(f: &DefiningFunction, z: &[C64]) -> Result<MetricPoint> {
    let jet = f.jet3(z);
    metric_from_jet(z, jet)
}

pub(crate) fn metric_from_jet(z: &[C64], jet: Jet3) -> Result<MetricPoint> {
    let nv = z.len();
    let (eigs, vecs) = hermitian_eigen(&jet.hessian)?;
    let mean = eigs.iter().sum::<f64>() / nv as f64;
    let min = eigs[0];
    if !(mean > 0.0) || min < PSH_TOLERANCE * mean {
        return Err(Error::NotStrictlyPsh {
            min_eig: min,
            mean_eig: mean,
        });
    }
    let inv_diag = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        nv,
        eigs.iter().map(|&e| C64::new(1.0 / e, 0.0)),
    ));
    let hess_inv = &vecs * inv_diag * vecs.adjoint();
    let r = 1.0 / min;
    let trace: f64 = eigs.iter().map(|e| 1.0 / e).sum();
    let s = trace - r;
    let grad_raised = raise_with(&hess_inv, &jet.grad_bar);
    let grad_len_sq = jet
        .grad
        .iter()
        .zip(&grad_raised)
        .map(|(g, a)| (g * a).re)
        .sum();
    Ok(MetricPoint {
        z: z.to_vec(),
        jet,
        hess_inv,
        grad_raised,
        grad_len_sq,
        r,
        s,
    })
}

fn raise_with(hess_inv: &DMatrix<C64>, v: &[C64]) -> Vec<C64> {
    let nv = v.len();
    (0..nv)
        .map(|j| (0..nv).map(|k| hess_inv[(k, j)] * v[k]).sum())
        .collect()
}

/// `u^j = ρ^{jk̄} v_k̄` for a covector with antiholomorphic components `v_k̄`.
pub fn raise_index(mp: &MetricPoint, v: &[C64]) -> Vec<C64> {
    raise_with(&mp.hess_inv, v)
}

/// Largest eigenvalue modulus of a Hermitian matrix.
pub fn spectral_radius_hermitian(h: &DMatrix<C64>) -> Result<f64> {
    let asymmetry = hermitian_defect(h);
    if asymmetry > 1e-12 {
        return Err(Error::NonHermitian { asymmetry });
    }
    let (vals, _) = hermitian_eigen(h)?;
    Ok(vals.iter().map(|v| v.abs()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wirtinger::{make_ellipsoid, ComplexPolynomial};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn sphere_metric() {
        let f = DefiningFunction::sphere(1);
        let z = [c(0.6, 0.8), c(-1.0, 0.5)];
        let nu: f64 = z.iter().map(|v| v.norm_sqr()).sum();
        let mp = metric_at(&f, &z).unwrap();
        assert!((mp.hess_inv.clone() - DMatrix::identity(2, 2)).camax() < 1e-15);
        for j in 0..2 {
            assert!((mp.grad_raised[j] - z[j]).norm() < 1e-15);
        }
        assert!((mp.grad_len_sq - nu).abs() < 1e-14);
        assert!((mp.r - 1.0).abs() < 1e-15 && (mp.s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ellipsoid_grad_length() {
        let f = make_ellipsoid(&[0.5, 0.0]).unwrap();
        let x = (2.0f64 / 3.0).sqrt();
        let mp = metric_at(&f, &[c(x, 0.0), c(0.0, 0.0)]).unwrap();
        assert!((mp.grad_len_sq - 1.5).abs() < 1e-14);
    }

    #[test]
    fn fubini_study_radius_and_deficit() {
        for n in 1..=3 {
            let f = DefiningFunction::fubini_study(ComplexPolynomial::zero(n + 1)).unwrap();
            let z: Vec<C64> = (0..=n).map(|j| c(0.3 * j as f64 - 0.2, 0.1 + 0.2 * j as f64)).collect();
            let t: f64 = z.iter().map(|v| v.norm_sqr()).sum();
            let mp = metric_at(&f, &z).unwrap();
            assert!((mp.r - (1.0 + t).powi(2)).abs() < 1e-12);
            assert!((mp.s - n as f64 * (1.0 + t)).abs() < 1e-12);
            assert!((mp.grad_len_sq - t).abs() < 1e-13);
            // printed inverse: ρ^{jk̄} = (1+t)(δ_jk + z̄_k z_j)
            for j in 0..=n {
                for k in 0..=n {
                    let d = if j == k { 1.0 } else { 0.0 };
                    let expect = (z[k].conj() * z[j] + d) * (1.0 + t);
                    assert!((mp.upper(j, k) - expect).norm() < 1e-12);
                }
                assert!((mp.grad_raised[j] - z[j] * (1.0 + t)).norm() < 1e-12);
            }
            assert!((mp.grad_len_sq_contracted() - mp.grad_len_sq).abs() < 1e-12);
            let back = &mp.hess_inv * &mp.jet.hessian;
            assert!((back - DMatrix::identity(n + 1, n + 1)).camax() < 1e-10);
        }
    }

    #[test]
    fn not_strictly_psh() {
        // ‖Z‖² − 2|z1|² has Hessian diag(−1, 1)
        let nv = 2;
        let bad = ComplexPolynomial::norm_sq(nv)
            - (ComplexPolynomial::z(nv, 0) * ComplexPolynomial::zbar(nv, 0)).scale(c(2.0, 0.0));
        let f = DefiningFunction::polynomial(bad).unwrap();
        assert!(matches!(
            metric_at(&f, &[c(0.1, 0.0), c(0.2, 0.0)]),
            Err(Error::NotStrictlyPsh { .. })
        ));
    }

    #[test]
    fn raise_zero_and_radius() {
        let f = DefiningFunction::sphere(2);
        let mp = metric_at(&f, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(raise_index(&mp, &[c(0.0, 0.0); 3]).iter().all(|v| v.norm() == 0.0));
        assert_eq!(spectral_radius_hermitian(&DMatrix::identity(4, 4)).unwrap(), 1.0);
        let t = 0.7;
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(1.0 + t, 0.0),
            c((1.0 + t) * (1.0 + t), 0.0),
        ]));
        assert!((spectral_radius_hermitian(&d).unwrap() - (1.0 + t) * (1.0 + t)).abs() < 1e-15);
        let mut skew = DMatrix::identity(2, 2);
        skew[(0, 1)] = c(0.0, 1.0);
        assert!(matches!(
            spectral_radius_hermitian(&skew),
            Err(Error::NonHermitian { .. })
        ));
    }
}
