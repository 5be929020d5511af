//! Rayleigh–Ritz upper estimate for `λ₁` from the variational form
//! `λ₁ = inf ‖□_b u‖² / ‖∂̄_b u‖²` over polynomial trial spaces.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kahler::metric_at;
use crate::kohn::{dbar_b_pair_at, kohn_trace_at, CompiledPoly};
use crate::linalg::hermitian_eigen;
use crate::sampler::{integrate_vector, Estimate, SurfaceQuadrature, CHUNK};
use crate::wirtinger::{ComplexPolynomial, DefiningFunction, Monomial, MAX_VARS};

/// Relative threshold below which a `B` eigenvalue counts as CR (null).
pub const NULL_THRESHOLD: f64 = 1e-8;

/// A finite family of trial functions.
#[derive(Clone, Debug)]
pub struct TrialFamily {
    pub polys: Vec<ComplexPolynomial>,
    /// Maximum total degree when built by [`TrialFamily::monomials`].
    pub degree: Option<usize>,
}

impl TrialFamily {
    /// All `z^a z̄^b` with `1 ≤ |a| + |b| ≤ degree`, in graded order.
    pub fn monomials(n_vars: usize, degree: usize) -> Self {
        let mut polys = Vec::new();
        for d in 1..=degree {
            let mut exps = vec![0u8; 2 * n_vars];
            enumerate(&mut exps, 0, d, &mut |e| {
                let mut m = Monomial::ONE;
                m.hol[..n_vars].copy_from_slice(&e[..n_vars]);
                m.anti[..n_vars].copy_from_slice(&e[n_vars..]);
                polys.push(ComplexPolynomial::monomial(n_vars, m, C64::new(1.0, 0.0)));
            });
        }
        Self {
            polys,
            degree: Some(degree),
        }
    }

    pub fn custom(polys: Vec<ComplexPolynomial>) -> Self {
        Self { polys, degree: None }
    }

    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }
}

fn enumerate(exps: &mut [u8], slot: usize, left: usize, out: &mut impl FnMut(&[u8])) {
    if slot + 1 == exps.len() {
        exps[slot] = left as u8;
        out(exps);
        exps[slot] = 0;
        return;
    }
    for e in (0..=left).rev() {
        exps[slot] = e as u8;
        enumerate(exps, slot + 1, left - e, out);
    }
    exps[slot] = 0;
}

#[derive(Clone, Debug, Serialize)]
pub struct RayleighResult {
    pub degree: Option<usize>,
    pub estimate: Estimate,
    pub trial_dim: usize,
    pub dropped_null_dim: usize,
    /// Minimizing combination in the trial basis.
    #[serde(skip)]
    pub coefficients: Vec<C64>,
}

/// Weighted Gram matrices `A_{uv} = Σ w (□u)·conj(□v)` and
/// `B_{uv} = Σ w ⟨∂̄_b u, ∂̄_b v⟩`, summed over fixed chunks in order.
fn gram_matrices(
    f: &DefiningFunction,
    q: &SurfaceQuadrature,
    trials: &[CompiledPoly],
) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
    let dim = trials.len();
    let max_exp = trials.iter().map(|t| t.max_exponent()).max().unwrap_or(0);
    let partial: Vec<(DMatrix<C64>, DMatrix<C64>)> = q
        .samples
        .par_chunks(CHUNK)
        .map(|chunk| -> Result<_> {
            let mut a = DMatrix::zeros(dim, dim);
            let mut b = DMatrix::zeros(dim, dim);
            for s in chunk {
                let mp = metric_at(f, &s.point)?;
                let powers = crate::wirtinger::Powers::new(&s.point, max_exp);
                let jets: Vec<_> = trials.iter().map(|t| t.jet_with(&powers)).collect();
                let boxed: Vec<C64> = jets.iter().map(|j| kohn_trace_at(&mp, j)).collect();
                for u in 0..dim {
                    for v in u..dim {
                        let av = boxed[u] * boxed[v].conj() * s.weight;
                        let bv = dbar_b_pair_at(&mp, &jets[u].grad_bar, &jets[v].grad_bar) * s.weight;
                        a[(u, v)] += av;
                        b[(u, v)] += bv;
                    }
                }
            }
            Ok((a, b))
        })
        .collect::<Result<_>>()?;
    let mut a = DMatrix::zeros(dim, dim);
    let mut b = DMatrix::zeros(dim, dim);
    for (pa, pb) in partial {
        a += pa;
        b += pb;
    }
    for u in 0..dim {
        a[(u, u)].im = 0.0;
        b[(u, u)].im = 0.0;
        for v in 0..u {
            a[(u, v)] = a[(v, u)].conj();
            b[(u, v)] = b[(v, u)].conj();
        }
    }
    Ok((a, b))
}

/// Smallest generalized eigenvalue of `(A, B)` on the complement of the
/// numerical null space of `B`.
///
/// The standard error is the stochastic error of the first-order
/// perturbation `x*(Â − λB̂)x`, an integral of `|□u_x|² − λ|∂̄_b u_x|²`.
pub fn rayleigh_ritz(
    f: &DefiningFunction,
    q: &SurfaceQuadrature,
    family: &TrialFamily,
) -> Result<RayleighResult> {
    let nv = f.n_vars();
    if let Some(p) = family.polys.iter().find(|p| p.n_vars() != nv) {
        return Err(Error::DimensionMismatch {
            expected: nv,
            got: p.n_vars(),
        });
    }
    debug_assert!(nv <= MAX_VARS);
    let dim = family.len();
    if dim == 0 {
        return Err(Error::NoNonCRTrial);
    }
    let trials: Vec<CompiledPoly> = family.polys.iter().cloned().map(CompiledPoly::new).collect();
    let (a, b) = gram_matrices(f, q, &trials)?;

    let (bvals, bvecs) = hermitian_eigen(&b)?;
    let trace: f64 = bvals.iter().sum();
    let cut = NULL_THRESHOLD * trace / dim as f64;
    let keep: Vec<usize> = (0..dim).filter(|&i| trace > 0.0 && bvals[i] >= cut).collect();
    if keep.is_empty() {
        return Err(Error::NoNonCRTrial);
    }
    let w = DMatrix::from_fn(dim, keep.len(), |r, c| bvecs[(r, keep[c])] / bvals[keep[c]].sqrt());
    let reduced = w.adjoint() * &a * &w;
    let reduced = (&reduced + reduced.adjoint()) * C64::new(0.5, 0.0);
    let (vals, vecs) = hermitian_eigen(&reduced)?;
    let lambda = vals[0];
    let x = &w * vecs.column(0);
    let coefficients: Vec<C64> = x.iter().copied().collect();

    // u_x = Σ x_k u_k, B-normalized
    let mut ux = ComplexPolynomial::zero(nv);
    for (p, c) in family.polys.iter().zip(&coefficients) {
        ux = ux + p.scale(*c);
    }
    let ux = CompiledPoly::new(ux);
    let perturbation = integrate_vector(q, 1, |s| {
        let mp = metric_at(f, &s.point)?;
        let jet = ux.jet(&s.point);
        let boxed = kohn_trace_at(&mp, &jet);
        let pair = dbar_b_pair_at(&mp, &jet.grad_bar, &jet.grad_bar).re;
        Ok(vec![boxed.norm_sqr() - lambda * pair])
    })?;
    Ok(RayleighResult {
        degree: family.degree,
        estimate: Estimate {
            value: lambda,
            stderr: perturbation.estimate(0).stderr,
        },
        trial_dim: dim,
        dropped_null_dim: dim - keep.len(),
        coefficients,
    })
}
