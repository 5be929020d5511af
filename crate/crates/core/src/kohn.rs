//! The Kohn-Laplacian on functions, applied to ambient polynomials at points
//! of `M`, together with the Levi form, Reeb field and the degenerate
//! operator `Δ̃_ρ`.
//!
//! Notation at a point: `g_j = ρ_j`, `a_j = ρ^j`, `b_j = ρ^{j̄} = conj(a_j)`,
//! `H⁻¹` the inverse complex Hessian. For a function `u`,
//! `F_{jk} = ∂_{z̄_j} ∂_{z_k} u`. Then
//!
//! ```text
//! □_b u = Σ_{jk} (a_k b_j / |∂ρ|² − (H⁻¹)_{jk}) F_{jk} + n/|∂ρ|² Σ_k b_k u_{k̄}
//! ```

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kahler::{metric_at, metric_from_jet, MetricPoint};
use crate::sampler::SurfaceQuadrature;
use crate::wirtinger::{ComplexPolynomial, DefiningFunction, Powers};

/// Tolerance on `|ρ(p) − ν|` (relative to `max(1, |ν|)`) for points on `M`.
pub const SURFACE_TOLERANCE: f64 = 1e-9;
/// Threshold on the left-hand side of the curvature condition.
pub const CONDITION_TOLERANCE: f64 = 1e-9;

/// First and mixed second derivatives of a polynomial at one point.
#[derive(Clone, Debug)]
pub struct PolyJet {
    pub value: C64,
    /// `u_k`.
    pub grad: Vec<C64>,
    /// `u_k̄`.
    pub grad_bar: Vec<C64>,
    /// `mixed[(j, k)] = ∂_{z̄_j} ∂_{z_k} u`.
    pub mixed: DMatrix<C64>,
}

/// A polynomial with its derivative polynomials precomputed, for repeated
/// evaluation at many points.
#[derive(Clone, Debug)]
pub struct CompiledPoly {
    pub poly: ComplexPolynomial,
    grad: Vec<ComplexPolynomial>,
    grad_bar: Vec<ComplexPolynomial>,
    mixed: Vec<ComplexPolynomial>,
    max_exp: usize,
}

impl CompiledPoly {
    pub fn new(poly: ComplexPolynomial) -> Self {
        let nv = poly.n_vars();
        let d = |p: &ComplexPolynomial, k, bar| p.derive(k, bar).expect("index in range");
        let grad: Vec<_> = (0..nv).map(|k| d(&poly, k, false)).collect();
        let grad_bar: Vec<_> = (0..nv).map(|k| d(&poly, k, true)).collect();
        let mut mixed = Vec::with_capacity(nv * nv);
        for gb in &grad_bar {
            for k in 0..nv {
                mixed.push(d(gb, k, false));
            }
        }
        let max_exp = poly.max_exponent();
        Self {
            poly,
            grad,
            grad_bar,
            mixed,
            max_exp,
        }
    }

    pub fn max_exponent(&self) -> usize {
        self.max_exp
    }

    pub fn jet(&self, z: &[C64]) -> PolyJet {
        self.jet_with(&Powers::new(z, self.max_exp))
    }

    pub fn jet_with(&self, powers: &Powers) -> PolyJet {
        let nv = self.poly.n_vars();
        PolyJet {
            value: self.poly.eval_with(powers),
            grad: self.grad.iter().map(|p| p.eval_with(powers)).collect(),
            grad_bar: self.grad_bar.iter().map(|p| p.eval_with(powers)).collect(),
            mixed: DMatrix::from_fn(nv, nv, |j, k| self.mixed[j * nv + k].eval_with(powers)),
        }
    }
}

/// `Δ̃_ρ` applied to a function with mixed derivatives `F_{jk} = ∂_{z̄_j}∂_{z_k} u`.
pub fn delta_tilde_mixed(mp: &MetricPoint, mixed: &DMatrix<C64>) -> C64 {
    let nv = mp.n_vars();
    let inv_len = 1.0 / mp.grad_len_sq;
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..nv {
        let bj = mp.grad_raised_bar(j);
        for k in 0..nv {
            let coeff = mp.grad_raised[k] * bj * inv_len - mp.hess_inv[(j, k)];
            acc += coeff * mixed[(j, k)];
        }
    }
    acc
}

/// Trace form of `□_b u` from the metric data and the jet of `u`.
pub fn kohn_trace_at(mp: &MetricPoint, u: &PolyJet) -> C64 {
    let n = (mp.n_vars() - 1) as f64;
    let first_order: C64 = (0..mp.n_vars())
        .map(|k| mp.grad_raised_bar(k) * u.grad_bar[k])
        .sum();
    delta_tilde_mixed(mp, &u.mixed) + first_order * (n / mp.grad_len_sq)
}

/// Vector-field form: `□_b u = ½ |∂ρ|⁻² ρ^{pk̄} ρ^{qj̄} X_{pq} X_{j̄k̄} u`, with
/// `X_{pq} = ρ_q ∂_p − ρ_p ∂_q` and `X_{j̄k̄}` its conjugate, expanded by the
/// product rule.
pub fn kohn_fields_at(mp: &MetricPoint, u: &PolyJet) -> C64 {
    let nv = mp.n_vars();
    let g = &mp.jet.grad;
    let gb = &mp.jet.grad_bar;
    let h = &mp.jet.hessian;
    let fb = &u.grad_bar;
    let fm = &u.mixed;
    let mut acc = C64::new(0.0, 0.0);
    for p in 0..nv {
        for q in 0..nv {
            for j in 0..nv {
                for k in 0..nv {
                    let coeff = mp.upper(p, k) * mp.upper(q, j);
                    if coeff == C64::new(0.0, 0.0) {
                        continue;
                    }
                    let xx = g[q] * gb[k] * fm[(j, p)] + g[q] * h[(p, k)] * fb[j]
                        - g[q] * h[(p, j)] * fb[k]
                        - g[q] * gb[j] * fm[(k, p)]
                        - g[p] * gb[k] * fm[(j, q)]
                        - g[p] * h[(q, k)] * fb[j]
                        + g[p] * gb[j] * fm[(k, q)]
                        + g[p] * h[(q, j)] * fb[k];
                    acc += coeff * xx;
                }
            }
        }
    }
    acc * (0.5 / mp.grad_len_sq)
}

/// Pointwise `⟨∂̄_b u, ∂̄_b v⟩`, linear in `u` and antilinear in `v`.
pub fn dbar_b_pair_at(mp: &MetricPoint, u_bar: &[C64], v_bar: &[C64]) -> C64 {
    let nv = mp.n_vars();
    let mut full = C64::new(0.0, 0.0);
    let mut cu = C64::new(0.0, 0.0);
    let mut cv = C64::new(0.0, 0.0);
    for j in 0..nv {
        let bj = mp.grad_raised_bar(j);
        cu += u_bar[j] * bj;
        cv += v_bar[j] * bj;
        for k in 0..nv {
            full += u_bar[j] * mp.hess_inv[(j, k)] * v_bar[k].conj();
        }
    }
    full - cu * cv.conj() / mp.grad_len_sq
}

fn on_surface(f: &DefiningFunction, nu: f64, p: &[C64]) -> Result<()> {
    let residual = (f.value(p) - nu).abs();
    if residual > SURFACE_TOLERANCE * nu.abs().max(1.0) {
        return Err(Error::NotOnSurface { residual });
    }
    Ok(())
}

fn check_vars(f: &DefiningFunction, u: &ComplexPolynomial) -> Result<()> {
    if u.n_vars() != f.n_vars() {
        return Err(Error::DimensionMismatch {
            expected: f.n_vars(),
            got: u.n_vars(),
        });
    }
    Ok(())
}

/// `□_b u (p)` by the trace formula.
pub fn kohn_apply_trace(f: &DefiningFunction, nu: f64, u: &ComplexPolynomial, p: &[C64]) -> Result<C64> {
    check_vars(f, u)?;
    on_surface(f, nu, p)?;
    let mp = metric_at(f, p)?;
    Ok(kohn_trace_at(&mp, &CompiledPoly::new(u.clone()).jet(p)))
}

/// `□_b u (p)` by the vector-field formula.
pub fn kohn_apply_fields(f: &DefiningFunction, nu: f64, u: &ComplexPolynomial, p: &[C64]) -> Result<C64> {
    check_vars(f, u)?;
    on_surface(f, nu, p)?;
    let mp = metric_at(f, p)?;
    Ok(kohn_fields_at(&mp, &CompiledPoly::new(u.clone()).jet(p)))
}

/// Pointwise pairing whose integral equals `∫ (□_b u) · conj(v)`.
pub fn dbar_b_pair(
    f: &DefiningFunction,
    nu: f64,
    u: &ComplexPolynomial,
    v: &ComplexPolynomial,
    p: &[C64],
) -> Result<C64> {
    check_vars(f, u)?;
    check_vars(f, v)?;
    on_surface(f, nu, p)?;
    let mp = metric_at(f, p)?;
    let ju = CompiledPoly::new(u.clone()).jet(p);
    let jv = CompiledPoly::new(v.clone()).jet(p);
    Ok(dbar_b_pair_at(&mp, &ju.grad_bar, &jv.grad_bar))
}

/// `Δ̃_ρ u (p)`; `p` need not lie on a level set.
pub fn delta_tilde_apply(f: &DefiningFunction, u: &ComplexPolynomial, p: &[C64]) -> Result<C64> {
    check_vars(f, u)?;
    let mp = metric_at(f, p)?;
    Ok(delta_tilde_mixed(&mp, &CompiledPoly::new(u.clone()).jet(p).mixed))
}

/// `Δ̃_ρ ρ_m` from the third derivatives of `ρ`.
pub fn delta_tilde_grad_at(mp: &MetricPoint, m: usize) -> C64 {
    let nv = mp.n_vars();
    let mixed = DMatrix::from_fn(nv, nv, |j, k| mp.jet.third(m, k, j));
    delta_tilde_mixed(mp, &mixed)
}

pub fn delta_tilde_grad(f: &DefiningFunction, m: usize, p: &[C64]) -> Result<C64> {
    if m >= f.n_vars() {
        return Err(Error::VariableOutOfRange {
            index: m,
            n_vars: f.n_vars(),
        });
    }
    Ok(delta_tilde_grad_at(&metric_at(f, p)?, m))
}

/// Left-hand side `Re ρ_j̄ Δ̃ρ_j + (1/n)|∂ρ|² |Δ̃ρ_j|²` at one point.
pub fn condition_lhs_at(mp: &MetricPoint, j: usize) -> f64 {
    let n = (mp.n_vars() - 1) as f64;
    let dt = delta_tilde_grad_at(mp, j);
    (mp.jet.grad_bar[j] * dt).re + mp.grad_len_sq * dt.norm_sqr() / n
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub j: usize,
    pub max_lhs: f64,
    pub satisfied: bool,
}

/// Maximum of the curvature-condition left-hand side for index `j` over the
/// quadrature points.
pub fn condition_special_check(
    f: &DefiningFunction,
    q: &SurfaceQuadrature,
    j: usize,
) -> Result<ConditionCheck> {
    use rayon::prelude::*;
    if j >= f.n_vars() {
        return Err(Error::VariableOutOfRange {
            index: j,
            n_vars: f.n_vars(),
        });
    }
    let lhs: Vec<f64> = q
        .samples
        .par_iter()
        .map(|s| metric_at(f, &s.point).map(|mp| condition_lhs_at(&mp, j)))
        .collect::<Result<_>>()?;
    let max_lhs = lhs.into_iter().fold(f64::NEG_INFINITY, f64::max);
    Ok(ConditionCheck {
        j,
        max_lhs,
        satisfied: max_lhs <= CONDITION_TOLERANCE,
    })
}

/// Levi form, its inverse, and the Reeb field at a point of `M`.
///
/// Coordinates are permuted so that the largest `|ρ_k|` comes last; `perm[i]`
/// is the original index of permuted coordinate `i`.
#[derive(Clone, Debug)]
pub struct LeviData {
    /// Original index of the coordinate playing the role of `z_{n+1}`.
    pub frame_index: usize,
    pub perm: Vec<usize>,
    /// `levi[(α, β)] = h_{αβ̄}` in permuted coordinates.
    pub levi: DMatrix<C64>,
    /// `levi_inv[(β, γ)] = h^{γβ̄}`, so that `levi · levi_inv = I`.
    pub levi_inv: DMatrix<C64>,
    /// `h^α = ρ^α / |∂ρ|²`, permuted coordinates, `α < n`.
    pub h_raised: Vec<C64>,
    /// Reeb field as a real tangent vector in complex coordinates
    /// (original order): `T_j = i ρ^j / |∂ρ|²`.
    pub reeb: Vec<C64>,
}

pub fn levi_at(f: &DefiningFunction, p: &[C64]) -> Result<LeviData> {
    let jet = f.jet3(p);
    let nv = jet.n_vars();
    let n = nv - 1;
    let (frame_index, gmax) = jet
        .grad
        .iter()
        .map(|g| g.norm())
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    if gmax < 1e-12 {
        return Err(Error::DegenerateGradient);
    }
    let mp = metric_from_jet(p, jet)?;
    let perm: Vec<usize> = (0..nv)
        .filter(|&k| k != frame_index)
        .chain(std::iter::once(frame_index))
        .collect();
    let g: Vec<C64> = perm.iter().map(|&k| mp.jet.grad[k]).collect();
    let h = DMatrix::from_fn(nv, nv, |i, j| mp.jet.hessian[(perm[i], perm[j])]);
    let hinv = DMatrix::from_fn(nv, nv, |i, j| mp.hess_inv[(perm[i], perm[j])]);
    let a: Vec<C64> = perm.iter().map(|&k| mp.grad_raised[k]).collect();
    let w = n;
    let gw = g[w];
    let levi = DMatrix::from_fn(n, n, |al, be| {
        h[(al, be)] - g[al] * h[(w, be)] / gw - g[be].conj() * h[(al, w)] / gw.conj()
            + h[(w, w)] * g[al] * g[be].conj() / gw.norm_sqr()
    });
    let len = mp.grad_len_sq;
    // h^{γβ̄} = ρ^{γβ̄} − ρ^γ ρ^β̄ / |∂ρ|², ρ^{γβ̄} = (H⁻¹)_{βγ}
    let levi_inv = DMatrix::from_fn(n, n, |be, ga| hinv[(be, ga)] - a[ga] * a[be].conj() / len);
    let h_raised = a[..n].iter().map(|x| x / len).collect();
    let reeb = mp
        .grad_raised
        .iter()
        .map(|x| C64::new(0.0, 1.0) * x / len)
        .collect();
    Ok(LeviData {
        frame_index,
        perm,
        levi,
        levi_inv,
        h_raised,
        reeb,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::{radial_derivative, theta};
    use crate::wirtinger::make_ellipsoid;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn unit_sphere_point(nv: usize, seed: f64) -> Vec<C64> {
        let raw: Vec<C64> = (0..nv)
            .map(|j| c((seed + j as f64).sin(), (2.0 * seed + 3.0 * j as f64).cos()))
            .collect();
        let norm = raw.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        raw.iter().map(|v| v / norm).collect()
    }

    #[test]
    fn sphere_examples() {
        let f = DefiningFunction::sphere(1);
        let p = unit_sphere_point(2, 0.4);
        let nv = 2;
        let z1 = ComplexPolynomial::z(nv, 0);
        let zb1 = ComplexPolynomial::zbar(nv, 0);
        // |z1|² ↦ 2|z1|² − 1
        let v = kohn_apply_trace(&f, 1.0, &(z1.clone() * zb1.clone()), &p).unwrap();
        assert!((v - c(2.0 * p[0].norm_sqr() - 1.0, 0.0)).norm() < 1e-14);
        // z̄1 is an eigenfunction with eigenvalue n = 1
        let v = kohn_apply_fields(&f, 1.0, &zb1, &p).unwrap();
        assert!((v - p[0].conj()).norm() < 1e-14);
        // holomorphic and constant functions are annihilated
        let hol = z1.clone() * ComplexPolynomial::z(nv, 1);
        assert!(kohn_apply_trace(&f, 1.0, &hol, &p).unwrap().norm() < 1e-15);
        assert!(kohn_apply_fields(&f, 1.0, &hol, &p).unwrap().norm() < 1e-15);
        let one = ComplexPolynomial::constant(nv, c(1.0, 0.0));
        assert_eq!(kohn_apply_fields(&f, 1.0, &one, &p).unwrap(), c(0.0, 0.0));
        // off the surface
        assert!(matches!(
            kohn_apply_trace(&f, 2.0, &zb1, &p),
            Err(Error::NotOnSurface { .. })
        ));
    }

    #[test]
    fn pair_examples() {
        let f = DefiningFunction::sphere(1);
        let p = unit_sphere_point(2, 1.3);
        let zb = |j| ComplexPolynomial::zbar(2, j);
        let v = dbar_b_pair(&f, 1.0, &zb(0), &zb(0), &p).unwrap();
        assert!((v - c(1.0 - p[0].norm_sqr(), 0.0)).norm() < 1e-14);
        let v = dbar_b_pair(&f, 1.0, &zb(0), &zb(1), &p).unwrap();
        assert!((v.norm() - p[0].norm() * p[1].norm()).abs() < 1e-14);
        assert!((v + p[0].conj() * p[1]).norm() < 1e-14);
        let hol = ComplexPolynomial::z(2, 0).pow(2);
        assert_eq!(dbar_b_pair(&f, 1.0, &hol, &zb(1), &p).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn delta_tilde_examples() {
        let ell = make_ellipsoid(&[0.3, 0.6]).unwrap();
        let p = [c(0.2, 0.1), c(-0.3, 0.4)];
        for m in 0..2 {
            assert_eq!(delta_tilde_grad(&ell, m, &p).unwrap(), c(0.0, 0.0));
        }
        // pluriharmonic input
        let ph = ComplexPolynomial::z(2, 0).pow(3).twice_real_part();
        assert!(delta_tilde_apply(&ell, &ph, &p).unwrap().norm() < 1e-15);

        // Fubini–Study: Δ̃ρ_m = n ρ_m
        let fs = DefiningFunction::fubini_study(ComplexPolynomial::zero(2)).unwrap();
        let v = delta_tilde_grad(&fs, 0, &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!((v - c(0.5, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn levi_on_sphere() {
        let f = DefiningFunction::sphere(1);
        let l = levi_at(&f, &[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(l.frame_index, 1);
        assert!((l.levi[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((l.levi_inv[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);

        let nu: f64 = 2.5;
        let p: Vec<C64> = unit_sphere_point(3, 0.7).iter().map(|v| v * nu.sqrt()).collect();
        let f = DefiningFunction::sphere(2);
        let l = levi_at(&f, &p).unwrap();
        for j in 0..3 {
            assert!((l.reeb[j] - c(0.0, 1.0) * p[j] / nu).norm() < 1e-14);
        }
        let grad: Vec<C64> = p.iter().map(|v| v.conj()).collect();
        assert!((theta(&grad, &l.reeb) - 1.0).abs() < 1e-14);
        assert!(radial_derivative(&grad, &l.reeb).abs() < 1e-14);

        assert!(matches!(
            levi_at(&f, &[c(0.0, 0.0); 3]),
            Err(Error::DegenerateGradient)
        ));
    }
}
