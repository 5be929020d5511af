//! Upper bounds for `λ₁(□_b)` on a sampled level set.

mod rayleigh;
mod takagi;

pub use rayleigh::{rayleigh_ritz, RayleighResult, TrialFamily, NULL_THRESHOLD};
pub use takagi::{
    ellipsoid_normal_form, quadratic_coefficients, quadratic_defining_polynomial, takagi_factorize,
    NormalForm, Takagi,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kahler::metric_at;
use crate::kohn::{condition_special_check, ConditionCheck};
use crate::sampler::{integrate_vector, radial_solve, Estimate, SurfaceQuadrature};
use crate::wirtinger::DefiningFunction;
use crate::C64;

/// Deviation from the identity Hessian tolerated by [`bound_flat_average`].
pub const FLAT_TOLERANCE: f64 = 1e-10;

/// Condition verdicts for every index `j`.
pub fn condition_verdicts(f: &DefiningFunction, q: &SurfaceQuadrature) -> Result<Vec<ConditionCheck>> {
    (0..f.n_vars()).map(|j| condition_special_check(f, q, j)).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct MaxBound {
    /// `n · max |∂ρ|⁻²`, with the maximum refined by a local search.
    pub value: f64,
    /// `n · max |∂ρ|⁻²` over the samples alone.
    pub sampled: f64,
    pub verdicts: Vec<ConditionCheck>,
}

/// `n · max_M |∂ρ|⁻²`, withheld unless the curvature condition holds for some `j`.
pub fn bound_max(f: &DefiningFunction, q: &SurfaceQuadrature) -> Result<MaxBound> {
    let verdicts = condition_verdicts(f, q)?;
    bound_max_with(f, q, verdicts)
}

pub(crate) fn bound_max_with(
    f: &DefiningFunction,
    q: &SurfaceQuadrature,
    verdicts: Vec<ConditionCheck>,
) -> Result<MaxBound> {
    if !verdicts.iter().any(|v| v.satisfied) {
        return Err(Error::ConditionViolated);
    }
    if q.is_empty() {
        return Err(Error::EmptySpec);
    }
    let n = f.n() as f64;
    let mut best = (f64::NEG_INFINITY, 0usize);
    for (i, s) in q.samples.iter().enumerate() {
        let v = 1.0 / metric_at(f, &s.point)?.grad_len_sq;
        if v > best.0 {
            best = (v, i);
        }
    }
    let start = &q.samples[best.1].direction;
    let refined = refine_max(f, q.level, &q.center, start, best.0);
    Ok(MaxBound {
        value: n * refined.max(best.0),
        sampled: n * best.0,
        verdicts,
    })
}

/// Nelder–Mead on unnormalized directions, maximizing `|∂ρ|⁻²` at the
/// radial point.
fn refine_max(f: &DefiningFunction, nu: f64, center: &[C64], start: &[f64], start_value: f64) -> f64 {
    let objective = |d: &[f64]| -> f64 {
        let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return f64::NEG_INFINITY;
        }
        let unit: Vec<f64> = d.iter().map(|x| x / norm).collect();
        let Ok(t) = radial_solve(f, nu, &unit, center) else {
            return f64::NEG_INFINITY;
        };
        let p: Vec<C64> = unit
            .chunks(2)
            .enumerate()
            .map(|(k, c)| center.get(k).copied().unwrap_or_default() + C64::new(c[0] * t, c[1] * t))
            .collect();
        metric_at(f, &p).map_or(f64::NEG_INFINITY, |mp| 1.0 / mp.grad_len_sq)
    };
    let dim = start.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = vec![(start.to_vec(), start_value)];
    for k in 0..dim {
        let mut v = start.to_vec();
        v[k] += 0.05;
        let val = objective(&v);
        simplex.push((v, val));
    }
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    for _ in 0..4000 {
        simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
        let spread = simplex[0].1 - simplex[dim].1;
        if spread.abs() <= 1e-15 * simplex[0].1.abs() {
            break;
        }
        let centroid: Vec<f64> = (0..dim)
            .map(|i| simplex[..dim].iter().map(|s| s.0[i]).sum::<f64>() / dim as f64)
            .collect();
        let worst = simplex[dim].clone();
        let along = |c: f64| -> Vec<f64> {
            centroid.iter().zip(&worst.0).map(|(m, w)| m + c * (m - w)).collect()
        };
        let refl = along(alpha);
        let fr = objective(&refl);
        if fr > simplex[0].1 {
            let exp = along(gamma);
            let fe = objective(&exp);
            simplex[dim] = if fe > fr { (exp, fe) } else { (refl, fr) };
        } else if fr > simplex[dim - 1].1 {
            simplex[dim] = (refl, fr);
        } else {
            let con = along(-rho);
            let fc = objective(&con);
            if fc > worst.1 {
                simplex[dim] = (con, fc);
            } else {
                let best = simplex[0].0.clone();
                for s in simplex.iter_mut().skip(1) {
                    let v: Vec<f64> = best.iter().zip(&s.0).map(|(b, x)| b + sigma * (x - b)).collect();
                    let fv = objective(&v);
                    *s = (v, fv);
                }
            }
        }
    }
    simplex.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max)
}

/// `n² ∫ r |∂ρ|⁻² / ∫ s`.
pub fn bound_hessian_ratio(f: &DefiningFunction, q: &SurfaceQuadrature) -> Result<Estimate> {
    let n = f.n() as f64;
    let acc = integrate_vector(q, 2, |s| {
        let mp = metric_at(f, &s.point)?;
        Ok(vec![mp.r / mp.grad_len_sq, mp.s])
    })?;
    Ok(acc.ratio(0, 1).scale(n * n))
}

/// `(n / v(M)) ∫ |∂ρ|⁻²`, for identity Hessians only.
pub fn bound_flat_average(f: &DefiningFunction, q: &SurfaceQuadrature) -> Result<Estimate> {
    let n = f.n() as f64;
    let nv = f.n_vars();
    let mut worst = 0.0f64;
    for s in &q.samples {
        let h = f.jet3(&s.point).hessian;
        for j in 0..nv {
            for k in 0..nv {
                let target = if j == k { 1.0 } else { 0.0 };
                worst = worst.max((h[(j, k)] - target).norm());
            }
        }
    }
    if worst > FLAT_TOLERANCE {
        return Err(Error::NotFlat { deviation: worst });
    }
    let acc = integrate_vector(q, 2, |s| Ok(vec![1.0 / metric_at(f, &s.point)?.grad_len_sq, 1.0]))?;
    Ok(acc.ratio(0, 1).scale(n))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CjDj {
    pub j: usize,
    /// `∫ |ρ^j̄|² / |∂ρ|⁴`.
    pub c: Estimate,
    /// `∫ (ρ^{jj̄} − |ρ^j̄|² / |∂ρ|²)`.
    pub d: Estimate,
    /// `n² C_j / D_j`.
    pub ratio: Estimate,
}

/// The integrals attached to the trial function `z̄_j`.
pub fn cj_dj(f: &DefiningFunction, q: &SurfaceQuadrature, j: usize) -> Result<CjDj> {
    if j >= f.n_vars() {
        return Err(Error::VariableOutOfRange {
            index: j,
            n_vars: f.n_vars(),
        });
    }
    let n = f.n() as f64;
    let acc = integrate_vector(q, 3, |s| {
        let mp = metric_at(f, &s.point)?;
        let a2 = mp.grad_raised[j].norm_sqr();
        let len = mp.grad_len_sq;
        Ok(vec![a2 / (len * len), mp.hess_inv[(j, j)].re - a2 / len, 1.0])
    })?;
    let d = acc.estimate(1);
    let floor = 1e-12 * acc.value(2).abs();
    if d.value <= 3.0 * d.stderr + floor {
        return Err(Error::TrialIsCR {
            j,
            d: d.value,
            stderr: d.stderr,
        });
    }
    Ok(CjDj {
        j,
        c: acc.estimate(0),
        d,
        ratio: acc.ratio(0, 1).scale(n * n),
    })
}

/// `n / ν` for ellipsoids (flat quadratics), where the bound is attained on spheres.
pub fn bound_ellipsoid(f: &DefiningFunction, nu: f64) -> Option<f64> {
    f.is_flat_quadratic().then(|| f.n() as f64 / nu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::{sample_surface, QuadratureSpec};
    use crate::wirtinger::{make_ellipsoid, ComplexPolynomial};

    #[test]
    fn sphere_grid_bounds() {
        let f = DefiningFunction::sphere(1);
        let nu = 2.0;
        let q = sample_surface(&f, nu, &QuadratureSpec::product_grid(2000)).unwrap();
        let m = bound_max(&f, &q).unwrap();
        assert!((m.value - 0.5).abs() < 1e-12);
        assert!(bound_hessian_ratio(&f, &q).unwrap().within(0.5, 3.0));
        assert!(bound_flat_average(&f, &q).unwrap().within(0.5, 3.0));
        let cd = cj_dj(&f, &q, 0).unwrap();
        assert!(cd.ratio.within(0.5, 3.0), "{:?}", cd.ratio);
        assert_eq!(bound_ellipsoid(&f, nu), Some(0.5));
    }

    #[test]
    fn ellipsoid_max_is_refined() {
        let f = make_ellipsoid(&[0.5, 0.0]).unwrap();
        let q = sample_surface(&f, 1.0, &QuadratureSpec::product_grid(900)).unwrap();
        let m = bound_max(&f, &q).unwrap();
        assert!((m.value - 2.0).abs() < 1e-8, "{}", m.value);
        assert!(m.sampled <= m.value);
    }

    #[test]
    fn fubini_study_is_rejected() {
        let f = DefiningFunction::fubini_study(ComplexPolynomial::zero(2)).unwrap();
        let q = sample_surface(&f, 1.0, &QuadratureSpec::product_grid(400)).unwrap();
        assert!(matches!(bound_max(&f, &q), Err(Error::ConditionViolated)));
        assert!(matches!(bound_flat_average(&f, &q), Err(Error::NotFlat { .. })));
        let e = std::f64::consts::E;
        let b = bound_hessian_ratio(&f, &q).unwrap();
        assert!((b.value - e / (e - 1.0)).abs() < 1e-9, "{}", b.value);
    }
}
