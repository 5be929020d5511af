//! Quadrature on a compact level set `M = ρ⁻¹(ν)` against the contact volume
//! form `θ ∧ (dθ)ⁿ`.
//!
//! `M` is parametrized radially over the unit sphere `S^{2n+1}` about a
//! center point: each direction `d` is mapped to `center + t(d)·d` with
//! `ρ(center + t(d)·d) = ν`. The weight of a sample is the parameter-sphere
//! measure times the contact form evaluated on the pushed-forward oriented
//! tangent frame, so weighted sums approximate `∫_M (·) θ∧(dθ)ⁿ` directly.
//!
//! Real vectors in `ℝ^{2n+2}` are ordered `(x_1, y_1, x_2, y_2, …)` and map
//! to complex coordinates `z_j = x_j + i y_j`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::pfaffian;
use crate::wirtinger::{DefiningFunction, Jet3};

/// Directions per deterministic random stream.
pub const CHUNK: usize = 1024;
/// Radius beyond which the radial search gives up.
pub const MAX_RADIUS: f64 = 1e6;
const MAX_ITERATIONS: usize = 60;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    MonteCarlo,
    ProductGrid,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureSpec {
    pub method: Method,
    pub count: usize,
    pub seed: u64,
    /// Base point of the radial parametrization; empty means the origin.
    pub center: Vec<C64>,
}

impl QuadratureSpec {
    pub fn monte_carlo(count: usize, seed: u64) -> Self {
        Self {
            method: Method::MonteCarlo,
            count,
            seed,
            center: Vec::new(),
        }
    }

    pub fn product_grid(count: usize) -> Self {
        Self {
            method: Method::ProductGrid,
            count,
            seed: 0,
            center: Vec::new(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SurfaceSample {
    pub point: Vec<C64>,
    /// Contact-volume weight (`θ∧(dθ)ⁿ` measure).
    pub weight: f64,
    /// Unit direction in `ℝ^{2n+2}` used for the radial solve.
    pub direction: Vec<f64>,
    /// Radial parameter `t` with `point = center + t·direction`.
    pub radius: f64,
}

/// A weighted sample set on one level set.
#[derive(Clone, Debug)]
pub struct SurfaceQuadrature {
    pub samples: Vec<SurfaceSample>,
    pub method: Method,
    pub level: f64,
    pub n: usize,
    /// Center of the radial parametrization; empty means the origin.
    pub center: Vec<C64>,
}

impl SurfaceQuadrature {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Contact volume `v(M)`.
    pub fn volume(&self) -> Estimate {
        integrate(self, |_| 1.0)
    }
}

/// A quadrature value with its standard error (zero for deterministic rules).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, stderr: 0.0 }
    }

    /// `|value − target| ≤ k·stderr`, with a relative floor of `1e-9` for
    /// quantities whose stochastic error vanishes identically.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.stderr + 1e-9 * target.abs().max(1e-300)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            value: self.value * c,
            stderr: self.stderr * c.abs(),
        }
    }
}

/// Solves `ρ(center + t·dir) = ν` for `t > 0`.
pub fn radial_solve(f: &DefiningFunction, nu: f64, dir: &[f64], center: &[C64]) -> Result<f64> {
    let nv = f.n_vars();
    if dir.len() != 2 * nv {
        return Err(Error::DimensionMismatch {
            expected: 2 * nv,
            got: dir.len(),
        });
    }
    let origin = vec![C64::new(0.0, 0.0); nv];
    let center = if center.is_empty() { &origin[..] } else { center };
    let d = to_complex(dir);
    let at = |t: f64| -> Vec<C64> { center.iter().zip(&d).map(|(c, dj)| c + dj * t).collect() };
    let rho0 = f.value(center);
    if rho0 >= nu {
        return Err(Error::CenterOutside {
            value: rho0,
            level: nu,
        });
    }
    let tol = 1e-14 * nu.abs().max(1.0);

    // bracket [lo, hi] with ρ(lo) < ν ≤ ρ(hi)
    let (mut lo, mut hi);
    let mut t = 1.0;
    if f.value(&at(t)) >= nu {
        hi = t;
        loop {
            t /= 1.5;
            if f.value(&at(t)) < nu {
                lo = t;
                break;
            }
            hi = t;
            if t < 1e-300 {
                return Err(Error::NotStarShaped);
            }
        }
    } else {
        lo = t;
        loop {
            t *= 1.5;
            if t > MAX_RADIUS {
                return Err(Error::NoRoot { radius: MAX_RADIUS });
            }
            if f.value(&at(t)) >= nu {
                hi = t;
                break;
            }
            lo = t;
        }
    }

    let radial = |t: f64| -> (f64, f64) {
        let p = at(t);
        let (v, g) = f.value_and_gradient(&p);
        (v - nu, radial_derivative(&g, &d))
    };
    let mut t = 0.5 * (lo + hi);
    for _ in 0..MAX_ITERATIONS {
        let (g, dg) = radial(t);
        if g.abs() <= tol {
            break;
        }
        if g < 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let newton = if dg > 0.0 { t - g / dg } else { f64::NAN };
        t = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    let (g, dg) = radial(t);
    if !(dg > 0.0) {
        return Err(Error::NotStarShaped);
    }
    if g.abs() > 1e-12 * nu.abs().max(1.0) {
        return Err(Error::NoConvergence);
    }
    Ok(t)
}

/// Directional derivative of `ρ` along a real vector given in complex
/// coordinates: `dρ(v) = 2 Re Σ ρ_j v_j`.
pub fn radial_derivative(grad: &[C64], v: &[C64]) -> f64 {
    2.0 * grad.iter().zip(v).map(|(g, x)| (g * x).re).sum::<f64>()
}

fn to_complex(real: &[f64]) -> Vec<C64> {
    real.chunks(2).map(|c| C64::new(c[0], c[1])).collect()
}

/// `θ(v) = Im Σ ρ_j v_j` for `θ = (i/2)(∂̄ρ − ∂ρ)`.
pub fn theta(grad: &[C64], v: &[C64]) -> f64 {
    grad.iter().zip(v).map(|(g, x)| g * x).sum::<C64>().im
}

/// `dθ(v, w) = −2 Im(vᵀ H w̄)` for `dθ = i ρ_{jk̄} dz^j ∧ dz̄^k`.
pub fn dtheta(hessian: &DMatrix<C64>, v: &[C64], w: &[C64]) -> f64 {
    let nv = v.len();
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..nv {
        for k in 0..nv {
            acc += v[j] * hessian[(j, k)] * w[k].conj();
        }
    }
    -2.0 * acc.im
}

/// Evaluates `θ ∧ (dθ)ⁿ` at `p` on `2n + 1` tangent vectors.
pub fn contact_density(f: &DefiningFunction, p: &[C64], frame: &[Vec<C64>]) -> Result<f64> {
    let jet = f.jet3(p);
    contact_density_with_jet(&jet, frame)
}

pub(crate) fn contact_density_with_jet(jet: &Jet3, frame: &[Vec<C64>]) -> Result<f64> {
    let nv = jet.n_vars();
    let n = nv - 1;
    if frame.len() != 2 * n + 1 {
        return Err(Error::DimensionMismatch {
            expected: 2 * n + 1,
            got: frame.len(),
        });
    }
    let grad_norm = 2.0 * jet.grad.iter().map(|g| g.norm_sqr()).sum::<f64>().sqrt();
    for (index, v) in frame.iter().enumerate() {
        let vnorm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        let residual = radial_derivative(&jet.grad, v).abs() / (grad_norm * vnorm).max(1e-300);
        if residual > 1e-8 {
            return Err(Error::FrameNotTangent { index, residual });
        }
    }
    // θ∧(dθ)ⁿ(v_0..v_2n) = n! · Pf [[0, θ(v)ᵀ], [−θ(v), dθ(v_a, v_b)]]
    let m = 2 * n + 2;
    let mut bordered = DMatrix::<f64>::zeros(m, m);
    for a in 0..(2 * n + 1) {
        let t = theta(&jet.grad, &frame[a]);
        bordered[(0, a + 1)] = t;
        bordered[(a + 1, 0)] = -t;
        for b in (a + 1)..(2 * n + 1) {
            let w = dtheta(&jet.hessian, &frame[a], &frame[b]);
            bordered[(a + 1, b + 1)] = w;
            bordered[(b + 1, a + 1)] = -w;
        }
    }
    let factorial: f64 = (1..=n).map(|k| k as f64).product();
    Ok(factorial * pfaffian(&bordered))
}

/// Orthonormal frame of `d^⊥` oriented so that `det[d, e_1, …] > 0`.
pub fn oriented_tangent_frame(d: &[f64]) -> Vec<Vec<f64>> {
    let m = d.len();
    let dn = d.iter().map(|x| x * x).sum::<f64>().sqrt();
    let unit: Vec<f64> = d.iter().map(|x| x / dn).collect();
    let d = unit.as_slice();
    let skip = (0..m)
        .max_by(|&a, &b| d[a].abs().total_cmp(&d[b].abs()))
        .unwrap();
    let mut frame: Vec<Vec<f64>> = Vec::with_capacity(m - 1);
    for k in (0..m).filter(|&k| k != skip) {
        let mut v = vec![0.0; m];
        v[k] = 1.0;
        for _ in 0..2 {
            for u in std::iter::once(d).chain(frame.iter().map(|x| x.as_slice())) {
                let dot: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= dot * ui;
                }
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        frame.push(v);
    }
    let det = DMatrix::from_fn(m, m, |r, c| if c == 0 { d[r] } else { frame[c - 1][r] }).determinant();
    if det < 0.0 {
        frame.last_mut().unwrap().iter_mut().for_each(|x| *x = -*x);
    }
    frame
}

/// Surface area of the unit sphere `S^{2N−1} ⊂ ℝ^{2N}`: `2π^N / (N−1)!`.
pub fn unit_sphere_area(n_vars: usize) -> f64 {
    let fact: f64 = (1..n_vars).map(|k| k as f64).product();
    2.0 * std::f64::consts::PI.powi(n_vars as i32) / fact
}

/// Maps one parameter direction to a weighted surface sample.
fn sample_direction(
    f: &DefiningFunction,
    nu: f64,
    dir: Vec<f64>,
    center: &[C64],
    sphere_weight: f64,
) -> Result<SurfaceSample> {
    let t = radial_solve(f, nu, &dir, center)?;
    let d = to_complex(&dir);
    let point: Vec<C64> = if center.is_empty() {
        d.iter().map(|x| x * t).collect()
    } else {
        center.iter().zip(&d).map(|(c, x)| c + x * t).collect()
    };
    let jet = f.jet3(&point);
    let gd = radial_derivative(&jet.grad, &d);
    // Exact Jacobian of the radial map d ↦ t(d)·d on T_d S:
    // v ↦ t·v + (dt·v)·d with dt·v = −t·dρ(v)/dρ(d).
    let frame: Vec<Vec<C64>> = oriented_tangent_frame(&dir)
        .iter()
        .map(|e| {
            let ec = to_complex(e);
            let dt = -t * radial_derivative(&jet.grad, &ec) / gd;
            ec.iter().zip(&d).map(|(x, y)| x * t + y * dt).collect()
        })
        .collect();
    let density = contact_density_with_jet(&jet, &frame)?;
    if !(density > 0.0) {
        return Err(Error::OrientationFlip { density });
    }
    Ok(SurfaceSample {
        point,
        weight: sphere_weight * density,
        direction: dir,
        radius: t,
    })
}

/// Draws the quadrature for `ρ = ν`. Output depends only on `(spec, f, nu)`,
/// not on the number of worker threads.
pub fn sample_surface(f: &DefiningFunction, nu: f64, spec: &QuadratureSpec) -> Result<SurfaceQuadrature> {
    if spec.count == 0 {
        return Err(Error::EmptySpec);
    }
    let nv = f.n_vars();
    if !spec.center.is_empty() && spec.center.len() != nv {
        return Err(Error::DimensionMismatch {
            expected: nv,
            got: spec.center.len(),
        });
    }
    let samples = match spec.method {
        Method::MonteCarlo => {
            let count = spec.count;
            let sphere_weight = unit_sphere_area(nv) / count as f64;
            let chunks = count.div_ceil(CHUNK);
            let nested: Vec<Vec<SurfaceSample>> = (0..chunks)
                .into_par_iter()
                .map(|c| {
                    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
                    rng.set_stream(c as u64);
                    let len = CHUNK.min(count - c * CHUNK);
                    (0..len)
                        .map(|_| {
                            let dir = random_direction(&mut rng, 2 * nv);
                            sample_direction(f, nu, dir, &spec.center, sphere_weight)
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<_>>()?;
            nested.into_iter().flatten().collect()
        }
        Method::ProductGrid => {
            if nv != 2 {
                return Err(Error::GridUnsupported { n: nv - 1 });
            }
            let grid = hopf_grid(spec.count);
            grid.into_par_iter()
                .map(|(dir, w)| sample_direction(f, nu, dir, &spec.center, w))
                .collect::<Result<Vec<_>>>()?
        }
    };
    Ok(SurfaceQuadrature {
        samples,
        method: spec.method,
        level: nu,
        n: nv - 1,
        center: spec.center.clone(),
    })
}

fn random_direction(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..m).map(|_| StandardNormal.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Product rule on `S³` in Hopf coordinates
/// `(cos η e^{iα}, sin η e^{iβ})`, `dσ = sin η cos η dη dα dβ`:
/// Gauss–Legendre in `η`, periodic midpoint in `α` and `β`.
fn hopf_grid(budget: usize) -> Vec<(Vec<f64>, f64)> {
    let m = ((budget as f64 / 4.0).cbrt().round() as usize).max(1);
    let mp = 2 * m;
    let (nodes, weights) = gauss_legendre(m);
    let half_pi = std::f64::consts::FRAC_PI_2;
    let dang = 2.0 * std::f64::consts::PI / mp as f64;
    let mut out = Vec::with_capacity(m * mp * mp);
    for (x, w) in nodes.iter().zip(&weights) {
        let eta = half_pi * 0.5 * (x + 1.0);
        let weta = half_pi * 0.5 * w * eta.sin() * eta.cos();
        for ia in 0..mp {
            let a = dang * (ia as f64 + 0.5);
            for ib in 0..mp {
                let b = dang * (ib as f64 + 0.5);
                let dir = vec![
                    eta.cos() * a.cos(),
                    eta.cos() * a.sin(),
                    eta.sin() * b.cos(),
                    eta.sin() * b.sin(),
                ];
                out.push((dir, weta * dang * dang));
            }
        }
    }
    out
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 1);
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// `Σ w_i g(p_i)` with its standard error.
pub fn integrate<G>(q: &SurfaceQuadrature, g: G) -> Estimate
where
    G: Fn(&SurfaceSample) -> f64 + Sync,
{
    let acc = integrate_vector(q, 1, |s| Ok(vec![g(s)])).expect("infallible integrand");
    acc.estimate(0)
}

/// Complex integral; the standard error combines real and imaginary parts.
pub fn integrate_complex<G>(q: &SurfaceQuadrature, g: G) -> (C64, f64)
where
    G: Fn(&SurfaceSample) -> C64 + Sync,
{
    let acc = integrate_vector(q, 2, |s| {
        let v = g(s);
        Ok(vec![v.re, v.im])
    })
    .expect("infallible integrand");
    let (re, im) = (acc.estimate(0), acc.estimate(1));
    (C64::new(re.value, im.value), re.stderr.hypot(im.stderr))
}

/// Several integrals from one pass, with the covariance of their estimators.
#[derive(Clone, Debug)]
pub struct Integrals {
    values: Vec<f64>,
    /// Covariance of the estimators (not of the integrands), row-major `k×k`.
    cov: Vec<f64>,
    k: usize,
}

impl Integrals {
    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn estimate(&self, i: usize) -> Estimate {
        Estimate {
            value: self.values[i],
            stderr: self.cov[i * self.k + i].max(0.0).sqrt(),
        }
    }

    pub fn covariance(&self, i: usize, j: usize) -> f64 {
        self.cov[i * self.k + j]
    }

    /// `I_i / I_j` with a first-order (delta-method) standard error.
    pub fn ratio(&self, i: usize, j: usize) -> Estimate {
        let (x, y) = (self.values[i], self.values[j]);
        let r = x / y;
        let var = (self.covariance(i, i) - 2.0 * r * self.covariance(i, j)
            + r * r * self.covariance(j, j))
            / (y * y);
        Estimate {
            value: r,
            stderr: var.max(0.0).sqrt(),
        }
    }

    /// `I_i − I_j` with a correlated standard error.
    pub fn difference(&self, i: usize, j: usize) -> Estimate {
        let var = self.covariance(i, i) - 2.0 * self.covariance(i, j) + self.covariance(j, j);
        Estimate {
            value: self.values[i] - self.values[j],
            stderr: var.max(0.0).sqrt(),
        }
    }
}

/// Evaluates `k` integrands per sample (in parallel, order-preserving) and
/// reduces them sequentially, so results are independent of thread count.
pub fn integrate_vector<G>(q: &SurfaceQuadrature, k: usize, g: G) -> Result<Integrals>
where
    G: Fn(&SurfaceSample) -> Result<Vec<f64>> + Sync,
{
    if q.is_empty() {
        return Err(Error::EmptySpec);
    }
    let per_sample: Vec<Vec<f64>> = q.samples.par_iter().map(&g).collect::<Result<_>>()?;
    let mut values = vec![0.0; k];
    for (s, row) in q.samples.iter().zip(&per_sample) {
        debug_assert_eq!(row.len(), k);
        for (acc, v) in values.iter_mut().zip(row) {
            *acc += s.weight * v;
        }
    }
    let mut cov = vec![0.0; k * k];
    let count = q.len();
    if q.method == Method::MonteCarlo && count > 1 {
        // contributions Y_i = N w_i g_i; Var(mean) = S²_Y / N
        let nf = count as f64;
        for (s, row) in q.samples.iter().zip(&per_sample) {
            for a in 0..k {
                let ya = nf * s.weight * row[a] - values[a];
                for b in a..k {
                    let yb = nf * s.weight * row[b] - values[b];
                    cov[a * k + b] += ya * yb;
                }
            }
        }
        let denom = (nf - 1.0) * nf;
        for a in 0..k {
            for b in a..k {
                cov[a * k + b] /= denom;
                cov[b * k + a] = cov[a * k + b];
            }
        }
    }
    Ok(Integrals { values, cov, k })
}
