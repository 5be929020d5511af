#![allow(dead_code)]

use kohnbound::sampler::radial_solve;
use kohnbound::wirtinger::{make_ellipsoid, ComplexPolynomial, DefiningFunction, Monomial};
use kohnbound::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn random_direction(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / norm).collect()
}

/// A point of `ρ = ν` on a random ray from the origin.
pub fn surface_point(f: &DefiningFunction, nu: f64, rng: &mut ChaCha8Rng) -> Vec<C64> {
    let d = random_direction(rng, 2 * f.n_vars());
    let t = radial_solve(f, nu, &d, &[]).expect("star-shaped");
    d.chunks(2).map(|p| c(p[0] * t, p[1] * t)).collect()
}

/// Random complex polynomial with every monomial of degree `≤ degree`.
pub fn random_polynomial(n_vars: usize, degree: usize, rng: &mut ChaCha8Rng) -> ComplexPolynomial {
    let mut p = ComplexPolynomial::zero(n_vars);
    let mut exps = vec![0u8; 2 * n_vars];
    fill(&mut exps, 0, degree, &mut |e| {
        let mut m = Monomial::ONE;
        m.hol[..n_vars].copy_from_slice(&e[..n_vars]);
        m.anti[..n_vars].copy_from_slice(&e[n_vars..]);
        let coeff = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        p.add_term(m, coeff);
    });
    p
}

fn fill(e: &mut [u8], slot: usize, left: usize, out: &mut impl FnMut(&[u8])) {
    if slot == e.len() {
        out(e);
        return;
    }
    for v in 0..=left {
        e[slot] = v as u8;
        fill(e, slot + 1, left - v, out);
    }
    e[slot] = 0;
}

/// `‖Z‖² + ε|z₁|⁴`: strictly plurisubharmonic, Hessian not constant.
pub fn quartic(n: usize, eps: f64) -> DefiningFunction {
    let nv = n + 1;
    let z1 = ComplexPolynomial::z(nv, 0) * ComplexPolynomial::zbar(nv, 0);
    DefiningFunction::polynomial(ComplexPolynomial::norm_sq(nv) + z1.pow(2).scale(c(eps, 0.0))).unwrap()
}

/// A small zoo of surfaces with their levels.
pub fn zoo() -> Vec<(&'static str, DefiningFunction, f64)> {
    // small enough that the level set around the origin stays bounded
    let hol = ComplexPolynomial::z(2, 0).pow(2).scale(c(0.02, 0.01))
        + (ComplexPolynomial::z(2, 0) * ComplexPolynomial::z(2, 1)).scale(c(0.0, 0.02));
    vec![
        ("sphere n=1", DefiningFunction::sphere(1), 1.3),
        ("sphere n=2", DefiningFunction::sphere(2), 0.7),
        ("ellipsoid", make_ellipsoid(&[0.5, 0.2]).unwrap(), 1.0),
        ("ellipsoid n=2", make_ellipsoid(&[0.7, 0.1, 0.3]).unwrap(), 2.0),
        ("fubini-study", DefiningFunction::fubini_study(ComplexPolynomial::zero(2)).unwrap(), 1.0),
        ("fubini-study twisted", DefiningFunction::fubini_study(hol).unwrap(), 0.8),
        ("quartic", quartic(1, 0.4), 1.0),
        ("quartic n=2", quartic(2, 0.3), 1.5),
    ]
}
