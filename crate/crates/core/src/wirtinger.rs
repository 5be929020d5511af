//! Polynomials in `z` and `z̄` with exact Wirtinger differentiation, and the
//! defining functions built from them.
//!
//! A term `c · z^a · z̄^b` is stored under its bi-multi-index `(a, b)`. The
//! derivative `∂/∂z_j` acts on `a` only and `∂/∂z̄_j` on `b` only, so
//! differentiation is exact bookkeeping on exponents.

mod parse;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub use parse::parse_polynomial;

/// Largest supported ambient dimension `n + 1`.
pub const MAX_VARS: usize = 8;

/// Exponent pair `(a, b)` of the monomial `z^a z̄^b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub hol: [u8; MAX_VARS],
    pub anti: [u8; MAX_VARS],
}

impl Monomial {
    pub const ONE: Monomial = Monomial {
        hol: [0; MAX_VARS],
        anti: [0; MAX_VARS],
    };

    pub fn degree(&self) -> usize {
        self.hol.iter().chain(&self.anti).map(|&e| e as usize).sum()
    }

    /// Swap holomorphic and antiholomorphic exponents (complex conjugation).
    pub fn conj(&self) -> Monomial {
        Monomial {
            hol: self.anti,
            anti: self.hol,
        }
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = *self;
        for j in 0..MAX_VARS {
            out.hol[j] += other.hol[j];
            out.anti[j] += other.anti[j];
        }
        out
    }
}

/// A polynomial `Σ c_{ab} z^a z̄^b` in `n_vars` complex variables.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexPolynomial {
    n_vars: usize,
    terms: BTreeMap<Monomial, C64>,
}

impl ComplexPolynomial {
    pub fn zero(n_vars: usize) -> Self {
        assert!(
            (1..=MAX_VARS).contains(&n_vars),
            "n_vars must lie in 1..={MAX_VARS}"
        );
        Self {
            n_vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n_vars: usize, c: C64) -> Self {
        let mut p = Self::zero(n_vars);
        p.add_term(Monomial::ONE, c);
        p
    }

    /// The coordinate `z_j` (0-based).
    pub fn z(n_vars: usize, j: usize) -> Self {
        let mut m = Monomial::ONE;
        m.hol[j] = 1;
        Self::monomial(n_vars, m, C64::new(1.0, 0.0))
    }

    /// The conjugate coordinate `z̄_j` (0-based).
    pub fn zbar(n_vars: usize, j: usize) -> Self {
        let mut m = Monomial::ONE;
        m.anti[j] = 1;
        Self::monomial(n_vars, m, C64::new(1.0, 0.0))
    }

    pub fn monomial(n_vars: usize, m: Monomial, c: C64) -> Self {
        let mut p = Self::zero(n_vars);
        p.add_term(m, c);
        p
    }

    /// `‖Z‖² = Σ z_j z̄_j`.
    pub fn norm_sq(n_vars: usize) -> Self {
        (0..n_vars).fold(Self::zero(n_vars), |acc, j| {
            acc + Self::z(n_vars, j) * Self::zbar(n_vars, j)
        })
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    /// Adds `c · m`, dropping the term if it cancels to zero.
    pub fn add_term(&mut self, m: Monomial, c: C64) {
        debug_assert!(m.hol[self.n_vars..].iter().all(|&e| e == 0));
        debug_assert!(m.anti[self.n_vars..].iter().all(|&e| e == 0));
        let entry = self.terms.entry(m).or_insert(C64::new(0.0, 0.0));
        *entry += c;
        if *entry == C64::new(0.0, 0.0) {
            self.terms.remove(&m);
        }
    }

    pub fn coeff(&self, m: &Monomial) -> C64 {
        self.terms.get(m).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C64)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Largest exponent of any single variable, holomorphic or not.
    pub fn max_exponent(&self) -> usize {
        self.terms
            .keys()
            .flat_map(|m| m.hol.iter().chain(&m.anti))
            .map(|&e| e as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn is_holomorphic(&self) -> bool {
        self.terms.keys().all(|m| m.anti.iter().all(|&e| e == 0))
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut out = Self::zero(self.n_vars);
        for (m, v) in &self.terms {
            out.add_term(*m, v * c);
        }
        out
    }

    /// Complex conjugate `p̄`.
    pub fn conj(&self) -> Self {
        let mut out = Self::zero(self.n_vars);
        for (m, v) in &self.terms {
            out.add_term(m.conj(), v.conj());
        }
        out
    }

    /// `2 Re p = p + p̄`.
    pub fn twice_real_part(&self) -> Self {
        self.clone() + self.conj()
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::constant(self.n_vars, C64::new(1.0, 0.0)), |acc, _| {
            acc * self.clone()
        })
    }

    /// Exact Wirtinger derivative `∂/∂z_var`, or `∂/∂z̄_var` when `conjugated`.
    pub fn derive(&self, var: usize, conjugated: bool) -> Result<Self> {
        if var >= self.n_vars {
            return Err(Error::VariableOutOfRange {
                index: var,
                n_vars: self.n_vars,
            });
        }
        let mut out = Self::zero(self.n_vars);
        for (m, c) in &self.terms {
            let exps = if conjugated { &m.anti } else { &m.hol };
            let e = exps[var];
            if e == 0 {
                continue;
            }
            let mut dm = *m;
            if conjugated {
                dm.anti[var] -= 1;
            } else {
                dm.hol[var] -= 1;
            }
            out.add_term(dm, c * e as f64);
        }
        Ok(out)
    }

    pub fn eval(&self, z: &[C64]) -> C64 {
        let powers = Powers::new(z, self.max_exponent());
        self.eval_with(&powers)
    }

    /// Evaluates against a precomputed power table.
    pub fn eval_with(&self, powers: &Powers) -> C64 {
        self.terms
            .iter()
            .map(|(m, c)| c * powers.monomial(m))
            .sum()
    }
}

/// `coeff(a,b) = conj(coeff(b,a))` for every stored term, compared exactly.
pub fn reality_check(p: &ComplexPolynomial) -> bool {
    p.terms().all(|(m, c)| p.coeff(&m.conj()) == c.conj())
}

/// Free-function form of [`ComplexPolynomial::derive`].
pub fn wirtinger_derive(
    p: &ComplexPolynomial,
    var: usize,
    conjugated: bool,
) -> Result<ComplexPolynomial> {
    p.derive(var, conjugated)
}

impl Add for ComplexPolynomial {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        assert_eq!(self.n_vars, rhs.n_vars, "variable count mismatch");
        for (m, c) in rhs.terms {
            self.add_term(m, c);
        }
        self
    }
}

impl Sub for ComplexPolynomial {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for ComplexPolynomial {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl Mul for ComplexPolynomial {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        assert_eq!(self.n_vars, rhs.n_vars, "variable count mismatch");
        let mut out = Self::zero(self.n_vars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl fmt::Display for ComplexPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({}{:+}i)", c.re, c.im)?;
            for j in 0..self.n_vars {
                match m.hol[j] {
                    0 => {}
                    1 => write!(f, " * z{}", j + 1)?,
                    e => write!(f, " * z{}^{}", j + 1, e)?,
                }
                match m.anti[j] {
                    0 => {}
                    1 => write!(f, " * c{}", j + 1)?,
                    e => write!(f, " * c{}^{}", j + 1, e)?,
                }
            }
        }
        Ok(())
    }
}

/// Table of `z_j^e` and `z̄_j^e` for one point.
#[derive(Clone, Debug)]
pub struct Powers {
    hol: Vec<Vec<C64>>,
    anti: Vec<Vec<C64>>,
}

impl Powers {
    pub fn new(z: &[C64], max_exp: usize) -> Self {
        let table = |w: &dyn Fn(C64) -> C64| {
            z.iter()
                .map(|&zj| {
                    let base = w(zj);
                    let mut row = Vec::with_capacity(max_exp + 1);
                    let mut acc = C64::new(1.0, 0.0);
                    for _ in 0..=max_exp {
                        row.push(acc);
                        acc *= base;
                    }
                    row
                })
                .collect::<Vec<_>>()
        };
        Self {
            hol: table(&|v| v),
            anti: table(&|v| v.conj()),
        }
    }

    pub fn monomial(&self, m: &Monomial) -> C64 {
        let mut v = C64::new(1.0, 0.0);
        for j in 0..self.hol.len() {
            let (a, b) = (m.hol[j] as usize, m.anti[j] as usize);
            if a > 0 {
                v *= self.hol[j][a];
            }
            if b > 0 {
                v *= self.anti[j][b];
            }
        }
        v
    }
}

/// Value and derivatives of `ρ` up to order three at one point.
///
/// Index conventions (0-based): `grad[j] = ρ_j`, `hessian[(j, k)] = ρ_{jk̄}`,
/// `third(j, p, q) = ρ_{jpq̄}`.
#[derive(Clone, Debug)]
pub struct Jet3 {
    pub value: f64,
    pub grad: Vec<C64>,
    pub grad_bar: Vec<C64>,
    pub hessian: DMatrix<C64>,
    third_mixed: Vec<C64>,
}

impl Jet3 {
    pub fn n_vars(&self) -> usize {
        self.grad.len()
    }

    /// `ρ_{jpq̄}`: holomorphic in `j, p`, antiholomorphic in `q`.
    pub fn third(&self, j: usize, p: usize, q: usize) -> C64 {
        let n = self.n_vars();
        self.third_mixed[(j * n + p) * n + q]
    }

    /// `ρ_{jp̄q̄} = conj(ρ_{pqj̄})`.
    pub fn third_bar(&self, j: usize, p: usize, q: usize) -> C64 {
        self.third(p, q, j).conj()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DefiningKind {
    Polynomial(ComplexPolynomial),
    /// `log(1 + ‖Z‖²) + 2 Re hol(Z)` with `hol` holomorphic.
    FubiniStudy { hol: ComplexPolynomial },
}

/// Precomputed derivative polynomials of a polynomial `ρ`.
#[derive(Clone, Debug)]
struct PolyDerivatives {
    grad: Vec<ComplexPolynomial>,
    hessian: Vec<ComplexPolynomial>,
    third: Vec<ComplexPolynomial>,
    max_exp: usize,
}

/// A real, smooth defining function `ρ` on `ℂ^{n+1}`.
#[derive(Clone, Debug)]
pub struct DefiningFunction {
    kind: DefiningKind,
    n: usize,
    derivs: PolyDerivatives,
}

impl DefiningFunction {
    /// Wraps a real-valued polynomial. The CR dimension is `n_vars - 1`.
    pub fn polynomial(rho: ComplexPolynomial) -> Result<Self> {
        if !reality_check(&rho) {
            return Err(Error::Config {
                key: "rho".into(),
                message: "polynomial is not real-valued".into(),
            });
        }
        Self::build(DefiningKind::Polynomial(rho))
    }

    /// `log(1 + ‖Z‖²) + 2 Re hol(Z)`; `hol` must be holomorphic.
    pub fn fubini_study(hol: ComplexPolynomial) -> Result<Self> {
        if !hol.is_holomorphic() {
            return Err(Error::Config {
                key: "hol".into(),
                message: "polynomial contains conjugate variables".into(),
            });
        }
        Self::build(DefiningKind::FubiniStudy { hol })
    }

    /// The sphere family `‖Z‖²` in `ℂ^{n+1}`.
    pub fn sphere(n: usize) -> Self {
        Self::polynomial(ComplexPolynomial::norm_sq(n + 1)).expect("norm is real")
    }

    fn build(kind: DefiningKind) -> Result<Self> {
        let base = match &kind {
            DefiningKind::Polynomial(p) => p.clone(),
            DefiningKind::FubiniStudy { hol } => hol.clone(),
        };
        let nv = base.n_vars();
        if nv < 2 {
            return Err(Error::Config {
                key: "n".into(),
                message: "need at least two complex variables (n >= 1)".into(),
            });
        }
        let grad: Vec<_> = (0..nv)
            .map(|j| base.derive(j, false))
            .collect::<Result<_>>()?;
        let mut hessian = Vec::with_capacity(nv * nv);
        for g in &grad {
            for k in 0..nv {
                hessian.push(g.derive(k, true)?);
            }
        }
        let mut third = Vec::with_capacity(nv * nv * nv);
        for g in &grad {
            for p in 0..nv {
                let gp = g.derive(p, false)?;
                for q in 0..nv {
                    third.push(gp.derive(q, true)?);
                }
            }
        }
        let derivs = PolyDerivatives {
            grad,
            hessian,
            third,
            max_exp: base.max_exponent(),
        };
        Ok(Self {
            kind,
            n: nv - 1,
            derivs,
        })
    }

    pub fn kind(&self) -> &DefiningKind {
        &self.kind
    }

    /// CR dimension `n`.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_vars(&self) -> usize {
        self.n + 1
    }

    /// Identity complex Hessian everywhere (quadratic part `‖Z‖²` plus
    /// pluriharmonic terms).
    pub fn has_flat_hessian(&self) -> bool {
        match &self.kind {
            DefiningKind::FubiniStudy { .. } => false,
            DefiningKind::Polynomial(_) => {
                let nv = self.n_vars();
                (0..nv).all(|j| {
                    (0..nv).all(|k| {
                        let h = &self.derivs.hessian[j * nv + k];
                        let target = if j == k { 1.0 } else { 0.0 };
                        let c = ComplexPolynomial::constant(nv, C64::new(target, 0.0));
                        *h == c || (target == 0.0 && h.is_zero())
                    })
                })
            }
        }
    }

    /// Homogeneous real quadratic with identity Hessian (the ellipsoid family).
    pub fn is_flat_quadratic(&self) -> bool {
        match &self.kind {
            DefiningKind::Polynomial(p) => {
                self.has_flat_hessian() && p.terms().all(|(m, _)| m.degree() == 2)
            }
            DefiningKind::FubiniStudy { .. } => false,
        }
    }

    pub fn value(&self, z: &[C64]) -> f64 {
        match &self.kind {
            DefiningKind::Polynomial(p) => p.eval(z).re,
            DefiningKind::FubiniStudy { hol } => {
                let t: f64 = z.iter().map(|v| v.norm_sqr()).sum();
                t.ln_1p() + 2.0 * hol.eval(z).re
            }
        }
    }

    /// Holomorphic gradient `ρ_j`.
    pub fn gradient(&self, z: &[C64]) -> Vec<C64> {
        let powers = Powers::new(z, self.derivs.max_exp);
        let mut g: Vec<C64> = self
            .derivs
            .grad
            .iter()
            .map(|p| p.eval_with(&powers))
            .collect();
        if let DefiningKind::FubiniStudy { .. } = self.kind {
            let s = 1.0 + z.iter().map(|v| v.norm_sqr()).sum::<f64>();
            for (gj, zj) in g.iter_mut().zip(z) {
                *gj += zj.conj() / s;
            }
        }
        g
    }

    /// Value together with the holomorphic gradient.
    pub fn value_and_gradient(&self, z: &[C64]) -> (f64, Vec<C64>) {
        (self.value(z), self.gradient(z))
    }

    /// Full three-jet at `z`.
    pub fn jet3(&self, z: &[C64]) -> Jet3 {
        let nv = self.n_vars();
        let powers = Powers::new(z, self.derivs.max_exp);
        let value = self.value(z);
        let grad = self.gradient(z);
        let mut hessian = DMatrix::from_fn(nv, nv, |j, k| {
            self.derivs.hessian[j * nv + k].eval_with(&powers)
        });
        let mut third_mixed: Vec<C64> = self
            .derivs
            .third
            .iter()
            .map(|p| p.eval_with(&powers))
            .collect();
        if let DefiningKind::FubiniStudy { .. } = self.kind {
            let s = 1.0 + z.iter().map(|v| v.norm_sqr()).sum::<f64>();
            let (s2, s3) = (s * s, s * s * s);
            for j in 0..nv {
                for k in 0..nv {
                    let delta = if j == k { 1.0 } else { 0.0 };
                    hessian[(j, k)] += delta / s - z[j].conj() * z[k] / s2;
                }
            }
            for j in 0..nv {
                for p in 0..nv {
                    for q in 0..nv {
                        let mut v = z[j].conj() * z[p].conj() * z[q] * (2.0 / s3);
                        if j == q {
                            v -= z[p].conj() / s2;
                        }
                        if p == q {
                            v -= z[j].conj() / s2;
                        }
                        third_mixed[(j * nv + p) * nv + q] += v;
                    }
                }
            }
        }
        let grad_bar = grad.iter().map(|g| g.conj()).collect();
        Jet3 {
            value,
            grad,
            grad_bar,
            hessian,
            third_mixed,
        }
    }
}

/// The normalized ellipsoid `‖Z‖² + Re Σ A_j z_j²`; requires `0 <= A_j < 1`.
pub fn make_ellipsoid(a: &[f64]) -> Result<DefiningFunction> {
    let nv = a.len();
    if !(2..=MAX_VARS).contains(&nv) {
        return Err(Error::Config {
            key: "A".into(),
            message: format!("need between 2 and {MAX_VARS} coefficients, got {nv}"),
        });
    }
    for (index, &value) in a.iter().enumerate() {
        if !(0.0..1.0).contains(&value) {
            return Err(Error::NonCompact { index, value });
        }
    }
    let mut rho = ComplexPolynomial::norm_sq(nv);
    for (j, &aj) in a.iter().enumerate() {
        if aj != 0.0 {
            // Re(A z²) = (A/2) z² + (A/2) z̄²
            let z2 = ComplexPolynomial::z(nv, j).pow(2);
            rho = rho + z2.scale(C64::new(aj / 2.0, 0.0)).twice_real_part();
        }
    }
    DefiningFunction::polynomial(rho)
}
