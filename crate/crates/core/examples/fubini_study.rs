// Fubini-Study potential: the max bound is withheld, the hessian ratio gives e/(e-1).

use kohnbound::bounds::{bound_hessian_ratio, bound_max, condition_verdicts};
use kohnbound::sampler::{sample_surface, QuadratureSpec};
use kohnbound::wirtinger::{ComplexPolynomial, DefiningFunction};

fn main() -> kohnbound::Result<()> {
    let f = DefiningFunction::fubini_study(ComplexPolynomial::zero(2))?;
    let q = sample_surface(&f, 1.0, &QuadratureSpec::monte_carlo(20_000, 3))?;
    for v in condition_verdicts(&f, &q)? {
        println!("j={}: max lhs {:.4}, satisfied {}", v.j + 1, v.max_lhs, v.satisfied);
    }
    match bound_max(&f, &q) {
        Err(e) => println!("max bound: {e}"),
        Ok(b) => println!("max bound: {}", b.value),
    }
    let e = std::f64::consts::E;
    let hr = bound_hessian_ratio(&f, &q)?;
    println!("hessian ratio {:.6} ± {:.1e}, e/(e-1) = {:.6}", hr.value, hr.stderr, e / (e - 1.0));

    let twisted = ComplexPolynomial::z(2, 0).pow(2).scale(kohnbound::C64::new(0.05, 0.0));
    let g = DefiningFunction::fubini_study(twisted)?;
    let q = sample_surface(&g, 0.8, &QuadratureSpec::monte_carlo(20_000, 4))?;
    let hr = bound_hessian_ratio(&g, &q)?;
    println!("twisted potential at level 0.8: hessian ratio {:.6} ± {:.1e}", hr.value, hr.stderr);
    Ok(())
}
