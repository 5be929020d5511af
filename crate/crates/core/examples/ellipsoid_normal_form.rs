// Reduce a quadratic surface to ellipsoid normal form and compare the bounds.

use kohnbound::bounds::{
    bound_ellipsoid, bound_flat_average, bound_max, ellipsoid_normal_form, quadratic_coefficients,
    quadratic_defining_polynomial,
};
use kohnbound::sampler::{sample_surface, QuadratureSpec};
use kohnbound::wirtinger::DefiningFunction;
use kohnbound::C64;
use nalgebra::DMatrix;

fn main() -> kohnbound::Result<()> {
    let q = DMatrix::from_row_slice(2, 2, &[C64::new(0.3, 0.2), C64::new(0.0, 0.25), C64::new(0.0, 0.25), C64::new(-0.1, 0.0)]);
    let nf = ellipsoid_normal_form(&q)?;
    println!("A = {:?}", nf.a);
    println!("U = {}", nf.u);

    let f = DefiningFunction::polynomial(quadratic_defining_polynomial(&q))?;
    println!("rho = {}", match f.kind() {
        kohnbound::wirtinger::DefiningKind::Polynomial(p) => p.to_string(),
        _ => unreachable!(),
    });
    println!("recovered Q = {}", quadratic_coefficients(&f)?);

    let samples = sample_surface(&f, 1.0, &QuadratureSpec::monte_carlo(20_000, 5))?;
    let max = bound_max(&f, &samples)?;
    let avg = bound_flat_average(&f, &samples)?;
    println!("max bound {:.6} (sampled {:.6})", max.value, max.sampled);
    println!("flat average {:.4} ± {:.1e}", avg.value, avg.stderr);
    println!("ellipsoid bound {:?}", bound_ellipsoid(&f, 1.0));
    Ok(())
}
