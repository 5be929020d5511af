// Contact volume of spheres and an ellipsoid with both quadrature rules.

use kohnbound::sampler::{sample_surface, QuadratureSpec};
use kohnbound::wirtinger::{make_ellipsoid, DefiningFunction};

fn main() -> kohnbound::Result<()> {
    for n in 1..=2 {
        let f = DefiningFunction::sphere(n);
        let exact = (2.0 * std::f64::consts::PI).powi(n as i32 + 1);
        let mc = sample_surface(&f, 1.0, &QuadratureSpec::monte_carlo(20_000, 7))?.volume();
        println!("sphere n={n}: exact {exact:.6}, monte carlo {:.6} ± {:.1e}", mc.value, mc.stderr);
        // the product grid covers n = 1 only
        if n == 1 {
            let grid = sample_surface(&f, 1.0, &QuadratureSpec::product_grid(4_000))?.volume();
            println!("sphere n=1: grid {:.12}", grid.value);
        }
    }
    let f = make_ellipsoid(&[0.5, 0.0])?;
    for nu in [0.5, 1.0, 2.0] {
        let v = sample_surface(&f, nu, &QuadratureSpec::monte_carlo(20_000, 8))?.volume();
        println!("ellipsoid A=(0.5,0) at level {nu}: {:.6} ± {:.1e}", v.value, v.stderr);
    }
    Ok(())
}
