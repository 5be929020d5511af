// Every bound is attained on spheres: all equal n / nu.

use kohnbound::bounds::{bound_flat_average, bound_hessian_ratio, bound_max, rayleigh_ritz, TrialFamily};
use kohnbound::sampler::{sample_surface, QuadratureSpec};
use kohnbound::wirtinger::DefiningFunction;

fn main() -> kohnbound::Result<()> {
    for n in 1..=2 {
        let f = DefiningFunction::sphere(n);
        for nu in [0.5, 1.0, 2.0] {
            let q = sample_surface(&f, nu, &QuadratureSpec::monte_carlo(20_000, 11))?;
            let max = bound_max(&f, &q)?;
            let avg = bound_flat_average(&f, &q)?;
            let hr = bound_hessian_ratio(&f, &q)?;
            let rr = rayleigh_ritz(&f, &q, &TrialFamily::monomials(n + 1, 1))?;
            println!(
                "n={n} nu={nu}: n/nu {:.4} | max {:.4} | average {:.4} | hessian ratio {:.4} | rayleigh {:.4} ± {:.1e}",
                n as f64 / nu,
                max.value,
                avg.value,
                hr.value,
                rr.estimate.value,
                rr.estimate.stderr
            );
        }
    }
    Ok(())
}
