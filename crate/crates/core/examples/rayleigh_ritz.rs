// Rayleigh-Ritz estimates for increasing trial degree, plus the single-variable ratios.

use kohnbound::bounds::{cj_dj, rayleigh_ritz, TrialFamily};
use kohnbound::sampler::{sample_surface, QuadratureSpec};
use kohnbound::wirtinger::make_ellipsoid;

fn main() -> kohnbound::Result<()> {
    let f = make_ellipsoid(&[0.5, 0.0])?;
    let q = sample_surface(&f, 1.0, &QuadratureSpec::monte_carlo(20_000, 6))?;
    for j in 0..2 {
        let c = cj_dj(&f, &q, j)?;
        println!("zbar{}: C {:.4}, D {:.4}, ratio {:.4} ± {:.1e}", j + 1, c.c.value, c.d.value, c.ratio.value, c.ratio.stderr);
    }
    for degree in 1..=3 {
        let r = rayleigh_ritz(&f, &q, &TrialFamily::monomials(2, degree))?;
        println!(
            "degree {degree}: {} trials, {} null, estimate {:.5} ± {:.1e}",
            r.trial_dim, r.dropped_null_dim, r.estimate.value, r.estimate.stderr
        );
    }
    Ok(())
}
