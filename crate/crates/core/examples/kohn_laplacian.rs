// Apply the Kohn-Laplacian in both forms and check the sphere eigenfunctions.

use kohnbound::kohn::{dbar_b_pair, kohn_apply_fields, kohn_apply_trace};
use kohnbound::sampler::radial_solve;
use kohnbound::wirtinger::{parse_polynomial, ComplexPolynomial, DefiningFunction};
use kohnbound::C64;

fn main() -> kohnbound::Result<()> {
    let f = DefiningFunction::sphere(1);
    let nu = 2.0;
    let dir = [0.6, 0.0, 0.0, 0.8];
    let t = radial_solve(&f, nu, &dir, &[])?;
    let p: Vec<C64> = dir.chunks(2).map(|c| C64::new(c[0] * t, c[1] * t)).collect();

    for j in 0..2 {
        let u = ComplexPolynomial::zbar(2, j);
        let v = kohn_apply_trace(&f, nu, &u, &p)?;
        println!("box(zbar{}) / zbar{} = {:.12}", j + 1, j + 1, v / p[j].conj());
    }

    let u = parse_polynomial("z1*c2^2 + (0+1i)*c1*z2 + 0.5*c1^3", Some(2))?;
    let a = kohn_apply_trace(&f, nu, &u, &p)?;
    let b = kohn_apply_fields(&f, nu, &u, &p)?;
    println!("trace form {a:.10}");
    println!("field form {b:.10}");
    println!("|dbar_b u|^2 = {:.10}", dbar_b_pair(&f, nu, &u, &u, &p)?.re);

    match kohn_apply_trace(&f, nu, &u, &[C64::new(0.1, 0.0), C64::new(0.0, 0.0)]) {
        Err(e) => println!("off the surface: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
