// Parse a real polynomial, take Wirtinger derivatives, evaluate the 3-jet.

use kohnbound::wirtinger::{parse_polynomial, reality_check, wirtinger_derive, DefiningFunction};
use kohnbound::C64;

fn main() -> kohnbound::Result<()> {
    let rho = parse_polynomial("z1*c1 + z2*c2 + 0.25*z1^2 + 0.25*c1^2", None)?;
    println!("rho = {rho}");
    println!("real: {}", reality_check(&rho));

    let d = wirtinger_derive(&rho, 0, false)?;
    println!("d/dz1 rho = {d}");
    println!("d/dz1bar d/dz1 rho = {}", wirtinger_derive(&d, 0, true)?);

    let f = DefiningFunction::polynomial(rho)?;
    let z = [C64::new(0.3, -0.2), C64::new(0.1, 0.4)];
    let jet = f.jet3(&z);
    println!("value {:.6}", jet.value);
    println!("gradient {:?}", jet.grad);
    println!("hessian {}", jet.hessian);

    let fs = DefiningFunction::fubini_study(kohnbound::wirtinger::ComplexPolynomial::zero(2))?;
    println!("Fubini-Study value at z: {:.6}", fs.value(&z));
    Ok(())
}
