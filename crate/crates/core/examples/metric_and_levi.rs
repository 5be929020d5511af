// Inverse Kähler metric, raised gradient, Levi form and Reeb field at a surface point.

use kohnbound::kahler::metric_at;
use kohnbound::kohn::levi_at;
use kohnbound::sampler::radial_solve;
use kohnbound::wirtinger::make_ellipsoid;
use kohnbound::C64;

fn main() -> kohnbound::Result<()> {
    let f = make_ellipsoid(&[0.5, 0.2, 0.0])?;
    let dir = [0.5, 0.1, -0.3, 0.6, 0.2, -0.5];
    let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
    let dir: Vec<f64> = dir.iter().map(|x| x / norm).collect();
    let t = radial_solve(&f, 1.0, &dir, &[])?;
    let p: Vec<C64> = dir.chunks(2).map(|c| C64::new(c[0] * t, c[1] * t)).collect();
    println!("point on rho = 1 at radius {t:.6}, rho = {:.3e}", f.value(&p) - 1.0);

    let mp = metric_at(&f, &p)?;
    println!("inverse hessian {}", mp.hess_inv);
    println!("|d rho|^2 = {:.6}", mp.grad_len_sq);
    println!("spectral radius r = {:.6}, s = trace - r = {:.6}", mp.r, mp.s);

    let levi = levi_at(&f, &p)?;
    println!("frame coordinate z{}", levi.frame_index + 1);
    println!("Levi form {}", levi.levi);
    println!("Levi * inverse = {}", &levi.levi * &levi.levi_inv);
    println!("Reeb field {:?}", levi.reeb);
    Ok(())
}
