//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

mod common;

use std::time::Instant;

use common::*;
use kohnbound::bounds::{
    bound_flat_average, bound_hessian_ratio, bound_max, cj_dj, condition_verdicts, rayleigh_ritz,
    takagi_factorize, TrialFamily,
};
use kohnbound::cli::{parse_config, run_report, with_threads};
use kohnbound::kahler::metric_at;
use kohnbound::kohn::{dbar_b_pair_at, kohn_apply_fields, kohn_apply_trace, kohn_trace_at, CompiledPoly};
use kohnbound::sampler::{integrate_vector, sample_surface, QuadratureSpec};
use kohnbound::wirtinger::{make_ellipsoid, ComplexPolynomial, DefiningFunction};
use kohnbound::{Error, C64};
use nalgebra::DMatrix;
use rand::Rng;

/// Multiplier on the Monte Carlo standard error for stochastic equalities.
const K: f64 = 3.0;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn sphere_sharpness() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for n in 1..=2 {
        let f = DefiningFunction::sphere(n);
        for nu in [0.5, 1.0, 2.0] {
            let q = sample_surface(&f, nu, &QuadratureSpec::monte_carlo(100_000, 101)).map_err(|e| e.to_string())?;
            let target = n as f64 / nu;
            let max = bound_max(&f, &q).map_err(|e| e.to_string())?;
            let avg = bound_flat_average(&f, &q).map_err(|e| e.to_string())?;
            let hr = bound_hessian_ratio(&f, &q).map_err(|e| e.to_string())?;
            let rr = rayleigh_ritz(&f, &q, &TrialFamily::monomials(n + 1, 1)).map_err(|e| e.to_string())?;
            let good = (max.value - target).abs() <= 1e-9 * target
                && avg.within(target, K)
                && hr.within(target, K)
                && rr.estimate.within(target, K);
            ok &= good;
            notes.push(format!(
                "n={n} nu={nu}: rr={:.5}±{:.1e}{}",
                rr.estimate.value,
                rr.estimate.stderr,
                if good { "" } else { " FAIL" }
            ));
        }
    }
    check(ok, notes.join("; "))
}

fn ellipsoid_average_identity() -> Outcome {
    let mut r = rng(202);
    let mut notes = Vec::new();
    let mut ok = true;
    for k in 0..5 {
        let n = 1 + k % 2;
        let a: Vec<f64> = (0..=n).map(|_| r.random_range(0.0..0.8)).collect();
        let f = make_ellipsoid(&a).map_err(|e| e.to_string())?;
        let q = sample_surface(&f, 1.0, &QuadratureSpec::monte_carlo(1_000_000, 300 + k as u64))
            .map_err(|e| e.to_string())?;
        // (1/v) ∫ |∂ρ|⁻² = flat average bound / n
        let c = bound_flat_average(&f, &q).map_err(|e| e.to_string())?.scale(1.0 / n as f64);
        let good = c.within(1.0, K);
        ok &= good;
        notes.push(format!("{:.4}±{:.1e}", c.value, c.stderr));
    }
    check(ok, format!("C = [{}]", notes.join(", ")))
}

fn fubini_study_counterexample() -> Outcome {
    let f = DefiningFunction::fubini_study(ComplexPolynomial::zero(2)).map_err(|e| e.to_string())?;
    let q = sample_surface(&f, 1.0, &QuadratureSpec::monte_carlo(100_000, 303)).map_err(|e| e.to_string())?;
    let e = std::f64::consts::E;
    let target = e / (e - 1.0);
    let hr = bound_hessian_ratio(&f, &q).map_err(|e| e.to_string())?;
    let verdicts = condition_verdicts(&f, &q).map_err(|e| e.to_string())?;
    let all_violated = verdicts.iter().all(|v| !v.satisfied && v.max_lhs > 0.0);
    let withheld = matches!(bound_max(&f, &q), Err(Error::ConditionViolated));
    check(
        hr.within(target, K) && all_violated && withheld,
        format!(
            "ratio {:.5}±{:.1e} (target {target:.5}), violated for all j: {all_violated}, max bound withheld: {withheld}",
            hr.value, hr.stderr
        ),
    )
}

fn formula_equivalence() -> Outcome {
    let mut r = rng(404);
    let zoo = zoo();
    let mut worst = 0.0f64;
    for i in 0..100 {
        let (_, f, nu) = &zoo[i % zoo.len()];
        let p = surface_point(f, *nu, &mut r);
        let degree = 1 + i % 3;
        let u = random_polynomial(f.n_vars(), degree, &mut r);
        let a = kohn_apply_trace(f, *nu, &u, &p).map_err(|e| e.to_string())?;
        let b = kohn_apply_fields(f, *nu, &u, &p).map_err(|e| e.to_string())?;
        worst = worst.max((a - b).norm() / (1.0 + a.norm()));
    }
    check(worst <= 1e-10, format!("max relative gap {worst:.2e} over 100 triples"))
}

fn integration_by_parts() -> Outcome {
    let f = make_ellipsoid(&[0.5, 0.0]).map_err(|e| e.to_string())?;
    let q = sample_surface(&f, 1.0, &QuadratureSpec::monte_carlo(100_000, 505)).map_err(|e| e.to_string())?;
    let mut r = rng(506);
    let mut worst_z = 0.0f64;
    let mut ok = true;
    for _ in 0..10 {
        let u = CompiledPoly::new(random_polynomial(2, 2, &mut r).twice_real_part());
        let acc = integrate_vector(&q, 2, |s| {
            let mp = metric_at(&f, &s.point)?;
            let jet = u.jet(&s.point);
            let pair = dbar_b_pair_at(&mp, &jet.grad_bar, &jet.grad_bar).re;
            Ok(vec![pair, (kohn_trace_at(&mp, &jet) * jet.value.conj()).re])
        })
        .map_err(|e| e.to_string())?;
        let d = acc.difference(0, 1);
        // combined standard error of the two integrals
        let combined = acc.estimate(0).stderr.hypot(acc.estimate(1).stderr);
        ok &= d.value.abs() <= K * combined;
        worst_z = worst_z.max(d.value.abs() / combined);
    }
    check(ok, format!("worst |difference| = {worst_z:.2} combined stderr over 10 polynomials"))
}

fn contact_volume() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for n in 1..=2usize {
        let f = DefiningFunction::sphere(n);
        let q = sample_surface(&f, 1.0, &QuadratureSpec::monte_carlo(100_000, 606)).map_err(|e| e.to_string())?;
        let v = q.volume();
        let target = (2.0 * std::f64::consts::PI).powi(n as i32 + 1);
        ok &= v.within(target, K);
        notes.push(format!("n={n}: {:.6} vs {target:.6}", v.value));
    }
    check(ok, notes.join("; "))
}

fn eigenfunction_identity() -> Outcome {
    let mut r = rng(707);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let n = 1 + i % 2;
        let f = DefiningFunction::sphere(n);
        let nu = r.random_range(0.25..4.0);
        let p = surface_point(&f, nu, &mut r);
        let j = i % (n + 1);
        let v = kohn_apply_trace(&f, nu, &ComplexPolynomial::zbar(n + 1, j), &p).map_err(|e| e.to_string())?;
        worst = worst.max((v - p[j].conj() * (n as f64 / nu)).norm());
    }
    check(worst <= 1e-10, format!("max residual {worst:.2e} at 100 points"))
}

fn ellipsoid_bound_chain() -> Outcome {
    let f = make_ellipsoid(&[0.5, 0.0]).map_err(|e| e.to_string())?;
    let q = sample_surface(&f, 1.0, &QuadratureSpec::monte_carlo(100_000, 808)).map_err(|e| e.to_string())?;
    let max = bound_max(&f, &q).map_err(|e| e.to_string())?;
    let avg = bound_flat_average(&f, &q).map_err(|e| e.to_string())?;
    let min_ratio = (0..2)
        .map(|j| cj_dj(&f, &q, j).map(|c| c.ratio))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?
        .into_iter()
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .unwrap();
    let rr = rayleigh_ritz(&f, &q, &TrialFamily::monomials(2, 2)).map_err(|e| e.to_string())?;
    let max_ok = (max.value - 2.0).abs() <= 1e-8 && max.sampled <= max.value && max.sampled >= 2.0 * 0.99;
    let ok = max_ok
        && avg.within(1.0, K)
        && min_ratio.value <= 1.0 + K * min_ratio.stderr
        && rr.estimate.value <= 1.0 + K * rr.estimate.stderr;
    check(
        ok,
        format!(
            "max {:.9} (sampled {:.5}), average {:.4}±{:.1e}, min ratio {:.4}±{:.1e}, rayleigh(d=2) {:.4}±{:.1e}",
            max.value, max.sampled, avg.value, avg.stderr, min_ratio.value, min_ratio.stderr, rr.estimate.value,
            rr.estimate.stderr
        ),
    )
}

fn takagi() -> Outcome {
    let mut r = rng(909);
    let (mut rec, mut uni, mut sv) = (0.0f64, 0.0f64, 0.0f64);
    let modulus = |m: &DMatrix<C64>| m.iter().map(|x| x.norm()).fold(0.0, f64::max);
    for k in 0..100 {
        let size = 2 + k % 4;
        let a = DMatrix::from_fn(size, size, |_, _| c(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)));
        let q = (&a + a.transpose()) * c(0.5, 0.0);
        let t = takagi_factorize(&q).map_err(|e| e.to_string())?;
        rec = rec.max(modulus(&(t.reconstruct() - &q)));
        uni = uni.max(modulus(&(t.u.adjoint() * &t.u - DMatrix::identity(size, size))));
        let mut oracle: Vec<f64> = q.svd(false, false).singular_values.iter().copied().collect();
        oracle.sort_by(|x, y| y.total_cmp(x));
        for (l, s) in t.lambda.iter().zip(&oracle) {
            sv = sv.max((l - s).abs());
        }
    }
    check(
        rec <= 1e-10 && uni <= 1e-10 && sv <= 1e-9,
        format!("reconstruction {rec:.1e}, unitarity {uni:.1e}, singular values {sv:.1e}"),
    )
}

fn determinism() -> Outcome {
    let args = ["kohnbound", "--surface", "ellipsoid", "--A", "0.3,0.5", "--nu", "1", "--samples", "20000"];
    let cfg = parse_config(args).map_err(|e| e.to_string())?;
    let first = run_report(&cfg).map_err(|e| e.to_string())?.to_json();
    let second = run_report(&cfg).map_err(|e| e.to_string())?.to_json();
    let mut same = first == second;
    for threads in [1, 2, 3, 8] {
        let other = with_threads(Some(threads), || run_report(&cfg))
            .map_err(|e| e.to_string())?
            .map_err(|e| e.to_string())?
            .to_json();
        same &= other == first;
    }
    // the binary honours the environment variable
    let run = |threads: &str| {
        std::process::Command::new(env!("CARGO_BIN_EXE_kohnbound"))
            .args(&args[1..])
            .env("KOHNBOUND_THREADS", threads)
            .output()
            .map(|o| o.stdout)
    };
    let (a, b) = (run("1").map_err(|e| e.to_string())?, run("4").map_err(|e| e.to_string())?);
    same &= a == b && a == first.as_bytes();
    check(same, format!("{} report bytes identical across reruns and 1-8 threads", first.len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("sphere sharpness", sphere_sharpness),
        ("ellipsoid average identity", ellipsoid_average_identity),
        ("Fubini-Study sharpness and counterexample", fubini_study_counterexample),
        ("formula equivalence", formula_equivalence),
        ("integration by parts", integration_by_parts),
        ("contact volume", contact_volume),
        ("eigenfunction identity", eigenfunction_identity),
        ("ellipsoid bound chain", ellipsoid_bound_chain),
        ("Takagi factorization", takagi),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS {name} ({secs:.1}s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name} ({secs:.1}s): {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
