//! Run configuration, report assembly and output for the `kohnbound` binary.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Parser;
use serde::Serialize;

use crate::bounds::{
    bound_ellipsoid, bound_flat_average, bound_hessian_ratio, bound_max_with, cj_dj, condition_verdicts,
    ellipsoid_normal_form, quadratic_coefficients, rayleigh_ritz, TrialFamily,
};
use crate::error::{Error, Result};
use crate::kahler::metric_at;
use crate::kohn::{dbar_b_pair_at, kohn_fields_at, kohn_trace_at, CompiledPoly, ConditionCheck};
use crate::sampler::{integrate_vector, sample_surface, Estimate, Method, QuadratureSpec, SurfaceQuadrature};
use crate::wirtinger::{make_ellipsoid, parse_polynomial, ComplexPolynomial, DefiningFunction};
use crate::C64;

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_SAMPLES: usize = 100_000;
pub const DEFAULT_RAYLEIGH_DEGREE: usize = 1;
/// Smallest sample budget accepted by [`parse_config`].
pub const MIN_SAMPLES: usize = 100;
/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "KOHNBOUND_THREADS";
/// Samples used for the pointwise formula-equivalence residual.
const RESIDUAL_POINTS: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub enum Surface {
    Sphere,
    Ellipsoid(Vec<f64>),
    FubiniStudy(String),
    Polynomial(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub surface: Surface,
    pub nu: f64,
    pub n: usize,
    pub method: Method,
    pub samples: usize,
    pub seed: u64,
    /// 0 disables the Rayleigh–Ritz stage.
    pub rayleigh_degree: usize,
    pub report: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

/// Command-line flags; see [`parse_config`] for validation.
#[derive(Parser, Debug, Clone)]
#[command(name = "kohnbound", version, about = "Upper bounds for the first positive Kohn-Laplacian eigenvalue on level sets")]
pub struct Flags {
    /// sphere | ellipsoid | fubini_study | polynomial
    #[arg(long, default_value = "sphere")]
    pub surface: String,
    /// Ellipsoid coefficients, comma separated, each in [0, 1).
    #[arg(long = "A", value_delimiter = ',', allow_hyphen_values = true)]
    pub a: Option<Vec<f64>>,
    /// Holomorphic polynomial for the Fubini–Study family.
    #[arg(long)]
    pub hol: Option<String>,
    /// Real polynomial defining function.
    #[arg(long)]
    pub rho: Option<String>,
    /// Level of the defining function.
    #[arg(long, allow_hyphen_values = true)]
    pub nu: f64,
    /// CR dimension (ambient dimension n + 1).
    #[arg(long)]
    pub n: Option<usize>,
    /// mc | grid
    #[arg(long, default_value = "mc")]
    pub method: String,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long = "rayleigh-degree", default_value_t = DEFAULT_RAYLEIGH_DEGREE)]
    pub rayleigh_degree: usize,
    /// Report path; standard output when absent.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Optional per-sample CSV path.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

fn config_error(key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        key: key.into(),
        message: message.into(),
    }
}

/// Parses and validates command-line arguments (the first item is the
/// program name).
pub fn parse_config<I, T>(args: I) -> Result<RunConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let flags = Flags::try_parse_from(args).map_err(|e| {
        let key = match e.kind() {
            clap::error::ErrorKind::MissingRequiredArgument => e
                .get(clap::error::ContextKind::InvalidArg)
                .map(|v| v.to_string().trim_start_matches("--").split(' ').next().unwrap_or("").to_string())
                .unwrap_or_else(|| "args".into()),
            _ => "args".into(),
        };
        config_error(&key, e.render().to_string().trim().to_string())
    })?;
    config_from_flags(flags)
}

const KEYS: &[&str] = &[
    "surface",
    "A",
    "hol",
    "rho",
    "nu",
    "n",
    "method",
    "samples",
    "seed",
    "rayleigh-degree",
    "report",
    "csv",
];

/// Parses a text configuration of `key = value` lines using the flag names.
/// Blank lines and lines starting with `#` are ignored.
pub fn parse_config_text(text: &str) -> Result<RunConfig> {
    let mut args = vec!["kohnbound".to_string()];
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(config_error("config", format!("line {}: expected `key = value`", i + 1)));
        };
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(config_error(key, format!("line {}: unknown key", i + 1)));
        }
        args.push(format!("--{key}"));
        args.push(value.trim().to_string());
    }
    parse_config(args)
}

/// Validates parsed flags.
pub fn config_from_flags(flags: Flags) -> Result<RunConfig> {
    let method = match flags.method.as_str() {
        "mc" | "monte_carlo" => Method::MonteCarlo,
        "grid" | "product_grid" => Method::ProductGrid,
        other => return Err(config_error("method", format!("unknown method `{other}` (mc | grid)"))),
    };
    let unused = |key: &str, present: bool| -> Result<()> {
        if present {
            Err(config_error(key, format!("not used by surface `{}`", flags.surface)))
        } else {
            Ok(())
        }
    };
    let (surface, inferred_n) = match flags.surface.as_str() {
        "sphere" => {
            unused("A", flags.a.is_some())?;
            unused("hol", flags.hol.is_some())?;
            unused("rho", flags.rho.is_some())?;
            (Surface::Sphere, None)
        }
        "ellipsoid" => {
            unused("hol", flags.hol.is_some())?;
            unused("rho", flags.rho.is_some())?;
            let a = flags.a.clone().ok_or_else(|| config_error("A", "required for surface `ellipsoid`"))?;
            make_ellipsoid(&a)?;
            let n = a.len() - 1;
            (Surface::Ellipsoid(a), Some(n))
        }
        "fubini_study" => {
            unused("A", flags.a.is_some())?;
            unused("rho", flags.rho.is_some())?;
            let hol = flags.hol.clone().unwrap_or_else(|| "0".into());
            let p = parse_polynomial(&hol, flags.n.map(|n| n + 1))?;
            (Surface::FubiniStudy(hol), Some(p.n_vars() - 1))
        }
        "polynomial" => {
            unused("A", flags.a.is_some())?;
            unused("hol", flags.hol.is_some())?;
            let rho = flags.rho.clone().ok_or_else(|| config_error("rho", "required for surface `polynomial`"))?;
            let p = parse_polynomial(&rho, flags.n.map(|n| n + 1))?;
            (Surface::Polynomial(rho), Some(p.n_vars() - 1))
        }
        other => {
            return Err(config_error(
                "surface",
                format!("unknown surface `{other}` (sphere | ellipsoid | fubini_study | polynomial)"),
            ))
        }
    };
    let n = match (flags.n, inferred_n) {
        (Some(n), Some(m)) if n != m => {
            return Err(config_error("n", format!("given {n} but the surface has n = {m}")))
        }
        (Some(n), _) => n,
        (None, Some(m)) => m,
        (None, None) => 1,
    };
    if !(1..crate::wirtinger::MAX_VARS).contains(&n) {
        return Err(config_error("n", format!("must be between 1 and {}", crate::wirtinger::MAX_VARS - 1)));
    }
    if method == Method::ProductGrid && n != 1 {
        return Err(Error::GridUnsupported { n });
    }
    if flags.samples < MIN_SAMPLES {
        return Err(config_error("samples", format!("must be at least {MIN_SAMPLES}")));
    }
    if !flags.nu.is_finite() {
        return Err(config_error("nu", "must be finite"));
    }
    let cfg = RunConfig {
        surface,
        nu: flags.nu,
        n,
        method,
        samples: flags.samples,
        seed: flags.seed,
        rayleigh_degree: flags.rayleigh_degree,
        report: flags.report,
        csv: flags.csv,
    };
    let f = build_surface(&cfg)?;
    let at_center = f.value(&vec![C64::new(0.0, 0.0); n + 1]);
    if cfg.nu <= at_center {
        return Err(config_error(
            "nu",
            format!("level must exceed rho at the center ({at_center})"),
        ));
    }
    Ok(cfg)
}

/// The defining function named by a configuration.
pub fn build_surface(cfg: &RunConfig) -> Result<DefiningFunction> {
    let nv = cfg.n + 1;
    match &cfg.surface {
        Surface::Sphere => Ok(DefiningFunction::sphere(cfg.n)),
        Surface::Ellipsoid(a) => make_ellipsoid(a),
        Surface::FubiniStudy(text) => DefiningFunction::fubini_study(parse_polynomial(text, Some(nv))?),
        Surface::Polynomial(text) => DefiningFunction::polynomial(parse_polynomial(text, Some(nv))?),
    }
}

/// A reported number: exact, or a quadrature estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Quantity {
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub exact: bool,
}

impl Quantity {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            stderr: None,
            exact: true,
        }
    }
}

impl From<Estimate> for Quantity {
    fn from(e: Estimate) -> Self {
        Self {
            value: e.value,
            stderr: Some(e.stderr),
            exact: false,
        }
    }
}

/// A bound that is either computed or withheld with a reason.
#[derive(Clone, Debug, Serialize)]
pub struct Outcome<T> {
    pub applicable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl<T> Outcome<T> {
    fn some(value: T) -> Self {
        Self {
            applicable: true,
            value: Some(value),
            reason: None,
        }
    }

    fn withheld(reason: impl ToString) -> Self {
        Self {
            applicable: false,
            value: None,
            reason: Some(reason.to_string()),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub surface: String,
    pub surface_parameters: String,
    pub nu: f64,
    pub n: usize,
    pub method: Method,
    pub samples: usize,
    pub seed: u64,
    pub rayleigh_degree: usize,
    pub version: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct MaxBoundReport {
    pub value: Quantity,
    pub sampled_max: Quantity,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionReport {
    pub verdicts: Vec<ConditionCheck>,
    pub any_satisfied: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CjDjReport {
    pub j: usize,
    #[serde(flatten)]
    pub outcome: Outcome<CjDjValues>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CjDjValues {
    pub c: Quantity,
    pub d: Quantity,
    pub ratio: Quantity,
}

#[derive(Clone, Debug, Serialize)]
pub struct RayleighReport {
    pub degree: usize,
    pub estimate: Quantity,
    pub trial_dim: usize,
    pub dropped_null_dim: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Residuals {
    /// `max |trace form − field form| / (1 + |value|)` over trial monomials and samples.
    pub formula_equivalence: Quantity,
    pub formula_points: usize,
    /// `∫ |∂̄_b u|² − Re ∫ (□_b u) ū` for a fixed real test polynomial.
    pub integration_by_parts: Quantity,
    /// The same difference in units of its standard error.
    pub integration_by_parts_z: Option<f64>,
}

/// Everything computed for one surface.
#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub schema_version: u32,
    pub provenance: Provenance,
    pub volume: Quantity,
    pub condition: ConditionReport,
    pub bound_max: Outcome<MaxBoundReport>,
    pub bound_flat_average: Outcome<Quantity>,
    pub bound_hessian_ratio: Quantity,
    pub bound_ellipsoid: Outcome<Quantity>,
    pub ellipsoid_normal_form: Option<Vec<f64>>,
    pub cj_dj: Vec<CjDjReport>,
    pub min_cj_dj_ratio: Option<Quantity>,
    pub rayleigh: Outcome<RayleighReport>,
    pub residuals: Residuals,
}

impl BoundReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn surface_label(s: &Surface) -> (&'static str, String) {
    match s {
        Surface::Sphere => ("sphere", String::new()),
        Surface::Ellipsoid(a) => (
            "ellipsoid",
            a.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","),
        ),
        Surface::FubiniStudy(h) => ("fubini_study", h.clone()),
        Surface::Polynomial(r) => ("polynomial", r.clone()),
    }
}

/// The quadrature used by a configuration.
pub fn quadrature_for(cfg: &RunConfig, f: &DefiningFunction) -> Result<SurfaceQuadrature> {
    let spec = match cfg.method {
        Method::MonteCarlo => QuadratureSpec::monte_carlo(cfg.samples, cfg.seed),
        Method::ProductGrid => QuadratureSpec::product_grid(cfg.samples),
    };
    sample_surface(f, cfg.nu, &spec)
}

/// Runs every stage and assembles the report. Errors name the failing stage.
pub fn run_report(cfg: &RunConfig) -> Result<BoundReport> {
    Ok(run_with_samples(cfg)?.0)
}

/// Like [`run_report`], also returning the quadrature (for CSV output).
pub fn run_with_samples(cfg: &RunConfig) -> Result<(BoundReport, SurfaceQuadrature)> {
    let f = build_surface(cfg).map_err(|e| e.at("surface"))?;
    let q = quadrature_for(cfg, &f).map_err(|e| e.at("sampling"))?;
    let volume = q.volume();
    let verdicts = condition_verdicts(&f, &q).map_err(|e| e.at("condition"))?;
    let any_satisfied = verdicts.iter().any(|v| v.satisfied);
    let bound_max = match bound_max_with(&f, &q, verdicts.clone()) {
        Ok(m) => Outcome::some(MaxBoundReport {
            value: Quantity::exact(m.value),
            sampled_max: Quantity::exact(m.sampled),
        }),
        Err(e @ Error::ConditionViolated) => Outcome::withheld(e),
        Err(e) => return Err(e.at("bound_max")),
    };
    let bound_flat_average = match bound_flat_average(&f, &q) {
        Ok(b) => Outcome::some(b.into()),
        Err(e @ Error::NotFlat { .. }) => Outcome::withheld(e),
        Err(e) => return Err(e.at("flat_average")),
    };
    let bound_hessian_ratio = bound_hessian_ratio(&f, &q).map_err(|e| e.at("hessian_ratio"))?.into();
    let bound_ellipsoid = match bound_ellipsoid(&f, cfg.nu) {
        Some(v) => Outcome::some(Quantity::exact(v)),
        None => Outcome::withheld("defining function is not of ellipsoid type"),
    };
    let ellipsoid_normal_form = quadratic_coefficients(&f)
        .ok()
        .and_then(|qm| ellipsoid_normal_form(&qm).ok())
        .map(|nf| nf.a);

    let mut cj = Vec::with_capacity(cfg.n + 1);
    let mut min_ratio: Option<Estimate> = None;
    for j in 0..=cfg.n {
        let outcome = match cj_dj(&f, &q, j) {
            Ok(v) => {
                if min_ratio.is_none_or(|m| v.ratio.value < m.value) {
                    min_ratio = Some(v.ratio);
                }
                Outcome::some(CjDjValues {
                    c: v.c.into(),
                    d: v.d.into(),
                    ratio: v.ratio.into(),
                })
            }
            Err(e @ Error::TrialIsCR { .. }) => Outcome::withheld(e),
            Err(e) => return Err(e.at("cj_dj")),
        };
        cj.push(CjDjReport { j, outcome });
    }

    let rayleigh = if cfg.rayleigh_degree == 0 {
        Outcome::withheld("disabled")
    } else {
        let family = TrialFamily::monomials(cfg.n + 1, cfg.rayleigh_degree);
        match rayleigh_ritz(&f, &q, &family) {
            Ok(r) => Outcome::some(RayleighReport {
                degree: cfg.rayleigh_degree,
                estimate: r.estimate.into(),
                trial_dim: r.trial_dim,
                dropped_null_dim: r.dropped_null_dim,
            }),
            Err(e @ Error::NoNonCRTrial) => Outcome::withheld(e),
            Err(e) => return Err(e.at("rayleigh")),
        }
    };

    let residuals = residuals(&f, &q).map_err(|e| e.at("residuals"))?;
    let (label, params) = surface_label(&cfg.surface);
    let report = BoundReport {
        schema_version: SCHEMA_VERSION,
        provenance: Provenance {
            surface: label.into(),
            surface_parameters: params,
            nu: cfg.nu,
            n: cfg.n,
            method: cfg.method,
            samples: q.len(),
            seed: cfg.seed,
            rayleigh_degree: cfg.rayleigh_degree,
            version: env!("CARGO_PKG_VERSION"),
        },
        volume: volume.into(),
        condition: ConditionReport {
            verdicts,
            any_satisfied,
        },
        bound_max,
        bound_flat_average,
        bound_hessian_ratio,
        bound_ellipsoid,
        ellipsoid_normal_form,
        cj_dj: cj,
        min_cj_dj_ratio: min_ratio.map(Into::into),
        rayleigh,
        residuals,
    };
    Ok((report, q))
}

/// `Σ_j (j+1)|z_j|² + 2 Re Σ_j z̄_j + 2 Re(z_1 z̄_2²)`: real, not CR, degree 3.
pub fn residual_test_polynomial(n_vars: usize) -> ComplexPolynomial {
    let mut u = ComplexPolynomial::zero(n_vars);
    for j in 0..n_vars {
        let zj = ComplexPolynomial::z(n_vars, j);
        let cj = ComplexPolynomial::zbar(n_vars, j);
        u = u + (zj * cj.clone()).scale(C64::new((j + 1) as f64, 0.0)) + cj.twice_real_part();
    }
    let cubic = ComplexPolynomial::z(n_vars, 0) * ComplexPolynomial::zbar(n_vars, 1).pow(2);
    u + cubic.twice_real_part()
}

fn residuals(f: &DefiningFunction, q: &SurfaceQuadrature) -> Result<Residuals> {
    let nv = f.n_vars();
    let trials: Vec<CompiledPoly> = TrialFamily::monomials(nv, 3)
        .polys
        .into_iter()
        .map(CompiledPoly::new)
        .collect();
    let stride = (q.len() / RESIDUAL_POINTS).max(1);
    let mut worst = 0.0f64;
    let mut points = 0;
    for s in q.samples.iter().step_by(stride).take(RESIDUAL_POINTS) {
        let mp = metric_at(f, &s.point)?;
        for t in &trials {
            let jet = t.jet(&s.point);
            let a = kohn_trace_at(&mp, &jet);
            let b = kohn_fields_at(&mp, &jet);
            worst = worst.max((a - b).norm() / (1.0 + a.norm()));
        }
        points += 1;
    }
    let u = CompiledPoly::new(residual_test_polynomial(nv));
    let ibp = integrate_vector(q, 2, |s| {
        let mp = metric_at(f, &s.point)?;
        let jet = u.jet(&s.point);
        let pair = dbar_b_pair_at(&mp, &jet.grad_bar, &jet.grad_bar).re;
        let boxed = kohn_trace_at(&mp, &jet);
        Ok(vec![pair, (boxed * jet.value.conj()).re])
    })?;
    let diff = ibp.difference(0, 1);
    Ok(Residuals {
        formula_equivalence: Quantity::exact(worst),
        formula_points: points,
        integration_by_parts: diff.into(),
        integration_by_parts_z: (diff.stderr > 0.0).then(|| diff.value / diff.stderr),
    })
}

/// Per-sample CSV: direction components, `t`, point `(re, im)` pairs,
/// weight, `|∂ρ|²`, `r`, `s`.
pub fn samples_csv(f: &DefiningFunction, q: &SurfaceQuadrature) -> Result<String> {
    let nv = f.n_vars();
    let mut out = String::new();
    let mut header: Vec<String> = (0..2 * nv).map(|k| format!("d{k}")).collect();
    header.push("t".into());
    for k in 0..nv {
        header.push(format!("z{}_re", k + 1));
        header.push(format!("z{}_im", k + 1));
    }
    header.extend(["weight", "grad_len_sq", "r", "s"].map(String::from));
    out.push_str(&header.join(","));
    out.push('\n');
    for s in &q.samples {
        let mp = metric_at(f, &s.point)?;
        let mut row: Vec<String> = s.direction.iter().map(|v| v.to_string()).collect();
        row.push(s.radius.to_string());
        for z in &s.point {
            row.push(z.re.to_string());
            row.push(z.im.to_string());
        }
        for v in [s.weight, mp.grad_len_sq, mp.r, mp.s] {
            row.push(v.to_string());
        }
        let _ = writeln!(out, "{}", row.join(","));
    }
    Ok(out)
}

/// Worker count from `KOHNBOUND_THREADS`; `None` means machine parallelism.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(0) | Err(_) => Err(config_error(THREADS_ENV, format!("expected a positive integer, got `{v}`"))),
            Ok(k) => Ok(Some(k)),
        },
    }
}

/// Runs `op` on a dedicated pool with the given worker count.
pub fn with_threads<R: Send>(threads: Option<usize>, op: impl FnOnce() -> R + Send) -> Result<R> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = threads {
        builder = builder.num_threads(k);
    }
    let pool = builder
        .build()
        .map_err(|e| config_error(THREADS_ENV, e.to_string()))?;
    Ok(pool.install(op))
}

/// Full binary behaviour minus process exit: run, then write the report and CSV.
pub fn execute(cfg: &RunConfig, threads: Option<usize>) -> Result<String> {
    let (report, csv) = with_threads(threads, || -> Result<_> {
        let (report, q) = run_with_samples(cfg)?;
        let csv = match &cfg.csv {
            Some(_) => Some(samples_csv(&build_surface(cfg)?, &q).map_err(|e| e.at("csv"))?),
            None => None,
        };
        Ok((report, csv))
    })??;
    let json = report.to_json();
    if let Some(path) = &cfg.report {
        std::fs::write(path, &json).map_err(|e| config_error("report", format!("{}: {e}", path.display())))?;
    }
    if let (Some(path), Some(text)) = (&cfg.csv, csv) {
        std::fs::write(path, text).map_err(|e| config_error("csv", format!("{}: {e}", path.display())))?;
    }
    Ok(json)
}
