//! Library half of the `ehyp` binary: a parsed [`RunConfig`] goes in, an
//! [`Outcome`] (summary text, pass flag, artifacts on disk) comes out.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use serde::Serialize;

use ehyp_core::ambient::Space;
use ehyp_core::lie::{AlgebraModel, ModelKind};
use ehyp_core::roots::standard_roots;
use ehyp_core::solv::{self, IwasawaCertificate, MetricSolvAlgebra};
use ehyp_core::surface::{builtin_surface, surface_grid, DerivMode, SurfaceChart, SurfaceModel, SurfaceSpec, BUILTIN_NAMES};
use ehyp_core::verify::{self, HypersurfaceChart, SamplingPlan, SingularProbe, Tolerances, Verdict, VerificationReport};
use ehyp_core::Error;

mod output;

pub use output::{emit_report, to_json_string, write_grid_dump, GRID_COLUMNS};

pub const DEFAULT_SAMPLES: usize = 256;
pub const DEFAULT_TOL_ANALYTIC: f64 = 1e-5;
pub const DEFAULT_TOL_FD: f64 = 1e-3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("unknown {0}: '{1}'")]
    Unknown(&'static str, String),
    #[error("cannot read surface spec {0}: {1}")]
    Unreadable(String, String),
    #[error("cannot write {0}: {1}")]
    Unwritable(String, String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    /// Process exit status; 1 is reserved for a completed run with a failed verdict.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Unknown(..) => 2,
            CliError::Unreadable(..) => 3,
            CliError::Unwritable(..) => 4,
            CliError::Config(_) | CliError::Other(_) => 5,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Unknown(name) => CliError::Unknown("name", name),
            Error::Spec(msg) => CliError::Unreadable("spec".into(), msg),
            other => CliError::Other(other.to_string()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Command {
    Roots {
        model: String,
    },
    Iwasawa {
        model: String,
        xi: Option<Vec<f64>>,
        tol: f64,
    },
    SurfaceCheck {
        surface: String,
        grid: usize,
        tol: f64,
        csv: Option<PathBuf>,
    },
    Verify {
        space: Option<String>,
        surface: Option<String>,
        samples: usize,
        /// `None` picks 1e−5 for analytic charts and 1e−3 for finite-difference ones.
        tol: Option<f64>,
        /// Forces finite-difference second derivatives with this step.
        fd_step: Option<f64>,
        grid_dump: Option<PathBuf>,
    },
    SingularProbe {
        space: Option<String>,
        surface: String,
        u: Option<[f64; 2]>,
        theta: [f64; 2],
        t1: [f64; 2],
        points: usize,
        threshold: f64,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Roots { .. } => "roots",
            Command::Iwasawa { .. } => "iwasawa",
            Command::SurfaceCheck { .. } => "surface-check",
            Command::Verify { .. } => "verify",
            Command::SingularProbe { .. } => "singular-probe",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub seed: u64,
    pub report: Option<PathBuf>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let positive = |what: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CliError::Config(format!("{what} must be positive, got {v}")))
            }
        };
        match &self.command {
            Command::Roots { .. } => Ok(()),
            Command::Iwasawa { tol, .. } => positive("tolerance", *tol),
            Command::SurfaceCheck { grid, tol, .. } => {
                if *grid == 0 {
                    return Err(CliError::Config("grid size must be at least 1".into()));
                }
                positive("tolerance", *tol)
            }
            Command::Verify { samples, tol, fd_step, .. } => {
                if *samples == 0 {
                    return Err(CliError::Config("sample count must be at least 1".into()));
                }
                tol.map_or(Ok(()), |t| positive("tolerance", t))?;
                fd_step.map_or(Ok(()), |h| positive("finite-difference step", h))
            }
            Command::SingularProbe { points, threshold, theta, t1, .. } => {
                if *points < 2 {
                    return Err(CliError::Config("a scan needs at least 2 points".into()));
                }
                if !(theta[0] < theta[1] && t1[0] < t1[1]) {
                    return Err(CliError::Config("scan ranges must be increasing".into()));
                }
                positive("threshold", *threshold)
            }
        }
    }
}

/// Result of a completed run.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub passed: bool,
    pub summary: String,
    /// The document written with `--report`.
    pub document: serde_json::Value,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    command: &'a str,
    seed: u64,
    passed: bool,
    verdicts: &'a BTreeMap<String, Verdict>,
    result: T,
}

fn parse_model(s: &str) -> Result<ModelKind, CliError> {
    ModelKind::parse(s).ok_or_else(|| CliError::Unknown("model", s.into()))
}

/// Resolves a built-in name or a JSON spec path.
pub fn load_surface(arg: &str) -> Result<SurfaceChart, CliError> {
    if BUILTIN_NAMES.contains(&arg) {
        return Ok(builtin_surface(arg)?);
    }
    let path = Path::new(arg);
    let looks_like_path = path.exists() || arg.ends_with(".json") || arg.contains(std::path::MAIN_SEPARATOR);
    if !looks_like_path {
        return Err(CliError::Unknown("surface", arg.into()));
    }
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Unreadable(arg.into(), e.to_string()))?;
    SurfaceSpec::from_json(&text)
        .and_then(SurfaceSpec::into_chart)
        .map_err(|e| CliError::Unreadable(arg.into(), e.to_string()))
}

enum SpaceSel {
    Symmetric(Space),
    Solv(ModelKind),
}

fn parse_space(s: &str) -> Result<SpaceSel, CliError> {
    if let Some(sp) = Space::parse(s) {
        return Ok(SpaceSel::Symmetric(sp));
    }
    match s {
        "solv:sl3" => Ok(SpaceSel::Solv(ModelKind::Sl3)),
        "solv:sl4" => Ok(SpaceSel::Solv(ModelKind::Sl4)),
        _ => Err(CliError::Unknown("space", s.into())),
    }
}

fn default_space(chart: &SurfaceChart) -> Space {
    match chart.model {
        SurfaceModel::Legendrian => Space::Su3So3,
        _ => Space::Sl3So3,
    }
}

fn symmetric_chart(space: Option<&str>, surface: &str) -> Result<HypersurfaceChart, CliError> {
    let chart = load_surface(surface)?;
    let space = match space.map(parse_space).transpose()? {
        None => default_space(&chart),
        Some(SpaceSel::Symmetric(sp)) => sp,
        Some(SpaceSel::Solv(_)) => return Err(CliError::Config("solvmanifold spaces take no surface".into())),
    };
    Ok(HypersurfaceChart::new(chart, space)?)
}

fn verdict_line(out: &mut String, verdicts: &BTreeMap<String, Verdict>) {
    for (k, v) in verdicts {
        let _ = writeln!(out, "  {k:<18} {v}");
    }
}

fn finish<T: Serialize>(cfg: &RunConfig, verdicts: BTreeMap<String, Verdict>, result: T, mut summary: String) -> Result<Outcome, CliError> {
    let passed = verdicts.values().all(|v| v.is_pass());
    let env = Envelope { command: cfg.command.name(), seed: cfg.seed, passed, verdicts: &verdicts, result };
    let document = serde_json::to_value(&env).map_err(|e| CliError::Other(e.to_string()))?;
    if let Some(path) = &cfg.report {
        emit_report(&document, path)?;
        let _ = writeln!(summary, "report written to {}", path.display());
    }
    let _ = writeln!(summary, "{}", if passed { "PASS" } else { "FAIL" });
    Ok(Outcome { passed, summary, document })
}

fn run_roots(cfg: &RunConfig, model: &str) -> Result<Outcome, CliError> {
    let m = AlgebraModel::new(parse_model(model)?);
    let datum = standard_roots(&m)?;
    let summary = datum.summary(&m);
    let mut s = String::new();
    let _ = writeln!(s, "restricted roots of {:?} (rank {}, dim p = {})", summary.model, summary.rank, summary.dim_p);
    for r in &summary.roots {
        let coords: Vec<String> = r.coords.iter().map(|c| format!("{c:+.6}")).collect();
        let _ = writeln!(s, "  [{}]  mult {}  {}", coords.join(", "), r.multiplicity, if r.positive { "positive" } else { "negative" });
    }
    let _ = writeln!(s, "dimension audit: {} + {} = {}", summary.sum_positive_multiplicities, summary.dim_a, summary.dim_p);
    let verdicts = BTreeMap::from([("dimension_audit".to_string(), Verdict::of(summary.dimension_audit_ok))]);
    finish(cfg, verdicts, summary, s)
}

fn certificate_summary(s: &mut String, c: &IwasawaCertificate) {
    let _ = writeln!(s, "Iwasawa decomposition of {:?}: dim k = {}, a = {}, n = {} (total {})", c.model, c.dim_k, c.dim_a, c.dim_n, c.dim_g);
    let _ = writeln!(s, "  lower central series of n: {:?}", c.lower_central_series);
    let _ = writeln!(s, "  mean curvature vector A_H: {:?}", c.mean_curvature_vector);
    let _ = writeln!(s, "  Einstein constant {:.12} (residual {:.3e})", c.einstein_constant, c.einstein_residual);
    if let (Some(xi), Some(k), Some(r)) = (&c.xi, c.codim1_einstein_constant, c.codim1_einstein_residual) {
        let _ = writeln!(s, "  xi = {xi:?}: codimension-one constant {k:.12} (residual {r:.3e}), tr ad_xi = {:.3e}", c.tr_ad_xi.unwrap_or(f64::NAN));
    }
}

fn run_iwasawa(cfg: &RunConfig, model: &str, xi: Option<&[f64]>, tol: f64) -> Result<Outcome, CliError> {
    let m = AlgebraModel::new(parse_model(model)?);
    let cert = solv::certify(&m, xi, tol)?;
    let mut s = String::new();
    certificate_summary(&mut s, &cert);
    let verdicts = BTreeMap::from([("certificate".to_string(), Verdict::of(cert.pass))]);
    finish(cfg, verdicts, cert, s)
}

#[derive(Serialize)]
struct SurfaceCheckResult {
    surface: String,
    model: SurfaceModel,
    grid: usize,
    tolerance: f64,
    points: usize,
    max_residual: f64,
    legendrian_angle_mean: Option<f64>,
    legendrian_angle_std: Option<f64>,
    centro_affine_curvature_range: Option<[f64; 2]>,
    dp_ranks: BTreeMap<String, usize>,
    rows: Vec<ehyp_core::surface::SurfacePointCheck>,
}

fn run_surface_check(cfg: &RunConfig, surface: &str, grid: usize, tol: f64, csv: Option<&Path>) -> Result<Outcome, CliError> {
    let chart = load_surface(surface)?;
    let rows = surface_grid(&chart, grid);
    if rows.is_empty() {
        return Err(CliError::Config("the grid has no points inside the domain".into()));
    }
    let max_residual = rows.iter().flat_map(|r| r.residuals.iter()).fold(0.0f64, |a, &b| if b.is_nan() { f64::INFINITY } else { a.max(b) });
    let angles: Vec<f64> = rows.iter().filter_map(|r| r.legendrian_angle).collect();
    let (angle_mean, angle_std) = if chart.model == SurfaceModel::Legendrian && !angles.is_empty() {
        // β lives in [0, π); unwrap around the first sample before averaging.
        let pi = std::f64::consts::PI;
        let a0 = angles[0];
        let un: Vec<f64> = angles.iter().map(|a| a0 + (a - a0 + pi / 2.0).rem_euclid(pi) - pi / 2.0).collect();
        let mean = un.iter().sum::<f64>() / un.len() as f64;
        let var = un.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / un.len() as f64;
        (Some(mean.rem_euclid(pi)), Some(var.sqrt()))
    } else {
        (None, None)
    };
    let curv: Vec<f64> = rows.iter().filter_map(|r| r.centro_affine_curvature).collect();
    let curv_range = (!curv.is_empty()).then(|| [curv.iter().cloned().fold(f64::INFINITY, f64::min), curv.iter().cloned().fold(f64::NEG_INFINITY, f64::max)]);
    let mut dp_ranks = BTreeMap::new();
    for r in rows.iter().filter_map(|r| r.dp_rank) {
        *dp_ranks.entry(r.to_string()).or_insert(0) += 1;
    }
    let mut verdicts = BTreeMap::from([("model_residuals".to_string(), Verdict::of(max_residual <= tol))]);
    if let Some(sd) = angle_std {
        verdicts.insert("constant_legendrian_angle".into(), Verdict::of(sd <= 1e-9 && angles.len() == rows.len()));
    }
    if chart.model != SurfaceModel::Legendrian {
        verdicts.insert("dp_nonvanishing".into(), Verdict::of(!dp_ranks.contains_key("0") && dp_ranks.values().sum::<usize>() == rows.len()));
    }
    if let Some(path) = csv {
        output::write_surface_csv(&rows, path)?;
    }
    let mut s = String::new();
    let _ = writeln!(s, "surface {} ({:?}), {} grid points", chart.name, chart.model, rows.len());
    let _ = writeln!(s, "  max model residual {max_residual:.3e} (tolerance {tol:.1e})");
    if let (Some(m), Some(sd)) = (angle_mean, angle_std) {
        let _ = writeln!(s, "  Legendrian angle {m:.12} (std {sd:.3e})");
    }
    if let Some([a, b]) = curv_range {
        let _ = writeln!(s, "  centro-affine curvature in [{a:.10}, {b:.10}]");
    }
    verdict_line(&mut s, &verdicts);
    let result = SurfaceCheckResult {
        surface: chart.name.clone(),
        model: chart.model,
        grid,
        tolerance: tol,
        points: rows.len(),
        max_residual,
        legendrian_angle_mean: angle_mean,
        legendrian_angle_std: angle_std,
        centro_affine_curvature_range: curv_range,
        dp_ranks,
        rows,
    };
    finish(cfg, verdicts, result, s)
}

fn report_summary(s: &mut String, r: &VerificationReport) {
    let _ = writeln!(s, "{} in {}: {} of {} samples accepted ({} derivatives, seed {})", r.surface, r.space.name(), r.samples_accepted, r.samples_requested, r.derivative_mode, r.seed);
    let _ = writeln!(s, "  Einstein constant {:.10} (expected {:.4})", r.aggregates.einstein_constant_mean, r.einstein_constant_expected);
    if let Some(e) = r.aggregates.max.get("einstein_residual") {
        let _ = writeln!(s, "  max Einstein residual {e:.3e}, min {:.3e}", r.aggregates.min_einstein_residual);
    }
    if let Some(h) = r.aggregates.max.get("abs_mean_curvature") {
        let _ = writeln!(s, "  max |H| {h:.3e}");
    }
    let clusters: Vec<String> = r.aggregates.alpha_clusters.iter().map(|c| format!("{:.6}×{}", c.value, c.count)).collect();
    let _ = writeln!(s, "  alpha clusters {}", clusters.join(", "));
    let _ = writeln!(s, "  Gauss-map ranks {:?}", r.aggregates.gauss_map_ranks);
    verdict_line(s, &r.verdicts);
    for (k, v) in &r.observations {
        let _ = writeln!(s, "  {k:<18} {v} (observation)");
    }
}

#[derive(Serialize)]
struct SolvVerifyResult {
    certificate: IwasawaCertificate,
    orbit: Option<VerificationReport>,
}

fn run_verify(
    cfg: &RunConfig,
    space: Option<&str>,
    surface: Option<&str>,
    samples: usize,
    tol: Option<f64>,
    fd_step: Option<f64>,
    grid_dump: Option<&Path>,
) -> Result<Outcome, CliError> {
    let sel = match space {
        Some(s) => Some(parse_space(s)?),
        None => None,
    };
    if let Some(SpaceSel::Solv(kind)) = sel {
        if surface.is_some() {
            return Err(CliError::Config("solvmanifold spaces take no surface".into()));
        }
        return run_verify_solv(cfg, kind, samples, tol, grid_dump);
    }
    let surface = surface.ok_or_else(|| CliError::Config("verify needs --surface for symmetric spaces".into()))?;
    let mut chart = load_surface(surface)?;
    if let Some(h) = fd_step {
        chart = chart.with_mode(DerivMode::FiniteDifference { h1: h / 10.0, h2: h });
    }
    let space = match sel {
        Some(SpaceSel::Symmetric(sp)) => sp,
        _ => default_space(&chart),
    };
    let fd = matches!(chart.mode, DerivMode::FiniteDifference { .. });
    let tolerances = match (fd, tol) {
        (false, t) => Tolerances::analytic(t.unwrap_or(DEFAULT_TOL_ANALYTIC)),
        (true, t) => Tolerances::finite_difference(t.unwrap_or(DEFAULT_TOL_FD)),
    };
    let hc = HypersurfaceChart::new(chart, space)?;
    let report = verify::einstein_report(&hc, &SamplingPlan::new(samples, cfg.seed), &tolerances)?;
    if let Some(path) = grid_dump {
        write_grid_dump(&report.records, path)?;
    }
    let mut s = String::new();
    report_summary(&mut s, &report);
    let verdicts = report.verdicts.clone();
    finish(cfg, verdicts, report, s)
}

fn run_verify_solv(cfg: &RunConfig, kind: ModelKind, samples: usize, tol: Option<f64>, grid_dump: Option<&Path>) -> Result<Outcome, CliError> {
    let m = AlgebraModel::new(kind);
    let datum = standard_roots(&m)?;
    let iw = solv::iwasawa(&m, &datum)?;
    let s_alg = MetricSolvAlgebra::from_iwasawa(&m, &iw)?;
    let xi = match kind {
        ModelKind::Sl3 => s_alg.default_xi()?,
        _ => s_alg.random_xi(&mut rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed))?,
    };
    let cert = solv::certify(&m, Some(&xi), 1e-9)?;
    let mut s = String::new();
    certificate_summary(&mut s, &cert);
    let mut verdicts = BTreeMap::from([("certificate".to_string(), Verdict::of(cert.pass))]);
    let orbit = if kind == ModelKind::Sl3 {
        let sub = s_alg.codim1_subalgebra(&xi)?;
        let hc = HypersurfaceChart::solv_orbit(&sub)?;
        let report = verify::einstein_report(&hc, &SamplingPlan::new(samples, cfg.seed), &Tolerances::analytic(tol.unwrap_or(DEFAULT_TOL_ANALYTIC)))?;
        if let Some(path) = grid_dump {
            write_grid_dump(&report.records, path)?;
        }
        report_summary(&mut s, &report);
        verdicts.extend(report.verdicts.iter().map(|(k, v)| (k.clone(), *v)));
        Some(report)
    } else {
        if grid_dump.is_some() {
            let _ = writeln!(s, "  (no ambient model for {kind:?}; grid dump skipped)");
        }
        None
    };
    finish(cfg, verdicts, SolvVerifyResult { certificate: cert, orbit }, s)
}

fn run_probe(cfg: &RunConfig, space: Option<&str>, surface: &str, u: Option<[f64; 2]>, theta: [f64; 2], t1: [f64; 2], points: usize, threshold: f64) -> Result<Outcome, CliError> {
    let hc = symmetric_chart(space, surface)?;
    let sc = hc.surface().expect("leaf chart");
    let u = u.unwrap_or([0.5 * (sc.domain[0][0] + sc.domain[0][1]), 0.5 * (sc.domain[1][0] + sc.domain[1][1])]);
    let probe: SingularProbe = verify::singular_locus_probe(&hc, u, theta, t1, points, threshold)?;
    let mut s = String::new();
    let _ = writeln!(s, "leaf through u = ({:.6}, {:.6}) of {}, theta in [{}, {}], {} points", u[0], u[1], hc.name(), theta[0], theta[1], points);
    let _ = writeln!(s, "  {} rank drops below {threshold:.1e}", probe.drops.len());
    if let Some(d) = probe.max_deviation {
        let _ = writeln!(s, "  max deviation from the predicted locus t1 = 0: {d:.3e}");
    }
    // A leaf chart's predicted locus is the whole theta-family at t1 = 0.
    let matched = match probe.max_deviation {
        Some(d) => d <= 1e-4 && probe.drops.len() == probe.scan.len(),
        None => true,
    };
    let verdicts = BTreeMap::from([("predicted_locus".to_string(), Verdict::of(matched))]);
    verdict_line(&mut s, &verdicts);
    finish(cfg, verdicts, probe, s)
}

/// Executes one command; artifacts are written before returning.
pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    match &cfg.command {
        Command::Roots { model } => run_roots(cfg, model),
        Command::Iwasawa { model, xi, tol } => run_iwasawa(cfg, model, xi.as_deref(), *tol),
        Command::SurfaceCheck { surface, grid, tol, csv } => run_surface_check(cfg, surface, *grid, *tol, csv.as_deref()),
        Command::Verify { space, surface, samples, tol, fd_step, grid_dump } => {
            run_verify(cfg, space.as_deref(), surface.as_deref(), *samples, *tol, *fd_step, grid_dump.as_deref())
        }
        Command::SingularProbe { space, surface, u, theta, t1, points, threshold } => {
            run_probe(cfg, space.as_deref(), surface, *u, *theta, *t1, *points, *threshold)
        }
    }
}
