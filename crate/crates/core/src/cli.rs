//! Command-line front end: spec-file ingestion, the example catalog,
//! analysis and verification commands, JSON reports, and CSV emission for
//! downstream plotting.

use std::collections::HashMap;
use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::json;

use crate::catalog::{self, CatalogError, EntryKind};
use crate::cksolver::{self, CkError, SeriesSurface};
use crate::expr::{parse_with_vars, Expr, ExprError};
use crate::fermi::{self, FermiError, FrameMode};
use crate::geodesics::GeodesicError;
use crate::hypersurface::{GraphSurface, PointReport, SurfaceError};
use crate::jets::JetError;
use crate::locus::{self, Dichotomy, LocusError};
use crate::metric::{MetricChart, MetricError, MetricKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    fn parse(message: impl Into<String>) -> CliError {
        CliError { code: EXIT_PARSE, kind: "parse", message: message.into() }
    }

    fn validation(message: impl Into<String>) -> CliError {
        CliError { code: EXIT_VALIDATION, kind: "validation", message: message.into() }
    }

    fn numeric(message: impl Into<String>) -> CliError {
        CliError { code: EXIT_NUMERIC, kind: "numeric", message: message.into() }
    }
}

impl From<ExprError> for CliError {
    fn from(e: ExprError) -> CliError {
        CliError::parse(e.to_string())
    }
}

impl From<SurfaceError> for CliError {
    fn from(e: SurfaceError) -> CliError {
        match e {
            SurfaceError::Expr(e) => CliError::parse(e.to_string()),
            SurfaceError::Jet(e) => CliError::numeric(e.to_string()),
            other => CliError::validation(other.to_string()),
        }
    }
}

impl From<MetricError> for CliError {
    fn from(e: MetricError) -> CliError {
        CliError::validation(e.to_string())
    }
}

impl From<JetError> for CliError {
    fn from(e: JetError) -> CliError {
        CliError::numeric(e.to_string())
    }
}

impl From<GeodesicError> for CliError {
    fn from(e: GeodesicError) -> CliError {
        CliError::numeric(e.to_string())
    }
}

impl From<CatalogError> for CliError {
    fn from(e: CatalogError) -> CliError {
        match e {
            CatalogError::Expr(e) => CliError::parse(e.to_string()),
            other => CliError::validation(other.to_string()),
        }
    }
}

impl From<CkError> for CliError {
    fn from(e: CkError) -> CliError {
        match e {
            CkError::Expr(e) => CliError::parse(e.to_string()),
            CkError::Format(m) => CliError::parse(m),
            CkError::Jet(e) => CliError::numeric(e.to_string()),
            other => CliError::validation(other.to_string()),
        }
    }
}

impl From<FermiError> for CliError {
    fn from(e: FermiError) -> CliError {
        match e {
            FermiError::StepTooLarge(..) => CliError::validation(e.to_string()),
            other => CliError::numeric(other.to_string()),
        }
    }
}

impl From<LocusError> for CliError {
    fn from(e: LocusError) -> CliError {
        match e {
            LocusError::Surface(e) => e.into(),
            LocusError::Metric(e) => e.into(),
            LocusError::Geodesic(e) => e.into(),
            LocusError::CorrectorDiverged(_) => CliError::numeric(e.to_string()),
            other => CliError::validation(other.to_string()),
        }
    }
}

// ---------------------------------------------------------------------------
// spec files

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub surface: Option<SurfaceSection>,
    pub metric: Option<MetricSection>,
    #[serde(default)]
    pub params: ParamsSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSection {
    pub name: Option<String>,
    pub n: Option<usize>,
    pub f: Option<String>,
    pub vars: Option<Vec<String>>,
    pub series: Option<String>,
    pub example: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSection {
    pub kind: Option<String>,
    /// Keys "i,j" with 0 ≤ i ≤ j ≤ n, values expressions in x0…xn.
    pub components: Option<HashMap<String, String>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub point: Option<Vec<f64>>,
    pub step: Option<f64>,
    pub tol: Option<f64>,
    pub order: Option<usize>,
    pub half_length: Option<f64>,
    pub max_steps: Option<usize>,
    pub alpha: Option<u32>,
    pub eps: Option<f64>,
    pub fd_step: Option<f64>,
    pub velocity: Option<Vec<f64>>,
    pub t_end: Option<f64>,
    /// Quadratic coefficient expressions for the reference-surface check.
    pub c: Option<Vec<String>>,
    pub seed: Option<u64>,
    pub n: Option<usize>,
}

fn load_spec(path: &PathBuf) -> Result<SpecFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::parse(format!("{}: {e}", path.display())))
}

fn resolve_metric(section: Option<&MetricSection>, dim: usize) -> Result<MetricChart, CliError> {
    let Some(section) = section else {
        return Ok(MetricChart::minkowski(dim));
    };
    match section.kind.as_deref() {
        Some("minkowski") | None if section.components.is_none() => {
            Ok(MetricChart::minkowski(dim))
        }
        Some("components") | None => {
            let comps = section
                .components
                .as_ref()
                .ok_or_else(|| CliError::validation("metric kind \"components\" needs a components table"))?;
            let names: Vec<String> = (0..dim).map(|i| format!("x{i}")).collect();
            let name_refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
            let mut entries = HashMap::new();
            for (key, text) in comps {
                let parts: Vec<&str> = key.split(',').map(str::trim).collect();
                let (i, j) = match parts.as_slice() {
                    [a, b] => (
                        a.parse::<usize>().map_err(|_| {
                            CliError::parse(format!("bad metric component key \"{key}\""))
                        })?,
                        b.parse::<usize>().map_err(|_| {
                            CliError::parse(format!("bad metric component key \"{key}\""))
                        })?,
                    ),
                    _ => return Err(CliError::parse(format!("bad metric component key \"{key}\""))),
                };
                entries.insert((i, j), parse_with_vars(text, &name_refs)?);
            }
            Ok(MetricChart::from_components(dim, &entries)?)
        }
        Some(other) => Err(CliError::validation(format!("unknown metric kind \"{other}\""))),
    }
}

/// Resolved surface plus a display name for report echoing.
fn resolve_surface(
    spec: Option<&SpecFile>,
    example: Option<&str>,
) -> Result<(String, GraphSurface), CliError> {
    if let Some(id) = example {
        let entry = catalog::get(id)?;
        let surface = entry
            .surface()
            .ok_or_else(|| {
                CliError::validation(format!("example \"{id}\" is a metric chart, not a surface"))
            })?
            .clone();
        return Ok((format!("examples:{}", entry.id), surface));
    }
    let spec = spec.ok_or_else(|| CliError::validation("no surface given: pass --spec or --example"))?;
    let section = spec
        .surface
        .as_ref()
        .ok_or_else(|| CliError::validation("spec file has no [surface] table"))?;
    let given = [section.f.is_some(), section.series.is_some(), section.example.is_some()]
        .iter()
        .filter(|b| **b)
        .count();
    if given != 1 {
        return Err(CliError::validation(
            "[surface] must give exactly one of f, series, or example",
        ));
    }
    if let Some(id) = &section.example {
        let entry = catalog::get(id)?;
        let surface = entry
            .surface()
            .ok_or_else(|| {
                CliError::validation(format!("example \"{id}\" is a metric chart, not a surface"))
            })?
            .clone();
        return Ok((format!("examples:{}", entry.id), surface));
    }
    if let Some(path) = &section.series {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::validation(format!("cannot read {path}: {e}")))?;
        let series = SeriesSurface::from_json(&text)?;
        let chart = resolve_metric(spec.metric.as_ref(), series.n + 1)?;
        let surface = GraphSurface::from_series_jet(series.f, chart)?;
        return Ok((format!("series:{path}"), surface));
    }
    let f_text = section.f.as_ref().unwrap();
    let n = section
        .n
        .ok_or_else(|| CliError::validation("[surface] with f requires n"))?;
    if n == 0 {
        return Err(CliError::validation("n must be positive"));
    }
    let vars: Vec<String> = match &section.vars {
        Some(v) => {
            if v.len() != n {
                return Err(CliError::validation(format!(
                    "vars lists {} names for n = {n}",
                    v.len()
                )));
            }
            v.clone()
        }
        None => (1..=n).map(|i| format!("x{i}")).collect(),
    };
    let var_refs: Vec<&str> = vars.iter().map(|s| s.as_str()).collect();
    let f = parse_with_vars(f_text, &var_refs)?;
    let chart = resolve_metric(spec.metric.as_ref(), n + 1)?;
    let name = section.name.clone().unwrap_or_else(|| f_text.clone());
    Ok((name, GraphSurface::new(n, f, vars, chart)?))
}

fn parse_point(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::parse(format!("bad coordinate \"{s}\" in point")))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// command line

#[derive(Parser)]
#[command(name = "causal-locus", version, about = "Curvature and light-like locus analysis for graph hypersurfaces in Lorentzian charts")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify a point and report all fundamental quantities there.
    Analyze {
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Builtin example id (see `examples`).
        #[arg(long)]
        example: Option<String>,
        /// Comma-separated domain coordinates.
        #[arg(long)]
        point: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Run a named verification and report residuals and a verdict.
    Verify {
        check: Check,
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        example: Option<String>,
        #[arg(long)]
        point: Option<String>,
        #[arg(long)]
        step: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        /// Write the verified curve as CSV (columns t, x0…xn, B, cls).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Build a power-series surface and write it to a file.
    Build {
        kind: BuildKind,
        /// Transverse data expression λ(x1…x_{n-1}) for the light-like builder.
        #[arg(long)]
        lambda: Option<String>,
        /// η₀(x1…x_{n-1}): coefficient of (x_n)^0.
        #[arg(long)]
        eta0: Option<String>,
        /// η₁(x1…x_{n-1}): coefficient of (x_n)^1.
        #[arg(long)]
        eta1: Option<String>,
        /// φ(x1…x_n) in the admissibility equation A = φ·B^{1+α}.
        #[arg(long)]
        phi: Option<String>,
        #[arg(long, default_value_t = 0)]
        alpha: u32,
        #[arg(short, long, default_value_t = 2)]
        n: usize,
        #[arg(long)]
        order: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// List the builtin example catalog (each entry self-checks on load).
    Examples {
        #[arg(long)]
        json: bool,
    },
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Check {
    /// Light-like line containment through a degenerate point.
    Lightline,
    /// Non-degenerate/degenerate dichotomy at a light-like point.
    Dichotomy,
    /// Curvature-vector proportionality along a null-direction curve.
    Prop41,
    /// Vanishing of B, A and transverse gradients along the reference axis.
    Prop32,
    /// Mean-curvature boundedness diagnostics on nested grids.
    TheoremD,
    /// Fermi chart construction and its defining properties.
    Fermi,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum BuildKind {
    Lightlike,
    Admissible,
}

fn init_threads() {
    if let Ok(text) = std::env::var("CAUSAL_LOCUS_THREADS") {
        if let Ok(k) = text.parse::<usize>() {
            if k >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
            }
        }
    }
}

/// Run the CLI on the given argument list and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_threads();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_PARSE,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            say(&json!({"error": {"kind": e.kind, "message": e.message}}).to_string());
            e.code
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Analyze { spec, example, point, json } => cmd_analyze(spec, example, point, json),
        Cmd::Verify { check, spec, example, point, step, tol, out, json } => {
            cmd_verify(check, spec, example, point, step, tol, out, json)
        }
        Cmd::Build { kind, lambda, eta0, eta1, phi, alpha, n, order, out, json } => {
            cmd_build(kind, lambda, eta0, eta1, phi, alpha, n, order, out, json)
        }
        Cmd::Examples { json } => cmd_examples(json),
    }
}

/// Write a line to stdout, tolerating a closed pipe (e.g. `| head`).
fn say(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout();
    let _ = writeln!(out, "{text}");
}

fn emit(command: &str, inputs: serde_json::Value, results: serde_json::Value, verdict: Option<bool>, json: bool, human: &str) {
    if json {
        let report = json!({
            "schema": 1,
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "inputs": inputs,
            "results": results,
            "verdict": verdict,
        });
        say(&serde_json::to_string_pretty(&report).unwrap());
    } else {
        say(human.trim_end());
        if let Some(v) = verdict {
            say(&format!("verdict: {}", if v { "pass" } else { "fail" }));
        }
    }
}

fn report_json(r: &PointReport) -> serde_json::Value {
    let mat = |m: &nalgebra::DMatrix<f64>| -> Vec<Vec<f64>> {
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
            .collect()
    };
    let vec = |v: &nalgebra::DVector<f64>| -> Vec<f64> { v.iter().copied().collect() };
    json!({
        "p": r.p,
        "cls": r.cls.label(),
        "B": r.b,
        "grad_B": vec(&r.grad_b),
        "A": r.a,
        "S": mat(&r.s),
        "S_cofactor": mat(&r.scof),
        "nu": vec(&r.nu),
        "h": mat(&r.h),
        "H": r.h_mean,
        "H_hat": r.hhat,
        "H_vector": r.hvec.as_ref().map(|v| vec(v)),
        "omega_H": r.omega_h,
        "theta": r.theta,
        "tol_b": r.tol_b,
        "tol_grad": r.tol_grad,
    })
}

fn cmd_analyze(
    spec: Option<PathBuf>,
    example: Option<String>,
    point: Option<String>,
    json_out: bool,
) -> Result<(), CliError> {
    let spec_file = spec.as_ref().map(load_spec).transpose()?;
    let (name, surface) = resolve_surface(spec_file.as_ref(), example.as_deref())?;
    let p = match point {
        Some(text) => parse_point(&text)?,
        None => spec_file
            .as_ref()
            .and_then(|s| s.params.point.clone())
            .unwrap_or_else(|| vec![0.0; surface.n()]),
    };
    if p.len() != surface.n() {
        return Err(CliError::validation(format!(
            "point has {} coordinates, surface domain has {}",
            p.len(),
            surface.n()
        )));
    }
    let r = surface.point_report_default(&p)?;
    let human = format!(
        "surface: {name}\npoint: {:?}\nclass: {}\nB = {:.6e}\nA = {:.6e}\ntheta = {:.6e}\nH = {}\n",
        p,
        r.cls.label(),
        r.b,
        r.a,
        r.theta,
        r.h_mean.map_or("n/a (light-like)".to_string(), |h| format!("{h:.6e}")),
    );
    emit(
        "analyze",
        json!({"surface": name, "point": p}),
        report_json(&r),
        None,
        json_out,
        &human,
    );
    Ok(())
}

fn write_csv(
    path: &PathBuf,
    dim: usize,
    rows: &[(f64, Vec<f64>, f64, &str)],
) -> Result<(), CliError> {
    let mut text = String::from("t");
    for i in 0..dim {
        text.push_str(&format!(",x{i}"));
    }
    text.push_str(",B,cls\n");
    for (t, x, b, cls) in rows {
        text.push_str(&format!("{t}"));
        for c in x {
            text.push_str(&format!(",{c}"));
        }
        text.push_str(&format!(",{b},{cls}\n"));
    }
    std::fs::write(path, text)
        .map_err(|e| CliError::validation(format!("cannot write {}: {e}", path.display())))
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    check: Check,
    spec: Option<PathBuf>,
    example: Option<String>,
    point: Option<String>,
    step: Option<f64>,
    tol: Option<f64>,
    out: Option<PathBuf>,
    json_out: bool,
) -> Result<(), CliError> {
    let spec_file = spec.as_ref().map(load_spec).transpose()?;
    let params = spec_file.as_ref().map(|s| s.params.clone()).unwrap_or_default();
    let step = step.or(params.step);
    let tol = tol.or(params.tol);
    let point_vec = match &point {
        Some(text) => Some(parse_point(text)?),
        None => params.point.clone(),
    };
    let half_length = params.half_length.unwrap_or(0.5);

    match check {
        Check::Lightline => {
            let (name, surface) = resolve_surface(spec_file.as_ref(), example.as_deref())?;
            let o = point_vec.unwrap_or_else(|| vec![0.0; surface.n()]);
            let step = step.unwrap_or(1e-3);
            let tol = tol.unwrap_or(1e-10);
            let rep = locus::verify_lightline(&surface, &o, half_length, step, tol)?;
            if let Some(path) = &out {
                let rows: Vec<(f64, Vec<f64>, f64, &str)> = rep
                    .ts
                    .iter()
                    .zip(&rep.xs)
                    .zip(&rep.classes)
                    .map(|((t, x), cls)| {
                        let b = surface.point_report_default(&x[1..]).map(|r| r.b).unwrap_or(f64::NAN);
                        (*t, x.clone(), b, cls.label())
                    })
                    .collect();
                write_csv(path, surface.n() + 1, &rows)?;
            }
            let verdict = rep.verdict;
            let human = format!(
                "lightline on {name} at {o:?}: max residual {:.3e} (tol {:.1e}), all degenerate: {}\n",
                rep.max_residual, tol, rep.all_degenerate
            );
            emit(
                "verify lightline",
                json!({"surface": name, "point": o, "half_length": half_length, "step": step, "tol": tol}),
                serde_json::to_value(&rep).unwrap(),
                Some(verdict),
                json_out,
                &human,
            );
        }
        Check::Dichotomy => {
            let (name, surface) = resolve_surface(spec_file.as_ref(), example.as_deref())?;
            let o = point_vec.unwrap_or_else(|| vec![0.0; surface.n()]);
            let d = locus::dichotomy_check(&surface, &o)?;
            if let Some(path) = &out {
                if let Dichotomy::CaseA(ev) = &d {
                    let mut t = 0.0;
                    let mut rows = Vec::new();
                    for s in &ev.locus.samples {
                        let x = surface.immerse(&s.p)?;
                        rows.push((t, x, s.b, s.cls.label()));
                        t += ev.locus.step;
                    }
                    write_csv(path, surface.n() + 1, &rows)?;
                }
            }
            let (verdict, human) = match &d {
                Dichotomy::CaseA(ev) => (
                    ev.sign_change && ev.independence_margin > 0.1 && ev.null_defect < 1e-5,
                    format!(
                        "dichotomy on {name} at {o:?}: case (a); null defect {:.3e}, independence margin {:.3}, sign change {}\n",
                        ev.null_defect, ev.independence_margin, ev.sign_change
                    ),
                ),
                Dichotomy::CaseB(line) => (
                    line.verdict,
                    format!(
                        "dichotomy on {name} at {o:?}: case (b); line max residual {:.3e}, all degenerate: {}\n",
                        line.max_residual, line.all_degenerate
                    ),
                ),
            };
            emit(
                "verify dichotomy",
                json!({"surface": name, "point": o}),
                json!({"case": d.case_label(), "evidence": serde_json::to_value(&d).unwrap()}),
                Some(verdict),
                json_out,
                &human,
            );
        }
        Check::Prop41 => {
            let (name, surface) = resolve_surface(spec_file.as_ref(), example.as_deref())?;
            let o = point_vec.unwrap_or_else(|| vec![0.0; surface.n()]);
            let step = step.unwrap_or(1e-2);
            let tol = tol.unwrap_or(1e-8);
            let half = params.half_length.unwrap_or(0.2);
            let gamma = locus::null_direction_curve(&surface, &o, half, step)?;
            let defect = locus::prop41_check(&surface, &gamma, step, tol)?;
            let human = format!(
                "curvature proportionality on {name} through {o:?}: defect {defect:.3e} (tol {tol:.1e})\n"
            );
            emit(
                "verify prop41",
                json!({"surface": name, "point": o, "half_length": half, "step": step, "tol": tol}),
                json!({"defect": defect}),
                Some(defect < tol),
                json_out,
                &human,
            );
        }
        Check::Prop32 => {
            let n = params.n.unwrap_or(2);
            if n < 2 {
                return Err(CliError::validation("reference check needs n >= 2"));
            }
            let chart = resolve_metric(spec_file.as_ref().and_then(|s| s.metric.as_ref()), n + 1)?;
            let vars: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
            let var_refs: Vec<&str> = vars.iter().map(|s| s.as_str()).collect();
            let count = (n - 1) * n / 2;
            let cs: Vec<Expr> = match &params.c {
                Some(texts) => texts
                    .iter()
                    .map(|t| parse_with_vars(t, &var_refs).map_err(CliError::from))
                    .collect::<Result<_, _>>()?,
                None => {
                    // deterministic random affine coefficients
                    let mut rng = ChaCha8Rng::seed_from_u64(params.seed.unwrap_or(7));
                    (0..count)
                        .map(|_| {
                            let mut e = Expr::number(rng.gen_range(-1.0..1.0));
                            for v in &vars {
                                e = Expr::add(
                                    e,
                                    Expr::mul(Expr::number(rng.gen_range(-1.0..1.0)), Expr::var(v)),
                                );
                            }
                            e
                        })
                        .collect()
                }
            };
            let grid: Vec<f64> = (-8..=8).map(|k| k as f64 * 0.05).collect();
            let res = locus::prop32_reference_check(&chart, &cs, n, &grid)?;
            let tol = tol.unwrap_or(if chart.kind() == MetricKind::Minkowski { 1e-10 } else { 1e-5 });
            let human = format!(
                "reference-surface axis residuals (n = {n}): B {:.3e}, transverse dB {:.3e}, A {:.3e}, transverse dA {:.3e} (tol {tol:.1e})\n",
                res.b_sup, res.grad_b_sup, res.a_sup, res.grad_a_sup
            );
            emit(
                "verify prop32",
                json!({"n": n, "coefficients": cs.iter().map(|e| e.to_string()).collect::<Vec<_>>(), "tol": tol}),
                serde_json::to_value(&res).unwrap(),
                Some(res.max() < tol),
                json_out,
                &human,
            );
        }
        Check::TheoremD => {
            let (name, surface) = resolve_surface(spec_file.as_ref(), example.as_deref())?;
            let o = point_vec.unwrap_or_else(|| vec![0.0; surface.n()]);
            let rep = locus::theorem_d_check(&surface, &o, half_length)?;
            if let Some(path) = &out {
                if let Some(line) = &rep.line {
                    let rows: Vec<(f64, Vec<f64>, f64, &str)> = line
                        .ts
                        .iter()
                        .zip(&line.xs)
                        .zip(&line.classes)
                        .map(|((t, x), cls)| (*t, x.clone(), 0.0, cls.label()))
                        .collect();
                    write_csv(path, surface.n() + 1, &rows)?;
                }
            }
            let human = format!(
                "boundedness on {name} at {o:?}: diverging {}, bounded {}, |H| identically zero {}, fitted B order {:?}\n",
                rep.diverging, rep.bounded, rep.h_identically_zero, rep.fitted_b_order
            );
            let verdict = rep.line.as_ref().map_or(true, |l| l.verdict);
            emit(
                "verify theorem-d",
                json!({"surface": name, "point": o, "half_length": half_length}),
                serde_json::to_value(&rep).unwrap(),
                Some(verdict),
                json_out,
                &human,
            );
        }
        Check::Fermi => {
            let chart = match (&example, &spec_file) {
                (Some(id), _) => catalog::get(id)?.chart().clone(),
                (None, Some(s)) => {
                    let dim = s.params.point.as_ref().map(|p| p.len()).unwrap_or(3);
                    resolve_metric(s.metric.as_ref(), dim)?
                }
                (None, None) => catalog::get("perturbed-metric")?.chart().clone(),
            };
            let dim = chart.dim();
            let p = point_vec.unwrap_or_else(|| {
                let mut p = vec![0.0; dim];
                p[1] = 0.3;
                p
            });
            if p.len() != dim {
                return Err(CliError::validation(format!(
                    "point has {} coordinates, chart has {dim}",
                    p.len()
                )));
            }
            let spatial = params.velocity.clone().unwrap_or_else(|| {
                let mut v = vec![0.0; dim - 1];
                v[0] = 0.8;
                if dim > 2 {
                    v[1] = 0.5;
                }
                v
            });
            if spatial.len() != dim - 1 {
                return Err(CliError::validation(format!(
                    "velocity lists {} spatial components, chart needs {}",
                    spatial.len(),
                    dim - 1
                )));
            }
            // solve the time component from the null condition
            let g = chart.metric_at(&p)?.g;
            let a = g[(0, 0)];
            let mut b = 0.0;
            let mut c = 0.0;
            for i in 1..dim {
                b += 2.0 * g[(0, i)] * spatial[i - 1];
                for j in 1..dim {
                    c += g[(i, j)] * spatial[i - 1] * spatial[j - 1];
                }
            }
            let disc = b * b - 4.0 * a * c;
            if disc < 0.0 {
                return Err(CliError::validation("no null direction with the given spatial velocity"));
            }
            let v0 = (-b - disc.sqrt()) / (2.0 * a);
            let mut v = vec![v0];
            v.extend(&spatial);
            let t_end = params.t_end.unwrap_or(1.0);
            let eps = params.eps.unwrap_or(0.05);
            let step = step.unwrap_or(1e-3);
            let fd = params.fd_step.unwrap_or(1e-3);
            let fc = fermi::build_fermi_chart(&chart, &p, &v, (0.0, t_end), eps, step, FrameMode::Parallel)?;
            let ts: Vec<f64> = (0..=10).map(|k| k as f64 * t_end / 10.0).collect();
            let rep = fermi::verify_fermi(&fc, &ts, fd)?;
            let (tol2, tol3) = if chart.kind() == MetricKind::Minkowski {
                (1e-10, 1e-10)
            } else {
                (1e-6, 1e-5)
            };
            let verdict = rep.a1_residual < 1e-8
                && rep.a2_residual < tol2
                && rep.a3_residual < tol3
                && rep.jac_sign_constant;
            let human = format!(
                "fermi chart: on-curve residual {:.3e}, metric residual {:.3e} (tol {tol2:.1e}), christoffel residual {:.3e} (tol {tol3:.1e}), jacobian sign constant {}\n",
                rep.a1_residual, rep.a2_residual, rep.a3_residual, rep.jac_sign_constant
            );
            emit(
                "verify fermi",
                json!({"point": p, "velocity": v, "t_end": t_end, "eps": eps, "step": step, "fd_step": fd}),
                serde_json::to_value(&rep).unwrap(),
                Some(verdict),
                json_out,
                &human,
            );
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_build(
    kind: BuildKind,
    lambda: Option<String>,
    eta0: Option<String>,
    eta1: Option<String>,
    phi: Option<String>,
    alpha: u32,
    n: usize,
    order: Option<usize>,
    out: Option<PathBuf>,
    json_out: bool,
) -> Result<(), CliError> {
    if n < 2 {
        return Err(CliError::validation("builders need n >= 2"));
    }
    let order = order.unwrap_or(10);
    let transverse: Vec<String> = (1..n).map(|i| format!("x{i}")).collect();
    let transverse_refs: Vec<&str> = transverse.iter().map(|s| s.as_str()).collect();
    let all: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    let all_refs: Vec<&str> = all.iter().map(|s| s.as_str()).collect();
    let (series, residual, inputs) = match kind {
        BuildKind::Lightlike => {
            let text = lambda
                .ok_or_else(|| CliError::validation("build lightlike requires --lambda"))?;
            let lam = parse_with_vars(&text, &transverse_refs)?;
            let s = cksolver::build_lightlike(&lam, n, order)?;
            let residual = cksolver::series_residual(&s, None, 0)?;
            (s, residual, json!({"lambda": text, "n": n, "order": order}))
        }
        BuildKind::Admissible => {
            let e0_text = eta0.ok_or_else(|| CliError::validation("build admissible requires --eta0"))?;
            let e1_text = eta1.ok_or_else(|| CliError::validation("build admissible requires --eta1"))?;
            let phi_text = phi.ok_or_else(|| CliError::validation("build admissible requires --phi"))?;
            let e0 = parse_with_vars(&e0_text, &transverse_refs)?;
            let e1 = parse_with_vars(&e1_text, &transverse_refs)?;
            let ph = parse_with_vars(&phi_text, &all_refs)?;
            let s = cksolver::build_admissible(&e0, &e1, &ph, alpha, n, order)?;
            let residual = cksolver::series_residual(&s, Some(&ph), alpha)?;
            (
                s,
                residual,
                json!({"eta0": e0_text, "eta1": e1_text, "phi": phi_text, "alpha": alpha, "n": n, "order": order}),
            )
        }
    };
    if let Some(path) = &out {
        std::fs::write(path, series.to_json())
            .map_err(|e| CliError::validation(format!("cannot write {}: {e}", path.display())))?;
    }
    let human = format!(
        "built series surface: n = {n}, order = {order}, truncated residual {residual:.3e}{}\n",
        out.as_ref()
            .map(|p| format!(", written to {}", p.display()))
            .unwrap_or_default()
    );
    emit(
        "build",
        inputs,
        json!({"n": n, "order": order, "residual": residual, "out": out.as_ref().map(|p| p.display().to_string())}),
        Some(residual < 1e-8),
        json_out,
        &human,
    );
    Ok(())
}

fn cmd_examples(json_out: bool) -> Result<(), CliError> {
    let cat = catalog::catalog()?;
    if json_out {
        let items: Vec<serde_json::Value> = cat
            .iter()
            .map(|e| {
                json!({
                    "id": e.id,
                    "description": e.description,
                    "kind": match &e.kind { EntryKind::Surface(_) => "surface", EntryKind::Chart(_) => "chart" },
                })
            })
            .collect();
        say(&serde_json::to_string_pretty(&json!({
            "schema": 1,
            "version": env!("CARGO_PKG_VERSION"),
            "command": "examples",
            "results": items,
        }))
        .unwrap());
    } else {
        for e in &cat {
            say(&format!("{:<18} {}", e.id, e.description));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> i32 {
        let mut full = vec!["causal-locus"];
        full.extend_from_slice(args);
        run(full)
    }

    #[test]
    fn analyze_examples_and_exit_codes() {
        assert_eq!(run_args(&["analyze", "--example", "F1", "--point", "0,0"]), EXIT_OK);
        assert_eq!(run_args(&["analyze", "--example", "nosuch", "--point", "0,0"]), EXIT_VALIDATION);
        assert_eq!(run_args(&["analyze", "--example", "F1", "--point", "zero,0"]), EXIT_PARSE);
        assert_eq!(run_args(&["examples"]), EXIT_OK);
    }

    #[test]
    fn spec_file_round_trip() {
        let dir = std::env::temp_dir().join("causal-locus-cli-test");
        std::fs::create_dir_all(&dir).unwrap();
        let spec = dir.join("surf.toml");
        std::fs::write(
            &spec,
            "[surface]\nn = 2\nf = \"(x + 1)*tanh(y)\"\nvars = [\"x\", \"y\"]\n\n[params]\npoint = [0.0, 0.0]\n",
        )
        .unwrap();
        assert_eq!(run_args(&["analyze", "--spec", spec.to_str().unwrap()]), EXIT_OK);
        assert_eq!(run_args(&["verify", "dichotomy", "--spec", spec.to_str().unwrap()]), EXIT_OK);
        // unknown keys rejected
        let bad = dir.join("bad.toml");
        std::fs::write(&bad, "[surface]\nn = 2\nf = \"x1\"\nbogus = 1\n").unwrap();
        assert_eq!(run_args(&["analyze", "--spec", bad.to_str().unwrap()]), EXIT_PARSE);
        // malformed expression
        let mal = dir.join("mal.toml");
        std::fs::write(&mal, "[surface]\nn = 2\nf = \"x1 + +\"\n").unwrap();
        assert_eq!(run_args(&["analyze", "--spec", mal.to_str().unwrap()]), EXIT_PARSE);
    }

    #[test]
    fn build_and_reuse_series() {
        let dir = std::env::temp_dir().join("causal-locus-cli-build");
        std::fs::create_dir_all(&dir).unwrap();
        let out = dir.join("cone.json");
        assert_eq!(
            run_args(&[
                "build", "lightlike", "--lambda", "sqrt(1 + x1^2) - 1", "--order", "10", "--out",
                out.to_str().unwrap(),
            ]),
            EXIT_OK
        );
        let spec = dir.join("series.toml");
        std::fs::write(
            &spec,
            format!("[surface]\nseries = \"{}\"\n", out.to_str().unwrap()),
        )
        .unwrap();
        assert_eq!(run_args(&["analyze", "--spec", spec.to_str().unwrap(), "--point", "0,0"]), EXIT_OK);
        // domain error: |grad lambda| >= 1 at the origin
        assert_eq!(
            run_args(&["build", "lightlike", "--lambda", "x1", "--order", "8"]),
            EXIT_VALIDATION
        );
    }

    #[test]
    fn verify_commands_pass() {
        assert_eq!(run_args(&["verify", "lightline", "--example", "F3"]), EXIT_OK);
        assert_eq!(run_args(&["verify", "prop32", "--json"]), EXIT_OK);
        assert_eq!(run_args(&["verify", "prop41", "--example", "lightcone", "--point", "0.3,0.2"]), EXIT_OK);
    }
}
