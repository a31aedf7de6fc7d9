//! The light-like locus {B = 0}: predictor–corrector tracing in the plane,
//! the degenerate-line containment check, the non-degenerate/degenerate
//! dichotomy, curvature-proportionality checks along null curves, and the
//! axis-restriction and boundedness diagnostics.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::expr::Expr;
use crate::geodesics::{self, GeodesicError};
use crate::hypersurface::{CausalClass, GraphSurface, SurfaceError};
use crate::jets::Jet;
use crate::metric::{MetricChart, MetricError, MetricKind};

/// Sup-norm radius of the traced box; tracing stops when a predictor step
/// leaves it.
pub const DOMAIN_BOUND: f64 = 2.0;

/// Corrector contract: accepted samples satisfy |B| below this.
pub const CORRECTOR_TOL: f64 = 1e-12;

/// |∇B| threshold under which a locus point counts as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum LocusError {
    #[error("surface error: {0}")]
    Surface(#[from] SurfaceError),
    #[error("geodesic error: {0}")]
    Geodesic(#[from] GeodesicError),
    #[error("metric error: {0}")]
    Metric(#[from] MetricError),
    #[error("tracing requires a two-dimensional domain, got n = {0}")]
    NotPlanar(usize),
    #[error("seed corrected onto a degenerate locus point (|∇B| = {0:.3e}); use the line check instead")]
    DegenerateSeed(f64),
    #[error("corrector failed to reach |B| ≤ {CORRECTOR_TOL:e} (last |B| = {0:.3e})")]
    CorrectorDiverged(f64),
    #[error("point is not light-like (class {0:?})")]
    NotLightlike(CausalClass),
    #[error("point is not a degenerate light-like point (class {0:?})")]
    NotDegenerate(CausalClass),
    #[error("curve violates the precondition at sample {index}: |B| = {b:.3e}, |∇B| = {grad:.3e}, tol {tol:e}")]
    CurveNotDegenerate { index: usize, b: f64, grad: f64, tol: f64 },
    #[error("curve too short for differencing")]
    CurveTooShort,
    #[error("ambient chart not admissible along the reference axis (residual {0:.3e})")]
    InadmissibleChart(f64),
    #[error("expected {0} quadratic coefficient expressions, got {1}")]
    CoefficientCount(usize, usize),
}

/// One accepted sample of a traced locus.
#[derive(Debug, Clone, Serialize)]
pub struct LocusSample {
    pub p: Vec<f64>,
    pub b: f64,
    pub grad_b: Vec<f64>,
    pub cls: CausalClass,
}

#[derive(Debug, Clone, Serialize)]
pub struct LocusCurve {
    pub samples: Vec<LocusSample>,
    pub step: f64,
    pub arc_length: f64,
    /// Tracing stopped because |∇B| fell under the degeneracy threshold.
    pub hit_degenerate: bool,
}

fn newton_correct(
    surface: &GraphSurface,
    p: &mut Vec<f64>,
) -> Result<(f64, Vec<f64>), LocusError> {
    let mut last_b = f64::INFINITY;
    for _ in 0..8 {
        let r = surface.point_report_default(p)?;
        let g2: f64 = r.grad_b.iter().map(|g| g * g).sum();
        if r.b.abs() <= CORRECTOR_TOL {
            return Ok((r.b, r.grad_b.iter().copied().collect()));
        }
        last_b = r.b.abs();
        if g2 == 0.0 {
            break;
        }
        for (pi, gi) in p.iter_mut().zip(r.grad_b.iter()) {
            *pi -= r.b * gi / g2;
        }
    }
    let r = surface.point_report_default(p)?;
    if r.b.abs() <= CORRECTOR_TOL {
        return Ok((r.b, r.grad_b.iter().copied().collect()));
    }
    Err(LocusError::CorrectorDiverged(last_b))
}

fn trace_one_direction(
    surface: &GraphSurface,
    start: &[f64],
    mut tangent: Vec<f64>,
    step: f64,
    max_steps: usize,
) -> Result<(Vec<LocusSample>, f64, bool), LocusError> {
    let mut samples = Vec::new();
    let mut p = start.to_vec();
    let mut arc = 0.0;
    let mut h = step;
    let mut hit_degenerate = false;
    for _ in 0..max_steps {
        // predictor along the tangent, corrector back onto B = 0
        let pred: Vec<f64> = p.iter().zip(&tangent).map(|(a, t)| a + h * t).collect();
        if pred.iter().any(|c| c.abs() > DOMAIN_BOUND) {
            break;
        }
        let mut q = pred;
        match newton_correct(surface, &mut q) {
            Ok(_) => {}
            Err(LocusError::CorrectorDiverged(_)) if h > step / 64.0 => {
                h /= 2.0;
                continue;
            }
            Err(e) => return Err(e),
        }
        let r = surface.point_report_default(&q)?;
        let grad: Vec<f64> = r.grad_b.iter().copied().collect();
        let gnorm: f64 = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        arc += p
            .iter()
            .zip(&q)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        samples.push(LocusSample { p: q.clone(), b: r.b, grad_b: grad.clone(), cls: r.cls });
        if gnorm < DEGENERACY_TOL {
            hit_degenerate = true;
            break;
        }
        // next tangent: rotate ∇B by 90°, keep the marching orientation
        let mut t = vec![-grad[1] / gnorm, grad[0] / gnorm];
        if t[0] * tangent[0] + t[1] * tangent[1] < 0.0 {
            t[0] = -t[0];
            t[1] = -t[1];
        }
        tangent = t;
        p = q;
        h = step;
    }
    Ok((samples, arc, hit_degenerate))
}

/// Trace the planar locus {B = 0} through a seed by pseudo-arclength
/// continuation: predictor perpendicular to ∇B, Newton corrector onto the
/// level set, step halving on corrector failure.
pub fn trace_locus(
    surface: &GraphSurface,
    seed: &[f64],
    step: f64,
    max_steps: usize,
) -> Result<LocusCurve, LocusError> {
    if surface.n() != 2 {
        return Err(LocusError::NotPlanar(surface.n()));
    }
    let mut p = seed.to_vec();
    let (b0, grad0) = match newton_correct(surface, &mut p) {
        Ok(x) => x,
        Err(LocusError::CorrectorDiverged(last)) => {
            let r = surface.point_report_default(&p)?;
            let gnorm: f64 = r.grad_b.iter().map(|g| g * g).sum::<f64>().sqrt();
            if gnorm < 1e-3 {
                return Err(LocusError::DegenerateSeed(gnorm));
            }
            return Err(LocusError::CorrectorDiverged(last));
        }
        Err(e) => return Err(e),
    };
    let gnorm: f64 = grad0.iter().map(|g| g * g).sum::<f64>().sqrt();
    if gnorm < DEGENERACY_TOL {
        return Err(LocusError::DegenerateSeed(gnorm));
    }
    let r0 = surface.point_report_default(&p)?;
    let seed_sample = LocusSample {
        p: p.clone(),
        b: b0,
        grad_b: grad0.clone(),
        cls: r0.cls,
    };
    let tangent = vec![-grad0[1] / gnorm, grad0[0] / gnorm];
    let neg: Vec<f64> = tangent.iter().map(|t| -t).collect();
    let (fwd, arc_f, deg_f) = trace_one_direction(surface, &p, tangent, step, max_steps / 2)?;
    let (mut bwd, arc_b, deg_b) = trace_one_direction(surface, &p, neg, step, max_steps / 2)?;
    bwd.reverse();
    bwd.push(seed_sample);
    bwd.extend(fwd);
    Ok(LocusCurve {
        samples: bwd,
        step,
        arc_length: arc_f + arc_b,
        hit_degenerate: deg_f || deg_b,
    })
}

/// Containment check for the degenerate light-like line: integrates the
/// ambient geodesic from F(o) in direction dF(∂x_n) and measures how far
/// the geodesic leaves the graph, classifying the surface points above it.
#[derive(Debug, Clone, Serialize)]
pub struct LineCheckReport {
    pub ts: Vec<f64>,
    /// Ambient geodesic sample positions.
    pub xs: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub classes: Vec<CausalClass>,
    pub max_residual: f64,
    pub all_degenerate: bool,
    pub tol: f64,
    pub verdict: bool,
}

pub fn verify_lightline(
    surface: &GraphSurface,
    o: &[f64],
    half_length: f64,
    step: f64,
    tol: f64,
) -> Result<LineCheckReport, LocusError> {
    let n = surface.n();
    let report = surface.point_report_default(o)?;
    if report.cls != CausalClass::LightlikeDegenerate {
        return Err(LocusError::NotDegenerate(report.cls));
    }
    let x0 = surface.immerse(o)?;
    let f1 = surface.height_jet(o, 1)?;
    let mut v0 = vec![f1.gradient(n - 1)];
    for k in 0..n {
        v0.push(if k == n - 1 { 1.0 } else { 0.0 });
    }
    let curve =
        geodesics::geodesic_ivp(surface.ambient(), &x0, &v0, (-half_length, half_length), step)?;
    let mut ts = Vec::with_capacity(curve.samples.len());
    let mut xs = Vec::with_capacity(curve.samples.len());
    let mut residuals = Vec::with_capacity(curve.samples.len());
    let mut classes = Vec::with_capacity(curve.samples.len());
    let mut max_residual = 0.0f64;
    let mut all_degenerate = true;
    for s in &curve.samples {
        let spatial = &s.x[1..];
        let f = surface.height_value(spatial)?;
        let res = (s.x[0] - f).abs();
        let cls = surface.point_report_default(spatial)?.cls;
        if cls != CausalClass::LightlikeDegenerate {
            all_degenerate = false;
        }
        max_residual = max_residual.max(res);
        ts.push(s.t);
        xs.push(s.x.clone());
        residuals.push(res);
        classes.push(cls);
    }
    Ok(LineCheckReport {
        ts,
        xs,
        residuals,
        classes,
        max_residual,
        all_degenerate,
        tol,
        verdict: max_residual <= tol && all_degenerate,
    })
}

/// Evidence for the non-degenerate branch of the dichotomy: the locus
/// through the point maps to a null curve with second derivative
/// independent of the first, and B changes sign across it.
#[derive(Debug, Clone, Serialize)]
pub struct NondegenerateEvidence {
    pub locus: LocusCurve,
    pub null_defect: f64,
    pub independence_margin: f64,
    pub sign_change: bool,
}

#[derive(Debug, Clone, Serialize)]
pub enum Dichotomy {
    /// Null regular locus curve crossing causal types.
    CaseA(NondegenerateEvidence),
    /// Degenerate point: a light-like line lies on the surface.
    CaseB(LineCheckReport),
}

impl Dichotomy {
    pub fn case_label(&self) -> &'static str {
        match self {
            Dichotomy::CaseA(_) => "a",
            Dichotomy::CaseB(_) => "b",
        }
    }
}

fn metric_ip(chart: &MetricChart, x: &[f64], a: &[f64], b: &[f64]) -> Result<f64, MetricError> {
    let g = chart.metric_at(x)?.g;
    let dim = x.len();
    let mut s = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            s += g[(i, j)] * a[i] * b[j];
        }
    }
    Ok(s)
}

pub fn dichotomy_check(surface: &GraphSurface, o: &[f64]) -> Result<Dichotomy, LocusError> {
    if surface.n() != 2 {
        return Err(LocusError::NotPlanar(surface.n()));
    }
    let report = surface.point_report_default(o)?;
    match report.cls {
        CausalClass::Spacelike | CausalClass::Timelike => {
            return Err(LocusError::NotLightlike(report.cls))
        }
        CausalClass::LightlikeDegenerate => {
            let normalized = surface.normalize_at_lightlike(o, report.tol_b, report.tol_grad)?;
            let line = verify_lightline(&normalized, &[0.0, 0.0], 0.5, 1e-3, 1e-10)?;
            return Ok(Dichotomy::CaseB(line));
        }
        CausalClass::LightlikeNondegenerate => {}
    }
    let locus = trace_locus(surface, o, 1e-2, 200)?;
    let m = locus.samples.len();
    if m < 5 {
        return Err(LocusError::CurveTooShort);
    }
    // push the exact locus tangents through dF, then difference those for
    // the second derivative
    let mut points = Vec::with_capacity(m);
    let mut tangents = Vec::with_capacity(m);
    let mut prev: Option<Vec<f64>> = None;
    for s in &locus.samples {
        let x = surface.immerse(&s.p)?;
        let f1 = surface.height_jet(&s.p, 1)?;
        let g: &Vec<f64> = &s.grad_b;
        let gn = (g[0] * g[0] + g[1] * g[1]).sqrt();
        let mut t = vec![-g[1] / gn, g[0] / gn];
        if let Some(pt) = &prev {
            if t[0] * pt[0] + t[1] * pt[1] < 0.0 {
                t[0] = -t[0];
                t[1] = -t[1];
            }
        }
        let push = vec![f1.gradient(0) * t[0] + f1.gradient(1) * t[1], t[0], t[1]];
        prev = Some(t);
        points.push(x);
        tangents.push(push);
    }
    let chart = surface.ambient();
    let mut null_defect = 0.0f64;
    let mut margin = f64::INFINITY;
    for k in 1..m - 1 {
        let q = metric_ip(chart, &points[k], &tangents[k], &tangents[k])?;
        let norm2: f64 = tangents[k].iter().map(|a| a * a).sum();
        null_defect = null_defect.max(q.abs() / norm2);
        let second: Vec<f64> = (0..3)
            .map(|c| (tangents[k + 1][c] - tangents[k - 1][c]) / (2.0 * locus.step))
            .collect();
        let n1: f64 = norm2.sqrt();
        let n2: f64 = second.iter().map(|a| a * a).sum::<f64>().sqrt();
        if n2 < 1e-12 {
            margin = 0.0;
            continue;
        }
        let mat = DMatrix::from_fn(3, 2, |r, c| {
            if c == 0 {
                tangents[k][r] / n1
            } else {
                second[r] / n2
            }
        });
        let sv = mat.svd(false, false).singular_values;
        margin = margin.min(sv[sv.len() - 1]);
    }
    // B must change sign across the curve
    let delta = 1e-3;
    let mut sign_change = true;
    for k in [m / 4, m / 2, 3 * m / 4] {
        let s = &locus.samples[k];
        let gn: f64 = s.grad_b.iter().map(|g| g * g).sum::<f64>().sqrt();
        let nhat: Vec<f64> = s.grad_b.iter().map(|g| g / gn).collect();
        let plus: Vec<f64> = s.p.iter().zip(&nhat).map(|(a, b)| a + delta * b).collect();
        let minus: Vec<f64> = s.p.iter().zip(&nhat).map(|(a, b)| a - delta * b).collect();
        let bp = surface.point_report_default(&plus)?.b;
        let bm = surface.point_report_default(&minus)?.b;
        if !(bp > 0.0 && bm < 0.0) {
            sign_change = false;
        }
    }
    Ok(Dichotomy::CaseA(NondegenerateEvidence {
        locus,
        null_defect,
        independence_margin: margin,
        sign_change,
    }))
}

/// Max over interior samples of the component of the covariant second
/// derivative of F∘γ orthogonal to its first derivative (Euclidean),
/// normalized by the magnitudes; small values certify proportionality.
pub fn prop41_check(
    surface: &GraphSurface,
    gamma: &[Vec<f64>],
    h: f64,
    tol: f64,
) -> Result<f64, LocusError> {
    let m = gamma.len();
    if m < 5 {
        return Err(LocusError::CurveTooShort);
    }
    for (index, p) in gamma.iter().enumerate() {
        let r = surface.point_report_default(p)?;
        let grad: f64 = r.grad_b.iter().map(|g| g * g).sum::<f64>().sqrt();
        if r.b.abs() >= tol || grad >= tol {
            return Err(LocusError::CurveNotDegenerate { index, b: r.b.abs(), grad, tol });
        }
    }
    let n = surface.n();
    let dim = n + 1;
    // assemble the mapped curve with velocities dF(γ')
    let mut samples = Vec::with_capacity(m);
    for k in 0..m {
        let dgamma: Vec<f64> = (0..n)
            .map(|c| {
                if k == 0 {
                    (-3.0 * gamma[0][c] + 4.0 * gamma[1][c] - gamma[2][c]) / (2.0 * h)
                } else if k == m - 1 {
                    (3.0 * gamma[m - 1][c] - 4.0 * gamma[m - 2][c] + gamma[m - 3][c]) / (2.0 * h)
                } else {
                    (gamma[k + 1][c] - gamma[k - 1][c]) / (2.0 * h)
                }
            })
            .collect();
        let f1 = surface.height_jet(&gamma[k], 1)?;
        let mut v = vec![(0..n).map(|i| f1.gradient(i) * dgamma[i]).sum::<f64>()];
        v.extend(dgamma);
        samples.push(geodesics::CurveSample {
            t: k as f64 * h,
            x: surface.immerse(&gamma[k])?,
            v,
        });
    }
    let curve = geodesics::Curve::from_samples(samples, h);
    let mut defect = 0.0f64;
    for k in 1..m - 1 {
        let acc = geodesics::curve_acceleration(surface.ambient(), &curve, k as f64 * h)?;
        let v = &curve.samples[k].v;
        let vn2: f64 = v.iter().map(|a| a * a).sum();
        let proj: f64 = acc.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() / vn2;
        let orth: Vec<f64> = (0..dim).map(|c| acc[c] - proj * v[c]).collect();
        let on: f64 = orth.iter().map(|a| a * a).sum::<f64>().sqrt();
        let an: f64 = acc.iter().map(|a| a * a).sum::<f64>().sqrt();
        defect = defect.max(on / (an + vn2.sqrt()));
    }
    Ok(defect)
}

/// Integral curve of the null direction (kernel of the first-fundamental
/// matrix) through `p` on a surface with B ≡ 0, sampled symmetrically.
pub fn null_direction_curve(
    surface: &GraphSurface,
    p: &[f64],
    half_length: f64,
    step: f64,
) -> Result<Vec<Vec<f64>>, LocusError> {
    let n = surface.n();
    let kernel = |q: &[f64]| -> Result<Vec<f64>, LocusError> {
        let r = surface.point_report_default(q)?;
        let eig = nalgebra::SymmetricEigen::new(r.s.clone());
        let mut best = 0;
        for i in 1..n {
            if eig.eigenvalues[i].abs() < eig.eigenvalues[best].abs() {
                best = i;
            }
        }
        Ok(eig.eigenvectors.column(best).iter().copied().collect())
    };
    let steps = (half_length / step).round() as usize;
    let march = |sign: f64| -> Result<Vec<Vec<f64>>, LocusError> {
        let mut out = Vec::with_capacity(steps);
        let mut q = p.to_vec();
        let mut dir = kernel(&q)?;
        if sign < 0.0 {
            dir.iter_mut().for_each(|d| *d = -*d);
        }
        for _ in 0..steps {
            // midpoint rule on the unit kernel field
            let mid: Vec<f64> = q.iter().zip(&dir).map(|(a, d)| a + 0.5 * step * d).collect();
            let mut kmid = kernel(&mid)?;
            if kmid.iter().zip(&dir).map(|(a, b)| a * b).sum::<f64>() < 0.0 {
                kmid.iter_mut().for_each(|d| *d = -*d);
            }
            q = q.iter().zip(&kmid).map(|(a, d)| a + step * d).collect();
            dir = kmid;
            out.push(q.clone());
        }
        Ok(out)
    };
    let mut bwd = march(-1.0)?;
    bwd.reverse();
    bwd.push(p.to_vec());
    bwd.extend(march(1.0)?);
    Ok(bwd)
}

/// Residuals of the axis restrictions for a reference surface
/// `f₀ = x_n + Σ_{1≤j≤k≤n−1} c_{j,k}·x_j·x_k`: B, the transverse ∇B
/// components, A, and the transverse ∇A components along the x_n-axis must
/// all vanish.
#[derive(Debug, Clone, Serialize)]
pub struct AxisResiduals {
    pub b_sup: f64,
    pub grad_b_sup: f64,
    pub a_sup: f64,
    pub grad_a_sup: f64,
}

impl AxisResiduals {
    pub fn max(&self) -> f64 {
        self.b_sup.max(self.grad_b_sup).max(self.a_sup).max(self.grad_a_sup)
    }
}

pub fn prop32_reference_check(
    chart: &MetricChart,
    c_quadratic: &[Expr],
    n: usize,
    xn_grid: &[f64],
) -> Result<AxisResiduals, LocusError> {
    let expected = (n - 1) * n / 2;
    if c_quadratic.len() != expected {
        return Err(LocusError::CoefficientCount(expected, c_quadratic.len()));
    }
    let vars: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    let mut f0 = Expr::var(&vars[n - 1]);
    let mut idx = 0;
    for j in 0..n - 1 {
        for k in j..n - 1 {
            let term = Expr::mul(
                c_quadratic[idx].clone(),
                Expr::mul(Expr::var(&vars[j]), Expr::var(&vars[k])),
            );
            f0 = Expr::add(f0, term);
            idx += 1;
        }
    }
    let surface = GraphSurface::new(n, f0, vars, chart.clone())?;
    let minkowski = chart.kind() == MetricKind::Minkowski;
    let mut res = AxisResiduals { b_sup: 0.0, grad_b_sup: 0.0, a_sup: 0.0, grad_a_sup: 0.0 };
    for &t in xn_grid {
        let mut p = vec![0.0; n];
        p[n - 1] = t;
        if minkowski {
            // exact jet evaluation: A as an order-1 jet gives its gradient
            let f4 = surface.height_jet(&p, 4)?;
            let grads: Vec<Jet> = (0..n)
                .map(|i| f4.partial(i))
                .collect::<Result<_, _>>()
                .map_err(SurfaceError::from)?;
            let mut b = Jet::constant(1.0, n, 3);
            for g in &grads {
                b = b.sub(&g.mul(g).unwrap()).unwrap();
            }
            res.b_sup = res.b_sup.max(b.value().abs());
            for i in 0..n - 1 {
                res.grad_b_sup = res.grad_b_sup.max(b.gradient(i).abs());
            }
            let bt = b.truncated(1);
            let mut a = Jet::zero(n, 1);
            for i in 0..n {
                for j in 0..n {
                    let fij = f4
                        .partial(i)
                        .unwrap()
                        .partial(j)
                        .unwrap()
                        .truncated(1);
                    if i == j {
                        a = a.add(&bt.mul(&fij).unwrap()).unwrap();
                    }
                    let gi = grads[i].truncated(1);
                    let gj = grads[j].truncated(1);
                    a = a.add(&gi.mul(&gj).unwrap().mul(&fij).unwrap()).unwrap();
                }
            }
            res.a_sup = res.a_sup.max(a.value().abs());
            for i in 0..n - 1 {
                res.grad_a_sup = res.grad_a_sup.max(a.gradient(i).abs());
            }
        } else {
            let x = surface.immerse(&p)?;
            let adm = chart.is_admissible_at(&x, 1e-6)?;
            if !adm.admissible {
                return Err(LocusError::InadmissibleChart(
                    adm.g00_residual
                        .max(adm.g0i_residual)
                        .max(adm.gjk_residual)
                        .max(adm.christoffel_residual),
                ));
            }
            let r = surface.point_report_default(&p)?;
            res.b_sup = res.b_sup.max(r.b.abs());
            for i in 0..n - 1 {
                res.grad_b_sup = res.grad_b_sup.max(r.grad_b[i].abs());
            }
            res.a_sup = res.a_sup.max(r.a.abs());
            let h = 1e-4;
            for i in 0..n - 1 {
                let mut pp = p.clone();
                let mut pm = p.clone();
                pp[i] += h;
                pm[i] -= h;
                let ap = surface.point_report_default(&pp)?.a;
                let am = surface.point_report_default(&pm)?.a;
                res.grad_a_sup = res.grad_a_sup.max(((ap - am) / (2.0 * h)).abs());
            }
        }
    }
    Ok(res)
}

/// |H| statistics on one punctured grid.
#[derive(Debug, Clone, Serialize)]
pub struct GridEstimate {
    pub radius: f64,
    pub inf: f64,
    pub sup: f64,
    /// Sup over the grid columns adjacent to the x_n-axis; isolates the
    /// behavior on sequences approaching the degenerate line from blow-up
    /// near other locus branches crossing the grid.
    pub axis_sup: f64,
    pub points_used: usize,
}

/// Mean-curvature boundedness diagnostics around a light-like point,
/// combined with the line containment check and the fitted vanishing order
/// of B along the transverse axis.
#[derive(Debug, Clone, Serialize)]
pub struct BoundednessReport {
    pub grids: Vec<GridEstimate>,
    /// Sups increase monotonically toward the point with total ratio > 1.5.
    pub diverging: bool,
    /// |H| vanishes on the whole sampled region (log|H| unbounded below).
    pub h_identically_zero: bool,
    /// Bounded away from 0 and ∞ on every grid (neither of the above and
    /// positive infimum).
    pub bounded: bool,
    pub line: Option<LineCheckReport>,
    pub fitted_b_order: Option<i32>,
    /// Fitted order ≡ 0 mod 4 (B = c·(x_n)^{2m} with even m).
    pub even_m_consistent: Option<bool>,
}

const GRID_RADII: [f64; 3] = [0.12, 0.08, 0.04];

pub fn theorem_d_check(
    surface: &GraphSurface,
    o: &[f64],
    half_length: f64,
) -> Result<BoundednessReport, LocusError> {
    if surface.n() != 2 {
        return Err(LocusError::NotPlanar(surface.n()));
    }
    let report = surface.point_report_default(o)?;
    if !report.cls.is_lightlike() {
        return Err(LocusError::NotLightlike(report.cls));
    }
    let mut grids = Vec::new();
    for radius in GRID_RADII {
        let mut inf = f64::INFINITY;
        let mut sup = 0.0f64;
        let mut axis_sup = 0.0f64;
        let mut used = 0;
        let m = 10i32;
        for i in -m..=m {
            for j in -m..=m {
                if i == 0 && j == 0 {
                    continue;
                }
                let p = [
                    o[0] + radius * i as f64 / m as f64,
                    o[1] + radius * j as f64 / m as f64,
                ];
                let r = surface.point_report_default(&p)?;
                if r.b.abs() <= 1e-12 {
                    continue;
                }
                let h = r.a.abs() / (2.0 * r.b.abs().powf(1.5));
                inf = inf.min(h);
                sup = sup.max(h);
                if i.abs() == 1 {
                    axis_sup = axis_sup.max(h);
                }
                used += 1;
            }
        }
        grids.push(GridEstimate { radius, inf, sup, axis_sup, points_used: used });
    }
    let global_sup = grids.iter().fold(0.0f64, |m, g| m.max(g.sup));
    let h_identically_zero = global_sup < 1e-8;
    let diverging = !h_identically_zero
        && grids.windows(2).all(|w| w[1].axis_sup > w[0].axis_sup)
        && grids.last().unwrap().axis_sup / grids[0].axis_sup > 1.5;
    let global_inf = grids.iter().fold(f64::INFINITY, |m, g| m.min(g.inf));
    let bounded = !h_identically_zero && !diverging && global_inf > 0.0;

    let line = if report.cls == CausalClass::LightlikeDegenerate {
        let normalized = surface.normalize_at_lightlike(o, report.tol_b, report.tol_grad)?;
        Some(verify_lightline(&normalized, &[0.0, 0.0], half_length, 1e-3, 1e-10)?)
    } else {
        None
    };

    // least-squares slope of log|B| against log x along the transverse axis
    let xs: Vec<f64> = (2..=10).map(|k| k as f64 * 0.01).collect();
    let mut pts = Vec::new();
    for &x in &xs {
        let b = surface.point_report_default(&[o[0] + x, o[1]])?.b;
        if b.abs() > 1e-300 {
            pts.push((x.ln(), b.abs().ln()));
        }
    }
    let (fitted_b_order, even_m_consistent) = if pts.len() >= 4 {
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        let order = slope.round() as i32;
        (Some(order), Some(order % 4 == 0))
    } else {
        (None, None)
    };

    Ok(BoundednessReport {
        grids,
        diverging,
        h_identically_zero,
        bounded,
        line,
        fitted_b_order,
        even_m_consistent,
    })
}

// DVector import is used by tests and the SVD margin computation above.
#[allow(unused)]
fn _assert_types(v: DVector<f64>) -> usize {
    v.len()
}
