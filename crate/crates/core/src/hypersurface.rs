//! Fundamental data of graph hypersurfaces `F(x) = (f(x), x)` in a
//! Lorentzian chart: first-fundamental matrix and its determinant `B`,
//! normal `ν̃` with `g(ν̃,ν̃) = −B`, shape contraction `A`, mean-curvature
//! quantities, causal classification, and the normalization rotation used
//! by the light-like analysis.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::expr::{Expr, ExprError};
use crate::jets::{Jet, JetError};
use crate::metric::{MetricChart, MetricError, MetricKind, DEFAULT_ADMISSIBILITY_TOL};

#[derive(Debug, Error)]
pub enum SurfaceError {
    #[error("expression error: {0}")]
    Expr(#[from] ExprError),
    #[error("jet error: {0}")]
    Jet(#[from] JetError),
    #[error("metric error: {0}")]
    Metric(#[from] MetricError),
    #[error("height function uses unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("ambient chart dimension {0} does not match domain dimension {1} + 1")]
    DimensionMismatch(usize, usize),
    #[error("point has {0} coordinates, expected {1}")]
    PointDimension(usize, usize),
    #[error("point is not light-like (class {0:?})")]
    NotLightlike(CausalClass),
    #[error("gradient of f vanishes at a light-like point; B would be 1 there — inconsistent input")]
    InconsistentGradient,
    #[error("ambient chart is not admissible at the surface point (residual {0:.3e})")]
    InadmissibleChart(f64),
    #[error("fractional-power target needs |B| > 0 on the grid; hit B = 0")]
    FractionalPowerAtZero,
}

/// Causal type of a point of the graph, decided from `B` and `∇B` against
/// explicit tolerances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CausalClass {
    Spacelike,
    Timelike,
    LightlikeNondegenerate,
    LightlikeDegenerate,
}

impl CausalClass {
    pub fn is_lightlike(self) -> bool {
        matches!(self, CausalClass::LightlikeNondegenerate | CausalClass::LightlikeDegenerate)
    }

    pub fn label(self) -> &'static str {
        match self {
            CausalClass::Spacelike => "spacelike",
            CausalClass::Timelike => "timelike",
            CausalClass::LightlikeNondegenerate => "lightlike_nondegenerate",
            CausalClass::LightlikeDegenerate => "lightlike_degenerate",
        }
    }
}

/// The height function of a graph: a closed-form expression or a truncated
/// power series centered at the origin (a polynomial, evaluated exactly).
#[derive(Debug, Clone)]
pub enum Height {
    Analytic(Expr),
    Series(Jet),
}

impl Height {
    fn jet_at(&self, vars: &[String], p: &[f64], order: usize) -> Result<Jet, SurfaceError> {
        let n = p.len();
        match self {
            Height::Analytic(e) => {
                let mut env = HashMap::new();
                for (i, name) in vars.iter().enumerate() {
                    env.insert(name.clone(), Jet::variable(i, p[i], n, order)?);
                }
                Ok(e.eval_jet(&env)?)
            }
            Height::Series(jet) => {
                let args: Vec<Jet> = (0..n)
                    .map(|i| Jet::variable(i, p[i], n, order).unwrap())
                    .collect();
                Ok(jet.eval_jets(&args)?)
            }
        }
    }
}

/// A graph immersion `x ↦ (f(x), x)` into an (n+1)-dimensional chart.
#[derive(Debug, Clone)]
pub struct GraphSurface {
    n: usize,
    height: Height,
    /// Domain variable names, in coordinate order.
    vars: Vec<String>,
    ambient: MetricChart,
}

impl GraphSurface {
    pub fn new(
        n: usize,
        f: Expr,
        vars: Vec<String>,
        ambient: MetricChart,
    ) -> Result<GraphSurface, SurfaceError> {
        assert_eq!(vars.len(), n);
        if ambient.dim() != n + 1 {
            return Err(SurfaceError::DimensionMismatch(ambient.dim(), n));
        }
        for v in f.variables() {
            if !vars.contains(&v) {
                return Err(SurfaceError::UnknownVariable(v));
            }
        }
        Ok(GraphSurface { n, height: Height::Analytic(f), vars, ambient })
    }

    /// Graph over Minkowski space with default variable names `x1..xn`.
    pub fn minkowski(n: usize, f: Expr) -> Result<GraphSurface, SurfaceError> {
        let vars = (1..=n).map(|i| format!("x{i}")).collect();
        GraphSurface::new(n, f, vars, MetricChart::minkowski(n + 1))
    }

    /// Graph of a truncated series (polynomial) height function over
    /// Minkowski space.
    pub fn from_series_jet(jet: Jet, ambient: MetricChart) -> Result<GraphSurface, SurfaceError> {
        let n = jet.nvars();
        if ambient.dim() != n + 1 {
            return Err(SurfaceError::DimensionMismatch(ambient.dim(), n));
        }
        let vars = (1..=n).map(|i| format!("x{i}")).collect();
        Ok(GraphSurface { n, height: Height::Series(jet), vars, ambient })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn ambient(&self) -> &MetricChart {
        &self.ambient
    }

    pub fn height(&self) -> &Height {
        &self.height
    }

    /// Jet of f at `p` in the domain variables.
    pub fn height_jet(&self, p: &[f64], order: usize) -> Result<Jet, SurfaceError> {
        if p.len() != self.n {
            return Err(SurfaceError::PointDimension(p.len(), self.n));
        }
        self.height.jet_at(&self.vars, p, order)
    }

    pub fn height_value(&self, p: &[f64]) -> Result<f64, SurfaceError> {
        Ok(self.height_jet(p, 0)?.value())
    }

    /// Ambient image `F(p) = (f(p), p)`.
    pub fn immerse(&self, p: &[f64]) -> Result<Vec<f64>, SurfaceError> {
        let mut x = vec![self.height_value(p)?];
        x.extend_from_slice(p);
        Ok(x)
    }

    /// All fundamental quantities at `p`.
    pub fn point_report(
        &self,
        p: &[f64],
        tol_b: f64,
        tol_grad: f64,
    ) -> Result<PointReport, SurfaceError> {
        let raw = if self.ambient.kind() == MetricKind::Minkowski {
            self.raw_report_minkowski(p)?
        } else {
            self.raw_report_general(p)?
        };
        Ok(raw.classify(p, self.n, tol_b, tol_grad))
    }

    /// As `point_report` with tolerances scaled to the first-fundamental
    /// matrix at the point.
    pub fn point_report_default(&self, p: &[f64]) -> Result<PointReport, SurfaceError> {
        let raw = if self.ambient.kind() == MetricKind::Minkowski {
            self.raw_report_minkowski(p)?
        } else {
            self.raw_report_general(p)?
        };
        let scale = 1.0 + raw.s.amax();
        Ok(raw.classify(p, self.n, 1e-10 * scale, 1e-8 * scale))
    }

    /// Minkowski fast path: closed-form expressions for every quantity.
    fn raw_report_minkowski(&self, p: &[f64]) -> Result<RawReport, SurfaceError> {
        let n = self.n;
        let f3 = self.height_jet(p, 3)?;
        let grads: Vec<Jet> = (0..n).map(|i| f3.partial(i)).collect::<Result<_, _>>()?;
        // B = 1 - Σ f_i^2 as an order-2 jet; its gradient needs f to order 3
        let mut b_jet = Jet::constant(1.0, n, 2);
        for gi in &grads {
            b_jet = b_jet.sub(&gi.mul(gi)?)?;
        }
        let b = b_jet.value();
        let grad_b = DVector::from_fn(n, |k, _| b_jet.gradient(k));
        let df: Vec<f64> = grads.iter().map(|g| g.value()).collect();
        let s = DMatrix::from_fn(n, n, |i, j| {
            (if i == j { 1.0 } else { 0.0 }) - df[i] * df[j]
        });
        let scof = DMatrix::from_fn(n, n, |i, j| {
            b * (if i == j { 1.0 } else { 0.0 }) + df[i] * df[j]
        });
        let mut nu = DVector::zeros(n + 1);
        nu[0] = -1.0;
        for i in 0..n {
            nu[i + 1] = -df[i];
        }
        let h = DMatrix::from_fn(n, n, |i, j| f3.hessian(i, j));
        let a = (scof.clone().component_mul(&h)).sum();
        Ok(RawReport { s, b, grad_b, scof, nu, h, a })
    }

    /// General chart: pull everything through jets of `g ∘ F`.
    fn raw_report_general(&self, p: &[f64]) -> Result<RawReport, SurfaceError> {
        let n = self.n;
        let dim = n + 1;
        let f2 = self.height_jet(p, 2)?;
        let x = {
            let mut x = vec![f2.value()];
            x.extend_from_slice(p);
            x
        };
        // metric components as order-1 jets in the domain variables,
        // composed with F via the x0 ↦ f substitution
        let mut env = HashMap::new();
        env.insert("x0".to_string(), f2.truncated(1));
        for i in 0..n {
            env.insert(format!("x{}", i + 1), Jet::variable(i, p[i], n, 1)?);
        }
        let mut gjet: Vec<Vec<Jet>> = Vec::with_capacity(dim);
        for k in 0..dim {
            let mut row = Vec::with_capacity(dim);
            for l in 0..dim {
                row.push(self.ambient.component(k, l).eval_jet(&env)?);
            }
            gjet.push(row);
        }
        // dF(∂u_i) componentwise as order-1 jets: (f_{x_i}, e_i)
        let mut df_jets: Vec<Vec<Jet>> = Vec::with_capacity(n);
        for i in 0..n {
            let mut comps = vec![f2.partial(i)?];
            for k in 0..n {
                comps.push(Jet::constant(if k == i { 1.0 } else { 0.0 }, n, 1));
            }
            df_jets.push(comps);
        }
        // s_{i,j} = g(dF(∂u_i), dF(∂u_j)) as jets, then B = det S as a jet
        let mut s_jet: Vec<Vec<Jet>> = Vec::with_capacity(n);
        for i in 0..n {
            let mut row = Vec::with_capacity(n);
            for j in 0..n {
                let mut acc = Jet::zero(n, 1);
                for k in 0..dim {
                    for l in 0..dim {
                        let term = gjet[k][l].mul(&df_jets[i][k])?.mul(&df_jets[j][l])?;
                        acc = acc.add(&term)?;
                    }
                }
                row.push(acc);
            }
            s_jet.push(row);
        }
        let b_jet = det_jets(&s_jet)?;
        let b = b_jet.value();
        let grad_b = DVector::from_fn(n, |k, _| b_jet.gradient(k));
        let s = DMatrix::from_fn(n, n, |i, j| s_jet[i][j].value());
        let scof = cofactor_matrix(&s);

        // ν̃ from the determinant expansion over the rows μ_{i,·} = dF(∂u_i)·g,
        // scaled to the convention ν̃ = -(1, ∇f) in the Minkowski case
        let gval = self.ambient.metric_at(&x)?;
        let df: Vec<f64> = (0..n).map(|i| f2.gradient(i)).collect();
        let mut mu = DMatrix::zeros(n, dim);
        for i in 0..n {
            for j in 0..dim {
                let mut sum = gval.g[(0, j)] * df[i];
                sum += gval.g[(i + 1, j)];
                mu[(i, j)] = sum;
            }
        }
        let mut nu = DVector::zeros(dim);
        for j in 0..dim {
            let minor = mu.clone().remove_column(j);
            let sign = if (j + 1) % 2 == 0 { 1.0 } else { -1.0 };
            nu[j] = sign * minor.determinant();
        }
        // the raw cofactor normal satisfies g(ν̃,ν̃) = det(g)·B; divide by
        // √(−det g) so that g(ν̃,ν̃) = −B holds in every chart (det g = −1
        // leaves it untouched)
        nu /= (-gval.g.determinant()).sqrt();

        // h̃_{i,j} = g(F_{u_i u_j} + Γ(dF_i, dF_j), ν̃)
        let gam = self.ambient.christoffels(&x)?;
        let dfv: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let mut v = vec![df[i]];
                v.extend((0..n).map(|k| if k == i { 1.0 } else { 0.0 }));
                v
            })
            .collect();
        let gnu = &gval.g * &nu;
        let mut h = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let second = f2.hessian(i, j);
                let gamma = gam.contract(&dfv[i], &dfv[j]);
                let mut val = second * gnu[0];
                for c in 0..dim {
                    val += gamma[c] * gnu[c];
                }
                h[(i, j)] = val;
            }
        }
        let a = (scof.clone().component_mul(&h)).sum();
        Ok(RawReport { s, b, grad_b, scof, nu, h, a })
    }

    /// Difference between the Minkowski fast path and the general-metric
    /// path on the same point; the ambient must be builtin Minkowski.
    pub fn minkowski_consistency(&self, p: &[f64]) -> Result<ConsistencyResiduals, SurfaceError> {
        assert_eq!(self.ambient.kind(), MetricKind::Minkowski);
        let fast = self.raw_report_minkowski(p)?;
        let generic = {
            let mut entries = HashMap::new();
            for i in 0..=self.n {
                entries.insert((i, i), Expr::number(if i == 0 { -1.0 } else { 1.0 }));
            }
            let chart = MetricChart::from_components(self.n + 1, &entries)?;
            let surf = GraphSurface {
                n: self.n,
                height: self.height.clone(),
                vars: self.vars.clone(),
                ambient: chart,
            };
            surf.raw_report_general(p)?
        };
        Ok(ConsistencyResiduals {
            d_b: (fast.b - generic.b).abs(),
            d_a: (fast.a - generic.a).abs(),
            d_nu: (0..=self.n).map(|i| (fast.nu[i] - generic.nu[i]).abs()).collect(),
        })
    }

    /// Sup over `grid` of `|A − φ·(B)^{1+α}|`; non-integer α uses `|B|^{1+α}`.
    pub fn admissibility_residual(
        &self,
        phi: &Expr,
        alpha: f64,
        grid: &[Vec<f64>],
    ) -> Result<f64, SurfaceError> {
        let mut worst = 0.0f64;
        for p in grid {
            worst = worst.max(self.admissibility_defect(phi, alpha, p)?);
        }
        Ok(worst)
    }

    /// `|A − φ·(B)^{1+α}|` at one point.
    pub fn admissibility_defect(
        &self,
        phi: &Expr,
        alpha: f64,
        p: &[f64],
    ) -> Result<f64, SurfaceError> {
        let raw = if self.ambient.kind() == MetricKind::Minkowski {
            self.raw_report_minkowski(p)?
        } else {
            self.raw_report_general(p)?
        };
        let mut env = HashMap::new();
        for (i, name) in self.vars.iter().enumerate() {
            env.insert(name.clone(), p[i]);
        }
        let phi_v = phi.eval_f64(&env)?;
        let power = if alpha.fract() == 0.0 && alpha >= 0.0 {
            raw.b.powi(1 + alpha as i32)
        } else {
            raw.b.abs().powf(1.0 + alpha)
        };
        Ok((raw.a - phi_v * power).abs())
    }

    /// Rotate the domain (and translate so the point moves to the origin)
    /// until `∇f(0) = (0,…,0,1)`, the normalization assumed by the
    /// light-like structure results. Minkowski ambients are untouched;
    /// general ambients are transformed by the matching chart isometry of
    /// coordinates and re-checked for admissibility at the new origin.
    pub fn normalize_at_lightlike(
        &self,
        o: &[f64],
        tol_b: f64,
        tol_grad: f64,
    ) -> Result<GraphSurface, SurfaceError> {
        let n = self.n;
        let report = self.point_report(o, tol_b, tol_grad)?;
        if !report.cls.is_lightlike() {
            return Err(SurfaceError::NotLightlike(report.cls));
        }
        if self.ambient.kind() != MetricKind::Minkowski {
            let x = self.immerse(o)?;
            let adm = self.ambient.is_admissible_at(&x, DEFAULT_ADMISSIBILITY_TOL)?;
            if !adm.admissible {
                return Err(SurfaceError::InadmissibleChart(
                    adm.g00_residual
                        .max(adm.g0i_residual)
                        .max(adm.gjk_residual)
                        .max(adm.christoffel_residual),
                ));
            }
        }
        let f1 = self.height_jet(o, 1)?;
        let grad = DVector::from_fn(n, |i, _| f1.gradient(i));
        let norm = grad.norm();
        if norm < 1e-14 {
            return Err(SurfaceError::InconsistentGradient);
        }
        let rot = rotation_to_last_axis(&(grad / norm));
        let f0 = f1.value();

        // new height: f̂(x') = f(o + R x') − f(o)
        let height = match &self.height {
            Height::Analytic(e) => {
                let mut map = HashMap::new();
                for c in 0..n {
                    let mut sub = Expr::number(o[c]);
                    for a in 0..n {
                        let r = rot[(c, a)];
                        if r != 0.0 {
                            sub = Expr::add(sub, Expr::mul(Expr::number(r), Expr::var(&self.vars[a])));
                        }
                    }
                    map.insert(self.vars[c].clone(), sub);
                }
                Height::Analytic(Expr::sub(e.substitute(&map), Expr::number(f0)))
            }
            Height::Series(jet) => {
                let order = jet.order();
                let args: Vec<Jet> = (0..n)
                    .map(|c| {
                        let mut arg = Jet::constant(o[c], n, order);
                        for a in 0..n {
                            let r = rot[(c, a)];
                            if r != 0.0 {
                                let v = Jet::variable(a, 0.0, n, order).unwrap();
                                arg = arg.add(&v.scale(r)).unwrap();
                            }
                        }
                        arg
                    })
                    .collect();
                Height::Series(jet.eval_jets(&args)?.add_scalar(-f0))
            }
        };
        let ambient = if self.ambient.kind() == MetricKind::Minkowski {
            self.ambient.clone()
        } else {
            let mut linear = DMatrix::identity(n + 1, n + 1);
            for c in 0..n {
                for a in 0..n {
                    linear[(c + 1, a + 1)] = rot[(c, a)];
                }
            }
            let mut offset = DVector::zeros(n + 1);
            offset[0] = f0;
            for c in 0..n {
                offset[c + 1] = o[c];
            }
            self.ambient.transform_affine(&linear, &offset)
        };
        Ok(GraphSurface { n, height, vars: self.vars.clone(), ambient })
    }

    /// Residuals of the light-like first-derivative identities at a
    /// normalized point `o`: `B_{x_n}(o) = 0`, `f_{x_n x_n}(o) = 0`, and
    /// `B_{x_j}(o) = −2 f_{x_n x_j}(o)` for `j < n`; degeneracy is
    /// equivalent to all mixed `f_{x_n x_j}(o)` vanishing.
    pub fn lightlike_first_order_check(&self, o: &[f64]) -> Result<LightlikeFirstOrder, SurfaceError> {
        let n = self.n;
        let raw = if self.ambient.kind() == MetricKind::Minkowski {
            self.raw_report_minkowski(o)?
        } else {
            self.raw_report_general(o)?
        };
        let f2 = self.height_jet(o, 2)?;
        let b_n_residual = raw.grad_b[n - 1].abs();
        let f_nn_residual = f2.hessian(n - 1, n - 1).abs();
        let mut identity_residuals = Vec::with_capacity(n - 1);
        let mut mixed = Vec::with_capacity(n - 1);
        for j in 0..n - 1 {
            identity_residuals.push((raw.grad_b[j] + 2.0 * f2.hessian(n - 1, j)).abs());
            mixed.push(f2.hessian(n - 1, j));
        }
        let degenerate = mixed.iter().all(|m| m.abs() <= 1e-10);
        Ok(LightlikeFirstOrder {
            b_n_residual,
            f_nn_residual,
            identity_residuals,
            mixed_hessian: mixed,
            degenerate,
        })
    }
}

/// The classification-independent part of a point report.
struct RawReport {
    s: DMatrix<f64>,
    b: f64,
    grad_b: DVector<f64>,
    scof: DMatrix<f64>,
    nu: DVector<f64>,
    h: DMatrix<f64>,
    a: f64,
}

impl RawReport {
    fn classify(self, p: &[f64], n: usize, tol_b: f64, tol_grad: f64) -> PointReport {
        let cls = if self.b > tol_b {
            CausalClass::Spacelike
        } else if self.b < -tol_b {
            CausalClass::Timelike
        } else if self.grad_b.norm() <= tol_grad {
            CausalClass::LightlikeDegenerate
        } else {
            CausalClass::LightlikeNondegenerate
        };
        let off_sigma = self.b.abs() > tol_b;
        let (h_mean, hhat, hvec, omega_h) = if off_sigma {
            let hm = self.a / (n as f64 * self.b.abs().powf(1.5));
            let sgn = self.b.signum();
            let hv = self.nu.clone() * (self.a / (n as f64 * self.b * self.b));
            (Some(hm), Some(sgn * hm), Some(hv), Some(self.a / (n as f64 * self.b)))
        } else {
            (None, None, None, None)
        };
        PointReport {
            p: p.to_vec(),
            s: self.s,
            b: self.b,
            grad_b: self.grad_b,
            scof: self.scof,
            nu: self.nu,
            h: self.h,
            a: self.a,
            h_mean,
            hhat,
            hvec,
            omega_h,
            theta: self.b.abs().sqrt(),
            cls,
            tol_b,
            tol_grad,
        }
    }
}

/// All fundamental quantities of a graph at one domain point.
#[derive(Debug, Clone)]
pub struct PointReport {
    pub p: Vec<f64>,
    /// First-fundamental matrix s_{i,j}.
    pub s: DMatrix<f64>,
    /// B = det(S).
    pub b: f64,
    pub grad_b: DVector<f64>,
    /// Cofactor matrix s̃^{i,j}, with Scof·S = B·I.
    pub scof: DMatrix<f64>,
    /// Normal ν̃ with g(ν̃,ν̃) = −B.
    pub nu: DVector<f64>,
    /// Normalized second-fundamental entries h̃_{i,j}.
    pub h: DMatrix<f64>,
    pub a: f64,
    /// Mean curvature A/(n|B|^{3/2}); absent on the light-like set.
    pub h_mean: Option<f64>,
    /// sgn(B)·H.
    pub hhat: Option<f64>,
    /// Mean curvature vector A/(nB²)·ν̃.
    pub hvec: Option<DVector<f64>>,
    /// Coefficient A/(nB) of the mean curvature form.
    pub omega_h: Option<f64>,
    /// Area-element density √|B|.
    pub theta: f64,
    pub cls: CausalClass,
    pub tol_b: f64,
    pub tol_grad: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConsistencyResiduals {
    pub d_b: f64,
    pub d_a: f64,
    pub d_nu: Vec<f64>,
}

impl ConsistencyResiduals {
    pub fn max(&self) -> f64 {
        self.d_nu.iter().fold(self.d_b.max(self.d_a), |m, &v| m.max(v))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LightlikeFirstOrder {
    pub b_n_residual: f64,
    pub f_nn_residual: f64,
    /// |B_{x_j} + 2 f_{x_n x_j}| at o, for j < n.
    pub identity_residuals: Vec<f64>,
    pub mixed_hessian: Vec<f64>,
    pub degenerate: bool,
}

/// Determinant of a square matrix of jets by Laplace expansion; fine for
/// the small n used here.
fn det_jets(m: &[Vec<Jet>]) -> Result<Jet, JetError> {
    let n = m.len();
    if n == 1 {
        return Ok(m[0][0].clone());
    }
    let mut acc: Option<Jet> = None;
    for j in 0..n {
        let minor: Vec<Vec<Jet>> = (1..n)
            .map(|i| {
                (0..n)
                    .filter(|&c| c != j)
                    .map(|c| m[i][c].clone())
                    .collect()
            })
            .collect();
        let mut term = m[0][j].mul(&det_jets(&minor)?)?;
        if j % 2 == 1 {
            term = term.neg();
        }
        acc = Some(match acc {
            None => term,
            Some(a) => a.add(&term)?,
        });
    }
    Ok(acc.unwrap())
}

/// Cofactor matrix of a symmetric matrix (equals its adjugate).
fn cofactor_matrix(s: &DMatrix<f64>) -> DMatrix<f64> {
    let n = s.nrows();
    if n == 1 {
        return DMatrix::from_element(1, 1, 1.0);
    }
    DMatrix::from_fn(n, n, |i, j| {
        let minor = s.clone().remove_row(i).remove_column(j);
        let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
        sign * minor.determinant()
    })
}

/// Rotation with determinant +1 whose last column is the unit vector `u`,
/// so the pullback gradient of a function with ∇f ∥ u lands on the last
/// axis.
fn rotation_to_last_axis(u: &DVector<f64>) -> DMatrix<f64> {
    let n = u.len();
    let mut cols: Vec<DVector<f64>> = Vec::with_capacity(n);
    for k in 0..n {
        let mut c = DVector::zeros(n);
        c[k] = 1.0;
        c -= u * u.dot(&c);
        for b in &cols {
            let b: &DVector<f64> = b;
            c -= b * b.dot(&c);
        }
        let norm = c.norm();
        if norm > 1e-8 {
            cols.push(c / norm);
        }
        if cols.len() == n - 1 {
            break;
        }
    }
    assert_eq!(cols.len(), n - 1);
    cols.push(u.clone());
    let mut rot = DMatrix::zeros(n, n);
    for (j, c) in cols.iter().enumerate() {
        rot.set_column(j, c);
    }
    if rot.determinant() < 0.0 {
        let c0 = -rot.column(0).clone_owned();
        rot.set_column(0, &c0);
    }
    rot
}
