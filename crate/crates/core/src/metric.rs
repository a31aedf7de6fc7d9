//! Lorentzian metrics in a single coordinate chart.
//!
//! A chart holds the component expressions `g_{i,j}(x_0,...,x_n)` of a
//! metric with signature `(-,+,...,+)`, evaluates them (with first
//! derivatives) through jets, derives Christoffel symbols, and tests the
//! admissibility conditions at a point: Minkowski values and vanishing
//! Christoffel symbols there.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::expr::{Expr, ExprError};
use crate::jets::Jet;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("metric component ({0},{1}): {2}")]
    Component(usize, usize, ExprError),
    #[error("metric matrix is singular at the queried point")]
    Singular,
    #[error("metric signature is not Lorentzian (-,+,...,+) at the queried point: eigenvalues {0:?}")]
    Signature(Vec<f64>),
    #[error("expression error: {0}")]
    Expr(#[from] ExprError),
    #[error("metric components must be given for a symmetric matrix; missing ({0},{1})")]
    MissingComponent(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MetricKind {
    Minkowski,
    Generic,
}

/// A Lorentzian metric on one coordinate patch, components as expressions in
/// the chart coordinates `x0..x{dim-1}`.
#[derive(Debug, Clone)]
pub struct MetricChart {
    dim: usize,
    /// Upper triangle, row-major: entry for (i,j) with i <= j.
    comps: Vec<Expr>,
    kind: MetricKind,
}

pub fn coord_names(dim: usize) -> Vec<String> {
    (0..dim).map(|i| format!("x{i}")).collect()
}

impl MetricChart {
    /// Flat Minkowski metric `diag(-1, 1, ..., 1)`.
    pub fn minkowski(dim: usize) -> MetricChart {
        let mut comps = Vec::new();
        for i in 0..dim {
            for j in i..dim {
                let v = if i != j {
                    0.0
                } else if i == 0 {
                    -1.0
                } else {
                    1.0
                };
                comps.push(Expr::number(v));
            }
        }
        MetricChart { dim, comps, kind: MetricKind::Minkowski }
    }

    /// Build from the upper-triangle component expressions keyed `(i,j)`,
    /// `i <= j`; symmetry is enforced by construction. Missing off-diagonal
    /// entries default to zero, missing diagonal entries are an error.
    pub fn from_components(
        dim: usize,
        entries: &HashMap<(usize, usize), Expr>,
    ) -> Result<MetricChart, MetricError> {
        let mut comps = Vec::new();
        for i in 0..dim {
            for j in i..dim {
                let key = (i.min(j), i.max(j));
                match entries.get(&key) {
                    Some(e) => comps.push(e.clone()),
                    None if i != j => comps.push(Expr::number(0.0)),
                    None => return Err(MetricError::MissingComponent(i, j)),
                }
            }
        }
        Ok(MetricChart { dim, comps, kind: MetricKind::Generic })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> MetricKind {
        self.kind
    }

    pub fn component(&self, i: usize, j: usize) -> &Expr {
        let (i, j) = (i.min(j), i.max(j));
        let idx = i * self.dim - i * (i + 1) / 2 + j;
        &self.comps[idx]
    }

    /// Apply an affine chart change `x = offset + L x'` (L constant), giving
    /// the metric in the primed coordinates:
    /// `g'_{ab}(x') = sum_{cd} L_{ca} L_{db} g_{cd}(offset + L x')`.
    pub fn transform_affine(&self, linear: &DMatrix<f64>, offset: &DVector<f64>) -> MetricChart {
        let dim = self.dim;
        let names = coord_names(dim);
        let mut subst: HashMap<String, Expr> = HashMap::new();
        for c in 0..dim {
            let mut e = Expr::number(offset[c]);
            for a in 0..dim {
                let l = linear[(c, a)];
                if l != 0.0 {
                    e = Expr::add(e, Expr::mul(Expr::number(l), Expr::var(&names[a])));
                }
            }
            subst.insert(names[c].clone(), e);
        }
        let mut comps = Vec::new();
        for a in 0..dim {
            for b in a..dim {
                let mut e = Expr::number(0.0);
                for c in 0..dim {
                    for d in 0..dim {
                        let l = linear[(c, a)] * linear[(d, b)];
                        if l != 0.0 {
                            let g = self.component(c, d).substitute(&subst);
                            e = Expr::add(e, Expr::mul(Expr::number(l), g));
                        }
                    }
                }
                comps.push(e);
            }
        }
        MetricChart { dim, comps, kind: MetricKind::Generic }
    }

    fn jet_env(&self, p: &[f64], order: usize) -> HashMap<String, Jet> {
        let mut env = HashMap::new();
        for (i, name) in coord_names(self.dim).into_iter().enumerate() {
            env.insert(name, Jet::variable(i, p[i], self.dim, order).unwrap());
        }
        env
    }

    /// Components and all first derivatives at `p`, with a signature check.
    pub fn metric_at(&self, p: &[f64]) -> Result<MetricData, MetricError> {
        assert_eq!(p.len(), self.dim);
        let dim = self.dim;
        if self.kind == MetricKind::Minkowski {
            let mut g = DMatrix::identity(dim, dim);
            g[(0, 0)] = -1.0;
            return Ok(MetricData { g, dg: vec![DMatrix::zeros(dim, dim); dim] });
        }
        let env = self.jet_env(p, 1);
        let mut g = DMatrix::zeros(dim, dim);
        let mut dg = vec![DMatrix::zeros(dim, dim); dim];
        for i in 0..dim {
            for j in i..dim {
                let jet = self
                    .component(i, j)
                    .eval_jet(&env)
                    .map_err(|e| MetricError::Component(i, j, e))?;
                g[(i, j)] = jet.value();
                g[(j, i)] = jet.value();
                for k in 0..dim {
                    let d = jet.gradient(k);
                    dg[k][(i, j)] = d;
                    dg[k][(j, i)] = d;
                }
            }
        }
        check_signature(&g)?;
        Ok(MetricData { g, dg })
    }

    /// Levi-Civita Christoffel symbols at `p`:
    /// `Γ^γ_{αβ} = ½ g^{γδ}(∂_α g_{δβ} + ∂_β g_{δα} − ∂_δ g_{αβ})`.
    pub fn christoffels(&self, p: &[f64]) -> Result<Christoffels, MetricError> {
        let dim = self.dim;
        if self.kind == MetricKind::Minkowski {
            return Ok(Christoffels { dim, gamma: vec![0.0; dim * dim * dim] });
        }
        let data = self.metric_at(p)?;
        let inv = data.g.clone().try_inverse().ok_or(MetricError::Singular)?;
        let mut gamma = vec![0.0; dim * dim * dim];
        for c in 0..dim {
            for a in 0..dim {
                for b in a..dim {
                    let mut sum = 0.0;
                    for d in 0..dim {
                        sum += inv[(c, d)]
                            * (data.dg[a][(d, b)] + data.dg[b][(d, a)] - data.dg[d][(a, b)]);
                    }
                    let v = 0.5 * sum;
                    gamma[(c * dim + a) * dim + b] = v;
                    gamma[(c * dim + b) * dim + a] = v;
                }
            }
        }
        Ok(Christoffels { dim, gamma })
    }

    /// Residuals of the admissibility conditions at `p`: Minkowski component
    /// values and vanishing Christoffel symbols, each within `tol`.
    pub fn is_admissible_at(&self, p: &[f64], tol: f64) -> Result<AdmissibilityReport, MetricError> {
        let dim = self.dim;
        let data = self.metric_at(p)?;
        let mut g00_residual = (data.g[(0, 0)] + 1.0).abs();
        let mut g0i_residual = 0.0f64;
        let mut gjk_residual = 0.0f64;
        for i in 1..dim {
            g0i_residual = g0i_residual.max(data.g[(0, i)].abs());
            for j in 1..dim {
                let target = if i == j { 1.0 } else { 0.0 };
                gjk_residual = gjk_residual.max((data.g[(i, j)] - target).abs());
            }
        }
        let christoffels = self.christoffels(p)?;
        let christoffel_residual = christoffels.max_abs();
        // guard against -0.0 noise
        if g00_residual == 0.0 {
            g00_residual = 0.0;
        }
        Ok(AdmissibilityReport {
            g00_residual,
            g0i_residual,
            gjk_residual,
            christoffel_residual,
            tol,
            admissible: g00_residual <= tol
                && g0i_residual <= tol
                && gjk_residual <= tol
                && christoffel_residual <= tol,
        })
    }
}

fn check_signature(g: &DMatrix<f64>) -> Result<(), MetricError> {
    let eig = g.clone().symmetric_eigen();
    let mut neg = 0;
    let mut pos = 0;
    for &l in eig.eigenvalues.iter() {
        if l < -1e-12 {
            neg += 1;
        } else if l > 1e-12 {
            pos += 1;
        }
    }
    if neg == 1 && pos == g.nrows() - 1 {
        Ok(())
    } else if neg + pos < g.nrows() {
        Err(MetricError::Singular)
    } else {
        Err(MetricError::Signature(eig.eigenvalues.iter().copied().collect()))
    }
}

/// Metric components and first derivatives at a point.
pub struct MetricData {
    pub g: DMatrix<f64>,
    /// `dg[k][(i,j)] = ∂ g_{i,j} / ∂ x_k`
    pub dg: Vec<DMatrix<f64>>,
}

/// Christoffel symbols at a point, symmetric in the lower indices.
#[derive(Debug, Clone)]
pub struct Christoffels {
    dim: usize,
    gamma: Vec<f64>,
}

impl Christoffels {
    pub fn get(&self, upper: usize, a: usize, b: usize) -> f64 {
        self.gamma[(upper * self.dim + a) * self.dim + b]
    }

    pub fn max_abs(&self) -> f64 {
        self.gamma.iter().fold(0.0f64, |m, g| m.max(g.abs()))
    }

    /// Contraction `Γ^γ(u, v)` for vectors `u`, `v`.
    pub fn contract(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let dim = self.dim;
        let mut out = vec![0.0; dim];
        for c in 0..dim {
            let mut sum = 0.0;
            for a in 0..dim {
                if u[a] == 0.0 {
                    continue;
                }
                for b in 0..dim {
                    sum += self.get(c, a, b) * u[a] * v[b];
                }
            }
            out[c] = sum;
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AdmissibilityReport {
    pub g00_residual: f64,
    pub g0i_residual: f64,
    pub gjk_residual: f64,
    pub christoffel_residual: f64,
    pub tol: f64,
    pub admissible: bool,
}

/// Default absolute tolerance for admissibility checks.
pub const DEFAULT_ADMISSIBILITY_TOL: f64 = 1e-9;

/// The quadratically perturbed test metric: Minkowski plus
/// `eps * x1^2 dx1 dx2` (dim >= 3).
pub fn perturbed_metric(dim: usize, eps: f64) -> MetricChart {
    assert!(dim >= 3);
    let names: Vec<String> = coord_names(dim);
    let mut entries = HashMap::new();
    for i in 0..dim {
        let v = if i == 0 { -1.0 } else { 1.0 };
        entries.insert((i, i), Expr::number(v));
    }
    // symmetric dx1 dx2 term: g_{1,2} = eps/2 * x1^2 so that
    // eps x1^2 dx1 dx2 = g_{1,2} dx1 dx2 + g_{2,1} dx2 dx1
    let half = Expr::mul(
        Expr::number(eps / 2.0),
        Expr::mul(Expr::var(&names[1]), Expr::var(&names[1])),
    );
    entries.insert((1, 2), half);
    MetricChart::from_components(dim, &entries).unwrap()
}
