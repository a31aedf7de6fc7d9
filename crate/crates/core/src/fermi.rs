//! Fermi coordinates along a null geodesic: null frame construction,
//! parallel frame propagation, the coordinate map built from the
//! exponential map, and finite-difference verification that the pulled-back
//! metric is Minkowski with vanishing Christoffel symbols along the
//! geodesic.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::geodesics::{self, Curve, GeodesicError};
use crate::metric::{MetricChart, MetricError};

#[derive(Debug, Error)]
pub enum FermiError {
    #[error("initial vector is not null: g(v,v) = {0:.3e}")]
    NotNull(f64),
    #[error("initial vector is zero")]
    ZeroVector,
    #[error("metric error: {0}")]
    Metric(#[from] MetricError),
    #[error("geodesic error: {0}")]
    Geodesic(#[from] GeodesicError),
    #[error("parameter t = {0} outside the constructed range")]
    OutOfRange(f64),
    #[error("finite-difference step {0} too large for the transverse half-width {1}")]
    StepTooLarge(f64, f64),
}

/// A frame `e₀,…,e_n` at a point with the null-pair Gram pattern:
/// `g(e₀,e₀) = g(e₁,e₁) = 0`, `g(e₀,e₁) = −1`, `e₂…e_n` orthonormal and
/// orthogonal to the pair.
#[derive(Debug, Clone)]
pub struct NullFrame {
    pub vectors: Vec<Vec<f64>>,
}

fn ip(g: &DMatrix<f64>, a: &[f64], b: &[f64]) -> f64 {
    let dim = a.len();
    let mut s = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            s += g[(i, j)] * a[i] * b[j];
        }
    }
    s
}

impl NullFrame {
    /// Max deviation of the Gram matrix from the required pattern.
    pub fn gram_residual(&self, g: &DMatrix<f64>) -> f64 {
        let dim = self.vectors.len();
        let mut worst = 0.0f64;
        for a in 0..dim {
            for b in a..dim {
                let got = ip(g, &self.vectors[a], &self.vectors[b]);
                let want = match (a, b) {
                    (0, 1) => -1.0,
                    (0, _) | (1, _) => 0.0,
                    (i, j) if i == j => 1.0,
                    _ => 0.0,
                };
                worst = worst.max((got - want).abs());
            }
        }
        worst
    }
}

/// Null frame at `p` with `e₀ = v`: the partner `e₁` is completed from the
/// canonical basis vector `w` maximizing `|g(v,w)|` (lowest index on ties)
/// via `e₁ = (w − g(w,w)/(2 g(v,w))·v)/(−g(v,w))`, and `e₂…e_n` by
/// Gram–Schmidt on the complement of the pair.
pub fn null_frame_at(chart: &MetricChart, p: &[f64], v: &[f64]) -> Result<NullFrame, FermiError> {
    let dim = chart.dim();
    let g = chart.metric_at(p)?.g;
    let vnorm: f64 = v.iter().map(|a| a * a).sum();
    if vnorm == 0.0 {
        return Err(FermiError::ZeroVector);
    }
    let q = ip(&g, v, v);
    if q.abs() > 1e-10 * vnorm {
        return Err(FermiError::NotNull(q));
    }
    let mut basis: Vec<Vec<f64>> = (0..dim)
        .map(|k| (0..dim).map(|i| if i == k { 1.0 } else { 0.0 }).collect())
        .collect();
    let (wi, gvw) = (0..dim)
        .map(|k| (k, ip(&g, v, &basis[k])))
        .max_by(|a, b| {
            a.1.abs()
                .partial_cmp(&b.1.abs())
                .unwrap()
                .then(b.0.cmp(&a.0))
        })
        .unwrap();
    let w = basis.remove(wi);
    let gww = ip(&g, &w, &w);
    let e0 = v.to_vec();
    let e1: Vec<f64> = (0..dim)
        .map(|i| (w[i] - gww / (2.0 * gvw) * v[i]) / -gvw)
        .collect();
    let mut vectors = vec![e0, e1];
    for cand in basis {
        // project off the null pair: w ↦ w + g(w,e₁)e₀ + g(w,e₀)e₁
        let c0 = ip(&g, &cand, &vectors[1]);
        let c1 = ip(&g, &cand, &vectors[0]);
        let mut u: Vec<f64> = (0..dim)
            .map(|i| cand[i] + c0 * vectors[0][i] + c1 * vectors[1][i])
            .collect();
        for e in vectors.iter().skip(2) {
            let c = ip(&g, &u, e);
            for i in 0..dim {
                u[i] -= c * e[i];
            }
        }
        let norm = ip(&g, &u, &u);
        if norm > 1e-12 {
            let s = norm.sqrt();
            for x in &mut u {
                *x /= s;
            }
            vectors.push(u);
        }
        if vectors.len() == dim {
            break;
        }
    }
    assert_eq!(vectors.len(), dim);
    Ok(NullFrame { vectors })
}

/// Whether the frame carried along the geodesic is parallel-transported or
/// (as a negative control for the verification) frozen componentwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameMode {
    Parallel,
    FrozenComponents,
}

/// Fermi chart data along a null geodesic: the sampled geodesic, the frame
/// at every sample, and the coordinate maps.
#[derive(Debug, Clone)]
pub struct FermiChart {
    chart: MetricChart,
    sigma: Curve,
    /// frames[sample][frame index][component]
    frames: Vec<Vec<Vec<f64>>>,
    pub eps: f64,
    exp_step: f64,
}

/// Integrate the geodesic over a slightly padded span (so verification can
/// difference across the requested endpoints) and carry the frame along.
pub fn build_fermi_chart(
    chart: &MetricChart,
    p: &[f64],
    v_null: &[f64],
    t_span: (f64, f64),
    eps: f64,
    step: f64,
    mode: FrameMode,
) -> Result<FermiChart, FermiError> {
    let frame = null_frame_at(chart, p, v_null)?;
    let pad = 40.0 * step;
    let span = ((t_span.0 - pad).min(0.0), t_span.1 + pad);
    let sigma = geodesics::geodesic_ivp(chart, p, v_null, span, step)?;
    let nsamp = sigma.samples.len();
    let dim = chart.dim();
    let frames: Vec<Vec<Vec<f64>>> = match mode {
        FrameMode::FrozenComponents => vec![frame.vectors.clone(); nsamp],
        FrameMode::Parallel => {
            let mut per_vector: Vec<Vec<Vec<f64>>> = Vec::with_capacity(dim);
            for e in &frame.vectors {
                per_vector.push(geodesics::parallel_transport(chart, &sigma, e)?);
            }
            (0..nsamp)
                .map(|s| per_vector.iter().map(|pv| pv[s].clone()).collect())
                .collect()
        }
    };
    Ok(FermiChart { chart: chart.clone(), sigma, frames, eps, exp_step: 0.05 })
}

impl FermiChart {
    pub fn chart(&self) -> &MetricChart {
        &self.chart
    }

    pub fn sigma(&self) -> &Curve {
        &self.sigma
    }

    fn bracket(&self, t: f64) -> Result<(usize, f64), FermiError> {
        let s = &self.sigma.samples;
        let t0 = s[0].t;
        let u = (t - t0) / self.sigma.step;
        let mut i = u.floor() as isize;
        if i < 0 || i as usize >= s.len() {
            return Err(FermiError::OutOfRange(t));
        }
        if i as usize == s.len() - 1 {
            i -= 1;
        }
        Ok((i as usize, u - i as f64))
    }

    /// Cubic Hermite interpolation of σ between integrator samples.
    pub fn sigma_at(&self, t: f64) -> Result<(Vec<f64>, Vec<f64>), FermiError> {
        let (i, u) = self.bracket(t)?;
        let h = self.sigma.step;
        let a = &self.sigma.samples[i];
        let b = &self.sigma.samples[i + 1];
        let dim = a.x.len();
        let (h00, h10, h01, h11) = hermite_basis(u);
        let (d00, d10, d01, d11) = hermite_basis_deriv(u);
        let mut x = vec![0.0; dim];
        let mut v = vec![0.0; dim];
        for k in 0..dim {
            x[k] = h00 * a.x[k] + h10 * h * a.v[k] + h01 * b.x[k] + h11 * h * b.v[k];
            v[k] = (d00 * a.x[k] + d10 * h * a.v[k] + d01 * b.x[k] + d11 * h * b.v[k]) / h;
        }
        Ok((x, v))
    }

    /// Frame vectors at off-grid t, Hermite-interpolated with the transport
    /// derivative E' = −Γ(σ', E) at the bracketing samples.
    pub fn frame_at(&self, t: f64) -> Result<Vec<Vec<f64>>, FermiError> {
        let (i, u) = self.bracket(t)?;
        let h = self.sigma.step;
        let dim = self.chart.dim();
        let (h00, h10, h01, h11) = hermite_basis(u);
        let mut out = Vec::with_capacity(dim);
        for f in 0..dim {
            let ea = &self.frames[i][f];
            let eb = &self.frames[i + 1][f];
            let da = self.frame_derivative(i, f)?;
            let db = self.frame_derivative(i + 1, f)?;
            out.push(
                (0..dim)
                    .map(|k| h00 * ea[k] + h10 * h * da[k] + h01 * eb[k] + h11 * h * db[k])
                    .collect(),
            );
        }
        Ok(out)
    }

    fn frame_derivative(&self, i: usize, f: usize) -> Result<Vec<f64>, FermiError> {
        let s = &self.sigma.samples[i];
        let gam = self.chart.christoffels(&s.x)?;
        Ok(gam.contract(&s.v, &self.frames[i][f]).iter().map(|a| -a).collect())
    }

    /// The Fermi map Φ(y₀,…,y_n) = Exp at σ(y₀) of Σ_{i≥1} y_i E_i(y₀).
    pub fn phi(&self, y: &[f64]) -> Result<Vec<f64>, FermiError> {
        let dim = self.chart.dim();
        assert_eq!(y.len(), dim);
        let (x, _) = self.sigma_at(y[0])?;
        let frame = self.frame_at(y[0])?;
        let mut w = vec![0.0; dim];
        for i in 1..dim {
            for k in 0..dim {
                w[k] += y[i] * frame[i][k];
            }
        }
        Ok(geodesics::exp_map(&self.chart, &x, &w, self.exp_step)?)
    }

    /// Final chart map in the null-rotated x-coordinates:
    /// `y₀ = (x₀+x_n)/√2, y₁ = (x₀−x_n)/√2, y_{i+1} = x_i`.
    pub fn map_x(&self, x: &[f64]) -> Result<Vec<f64>, FermiError> {
        let dim = self.chart.dim();
        let n = dim - 1;
        let s = std::f64::consts::SQRT_2;
        let mut y = vec![0.0; dim];
        y[0] = (x[0] + x[n]) / s;
        y[1] = (x[0] - x[n]) / s;
        for i in 1..n {
            y[i + 1] = x[i];
        }
        self.phi(&y)
    }

    /// The x-coordinates of σ(t): (t/√2, 0, …, 0, t/√2).
    pub fn sigma_x_point(&self, t: f64) -> Vec<f64> {
        let dim = self.chart.dim();
        let s = t / std::f64::consts::SQRT_2;
        let mut x = vec![0.0; dim];
        x[0] = s;
        x[dim - 1] = s;
        x
    }

    /// Jacobian of `map_x` by Richardson-extrapolated central differences.
    pub fn jacobian_x(&self, x: &[f64], fd_step: f64) -> Result<DMatrix<f64>, FermiError> {
        let dim = self.chart.dim();
        let jac_h = |h: f64| -> Result<DMatrix<f64>, FermiError> {
            let mut j = DMatrix::zeros(dim, dim);
            for c in 0..dim {
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                xp[c] += h;
                xm[c] -= h;
                let fp = self.map_x(&xp)?;
                let fm = self.map_x(&xm)?;
                for r in 0..dim {
                    j[(r, c)] = (fp[r] - fm[r]) / (2.0 * h);
                }
            }
            Ok(j)
        };
        let coarse = jac_h(fd_step)?;
        let fine = jac_h(fd_step / 2.0)?;
        Ok((fine * 4.0 - coarse) / 3.0)
    }

    /// Pulled-back metric G = Jᵀ g J at an x-coordinate point.
    pub fn pullback_metric(&self, x: &[f64], fd_step: f64) -> Result<DMatrix<f64>, FermiError> {
        let j = self.jacobian_x(x, fd_step)?;
        let g = self.chart.metric_at(&self.map_x(x)?)?.g;
        Ok(j.transpose() * g * j)
    }
}

fn hermite_basis(u: f64) -> (f64, f64, f64, f64) {
    (
        (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u),
        u * (1.0 - u) * (1.0 - u),
        u * u * (3.0 - 2.0 * u),
        u * u * (u - 1.0),
    )
}

fn hermite_basis_deriv(u: f64) -> (f64, f64, f64, f64) {
    (
        6.0 * u * u - 6.0 * u,
        3.0 * u * u - 4.0 * u + 1.0,
        6.0 * u - 6.0 * u * u,
        3.0 * u * u - 2.0 * u,
    )
}

/// Residuals of the defining Fermi-chart properties along σ: (a1) the map
/// reproduces σ on the axis, (a2) the pulled-back metric is diag(−1,1,…,1)
/// at σ, (a3) its Christoffel symbols vanish at σ. Also reports Jacobian
/// determinant data for the local-injectivity check.
#[derive(Debug, Clone, serde::Serialize)]
pub struct FermiReport {
    pub a1_residual: f64,
    pub a2_residual: f64,
    pub a3_residual: f64,
    pub min_abs_jac_det: f64,
    pub jac_sign_constant: bool,
}

pub fn verify_fermi(
    fc: &FermiChart,
    t_samples: &[f64],
    fd_step: f64,
) -> Result<FermiReport, FermiError> {
    if fd_step >= fc.eps {
        return Err(FermiError::StepTooLarge(fd_step, fc.eps));
    }
    let dim = fc.chart.dim();
    let eta = {
        let mut m = DMatrix::identity(dim, dim);
        m[(0, 0)] = -1.0;
        m
    };
    let mut a1 = 0.0f64;
    let mut a2 = 0.0f64;
    let mut a3 = 0.0f64;
    let mut min_det = f64::INFINITY;
    let mut signs: Vec<f64> = Vec::new();
    for &t in t_samples {
        let xbar = fc.sigma_x_point(t);
        let (sx, _) = fc.sigma_at(t)?;
        let mapped = fc.map_x(&xbar)?;
        for k in 0..dim {
            a1 = a1.max((mapped[k] - sx[k]).abs());
        }
        let j = fc.jacobian_x(&xbar, fd_step)?;
        let det = j.determinant();
        min_det = min_det.min(det.abs());
        signs.push(det.signum());
        let g_here = fc.chart.metric_at(&mapped)?.g;
        let gpull = j.transpose() * g_here * &j;
        a2 = a2.max((&gpull - &eta).abs().max());
        // Christoffels of the pulled-back metric from FD of G
        let mut dg = vec![DMatrix::zeros(dim, dim); dim];
        for k in 0..dim {
            let mut xp = xbar.clone();
            let mut xm = xbar.clone();
            xp[k] += fd_step;
            xm[k] -= fd_step;
            let gp = fc.pullback_metric(&xp, fd_step)?;
            let gm = fc.pullback_metric(&xm, fd_step)?;
            dg[k] = (gp - gm) / (2.0 * fd_step);
        }
        let inv = gpull.try_inverse().ok_or(MetricError::Singular)?;
        for c in 0..dim {
            for a in 0..dim {
                for b in 0..dim {
                    let mut sum = 0.0;
                    for d in 0..dim {
                        sum += inv[(c, d)] * (dg[a][(d, b)] + dg[b][(d, a)] - dg[d][(a, b)]);
                    }
                    a3 = a3.max((0.5 * sum).abs());
                }
            }
        }
    }
    let sign_constant = signs.windows(2).all(|w| w[0] == w[1]);
    Ok(FermiReport {
        a1_residual: a1,
        a2_residual: a2,
        a3_residual: a3,
        min_abs_jac_det: min_det,
        jac_sign_constant: sign_constant,
    })
}
