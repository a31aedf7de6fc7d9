//! Fixed-step RK4 integration of geodesics and parallel transport in a
//! metric chart, plus the exponential map and covariant-acceleration
//! diagnostics used by the curve checks.

use thiserror::Error;

use crate::metric::{MetricChart, MetricError, MetricKind};

#[derive(Debug, Error)]
pub enum GeodesicError {
    #[error("metric failure at t = {t}: {source}")]
    Metric {
        t: f64,
        #[source]
        source: MetricError,
    },
    #[error("curve is empty")]
    EmptyCurve,
    #[error("t = {0} is at or beyond the sample-grid boundary")]
    Boundary(f64),
    #[error("t span [{0}, {1}] must contain 0 and be nonempty")]
    BadSpan(f64, f64),
    #[error("step must be positive")]
    BadStep,
    #[error("vector dimension {0} does not match chart dimension {1}")]
    Dimension(usize, usize),
}

/// One integrator sample: `v` is the exact integrator state, never
/// re-differenced from `x`.
#[derive(Debug, Clone)]
pub struct CurveSample {
    pub t: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

/// A curve on a uniform t-grid. Produced by `geodesic_ivp` or assembled
/// from externally sampled data for the diagnostic operations.
#[derive(Debug, Clone)]
pub struct Curve {
    pub samples: Vec<CurveSample>,
    pub step: f64,
}

impl Curve {
    pub fn from_samples(samples: Vec<CurveSample>, step: f64) -> Curve {
        Curve { samples, step }
    }

    /// Index of the grid sample nearest to `t`.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        if self.samples.is_empty() {
            return None;
        }
        let t0 = self.samples[0].t;
        let i = ((t - t0) / self.step).round();
        if i < 0.0 || i as usize >= self.samples.len() {
            None
        } else {
            Some(i as usize)
        }
    }

    /// Sample at the grid point nearest to `t`.
    pub fn at(&self, t: f64) -> Option<&CurveSample> {
        self.index_of(t).map(|i| &self.samples[i])
    }
}

/// One classical RK4 step of the joint system x' = v, v' = −Γ(v,v),
/// optionally carrying transported vectors W' = −Γ(v, W).
fn rk4_step(
    chart: &MetricChart,
    t: f64,
    x: &[f64],
    v: &[f64],
    ws: &[Vec<f64>],
    h: f64,
) -> Result<(Vec<f64>, Vec<f64>, Vec<Vec<f64>>), GeodesicError> {
    let dim = x.len();
    let eval = |x: &[f64], v: &[f64], ws: &[Vec<f64>], tt: f64| {
        let gam = chart.christoffels(x).map_err(|e| GeodesicError::Metric { t: tt, source: e })?;
        let dv: Vec<f64> = gam.contract(v, v).iter().map(|a| -a).collect();
        let dws: Vec<Vec<f64>> = ws
            .iter()
            .map(|w| gam.contract(v, w).iter().map(|a| -a).collect())
            .collect();
        Ok::<_, GeodesicError>((v.to_vec(), dv, dws))
    };
    let k1 = eval(x, v, ws, t)?;
    let adv = |x: &[f64], d: &[f64], s: f64| -> Vec<f64> {
        x.iter().zip(d).map(|(a, b)| a + s * b).collect()
    };
    let advw = |ws: &[Vec<f64>], d: &[Vec<f64>], s: f64| -> Vec<Vec<f64>> {
        ws.iter().zip(d).map(|(a, b)| adv(a, b, s)).collect()
    };
    let k2 = eval(
        &adv(x, &k1.0, h / 2.0),
        &adv(v, &k1.1, h / 2.0),
        &advw(ws, &k1.2, h / 2.0),
        t + h / 2.0,
    )?;
    let k3 = eval(
        &adv(x, &k2.0, h / 2.0),
        &adv(v, &k2.1, h / 2.0),
        &advw(ws, &k2.2, h / 2.0),
        t + h / 2.0,
    )?;
    let k4 = eval(&adv(x, &k3.0, h), &adv(v, &k3.1, h), &advw(ws, &k3.2, h), t + h)?;
    let mut xn = vec![0.0; dim];
    let mut vn = vec![0.0; dim];
    for i in 0..dim {
        xn[i] = x[i] + h / 6.0 * (k1.0[i] + 2.0 * k2.0[i] + 2.0 * k3.0[i] + k4.0[i]);
        vn[i] = v[i] + h / 6.0 * (k1.1[i] + 2.0 * k2.1[i] + 2.0 * k3.1[i] + k4.1[i]);
    }
    let wn: Vec<Vec<f64>> = (0..ws.len())
        .map(|j| {
            (0..dim)
                .map(|i| {
                    ws[j][i]
                        + h / 6.0 * (k1.2[j][i] + 2.0 * k2.2[j][i] + 2.0 * k3.2[j][i] + k4.2[j][i])
                })
                .collect()
        })
        .collect();
    Ok((xn, vn, wn))
}

/// Integrate the joint system over `t_span` (which must contain 0, the
/// anchor of the initial data), sampling on the uniform grid of width
/// `step`. Returns samples in increasing t together with the transported
/// vectors aligned per sample.
fn integrate(
    chart: &MetricChart,
    x0: &[f64],
    v0: &[f64],
    ws0: &[Vec<f64>],
    t_span: (f64, f64),
    step: f64,
) -> Result<(Vec<CurveSample>, Vec<Vec<Vec<f64>>>), GeodesicError> {
    let (ta, tb) = t_span;
    if !(ta <= 0.0 && tb >= 0.0 && tb > ta) {
        return Err(GeodesicError::BadSpan(ta, tb));
    }
    if !(step > 0.0) {
        return Err(GeodesicError::BadStep);
    }
    if x0.len() != chart.dim() || v0.len() != chart.dim() {
        return Err(GeodesicError::Dimension(v0.len(), chart.dim()));
    }
    let n_fwd = (tb / step).round() as usize;
    let n_bwd = (-ta / step).round() as usize;
    let mut forward = Vec::with_capacity(n_fwd + 1);
    let mut fw = Vec::with_capacity(n_fwd + 1);
    let mut state = (x0.to_vec(), v0.to_vec(), ws0.to_vec());
    for k in 0..=n_fwd {
        let t = k as f64 * step;
        forward.push(CurveSample { t, x: state.0.clone(), v: state.1.clone() });
        fw.push(state.2.clone());
        if k < n_fwd {
            state = rk4_step(chart, t, &state.0, &state.1, &state.2, step)?;
        }
    }
    let mut backward = Vec::with_capacity(n_bwd);
    let mut bw = Vec::with_capacity(n_bwd);
    state = (x0.to_vec(), v0.to_vec(), ws0.to_vec());
    for k in 1..=n_bwd {
        let t = -((k - 1) as f64) * step;
        state = rk4_step(chart, t, &state.0, &state.1, &state.2, -step)?;
        backward.push(CurveSample { t: -(k as f64) * step, x: state.0.clone(), v: state.1.clone() });
        bw.push(state.2.clone());
    }
    backward.reverse();
    bw.reverse();
    backward.extend(forward);
    bw.extend(fw);
    Ok((backward, bw))
}

/// Geodesic through `x0` with velocity `v0` at t = 0, sampled over
/// `t_span` on a grid of width `step`. Minkowski charts take the exact
/// straight-line fast path.
pub fn geodesic_ivp(
    chart: &MetricChart,
    x0: &[f64],
    v0: &[f64],
    t_span: (f64, f64),
    step: f64,
) -> Result<Curve, GeodesicError> {
    if chart.kind() == MetricKind::Minkowski {
        let (ta, tb) = t_span;
        if !(ta <= 0.0 && tb >= 0.0 && tb > ta) {
            return Err(GeodesicError::BadSpan(ta, tb));
        }
        if !(step > 0.0) {
            return Err(GeodesicError::BadStep);
        }
        if x0.len() != chart.dim() || v0.len() != chart.dim() {
            return Err(GeodesicError::Dimension(v0.len(), chart.dim()));
        }
        let n_bwd = (-ta / step).round() as i64;
        let n_fwd = (tb / step).round() as i64;
        let samples = (-n_bwd..=n_fwd)
            .map(|k| {
                let t = k as f64 * step;
                CurveSample {
                    t,
                    x: x0.iter().zip(v0).map(|(a, b)| a + t * b).collect(),
                    v: v0.to_vec(),
                }
            })
            .collect();
        return Ok(Curve { samples, step });
    }
    let (samples, _) = integrate(chart, x0, v0, &[], t_span, step)?;
    Ok(Curve { samples, step })
}

/// Max over samples of |g(v,v)|.
pub fn null_defect(chart: &MetricChart, curve: &Curve) -> Result<f64, GeodesicError> {
    if curve.samples.is_empty() {
        return Err(GeodesicError::EmptyCurve);
    }
    let mut worst = 0.0f64;
    for s in &curve.samples {
        worst = worst.max(velocity_norm(chart, s)?.abs());
    }
    Ok(worst)
}

/// g(v,v) at one sample.
pub fn velocity_norm(chart: &MetricChart, s: &CurveSample) -> Result<f64, GeodesicError> {
    let g = chart
        .metric_at(&s.x)
        .map_err(|e| GeodesicError::Metric { t: s.t, source: e })?
        .g;
    let dim = chart.dim();
    let mut q = 0.0;
    for a in 0..dim {
        for b in 0..dim {
            q += g[(a, b)] * s.v[a] * s.v[b];
        }
    }
    Ok(q)
}

/// Parallel transport of `v0_vec` along a geodesic curve; the transport is
/// re-integrated jointly with the geodesic from the t = 0 anchor, so the
/// returned samples align exactly with `curve.samples`.
pub fn parallel_transport(
    chart: &MetricChart,
    curve: &Curve,
    v0_vec: &[f64],
) -> Result<Vec<Vec<f64>>, GeodesicError> {
    if curve.samples.is_empty() {
        return Err(GeodesicError::EmptyCurve);
    }
    if chart.kind() == MetricKind::Minkowski {
        return Ok(vec![v0_vec.to_vec(); curve.samples.len()]);
    }
    let anchor = curve
        .index_of(0.0)
        .ok_or_else(|| GeodesicError::Boundary(0.0))?;
    let s0 = &curve.samples[anchor];
    let span = (
        curve.samples.first().unwrap().t,
        curve.samples.last().unwrap().t,
    );
    let (_, ws) = integrate(chart, &s0.x, &s0.v, &[v0_vec.to_vec()], span, curve.step)?;
    Ok(ws.into_iter().map(|mut w| w.remove(0)).collect())
}

/// Endpoint of the unit-time geodesic from `p` with initial velocity `v`.
pub fn exp_map(
    chart: &MetricChart,
    p: &[f64],
    v: &[f64],
    step: f64,
) -> Result<Vec<f64>, GeodesicError> {
    if chart.kind() == MetricKind::Minkowski {
        if p.len() != chart.dim() || v.len() != chart.dim() {
            return Err(GeodesicError::Dimension(v.len(), chart.dim()));
        }
        return Ok(p.iter().zip(v).map(|(a, b)| a + b).collect());
    }
    let curve = geodesic_ivp(chart, p, v, (0.0, 1.0), step)?;
    Ok(curve.samples.last().unwrap().x.clone())
}

/// Covariant acceleration `(d/dt)v^γ + Γ^γ_{αβ} v^α v^β` at the grid point
/// nearest `t`, with d/dt by centered differences on the stored velocity.
pub fn curve_acceleration(
    chart: &MetricChart,
    curve: &Curve,
    t: f64,
) -> Result<Vec<f64>, GeodesicError> {
    if curve.samples.is_empty() {
        return Err(GeodesicError::EmptyCurve);
    }
    let i = curve.index_of(t).ok_or(GeodesicError::Boundary(t))?;
    if i == 0 || i + 1 >= curve.samples.len() {
        return Err(GeodesicError::Boundary(t));
    }
    let s = &curve.samples[i];
    let prev = &curve.samples[i - 1];
    let next = &curve.samples[i + 1];
    let gam = chart
        .christoffels(&s.x)
        .map_err(|e| GeodesicError::Metric { t: s.t, source: e })?;
    let corr = gam.contract(&s.v, &s.v);
    Ok((0..chart.dim())
        .map(|c| (next.v[c] - prev.v[c]) / (2.0 * curve.step) + corr[c])
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::perturbed_metric;

    fn null_v0(chart: &MetricChart, x0: &[f64], spatial: &[f64]) -> Vec<f64> {
        // solve g(v,v)=0 for the time component given the spatial part
        let g = chart.metric_at(x0).unwrap().g;
        let dim = chart.dim();
        let mut q = 0.0;
        for a in 1..dim {
            for b in 1..dim {
                q += g[(a, b)] * spatial[a - 1] * spatial[b - 1];
            }
        }
        let mut v = vec![(q / -g[(0, 0)]).sqrt()];
        v.extend_from_slice(spatial);
        v
    }

    #[test]
    fn minkowski_null_line() {
        let m = MetricChart::minkowski(3);
        let c = geodesic_ivp(&m, &[0.0; 3], &[1.0, 0.0, 1.0], (0.0, 1.0), 0.1).unwrap();
        assert_eq!(c.samples.len(), 11);
        for s in &c.samples {
            assert_eq!(s.x, vec![s.t, 0.0, s.t]);
            assert_eq!(s.v, vec![1.0, 0.0, 1.0]);
        }
        assert_eq!(null_defect(&m, &c).unwrap(), 0.0);
    }

    #[test]
    fn timelike_norm_conserved_exactly_in_minkowski() {
        let m = MetricChart::minkowski(3);
        let c = geodesic_ivp(&m, &[0.0; 3], &[1.0, 0.0, 0.0], (-0.5, 0.5), 0.1).unwrap();
        for s in &c.samples {
            assert_eq!(velocity_norm(&m, s).unwrap(), -1.0);
        }
    }

    #[test]
    fn geodesic_defect_by_finite_differences() {
        let m = perturbed_metric(3, 0.1);
        let x0 = [0.0, 0.3, 0.1];
        let v0 = null_v0(&m, &x0, &[1.0, 0.5]);
        let c = geodesic_ivp(&m, &x0, &v0, (0.0, 1.0), 1e-3).unwrap();
        // defect |x'' + Γ(v,v)| via second differences of the positions
        let mut worst = 0.0f64;
        for i in (100..c.samples.len() - 100).step_by(97) {
            let gam = m.christoffels(&c.samples[i].x).unwrap();
            let corr = gam.contract(&c.samples[i].v, &c.samples[i].v);
            for k in 0..3 {
                let xpp = (c.samples[i + 1].x[k] - 2.0 * c.samples[i].x[k]
                    + c.samples[i - 1].x[k])
                    / (c.step * c.step);
                worst = worst.max((xpp + corr[k]).abs());
            }
        }
        assert!(worst < 1e-6, "defect {worst}");
    }

    #[test]
    fn reversal_symmetry() {
        let m = perturbed_metric(3, 0.1);
        let x0 = [0.0, 0.4, -0.2];
        let v0 = null_v0(&m, &x0, &[0.8, 0.3]);
        let fwd = geodesic_ivp(&m, &x0, &v0, (0.0, 0.5), 1e-3).unwrap();
        let neg: Vec<f64> = v0.iter().map(|a| -a).collect();
        let bwd = geodesic_ivp(&m, &x0, &neg, (-0.5, 0.0), 1e-3).unwrap();
        let a = fwd.at(0.5).unwrap();
        let b = bwd.at(-0.5).unwrap();
        for k in 0..3 {
            assert!((a.x[k] - b.x[k]).abs() < 1e-10);
            assert!((a.v[k] + b.v[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn null_conservation_perturbed() {
        let m = perturbed_metric(3, 0.1);
        let x0 = [0.0, 0.3, 0.0];
        let v0 = null_v0(&m, &x0, &[1.0, 0.0]);
        let c = geodesic_ivp(&m, &x0, &v0, (0.0, 1.0), 1e-3).unwrap();
        assert!(null_defect(&m, &c).unwrap() < 1e-8);
    }

    #[test]
    fn transport_conserves_inner_products() {
        let m = perturbed_metric(3, 0.1);
        let x0 = [0.0, 0.5, 0.2];
        let v0 = null_v0(&m, &x0, &[1.0, 0.4]);
        let c = geodesic_ivp(&m, &x0, &v0, (0.0, 1.0), 1e-3).unwrap();
        let w0 = vec![0.3, -0.2, 0.9];
        let ws = parallel_transport(&m, &c, &w0).unwrap();
        let g0 = m.metric_at(&x0).unwrap().g;
        let ip = |g: &nalgebra::DMatrix<f64>, a: &[f64], b: &[f64]| {
            let mut s = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    s += g[(i, j)] * a[i] * b[j];
                }
            }
            s
        };
        let want = ip(&g0, &w0, &w0);
        for (s, w) in c.samples.iter().zip(&ws) {
            let g = m.metric_at(&s.x).unwrap().g;
            assert!((ip(&g, w, w) - want).abs() < 1e-8);
        }
        // transporting σ' reproduces σ'
        let vs = parallel_transport(&m, &c, &v0).unwrap();
        for (s, w) in c.samples.iter().zip(&vs) {
            for k in 0..3 {
                assert!((s.v[k] - w[k]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn transport_constant_in_minkowski() {
        let m = MetricChart::minkowski(3);
        let c = geodesic_ivp(&m, &[0.0; 3], &[1.0, 0.0, 1.0], (0.0, 1.0), 0.1).unwrap();
        let ws = parallel_transport(&m, &c, &[0.1, 0.2, 0.3]).unwrap();
        for w in ws {
            assert_eq!(w, vec![0.1, 0.2, 0.3]);
        }
    }

    #[test]
    fn exponential_map() {
        let m = MetricChart::minkowski(3);
        assert_eq!(exp_map(&m, &[1.0, 2.0, 3.0], &[0.5, 0.0, -1.0], 1e-2).unwrap(), vec![
            1.5, 2.0, 2.0
        ]);
        let m = perturbed_metric(3, 0.1);
        let p = [0.0, 0.4, 0.1];
        assert_eq!(exp_map(&m, &p, &[0.0; 3], 1e-2).unwrap(), p.to_vec());
        // homogeneity: exp(p, s v) equals the geodesic at t = s
        let v = null_v0(&m, &p, &[1.0, 0.3]);
        let s = 0.37;
        let sv: Vec<f64> = v.iter().map(|a| a * s).collect();
        let end = exp_map(&m, &p, &sv, 1e-3).unwrap();
        let c = geodesic_ivp(&m, &p, &v, (0.0, 1.0), s * 1e-3).unwrap();
        let at = c.at(s).unwrap();
        for k in 0..3 {
            assert!((end[k] - at.x[k]).abs() < 1e-9);
        }
    }

    #[test]
    fn acceleration_diagnostics() {
        let m = perturbed_metric(3, 0.1);
        let x0 = [0.0, 0.3, 0.0];
        let v0 = null_v0(&m, &x0, &[1.0, 0.2]);
        let c = geodesic_ivp(&m, &x0, &v0, (0.0, 1.0), 1e-3).unwrap();
        let acc = curve_acceleration(&m, &c, 0.5).unwrap();
        assert!(acc.iter().all(|a| a.abs() < 1e-6), "{acc:?}");

        // spatial unit circle in Minkowski: covariant acceleration is the
        // inward normal of magnitude 1
        let mk = MetricChart::minkowski(3);
        let step = 1e-3;
        let samples: Vec<CurveSample> = (0..=2000)
            .map(|k| {
                let t = k as f64 * step;
                CurveSample {
                    t,
                    x: vec![0.0, t.cos(), t.sin()],
                    v: vec![0.0, -t.sin(), t.cos()],
                }
            })
            .collect();
        let circle = Curve::from_samples(samples, step);
        let acc = curve_acceleration(&mk, &circle, 1.0).unwrap();
        let want = [0.0, -(1.0f64.cos()), -(1.0f64.sin())];
        for k in 0..3 {
            assert!((acc[k] - want[k]).abs() < 1e-6);
        }

        // boundary t rejected
        assert!(matches!(
            curve_acceleration(&mk, &circle, 0.0),
            Err(GeodesicError::Boundary(_))
        ));
    }

    #[test]
    fn rk4_order_check() {
        let m = perturbed_metric(3, 0.3);
        let x0 = [0.0, 0.5, 0.1];
        let v0 = null_v0(&m, &x0, &[1.0, 0.7]);
        let endpoint = |step: f64| {
            let c = geodesic_ivp(&m, &x0, &v0, (0.0, 1.0), step).unwrap();
            c.samples.last().unwrap().x.clone()
        };
        let fine = endpoint(1e-4);
        let err = |e: &[f64]| -> f64 {
            e.iter().zip(&fine).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        };
        let e1 = err(&endpoint(0.02));
        let e2 = err(&endpoint(0.01));
        let ratio = e1 / e2;
        assert!(ratio > 10.0 && ratio < 24.0, "ratio {ratio} (e1 {e1:.3e}, e2 {e2:.3e})");
    }
}
