//! Property suites: randomized invariants of the jet algebra, the
//! graph-surface fundamental data, and the geodesic integrator.

use std::collections::HashMap;

use causal_locus::expr::parse_with_vars;
use causal_locus::geodesics;
use causal_locus::hypersurface::GraphSurface;
use causal_locus::jets::Jet;
use causal_locus::metric::{self, MetricChart};
use proptest::prelude::*;

fn jet_from(coeffs: &[f64], nvars: usize, order: usize) -> Jet {
    let mut j = Jet::zero(nvars, order);
    let shape = j.shape().clone();
    for idx in 0..shape.len() {
        let alpha = shape.monomial(idx).to_vec();
        j.set_coeff(&alpha, coeffs[idx % coeffs.len()] * (1.0 + idx as f64 * 0.1).recip());
    }
    j
}

fn f1_minkowski() -> GraphSurface {
    let e = parse_with_vars("y + x^2 + x^3 + y*x^4", &["x", "y"]).unwrap();
    GraphSurface::new(2, e, vec!["x".into(), "y".into()], MetricChart::minkowski(3)).unwrap()
}

fn f1_perturbed() -> GraphSurface {
    let e = parse_with_vars("y + x^2 + x^3 + y*x^4", &["x", "y"]).unwrap();
    GraphSurface::new(2, e, vec!["x".into(), "y".into()], metric::perturbed_metric(3, 0.1))
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// d(p·q) = dp·q + p·dq, coefficient-wise.
    #[test]
    fn jet_product_rule(coeffs in prop::collection::vec(-1.0f64..1.0, 6)) {
        let p = jet_from(&coeffs, 2, 4);
        let q = jet_from(&coeffs[1..], 2, 4);
        let prod = p.mul(&q).unwrap();
        for i in 0..2 {
            let lhs = prod.partial(i).unwrap();
            let rhs = p.partial(i).unwrap().mul(&q.truncated(3)).unwrap()
                .add(&p.truncated(3).mul(&q.partial(i).unwrap()).unwrap()).unwrap();
            prop_assert!(lhs.sub(&rhs).unwrap().max_abs_coeff() < 1e-13);
        }
    }

    /// sqrt(p)² recovers p when the base value is positive.
    #[test]
    fn jet_sqrt_square(coeffs in prop::collection::vec(-1.0f64..1.0, 6), base in 0.5f64..3.0) {
        let mut p = jet_from(&coeffs, 2, 5);
        let alpha = vec![0u8, 0u8];
        p.set_coeff(&alpha, base);
        let r = p.sqrt().unwrap();
        prop_assert!(r.mul(&r).unwrap().sub(&p).unwrap().max_abs_coeff() < 1e-12);
    }

    /// log(exp(p)) recovers p.
    #[test]
    fn jet_log_exp(coeffs in prop::collection::vec(-0.8f64..0.8, 6)) {
        let p = jet_from(&coeffs, 2, 5);
        let round = p
            .compose(causal_locus::jets::Kernel::Exp)
            .unwrap()
            .compose(causal_locus::jets::Kernel::Log)
            .unwrap();
        prop_assert!(round.sub(&p).unwrap().max_abs_coeff() < 1e-12);
    }

    /// g(ν̃, ν̃) = −B and g(ν̃, dF(∂_i)) = 0 in both the fast Minkowski path
    /// and the general-chart path.
    #[test]
    fn normal_identities(x in -0.5f64..0.5, y in -0.5f64..0.5, perturbed: bool) {
        let s = if perturbed { f1_perturbed() } else { f1_minkowski() };
        let p = [x, y];
        let r = s.point_report_default(&p).unwrap();
        let xa = s.immerse(&p).unwrap();
        let g = s.ambient().metric_at(&xa).unwrap().g;
        let mut norm = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                norm += g[(a, b)] * r.nu[a] * r.nu[b];
            }
        }
        prop_assert!((norm + r.b).abs() < 1e-10, "norm identity: {}", (norm + r.b).abs());
        let f1 = s.height_jet(&p, 1).unwrap();
        for i in 0..2 {
            // dF(∂_i) = (∂_i f, e_i)
            let mut tangent = [0.0f64; 3];
            tangent[0] = f1.gradient(i);
            tangent[i + 1] = 1.0;
            let mut ip = 0.0;
            for a in 0..3 {
                for b in 0..3 {
                    ip += g[(a, b)] * r.nu[a] * tangent[b];
                }
            }
            prop_assert!(ip.abs() < 1e-10, "orthogonality: {ip}");
        }
    }

    /// Scof·S = B·I.
    #[test]
    fn cofactor_identity(x in -0.5f64..0.5, y in -0.5f64..0.5) {
        let s = f1_minkowski();
        let r = s.point_report_default(&[x, y]).unwrap();
        let prod = &r.scof * &r.s;
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { r.b } else { 0.0 };
                prop_assert!((prod[(i, j)] - want).abs() < 1e-12);
            }
        }
    }

    /// The area-element density √|B| is invariant under rotating the domain
    /// chart (Minkowski ambient, rotation fixing the time axis).
    #[test]
    fn theta_rotation_invariance(x in -0.3f64..0.3, y in -0.3f64..0.3, angle in 0.0f64..6.283) {
        let base = f1_minkowski();
        let (c, s) = (angle.cos(), angle.sin());
        // pull back the height through the rotation x ↦ R x
        let rot_x = parse_with_vars(&format!("{c}*x - {s}*y"), &["x", "y"]).unwrap();
        let rot_y = parse_with_vars(&format!("{s}*x + {c}*y"), &["x", "y"]).unwrap();
        let mut map = HashMap::new();
        map.insert("x".to_string(), rot_x);
        map.insert("y".to_string(), rot_y);
        let f_expr = parse_with_vars("y + x^2 + x^3 + y*x^4", &["x", "y"]).unwrap();
        let rotated = GraphSurface::new(
            2,
            f_expr.substitute(&map),
            vec!["x".into(), "y".into()],
            MetricChart::minkowski(3),
        ).unwrap();
        let p = [x, y];
        let rp = [c * x - s * y, s * x + c * y];
        let t_rot = rotated.point_report_default(&p).unwrap().theta;
        let t_orig = base.point_report_default(&rp).unwrap().theta;
        prop_assert!((t_rot - t_orig).abs() < 1e-10, "theta drift {}", (t_rot - t_orig).abs());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// Geodesics conserve g(γ', γ') along the flow.
    #[test]
    fn geodesic_energy_conservation(
        x1 in -0.3f64..0.3, x2 in -0.3f64..0.3,
        v1 in -0.5f64..0.5, v2 in -0.5f64..0.5,
    ) {
        let chart = metric::perturbed_metric(3, 0.1);
        let x0 = [0.0, x1, x2];
        let v0 = [1.0, v1, v2];
        let curve = geodesics::geodesic_ivp(&chart, &x0, &v0, (0.0, 0.3), 2e-3).unwrap();
        let e0 = geodesics::velocity_norm(&chart, &curve.samples[0]).unwrap();
        for s in &curve.samples {
            let e = geodesics::velocity_norm(&chart, s).unwrap();
            prop_assert!((e - e0).abs() < 1e-8, "energy drift {}", (e - e0).abs());
        }
    }

    /// Parallel transport preserves inner products of transported vectors.
    #[test]
    fn transport_preserves_inner_products(
        w1 in prop::collection::vec(-1.0f64..1.0, 3),
        w2 in prop::collection::vec(-1.0f64..1.0, 3),
    ) {
        let chart = metric::perturbed_metric(3, 0.1);
        let curve = geodesics::geodesic_ivp(
            &chart, &[0.0, 0.2, -0.1], &[1.0, 0.4, 0.3], (0.0, 0.3), 2e-3,
        ).unwrap();
        let t1 = geodesics::parallel_transport(&chart, &curve, &w1).unwrap();
        let t2 = geodesics::parallel_transport(&chart, &curve, &w2).unwrap();
        let ip = |x: &[f64], a: &[f64], b: &[f64]| {
            let g = chart.metric_at(x).unwrap().g;
            let mut s = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    s += g[(i, j)] * a[i] * b[j];
                }
            }
            s
        };
        let ip0 = ip(&curve.samples[0].x, &t1[0], &t2[0]);
        for (k, s) in curve.samples.iter().enumerate() {
            prop_assert!((ip(&s.x, &t1[k], &t2[k]) - ip0).abs() < 1e-8);
        }
    }

    /// Affine reparametrization: γ_{cv}(t) = γ_v(ct) for geodesics.
    #[test]
    fn geodesic_homogeneity(c in 0.5f64..2.0) {
        let chart = metric::perturbed_metric(3, 0.1);
        let x0 = [0.0, 0.2, -0.1];
        let v0 = [1.0, 0.4, 0.3];
        let scaled: Vec<f64> = v0.iter().map(|v| c * v).collect();
        let a = geodesics::geodesic_ivp(&chart, &x0, &v0, (0.0, 0.4), 1e-3).unwrap();
        let b = geodesics::geodesic_ivp(&chart, &x0, &scaled, (0.0, 0.4 / c), 1e-3 / c).unwrap();
        let xa = &a.samples.last().unwrap().x;
        let xb = &b.samples.last().unwrap().x;
        for i in 0..3 {
            prop_assert!((xa[i] - xb[i]).abs() < 1e-8, "endpoint drift {}", (xa[i] - xb[i]).abs());
        }
    }
}

/// Mean-curvature magnitudes agree between H, Ĥ, the vector, and the form
/// coefficient wherever B ≠ 0 (pointwise consistency of the derived data).
#[test]
fn curvature_quantities_consistent() {
    let s = f1_minkowski();
    for k in 0..100 {
        let x = -0.45 + 0.9 * (k as f64) / 99.0;
        let p = [x, 0.3];
        let r = s.point_report_default(&p).unwrap();
        if let (Some(h), Some(hhat), Some(omega)) = (r.h_mean, r.hhat, r.omega_h) {
            let n = 2.0;
            assert!((h - r.a / (n * r.b.abs().powf(1.5))).abs() < 1e-12);
            assert!((hhat - r.b.signum() * h).abs() < 1e-12);
            assert!((omega - r.a / (n * r.b)).abs() < 1e-12);
        }
    }
}
