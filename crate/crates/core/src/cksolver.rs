//! Truncated power-series construction of hypersurfaces in Minkowski
//! space, slice by slice in the distinguished variable x_n: light-like
//! surfaces from initial data λ, and surfaces with prescribed curvature
//! target `A = φ·B^{1+α}` from data (η₀, η₁). Each x_n-level of the normal
//! form is linear in the new unknown slice, so the recursion is exact.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{Expr, ExprError};
use crate::jets::{Jet, JetError};

#[derive(Debug, Error)]
pub enum CkError {
    #[error("expression error: {0}")]
    Expr(#[from] ExprError),
    #[error("jet error: {0}")]
    Jet(#[from] JetError),
    #[error("sqrt domain violated: |∇λ(0)| = {0} ≥ 1")]
    SqrtDomain(f64),
    #[error("initial datum precondition violated: {0}")]
    Precondition(String),
    #[error("series order must be at least 2")]
    OrderTooSmall,
    #[error("series file is malformed: {0}")]
    Format(String),
}

/// Which builder produced a series, with its input data echoed as printed
/// expressions.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub enum Provenance {
    Lightlike { lambda: String },
    Admissible { eta0: String, eta1: String, phi: String, alpha: u32 },
}

/// A truncated power-series height function at the origin, normalized so
/// f(0) = 0 and ∇f(0) = (0,…,0,1).
#[derive(Debug, Clone)]
pub struct SeriesSurface {
    pub n: usize,
    pub order: usize,
    pub f: Jet,
    pub provenance: Provenance,
}

fn data_env(n: usize, order: usize, nvars_used: usize) -> HashMap<String, Jet> {
    let mut env = HashMap::new();
    for i in 0..nvars_used {
        env.insert(format!("x{}", i + 1), Jet::variable(i, 0.0, n, order).unwrap());
    }
    env
}

/// Copy the coefficients of slice `x_n^slice` of `f` from the x_n-partial
/// relation `target = ∂^m f/∂x_n^m`: for every monomial α of `f` with
/// α_n = slice, the source coefficient sits at α − m·e_n in `src`.
fn fill_slice(f: &mut Jet, src: &Jet, slice: u8, m: u8, divisor: f64) {
    let n = f.nvars();
    let shape = f.shape().clone();
    for idx in 0..shape.len() {
        let alpha = shape.monomial(idx).to_vec();
        if alpha[n - 1] != slice {
            continue;
        }
        let mut beta = alpha.clone();
        beta[n - 1] -= m;
        f.set_coeff(&alpha, src.coeff(&beta) / divisor);
    }
}

/// Σ_{i<n} (f_{x_i})², truncated one order below `f`.
fn transverse_gradient_square(f: &Jet) -> Result<Jet, JetError> {
    let n = f.nvars();
    let mut q = Jet::zero(n, f.order() - 1);
    for i in 0..n - 1 {
        let fi = f.partial(i)?;
        q = q.add(&fi.mul(&fi)?)?;
    }
    Ok(q)
}

/// Light-like surface with `f(x', 0) = λ(x')`, solved from
/// `f_{x_n} = √(1 − Σ_{i<n}(f_{x_i})²)` slice by slice.
pub fn build_lightlike(lambda: &Expr, n: usize, order: usize) -> Result<SeriesSurface, CkError> {
    if order < 2 {
        return Err(CkError::OrderTooSmall);
    }
    let lam = lambda.eval_jet(&data_env(n, order, n - 1))?;
    let grad_norm: f64 = (0..n - 1).map(|i| lam.gradient(i).powi(2)).sum::<f64>().sqrt();
    if grad_norm >= 1.0 {
        return Err(CkError::SqrtDomain(grad_norm));
    }
    if lam.value() != 0.0 || grad_norm != 0.0 {
        return Err(CkError::Precondition(
            "λ must vanish to second order at the origin".into(),
        ));
    }
    let mut f = lam;
    for k in 0..order as u8 {
        let g = Jet::constant(1.0, n, order - 1)
            .sub(&transverse_gradient_square(&f)?)?
            .sqrt()?;
        fill_slice(&mut f, &g, k + 1, 1, (k + 1) as f64);
    }
    Ok(SeriesSurface {
        n,
        order,
        f,
        provenance: Provenance::Lightlike { lambda: lambda.to_string() },
    })
}

/// Surface with curvature target `A = φ·B^{1+α}` and initial data
/// `f(x',0) = η₀`, `f_{x_n}(x',0) = 1 + η₁`, solved from the normal form
/// `(1−Q) f_{x_n x_n} = φB^{1+α} − B Σ_{i<n} f_{x_i x_i}
///  − Σ_{(i,j)≠(n,n)} f_{x_i} f_{x_j} f_{x_i x_j}` slice by slice.
pub fn build_admissible(
    eta0: &Expr,
    eta1: &Expr,
    phi: &Expr,
    alpha: u32,
    n: usize,
    order: usize,
) -> Result<SeriesSurface, CkError> {
    if order < 2 {
        return Err(CkError::OrderTooSmall);
    }
    let e0 = eta0.eval_jet(&data_env(n, order, n - 1))?;
    let e1 = eta1.eval_jet(&data_env(n, order, n - 1))?;
    if e0.value() != 0.0 || (0..n - 1).any(|i| e0.gradient(i) != 0.0) {
        return Err(CkError::Precondition(
            "η₀ must vanish to second order at the origin".into(),
        ));
    }
    if e1.value() != 0.0 {
        return Err(CkError::Precondition("η₁ must vanish at the origin".into()));
    }
    let phi_jet = phi.eval_jet(&data_env(n, order, n))?;
    let mut f = e0;
    fill_slice(&mut f, &e1.add_scalar(1.0), 1, 1, 1.0);
    let work = order - 2;
    for k in 0..=work as u8 {
        // assemble the right side from the slices known so far (≤ k+1)
        let q = transverse_gradient_square(&f)?.truncated(work);
        let grads: Vec<Jet> = (0..n)
            .map(|i| f.partial(i).map(|p| p.truncated(work)))
            .collect::<Result<_, _>>()?;
        let mut b = Jet::constant(1.0, n, work);
        for g in &grads {
            b = b.sub(&g.mul(g)?)?;
        }
        let phi_t = phi_jet.truncated(work);
        let mut rhs = phi_t.mul(&b.powi(1 + alpha as i64)?)?;
        for i in 0..n - 1 {
            let fii = f.partial(i)?.partial(i)?.truncated(work);
            rhs = rhs.sub(&b.mul(&fii)?)?;
        }
        for i in 0..n {
            for j in 0..n {
                if i == n - 1 && j == n - 1 {
                    continue;
                }
                let fij = f.partial(i)?.partial(j)?.truncated(work);
                rhs = rhs.sub(&grads[i].mul(&grads[j])?.mul(&fij)?)?;
            }
        }
        let one_minus_q = Jet::constant(1.0, n, work).sub(&q)?;
        let fnn = rhs.div(&one_minus_q)?;
        fill_slice(&mut f, &fnn, k + 2, 2, ((k + 2) * (k + 1)) as f64);
    }
    Ok(SeriesSurface {
        n,
        order,
        f,
        provenance: Provenance::Admissible {
            eta0: eta0.to_string(),
            eta1: eta1.to_string(),
            phi: phi.to_string(),
            alpha,
        },
    })
}

/// B of the series as a jet, one order below f.
pub fn series_b_jet(s: &SeriesSurface) -> Result<Jet, JetError> {
    let n = s.n;
    let mut b = Jet::constant(1.0, n, s.order - 1);
    for i in 0..n {
        let fi = s.f.partial(i)?;
        b = b.sub(&fi.mul(&fi)?)?;
    }
    Ok(b)
}

/// A of the series as a jet (flat-ambient formula `BΔf + Σ f_i f_j f_{ij}`),
/// two orders below f.
pub fn series_a_jet(s: &SeriesSurface) -> Result<Jet, JetError> {
    let n = s.n;
    let work = s.order - 2;
    let b = series_b_jet(s)?.truncated(work);
    let grads: Vec<Jet> = (0..n)
        .map(|i| s.f.partial(i).map(|p| p.truncated(work)))
        .collect::<Result<_, _>>()?;
    let mut a = Jet::zero(n, work);
    for i in 0..n {
        let fii = s.f.partial(i)?.partial(i)?;
        a = a.add(&b.mul(&fii)?)?;
    }
    for i in 0..n {
        for j in 0..n {
            let fij = s.f.partial(i)?.partial(j)?;
            a = a.add(&grads[i].mul(&grads[j])?.mul(&fij)?)?;
        }
    }
    Ok(a)
}

/// Max residual coefficient of the builder equation on the series: with a
/// target φ, `A − φ·B^{1+α}` up to order d−2; without one, the light-like
/// target `B ≡ 0` up to order d−1.
pub fn series_residual(
    s: &SeriesSurface,
    phi: Option<&Expr>,
    alpha: u32,
) -> Result<f64, CkError> {
    match phi {
        None => Ok(series_b_jet(s)?.max_abs_coeff()),
        Some(phi) => {
            let phi_jet = phi.eval_jet(&data_env(s.n, s.order - 2, s.n))?;
            series_residual_with_phi_jet(s, &phi_jet, alpha)
        }
    }
}

/// As `series_residual` with the target coefficient already expanded as a
/// jet (used for composite targets like φ·B).
pub fn series_residual_with_phi_jet(
    s: &SeriesSurface,
    phi_jet: &Jet,
    alpha: u32,
) -> Result<f64, CkError> {
    let work = s.order - 2;
    let a = series_a_jet(s)?;
    let b = series_b_jet(s)?.truncated(work);
    let res = a.sub(&phi_jet.truncated(work).mul(&b.powi(1 + alpha as i64)?)?)?;
    Ok(res.max_abs_coeff())
}

/// Initial data read back off the series: `η₀ = f(x',0)` and
/// `η₁ = f_{x_n}(x',0) − 1`, as jets in the first n−1 variables' slots
/// (x_n exponent 0).
pub fn recover_eta(s: &SeriesSurface) -> Result<(Jet, Jet), CkError> {
    let n = s.n;
    let shape = s.f.shape().clone();
    let mut eta0 = Jet::zero(n, s.order);
    let mut eta1 = Jet::zero(n, s.order - 1);
    for idx in 0..shape.len() {
        let alpha = shape.monomial(idx).to_vec();
        if alpha[n - 1] == 0 {
            eta0.set_coeff(&alpha, s.f.coeff(&alpha));
        } else if alpha[n - 1] == 1 {
            let mut beta = alpha.clone();
            beta[n - 1] = 0;
            if beta.iter().map(|&e| e as usize).sum::<usize>() <= s.order - 1 {
                eta1.set_coeff(&beta, s.f.coeff(&alpha));
            }
        }
    }
    let eta1 = eta1.add_scalar(-1.0);
    Ok((eta0, eta1))
}

/// On-disk form: coefficients in the graded-lexicographic monomial order of
/// the jet shape, each f64 encoded as the hex of its bit pattern so the
/// round trip is bit-exact.
#[derive(Serialize, Deserialize)]
struct SeriesFile {
    schema: u32,
    n: usize,
    order: usize,
    provenance: Provenance,
    coeffs_hex: Vec<String>,
}

impl SeriesSurface {
    pub fn to_json(&self) -> String {
        let file = SeriesFile {
            schema: 1,
            n: self.n,
            order: self.order,
            provenance: self.provenance.clone(),
            coeffs_hex: self
                .f
                .coeffs()
                .iter()
                .map(|c| format!("{:016x}", c.to_bits()))
                .collect(),
        };
        serde_json::to_string_pretty(&file).unwrap()
    }

    pub fn from_json(text: &str) -> Result<SeriesSurface, CkError> {
        let file: SeriesFile =
            serde_json::from_str(text).map_err(|e| CkError::Format(e.to_string()))?;
        if file.schema != 1 {
            return Err(CkError::Format(format!("unsupported schema {}", file.schema)));
        }
        let mut f = Jet::zero(file.n, file.order);
        let shape = f.shape().clone();
        if file.coeffs_hex.len() != shape.len() {
            return Err(CkError::Format(format!(
                "expected {} coefficients, found {}",
                shape.len(),
                file.coeffs_hex.len()
            )));
        }
        for (idx, hex) in file.coeffs_hex.iter().enumerate() {
            let bits = u64::from_str_radix(hex, 16)
                .map_err(|e| CkError::Format(format!("bad coefficient `{hex}`: {e}")))?;
            let alpha = shape.monomial(idx).to_vec();
            f.set_coeff(&alpha, f64::from_bits(bits));
        }
        Ok(SeriesSurface { n: file.n, order: file.order, f, provenance: file.provenance })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_with_vars;

    fn is_xn(f: &Jet, tol: f64) -> bool {
        let n = f.nvars();
        let shape = f.shape().clone();
        (0..shape.len()).all(|idx| {
            let alpha = shape.monomial(idx);
            let want =
                if alpha[n - 1] == 1 && alpha.iter().map(|&e| e as usize).sum::<usize>() == 1 {
                    1.0
                } else {
                    0.0
                };
            (f.coeffs()[idx] - want).abs() <= tol
        })
    }

    #[test]
    fn zero_data_gives_plane() {
        let zero = Expr::number(0.0);
        let s = build_lightlike(&zero, 2, 8).unwrap();
        assert!(is_xn(&s.f, 0.0));
        let s = build_admissible(&zero, &zero, &zero, 0, 2, 8).unwrap();
        assert!(is_xn(&s.f, 0.0));
        let s = build_admissible(&zero, &zero, &zero, 2, 3, 6).unwrap();
        assert!(is_xn(&s.f, 0.0));
    }

    #[test]
    fn cone_from_its_lightlike_data() {
        let lam = parse_with_vars("sqrt(1 + x1^2) - 1", &["x1"]).unwrap();
        let s = build_lightlike(&lam, 2, 10).unwrap();
        let cone = parse_with_vars("sqrt(x1^2 + (x2 + 1)^2) - 1", &["x1", "x2"]).unwrap();
        let mut env = HashMap::new();
        env.insert("x1".into(), Jet::variable(0, 0.0, 2, 10).unwrap());
        env.insert("x2".into(), Jet::variable(1, 0.0, 2, 10).unwrap());
        let want = cone.eval_jet(&env).unwrap();
        for (a, b) in s.f.coeffs().iter().zip(want.coeffs()) {
            assert!((a - b).abs() < 1e-11, "{a} vs {b}");
        }
        assert!(series_residual(&s, None, 0).unwrap() < 1e-11);
    }

    #[test]
    fn lightlike_residual_vanishes_for_generic_data() {
        let lam = parse_with_vars("x1^2/2", &["x1"]).unwrap();
        let s = build_lightlike(&lam, 2, 9).unwrap();
        assert!(series_residual(&s, None, 0).unwrap() < 1e-12);
        let lam3 = parse_with_vars("x1^2/2 + x1*x2/4 - x2^2/3", &["x1", "x2"]).unwrap();
        let s = build_lightlike(&lam3, 3, 7).unwrap();
        assert!(series_residual(&s, None, 0).unwrap() < 1e-12);
    }

    #[test]
    fn kobayashi_from_its_data() {
        let zero = Expr::number(0.0);
        let eta1 = parse_with_vars("x1", &["x1"]).unwrap();
        let s = build_admissible(&zero, &eta1, &zero, 0, 2, 12).unwrap();
        let k = parse_with_vars("(x1 + 1)*tanh(x2)", &["x1", "x2"]).unwrap();
        let mut env = HashMap::new();
        env.insert("x1".into(), Jet::variable(0, 0.0, 2, 12).unwrap());
        env.insert("x2".into(), Jet::variable(1, 0.0, 2, 12).unwrap());
        let want = k.eval_jet(&env).unwrap();
        for (a, b) in s.f.coeffs().iter().zip(want.coeffs()) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
        assert!(series_residual(&s, Some(&zero), 0).unwrap() < 1e-10);
    }

    #[test]
    fn degenerate_data_and_residual() {
        let eta = parse_with_vars("x1^2", &["x1"]).unwrap();
        let one = Expr::number(1.0);
        let s = build_admissible(&eta, &eta, &one, 0, 2, 12).unwrap();
        assert!(series_residual(&s, Some(&one), 0).unwrap() < 1e-10);
        // pure-x_n coefficients must be those of x_n (the degenerate line)
        for k in 0..=12u8 {
            let alpha = [0, k];
            let want = if k == 1 { 1.0 } else { 0.0 };
            assert!((s.f.coeff(&alpha) - want).abs() < 1e-10, "x2^{k}");
        }
    }

    #[test]
    fn eta_round_trip_exact() {
        let eta0 = parse_with_vars("x1^2 - x1^3/3", &["x1"]).unwrap();
        let eta1 = parse_with_vars("x1/2 + x1^2", &["x1"]).unwrap();
        let phi = parse_with_vars("1 + x2", &["x1", "x2"]).unwrap();
        let s = build_admissible(&eta0, &eta1, &phi, 1, 2, 10).unwrap();
        let (r0, r1) = recover_eta(&s).unwrap();
        let env = data_env(2, 10, 1);
        let w0 = eta0.eval_jet(&env).unwrap();
        let env1 = data_env(2, 9, 1);
        let w1 = eta1.eval_jet(&env1).unwrap();
        // exact: the builder copies these coefficients without arithmetic
        for idx in 0..w0.shape().len() {
            let alpha = w0.shape().monomial(idx).to_vec();
            assert_eq!(r0.coeff(&alpha), w0.coeffs()[idx]);
        }
        for idx in 0..w1.shape().len() {
            let alpha = w1.shape().monomial(idx).to_vec();
            assert_eq!(r1.coeff(&alpha), w1.coeffs()[idx]);
        }
    }

    #[test]
    fn class_inclusion_alpha_one_to_zero() {
        let eta0 = parse_with_vars("x1^2", &["x1"]).unwrap();
        let eta1 = parse_with_vars("x1^2/2", &["x1"]).unwrap();
        let phi = parse_with_vars("1 - x1 + x2", &["x1", "x2"]).unwrap();
        let s = build_admissible(&eta0, &eta1, &phi, 1, 2, 10).unwrap();
        assert!(series_residual(&s, Some(&phi), 1).unwrap() < 1e-11);
        // A = φ·B² = (φ·B)·B: the α=0 target with coefficient φ·B
        let phi_jet = phi
            .eval_jet(&data_env(2, 8, 2))
            .unwrap()
            .mul(&series_b_jet(&s).unwrap().truncated(8))
            .unwrap();
        assert!(series_residual_with_phi_jet(&s, &phi_jet, 0).unwrap() < 1e-11);
    }

    #[test]
    fn preconditions_enforced() {
        let bad = parse_with_vars("x1/2", &["x1"]).unwrap();
        assert!(matches!(build_lightlike(&bad, 2, 6), Err(CkError::Precondition(_))));
        let steep = parse_with_vars("2*x1", &["x1"]).unwrap();
        assert!(matches!(build_lightlike(&steep, 2, 6), Err(CkError::SqrtDomain(_))));
        let zero = Expr::number(0.0);
        let bad1 = parse_with_vars("1 + x1", &["x1"]).unwrap();
        assert!(matches!(
            build_admissible(&zero, &bad1, &zero, 0, 2, 6),
            Err(CkError::Precondition(_))
        ));
    }

    #[test]
    fn serialization_bit_exact_and_sensitive() {
        let lam = parse_with_vars("x1^2/2", &["x1"]).unwrap();
        let s = build_lightlike(&lam, 2, 9).unwrap();
        let text = s.to_json();
        let back = SeriesSurface::from_json(&text).unwrap();
        assert_eq!(back.n, s.n);
        assert_eq!(back.order, s.order);
        assert_eq!(back.provenance, s.provenance);
        assert_eq!(back.f.coeffs(), s.f.coeffs());

        // corrupting one degree-4 coefficient must show up in the residual
        let mut corrupted = back;
        let alpha = [2u8, 2u8];
        corrupted
            .f
            .set_coeff(&alpha, corrupted.f.coeff(&alpha) + 1e-3);
        assert!(series_residual(&corrupted, None, 0).unwrap() > 1e-4);
    }
}
