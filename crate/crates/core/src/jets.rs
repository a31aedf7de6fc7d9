//! Dense truncated multivariate Taylor expansions ("jets").
//!
//! A jet stores every partial-derivative coefficient of a function up to a
//! fixed total degree, in graded-lexicographic order. Arithmetic is exact
//! truncation: multiplying the jets of two polynomials of degree `<= d` and
//! truncating to `d` yields exactly the degree-`<= d` part of their product.
//! Jets double as forward-mode automatic differentiation (read the low-order
//! coefficients) and as the substrate of the series solvers (keep them all).

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum JetError {
    #[error("variable index {index} out of range for {nvars} variables")]
    IndexOutOfRange { index: usize, nvars: usize },
    #[error("jet shape mismatch: ({0} vars, order {1}) vs ({2} vars, order {3})")]
    ShapeMismatch(usize, usize, usize, usize),
    #[error("cannot differentiate a jet of order 0")]
    OrderZero,
    #[error("{kernel} undefined at constant term {value}")]
    Domain { kernel: &'static str, value: f64 },
    #[error("division by a jet with zero constant term")]
    ZeroDivisor,
}

/// Monomial layout shared by all jets of a given `(nvars, order)`.
///
/// Multi-indices of total degree `<= order` are listed degree-first, then
/// lexicographically within each degree. The layout is interned so that
/// `position` lookups and jet clones stay cheap.
#[derive(Debug)]
pub struct JetShape {
    pub nvars: usize,
    pub order: usize,
    monomials: Vec<Vec<u8>>,
    position: HashMap<Vec<u8>, usize>,
}

fn monomials_of_degree(nvars: usize, degree: usize, out: &mut Vec<Vec<u8>>) {
    fn rec(prefix: &mut Vec<u8>, remaining_vars: usize, remaining_deg: usize, out: &mut Vec<Vec<u8>>) {
        if remaining_vars == 1 {
            prefix.push(remaining_deg as u8);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=remaining_deg).rev() {
            prefix.push(e as u8);
            rec(prefix, remaining_vars - 1, remaining_deg - e, out);
            prefix.pop();
        }
    }
    let mut prefix = Vec::with_capacity(nvars);
    rec(&mut prefix, nvars, degree, out);
}

impl JetShape {
    fn new(nvars: usize, order: usize) -> Self {
        assert!(nvars >= 1, "jet needs at least one variable");
        let mut monomials = Vec::new();
        for d in 0..=order {
            let mut layer = Vec::new();
            monomials_of_degree(nvars, d, &mut layer);
            // lexicographic within a degree, ascending
            layer.sort();
            monomials.extend(layer);
        }
        let position = monomials
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();
        JetShape { nvars, order, monomials, position }
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn monomial(&self, i: usize) -> &[u8] {
        &self.monomials[i]
    }

    pub fn index_of(&self, alpha: &[u8]) -> Option<usize> {
        self.position.get(alpha).copied()
    }
}

/// Interned shape for `(nvars, order)`.
pub fn shape(nvars: usize, order: usize) -> Arc<JetShape> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<JetShape>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry((nvars, order))
        .or_insert_with(|| Arc::new(JetShape::new(nvars, order)))
        .clone()
}

/// A truncated Taylor expansion around some base point.
///
/// The base point itself is not stored; the constant coefficient carries the
/// value there and callers track where the expansion lives.
#[derive(Clone)]
pub struct Jet {
    shape: Arc<JetShape>,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Jet({} vars, order {})[", self.shape.nvars, self.shape.order)?;
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if *c != 0.0 {
                if !first {
                    write!(f, " + ")?;
                }
                write!(f, "{c}*{:?}", self.shape.monomial(i))?;
                first = false;
            }
        }
        write!(f, "]")
    }
}

impl Jet {
    pub fn zero(nvars: usize, order: usize) -> Jet {
        let shape = shape(nvars, order);
        let coeffs = vec![0.0; shape.len()];
        Jet { shape, coeffs }
    }

    pub fn constant(value: f64, nvars: usize, order: usize) -> Jet {
        let mut j = Jet::zero(nvars, order);
        j.coeffs[0] = value;
        j
    }

    /// Jet of the coordinate function `x_i` expanded at `base`.
    pub fn variable(i: usize, base: f64, nvars: usize, order: usize) -> Result<Jet, JetError> {
        if i >= nvars {
            return Err(JetError::IndexOutOfRange { index: i, nvars });
        }
        let mut j = Jet::zero(nvars, order);
        j.coeffs[0] = base;
        if order >= 1 {
            let mut alpha = vec![0u8; nvars];
            alpha[i] = 1;
            let idx = j.shape.index_of(&alpha).unwrap();
            j.coeffs[idx] = 1.0;
        }
        Ok(j)
    }

    pub fn nvars(&self) -> usize {
        self.shape.nvars
    }

    pub fn order(&self) -> usize {
        self.shape.order
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn shape(&self) -> &Arc<JetShape> {
        &self.shape
    }

    /// Constant term (value at the expansion base).
    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Coefficient of the monomial with multi-index `alpha` (0 beyond order).
    pub fn coeff(&self, alpha: &[u8]) -> f64 {
        assert_eq!(alpha.len(), self.shape.nvars);
        self.shape.index_of(alpha).map_or(0.0, |i| self.coeffs[i])
    }

    pub fn set_coeff(&mut self, alpha: &[u8], value: f64) {
        let i = self
            .shape
            .index_of(alpha)
            .unwrap_or_else(|| panic!("multi-index {alpha:?} outside shape"));
        self.coeffs[i] = value;
    }

    /// First-order coefficient of `x_i`; the partial derivative at the base.
    pub fn gradient(&self, i: usize) -> f64 {
        let mut alpha = vec![0u8; self.shape.nvars];
        alpha[i] = 1;
        self.coeff(&alpha)
    }

    /// Second partial derivative at the base, read from the coefficients.
    pub fn hessian(&self, i: usize, j: usize) -> f64 {
        let mut alpha = vec![0u8; self.shape.nvars];
        alpha[i] += 1;
        alpha[j] += 1;
        let c = self.coeff(&alpha);
        if i == j {
            2.0 * c
        } else {
            c
        }
    }

    fn check_shape(&self, other: &Jet) -> Result<(), JetError> {
        if !Arc::ptr_eq(&self.shape, &other.shape) {
            return Err(JetError::ShapeMismatch(
                self.shape.nvars,
                self.shape.order,
                other.shape.nvars,
                other.shape.order,
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check_shape(other)?;
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check_shape(other)?;
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a -= b;
        }
        Ok(out)
    }

    pub fn neg(&self) -> Jet {
        let mut out = self.clone();
        for a in out.coeffs.iter_mut() {
            *a = -*a;
        }
        out
    }

    pub fn scale(&self, s: f64) -> Jet {
        let mut out = self.clone();
        for a in out.coeffs.iter_mut() {
            *a *= s;
        }
        out
    }

    pub fn add_scalar(&self, s: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += s;
        out
    }

    /// Truncated Cauchy product.
    pub fn mul(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check_shape(other)?;
        let order = self.shape.order;
        let mut out = Jet::zero(self.shape.nvars, order);
        let shape = &self.shape;
        let mut sum = vec![0u8; shape.nvars];
        for ia in 0..self.coeffs.len() {
            let ca = self.coeffs[ia];
            if ca == 0.0 {
                continue;
            }
            let ma = shape.monomial(ia);
            let da: usize = ma.iter().map(|&e| e as usize).sum();
            for ib in 0..other.coeffs.len() {
                let cb = other.coeffs[ib];
                if cb == 0.0 {
                    continue;
                }
                let mb = shape.monomial(ib);
                let db: usize = mb.iter().map(|&e| e as usize).sum();
                if da + db > order {
                    continue;
                }
                for k in 0..shape.nvars {
                    sum[k] = ma[k] + mb[k];
                }
                let idx = shape.index_of(&sum).unwrap();
                out.coeffs[idx] += ca * cb;
            }
        }
        Ok(out)
    }

    /// Formal partial derivative; the output order drops by one.
    pub fn partial(&self, i: usize) -> Result<Jet, JetError> {
        if i >= self.shape.nvars {
            return Err(JetError::IndexOutOfRange { index: i, nvars: self.shape.nvars });
        }
        if self.shape.order == 0 {
            return Err(JetError::OrderZero);
        }
        let mut out = Jet::zero(self.shape.nvars, self.shape.order - 1);
        let mut alpha = vec![0u8; self.shape.nvars];
        for idx in 0..self.coeffs.len() {
            let c = self.coeffs[idx];
            if c == 0.0 {
                continue;
            }
            let m = self.shape.monomial(idx);
            if m[i] == 0 {
                continue;
            }
            alpha.copy_from_slice(m);
            alpha[i] -= 1;
            if let Some(j) = out.shape.index_of(&alpha) {
                out.coeffs[j] += c * m[i] as f64;
            }
        }
        Ok(out)
    }

    /// Re-truncate to a (lower or equal) order.
    pub fn truncated(&self, order: usize) -> Jet {
        let order = order.min(self.shape.order);
        let mut out = Jet::zero(self.shape.nvars, order);
        for idx in 0..out.coeffs.len() {
            let m = out.shape.monomial(idx).to_vec();
            out.coeffs[idx] = self.coeff(&m);
        }
        out
    }

    /// Evaluate the jet polynomial at displacement `h` from the base point.
    pub fn eval(&self, h: &[f64]) -> f64 {
        assert_eq!(h.len(), self.shape.nvars);
        let mut total = 0.0;
        for (idx, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let mut term = c;
            for (k, &e) in self.shape.monomial(idx).iter().enumerate() {
                for _ in 0..e {
                    term *= h[k];
                }
            }
            total += term;
        }
        total
    }

    /// Evaluate the jet polynomial with jets substituted for the variables.
    ///
    /// The arguments are displacements from this jet's base point, expressed
    /// in the arguments' shape; used for re-expansion and linear changes of
    /// variables.
    pub fn eval_jets(&self, args: &[Jet]) -> Result<Jet, JetError> {
        assert_eq!(args.len(), self.shape.nvars);
        let (nv, ord) = (args[0].nvars(), args[0].order());
        // powers[k][e] = args[k]^e, built on demand
        let mut powers: Vec<Vec<Jet>> = args
            .iter()
            .map(|a| vec![Jet::constant(1.0, nv, ord), a.clone()])
            .collect();
        let mut out = Jet::zero(nv, ord);
        for (idx, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let mut term = Jet::constant(c, nv, ord);
            for (k, &e) in self.shape.monomial(idx).iter().enumerate() {
                while powers[k].len() <= e as usize {
                    let next = powers[k].last().unwrap().mul(&powers[k][1])?;
                    powers[k].push(next);
                }
                if e > 0 {
                    term = term.mul(&powers[k][e as usize])?;
                }
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }

    /// Maximum absolute coefficient.
    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Univariate analytic composition `kernel(self)` by the Taylor recurrence.
    pub fn compose(&self, kernel: Kernel) -> Result<Jet, JetError> {
        let d = self.shape.order;
        let c = self.coeffs[0];
        let taylor = kernel.taylor_coeffs(c, d)?;
        // w = self - c has zero constant term, so Horner in w terminates exactly
        let mut w = self.clone();
        w.coeffs[0] = 0.0;
        let mut out = Jet::constant(taylor[d], self.shape.nvars, d);
        for k in (0..d).rev() {
            out = out.mul(&w)?.add_scalar(taylor[k]);
        }
        Ok(out)
    }

    pub fn sqrt(&self) -> Result<Jet, JetError> {
        self.compose(Kernel::Sqrt)
    }

    pub fn recip(&self) -> Result<Jet, JetError> {
        self.compose(Kernel::Recip)
    }

    pub fn div(&self, other: &Jet) -> Result<Jet, JetError> {
        if other.coeffs[0] == 0.0 {
            return Err(JetError::ZeroDivisor);
        }
        self.mul(&other.recip()?)
    }

    /// Integer power by repeated multiplication (valid for any constant term).
    pub fn powi(&self, mut e: i64) -> Result<Jet, JetError> {
        if e < 0 {
            return self.recip()?.powi(-e);
        }
        let mut out = Jet::constant(1.0, self.shape.nvars, self.shape.order);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                out = out.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(out)
    }
}

/// Analytic kernels available for composition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    Sqrt,
    Exp,
    Log,
    Sin,
    Cos,
    Tanh,
    Pow(f64),
    Recip,
}

impl Kernel {
    pub fn name(&self) -> &'static str {
        match self {
            Kernel::Sqrt => "sqrt",
            Kernel::Exp => "exp",
            Kernel::Log => "log",
            Kernel::Sin => "sin",
            Kernel::Cos => "cos",
            Kernel::Tanh => "tanh",
            Kernel::Pow(_) => "pow",
            Kernel::Recip => "recip",
        }
    }

    /// Taylor coefficients `f^(k)(c)/k!` for `k = 0..=d`.
    pub fn taylor_coeffs(&self, c: f64, d: usize) -> Result<Vec<f64>, JetError> {
        let domain = |ok: bool| {
            if ok {
                Ok(())
            } else {
                Err(JetError::Domain { kernel: self.name(), value: c })
            }
        };
        let mut t = vec![0.0; d + 1];
        match *self {
            Kernel::Exp => {
                let e = c.exp();
                let mut fact = 1.0;
                for k in 0..=d {
                    if k > 0 {
                        fact *= k as f64;
                    }
                    t[k] = e / fact;
                }
            }
            Kernel::Log => {
                domain(c > 0.0)?;
                t[0] = c.ln();
                // d^k/dx^k log = (-1)^{k-1} (k-1)! / x^k
                let mut sign = 1.0;
                for k in 1..=d {
                    t[k] = sign / (k as f64 * c.powi(k as i32));
                    sign = -sign;
                }
            }
            Kernel::Sin | Kernel::Cos => {
                let (s, co) = c.sin_cos();
                // derivative cycle sin -> cos -> -sin -> -cos
                let cycle = if matches!(self, Kernel::Sin) {
                    [s, co, -s, -co]
                } else {
                    [co, -s, -co, s]
                };
                let mut fact = 1.0;
                for k in 0..=d {
                    if k > 0 {
                        fact *= k as f64;
                    }
                    t[k] = cycle[k % 4] / fact;
                }
            }
            Kernel::Tanh => {
                // u' = 1 - u^2 drives the coefficient recurrence
                t[0] = c.tanh();
                for k in 0..d {
                    let mut conv = 0.0;
                    for j in 0..=k {
                        conv += t[j] * t[k - j];
                    }
                    let rhs = if k == 0 { 1.0 - conv } else { -conv };
                    t[k + 1] = rhs / (k as f64 + 1.0);
                }
            }
            Kernel::Sqrt => return Kernel::Pow(0.5).taylor_coeffs(c, d).map_err(|_| JetError::Domain { kernel: "sqrt", value: c }),
            Kernel::Recip => {
                domain(c != 0.0)?;
                let mut p = 1.0 / c;
                for k in 0..=d {
                    t[k] = p;
                    p *= -1.0 / c;
                }
            }
            Kernel::Pow(p) => {
                if p.fract() == 0.0 && p >= 0.0 {
                    // polynomial case, valid for any c
                    let mut binom = 1.0;
                    for k in 0..=d {
                        if k as f64 > p {
                            t[k] = 0.0;
                            continue;
                        }
                        t[k] = binom * c.powf(p - k as f64);
                        binom *= (p - k as f64) / (k as f64 + 1.0);
                    }
                } else {
                    domain(c > 0.0)?;
                    let mut binom = 1.0;
                    for k in 0..=d {
                        t[k] = binom * c.powf(p - k as f64);
                        binom *= (p - k as f64) / (k as f64 + 1.0);
                    }
                }
            }
        }
        Ok(t)
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 0..k {
        num *= (n - i) as u128;
        den *= (i + 1) as u128;
    }
    (num / den) as usize
}
