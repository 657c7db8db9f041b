//! Riemann–Liouville fractional integrals and derivatives.
//!
//! With h = x - a the integral is written as
//! I^λ f(x) = h^λ / Γ(λ) ∫_0^1 t^{λ-1} f(a + h(1 - t)) dt,
//! so the Abel kernel becomes the Jacobi weight t^{λ-1}. Generalized
//! polynomials Σ c (x - a)^e go through the power rule instead.
//!
//! Derivatives of order μ use n = ⌈μ⌉ symbolic derivatives inside an
//! integral of order n - μ plus the boundary series at a. When f or one of
//! its first n - 1 derivatives blows up at a, the boundary series is
//! unavailable; the derivative is then taken as
//! D^μ f = h^{-μ} J_{n-μ}[(θ + n - μ)(θ + n - μ - 1)…(θ + 1 - μ) f]
//! with the Euler operator θ = (y - a) d/dy, which needs only integrability
//! of f at a.

use std::cell::RefCell;

use crate::error::{Error, Result};
use crate::expr::{Expr, PowerTerm};
use crate::numerics::{is_integer, KahanSum};
use crate::quadrature::{jacobi_rule, tanh_sinh};
use crate::specfun::{gamma, gamma_recip, ln_gamma_recip_signed, ln_gamma_signed, MlTolerances};

/// Evaluation options.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracOptions {
    /// Skip the power-rule fast path.
    pub force_quadrature: bool,
    /// Target for quadrature, relative to ∫|integrand|.
    pub rel_tol: f64,
    /// Gauss–Jacobi nodes; a rule with 3/4 as many nodes is the check.
    pub nodes: usize,
    pub ml: MlTolerances,
}

impl Default for FracOptions {
    fn default() -> Self {
        Self { force_quadrature: false, rel_tol: 1e-12, nodes: 64, ml: MlTolerances::default() }
    }
}

impl FracOptions {
    pub fn quadrature_only() -> Self {
        Self { force_quadrature: true, ..Self::default() }
    }
}

/// How a value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FracMethod {
    Identity,
    Symbolic,
    PowerRule,
    GaussJacobi,
    TanhSinh,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracValue {
    pub value: f64,
    pub method: FracMethod,
}

/// Γ(a) / Γ(b); zero when b is a pole of Γ.
pub fn gamma_ratio(a: f64, b: f64) -> f64 {
    if a.abs() < 170.0 && b.abs() < 170.0 {
        return gamma(a) * gamma_recip(b);
    }
    let (la, sa) = ln_gamma_signed(a);
    let (lb, sb) = ln_gamma_recip_signed(b);
    if sb == 0.0 {
        return 0.0;
    }
    sa * sb * (la + lb).exp()
}

/// I^λ (λ of either sign) of Σ c (x - a)^e at distance h = x - a.
pub fn power_rule(terms: &[PowerTerm], lambda: f64, h: f64) -> Result<f64> {
    let mut acc = KahanSum::new();
    for t in terms {
        if t.exponent <= -1.0 {
            return Err(Error::BoundarySingularity(format!(
                "term (x - a)^{} is not integrable at the terminal",
                t.exponent
            )));
        }
        let e = t.exponent;
        acc.add(t.coeff * gamma_ratio(e + 1.0, e + 1.0 + lambda) * h.powf(e + lambda));
    }
    Ok(acc.value())
}

fn check_args(a: f64, order: f64, x: f64) -> Result<()> {
    if !(a.is_finite() && x.is_finite()) {
        return Err(Error::Domain(format!("terminal and point must be finite (a = {a}, x = {x})")));
    }
    if x <= a {
        return Err(Error::Domain(format!("point x = {x} must lie above the terminal a = {a}")));
    }
    if !(order.is_finite() && order >= 0.0) {
        return Err(Error::Domain(format!("operator order must be a finite non-negative number, got {order}")));
    }
    Ok(())
}

/// (1/Γ(ν)) ∫_0^1 t^{ν-1} g(a + h(1 - t)) dt. The integrand receives y and
/// the exact offset y - a.
fn abel_mean(
    g: &dyn Fn(f64, f64) -> Result<f64>,
    a: f64,
    h: f64,
    nu: f64,
    opts: &FracOptions,
) -> Result<FracValue> {
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let eval = |d: f64| -> f64 {
        match g(a + d, d) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    };
    let gauss = |n: usize| -> Result<(f64, f64)> {
        let rule = jacobi_rule(n, nu - 1.0, 0.0)?;
        let mut acc = KahanSum::new();
        let mut l1 = 0.0;
        for (t, w) in rule.nodes.iter().zip(&rule.weights) {
            let v = w * eval(h * (1.0 - t));
            acc.add(v);
            l1 += v.abs();
        }
        Ok((acc.value(), l1))
    };
    let (fine, l1) = gauss(opts.nodes)?;
    let (coarse, _) = gauss(opts.nodes * 3 / 4)?;
    if let Some(e) = failure.borrow_mut().take() {
        return Err(e);
    }
    let scale = gamma_recip(nu);
    if fine.is_finite() && (fine - coarse).abs() <= opts.rel_tol * l1 {
        return Ok(FracValue { value: fine * scale, method: FracMethod::GaussJacobi });
    }
    let integrand = |_t: f64, dl: f64, dr: f64| -> f64 {
        let v = eval(h * dr);
        if nu == 1.0 {
            v
        } else {
            dl.powf(nu - 1.0) * v
        }
    };
    let result = tanh_sinh(integrand, 0.0, 1.0, opts.rel_tol);
    if let Some(e) = failure.borrow_mut().take() {
        return Err(e);
    }
    Ok(FracValue { value: result? * scale, method: FracMethod::TanhSinh })
}

/// I^λ f(x) for λ ≥ 0 with default options.
pub fn rl_integral(f: &Expr, a: f64, lambda: f64, x: f64) -> Result<f64> {
    rl_integral_with(f, a, lambda, x, &FracOptions::default()).map(|v| v.value)
}

pub fn rl_integral_with(f: &Expr, a: f64, lambda: f64, x: f64, opts: &FracOptions) -> Result<FracValue> {
    check_args(a, lambda, x)?;
    if lambda == 0.0 {
        return Ok(FracValue { value: f.eval_with(x, &opts.ml)?, method: FracMethod::Identity });
    }
    let h = x - a;
    if !opts.force_quadrature {
        if let Some(terms) = f.power_sum(a) {
            return Ok(FracValue { value: power_rule(&terms, lambda, h)?, method: FracMethod::PowerRule });
        }
    }
    let g = |y: f64, _d: f64| f.eval_with(y, &opts.ml);
    let j = abel_mean(&g, a, h, lambda, opts)?;
    Ok(FracValue { value: h.powf(lambda) * j.value, method: j.method })
}

/// I^λ g(x) for an arbitrary integrand, always by quadrature.
pub fn rl_integral_fn(
    g: &dyn Fn(f64) -> Result<f64>,
    a: f64,
    lambda: f64,
    x: f64,
    opts: &FracOptions,
) -> Result<f64> {
    check_args(a, lambda, x)?;
    if lambda == 0.0 {
        return g(x);
    }
    let h = x - a;
    let j = abel_mean(&|y, _| g(y), a, h, lambda, opts)?;
    Ok(h.powf(lambda) * j.value)
}

/// D^μ f(x) for μ ≥ 0 with default options.
pub fn frac_derivative(f: &Expr, a: f64, mu: f64, x: f64) -> Result<f64> {
    frac_derivative_with(f, a, mu, x, &FracOptions::default()).map(|v| v.value)
}

pub fn frac_derivative_with(f: &Expr, a: f64, mu: f64, x: f64, opts: &FracOptions) -> Result<FracValue> {
    check_args(a, mu, x)?;
    if mu == 0.0 {
        return Ok(FracValue { value: f.eval_with(x, &opts.ml)?, method: FracMethod::Identity });
    }
    if is_integer(mu) {
        let d = f.nth_derivative(mu as usize);
        return Ok(FracValue { value: d.eval_with(x, &opts.ml)?, method: FracMethod::Symbolic });
    }
    let h = x - a;
    if !opts.force_quadrature {
        if let Some(terms) = f.power_sum(a) {
            return Ok(FracValue { value: power_rule(&terms, -mu, h)?, method: FracMethod::PowerRule });
        }
    }
    let n = mu.ceil() as usize;
    let nu = n as f64 - mu;
    let mut derivs = Vec::with_capacity(n + 1);
    derivs.push(f.clone());
    for k in 1..=n {
        derivs.push(derivs[k - 1].derivative());
    }
    let boundary: Option<Vec<f64>> = derivs[..n]
        .iter()
        .map(|d| d.eval_with(a, &opts.ml).ok().filter(|v| v.is_finite()))
        .collect();
    if let Some(values) = boundary {
        let fn_ = &derivs[n];
        let g = |y: f64, _d: f64| fn_.eval_with(y, &opts.ml);
        let j = abel_mean(&g, a, h, nu, opts)?;
        let mut acc = KahanSum::new();
        acc.add(h.powf(nu) * j.value);
        for (k, v) in values.iter().enumerate() {
            if *v != 0.0 {
                acc.add(h.powf(k as f64 - mu) * v * gamma_recip(1.0 + k as f64 - mu));
            }
        }
        return Ok(FracValue { value: acc.value(), method: j.method });
    }
    // Euler-operator form: needs only integrability of f at a.
    let theta_shift = Expr::x().sub(&Expr::constant(a));
    let mut g = f.clone();
    for j in (0..n).rev() {
        let c = nu - j as f64;
        g = theta_shift.mul(&g.derivative()).add(&g.scale(c));
    }
    let integrand = |y: f64, _d: f64| g.eval_with(y, &opts.ml);
    let j = abel_mean(&integrand, a, h, nu, opts).map_err(|e| match e {
        Error::QuadratureFailure(m) => Error::BoundarySingularity(format!(
            "derivative of order {mu} diverges at the terminal a = {a}: {m}"
        )),
        other => other,
    })?;
    let value = h.powf(-mu) * j.value;
    if !value.is_finite() {
        return Err(Error::BoundarySingularity(format!("derivative of order {mu} is not finite at x = {x}")));
    }
    Ok(FracValue { value, method: j.method })
}

/// The unified operator I^λ = D^{-λ} for real λ.
pub fn rl_signed(f: &Expr, a: f64, lambda: f64, x: f64) -> Result<f64> {
    rl_signed_with(f, a, lambda, x, &FracOptions::default()).map(|v| v.value)
}

pub fn rl_signed_with(f: &Expr, a: f64, lambda: f64, x: f64, opts: &FracOptions) -> Result<FracValue> {
    if lambda >= 0.0 {
        rl_integral_with(f, a, lambda, x, opts)
    } else {
        frac_derivative_with(f, a, -lambda, x, opts)
    }
}
