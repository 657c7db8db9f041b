//! Generalized (three-parameter) Mittag-Leffler function
//! E^λ_{p,b}(z) = Σ_k (λ)_k z^k / (k! Γ(pk + b)).
//!
//! Evaluation strategy for real arguments:
//! * z ≥ 0: the defining series.
//! * z = -x < 0: the series while it is well conditioned, Kummer's
//!   transformation for p = 1, the algebraic asymptotic expansion for large x,
//!   and for p ≤ 1 a Bromwich-integral inversion of the Laplace transform
//!   s^{-b} (1 + s^{-p})^{-λ} on a parabolic contour.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::gamma::{gamma_recip, ln_gamma_recip_signed, rising};
use crate::error::{Error, Result};
use crate::numerics::{is_integer, KahanSum};

/// Parameter triple (λ, p, b) of E^λ_{p,b}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MLSpec {
    pub lambda: f64,
    pub p: f64,
    pub b: f64,
}

impl MLSpec {
    pub fn new(lambda: f64, p: f64, b: f64) -> Result<Self> {
        if !(lambda.is_finite() && p.is_finite() && b.is_finite()) {
            return Err(Error::Invalid("Mittag-Leffler parameters must be finite".into()));
        }
        if p <= 0.0 {
            return Err(Error::Invalid(format!("Mittag-Leffler index p must be positive, got {p}")));
        }
        Ok(Self { lambda, p, b })
    }

    /// The spec of the n-th derivative: (λ + n, p, b + pn).
    pub fn shifted(&self, n: usize) -> Self {
        Self { lambda: self.lambda + n as f64, p: self.p, b: self.b + self.p * n as f64 }
    }

    fn terminating_degree(&self) -> Option<usize> {
        if self.lambda <= 0.0 && is_integer(self.lambda) {
            Some((-self.lambda) as usize)
        } else {
            None
        }
    }
}

/// Tolerances for the evaluator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlTolerances {
    /// Relative target for series truncation.
    pub eps_ml: f64,
    /// Absolute slack used by sign checks downstream.
    pub eps_abs: f64,
    /// Above this |z| (negative arguments) the asymptotic expansion is tried first.
    pub z_switch: f64,
    /// Term cap for the power series.
    pub max_terms: usize,
    /// Half the number of nodes on the inversion contour.
    pub contour_nodes: usize,
}

impl Default for MlTolerances {
    fn default() -> Self {
        Self { eps_ml: 1e-12, eps_abs: 1e-10, z_switch: 50.0, max_terms: 10_000, contour_nodes: 20 }
    }
}

/// Which branch produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MlMethod {
    Series,
    Polynomial,
    Kummer,
    Asymptotic,
    ContourInversion,
}

/// A value together with the branch that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlValue {
    pub value: f64,
    pub method: MlMethod,
}

/// Series output with its condition number Σ|term| / |Σ term|.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesOut {
    pub value: f64,
    pub cond: f64,
    pub terms: usize,
}

const COND_GOOD: f64 = 1e3;
const COND_USABLE: f64 = 1e6;
const KUMMER_MAX_X: f64 = 650.0;

/// z^k / Γ(pk + b), switching to logs when the pieces overflow.
fn zk_over_gamma(z: f64, ln_abs_z: f64, k: usize, arg: f64) -> f64 {
    if k == 0 {
        return gamma_recip(arg);
    }
    let ln_mag = k as f64 * ln_abs_z;
    if arg.abs() < 170.0 && ln_mag.abs() < 700.0 {
        return z.powi(k as i32) * gamma_recip(arg);
    }
    let (lr, s) = ln_gamma_recip_signed(arg);
    if s == 0.0 {
        return 0.0;
    }
    let sign = if z < 0.0 && k % 2 == 1 { -s } else { s };
    sign * (ln_mag + lr).exp()
}

/// Power series with Kahan summation. Stops after three consecutive
/// decreasing terms below `eps_ml` times the partial sum; terminating
/// polynomials (λ a non-positive integer) are summed exactly.
pub fn ml_series(spec: &MLSpec, z: f64, tol: &MlTolerances) -> Result<SeriesOut> {
    let MLSpec { lambda, p, b } = *spec;
    if z == 0.0 {
        return Ok(SeriesOut { value: gamma_recip(b), cond: 1.0, terms: 1 });
    }
    let degree = spec.terminating_degree();
    let kmax = degree.unwrap_or(tol.max_terms);
    let lnz = z.abs().ln();
    let mut acc = KahanSum::new();
    let mut abs_acc = 0.0;
    let mut r = 1.0_f64;
    let mut small = 0usize;
    let mut prev = f64::INFINITY;
    for k in 0..=kmax {
        if k > 0 {
            r *= (lambda + (k - 1) as f64) / k as f64;
        }
        let term = if r == 0.0 { 0.0 } else { r * zk_over_gamma(z, lnz, k, p * k as f64 + b) };
        if !term.is_finite() {
            return Err(Error::Overflow(format!("series term {k} for {spec:?} at z={z}")));
        }
        acc.add(term);
        abs_acc += term.abs();
        if degree.is_none() {
            let s = acc.value().abs();
            let a = term.abs();
            if s > 0.0 && a <= tol.eps_ml * s && a <= prev {
                small += 1;
                if small >= 3 {
                    return Ok(finish(acc.value(), abs_acc, k + 1));
                }
            } else {
                small = 0;
            }
            prev = a;
        }
    }
    match degree {
        Some(d) => Ok(finish(acc.value(), abs_acc, d + 1)),
        None => Err(Error::NonConvergence(format!(
            "series for {spec:?} at z={z} exceeded {} terms",
            tol.max_terms
        ))),
    }
}

fn finish(value: f64, abs_acc: f64, terms: usize) -> SeriesOut {
    let cond = if value != 0.0 {
        abs_acc / value.abs()
    } else if abs_acc == 0.0 {
        1.0
    } else {
        f64::INFINITY
    };
    SeriesOut { value, cond, terms }
}

/// Kummer's transformation for p = 1:
/// E^λ_{1,b}(-x) = e^{-x} E^{b-λ}_{1,b}(x), whose series has no cancellation
/// when b ≥ λ and b > 0.
pub fn ml_kummer(spec: &MLSpec, x: f64, tol: &MlTolerances) -> Result<SeriesOut> {
    if spec.p != 1.0 {
        return Err(Error::Domain("Kummer transformation needs p = 1".into()));
    }
    let dual = MLSpec { lambda: spec.b - spec.lambda, p: 1.0, b: spec.b };
    let s = ml_series(&dual, x, tol)?;
    Ok(SeriesOut { value: (-x).exp() * s.value, cond: s.cond, terms: s.terms })
}

/// Algebraic asymptotic expansion of E^λ_{p,b}(-x) for large x:
/// Σ_k (-1)^k (λ)_k / (k! Γ(b - pλ - pk)) x^{-λ-k}.
/// Returns the value and a relative error estimate (smallest omitted term,
/// plus the exponentially small contribution for 1 < p < 2).
pub fn ml_asymptotic(spec: &MLSpec, x: f64, tol: &MlTolerances) -> Option<(f64, f64)> {
    let MLSpec { lambda, p, b } = *spec;
    if x <= 0.0 || p >= 2.0 {
        return None;
    }
    let lnx = x.ln();
    let mut acc = KahanSum::new();
    let mut r = 1.0_f64;
    let mut last_nonzero = f64::INFINITY;
    let mut err = f64::INFINITY;
    for k in 0..tol.max_terms {
        if k > 0 {
            r *= (lambda + (k - 1) as f64) / k as f64;
            if r == 0.0 {
                err = 0.0;
                break;
            }
        }
        let (lr, s) = ln_gamma_recip_signed(b - p * lambda - p * k as f64);
        if s == 0.0 {
            continue;
        }
        let sign = if k % 2 == 1 { -s } else { s } * r.signum();
        let mag = (r.abs().ln() + lr - (lambda + k as f64) * lnx).exp();
        if mag > last_nonzero {
            err = last_nonzero;
            break;
        }
        let sum = acc.value().abs();
        if sum > 0.0 && mag <= 0.01 * tol.eps_ml * sum {
            err = mag;
            break;
        }
        acc.add(sign * mag);
        last_nonzero = mag;
    }
    let value = acc.value();
    if value == 0.0 {
        return None;
    }
    let mut rel = err / value.abs();
    if p == 1.0 {
        // e^{-x} contribution missed by the algebraic series
        rel += (-x + (b.abs() + lambda.abs() + 1.0) * lnx).exp() / value.abs();
    } else if p > 1.0 {
        let y = x.powf(1.0 / p);
        let expo = (PI / p).cos() * y + ((1.0 - b).abs() / p + lambda.abs()) * lnx;
        rel += expo.exp() / value.abs();
    }
    Some((value, rel))
}

/// Bromwich inversion of s^{-b}(1 + s^{-p})^{-λ} on the parabola
/// s = μ(1 + iu)², trapezoidal rule with step 3/N. Valid for 0 < p ≤ 1.
pub fn ml_contour(spec: &MLSpec, x: f64, half_nodes: usize) -> Result<f64> {
    let MLSpec { lambda, p, b } = *spec;
    if p > 1.0 {
        return Err(Error::Domain("contour inversion needs p <= 1".into()));
    }
    if x <= 0.0 {
        return Err(Error::Domain("contour inversion needs a negative argument".into()));
    }
    let t = x.powf(1.0 / p);
    let n = half_nodes.max(4) as f64;
    let h = 3.0 / n;
    let mu = PI * n / (12.0 * t);
    let expo = p * lambda - b;
    let mut acc = KahanSum::new();
    for k in 0..=half_nodes.max(4) {
        let u = k as f64 * h;
        let w = Complex64::new(1.0, u);
        let s = w * w * mu;
        let ds = Complex64::new(0.0, 2.0 * mu) * w;
        let ln_s = s.ln();
        let ln_f = ln_s * expo - ((ln_s * p).exp() + 1.0).ln() * lambda;
        let g = (s * t + ln_f).exp() * ds;
        let weight = if k == 0 { 0.5 } else { 1.0 };
        acc.add(weight * g.im);
    }
    let f = h / PI * acc.value();
    let v = t.powf(1.0 - b) * f;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow(format!("contour inversion for {spec:?} at x={x}")))
    }
}

/// E^λ_{p,b}(z) with the default tolerances.
pub fn ml_eval(spec: &MLSpec, z: f64) -> Result<f64> {
    ml_eval_with(spec, z, &MlTolerances::default()).map(|v| v.value)
}

/// E^λ_{p,b}(z), reporting the branch used.
pub fn ml_eval_with(spec: &MLSpec, z: f64, tol: &MlTolerances) -> Result<MlValue> {
    if !z.is_finite() {
        return Err(Error::Domain(format!("Mittag-Leffler argument must be finite, got {z}")));
    }
    if z == 0.0 {
        return Ok(MlValue { value: gamma_recip(spec.b), method: MlMethod::Series });
    }
    if spec.terminating_degree().is_some() {
        let s = ml_series(spec, z, tol)?;
        return Ok(MlValue { value: s.value, method: MlMethod::Polynomial });
    }
    if z > 0.0 {
        let s = ml_series(spec, z, tol)?;
        if s.cond <= COND_USABLE {
            return Ok(MlValue { value: s.value, method: MlMethod::Series });
        }
        return Err(Error::NonConvergence(format!(
            "series for {spec:?} at z={z} is ill-conditioned (cond {:.3e})",
            s.cond
        )));
    }
    let x = -z;
    let p = spec.p;
    let asym = |tol: &MlTolerances| ml_asymptotic(spec, x, tol).filter(|(_, e)| *e <= tol.eps_ml);
    if x > tol.z_switch {
        if let Some((v, _)) = asym(tol) {
            return Ok(MlValue { value: v, method: MlMethod::Asymptotic });
        }
    }
    let mut fallback: Option<SeriesOut> = None;
    if x.powf(1.0 / p) <= 40.0 {
        if let Ok(s) = ml_series(spec, z, tol) {
            if s.cond <= COND_GOOD {
                return Ok(MlValue { value: s.value, method: MlMethod::Series });
            }
            fallback = Some(s);
        }
    }
    if p == 1.0 && x <= KUMMER_MAX_X {
        if let Ok(s) = ml_kummer(spec, x, tol) {
            if s.cond <= COND_GOOD {
                return Ok(MlValue { value: s.value, method: MlMethod::Kummer });
            }
        }
    }
    if x <= tol.z_switch {
        if let Some((v, _)) = asym(tol) {
            return Ok(MlValue { value: v, method: MlMethod::Asymptotic });
        }
    }
    if p <= 1.0 {
        let v = ml_contour(spec, x, tol.contour_nodes)?;
        return Ok(MlValue { value: v, method: MlMethod::ContourInversion });
    }
    match fallback {
        Some(s) if s.cond <= COND_USABLE => Ok(MlValue { value: s.value, method: MlMethod::Series }),
        _ => Err(Error::NonConvergence(format!(
            "no branch reached tolerance for {spec:?} at z={z}"
        ))),
    }
}

/// d^k/dw^k E^λ_{p,b}(w) = (λ)_k E^{λ+k}_{p,b+pk}(w).
pub fn ml_dw(spec: &MLSpec, w: f64, k: usize, tol: &MlTolerances) -> Result<f64> {
    let c = rising(spec.lambda, k);
    if c == 0.0 {
        return Ok(0.0);
    }
    Ok(c * ml_eval_with(&spec.shifted(k), w, tol)?.value)
}

/// d^n/dz^n E^λ_{p,b}(-z) = (-1)^n (λ)_n E^{λ+n}_{p,b+pn}(-z).
pub fn ml_derivative(spec: &MLSpec, z: f64, n: usize) -> Result<f64> {
    ml_derivative_with(spec, z, n, &MlTolerances::default())
}

pub fn ml_derivative_with(spec: &MLSpec, z: f64, n: usize, tol: &MlTolerances) -> Result<f64> {
    let sign = if n % 2 == 1 { -1.0 } else { 1.0 };
    Ok(sign * ml_dw(spec, -z, n, tol)?)
}

/// E^{-ξ}_{p,b}(z) for ξ = -λ ≥ 0, split into the polynomial part of degree
/// ⌊ξ⌋ and the tail series (δ)_{⌊ξ⌋+1} (-z)^{⌊ξ⌋+1} Σ_k (1-δ)_k z^k /
/// (Γ(pk + b̂) (k + ⌊ξ⌋ + 1)!), with δ = ξ - ⌊ξ⌋ and b̂ = p(⌊ξ⌋+1) + b.
pub fn ml_neg_order_split(spec: &MLSpec, z: f64) -> Result<f64> {
    ml_neg_order_split_with(spec, z, &MlTolerances::default())
}

pub fn ml_neg_order_split_with(spec: &MLSpec, z: f64, tol: &MlTolerances) -> Result<f64> {
    let xi = -spec.lambda;
    if xi < 0.0 {
        return Err(Error::Domain(format!("negative-order split needs λ <= 0, got {}", spec.lambda)));
    }
    let MLSpec { p, b, .. } = *spec;
    let mu = xi.floor() as usize;
    let delta = xi - mu as f64;
    let lnz = z.abs().ln();
    let mut poly = KahanSum::new();
    let mut c = 1.0;
    for k in 0..=mu {
        if k > 0 {
            c *= (xi - (k - 1) as f64) / k as f64;
        }
        let t = if z == 0.0 && k > 0 { 0.0 } else { c * zk_over_gamma(-z, lnz, k, p * k as f64 + b) };
        poly.add(t);
    }
    if delta == 0.0 || z == 0.0 {
        return Ok(poly.value());
    }
    let m1 = mu + 1;
    let bhat = p * m1 as f64 + b;
    let lead = rising(delta, m1) * (-z).powi(m1 as i32);
    let mut q = 1.0 / super::gamma::factorial(m1);
    let mut tail = KahanSum::new();
    let mut small = 0;
    let mut prev = f64::INFINITY;
    for j in 0..tol.max_terms {
        if j > 0 {
            q *= (1.0 - delta + (j - 1) as f64) / (j + m1) as f64;
        }
        let term = q * zk_over_gamma(z, lnz, j, p * j as f64 + bhat);
        tail.add(term);
        let s = tail.value().abs();
        let a = term.abs();
        if s > 0.0 && a <= tol.eps_ml * s && a <= prev {
            small += 1;
            if small >= 3 {
                return Ok(poly.value() + lead * tail.value());
            }
        } else {
            small = 0;
        }
        prev = a;
    }
    Err(Error::NonConvergence(format!("negative-order tail for {spec:?} at z={z}")))
}
