//! Truncated Taylor series ("jets") of expressions.
//!
//! A jet at x0 with scale h holds c_k = f^{(k)}(x0) h^k / k!, the Taylor
//! coefficients in the scaled variable u where x = x0 + h u. Choosing h ≈ x0
//! keeps high-order coefficients in range where raw derivatives overflow.
//! Every jet carries a second series of magnitudes, built from the same
//! recurrences with absolute values, which bounds the size of the terms that
//! cancelled into each coefficient. Sign tests use it as the rounding scale.

use super::{pow_real, Expr, Node};
use crate::error::{Error, Result};
use crate::specfun::{gamma_recip, ml_eval_with, MlTolerances};

/// Coefficients and magnitudes of a truncated Taylor series.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub coeffs: Vec<f64>,
    pub mags: Vec<f64>,
    pub scale: f64,
}

fn cauchy(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut out = vec![0.0; n];
    for i in 0..n {
        if a[i] == 0.0 {
            continue;
        }
        for j in 0..n - i {
            out[i + j] += a[i] * b[j];
        }
    }
    out
}

/// Σ_j d_j δ^j by Horner's rule; δ must have zero constant term.
fn compose(outer: &[f64], delta: &[f64]) -> Vec<f64> {
    let n = delta.len();
    let mut acc = vec![0.0; n];
    for d in outer.iter().rev() {
        acc = cauchy(&acc, delta);
        acc[0] += d;
    }
    acc
}

impl Jet {
    /// Derivative f^{(k)}(x0), recovered from the scaled coefficient.
    pub fn derivative(&self, k: usize) -> f64 {
        let ln = crate::specfun::ln_factorial(k) - k as f64 * self.scale.ln();
        self.coeffs[k] * ln.exp()
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    fn constant(c: f64, order: usize, scale: f64) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = c;
        let mags = coeffs.iter().map(|v| v.abs()).collect();
        Jet { coeffs, mags, scale }
    }

    fn unary(&self, outer: Vec<f64>) -> Self {
        let mut delta = self.coeffs.clone();
        delta[0] = 0.0;
        let mut dmag = self.mags.clone();
        dmag[0] = 0.0;
        let abs_outer: Vec<f64> = outer.iter().map(|v| v.abs()).collect();
        Jet { coeffs: compose(&outer, &delta), mags: compose(&abs_outer, &dmag), scale: self.scale }
    }
}

impl Expr {
    /// Jet of order `order` at `x0` with scale `h > 0`.
    pub fn jet(&self, x0: f64, h: f64, order: usize) -> Result<Jet> {
        self.jet_with(x0, h, order, &MlTolerances::default())
    }

    pub fn jet_with(&self, x0: f64, h: f64, order: usize, tol: &MlTolerances) -> Result<Jet> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Invalid(format!("jet scale must be positive, got {h}")));
        }
        let n = order + 1;
        Ok(match self.node() {
            Node::Const(c) => Jet::constant(*c, order, h),
            Node::X => {
                let mut j = Jet::constant(x0, order, h);
                if order >= 1 {
                    j.coeffs[1] = h;
                    j.mags[1] = h;
                }
                j
            }
            Node::Add(a, b) => {
                let (ja, jb) = (a.jet_with(x0, h, order, tol)?, b.jet_with(x0, h, order, tol)?);
                Jet {
                    coeffs: (0..n).map(|k| ja.coeffs[k] + jb.coeffs[k]).collect(),
                    mags: (0..n).map(|k| ja.mags[k] + jb.mags[k]).collect(),
                    scale: h,
                }
            }
            Node::Mul(a, b) => {
                let (ja, jb) = (a.jet_with(x0, h, order, tol)?, b.jet_with(x0, h, order, tol)?);
                Jet { coeffs: cauchy(&ja.coeffs, &jb.coeffs), mags: cauchy(&ja.mags, &jb.mags), scale: h }
            }
            Node::Pow(u, alpha) => {
                let ju = u.jet_with(x0, h, order, tol)?;
                let u0 = ju.coeffs[0];
                let mut outer = vec![0.0; n];
                if u0 == 0.0 {
                    // Only polynomial powers are analytic at zero.
                    if *alpha >= 0.0 && crate::numerics::is_integer(*alpha) {
                        let k = *alpha as usize;
                        if k < n {
                            outer[k] = 1.0;
                        }
                    } else {
                        return Err(Error::Domain(format!("pow(u, {alpha}) is not analytic where u = 0")));
                    }
                } else {
                    outer[0] = pow_real(u0, *alpha);
                    for j in 1..n {
                        outer[j] = outer[j - 1] * (alpha - (j - 1) as f64) / (j as f64 * u0);
                    }
                }
                ju.unary(outer)
            }
            Node::Exp(u) => {
                let ju = u.jet_with(x0, h, order, tol)?;
                let mut outer = vec![ju.coeffs[0].exp(); n];
                for j in 1..n {
                    outer[j] = outer[j - 1] / j as f64;
                }
                ju.unary(outer)
            }
            Node::Log(u) => {
                let ju = u.jet_with(x0, h, order, tol)?;
                let u0 = ju.coeffs[0];
                let mut outer = vec![u0.ln(); n];
                let mut pw = 1.0;
                for j in 1..n {
                    pw /= u0;
                    outer[j] = if j % 2 == 1 { pw } else { -pw } / j as f64;
                }
                ju.unary(outer)
            }
            Node::Ml(spec, u) => {
                let ju = u.jet_with(x0, h, order, tol)?;
                let u0 = ju.coeffs[0];
                let mut outer = vec![0.0; n];
                // (λ)_j / j! accumulated alongside the shifted evaluations.
                let mut c = 1.0;
                for (j, slot) in outer.iter_mut().enumerate() {
                    if j > 0 {
                        c *= (spec.lambda + (j - 1) as f64) / j as f64;
                    }
                    if c == 0.0 {
                        break;
                    }
                    let s = spec.shifted(j);
                    let e = if u0 == 0.0 { gamma_recip(s.b) } else { ml_eval_with(&s, u0, tol)?.value };
                    *slot = c * e;
                }
                ju.unary(outer)
            }
        })
    }
}
