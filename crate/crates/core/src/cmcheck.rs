//! Complete-monotonicity tests and Post–Widder inversion.
//!
//! A function passes `cm_test` when (-1)ⁿ f⁽ⁿ⁾(x) ≥ -ε at every sampled
//! order and point. Sampling can only refute complete monotonicity, so a
//! pass always records the highest order that was checked.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::numerics::{log_grid, KahanSum};
use crate::specfun::{binomial, ln_factorial};

pub use crate::admodels::phi_from_r;

/// Largest Post–Widder order accepted.
pub const POST_WIDDER_CAP: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CmStatus {
    Pass,
    Fail,
    Inconclusive,
}

/// A sampled point where the sign condition fails: (-1)ⁿ f⁽ⁿ⁾(x) = value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub order: usize,
    pub x: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CMVerdict {
    pub status: CmStatus,
    pub max_order_checked: usize,
    pub witness: Option<Witness>,
    /// Smallest (-1)ⁿ f⁽ⁿ⁾ over all samples, relative to its magnitude estimate.
    pub min_margin: f64,
    /// Reason for an inconclusive verdict.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CMVerdict {
    pub fn passed(&self) -> bool {
        self.status == CmStatus::Pass
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CmOptions {
    /// Relative tolerance applied to the magnitude of each derivative.
    pub eps_abs: f64,
    /// Largest order accepted by [`cm_test`].
    pub symbolic_cap: usize,
}

impl Default for CmOptions {
    fn default() -> Self {
        Self { eps_abs: 1e-10, symbolic_cap: 16 }
    }
}

/// 40 log-spaced points in [1e-3, 1e3].
pub fn default_grid() -> Vec<f64> {
    log_grid(1e-3, 1e3, 40)
}

/// Scaled Taylor data at one point: `coeffs[k]` has the sign of f⁽ᵏ⁾(x) and
/// `mags[k]` bounds the rounding in it; `deriv(k)` recovers f⁽ᵏ⁾(x).
pub struct PointData {
    pub coeffs: Vec<f64>,
    pub mags: Vec<f64>,
    pub deriv: Box<dyn Fn(usize) -> f64>,
}

/// Sign test over a grid for any source of derivative data.
pub fn cm_test_with_data(
    mut data: impl FnMut(f64, usize) -> Result<PointData>,
    n_max: usize,
    grid: &[f64],
    opts: &CmOptions,
) -> CMVerdict {
    let mut min_margin = f64::INFINITY;
    let mut first_fail: Option<(usize, f64, f64)> = None; // (order, x, relative margin)
    let mut witness = None;
    let mut note = None;
    for &x in grid {
        if !(x.is_finite() && x > 0.0) {
            note.get_or_insert_with(|| format!("grid point {x} is not positive"));
            continue;
        }
        let d = match data(x, n_max) {
            Ok(d) => d,
            Err(e) => {
                note.get_or_insert_with(|| format!("evaluation failed at x = {x}: {e}"));
                continue;
            }
        };
        for n in 0..=n_max {
            let sign = if n % 2 == 1 { -1.0 } else { 1.0 };
            let signed = sign * d.coeffs[n];
            if !signed.is_finite() {
                note.get_or_insert_with(|| format!("non-finite derivative of order {n} at x = {x}"));
                break;
            }
            let scale = d.mags[n].max(d.coeffs[n].abs());
            let rel = if scale > 0.0 { signed / scale } else { 0.0 };
            min_margin = min_margin.min(rel);
            if signed < -opts.eps_abs * scale {
                let better = match first_fail {
                    None => true,
                    Some((order, _, m)) => n < order || (n == order && rel < m),
                };
                if better {
                    first_fail = Some((n, x, rel));
                    witness = Some(Witness { order: n, x, value: sign * (d.deriv)(n) });
                }
            }
        }
    }
    let status = match (&witness, &note) {
        (Some(_), _) => CmStatus::Fail,
        (None, Some(_)) => CmStatus::Inconclusive,
        (None, None) => CmStatus::Pass,
    };
    CMVerdict {
        status,
        max_order_checked: n_max,
        witness,
        min_margin: if min_margin.is_finite() { min_margin } else { 0.0 },
        note: if status == CmStatus::Inconclusive { note } else { None },
    }
}

/// Checks (-1)ⁿ f⁽ⁿ⁾(x) ≥ -ε for n ≤ `n_max` on `grid`.
pub fn cm_test(f: &Expr, n_max: usize, grid: &[f64]) -> Result<CMVerdict> {
    cm_test_with(f, n_max, grid, &CmOptions::default())
}

pub fn cm_test_with(f: &Expr, n_max: usize, grid: &[f64], opts: &CmOptions) -> Result<CMVerdict> {
    if n_max > opts.symbolic_cap {
        return Err(Error::DifferentiationDepthExceeded { requested: n_max, cap: opts.symbolic_cap });
    }
    Ok(cm_test_with_data(|x, n| expr_point(f, x, n), n_max, grid, opts))
}

fn expr_point(f: &Expr, x: f64, n: usize) -> Result<PointData> {
    let jet = f.jet(x, x, n)?;
    let (coeffs, mags) = (jet.coeffs.clone(), jet.mags.clone());
    Ok(PointData { coeffs, mags, deriv: Box::new(move |k| jet.derivative(k)) })
}

/// Checks (-1)ᵏ Δᵏ a_j ≥ -ε for k ≤ `k_max` and j ≤ m - k. Orders beyond the
/// length of the sequence are not checked.
pub fn cm_sequence_test(a: &[f64], k_max: usize) -> CMVerdict {
    cm_sequence_test_with(a, k_max, &CmOptions::default())
}

pub fn cm_sequence_test_with(a: &[f64], k_max: usize, opts: &CmOptions) -> CMVerdict {
    let k_max = k_max.min(a.len().saturating_sub(1));
    let mut min_margin = f64::INFINITY;
    let mut witness = None;
    'orders: for k in 0..=k_max {
        for j in 0..a.len() - k {
            // (-1)^k Δ^k a_j = Σ_i (-1)^i C(k,i) a_{j+i}
            let mut acc = KahanSum::new();
            let mut mag = 0.0;
            for i in 0..=k {
                let c = binomial(k as f64, i);
                let sign = if i % 2 == 1 { -1.0 } else { 1.0 };
                acc.add(sign * c * a[j + i]);
                mag += c * a[j + i].abs();
            }
            let v = acc.value();
            let rel = if mag > 0.0 { v / mag } else { 0.0 };
            min_margin = min_margin.min(rel);
            if v < -opts.eps_abs * mag.max(1.0) || v.is_nan() {
                witness = Some(Witness { order: k, x: j as f64, value: v });
                break 'orders;
            }
        }
    }
    CMVerdict {
        status: if witness.is_some() { CmStatus::Fail } else { CmStatus::Pass },
        max_order_checked: k_max,
        witness,
        min_margin: if min_margin.is_finite() { min_margin } else { 0.0 },
        note: None,
    }
}

/// n-th Post–Widder approximant ((-1)ⁿ/n!) (n/t)ⁿ⁺¹ F⁽ⁿ⁾(n/t) of the
/// inverse Laplace transform of F.
pub fn post_widder(f: &Expr, t: f64, n: usize) -> Result<f64> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::Domain(format!("t must be positive, got {t}")));
    }
    if n == 0 {
        return Err(Error::Invalid("the Post–Widder order must be at least 1".into()));
    }
    if n > POST_WIDDER_CAP {
        return Err(Error::DifferentiationDepthExceeded { requested: n, cap: POST_WIDDER_CAP });
    }
    let x0 = n as f64 / t;
    // With scale x0 the jet coefficient is F⁽ⁿ⁾(x0) x0ⁿ / n!, so the
    // factorial and the power never appear separately.
    let jet = f.jet(x0, x0, n)?;
    let sign = if n % 2 == 1 { -1.0 } else { 1.0 };
    let v = sign * x0 * jet.coeffs[n];
    if !v.is_finite() {
        return Err(Error::Overflow(format!("Post–Widder approximant of order {n} at t = {t}")));
    }
    Ok(v)
}

/// log |n-th Post–Widder approximant| and its sign, from a raw derivative.
pub fn post_widder_from_derivative(deriv: f64, t: f64, n: usize) -> (f64, f64) {
    let x0 = n as f64 / t;
    let ln = (n as f64 + 1.0) * x0.ln() - ln_factorial(n) + deriv.abs().ln();
    let sign = if n % 2 == 1 { -deriv.signum() } else { deriv.signum() };
    (ln, sign)
}
