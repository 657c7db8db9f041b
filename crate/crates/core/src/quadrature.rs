//! Gaussian quadrature rules and adaptive drivers.
//!
//! Jacobi rules come from the Golub–Welsch eigenvalue problem, solved with
//! an implicit QL sweep that tracks only the first eigenvector components.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::numerics::KahanSum;
use crate::specfun::{gamma, gamma_recip};

/// Nodes and weights of a rule on [0, 1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Σ w_i g(t_i).
    pub fn apply(&self, mut g: impl FnMut(f64) -> f64) -> f64 {
        let mut acc = KahanSum::new();
        for (t, w) in self.nodes.iter().zip(&self.weights) {
            acc.add(w * g(*t));
        }
        acc.value()
    }
}

/// Eigen-decomposition of a symmetric tridiagonal matrix: returns the
/// eigenvalues and the first component of each normalised eigenvector.
fn tridiagonal_eigen(diag: &[f64], off: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(&off[..n - 1]);
    let mut z = vec![0.0; n];
    z[0] = 1.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::QuadratureFailure("QL iteration did not converge".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let fz = z[i + 1];
                z[i + 1] = s * z[i] + c * fz;
                z[i] = c * z[i] - s * fz;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok((d, z))
}

/// n-point Gauss–Jacobi rule for ∫_0^1 t^c (1-t)^d g(t) dt, c, d > -1.
pub fn gauss_jacobi_01(n: usize, c: f64, d: f64) -> Result<GaussRule> {
    if n == 0 || c <= -1.0 || d <= -1.0 {
        return Err(Error::Domain(format!("Gauss–Jacobi needs n>0 and exponents > -1 (c={c}, d={d})")));
    }
    // Jacobi weight (1-x)^α (1+x)^β on [-1, 1] with t = (1+x)/2
    let (al, be) = (d, c);
    let ab = al + be;
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n];
    diag[0] = (be - al) / (ab + 2.0);
    for k in 1..n {
        let kf = k as f64;
        let s = 2.0 * kf + ab;
        diag[k] = (be * be - al * al) / (s * (s + 2.0));
    }
    for k in 1..n {
        let kf = k as f64;
        let s = 2.0 * kf + ab;
        let b2 = if k == 1 {
            4.0 * (1.0 + al) * (1.0 + be) / ((2.0 + ab).powi(2) * (3.0 + ab))
        } else {
            4.0 * kf * (kf + al) * (kf + be) * (kf + ab) / (s * s * (s + 1.0) * (s - 1.0))
        };
        off[k - 1] = b2.sqrt();
    }
    let (x, z0) = tridiagonal_eigen(&diag, &off)?;
    // μ0 on [-1,1] then rescaled by 2^{-(c+d+1)} for [0,1]
    let mu0_01 = gamma(al + 1.0) * gamma(be + 1.0) * gamma_recip(ab + 2.0);
    let mut pairs: Vec<(f64, f64)> =
        x.iter().zip(&z0).map(|(xi, zi)| ((1.0 + xi) / 2.0, mu0_01 * zi * zi)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(GaussRule { nodes: pairs.iter().map(|p| p.0).collect(), weights: pairs.iter().map(|p| p.1).collect() })
}

type RuleKey = (usize, u64, u64);

fn rule_cache() -> &'static Mutex<HashMap<RuleKey, Arc<GaussRule>>> {
    static CACHE: OnceLock<Mutex<HashMap<RuleKey, Arc<GaussRule>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Cached Gauss–Jacobi rule on [0, 1].
pub fn jacobi_rule(n: usize, c: f64, d: f64) -> Result<Arc<GaussRule>> {
    let key = (n, c.to_bits(), d.to_bits());
    if let Some(r) = rule_cache().lock().unwrap_or_else(|e| e.into_inner()).get(&key) {
        return Ok(r.clone());
    }
    let rule = Arc::new(gauss_jacobi_01(n, c, d)?);
    let mut cache = rule_cache().lock().unwrap_or_else(|e| e.into_inner());
    if cache.len() > 4096 {
        cache.clear();
    }
    cache.insert(key, rule.clone());
    Ok(rule)
}

/// Cached Gauss–Legendre rule on [0, 1].
pub fn legendre_rule(n: usize) -> Arc<GaussRule> {
    jacobi_rule(n, 0.0, 0.0).expect("Legendre rule")
}

/// Settings for the adaptive Gauss–Legendre driver.
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions {
    pub nodes: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_depth: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self { nodes: 20, rel_tol: 1e-12, abs_tol: 1e-300, max_depth: 80 }
    }
}

fn gl_on(rule: &GaussRule, f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> f64 {
    let h = b - a;
    h * rule.apply(|t| if t <= 0.5 { f(a + h * t) } else { f(b - h * (1.0 - t)) })
}

/// Adaptive bisection with a fixed Gauss–Legendre rule. Intervals are
/// accepted when the rule on the interval agrees with the sum over its two
/// halves to within max(abs_tol, rel_tol |I|), with |I| the running
/// estimate of the whole integral. Integrable endpoint singularities are
/// resolved by repeated bisection toward the endpoint.
pub fn integrate_adaptive(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, opts: &AdaptiveOptions) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let rule = legendre_rule(opts.nodes);
    let whole = gl_on(&rule, &mut f, a, b);
    if !whole.is_finite() {
        return Err(Error::QuadratureFailure(format!("non-finite integrand on [{a}, {b}]")));
    }
    let mut scale = whole.abs();
    let mut acc = KahanSum::new();
    let mut stack = vec![(a, b, whole, 0usize)];
    while let Some((lo, hi, est, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = gl_on(&rule, &mut f, lo, mid);
        let right = gl_on(&rule, &mut f, mid, hi);
        let refined = left + right;
        if !refined.is_finite() {
            return Err(Error::QuadratureFailure(format!("non-finite integrand near [{lo}, {hi}]")));
        }
        scale = scale.max(refined.abs());
        let err = (refined - est).abs();
        if err <= opts.abs_tol.max(opts.rel_tol * scale) || mid == lo || mid == hi {
            acc.add(refined);
            continue;
        }
        if depth >= opts.max_depth {
            return Err(Error::QuadratureFailure(format!(
                "depth cap {} reached near [{lo:.3e}, {hi:.3e}] (error {err:.3e})",
                opts.max_depth
            )));
        }
        stack.push((lo, mid, left, depth + 1));
        stack.push((mid, hi, right, depth + 1));
    }
    Ok(acc.value())
}

/// Double-exponential (tanh-sinh) quadrature on [a, b] for integrands with
/// algebraic endpoint singularities. The integrand receives the abscissa and
/// its exact distances to both endpoints, so singular factors can be
/// evaluated without cancellation. Converged once successive levels differ
/// by at most `rel_tol` times ∫|f|.
pub fn tanh_sinh(
    mut f: impl FnMut(f64, f64, f64) -> f64,
    a: f64,
    b: f64,
    rel_tol: f64,
) -> Result<f64> {
    use std::f64::consts::FRAC_PI_2;
    const T_MAX: f64 = 6.5;
    if a == b {
        return Ok(0.0);
    }
    let half = 0.5 * (b - a);
    let mut eval = |t: f64| -> f64 {
        let u = FRAC_PI_2 * t.sinh();
        let e = (-2.0 * u.abs()).exp();
        let (near, far) = (2.0 * half * e / (1.0 + e), 2.0 * half / (1.0 + e));
        let (dl, dr) = if u >= 0.0 { (far, near) } else { (near, far) };
        // subnormal distances only add overflow risk, never accuracy
        if near < f64::MIN_POSITIVE {
            return 0.0;
        }
        let x = if u >= 0.0 { b - dr } else { a + dl };
        // sech²(u) = 4 e^{-2|u|} / (1 + e^{-2|u|})²
        let w = half * FRAC_PI_2 * t.cosh() * 4.0 * e / ((1.0 + e) * (1.0 + e));
        if w == 0.0 {
            return 0.0;
        }
        w * f(x, dl, dr)
    };
    let mut sum = KahanSum::new();
    let mut l1 = 0.0;
    let add = |v: f64, sum: &mut KahanSum, l1: &mut f64| {
        sum.add(v);
        *l1 += v.abs();
    };
    let mut h = 1.0;
    add(eval(0.0), &mut sum, &mut l1);
    let mut k = 1usize;
    while k as f64 * h <= T_MAX {
        let t = k as f64 * h;
        add(eval(t), &mut sum, &mut l1);
        add(eval(-t), &mut sum, &mut l1);
        k += 1;
    }
    let mut estimate = h * sum.value();
    for _level in 0..10 {
        h *= 0.5;
        let mut k = 1usize;
        while k as f64 * h <= T_MAX {
            let t = k as f64 * h;
            add(eval(t), &mut sum, &mut l1);
            add(eval(-t), &mut sum, &mut l1);
            k += 2;
        }
        let next = h * sum.value();
        if !next.is_finite() {
            return Err(Error::QuadratureFailure(format!("non-finite integrand on [{a}, {b}]")));
        }
        let diff = (next - estimate).abs();
        estimate = next;
        if diff <= rel_tol * h * l1 {
            return Ok(estimate);
        }
    }
    Err(Error::QuadratureFailure(format!(
        "tanh-sinh did not reach tolerance {rel_tol:e} on [{a}, {b}]"
    )))
}

/// ∫_a^∞ f over pieces [a, a+1], then doubling widths capped at `max_width`,
/// stopping once three consecutive pieces are negligible.
pub fn integrate_to_infinity(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    max_width: f64,
    opts: &AdaptiveOptions,
) -> Result<f64> {
    let mut acc = KahanSum::new();
    let mut lo = a;
    let mut width = 1.0f64.min(max_width);
    let mut quiet = 0;
    for i in 0..10_000 {
        let hi = lo + width;
        let piece = if i == 0 {
            tanh_sinh(|x, _, _| f(x), lo, hi, opts.rel_tol)?
        } else {
            integrate_adaptive(&mut f, lo, hi, opts)?
        };
        acc.add(piece);
        if piece.abs() <= opts.rel_tol * 1e-2 * acc.value().abs() || piece == 0.0 {
            quiet += 1;
            if quiet >= 3 {
                return Ok(acc.value());
            }
        } else {
            quiet = 0;
        }
        lo = hi;
        width = (2.0 * width).min(max_width);
    }
    Err(Error::QuadratureFailure("semi-infinite integral did not settle".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::beta_fn;

    #[test]
    fn legendre_integrates_polynomials() {
        let r = legendre_rule(10);
        for k in 0..20 {
            let v = r.apply(|t| t.powi(k));
            assert!((v - 1.0 / (k as f64 + 1.0)).abs() < 1e-14, "k={k}");
        }
    }

    #[test]
    fn jacobi_moments_match_beta_function() {
        for &(c, d) in &[(-0.5, 0.0), (0.3, -0.7), (-0.9, -0.9), (2.5, 1.5), (-0.25, 0.5)] {
            let r = gauss_jacobi_01(64, c, d).unwrap();
            for k in 0..40 {
                let v = r.apply(|t| t.powi(k));
                let exact = beta_fn(c + 1.0 + k as f64, d + 1.0);
                assert!(((v - exact) / exact).abs() < 1e-12, "c={c} d={d} k={k}: {v} vs {exact}");
            }
        }
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let v = integrate_adaptive(|x| x.powf(-0.5), 0.0, 1.0, &AdaptiveOptions::default()).unwrap();
        assert!((v - 2.0).abs() < 1e-10);
        let v = integrate_adaptive(|x| x.powf(-0.25) * (1.0 - x), 0.0, 1.0, &AdaptiveOptions::default()).unwrap();
        assert!((v - 1.0 / (0.75 * 1.75)).abs() < 1e-9);
    }

    #[test]
    fn tanh_sinh_strong_singularities() {
        let v = tanh_sinh(|_, dl, dr| dl.powf(-0.9) * dr.powf(-0.75), 0.0, 1.0, 1e-13).unwrap();
        let exact = beta_fn(0.1, 0.25);
        assert!(((v - exact) / exact).abs() < 1e-11, "{v} vs {exact}");
        let v = tanh_sinh(|x, _, _| x.exp(), -1.0, 2.0, 1e-14).unwrap();
        assert!((v - (2f64.exp() - (-1f64).exp())).abs() < 1e-13);
    }

    #[test]
    fn semi_infinite_exponential() {
        let v = integrate_to_infinity(|t| (-2.0 * t).exp() * t.powf(-0.5), 0.0, 4.0, &AdaptiveOptions::default())
            .unwrap();
        let exact = std::f64::consts::PI.sqrt() / 2f64.sqrt();
        assert!(((v - exact) / exact).abs() < 1e-11);
    }
}
