//! Radial parts R(x), x = r², of separable augmented densities.
//!
//! Three kinds are supported: constant anisotropy R = x^{-β}, the
//! monotone family R = x^{-β₁}(1 + x^s)^{-ζ} with sζ = β₂ - β₁ (x measured
//! in units of r_a²), and arbitrary expressions. For each the derivative
//! sequence R_(n) = dⁿ(xⁿR)/dxⁿ and the inverse Laplace transform φ(t) of
//! 𝓡(w) = w^{-1} R(1/w) are available.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::numerics::KahanSum;
use crate::specfun::{binomial, gamma_recip, ln_factorial, ml_eval, rising, MLSpec};

/// Largest n for which R_(n) of the monotone family is built from
/// coefficient tables. The Stirling expansion adds positive terms only, so
/// the tables stay accurate until the entries approach overflow.
pub const COEFF_CAP: usize = 100;

/// Jet results whose magnitude series exceeds the value by more than this
/// factor are rejected as cancelled.
const JET_COND_MAX: f64 = 1e8;

/// Largest derivative order accepted for expression-based radial parts.
pub const CUSTOM_ORDER_CAP: usize = 256;

/// Largest order for which R_(n) of an expression is built symbolically.
pub const CUSTOM_SYMBOLIC_CAP: usize = 16;

/// Radial part of an augmented density.
#[derive(Debug, Clone, PartialEq)]
pub enum RadialModel {
    ConstantBeta { beta: f64 },
    GeneralFamily { beta1: f64, beta2: f64, s: f64, r_a: f64 },
    Custom { f: Expr },
}

/// Whether the criteria for a model are established.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Proven,
    /// s > 1: only numerical per-order checks are available.
    Unresolved,
    Custom,
}

fn check_beta(name: &str, b: f64) -> Result<()> {
    if !(b.is_finite() && b <= 1.0) {
        return Err(Error::Invalid(format!("{name} must be a finite number <= 1, got {b}")));
    }
    Ok(())
}

impl RadialModel {
    pub fn constant_beta(beta: f64) -> Result<Self> {
        check_beta("beta", beta)?;
        Ok(Self::ConstantBeta { beta })
    }

    pub fn general(beta1: f64, beta2: f64, s: f64, r_a: f64) -> Result<Self> {
        check_beta("beta1", beta1)?;
        check_beta("beta2", beta2)?;
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::Invalid(format!("s must be positive, got {s}")));
        }
        if !(r_a.is_finite() && r_a > 0.0) {
            return Err(Error::Invalid(format!("r_a must be positive, got {r_a}")));
        }
        Ok(Self::GeneralFamily { beta1, beta2, s, r_a })
    }

    pub fn custom(f: Expr) -> Self {
        Self::Custom { f }
    }

    /// True when φ(t) carries a δ-atom at t = 0 (β₁ = 1, or β = 1).
    pub fn atom_at_zero(&self) -> bool {
        match self {
            Self::ConstantBeta { beta } => *beta == 1.0,
            Self::GeneralFamily { beta1, .. } => *beta1 == 1.0,
            Self::Custom { .. } => false,
        }
    }

    pub fn regime(&self) -> Regime {
        match self {
            Self::ConstantBeta { .. } => Regime::Proven,
            Self::GeneralFamily { s, .. } if *s > 1.0 => Regime::Unresolved,
            Self::GeneralFamily { .. } => Regime::Proven,
            Self::Custom { .. } => Regime::Custom,
        }
    }

    /// ζ = (β₂ - β₁)/s for the monotone family, 0 otherwise.
    pub fn zeta(&self) -> f64 {
        match self {
            Self::GeneralFamily { beta1, beta2, s, .. } => (beta2 - beta1) / s,
            _ => 0.0,
        }
    }

    /// Central anisotropy lim_{x→0} β when it is known in closed form.
    pub fn beta0(&self) -> Option<f64> {
        match self {
            Self::ConstantBeta { beta } => Some(*beta),
            Self::GeneralFamily { beta1, .. } => Some(*beta1),
            Self::Custom { .. } => None,
        }
    }

    /// Length scale² used to make x dimensionless.
    fn x_unit(&self) -> f64 {
        match self {
            Self::GeneralFamily { r_a, .. } => r_a * r_a,
            _ => 1.0,
        }
    }

    /// R in the dimensionless variable x / r_a².
    fn scaled_expr(&self) -> Expr {
        let x = Expr::x();
        match self {
            Self::ConstantBeta { beta } => x.powf(-beta),
            Self::GeneralFamily { beta1, s, .. } => {
                x.powf(-beta1).mul(&Expr::constant(1.0).add(&x.powf(*s)).powf(-self.zeta()))
            }
            Self::Custom { f } => f.clone(),
        }
    }

    /// R(x) as an expression in x = r².
    pub fn expr(&self) -> Expr {
        let unit = self.x_unit();
        if unit == 1.0 {
            self.scaled_expr()
        } else {
            self.scaled_expr().compose(&Expr::x().scale(1.0 / unit))
        }
    }

    /// 𝓡(w) = w^{-1} R(1/w) as an expression in w.
    pub fn laplace_expr(&self) -> Expr {
        let w = Expr::x();
        w.powf(-1.0).mul(&self.expr().compose(&w.powf(-1.0)))
    }
}

fn check_x(x: f64) -> Result<()> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::Domain(format!("radial argument must be positive, got {x}")));
    }
    Ok(())
}

/// R(x) at x = r² > 0.
pub fn radial_r(model: &RadialModel, x: f64) -> Result<f64> {
    check_x(x)?;
    match model {
        RadialModel::ConstantBeta { beta } => Ok(x.powf(-beta)),
        RadialModel::GeneralFamily { beta1, s, r_a, .. } => {
            let u = x / (r_a * r_a);
            Ok(u.powf(-beta1) * (1.0 + u.powf(*s)).powf(-model.zeta()))
        }
        RadialModel::Custom { f } => f.eval(x),
    }
}

/// β(r) = -d log R / d log r².
pub fn beta_profile(model: &RadialModel, r: f64) -> Result<f64> {
    check_x(r)?;
    match model {
        RadialModel::ConstantBeta { beta } => Ok(*beta),
        RadialModel::GeneralFamily { beta1, beta2, s, r_a } => {
            // weights r_a^{2s} and r^{2s}, normalised to avoid overflow
            let q = (r / r_a).powf(2.0 * s);
            if q.is_infinite() {
                return Ok(*beta2);
            }
            Ok((beta1 + beta2 * q) / (1.0 + q))
        }
        RadialModel::Custom { f } => {
            let x = r * r;
            Ok(-x * f.derivative().eval(x)? / f.eval(x)?)
        }
    }
}

/// Coefficients of R_(n) for the monotone family:
/// R_(n) = x^{-β₁}(1+y)^{-ζ} Σ_k ã_{n,k} u^k = x^{-β₁}(1+y)^{-ζ-n} Σ_k t̃_{n,k} y^k,
/// with y = x^s and u = y/(1+y).
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffTable {
    pub n: usize,
    pub a_tilde: Vec<f64>,
    pub t_tilde: Vec<f64>,
}

impl CoeffTable {
    /// Untilded a_{n,k} = (-1)^k ã_{n,k} / C(n,k).
    pub fn a_plain(&self) -> Vec<f64> {
        let n = self.n as f64;
        (0..=self.n)
            .map(|k| {
                let sign = if k % 2 == 1 { -1.0 } else { 1.0 };
                sign * self.a_tilde[k] / binomial(n, k)
            })
            .collect()
    }

    /// Untilded t_{n,k} = t̃_{n,k} / C(n,k).
    pub fn t_plain(&self) -> Vec<f64> {
        let n = self.n as f64;
        (0..=self.n).map(|k| self.t_tilde[k] / binomial(n, k)).collect()
    }
}

/// Stirling numbers of the second kind S(j, m) for j, m ≤ n.
fn stirling2(n: usize) -> Vec<Vec<f64>> {
    let mut s = vec![vec![0.0; n + 1]; n + 1];
    s[0][0] = 1.0;
    for j in 1..=n {
        for m in 1..=j {
            s[j][m] = m as f64 * s[j - 1][m] + s[j - 1][m - 1];
        }
    }
    s
}

/// Coefficients of the polynomial (c + s x)_n = Π_{i<n} (c + i + s x).
fn rising_poly(c: f64, s: f64, n: usize) -> Vec<f64> {
    let mut p = vec![0.0; n + 1];
    p[0] = 1.0;
    for i in 0..n {
        let k0 = c + i as f64;
        for j in (0..=i + 1).rev() {
            let lower = if j > 0 { p[j - 1] * s } else { 0.0 };
            p[j] = p[j] * k0 + lower;
        }
    }
    p
}

/// t̃_{n,m} = Σ_{k≤m} ã_{n,k} C(n-k, m-k).
pub fn binomial_transform(a_tilde: &[f64]) -> Vec<f64> {
    let n = a_tilde.len() - 1;
    (0..=n)
        .map(|m| {
            let mut acc = KahanSum::new();
            for (k, a) in a_tilde.iter().enumerate().take(m + 1) {
                acc.add(a * binomial((n - k) as f64, m - k));
            }
            acc.value()
        })
        .collect()
}

/// Inverse of [`binomial_transform`]: ã_m = Σ_k (-1)^{m-k} C(n-k, m-k) t̃_k.
pub fn inverse_binomial_transform(t_tilde: &[f64]) -> Vec<f64> {
    let n = t_tilde.len() - 1;
    (0..=n)
        .map(|m| {
            let mut acc = KahanSum::new();
            for (k, t) in t_tilde.iter().enumerate().take(m + 1) {
                let sign = if (m - k) % 2 == 1 { -1.0 } else { 1.0 };
                acc.add(sign * t * binomial((n - k) as f64, m - k));
            }
            acc.value()
        })
        .collect()
}

/// Involutive binomial transform t_k = Σ_m (-1)^m C(k, m) a_m.
pub fn involution(a: &[f64]) -> Vec<f64> {
    (0..a.len())
        .map(|k| {
            let mut acc = KahanSum::new();
            for (m, v) in a.iter().enumerate().take(k + 1) {
                let sign = if m % 2 == 1 { -1.0 } else { 1.0 };
                acc.add(sign * binomial(k as f64, m) * v);
            }
            acc.value()
        })
        .collect()
}

/// Coefficient table of order n. The forward differences of the
/// polynomial (1 - β₁ + sx)_n at 0 are taken exactly through Stirling
/// numbers, Δ^m x^j |₀ = m! S(j, m); for s = 1 closed forms are used.
pub fn coeff_table(beta1: f64, beta2: f64, s: f64, n: usize) -> CoeffTable {
    let zeta = (beta2 - beta1) / s;
    let a_tilde: Vec<f64> = if s == 1.0 {
        (0..=n)
            .map(|m| {
                let sign = if m % 2 == 1 { -1.0 } else { 1.0 };
                sign * binomial(n as f64, m) * rising(beta2 - beta1, m) * rising(1.0 - beta1 + m as f64, n - m)
            })
            .collect()
    } else {
        let c = rising_poly(1.0 - beta1, s, n);
        let st = stirling2(n);
        (0..=n)
            .map(|m| {
                let mut acc = KahanSum::new();
                for (j, cj) in c.iter().enumerate().skip(m) {
                    acc.add(cj * st[j][m]);
                }
                let sign = if m % 2 == 1 { -1.0 } else { 1.0 };
                sign * rising(zeta, m) * acc.value()
            })
            .collect()
    };
    let t_tilde = if s == 1.0 {
        (0..=n)
            .map(|k| binomial(n as f64, k) * rising(1.0 - beta1 + k as f64, n - k) * rising(1.0 - beta2, k))
            .collect()
    } else {
        binomial_transform(&a_tilde)
    };
    CoeffTable { n, a_tilde, t_tilde }
}

/// R_(n)(x) = dⁿ(xⁿ R)/dxⁿ.
pub fn r_n(model: &RadialModel, n: usize, x: f64) -> Result<f64> {
    check_x(x)?;
    if n == 0 {
        return radial_r(model, x);
    }
    match model {
        RadialModel::ConstantBeta { beta } => Ok(rising(1.0 - beta, n) * x.powf(-beta)),
        RadialModel::GeneralFamily { .. } if n <= COEFF_CAP => Ok(general_r_n(model, n, x)),
        _ => Ok(r_n_over_factorial(model, n, x)? * (ln_factorial(n)).exp()),
    }
}

/// R_(n)(x) together with a bound on the magnitude of the terms summed into
/// it, used as the rounding scale of sign tests.
pub fn r_n_with_scale(model: &RadialModel, n: usize, x: f64) -> Result<(f64, f64)> {
    check_x(x)?;
    match model {
        RadialModel::GeneralFamily { .. } if n > 0 && n <= COEFF_CAP => Ok(general_r_n_with_scale(model, n, x)),
        RadialModel::Custom { .. } if n > 0 => {
            let jet = r_n_jet(model, n, x)?;
            let ln_nf = ln_factorial(n);
            Ok((jet.coeffs[n] * ln_nf.exp(), jet.mags[n] * ln_nf.exp()))
        }
        _ => {
            let v = r_n(model, n, x)?;
            Ok((v, v.abs()))
        }
    }
}

/// R_(n) as an expression in x.
pub fn r_n_expr(model: &RadialModel, n: usize) -> Result<Expr> {
    let x = Expr::x();
    match model {
        RadialModel::ConstantBeta { beta } => Ok(x.powf(-beta).scale(rising(1.0 - beta, n))),
        RadialModel::GeneralFamily { beta1, beta2, s, r_a } => {
            let u = x.scale(1.0 / (r_a * r_a));
            let one_plus = Expr::constant(1.0).add(&u.powf(*s));
            let zeta = model.zeta();
            let table = coeff_table(*beta1, *beta2, *s, n);
            let mut acc = Expr::constant(0.0);
            for (k, a) in table.a_tilde.iter().enumerate() {
                let term = u.powf(s * k as f64 - beta1).mul(&one_plus.powf(-(zeta + k as f64)));
                acc = acc.add(&term.scale(*a));
            }
            Ok(acc)
        }
        RadialModel::Custom { f } => {
            if n > CUSTOM_SYMBOLIC_CAP {
                return Err(Error::DifferentiationDepthExceeded { requested: n, cap: CUSTOM_SYMBOLIC_CAP });
            }
            Ok(x.powf(n as f64).mul(f).nth_derivative(n))
        }
    }
}

fn general_r_n(model: &RadialModel, n: usize, x: f64) -> f64 {
    general_r_n_with_scale(model, n, x).0
}

/// R_(n) from the t̃ table in the Bernstein basis,
/// x^{-β₁}(1+y)^{-ζ} Σ_k t̃_k w^k (1-w)^{n-k} with w = y/(1+y).
/// The scale bounds the rounding error of the sum; for s ≠ 1 it also covers
/// the error carried by t̃, which is computed from ã.
fn general_r_n_with_scale(model: &RadialModel, n: usize, x: f64) -> (f64, f64) {
    let RadialModel::GeneralFamily { beta1, beta2, s, r_a } = model else {
        unreachable!("general_r_n called on {model:?}")
    };
    let u = x / (r_a * r_a);
    let y = u.powf(*s);
    let table = coeff_table(*beta1, *beta2, *s, n);
    // Horner in y for y ≤ 1, in 1/y otherwise, so no power exceeds 1
    let (mut acc, mut mag) = (0.0, 0.0);
    if y <= 1.0 {
        for t in table.t_tilde.iter().rev() {
            acc = acc * y + t;
            mag = mag * y + t.abs();
        }
        let v = (1.0 + y).powi(-(n as i32));
        acc *= v;
        mag *= v;
    } else {
        let inv = 1.0 / y;
        for t in table.t_tilde.iter() {
            acc = acc * inv + t;
            mag = mag * inv + t.abs();
        }
        let w = (y / (1.0 + y)).powi(n as i32);
        acc *= w;
        mag *= w;
    }
    if *s != 1.0 {
        let w = y / (1.0 + y);
        let mut carried = 0.0;
        for a in table.a_tilde.iter().rev() {
            carried = carried * w + a.abs();
        }
        mag = mag.max(carried);
    }
    let pre = u.powf(-beta1) * (1.0 + y).powf(-model.zeta());
    (pre * acc, pre * mag)
}

/// Jet in σ of (1+σ)ⁿ R(x(1+σ)); its n-th coefficient is R_(n)(x) / n!.
fn r_n_jet(model: &RadialModel, n: usize, x: f64) -> Result<crate::expr::Jet> {
    if n > CUSTOM_ORDER_CAP {
        return Err(Error::DifferentiationDepthExceeded { requested: n, cap: CUSTOM_ORDER_CAP });
    }
    let sigma = Expr::x();
    let one_plus = Expr::constant(1.0).add(&sigma);
    let g = one_plus.powf(n as f64).mul(&model.expr().compose(&one_plus.scale(x)));
    g.jet(0.0, 1.0, n)
}

/// R_(n)(x) / n! from a jet, rejected when cancellation ate the result.
fn r_n_over_factorial(model: &RadialModel, n: usize, x: f64) -> Result<f64> {
    let jet = r_n_jet(model, n, x)?;
    let (v, m) = (jet.coeffs[n], jet.mags[n]);
    if m > JET_COND_MAX * v.abs() {
        return Err(Error::NonConvergence(format!(
            "Taylor coefficient of order {n} lost to cancellation (magnitude {m:.3e}, value {v:.3e})"
        )));
    }
    Ok(v)
}

/// n-th Post–Widder approximant of φ: R_(n)(t/n) / n!.
pub fn phi_from_r(model: &RadialModel, t: f64, n: usize) -> Result<f64> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::Domain(format!("t must be positive, got {t}")));
    }
    if n == 0 {
        return Err(Error::Invalid("the Post–Widder order must be at least 1".into()));
    }
    let x = t / n as f64;
    match model {
        RadialModel::ConstantBeta { beta } => {
            // (1-β)_n / n! in logs: Γ(n+1-β) / (Γ(1-β) n!)
            if *beta == 1.0 {
                return Ok(0.0);
            }
            let ratio = (0..n).fold(1.0, |acc, k| acc * (1.0 - beta + k as f64) / (k + 1) as f64);
            Ok(ratio * x.powf(-beta))
        }
        RadialModel::GeneralFamily { .. } if n <= COEFF_CAP => {
            Ok(general_r_n(model, n, x) * (-ln_factorial(n)).exp())
        }
        _ => r_n_over_factorial(model, n, x),
    }
}

/// φ(t) split into its regular part and the weight of a δ-atom at t = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiValue {
    pub regular: f64,
    pub atom_weight: f64,
}

/// Closed-form φ(t): t^{-β}/Γ(1-β) for constant β and
/// τ^{-β₁} E^ζ_{s,1-β₁}(-τ^s), τ = t/r_a², for the monotone family.
pub fn phi_closed_form(model: &RadialModel, t: f64) -> Result<PhiValue> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::Domain(format!("t must be positive, got {t}")));
    }
    match model {
        RadialModel::ConstantBeta { beta } => {
            if *beta == 1.0 {
                Ok(PhiValue { regular: 0.0, atom_weight: 1.0 })
            } else {
                Ok(PhiValue { regular: t.powf(-beta) * gamma_recip(1.0 - beta), atom_weight: 0.0 })
            }
        }
        RadialModel::GeneralFamily { beta1, s, r_a, .. } => {
            let unit = r_a * r_a;
            let tau = t / unit;
            let spec = MLSpec::new(model.zeta(), *s, 1.0 - beta1)?;
            let regular = tau.powf(-beta1) * ml_eval(&spec, -tau.powf(*s))?;
            let atom_weight = if model.atom_at_zero() { unit } else { 0.0 };
            Ok(PhiValue { regular, atom_weight })
        }
        RadialModel::Custom { .. } => {
            Err(Error::Invalid("no closed-form φ for expression-based radial parts".into()))
        }
    }
}

/// Regular part of φ(t) as an expression in t, for the closed-form kinds.
pub fn phi_expr(model: &RadialModel) -> Result<Expr> {
    let t = Expr::x();
    match model {
        RadialModel::ConstantBeta { beta } if *beta == 1.0 => Ok(Expr::constant(0.0)),
        RadialModel::ConstantBeta { beta } => Ok(t.powf(-beta).scale(gamma_recip(1.0 - beta))),
        RadialModel::GeneralFamily { beta1, s, r_a, .. } => {
            let tau = t.scale(1.0 / (r_a * r_a));
            let spec = MLSpec::new(model.zeta(), *s, 1.0 - beta1)?;
            Ok(tau.powf(-beta1).mul(&tau.powf(*s).neg().ml(spec)))
        }
        RadialModel::Custom { .. } => {
            Err(Error::Invalid("no closed-form φ for expression-based radial parts".into()))
        }
    }
}
