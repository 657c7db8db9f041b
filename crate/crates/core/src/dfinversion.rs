//! From augmented densities back to distribution functions: the
//! constant-anisotropy Eddington inversion, the moment sequence F_μ,
//! velocity moments, and quadrature oracles over a small set of test dfs.

use std::cell::RefCell;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::admodels::{phi_expr, r_n, RadialModel};
use crate::cmcheck::post_widder;
use crate::consistency::SeparableAD;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::fracops::{frac_derivative, rl_integral};
use crate::quadrature::tanh_sinh;
use crate::specfun::{beta_fn, gamma_recip, rising};

const ORACLE_TOL: f64 = 1e-11;

/// Normalisation 2^{3/2-β} π^{3/2} Γ(1-β) linking g(ℰ) and D^{3/2-β} P.
pub fn eddington_constant(beta: f64) -> f64 {
    2f64.powf(1.5 - beta) * PI.powf(1.5) / gamma_recip(1.0 - beta)
}

/// g(ℰ) with ℱ = g(ℰ) L^{-2β} for R = x^{-β}, β < 1, binding-energy floor 0.
pub fn eddington_invert(p: &Expr, beta: f64, e: f64) -> Result<f64> {
    eddington_invert_from(p, 0.0, beta, e)
}

pub fn eddington_invert_from(p: &Expr, e0: f64, beta: f64, e: f64) -> Result<f64> {
    if !(beta.is_finite() && beta < 1.0) {
        return Err(Error::Invalid(format!("the Eddington inversion needs beta < 1, got {beta}")));
    }
    if !(e > e0) {
        return Err(Error::Domain(format!("energy {e} must exceed the floor {e0}")));
    }
    Ok(frac_derivative(p, e0, 1.5 - beta, e)? / eddington_constant(beta))
}

/// f(ℰ) = D^{1/2} P for a system of radial orbits (R = x^{-1}).
pub fn radial_orbit_invert(p: &Expr, e: f64) -> Result<f64> {
    if !(e > 0.0) {
        return Err(Error::Domain(format!("energy must be positive, got {e}")));
    }
    frac_derivative(p, 0.0, 0.5, e)
}

/// The x-factor of a separable moment: D^μ_x(x^μ R) for μ ≥ 0, and
/// I^ξ_x(x^{-ξ} R) for μ = -ξ < 0.
pub fn radial_moment_factor(model: &RadialModel, mu: f64, x: f64) -> Result<f64> {
    if crate::numerics::is_integer(mu) && mu >= 0.0 {
        return r_n(model, mu as usize, x);
    }
    let r = model.expr();
    let weighted = Expr::x().powf(mu).mul(&r);
    if mu >= 0.0 {
        frac_derivative(&weighted, 0.0, mu, x)
    } else {
        rl_integral(&weighted, 0.0, -mu, x)
    }
}

/// F_μ(Ψ, x) from the fractional-calculus chain applied to N = P R.
pub fn moment_f_mu(ad: &SeparableAD, mu: f64, psi: f64, x: f64) -> Result<f64> {
    if !mu.is_finite() {
        return Err(Error::Invalid(format!("moment order must be finite, got {mu}")));
    }
    let psi_factor = if mu >= 0.5 {
        rl_integral(&ad.p, ad.e0, mu - 0.5, psi)?
    } else {
        frac_derivative(&ad.p, ad.e0, 0.5 - mu, psi)?
    };
    if psi_factor == 0.0 {
        return Ok(0.0);
    }
    Ok(psi_factor * radial_moment_factor(&ad.radial, mu, x)?)
}

/// m_{k,n}(Ψ, x) = 2^{k+n} (1/2)_k I^{k+n}_Ψ P · R_(n)(x).
pub fn velocity_moment(ad: &SeparableAD, k: usize, n: usize, psi: f64, x: f64) -> Result<f64> {
    let order = (k + n) as f64;
    let psi_factor = if k + n == 0 { ad.p.eval(psi)? } else { rl_integral(&ad.p, ad.e0, order, psi)? };
    Ok(2f64.powi((k + n) as i32) * rising(0.5, k) * psi_factor * r_n(&ad.radial, n, x)?)
}

/// Test distribution functions with closed-form augmented densities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestDF {
    /// ℱ = ℰ^a L^{-2β} for ℰ > 0.
    PowerLaw { a: f64, beta: f64 },
    /// ℱ = ℰ^a δ(L²) / (√2 π^{3/2}), normalised so that N = x⁻¹ I^{1/2} f.
    RadialOrbit { a: f64 },
}

impl TestDF {
    pub fn power_law(a: f64, beta: f64) -> Result<Self> {
        if !(a > -1.0 && beta < 1.0) {
            return Err(Error::Invalid(format!("power-law df needs a > -1 and beta < 1, got a = {a}, beta = {beta}")));
        }
        Ok(Self::PowerLaw { a, beta })
    }

    pub fn radial_orbit(a: f64) -> Result<Self> {
        if !(a > -1.0) {
            return Err(Error::Invalid(format!("radial-orbit df needs a > -1, got {a}")));
        }
        Ok(Self::RadialOrbit { a })
    }

    /// Energy part g(ℰ) (or f(ℰ) for radial orbits).
    pub fn energy_part(&self, e: f64) -> f64 {
        match self {
            Self::PowerLaw { a, .. } | Self::RadialOrbit { a } => {
                if e > 0.0 {
                    e.powf(*a)
                } else {
                    0.0
                }
            }
        }
    }

    /// Separable augmented density generated by the df, in closed form.
    pub fn analytic_ad(&self) -> Result<SeparableAD> {
        let psi = Expr::x();
        let (p, radial) = match *self {
            Self::PowerLaw { a, beta } => {
                let c = 2f64.powf(1.5 - beta) * PI * beta_fn(1.0 - beta, 0.5) * beta_fn(a + 1.0, 1.5 - beta);
                (psi.powf(a + 1.5 - beta).scale(c), RadialModel::constant_beta(beta)?)
            }
            Self::RadialOrbit { a } => {
                let c = crate::fracops::gamma_ratio(a + 1.0, a + 1.5);
                (psi.powf(a + 0.5).scale(c), RadialModel::constant_beta(1.0)?)
            }
        };
        SeparableAD::new(p, radial, 0.0, 1.0)
    }
}

/// ∬_T 𝒦^p ℱ(ℰ, L²) dℰ dL² over 𝒦 = 2(Ψ-ℰ) - L²/x ≥ 0, ℰ ≥ 0, by
/// two-dimensional tanh-sinh quadrature; L² = 2x(Ψ-ℰ)u maps the inner range
/// to [0, 1].
pub fn kernel_integral(df: &TestDF, p: f64, psi: f64, x: f64) -> Result<f64> {
    if !(psi > 0.0 && x > 0.0) {
        return Err(Error::Domain(format!("need psi > 0 and x > 0, got psi = {psi}, x = {x}")));
    }
    if p <= -1.0 {
        return Err(Error::Domain(format!("kernel power {p} is not integrable")));
    }
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let value = match *df {
        TestDF::PowerLaw { a, beta } => tanh_sinh(
            |_, e, rest| {
                // rest = Ψ - ℰ; inner over u with 𝒦 = 2 rest (1 - u)
                let inner = tanh_sinh(|_, u, one_minus_u| u.powf(-beta) * one_minus_u.powf(p), 0.0, 1.0, ORACLE_TOL);
                match inner {
                    // ℱ 𝒦^p dL² = ℰ^a (2x rest u)^{-β} (2 rest (1-u))^p 2x rest du
                    Ok(v) => e.powf(a) * rest.powf(1.0 - beta + p) * (2.0 * x).powf(1.0 - beta) * 2f64.powf(p) * v,
                    Err(err) => {
                        failure.borrow_mut().get_or_insert(err);
                        f64::NAN
                    }
                }
            },
            0.0,
            psi,
            ORACLE_TOL,
        ),
        TestDF::RadialOrbit { a } => tanh_sinh(
            |_, e, rest| e.powf(a) * (2.0 * rest).powf(p) / (2f64.sqrt() * PI.powf(1.5)),
            0.0,
            psi,
            ORACLE_TOL,
        ),
    };
    if let Some(err) = failure.into_inner() {
        return Err(err);
    }
    value
}

/// N(Ψ, x) = (2π / x) ∬_T 𝒦^{-1/2} ℱ by direct quadrature.
pub fn oracle_ad_from_df(df: &TestDF, psi: f64, x: f64) -> Result<f64> {
    Ok(2.0 * PI / x * kernel_integral(df, -0.5, psi, x)?)
}

/// Right-hand side of x D^μ_Ψ N = 2^{1+μ} π^{3/2} / Γ(1/2 - μ) ∬_T ℱ 𝒦^{-μ-1/2},
/// valid for μ < 1/2.
pub fn dmn_kernel(df: &TestDF, mu: f64, psi: f64, x: f64) -> Result<f64> {
    if mu >= 0.5 {
        return Err(Error::Domain(format!("the kernel form needs mu < 1/2, got {mu}")));
    }
    Ok(2f64.powf(1.0 + mu) * PI.powf(1.5) * gamma_recip(0.5 - mu) * kernel_integral(df, -mu - 0.5, psi, x)?)
}

/// F_μ(Ψ, x) = Ψ^{μ+1} ∫₀¹ y^μ (2π)^{3/2} ℱ(Ψ(1-y), 2xΨy) dy by quadrature
/// (binding-energy floor 0). For radial orbits only μ = 0 is non-zero.
pub fn moment_f_mu_oracle(df: &TestDF, mu: f64, psi: f64, x: f64) -> Result<f64> {
    if !(psi > 0.0 && x > 0.0) {
        return Err(Error::Domain(format!("need psi > 0 and x > 0, got psi = {psi}, x = {x}")));
    }
    let c = (2.0 * PI).powf(1.5);
    match *df {
        TestDF::PowerLaw { a, beta } => {
            let v = tanh_sinh(
                |_, y, one_minus_y| y.powf(mu) * (psi * one_minus_y).powf(a) * (2.0 * x * psi * y).powf(-beta),
                0.0,
                1.0,
                ORACLE_TOL,
            )?;
            Ok(c * psi.powf(mu + 1.0) * v)
        }
        // the δ(L²) mass sits at y = 0: ∫ dL² δ(L²) L^{2μ} f(Ψ - L²/2x) / (2x)^{μ+1}
        TestDF::RadialOrbit { a } => {
            if mu == 0.0 {
                Ok(c / (2.0 * x) * psi.powf(a) / (2f64.sqrt() * PI.powf(1.5)))
            } else if mu > 0.0 {
                Ok(0.0)
            } else {
                Err(Error::Domain("negative moment orders diverge for radial orbits".into()))
            }
        }
    }
}

/// Best-effort Post–Widder approximant of ℱ(ℰ, L²) as the inverse Laplace
/// transform in s of s^{3/2} 𝒫(s) φ(s L²/2) / (2π)^{3/2}, where `p_laplace`
/// is 𝒫(s) in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PostWidderDf {
    pub value: f64,
    pub order: usize,
}

pub fn df_post_widder(p_laplace: &Expr, radial: &RadialModel, e: f64, l2: f64, n: usize) -> Result<PostWidderDf> {
    if radial.atom_at_zero() {
        return Err(Error::Invalid("φ carries a δ-atom; the approximant does not apply".into()));
    }
    if !(l2 > 0.0) {
        return Err(Error::Domain(format!("L² must be positive, got {l2}")));
    }
    let s = Expr::x();
    let phi = phi_expr(radial)?.compose(&s.scale(0.5 * l2));
    let f = s.powf(1.5).mul(p_laplace).mul(&phi).scale((2.0 * PI).powf(-1.5));
    Ok(PostWidderDf { value: post_widder(&f, e, n)?, order: n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmcheck::cm_sequence_test;
    use crate::expr::parse;
    use crate::specfun::gamma;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn eddington_examples() {
        let sq = parse("psi^2").unwrap();
        for &e in &[0.1, 0.5, 1.0] {
            assert!(rel(eddington_invert(&sq, 0.5, e).unwrap(), e / (PI * PI)) < 1e-13);
            let lin = eddington_invert(&parse("psi").unwrap(), 0.5, e).unwrap();
            assert!(rel(lin, 0.5 / (PI * PI)) < 1e-13);
        }
        // η + β < 1/2: Γ(η + β - 1/2) < 0 flips the sign
        let g = eddington_invert(&parse("pow(psi, 0.2)").unwrap(), 0.1, 0.05).unwrap();
        assert!(g < 0.0);
        assert!(eddington_invert(&sq, 1.0, 0.5).is_err());
    }

    #[test]
    fn radial_orbit_examples() {
        for &e in &[0.2, 0.9] {
            let f = radial_orbit_invert(&parse("psi").unwrap(), e).unwrap();
            assert!(rel(f, 2.0 * (e / PI).sqrt()) < 1e-13);
            let c = radial_orbit_invert(&parse("3").unwrap(), e).unwrap();
            assert!(rel(c, 3.0 / (PI * e).sqrt()) < 1e-13);
        }
        let hump = parse("psi - psi^2").unwrap();
        assert!(radial_orbit_invert(&hump, 0.1).unwrap() > 0.0);
        assert!(radial_orbit_invert(&hump, 0.9).unwrap() < 0.0);
    }

    #[test]
    fn moment_examples() {
        let lin = SeparableAD::new(parse("psi").unwrap(), RadialModel::constant_beta(0.0).unwrap(), 0.0, 1.0).unwrap();
        let v = moment_f_mu(&lin, 0.0, 0.7, 2.0).unwrap();
        assert!(rel(v, 2.0 * (0.7 / PI).sqrt()) < 1e-13);
        let sq = SeparableAD::new(parse("psi^2").unwrap(), RadialModel::constant_beta(0.0).unwrap(), 0.0, 1.0).unwrap();
        let v = moment_f_mu(&sq, 1.0, 0.7, 2.0).unwrap();
        assert!(rel(v, gamma(3.0) / gamma(3.5) * 0.7f64.powf(2.5)) < 1e-13);
    }

    #[test]
    fn velocity_moment_examples() {
        let sq = SeparableAD::new(parse("psi^2").unwrap(), RadialModel::constant_beta(0.0).unwrap(), 0.0, 1.0).unwrap();
        assert!(rel(velocity_moment(&sq, 1, 0, 0.6, 1.0).unwrap(), 0.6f64.powi(3) / 3.0) < 1e-13);
        assert!(rel(velocity_moment(&sq, 0, 0, 0.6, 3.0).unwrap(), 0.36) < 1e-15);
        let g = RadialModel::general(0.1, 0.8, 0.7, 1.3).unwrap();
        let ad = SeparableAD::new(parse("psi^2 + psi").unwrap(), g.clone(), 0.0, 1.0).unwrap();
        for &x in &[0.2, 1.0, 4.0] {
            let m01 = velocity_moment(&ad, 0, 1, 0.5, x).unwrap();
            let m10 = velocity_moment(&ad, 1, 0, 0.5, x).unwrap();
            let beta = 1.0 - m01 / (2.0 * m10);
            let want = crate::admodels::beta_profile(&g, x.sqrt()).unwrap();
            assert!((beta - want).abs() < 1e-8);
        }
    }

    #[test]
    fn oracle_ad_examples() {
        // g = 1, β = 0: N is the volume of the sphere v² ≤ 2Ψ, (4π/3)(2Ψ)^{3/2}
        let df = TestDF::power_law(0.0, 0.0).unwrap();
        let n = oracle_ad_from_df(&df, 0.8, 1.5).unwrap();
        assert!(rel(n, 8.0 * PI * 2f64.sqrt() / 3.0 * 0.8f64.powf(1.5)) < 1e-9);
        let ro = TestDF::radial_orbit(0.0).unwrap();
        let n = oracle_ad_from_df(&ro, 0.8, 1.5).unwrap();
        assert!(rel(n, 2.0 * (0.8 / PI).sqrt() / 1.5) < 1e-10);
        for &(a, beta) in &[(1.0, 0.5), (2.5, -0.5)] {
            let df = TestDF::power_law(a, beta).unwrap();
            let ad = df.analytic_ad().unwrap();
            for &(psi, x) in &[(0.3, 0.5), (0.9, 2.0)] {
                let quad = oracle_ad_from_df(&df, psi, x).unwrap();
                let closed = ad.p.eval(psi).unwrap() * crate::admodels::radial_r(&ad.radial, x).unwrap();
                assert!(rel(quad, closed) < 1e-9, "a={a} beta={beta}: {quad} vs {closed}");
            }
        }
    }

    #[test]
    fn round_trip_and_kernel_identity() {
        let df = TestDF::power_law(1.0, 0.5).unwrap();
        let ad = df.analytic_ad().unwrap();
        for &e in &[0.1, 0.5, 0.9] {
            assert!(rel(eddington_invert(&ad.p, 0.5, e).unwrap(), df.energy_part(e)) < 1e-10);
        }
        let (psi, x, mu) = (0.7, 1.3, 0.25);
        let n_expr = ad.p.scale(crate::admodels::radial_r(&ad.radial, x).unwrap());
        let lhs = x * frac_derivative(&n_expr, 0.0, mu, psi).unwrap();
        let rhs = dmn_kernel(&df, mu, psi, x).unwrap();
        assert!(rel(lhs, rhs) < 1e-8, "{lhs} vs {rhs}");
    }

    #[test]
    fn moments_chain_vs_oracle() {
        for df in [TestDF::power_law(0.0, 0.0).unwrap(), TestDF::power_law(2.5, -0.5).unwrap()] {
            let ad = df.analytic_ad().unwrap();
            let (psi, x) = (0.6, 1.7);
            let mut seq = Vec::new();
            for mu in 0..=8 {
                let chain = moment_f_mu(&ad, mu as f64, psi, x).unwrap();
                let quad = moment_f_mu_oracle(&df, mu as f64, psi, x).unwrap();
                assert!(rel(chain, quad) < 1e-9, "{df:?} mu={mu}: {chain} vs {quad}");
                seq.push(chain / psi.powi(mu + 1));
            }
            assert!(cm_sequence_test(&seq, 8).passed());
            for mu in [0.5, -0.5] {
                let chain = moment_f_mu(&ad, mu, psi, x).unwrap();
                let quad = moment_f_mu_oracle(&df, mu, psi, x).unwrap();
                assert!(rel(chain, quad) < 1e-9, "{df:?} mu={mu}: {chain} vs {quad}");
            }
        }
        let ro = TestDF::radial_orbit(1.0).unwrap();
        let ad = ro.analytic_ad().unwrap();
        for mu in [0.0, 0.5, 2.0] {
            let chain = moment_f_mu(&ad, mu, 0.4, 2.0).unwrap();
            let quad = moment_f_mu_oracle(&ro, mu, 0.4, 2.0).unwrap();
            assert!((chain - quad).abs() <= 1e-12 * (1.0 + quad.abs()), "mu={mu}: {chain} vs {quad}");
        }
    }

    #[test]
    fn post_widder_df() {
        // β = 0, P = Ψ²: 𝒫(s) = 2/s³ and ℱ = 2 ℰ^{1/2} / ((2π)^{3/2} Γ(3/2))
        let p_lap = parse("2 * pow(x, -3)").unwrap();
        let radial = RadialModel::constant_beta(0.0).unwrap();
        let e = 0.4;
        let exact = eddington_invert(&parse("psi^2").unwrap(), 0.0, e).unwrap();
        let mut prev = f64::INFINITY;
        for n in [16usize, 32, 64] {
            let v = df_post_widder(&p_lap, &radial, e, 0.3, n).unwrap();
            let err = (v.value - exact).abs();
            assert!(err < prev);
            prev = err;
        }
        assert!(prev < 0.02 * exact);
    }
}
