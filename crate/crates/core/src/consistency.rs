//! Necessary and sufficient conditions for a separable augmented density
//! N(Ψ, r²) = P(Ψ) R(r²) to come from a non-negative distribution function,
//! combined into a three-valued verdict.

use serde::{Deserialize, Serialize};

use crate::admodels::{beta_profile, r_n_expr, r_n_with_scale, RadialModel, Regime};
use crate::cmcheck::{cm_test_with, default_grid, CMVerdict, CmOptions, CmStatus, Witness};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::fracops::frac_derivative;
use crate::numerics::{linear_grid, log_grid};

/// Separable augmented density with potential part P on [ℰ₀, Ψ_max].
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableAD {
    pub p: Expr,
    pub radial: RadialModel,
    pub e0: f64,
    pub psi_max: f64,
}

impl SeparableAD {
    pub fn new(p: Expr, radial: RadialModel, e0: f64, psi_max: f64) -> Result<Self> {
        if !(e0.is_finite() && psi_max.is_finite() && psi_max > e0) {
            return Err(Error::Invalid(format!("need finite e0 < psi_max, got e0 = {e0}, psi_max = {psi_max}")));
        }
        Ok(Self { p, radial, e0, psi_max })
    }

    /// Default Ψ sample: 8 log-spaced points near ℰ₀ followed by 40 evenly
    /// spaced points up to Ψ_max.
    pub fn psi_grid(&self) -> Vec<f64> {
        let span = self.psi_max - self.e0;
        let mut q = log_grid(1e-4, 0.025, 8);
        q.pop();
        q.extend(linear_grid(0.025, 1.0, 40));
        q.into_iter().map(|v| self.e0 + span * v).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    Inconsistent,
    Inconclusive,
}

/// Which form of the radial condition produced a witness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialForm {
    /// R_(n)(x) ≥ 0.
    RN,
    /// 𝓡(w) = w⁻¹R(1/w) completely monotonic; x holds w.
    Laplace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ReportWitness {
    Radial { form: RadialForm, n: usize, x: f64, value: f64 },
    Potential { mu: f64, psi: f64, value: f64 },
}

/// Outcome of D^μ P ≥ 0 over the Ψ grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialCheck {
    pub mu: f64,
    pub status: CmStatus,
    /// Smallest D^μ P relative to the largest |D^μ P| on the grid.
    pub min_margin: f64,
    pub witness: Option<PotentialWitness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialWitness {
    pub psi: f64,
    pub value: f64,
}

/// Both forms of the necessary radial condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialEvidence {
    pub r_n: CMVerdict,
    pub laplace: CMVerdict,
}

impl RadialEvidence {
    /// Fails when either form fails; a Laplace-form witness is preferred.
    pub fn combined(&self) -> CMVerdict {
        let first_fail = [&self.laplace, &self.r_n].into_iter().find(|v| v.status == CmStatus::Fail);
        if let Some(v) = first_fail {
            return v.clone();
        }
        let inconclusive = [&self.laplace, &self.r_n].into_iter().find(|v| v.status == CmStatus::Inconclusive);
        let mut out = inconclusive.unwrap_or(&self.r_n).clone();
        out.min_margin = self.r_n.min_margin.min(self.laplace.min_margin);
        out.max_order_checked = self.r_n.max_order_checked.min(self.laplace.max_order_checked);
        out
    }

    fn witness(&self) -> Option<ReportWitness> {
        let (form, v) = if self.laplace.status == CmStatus::Fail {
            (RadialForm::Laplace, &self.laplace)
        } else {
            (RadialForm::RN, &self.r_n)
        };
        v.witness.map(|w| ReportWitness::Radial { form, n: w.order, x: w.x, value: w.value })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SufficiencyEvidence {
    pub lambda_used: f64,
    pub radial_ok: bool,
    pub potential_ok: bool,
    pub boundary_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub verdict: Verdict,
    pub regime: Regime,
    pub witness: Option<ReportWitness>,
    pub necessary_radial: RadialEvidence,
    pub necessary_potential: Vec<PotentialCheck>,
    pub sufficient: Option<SufficiencyEvidence>,
    pub caveats: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerdictOptions {
    /// Highest derivative order of the sampled cm and sign checks.
    pub n_max: usize,
    /// Highest k in the sufficient radial condition for expression models.
    pub k_max: usize,
    /// Points in x (and w) for radial checks.
    pub radial_grid: Vec<f64>,
    /// Points in Ψ; `None` uses [`SeparableAD::psi_grid`].
    pub psi_grid: Option<Vec<f64>>,
    /// A check fails only below -eps_fail times its scale.
    pub eps_fail: f64,
    /// Quarter steps tried above the smallest admissible λ for expression models.
    pub lambda_steps: usize,
}

impl Default for VerdictOptions {
    fn default() -> Self {
        Self { n_max: 8, k_max: 4, radial_grid: default_grid(), psi_grid: None, eps_fail: 1e-8, lambda_steps: 8 }
    }
}

fn cm_opts(eps: f64) -> CmOptions {
    CmOptions { eps_abs: eps, symbolic_cap: 64 }
}

/// R_(n)(x) ≥ 0 for n ≤ `n_max` on `grid`, and cm of 𝓡(w) to the same order.
pub fn necessary_radial(model: &RadialModel, n_max: usize, grid: &[f64]) -> Result<CMVerdict> {
    Ok(necessary_radial_parts(model, n_max, grid, 1e-8)?.combined())
}

pub fn necessary_radial_parts(model: &RadialModel, n_max: usize, grid: &[f64], eps: f64) -> Result<RadialEvidence> {
    let laplace = cm_test_with(&model.laplace_expr(), n_max, grid, &cm_opts(eps))?;
    let r_n = r_n_sign_check(model, n_max, grid, eps);
    Ok(RadialEvidence { r_n, laplace })
}

fn r_n_sign_check(model: &RadialModel, n_max: usize, grid: &[f64], eps: f64) -> CMVerdict {
    let mut min_margin = f64::INFINITY;
    let mut witness: Option<(Witness, f64)> = None;
    let mut note = None;
    'orders: for n in 0..=n_max {
        for &x in grid {
            match r_n_with_scale(model, n, x) {
                Ok((v, scale)) if v.is_finite() => {
                    let rel = if scale > 0.0 { v / scale } else { 0.0 };
                    min_margin = min_margin.min(rel);
                    if v < -eps * scale && witness.as_ref().is_none_or(|(_, m)| rel < *m) {
                        witness = Some((Witness { order: n, x, value: v }, rel));
                    }
                }
                Ok(_) => {
                    note.get_or_insert_with(|| format!("R_({n}) is not finite at x = {x}"));
                }
                Err(e) => {
                    note.get_or_insert_with(|| format!("R_({n}) at x = {x}: {e}"));
                }
            }
        }
        if witness.is_some() {
            break 'orders;
        }
    }
    let status = match (&witness, &note) {
        (Some(_), _) => CmStatus::Fail,
        (None, Some(_)) => CmStatus::Inconclusive,
        _ => CmStatus::Pass,
    };
    CMVerdict {
        status,
        max_order_checked: n_max,
        witness: witness.map(|(w, _)| w),
        min_margin: if min_margin.is_finite() { min_margin } else { 0.0 },
        note: if status == CmStatus::Inconclusive { note } else { None },
    }
}

/// lim_{x→0} β(x): exact for the model kinds, extrapolated for expressions.
/// The flag is true when the value is an estimate.
pub fn central_beta(model: &RadialModel) -> Option<(f64, bool)> {
    if let Some(b) = model.beta0() {
        return Some((b, false));
    }
    // β(x) ≈ β₀ + c x^p sampled at x = 1e-4, 1e-6, 1e-8 and Aitken-extrapolated
    let b: Vec<f64> = [1e-2, 1e-3, 1e-4].iter().map(|&r| beta_profile(model, r)).collect::<Result<_>>().ok()?;
    if b.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let denom = b[0] - 2.0 * b[1] + b[2];
    let est = if denom.abs() > 1e-14 * (1.0 + b[2].abs()) {
        b[2] - (b[2] - b[1]).powi(2) / denom
    } else {
        b[2]
    };
    est.is_finite().then_some((est, true))
}

/// Orders μ at which D^μ P ≥ 0 is necessary: quarter steps from 0 and the
/// endpoint 3/2 - β₀, never fewer than those up to 1/2.
pub fn necessary_mu_list(beta0: Option<f64>) -> Vec<f64> {
    let end = match beta0 {
        Some(b) if b < 1.0 => 1.5 - b,
        _ => 0.5,
    };
    let mut mus: Vec<f64> = (0..).map(|k| k as f64 * 0.25).take_while(|m| *m < end - 1e-12).collect();
    mus.push(end);
    mus
}

/// D^μ P ≥ -ε on the Ψ grid, relative to max |D^μ P| there.
pub fn potential_sign_check(p: &Expr, e0: f64, mu: f64, psi: &[f64], eps: f64) -> PotentialCheck {
    let mut values = Vec::with_capacity(psi.len());
    let mut note = None;
    for &x in psi {
        if x <= e0 {
            continue;
        }
        match frac_derivative(p, e0, mu, x) {
            Ok(v) if v.is_finite() => values.push((x, v)),
            Ok(_) => {
                note.get_or_insert_with(|| format!("D^{mu} P is not finite at Ψ = {x}"));
            }
            Err(e) => {
                note.get_or_insert_with(|| format!("D^{mu} P at Ψ = {x}: {e}"));
            }
        }
    }
    let scale = values.iter().fold(0.0f64, |m, (_, v)| m.max(v.abs()));
    let mut min_margin = f64::INFINITY;
    let mut witness: Option<PotentialWitness> = None;
    for &(x, v) in &values {
        let rel = if scale > 0.0 { v / scale } else { 0.0 };
        min_margin = min_margin.min(rel);
        if v < -eps * scale && witness.is_none_or(|w| v < w.value) {
            witness = Some(PotentialWitness { psi: x, value: v });
        }
    }
    let status = match (&witness, &note) {
        (Some(_), _) => CmStatus::Fail,
        (None, Some(_)) => CmStatus::Inconclusive,
        _ => CmStatus::Pass,
    };
    PotentialCheck {
        mu,
        status,
        min_margin: if min_margin.is_finite() { min_margin } else { 0.0 },
        witness,
        note: if status == CmStatus::Inconclusive { note } else { None },
    }
}

/// D^μ P ≥ 0 for every μ in [`necessary_mu_list`].
pub fn necessary_potential(ad: &SeparableAD, psi: &[f64]) -> Vec<PotentialCheck> {
    necessary_potential_with(ad, psi, 1e-8)
}

pub fn necessary_potential_with(ad: &SeparableAD, psi: &[f64], eps: f64) -> Vec<PotentialCheck> {
    let beta0 = central_beta(&ad.radial).map(|(b, _)| b);
    necessary_mu_list(beta0).into_iter().map(|mu| potential_sign_check(&ad.p, ad.e0, mu, psi, eps)).collect()
}

/// Smallest λ for which the radial half of the sufficient condition is
/// proven; `None` for s > 1 and for expression models.
pub fn sufficiency_threshold(model: &RadialModel) -> Option<f64> {
    match model {
        RadialModel::ConstantBeta { beta } => Some(1.5 - beta),
        RadialModel::GeneralFamily { beta1, beta2, s, .. } if *s <= 1.0 => {
            if beta1 <= beta2 {
                Some(1.5 - beta1)
            } else if *beta2 <= 1.0 - s {
                Some(1.5 - beta2)
            } else {
                let n = ((beta1 - beta2) / s).ceil();
                Some(1.5 - beta1 + s * n)
            }
        }
        _ => None,
    }
}

/// Evidence for the potential half of the sufficient condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSufficiency {
    pub derivative: PotentialCheck,
    pub boundary_ok: bool,
}

impl PotentialSufficiency {
    pub fn ok(&self) -> bool {
        self.boundary_ok && self.derivative.status == CmStatus::Pass
    }
}

/// D^λ P ≥ 0 on the grid and P(ℰ₀) = … = P^{(⌊λ⌋-1)}(ℰ₀) = 0.
pub fn sufficient_potential(p: &Expr, lambda: f64, psi: &[f64]) -> Result<(bool, PotentialSufficiency)> {
    sufficient_potential_at(p, 0.0, lambda, psi, 1e-8)
}

pub fn sufficient_potential_at(
    p: &Expr,
    e0: f64,
    lambda: f64,
    psi: &[f64],
    eps: f64,
) -> Result<(bool, PotentialSufficiency)> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::Invalid(format!("lambda must be non-negative, got {lambda}")));
    }
    let derivative = potential_sign_check(p, e0, lambda, psi, eps);
    let scale = psi
        .iter()
        .filter_map(|&x| p.eval(x).ok())
        .fold(1.0f64, |m, v| if v.is_finite() { m.max(v.abs()) } else { m });
    let orders = if lambda >= 1.0 { lambda.floor() as usize } else { 0 };
    let mut boundary_ok = true;
    let mut d = p.clone();
    for _ in 0..orders {
        match d.eval(e0) {
            Ok(v) if v.is_finite() && v.abs() <= eps * scale => {}
            _ => {
                boundary_ok = false;
                break;
            }
        }
        d = d.derivative();
    }
    let ev = PotentialSufficiency { derivative, boundary_ok };
    Ok((ev.ok(), ev))
}

/// x^{3/2-λ} R_(k)(x) completely monotonic to order `n_max` for all k ≤ `k_max`.
pub fn sufficient_radial(
    model: &RadialModel,
    lambda: f64,
    k_max: usize,
    n_max: usize,
    grid: &[f64],
) -> Result<(bool, Vec<CMVerdict>)> {
    sufficient_radial_with(model, lambda, k_max, n_max, grid, 1e-8)
}

pub fn sufficient_radial_with(
    model: &RadialModel,
    lambda: f64,
    k_max: usize,
    n_max: usize,
    grid: &[f64],
    eps: f64,
) -> Result<(bool, Vec<CMVerdict>)> {
    let weight = Expr::x().powf(1.5 - lambda);
    let mut out = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let f = weight.mul(&r_n_expr(model, k)?);
        let v = cm_test_with(&f, n_max, grid, &cm_opts(eps))?;
        let stop = v.status == CmStatus::Fail;
        out.push(v);
        if stop {
            break;
        }
    }
    let ok = out.iter().all(|v| v.status == CmStatus::Pass);
    Ok((ok, out))
}

/// Runs the necessary checks, then the sufficient ones.
pub fn verdict(ad: &SeparableAD, opts: &VerdictOptions) -> ConsistencyReport {
    let regime = ad.radial.regime();
    let eps = opts.eps_fail;
    let mut caveats = vec![format!(
        "finite_order: complete monotonicity sampled to order {} on {} points",
        opts.n_max,
        opts.radial_grid.len()
    )];
    let psi = opts.psi_grid.clone().unwrap_or_else(|| ad.psi_grid());

    let radial = match necessary_radial_parts(&ad.radial, opts.n_max, &opts.radial_grid, eps) {
        Ok(r) => r,
        Err(e) => {
            let failed = CMVerdict {
                status: CmStatus::Inconclusive,
                max_order_checked: 0,
                witness: None,
                min_margin: 0.0,
                note: Some(e.to_string()),
            };
            RadialEvidence { r_n: failed.clone(), laplace: failed }
        }
    };
    let combined = radial.combined();
    let beta0 = central_beta(&ad.radial);
    if let Some((b, true)) = beta0 {
        caveats.push(format!("beta0_estimated: central anisotropy extrapolated as {b:.6}"));
    }
    if beta0.is_none() {
        caveats.push("beta0_unknown: only orders mu <= 1/2 of the potential condition are checked".into());
    }
    let potential = necessary_potential_with(ad, &psi, eps);

    let mut report = ConsistencyReport {
        verdict: Verdict::Inconclusive,
        regime,
        witness: None,
        necessary_radial: radial.clone(),
        necessary_potential: potential.clone(),
        sufficient: None,
        caveats,
    };

    if combined.status == CmStatus::Fail {
        report.verdict = Verdict::Inconsistent;
        report.witness = radial.witness();
        return report;
    }
    if let Some(bad) = potential.iter().find(|c| c.status == CmStatus::Fail) {
        report.verdict = Verdict::Inconsistent;
        let w = bad.witness.expect("failed check carries a witness");
        report.witness = Some(ReportWitness::Potential { mu: bad.mu, psi: w.psi, value: w.value });
        return report;
    }
    for c in potential.iter().filter(|c| c.min_margin < 0.0) {
        report.caveats.push(format!("near_zero_margin: D^{} P passes only within tolerance, relative margin {:.3e}", c.mu, c.min_margin));
    }
    let necessary_clean =
        combined.status == CmStatus::Pass && potential.iter().all(|c| c.status == CmStatus::Pass);
    if !necessary_clean {
        report.caveats.push("necessary_incomplete: some necessary checks could not be evaluated".into());
        return report;
    }
    if ad.e0 != 0.0 {
        report.caveats.push("nonzero_e0: the sufficient conditions assume a binding-energy floor of 0".into());
        return report;
    }
    if regime == Regime::Unresolved {
        report.caveats.push("unresolved_regime: no sufficient condition is established for s > 1".into());
        return report;
    }
    if let RadialModel::GeneralFamily { beta1, beta2, s, .. } = &ad.radial {
        if *beta2 < *beta1 && *beta2 > 1.0 - s {
            report
                .caveats
                .push("restrictive_threshold: the smallest proven lambda is used for 1-s < beta2 < beta1".into());
        }
    }

    let evidence = match sufficiency_threshold(&ad.radial) {
        Some(lambda) => sufficient_potential_at(&ad.p, ad.e0, lambda, &psi, eps).ok().map(|(_, pot)| {
            SufficiencyEvidence {
                lambda_used: lambda,
                radial_ok: true,
                potential_ok: pot.derivative.status == CmStatus::Pass,
                boundary_ok: pot.boundary_ok,
            }
        }),
        None => custom_sufficiency(ad, beta0.map(|(b, _)| b), &psi, opts, &mut report.caveats),
    };
    if let Some(ev) = evidence {
        if ev.radial_ok && ev.potential_ok && ev.boundary_ok {
            report.verdict = Verdict::Consistent;
        }
        report.sufficient = Some(ev);
    }
    report
}

/// Smallest λ on a quarter-step ladder at which the radial condition holds,
/// paired with the potential condition at that λ.
fn custom_sufficiency(
    ad: &SeparableAD,
    beta0: Option<f64>,
    psi: &[f64],
    opts: &VerdictOptions,
    caveats: &mut Vec<String>,
) -> Option<SufficiencyEvidence> {
    let mut start = beta0.map_or(0.0, |b| (1.5 - b).max(0.0));
    // an extrapolated β₀ is only good to a few digits; snap to the quarter grid
    if ((start * 4.0).round() - start * 4.0).abs() < 1e-6 {
        start = (start * 4.0).round() / 4.0;
    }
    let mut ladder = vec![start];
    let first_quarter = (start * 4.0 + 1e-9).floor() / 4.0 + 0.25;
    ladder.extend((0..opts.lambda_steps).map(|k| first_quarter + 0.25 * k as f64));
    for lambda in ladder {
        match sufficient_radial_with(&ad.radial, lambda, opts.k_max, opts.n_max, &opts.radial_grid, opts.eps_fail) {
            Ok((true, _)) => {
                caveats.push(format!(
                    "custom_radial: x^(3/2-lambda) R_(k) sampled for k <= {} at lambda = {lambda}",
                    opts.k_max
                ));
                let (_, pot) = sufficient_potential_at(&ad.p, ad.e0, lambda, psi, opts.eps_fail).ok()?;
                return Some(SufficiencyEvidence {
                    lambda_used: lambda,
                    radial_ok: true,
                    potential_ok: pot.derivative.status == CmStatus::Pass,
                    boundary_ok: pot.boundary_ok,
                });
            }
            Ok((false, _)) => continue,
            Err(e) => {
                caveats.push(format!("custom_radial: {e}"));
                return None;
            }
        }
    }
    caveats.push("custom_radial: no lambda on the search ladder satisfied the radial condition".into());
    None
}
