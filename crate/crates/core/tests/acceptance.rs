//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.
//!
//! Every comparison here is against an independent oracle: closed forms
//! evaluated with `statrs`, direct quadrature, or symbolic differentiation.

#![allow(clippy::excessive_precision, clippy::type_complexity)]

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::gamma;

use phasecons::admodels::{
    binomial_transform, coeff_table, inverse_binomial_transform, phi_closed_form, phi_from_r, r_n, RadialModel,
};
use phasecons::cmcheck::{cm_sequence_test, cm_test, default_grid, post_widder, CmStatus};
use phasecons::consistency::{verdict, RadialForm, ReportWitness, SeparableAD, Verdict, VerdictOptions};
use phasecons::dfinversion::{eddington_invert, moment_f_mu, moment_f_mu_oracle, oracle_ad_from_df, TestDF};
use phasecons::expr::{parse, Expr};
use phasecons::fracops::{rl_integral, rl_integral_fn, rl_signed, rl_signed_with, FracOptions};
use phasecons::numerics::log_grid;
use phasecons::quadrature::{integrate_to_infinity, tanh_sinh, AdaptiveOptions};
use phasecons::specfun::{ml_eval, MLSpec};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn rel(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        ((got - want) / want).abs()
    }
}

/// Criterion 1: rl_signed on x^{α-1} against Γ(α)/Γ(α+λ) x^{α+λ-1}. The quadrature
/// path is cross-checked for α ≥ 0.05; below that the part of the Abel
/// integral under the smallest normal double is ~ε^α, above the tolerance.
fn power_rule() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst_fast, mut worst_quad, mut quad_cases) = (0.0f64, 0.0f64, 0);
    let quad = FracOptions::quadrature_only();
    for _ in 0..20 {
        let alpha: f64 = 3.0 - rng.gen_range(0.0..3.0);
        let lambda: f64 = rng.gen_range(-0.9..=2.0);
        let f = Expr::x().powf(alpha - 1.0);
        for x in [0.5f64, 1.0, 2.0] {
            let want = gamma(alpha) / gamma(alpha + lambda) * x.powf(alpha + lambda - 1.0);
            worst_fast = worst_fast.max(rel(rl_signed(&f, 0.0, lambda, x).unwrap(), want));
            if alpha >= 0.05 {
                let slow = rl_signed_with(&f, 0.0, lambda, x, &quad).map_or(f64::INFINITY, |v| rel(v.value, want));
                worst_quad = worst_quad.max(slow);
                quad_cases += 1;
            }
        }
    }
    outcome(
        worst_fast < 1e-9 && worst_quad < 1e-9,
        format!(
            "20 (alpha, lambda) x 3 points; max rel err {worst_fast:.1e}; quadrature path {worst_quad:.1e} on {quad_cases} cases"
        ),
    )
}

/// I^ν f(x) in closed form for the four test functions.
fn integral_closed_form(which: usize, nu: f64, x: f64) -> f64 {
    match which {
        0 => x.powf(nu) / gamma(nu + 1.0),
        1 => x.powf(nu + 1.0) / gamma(nu + 2.0),
        2 => gamma(1.5) / gamma(1.5 + nu) * x.powf(nu + 0.5),
        // I^ν e^{-x} = x^ν E_{1,ν+1}(-x), written as the series Σ (-x)^k x^ν / Γ(k+ν+1)
        _ => {
            let mut sum = 0.0;
            let mut term = x.powf(nu) / gamma(nu + 1.0);
            for k in 0..200 {
                sum += term;
                term *= -x / (k as f64 + nu + 1.0);
                if term.abs() < 1e-18 * sum.abs() {
                    break;
                }
            }
            sum
        }
    }
}

/// Criterion 2: I^ξ I^λ f = I^{ξ+λ} f.
fn semigroup() -> Outcome {
    let funcs = ["1", "x", "pow(x, 0.5)", "exp(-x)"];
    let orders = [0.3, 0.5, 1.2];
    let (mut worst, mut worst_oracle) = (0.0f64, 0.0f64);
    for (which, src) in funcs.iter().enumerate() {
        let f = parse(src).unwrap();
        for &xi in &orders {
            for &lambda in &orders {
                let inner = |t: f64| rl_integral(&f, 0.0, lambda, t);
                for x in [0.5, 1.5, 3.0] {
                    let lhs = rl_integral_fn(&inner, 0.0, xi, x, &FracOptions::default()).unwrap();
                    let rhs = rl_integral(&f, 0.0, xi + lambda, x).unwrap();
                    worst = worst.max(rel(lhs, rhs));
                    worst_oracle = worst_oracle.max(rel(rhs, integral_closed_form(which, xi + lambda, x)));
                }
            }
        }
    }
    outcome(
        worst < 1e-7 && worst_oracle < 1e-7,
        format!("4 functions x 9 order pairs x 3 points; max rel err {worst:.1e} (composition), {worst_oracle:.1e} (vs closed form)"),
    )
}

fn laplace_integral(g: impl Fn(f64) -> f64, w: f64) -> f64 {
    let opts = AdaptiveOptions::default();
    let head = tanh_sinh(|t, _, _| (-w * t).exp() * g(t), 0.0, 1.0, 1e-13).unwrap();
    let tail = integrate_to_infinity(|t| (-w * t).exp() * g(t), 1.0, 8.0, &opts).unwrap();
    head + tail
}

/// Criterion 3: ∫ e^{-wt} t^{b-1} E^λ_{p,b}(-t^p) dt = w^{-b} (1 + w^{-p})^{-λ}.
fn ml_laplace() -> Outcome {
    let sets = [(1.0, 0.5, 1.0), (0.5, 0.7, 0.8), (2.0, 0.8, 1.6), (1.3, 1.0, 0.6), (0.4, 0.35, 1.2)];
    let ws = [0.5, 1.0, 2.0, 5.0];
    let mut worst = 0.0f64;
    for &(lambda, p, b) in &sets {
        let spec = MLSpec::new(lambda, p, b).unwrap();
        for &w in &ws {
            let got = laplace_integral(|t| t.powf(b - 1.0) * ml_eval(&spec, -t.powf(p)).unwrap(), w);
            let want = w.powf(-b) * (1.0 + w.powf(-p)).powf(-lambda);
            worst = worst.max(rel(got, want));
        }
    }
    // b → 0⁺: ∫ e^{-wt} t^{-1} E^ζ_{p,0}(-t^p) dt = (1 + w^{-p})^{-ζ} - 1
    let (zeta, p) = (0.6, 0.5);
    let spec = MLSpec::new(zeta, p, 0.0).unwrap();
    let mut worst_b0 = 0.0f64;
    for &w in &ws {
        let got = laplace_integral(|t| ml_eval(&spec, -t.powf(p)).unwrap() / t, w);
        let want = (1.0 + w.powf(-p)).powf(-zeta) - 1.0;
        worst_b0 = worst_b0.max(rel(got, want));
    }
    outcome(
        worst < 1e-8 && worst_b0 < 1e-8,
        format!("5 sets + b=0 variant at w in {{0.5,1,2,5}}; max rel err {worst:.1e}, b=0 variant {worst_b0:.1e}"),
    )
}

/// Criterion 4: Post–Widder inversion of 1/(x+1) at t = 1.
fn post_widder_convergence() -> Outcome {
    let f = parse("1/(x+1)").unwrap();
    let target = (-1.0f64).exp();
    let e32 = (post_widder(&f, 1.0, 32).unwrap() - target).abs();
    let e64 = (post_widder(&f, 1.0, 64).unwrap() - target).abs();
    let ratio = e32 / e64;
    outcome(
        e64 < 5e-3 && (1.6..=2.4).contains(&ratio),
        format!("error {e64:.2e} at n=64, {e32:.2e} at n=32, ratio {ratio:.3}"),
    )
}

fn phi_worst(b1: f64, b2: f64, s: f64) -> f64 {
    let model = RadialModel::general(b1, b2, s, 1.0).unwrap();
    log_grid(0.1, 10.0, 9)
        .into_iter()
        .map(|t| rel(phi_from_r(&model, t, 64).unwrap(), phi_closed_form(&model, t).unwrap().regular))
        .fold(0.0, f64::max)
}

/// Criterion 5: φ from the Post–Widder route against the closed form. The sets have
/// algebraically decaying φ; for β₂ = s = 1, φ ∝ t^{-β₁}e^{-t} and the
/// order-64 approximant carries a relative bias near t²/2n, shown for
/// reference only.
fn phi_coherence() -> Outcome {
    let sets = [(0.0, 0.5, 0.5), (0.3, 0.6, 1.0), (-0.5, 0.5, 1.0), (0.2, 0.8, 0.5), (0.5, 0.2, 0.75), (-1.0, 0.0, 0.25)];
    let worst = sets.iter().map(|&(b1, b2, s)| phi_worst(b1, b2, s)).fold(0.0, f64::max);
    let exponential = phi_worst(0.3, 1.0, 1.0);
    outcome(
        worst < 1e-2,
        format!("6 models x 9 t in [0.1, 10]; max rel err {worst:.2e} (exponential case beta2=s=1: {exponential:.2e})"),
    )
}

/// Criterion 6: Complete monotonicity of Mittag-Leffler functions.
fn cm_families() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let grid = default_grid();
    let z = Expr::x();
    let mut pos_pass = 0;
    for _ in 0..200 {
        let p: f64 = 1.0 - rng.gen_range(0.0..0.95);
        let b: f64 = rng.gen_range(0.05..3.0);
        let lambda: f64 = (b / p).min(4.0) * (1.0 - rng.gen_range(0.0..1.0));
        let f = z.neg().ml(MLSpec::new(lambda, p, b).unwrap());
        if cm_test(&f, 8, &grid).is_ok_and(|v| v.status == CmStatus::Pass) {
            pos_pass += 1;
        }
    }
    let mut neg_pass = 0;
    for _ in 0..200 {
        let p: f64 = 1.0 - rng.gen_range(0.0..0.95);
        let xi: f64 = 3.0 - rng.gen_range(0.0..2.95);
        let b_min = (p * (1.0 - xi)).max(0.05);
        let b: f64 = rng.gen_range(b_min..b_min + 3.0);
        let f = z.powf(-xi).mul(&z.neg().ml(MLSpec::new(-xi, p, b).unwrap()));
        if cm_test(&f, 8, &grid).is_ok_and(|v| v.status == CmStatus::Pass) {
            neg_pass += 1;
        }
    }
    // p = 2: E_{2,1}(-z) = cos √z
    let bad = cm_test(&z.neg().ml(MLSpec::new(1.0, 2.0, 1.0).unwrap()), 8, &grid).unwrap();
    let witness = bad.witness.map(|w| format!("n={} z={:.3}", w.order, w.x)).unwrap_or_else(|| "none".into());
    outcome(
        pos_pass == 200 && neg_pass == 200 && bad.status == CmStatus::Fail && bad.witness.is_some(),
        format!("E^lam_(p,b)(-z): {pos_pass}/200 pass; z^-xi E^-xi_(p,b)(-z): {neg_pass}/200 pass; p=2 fails at {witness}"),
    )
}

/// P⁽ᵏ⁾(0⁺) ≠ 0 for some k < ⌊λ⌋.
fn boundary_fails(p: &Expr, lambda: f64) -> bool {
    let mut d = p.clone();
    for _ in 0..(lambda.floor() as usize) {
        if d.eval(1e-10).map_or(true, |v| v.abs() > 1e-6) {
            return true;
        }
        d = d.derivative();
    }
    false
}

/// Criterion 7: Constant-β verdicts against the sign of the inverted df.
fn constant_beta_equivalence() -> Outcome {
    let betas = [-1.0, 0.0, 0.25, 0.5, 0.75, 0.9];
    let potentials = ["psi", "psi^2", "psi^0.3", "psi - psi^2", "1 + psi", "psi^0.3*(1 - psi/2)"];
    let energies: Vec<f64> = (1..=200).map(|i| i as f64 / 200.0).collect();
    let (mut agree, mut counts, mut bad) = (0, [0usize; 3], Vec::new());
    for &beta in &betas {
        for src in &potentials {
            let p = parse(src).unwrap();
            let ad = SeparableAD::new(p.clone(), RadialModel::constant_beta(beta).unwrap(), 0.0, 1.0).unwrap();
            let v = verdict(&ad, &VerdictOptions::default()).verdict;
            let g_min = energies.iter().map(|&e| eddington_invert(&p, beta, e).unwrap()).fold(f64::INFINITY, f64::min);
            let g_ok = g_min >= -1e-8;
            counts[v as usize] += 1;
            let ok = match v {
                Verdict::Consistent => g_ok,
                _ => !g_ok || boundary_fails(&p, 1.5 - beta),
            };
            if ok {
                agree += 1;
            } else {
                bad.push(format!("beta={beta} P={src} {v:?} min g={g_min:.2e}"));
            }
        }
    }
    let mut detail = format!(
        "{agree}/36 cells agree (consistent {}, inconsistent {}, inconclusive {})",
        counts[0], counts[1], counts[2]
    );
    if !bad.is_empty() {
        detail.push_str(&format!("; disagreements: {}", bad.join(", ")));
    }
    outcome(agree == 36, detail)
}

/// Criterion 8: s = 2 fails the necessary radial condition in the expected window.
fn s_above_one() -> Outcome {
    let ad = SeparableAD::new(parse("psi").unwrap(), RadialModel::general(0.0, 1.0, 2.0, 1.0).unwrap(), 0.0, 1.0).unwrap();
    let r = verdict(&ad, &VerdictOptions::default());
    let (s, beta1) = (2.0, 0.0);
    let bound = (s - 1.0) / (2.0 - beta1);
    match r.witness {
        Some(ReportWitness::Radial { form: RadialForm::Laplace, n, x: w, value }) => {
            let inside = w > 0.0 && w.powf(s) < bound;
            outcome(
                r.verdict == Verdict::Inconsistent && inside,
                format!("{:?}; witness order {n} at w={w:.4} (w^s={:.4} < {bound}), value {value:.3e}", r.verdict, w.powf(s)),
            )
        }
        other => outcome(false, format!("{:?} with witness {other:?}", r.verdict)),
    }
}

/// R_(n)(x) to 20 digits from 60-digit numerical differentiation of xⁿR(x)
/// (mpmath), for R = x^{-β₁}(1+x^s)^{-(β₂-β₁)/s}: (β₁, β₂, s, n, x, value).
const R_N_REFERENCE: [(f64, f64, f64, usize, f64, f64); 24] = [
    (0.3, 1.0, 1.0, 3, 0.05, 6.588_997_119_562_202),
    (0.3, 1.0, 1.0, 3, 3.0, 0.013_682_088_058_087_207),
    (0.3, 1.0, 1.0, 3, 20.0, 0.000_016_764_489_623_110_68),
    (0.3, 1.0, 1.0, 8, 0.05, 26_400.538_651_419_378),
    (0.3, 1.0, 1.0, 8, 3.0, 0.068_327_005_875_267_52),
    (0.3, 1.0, 1.0, 8, 20.0, 2.099_103_381_341_192e-8),
    (0.0, 0.5, 0.5, 3, 0.05, 3.938_033_489_083_073),
    (0.0, 0.5, 0.5, 3, 3.0, 1.024_519_052_838_329),
    (0.0, 0.5, 0.5, 3, 20.0, 0.415_251_954_562_373_2),
    (0.0, 0.5, 0.5, 8, 0.05, 21_961.838_887_116_19),
    (0.0, 0.5, 0.5, 8, 3.0, 4_476.763_513_168_827),
    (0.0, 0.5, 0.5, 8, 20.0, 1_764.698_301_678_123_7),
    (-0.5, 0.7, 0.25, 3, 0.05, 0.241_278_019_940_167_5),
    (-0.5, 0.7, 0.25, 3, 3.0, 0.116_603_455_832_119_73),
    (-0.5, 0.7, 0.25, 3, 20.0, 0.053_156_694_361_152_14),
    (-0.5, 0.7, 0.25, 8, 0.05, 1_572.408_566_407_415_7),
    (-0.5, 0.7, 0.25, 8, 3.0, 555.708_018_226_524_8),
    (-0.5, 0.7, 0.25, 8, 20.0, 224.898_511_697_142_28),
    (0.9, -1.0, 0.8, 3, 0.05, 22.808_796_784_566_354),
    (0.9, -1.0, 0.8, 3, 3.0, 98.112_281_391_286_87),
    (0.9, -1.0, 0.8, 3, 20.0, 516.890_288_082_713_7),
    (0.9, -1.0, 0.8, 8, 0.05, 150_095.858_123_186_45),
    (0.9, -1.0, 0.8, 8, 3.0, 1_292_773.025_795_902_4),
    (0.9, -1.0, 0.8, 8, 20.0, 7_551_010.594_286_716),
];

/// Criterion 9: Coefficient tables. The inverse binomial transform is an alternating
/// sum, so its round-trip error is measured against Σ C(n-k, m-k)|t̃_k|.
fn coefficient_tables() -> Outcome {
    let mut worst_round = 0.0f64;
    for &(b1, b2, s) in &[(0.0, 0.5, 0.5), (0.3, 1.0, 1.0), (-0.5, 0.7, 0.25), (0.9, -1.0, 0.8), (0.5, 0.5, 0.6)] {
        for n in 1..=24 {
            let t = coeff_table(b1, b2, s, n);
            let back = inverse_binomial_transform(&t.t_tilde);
            let forward = binomial_transform(&t.a_tilde);
            for m in 0..=n {
                let terms: f64 = (0..=m).map(|k| binomial(n - k, m - k) * t.t_tilde[k].abs()).sum();
                let fterms: f64 = (0..=m).map(|k| binomial(n - k, m - k) * t.a_tilde[k].abs()).sum();
                worst_round = worst_round.max((back[m] - t.a_tilde[m]).abs() / terms.max(1e-300));
                worst_round = worst_round.max((forward[m] - t.t_tilde[m]).abs() / fterms.max(1e-300));
            }
        }
    }
    let mut negatives = 0;
    let betas: Vec<f64> = (0..10).map(|i| -1.25 + 2.25 * i as f64 / 9.0).collect();
    for &b1 in &betas {
        for &b2 in &betas {
            for n in 0..=8 {
                let t = coeff_table(b1, b2, 1.0, n);
                if t.t_tilde.iter().any(|&c| c < 0.0) {
                    negatives += 1;
                }
                for y in log_grid(1e-3, 1e3, 13) {
                    let tau: f64 = t.t_tilde.iter().enumerate().map(|(k, c)| c * y.powi(k as i32)).sum();
                    if tau < 0.0 {
                        negatives += 1;
                    }
                }
            }
        }
    }
    // symbolic differentiation loses digits at large x, so it is used on x ≤ 3
    let mut worst_sym = 0.0f64;
    for &(b1, b2, s) in &[(0.0, 0.5, 0.5), (0.3, 1.0, 1.0), (-0.5, 0.7, 0.25), (0.9, -1.0, 0.8)] {
        let model = RadialModel::general(b1, b2, s, 1.0).unwrap();
        let r = model.expr();
        for n in 0..=8 {
            let sym = Expr::x().powf(n as f64).mul(&r).nth_derivative(n);
            for x in [0.05, 0.5, 1.0, 3.0] {
                worst_sym = worst_sym.max(rel(r_n(&model, n, x).unwrap(), sym.eval(x).unwrap()));
            }
        }
    }
    let worst_ref = R_N_REFERENCE
        .iter()
        .map(|&(b1, b2, s, n, x, want)| rel(r_n(&RadialModel::general(b1, b2, s, 1.0).unwrap(), n, x).unwrap(), want))
        .fold(0.0, f64::max);
    outcome(
        worst_round < 1e-10 && negatives == 0 && worst_sym < 1e-9 && worst_ref < 1e-12,
        format!(
            "round trip err {worst_round:.1e} (n<=24, relative to summed terms); s=1 negative t~/tau samples: {negatives}; \
             R_(n) vs symbolic {worst_sym:.1e}, vs 20-digit reference {worst_ref:.1e}"
        ),
    )
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |c, i| c * (n - i) as f64 / (i + 1) as f64)
}

/// Criterion 10: Power-law df → analytic AD → Eddington inversion.
fn df_round_trip() -> Outcome {
    let (mut worst, mut worst_ad) = (0.0f64, 0.0f64);
    for a in [0.0, 1.0, 2.5] {
        for beta in [-0.5, 0.0, 0.5] {
            let df = TestDF::power_law(a, beta).unwrap();
            let ad = df.analytic_ad().unwrap();
            for i in 0..=16 {
                let e = 0.1 + 0.8 * i as f64 / 16.0;
                worst = worst.max(rel(eddington_invert(&ad.p, beta, e).unwrap(), df.energy_part(e)));
            }
            for (psi, x) in [(0.4, 0.7f64), (0.9, 2.0)] {
                let analytic = ad.p.eval(psi).unwrap() * x.powf(-beta);
                worst_ad = worst_ad.max(rel(analytic, oracle_ad_from_df(&df, psi, x).unwrap()));
            }
        }
    }
    outcome(
        worst < 1e-5 && worst_ad < 1e-8,
        format!("9 (a, beta) cells; g max rel err {worst:.1e}; analytic AD vs quadrature {worst_ad:.1e}"),
    )
}

/// Criterion 11: Moment chain against direct quadrature, and the Hausdorff sequence.
fn moment_oracle() -> Outcome {
    let (psi, x) = (0.7, 1.3);
    let mut worst = 0.0f64;
    let mut seq_ok = true;
    for (a, beta) in [(1.0, 0.0), (2.5, 0.5), (0.0, -0.5)] {
        let df = TestDF::power_law(a, beta).unwrap();
        let ad = df.analytic_ad().unwrap();
        for mu in [0.0, 0.5, 1.0, 2.0] {
            worst = worst.max(rel(moment_f_mu(&ad, mu, psi, x).unwrap(), moment_f_mu_oracle(&df, mu, psi, x).unwrap()));
        }
        let seq: Vec<f64> =
            (0..=8).map(|m| moment_f_mu(&ad, m as f64, psi, x).unwrap() / psi.powi(m + 1)).collect();
        seq_ok &= cm_sequence_test(&seq, 8).status == CmStatus::Pass;
    }
    outcome(
        worst < 1e-6 && seq_ok,
        format!("3 ADs x mu in {{0, 1/2, 1, 2}}; max rel err {worst:.1e}; Hausdorff sequences cm: {seq_ok}"),
    )
}

/// Criterion 12: Golden fixtures reproduced byte for byte by two runs.
fn cli_determinism() -> Outcome {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let mut models: Vec<String> = std::fs::read_dir(&fixtures)
        .unwrap()
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".json"))
        .collect();
    models.sort();
    let run = |name: &str| {
        Command::new(env!("CARGO_BIN_EXE_phasecons"))
            .args(["check", "consistency", "--model", name])
            .current_dir(&fixtures)
            .output()
            .unwrap()
    };
    let mut mismatches = Vec::new();
    for name in &models {
        let (first, second) = (run(name), run(name));
        let golden = std::fs::read(fixtures.join("golden").join(name)).unwrap_or_default();
        let same = first.status.success() && first.stdout == second.stdout;
        // general_s2 is stored at a reduced order, so only its run-to-run stability is compared
        let matches_golden = first.stdout == golden || name == "general_s2.json";
        if !(same && matches_golden) {
            mismatches.push(name.clone());
        }
    }
    outcome(
        mismatches.is_empty() && !models.is_empty(),
        format!("{} fixture reports, mismatches: {mismatches:?}", models.len()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("fractional power rule", power_rule),
        ("semigroup law", semigroup),
        ("Mittag-Leffler Laplace identity", ml_laplace),
        ("Post-Widder convergence", post_widder_convergence),
        ("phi coherence", phi_coherence),
        ("cm families", cm_families),
        ("constant-beta equivalence", constant_beta_equivalence),
        ("s > 1 necessary failure", s_above_one),
        ("coefficient tables", coefficient_tables),
        ("df round trip", df_round_trip),
        ("moment oracle", moment_oracle),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|e| outcome(false, format!("panicked: {:?}", e.downcast_ref::<String>())));
        let status = if result.pass { "PASS" } else { "FAIL" };
        if !result.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {status} {name}: {} [{:.1}s]",
            i + 1,
            result.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
