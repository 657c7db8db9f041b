//! Property tests over randomly drawn parameters.

use proptest::prelude::*;
use statrs::function::gamma::gamma;

use phasecons::admodels::{binomial_transform, coeff_table, inverse_binomial_transform, RadialModel};
use phasecons::cmcheck::{cm_sequence_test, cm_test, CmStatus};
use phasecons::consistency::{verdict, SeparableAD, Verdict, VerdictOptions};
use phasecons::expr::Expr;
use phasecons::fracops::rl_signed;
use phasecons::specfun::{ml_eval, MLSpec};

fn rel(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn power_rule(alpha in 0.1f64..3.0, lambda in -0.9f64..2.5, x in 0.1f64..5.0) {
        let f = Expr::x().powf(alpha - 1.0);
        let want = gamma(alpha) / gamma(alpha + lambda) * x.powf(alpha + lambda - 1.0);
        prop_assert!(rel(rl_signed(&f, 0.0, lambda, x).unwrap(), want) < 1e-10);
    }

    #[test]
    fn integrals_compose(alpha in 0.2f64..2.0, l1 in 0.1f64..1.5, l2 in 0.1f64..1.5, x in 0.2f64..3.0) {
        // I^l2 I^l1 x^{α-1} = Γ(α)/Γ(α+l1) I^l2 x^{α+l1-1}
        let inner = Expr::x().powf(alpha + l1 - 1.0);
        let composed = gamma(alpha) / gamma(alpha + l1) * rl_signed(&inner, 0.0, l2, x).unwrap();
        let direct = rl_signed(&Expr::x().powf(alpha - 1.0), 0.0, l1 + l2, x).unwrap();
        prop_assert!(rel(composed, direct) < 1e-10);
    }

    #[test]
    fn ml_at_zero_order_is_reciprocal_gamma(p in 0.2f64..2.0, b in 0.1f64..3.0, z in -5.0f64..0.0) {
        let v = ml_eval(&MLSpec::new(0.0, p, b).unwrap(), z).unwrap();
        prop_assert!(rel(v, 1.0 / gamma(b)) < 1e-12);
    }

    #[test]
    fn positive_exponential_mixtures_are_cm(
        terms in prop::collection::vec((0.1f64..3.0, 0.05f64..2.0), 1..4),
    ) {
        let f = terms
            .iter()
            .map(|&(w, c)| Expr::constant(w).mul(&Expr::x().mul(&Expr::constant(-c)).exp()))
            .reduce(|a, b| a.add(&b))
            .unwrap();
        let grid: Vec<f64> = (0..12).map(|i| 0.05 * 1.5f64.powi(i)).collect();
        prop_assert_eq!(cm_test(&f, 5, &grid).unwrap().status, CmStatus::Pass);
        let neg = f.mul(&Expr::constant(-1.0));
        prop_assert_eq!(cm_test(&neg, 5, &grid).unwrap().status, CmStatus::Fail);
    }

    #[test]
    fn hausdorff_moment_sequences_are_cm(
        atoms in prop::collection::vec((0.1f64..2.0, 0.0f64..1.0), 1..4),
    ) {
        let a: Vec<f64> = (0..10).map(|k| atoms.iter().map(|&(w, t)| w * t.powi(k)).sum()).collect();
        prop_assert!(cm_sequence_test(&a, 4).passed());
    }

    #[test]
    fn binomial_transforms_invert(a in prop::collection::vec(-2.0f64..2.0, 1..12)) {
        let back = inverse_binomial_transform(&binomial_transform(&a));
        let scale = a.iter().map(|v| v.abs()).fold(1.0, f64::max);
        for (x, y) in back.iter().zip(&a) {
            prop_assert!((x - y).abs() <= 1e-10 * scale * 2f64.powi(a.len() as i32));
        }
    }

    #[test]
    fn coeff_tables_start_at_one(b1 in -1.0f64..1.0, b2 in -1.0f64..1.0, s in 0.2f64..2.0, n in 0usize..10) {
        let t = coeff_table(b1, b2, s, n);
        prop_assert_eq!(t.t_tilde.len(), n + 1);
        prop_assert!((t.a_tilde[0] - t.t_tilde[0]).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    // a consistent verdict never coexists with a failed or missing necessary check
    #[test]
    fn consistent_implies_necessary(beta in -1.0f64..0.95, q in 0.2f64..3.0, c in 0.0f64..1.0) {
        let p = Expr::constant(c).add(&Expr::x().powf(q));
        let ad = SeparableAD::new(p, RadialModel::constant_beta(beta).unwrap(), 0.0, 1.0).unwrap();
        let opts = VerdictOptions::default();
        let r = verdict(&ad, &opts);
        if r.verdict == Verdict::Consistent {
            prop_assert_eq!(r.necessary_radial.combined().status, CmStatus::Pass);
            prop_assert!(r.necessary_potential.iter().all(|c| c.status == CmStatus::Pass));
            prop_assert!(r.sufficient.is_some());
        }
        if r.verdict == Verdict::Inconsistent {
            prop_assert!(r.witness.is_some());
        }
        prop_assert_eq!(verdict(&ad, &opts).verdict, r.verdict);
    }
}
