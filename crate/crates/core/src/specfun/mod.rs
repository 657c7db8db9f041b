//! Gamma-family primitives and the generalized Mittag-Leffler evaluator.

pub mod gamma;
pub mod mittag_leffler;

pub use gamma::{
    beta_fn, binomial, factorial, gamma, gamma_recip, ln_factorial, ln_gamma, ln_gamma_recip_signed,
    ln_gamma_signed, pochhammer, rising,
    Direction,
};
pub use mittag_leffler::{
    ml_derivative, ml_derivative_with, ml_dw, ml_eval, ml_eval_with, ml_neg_order_split,
    ml_neg_order_split_with, MLSpec, MlMethod, MlTolerances, MlValue,
};
