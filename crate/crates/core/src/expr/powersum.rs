//! Expansion of an expression into a finite sum Σ c (x - a)^e.

use super::{pow_real, Expr, Node};
use crate::numerics::is_integer;

/// One term c (x - a)^e.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerTerm {
    pub coeff: f64,
    pub exponent: f64,
}

const MAX_TERMS: usize = 64;
const MAX_INT_POWER: usize = 16;

fn normalize(mut terms: Vec<PowerTerm>) -> Vec<PowerTerm> {
    terms.sort_by(|a, b| a.exponent.total_cmp(&b.exponent));
    let mut out: Vec<PowerTerm> = Vec::with_capacity(terms.len());
    for t in terms {
        match out.last_mut() {
            Some(last) if (last.exponent - t.exponent).abs() <= 1e-14 * (1.0 + t.exponent.abs()) => {
                last.coeff += t.coeff
            }
            _ => out.push(t),
        }
    }
    out.retain(|t| t.coeff != 0.0);
    out
}

fn product(a: &[PowerTerm], b: &[PowerTerm]) -> Option<Vec<PowerTerm>> {
    if a.len() * b.len() > MAX_TERMS * MAX_TERMS {
        return None;
    }
    let mut out = Vec::with_capacity(a.len() * b.len());
    for s in a {
        for t in b {
            out.push(PowerTerm { coeff: s.coeff * t.coeff, exponent: s.exponent + t.exponent });
        }
    }
    let out = normalize(out);
    (out.len() <= MAX_TERMS).then_some(out)
}

impl Expr {
    /// Σ c (x - a)^e if the expression is a finite generalized polynomial in
    /// (x - a), terms sorted by exponent. Non-integer exponents are only
    /// recognised when the base is itself a single power of (x - a).
    pub fn power_sum(&self, a: f64) -> Option<Vec<PowerTerm>> {
        let terms = match self.node() {
            Node::Const(c) => vec![PowerTerm { coeff: *c, exponent: 0.0 }],
            Node::X => {
                vec![PowerTerm { coeff: a, exponent: 0.0 }, PowerTerm { coeff: 1.0, exponent: 1.0 }]
            }
            Node::Add(u, v) => {
                let mut t = u.power_sum(a)?;
                t.extend(v.power_sum(a)?);
                t
            }
            Node::Mul(u, v) => product(&u.power_sum(a)?, &v.power_sum(a)?)?,
            Node::Pow(u, alpha) => {
                let base = u.power_sum(a)?;
                match base.as_slice() {
                    [] => return None,
                    [t] if t.coeff > 0.0 || is_integer(*alpha) => vec![PowerTerm {
                        coeff: pow_real(t.coeff, *alpha),
                        exponent: t.exponent * alpha,
                    }],
                    _ if *alpha >= 0.0 && is_integer(*alpha) && (*alpha as usize) <= MAX_INT_POWER => {
                        let mut acc = vec![PowerTerm { coeff: 1.0, exponent: 0.0 }];
                        for _ in 0..*alpha as usize {
                            acc = product(&acc, &base)?;
                        }
                        acc
                    }
                    _ => return None,
                }
            }
            Node::Exp(_) | Node::Log(_) | Node::Ml(..) => return None,
        };
        Some(normalize(terms))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn expands_products_and_integer_powers() {
        let t = parse("(1 + x)^2 * pow(x, 0.5)").unwrap().power_sum(0.0).unwrap();
        let want = [(1.0, 0.5), (2.0, 1.5), (1.0, 2.5)];
        assert_eq!(t.len(), 3);
        for (term, (c, e)) in t.iter().zip(want) {
            assert!((term.coeff - c).abs() < 1e-15 && (term.exponent - e).abs() < 1e-15);
        }
    }

    #[test]
    fn shifted_terminal() {
        // x^2 about a = 1: 1 + 2(x-1) + (x-1)^2
        let t = parse("x^2").unwrap().power_sum(1.0).unwrap();
        let c: Vec<f64> = t.iter().map(|t| t.coeff).collect();
        assert_eq!(c, vec![1.0, 2.0, 1.0]);
        assert!(parse("pow(x, 0.5)").unwrap().power_sum(1.0).is_none());
        assert!(parse("exp(-x)").unwrap().power_sum(0.0).is_none());
    }

    #[test]
    fn cancellation_drops_terms() {
        let t = parse("x - x + 3").unwrap().power_sum(0.0).unwrap();
        assert_eq!(t, vec![PowerTerm { coeff: 3.0, exponent: 0.0 }]);
    }
}
