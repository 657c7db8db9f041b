//! A small scalar expression language that is closed under differentiation.
//!
//! Expressions are immutable trees over one variable `x`, built from
//! constants, sums, products, real powers, `exp`, `log` and generalized
//! Mittag-Leffler atoms E^λ_{p,b}(u). Trees share subexpressions through
//! `Arc`, so cloning is cheap and values can cross threads.

mod jet;
mod parse;
mod powersum;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::is_integer;
use crate::specfun::{ml_eval_with, MLSpec, MlTolerances};

pub use jet::Jet;
pub use parse::parse;
pub use powersum::PowerTerm;

/// Tree node. Construct through the [`Expr`] helpers, which fold constants.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    X,
    Add(Expr, Expr),
    Mul(Expr, Expr),
    /// u^α for a constant real α.
    Pow(Expr, f64),
    Exp(Expr),
    Log(Expr),
    /// E^λ_{p,b}(u).
    Ml(MLSpec, Expr),
}

/// Shared handle to an expression tree.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr(Arc<Node>);

impl Expr {
    fn wrap(node: Node) -> Self {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn constant(c: f64) -> Self {
        Self::wrap(Node::Const(c))
    }

    pub fn x() -> Self {
        Self::wrap(Node::X)
    }

    /// Constant value if the tree is a literal.
    pub fn as_const(&self) -> Option<f64> {
        match self.node() {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    fn is_one(&self) -> bool {
        self.as_const() == Some(1.0)
    }

    pub fn add(&self, other: &Expr) -> Self {
        match (self.as_const(), other.as_const()) {
            (Some(a), Some(b)) => Self::constant(a + b),
            _ if self.is_zero() => other.clone(),
            _ if other.is_zero() => self.clone(),
            _ => {
                let (c1, t1) = self.coeff_term();
                let (c2, t2) = other.coeff_term();
                if same_term(&t1, &t2) {
                    t1.scale(c1 + c2)
                } else {
                    Self::wrap(Node::Add(self.clone(), other.clone()))
                }
            }
        }
    }

    fn coeff_term(&self) -> (f64, Expr) {
        match self.node() {
            Node::Mul(c, rest) => match c.as_const() {
                Some(c) => (c, rest.clone()),
                None => (1.0, self.clone()),
            },
            _ => (1.0, self.clone()),
        }
    }

    pub fn mul(&self, other: &Expr) -> Self {
        match (self.as_const(), other.as_const()) {
            (Some(a), Some(b)) => return Self::constant(a * b),
            _ if self.is_zero() || other.is_zero() => return Self::constant(0.0),
            _ if self.is_one() => return other.clone(),
            _ if other.is_one() => return self.clone(),
            (None, Some(_)) => return other.mul(self),
            _ => {}
        }
        // Pull constant factors to the front so powers of a common base meet.
        if let (Some(k), Node::Mul(c, rest)) = (self.as_const(), other.node()) {
            if let Some(c) = c.as_const() {
                return Self::constant(k * c).mul(rest);
            }
            return Self::wrap(Node::Mul(self.clone(), other.clone()));
        }
        if self.as_const().is_some() {
            return Self::wrap(Node::Mul(self.clone(), other.clone()));
        }
        if let Node::Mul(c, rest) = self.node() {
            if c.as_const().is_some() {
                return c.mul(&rest.mul(other));
            }
        }
        if let Node::Mul(c, rest) = other.node() {
            if c.as_const().is_some() {
                return c.mul(&self.mul(rest));
            }
        }
        let (b1, e1) = self.base_exponent();
        let (b2, e2) = other.base_exponent();
        if b1 == b2 {
            return b1.powf(e1 + e2);
        }
        Self::wrap(Node::Mul(self.clone(), other.clone()))
    }

    fn base_exponent(&self) -> (Expr, f64) {
        match self.node() {
            Node::Pow(u, alpha) => (u.clone(), *alpha),
            _ => (self.clone(), 1.0),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::constant(c).mul(self)
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    pub fn sub(&self, other: &Expr) -> Self {
        self.add(&other.neg())
    }

    pub fn div(&self, other: &Expr) -> Self {
        self.mul(&other.powf(-1.0))
    }

    pub fn powf(&self, alpha: f64) -> Self {
        if alpha == 0.0 {
            return Self::constant(1.0);
        }
        if alpha == 1.0 {
            return self.clone();
        }
        if let Some(c) = self.as_const() {
            return Self::constant(pow_real(c, alpha));
        }
        if let Node::Pow(u, beta) = self.node() {
            // (u^β)^α = u^{αβ} holds whenever α is an integer.
            if is_integer(alpha) {
                return u.powf(alpha * beta);
            }
        }
        Self::wrap(Node::Pow(self.clone(), alpha))
    }

    pub fn exp(&self) -> Self {
        match self.as_const() {
            Some(c) => Self::constant(c.exp()),
            None => Self::wrap(Node::Exp(self.clone())),
        }
    }

    pub fn ln(&self) -> Self {
        match self.as_const() {
            Some(c) => Self::constant(c.ln()),
            None => Self::wrap(Node::Log(self.clone())),
        }
    }

    /// E^λ_{p,b}(self).
    pub fn ml(&self, spec: MLSpec) -> Self {
        if spec.lambda == 0.0 {
            return Self::constant(crate::specfun::gamma_recip(spec.b));
        }
        Self::wrap(Node::Ml(spec, self.clone()))
    }

    /// Substitute `inner` for the variable.
    pub fn compose(&self, inner: &Expr) -> Self {
        match self.node() {
            Node::Const(_) => self.clone(),
            Node::X => inner.clone(),
            Node::Add(a, b) => a.compose(inner).add(&b.compose(inner)),
            Node::Mul(a, b) => a.compose(inner).mul(&b.compose(inner)),
            Node::Pow(u, alpha) => u.compose(inner).powf(*alpha),
            Node::Exp(u) => u.compose(inner).exp(),
            Node::Log(u) => u.compose(inner).ln(),
            Node::Ml(spec, u) => u.compose(inner).ml(*spec),
        }
    }

    /// Symbolic derivative d/dx.
    pub fn derivative(&self) -> Self {
        match self.node() {
            Node::Const(_) => Self::constant(0.0),
            Node::X => Self::constant(1.0),
            Node::Add(a, b) => a.derivative().add(&b.derivative()),
            Node::Mul(a, b) => a.derivative().mul(b).add(&a.mul(&b.derivative())),
            Node::Pow(u, alpha) => u.powf(alpha - 1.0).scale(*alpha).mul(&u.derivative()),
            Node::Exp(u) => self.mul(&u.derivative()),
            Node::Log(u) => u.derivative().div(u),
            Node::Ml(spec, u) => u.ml(spec.shifted(1)).scale(spec.lambda).mul(&u.derivative()),
        }
    }

    /// n-th symbolic derivative.
    pub fn nth_derivative(&self, n: usize) -> Self {
        (0..n).fold(self.clone(), |e, _| e.derivative())
    }

    /// Number of nodes, counting shared subtrees once per use.
    pub fn size(&self) -> usize {
        match self.node() {
            Node::Const(_) | Node::X => 1,
            Node::Add(a, b) | Node::Mul(a, b) => 1 + a.size() + b.size(),
            Node::Pow(u, _) | Node::Exp(u) | Node::Log(u) | Node::Ml(_, u) => 1 + u.size(),
        }
    }

    /// True when the tree contains a Mittag-Leffler atom.
    pub fn has_ml(&self) -> bool {
        match self.node() {
            Node::Const(_) | Node::X => false,
            Node::Add(a, b) | Node::Mul(a, b) => a.has_ml() || b.has_ml(),
            Node::Pow(u, _) | Node::Exp(u) | Node::Log(u) => u.has_ml(),
            Node::Ml(..) => true,
        }
    }

    /// Value at `x`. Real powers of negative bases and logarithms of
    /// non-positive values give NaN; only Mittag-Leffler atoms can fail.
    pub fn eval(&self, x: f64) -> Result<f64> {
        self.eval_with(x, &MlTolerances::default())
    }

    pub fn eval_with(&self, x: f64, tol: &MlTolerances) -> Result<f64> {
        Ok(match self.node() {
            Node::Const(c) => *c,
            Node::X => x,
            Node::Add(a, b) => a.eval_with(x, tol)? + b.eval_with(x, tol)?,
            Node::Mul(a, b) => a.eval_with(x, tol)? * b.eval_with(x, tol)?,
            Node::Pow(u, alpha) => pow_real(u.eval_with(x, tol)?, *alpha),
            Node::Exp(u) => u.eval_with(x, tol)?.exp(),
            Node::Log(u) => u.eval_with(x, tol)?.ln(),
            Node::Ml(spec, u) => ml_eval_with(spec, u.eval_with(x, tol)?, tol)?.value,
        })
    }

    /// Value at `x`, turning NaN and infinities into a domain error.
    pub fn eval_finite(&self, x: f64) -> Result<f64> {
        let v = self.eval(x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Domain(format!("{self} is not finite at x = {x}")))
        }
    }
}

/// Structural equality, treating exponents that differ by rounding as equal.
fn same_term(a: &Expr, b: &Expr) -> bool {
    match (a.node(), b.node()) {
        (Node::Pow(u, alpha), Node::Pow(v, beta)) => {
            u == v && (alpha - beta).abs() <= 4.0 * f64::EPSILON * alpha.abs().max(1.0)
        }
        _ => a == b,
    }
}

/// u^α with integer exponents routed through `powi` so negative bases work.
pub(crate) fn pow_real(u: f64, alpha: f64) -> f64 {
    if is_integer(alpha) && alpha.abs() < 1024.0 {
        u.powi(alpha as i32)
    } else {
        u.powf(alpha)
    }
}

fn fmt_num(f: &mut fmt::Formatter<'_>, c: f64) -> fmt::Result {
    if c < 0.0 {
        write!(f, "({c:?})")
    } else {
        write!(f, "{c:?}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const(c) => fmt_num(f, *c),
            Node::X => write!(f, "x"),
            Node::Add(a, b) => write!(f, "({a} + {b})"),
            Node::Mul(a, b) => write!(f, "{a}*{b}"),
            Node::Pow(u, alpha) => {
                write!(f, "pow({u}, ")?;
                fmt_num(f, *alpha)?;
                write!(f, ")")
            }
            Node::Exp(u) => write!(f, "exp({u})"),
            Node::Log(u) => write!(f, "log({u})"),
            Node::Ml(s, u) => write!(f, "mlf({:?}, {:?}, {:?}; {u})", s.lambda, s.p, s.b),
        }
    }
}

impl std::str::FromStr for Expr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn constructors_fold_constants() {
        let x = Expr::x();
        assert!(x.mul(&Expr::constant(0.0)).is_zero());
        assert_eq!(x.add(&Expr::constant(0.0)), x);
        assert_eq!(Expr::constant(2.0).powf(3.0).as_const(), Some(8.0));
        assert_eq!(x.powf(0.5).powf(2.0), x);
        assert_eq!(x.mul(&x.powf(-1.7).scale(3.0)), x.powf(-0.7).scale(3.0));
    }

    #[test]
    fn derivative_of_products_and_powers() {
        // d/dx [x^2 e^{-x}] = (2x - x^2) e^{-x}
        let f = parse("x^2*exp(-x)").unwrap();
        let d = f.derivative();
        for &x in &[0.3f64, 1.0, 2.5] {
            let exact = (2.0 * x - x * x) * (-x).exp();
            assert!(close(d.eval(x).unwrap(), exact, 1e-14));
        }
    }

    #[test]
    fn derivative_of_log_and_ml() {
        let f = parse("log(1 + 1/x)").unwrap();
        let d = f.derivative();
        let x = 0.7;
        assert!(close(d.eval(x).unwrap(), -1.0 / (x * (x + 1.0)), 1e-14));
        // E^1_{1,1}(-x) = e^{-x}
        let g = parse("mlf(1, 1, 1; -x)").unwrap();
        let d2 = g.nth_derivative(2);
        assert!(close(d2.eval(1.3).unwrap(), (-1.3f64).exp(), 1e-12));
    }

    #[test]
    fn euler_identity_for_auxiliary_operator() {
        // (x^2 d/dx)^n (x f) = x^{n+1} d^n(x^n f)/dx^n
        let f = parse("exp(-x) + pow(x, 0.3)").unwrap();
        let x = Expr::x();
        for n in 0..=4usize {
            let mut lhs = x.mul(&f);
            for _ in 0..n {
                lhs = x.powf(2.0).mul(&lhs.derivative());
            }
            let rhs = x.powf(n as f64 + 1.0).mul(&x.powf(n as f64).mul(&f).nth_derivative(n));
            for &p in &[0.4, 1.1, 2.0] {
                let (l, r) = (lhs.eval(p).unwrap(), rhs.eval(p).unwrap());
                assert!(close(l, r, 1e-10), "n={n} x={p}: {l} vs {r}");
            }
        }
    }

    #[test]
    fn compose_substitutes_variable() {
        let f = parse("x^2 + 1").unwrap();
        let g = f.compose(&parse("1/x").unwrap());
        assert!(close(g.eval(2.0).unwrap(), 1.25, 1e-15));
    }

    #[test]
    fn display_round_trips() {
        for src in ["pow(x, 0.5) - 3*x^2", "exp(-x)*log(2 + x)", "mlf(0.5, 0.5, 1; -x^0.5)", "1/(1 + x)"] {
            let e = parse(src).unwrap();
            let back = parse(&e.to_string()).unwrap();
            for &x in &[0.25, 1.5] {
                assert!(close(e.eval(x).unwrap(), back.eval(x).unwrap(), 1e-15), "{src} -> {e}");
            }
        }
    }

    #[test]
    fn negative_base_integer_power() {
        let f = parse("(x - 2)^3").unwrap();
        assert_eq!(f.eval(1.0).unwrap(), -1.0);
    }
}
