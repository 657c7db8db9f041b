//! Gamma function family.
//!
//! `gamma` uses a Lanczos sum (g = 607/128, 15 terms) with the reflection
//! formula below 1/2; large arguments go through a Stirling series in the
//! log domain.

use std::f64::consts::PI;

const LANCZOS_G: f64 = 4.742_187_5;
const LANCZOS: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_746,
    -0.491_913_816_097_620_2,
    3.399_464_998_481_189e-5,
    4.652_362_892_704_858e-5,
    -9.837_447_530_487_956e-5,
    1.580_887_032_249_125e-4,
    -2.102_644_417_241_048_8e-4,
    2.174_396_181_152_126_5e-4,
    -1.643_181_065_367_639e-4,
    8.441_822_398_385_275e-5,
    -2.619_083_840_158_140_8e-5,
    3.689_918_265_953_162_5e-6,
];
const SQRT_2PI: f64 = 2.506_628_274_631_000_5;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Largest argument for which Γ(x) is finite in double precision.
pub const GAMMA_MAX_ARG: f64 = 171.624_376_956_302_7;

fn factorial_table() -> &'static [f64; 171] {
    use std::sync::OnceLock;
    static TABLE: OnceLock<[f64; 171]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [1.0; 171];
        for k in 1..171 {
            t[k] = t[k - 1] * k as f64;
        }
        t
    })
}

/// n! as a float; infinite beyond 170.
pub fn factorial(n: usize) -> f64 {
    if n <= 170 {
        factorial_table()[n]
    } else {
        f64::INFINITY
    }
}

/// ln(n!).
pub fn ln_factorial(n: usize) -> f64 {
    if n <= 170 {
        factorial_table()[n].ln()
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}

/// sin(πx) with exact zeros at the integers.
pub fn sin_pi(x: f64) -> f64 {
    if !x.is_finite() {
        return f64::NAN;
    }
    let mut r = x - 2.0 * (x / 2.0).round();
    if r > 0.5 {
        r = 1.0 - r;
    } else if r < -0.5 {
        r = -1.0 - r;
    }
    (PI * r).sin()
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

fn lanczos_positive(x: f64) -> f64 {
    // Γ(x) for 0.5 <= x < GAMMA_MAX_ARG
    let xm1 = x - 1.0;
    let mut ser = LANCZOS[0];
    for (k, c) in LANCZOS.iter().enumerate().skip(1) {
        ser += c / (xm1 + k as f64);
    }
    let t = xm1 + LANCZOS_G + 0.5;
    let half = t.powf((xm1 + 0.5) / 2.0);
    SQRT_2PI * half * (-t).exp() * half * ser
}

/// Γ(x). Poles return NaN.
pub fn gamma(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if is_nonpositive_integer(x) {
        return f64::NAN;
    }
    if x == x.floor() && x <= 171.0 {
        return factorial(x as usize - 1);
    }
    if x >= GAMMA_MAX_ARG {
        return f64::INFINITY;
    }
    if x < 0.5 {
        // Γ(x)Γ(1-x) = π / sin(πx)
        return PI / (sin_pi(x) * gamma(1.0 - x));
    }
    lanczos_positive(x)
}

/// ln Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    if x.is_nan() || x <= 0.0 {
        return f64::NAN;
    }
    if x < 15.0 {
        return gamma(x).ln();
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv
        * (1.0 / 12.0
            - inv2
                * (1.0 / 360.0
                    - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 * (1.0 / 1188.0)))));
    (x - 0.5) * x.ln() - x + LN_SQRT_2PI + series
}

/// Signed log of |Γ(x)|: returns (ln|Γ(x)|, sign). Poles give (+inf, 0).
pub fn ln_gamma_signed(x: f64) -> (f64, f64) {
    if is_nonpositive_integer(x) {
        return (f64::INFINITY, 0.0);
    }
    if x > 0.0 {
        return (ln_gamma(x), 1.0);
    }
    let s = sin_pi(x);
    let lg = PI.ln() - s.abs().ln() - ln_gamma(1.0 - x);
    (lg, s.signum())
}

/// 1/Γ(x); exactly zero at the poles of Γ.
pub fn gamma_recip(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if is_nonpositive_integer(x) {
        return 0.0;
    }
    if x == x.floor() && x <= 171.0 {
        return 1.0 / factorial(x as usize - 1);
    }
    if x > 0.5 && x < GAMMA_MAX_ARG {
        return 1.0 / lanczos_positive(x);
    }
    if x >= GAMMA_MAX_ARG {
        return (-ln_gamma(x)).exp();
    }
    // reflection: 1/Γ(x) = sin(πx) Γ(1-x) / π
    let y = 1.0 - x;
    if y < GAMMA_MAX_ARG {
        sin_pi(x) * gamma(y) / PI
    } else {
        let s = sin_pi(x);
        s.signum() * (s.abs().ln() + ln_gamma(y) - PI.ln()).exp()
    }
}

/// Signed log of |1/Γ(x)|: (ln|1/Γ(x)|, sign), sign 0 at poles.
pub fn ln_gamma_recip_signed(x: f64) -> (f64, f64) {
    let (lg, s) = ln_gamma_signed(x);
    if s == 0.0 {
        (f64::NEG_INFINITY, 0.0)
    } else {
        (-lg, s)
    }
}

/// Rising or falling factorial selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Rising,
    Falling,
}

/// Pochhammer symbol: rising ∏(a-1+j), falling ∏(a+1-j), j = 1..n.
pub fn pochhammer(a: f64, n: usize, direction: Direction) -> f64 {
    let mut prod = 1.0;
    for j in 0..n {
        let f = match direction {
            Direction::Rising => a + j as f64,
            Direction::Falling => a - j as f64,
        };
        prod *= f;
    }
    prod
}

/// Rising factorial (a)_n.
pub fn rising(a: f64, n: usize) -> f64 {
    pochhammer(a, n, Direction::Rising)
}

/// Generalized binomial coefficient C(a, k) for real a.
pub fn binomial(a: f64, k: usize) -> f64 {
    let mut c = 1.0;
    for j in 0..k {
        c *= (a - j as f64) / (j as f64 + 1.0);
    }
    c
}

/// Beta function B(a, b) for positive arguments.
pub fn beta_fn(a: f64, b: f64) -> f64 {
    if a + b < 170.0 {
        gamma(a) * gamma(b) * gamma_recip(a + b)
    } else {
        (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp()
    }
}
