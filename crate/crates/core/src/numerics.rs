//! Exact-rational and floating-point primitives behind every closed form.
//!
//! Exact values are [`Rational`] (arbitrary precision, always reduced). The
//! floating-point route goes through `ln Γ` and keeps track of how much an
//! alternating sum cancelled, so callers can tell when a float result is
//! no longer trustworthy.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Arbitrary-precision rational in lowest terms with a positive denominator.
pub type Rational = num_rational::BigRational;

/// Shorthand for building a rational from machine integers.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// Arithmetic route used by the closed-form evaluators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeKind {
    Exact,
    Float,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalMode {
    pub kind: ModeKind,
    /// Estimated relative error above which a float alternating sum is flagged.
    pub cancellation_warn_threshold: f64,
}

impl EvalMode {
    pub const DEFAULT_WARN_THRESHOLD: f64 = 1e-8;

    /// Largest number of urn trials evaluated exactly by [`EvalMode::auto`].
    pub const AUTO_EXACT_MAX_TRIALS: u64 = 500;

    pub fn exact() -> Self {
        EvalMode {
            kind: ModeKind::Exact,
            cancellation_warn_threshold: Self::DEFAULT_WARN_THRESHOLD,
        }
    }

    pub fn float() -> Self {
        EvalMode {
            kind: ModeKind::Float,
            cancellation_warn_threshold: Self::DEFAULT_WARN_THRESHOLD,
        }
    }

    /// Exact up to [`Self::AUTO_EXACT_MAX_TRIALS`] trials, float above.
    pub fn auto(trials: u64) -> Self {
        if trials <= Self::AUTO_EXACT_MAX_TRIALS {
            Self::exact()
        } else {
            Self::float()
        }
    }

    pub fn is_exact(&self) -> bool {
        self.kind == ModeKind::Exact
    }
}

impl Default for EvalMode {
    fn default() -> Self {
        Self::exact()
    }
}

/// A value produced in either arithmetic route.
#[derive(Debug, Clone, PartialEq)]
pub enum Number {
    Exact(Rational),
    Float(f64),
}

impl Number {
    pub fn to_f64(&self) -> f64 {
        match self {
            Number::Exact(r) => to_f64(r),
            Number::Float(x) => *x,
        }
    }

    pub fn as_exact(&self) -> Option<&Rational> {
        match self {
            Number::Exact(r) => Some(r),
            Number::Float(_) => None,
        }
    }
}

/// Nearest `f64` to a rational, robust to numerators and denominators far
/// outside the `f64` range.
pub fn to_f64(r: &Rational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && n != 0.0 && d != 0.0 {
            return n / d;
        }
    }
    // Shift both sides down to 64 significant bits before dividing.
    let nb = r.numer().bits() as i64;
    let db = r.denom().bits() as i64;
    let ns = (nb - 64).max(0);
    let ds = (db - 64).max(0);
    let n = (r.numer() >> ns as usize).to_f64().unwrap_or(0.0);
    let d = (r.denom() >> ds as usize).to_f64().unwrap_or(1.0);
    n / d * 2f64.powi((ns - ds) as i32)
}

/// `x (x-1) ... (x-m+1)`; the empty product for `m = 0` is 1.
pub fn falling_factorial(x: &Rational, m: u64) -> Rational {
    let (num, den) = falling_factorial_parts(x, m);
    Rational::new(num, den)
}

/// `c (c+1) ... (c+m-1)`, which equals `[m + c - 1]_m`.
pub fn rising_factorial(c: &Rational, m: u64) -> Rational {
    let (num, den) = rising_factorial_parts(c, m);
    Rational::new(num, den)
}

// Unreduced numerator and denominator of x(x-1)...(x-m+1). Working over the
// common denominator q^m keeps the inner loop in integers.
fn falling_factorial_parts(x: &Rational, m: u64) -> (BigInt, BigInt) {
    let p = x.numer();
    let q = x.denom();
    let mut num = BigInt::one();
    let mut term = p.clone();
    for _ in 0..m {
        num *= &term;
        term -= q;
    }
    (num, num_traits::pow(q.clone(), m as usize))
}

fn rising_factorial_parts(c: &Rational, m: u64) -> (BigInt, BigInt) {
    let p = c.numer();
    let q = c.denom();
    let mut num = BigInt::one();
    let mut term = p.clone();
    for _ in 0..m {
        num *= &term;
        term += q;
    }
    (num, num_traits::pow(q.clone(), m as usize))
}

/// `[m + c_num - 1]_m / [m + c_den - 1]_m`.
///
/// Exact mode multiplies out both rising products; float mode uses
/// `[m + c - 1]_m = Γ(m + c) / Γ(c)` on log scale, splitting off the
/// non-positive factors when `c ≤ 0`.
pub fn falling_factorial_ratio(
    c_num: &Rational,
    c_den: &Rational,
    m: u64,
    mode: EvalMode,
) -> Result<Number> {
    match mode.kind {
        ModeKind::Exact => {
            let (dn, dd) = rising_factorial_parts(c_den, m);
            if dn.is_zero() {
                return Err(Error::ZeroDenominator);
            }
            let (nn, nd) = rising_factorial_parts(c_num, m);
            Ok(Number::Exact(Rational::new(nn * dd, nd * dn)))
        }
        ModeKind::Float => {
            let den = ln_rising_abs(to_f64(c_den), m);
            if den.sign == 0 {
                return Err(Error::ZeroDenominator);
            }
            let num = ln_rising_abs(to_f64(c_num), m);
            if num.sign == 0 {
                return Ok(Number::Float(0.0));
            }
            let sign = f64::from(num.sign * den.sign);
            Ok(Number::Float(sign * (num.ln_abs - den.ln_abs).exp()))
        }
    }
}

/// Sign and log-magnitude of a real number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLog {
    /// -1, 0 or +1. When zero, `ln_abs` is `-inf`.
    pub sign: i8,
    pub ln_abs: f64,
}

/// `ln |c (c+1) ... (c+m-1)|` with its sign, for any real `c`.
pub fn ln_rising_abs(c: f64, m: u64) -> SignedLog {
    let mut sign = 1i8;
    let mut ln_abs = 0.0;
    let mut c = c;
    let mut left = m;
    // Peel factors until the remaining product starts at a positive argument.
    while left > 0 && c <= 0.0 {
        if c == 0.0 {
            return SignedLog {
                sign: 0,
                ln_abs: f64::NEG_INFINITY,
            };
        }
        sign = -sign;
        ln_abs += (-c).ln();
        c += 1.0;
        left -= 1;
    }
    if left > 0 {
        ln_abs += ln_gamma_unchecked(c + left as f64) - ln_gamma_unchecked(c);
    }
    SignedLog { sign, ln_abs }
}

/// Error of [`log_gamma`] relative to `max(|ln Γ(x)|, 1)`; the worst case
/// measured over `[0.5, 1e9]` is about 45 ulps.
pub const LN_GAMMA_REL_ERROR: f64 = 64.0 * f64::EPSILON;

/// Absolute error bound on the `ln_abs` returned by [`ln_rising_abs`].
pub fn ln_rising_abs_error(c: f64, m: u64) -> f64 {
    let mut err = 0.0;
    let mut c = c;
    let mut left = m;
    while left > 0 && c <= 0.0 {
        err += f64::EPSILON * (-c).ln().abs().max(1.0);
        c += 1.0;
        left -= 1;
    }
    if left > 0 {
        let hi = ln_gamma_unchecked(c + left as f64).abs();
        let lo = ln_gamma_unchecked(c).abs();
        err += LN_GAMMA_REL_ERROR * (hi.max(1.0) + lo.max(1.0)) + f64::EPSILON * (hi + lo);
    }
    err
}

/// Natural log of `Γ(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if x.is_nan() || x <= 0.0 || !x.is_finite() {
        return Err(Error::Domain(format!("log_gamma requires x > 0, got {x}")));
    }
    Ok(ln_gamma_unchecked(x))
}

fn ln_gamma_unchecked(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// Generalized binomial `[r]_n / n!`, defined for any rational upper argument.
pub fn binomial(r: &Rational, n: u64) -> Rational {
    let (num, den) = falling_factorial_parts(r, n);
    let mut fact = BigInt::one();
    for j in 2..=n {
        fact *= j;
    }
    Rational::new(num, den * fact)
}

/// Integer binomial coefficient `C(n, k)`.
pub fn binomial_int(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for j in 0..k {
        acc *= n - j;
        acc /= j + 1;
    }
    acc
}

/// Least common multiple of the denominators of `values`.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

/// Neumaier-compensated sum that also tracks the largest term magnitude.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
    max_abs_term: f64,
    abs_terms: f64,
    term_error: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, term: f64) {
        self.add_uncertain(term, 0.0);
    }

    /// Adds a term already carrying an absolute error of up to `abs_error`.
    pub fn add_uncertain(&mut self, term: f64, abs_error: f64) {
        self.abs_terms += term.abs();
        self.term_error += abs_error;
        let t = self.sum + term;
        if self.sum.abs() >= term.abs() {
            self.compensation += (self.sum - t) + term;
        } else {
            self.compensation += (term - t) + self.sum;
        }
        self.sum = t;
        self.max_abs_term = self.max_abs_term.max(term.abs());
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }

    /// `max |term| / |result|`; infinite when the result is zero but terms are not.
    pub fn cancellation_ratio(&self) -> f64 {
        let v = self.value().abs();
        if self.max_abs_term == 0.0 {
            1.0
        } else if v == 0.0 {
            f64::INFINITY
        } else {
            (self.max_abs_term / v).max(1.0)
        }
    }

    /// Relative error bound of [`Self::value`]: input errors plus summation
    /// roundoff, over `|value|`. At least 1 once the bound swamps the result.
    pub fn estimated_relative_error(&self) -> f64 {
        let bound = self.term_error + 2.0 * f64::EPSILON * self.abs_terms;
        let v = self.value().abs();
        if bound == 0.0 {
            0.0
        } else if v == 0.0 {
            f64::INFINITY
        } else {
            bound / v
        }
    }
}

impl Extend<f64> for CompensatedSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for t in iter {
            self.add(t);
        }
    }
}

pub(crate) fn is_integral(r: &Rational) -> bool {
    r.denom().is_one()
}
