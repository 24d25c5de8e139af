use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::numerics::{
    falling_factorial_ratio, ln_rising_abs, ln_rising_abs_error, to_f64, CompensatedSum, EvalMode,
    ModeKind, Number, Rational,
};
use crate::pmf::{CancellationWarning, DegreePmf};

use super::TriangularUrnSpec;

/// `P(A_m = a0 + x alpha)` for `x = 0..=m`:
///
/// ```text
/// C(x + a0/alpha - 1, x) * sum_i (-1)^i C(x, i) [m + (b0 - alpha i)/sigma - 1]_m / [m + t0/sigma - 1]_m
/// ```
pub fn urn_pmf(spec: &TriangularUrnSpec, m: u64, mode: EvalMode) -> Result<DegreePmf> {
    match mode.kind {
        ModeKind::Exact => exact_pmf(spec, m),
        ModeKind::Float => float_pmf(spec, m, mode.cancellation_warn_threshold),
    }
}

/// Exact pmf kept over the common denominator `D = t0 (t0 + sigma) ... `
/// (in integer-scaled units): `P(x) = prefactor_x * alternating_sum_x / D`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledPmf {
    pub support_offset: Rational,
    pub step: u64,
    /// `C(x + a0/alpha - 1, x)` as an unreduced `(numerator, denominator)`.
    pub prefactors: Vec<(BigInt, BigInt)>,
    /// `sum_i (-1)^i C(x, i) N_i`.
    pub alternating_sums: Vec<BigInt>,
    pub denominator: BigInt,
}

impl ScaledPmf {
    /// `P(x) * D` for every `x`, or `None` if some entry is not an integer
    /// (which cannot happen for a correct evaluation, since `D` counts
    /// equally likely draw sequences).
    pub fn history_weights(&self) -> Option<Vec<BigInt>> {
        self.prefactors
            .iter()
            .zip(&self.alternating_sums)
            .map(|((num, den), s)| {
                let (q, r) = (num * s).div_rem(den);
                r.is_zero().then_some(q)
            })
            .collect()
    }

    pub fn to_pmf(&self) -> DegreePmf {
        let probs = self
            .prefactors
            .iter()
            .zip(&self.alternating_sums)
            .map(|((num, den), s)| Rational::new(num * s, den * &self.denominator))
            .collect();
        DegreePmf::exact(self.support_offset.clone(), self.step, probs)
    }
}

/// Exact evaluation of the alternating sum without reducing the entries.
pub fn urn_pmf_scaled(spec: &TriangularUrnSpec, m: u64) -> Result<ScaledPmf> {
    // After clearing denominators every falling factorial is a product of
    // integers over the same power of the scale, which cancels in the ratio:
    //   [m + c_i - 1]_m / [m + t0/sigma - 1]_m = N_i / D
    //   N_i = prod_j (b0 - alpha i + j sigma),  D = prod_j (t0 + j sigma).
    let u = spec.integer_scaled();
    let t0 = u.t0();
    let mut denominator = BigInt::one();
    for j in 0..m {
        denominator *= &t0 + &u.sigma * j;
    }
    if denominator.is_zero() {
        return Err(Error::ZeroDenominator);
    }

    let len = m as usize + 1;
    let mut numerators: Vec<BigInt> = Vec::with_capacity(len);
    for i in 0..=m {
        let mut factor = &u.b0 - &u.alpha * i;
        let mut acc = BigInt::one();
        for _ in 0..m {
            match factor.to_i64() {
                Some(f) => acc *= f,
                None => acc *= &factor,
            }
            factor += &u.sigma;
        }
        numerators.push(acc);
    }

    // sum_i (-1)^i C(x, i) N_i is (-1)^x times the x-th forward difference of
    // N at 0, so one difference table yields the inner sum for every x.
    let mut sums = Vec::with_capacity(len);
    let mut row = numerators;
    for x in 0..len {
        let s = if x % 2 == 0 {
            row[0].clone()
        } else {
            -row[0].clone()
        };
        sums.push(s);
        for idx in 0..row.len() - 1 {
            let (head, tail) = row.split_at_mut(idx + 1);
            head[idx] -= &tail[0];
            let v = std::mem::take(&mut head[idx]);
            head[idx] = -v;
        }
        row.pop();
    }

    // C(x + r - 1, x) with r = p/q = a0/alpha, built incrementally as
    // prod_y (y q + p - q) / prod_y (y q).
    let r = spec.a0() / Rational::from_integer(spec.alpha().into());
    let (p, q) = (r.numer().clone(), r.denom().clone());
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    let mut prefactors = Vec::with_capacity(len);
    for x in 0..len {
        if x > 0 {
            let yq = &q * x;
            num *= &yq + &p - &q;
            den *= yq;
        }
        prefactors.push((num.clone(), den.clone()));
    }
    Ok(ScaledPmf {
        support_offset: spec.a0().clone(),
        step: spec.alpha(),
        prefactors,
        alternating_sums: sums,
        denominator,
    })
}

fn exact_pmf(spec: &TriangularUrnSpec, m: u64) -> Result<DegreePmf> {
    Ok(urn_pmf_scaled(spec, m)?.to_pmf())
}

fn float_pmf(spec: &TriangularUrnSpec, m: u64, warn_threshold: f64) -> Result<DegreePmf> {
    let sigma = Rational::from_integer(spec.sigma().into());
    let alpha = Rational::from_integer(spec.alpha().into());
    let c_den = spec.t0() / &sigma;
    let c_den_f = to_f64(&c_den);
    let den_err = ln_rising_abs_error(c_den_f, m);
    let float = EvalMode::float();

    // Each ratio with the absolute error of its logarithm.
    let mut ratios = Vec::with_capacity(m as usize + 1);
    for i in 0..=m {
        let c_num = (spec.b0() - &alpha * Rational::from_integer(i.into())) / &sigma;
        let ln_err = den_err + ln_rising_abs_error(to_f64(&c_num), m);
        match falling_factorial_ratio(&c_num, &c_den, m, float)? {
            Number::Float(v) => ratios.push((v, ln_err)),
            Number::Exact(r) => ratios.push((to_f64(&r), ln_err)),
        }
    }

    let r = to_f64(&(spec.a0() / &alpha));
    let ln_fact: Vec<f64> = (0..=m).map(|x| ln_rising_abs(1.0, x).ln_abs).collect();
    let ln_fact_err: Vec<f64> = (0..=m).map(|x| ln_rising_abs_error(1.0, x)).collect();
    let mut probs = Vec::with_capacity(m as usize + 1);
    let mut warnings = Vec::new();
    for x in 0..=m as usize {
        let mut sum = CompensatedSum::new();
        for (i, &(ratio, ln_err)) in ratios.iter().enumerate().take(x + 1) {
            if ratio == 0.0 {
                continue;
            }
            let ln_binom = ln_fact[x] - ln_fact[i] - ln_fact[x - i];
            let term = ratio * ln_binom.exp();
            let rel =
                ln_err + ln_fact_err[x] + ln_fact_err[i] + ln_fact_err[x - i] + 4.0 * f64::EPSILON;
            sum.add_uncertain(if i % 2 == 0 { term } else { -term }, term.abs() * rel);
        }
        let ln_prefactor = ln_rising_abs(r, x as u64).ln_abs - ln_fact[x];
        probs.push(ln_prefactor.exp() * sum.value());
        let err = sum.estimated_relative_error();
        if err > warn_threshold {
            warnings.push(CancellationWarning {
                index: x,
                cancellation_ratio: sum.cancellation_ratio(),
                estimated_relative_error: err,
            });
        }
    }
    Ok(DegreePmf::float(
        spec.a0().clone(),
        spec.alpha(),
        probs,
        warnings,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{int, ratio};

    fn spec(alpha: u64, sigma: u64, a0: i64, b0: i64) -> TriangularUrnSpec {
        TriangularUrnSpec::from_ints(alpha, sigma, a0, b0).unwrap()
    }

    #[test]
    fn single_draw_examples() {
        let pmf = urn_pmf(&spec(1, 2, 1, 1), 1, EvalMode::exact()).unwrap();
        assert_eq!(pmf.support_offset, int(1));
        assert_eq!(pmf.exact_probs().unwrap(), &[ratio(1, 2), ratio(1, 2)]);
        let pmf = urn_pmf(&spec(1, 2, 2, 2), 1, EvalMode::exact()).unwrap();
        assert_eq!(pmf.support_offset, int(2));
        assert_eq!(pmf.exact_probs().unwrap(), &[ratio(1, 2), ratio(1, 2)]);
    }

    #[test]
    fn scaled_form_weights_are_history_counts() {
        // (1,2,1,1), two draws: 8 equally likely sequences split 3/3/2.
        let scaled = urn_pmf_scaled(&spec(1, 2, 1, 1), 2).unwrap();
        assert_eq!(scaled.denominator, BigInt::from(8));
        let w = scaled.history_weights().unwrap();
        assert_eq!(w, vec![BigInt::from(3), BigInt::from(3), BigInt::from(2)]);
    }

    #[test]
    fn zero_trials_is_point_mass() {
        for s in [spec(1, 2, 3, 5), spec(2, 3, 1, 0), spec(4, 8, 7, 12)] {
            let pmf = urn_pmf(&s, 0, EvalMode::exact()).unwrap();
            assert_eq!(pmf.support_offset, s.a0().clone());
            assert_eq!(pmf.exact_probs().unwrap(), &[int(1)]);
        }
    }

    #[test]
    fn two_draws_by_hand() {
        // (1,2,1,1): white 1/2 then 2/4 -> x=2 w.p. 1/4; x=0: 1/2 * 3/4 = 3/8.
        let pmf = urn_pmf(&spec(1, 2, 1, 1), 2, EvalMode::exact()).unwrap();
        assert_eq!(
            pmf.exact_probs().unwrap(),
            &[ratio(3, 8), ratio(3, 8), ratio(1, 4)]
        );
    }

    #[test]
    fn half_integer_parameters_are_exact() {
        // a0 = 1/2, b0 = 3/2: first draw white w.p. 1/4.
        let s = TriangularUrnSpec::new(1, 2, ratio(1, 2), ratio(3, 2)).unwrap();
        let pmf = urn_pmf(&s, 1, EvalMode::exact()).unwrap();
        assert_eq!(pmf.exact_probs().unwrap(), &[ratio(3, 4), ratio(1, 4)]);
        assert_eq!(pmf.total_exact().unwrap(), int(1));
    }

    #[test]
    fn float_mode_matches_exact_for_moderate_m() {
        let s = spec(1, 2, 2, 3);
        let exact = urn_pmf(&s, 40, EvalMode::exact()).unwrap().probs_f64();
        let float = urn_pmf(&s, 40, EvalMode::float()).unwrap();
        for (e, f) in exact.iter().zip(float.probs_f64()) {
            assert!((e - f).abs() <= 1e-9, "{e} vs {f}");
        }
    }

    #[test]
    fn float_error_estimate_bounds_actual_error() {
        for (s, m) in [
            (spec(1, 2, 3, 5), 26),
            (spec(1, 2, 2, 2), 198),
            (spec(1, 2, 5, 1), 117),
            (spec(1, 2, 2, 18), 390),
        ] {
            let exact = urn_pmf(&s, m, EvalMode::exact()).unwrap().probs_f64();
            let mut mode = EvalMode::float();
            mode.cancellation_warn_threshold = 0.0;
            let float = urn_pmf(&s, m, mode).unwrap();
            let got = float.probs_f64();
            for w in &float.warnings {
                let (e, f) = (exact[w.index], got[w.index]);
                if w.estimated_relative_error < 1.0 {
                    let actual = ((f - e) / e).abs();
                    assert!(
                        actual <= w.estimated_relative_error,
                        "m={m} x={}: {actual} > {}",
                        w.index,
                        w.estimated_relative_error
                    );
                }
            }
        }
    }

    #[test]
    fn float_mode_flags_cancellation() {
        let s = spec(1, 2, 2, 2);
        let pmf = urn_pmf(&s, 300, EvalMode::float()).unwrap();
        assert!(!pmf.warnings.is_empty());
        let idx = pmf.warnings.last().unwrap().index;
        assert!(idx > 20);
        assert!(pmf
            .warnings
            .iter()
            .all(|w| w.estimated_relative_error > 1e-8));
    }
}
