//! Independent routes to the urn distribution, used to check [`super::urn_pmf`].

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::numerics::{binomial, is_integral, Rational};
use crate::pmf::DegreePmf;

use super::{IntegerUrn, TriangularUrnSpec};

pub const DP_MAX_TRIALS: u64 = 5000;
pub const GF_MAX_TRIALS: u64 = 8;

/// Draw-by-draw dynamic program over the white count.
///
/// Weights are kept as integers over the running history count
/// `t0 (t0 + sigma) ... `, so each step is one multiply-add per state.
pub struct UrnDp {
    spec: TriangularUrnSpec,
    urn: IntegerUrn,
    weights: Vec<BigInt>,
    histories: BigInt,
    steps: u64,
}

impl UrnDp {
    pub fn new(spec: &TriangularUrnSpec) -> Self {
        UrnDp {
            spec: spec.clone(),
            urn: spec.integer_scaled(),
            weights: vec![BigInt::one()],
            histories: BigInt::one(),
            steps: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn step(&mut self) {
        let total = self.urn.t0() + &self.urn.sigma * self.steps;
        let mut next = vec![BigInt::zero(); self.weights.len() + 1];
        let mut whites = self.urn.a0.clone();
        for (x, w) in self.weights.iter().enumerate() {
            if !w.is_zero() {
                let blacks = &total - &whites;
                match (whites.to_i64(), blacks.to_i64()) {
                    (Some(a), Some(b)) => {
                        next[x + 1] += w * a;
                        next[x] += w * b;
                    }
                    _ => {
                        next[x + 1] += w * &whites;
                        next[x] += w * blacks;
                    }
                }
            }
            whites += &self.urn.alpha;
        }
        self.weights = next;
        self.histories *= total;
        self.steps += 1;
    }

    /// Number of draw sequences reaching each white count.
    pub fn weights(&self) -> &[BigInt] {
        &self.weights
    }

    /// Total number of draw sequences so far (the common denominator).
    pub fn histories(&self) -> &BigInt {
        &self.histories
    }

    pub fn pmf(&self) -> DegreePmf {
        let probs = self
            .weights
            .iter()
            .map(|w| Rational::new(w.clone(), self.histories.clone()))
            .collect();
        DegreePmf::exact(self.spec.a0().clone(), self.spec.alpha(), probs)
    }
}

/// Exact distribution of `A_m` by forward recursion over draws.
pub fn urn_pmf_dp_oracle(spec: &TriangularUrnSpec, m: u64) -> Result<DegreePmf> {
    if m > DP_MAX_TRIALS {
        return Err(Error::ParameterOutOfRange(format!(
            "dp oracle supports m <= {DP_MAX_TRIALS}, got {m}"
        )));
    }
    let mut dp = UrnDp::new(spec);
    for _ in 0..m {
        dp.step();
    }
    Ok(dp.pmf())
}

type Series = Vec<Rational>;

fn mul_truncated(a: &[Rational], b: &[Rational], len: usize) -> Series {
    let mut out = vec![Rational::zero(); len];
    for (i, x) in a.iter().enumerate().take(len) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            if !y.is_zero() {
                out[i + j] += x * y;
            }
        }
    }
    out
}

/// `(1 - sigma z)^e` truncated to `len` terms: coefficient `C(e, n) (-sigma)^n`.
fn power_of_linear(e: &Rational, sigma: u64, len: usize) -> Series {
    let minus_sigma = -Rational::from_integer(sigma.into());
    let mut pow = Rational::one();
    let mut out = Vec::with_capacity(len);
    for n in 0..len {
        out.push(binomial(e, n as u64) * &pow);
        pow *= &minus_sigma;
    }
    out
}

/// Rows `n = 0..=m` of the history generating function
/// `x^a0 Δ^b0 (1 - x^alpha (1 - Δ^-alpha))^(-a0/alpha)` with
/// `Δ = (1 - sigma z)^(-1/sigma)`, each normalized into a pmf of `A_n`.
pub fn urn_gf_rows(spec: &TriangularUrnSpec, m: u64) -> Result<Vec<DegreePmf>> {
    if !is_integral(spec.a0()) || !is_integral(spec.b0()) {
        return Err(Error::NonIntegralParameters {
            a0: spec.a0().to_string(),
            b0: spec.b0().to_string(),
        });
    }
    if m > GF_MAX_TRIALS {
        return Err(Error::ParameterOutOfRange(format!(
            "generating-function oracle supports m <= {GF_MAX_TRIALS}, got {m}"
        )));
    }
    let len = m as usize + 1;
    let sigma = Rational::from_integer(spec.sigma().into());
    let alpha = Rational::from_integer(spec.alpha().into());

    // Δ^b0 = (1 - sigma z)^(-b0/sigma)
    let delta_b0 = power_of_linear(&(-spec.b0() / &sigma), spec.sigma(), len);
    // 1 - Δ^-alpha = 1 - (1 - sigma z)^(alpha/sigma), which has no constant term.
    let mut w = power_of_linear(&(&alpha / &sigma), spec.sigma(), len);
    for c in &mut w {
        *c = -c.clone();
    }
    w[0] += Rational::one();
    debug_assert!(w[0].is_zero());

    // (1 - x^alpha W)^(-a0/alpha) = sum_r C(r + a0/alpha - 1, r) x^(alpha r) W^r.
    // Only r <= m reaches z^m because W = O(z).
    let shape = spec.a0() / &alpha;
    let mut coeffs = vec![vec![Rational::zero(); len]; len]; // coeffs[n][r]
    let mut w_pow: Series = {
        let mut one = vec![Rational::zero(); len];
        one[0] = Rational::one();
        one
    };
    for r in 0..len {
        let c_r = binomial(
            &(Rational::from_integer((r as u64).into()) + &shape - Rational::one()),
            r as u64,
        );
        let series = mul_truncated(&delta_b0, &w_pow, len);
        for (n, s) in series.iter().enumerate() {
            coeffs[n][r] = &c_r * s;
        }
        w_pow = mul_truncated(&w_pow, &w, len);
    }

    // [z^n x^(a0 + alpha r)] H = H_n / n!; divide by the total history count.
    let t0 = spec.t0();
    let mut rows = Vec::with_capacity(len);
    let mut factorial = Rational::one();
    let mut histories = Rational::one();
    for (n, row) in coeffs.into_iter().enumerate() {
        if n > 0 {
            factorial *= Rational::from_integer((n as u64).into());
            histories *= &t0 + &sigma * Rational::from_integer((n as u64 - 1).into());
        }
        let probs = row
            .into_iter()
            .take(n + 1)
            .map(|c| c * &factorial / &histories)
            .collect::<Vec<_>>();
        debug_assert!(probs.iter().all(|p| !p.is_negative()));
        rows.push(DegreePmf::exact(spec.a0().clone(), spec.alpha(), probs));
    }
    Ok(rows)
}

/// The `z^m` row of [`urn_gf_rows`].
pub fn urn_gf_oracle(spec: &TriangularUrnSpec, m: u64) -> Result<DegreePmf> {
    let mut rows = urn_gf_rows(spec, m)?;
    Ok(rows.pop().expect("at least the z^0 row"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{int, ratio, EvalMode};
    use crate::urn::urn_pmf;

    fn spec(alpha: u64, sigma: u64, a0: i64, b0: i64) -> TriangularUrnSpec {
        TriangularUrnSpec::from_ints(alpha, sigma, a0, b0).unwrap()
    }

    #[test]
    fn dp_hand_examples() {
        let pmf = urn_pmf_dp_oracle(&spec(1, 2, 2, 2), 1).unwrap();
        assert_eq!(pmf.exact_probs().unwrap(), &[ratio(1, 2), ratio(1, 2)]);
        let pmf = urn_pmf_dp_oracle(&spec(3, 5, 4, 1), 0).unwrap();
        assert_eq!(pmf.support_offset, int(4));
        assert_eq!(pmf.exact_probs().unwrap(), &[int(1)]);
        assert!(urn_pmf_dp_oracle(&spec(1, 2, 1, 1), DP_MAX_TRIALS + 1).is_err());
    }

    #[test]
    fn dp_scale_invariance() {
        for c in [2u64, 3] {
            let base = spec(1, 2, 3, 4);
            let scaled = base.scaled(c).unwrap();
            let a = urn_pmf_dp_oracle(&base, 12).unwrap();
            let b = urn_pmf_dp_oracle(&scaled, 12).unwrap();
            assert_eq!(a.exact_probs(), b.exact_probs());
        }
    }

    #[test]
    fn gf_hand_examples() {
        let pmf = urn_gf_oracle(&spec(1, 2, 2, 2), 1).unwrap();
        assert_eq!(pmf.exact_probs().unwrap(), &[ratio(1, 2), ratio(1, 2)]);
        let rows = urn_gf_rows(&spec(2, 5, 3, 4), 3).unwrap();
        assert_eq!(rows[0].exact_probs().unwrap(), &[int(1)]);
        assert_eq!(rows[0].support_offset, int(3));
    }

    #[test]
    fn gf_matches_dp_small_grid() {
        for (alpha, sigma, a0, b0) in [
            (1, 2, 1, 1),
            (1, 2, 2, 3),
            (2, 3, 1, 0),
            (3, 7, 5, 2),
            (2, 2, 4, 1),
        ] {
            let s = spec(alpha, sigma, a0, b0);
            let rows = urn_gf_rows(&s, 8).unwrap();
            let mut dp = UrnDp::new(&s);
            for row in &rows {
                assert_eq!(
                    row.exact_probs(),
                    dp.pmf().exact_probs(),
                    "{s:?} m={}",
                    dp.steps()
                );
                dp.step();
            }
        }
    }

    #[test]
    fn gf_rejects_fractional_and_large() {
        let s = TriangularUrnSpec::new(1, 2, ratio(1, 2), int(1)).unwrap();
        assert!(matches!(
            urn_gf_oracle(&s, 2),
            Err(Error::NonIntegralParameters { .. })
        ));
        assert!(matches!(
            urn_gf_oracle(&spec(1, 2, 1, 1), 9),
            Err(Error::ParameterOutOfRange(_))
        ));
    }

    #[test]
    fn closed_form_matches_dp_with_fractional_shape() {
        // a0/alpha = 5/3 and b0 odd with even sigma exercise non-integral arguments.
        let s = spec(3, 4, 5, 7);
        for m in [0, 1, 2, 9, 30] {
            let closed = urn_pmf(&s, m, EvalMode::exact()).unwrap();
            let dp = urn_pmf_dp_oracle(&s, m).unwrap();
            assert_eq!(closed, dp, "m={m}");
        }
    }
}
