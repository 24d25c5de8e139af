use crate::numerics::{ln_rising_abs, rising_factorial, to_f64, Rational};

use super::TriangularUrnSpec;

// G(q) = Γ(t0/σ) Γ(m + q/σ) / (Γ(q/σ) Γ(t0/σ + m)), a ratio of rising
// factorials, so it telescopes into a finite rational product.
fn gamma_ratio(spec: &TriangularUrnSpec, q: &Rational, m: u64) -> Rational {
    let sigma = Rational::from_integer(spec.sigma().into());
    rising_factorial(&(q / &sigma), m) / rising_factorial(&(spec.t0() / &sigma), m)
}

fn gamma_ratio_float(spec: &TriangularUrnSpec, q: f64, m: u64) -> f64 {
    let sigma = spec.sigma() as f64;
    let t0 = to_f64(&spec.t0());
    (ln_rising_abs(q / sigma, m).ln_abs - ln_rising_abs(t0 / sigma, m).ln_abs).exp()
}

/// `E[A_m] = a0 G(t0 + alpha)`.
pub fn urn_mean(spec: &TriangularUrnSpec, m: u64) -> Rational {
    let alpha = Rational::from_integer(spec.alpha().into());
    spec.a0() * gamma_ratio(spec, &(spec.t0() + alpha), m)
}

pub fn urn_mean_float(spec: &TriangularUrnSpec, m: u64) -> f64 {
    let alpha = spec.alpha() as f64;
    to_f64(spec.a0()) * gamma_ratio_float(spec, to_f64(&spec.t0()) + alpha, m)
}

/// `E[A_m^2] = a0 [(a0 + alpha) G(t0 + 2 alpha) - alpha G(t0 + alpha)]`.
pub fn urn_second_moment(spec: &TriangularUrnSpec, m: u64) -> Rational {
    let alpha = Rational::from_integer(spec.alpha().into());
    let t0 = spec.t0();
    let two_alpha = &alpha + &alpha;
    let g2 = gamma_ratio(spec, &(&t0 + two_alpha), m);
    let g1 = gamma_ratio(spec, &(&t0 + &alpha), m);
    spec.a0() * ((spec.a0() + &alpha) * g2 - alpha * g1)
}

pub fn urn_second_moment_float(spec: &TriangularUrnSpec, m: u64) -> f64 {
    let alpha = spec.alpha() as f64;
    let a0 = to_f64(spec.a0());
    let t0 = to_f64(&spec.t0());
    let g2 = gamma_ratio_float(spec, t0 + 2.0 * alpha, m);
    let g1 = gamma_ratio_float(spec, t0 + alpha, m);
    a0 * ((a0 + alpha) * g2 - alpha * g1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{int, ratio};
    use crate::urn::urn_pmf_dp_oracle;

    fn spec(alpha: u64, sigma: u64, a0: i64, b0: i64) -> TriangularUrnSpec {
        TriangularUrnSpec::from_ints(alpha, sigma, a0, b0).unwrap()
    }

    #[test]
    fn hand_values() {
        let s = spec(1, 2, 2, 2);
        assert_eq!(urn_mean(&s, 0), int(2));
        assert_eq!(urn_mean(&s, 1), ratio(5, 2));
        assert_eq!(urn_second_moment(&s, 0), int(4));
        assert_eq!(urn_second_moment(&s, 1), ratio(13, 2));
    }

    #[test]
    fn moments_match_dp_weighted_sums() {
        for alpha in 1..=3u64 {
            for sigma in alpha..=alpha + 3 {
                for (a0, b0) in [(1, 0), (2, 5), (7, 3)] {
                    let s = spec(alpha, sigma, a0, b0);
                    for m in [0, 1, 4, 17] {
                        let dp = urn_pmf_dp_oracle(&s, m).unwrap();
                        assert_eq!(urn_mean(&s, m), dp.moment_exact(1).unwrap());
                        assert_eq!(urn_second_moment(&s, m), dp.moment_exact(2).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn float_moments_track_exact() {
        let s = spec(2, 5, 3, 4);
        for m in [0, 10, 300] {
            let e = to_f64(&urn_mean(&s, m));
            assert!(((urn_mean_float(&s, m) - e) / e).abs() < 1e-12);
            let e = to_f64(&urn_second_moment(&s, m));
            assert!(((urn_second_moment_float(&s, m) - e) / e).abs() < 1e-11);
        }
    }
}
