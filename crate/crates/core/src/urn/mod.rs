//! Two-colour triangular urns and their exact analytics.
//!
//! A white draw returns the ball plus `alpha` white and `sigma - alpha`
//! black; a black draw returns the ball plus `sigma` black. `A_m` is the
//! white count after `m` draws. A vertex of the growth process maps onto
//! such an urn with whites standing for its edge ends (see [`adapter`]).

mod adapter;
mod moments;
mod oracle;
mod pmf;

pub use adapter::{
    alpha_degree_seq, degree_pmf_from_seed, degree_urn, expected_degree,
    expected_degree_asymptotic, expected_degree_gamma, DegreeUrn,
};
pub use moments::{urn_mean, urn_mean_float, urn_second_moment, urn_second_moment_float};
pub use oracle::{
    urn_gf_oracle, urn_gf_rows, urn_pmf_dp_oracle, UrnDp, DP_MAX_TRIALS, GF_MAX_TRIALS,
};
pub use pmf::{urn_pmf, urn_pmf_scaled, ScaledPmf};

use num_bigint::BigInt;
use num_traits::Signed;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{common_denominator, Rational};

/// Replacement matrix `(alpha, sigma - alpha; 0, sigma)` with initial
/// content `a0` white and `b0` black.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TriangularUrnSpec {
    alpha: u64,
    sigma: u64,
    a0: Rational,
    b0: Rational,
}

impl TriangularUrnSpec {
    pub fn new(alpha: u64, sigma: u64, a0: Rational, b0: Rational) -> Result<Self> {
        if alpha == 0 || sigma < alpha {
            return Err(Error::ParameterOutOfRange(format!(
                "need sigma >= alpha >= 1, got alpha={alpha}, sigma={sigma}"
            )));
        }
        if !a0.is_positive() {
            return Err(Error::ParameterOutOfRange(format!(
                "a0 must be positive, got {a0}"
            )));
        }
        if b0.is_negative() {
            return Err(Error::ParameterOutOfRange(format!(
                "b0 must be non-negative, got {b0}"
            )));
        }
        Ok(TriangularUrnSpec {
            alpha,
            sigma,
            a0,
            b0,
        })
    }

    /// Integer-parameter convenience constructor.
    pub fn from_ints(alpha: u64, sigma: u64, a0: i64, b0: i64) -> Result<Self> {
        Self::new(
            alpha,
            sigma,
            crate::numerics::int(a0),
            crate::numerics::int(b0),
        )
    }

    pub fn alpha(&self) -> u64 {
        self.alpha
    }

    pub fn sigma(&self) -> u64 {
        self.sigma
    }

    pub fn a0(&self) -> &Rational {
        &self.a0
    }

    pub fn b0(&self) -> &Rational {
        &self.b0
    }

    /// Initial ball count `a0 + b0`.
    pub fn t0(&self) -> Rational {
        &self.a0 + &self.b0
    }

    /// The same urn with every count and replacement multiplied by `c`.
    pub fn scaled(&self, c: u64) -> Result<Self> {
        let cr = Rational::from_integer(c.into());
        Self::new(
            self.alpha * c,
            self.sigma * c,
            &self.a0 * &cr,
            &self.b0 * &cr,
        )
    }

    /// Integer versions of `(a0, b0, alpha, sigma)` after clearing the common
    /// denominator of `a0` and `b0`. Every ratio the urn depends on is unchanged.
    pub(crate) fn integer_scaled(&self) -> IntegerUrn {
        let l = common_denominator([&self.a0, &self.b0]);
        let lr = Rational::from_integer(l.clone());
        IntegerUrn {
            a0: (&self.a0 * &lr).to_integer(),
            b0: (&self.b0 * &lr).to_integer(),
            alpha: &l * self.alpha,
            sigma: &l * self.sigma,
        }
    }
}

impl Serialize for TriangularUrnSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("TriangularUrnSpec", 4)?;
        st.serialize_field("alpha", &self.alpha)?;
        st.serialize_field("sigma", &self.sigma)?;
        st.serialize_field("a0", &crate::pmf::format_rational(&self.a0))?;
        st.serialize_field("b0", &crate::pmf::format_rational(&self.b0))?;
        st.end()
    }
}

pub(crate) struct IntegerUrn {
    pub a0: BigInt,
    pub b0: BigInt,
    pub alpha: BigInt,
    pub sigma: BigInt,
}

impl IntegerUrn {
    pub fn t0(&self) -> BigInt {
        &self.a0 + &self.b0
    }
}
