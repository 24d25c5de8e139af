//! Probability tables over an arithmetic support `offset, offset + step, ...`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::numerics::{to_f64, Rational};

#[derive(Debug, Clone, PartialEq)]
pub enum Probabilities {
    Exact(Vec<Rational>),
    Float(Vec<f64>),
}

/// A float alternating sum whose cancellation exceeded the warn threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CancellationWarning {
    /// Index into the support.
    pub index: usize,
    pub cancellation_ratio: f64,
    pub estimated_relative_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegreePmf {
    /// Smallest attainable value.
    pub support_offset: Rational,
    /// Spacing between consecutive support points.
    pub step: u64,
    pub probs: Probabilities,
    pub warnings: Vec<CancellationWarning>,
}

impl DegreePmf {
    pub fn exact(support_offset: Rational, step: u64, probs: Vec<Rational>) -> Self {
        DegreePmf {
            support_offset,
            step,
            probs: Probabilities::Exact(probs),
            warnings: Vec::new(),
        }
    }

    pub fn float(
        support_offset: Rational,
        step: u64,
        probs: Vec<f64>,
        warnings: Vec<CancellationWarning>,
    ) -> Self {
        DegreePmf {
            support_offset,
            step,
            probs: Probabilities::Float(probs),
            warnings,
        }
    }

    pub fn point_mass(value: Rational) -> Self {
        Self::exact(value, 1, vec![Rational::one()])
    }

    /// Exact table over unit-spaced integer values; gaps are filled with zeros.
    pub fn from_exact_map(map: &BTreeMap<u64, Rational>) -> Self {
        let (Some(&lo), Some(&hi)) = (map.keys().next(), map.keys().next_back()) else {
            return Self::exact(Rational::zero(), 1, Vec::new());
        };
        let probs = (lo..=hi)
            .map(|d| map.get(&d).cloned().unwrap_or_else(Rational::zero))
            .collect();
        Self::exact(Rational::from_integer(lo.into()), 1, probs)
    }

    pub fn len(&self) -> usize {
        match &self.probs {
            Probabilities::Exact(p) => p.len(),
            Probabilities::Float(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.probs, Probabilities::Exact(_))
    }

    pub fn exact_probs(&self) -> Option<&[Rational]> {
        match &self.probs {
            Probabilities::Exact(p) => Some(p),
            Probabilities::Float(_) => None,
        }
    }

    pub fn probs_f64(&self) -> Vec<f64> {
        match &self.probs {
            Probabilities::Exact(p) => p.iter().map(to_f64).collect(),
            Probabilities::Float(p) => p.clone(),
        }
    }

    /// Value of the `index`-th support point.
    pub fn value(&self, index: usize) -> Rational {
        &self.support_offset + Rational::from_integer((self.step * index as u64).into())
    }

    /// Exact total mass, if exact.
    pub fn total_exact(&self) -> Option<Rational> {
        self.exact_probs()
            .map(|p| p.iter().fold(Rational::zero(), |acc, x| acc + x))
    }

    /// `E[X^power]` in exact arithmetic.
    pub fn moment_exact(&self, power: u32) -> Option<Rational> {
        let probs = self.exact_probs()?;
        let mut acc = Rational::zero();
        for (idx, p) in probs.iter().enumerate() {
            if !p.is_zero() {
                acc += num_traits::pow(self.value(idx), power as usize) * p;
            }
        }
        Some(acc)
    }

    pub fn mean_f64(&self) -> f64 {
        self.probs_f64()
            .iter()
            .enumerate()
            .map(|(idx, p)| to_f64(&self.value(idx)) * p)
            .sum()
    }

    /// Probability of each integral support value as `f64`. Non-integral
    /// support points are skipped.
    pub fn integer_table(&self) -> BTreeMap<i64, f64> {
        let probs = self.probs_f64();
        let mut out = BTreeMap::new();
        for (idx, p) in probs.into_iter().enumerate() {
            let v = self.value(idx);
            if v.is_integer() {
                if let Some(key) = v.to_integer().to_i64() {
                    out.insert(key, p);
                }
            }
        }
        out
    }

    /// Exact probability keyed by support value.
    pub fn exact_table(&self) -> Option<BTreeMap<Rational, Rational>> {
        let probs = self.exact_probs()?;
        Some(
            probs
                .iter()
                .enumerate()
                .map(|(idx, p)| (self.value(idx), p.clone()))
                .collect(),
        )
    }

    /// CSV with header `value,probability`: exact entries as `p/q`, float
    /// entries with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("value,probability\n");
        match &self.probs {
            Probabilities::Exact(p) => {
                for (idx, prob) in p.iter().enumerate() {
                    let _ = writeln!(
                        out,
                        "{},{}",
                        format_rational(&self.value(idx)),
                        format_rational(prob)
                    );
                }
            }
            Probabilities::Float(p) => {
                for (idx, prob) in p.iter().enumerate() {
                    let _ = writeln!(
                        out,
                        "{},{}",
                        format_rational(&self.value(idx)),
                        format_float(*prob)
                    );
                }
            }
        }
        out
    }
}

/// `p/q`, or just `p` for integers.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// 17 significant digits, scientific notation.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Exact total-variation distance, aligning both tables by support value.
pub fn total_variation_exact(a: &DegreePmf, b: &DegreePmf) -> Option<Rational> {
    let ta = a.exact_table()?;
    let tb = b.exact_table()?;
    let mut acc = Rational::zero();
    for (v, p) in &ta {
        let q = tb.get(v).cloned().unwrap_or_else(Rational::zero);
        acc += (p - q).abs();
    }
    for (v, q) in &tb {
        if !ta.contains_key(v) {
            acc += q.abs();
        }
    }
    Some(acc / Rational::from_integer(2.into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{int, ratio};

    #[test]
    fn csv_exact_and_float() {
        let pmf = DegreePmf::exact(int(2), 1, vec![ratio(1, 2), ratio(1, 2)]);
        assert_eq!(pmf.to_csv(), "value,probability\n2,1/2\n3,1/2\n");
        let pmf = DegreePmf::float(ratio(1, 2), 2, vec![0.25, 0.75], Vec::new());
        assert_eq!(
            pmf.to_csv(),
            "value,probability\n1/2,2.5000000000000000e-1\n5/2,7.5000000000000000e-1\n"
        );
    }

    #[test]
    fn moments_and_tables() {
        let pmf = DegreePmf::exact(int(2), 1, vec![ratio(1, 2), ratio(1, 2)]);
        assert_eq!(pmf.moment_exact(1).unwrap(), ratio(5, 2));
        assert_eq!(pmf.moment_exact(2).unwrap(), ratio(13, 2));
        assert_eq!(pmf.total_exact().unwrap(), int(1));
        assert_eq!(pmf.integer_table(), BTreeMap::from([(2, 0.5), (3, 0.5)]));
    }

    #[test]
    fn exact_tv() {
        let a = DegreePmf::exact(int(0), 1, vec![ratio(1, 2), ratio(1, 2)]);
        let b = DegreePmf::exact(int(0), 1, vec![ratio(1, 4), ratio(3, 4)]);
        assert_eq!(total_variation_exact(&a, &b).unwrap(), ratio(1, 4));
        let c = DegreePmf::point_mass(int(7));
        assert_eq!(total_variation_exact(&a, &c).unwrap(), int(1));
        assert_eq!(total_variation_exact(&a, &a).unwrap(), int(0));
    }

    #[test]
    fn from_map_fills_gaps() {
        let map = BTreeMap::from([(2u64, ratio(1, 3)), (4, ratio(2, 3))]);
        let pmf = DegreePmf::from_exact_map(&map);
        assert_eq!(pmf.support_offset, int(2));
        assert_eq!(
            pmf.exact_probs().unwrap(),
            &[ratio(1, 3), int(0), ratio(2, 3)]
        );
    }
}
