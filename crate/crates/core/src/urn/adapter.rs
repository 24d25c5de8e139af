//! Mapping a vertex of the growth process onto a triangular urn.
//!
//! Whites are `k` times the vertex's edge ends, the total is the graph's
//! total degree, so a white draw has probability `k d / S`, the expected
//! number of new edges at the vertex. Each step adds `2k` to the total and
//! `k` to the whites when the vertex is hit.

use crate::error::{Error, Result};
use crate::growth::SeedGraph;
use crate::numerics::{ln_rising_abs, EvalMode, Rational};
use crate::pmf::{DegreePmf, Probabilities};

use super::{urn_pmf, TriangularUrnSpec};

/// An urn together with its trial count and the degree its whites start from.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeUrn {
    pub spec: TriangularUrnSpec,
    pub trials: u64,
    /// Degree of the vertex when the urn starts.
    pub initial_degree: u64,
}

/// Urn parameters for vertex `v_i` observed at time `n`.
///
/// * k loops: `alpha = 1, sigma = 2, a0 = k, b0 = 2i - k`, `n - i` trials.
/// * `K_j`, `i <= j`: `alpha = k, sigma = 2k, a0 = k(j-1), t0 = j(j-1)`, `n - j` trials.
/// * `K_j`, `i > j`: `a0 = k^2, t0 = j(j-1) + 2(i-j)k`, `n - i` trials.
/// * custom: the same total-degree bookkeeping from the seed's degrees.
pub fn degree_urn(k: u32, seed: &SeedGraph, i: u64, n: u64) -> Result<DegreeUrn> {
    if k < 1 {
        return Err(Error::ParameterOutOfRange("k must be positive".into()));
    }
    let k64 = u64::from(k);
    let ki = i64::from(k);
    match seed {
        SeedGraph::KLoops => {
            if i < 2 || n < i {
                return Err(Error::ParameterOutOfRange(format!(
                    "k-loops adapter needs 2 <= i <= n, got i={i}, n={n}"
                )));
            }
            let b0 = 2 * i as i64 - ki;
            if b0 < 0 {
                return Err(Error::ParameterOutOfRange(format!(
                    "b0 = 2i - k = {b0} is negative"
                )));
            }
            Ok(DegreeUrn {
                spec: TriangularUrnSpec::from_ints(1, 2, ki, b0)?,
                trials: n - i,
                initial_degree: k64,
            })
        }
        SeedGraph::CompleteKj(j) => {
            let j = u64::from(*j);
            if j < k64 + 1 {
                return Err(Error::ParameterOutOfRange(format!(
                    "K_j needs j >= k + 1, got j={j}"
                )));
            }
            let seed_total = (j * (j - 1)) as i64;
            if i == 0 || n < i.max(j) {
                return Err(Error::ParameterOutOfRange(format!(
                    "need 1 <= i and n >= max(i, j), got i={i}, j={j}, n={n}"
                )));
            }
            let (initial_degree, t0, trials) = if i <= j {
                (j - 1, seed_total, n - j)
            } else {
                (k64, seed_total + 2 * (i - j) as i64 * ki, n - i)
            };
            let a0 = ki * initial_degree as i64;
            Ok(DegreeUrn {
                spec: TriangularUrnSpec::from_ints(k64, 2 * k64, a0, t0 - a0)?,
                trials,
                initial_degree,
            })
        }
        SeedGraph::Custom(_) => {
            let g = seed.build(k)?;
            let seed_n = g.vertex_count() as u64;
            if i == 0 || n < i.max(seed_n) {
                return Err(Error::ParameterOutOfRange(format!(
                    "need 1 <= i and n >= max(i, seed size {seed_n}), got i={i}, n={n}"
                )));
            }
            let seed_total = g.total_degree() as i64;
            let (initial_degree, t0, trials) = if i <= seed_n {
                (g.degree(i as u32)? as u64, seed_total, n - seed_n)
            } else {
                (k64, seed_total + 2 * (i - seed_n) as i64 * ki, n - i)
            };
            let a0 = ki * initial_degree as i64;
            Ok(DegreeUrn {
                spec: TriangularUrnSpec::from_ints(k64, 2 * k64, a0, t0 - a0)?,
                trials,
                initial_degree,
            })
        }
    }
}

/// Urn approximation to the distribution of `d_n(v_i)`, on degree support
/// `initial_degree, initial_degree + 1, ...`.
pub fn degree_pmf_from_seed(
    k: u32,
    seed: &SeedGraph,
    i: u64,
    n: u64,
    mode: EvalMode,
) -> Result<DegreePmf> {
    let urn = degree_urn(k, seed, i, n)?;
    let pmf = urn_pmf(&urn.spec, urn.trials, mode)?;
    let offset = Rational::from_integer(urn.initial_degree.into());
    Ok(match pmf.probs {
        Probabilities::Exact(p) => DegreePmf::exact(offset, 1, p),
        Probabilities::Float(p) => DegreePmf::float(offset, 1, p, pmf.warnings),
    })
}

fn check_vertex(i: u64, n: u64) -> Result<()> {
    if i < 2 || n < i {
        return Err(Error::ParameterOutOfRange(format!(
            "expected degree needs 2 <= i <= n, got i={i}, n={n}"
        )));
    }
    Ok(())
}

/// `E[d_n(v_i)] = k prod_{t=i}^{n-1} (1 + 1/(2t))`, exactly.
pub fn expected_degree(k: u32, i: u64, n: u64) -> Result<Rational> {
    check_vertex(i, n)?;
    let mut acc = Rational::from_integer(k.into());
    for t in i..n {
        acc *= Rational::new((2 * t + 1).into(), (2 * t).into());
    }
    Ok(acc)
}

/// `k Γ(i) Γ(n + 1/2) / (Γ(i + 1/2) Γ(n))`.
pub fn expected_degree_gamma(k: u32, i: u64, n: u64) -> Result<f64> {
    check_vertex(i, n)?;
    // Γ(n + 1/2)/Γ(i + 1/2) and Γ(n)/Γ(i) as rising factorials over n - i steps.
    let m = n - i;
    let ln = ln_rising_abs(i as f64 + 0.5, m).ln_abs - ln_rising_abs(i as f64, m).ln_abs;
    Ok(f64::from(k) * ln.exp())
}

/// Leading-order growth `k sqrt(n / i)`.
pub fn expected_degree_asymptotic(k: u32, i: u64, n: u64) -> f64 {
    f64::from(k) * (n as f64 / i as f64).sqrt()
}

/// Limiting proportion of vertices with degree `d`: `2k(k+1) / (d(d+1)(d+2))`.
pub fn alpha_degree_seq(k: u32, d: u64) -> Result<Rational> {
    if k < 1 || d < u64::from(k) {
        return Err(Error::Domain(format!(
            "alpha(k, d) needs d >= k >= 1, got k={k}, d={d}"
        )));
    }
    let k = u64::from(k);
    Ok(Rational::new(
        (2 * k * (k + 1)).into(),
        (d * (d + 1) * (d + 2)).into(),
    ))
}
