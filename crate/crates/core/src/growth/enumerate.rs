use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::graph::{MultiGraph, VertexId};
use crate::numerics::{binomial_int, Rational};
use crate::pmf::DegreePmf;

use super::SeedGraph;

/// Cap on `(state, choice)` expansions performed by the enumeration.
pub const ENUMERATION_BRANCH_LIMIT: u64 = 10_000_000;

// Canonical state: the labelled edge multiset. Two histories leading to the
// same multiset have identical futures, so their probabilities are merged.
type StateKey = Vec<(VertexId, VertexId)>;

fn state_key(g: &MultiGraph) -> StateKey {
    let mut key: StateKey = g.edges().map(|(u, v)| (u.min(v), u.max(v))).collect();
    key.sort_unstable();
    key
}

/// Visits every `r`-subset of `0..n` in lexicographic order.
fn for_each_subset(n: usize, r: usize, mut f: impl FnMut(&[usize])) {
    if r > n {
        return;
    }
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        f(&idx);
        let Some(pos) = (0..r).rev().find(|&p| idx[p] != p + n - r) else {
            return;
        };
        idx[pos] += 1;
        for q in pos + 1..r {
            idx[q] = idx[q - 1] + 1;
        }
    }
}

/// Exact distribution of `d_n(v_i)` in the k-neighbour process, by
/// exhaustive enumeration of every attachment history.
pub fn enumerate_process_distribution(
    k: u32,
    i: VertexId,
    n: usize,
    seed: &SeedGraph,
) -> Result<DegreePmf> {
    enumerate_with_limit(k, i, n, seed, ENUMERATION_BRANCH_LIMIT)
}

fn enumerate_with_limit(
    k: u32,
    i: VertexId,
    n: usize,
    seed: &SeedGraph,
    limit: u64,
) -> Result<DegreePmf> {
    if !matches!(seed, SeedGraph::KLoops | SeedGraph::CompleteKj(_)) {
        return Err(Error::InvalidConfig(
            "enumeration supports KLoops and K_j seeds".into(),
        ));
    }
    if k < 2 {
        return Err(Error::InvalidConfig(format!("k must be >= 2, got {k}")));
    }
    let start = seed.build(k)?;
    if n < start.vertex_count() || i == 0 || i as usize > n {
        return Err(Error::InvalidConfig(format!(
            "need seed size {} <= n and 1 <= i <= n, got i={i}, n={n}",
            start.vertex_count()
        )));
    }
    let r = k as usize - 1;

    let mut states: BTreeMap<StateKey, (MultiGraph, Rational)> = BTreeMap::new();
    states.insert(state_key(&start), (start, Rational::one()));
    let mut branches = 0u64;
    let mut targets = Vec::with_capacity(k as usize);

    for _ in 0..n - states.values().next().expect("seed").0.vertex_count() {
        let mut next: BTreeMap<StateKey, (MultiGraph, Rational)> = BTreeMap::new();
        for (g, p) in states.values() {
            let total = g.total_degree() as u64;
            for w in 1..=g.vertex_count() as VertexId {
                let slots = g.slots_of(w)?;
                let d = slots.len();
                if d == 0 {
                    continue;
                }
                let subsets = binomial_int(d as u64, r as u64);
                if subsets.is_zero() {
                    return Err(Error::InsufficientDegree {
                        vertex: w,
                        degree: d,
                        requested: r,
                    });
                }
                // P(w first) * P(this slot subset) = d/total * 1/C(d, r)
                let weight = p * Rational::new((d as u64).into(), subsets * total);
                let mut overflow = false;
                for_each_subset(d, r, |picked| {
                    branches += 1;
                    if branches > limit {
                        overflow = true;
                        return;
                    }
                    targets.clear();
                    targets.push(w);
                    targets.extend(picked.iter().map(|&s| slots[s]));
                    let mut child = g.clone();
                    child
                        .add_vertex_with_edges(&targets)
                        .expect("targets are existing vertices");
                    let key = state_key(&child);
                    next.entry(key)
                        .and_modify(|(_, q)| *q += &weight)
                        .or_insert_with(|| (child, weight.clone()));
                });
                if overflow {
                    return Err(Error::StateSpaceTooLarge { limit });
                }
            }
        }
        states = next;
    }

    let mut dist: BTreeMap<u64, Rational> = BTreeMap::new();
    for (g, p) in states.values() {
        let d = g.degree(i)? as u64;
        *dist.entry(d).or_insert_with(Rational::zero) += p;
    }
    Ok(DegreePmf::from_exact_map(&dist))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{int, ratio};

    #[test]
    fn subsets_enumerated() {
        let mut seen = Vec::new();
        for_each_subset(4, 2, |s| seen.push(s.to_vec()));
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[0], vec![0, 1]);
        assert_eq!(seen[5], vec![2, 3]);
        let mut count = 0;
        for_each_subset(3, 0, |_| count += 1);
        assert_eq!(count, 1);
    }

    #[test]
    fn second_vertex_at_three() {
        let pmf = enumerate_process_distribution(2, 2, 3, &SeedGraph::KLoops).unwrap();
        assert_eq!(pmf.support_offset, int(2));
        assert_eq!(pmf.exact_probs().unwrap(), &[ratio(1, 2), ratio(1, 2)]);
    }

    #[test]
    fn newest_vertex_is_point_mass() {
        for k in 2..=3 {
            for n in 2..=4 {
                let pmf =
                    enumerate_process_distribution(k, n as u32, n, &SeedGraph::KLoops).unwrap();
                assert_eq!(pmf, DegreePmf::point_mass(int(k as i64)));
            }
        }
    }

    #[test]
    fn expectation_at_four() {
        let pmf = enumerate_process_distribution(2, 2, 4, &SeedGraph::KLoops).unwrap();
        assert_eq!(pmf.total_exact().unwrap(), int(1));
        assert_eq!(pmf.moment_exact(1).unwrap(), ratio(35, 12));
    }

    #[test]
    fn first_vertex_distribution_is_normalized() {
        let pmf = enumerate_process_distribution(3, 1, 4, &SeedGraph::KLoops).unwrap();
        assert_eq!(pmf.total_exact().unwrap(), int(1));
        // 6 from the loops, +3 at t = 2 (v1 is the only choice), at least +1 at
        // t = 3 (v1 is always a target), and possibly nothing at t = 4.
        assert_eq!(pmf.support_offset, int(10));
    }

    #[test]
    fn kj_seed() {
        // K_4 with k = 3: the first step joins vertex 5 to three of the four.
        let pmf = enumerate_process_distribution(3, 2, 5, &SeedGraph::CompleteKj(4)).unwrap();
        assert_eq!(pmf.exact_probs().unwrap(), &[ratio(1, 4), ratio(3, 4)]);
    }

    #[test]
    fn budget_enforced() {
        let err = enumerate_with_limit(2, 2, 12, &SeedGraph::KLoops, 5_000).unwrap_err();
        assert!(matches!(err, Error::StateSpaceTooLarge { limit: 5_000 }));
        assert!(enumerate_with_limit(2, 2, 4, &SeedGraph::KLoops, 5_000).is_ok());
        assert!(enumerate_process_distribution(2, 1, 3, &SeedGraph::Custom(vec![(1, 1)])).is_err());
    }
}
