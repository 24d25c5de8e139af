//! Growth processes: the k-neighbour model, the LCD comparison model, and
//! seed-graph construction.
//!
//! In the k-neighbour model each new vertex picks an existing vertex `w` with
//! probability proportional to degree, then `k - 1` of `w`'s slots uniformly
//! without replacement, and joins `w` plus the far ends of those slots. All
//! choices are made against the graph before the new vertex's edges exist.

mod enumerate;

pub use enumerate::{enumerate_process_distribution, ENUMERATION_BRANCH_LIMIT};

use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{MultiGraph, RngStream, VertexId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedGraph {
    /// One vertex carrying `k` loops.
    KLoops,
    /// Complete graph on `j` vertices.
    CompleteKj(u32),
    /// Arbitrary edge list over vertices `1..=max id`.
    Custom(Vec<(VertexId, VertexId)>),
}

impl SeedGraph {
    /// Builds the seed for attachment parameter `k`, checking that every
    /// vertex can supply `k - 1` neighbour slots.
    pub fn build(&self, k: u32) -> Result<MultiGraph> {
        if k < 1 {
            return Err(Error::InvalidConfig("k must be at least 1".into()));
        }
        match self {
            SeedGraph::KLoops => {
                let mut g = MultiGraph::with_capacity(1, k as usize);
                let v = g.add_isolated_vertex();
                for _ in 0..k {
                    g.add_edge(v, v)?;
                }
                Ok(g)
            }
            SeedGraph::CompleteKj(j) => {
                let j = *j;
                if j < k + 1 {
                    return Err(Error::InvalidConfig(format!(
                        "K_{j} seed needs j >= k + 1 = {}",
                        k + 1
                    )));
                }
                let mut g = MultiGraph::new();
                for _ in 0..j {
                    g.add_isolated_vertex();
                }
                for u in 1..=j {
                    for v in u + 1..=j {
                        g.add_edge(u, v)?;
                    }
                }
                Ok(g)
            }
            SeedGraph::Custom(edges) => {
                let n = edges.iter().map(|&(u, v)| u.max(v)).max().unwrap_or(0);
                if edges.iter().any(|&(u, v)| u == 0 || v == 0) {
                    return Err(Error::InvalidConfig("custom seed uses 1-based ids".into()));
                }
                let mut g = MultiGraph::new();
                for _ in 0..n {
                    g.add_isolated_vertex();
                }
                for &(u, v) in edges {
                    g.add_edge(u, v)?;
                }
                if let Some(min) = g.degrees().min() {
                    if min < k as usize {
                        return Err(Error::InvalidConfig(format!(
                            "custom seed has minimum degree {min} < k = {k}"
                        )));
                    }
                } else {
                    return Err(Error::InvalidConfig("custom seed is empty".into()));
                }
                Ok(g)
            }
        }
    }

    /// Number of vertices in the seed, i.e. the clock value growth starts from.
    pub fn vertex_count(&self) -> usize {
        match self {
            SeedGraph::KLoops => 1,
            SeedGraph::CompleteKj(j) => *j as usize,
            SeedGraph::Custom(edges) => {
                edges.iter().map(|&(u, v)| u.max(v)).max().unwrap_or(0) as usize
            }
        }
    }
}

/// How the `k - 1` secondary targets are drawn from the first target's slots.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NeighbourRule {
    /// Distinct slots, uniformly; parallel edges weight a neighbour by multiplicity.
    #[default]
    Slots,
    /// Distinct neighbours, uniformly; topped up with replacement when `w`
    /// has fewer than `k - 1` distinct neighbours. Sensitivity runs only.
    DistinctNeighbours,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthConfig {
    pub k: u32,
    pub n: usize,
    pub seed: SeedGraph,
    pub rng: RngStream,
    /// Record this vertex's degree after every step.
    pub trace_vertex: Option<VertexId>,
    #[serde(default)]
    pub neighbour_rule: NeighbourRule,
}

impl GrowthConfig {
    pub fn new(k: u32, n: usize, seed: u64) -> Self {
        GrowthConfig {
            k,
            n,
            seed: SeedGraph::KLoops,
            rng: RngStream::new(seed, 0),
            trace_vertex: None,
            neighbour_rule: NeighbourRule::Slots,
        }
    }

    pub fn with_seed_graph(mut self, seed: SeedGraph) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_trace(mut self, v: VertexId) -> Self {
        self.trace_vertex = Some(v);
        self
    }

    pub fn with_stream(mut self, stream_id: u64) -> Self {
        self.rng.stream_id = stream_id;
        self
    }

    pub fn with_neighbour_rule(mut self, rule: NeighbourRule) -> Self {
        self.neighbour_rule = rule;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::InvalidConfig(format!(
                "k must be >= 1, got {}",
                self.k
            )));
        }
        let seed_n = self.seed.vertex_count();
        if self.n < seed_n {
            return Err(Error::InvalidConfig(format!(
                "n = {} is smaller than the seed ({seed_n} vertices)",
                self.n
            )));
        }
        if let Some(v) = self.trace_vertex {
            if v == 0 || v as usize > self.n {
                return Err(Error::InvalidConfig(format!(
                    "trace vertex {v} outside 1..={}",
                    self.n
                )));
            }
        }
        Ok(())
    }
}

/// Degree of the traced vertex after each step, starting when it exists.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DegreeTrace {
    pub vertex: VertexId,
    /// `(t, degree)` pairs.
    pub points: Vec<(u64, u64)>,
}

impl DegreeTrace {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,degree\n");
        for (t, d) in &self.points {
            let _ = writeln!(out, "{t},{d}");
        }
        out
    }

    pub fn final_degree(&self) -> Option<u64> {
        self.points.last().map(|&(_, d)| d)
    }
}

#[derive(Debug, Clone)]
pub struct GrowthRun {
    pub graph: MultiGraph,
    pub trace: Option<DegreeTrace>,
}

/// Grows the k-neighbour process from the configured seed up to `n` vertices.
pub fn grow_kneighbour(cfg: &GrowthConfig) -> Result<GrowthRun> {
    cfg.validate()?;
    let mut g = cfg.seed.build(cfg.k)?;
    let k = cfg.k as usize;
    let seed_edges = g.edge_count();
    let mut grown = MultiGraph::with_capacity(cfg.n, seed_edges + k * (cfg.n - g.vertex_count()));
    for _ in 0..g.vertex_count() {
        grown.add_isolated_vertex();
    }
    for (u, v) in g.edges() {
        grown.add_edge(u, v)?;
    }
    g = grown;

    let mut rng = cfg.rng.rng();
    let mut trace = cfg.trace_vertex.map(|v| DegreeTrace {
        vertex: v,
        points: Vec::new(),
    });
    let record = |g: &MultiGraph, trace: &mut Option<DegreeTrace>| {
        if let Some(tr) = trace {
            if g.contains(tr.vertex) {
                let d = g.degree(tr.vertex).expect("contained");
                tr.points.push((g.vertex_count() as u64, d as u64));
            }
        }
    };
    record(&g, &mut trace);

    let mut targets = Vec::with_capacity(k);
    let mut scratch = Vec::new();
    while g.vertex_count() < cfg.n {
        targets.clear();
        let w = g.sample_preferential(&mut rng)?;
        targets.push(w);
        match cfg.neighbour_rule {
            NeighbourRule::Slots => {
                g.extend_with_neighbour_slots(w, k - 1, &mut rng, &mut targets)?
            }
            NeighbourRule::DistinctNeighbours => {
                distinct_neighbours(&g, w, k - 1, &mut rng, &mut scratch, &mut targets)?
            }
        }
        g.add_vertex_with_edges(&targets)?;
        record(&g, &mut trace);
    }
    Ok(GrowthRun { graph: g, trace })
}

fn distinct_neighbours<R: Rng + ?Sized>(
    g: &MultiGraph,
    w: VertexId,
    r: usize,
    rng: &mut R,
    scratch: &mut Vec<VertexId>,
    out: &mut Vec<VertexId>,
) -> Result<()> {
    scratch.clear();
    scratch.extend_from_slice(g.slots_of(w)?);
    scratch.sort_unstable();
    scratch.dedup();
    let distinct = scratch.len();
    if distinct == 0 {
        return Err(Error::InsufficientDegree {
            vertex: w,
            degree: 0,
            requested: r,
        });
    }
    let take = r.min(distinct);
    for idx in rand::seq::index::sample(rng, distinct, take) {
        out.push(scratch[idx]);
    }
    for _ in take..r {
        out.push(scratch[rng.random_range(0..distinct)]);
    }
    Ok(())
}

/// LCD construction: grow a one-edge-per-step graph on `k n` vertices where
/// step `t` self-loops with probability `1/(2t - 1)` and otherwise attaches
/// proportionally to degree, then merge consecutive blocks of `k` vertices.
pub fn grow_lcd(k: u32, n: usize, stream: RngStream) -> Result<MultiGraph> {
    if k < 1 || n < 1 {
        return Err(Error::InvalidConfig(format!(
            "lcd needs k >= 1 and n >= 1, got k={k}, n={n}"
        )));
    }
    let k = k as usize;
    let total = k * n;
    let mut rng = stream.rng();
    // Edge ends of the single-edge graph; entries are 1-based fine-vertex ids.
    let mut ends: Vec<u32> = Vec::with_capacity(2 * total);
    for t in 1..=total {
        let u = rng.random_range(0..(2 * t - 1));
        let target = if u == 2 * t - 2 { t as u32 } else { ends[u] };
        ends.push(t as u32);
        ends.push(target);
    }
    let mut g = MultiGraph::with_capacity(n, total);
    for _ in 0..n {
        g.add_isolated_vertex();
    }
    let coarse = |v: u32| (v - 1) / k as u32 + 1;
    for e in ends.chunks_exact(2) {
        g.add_edge(coarse(e[0]), coarse(e[1]))?;
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds() {
        let g = SeedGraph::KLoops.build(3).unwrap();
        assert_eq!(g.vertex_count(), 1);
        assert_eq!(g.total_degree(), 6);
        let g = SeedGraph::CompleteKj(4).build(3).unwrap();
        assert_eq!(g.degrees().collect::<Vec<_>>(), vec![3, 3, 3, 3]);
        assert!(SeedGraph::CompleteKj(3).build(3).is_err());
        let custom = SeedGraph::Custom(vec![(1, 2), (1, 2), (2, 2)]);
        assert!(custom.build(3).is_err());
        let g = custom.build(2).unwrap();
        assert_eq!(g.degrees().collect::<Vec<_>>(), vec![2, 4]);
    }

    #[test]
    fn forced_first_step() {
        let run = grow_kneighbour(&GrowthConfig::new(2, 2, 7)).unwrap();
        let g = run.graph;
        assert_eq!(g.edge_count(), 4);
        assert_eq!(g.degree(1).unwrap(), 6);
        assert_eq!(g.degree(2).unwrap(), 2);
    }

    #[test]
    fn handshake_and_birth_degree() {
        let cfg = GrowthConfig::new(3, 100, 1).with_trace(40);
        let run = grow_kneighbour(&cfg).unwrap();
        assert_eq!(run.graph.total_degree(), 600);
        assert_eq!(run.graph.edge_count(), 300);
        run.graph.audit().unwrap();
        let trace = run.trace.unwrap();
        assert_eq!(trace.points.first(), Some(&(40, 3)));
        assert_eq!(trace.points.len(), 61);
        assert_eq!(
            trace.final_degree().unwrap(),
            run.graph.degree(40).unwrap() as u64
        );
        assert!(trace.points.windows(2).all(|w| w[1].1 >= w[0].1));
    }

    #[test]
    fn every_vertex_born_with_degree_k() {
        // The last vertex has had no chance to gain edges.
        for k in 2..=5u32 {
            for seed in 0..20 {
                let cfg = GrowthConfig::new(k, 30, seed);
                let g = grow_kneighbour(&cfg).unwrap().graph;
                assert_eq!(g.degree(30).unwrap(), k as usize);
                assert!(g.degrees().all(|d| d >= k as usize));
            }
        }
    }

    #[test]
    fn kj_seed_edge_bookkeeping() {
        let cfg = GrowthConfig::new(2, 40, 9).with_seed_graph(SeedGraph::CompleteKj(5));
        let g = grow_kneighbour(&cfg).unwrap().graph;
        assert_eq!(g.edge_count(), 10 + 2 * 35);
        g.audit().unwrap();
    }

    #[test]
    fn determinism() {
        let cfg = GrowthConfig::new(4, 500, 42).with_stream(3);
        let a = grow_kneighbour(&cfg).unwrap().graph;
        let b = grow_kneighbour(&cfg).unwrap().graph;
        assert_eq!(a.edge_ends(), b.edge_ends());
        let c = grow_kneighbour(&cfg.clone().with_stream(4)).unwrap().graph;
        assert_ne!(a.edge_ends(), c.edge_ends());
    }

    #[test]
    fn distinct_neighbour_variant_runs() {
        let cfg =
            GrowthConfig::new(4, 300, 5).with_neighbour_rule(NeighbourRule::DistinctNeighbours);
        let g = grow_kneighbour(&cfg).unwrap().graph;
        assert_eq!(g.edge_count(), 4 * 300);
        g.audit().unwrap();
    }

    #[test]
    fn config_validation() {
        assert!(grow_kneighbour(&GrowthConfig::new(0, 5, 0)).is_err());
        let cfg = GrowthConfig::new(2, 3, 0).with_seed_graph(SeedGraph::CompleteKj(4));
        assert!(grow_kneighbour(&cfg).is_err());
        assert!(grow_kneighbour(&GrowthConfig::new(2, 3, 0).with_trace(9)).is_err());
    }

    #[test]
    fn single_edge_variant_is_plain_attachment() {
        let g = grow_kneighbour(&GrowthConfig::new(1, 200, 3))
            .unwrap()
            .graph;
        assert_eq!(g.edge_count(), 200);
        assert!(g.edges().skip(1).all(|(u, v)| u > v));
    }

    #[test]
    fn lcd_small_cases() {
        let g = grow_lcd(1, 1, RngStream::new(0, 0)).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(1, 1)]);
        for seed in 0..10 {
            let g = grow_lcd(2, 1, RngStream::new(seed, 0)).unwrap();
            assert_eq!(g.degree(1).unwrap(), 4);
            assert_eq!(g.edge_count(), 2);
        }
    }

    #[test]
    fn lcd_edge_counts() {
        for (k, n) in [(1, 50), (2, 100), (3, 77)] {
            let g = grow_lcd(k, n, RngStream::new(1, 1)).unwrap();
            assert_eq!(g.vertex_count(), n);
            assert_eq!(g.edge_count(), k as usize * n);
            assert_eq!(g.total_degree(), 2 * k as usize * n);
            g.audit().unwrap();
        }
    }
}
