//! Growing undirected multigraph with loops.
//!
//! Every edge is stored twice: once as a pair of entries in the flat
//! edge-end array (which makes degree-proportional sampling a single uniform
//! index draw) and once as a slot at each endpoint. A loop at `w` yields two
//! edge ends and two slots at `w`, both pointing back at `w`.

use std::collections::{BTreeMap, HashMap};
use std::io::{self, Write};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 1-based vertex id in arrival order.
pub type VertexId = u32;

/// Generator type driven by an [`RngStream`].
pub type StreamRng = ChaCha8Rng;

/// `(seed, stream_id)` pair naming one independent random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RngStream { seed, stream_id }
    }

    pub fn rng(&self) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MultiGraph {
    edge_ends: Vec<VertexId>,
    slots: Vec<Vec<VertexId>>,
}

pub type DegreeHistogram = BTreeMap<u32, u64>;

impl MultiGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Empty graph with room for `vertices` vertices and `edges` edges.
    pub fn with_capacity(vertices: usize, edges: usize) -> Self {
        MultiGraph {
            edge_ends: Vec::with_capacity(2 * edges),
            slots: Vec::with_capacity(vertices),
        }
    }

    /// Process time `t`: the number of vertices.
    pub fn vertex_count(&self) -> usize {
        self.slots.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_ends.len() / 2
    }

    pub fn total_degree(&self) -> usize {
        self.edge_ends.len()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        v >= 1 && (v as usize) <= self.slots.len()
    }

    pub fn degree(&self, v: VertexId) -> Result<usize> {
        self.slots_of(v).map(<[VertexId]>::len)
    }

    /// Other endpoints of the slots at `v`, in insertion order.
    pub fn slots_of(&self, v: VertexId) -> Result<&[VertexId]> {
        if !self.contains(v) {
            return Err(Error::UnknownVertex(v));
        }
        Ok(&self.slots[v as usize - 1])
    }

    pub fn degrees(&self) -> impl Iterator<Item = usize> + '_ {
        self.slots.iter().map(Vec::len)
    }

    pub fn edge_ends(&self) -> &[VertexId] {
        &self.edge_ends
    }

    /// Edges in insertion order as `(u, v)` pairs.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.edge_ends.chunks_exact(2).map(|e| (e[0], e[1]))
    }

    /// Appends an isolated vertex and returns its id.
    pub fn add_isolated_vertex(&mut self) -> VertexId {
        self.slots.push(Vec::new());
        self.slots.len() as VertexId
    }

    /// Adds one edge (a loop when `u == v`).
    pub fn add_edge(&mut self, u: VertexId, v: VertexId) -> Result<()> {
        for x in [u, v] {
            if !self.contains(x) {
                return Err(Error::UnknownVertex(x));
            }
        }
        self.push_edge(u, v);
        Ok(())
    }

    fn push_edge(&mut self, u: VertexId, v: VertexId) {
        self.edge_ends.push(u);
        self.edge_ends.push(v);
        self.slots[u as usize - 1].push(v);
        self.slots[v as usize - 1].push(u);
    }

    /// Appends a vertex joined by one edge to each of `targets` (repeats give
    /// parallel edges).
    pub fn add_vertex_with_edges(&mut self, targets: &[VertexId]) -> Result<VertexId> {
        if let Some(&bad) = targets.iter().find(|&&t| !self.contains(t)) {
            return Err(Error::UnknownVertex(bad));
        }
        let v = self.add_isolated_vertex();
        self.slots[v as usize - 1].reserve_exact(targets.len());
        for &t in targets {
            self.push_edge(v, t);
        }
        Ok(v)
    }

    /// Vertex chosen with probability `degree / total degree`.
    pub fn sample_preferential<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<VertexId> {
        if self.edge_ends.is_empty() {
            return Err(Error::EmptyGraph);
        }
        Ok(self.edge_ends[rng.random_range(0..self.edge_ends.len())])
    }

    /// Other endpoints of `r` distinct slots of `w`, chosen uniformly without
    /// replacement among the slots.
    pub fn sample_neighbour_slots<R: Rng + ?Sized>(
        &self,
        w: VertexId,
        r: usize,
        rng: &mut R,
    ) -> Result<Vec<VertexId>> {
        let mut out = Vec::with_capacity(r);
        self.extend_with_neighbour_slots(w, r, rng, &mut out)?;
        Ok(out)
    }

    /// Allocation-free variant of [`Self::sample_neighbour_slots`] that
    /// appends to `out`.
    pub fn extend_with_neighbour_slots<R: Rng + ?Sized>(
        &self,
        w: VertexId,
        r: usize,
        rng: &mut R,
        out: &mut Vec<VertexId>,
    ) -> Result<()> {
        let slots = self.slots_of(w)?;
        let d = slots.len();
        if r > d {
            return Err(Error::InsufficientDegree {
                vertex: w,
                degree: d,
                requested: r,
            });
        }
        // Floyd's subset sampling; `out[start..]` holds slot indices until remapped.
        let start = out.len();
        for j in (d - r)..d {
            let t = rng.random_range(0..=j) as VertexId;
            let idx = if out[start..].contains(&t) {
                j as VertexId
            } else {
                t
            };
            out.push(idx);
        }
        for entry in &mut out[start..] {
            *entry = slots[*entry as usize];
        }
        Ok(())
    }

    /// `N(d)`: number of vertices of each occupied degree.
    pub fn degree_histogram(&self) -> DegreeHistogram {
        let mut hist = DegreeHistogram::new();
        for d in self.degrees() {
            *hist.entry(d as u32).or_insert(0) += 1;
        }
        hist
    }

    /// Cross-checks the edge-end array against the slot lists.
    pub fn audit(&self) -> std::result::Result<(), String> {
        if !self.edge_ends.len().is_multiple_of(2) {
            return Err("odd edge-end array length".into());
        }
        let slot_total: usize = self.degrees().sum();
        if slot_total != self.edge_ends.len() {
            return Err(format!(
                "slot total {slot_total} != edge-end length {}",
                self.edge_ends.len()
            ));
        }
        let mut ends = vec![0usize; self.slots.len()];
        let mut pairs: HashMap<(VertexId, VertexId), usize> = HashMap::new();
        for (u, v) in self.edges() {
            if !self.contains(u) || !self.contains(v) {
                return Err(format!("edge ({u}, {v}) names an unknown vertex"));
            }
            ends[u as usize - 1] += 1;
            ends[v as usize - 1] += 1;
            *pairs.entry((u, v)).or_insert(0) += 1;
            *pairs.entry((v, u)).or_insert(0) += 1;
        }
        for (idx, slots) in self.slots.iter().enumerate() {
            if ends[idx] != slots.len() {
                return Err(format!(
                    "vertex {}: {} edge ends but {} slots",
                    idx + 1,
                    ends[idx],
                    slots.len()
                ));
            }
        }
        let mut seen: HashMap<(VertexId, VertexId), usize> = HashMap::new();
        for (idx, slots) in self.slots.iter().enumerate() {
            for &o in slots {
                *seen.entry((idx as VertexId + 1, o)).or_insert(0) += 1;
            }
        }
        if seen != pairs {
            return Err("slot multisets disagree with the edge list".into());
        }
        Ok(())
    }

    /// Writes one `u v` line per edge in insertion order.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> io::Result<()> {
        for (u, v) in self.edges() {
            writeln!(out, "{u} {v}")?;
        }
        Ok(())
    }

    /// Approximate heap footprint in bytes (allocated capacity).
    pub fn heap_bytes(&self) -> usize {
        let word = std::mem::size_of::<VertexId>();
        self.edge_ends.capacity() * word
            + self.slots.capacity() * std::mem::size_of::<Vec<VertexId>>()
            + self
                .slots
                .iter()
                .map(|s| s.capacity() * word)
                .sum::<usize>()
    }
}
