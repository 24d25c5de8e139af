//! Independent replicas with per-replica random streams.
//!
//! Replica `r` always uses `RngStream { seed: master, stream_id: r }`, and
//! results are keyed by replica index, so the merged sample does not depend
//! on the thread count or on the order replicas finish in.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::graph::{DegreeHistogram, RngStream, VertexId};
use crate::growth::{grow_kneighbour, grow_lcd, GrowthConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelTag {
    KNeighbour,
    Lcd,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observation {
    /// Final degree of the traced vertex.
    Degree(u64),
    /// Full degree histogram of the final graph.
    Histogram(DegreeHistogram),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub model: ModelTag,
    pub config: Value,
    pub master_seed: u64,
    pub observations: BTreeMap<u64, Observation>,
}

impl SampleSet {
    pub fn replicas(&self) -> usize {
        self.observations.len()
    }

    /// Traced-vertex degrees in replica order; histogram observations are skipped.
    pub fn degrees(&self) -> Vec<u64> {
        self.observations
            .values()
            .filter_map(|o| match o {
                Observation::Degree(d) => Some(*d),
                Observation::Histogram(_) => None,
            })
            .collect()
    }

    pub fn histograms(&self) -> Vec<&DegreeHistogram> {
        self.observations
            .values()
            .filter_map(|o| match o {
                Observation::Histogram(h) => Some(h),
                Observation::Degree(_) => None,
            })
            .collect()
    }

    /// Empirical probability of each observed degree.
    pub fn empirical_distribution(&self) -> BTreeMap<u64, f64> {
        let degrees = self.degrees();
        let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
        for d in &degrees {
            *counts.entry(*d).or_insert(0) += 1;
        }
        let total = degrees.len() as f64;
        counts
            .into_iter()
            .map(|(d, c)| (d, c as f64 / total))
            .collect()
    }

    /// Union of two samples of the same experiment. Overlapping replica
    /// indices must carry identical observations.
    pub fn merge(mut self, other: SampleSet) -> Result<SampleSet> {
        if self.model != other.model
            || self.config != other.config
            || self.master_seed != other.master_seed
        {
            return Err(Error::InvalidConfig(
                "cannot merge samples of different experiments".into(),
            ));
        }
        for (idx, obs) in other.observations {
            if let Some(existing) = self.observations.get(&idx) {
                if *existing != obs {
                    return Err(Error::InvalidConfig(format!(
                        "replica {idx} disagrees between samples"
                    )));
                }
            } else {
                self.observations.insert(idx, obs);
            }
        }
        Ok(self)
    }
}

/// Evaluates `f(r)` for `r` in `range`, on `parallelism` threads, in index order.
pub(crate) fn par_map<T, F>(range: std::ops::Range<u64>, parallelism: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    if parallelism <= 1 {
        return range.map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    pool.install(|| range.into_par_iter().map(f).collect())
}

/// [`par_map`] over `0..len` with `usize` indices.
pub fn par_map_indexed<T, F>(len: usize, parallelism: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    par_map(0..len as u64, parallelism, |idx| f(idx as usize))
}

fn check_replicas(r: u64) -> Result<()> {
    if r == 0 {
        return Err(Error::InvalidConfig("need at least one replica".into()));
    }
    Ok(())
}

/// Replicas of the k-neighbour process, replica `r` on stream `r`. Records the
/// traced vertex's final degree if `cfg.trace_vertex` is set, else the degree
/// histogram.
pub fn run_replicas(cfg: &GrowthConfig, r: u64, parallelism: usize) -> Result<SampleSet> {
    run_replica_range(cfg, 0..r, parallelism)
}

/// As [`run_replicas`] for an explicit range of replica indices.
pub fn run_replica_range(
    cfg: &GrowthConfig,
    range: std::ops::Range<u64>,
    parallelism: usize,
) -> Result<SampleSet> {
    check_replicas(range.end.saturating_sub(range.start))?;
    cfg.validate()?;
    let traced = cfg.trace_vertex;
    let mut base = cfg.clone();
    base.trace_vertex = None;
    let start = range.start;
    let obs = par_map(range, parallelism, |idx| {
        let run = grow_kneighbour(&base.clone().with_stream(idx))?;
        Ok(match traced {
            Some(v) => Observation::Degree(run.graph.degree(v)? as u64),
            None => Observation::Histogram(run.graph.degree_histogram()),
        })
    })?;
    Ok(SampleSet {
        model: ModelTag::KNeighbour,
        config: serde_json::to_value(cfg).expect("config serializes"),
        master_seed: cfg.rng.seed,
        observations: (start..).zip(obs).collect(),
    })
}

/// Replicas of the LCD model on `n` vertices with `k` edges per vertex.
pub fn run_lcd_replicas(
    k: u32,
    n: usize,
    traced: Option<VertexId>,
    r: u64,
    master_seed: u64,
    parallelism: usize,
) -> Result<SampleSet> {
    check_replicas(r)?;
    if let Some(v) = traced {
        if v == 0 || v as usize > n {
            return Err(Error::InvalidConfig(format!(
                "trace vertex {v} outside 1..={n}"
            )));
        }
    }
    let obs = par_map(0..r, parallelism, |idx| {
        let g = grow_lcd(k, n, RngStream::new(master_seed, idx))?;
        Ok(match traced {
            Some(v) => Observation::Degree(g.degree(v)? as u64),
            None => Observation::Histogram(g.degree_histogram()),
        })
    })?;
    Ok(SampleSet {
        model: ModelTag::Lcd,
        config: json!({ "k": k, "n": n, "trace_vertex": traced }),
        master_seed,
        observations: (0..).zip(obs).collect(),
    })
}
