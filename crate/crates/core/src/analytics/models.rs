//! k-neighbour process against the LCD model for a single vertex's degree.

use std::collections::BTreeMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;

use crate::error::{Error, Result};
use crate::graph::VertexId;
use crate::growth::GrowthConfig;

use super::compare::{bootstrap_stream, total_variation};
use super::replicas::{run_lcd_replicas, run_replicas, SampleSet};
use super::report::ComparisonReport;
use super::tolerances::Tolerances;

/// Offset separating the LCD master seed from the k-neighbour one.
const LCD_SEED_OFFSET: u64 = 0x5851_f42d_4c95_7f2d;

/// Mean TV between two independent empirical tables of `r` draws each from
/// `pooled`, over `resamples` bootstrap rounds.
pub fn bootstrap_null_tv(
    pooled: &BTreeMap<i64, f64>,
    r: u64,
    resamples: usize,
    seed: u64,
) -> Result<f64> {
    let keys: Vec<i64> = pooled.keys().copied().collect();
    let dist = WeightedIndex::new(pooled.values().copied())
        .map_err(|e| Error::InvalidConfig(format!("bootstrap table: {e}")))?;
    let mut rng = bootstrap_stream(seed).rng();
    let draw = |rng: &mut _| {
        let mut counts = vec![0u64; keys.len()];
        for _ in 0..r {
            counts[dist.sample(rng)] += 1;
        }
        keys.iter()
            .zip(counts)
            .map(|(&k, c)| (k, c as f64 / r as f64))
            .collect::<BTreeMap<i64, f64>>()
    };
    let mut acc = 0.0;
    for _ in 0..resamples {
        let a = draw(&mut rng);
        let b = draw(&mut rng);
        acc += total_variation(&a, &b);
    }
    Ok(acc / resamples.max(1) as f64)
}

fn table(s: &SampleSet) -> BTreeMap<i64, f64> {
    s.empirical_distribution()
        .into_iter()
        .map(|(d, p)| (d as i64, p))
        .collect()
}

/// TV between two samples with a bootstrap band: pass iff
/// `TV <= bootstrap_factor * E[TV | both drawn from the pooled table]`.
pub fn compare_samples_tv(
    a: &SampleSet,
    b: &SampleSet,
    seed: u64,
    tol: &Tolerances,
) -> Result<ComparisonReport> {
    let (ta, tb) = (table(a), table(b));
    let r = a.replicas().min(b.replicas()) as u64;
    let mut pooled = ta.clone();
    for (k, q) in &tb {
        *pooled.entry(*k).or_insert(0.0) += q;
    }
    for p in pooled.values_mut() {
        *p /= 2.0;
    }
    let null = bootstrap_null_tv(&pooled, r, tol.models.bootstrap_resamples, seed)?;
    let tv = total_variation(&ta, &tb);
    Ok(ComparisonReport::at_most(
        "total_variation",
        tv,
        0.0,
        tol.models.bootstrap_factor * null,
    )
    .with("bootstrap_null_tv", null)
    .with("replicas", r))
}

/// Empirical law of `d_n(v_i)` under the k-neighbour process and under the
/// LCD model, `r` replicas each.
pub fn compare_models_tv(
    k: u32,
    i: VertexId,
    n: usize,
    r: u64,
    seed: u64,
    parallelism: usize,
    tol: &Tolerances,
) -> Result<ComparisonReport> {
    if i < 2 {
        return Err(Error::InvalidConfig("model comparison needs i >= 2".into()));
    }
    let cfg = GrowthConfig::new(k, n, seed).with_trace(i);
    let kn = run_replicas(&cfg, r, parallelism)?;
    let lcd = run_lcd_replicas(
        k,
        n,
        Some(i),
        r,
        seed.wrapping_add(LCD_SEED_OFFSET),
        parallelism,
    )?;
    let mean = |s: &SampleSet| {
        let d = s.degrees();
        d.iter().sum::<u64>() as f64 / d.len() as f64
    };
    Ok(compare_samples_tv(&kn, &lcd, seed, tol)?
        .with("k", k)
        .with("i", i)
        .with("n", n)
        .with("seed", seed)
        .with("mean_kneighbour", mean(&kn))
        .with("mean_lcd", mean(&lcd)))
}
