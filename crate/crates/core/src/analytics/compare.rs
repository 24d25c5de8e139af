//! Empirical samples against exact tables and limiting proportions.

use std::collections::BTreeMap;

use serde_json::json;

use crate::error::{Error, Result};
use crate::graph::{MultiGraph, RngStream};
use crate::growth::{grow_kneighbour, GrowthConfig};
use crate::numerics::to_f64;
use crate::pmf::DegreePmf;
use crate::urn::alpha_degree_seq;

use super::replicas::{par_map, SampleSet};
use super::report::ComparisonReport;
use super::tolerances::Tolerances;

/// Half the L1 distance; keys missing on one side count as probability 0.
pub fn total_variation(a: &BTreeMap<i64, f64>, b: &BTreeMap<i64, f64>) -> f64 {
    let mut acc = 0.0;
    for (key, p) in a {
        acc += (p - b.get(key).copied().unwrap_or(0.0)).abs();
    }
    for (key, q) in b {
        if !a.contains_key(key) {
            acc += q.abs();
        }
    }
    acc / 2.0
}

/// Expected TV between a table and its empirical estimate from `r` draws,
/// using the normal approximation `E|p_hat - p| = sqrt(2 p (1 - p) / (pi r))`.
pub fn expected_sampling_tv(table: &BTreeMap<i64, f64>, r: u64) -> f64 {
    let r = r as f64;
    table
        .values()
        .map(|&p| (2.0 * p * (1.0 - p) / (std::f64::consts::PI * r)).sqrt())
        .sum::<f64>()
        / 2.0
}

fn central_moments(table: &BTreeMap<i64, f64>) -> (f64, f64, f64) {
    let mean: f64 = table.iter().map(|(&v, &p)| v as f64 * p).sum();
    let var: f64 = table
        .iter()
        .map(|(&v, &p)| (v as f64 - mean).powi(2) * p)
        .sum();
    let m4: f64 = table
        .iter()
        .map(|(&v, &p)| (v as f64 - mean).powi(4) * p)
        .sum();
    (mean, var, m4)
}

/// Sample mean and unbiased sample variance.
pub fn mean_and_variance(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var)
}

fn empirical_table(s: &SampleSet) -> BTreeMap<i64, f64> {
    s.empirical_distribution()
        .into_iter()
        .map(|(d, p)| (d as i64, p))
        .collect()
}

/// TV distance, mean and variance of the traced-vertex degrees against an
/// exact table. Empirical mass outside the table's support counts fully
/// toward TV and is reported in the metadata.
pub fn compare_degree_distribution(
    s: &SampleSet,
    exact: &DegreePmf,
    tol: &Tolerances,
) -> Result<Vec<ComparisonReport>> {
    let degrees = s.degrees();
    if degrees.is_empty() {
        return Err(Error::InvalidConfig(
            "sample has no traced-vertex degrees".into(),
        ));
    }
    let r = degrees.len() as u64;
    let table = exact.integer_table();
    let empirical = empirical_table(s);
    let tv = total_variation(&empirical, &table);
    let outside: f64 = empirical
        .iter()
        .filter(|(d, _)| table.get(d).is_none_or(|&p| p == 0.0))
        .map(|(_, p)| p)
        .sum();
    let (chi2, dof) = chi_square(&empirical, &table, r);

    let (mean, var, m4) = central_moments(&table);
    let xs: Vec<f64> = degrees.iter().map(|&d| d as f64).collect();
    let (emp_mean, emp_var) = mean_and_variance(&xs);
    let sigmas = tol.clt.sigmas;
    let rf = r as f64;
    let meta = |rep: ComparisonReport| rep.with("replicas", r);
    Ok(vec![
        meta(ComparisonReport::at_most(
            "total_variation",
            tv,
            0.0,
            tol.distribution.tv_factor * expected_sampling_tv(&table, r),
        ))
        .with("mass_outside_support", outside)
        .with("chi_square", chi2)
        .with("chi_square_dof", dof),
        meta(ComparisonReport::within(
            "mean",
            emp_mean,
            mean,
            sigmas * (var / rf).sqrt(),
        )),
        meta(ComparisonReport::within(
            "variance",
            emp_var,
            var,
            sigmas * ((m4 - var * var).max(0.0) / rf).sqrt(),
        )),
    ])
}

/// Pearson statistic over cells with expected count at least 5; secondary
/// diagnostic only.
fn chi_square(empirical: &BTreeMap<i64, f64>, exact: &BTreeMap<i64, f64>, r: u64) -> (f64, u64) {
    let r = r as f64;
    let mut stat = 0.0;
    let mut cells = 0u64;
    for (d, &p) in exact {
        let expected = p * r;
        if expected >= 5.0 {
            let observed = empirical.get(d).copied().unwrap_or(0.0) * r;
            stat += (observed - expected).powi(2) / expected;
            cells += 1;
        }
    }
    (stat, cells.saturating_sub(1))
}

/// Sample mean of the traced-vertex degree against an exact expectation,
/// with a band of `clt.sigmas` estimated standard errors.
pub fn compare_sample_mean(
    s: &SampleSet,
    exact_mean: f64,
    tol: &Tolerances,
) -> Result<ComparisonReport> {
    let xs: Vec<f64> = s.degrees().into_iter().map(|d| d as f64).collect();
    if xs.len() < 2 {
        return Err(Error::InvalidConfig(
            "need at least two traced-vertex degrees".into(),
        ));
    }
    let (mean, var) = mean_and_variance(&xs);
    let se = (var / xs.len() as f64).sqrt();
    Ok(
        ComparisonReport::within("mean", mean, exact_mean, tol.clt.sigmas * se)
            .with("standard_error", se)
            .with("replicas", xs.len() as u64),
    )
}

/// `N_n(d) / n` for every occupied degree.
pub fn degree_proportions(g: &MultiGraph) -> BTreeMap<u64, f64> {
    let n = g.vertex_count() as f64;
    g.degree_histogram()
        .into_iter()
        .map(|(d, c)| (u64::from(d), c as f64 / n))
        .collect()
}

fn proportion_reports(
    props: &BTreeMap<u64, f64>,
    k: u32,
    d_max: u64,
    relative: f64,
) -> Result<Vec<ComparisonReport>> {
    let mut out = Vec::new();
    for d in u64::from(k)..=d_max {
        let alpha = to_f64(&alpha_degree_seq(k, d)?);
        let emp = props.get(&d).copied().unwrap_or(0.0);
        out.push(
            ComparisonReport::within(format!("proportion[d={d}]"), emp, alpha, relative * alpha)
                .with("k", k)
                .with("d", d),
        );
    }
    Ok(out)
}

/// `N_n(d)/n` against `alpha(k, d)` for `d` in `[k, d_max]`, plus the exact
/// bookkeeping rows: no vertex below degree `k` and `sum_d N_n(d) = n`.
pub fn compare_degree_sequence(
    g: &MultiGraph,
    k: u32,
    d_max: u64,
    tol: &Tolerances,
) -> Result<Vec<ComparisonReport>> {
    let hist = g.degree_histogram();
    let n = g.vertex_count() as f64;
    let below: u64 = hist.range(..k).map(|(_, c)| c).sum();
    let counted: u64 = hist.values().sum();
    let mut out = proportion_reports(
        &degree_proportions(g),
        k,
        d_max,
        tol.degree_sequence.relative,
    )?;
    for r in &mut out {
        r.metadata.insert("n".into(), json!(g.vertex_count()));
    }
    out.push(ComparisonReport::within(
        "vertices_below_k",
        below as f64,
        0.0,
        0.0,
    ));
    out.push(ComparisonReport::within(
        "histogram_total",
        counted as f64,
        n,
        0.0,
    ));
    Ok(out)
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        (xs[m - 1] + xs[m]) / 2.0
    }
}

/// Grows `runs` independent graphs (streams `0..runs`) and compares the
/// per-degree median of `N_n(d)/n` with `alpha(k, d)`.
pub fn compare_degree_sequence_median(
    k: u32,
    n: usize,
    d_max: u64,
    runs: u64,
    seed: u64,
    parallelism: usize,
    tol: &Tolerances,
) -> Result<Vec<ComparisonReport>> {
    let cfg = GrowthConfig::new(k, n, seed);
    let props = par_map(0..runs, parallelism, |idx| {
        Ok(degree_proportions(
            &grow_kneighbour(&cfg.clone().with_stream(idx))?.graph,
        ))
    })?;
    let mut medians = BTreeMap::new();
    for d in u64::from(k)..=d_max {
        let mut xs: Vec<f64> = props
            .iter()
            .map(|p| p.get(&d).copied().unwrap_or(0.0))
            .collect();
        medians.insert(d, median(&mut xs));
    }
    let mut out = proportion_reports(&medians, k, d_max, tol.degree_sequence.relative)?;
    for r in &mut out {
        r.metadata.insert("n".into(), json!(n));
        r.metadata.insert("runs".into(), json!(runs));
        r.metadata.insert("seed".into(), json!(seed));
    }
    Ok(out)
}

/// Spread of `N_n(d)` across independent runs: pass iff the standard
/// deviation is at most `concentration.max_cv` times the mean.
pub fn concentration_check(
    k: u32,
    n: usize,
    d_values: &[u64],
    runs: u64,
    seed: u64,
    parallelism: usize,
    tol: &Tolerances,
) -> Result<Vec<ComparisonReport>> {
    let cfg = GrowthConfig::new(k, n, seed);
    let hists = par_map(0..runs, parallelism, |idx| {
        Ok(grow_kneighbour(&cfg.clone().with_stream(idx))?
            .graph
            .degree_histogram())
    })?;
    let mut out = Vec::new();
    for &d in d_values {
        let xs: Vec<f64> = hists
            .iter()
            .map(|h| {
                u32::try_from(d)
                    .ok()
                    .and_then(|d| h.get(&d))
                    .copied()
                    .unwrap_or(0) as f64
            })
            .collect();
        let (mean, var) = mean_and_variance(&xs);
        out.push(
            ComparisonReport::at_most(
                format!("count_sd[d={d}]"),
                var.sqrt(),
                0.0,
                tol.concentration.max_cv * mean,
            )
            .with("mean", mean)
            .with("runs", runs)
            .with("n", n),
        );
    }
    Ok(out)
}

/// Convenience stream for bootstrap draws tied to an experiment seed.
pub(crate) fn bootstrap_stream(seed: u64) -> RngStream {
    RngStream::new(seed, u64::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::replicas::{ModelTag, Observation};
    use crate::numerics::{int, ratio};

    fn table(pairs: &[(i64, f64)]) -> BTreeMap<i64, f64> {
        pairs.iter().copied().collect()
    }

    fn sample(degrees: &[u64]) -> SampleSet {
        SampleSet {
            model: ModelTag::KNeighbour,
            config: json!({}),
            master_seed: 0,
            observations: (0..)
                .zip(degrees.iter().map(|&d| Observation::Degree(d)))
                .collect(),
        }
    }

    #[test]
    fn tv_examples() {
        let a = table(&[(2, 0.5), (3, 0.5)]);
        assert_eq!(total_variation(&a, &a), 0.0);
        assert_eq!(total_variation(&a, &table(&[(7, 1.0)])), 1.0);
        assert_eq!(total_variation(&a, &table(&[(2, 0.25), (3, 0.75)])), 0.25);
    }

    #[test]
    fn exact_match_has_zero_tv() {
        let s = sample(&[2, 3, 2, 3]);
        let pmf = DegreePmf::exact(int(2), 1, vec![ratio(1, 2), ratio(1, 2)]);
        let reports = compare_degree_distribution(&s, &pmf, &Tolerances::embedded()).unwrap();
        assert_eq!(reports[0].empirical, 0.0);
        assert!(reports[0].passed() && reports[1].passed());
        assert_eq!(reports[1].empirical, 2.5);
    }

    #[test]
    fn mass_outside_support_counts() {
        let s = sample(&[2, 9]);
        let pmf = DegreePmf::exact(int(2), 1, vec![ratio(1, 2), ratio(1, 2)]);
        let reports = compare_degree_distribution(&s, &pmf, &Tolerances::embedded()).unwrap();
        assert_eq!(reports[0].empirical, 0.5);
        assert_eq!(reports[0].metadata["mass_outside_support"], json!(0.5));
    }

    #[test]
    fn standard_error_shrinks_with_replicas() {
        let tol = Tolerances::embedded();
        let cfg = GrowthConfig::new(2, 200, 3).with_trace(10);
        let se = |r| {
            let s = crate::analytics::run_replicas(&cfg, r, 1).unwrap();
            compare_sample_mean(&s, 0.0, &tol).unwrap().metadata["standard_error"]
                .as_f64()
                .unwrap()
        };
        let ratio = se(400) / se(1600);
        assert!((1.6..2.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn degree_sequence_bookkeeping() {
        let g = grow_kneighbour(&GrowthConfig::new(2, 2000, 1))
            .unwrap()
            .graph;
        let reports = compare_degree_sequence(&g, 2, 6, &Tolerances::embedded()).unwrap();
        assert_eq!(reports.len(), 7);
        let below = reports
            .iter()
            .find(|r| r.name == "vertices_below_k")
            .unwrap();
        assert!(below.passed());
        let total = reports
            .iter()
            .find(|r| r.name == "histogram_total")
            .unwrap();
        assert!(total.passed());
        let props = degree_proportions(&g);
        assert!((props.values().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn median_of_runs() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0]), 2.5);
    }
}
