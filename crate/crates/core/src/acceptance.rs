//! End-to-end acceptance checks.
//!
//! Each criterion returns a [`CriterionOutcome`] with a one-line verdict and
//! the supporting [`ComparisonReport`]s. Statistical criteria rerun with
//! fresh seeds under [`majority_vote`]; exact criteria never rerun.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::analytics::{
    check_pa_class, compare_degree_sequence_median, compare_models_tv, compare_sample_mean,
    majority_vote, run_replicas, sample_step_increments, ComparisonReport, Tolerances,
};
use crate::error::Result;
use crate::growth::{enumerate_process_distribution, grow_kneighbour, GrowthConfig, SeedGraph};
use crate::numerics::{binomial, falling_factorial, int, ratio, to_f64, EvalMode, Rational};
use crate::pmf::{total_variation_exact, DegreePmf};
use crate::urn::{
    alpha_degree_seq, degree_pmf_from_seed, degree_urn, expected_degree, expected_degree_gamma,
    urn_gf_rows, urn_mean, urn_pmf, urn_pmf_dp_oracle, urn_pmf_scaled, urn_second_moment,
    TriangularUrnSpec, UrnDp,
};

pub const DEFAULT_SEED: u64 = 20_240_601;

/// Criteria implemented in this crate; the byte-determinism criterion lives
/// with the command-line front end.
pub const CORE_CRITERIA: [u32; 9] = [1, 2, 3, 4, 5, 6, 7, 8, 9];

/// Trial counts checked for every spec of the exact grid.
pub const GRID_TRIALS: [u64; 16] = [0, 1, 2, 3, 4, 5, 6, 7, 8, 13, 21, 34, 55, 89, 144, 200];

const EXACT_BUDGET: Duration = Duration::from_secs(120);
const MC_EXPECTATION_BUDGET: Duration = Duration::from_secs(300);

#[derive(Debug, Clone)]
pub struct AcceptanceOptions {
    pub seed: u64,
    pub parallelism: usize,
    pub tolerances: Tolerances,
}

impl Default for AcceptanceOptions {
    fn default() -> Self {
        AcceptanceOptions {
            seed: DEFAULT_SEED,
            parallelism: std::thread::available_parallelism().map_or(1, |p| p.get()),
            tolerances: Tolerances::embedded(),
        }
    }
}

impl AcceptanceOptions {
    /// Seed for rerun `attempt` of a statistical check.
    pub fn attempt_seed(&self, attempt: u32) -> u64 {
        self.seed
            .wrapping_add(u64::from(attempt).wrapping_mul(0x9e37_79b9_7f4a_7c15))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionOutcome {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub reports: Vec<ComparisonReport>,
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        format!(
            "{} [{}] {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.detail
        )
    }
}

pub fn title(id: u32) -> &'static str {
    match id {
        1 => "exact pmf identity",
        2 => "moment identities",
        3 => "expectation chain",
        4 => "process-vs-urn gap",
        5 => "Monte Carlo expectation",
        6 => "degree sequence limit",
        7 => "k-neighbour vs LCD",
        8 => "PA-class conditions",
        9 => "growth performance",
        10 => "determinism",
        _ => "unknown criterion",
    }
}

pub fn run_criterion(id: u32, opts: &AcceptanceOptions) -> Result<CriterionOutcome> {
    match id {
        1 => criterion_pmf_identity(opts),
        2 => criterion_moments(opts),
        3 => criterion_expectation_chain(opts),
        4 => criterion_process_gap(opts),
        5 => criterion_mc_expectation(opts),
        6 => criterion_degree_sequence(opts),
        7 => criterion_models(opts),
        8 => criterion_pa_class(opts),
        9 => criterion_performance(opts),
        _ => Err(crate::Error::InvalidConfig(format!(
            "no core criterion {id}"
        ))),
    }
}

fn outcome(
    id: u32,
    passed: bool,
    detail: String,
    reports: Vec<ComparisonReport>,
) -> CriterionOutcome {
    CriterionOutcome {
        id,
        title: title(id),
        passed,
        detail,
        reports,
    }
}

/// `alpha <= 4`, `alpha <= sigma <= 8`, `1 <= a0 <= 12`, `0 <= b0 <= 12`.
pub fn spec_grid() -> Vec<TriangularUrnSpec> {
    let mut out = Vec::new();
    for alpha in 1..=4u64 {
        for sigma in alpha..=8 {
            for a0 in 1..=12 {
                for b0 in 0..=12 {
                    out.push(
                        TriangularUrnSpec::from_ints(alpha, sigma, a0, b0)
                            .expect("grid spec is valid"),
                    );
                }
            }
        }
    }
    out
}

#[derive(Debug, Default, Clone, Copy)]
struct GridTally {
    dp_checks: u64,
    gf_checks: u64,
    failures: u64,
}

impl GridTally {
    fn add(self, o: GridTally) -> GridTally {
        GridTally {
            dp_checks: self.dp_checks + o.dp_checks,
            gf_checks: self.gf_checks + o.gf_checks,
            failures: self.failures + o.failures,
        }
    }
}

// Closed form and DP share the history-count denominator, so rational
// equality of the tables is integer equality of the weights.
fn pmf_identity_for_spec(spec: &TriangularUrnSpec) -> Result<GridTally> {
    let mut tally = GridTally::default();
    let gf = urn_gf_rows(spec, 8)?;
    let mut dp = UrnDp::new(spec);
    for &m in &GRID_TRIALS {
        while dp.steps() < m {
            dp.step();
        }
        let closed = urn_pmf_scaled(spec, m)?;
        let weights = closed.history_weights();
        let sum: BigInt = dp.weights().iter().sum();
        let ok = closed.denominator == *dp.histories()
            && weights.as_deref() == Some(dp.weights())
            && sum == *dp.histories();
        tally.dp_checks += 1;
        tally.failures += u64::from(!ok);
        if let Some(row) = gf.get(m as usize) {
            let reduced = closed.to_pmf();
            let ok = row.exact_probs() == reduced.exact_probs()
                && row.total_exact() == Some(Rational::one())
                && reduced.total_exact() == Some(Rational::one());
            tally.gf_checks += 1;
            tally.failures += u64::from(!ok);
        }
    }
    Ok(tally)
}

pub fn criterion_pmf_identity(opts: &AcceptanceOptions) -> Result<CriterionOutcome> {
    let start = Instant::now();
    let grid = spec_grid();
    let tallies = crate::analytics::par_map_indexed(grid.len(), opts.parallelism, |idx| {
        pmf_identity_for_spec(&grid[idx])
    })?;
    let tally = tallies
        .into_iter()
        .fold(GridTally::default(), GridTally::add);

    // The public reduced-form entry points on the grid corners at m = 200.
    let mut api_failures = 0u64;
    let corners = [
        (1, 1, 1, 0),
        (1, 8, 12, 12),
        (4, 4, 12, 0),
        (4, 8, 1, 12),
        (3, 7, 11, 12),
        (2, 5, 7, 3),
    ];
    for (alpha, sigma, a0, b0) in corners {
        let spec = TriangularUrnSpec::from_ints(alpha, sigma, a0, b0)?;
        let closed = urn_pmf(&spec, 200, EvalMode::exact())?;
        let dp = urn_pmf_dp_oracle(&spec, 200)?;
        if closed != dp || closed.total_exact() != Some(Rational::one()) {
            api_failures += 1;
        }
    }
    let elapsed = start.elapsed();
    let passed = tally.failures == 0 && api_failures == 0 && elapsed <= EXACT_BUDGET;
    let detail = format!(
        "{} specs x m in {{0..8,13,..,200}}: {} dp + {} gf comparisons, {} mismatches, {} corner api mismatches, {:.1} s (limit {} s)",
        grid.len(),
        tally.dp_checks,
        tally.gf_checks,
        tally.failures,
        api_failures,
        elapsed.as_secs_f64(),
        EXACT_BUDGET.as_secs()
    );
    Ok(outcome(1, passed, detail, Vec::new()))
}

/// The second moment with `+ (alpha + 1)` in place of the
/// corrected `- alpha` coefficient on the `t0 + alpha` term.
fn second_moment_sign_variant(spec: &TriangularUrnSpec, m: u64) -> Rational {
    let alpha = Rational::from_integer(spec.alpha().into());
    let sigma = Rational::from_integer(spec.sigma().into());
    let t0 = spec.t0();
    let g = |q: Rational| {
        crate::numerics::rising_factorial(&(q / &sigma), m)
            / crate::numerics::rising_factorial(&(&t0 / &sigma), m)
    };
    let g2 = g(&t0 + &alpha + &alpha);
    let g1 = g(&t0 + &alpha);
    spec.a0() * ((spec.a0() + &alpha) * g2 + (alpha + Rational::one()) * g1)
}

fn moments_for_spec(spec: &TriangularUrnSpec) -> Result<u64> {
    let mut failures = 0;
    let mut dp = UrnDp::new(spec);
    let a0 = spec.a0().to_integer();
    let alpha = BigInt::from(spec.alpha());
    for &m in &GRID_TRIALS {
        while dp.steps() < m {
            dp.step();
        }
        let mut s1 = BigInt::zero();
        let mut s2 = BigInt::zero();
        let mut value = a0.clone();
        for w in dp.weights() {
            let wv = w * &value;
            s2 += &wv * &value;
            s1 += wv;
            value += &alpha;
        }
        let d = dp.histories();
        let mean = urn_mean(spec, m);
        let second = urn_second_moment(spec, m);
        // p/q = S/D  <=>  p D = q S
        let ok =
            mean.numer() * d == mean.denom() * &s1 && second.numer() * d == second.denom() * &s2;
        failures += u64::from(!ok);
    }
    Ok(failures)
}

pub fn criterion_moments(opts: &AcceptanceOptions) -> Result<CriterionOutcome> {
    let start = Instant::now();
    let grid = spec_grid();
    let failures: u64 = crate::analytics::par_map_indexed(grid.len(), opts.parallelism, |idx| {
        moments_for_spec(&grid[idx])
    })?
    .into_iter()
    .sum();
    let checks = grid.len() * GRID_TRIALS.len();

    let spec = TriangularUrnSpec::from_ints(1, 2, 2, 2)?;
    let oracle = urn_pmf_dp_oracle(&spec, 1)?.moment_exact(2).expect("exact");
    let corrected = urn_second_moment(&spec, 1);
    let variant = second_moment_sign_variant(&spec, 1);
    let pinned = oracle == ratio(13, 2) && corrected == oracle && variant == int(14);
    let passed = failures == 0 && pinned;
    let detail = format!(
        "{checks} (spec, m) pairs: {failures} mismatches; spec (1,2,2,2) m=1: oracle {}, corrected {}, sign variant {} ({:.1} s)",
        crate::pmf::format_rational(&oracle),
        crate::pmf::format_rational(&corrected),
        crate::pmf::format_rational(&variant),
        start.elapsed().as_secs_f64()
    );
    Ok(outcome(2, passed, detail, Vec::new()))
}

pub fn criterion_expectation_chain(opts: &AcceptanceOptions) -> Result<CriterionOutcome> {
    let mut detail = String::new();
    let mut passed = true;
    for n in 2..=5u64 {
        let pmf = enumerate_process_distribution(2, 2, n as usize, &SeedGraph::KLoops)?;
        let mean = pmf.moment_exact(1).expect("exact");
        let product = expected_degree(2, 2, n)?;
        passed &= mean == product;
        let _ = write!(detail, "n={n}: {} ", crate::pmf::format_rational(&mean));
    }
    let rel = opts.tolerances.gamma.relative;
    let mut worst = 0.0f64;
    for i in 2..=50u64 {
        for n in i..=i + 200 {
            let exact = to_f64(&expected_degree(2, i, n)?);
            let g = expected_degree_gamma(2, i, n)?;
            worst = worst.max(((g - exact) / exact).abs());
        }
    }
    passed &= worst <= rel;
    let _ = write!(
        detail,
        "| gamma form worst relative error {worst:.2e} (limit {rel:.0e})"
    );
    Ok(outcome(3, passed, detail, Vec::new()))
}

pub fn criterion_process_gap(opts: &AcceptanceOptions) -> Result<CriterionOutcome> {
    let process3 = enumerate_process_distribution(2, 2, 3, &SeedGraph::KLoops)?;
    let urn3 = degree_pmf_from_seed(2, &SeedGraph::KLoops, 2, 3, EvalMode::exact())?;
    let expected3 = DegreePmf::exact(int(2), 1, vec![ratio(1, 2), ratio(1, 2)]);
    let equal3 = process3 == urn3 && urn3 == expected3;

    let process5 = enumerate_process_distribution(2, 2, 5, &SeedGraph::KLoops)?;
    let urn5 = degree_pmf_from_seed(2, &SeedGraph::KLoops, 2, 5, EvalMode::exact())?;
    let tv = total_variation_exact(&process5, &urn5).expect("exact tables");
    let tv_f = to_f64(&tv);
    let limit = opts.tolerances.process_gap.max_tv;
    let passed = equal3 && tv_f < limit;
    let report = ComparisonReport::at_most("total_variation", tv_f, 0.0, limit)
        .with("k", 2)
        .with("i", 2)
        .with("n", 5)
        .with("exact", crate::pmf::format_rational(&tv));
    let detail = format!(
        "n=3 tables equal: {equal3}; n=5 exact TV = {} ({tv_f:.3e}, limit < {limit})",
        crate::pmf::format_rational(&tv)
    );
    Ok(outcome(4, passed, detail, vec![report]))
}

pub fn criterion_mc_expectation(opts: &AcceptanceOptions) -> Result<CriterionOutcome> {
    let start = Instant::now();
    let (k, n, r) = (2u32, 2000usize, 20_000u64);
    let mut reports = Vec::new();
    let mut detail = String::new();
    let mut passed = true;
    for i in [10u32, 100] {
        let exact = to_f64(&expected_degree(k, u64::from(i), n as u64)?);
        let mut last = None;
        let vote = majority_vote(opts.tolerances.reruns.max_attempts, |attempt| {
            let cfg = GrowthConfig::new(k, n, opts.attempt_seed(attempt)).with_trace(i);
            let s = run_replicas(&cfg, r, opts.parallelism)?;
            let rep = compare_sample_mean(&s, exact, &opts.tolerances)?
                .with("i", i)
                .with("attempt", attempt);
            let ok = rep.passed();
            last = Some(rep);
            Ok(ok)
        })?;
        let rep = last.expect("at least one attempt");
        let _ = write!(
            detail,
            "i={i}: mean {:.4} vs {:.4} (+-{:.4}, attempts {:?}); ",
            rep.empirical, rep.exact, rep.tolerance, vote.attempts
        );
        passed &= vote.passed;
        reports.push(rep);
    }
    let elapsed = start.elapsed();
    passed &= elapsed <= MC_EXPECTATION_BUDGET;
    let _ = write!(detail, "{:.1} s", elapsed.as_secs_f64());
    Ok(outcome(5, passed, detail, reports))
}

pub fn criterion_degree_sequence(opts: &AcceptanceOptions) -> Result<CriterionOutcome> {
    let tol = &opts.tolerances;
    let mut reports = Vec::new();
    let vote = majority_vote(tol.reruns.max_attempts, |attempt| {
        reports = compare_degree_sequence_median(
            2,
            tol.degree_sequence.n,
            10,
            tol.degree_sequence.runs as u64,
            opts.attempt_seed(attempt),
            opts.parallelism,
            tol,
        )?;
        Ok(reports.iter().all(ComparisonReport::passed))
    })?;
    let worst = reports
        .iter()
        .map(|r| (r.empirical - r.exact).abs() / r.exact)
        .fold(0.0f64, f64::max);

    let mut telescoping = true;
    let mut partial = Rational::zero();
    for d in 2..=200u64 {
        partial += alpha_degree_seq(2, d)?;
        telescoping &=
            partial == Rational::one() - Rational::new(6.into(), ((d + 1) * (d + 2)).into());
    }
    let passed = vote.passed && telescoping;
    let detail = format!(
        "worst relative deviation over d in [2,10]: {worst:.4} (limit {}), attempts {:?}; telescoping identity for D <= 200: {telescoping}",
        tol.degree_sequence.relative, vote.attempts
    );
    Ok(outcome(6, passed, detail, reports))
}

pub fn criterion_models(opts: &AcceptanceOptions) -> Result<CriterionOutcome> {
    let tol = &opts.tolerances;
    let mut last = None;
    let vote = majority_vote(tol.reruns.max_attempts, |attempt| {
        let rep = compare_models_tv(
            2,
            5,
            500,
            50_000,
            opts.attempt_seed(attempt),
            opts.parallelism,
            tol,
        )?;
        let ok = rep.empirical <= tol.models.max_tv;
        last = Some(rep.with("attempt", attempt));
        Ok(ok)
    })?;
    let rep = last.expect("at least one attempt");
    let detail = format!(
        "TV {:.4} (limit {}), bootstrap null TV {:.4}, means {:.3} vs {:.3}, attempts {:?}",
        rep.empirical,
        tol.models.max_tv,
        rep.metadata["bootstrap_null_tv"]
            .as_f64()
            .unwrap_or(f64::NAN),
        rep.metadata["mean_kneighbour"].as_f64().unwrap_or(f64::NAN),
        rep.metadata["mean_lcd"].as_f64().unwrap_or(f64::NAN),
        vote.attempts
    );
    Ok(outcome(7, vote.passed, detail, vec![rep]))
}

pub fn criterion_pa_class(opts: &AcceptanceOptions) -> Result<CriterionOutcome> {
    let tol = &opts.tolerances;
    let mut reports = Vec::new();
    let vote = majority_vote(tol.reruns.max_attempts, |attempt| {
        let sample = sample_step_increments(
            2,
            1000,
            &[4, 10, 20],
            200,
            5000,
            opts.attempt_seed(attempt),
            opts.parallelism,
        )?;
        reports = check_pa_class(&sample, tol)?;
        Ok(reports.iter().all(ComparisonReport::passed))
    })?;
    let mut detail = String::new();
    for r in &reports {
        let _ = write!(
            detail,
            "{} {:.3e} (ref {:.3e} +- {:.1e}); ",
            r.name, r.empirical, r.exact, r.tolerance
        );
    }
    let _ = write!(detail, "attempts {:?}", vote.attempts);
    Ok(outcome(8, vote.passed, detail, reports))
}

/// Peak resident set size of this process in bytes, where the platform reports it.
pub fn peak_rss_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthBenchmark {
    pub k: u32,
    pub n: usize,
    pub seconds: f64,
    pub vertices_per_second: f64,
    pub edges_per_second: f64,
    pub graph_heap_bytes: usize,
    pub peak_rss_bytes: Option<u64>,
}

pub fn benchmark_growth(k: u32, n: usize, seed: u64) -> Result<GrowthBenchmark> {
    let start = Instant::now();
    let run = grow_kneighbour(&GrowthConfig::new(k, n, seed))?;
    let seconds = start.elapsed().as_secs_f64();
    Ok(GrowthBenchmark {
        k,
        n,
        seconds,
        vertices_per_second: n as f64 / seconds,
        edges_per_second: run.graph.edge_count() as f64 / seconds,
        graph_heap_bytes: run.graph.heap_bytes(),
        peak_rss_bytes: peak_rss_bytes(),
    })
}

pub fn criterion_performance(opts: &AcceptanceOptions) -> Result<CriterionOutcome> {
    let perf = &opts.tolerances.performance;
    let b = benchmark_growth(5, 1_000_000, opts.seed)?;
    let passed = b.seconds <= perf.max_seconds && b.graph_heap_bytes as u64 <= perf.max_bytes;
    let detail = format!(
        "k=5 n=1e6 in {:.2} s (limit {} s), {:.2e} vertices/s, graph heap {:.0} MB (limit {:.0} MB), process peak RSS {}",
        b.seconds,
        perf.max_seconds,
        b.vertices_per_second,
        b.graph_heap_bytes as f64 / 1e6,
        perf.max_bytes as f64 / 1e6,
        b.peak_rss_bytes.map_or("n/a".to_string(), |v| format!("{:.0} MB", v as f64 / 1e6))
    );
    Ok(outcome(9, passed, detail, Vec::new()))
}

/// `P(d_n(v_i) = j - 1 + x)` for an initial `K_j` vertex, alternative form: the
/// falling-factorial numerator uses `(j-1)^2 - k u` where the urn's
/// `b0 - alpha u` is `(j-k)(j-1) - k u`.
pub fn kj_alt_numerator_pmf(k: u32, j: u32, n: u64) -> Vec<Rational> {
    let (k, j) = (i64::from(k), i64::from(j));
    let m = n - j as u64;
    let mr = Rational::from_integer(m.into());
    let r_den = Rational::new((j * (j - 1)).into(), (2 * k).into());
    let den = falling_factorial(&(&mr + r_den - Rational::one()), m);
    (0..=m)
        .map(|x| {
            let pre = binomial(&Rational::from_integer((x as i64 + j - 2).into()), x);
            let mut sum = Rational::zero();
            for u in 0..=x {
                let c = Rational::new(((j - 1) * (j - 1) - k * u as i64).into(), (2 * k).into());
                let term = binomial(&Rational::from_integer((x as i64).into()), u)
                    * falling_factorial(&(&mr + c - Rational::one()), m);
                if u % 2 == 0 {
                    sum += term;
                } else {
                    sum -= term;
                }
            }
            pre * sum / &den
        })
        .collect()
}

/// The alternative `K_j` formula next to the urn DP for the same vertex.
pub fn kj_alt_numerator_vs_dp(
    k: u32,
    j: u32,
    i: u64,
    n: u64,
) -> Result<(Vec<Rational>, DegreePmf)> {
    let urn = degree_urn(k, &SeedGraph::CompleteKj(j), i, n)?;
    let dp = urn_pmf_dp_oracle(&urn.spec, urn.trials)?;
    Ok((kj_alt_numerator_pmf(k, j, n), dp))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> AcceptanceOptions {
        AcceptanceOptions {
            parallelism: 1,
            ..AcceptanceOptions::default()
        }
    }

    #[test]
    fn grid_size() {
        assert_eq!(spec_grid().len(), 26 * 12 * 13);
    }

    #[test]
    fn second_moment_sign_variant_differs() {
        let spec = TriangularUrnSpec::from_ints(1, 2, 2, 2).unwrap();
        assert_eq!(second_moment_sign_variant(&spec, 1), int(14));
        assert_eq!(urn_second_moment(&spec, 1), ratio(13, 2));
    }

    #[test]
    fn kj_alt_numerator_disagrees_for_k2() {
        let (variant, dp) = kj_alt_numerator_vs_dp(2, 5, 3, 7).unwrap();
        let dp_probs = dp.exact_probs().unwrap();
        assert_eq!(variant.len(), dp_probs.len());
        assert_ne!(variant.as_slice(), dp_probs);
        // With k = 1 the two numerators coincide.
        let (variant, dp) = kj_alt_numerator_vs_dp(1, 4, 2, 8).unwrap();
        assert_eq!(variant.as_slice(), dp.exact_probs().unwrap());
    }

    #[test]
    fn single_spec_identity() {
        let spec = TriangularUrnSpec::from_ints(3, 7, 11, 12).unwrap();
        let t = pmf_identity_for_spec(&spec).unwrap();
        assert_eq!(t.failures, 0);
        assert_eq!(t.dp_checks, GRID_TRIALS.len() as u64);
        assert_eq!(t.gf_checks, 9);
        assert_eq!(moments_for_spec(&spec).unwrap(), 0);
    }

    #[test]
    fn exact_small_criteria() {
        for id in [3, 4] {
            let o = run_criterion(id, &opts()).unwrap();
            assert!(o.passed, "{}", o.line());
        }
        assert!(run_criterion(11, &opts()).is_err());
    }

    #[test]
    fn attempt_seeds_differ() {
        let o = opts();
        assert_eq!(o.attempt_seed(0), o.seed);
        assert_ne!(o.attempt_seed(1), o.attempt_seed(2));
    }
}
