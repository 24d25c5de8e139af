//! Monte Carlo replicas and their comparison against exact values.
//!
//! Every statistical verdict takes its band from [`Tolerances`], which is
//! parsed from the versioned `tolerances.toml` shipped with the crate.

mod compare;
mod models;
mod pa_class;
mod replicas;
mod report;
mod tolerances;

pub use compare::{
    compare_degree_distribution, compare_degree_sequence, compare_degree_sequence_median,
    compare_sample_mean, concentration_check, degree_proportions, expected_sampling_tv,
    mean_and_variance, total_variation,
};
pub use models::{bootstrap_null_tv, compare_models_tv, compare_samples_tv};
pub use pa_class::{
    birth_degree_violations, check_pa_class, exact_increment_probabilities, sample_step_increments,
    IncrementCounts, IncrementSample,
};
pub use replicas::{
    par_map_indexed, run_lcd_replicas, run_replica_range, run_replicas, ModelTag, Observation,
    SampleSet,
};
pub use report::{all_pass, reports_to_json, reports_to_text, ComparisonReport, Verdict};
pub use tolerances::{Tolerances, TOLERANCES_TOML};

use crate::error::Result;

/// Outcome of a statistical check run with fresh seeds until a majority of
/// the attempts agree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MajorityOutcome {
    pub passed: bool,
    /// Verdict of each attempt, in order.
    pub attempts: Vec<bool>,
}

/// Runs `check(attempt)` until passes outnumber failures or failures reach a
/// majority of `max_attempts`. A first-attempt pass therefore needs no rerun.
pub fn majority_vote<F>(max_attempts: u32, mut check: F) -> Result<MajorityOutcome>
where
    F: FnMut(u32) -> Result<bool>,
{
    let max_attempts = max_attempts.max(1);
    let mut attempts = Vec::new();
    for attempt in 0..max_attempts {
        attempts.push(check(attempt)?);
        let passes = attempts.iter().filter(|&&p| p).count() as u32;
        let fails = attempts.len() as u32 - passes;
        if passes > fails {
            return Ok(MajorityOutcome {
                passed: true,
                attempts,
            });
        }
        if fails > max_attempts / 2 {
            break;
        }
    }
    Ok(MajorityOutcome {
        passed: false,
        attempts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(pattern: &[bool]) -> MajorityOutcome {
        majority_vote(3, |a| Ok(pattern[a as usize])).unwrap()
    }

    #[test]
    fn majority_rules() {
        assert_eq!(run(&[true, false, false]).attempts, vec![true]);
        assert!(run(&[true, false, false]).passed);
        assert!(run(&[false, true, true]).passed);
        assert!(!run(&[false, true, false]).passed);
        let o = run(&[false, false, true]);
        assert!(!o.passed);
        assert_eq!(o.attempts.len(), 2);
    }
}
