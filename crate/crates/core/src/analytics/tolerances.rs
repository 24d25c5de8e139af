//! Versioned tolerance table, embedded at build time.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TOLERANCES_TOML: &str = include_str!("tolerances.toml");

pub const SUPPORTED_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub version: u32,
    pub clt: Clt,
    pub distribution: Distribution,
    pub degree_sequence: DegreeSequence,
    pub concentration: Concentration,
    pub models: Models,
    pub pa_class: PaClass,
    pub process_gap: ProcessGap,
    pub gamma: Gamma,
    pub reruns: Reruns,
    pub performance: Performance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clt {
    pub sigmas: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub tv_factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeSequence {
    pub relative: f64,
    pub n: usize,
    pub runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Concentration {
    pub max_cv: f64,
    pub runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Models {
    pub bootstrap_factor: f64,
    pub bootstrap_resamples: usize,
    pub max_tv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaClass {
    pub sigmas: f64,
    pub min_events: u64,
    pub multi_increment_envelope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessGap {
    pub max_tv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gamma {
    pub relative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reruns {
    pub max_attempts: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Performance {
    pub max_seconds: f64,
    pub max_bytes: u64,
}

impl Tolerances {
    pub fn parse(text: &str) -> Result<Self> {
        let t: Tolerances = toml::from_str(text).map_err(|e| Error::Tolerances(e.to_string()))?;
        if t.version != SUPPORTED_VERSION {
            return Err(Error::Tolerances(format!(
                "version {} not supported (expected {SUPPORTED_VERSION})",
                t.version
            )));
        }
        Ok(t)
    }

    /// The table shipped with this build.
    pub fn embedded() -> Self {
        Self::parse(TOLERANCES_TOML).expect("embedded tolerance file is valid")
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::embedded()
    }
}
