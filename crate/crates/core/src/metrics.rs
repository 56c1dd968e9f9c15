//! Gap evaluation for candidate allocations.
//!
//! For an allocation `x` over regions `j` with populations `p_j` (total
//! `P`), the diversity gap of a region is
//!
//! ```text
//! d_j(x) = | x_j / p_j  -  (sum_k x_k) / P |
//! ```
//!
//! For group `i` with citywide size `s_i`, counts `s_ij`, exposure rate
//! `r_i`, and per-region exposed population `e_j = sum_l s_lj * r_l`, the
//! expected resource per exposed member is
//!
//! ```text
//! m_i(x) = sum_j (x_j / e_j) * (s_ij / s_i)
//! ```
//!
//! and the fairness gap is `f_i(x) = | m_i(x) - mean |`, where the mean is
//! the exposure-weighted average of the `m_i` (algebraically equal to the
//! total budget over the total exposed population). Both gap families are
//! max-of-absolute-affine functions of `x`: convex, piecewise linear, and
//! positively homogeneous.

use crate::domain::{Allocation, ProblemInstance};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("allocation covers {got} regions, instance has {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("gap inputs must be non-negative, got {0}")]
    NegativeGap(f64),
}

/// Per-region diversity gaps and their maximum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiversityGaps {
    pub per_region: Vec<f64>,
    pub max: f64,
}

/// Per-group fairness gaps, the group conditional means, the global exposed
/// mean, and the maximum gap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairnessGaps {
    pub per_group: Vec<f64>,
    pub max: f64,
    pub group_means: Vec<f64>,
    pub global_mean: f64,
}

/// Combined gap evaluation of one allocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub diversity: DiversityGaps,
    pub fairness: FairnessGaps,
}

impl GapReport {
    pub fn max_diversity_gap(&self) -> f64 {
        self.diversity.max
    }

    pub fn max_fairness_gap(&self) -> f64 {
        self.fairness.max
    }
}

fn check_dims(instance: &ProblemInstance, x: &Allocation) -> Result<(), MetricsError> {
    if x.len() != instance.num_regions() {
        return Err(MetricsError::DimensionMismatch {
            expected: instance.num_regions(),
            got: x.len(),
        });
    }
    Ok(())
}

/// Evaluates the per-region diversity gaps and their maximum.
pub fn diversity_gaps(
    instance: &ProblemInstance,
    x: &Allocation,
) -> Result<DiversityGaps, MetricsError> {
    check_dims(instance, x)?;
    let total: f64 = x.total();
    let global = total / instance.total_population() as f64;
    let mut per_region = Vec::with_capacity(instance.num_regions());
    let mut max = 0.0f64;
    for j in 0..instance.num_regions() {
        let per_capita = x.amount(j) / instance.region_populations()[j] as f64;
        let gap = (per_capita - global).abs();
        max = max.max(gap);
        per_region.push(gap);
    }
    Ok(DiversityGaps { per_region, max })
}

/// Evaluates the per-group fairness gaps, group means, global exposed mean,
/// and the maximum gap.
///
/// The global mean is computed as the weighted sum of group means with
/// weights `w_i = r_i * s_i / E` (`E` the total exposed population), which
/// is how it enters the LP rows as well.
pub fn fairness_gaps(
    instance: &ProblemInstance,
    x: &Allocation,
) -> Result<FairnessGaps, MetricsError> {
    check_dims(instance, x)?;
    let n = instance.num_groups();
    let exposed = instance.exposed_populations();
    let total_exposed = instance.total_exposed_population();

    let mut group_means = Vec::with_capacity(n);
    for i in 0..n {
        let group_pop = instance.group_populations()[i] as f64;
        let mut mean = 0.0;
        for (j, &region_exposed) in exposed.iter().enumerate() {
            let share = instance.matrix().count(i, j) as f64 / group_pop;
            mean += x.amount(j) / region_exposed * share;
        }
        group_means.push(mean);
    }

    let mut global_mean = 0.0;
    for (i, mean) in group_means.iter().enumerate() {
        let weight = instance.rate(i) * instance.group_populations()[i] as f64 / total_exposed;
        global_mean += weight * mean;
    }

    let mut per_group = Vec::with_capacity(n);
    let mut max = 0.0f64;
    for mean in &group_means {
        let gap = (mean - global_mean).abs();
        max = max.max(gap);
        per_group.push(gap);
    }
    Ok(FairnessGaps {
        per_group,
        max,
        group_means,
        global_mean,
    })
}

/// Evaluates both gap families at once.
pub fn gap_report(instance: &ProblemInstance, x: &Allocation) -> Result<GapReport, MetricsError> {
    Ok(GapReport {
        diversity: diversity_gaps(instance, x)?,
        fairness: fairness_gaps(instance, x)?,
    })
}

/// Ratio of the fairness gap without fairness constraints (diverse-only
/// model) to the gap with them (fair-diverse model).
///
/// A zero denominator is a legitimate outcome of fairness-only runs, so it
/// maps to [`PriceOfFairness::Infinite`] rather than an error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PriceOfFairness {
    Finite(f64),
    Infinite,
}

impl PriceOfFairness {
    pub fn as_f64(&self) -> f64 {
        match self {
            PriceOfFairness::Finite(v) => *v,
            PriceOfFairness::Infinite => f64::INFINITY,
        }
    }
}

impl std::fmt::Display for PriceOfFairness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PriceOfFairness::Finite(v) => write!(f, "{v}"),
            PriceOfFairness::Infinite => f.write_str("infinite"),
        }
    }
}

impl Serialize for PriceOfFairness {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            PriceOfFairness::Finite(v) => serializer.serialize_f64(*v),
            PriceOfFairness::Infinite => serializer.serialize_str("infinite"),
        }
    }
}

impl<'de> Deserialize<'de> for PriceOfFairness {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Number(v) => Ok(PriceOfFairness::Finite(v)),
            Raw::Text(s) if s == "infinite" => Ok(PriceOfFairness::Infinite),
            Raw::Text(s) => Err(D::Error::custom(format!(
                "expected a number or \"infinite\", got \"{s}\""
            ))),
        }
    }
}

/// Price of fairness from the two fairness gaps.
pub fn price_of_fairness(
    diverse_only_gap: f64,
    fair_diverse_gap: f64,
) -> Result<PriceOfFairness, MetricsError> {
    for g in [diverse_only_gap, fair_diverse_gap] {
        if g < 0.0 || !g.is_finite() {
            return Err(MetricsError::NegativeGap(g));
        }
    }
    if fair_diverse_gap == 0.0 {
        return Ok(PriceOfFairness::Infinite);
    }
    Ok(PriceOfFairness::Finite(diverse_only_gap / fair_diverse_gap))
}
