//! Core data model: regions, demographic groups, population counts,
//! exposure rates, and allocations.
//!
//! All types are validated on construction and immutable afterwards, so a
//! [`ProblemInstance`] can be shared freely across threads. Derived
//! quantities that every downstream computation needs (per-region totals,
//! per-group totals, exposed population) are computed once at validation
//! time.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DomainError {
    #[error("region identifier must be non-empty")]
    EmptyRegionId,
    #[error("group identifier must be non-empty")]
    EmptyGroupId,
    #[error("duplicate region id `{0}`")]
    DuplicateRegion(String),
    #[error("duplicate group id `{0}`")]
    DuplicateGroup(String),
    #[error("count matrix has {got} cells, expected {expected} (groups x regions)")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("negative population count for group `{group}` in region `{region}`")]
    NegativeCount { group: String, region: String },
    #[error("region `{0}` has zero total population")]
    ZeroPopulationRegion(String),
    #[error("no exposure rate supplied for group `{0}`")]
    MissingRate(String),
    #[error("exposure rate {rate} for group `{group}` is outside [0, 1]")]
    RateOutOfRange { group: String, rate: f64 },
    #[error("region `{0}` has zero exposed population")]
    ZeroExposedRegion(String),
    #[error("budget must be non-negative")]
    NegativeBudget,
    #[error("unknown region `{0}`")]
    UnknownRegion(String),
    #[error("unknown group `{0}`")]
    UnknownGroup(String),
    #[error("allocation amounts must be finite and non-negative, got {0}")]
    InvalidAmount(f64),
}

/// Opaque region identifier, e.g. a zip code.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RegionId(String);

impl RegionId {
    pub fn new(id: impl Into<String>) -> Result<Self, DomainError> {
        let id = id.into();
        if id.is_empty() {
            return Err(DomainError::EmptyRegionId);
        }
        Ok(RegionId(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl std::fmt::Display for RegionId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// Opaque demographic group identifier, e.g. `black_non_latinx` or `age_30_39`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupId(String);

impl GroupId {
    pub fn new(id: impl Into<String>) -> Result<Self, DomainError> {
        let id = id.into();
        if id.is_empty() {
            return Err(DomainError::EmptyGroupId);
        }
        Ok(GroupId(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl std::fmt::Display for GroupId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// Population counts per (group, region) cell.
///
/// Counts are stored row-major by group: cell `(i, j)` is group `i` in
/// region `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationMatrix {
    groups: Vec<GroupId>,
    regions: Vec<RegionId>,
    counts: Vec<u64>,
    region_index: BTreeMap<String, usize>,
    group_index: BTreeMap<String, usize>,
}

impl PopulationMatrix {
    /// Builds a matrix from ordered group and region lists plus a row-major
    /// count table (`counts[i * regions + j]`). Counts are accepted as `i64`
    /// so that negative inputs are reported as such instead of failing at
    /// the integer-parsing boundary.
    pub fn new(
        groups: Vec<GroupId>,
        regions: Vec<RegionId>,
        counts: Vec<i64>,
    ) -> Result<Self, DomainError> {
        let mut group_index = BTreeMap::new();
        for (i, g) in groups.iter().enumerate() {
            if group_index.insert(g.as_str().to_owned(), i).is_some() {
                return Err(DomainError::DuplicateGroup(g.as_str().to_owned()));
            }
        }
        let mut region_index = BTreeMap::new();
        for (j, r) in regions.iter().enumerate() {
            if region_index.insert(r.as_str().to_owned(), j).is_some() {
                return Err(DomainError::DuplicateRegion(r.as_str().to_owned()));
            }
        }
        let expected = groups.len() * regions.len();
        if counts.len() != expected {
            return Err(DomainError::DimensionMismatch {
                expected,
                got: counts.len(),
            });
        }
        let mut table = Vec::with_capacity(counts.len());
        for (k, &c) in counts.iter().enumerate() {
            if c < 0 {
                return Err(DomainError::NegativeCount {
                    group: groups[k / regions.len()].as_str().to_owned(),
                    region: regions[k % regions.len()].as_str().to_owned(),
                });
            }
            table.push(c as u64);
        }
        Ok(PopulationMatrix {
            groups,
            regions,
            counts: table,
            region_index,
            group_index,
        })
    }

    pub fn groups(&self) -> &[GroupId] {
        &self.groups
    }

    pub fn regions(&self) -> &[RegionId] {
        &self.regions
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn num_regions(&self) -> usize {
        self.regions.len()
    }

    /// Count for group index `i` in region index `j`.
    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.regions.len() + j]
    }

    pub fn region_position(&self, region: &RegionId) -> Option<usize> {
        self.region_index.get(region.as_str()).copied()
    }

    pub fn group_position(&self, group: &GroupId) -> Option<usize> {
        self.group_index.get(group.as_str()).copied()
    }
}

/// Per-group exposure probabilities, keyed by group id.
#[derive(Debug, Clone, PartialEq)]
pub struct ExposureRates {
    by_group: BTreeMap<String, f64>,
}

impl ExposureRates {
    /// Rates must lie in `[0, 1]`. A zero rate is allowed for individual
    /// groups; what must stay positive is each region's aggregate exposed
    /// population, which is checked when the full instance is assembled.
    pub fn new(rates: impl IntoIterator<Item = (GroupId, f64)>) -> Result<Self, DomainError> {
        let mut by_group = BTreeMap::new();
        for (group, rate) in rates {
            if !(0.0..=1.0).contains(&rate) || !rate.is_finite() {
                return Err(DomainError::RateOutOfRange {
                    group: group.as_str().to_owned(),
                    rate,
                });
            }
            if by_group.insert(group.as_str().to_owned(), rate).is_some() {
                return Err(DomainError::DuplicateGroup(group.as_str().to_owned()));
            }
        }
        Ok(ExposureRates { by_group })
    }

    pub fn get(&self, group: &GroupId) -> Option<f64> {
        self.by_group.get(group.as_str()).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.by_group.iter().map(|(g, &r)| (g.as_str(), r))
    }

    pub fn len(&self) -> usize {
        self.by_group.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_group.is_empty()
    }
}

/// A validated allocation problem: who lives where, how exposed each group
/// is, and how much resource there is to hand out.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    matrix: PopulationMatrix,
    rates: Vec<f64>,
    budget: u64,
    region_populations: Vec<u64>,
    group_populations: Vec<u64>,
    total_population: u64,
    exposed_populations: Vec<f64>,
    total_exposed: f64,
}

impl ProblemInstance {
    /// Validates and assembles an instance.
    ///
    /// Rejects regions with zero total population (the diversity gap divides
    /// by the region population), groups without a rate, regions whose
    /// aggregate exposed population is zero (the fairness gap divides by
    /// it), and negative budgets.
    pub fn new(
        matrix: PopulationMatrix,
        rates: &ExposureRates,
        budget: i64,
    ) -> Result<Self, DomainError> {
        if budget < 0 {
            return Err(DomainError::NegativeBudget);
        }
        let mut aligned = Vec::with_capacity(matrix.num_groups());
        for g in matrix.groups() {
            match rates.get(g) {
                Some(r) => aligned.push(r),
                None => return Err(DomainError::MissingRate(g.as_str().to_owned())),
            }
        }

        let m = matrix.num_regions();
        let n = matrix.num_groups();
        let mut region_populations = vec![0u64; m];
        let mut group_populations = vec![0u64; n];
        for (i, group_total) in group_populations.iter_mut().enumerate() {
            for (j, region_total) in region_populations.iter_mut().enumerate() {
                let c = matrix.count(i, j);
                *region_total += c;
                *group_total += c;
            }
        }
        for (j, &p) in region_populations.iter().enumerate() {
            if p == 0 {
                return Err(DomainError::ZeroPopulationRegion(
                    matrix.regions()[j].as_str().to_owned(),
                ));
            }
        }

        let mut exposed_populations = vec![0.0f64; m];
        for (j, slot) in exposed_populations.iter_mut().enumerate() {
            let mut e = 0.0;
            for (i, &rate) in aligned.iter().enumerate() {
                e += matrix.count(i, j) as f64 * rate;
            }
            if e <= 0.0 {
                return Err(DomainError::ZeroExposedRegion(
                    matrix.regions()[j].as_str().to_owned(),
                ));
            }
            *slot = e;
        }

        let total_population = region_populations.iter().sum();
        let total_exposed = exposed_populations.iter().sum();
        Ok(ProblemInstance {
            matrix,
            rates: aligned,
            budget: budget as u64,
            region_populations,
            group_populations,
            total_population,
            exposed_populations,
            total_exposed,
        })
    }

    pub fn matrix(&self) -> &PopulationMatrix {
        &self.matrix
    }

    pub fn regions(&self) -> &[RegionId] {
        self.matrix.regions()
    }

    pub fn groups(&self) -> &[GroupId] {
        self.matrix.groups()
    }

    pub fn num_regions(&self) -> usize {
        self.matrix.num_regions()
    }

    pub fn num_groups(&self) -> usize {
        self.matrix.num_groups()
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    /// Exposure rate for group index `i`, aligned with `groups()`.
    pub fn rate(&self, i: usize) -> f64 {
        self.rates[i]
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn total_population(&self) -> u64 {
        self.total_population
    }

    pub fn region_populations(&self) -> &[u64] {
        &self.region_populations
    }

    pub fn group_populations(&self) -> &[u64] {
        &self.group_populations
    }

    /// Exposed population of each region: sum over groups of count times
    /// exposure rate. Strictly positive by validation.
    pub fn exposed_populations(&self) -> &[f64] {
        &self.exposed_populations
    }

    pub fn total_exposed_population(&self) -> f64 {
        self.total_exposed
    }

    pub fn region_population(&self, region: &RegionId) -> Result<u64, DomainError> {
        let j = self
            .matrix
            .region_position(region)
            .ok_or_else(|| DomainError::UnknownRegion(region.as_str().to_owned()))?;
        Ok(self.region_populations[j])
    }

    pub fn group_population(&self, group: &GroupId) -> Result<u64, DomainError> {
        let i = self
            .matrix
            .group_position(group)
            .ok_or_else(|| DomainError::UnknownGroup(group.as_str().to_owned()))?;
        Ok(self.group_populations[i])
    }

    pub fn exposed_population(&self, region: &RegionId) -> Result<f64, DomainError> {
        let j = self
            .matrix
            .region_position(region)
            .ok_or_else(|| DomainError::UnknownRegion(region.as_str().to_owned()))?;
        Ok(self.exposed_populations[j])
    }
}

/// Per-region resource amounts, either the raw LP optimum (fractional) or
/// the repaired integer allocation. Amounts follow the instance's region
/// order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Allocation {
    Fractional(Vec<f64>),
    Integral(Vec<u64>),
}

impl Allocation {
    pub fn fractional(amounts: Vec<f64>) -> Result<Self, DomainError> {
        for &a in &amounts {
            if !a.is_finite() || a < 0.0 {
                return Err(DomainError::InvalidAmount(a));
            }
        }
        Ok(Allocation::Fractional(amounts))
    }

    pub fn integral(amounts: Vec<u64>) -> Self {
        Allocation::Integral(amounts)
    }

    pub fn len(&self) -> usize {
        match self {
            Allocation::Fractional(v) => v.len(),
            Allocation::Integral(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_integral(&self) -> bool {
        matches!(self, Allocation::Integral(_))
    }

    pub fn amount(&self, j: usize) -> f64 {
        match self {
            Allocation::Fractional(v) => v[j],
            Allocation::Integral(v) => v[j] as f64,
        }
    }

    pub fn amounts_f64(&self) -> Vec<f64> {
        match self {
            Allocation::Fractional(v) => v.clone(),
            Allocation::Integral(v) => v.iter().map(|&a| a as f64).collect(),
        }
    }

    pub fn total(&self) -> f64 {
        match self {
            Allocation::Fractional(v) => v.iter().sum(),
            Allocation::Integral(v) => v.iter().map(|&a| a as f64).sum(),
        }
    }
}
