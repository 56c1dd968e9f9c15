//! The four comparison models and the side-by-side report.
//!
//! * diverse-only: weight 0, repair passes ordered by population;
//! * fair-only: weight 1, repair passes ordered by exposed population;
//! * a fixed weight (the even split in the standard comparison);
//! * the tuned fair-diverse model, solved at the midpoint of the feasible
//!   weight range found by a grid scan.
//!
//! Every scenario solves the LP, repairs the fractional optimum into
//! integers, and evaluates the gaps of the integral allocation. For the
//! tuned model the thresholds are checked on the fractional optimum;
//! rounding can push a gap back above its threshold, which the report
//! records instead of treating as an error.

use crate::domain::{Allocation, ProblemInstance};
use crate::lp::{self, SolveError, TradeoffConfig, TradeoffOptimum};
use crate::metrics::{gap_report, price_of_fairness, GapReport, MetricsError, PriceOfFairness};
use crate::rounding::{round_allocation, RoundingError, RoundingMode};
use crate::tuner::{feasible_alpha_range, tune_alpha, TunerError, TunerResult, THRESHOLD_SLACK};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Grid step used to locate the feasible weight range of the tuned model.
pub const TUNED_GRID_STEP: f64 = 0.01;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("no weight satisfies thresholds epsilon_d={epsilon_d}, epsilon_f={epsilon_f}")]
    TunerInfeasible { epsilon_d: f64, epsilon_f: f64 },
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Tuner(#[from] TunerError),
    #[error(transparent)]
    Rounding(#[from] RoundingError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("at least one scenario is required")]
    EmptySpecs,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ScenarioSpec {
    DiverseOnly,
    FairOnly,
    FixedAlpha(f64),
    FairDiverseTuned {
        epsilon_d: f64,
        epsilon_f: f64,
        tau: f64,
    },
}

impl ScenarioSpec {
    /// Column label used in reports.
    pub fn label(&self) -> String {
        match self {
            ScenarioSpec::DiverseOnly => "Diverse-only".to_owned(),
            ScenarioSpec::FairOnly => "Fair-only".to_owned(),
            ScenarioSpec::FixedAlpha(alpha) => format!("alpha={alpha}"),
            ScenarioSpec::FairDiverseTuned { .. } => "alpha_tuned".to_owned(),
        }
    }
}

/// A solved scenario: the weight it solved at, the fractional optimum, and
/// the repaired integral allocation with its gaps.
#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub spec: ScenarioSpec,
    pub alpha: f64,
    pub fractional: TradeoffOptimum,
    pub integral: Allocation,
    pub integral_gaps: GapReport,
}

impl ScenarioOutcome {
    /// For the tuned scenario: whether the fractional optimum and the
    /// rounded allocation meet the thresholds. `None` for other scenarios.
    pub fn threshold_status(&self) -> Option<(bool, bool)> {
        let ScenarioSpec::FairDiverseTuned {
            epsilon_d,
            epsilon_f,
            ..
        } = self.spec
        else {
            return None;
        };
        let meets = |gaps: &GapReport| {
            gaps.diversity.max <= epsilon_d + THRESHOLD_SLACK
                && gaps.fairness.max <= epsilon_f + THRESHOLD_SLACK
        };
        Some((meets(&self.fractional.gaps), meets(&self.integral_gaps)))
    }
}

/// Runs one scenario end to end: solve, repair, evaluate.
pub fn run_scenario(
    instance: &ProblemInstance,
    spec: ScenarioSpec,
) -> Result<ScenarioOutcome, ScenarioError> {
    let (alpha, mode) = match spec {
        ScenarioSpec::DiverseOnly => (0.0, RoundingMode::DiverseOnly),
        ScenarioSpec::FairOnly => (1.0, RoundingMode::FairOnly),
        ScenarioSpec::FixedAlpha(alpha) => (alpha, RoundingMode::Balanced),
        ScenarioSpec::FairDiverseTuned {
            epsilon_d,
            epsilon_f,
            tau,
        } => {
            // The bisection settles feasibility quickly; the grid scan then
            // supplies the range whose midpoint is solved.
            let cfg = TradeoffConfig::thresholds(epsilon_d, epsilon_f, tau)
                .map_err(TunerError::from)?;
            let verdict = tune_alpha(instance, &cfg)?;
            if matches!(verdict, TunerResult::Infeasible { .. }) {
                return Err(ScenarioError::TunerInfeasible {
                    epsilon_d,
                    epsilon_f,
                });
            }
            let range = feasible_alpha_range(instance, epsilon_d, epsilon_f, TUNED_GRID_STEP)?;
            let alpha = match (range, verdict) {
                (Some((lo, hi)), _) => (lo + hi) / 2.0,
                // A feasible interval narrower than the grid step: fall
                // back to the weight the bisection accepted.
                (None, TunerResult::Feasible { alpha_used, .. }) => alpha_used,
                (None, _) => {
                    return Err(ScenarioError::TunerInfeasible {
                        epsilon_d,
                        epsilon_f,
                    });
                }
            };
            (alpha, RoundingMode::Balanced)
        }
    };
    let fractional = lp::solve_tradeoff(instance, alpha)?;
    let integral = round_allocation(instance, &fractional.allocation, mode)?;
    let integral_gaps = gap_report(instance, &integral)?;
    let outcome = ScenarioOutcome {
        spec,
        alpha,
        fractional,
        integral,
        integral_gaps,
    };
    if let Some((fractional_ok, _)) = outcome.threshold_status() {
        // The midpoint of the feasible range meets the thresholds by the
        // monotone structure of the optima; a failure here is solver noise.
        debug_assert!(
            fractional_ok,
            "tuned optimum missed its thresholds: {:?}",
            outcome.fractional.gaps
        );
    }
    Ok(outcome)
}

/// One report row: a region with its population, exposed population, and
/// the integral allocation under each scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionRow {
    pub region: String,
    pub population: u64,
    pub exposed: f64,
    pub allocations: Vec<u64>,
}

/// Gap summary for one scenario column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub label: String,
    pub alpha: f64,
    pub diversity_gap: f64,
    pub fairness_gap: f64,
    pub fractional_diversity_gap: f64,
    pub fractional_fairness_gap: f64,
    /// For the tuned scenario: true when rounding pushed a gap back above
    /// its threshold.
    pub rounding_violates_thresholds: Option<bool>,
}

/// Side-by-side comparison of several scenarios, rows limited to the most
/// populated regions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub budget: u64,
    pub top_k: usize,
    pub scenario_labels: Vec<String>,
    pub rows: Vec<RegionRow>,
    pub summaries: Vec<ScenarioSummary>,
    /// Fairness gap of the diverse-only column over the tuned column;
    /// present only when the comparison includes both.
    pub pof: Option<PriceOfFairness>,
}

/// Number of report rows when the caller does not override it.
pub const DEFAULT_TOP_K: usize = 15;

/// Runs every scenario and assembles the comparison.
pub fn compare(
    instance: &ProblemInstance,
    specs: &[ScenarioSpec],
    top_k: usize,
) -> Result<ComparisonReport, ScenarioError> {
    if specs.is_empty() {
        return Err(ScenarioError::EmptySpecs);
    }
    let outcomes: Vec<ScenarioOutcome> = specs
        .iter()
        .map(|&spec| run_scenario(instance, spec))
        .collect::<Result<_, _>>()?;

    let mut order: Vec<usize> = (0..instance.num_regions()).collect();
    let pops = instance.region_populations();
    order.sort_by(|&a, &b| pops[b].cmp(&pops[a]));
    order.truncate(top_k);

    let rows = order
        .iter()
        .map(|&j| RegionRow {
            region: instance.regions()[j].as_str().to_owned(),
            population: pops[j],
            exposed: instance.exposed_populations()[j],
            allocations: outcomes
                .iter()
                .map(|o| match &o.integral {
                    Allocation::Integral(v) => v[j],
                    Allocation::Fractional(_) => unreachable!("scenarios produce integral output"),
                })
                .collect(),
        })
        .collect();

    let summaries = outcomes
        .iter()
        .map(|o| ScenarioSummary {
            label: o.spec.label(),
            alpha: o.alpha,
            diversity_gap: o.integral_gaps.diversity.max,
            fairness_gap: o.integral_gaps.fairness.max,
            fractional_diversity_gap: o.fractional.gaps.diversity.max,
            fractional_fairness_gap: o.fractional.gaps.fairness.max,
            rounding_violates_thresholds: o
                .threshold_status()
                .map(|(_, integral_ok)| !integral_ok),
        })
        .collect();

    let diverse = outcomes
        .iter()
        .find(|o| o.spec == ScenarioSpec::DiverseOnly);
    let tuned = outcomes
        .iter()
        .find(|o| matches!(o.spec, ScenarioSpec::FairDiverseTuned { .. }));
    let pof = match (diverse, tuned) {
        (Some(d), Some(t)) => Some(price_of_fairness(
            d.integral_gaps.fairness.max,
            t.integral_gaps.fairness.max,
        )?),
        _ => None,
    };

    Ok(ComparisonReport {
        budget: instance.budget(),
        top_k,
        scenario_labels: specs.iter().map(|s| s.label()).collect(),
        rows,
        summaries,
        pof,
    })
}
