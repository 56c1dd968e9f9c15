//! Fair and diverse allocation of a scarce divisible resource (vaccines,
//! test kits, relief supplies) across geographic regions and demographic
//! subgroups.
//!
//! Given a region-by-group population matrix, per-group exposure rates, and
//! a budget `b`, the library measures two gaps for any candidate allocation
//! `x`:
//!
//! * the **diversity gap** of a region — how far its resource per capita
//!   sits from the city-wide resource per capita, and
//! * the **fairness gap** of a group — how far its expected resource per
//!   exposed member sits from the mean over all exposed individuals.
//!
//! Both worst-case gaps are minimized jointly by a linear program whose
//! objective weighs them with a trade-off parameter `alpha` in `[0, 1]`
//! (`alpha = 0` cares only about diversity, `alpha = 1` only about
//! fairness). The pieces:
//!
//! * [`domain`] — validated problem instances and allocations.
//! * [`exposure`] — exposure-rate estimation from observed case counts.
//! * [`metrics`] — gap evaluation and the price-of-fairness ratio.
//! * [`lp`] — builds the weighted-sum LP over `(x, bound_d, bound_f)`.
//! * [`simplex`] — dense two-phase simplex with dual certificates.
//! * [`rounding`] — repairs a fractional optimum into integers that meet
//!   the capacity constraint exactly.
//! * [`tuner`] — bisection search for an `alpha` whose optimum satisfies
//!   user thresholds on both gaps, plus grid scans over `alpha` and the
//!   threshold plane.
//! * [`scenarios`] — the four standard comparison models and report
//!   assembly.
//! * [`io`] — CSV/JSON/TSV interchange and the shipped city rate tables.
//!
//! Grid scans evaluate each point with an independent solve; with the
//! default `parallel` feature they fan out over a rayon pool. Disabling the
//! feature (`--no-default-features`) compiles the same API onto sequential
//! loops, and sequential variants stay available for baseline comparisons
//! either way.
//!
//! ```
//! use fairdiv_core::domain::*;
//!
//! let matrix = PopulationMatrix::new(
//!     vec![GroupId::new("young")?, GroupId::new("old")?],
//!     vec![RegionId::new("north")?, RegionId::new("south")?],
//!     vec![80, 20, 30, 70],
//! )?;
//! let rates = ExposureRates::new(vec![
//!     (GroupId::new("young")?, 0.05),
//!     (GroupId::new("old")?, 0.15),
//! ])?;
//! let instance = ProblemInstance::new(matrix, &rates, 50)?;
//!
//! // Fractional optimum at an even trade-off weight, repaired to integers.
//! let optimum = fairdiv_core::lp::solve_tradeoff(&instance, 0.5)?;
//! let integral = fairdiv_core::rounding::round_allocation(
//!     &instance,
//!     &optimum.allocation,
//!     fairdiv_core::rounding::RoundingMode::Balanced,
//! )?;
//! assert_eq!(integral.total(), 50.0);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod domain;
pub mod exposure;
pub mod io;
pub mod lp;
pub mod metrics;
mod par;
pub mod rounding;
pub mod scenarios;
pub mod simplex;
pub mod tuner;

pub use domain::{
    Allocation, DomainError, ExposureRates, GroupId, PopulationMatrix, ProblemInstance, RegionId,
};
pub use lp::{LpProblem, TradeoffConfig, TradeoffOptimum};
pub use metrics::{GapReport, PriceOfFairness};
pub use simplex::{LpSolution, SolveStatus};
pub use tuner::TunerResult;
