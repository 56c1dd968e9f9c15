//! Search for a trade-off weight whose optimum satisfies user thresholds
//! on both gaps.
//!
//! The bisection relies on the monotone behaviour of the optima: raising
//! `alpha` never increases the optimal fairness gap and never decreases
//! the optimal diversity gap. Each iteration solves the LP at the midpoint
//! `alpha_m` of the bracket `[alpha_l, alpha_u]` and then
//!
//! * returns the optimum if it meets both thresholds,
//! * declares the thresholds unreachable if it violates both (no other
//!   `alpha` can do better on either side),
//! * otherwise moves the bound on the violated side halfway toward the
//!   midpoint.
//!
//! Note the bound update is `alpha_l <- (alpha_l + alpha_m) / 2` (and
//! symmetrically for the upper bound), not the textbook
//! `alpha_l <- alpha_m`; the bracket therefore shrinks by a factor of 3/4
//! per iteration instead of 1/2, which still terminates in at most
//! `ceil(ln tau / ln 0.75)` solves.
//!
//! The grid scans ([`feasible_alpha_range`], [`epsilon_sweep`],
//! [`alpha_profile`]) solve each grid point independently and run in
//! parallel when the `parallel` feature is enabled.

use crate::domain::{Allocation, ProblemInstance};
use crate::lp::{self, ConfigError, SolveError, TradeoffConfig};
use crate::par;
use thiserror::Error;

/// Slack applied to every threshold comparison, so boundary optima are not
/// rejected for round-off.
pub const THRESHOLD_SLACK: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum TunerError {
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("grid step must lie in (0, 0.1], got {0}")]
    BadGridStep(f64),
    #[error("epsilon grid values must lie in [0, 1], got {0}")]
    BadEpsilonGrid(f64),
    #[error("feasible grid points are not contiguous (solver tie near a threshold): {0:?}")]
    NonContiguousFeasibleSet(Vec<f64>),
}

/// One solved grid point: the weight, its optimal allocation, and the two
/// maximum gaps of that optimum.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaPoint {
    pub alpha: f64,
    pub allocation: Allocation,
    pub diversity_gap: f64,
    pub fairness_gap: f64,
}

impl AlphaPoint {
    pub fn meets(&self, epsilon_d: f64, epsilon_f: f64) -> bool {
        self.diversity_gap <= epsilon_d + THRESHOLD_SLACK
            && self.fairness_gap <= epsilon_f + THRESHOLD_SLACK
    }
}

fn solve_point(instance: &ProblemInstance, alpha: f64) -> Result<AlphaPoint, SolveError> {
    let optimum = lp::solve_tradeoff(instance, alpha)?;
    Ok(AlphaPoint {
        alpha,
        diversity_gap: optimum.gaps.diversity.max,
        fairness_gap: optimum.gaps.fairness.max,
        allocation: optimum.allocation,
    })
}

/// Outcome of the bisection.
#[derive(Debug, Clone, PartialEq)]
pub enum TunerResult {
    /// Found a weight whose optimum meets both thresholds. The allocation
    /// is the fractional LP optimum at that weight.
    Feasible {
        point: AlphaPoint,
        alpha_used: f64,
        iterations: usize,
    },
    /// Some midpoint optimum violated both thresholds, which rules out
    /// every other weight as well. The witness point is returned.
    Infeasible { witness: AlphaPoint },
    /// The bracket shrank below `tau` without either verdict; the last
    /// evaluated optimum is returned with the final bracket.
    ToleranceExhausted {
        best: AlphaPoint,
        final_interval: (f64, f64),
    },
}

impl TunerResult {
    pub fn is_feasible(&self) -> bool {
        matches!(self, TunerResult::Feasible { .. })
    }
}

/// Bisection search over the trade-off weight.
pub fn tune_alpha(
    instance: &ProblemInstance,
    cfg: &TradeoffConfig,
) -> Result<TunerResult, TunerError> {
    cfg.validate()?;
    let (eps_d, eps_f, tau) = (cfg.epsilon_d, cfg.epsilon_f, cfg.tau);
    let mut lower = 0.0f64;
    let mut upper = 1.0f64;
    let mut iterations = 0usize;
    let mut last: Option<AlphaPoint> = None;

    while (upper - lower).abs() >= tau {
        let mid = (lower + upper) / 2.0;
        let point = solve_point(instance, mid)?;
        iterations += 1;
        let diverse_ok = point.diversity_gap <= eps_d + THRESHOLD_SLACK;
        let fair_ok = point.fairness_gap <= eps_f + THRESHOLD_SLACK;
        match (diverse_ok, fair_ok) {
            (true, true) => {
                return Ok(TunerResult::Feasible {
                    alpha_used: mid,
                    iterations,
                    point,
                });
            }
            (false, false) => {
                return Ok(TunerResult::Infeasible { witness: point });
            }
            // Fairness violated: every smaller alpha is at least as unfair.
            (true, false) => lower = (lower + mid) / 2.0,
            // Diversity violated: every larger alpha is at least as undiverse.
            (false, true) => upper = (upper + mid) / 2.0,
        }
        last = Some(point);
    }

    // tau <= 1 guarantees at least one solve, so `last` is populated.
    let best = last.expect("bisection ran at least once");
    Ok(TunerResult::ToleranceExhausted {
        best,
        final_interval: (lower, upper),
    })
}

/// Builds the grid `{0, step, 2 step, .., 1}`.
fn alpha_grid(step: f64) -> Result<Vec<f64>, TunerError> {
    if !(step > 0.0 && step <= 0.1) || !step.is_finite() {
        return Err(TunerError::BadGridStep(step));
    }
    let mut grid = Vec::new();
    let mut k = 0u32;
    loop {
        let alpha = k as f64 * step;
        if alpha >= 1.0 - 1e-12 {
            break;
        }
        grid.push(alpha);
        k += 1;
    }
    grid.push(1.0);
    Ok(grid)
}

/// Solves the trade-off LP at each weight in `alphas`. Runs the grid in
/// parallel when the `parallel` feature is enabled.
pub fn alpha_profile(
    instance: &ProblemInstance,
    alphas: &[f64],
) -> Result<Vec<AlphaPoint>, TunerError> {
    par::try_map(alphas, |&alpha| solve_point(instance, alpha)).map_err(TunerError::from)
}

/// Sequential variant of [`alpha_profile`], kept available as a baseline
/// regardless of feature flags (results are identical).
pub fn alpha_profile_seq(
    instance: &ProblemInstance,
    alphas: &[f64],
) -> Result<Vec<AlphaPoint>, TunerError> {
    par::try_map_seq(alphas, |&alpha| solve_point(instance, alpha)).map_err(TunerError::from)
}

/// Scans the weight grid and returns the smallest and largest grid weight
/// whose optimum meets both thresholds, or `None` if no grid point does.
///
/// By the monotone behaviour of the optima the feasible grid points form
/// one contiguous block; a gap would mean a solver tie sits exactly on a
/// threshold, and is reported as an error rather than silently truncated.
pub fn feasible_alpha_range(
    instance: &ProblemInstance,
    epsilon_d: f64,
    epsilon_f: f64,
    grid_step: f64,
) -> Result<Option<(f64, f64)>, TunerError> {
    let grid = alpha_grid(grid_step)?;
    let points = alpha_profile(instance, &grid)?;
    let feasible: Vec<&AlphaPoint> = points
        .iter()
        .filter(|p| p.meets(epsilon_d, epsilon_f))
        .collect();
    let Some(first) = feasible.first() else {
        return Ok(None);
    };
    let last = feasible.last().unwrap();
    let inside = points
        .iter()
        .filter(|p| p.alpha >= first.alpha && p.alpha <= last.alpha)
        .count();
    if inside != feasible.len() {
        return Err(TunerError::NonContiguousFeasibleSet(
            feasible.iter().map(|p| p.alpha).collect(),
        ));
    }
    Ok(Some((first.alpha, last.alpha)))
}

/// Which comparison model a sweep cell refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepModel {
    DiverseOnly,
    FairOnly,
    AlphaHalf,
    FairDiverse,
}

impl SweepModel {
    pub const ALL: [SweepModel; 4] = [
        SweepModel::DiverseOnly,
        SweepModel::FairOnly,
        SweepModel::AlphaHalf,
        SweepModel::FairDiverse,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SweepModel::DiverseOnly => "DiverseOnly",
            SweepModel::FairOnly => "FairOnly",
            SweepModel::AlphaHalf => "AlphaHalf",
            SweepModel::FairDiverse => "FairDiverse",
        }
    }
}

/// Feasibility of the four comparison models at one threshold pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub epsilon_d: f64,
    pub epsilon_f: f64,
    /// Indexed like [`SweepModel::ALL`].
    pub feasible: [bool; 4],
}

impl SweepCell {
    pub fn feasible_for(&self, model: SweepModel) -> bool {
        let idx = SweepModel::ALL.iter().position(|m| *m == model).unwrap();
        self.feasible[idx]
    }
}

/// Result of scanning the threshold plane.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonSweep {
    pub cells: Vec<SweepCell>,
}

/// For each `(epsilon_d, epsilon_f)` pair, records which of the four
/// models' fractional optima meet both thresholds: the two endpoint
/// weights, the even weight, and the tuned model (feasible exactly when
/// the bisection returns a feasible verdict for that pair).
///
/// The endpoint and even-weight optima do not depend on the thresholds, so
/// they are solved once; each cell then runs its own bisection. Cells are
/// evaluated in parallel when the `parallel` feature is enabled.
pub fn epsilon_sweep(
    instance: &ProblemInstance,
    eps_d_grid: &[f64],
    eps_f_grid: &[f64],
    tau: f64,
) -> Result<EpsilonSweep, TunerError> {
    for &e in eps_d_grid.iter().chain(eps_f_grid) {
        if !(0.0..=1.0).contains(&e) {
            return Err(TunerError::BadEpsilonGrid(e));
        }
    }
    let diverse = solve_point(instance, 0.0)?;
    let fair = solve_point(instance, 1.0)?;
    let half = solve_point(instance, 0.5)?;

    let mut pairs = Vec::with_capacity(eps_d_grid.len() * eps_f_grid.len());
    for &eps_d in eps_d_grid {
        for &eps_f in eps_f_grid {
            pairs.push((eps_d, eps_f));
        }
    }
    let cells = par::try_map(&pairs, |&(eps_d, eps_f)| {
        let cfg = TradeoffConfig::thresholds(eps_d, eps_f, tau)?;
        let tuned = tune_alpha(instance, &cfg)?;
        Ok::<SweepCell, TunerError>(SweepCell {
            epsilon_d: eps_d,
            epsilon_f: eps_f,
            feasible: [
                diverse.meets(eps_d, eps_f),
                fair.meets(eps_d, eps_f),
                half.meets(eps_d, eps_f),
                tuned.is_feasible(),
            ],
        })
    })?;
    Ok(EpsilonSweep { cells })
}
