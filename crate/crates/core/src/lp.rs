//! Builds the weighted-sum linear program solved by the simplex module.
//!
//! Variables are `(x_1 .. x_M, bound_d, bound_f)` where the two trailing
//! auxiliaries are upper bounds on the worst diversity and fairness gap.
//! Each absolute-value gap `|a_j . x|` contributes two rows,
//! `+a_j . x - bound <= 0` and `-a_j . x - bound <= 0`, so the program has
//! `2M + 2I` inequality rows plus the single capacity equality
//! `sum_j x_j = b`. The objective minimizes
//! `(1 - alpha) * bound_d + alpha * bound_f`.
//!
//! At an optimum with a strictly positive objective weight the bound is
//! tight: it equals the corresponding maximum gap of the returned `x`. With
//! a zero weight (an endpoint `alpha`) it is only an upper bound.

use crate::domain::{Allocation, ProblemInstance};
use crate::metrics::{gap_report, GapReport, MetricsError};
use crate::simplex::{self, LpSolution, SimplexError, SolveStatus};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LpError {
    #[error("alpha must lie in [0, 1], got {0}")]
    AlphaOutOfRange(f64),
    #[error("cannot extract an allocation from a solve that ended {0:?}")]
    StatusNotOptimal(SolveStatus),
    #[error("auxiliary bound {bound} fell below the evaluated gap {gap} ({which})")]
    AuxBoundViolated {
        which: &'static str,
        bound: f64,
        gap: f64,
    },
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("alpha must lie in [0, 1], got {0}")]
    Alpha(f64),
    #[error("diversity threshold must lie in [0, 1], got {0}")]
    EpsilonD(f64),
    #[error("fairness threshold must lie in [0, 1], got {0}")]
    EpsilonF(f64),
    #[error("tau must lie in (0, 1], got {0}")]
    Tau(f64),
}

/// Trade-off weight plus the acceptance thresholds and bisection tolerance
/// used when tuning it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TradeoffConfig {
    pub alpha: f64,
    pub epsilon_d: f64,
    pub epsilon_f: f64,
    pub tau: f64,
}

impl TradeoffConfig {
    pub const DEFAULT_TAU: f64 = 1e-3;

    pub fn new(alpha: f64, epsilon_d: f64, epsilon_f: f64, tau: f64) -> Result<Self, ConfigError> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(ConfigError::Alpha(alpha));
        }
        if !(0.0..=1.0).contains(&epsilon_d) {
            return Err(ConfigError::EpsilonD(epsilon_d));
        }
        if !(0.0..=1.0).contains(&epsilon_f) {
            return Err(ConfigError::EpsilonF(epsilon_f));
        }
        // tau above 1 would end the bisection before its first solve.
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(ConfigError::Tau(tau));
        }
        Ok(TradeoffConfig {
            alpha,
            epsilon_d,
            epsilon_f,
            tau,
        })
    }

    pub fn thresholds(epsilon_d: f64, epsilon_f: f64, tau: f64) -> Result<Self, ConfigError> {
        Self::new(0.5, epsilon_d, epsilon_f, tau)
    }

    /// Re-checks the range invariants; fields are public, so configs built
    /// as struct literals may bypass [`TradeoffConfig::new`].
    pub fn validate(&self) -> Result<(), ConfigError> {
        Self::new(self.alpha, self.epsilon_d, self.epsilon_f, self.tau).map(|_| ())
    }
}

impl Default for TradeoffConfig {
    fn default() -> Self {
        TradeoffConfig {
            alpha: 0.5,
            epsilon_d: 1.0,
            epsilon_f: 1.0,
            tau: Self::DEFAULT_TAU,
        }
    }
}

/// A linear program in the form `min c.v` subject to `A v <= u`,
/// `A_eq v = u_eq`, `v >= 0`.
///
/// Rows are stored dense; the instances this crate builds stay small
/// (hundreds of rows) and the fairness rows are nearly full anyway.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub ineq_rows: Vec<Vec<f64>>,
    pub ineq_rhs: Vec<f64>,
    pub eq_rows: Vec<Vec<f64>>,
    pub eq_rhs: Vec<f64>,
    pub var_names: Vec<String>,
}

impl LpProblem {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_inequalities(&self) -> usize {
        self.ineq_rows.len()
    }

    pub fn num_equalities(&self) -> usize {
        self.eq_rows.len()
    }

    /// Plain-text listing of the program (12 significant digits), meant for
    /// cross-checking against an external solver.
    pub fn dump(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        out.push_str("minimize\n");
        for (name, c) in self.var_names.iter().zip(&self.objective) {
            let _ = writeln!(out, "  {} {}", name, sig12(*c));
        }
        out.push_str("subject to\n");
        for (row, rhs) in self.ineq_rows.iter().zip(&self.ineq_rhs) {
            let _ = writeln!(out, "  {} <= {}", row_text(&self.var_names, row), sig12(*rhs));
        }
        for (row, rhs) in self.eq_rows.iter().zip(&self.eq_rhs) {
            let _ = writeln!(out, "  {} = {}", row_text(&self.var_names, row), sig12(*rhs));
        }
        out.push_str("bounds\n  v >= 0\n");
        out
    }
}

fn row_text(names: &[String], row: &[f64]) -> String {
    let mut parts = Vec::new();
    for (name, &c) in names.iter().zip(row) {
        if c != 0.0 {
            parts.push(format!("{} {}", sig12(c), name));
        }
    }
    if parts.is_empty() {
        "0".to_owned()
    } else {
        parts.join(" + ")
    }
}

/// Rounds to 12 significant digits and prints in plain decimal notation.
fn sig12(v: f64) -> String {
    if v == 0.0 {
        return "0".to_owned();
    }
    let rounded: f64 = format!("{v:.11e}").parse().unwrap();
    format!("{rounded}")
}

/// Builds the trade-off LP for the given weight `alpha`.
pub fn build_tradeoff_lp(instance: &ProblemInstance, alpha: f64) -> Result<LpProblem, LpError> {
    if !(0.0..=1.0).contains(&alpha) || !alpha.is_finite() {
        return Err(LpError::AlphaOutOfRange(alpha));
    }
    let m = instance.num_regions();
    let n_groups = instance.num_groups();
    let n_vars = m + 2;
    let bound_d = m;
    let bound_f = m + 1;

    let total_pop = instance.total_population() as f64;
    let total_exposed = instance.total_exposed_population();
    let exposed = instance.exposed_populations();

    let mut ineq_rows = Vec::with_capacity(2 * m + 2 * n_groups);
    let mut ineq_rhs = Vec::with_capacity(2 * m + 2 * n_groups);

    // Diversity rows: +/- (x_j / p_j - sum_k x_k / P) <= bound_d.
    for j in 0..m {
        let pop_j = instance.region_populations()[j] as f64;
        let mut affine = vec![0.0; n_vars];
        affine[..m].fill(-1.0 / total_pop);
        affine[j] += 1.0 / pop_j;
        for sign in [1.0, -1.0] {
            let mut row = vec![0.0; n_vars];
            for k in 0..m {
                row[k] = sign * affine[k];
            }
            row[bound_d] = -1.0;
            ineq_rows.push(row);
            ineq_rhs.push(0.0);
        }
    }

    // Fairness rows: +/- (m_i(x) - sum_k x_k / E) <= bound_f.
    for i in 0..n_groups {
        let group_pop = instance.group_populations()[i] as f64;
        let mut affine = vec![0.0; n_vars];
        for j in 0..m {
            let share = instance.matrix().count(i, j) as f64 / group_pop;
            affine[j] = share / exposed[j] - 1.0 / total_exposed;
        }
        for sign in [1.0, -1.0] {
            let mut row = vec![0.0; n_vars];
            for j in 0..m {
                row[j] = sign * affine[j];
            }
            row[bound_f] = -1.0;
            ineq_rows.push(row);
            ineq_rhs.push(0.0);
        }
    }

    // Capacity: sum_j x_j = b.
    let mut eq_row = vec![0.0; n_vars];
    eq_row[..m].fill(1.0);

    let mut objective = vec![0.0; n_vars];
    objective[bound_d] = 1.0 - alpha;
    objective[bound_f] = alpha;

    let mut var_names: Vec<String> = (1..=m).map(|j| format!("x_{j}")).collect();
    var_names.push("bound_d".to_owned());
    var_names.push("bound_f".to_owned());

    Ok(LpProblem {
        objective,
        ineq_rows,
        ineq_rhs,
        eq_rows: vec![eq_row],
        eq_rhs: vec![instance.budget() as f64],
        var_names,
    })
}

/// Fractional optimum of the trade-off LP together with the auxiliary
/// bounds and the gap evaluation of the point.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffOptimum {
    pub allocation: Allocation,
    pub diversity_bound: f64,
    pub fairness_bound: f64,
    pub gaps: GapReport,
    pub objective: f64,
    pub iterations: usize,
}

/// Pulls the allocation and auxiliary bounds out of an optimal solution and
/// audits the bounds against a direct gap evaluation.
pub fn extract_allocation(
    instance: &ProblemInstance,
    problem: &LpProblem,
    solution: &LpSolution,
) -> Result<TradeoffOptimum, LpError> {
    if solution.status != SolveStatus::Optimal {
        return Err(LpError::StatusNotOptimal(solution.status));
    }
    let m = instance.num_regions();
    debug_assert_eq!(problem.num_vars(), m + 2);
    let amounts: Vec<f64> = solution.primal[..m].iter().map(|&v| v.max(0.0)).collect();
    let allocation = Allocation::Fractional(amounts);
    let diversity_bound = solution.primal[m];
    let fairness_bound = solution.primal[m + 1];
    let gaps = gap_report(instance, &allocation)?;
    const AUDIT_TOL: f64 = 1e-7;
    if diversity_bound < gaps.diversity.max - AUDIT_TOL {
        return Err(LpError::AuxBoundViolated {
            which: "diversity",
            bound: diversity_bound,
            gap: gaps.diversity.max,
        });
    }
    if fairness_bound < gaps.fairness.max - AUDIT_TOL {
        return Err(LpError::AuxBoundViolated {
            which: "fairness",
            bound: fairness_bound,
            gap: gaps.fairness.max,
        });
    }
    Ok(TradeoffOptimum {
        allocation,
        diversity_bound,
        fairness_bound,
        gaps,
        objective: solution.objective,
        iterations: solution.iterations,
    })
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Build(#[from] LpError),
    #[error(transparent)]
    Simplex(#[from] SimplexError),
}

/// Change of units applied around the simplex call.
///
/// In natural units the program mixes per-capita coefficients (down to
/// 1e-7 on city-sized instances) with the unit coefficients of the bound
/// variables and the capacity row, and the allocation values run to 1e5.
/// Eliminations across that spread lose enough precision to corrupt the
/// returned vertex. Re-expressing the program with `x` in budget units and
/// each bound variable in its own per-capita unit puts every coefficient
/// and every variable at O(1)..O(M). Factors are rounded to powers of two
/// so scaling and unscaling introduce no rounding of their own.
struct UnitScaling {
    columns: Vec<f64>,
    ineq_rows: Vec<f64>,
    eq_rows: Vec<f64>,
}

fn pow2_near(v: f64) -> f64 {
    debug_assert!(v > 0.0 && v.is_finite());
    (2.0f64).powi(v.log2().round() as i32)
}

fn natural_scaling(instance: &ProblemInstance, problem: &LpProblem) -> UnitScaling {
    let m = instance.num_regions();
    let n_groups = instance.num_groups();
    let budget = (instance.budget() as f64).max(1.0);
    let total_pop = instance.total_population() as f64;
    let total_exposed = instance.total_exposed_population();

    let mut columns = vec![pow2_near(budget); m];
    columns.push(pow2_near(budget / total_pop));
    columns.push(pow2_near(budget / total_exposed));

    let mut ineq_rows = Vec::with_capacity(problem.num_inequalities());
    ineq_rows.extend(std::iter::repeat_n(pow2_near(total_pop / budget), 2 * m));
    ineq_rows.extend(std::iter::repeat_n(
        pow2_near(total_exposed / budget),
        2 * n_groups,
    ));

    UnitScaling {
        columns,
        ineq_rows,
        eq_rows: vec![pow2_near(1.0 / budget)],
    }
}

impl UnitScaling {
    /// Substitutes `v_j = s_j * v'_j` and multiplies each row by its
    /// factor. The scaled objective `c_j * s_j` keeps the objective value
    /// identical, so only primal and dual values need undoing.
    fn apply(&self, problem: &LpProblem) -> LpProblem {
        let scale_rows = |rows: &[Vec<f64>], factors: &[f64]| -> Vec<Vec<f64>> {
            rows.iter()
                .zip(factors)
                .map(|(row, &r)| {
                    row.iter()
                        .zip(&self.columns)
                        .map(|(&a, &s)| a * r * s)
                        .collect()
                })
                .collect()
        };
        LpProblem {
            objective: problem
                .objective
                .iter()
                .zip(&self.columns)
                .map(|(&c, &s)| c * s)
                .collect(),
            ineq_rows: scale_rows(&problem.ineq_rows, &self.ineq_rows),
            ineq_rhs: problem
                .ineq_rhs
                .iter()
                .zip(&self.ineq_rows)
                .map(|(&u, &r)| u * r)
                .collect(),
            eq_rows: scale_rows(&problem.eq_rows, &self.eq_rows),
            eq_rhs: problem
                .eq_rhs
                .iter()
                .zip(&self.eq_rows)
                .map(|(&u, &r)| u * r)
                .collect(),
            var_names: problem.var_names.clone(),
        }
    }

    fn unscale(&self, mut solution: LpSolution) -> LpSolution {
        if solution.status != crate::simplex::SolveStatus::Optimal {
            return solution;
        }
        for (v, &s) in solution.primal.iter_mut().zip(&self.columns) {
            *v *= s;
        }
        for (y, &r) in solution.dual_inequalities.iter_mut().zip(&self.ineq_rows) {
            *y *= r;
        }
        for (y, &r) in solution.dual_equalities.iter_mut().zip(&self.eq_rows) {
            *y *= r;
        }
        solution
    }
}

/// Convenience path: build the LP at `alpha`, solve it in rescaled units,
/// extract and audit the optimum.
pub fn solve_tradeoff(
    instance: &ProblemInstance,
    alpha: f64,
) -> Result<TradeoffOptimum, SolveError> {
    let problem = build_tradeoff_lp(instance, alpha)?;
    let scaling = natural_scaling(instance, &problem);
    let solution = simplex::solve(&scaling.apply(&problem))?;
    let solution = scaling.unscale(solution);
    Ok(extract_allocation(instance, &problem, &solution)?)
}
