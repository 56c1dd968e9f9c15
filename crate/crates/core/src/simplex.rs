//! Dense two-phase tableau simplex.
//!
//! Phase 1 minimizes the sum of artificial variables (added to equality
//! rows and to inequality rows whose right-hand side starts negative); a
//! residual above the feasibility tolerance means the program is
//! infeasible. Phase 2 then minimizes the real objective. Pricing is
//! Dantzig (most negative reduced cost) until the pivot count reaches ten
//! times `rows + columns`, after which Bland's smallest-index rule takes
//! over so the solve always terminates. All tie-breaks are by smallest
//! index, so identical inputs produce identical solutions.
//!
//! Row prices are read off the reduced costs of each row's original unit
//! column (its slack or artificial), giving one dual value per row; the
//! returned certificate can be re-checked from scratch with
//! [`verify_certificate`].

use crate::lp::LpProblem;
use thiserror::Error;

/// Entries smaller than this are treated as zero when picking pivots.
const PIVOT_TOL: f64 = 1e-9;
/// Feasibility slack for constraint and sign checks.
const FEAS_TOL: f64 = 1e-7;
/// Relative strong-duality gap accepted by the certificate.
const GAP_TOL: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum SimplexError {
    #[error("pivot limit of {limit} exceeded; the problem is numerically pathological")]
    IterationLimitExceeded { limit: usize },
    #[error("problem contains a non-finite coefficient")]
    NonFiniteCoefficient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Solver result. `primal`, `objective`, and the dual vectors are only
/// meaningful when `status` is [`SolveStatus::Optimal`].
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: SolveStatus,
    pub primal: Vec<f64>,
    pub objective: f64,
    /// One multiplier per inequality row (non-positive at an optimum).
    pub dual_inequalities: Vec<f64>,
    /// One multiplier per equality row (free sign).
    pub dual_equalities: Vec<f64>,
    pub iterations: usize,
}

impl LpSolution {
    fn non_optimal(status: SolveStatus, n: usize, iterations: usize) -> Self {
        let objective = match status {
            SolveStatus::Unbounded => f64::NEG_INFINITY,
            _ => 0.0,
        };
        LpSolution {
            status,
            primal: vec![0.0; n],
            objective,
            dual_inequalities: Vec::new(),
            dual_equalities: Vec::new(),
            iterations,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum RowKind {
    Inequality(usize),
    Equality(usize),
}

/// Bookkeeping for one tableau row: where it came from, whether its signs
/// were flipped to make the right-hand side non-negative, and which column
/// started as its unit column.
#[derive(Clone, Copy)]
struct RowInfo {
    kind: RowKind,
    flipped: bool,
    unit_col: usize,
    unit_sign: f64,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    cost: Vec<f64>,
    basis: Vec<usize>,
    info: Vec<RowInfo>,
    n_structural: usize,
    n_total: usize,
    first_artificial: usize,
    rhs_col: usize,
    pivots: usize,
    bland_after: usize,
    pivot_limit: usize,
}

enum RunOutcome {
    Converged,
    Unbounded,
}

impl Tableau {
    fn build(problem: &LpProblem) -> Self {
        let n = problem.num_vars();
        let m1 = problem.num_inequalities();
        let m2 = problem.num_equalities();

        let n_art = problem.ineq_rhs.iter().filter(|&&u| u < 0.0).count() + m2;
        let n_total = n + m1 + n_art;
        let rhs_col = n_total;
        let width = n_total + 1;
        let first_artificial = n + m1;

        let mut rows = Vec::with_capacity(m1 + m2);
        let mut basis = Vec::with_capacity(m1 + m2);
        let mut info = Vec::with_capacity(m1 + m2);
        let mut next_art = first_artificial;

        for (i, (coeffs, &rhs)) in problem.ineq_rows.iter().zip(&problem.ineq_rhs).enumerate() {
            let flipped = rhs < 0.0;
            let sign = if flipped { -1.0 } else { 1.0 };
            let mut row = vec![0.0; width];
            for (k, &a) in coeffs.iter().enumerate() {
                row[k] = sign * a;
            }
            row[n + i] = sign;
            row[rhs_col] = sign * rhs;
            if flipped {
                row[next_art] = 1.0;
                basis.push(next_art);
                next_art += 1;
            } else {
                basis.push(n + i);
            }
            info.push(RowInfo {
                kind: RowKind::Inequality(i),
                flipped,
                unit_col: n + i,
                unit_sign: sign,
            });
            rows.push(row);
        }
        for (i, (coeffs, &rhs)) in problem.eq_rows.iter().zip(&problem.eq_rhs).enumerate() {
            let flipped = rhs < 0.0;
            let sign = if flipped { -1.0 } else { 1.0 };
            let mut row = vec![0.0; width];
            for (k, &a) in coeffs.iter().enumerate() {
                row[k] = sign * a;
            }
            row[next_art] = 1.0;
            row[rhs_col] = sign * rhs;
            basis.push(next_art);
            info.push(RowInfo {
                kind: RowKind::Equality(i),
                flipped,
                unit_col: next_art,
                unit_sign: 1.0,
            });
            next_art += 1;
            rows.push(row);
        }

        let m = rows.len();
        let dims = m + n_total;
        Tableau {
            rows,
            cost: vec![0.0; width],
            basis,
            info,
            n_structural: n,
            n_total,
            first_artificial,
            rhs_col,
            pivots: 0,
            bland_after: 10 * dims,
            pivot_limit: 50 * dims,
        }
    }

    /// Installs the reduced-cost row for the given variable costs.
    fn set_costs(&mut self, var_cost: impl Fn(usize) -> f64) {
        let width = self.rhs_col + 1;
        self.cost = (0..width)
            .map(|j| if j < self.n_total { var_cost(j) } else { 0.0 })
            .collect();
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = var_cost(b);
            if cb != 0.0 {
                for j in 0..width {
                    self.cost[j] -= cb * self.rows[r][j];
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = 1.0 / self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v *= inv;
        }
        self.rows[r][c] = 1.0;
        let pivot_row = std::mem::take(&mut self.rows[r]);
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let factor = row[c];
            if factor != 0.0 {
                for (v, &p) in row.iter_mut().zip(&pivot_row) {
                    *v -= factor * p;
                }
                row[c] = 0.0;
            }
        }
        let factor = self.cost[c];
        if factor != 0.0 {
            for (v, &p) in self.cost.iter_mut().zip(&pivot_row) {
                *v -= factor * p;
            }
            self.cost[c] = 0.0;
        }
        self.rows[r] = pivot_row;
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Entering column: Dantzig pricing first, Bland's rule once the pivot
    /// count passes the anti-cycling threshold. `allow` masks columns that
    /// may enter (artificials are excluded in phase 2).
    fn entering(&self, allow: impl Fn(usize) -> bool) -> Option<usize> {
        if self.pivots >= self.bland_after {
            (0..self.n_total).find(|&j| allow(j) && self.cost[j] < -PIVOT_TOL)
        } else {
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.n_total {
                if !allow(j) {
                    continue;
                }
                let c = self.cost[j];
                if c < -PIVOT_TOL && best.is_none_or(|(_, bc)| c < bc) {
                    best = Some((j, c));
                }
            }
            best.map(|(j, _)| j)
        }
    }

    /// Leaving row by minimum ratio. In the Dantzig regime ties break by
    /// smallest row index; in the Bland regime by smallest basic-variable
    /// index, which is what makes the anti-cycling argument go through.
    fn leaving(&self, c: usize) -> Option<usize> {
        let bland = self.pivots >= self.bland_after;
        let mut best: Option<(usize, f64)> = None;
        for (i, row) in self.rows.iter().enumerate() {
            let a = row[c];
            if a <= PIVOT_TOL {
                continue;
            }
            let ratio = row[self.rhs_col] / a;
            let better = match best {
                None => true,
                Some((bi, br)) => {
                    ratio < br - PIVOT_TOL * (1.0 + br.abs())
                        || (ratio <= br + PIVOT_TOL * (1.0 + br.abs())
                            && bland
                            && self.basis[i] < self.basis[bi])
                }
            };
            if better {
                best = Some((i, ratio));
            }
        }
        best.map(|(i, _)| i)
    }

    fn run(&mut self, allow_artificials: bool) -> Result<RunOutcome, SimplexError> {
        let first_art = self.first_artificial;
        loop {
            let allow = |j: usize| allow_artificials || j < first_art;
            let Some(c) = self.entering(allow) else {
                return Ok(RunOutcome::Converged);
            };
            let Some(r) = self.leaving(c) else {
                return Ok(RunOutcome::Unbounded);
            };
            if self.pivots >= self.pivot_limit {
                return Err(SimplexError::IterationLimitExceeded {
                    limit: self.pivot_limit,
                });
            }
            self.pivot(r, c);
        }
    }

    fn objective_value(&self) -> f64 {
        -self.cost[self.rhs_col]
    }

    /// After phase 1: pivot remaining artificial basics onto structural or
    /// slack columns; rows that offer no such pivot are redundant and get
    /// dropped.
    fn drive_out_artificials(&mut self) {
        let mut r = 0;
        while r < self.rows.len() {
            if self.basis[r] < self.first_artificial {
                r += 1;
                continue;
            }
            let col = (0..self.first_artificial)
                .find(|&j| self.rows[r][j].abs() > PIVOT_TOL);
            match col {
                Some(c) => {
                    self.pivot(r, c);
                    r += 1;
                }
                None => {
                    self.rows.remove(r);
                    self.basis.remove(r);
                    self.info.remove(r);
                }
            }
        }
    }

    fn primal(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.n_structural];
        for (r, &b) in self.basis.iter().enumerate() {
            if b < self.n_structural {
                v[b] = self.rows[r][self.rhs_col];
            }
        }
        v
    }

    /// Row prices from the reduced costs of each surviving row's original
    /// unit column; removed rows get a zero multiplier.
    fn duals(&self, n_ineq: usize, n_eq: usize) -> (Vec<f64>, Vec<f64>) {
        let mut dual_ineq = vec![0.0; n_ineq];
        let mut dual_eq = vec![0.0; n_eq];
        for info in &self.info {
            let price = -info.unit_sign * self.cost[info.unit_col];
            let original = if info.flipped { -price } else { price };
            match info.kind {
                RowKind::Inequality(i) => dual_ineq[i] = original,
                RowKind::Equality(i) => dual_eq[i] = original,
            }
        }
        (dual_ineq, dual_eq)
    }
}

/// Solves the program, returning optimal primal/dual values, an
/// infeasibility verdict, or an unboundedness verdict.
pub fn solve(problem: &LpProblem) -> Result<LpSolution, SimplexError> {
    let finite = problem
        .objective
        .iter()
        .chain(problem.ineq_rhs.iter())
        .chain(problem.eq_rhs.iter())
        .chain(problem.ineq_rows.iter().flatten())
        .chain(problem.eq_rows.iter().flatten())
        .all(|v| v.is_finite());
    if !finite {
        return Err(SimplexError::NonFiniteCoefficient);
    }

    let mut t = Tableau::build(problem);

    // Phase 1.
    if t.first_artificial < t.n_total {
        let first_art = t.first_artificial;
        t.set_costs(|j| if j >= first_art { 1.0 } else { 0.0 });
        match t.run(true)? {
            RunOutcome::Converged => {}
            RunOutcome::Unbounded => {
                // Cannot happen: the artificial sum is bounded below by 0.
                return Ok(LpSolution::non_optimal(
                    SolveStatus::Infeasible,
                    problem.num_vars(),
                    t.pivots,
                ));
            }
        }
        if t.objective_value() > FEAS_TOL {
            return Ok(LpSolution::non_optimal(
                SolveStatus::Infeasible,
                problem.num_vars(),
                t.pivots,
            ));
        }
        t.drive_out_artificials();
    }

    // Phase 2.
    let objective = problem.objective.clone();
    let n = problem.num_vars();
    t.set_costs(|j| if j < n { objective[j] } else { 0.0 });
    match t.run(false)? {
        RunOutcome::Converged => {}
        RunOutcome::Unbounded => {
            return Ok(LpSolution::non_optimal(
                SolveStatus::Unbounded,
                n,
                t.pivots,
            ));
        }
    }

    let primal = t.primal();
    let objective_value: f64 = objective.iter().zip(&primal).map(|(c, v)| c * v).sum();
    let (dual_inequalities, dual_equalities) =
        t.duals(problem.num_inequalities(), problem.num_equalities());
    Ok(LpSolution {
        status: SolveStatus::Optimal,
        primal,
        objective: objective_value,
        dual_inequalities,
        dual_equalities,
        iterations: t.pivots,
    })
}

/// Outcome of an optimality audit: primal feasibility, dual feasibility,
/// and the strong-duality gap, each checked from scratch.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateReport {
    pub ok: bool,
    pub issues: Vec<String>,
}

pub fn verify_certificate(problem: &LpProblem, solution: &LpSolution) -> CertificateReport {
    let mut issues = Vec::new();
    if solution.status != SolveStatus::Optimal {
        issues.push(format!("status is {:?}, not Optimal", solution.status));
        return CertificateReport { ok: false, issues };
    }
    let v = &solution.primal;
    if v.len() != problem.num_vars()
        || solution.dual_inequalities.len() != problem.num_inequalities()
        || solution.dual_equalities.len() != problem.num_equalities()
    {
        issues.push("solution dimensions do not match the problem".to_owned());
        return CertificateReport { ok: false, issues };
    }

    for (k, &value) in v.iter().enumerate() {
        if value < -FEAS_TOL {
            issues.push(format!("variable {k} is negative: {value}"));
        }
    }
    for (i, (row, &rhs)) in problem.ineq_rows.iter().zip(&problem.ineq_rhs).enumerate() {
        let activity: f64 = row.iter().zip(v).map(|(a, x)| a * x).sum();
        if activity > rhs + FEAS_TOL * (1.0 + rhs.abs()) {
            issues.push(format!(
                "inequality {i} violated: activity {activity} > rhs {rhs}"
            ));
        }
    }
    for (i, (row, &rhs)) in problem.eq_rows.iter().zip(&problem.eq_rhs).enumerate() {
        let activity: f64 = row.iter().zip(v).map(|(a, x)| a * x).sum();
        if (activity - rhs).abs() > FEAS_TOL * (1.0 + rhs.abs()) {
            issues.push(format!(
                "equality {i} violated: activity {activity} != rhs {rhs}"
            ));
        }
    }

    for (i, &y) in solution.dual_inequalities.iter().enumerate() {
        if y > FEAS_TOL {
            issues.push(format!("inequality dual {i} is positive: {y}"));
        }
    }
    for k in 0..problem.num_vars() {
        let mut reduced = problem.objective[k];
        for (row, &y) in problem.ineq_rows.iter().zip(&solution.dual_inequalities) {
            reduced -= row[k] * y;
        }
        for (row, &y) in problem.eq_rows.iter().zip(&solution.dual_equalities) {
            reduced -= row[k] * y;
        }
        if reduced < -FEAS_TOL * (1.0 + problem.objective[k].abs()) {
            issues.push(format!("reduced cost of variable {k} is {reduced}"));
        }
    }

    let primal_obj: f64 = problem.objective.iter().zip(v).map(|(c, x)| c * x).sum();
    let dual_obj: f64 = problem
        .ineq_rhs
        .iter()
        .zip(&solution.dual_inequalities)
        .map(|(u, y)| u * y)
        .sum::<f64>()
        + problem
            .eq_rhs
            .iter()
            .zip(&solution.dual_equalities)
            .map(|(u, y)| u * y)
            .sum::<f64>();
    if (primal_obj - dual_obj).abs() > GAP_TOL * (1.0 + primal_obj.abs()) {
        issues.push(format!(
            "duality gap: primal {primal_obj} vs dual {dual_obj}"
        ));
    }

    CertificateReport {
        ok: issues.is_empty(),
        issues,
    }
}
