//! Shared test infrastructure: deterministic instance generators, a
//! direct-summation gap oracle, and a vertex-enumeration LP oracle. The
//! oracles recompute everything from raw data with naive loops so they
//! stay independent of the library's evaluation paths.

#![allow(dead_code)] // each test target uses a subset
// The oracles below transcribe the defining equations index for index;
// keeping the naive loop shape is the point, not an oversight.
#![allow(clippy::needless_range_loop)]

use fairdiv_core::domain::{
    Allocation, ExposureRates, GroupId, PopulationMatrix, ProblemInstance, RegionId,
};
use fairdiv_core::lp::LpProblem;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The 2-region, 2-group example: counts [[90, 10], [10, 90]], rates
/// 0.2 / 0.1, budget 20.
pub fn tiny_instance() -> ProblemInstance {
    tiny_instance_with_budget(20)
}

pub fn tiny_instance_with_budget(budget: i64) -> ProblemInstance {
    let matrix = PopulationMatrix::new(
        vec![GroupId::new("gA").unwrap(), GroupId::new("gB").unwrap()],
        vec![RegionId::new("r1").unwrap(), RegionId::new("r2").unwrap()],
        vec![90, 10, 10, 90],
    )
    .unwrap();
    let rates = ExposureRates::new(vec![
        (GroupId::new("gA").unwrap(), 0.2),
        (GroupId::new("gB").unwrap(), 0.1),
    ])
    .unwrap();
    ProblemInstance::new(matrix, &rates, budget).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random valid instance: strictly positive counts and rates, so every
/// region has people and exposure.
pub fn random_instance(
    rng: &mut ChaCha8Rng,
    max_regions: usize,
    max_groups: usize,
) -> ProblemInstance {
    let m = rng.random_range(2..=max_regions.max(2));
    let n = rng.random_range(1..=max_groups.max(1));
    let groups: Vec<GroupId> = (0..n)
        .map(|i| GroupId::new(format!("g{i}")).unwrap())
        .collect();
    let regions: Vec<RegionId> = (0..m)
        .map(|j| RegionId::new(format!("r{j}")).unwrap())
        .collect();
    let counts: Vec<i64> = (0..m * n).map(|_| rng.random_range(1..=1000)).collect();
    let rates = ExposureRates::new(
        groups
            .iter()
            .cloned()
            .map(|g| (g, rng.random_range(0.02f64..=1.0))),
    )
    .unwrap();
    let matrix = PopulationMatrix::new(groups, regions, counts).unwrap();
    let total: i64 = matrix
        .groups()
        .iter()
        .enumerate()
        .map(|(i, _)| {
            (0..matrix.num_regions())
                .map(|j| matrix.count(i, j) as i64)
                .sum::<i64>()
        })
        .sum();
    let budget = rng.random_range(1..=total.max(2) / 2);
    ProblemInstance::new(matrix, &rates, budget).unwrap()
}

pub fn random_fractional(rng: &mut ChaCha8Rng, len: usize, max: f64) -> Allocation {
    Allocation::fractional((0..len).map(|_| rng.random_range(0.0..max)).collect()).unwrap()
}

/// Direct-summation evaluation of the two gap families, transcribed from
/// the defining equations with nested loops. The global exposed mean is
/// computed via the full double sum over groups and regions, not via the
/// weighted-mean shortcut the library uses.
pub struct OracleEval {
    pub diversity_per_region: Vec<f64>,
    pub diversity_max: f64,
    pub fairness_per_group: Vec<f64>,
    pub fairness_max: f64,
    pub group_means: Vec<f64>,
    pub global_mean: f64,
}

pub fn oracle_gaps(instance: &ProblemInstance, x: &[f64]) -> OracleEval {
    let matrix = instance.matrix();
    let m = matrix.num_regions();
    let n = matrix.num_groups();

    let mut region_pop = vec![0.0f64; m];
    for j in 0..m {
        for i in 0..n {
            region_pop[j] += matrix.count(i, j) as f64;
        }
    }
    let total_pop: f64 = region_pop.iter().sum();
    let x_total: f64 = x.iter().sum();

    let mut diversity_per_region = Vec::with_capacity(m);
    for j in 0..m {
        diversity_per_region.push((x[j] / region_pop[j] - x_total / total_pop).abs());
    }
    let diversity_max = diversity_per_region.iter().cloned().fold(0.0, f64::max);

    let mut exposed = vec![0.0f64; m];
    for j in 0..m {
        for l in 0..n {
            exposed[j] += matrix.count(l, j) as f64 * instance.rate(l);
        }
    }

    let mut group_means = Vec::with_capacity(n);
    for i in 0..n {
        let mut group_pop = 0.0;
        for k in 0..m {
            group_pop += matrix.count(i, k) as f64;
        }
        let mut mean = 0.0;
        for j in 0..m {
            mean += x[j] / exposed[j] * (matrix.count(i, j) as f64 / group_pop);
        }
        group_means.push(mean);
    }

    let mut total_exposed = 0.0;
    for r in 0..n {
        for k in 0..m {
            total_exposed += matrix.count(r, k) as f64 * instance.rate(r);
        }
    }
    let mut global_mean = 0.0;
    for i in 0..n {
        for j in 0..m {
            global_mean +=
                x[j] / exposed[j] * (instance.rate(i) * matrix.count(i, j) as f64 / total_exposed);
        }
    }

    let mut fairness_per_group = Vec::with_capacity(n);
    for mean in &group_means {
        fairness_per_group.push((mean - global_mean).abs());
    }
    let fairness_max = fairness_per_group.iter().cloned().fold(0.0, f64::max);

    OracleEval {
        diversity_per_region,
        diversity_max,
        fairness_per_group,
        fairness_max,
        group_means,
        global_mean,
    }
}

/// Verdict of the exhaustive vertex scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleVerdict {
    Infeasible,
    Optimal(f64),
}

const ORACLE_FEAS_TOL: f64 = 1e-7;

/// Exhaustive vertex enumeration for small programs with a bounded
/// feasible region: every optimum sits at a vertex, and every vertex is
/// the solution of some nonsingular system of `n` tight constraints
/// (equalities always included, the rest drawn from inequalities and
/// sign bounds).
pub fn vertex_enumeration_optimum(problem: &LpProblem) -> OracleVerdict {
    let n = problem.num_vars();
    let n_eq = problem.num_equalities();
    assert!(n_eq <= n, "oracle requires at most n equality rows");

    // Candidate tight constraints: all inequality rows, then the sign
    // bounds v_k >= 0 written as rows.
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    for (row, &rhs) in problem.ineq_rows.iter().zip(&problem.ineq_rhs) {
        rows.push((row.clone(), rhs));
    }
    for k in 0..n {
        let mut bound = vec![0.0; n];
        bound[k] = -1.0;
        rows.push((bound, 0.0));
    }

    let pick = n - n_eq;
    let mut best: Option<f64> = None;
    let mut combo: Vec<usize> = (0..pick).collect();
    if pick > rows.len() {
        return OracleVerdict::Infeasible;
    }
    loop {
        // Assemble the tight system: equality rows plus the chosen subset.
        let mut a = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        for (row, &rhs) in problem.eq_rows.iter().zip(&problem.eq_rhs) {
            a.push(row.clone());
            b.push(rhs);
        }
        for &c in &combo {
            a.push(rows[c].0.clone());
            b.push(rows[c].1);
        }
        if let Some(v) = solve_square(&a, &b) {
            if is_feasible(problem, &v) {
                let obj: f64 = problem.objective.iter().zip(&v).map(|(c, x)| c * x).sum();
                best = Some(best.map_or(obj, |cur: f64| cur.min(obj)));
            }
        }
        // Next combination in lexicographic order.
        if pick == 0 {
            break;
        }
        let mut idx = pick;
        loop {
            if idx == 0 {
                return match best {
                    Some(obj) => OracleVerdict::Optimal(obj),
                    None => OracleVerdict::Infeasible,
                };
            }
            idx -= 1;
            if combo[idx] != idx + rows.len() - pick {
                break;
            }
        }
        combo[idx] += 1;
        for k in idx + 1..pick {
            combo[k] = combo[k - 1] + 1;
        }
    }
    match best {
        Some(obj) => OracleVerdict::Optimal(obj),
        None => OracleVerdict::Infeasible,
    }
}

fn is_feasible(problem: &LpProblem, v: &[f64]) -> bool {
    if v.iter().any(|x| *x < -ORACLE_FEAS_TOL) {
        return false;
    }
    for (row, &rhs) in problem.ineq_rows.iter().zip(&problem.ineq_rhs) {
        let activity: f64 = row.iter().zip(v).map(|(a, x)| a * x).sum();
        if activity > rhs + ORACLE_FEAS_TOL * (1.0 + rhs.abs()) {
            return false;
        }
    }
    for (row, &rhs) in problem.eq_rows.iter().zip(&problem.eq_rhs) {
        let activity: f64 = row.iter().zip(v).map(|(a, x)| a * x).sum();
        if (activity - rhs).abs() > ORACLE_FEAS_TOL * (1.0 + rhs.abs()) {
            return false;
        }
    }
    true
}

/// Gaussian elimination with partial pivoting; `None` for singular systems.
fn solve_square(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &rhs)| {
            let mut r = row.clone();
            r.push(rhs);
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot][col].abs() < 1e-9 {
            return None;
        }
        m.swap(col, pivot);
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = m[row][col] / m[col][col];
            if factor != 0.0 {
                for k in col..=n {
                    let delta = factor * m[col][k];
                    m[row][k] -= delta;
                }
            }
        }
    }
    Some((0..n).map(|i| m[i][n] / m[i][i]).collect())
}

/// Random LP with integer coefficients in [-5, 5] and a bounding row
/// `sum v <= U`, so the feasible set (when non-empty) is a polytope and
/// vertex enumeration decides the instance completely.
pub fn random_bounded_lp(rng: &mut ChaCha8Rng) -> LpProblem {
    let n = rng.random_range(2..=6);
    let extra_rows = rng.random_range(1..=6);
    let with_eq = rng.random_range(0..3) == 0;

    let mut ineq_rows = Vec::new();
    let mut ineq_rhs = Vec::new();
    for _ in 0..extra_rows {
        let row: Vec<f64> = (0..n).map(|_| rng.random_range(-5..=5) as f64).collect();
        ineq_rows.push(row);
        ineq_rhs.push(rng.random_range(-5..=5) as f64);
    }
    ineq_rows.push(vec![1.0; n]);
    ineq_rhs.push(rng.random_range(1..=10) as f64);

    let (eq_rows, eq_rhs) = if with_eq {
        let mut row: Vec<f64> = (0..n).map(|_| rng.random_range(0..=3) as f64).collect();
        if row.iter().all(|&c| c == 0.0) {
            row[0] = 1.0;
        }
        (vec![row], vec![rng.random_range(0..=5) as f64])
    } else {
        (Vec::new(), Vec::new())
    };

    let objective: Vec<f64> = (0..n).map(|_| rng.random_range(-5..=5) as f64).collect();
    let var_names = (0..n).map(|k| format!("v{}", k + 1)).collect();
    LpProblem {
        objective,
        ineq_rows,
        ineq_rhs,
        eq_rows,
        eq_rhs,
        var_names,
    }
}
