//! Cross-module solver properties on top of the unit suites: bound
//! tightness at optima, agreement between the rescaled and direct solve
//! paths, certificates on the trade-off programs, and determinism.

mod common;

use common::{random_instance, rng, tiny_instance};
use fairdiv_core::lp::{build_tradeoff_lp, solve_tradeoff};
use fairdiv_core::simplex::{solve, verify_certificate, SolveStatus};

/// With a strictly positive weight on a bound variable, the optimum pins
/// it to the actual maximum gap of the returned allocation.
#[test]
fn bounds_are_tight_at_interior_weights() {
    let mut rng = rng(11);
    let mut instances = vec![tiny_instance()];
    for _ in 0..8 {
        instances.push(random_instance(&mut rng, 8, 4));
    }
    for inst in &instances {
        for alpha in [0.25, 0.5, 0.75] {
            let opt = solve_tradeoff(inst, alpha).unwrap();
            assert!(
                (opt.diversity_bound - opt.gaps.diversity.max).abs() <= 1e-7,
                "diversity bound {} vs gap {} at alpha {alpha}",
                opt.diversity_bound,
                opt.gaps.diversity.max
            );
            assert!(
                (opt.fairness_bound - opt.gaps.fairness.max).abs() <= 1e-7,
                "fairness bound {} vs gap {} at alpha {alpha}",
                opt.fairness_bound,
                opt.gaps.fairness.max
            );
            let budget = inst.budget() as f64;
            assert!(
                (opt.allocation.total() - budget).abs() <= 1e-9 * (1.0 + budget),
                "capacity violated: {} vs {budget}",
                opt.allocation.total()
            );
        }
    }
}

/// The even-weight objective on the 2x2 example is bounded above by the
/// proportional point's value, 0.5 * 0 + 0.5 * 0.2041467.
#[test]
fn even_weight_objective_is_bounded_by_the_proportional_witness() {
    let opt = solve_tradeoff(&tiny_instance(), 0.5).unwrap();
    assert!(opt.objective >= -1e-12);
    assert!(opt.objective <= 0.5 * 0.1 + 0.5 * 0.2041467 + 1e-9);
}

/// At the endpoints the unweighted bound is only an upper bound; the
/// weighted one is still tight.
#[test]
fn weighted_bound_is_tight_at_endpoints() {
    let inst = tiny_instance();
    let diverse = solve_tradeoff(&inst, 0.0).unwrap();
    assert!(diverse.diversity_bound <= 1e-8);
    assert!(diverse.fairness_bound >= diverse.gaps.fairness.max - 1e-7);
    let fair = solve_tradeoff(&inst, 1.0).unwrap();
    assert!(fair.fairness_bound <= 1e-8);
    assert!(fair.diversity_bound >= fair.gaps.diversity.max - 1e-7);
}

/// The direct (unscaled) simplex call agrees with the rescaled path used
/// by solve_tradeoff on small, well-conditioned instances.
#[test]
fn rescaled_and_direct_solves_agree() {
    let mut rng = rng(12);
    for _ in 0..10 {
        let inst = random_instance(&mut rng, 8, 4);
        for alpha in [0.0, 0.3, 1.0] {
            let problem = build_tradeoff_lp(&inst, alpha).unwrap();
            let direct = solve(&problem).unwrap();
            assert_eq!(direct.status, SolveStatus::Optimal);
            let scaled = solve_tradeoff(&inst, alpha).unwrap();
            assert!(
                (direct.objective - scaled.objective).abs()
                    <= 1e-7 * (1.0 + direct.objective.abs()),
                "objectives diverge: direct {} vs rescaled {}",
                direct.objective,
                scaled.objective
            );
        }
    }
}

/// Optimal solutions of the trade-off program carry valid dual
/// certificates in natural units.
#[test]
fn tradeoff_optima_pass_certificates() {
    let mut rng = rng(13);
    for _ in 0..6 {
        let inst = random_instance(&mut rng, 8, 4);
        for alpha in [0.2, 0.5, 0.9] {
            let problem = build_tradeoff_lp(&inst, alpha).unwrap();
            let solution = solve(&problem).unwrap();
            let report = verify_certificate(&problem, &solution);
            assert!(report.ok, "certificate issues: {:?}", report.issues);
        }
    }
}

#[test]
fn solves_are_deterministic() {
    let mut rng = rng(14);
    let inst = random_instance(&mut rng, 12, 5);
    let a = solve_tradeoff(&inst, 0.37).unwrap();
    let b = solve_tradeoff(&inst, 0.37).unwrap();
    assert_eq!(a.allocation, b.allocation);
    assert_eq!(a.objective, b.objective);
    assert_eq!(a.iterations, b.iterations);
}
