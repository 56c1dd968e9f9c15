//! End-to-end flows on non-trivial instances: scenario comparison, report
//! serialization round trips, and the bisection bracket behaviour.

mod common;

use common::{random_instance, rng, tiny_instance};
use fairdiv_core::lp::TradeoffConfig;
use fairdiv_core::scenarios::{compare, ScenarioSpec};
use fairdiv_core::tuner::{tune_alpha, TunerResult};

fn standard_specs() -> Vec<ScenarioSpec> {
    vec![
        ScenarioSpec::DiverseOnly,
        ScenarioSpec::FairOnly,
        ScenarioSpec::FixedAlpha(0.5),
        ScenarioSpec::FairDiverseTuned {
            epsilon_d: 0.2,
            epsilon_f: 0.2,
            tau: 1e-3,
        },
    ]
}

#[test]
fn comparison_on_random_instances_is_consistent() {
    let mut rng = rng(21);
    for _ in 0..4 {
        let inst = random_instance(&mut rng, 15, 4);
        let report = match compare(&inst, &standard_specs(), 15) {
            Ok(report) => report,
            // Tight thresholds can be unreachable on some draws; that is a
            // legitimate outcome, not a test failure.
            Err(fairdiv_core::scenarios::ScenarioError::TunerInfeasible { .. }) => continue,
            Err(other) => panic!("{other}"),
        };
        assert_eq!(report.budget, inst.budget());
        assert!(report.rows.len() <= 15);
        // Rows are sorted by population, descending.
        for w in report.rows.windows(2) {
            assert!(w[0].population >= w[1].population);
        }
        // Fairness gap ordering across the fractional optima.
        let by_label = |label: &str| {
            report
                .summaries
                .iter()
                .find(|s| s.label == label)
                .unwrap()
                .clone()
        };
        let fair = by_label("Fair-only");
        let half = by_label("alpha=0.5");
        let diverse = by_label("Diverse-only");
        assert!(fair.fractional_fairness_gap <= half.fractional_fairness_gap + 1e-7);
        assert!(half.fractional_fairness_gap <= diverse.fractional_fairness_gap + 1e-7);
        assert!(diverse.fractional_diversity_gap <= half.fractional_diversity_gap + 1e-7);
        assert!(half.fractional_diversity_gap <= fair.fractional_diversity_gap + 1e-7);
    }
}

#[test]
fn report_survives_json_and_csv_emission() {
    let inst = tiny_instance();
    let report = compare(&inst, &standard_specs(), 15).unwrap();

    let json = fairdiv_core::io::report_json_string(&report).unwrap();
    let back: fairdiv_core::scenarios::ComparisonReport = serde_json::from_str(&json).unwrap();
    assert_eq!(report, back);

    let csv = fairdiv_core::io::comparison_csv_string(&report);
    assert!(csv.starts_with("region,population,exposed,"));
    assert_eq!(csv.lines().count(), 1 + report.rows.len());
}

/// The final bisection bracket is below tau but not smaller than 3/4 of
/// it: the bracket shrinks by exactly one 3/4 step per iteration.
#[test]
fn bracket_shrinks_at_the_documented_rate() {
    for tau in [1e-1, 1e-2, 1e-3] {
        let cfg = TradeoffConfig::thresholds(0.0, 0.0, tau).unwrap();
        match tune_alpha(&tiny_instance(), &cfg).unwrap() {
            TunerResult::ToleranceExhausted { final_interval, .. } => {
                let width = final_interval.1 - final_interval.0;
                assert!(width < tau, "width {width} not below tau {tau}");
                assert!(
                    width >= 0.75 * tau - 1e-12,
                    "width {width} overshot a single 3/4 step for tau {tau}"
                );
            }
            other => panic!("expected tolerance exhaustion, got {other:?}"),
        }
    }
}

#[test]
fn tolerance_exhaustion_returns_a_real_optimum() {
    let inst = tiny_instance();
    let cfg = TradeoffConfig::thresholds(0.0, 0.0, 0.5).unwrap();
    match tune_alpha(&inst, &cfg).unwrap() {
        TunerResult::ToleranceExhausted {
            best,
            final_interval,
        } => {
            assert!(final_interval.0 >= 0.0 && final_interval.1 <= 1.0);
            assert!(best.alpha > 0.0 && best.alpha < 1.0);
            // The recorded gaps match a fresh evaluation of the returned
            // allocation.
            let report = fairdiv_core::metrics::gap_report(&inst, &best.allocation).unwrap();
            assert!((report.diversity.max - best.diversity_gap).abs() < 1e-12);
            assert!((report.fairness.max - best.fairness_gap).abs() < 1e-12);
        }
        other => panic!("expected tolerance exhaustion, got {other:?}"),
    }
}
