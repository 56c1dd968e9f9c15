//! Exposure-rate estimation from observed case data.
//!
//! The rate of a group is `P(E=1 | g) = P(g | E=1) * P(E=1) / P(g)`. When
//! the inputs come as per-group infected counts `c` out of citywide group
//! populations `n`, the quotient collapses to `c / n`, which is the form
//! the shipped city tables were produced with.

use crate::domain::{DomainError, ExposureRates, GroupId};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ExposureError {
    #[error("group `{0}` has zero population (or zero group probability)")]
    ZeroGroupProbability(String),
    #[error("estimated rate {rate} for group `{group}` exceeds 1; inputs are inconsistent")]
    RateExceedsOne { group: String, rate: f64 },
    #[error("group `{group}` reports more infections ({infected}) than members ({population})")]
    CountExceedsPopulation {
        group: String,
        infected: u64,
        population: u64,
    },
    #[error("probability {value} for group `{group}` is outside [0, 1]")]
    ProbabilityOutOfRange { group: String, value: f64 },
    #[error("overall exposure probability {0} is outside [0, 1]")]
    ExposureProbabilityOutOfRange(f64),
    #[error("per-group probabilities sum to {0}, which exceeds 1")]
    ProbabilitySumExceedsOne(f64),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// Tolerated overshoot before a quotient slightly above 1 is treated as an
/// inconsistency rather than rounding noise.
const RATE_SLACK: f64 = 1e-9;

/// Observed case data, in one of the two forms the estimator accepts.
#[derive(Debug, Clone, PartialEq)]
pub enum CaseCounts {
    /// Per-group infected counts and citywide group populations.
    Counts(Vec<GroupCases>),
    /// Already-normalized probabilities: `P(g | E=1)` and `P(g)` per group,
    /// plus the overall `P(E=1)`.
    Probabilities {
        exposure_probability: f64,
        groups: Vec<GroupProbabilities>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupCases {
    pub group: GroupId,
    pub infected: u64,
    pub population: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupProbabilities {
    pub group: GroupId,
    /// `P(g | E=1)` — share of observed cases belonging to the group.
    pub share_of_cases: f64,
    /// `P(g)` — share of the overall population belonging to the group.
    pub share_of_population: f64,
}

impl CaseCounts {
    fn validate(&self) -> Result<(), ExposureError> {
        match self {
            CaseCounts::Counts(rows) => {
                for row in rows {
                    if row.population == 0 {
                        return Err(ExposureError::ZeroGroupProbability(
                            row.group.as_str().to_owned(),
                        ));
                    }
                    if row.infected > row.population {
                        return Err(ExposureError::CountExceedsPopulation {
                            group: row.group.as_str().to_owned(),
                            infected: row.infected,
                            population: row.population,
                        });
                    }
                }
                Ok(())
            }
            CaseCounts::Probabilities {
                exposure_probability,
                groups,
            } => {
                if !(0.0..=1.0).contains(exposure_probability) {
                    return Err(ExposureError::ExposureProbabilityOutOfRange(
                        *exposure_probability,
                    ));
                }
                let mut case_sum = 0.0;
                let mut pop_sum = 0.0;
                for g in groups {
                    for value in [g.share_of_cases, g.share_of_population] {
                        if !(0.0..=1.0).contains(&value) {
                            return Err(ExposureError::ProbabilityOutOfRange {
                                group: g.group.as_str().to_owned(),
                                value,
                            });
                        }
                    }
                    if g.share_of_population <= 0.0 {
                        return Err(ExposureError::ZeroGroupProbability(
                            g.group.as_str().to_owned(),
                        ));
                    }
                    case_sum += g.share_of_cases;
                    pop_sum += g.share_of_population;
                }
                if case_sum > 1.0 + RATE_SLACK {
                    return Err(ExposureError::ProbabilitySumExceedsOne(case_sum));
                }
                if pop_sum > 1.0 + RATE_SLACK {
                    return Err(ExposureError::ProbabilitySumExceedsOne(pop_sum));
                }
                Ok(())
            }
        }
    }
}

/// Estimates `P(E=1 | g)` for every group in the case data.
///
/// Quotients in `(1, 1 + 1e-9]` are clamped to 1; anything larger is an
/// error, since it means the case data and population data disagree.
pub fn estimate_exposure_rates(cases: &CaseCounts) -> Result<ExposureRates, ExposureError> {
    cases.validate()?;
    let raw: Vec<(GroupId, f64)> = match cases {
        CaseCounts::Counts(rows) => rows
            .iter()
            .map(|row| {
                (
                    row.group.clone(),
                    row.infected as f64 / row.population as f64,
                )
            })
            .collect(),
        CaseCounts::Probabilities {
            exposure_probability,
            groups,
        } => groups
            .iter()
            .map(|g| {
                (
                    g.group.clone(),
                    g.share_of_cases * exposure_probability / g.share_of_population,
                )
            })
            .collect(),
    };
    let mut clamped = Vec::with_capacity(raw.len());
    for (group, rate) in raw {
        if rate > 1.0 + RATE_SLACK {
            return Err(ExposureError::RateExceedsOne {
                group: group.as_str().to_owned(),
                rate,
            });
        }
        clamped.push((group, rate.clamp(0.0, 1.0)));
    }
    Ok(ExposureRates::new(clamped)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gid(s: &str) -> GroupId {
        GroupId::new(s).unwrap()
    }

    #[test]
    fn count_form_reproduces_two_region_rates() {
        let cases = CaseCounts::Counts(vec![
            GroupCases {
                group: gid("gA"),
                infected: 40,
                population: 200,
            },
            GroupCases {
                group: gid("gB"),
                infected: 10,
                population: 100,
            },
        ]);
        let rates = estimate_exposure_rates(&cases).unwrap();
        assert_eq!(rates.get(&gid("gA")), Some(0.2));
        assert_eq!(rates.get(&gid("gB")), Some(0.1));
    }

    #[test]
    fn probability_form_bayes_quotient() {
        let cases = CaseCounts::Probabilities {
            exposure_probability: 0.05,
            groups: vec![GroupProbabilities {
                group: gid("g"),
                share_of_cases: 0.8,
                share_of_population: 0.2,
            }],
        };
        let rates = estimate_exposure_rates(&cases).unwrap();
        assert!((rates.get(&gid("g")).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn independence_collapses_to_overall_rate() {
        // P(g | E=1) == P(g) for every group: each rate equals P(E=1).
        let cases = CaseCounts::Probabilities {
            exposure_probability: 0.07,
            groups: vec![
                GroupProbabilities {
                    group: gid("a"),
                    share_of_cases: 0.3,
                    share_of_population: 0.3,
                },
                GroupProbabilities {
                    group: gid("b"),
                    share_of_cases: 0.7,
                    share_of_population: 0.7,
                },
            ],
        };
        let rates = estimate_exposure_rates(&cases).unwrap();
        assert!((rates.get(&gid("a")).unwrap() - 0.07).abs() < 1e-15);
        assert!((rates.get(&gid("b")).unwrap() - 0.07).abs() < 1e-15);
    }

    #[test]
    fn zero_population_group_errors() {
        let cases = CaseCounts::Counts(vec![GroupCases {
            group: gid("g"),
            infected: 0,
            population: 0,
        }]);
        assert_eq!(
            estimate_exposure_rates(&cases).unwrap_err(),
            ExposureError::ZeroGroupProbability("g".into())
        );
    }

    #[test]
    fn inconsistent_inputs_error_past_slack() {
        let cases = CaseCounts::Probabilities {
            exposure_probability: 0.5,
            groups: vec![GroupProbabilities {
                group: gid("g"),
                share_of_cases: 0.9,
                share_of_population: 0.1,
            }],
        };
        assert!(matches!(
            estimate_exposure_rates(&cases).unwrap_err(),
            ExposureError::RateExceedsOne { .. }
        ));
    }

    #[test]
    fn quotients_within_slack_clamp_to_one() {
        let nudge = 1.0 + 5e-10;
        let cases = CaseCounts::Probabilities {
            exposure_probability: nudge / 2.0,
            groups: vec![GroupProbabilities {
                group: gid("g"),
                share_of_cases: 1.0,
                share_of_population: 0.5,
            }],
        };
        let rates = estimate_exposure_rates(&cases).unwrap();
        assert_eq!(rates.get(&gid("g")), Some(1.0));
    }

    #[test]
    fn count_and_probability_forms_agree() {
        // Derive the probability form from the same counts and compare.
        let counts = [(gid("a"), 40u64, 200u64), (gid("b"), 10, 100)];
        let total_pop: u64 = counts.iter().map(|c| c.2).sum();
        let total_inf: u64 = counts.iter().map(|c| c.1).sum();
        let count_form = CaseCounts::Counts(
            counts
                .iter()
                .map(|(g, i, p)| GroupCases {
                    group: g.clone(),
                    infected: *i,
                    population: *p,
                })
                .collect(),
        );
        let prob_form = CaseCounts::Probabilities {
            exposure_probability: total_inf as f64 / total_pop as f64,
            groups: counts
                .iter()
                .map(|(g, i, p)| GroupProbabilities {
                    group: g.clone(),
                    share_of_cases: *i as f64 / total_inf as f64,
                    share_of_population: *p as f64 / total_pop as f64,
                })
                .collect(),
        };
        let a = estimate_exposure_rates(&count_form).unwrap();
        let b = estimate_exposure_rates(&prob_form).unwrap();
        for (g, rate) in a.iter() {
            let other = b.get(&GroupId::new(g).unwrap()).unwrap();
            assert!((rate - other).abs() < 1e-12, "{g}: {rate} vs {other}");
        }
    }

    #[test]
    fn count_form_is_scale_invariant() {
        for k in [2u64, 10, 1000] {
            let base = CaseCounts::Counts(vec![GroupCases {
                group: gid("g"),
                infected: 7,
                population: 90,
            }]);
            let scaled = CaseCounts::Counts(vec![GroupCases {
                group: gid("g"),
                infected: 7 * k,
                population: 90 * k,
            }]);
            let a = estimate_exposure_rates(&base).unwrap();
            let b = estimate_exposure_rates(&scaled).unwrap();
            assert_eq!(a.get(&gid("g")), b.get(&gid("g")));
        }
    }
}
