//! Repairs a fractional allocation into integers that meet the capacity
//! constraint exactly.
//!
//! Each amount is first rounded to the nearest integer (halves away from
//! zero). If the rounded total overshoots the budget, regions ordered by
//! total population (largest first) each give back one unit, skipping
//! regions already at zero and cycling until the excess is gone. If the
//! total undershoots, regions ordered by exposed population receive one
//! unit each, cycling likewise. The diverse-only and fair-only scenarios
//! sort both branches by their own criterion (population and exposed
//! population respectively); the balanced mode keeps the split.

use crate::domain::{Allocation, ProblemInstance};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RoundingError {
    #[error("allocation covers {got} regions, instance has {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("cannot reach the budget: every region is already at zero")]
    BudgetUnreachable,
}

/// Which criterion orders the repair passes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoundingMode {
    /// Population ordering for decreases, exposed population for increases.
    Balanced,
    /// Population ordering for both passes.
    DiverseOnly,
    /// Exposed-population ordering for both passes.
    FairOnly,
}

#[derive(Clone, Copy)]
enum SortKey {
    Population,
    Exposed,
}

fn order_desc(instance: &ProblemInstance, key: SortKey) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..instance.num_regions()).collect();
    match key {
        SortKey::Population => {
            let pops = instance.region_populations();
            // Stable sort keeps ties in region order.
            idx.sort_by(|&a, &b| pops[b].cmp(&pops[a]));
        }
        SortKey::Exposed => {
            let exposed = instance.exposed_populations();
            idx.sort_by(|&a, &b| exposed[b].total_cmp(&exposed[a]));
        }
    }
    idx
}

/// Rounds `x` to an integral allocation summing exactly to the instance
/// budget. Already-integral, capacity-exact inputs pass through unchanged.
pub fn round_allocation(
    instance: &ProblemInstance,
    x: &Allocation,
    mode: RoundingMode,
) -> Result<Allocation, RoundingError> {
    let m = instance.num_regions();
    if x.len() != m {
        return Err(RoundingError::DimensionMismatch {
            expected: m,
            got: x.len(),
        });
    }
    let budget = instance.budget() as i64;
    let mut amounts: Vec<i64> = (0..m).map(|j| x.amount(j).round() as i64).collect();
    let mut remainder = budget - amounts.iter().sum::<i64>();

    if remainder < 0 {
        let key = match mode {
            RoundingMode::FairOnly => SortKey::Exposed,
            _ => SortKey::Population,
        };
        let order = order_desc(instance, key);
        while remainder < 0 {
            let mut progressed = false;
            for &j in &order {
                if remainder == 0 {
                    break;
                }
                if amounts[j] > 0 {
                    amounts[j] -= 1;
                    remainder += 1;
                    progressed = true;
                }
            }
            if !progressed {
                return Err(RoundingError::BudgetUnreachable);
            }
        }
    } else if remainder > 0 {
        let key = match mode {
            RoundingMode::DiverseOnly => SortKey::Population,
            _ => SortKey::Exposed,
        };
        let order = order_desc(instance, key);
        while remainder > 0 {
            for &j in &order {
                if remainder == 0 {
                    break;
                }
                amounts[j] += 1;
                remainder -= 1;
            }
        }
    }

    Ok(Allocation::integral(
        amounts.into_iter().map(|a| a as u64).collect(),
    ))
}
