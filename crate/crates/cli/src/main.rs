//! `fairdiv` — fair and diverse allocation of a scarce resource.
//!
//! Subcommands: `solve`, `tune`, `sweep`, `gaps`, `pof`,
//! `estimate-exposure`. Exit codes: 0 success, 1 usage error, 2 data or
//! validation error, 3 no weight satisfies the requested thresholds,
//! 4 solver failure.

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use fairdiv_core::domain::ProblemInstance;
use fairdiv_core::lp::{build_tradeoff_lp, solve_tradeoff, TradeoffConfig};
use fairdiv_core::metrics::{gap_report, price_of_fairness};
use fairdiv_core::rounding::{round_allocation, RoundingMode};
use fairdiv_core::scenarios::{compare, ScenarioSpec, DEFAULT_TOP_K};
use fairdiv_core::tuner::{epsilon_sweep, feasible_alpha_range, tune_alpha, TunerResult};
use fairdiv_core::{io as fio, exposure};
use serde::Serialize;
use std::path::PathBuf;

mod errors;
use errors::CliError;

#[derive(Parser)]
#[command(
    name = "fairdiv",
    version,
    about = "Fair and diverse allocation of a scarce resource across regions and demographic groups"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the trade-off program at a fixed weight, or compare the four
    /// standard models when --alpha is omitted.
    Solve(SolveArgs),
    /// Bisection search for a weight meeting the gap thresholds.
    Tune(TuneArgs),
    /// Feasible-weight range plus a threshold-grid feasibility sweep.
    Sweep(SweepArgs),
    /// Evaluate the gaps of a user-supplied allocation.
    Gaps(GapsArgs),
    /// Price of fairness from two fairness gaps.
    Pof(PofArgs),
    /// Estimate per-group exposure rates from case counts.
    EstimateExposure(EstimateArgs),
}

#[derive(Args)]
struct InstanceArgs {
    /// Population CSV: header `region,<group1>,<group2>,...`.
    #[arg(long)]
    population: PathBuf,
    /// Exposure-rate CSV: header `group,rate`.
    #[arg(long)]
    rates: PathBuf,
    /// Total resource units to allocate.
    #[arg(long, allow_negative_numbers = true)]
    budget: i64,
}

impl InstanceArgs {
    fn load(&self) -> Result<ProblemInstance, CliError> {
        let matrix = fio::read_population_csv(&self.population)?;
        let rates = fio::read_exposure_csv(&self.rates)?;
        Ok(ProblemInstance::new(matrix, &rates, self.budget)?)
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Trade-off weight in [0, 1]; omit to run the four-model comparison.
    #[arg(long)]
    alpha: Option<f64>,
    /// Repair the fractional optimum into integers.
    #[arg(long)]
    round: bool,
    /// Diversity threshold for the tuned model (comparison mode only);
    /// defaults to the alpha=0.5 model's diversity gap.
    #[arg(long)]
    eps_d: Option<f64>,
    /// Fairness threshold for the tuned model (comparison mode only);
    /// defaults to the alpha=0.5 model's fairness gap.
    #[arg(long)]
    eps_f: Option<f64>,
    /// Bisection bracket tolerance for the tuned model.
    #[arg(long, default_value_t = TradeoffConfig::DEFAULT_TAU)]
    tau: f64,
    /// Number of most-populated regions in the comparison table.
    #[arg(long, default_value_t = DEFAULT_TOP_K)]
    top: usize,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the full comparison report as JSON (comparison mode).
    #[arg(long)]
    report_json: Option<PathBuf>,
    /// Write a plain-text listing of the LP before solving (fixed-weight
    /// mode).
    #[arg(long)]
    dump_lp: Option<PathBuf>,
}

#[derive(Args)]
struct TuneArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Maximum acceptable diversity gap.
    #[arg(long)]
    eps_d: f64,
    /// Maximum acceptable fairness gap.
    #[arg(long)]
    eps_f: f64,
    /// Bisection bracket tolerance.
    #[arg(long, default_value_t = TradeoffConfig::DEFAULT_TAU)]
    tau: f64,
    /// Write the allocation CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Diversity threshold for the feasible-weight range.
    #[arg(long)]
    eps_d: f64,
    /// Fairness threshold for the feasible-weight range.
    #[arg(long)]
    eps_f: f64,
    /// Weight-grid step for the range scan.
    #[arg(long, default_value_t = 0.01)]
    grid_step: f64,
    /// Comma-separated diversity thresholds for the grid sweep.
    #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5,0.75,1")]
    eps_d_grid: Vec<f64>,
    /// Comma-separated fairness thresholds for the grid sweep.
    #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5,0.75,1")]
    eps_f_grid: Vec<f64>,
    /// Bisection tolerance used by the tuned model inside the sweep.
    #[arg(long, default_value_t = TradeoffConfig::DEFAULT_TAU)]
    tau: f64,
    /// Write the sweep TSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GapsArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Allocation CSV: header `region,allocation`.
    #[arg(long)]
    allocation: PathBuf,
}

#[derive(Args)]
struct PofArgs {
    /// Fairness gap of the diverse-only allocation.
    #[arg(long)]
    diverse_gap: f64,
    /// Fairness gap of the fair-diverse allocation.
    #[arg(long)]
    fair_gap: f64,
}

#[derive(Args)]
struct EstimateArgs {
    /// Case-count CSV: header `group,infected,population`.
    #[arg(long)]
    cases: PathBuf,
    /// Write the rates CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    if let Err(err) = run(cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve(args) => run_solve(args),
        Command::Tune(args) => run_tune(args),
        Command::Sweep(args) => run_sweep(args),
        Command::Gaps(args) => run_gaps(args),
        Command::Pof(args) => run_pof(args),
        Command::EstimateExposure(args) => run_estimate(args),
    }
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, content).map_err(|e| CliError::data(e.to_string())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// Rounds to 12 significant digits; plain decimal for ordinary magnitudes
/// (0.29000000000000004 comes out as 0.29), scientific for tiny ones.
fn sig12(v: f64) -> String {
    if v == 0.0 {
        return "0".to_owned();
    }
    let rounded: f64 = format!("{v:.11e}").parse().unwrap();
    if rounded.abs() < 1e-9 {
        format!("{rounded:e}")
    } else {
        format!("{rounded}")
    }
}

fn run_solve(args: SolveArgs) -> Result<(), CliError> {
    let instance = args.instance.load()?;
    match args.alpha {
        Some(alpha) => {
            if let Some(path) = &args.dump_lp {
                let problem = build_tradeoff_lp(&instance, alpha).map_err(CliError::from)?;
                std::fs::write(path, problem.dump())
                    .map_err(|e| CliError::data(e.to_string()))?;
            }
            let optimum = solve_tradeoff(&instance, alpha)?;
            let allocation = if args.round {
                let mode = if alpha == 0.0 {
                    RoundingMode::DiverseOnly
                } else if alpha == 1.0 {
                    RoundingMode::FairOnly
                } else {
                    RoundingMode::Balanced
                };
                round_allocation(&instance, &optimum.allocation, mode)?
            } else {
                optimum.allocation.clone()
            };
            let gaps = gap_report(&instance, &allocation)?;
            eprintln!(
                "alpha {}: diversity gap {}, fairness gap {}",
                sig12(alpha),
                sig12(gaps.diversity.max),
                sig12(gaps.fairness.max)
            );
            emit(
                &args.out,
                &fio::single_allocation_csv_string(&instance, &allocation),
            )
        }
        None => {
            // Four-model comparison. Thresholds for the tuned model default
            // to the even-weight model's own gaps.
            let (eps_d, eps_f) = match (args.eps_d, args.eps_f) {
                (Some(d), Some(f)) => (d, f),
                _ => {
                    let half = solve_tradeoff(&instance, 0.5)?;
                    (
                        args.eps_d.unwrap_or(half.gaps.diversity.max.min(1.0)),
                        args.eps_f.unwrap_or(half.gaps.fairness.max.min(1.0)),
                    )
                }
            };
            let tuned = TradeoffConfig::thresholds(eps_d, eps_f, args.tau)?;
            let specs = [
                ScenarioSpec::DiverseOnly,
                ScenarioSpec::FairOnly,
                ScenarioSpec::FixedAlpha(0.5),
                ScenarioSpec::FairDiverseTuned {
                    epsilon_d: tuned.epsilon_d,
                    epsilon_f: tuned.epsilon_f,
                    tau: tuned.tau,
                },
            ];
            let report = compare(&instance, &specs, args.top)?;
            for summary in &report.summaries {
                eprintln!(
                    "{}: alpha {}, diversity gap {}, fairness gap {}",
                    summary.label,
                    sig12(summary.alpha),
                    sig12(summary.diversity_gap),
                    sig12(summary.fairness_gap)
                );
            }
            if let Some(pof) = &report.pof {
                eprintln!("price of fairness: {pof}");
            }
            if let Some(path) = &args.report_json {
                fio::write_report_json(path, &report)?;
            }
            emit(&args.out, &fio::comparison_csv_string(&report))
        }
    }
}

fn run_tune(args: TuneArgs) -> Result<(), CliError> {
    let instance = args.instance.load()?;
    let cfg = TradeoffConfig::thresholds(args.eps_d, args.eps_f, args.tau)?;
    match tune_alpha(&instance, &cfg)? {
        TunerResult::Feasible {
            point,
            alpha_used,
            iterations,
        } => {
            eprintln!(
                "feasible at alpha {} after {iterations} iterations: diversity gap {}, fairness gap {}",
                sig12(alpha_used),
                sig12(point.diversity_gap),
                sig12(point.fairness_gap)
            );
            emit(
                &args.out,
                &fio::single_allocation_csv_string(&instance, &point.allocation),
            )
        }
        TunerResult::Infeasible { witness } => Err(CliError::tuner_infeasible(format!(
            "no weight satisfies both thresholds: at alpha {} the optimum has diversity gap {} and fairness gap {}",
            sig12(witness.alpha),
            sig12(witness.diversity_gap),
            sig12(witness.fairness_gap)
        ))),
        TunerResult::ToleranceExhausted {
            best,
            final_interval,
        } => Err(CliError::tuner_infeasible(format!(
            "bracket [{}, {}] shrank below tau without a feasible optimum; last point at alpha {} had diversity gap {} and fairness gap {}",
            sig12(final_interval.0),
            sig12(final_interval.1),
            sig12(best.alpha),
            sig12(best.diversity_gap),
            sig12(best.fairness_gap)
        ))),
    }
}

fn run_sweep(args: SweepArgs) -> Result<(), CliError> {
    let instance = args.instance.load()?;
    let range = feasible_alpha_range(&instance, args.eps_d, args.eps_f, args.grid_step)?;
    match range {
        Some((lo, hi)) => println!("alpha_range\t{}\t{}", sig12(lo), sig12(hi)),
        None => println!("alpha_range\tempty"),
    }
    let sweep = epsilon_sweep(&instance, &args.eps_d_grid, &args.eps_f_grid, args.tau)?;
    emit(&args.out, &fio::sweep_tsv_string(&sweep))
}

#[derive(Serialize)]
struct GapDoc {
    diversity: DiversityDoc,
    fairness: FairnessDoc,
}

#[derive(Serialize)]
struct DiversityDoc {
    per_region: Vec<RegionGap>,
    max: f64,
}

#[derive(Serialize)]
struct RegionGap {
    region: String,
    gap: f64,
}

#[derive(Serialize)]
struct FairnessDoc {
    per_group: Vec<GroupGap>,
    max: f64,
    global_mean: f64,
}

#[derive(Serialize)]
struct GroupGap {
    group: String,
    gap: f64,
    mean: f64,
}

fn run_gaps(args: GapsArgs) -> Result<(), CliError> {
    let instance = args.instance.load()?;
    let allocation = fio::read_allocation_csv(&args.allocation, &instance)?;
    let report = gap_report(&instance, &allocation)?;
    let doc = GapDoc {
        diversity: DiversityDoc {
            per_region: instance
                .regions()
                .iter()
                .zip(&report.diversity.per_region)
                .map(|(r, &gap)| RegionGap {
                    region: r.as_str().to_owned(),
                    gap,
                })
                .collect(),
            max: report.diversity.max,
        },
        fairness: FairnessDoc {
            per_group: instance
                .groups()
                .iter()
                .zip(report.fairness.per_group.iter().zip(&report.fairness.group_means))
                .map(|(g, (&gap, &mean))| GroupGap {
                    group: g.as_str().to_owned(),
                    gap,
                    mean,
                })
                .collect(),
            max: report.fairness.max,
            global_mean: report.fairness.global_mean,
        },
    };
    let json = serde_json::to_string_pretty(&doc).map_err(|e| CliError::data(e.to_string()))?;
    println!("{json}");
    Ok(())
}

fn run_pof(args: PofArgs) -> Result<(), CliError> {
    let pof = price_of_fairness(args.diverse_gap, args.fair_gap)?;
    match pof {
        fairdiv_core::metrics::PriceOfFairness::Finite(v) => println!("{}", sig12(v)),
        fairdiv_core::metrics::PriceOfFairness::Infinite => println!("infinite"),
    }
    Ok(())
}

fn run_estimate(args: EstimateArgs) -> Result<(), CliError> {
    let cases = fio::read_case_counts_csv(&args.cases)?;
    let rates = exposure::estimate_exposure_rates(&cases)?;
    emit(&args.out, &fio::rates_csv_string(&rates))
}
