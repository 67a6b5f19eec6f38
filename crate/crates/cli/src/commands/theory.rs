//! `shuffleval theory`: bound-checking simulation grids emitted as CSV.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Subcommand};
use shuffleval::theorysim::{
    adversarial_suite, binomial_slack, occam_bound_at_1pct, random_binary_task,
    simulate_whalebreak, verify_occam_bound, whalebreak_asymptotic_gap, WhalebreakScenario,
};

use crate::config::{parse_list, parse_ratio};
use crate::CliError;

#[derive(Debug, Args)]
pub struct TheoryArgs {
    #[command(subcommand)]
    command: TheoryCommand,
}

#[derive(Debug, Subcommand)]
enum TheoryCommand {
    /// ERM generalization-bound violation grid over the adversarial suite.
    Occam(OccamArgs),
    /// Observational-vs-interactive budget comparison grid.
    Whalebreak(WhalebreakArgs),
}

#[derive(Debug, Args)]
struct OccamArgs {
    #[arg(long, default_value = "16,1024")]
    family_sizes: String,
    #[arg(long, default_value = "100,2386")]
    sample_counts: String,
    #[arg(long, default_value = "0.01,0.1")]
    deltas: String,
    #[arg(long, default_value_t = 2000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct WhalebreakArgs {
    #[arg(long, default_value = "8,10,12")]
    n_values: String,
    /// Bits of translator description learned per experiment.
    #[arg(long, default_value = "1.0")]
    bits: String,
    #[arg(long, default_value = "4")]
    budget_factors: String,
    /// Observation cost as a fraction of one experiment; accepts `1/2400`.
    #[arg(long, default_value = "1/2400")]
    epsilon: String,
    #[arg(long, default_value_t = 400)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

pub fn run(args: TheoryArgs) -> Result<ExitCode, CliError> {
    match args.command {
        TheoryCommand::Occam(args) => run_occam(args),
        TheoryCommand::Whalebreak(args) => run_whalebreak(args),
    }
}

fn run_occam(args: OccamArgs) -> Result<ExitCode, CliError> {
    if args.trials == 0 {
        return Err(CliError::Config("--trials must be at least 1".to_string()));
    }
    let family_sizes: Vec<usize> =
        parse_list(&args.family_sizes).map_err(|e| CliError::Config(format!("--family-sizes {e}")))?;
    let sample_counts: Vec<usize> =
        parse_list(&args.sample_counts).map_err(|e| CliError::Config(format!("--sample-counts {e}")))?;
    let deltas: Vec<f64> =
        parse_list(&args.deltas).map_err(|e| CliError::Config(format!("--deltas {e}")))?;

    let mut csv = String::from(
        "task,family_size,m,delta,bound,bound_at_1pct,violation_rate,mean_excess,n_trials\n",
    );
    let mut gate_failures = Vec::new();
    for &family_size in &family_sizes {
        for &m in &sample_counts {
            for &delta in &deltas {
                let suite = adversarial_suite(family_size, m, delta, args.seed)
                    .map_err(|e| CliError::Config(e.to_string()))?;
                for task in &suite {
                    let report = verify_occam_bound(task, m, delta, args.trials, args.seed)
                        .map_err(|e| CliError::Config(e.to_string()))?;
                    let gate = delta + binomial_slack(delta, args.trials);
                    if report.violation_rate > gate {
                        gate_failures.push(format!(
                            "{} |F|={} m={m} delta={delta}: rate {} > {gate}",
                            report.task, report.family_size, report.violation_rate
                        ));
                    }
                    let _ = writeln!(
                        csv,
                        "{},{},{},{},{},{},{},{},{}",
                        report.task,
                        report.family_size,
                        report.m,
                        report.delta,
                        report.bound_value,
                        occam_bound_at_1pct(report.family_size, report.m),
                        report.violation_rate,
                        report.mean_excess,
                        report.n_trials
                    );
                    println!(
                        "occam {} |F|={} m={} delta={}: bound {:.4} (1% plug-in {:.4}) violation rate {:.4}",
                        report.task,
                        report.family_size,
                        report.m,
                        report.delta,
                        report.bound_value,
                        occam_bound_at_1pct(report.family_size, report.m),
                        report.violation_rate
                    );
                }
            }
        }
    }
    std::fs::write(&args.out, csv)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.out.display())))?;
    if gate_failures.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        for failure in &gate_failures {
            eprintln!("gate failed: {failure}");
        }
        Ok(ExitCode::from(1))
    }
}

fn run_whalebreak(args: WhalebreakArgs) -> Result<ExitCode, CliError> {
    if args.trials == 0 {
        return Err(CliError::Config("--trials must be at least 1".to_string()));
    }
    let n_values: Vec<u64> =
        parse_list(&args.n_values).map_err(|e| CliError::Config(format!("--n-values {e}")))?;
    let bits: Vec<f64> =
        parse_list(&args.bits).map_err(|e| CliError::Config(format!("--bits {e}")))?;
    let budget_factors: Vec<f64> = parse_list(&args.budget_factors)
        .map_err(|e| CliError::Config(format!("--budget-factors {e}")))?;
    let epsilon = parse_ratio(&args.epsilon)
        .map_err(|e| CliError::Config(format!("--epsilon {e}")))?;

    let mut csv = String::from(
        "n,bits,epsilon,budget_factor,m,family_size,gap_bound,exceed_fraction,mean_gap,n_trials\n",
    );
    let mut gate_failures = Vec::new();
    let gate = 0.01 + binomial_slack(0.01, args.trials);
    for &b in &bits {
        for &c in &budget_factors {
            println!(
                "whalebreak b={b} c={c} epsilon={epsilon:.6}: asymptotic gap (n -> inf) = {:.4}",
                whalebreak_asymptotic_gap(b, c, epsilon)
            );
            for &n in &n_values {
                let scenario = WhalebreakScenario::new(n, b, epsilon, c)
                    .map_err(|e| CliError::Config(e.to_string()))?;
                let report = simulate_whalebreak(
                    &scenario,
                    |family, rng| random_binary_task(family, 256, rng),
                    args.trials,
                    args.seed,
                )
                .map_err(|e| CliError::Config(e.to_string()))?;
                if report.exceed_fraction > gate {
                    gate_failures.push(format!(
                        "n={n} b={b} c={c}: exceed fraction {} > {gate}",
                        report.exceed_fraction
                    ));
                }
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{},{},{},{},{}",
                    report.n,
                    report.bits_per_experiment,
                    report.epsilon,
                    report.budget_reduction,
                    report.m,
                    report.family_size,
                    report.gap_bound,
                    report.exceed_fraction,
                    report.mean_gap,
                    report.n_trials
                );
                println!(
                    "whalebreak n={} |F|={} m={}: gap bound {:.4}, exceed fraction {:.4}, mean gap {:.5}",
                    report.n,
                    report.family_size,
                    report.m,
                    report.gap_bound,
                    report.exceed_fraction,
                    report.mean_gap
                );
            }
        }
    }
    std::fs::write(&args.out, csv)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.out.display())))?;
    if gate_failures.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        for failure in &gate_failures {
            eprintln!("gate failed: {failure}");
        }
        Ok(ExitCode::from(1))
    }
}
