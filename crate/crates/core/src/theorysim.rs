//! Monte Carlo validation of the observational-learning bounds.
//!
//! Tasks are finite loss matrices over a finite cell space with known cell
//! probabilities, so population losses — and therefore bound violations —
//! are exact rather than estimated. The ERM learner picks the
//! lowest-empirical-loss translator with ties broken by lowest index.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

/// Guard against accidentally materializing astronomically large families.
pub const MAX_FAMILY_SIZE: usize = 1 << 22;

#[derive(Debug, Error)]
pub enum TheoryError {
    #[error("loss matrix must be non-empty and rectangular")]
    BadMatrix,
    #[error("loss value {0} outside [0, 1]")]
    LossOutOfRange(f64),
    #[error("cell probabilities must be non-negative and sum to 1 (got {0})")]
    BadProbabilities(f64),
    #[error("{name} must lie in {range}, got {value}")]
    BadParameter {
        name: &'static str,
        range: &'static str,
        value: f64,
    },
    #[error("family size {0} exceeds the simulation guard {MAX_FAMILY_SIZE}")]
    FamilyTooLarge(usize),
    #[error("need at least {needed} trials, got {got}")]
    TooFewTrials { needed: usize, got: usize },
}

/// A finite learning task: |F| translators scored on a finite cell space.
#[derive(Debug, Clone)]
pub struct SyntheticTask {
    pub name: String,
    loss_matrix: Vec<Vec<f64>>,
    cell_probs: Vec<f64>,
    cell_cdf: Vec<f64>,
    uniform_cells: bool,
    population_losses: Vec<f64>,
    optimal_index: usize,
}

impl SyntheticTask {
    pub fn new(
        name: impl Into<String>,
        loss_matrix: Vec<Vec<f64>>,
        cell_probs: Vec<f64>,
    ) -> Result<Self, TheoryError> {
        if loss_matrix.is_empty() || cell_probs.is_empty() {
            return Err(TheoryError::BadMatrix);
        }
        let n_cells = cell_probs.len();
        for row in &loss_matrix {
            if row.len() != n_cells {
                return Err(TheoryError::BadMatrix);
            }
            for &loss in row {
                if !(0.0..=1.0).contains(&loss) {
                    return Err(TheoryError::LossOutOfRange(loss));
                }
            }
        }
        let total: f64 = cell_probs.iter().sum();
        if cell_probs.iter().any(|&p| p < 0.0) || (total - 1.0).abs() > 1e-9 {
            return Err(TheoryError::BadProbabilities(total));
        }
        let mut cell_cdf = Vec::with_capacity(n_cells);
        let mut acc = 0.0;
        for &p in &cell_probs {
            acc += p;
            cell_cdf.push(acc);
        }
        let uniform_cells = cell_probs
            .iter()
            .all(|&p| (p - 1.0 / n_cells as f64).abs() < 1e-12);
        let population_losses: Vec<f64> = loss_matrix
            .iter()
            .map(|row| row.iter().zip(&cell_probs).map(|(l, p)| l * p).sum())
            .collect();
        let optimal_index = argmin(&population_losses);
        Ok(SyntheticTask {
            name: name.into(),
            loss_matrix,
            cell_probs,
            cell_cdf,
            uniform_cells,
            population_losses,
            optimal_index,
        })
    }

    pub fn family_size(&self) -> usize {
        self.loss_matrix.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cell_probs.len()
    }

    pub fn population_loss(&self, translator: usize) -> f64 {
        self.population_losses[translator]
    }

    pub fn optimal_index(&self) -> usize {
        self.optimal_index
    }

    /// Minimum population loss over the family.
    pub fn opt(&self) -> f64 {
        self.population_losses[self.optimal_index]
    }

    /// Draw `m` i.i.d. cells from the task distribution.
    pub fn sample_cells(&self, m: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
        if self.uniform_cells {
            (0..m).map(|_| rng.gen_range(0..self.n_cells())).collect()
        } else {
            (0..m)
                .map(|_| {
                    let u: f64 = rng.gen();
                    self.cell_cdf.partition_point(|&c| c < u).min(self.n_cells() - 1)
                })
                .collect()
        }
    }
}

fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] {
            best = i;
        }
    }
    best
}

/// Empirical risk minimization over the sampled cells; ties break to the
/// lowest index.
pub fn erm(task: &SyntheticTask, samples: &[usize]) -> usize {
    let mut hist = vec![0u32; task.n_cells()];
    for &cell in samples {
        hist[cell] += 1;
    }
    let mut best = 0usize;
    let mut best_sum = f64::INFINITY;
    for (f, row) in task.loss_matrix.iter().enumerate() {
        let sum: f64 = row
            .iter()
            .zip(&hist)
            .map(|(&loss, &count)| loss * count as f64)
            .sum();
        if sum < best_sum {
            best_sum = sum;
            best = f;
        }
    }
    best
}

/// The generalization bound: sqrt(2 ln(|F|/δ) / m).
pub fn occam_bound(family_size: usize, delta: f64, m: usize) -> f64 {
    ((2.0 * ((family_size as f64).ln() - delta.ln())) / m as f64).sqrt()
}

/// The rounded 99%-confidence form of the bound, sqrt((10 + 2 ln|F|) / m):
/// the `10` stands in for 2 ln(1/0.01) ≈ 9.21, so this is slightly looser
/// than `occam_bound` at δ = 0.01.
pub fn occam_bound_at_1pct(family_size: usize, m: usize) -> f64 {
    ((10.0 + 2.0 * (family_size as f64).ln()) / m as f64).sqrt()
}

/// One ERM draw checked against the bound.
#[derive(Debug, Clone, Serialize)]
pub struct TheoryTrialRecord {
    pub m: usize,
    pub delta: f64,
    pub empirical_minimizer_index: usize,
    pub population_loss_of_minimizer: f64,
    pub opt: f64,
    pub bound_value: f64,
    pub violated: bool,
}

pub fn run_trial(
    task: &SyntheticTask,
    m: usize,
    delta: f64,
    rng: &mut ChaCha8Rng,
) -> TheoryTrialRecord {
    let samples = task.sample_cells(m, rng);
    let chosen = erm(task, &samples);
    let population_loss_of_minimizer = task.population_loss(chosen);
    let opt = task.opt();
    let bound_value = occam_bound(task.family_size(), delta, m);
    TheoryTrialRecord {
        m,
        delta,
        empirical_minimizer_index: chosen,
        population_loss_of_minimizer,
        opt,
        bound_value,
        violated: population_loss_of_minimizer > opt + bound_value,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OccamReport {
    pub task: String,
    pub family_size: usize,
    pub m: usize,
    pub delta: f64,
    pub bound_value: f64,
    pub violation_rate: f64,
    pub mean_excess: f64,
    pub n_trials: usize,
}

/// Run `n_trials` independent ERM draws and measure how often the population
/// loss of the empirical minimizer exceeds opt + bound.
pub fn verify_occam_bound(
    task: &SyntheticTask,
    m: usize,
    delta: f64,
    n_trials: usize,
    seed: u64,
) -> Result<OccamReport, TheoryError> {
    if n_trials < 100 {
        return Err(TheoryError::TooFewTrials {
            needed: 100,
            got: n_trials,
        });
    }
    let mut violations = 0usize;
    let mut excess_sum = 0.0;
    let mut bound_value = 0.0;
    for trial in 0..n_trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64 + 1);
        let record = run_trial(task, m, delta, &mut rng);
        bound_value = record.bound_value;
        excess_sum += record.population_loss_of_minimizer - record.opt;
        if record.violated {
            violations += 1;
        }
    }
    Ok(OccamReport {
        task: task.name.clone(),
        family_size: task.family_size(),
        m,
        delta,
        bound_value,
        violation_rate: violations as f64 / n_trials as f64,
        mean_excess: excess_sum / n_trials as f64,
        n_trials,
    })
}

/// Three-sigma binomial slack for an empirical rate gate at level `delta`.
pub fn binomial_slack(delta: f64, n_trials: usize) -> f64 {
    3.0 * (delta / n_trials as f64).sqrt()
}

// ---------------------------------------------------------------------------
// Built-in task constructors
// ---------------------------------------------------------------------------

/// Every translator has identical constant loss: exercises pure tie-breaking.
pub fn all_equal_task(family_size: usize, loss: f64) -> Result<SyntheticTask, TheoryError> {
    SyntheticTask::new(
        "all-equal",
        vec![vec![loss]; family_size],
        vec![1.0],
    )
}

/// Two translators with independent Bernoulli(0.5) and Bernoulli(0.5 + gap)
/// losses over a four-cell product space, maximizing Hoeffding variance while
/// the population gap is exact.
pub fn two_point_task(gap: f64) -> Result<SyntheticTask, TheoryError> {
    if !(0.0..=0.5).contains(&gap) {
        return Err(TheoryError::BadParameter {
            name: "gap",
            range: "[0, 0.5]",
            value: gap,
        });
    }
    let p0 = 0.5;
    let p1 = 0.5 + gap;
    // Cells enumerate (bit0, bit1); translator i's loss is bit i.
    let cells = [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)];
    let probs: Vec<f64> = cells
        .iter()
        .map(|&(b0, b1)| {
            let q0 = if b0 > 0.5 { p0 } else { 1.0 - p0 };
            let q1 = if b1 > 0.5 { p1 } else { 1.0 - p1 };
            q0 * q1
        })
        .collect();
    let loss_matrix = vec![
        cells.iter().map(|&(b0, _)| b0).collect(),
        cells.iter().map(|&(_, b1)| b1).collect(),
    ];
    SyntheticTask::new("two-point", loss_matrix, probs)
}

/// Random {0,1} loss matrix over uniformly probable cells: every translator's
/// per-sample loss is a maximal-variance Bernoulli with exactly computable
/// population mean near 0.5.
pub fn random_binary_task(
    family_size: usize,
    n_cells: usize,
    rng: &mut ChaCha8Rng,
) -> Result<SyntheticTask, TheoryError> {
    if family_size > MAX_FAMILY_SIZE {
        return Err(TheoryError::FamilyTooLarge(family_size));
    }
    let loss_matrix: Vec<Vec<f64>> = (0..family_size)
        .map(|_| (0..n_cells).map(|_| if rng.gen_bool(0.5) { 1.0 } else { 0.0 }).collect())
        .collect();
    let probs = vec![1.0 / n_cells as f64; n_cells];
    SyntheticTask::new("random-binary", loss_matrix, probs)
}

/// The stress suite run per grid cell: tie-breaking, gap-at-the-bound, and
/// maximal-variance Bernoulli losses.
pub fn adversarial_suite(
    family_size: usize,
    m: usize,
    delta: f64,
    seed: u64,
) -> Result<Vec<SyntheticTask>, TheoryError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(vec![
        all_equal_task(family_size, 0.5)?,
        two_point_task(occam_bound(2, delta, m).min(0.5))?,
        random_binary_task(family_size, 256, &mut rng)?,
    ])
}

// ---------------------------------------------------------------------------
// Budget-reduction (interactive vs observational) comparison
// ---------------------------------------------------------------------------

/// Cost comparison setup: `n` idealized interactive experiments identify the
/// best translator in a family of size 2^(b·n); the observational learner
/// spends a 1/c fraction of that budget at per-sample cost ratio `epsilon`,
/// which buys m = n/(εc) samples.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WhalebreakScenario {
    pub n: u64,
    /// Bits of translator description learned per experiment: log2|F_n| / n.
    pub bits_per_experiment: f64,
    /// Cost of one observation as a fraction of one experiment, in (0, 1).
    pub epsilon: f64,
    /// Budget reduction factor c > 1.
    pub budget_reduction: f64,
}

impl WhalebreakScenario {
    pub fn new(
        n: u64,
        bits_per_experiment: f64,
        epsilon: f64,
        budget_reduction: f64,
    ) -> Result<Self, TheoryError> {
        if n == 0 {
            return Err(TheoryError::BadParameter {
                name: "n",
                range: "[1, inf)",
                value: n as f64,
            });
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(TheoryError::BadParameter {
                name: "epsilon",
                range: "(0, 1)",
                value: epsilon,
            });
        }
        if budget_reduction <= 1.0 {
            return Err(TheoryError::BadParameter {
                name: "budget_reduction",
                range: "(1, inf)",
                value: budget_reduction,
            });
        }
        if bits_per_experiment < 0.0 {
            return Err(TheoryError::BadParameter {
                name: "bits_per_experiment",
                range: "[0, inf)",
                value: bits_per_experiment,
            });
        }
        Ok(WhalebreakScenario {
            n,
            bits_per_experiment,
            epsilon,
            budget_reduction,
        })
    }

    /// m = n/(εc), rounded to the nearest sample.
    pub fn observation_count(&self) -> usize {
        ((self.n as f64) / (self.epsilon * self.budget_reduction)).round() as usize
    }

    /// |F_n| = 2^(b·n), rounded to the nearest integer.
    pub fn family_size(&self) -> Result<usize, TheoryError> {
        let exponent = self.bits_per_experiment * self.n as f64;
        if exponent > 22.5 {
            return Err(TheoryError::FamilyTooLarge(usize::MAX));
        }
        Ok(2f64.powf(exponent).round().max(1.0) as usize)
    }

    /// Excess-loss bound at 99% confidence: sqrt(εc(3b/2 + 10/n)).
    pub fn gap_bound(&self) -> f64 {
        (self.epsilon
            * self.budget_reduction
            * (1.5 * self.bits_per_experiment + 10.0 / self.n as f64))
            .sqrt()
    }
}

/// The n → ∞ limit of the gap bound: sqrt(εc · 3b/2).
pub fn whalebreak_asymptotic_gap(bits_per_experiment: f64, budget_reduction: f64, epsilon: f64) -> f64 {
    (epsilon * budget_reduction * 1.5 * bits_per_experiment).sqrt()
}

#[derive(Debug, Clone, Serialize)]
pub struct WhalebreakReport {
    pub n: u64,
    pub bits_per_experiment: f64,
    pub epsilon: f64,
    pub budget_reduction: f64,
    pub m: usize,
    pub family_size: usize,
    pub gap_bound: f64,
    /// Fraction of trials whose realized excess loss exceeded the bound;
    /// guaranteed <= 0.01 in expectation.
    pub exceed_fraction: f64,
    pub mean_gap: f64,
    pub n_trials: usize,
}

/// Simulate the observational learner inside one scenario: per trial, draw
/// m = n/(εc) samples, run ERM, and compare the realized excess loss
/// ℓ(f̂) − ℓ(f*) against the scenario's gap bound.
pub fn simulate_whalebreak<G>(
    scenario: &WhalebreakScenario,
    task_generator: G,
    n_trials: usize,
    seed: u64,
) -> Result<WhalebreakReport, TheoryError>
where
    G: Fn(usize, &mut ChaCha8Rng) -> Result<SyntheticTask, TheoryError>,
{
    if n_trials == 0 {
        return Err(TheoryError::TooFewTrials { needed: 1, got: 0 });
    }
    let family_size = scenario.family_size()?;
    let m = scenario.observation_count().max(1);
    let gap_bound = scenario.gap_bound();

    let mut task_rng = ChaCha8Rng::seed_from_u64(seed);
    task_rng.set_stream(0);
    let task = task_generator(family_size, &mut task_rng)?;

    let mut exceed = 0usize;
    let mut gap_sum = 0.0;
    for trial in 0..n_trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64 + 1);
        let samples = task.sample_cells(m, &mut rng);
        let chosen = erm(&task, &samples);
        let gap = task.population_loss(chosen) - task.opt();
        gap_sum += gap;
        if gap > gap_bound {
            exceed += 1;
        }
    }
    Ok(WhalebreakReport {
        n: scenario.n,
        bits_per_experiment: scenario.bits_per_experiment,
        epsilon: scenario.epsilon,
        budget_reduction: scenario.budget_reduction,
        m,
        family_size,
        gap_bound,
        exceed_fraction: exceed as f64 / n_trials as f64,
        mean_gap: gap_sum / n_trials as f64,
        n_trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn singleton_family_always_selects_index_zero() {
        let task = SyntheticTask::new("single", vec![vec![0.3, 0.9]], vec![0.5, 0.5]).unwrap();
        assert_eq!(erm(&task, &[0, 1, 1, 0]), 0);
        assert_eq!(task.optimal_index(), 0);
    }

    #[test]
    fn dominated_alternative_never_wins() {
        let task = SyntheticTask::new(
            "dominated",
            vec![vec![0.0, 0.0], vec![0.4, 0.9]],
            vec![0.5, 0.5],
        )
        .unwrap();
        for samples in [&[0usize][..], &[1], &[0, 1, 1, 1]] {
            assert_eq!(erm(&task, samples), 0);
        }
    }

    #[test]
    fn erm_matches_exhaustive_empirical_means_on_hand_task() {
        // 3 translators x 4 cells with a fixed 5-sample draw; oracle scans
        // all three empirical means directly.
        let matrix = vec![
            vec![0.2, 0.8, 0.5, 0.1],
            vec![0.9, 0.1, 0.2, 0.4],
            vec![0.3, 0.3, 0.3, 0.3],
        ];
        let task = SyntheticTask::new("hand", matrix.clone(), vec![0.25; 4]).unwrap();
        let samples = [1usize, 1, 3, 0, 2];
        let chosen = erm(&task, &samples);
        let means: Vec<f64> = matrix
            .iter()
            .map(|row| samples.iter().map(|&c| row[c]).sum::<f64>() / samples.len() as f64)
            .collect();
        let oracle = means
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert_eq!(chosen, oracle);
        // mean0 = (0.8+0.8+0.1+0.2+0.5)/5 = 0.48, mean1 = 0.34, mean2 = 0.3.
        assert_eq!(chosen, 2);
    }

    #[test]
    fn erm_always_attains_the_minimum_empirical_loss() {
        let mut r = rng(5);
        for trial in 0..200 {
            let family = 2 + (trial % 9);
            let cells = 2 + (trial % 7);
            let matrix: Vec<Vec<f64>> = (0..family)
                .map(|_| (0..cells).map(|_| r.gen::<f64>()).collect())
                .collect();
            let task =
                SyntheticTask::new("rand", matrix, vec![1.0 / cells as f64; cells]).unwrap();
            let samples: Vec<usize> = (0..20).map(|_| r.gen_range(0..cells)).collect();
            let chosen = erm(&task, &samples);
            let mut hist = vec![0u32; cells];
            for &c in &samples {
                hist[c] += 1;
            }
            let empirical = |f: usize| -> f64 {
                (0..cells)
                    .map(|c| task.loss_matrix[f][c] * hist[c] as f64)
                    .sum()
            };
            let min = (0..family).map(empirical).fold(f64::INFINITY, f64::min);
            assert!(empirical(chosen) <= min + 1e-12);
        }
    }

    #[test]
    fn erm_never_beats_the_population_optimum() {
        let mut r = rng(11);
        let task = random_binary_task(32, 64, &mut r).unwrap();
        for trial in 0..100 {
            let mut t = rng(100 + trial);
            let samples = task.sample_cells(25, &mut t);
            let chosen = erm(&task, &samples);
            assert!(task.population_loss(chosen) >= task.opt());
        }
    }

    #[test]
    fn plug_in_bound_matches_hand_arithmetic() {
        // sqrt((10 + 2 ln 1024) / 2386) ≈ 0.100.
        let b = occam_bound_at_1pct(1024, 2386);
        assert!((b - 0.100).abs() < 1e-3, "{b}");
        // Tenfold samples shrink the theorem bound by sqrt(10).
        let b1 = occam_bound(1024, 0.01, 100);
        let b10 = occam_bound(1024, 0.01, 1000);
        assert!((b1 / b10 - 10f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn natural_log_vs_bit_count_conversion_holds() {
        // 2 ln|F| <= (3/2) log2|F| (since 2 ln 2 ≈ 1.386), and a fortiori
        // 2 ln|F| <= 3 log2|F|; the gap-bound derivation uses the tight form.
        for exponent in 1..40 {
            let f = 2f64.powi(exponent);
            let two_ln = 2.0 * f.ln();
            let log2 = f.log2();
            assert!(two_ln <= 1.5 * log2 + 1e-9);
            assert!(two_ln <= 3.0 * log2 + 1e-9);
        }
    }

    #[test]
    fn violation_rate_respects_delta_on_the_builtin_suite() {
        let n_trials = 200;
        for delta in [0.01, 0.1] {
            for m in [50, 400] {
                for task in adversarial_suite(16, m, delta, 7).unwrap() {
                    let report = verify_occam_bound(&task, m, delta, n_trials, 3).unwrap();
                    let gate = delta + binomial_slack(delta, n_trials);
                    assert!(
                        report.violation_rate <= gate,
                        "task {} rate {} > gate {gate}",
                        report.task,
                        report.violation_rate
                    );
                }
            }
        }
    }

    #[test]
    fn all_equal_losses_exercise_tie_breaking_without_violations() {
        let task = all_equal_task(8, 0.5).unwrap();
        let report = verify_occam_bound(&task, 100, 0.05, 150, 1).unwrap();
        assert_eq!(report.violation_rate, 0.0);
        assert_eq!(report.mean_excess, 0.0);
    }

    #[test]
    fn two_point_gap_sits_exactly_at_the_bound() {
        let m = 200;
        let delta = 0.1;
        let gap = occam_bound(2, delta, m);
        let task = two_point_task(gap).unwrap();
        assert_eq!(task.family_size(), 2);
        assert!((task.population_loss(1) - task.population_loss(0) - gap).abs() < 1e-12);
        // Picking the worse translator is possible but is not a violation:
        // the excess equals the bound, never exceeds it.
        let report = verify_occam_bound(&task, m, delta, 300, 9).unwrap();
        assert_eq!(report.violation_rate, 0.0);
        assert!(report.mean_excess >= 0.0);
    }

    #[test]
    fn gap_bound_hand_values() {
        // Asymptotic: b=1, c=4, ε=1/2400 → sqrt(6/2400) = 0.05.
        let g = whalebreak_asymptotic_gap(1.0, 4.0, 1.0 / 2400.0);
        assert!((g - 0.05).abs() < 1e-12, "{g}");
        // Finite n=40: sqrt((1/600)(1.5 + 0.25)) ≈ 0.054. The 2^40 family
        // would only be materialized by simulate; the bound itself is fine.
        let scenario = WhalebreakScenario::new(40, 1.0, 1.0 / 2400.0, 4.0).unwrap();
        assert!((scenario.gap_bound() - 0.054).abs() < 5e-4, "{}", scenario.gap_bound());
        assert_eq!(scenario.observation_count(), 24_000);
    }

    #[test]
    fn gap_bound_vanishes_with_free_observations() {
        let mut last = f64::MAX;
        for epsilon in [1e-2, 1e-4, 1e-6, 1e-8] {
            let scenario = WhalebreakScenario::new(10, 1.0, epsilon, 4.0).unwrap();
            assert!(scenario.gap_bound() < last);
            last = scenario.gap_bound();
        }
        assert!(last < 1e-3);
    }

    #[test]
    fn gap_bound_is_monotone_in_each_parameter() {
        let base = WhalebreakScenario::new(12, 1.0, 1.0 / 2400.0, 4.0).unwrap();
        let bigger_eps = WhalebreakScenario::new(12, 1.0, 1.0 / 1200.0, 4.0).unwrap();
        let bigger_c = WhalebreakScenario::new(12, 1.0, 1.0 / 2400.0, 8.0).unwrap();
        let bigger_b = WhalebreakScenario::new(12, 1.5, 1.0 / 2400.0, 4.0).unwrap();
        let bigger_n = WhalebreakScenario::new(16, 1.0, 1.0 / 2400.0, 4.0).unwrap();
        assert!(bigger_eps.gap_bound() > base.gap_bound());
        assert!(bigger_c.gap_bound() > base.gap_bound());
        assert!(bigger_b.gap_bound() > base.gap_bound());
        assert!(bigger_n.gap_bound() < base.gap_bound());
    }

    #[test]
    fn singleton_family_has_zero_gap_in_every_trial() {
        let scenario = WhalebreakScenario::new(8, 0.0, 1.0 / 100.0, 2.0).unwrap();
        assert_eq!(scenario.family_size().unwrap(), 1);
        let report = simulate_whalebreak(
            &scenario,
            |family, rng| random_binary_task(family, 32, rng),
            50,
            3,
        )
        .unwrap();
        assert_eq!(report.exceed_fraction, 0.0);
        assert_eq!(report.mean_gap, 0.0);
    }

    #[test]
    fn scenario_validation() {
        assert!(WhalebreakScenario::new(0, 1.0, 0.5, 2.0).is_err());
        assert!(WhalebreakScenario::new(5, 1.0, 0.0, 2.0).is_err());
        assert!(WhalebreakScenario::new(5, 1.0, 1.0, 2.0).is_err());
        assert!(WhalebreakScenario::new(5, 1.0, 0.5, 1.0).is_err());
        assert!(WhalebreakScenario::new(5, -0.1, 0.5, 2.0).is_err());
        // Oversized families surface when the simulation asks for them.
        let huge = WhalebreakScenario::new(40, 1.0, 0.5, 2.0).unwrap();
        assert!(matches!(
            huge.family_size(),
            Err(TheoryError::FamilyTooLarge(_))
        ));
    }

    #[test]
    fn task_validation() {
        assert!(SyntheticTask::new("t", vec![], vec![1.0]).is_err());
        assert!(SyntheticTask::new("t", vec![vec![0.5, 0.5]], vec![1.0]).is_err());
        assert!(SyntheticTask::new("t", vec![vec![1.5]], vec![1.0]).is_err());
        assert!(SyntheticTask::new("t", vec![vec![0.5]], vec![0.7]).is_err());
        assert!(two_point_task(0.6).is_err());
    }
}
