//! Score aggregation, Pearson correlation with bootstrap confidence
//! intervals, and the hallucination screen.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::scorer::BaselineResult;

pub const DEFAULT_BOOTSTRAP_RESAMPLES: usize = 10_000;
pub const DEFAULT_CONFIDENCE_LEVEL: f64 = 0.95;
pub const DEFAULT_RFQE_THRESHOLD: u32 = 90;
pub const DEFAULT_BASELINE_FLOOR: u32 = 0;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("paired inputs differ in length: {xs} vs {ys}")]
    LengthMismatch { xs: usize, ys: usize },
    #[error("correlation needs at least 2 pairs, got {0}")]
    TooFewPairs(usize),
    #[error("correlation undefined: {0} input is constant")]
    ConstantInput(&'static str),
    #[error("bootstrap needs at least 100 resamples, got {0}")]
    TooFewResamples(usize),
    #[error("confidence level must lie in (0, 1), got {0}")]
    BadLevel(f64),
    #[error("duplicate row for doc '{doc_id}', translator '{translator_id}'")]
    DuplicateRow { doc_id: String, translator_id: String },
    #[error("empty score table")]
    EmptyTable,
}

/// One joined row: both metrics for a (document, translator) pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreRow {
    pub doc_id: String,
    pub language: String,
    pub translator_id: String,
    /// Shuffle-metric score in [0, 1].
    pub shuffleval: f64,
    /// Reference-based score in [0, 100].
    pub baseline: f64,
    /// Carries a degraded-translation or degraded-judging flag.
    pub flagged: bool,
}

/// Rows keyed uniquely by (doc_id, translator_id).
#[derive(Debug, Clone, Default)]
pub struct ScoreTable {
    rows: Vec<ScoreRow>,
}

impl ScoreTable {
    pub fn new(rows: Vec<ScoreRow>) -> Result<Self, AnalysisError> {
        let mut seen = BTreeSet::new();
        for row in &rows {
            if !seen.insert((row.doc_id.clone(), row.translator_id.clone())) {
                return Err(AnalysisError::DuplicateRow {
                    doc_id: row.doc_id.clone(),
                    translator_id: row.translator_id.clone(),
                });
            }
        }
        Ok(ScoreTable { rows })
    }

    pub fn rows(&self) -> &[ScoreRow] {
        &self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Strict mode: drop rows whose translations or verdicts were flagged.
    pub fn without_flagged(&self) -> ScoreTable {
        ScoreTable {
            rows: self.rows.iter().filter(|r| !r.flagged).cloned().collect(),
        }
    }

    pub fn paired_scores(&self) -> (Vec<f64>, Vec<f64>) {
        (
            self.rows.iter().map(|r| r.shuffleval).collect(),
            self.rows.iter().map(|r| r.baseline).collect(),
        )
    }
}

/// Sample Pearson correlation coefficient.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, AnalysisError> {
    if xs.len() != ys.len() {
        return Err(AnalysisError::LengthMismatch {
            xs: xs.len(),
            ys: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(AnalysisError::TooFewPairs(xs.len()));
    }
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == 0.0 {
        return Err(AnalysisError::ConstantInput("x"));
    }
    if var_y == 0.0 {
        return Err(AnalysisError::ConstantInput("y"));
    }
    // Floating error can push perfectly collinear data a few ulps past 1.
    Ok((cov / (var_x * var_y).sqrt()).clamp(-1.0, 1.0))
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    // Linear interpolation between order statistics.
    let h = p * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

/// Percentile bootstrap interval for the Pearson coefficient over paired
/// resamples. Each resample index draws from its own derived stream, so the
/// result is deterministic for a given seed regardless of scheduling.
/// Degenerate (constant) resamples are redrawn within their stream.
pub fn bootstrap_ci(
    xs: &[f64],
    ys: &[f64],
    n_resamples: usize,
    level: f64,
    seed: u64,
) -> Result<(f64, f64), AnalysisError> {
    // Validate via a point estimate first: same preconditions.
    pearson(xs, ys)?;
    if n_resamples < 100 {
        return Err(AnalysisError::TooFewResamples(n_resamples));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(AnalysisError::BadLevel(level));
    }
    let n = xs.len();
    let mut stats = Vec::with_capacity(n_resamples);
    let mut rx = vec![0.0; n];
    let mut ry = vec![0.0; n];
    for i in 0..n_resamples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64 + 1);
        // Redraw (within this index's stream) until the resample is
        // non-degenerate; on pathological data give up after a bound and
        // count the resample at the point estimate.
        let mut r = None;
        for _ in 0..1000 {
            for j in 0..n {
                let pick = rng.gen_range(0..n);
                rx[j] = xs[pick];
                ry[j] = ys[pick];
            }
            if let Ok(stat) = pearson(&rx, &ry) {
                r = Some(stat);
                break;
            }
        }
        match r {
            Some(stat) => stats.push(stat),
            None => stats.push(pearson(xs, ys)?),
        }
    }
    stats.sort_by(|a, b| a.partial_cmp(b).expect("finite correlation"));
    let alpha = 1.0 - level;
    Ok((
        quantile(&stats, alpha / 2.0),
        quantile(&stats, 1.0 - alpha / 2.0),
    ))
}

/// Point estimate plus optional CI; `ci` is absent when the bootstrap was
/// skipped (e.g. too few groups).
#[derive(Debug, Clone, Serialize)]
pub struct CorrelationStat {
    pub r: f64,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ci_low: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ci_high: Option<f64>,
}

pub fn correlation_with_ci(
    xs: &[f64],
    ys: &[f64],
    n_resamples: usize,
    level: f64,
    seed: u64,
) -> Result<CorrelationStat, AnalysisError> {
    let r = pearson(xs, ys)?;
    let ci = bootstrap_ci(xs, ys, n_resamples, level, seed).ok();
    Ok(CorrelationStat {
        r,
        n: xs.len(),
        ci_low: ci.map(|c| c.0),
        ci_high: ci.map(|c| c.1),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupBy {
    Translator,
    Language,
}

/// Group means of both metrics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupAggregate {
    pub key: String,
    pub shuffleval_mean: f64,
    pub baseline_mean: f64,
    pub n: usize,
}

/// Arithmetic means per group, in lexicographic group order.
pub fn aggregate(table: &ScoreTable, by: GroupBy) -> Result<Vec<GroupAggregate>, AnalysisError> {
    if table.is_empty() {
        return Err(AnalysisError::EmptyTable);
    }
    let mut groups: BTreeMap<String, (f64, f64, usize)> = BTreeMap::new();
    for row in table.rows() {
        let key = match by {
            GroupBy::Translator => row.translator_id.clone(),
            GroupBy::Language => row.language.clone(),
        };
        let entry = groups.entry(key).or_insert((0.0, 0.0, 0));
        entry.0 += row.shuffleval;
        entry.1 += row.baseline;
        entry.2 += 1;
    }
    Ok(groups
        .into_iter()
        .map(|(key, (s, b, n))| GroupAggregate {
            key,
            shuffleval_mean: s / n as f64,
            baseline_mean: b / n as f64,
            n,
        })
        .collect())
}

/// Outcome of the hallucination screen: among rows whose reference-free score
/// clears the threshold, how do the reference-based scores distribute, and
/// what fraction sits at or below the floor?
#[derive(Debug, Clone, Serialize)]
pub struct HallucinationReport {
    pub threshold: u32,
    pub floor: u32,
    /// Rows with a reference-free score >= threshold and a joined baseline.
    pub selected: usize,
    pub total_rfqe_rows: usize,
    /// Fraction of selected rows whose baseline score <= floor.
    pub flagged_fraction: f64,
    /// Baseline scores of selected rows bucketed by tens: [0-9], ..., [90-100].
    pub baseline_histogram: [usize; 10],
    pub baseline_mean: f64,
    pub orphaned_rfqe: Vec<(String, String)>,
    pub orphaned_baseline: Vec<(String, String)>,
}

/// Select rows with reference-free score >= `threshold` and report the
/// distribution of their reference-based scores. Keys present on only one
/// side are reported as orphans, not errors.
pub fn hallucination_screen(
    rfqe_scores: &[(String, String, u32)],
    baseline: &[BaselineResult],
    threshold: u32,
    floor: u32,
) -> HallucinationReport {
    let baseline_by_key: BTreeMap<(String, String), u32> = baseline
        .iter()
        .map(|b| ((b.doc_id.clone(), b.translator_id.clone()), b.score))
        .collect();
    let rfqe_keys: BTreeSet<(String, String)> = rfqe_scores
        .iter()
        .map(|(d, t, _)| (d.clone(), t.clone()))
        .collect();

    let mut selected = 0usize;
    let mut flagged = 0usize;
    let mut histogram = [0usize; 10];
    let mut baseline_sum = 0.0;
    let mut orphaned_rfqe = Vec::new();
    for (doc_id, translator_id, score) in rfqe_scores {
        let key = (doc_id.clone(), translator_id.clone());
        let Some(&baseline_score) = baseline_by_key.get(&key) else {
            orphaned_rfqe.push(key);
            continue;
        };
        if *score >= threshold {
            selected += 1;
            baseline_sum += baseline_score as f64;
            if baseline_score <= floor {
                flagged += 1;
            }
            let bucket = (baseline_score / 10).min(9) as usize;
            histogram[bucket] += 1;
        }
    }
    let orphaned_baseline: Vec<(String, String)> = baseline_by_key
        .keys()
        .filter(|k| !rfqe_keys.contains(*k))
        .cloned()
        .collect();

    HallucinationReport {
        threshold,
        floor,
        selected,
        total_rfqe_rows: rfqe_scores.len(),
        flagged_fraction: if selected > 0 {
            flagged as f64 / selected as f64
        } else {
            0.0
        },
        baseline_histogram: histogram,
        baseline_mean: if selected > 0 {
            baseline_sum / selected as f64
        } else {
            0.0
        },
        orphaned_rfqe,
        orphaned_baseline,
    }
}

/// Quote a CSV field when needed (commas, quotes, newlines).
pub fn csv_field(value: &str) -> String {
    if value.contains(',') || value.contains('"') || value.contains('\n') {
        format!("\"{}\"", value.replace('"', "\"\""))
    } else {
        value.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_correlation_is_one() {
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 1.0);
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
    }

    #[test]
    fn hand_computed_case_is_exact() {
        // cov = 3, var_x = var_y = 5, r = 3/5.
        let r = pearson(&[1.0, 2.0, 3.0, 4.0], &[2.0, 1.0, 4.0, 3.0]).unwrap();
        assert!((r - 0.6).abs() < 1e-12, "{r}");
    }

    #[test]
    fn constant_input_is_undefined() {
        assert!(matches!(
            pearson(&[1.0, 1.0], &[1.0, 2.0]),
            Err(AnalysisError::ConstantInput("x"))
        ));
        assert!(matches!(
            pearson(&[1.0, 2.0], &[5.0, 5.0]),
            Err(AnalysisError::ConstantInput("y"))
        ));
        assert!(matches!(
            pearson(&[1.0], &[1.0]),
            Err(AnalysisError::TooFewPairs(1))
        ));
    }

    #[test]
    fn pearson_is_invariant_under_positive_affine_maps() {
        let xs = [0.2, 1.4, 0.9, 2.2, 3.1];
        let ys = [1.0, 0.4, 2.0, 1.7, 2.9];
        let base = pearson(&xs, &ys).unwrap();
        let scaled: Vec<f64> = xs.iter().map(|x| 3.5 * x + 11.0).collect();
        let r = pearson(&scaled, &ys).unwrap();
        assert!((r - base).abs() < 1e-12);
        let negated: Vec<f64> = xs.iter().map(|x| -2.0 * x + 1.0).collect();
        let flipped = pearson(&negated, &ys).unwrap();
        assert!((flipped + base).abs() < 1e-12);
    }

    #[test]
    fn bootstrap_on_perfectly_correlated_data_collapses() {
        let xs: Vec<f64> = (0..20).map(f64::from).collect();
        let ys = xs.clone();
        let (lo, hi) = bootstrap_ci(&xs, &ys, 200, 0.95, 7).unwrap();
        assert_eq!((lo, hi), (1.0, 1.0));
    }

    #[test]
    fn bootstrap_is_deterministic_given_seed() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let ys = [2.0, 1.0, 4.0, 3.0, 6.0, 5.0];
        let a = bootstrap_ci(&xs, &ys, 500, 0.95, 42).unwrap();
        let b = bootstrap_ci(&xs, &ys, 500, 0.95, 42).unwrap();
        let c = bootstrap_ci(&xs, &ys, 500, 0.95, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn bootstrap_handles_degenerate_resamples_by_redrawing() {
        // With only 3 pairs, many resamples are constant; they must be
        // redrawn rather than poisoning the interval.
        let xs = [1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 2.0];
        let (lo, hi) = bootstrap_ci(&xs, &ys, 200, 0.95, 5).unwrap();
        assert!(lo <= hi);
        assert!((-1.0..=1.0).contains(&lo));
        assert!((-1.0..=1.0).contains(&hi));
    }

    #[test]
    fn bootstrap_interval_contains_point_estimate_for_most_seeds() {
        let xs: Vec<f64> = (0..40).map(|i| (i as f64 * 0.37).sin() + i as f64 * 0.05).collect();
        let ys: Vec<f64> = (0..40).map(|i| (i as f64 * 0.53).cos() + i as f64 * 0.04).collect();
        let r = pearson(&xs, &ys).unwrap();
        let mut contained = 0;
        let seeds = 100;
        for seed in 0..seeds {
            let (lo, hi) = bootstrap_ci(&xs, &ys, 300, 0.95, seed).unwrap();
            if lo <= r && r <= hi {
                contained += 1;
            }
        }
        assert!(contained >= 99, "contained {contained}/{seeds}");
    }

    fn row(doc: &str, lang: &str, translator: &str, s: f64, b: f64) -> ScoreRow {
        ScoreRow {
            doc_id: doc.to_string(),
            language: lang.to_string(),
            translator_id: translator.to_string(),
            shuffleval: s,
            baseline: b,
            flagged: false,
        }
    }

    #[test]
    fn table_rejects_duplicate_keys() {
        let rows = vec![
            row("d1", "x", "m1", 0.5, 50.0),
            row("d1", "x", "m1", 0.6, 60.0),
        ];
        assert!(matches!(
            ScoreTable::new(rows),
            Err(AnalysisError::DuplicateRow { .. })
        ));
    }

    #[test]
    fn single_row_aggregate_is_identity() {
        let table = ScoreTable::new(vec![row("d1", "x", "m1", 0.75, 80.0)]).unwrap();
        let by_translator = aggregate(&table, GroupBy::Translator).unwrap();
        assert_eq!(by_translator.len(), 1);
        assert_eq!(by_translator[0].key, "m1");
        assert_eq!(by_translator[0].shuffleval_mean, 0.75);
        assert_eq!(by_translator[0].baseline_mean, 80.0);
    }

    #[test]
    fn disjoint_translators_aggregate_separately() {
        let table = ScoreTable::new(vec![
            row("d1", "x", "m1", 1.0, 90.0),
            row("d2", "x", "m1", 0.5, 70.0),
            row("d1", "x", "m2", 0.25, 10.0),
        ])
        .unwrap();
        let by_translator = aggregate(&table, GroupBy::Translator).unwrap();
        assert_eq!(by_translator.len(), 2);
        assert_eq!(by_translator[0].key, "m1");
        assert_eq!(by_translator[0].shuffleval_mean, 0.75);
        assert_eq!(by_translator[0].baseline_mean, 80.0);
        assert_eq!(by_translator[1].key, "m2");
        assert_eq!(by_translator[1].n, 1);
    }

    #[test]
    fn aggregate_means_stay_within_group_extremes() {
        let table = ScoreTable::new(vec![
            row("d1", "a", "m1", 0.2, 10.0),
            row("d2", "a", "m1", 0.9, 95.0),
            row("d3", "b", "m1", 0.4, 40.0),
        ])
        .unwrap();
        for by in [GroupBy::Translator, GroupBy::Language] {
            for group in aggregate(&table, by).unwrap() {
                let members: Vec<&ScoreRow> = table
                    .rows()
                    .iter()
                    .filter(|r| match by {
                        GroupBy::Translator => r.translator_id == group.key,
                        GroupBy::Language => r.language == group.key,
                    })
                    .collect();
                let min_s = members.iter().map(|r| r.shuffleval).fold(f64::MAX, f64::min);
                let max_s = members.iter().map(|r| r.shuffleval).fold(f64::MIN, f64::max);
                assert!(group.shuffleval_mean >= min_s && group.shuffleval_mean <= max_s);
            }
        }
    }

    fn baseline_result(doc: &str, translator: &str, score: u32) -> BaselineResult {
        BaselineResult {
            doc_id: doc.to_string(),
            translator_id: translator.to_string(),
            score,
            raw_reply: score.to_string(),
            clamped: false,
        }
    }

    #[test]
    fn screen_flags_pure_hallucination_regime() {
        let rfqe: Vec<(String, String, u32)> = (0..4)
            .map(|i| (format!("d{i}"), "m".to_string(), 95))
            .collect();
        let baseline: Vec<BaselineResult> =
            (0..4).map(|i| baseline_result(&format!("d{i}"), "m", 0)).collect();
        let report = hallucination_screen(&rfqe, &baseline, 90, 0);
        assert_eq!(report.selected, 4);
        assert_eq!(report.flagged_fraction, 1.0);
        assert_eq!(report.baseline_histogram[0], 4);
    }

    #[test]
    fn screen_passes_faithful_regime() {
        let rfqe = vec![("d0".to_string(), "m".to_string(), 95)];
        let baseline = vec![baseline_result("d0", "m", 100)];
        let report = hallucination_screen(&rfqe, &baseline, 90, 0);
        assert_eq!(report.flagged_fraction, 0.0);
        assert_eq!(report.baseline_histogram[9], 1);
    }

    #[test]
    fn screen_reports_orphans() {
        let rfqe = vec![
            ("d0".to_string(), "m".to_string(), 95),
            ("dx".to_string(), "m".to_string(), 95),
        ];
        let baseline = vec![baseline_result("d0", "m", 50), baseline_result("dz", "m", 10)];
        let report = hallucination_screen(&rfqe, &baseline, 90, 0);
        assert_eq!(report.orphaned_rfqe, vec![("dx".to_string(), "m".to_string())]);
        assert_eq!(report.orphaned_baseline, vec![("dz".to_string(), "m".to_string())]);
        assert_eq!(report.selected, 1);
    }

    #[test]
    fn csv_fields_quote_only_when_needed() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    }
}
