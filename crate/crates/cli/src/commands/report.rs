//! `shuffleval report`: joins score files into a table, emits correlations at
//! row/translator/language level with bootstrap CIs, plot-ready CSVs, and the
//! optional hallucination screen.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Args;
use shuffleval::analysis::{
    aggregate, correlation_with_ci, csv_field, hallucination_screen, CorrelationStat, GroupBy,
    HallucinationReport, ScoreRow, ScoreTable, DEFAULT_BASELINE_FLOOR, DEFAULT_BOOTSTRAP_RESAMPLES,
    DEFAULT_CONFIDENCE_LEVEL, DEFAULT_RFQE_THRESHOLD,
};
use shuffleval::backend::BackendConfig;
use shuffleval::corpus::load_corpus;
use shuffleval::scorer::{load_score_records, BaselineResult, ScoreRecord};

use super::{manifest_path_for, new_manifest, record_input, write_manifest};
use crate::CliError;

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Score record files (repeatable).
    #[arg(long, required = true, num_args = 1..)]
    scores: Vec<PathBuf>,
    /// Corpus supplying doc_id -> language for language-level grouping.
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = DEFAULT_BOOTSTRAP_RESAMPLES)]
    bootstrap_resamples: usize,
    #[arg(long, default_value_t = DEFAULT_CONFIDENCE_LEVEL)]
    level: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Correlation/aggregation levels to emit.
    #[arg(long, value_enum, value_delimiter = ',',
          default_values_t = vec![LevelFlag::Row, LevelFlag::Translator, LevelFlag::Language])]
    group_by: Vec<LevelFlag>,
    /// Exclude rows with degraded-translation or degraded-judging flags.
    #[arg(long)]
    strict: bool,
    /// Whole-document reference-free scores for the hallucination screen.
    #[arg(long)]
    rfqe: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_RFQE_THRESHOLD)]
    rfqe_threshold: u32,
    #[arg(long, default_value_t = DEFAULT_BASELINE_FLOOR)]
    baseline_floor: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum LevelFlag {
    Row,
    Translator,
    Language,
}

fn join_rows(
    records: &[ScoreRecord],
    languages: &BTreeMap<String, String>,
) -> Result<(Vec<ScoreRow>, Vec<String>), CliError> {
    let mut shuffle: BTreeMap<(String, String), &ScoreRecord> = BTreeMap::new();
    let mut baseline: BTreeMap<(String, String), &ScoreRecord> = BTreeMap::new();
    for record in records {
        let key = (record.doc_id.clone(), record.translator_id.clone());
        let slot = match record.metric.as_str() {
            "shuffleval" => &mut shuffle,
            "baseline" => &mut baseline,
            other => {
                return Err(CliError::Config(format!(
                    "unsupported metric '{other}' in score file"
                )))
            }
        };
        if slot.insert(key.clone(), record).is_some() {
            return Err(CliError::Config(format!(
                "duplicate {} record for {} [{}]",
                record.metric, key.0, key.1
            )));
        }
    }

    let mut rows = Vec::new();
    let mut unpaired = Vec::new();
    for (key, s) in &shuffle {
        match baseline.get(key) {
            Some(b) => rows.push(ScoreRow {
                doc_id: key.0.clone(),
                language: languages.get(&key.0).cloned().unwrap_or_else(|| "unknown".to_string()),
                translator_id: key.1.clone(),
                shuffleval: s.score,
                baseline: b.score,
                flagged: !s.flags.is_empty() || !b.flags.is_empty(),
            }),
            None => unpaired.push(format!("{} [{}]: shuffleval only", key.0, key.1)),
        }
    }
    for key in baseline.keys() {
        if !shuffle.contains_key(key) {
            unpaired.push(format!("{} [{}]: baseline only", key.0, key.1));
        }
    }
    Ok((rows, unpaired))
}

struct LevelOutcome {
    level: &'static str,
    n: usize,
    stat: Result<CorrelationStat, String>,
}

fn correlation_at(
    level: &'static str,
    xs: &[f64],
    ys: &[f64],
    args: &ReportArgs,
) -> LevelOutcome {
    LevelOutcome {
        level,
        n: xs.len(),
        stat: correlation_with_ci(xs, ys, args.bootstrap_resamples, args.level, args.seed)
            .map_err(|e| e.to_string()),
    }
}

fn write_aggregate_csv(
    path: &PathBuf,
    label: &str,
    groups: &[shuffleval::analysis::GroupAggregate],
) -> Result<(), CliError> {
    let mut csv = format!("{label},shuffleval_mean,baseline_mean,n\n");
    for group in groups {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            csv_field(&group.key),
            group.shuffleval_mean,
            group.baseline_mean,
            group.n
        );
    }
    std::fs::write(path, csv).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

pub fn run(args: ReportArgs) -> Result<ExitCode, CliError> {
    let mut records = Vec::new();
    for path in &args.scores {
        let mut batch = load_score_records(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        records.append(&mut batch);
    }
    if records.is_empty() {
        return Err(CliError::Config("no score records in input".to_string()));
    }

    let languages: BTreeMap<String, String> = match &args.corpus {
        Some(path) => load_corpus(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
            .documents
            .into_iter()
            .map(|d| (d.doc_id, d.language))
            .collect(),
        None => BTreeMap::new(),
    };

    let (all_rows, unpaired) = join_rows(&records, &languages)?;
    let full_table = ScoreTable::new(all_rows).map_err(|e| CliError::Config(e.to_string()))?;
    let table = if args.strict {
        full_table.without_flagged()
    } else {
        full_table.clone()
    };
    if table.is_empty() {
        return Err(CliError::Config(
            "no paired (shuffleval, baseline) rows to analyze".to_string(),
        ));
    }

    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.out_dir.display())))?;

    // Per-level correlations.
    let mut outcomes: Vec<LevelOutcome> = Vec::new();
    let by_translator = aggregate(&table, GroupBy::Translator)
        .map_err(|e| CliError::Data(e.to_string()))?;
    let by_language =
        aggregate(&table, GroupBy::Language).map_err(|e| CliError::Data(e.to_string()))?;
    if args.group_by.contains(&LevelFlag::Row) {
        let (xs, ys) = table.paired_scores();
        outcomes.push(correlation_at("row", &xs, &ys, &args));
    }
    if args.group_by.contains(&LevelFlag::Translator) {
        let xs: Vec<f64> = by_translator.iter().map(|g| g.shuffleval_mean).collect();
        let ys: Vec<f64> = by_translator.iter().map(|g| g.baseline_mean).collect();
        outcomes.push(correlation_at("translator", &xs, &ys, &args));
    }
    if args.group_by.contains(&LevelFlag::Language) {
        let xs: Vec<f64> = by_language.iter().map(|g| g.shuffleval_mean).collect();
        let ys: Vec<f64> = by_language.iter().map(|g| g.baseline_mean).collect();
        outcomes.push(correlation_at("language", &xs, &ys, &args));
    }

    // Optional hallucination screen.
    let screen: Option<HallucinationReport> = match &args.rfqe {
        Some(path) => {
            let rfqe_records = load_score_records(path)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            let rfqe: Vec<(String, String, u32)> = rfqe_records
                .iter()
                .map(|r| {
                    (
                        r.doc_id.clone(),
                        r.translator_id.clone(),
                        r.score.round().clamp(0.0, 100.0) as u32,
                    )
                })
                .collect();
            let baseline: Vec<BaselineResult> = records
                .iter()
                .filter(|r| r.metric == "baseline")
                .map(|r| BaselineResult {
                    doc_id: r.doc_id.clone(),
                    translator_id: r.translator_id.clone(),
                    score: r.score.round().clamp(0.0, 100.0) as u32,
                    raw_reply: String::new(),
                    clamped: false,
                })
                .collect();
            Some(hallucination_screen(
                &rfqe,
                &baseline,
                args.rfqe_threshold,
                args.baseline_floor,
            ))
        }
        None => None,
    };

    // rows.csv (always), aggregate CSVs per selected level.
    let mut rows_csv =
        String::from("doc_id,language,translator_id,shuffleval,baseline,flagged\n");
    let mut rows_sorted: Vec<&ScoreRow> = table.rows().iter().collect();
    rows_sorted.sort_by(|a, b| (&a.doc_id, &a.translator_id).cmp(&(&b.doc_id, &b.translator_id)));
    for row in rows_sorted {
        let _ = writeln!(
            rows_csv,
            "{},{},{},{},{},{}",
            csv_field(&row.doc_id),
            csv_field(&row.language),
            csv_field(&row.translator_id),
            row.shuffleval,
            row.baseline,
            row.flagged
        );
    }
    let rows_path = args.out_dir.join("rows.csv");
    std::fs::write(&rows_path, rows_csv)
        .map_err(|e| CliError::Data(format!("{}: {e}", rows_path.display())))?;
    if args.group_by.contains(&LevelFlag::Translator) {
        write_aggregate_csv(
            &args.out_dir.join("by_translator.csv"),
            "translator",
            &by_translator,
        )?;
    }
    if args.group_by.contains(&LevelFlag::Language) {
        write_aggregate_csv(&args.out_dir.join("by_language.csv"), "language", &by_language)?;
    }

    // stats.jsonl: machine-readable record per statistic.
    let mut stats = String::new();
    for outcome in &outcomes {
        let value = match &outcome.stat {
            Ok(stat) => serde_json::json!({
                "stat": "pearson",
                "level": outcome.level,
                "n": outcome.n,
                "r": stat.r,
                "ci_low": stat.ci_low,
                "ci_high": stat.ci_high,
                "resamples": args.bootstrap_resamples,
                "confidence_level": args.level,
                "seed": args.seed,
            }),
            Err(reason) => serde_json::json!({
                "stat": "pearson",
                "level": outcome.level,
                "n": outcome.n,
                "error": reason,
            }),
        };
        stats.push_str(&value.to_string());
        stats.push('\n');
    }
    for group in &by_translator {
        let value = serde_json::json!({
            "stat": "aggregate", "level": "translator", "group": group.key,
            "shuffleval_mean": group.shuffleval_mean, "baseline_mean": group.baseline_mean,
            "n": group.n,
        });
        stats.push_str(&value.to_string());
        stats.push('\n');
    }
    for group in &by_language {
        let value = serde_json::json!({
            "stat": "aggregate", "level": "language", "group": group.key,
            "shuffleval_mean": group.shuffleval_mean, "baseline_mean": group.baseline_mean,
            "n": group.n,
        });
        stats.push_str(&value.to_string());
        stats.push('\n');
    }
    let flagged_rows = full_table.rows().iter().filter(|r| r.flagged).count();
    let flags_value = serde_json::json!({
        "stat": "flags",
        "flagged_rows": flagged_rows,
        "total_rows": full_table.rows().len(),
        "strict": args.strict,
        "unpaired": unpaired.len(),
    });
    stats.push_str(&flags_value.to_string());
    stats.push('\n');
    if let Some(report) = &screen {
        let value = serde_json::json!({
            "stat": "hallucination_screen",
            "threshold": report.threshold,
            "floor": report.floor,
            "selected": report.selected,
            "total_rfqe_rows": report.total_rfqe_rows,
            "flagged_fraction": report.flagged_fraction,
            "baseline_histogram": report.baseline_histogram,
            "baseline_mean": report.baseline_mean,
            "orphaned_rfqe": report.orphaned_rfqe.len(),
            "orphaned_baseline": report.orphaned_baseline.len(),
        });
        stats.push_str(&value.to_string());
        stats.push('\n');
    }
    let stats_path = args.out_dir.join("stats.jsonl");
    std::fs::write(&stats_path, stats)
        .map_err(|e| CliError::Data(format!("{}: {e}", stats_path.display())))?;

    // report.txt: the human-readable summary.
    let mut text = String::new();
    let _ = writeln!(
        text,
        "score report: {} rows ({} flagged{}), {} unpaired",
        table.rows().len(),
        flagged_rows,
        if args.strict { ", strict mode excludes them" } else { "" },
        unpaired.len()
    );
    for outcome in &outcomes {
        match &outcome.stat {
            Ok(stat) => {
                let ci = match (stat.ci_low, stat.ci_high) {
                    (Some(lo), Some(hi)) => format!(" (95% CI [{lo:.4}, {hi:.4}])"),
                    _ => String::new(),
                };
                let _ = writeln!(
                    text,
                    "pearson[{}]: r = {:.4} over n = {}{}",
                    outcome.level, stat.r, outcome.n, ci
                );
            }
            Err(reason) => {
                let _ = writeln!(
                    text,
                    "pearson[{}]: undefined over n = {} ({reason})",
                    outcome.level, outcome.n
                );
            }
        }
    }
    if let Some(report) = &screen {
        let _ = writeln!(
            text,
            "hallucination screen: {} of {} rows at rfqe >= {}; fraction with baseline <= {}: {:.4}",
            report.selected,
            report.total_rfqe_rows,
            report.threshold,
            report.floor,
            report.flagged_fraction
        );
        let _ = writeln!(text, "  baseline histogram (tens): {:?}", report.baseline_histogram);
        if !report.orphaned_rfqe.is_empty() || !report.orphaned_baseline.is_empty() {
            let _ = writeln!(
                text,
                "  orphaned rows: {} rfqe-only, {} baseline-only",
                report.orphaned_rfqe.len(),
                report.orphaned_baseline.len()
            );
        }
    }
    for line in &unpaired {
        let _ = writeln!(text, "unpaired {line}");
    }
    let report_path = args.out_dir.join("report.txt");
    std::fs::write(&report_path, &text)
        .map_err(|e| CliError::Data(format!("{}: {e}", report_path.display())))?;
    print!("{text}");

    let mut manifest = new_manifest(BackendConfig::synthetic("none"), 1);
    for path in &args.scores {
        record_input(&mut manifest, path)?;
    }
    if let Some(path) = &args.corpus {
        record_input(&mut manifest, path)?;
    }
    if let Some(path) = &args.rfqe {
        record_input(&mut manifest, path)?;
    }
    manifest.seeds.insert("bootstrap".to_string(), args.seed);
    manifest.parameters.insert(
        "bootstrap_resamples".to_string(),
        args.bootstrap_resamples.to_string(),
    );
    manifest
        .parameters
        .insert("confidence_level".to_string(), args.level.to_string());
    manifest
        .parameters
        .insert("strict".to_string(), args.strict.to_string());
    manifest.parameters.insert(
        "bootstrap_method".to_string(),
        "percentile over paired resamples".to_string(),
    );
    write_manifest(&mut manifest, &manifest_path_for(&args.out_dir))?;

    Ok(ExitCode::SUCCESS)
}
