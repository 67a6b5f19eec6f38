//! `shuffleval score`: shuffle-metric and/or baseline scores over mt records.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Args;
use shuffleval::backend::{run_indexed, Backend};
use shuffleval::corpus::{load_corpus, load_translations, SegmentedTranslation};
use shuffleval::permute::derive_seed_for_keys;
use shuffleval::scorer::{
    baseline_score, records_to_string, shuffleval_score, ScoreMode, ScoreOptions, ScoreRecord,
    DEFAULT_N_SAMPLES,
};

use super::{manifest_path_for, new_manifest, record_input, write_manifest};
use crate::config::{resolve_backend, BackendArgs};
use crate::CliError;

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Translations to score (mt records).
    #[arg(long)]
    mt: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "shuffleval")]
    metric: MetricFlag,
    /// Judge model id for the shuffle metric (or oracle strategy name).
    #[arg(long)]
    judge_model: Option<String>,
    /// Judge model id for the baseline; defaults to --judge-model.
    #[arg(long)]
    baseline_model: Option<String>,
    #[arg(long, value_enum, default_value = "monte_carlo")]
    mode: ModeFlag,
    /// Permutations sampled per document in monte_carlo mode (default 10).
    #[arg(long)]
    n_perms: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Source description interpolated into the judging prompt.
    #[arg(long, default_value = "a text")]
    source_description: String,
    #[command(flatten)]
    backend: BackendArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum MetricFlag {
    Shuffleval,
    Baseline,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ModeFlag {
    Exact,
    #[value(name = "monte_carlo", alias = "monte-carlo")]
    MonteCarlo,
}

pub fn run(args: ScoreArgs) -> Result<ExitCode, CliError> {
    let resolved = resolve_backend(&args.backend)?;
    let judge_model = args
        .judge_model
        .clone()
        .or_else(|| resolved.file_defaults.judge_model.clone())
        .ok_or_else(|| CliError::Config("--judge-model is required".to_string()))?;
    let baseline_model = args.baseline_model.clone().unwrap_or_else(|| judge_model.clone());
    let seed = args
        .seed
        .or(resolved.file_defaults.seed)
        .unwrap_or(0);
    let n_perms = args
        .n_perms
        .or(resolved.file_defaults.n_perms)
        .unwrap_or(DEFAULT_N_SAMPLES);

    let corpus = load_corpus(&args.corpus)
        .map_err(|e| CliError::Config(format!("{}: {e}", args.corpus.display())))?;
    let translations = load_translations(&args.mt)
        .map_err(|e| CliError::Config(format!("{}: {e}", args.mt.display())))?;

    let want_shuffle = matches!(args.metric, MetricFlag::Shuffleval | MetricFlag::Both);
    let want_baseline = matches!(args.metric, MetricFlag::Baseline | MetricFlag::Both);
    if want_baseline && corpus.references.is_empty() {
        return Err(CliError::Config(
            "baseline metric requires reference translations in the corpus".to_string(),
        ));
    }

    let judge_config = resolved.config_for(&judge_model);
    let judge_backend =
        Backend::from_config(&judge_config).map_err(|e| CliError::Config(e.to_string()))?;
    let baseline_config = resolved.config_for(&baseline_model);
    let baseline_backend =
        Backend::from_config(&baseline_config).map_err(|e| CliError::Config(e.to_string()))?;

    let mode = match args.mode {
        ModeFlag::Exact => ScoreMode::Exact,
        ModeFlag::MonteCarlo => ScoreMode::MonteCarlo,
    };

    enum RowOutcome {
        Records(Vec<ScoreRecord>),
        Skipped(String),
        Failed(String),
    }

    let score_one = |t: &SegmentedTranslation| -> RowOutcome {
        let Some(doc) = corpus.document(&t.doc_id) else {
            return RowOutcome::Failed(format!(
                "{} [{}]: no such document in the corpus",
                t.doc_id, t.translator_id
            ));
        };
        if doc.k() != t.k() {
            return RowOutcome::Failed(format!(
                "{} [{}]: translation has {} segments, document has {}",
                t.doc_id,
                t.translator_id,
                t.k(),
                doc.k()
            ));
        }
        if t.k() < 2 && want_shuffle {
            return RowOutcome::Skipped(format!(
                "{} [{}]: k=1, shuffle metric undefined",
                t.doc_id, t.translator_id
            ));
        }
        let mut records = Vec::new();
        if want_shuffle {
            let opts = ScoreOptions {
                mode,
                n_samples: n_perms,
                seed: derive_seed_for_keys(seed, &[&t.doc_id, &t.translator_id]),
                source_description: args.source_description.clone(),
            };
            match shuffleval_score(t, &judge_backend, &opts) {
                Ok(result) => records.push(ScoreRecord::from_shuffleval(&result, &t.flags)),
                Err(e) => {
                    return RowOutcome::Failed(format!("{} [{}]: {e}", t.doc_id, t.translator_id))
                }
            }
        }
        if want_baseline {
            let Some(reference) = corpus.references.get(&t.doc_id) else {
                return RowOutcome::Failed(format!(
                    "{} [{}]: no reference translation",
                    t.doc_id, t.translator_id
                ));
            };
            match baseline_score(reference, t, &baseline_backend) {
                Ok(result) => records.push(ScoreRecord::from_baseline(&result, &t.flags)),
                Err(e) => {
                    return RowOutcome::Failed(format!("{} [{}]: {e}", t.doc_id, t.translator_id))
                }
            }
        }
        RowOutcome::Records(records)
    };

    // Documents score concurrently; assembly stays in input order.
    let outcomes = run_indexed(translations.len(), resolved.max_inflight, |i| {
        score_one(&translations[i])
    });

    let mut records = Vec::new();
    let mut skips = Vec::new();
    let mut failures = Vec::new();
    for outcome in outcomes {
        match outcome {
            RowOutcome::Records(mut r) => records.append(&mut r),
            RowOutcome::Skipped(line) => skips.push(line),
            RowOutcome::Failed(line) => failures.push(line),
        }
    }

    std::fs::write(&args.out, records_to_string(&records))
        .map_err(|e| CliError::Data(format!("{}: {e}", args.out.display())))?;

    let mut manifest = new_manifest(baseline_config, resolved.max_inflight);
    manifest.judge_backend = Some(judge_config);
    record_input(&mut manifest, &args.corpus)?;
    record_input(&mut manifest, &args.mt)?;
    manifest.seeds.insert("base".to_string(), seed);
    manifest.parameters.insert(
        "seed_derivation".to_string(),
        "per (doc_id, translator_id): base xor sha256-prefix".to_string(),
    );
    manifest
        .parameters
        .insert("metric".to_string(), format!("{:?}", args.metric));
    manifest
        .parameters
        .insert("mode".to_string(), format!("{mode:?}"));
    manifest
        .parameters
        .insert("n_perms".to_string(), n_perms.to_string());
    write_manifest(&mut manifest, &manifest_path_for(&args.out))?;

    println!(
        "scored {} rows ({} records) with judge '{}'",
        translations.len() - skips.len() - failures.len(),
        records.len(),
        judge_backend.strategy_id()
    );
    for line in &skips {
        println!("skipped {line}");
    }
    for line in &failures {
        println!("failed {line}");
    }
    if failures.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}
