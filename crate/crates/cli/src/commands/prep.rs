//! `shuffleval prep`: article-selection filters plus segment truncation.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Args;
use shuffleval::backend::BackendConfig;
use shuffleval::corpus::{
    filter_articles, load_corpus, truncate_corpus, write_corpus, ArticleFilter,
};

use super::{manifest_path_for, new_manifest, record_input, write_manifest};
use crate::CliError;

#[derive(Debug, Args)]
pub struct PrepArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Keep documents with at least this many source characters.
    #[arg(long, default_value_t = 0)]
    min_chars: u64,
    /// Keep documents created on or after this date (YYYY-MM-DD).
    #[arg(long)]
    cutoff_date: Option<String>,
    /// Keep only documents that have a reference translation.
    #[arg(long)]
    require_reference: bool,
    /// Keep only the first N segments of each document (and reference).
    #[arg(long)]
    max_segments: Option<usize>,
}

pub fn run(args: PrepArgs) -> Result<ExitCode, CliError> {
    let corpus = load_corpus(&args.corpus)
        .map_err(|e| CliError::Config(format!("{}: {e}", args.corpus.display())))?;

    let cutoff_date = args
        .cutoff_date
        .as_deref()
        .map(|raw| {
            chrono::NaiveDate::parse_from_str(raw, "%Y-%m-%d")
                .map_err(|e| CliError::Config(format!("--cutoff-date '{raw}': {e}")))
        })
        .transpose()?;

    let filter = ArticleFilter {
        min_chars: args.min_chars,
        cutoff_date,
        require_reference: args.require_reference,
    };
    let (filtered, report) = filter_articles(&corpus, &filter);
    let prepared = match args.max_segments {
        Some(max) => truncate_corpus(&filtered, max)
            .map_err(|e| CliError::Config(format!("--max-segments: {e}")))?,
        None => filtered,
    };

    write_corpus(&prepared, &args.out)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.out.display())))?;

    let mut manifest = new_manifest(BackendConfig::synthetic("none"), 1);
    record_input(&mut manifest, &args.corpus)?;
    manifest
        .parameters
        .insert("min_chars".to_string(), args.min_chars.to_string());
    if let Some(date) = &args.cutoff_date {
        manifest
            .parameters
            .insert("cutoff_date".to_string(), date.clone());
    }
    manifest.parameters.insert(
        "require_reference".to_string(),
        args.require_reference.to_string(),
    );
    if let Some(max) = args.max_segments {
        manifest
            .parameters
            .insert("max_segments".to_string(), max.to_string());
    }
    write_manifest(&mut manifest, &manifest_path_for(&args.out))?;

    println!(
        "kept {} of {} documents ({} references)",
        prepared.documents.len(),
        corpus.documents.len(),
        prepared.references.len()
    );
    for (doc_id, reason) in &report.excluded {
        println!("excluded {doc_id}: {reason}");
    }
    Ok(ExitCode::SUCCESS)
}
