//! `shuffleval conlang`: batch-ideate languages, then generate each bundle
//! through the staged pipeline, scrub translation leaks, and persist one
//! directory per language.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Args;
use shuffleval::backend::Backend;
use shuffleval::conlang::{
    bundle_slug, generate_bundle, ideate, initial_letter_entropy, scrub_leakage, write_bundle,
};

use super::{manifest_path_for, new_manifest, write_manifest};
use crate::config::{resolve_backend, BackendArgs};
use crate::CliError;

#[derive(Debug, Args)]
pub struct ConlangArgs {
    /// Number of languages to generate.
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long)]
    out_dir: PathBuf,
    /// Generation model id (or oracle strategy name).
    #[arg(long)]
    model: Option<String>,
    #[command(flatten)]
    backend: BackendArgs,
}

pub fn run(args: ConlangArgs) -> Result<ExitCode, CliError> {
    if args.n == 0 {
        return Err(CliError::Config("--n must be at least 1".to_string()));
    }
    let resolved = resolve_backend(&args.backend)?;
    let model = args
        .model
        .clone()
        .or_else(|| resolved.file_defaults.model.clone())
        .ok_or_else(|| CliError::Config("--model is required".to_string()))?;
    let backend_config = resolved.config_for(&model);
    let backend =
        Backend::from_config(&backend_config).map_err(|e| CliError::Config(e.to_string()))?;

    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.out_dir.display())))?;

    let ideas = ideate(args.n, &backend).map_err(|e| CliError::Data(e.to_string()))?;
    println!(
        "ideated {} languages (planet initial-letter entropy {:.2} bits)",
        ideas.len(),
        initial_letter_entropy(&ideas)
    );

    let mut failures = Vec::new();
    let mut scrub_total = 0usize;
    for idea in &ideas {
        let slug = bundle_slug(&idea.language);
        match generate_bundle(idea, &backend) {
            Ok(bundle) => {
                let (scrubbed, events) = scrub_leakage(&bundle);
                scrub_total += events.len();
                let dir = args.out_dir.join(&slug);
                if let Err(e) = write_bundle(&scrubbed, &dir) {
                    failures.push(format!("{slug}: {e}"));
                    continue;
                }
                let report_path = dir.join("scrub_report.json");
                let report =
                    serde_json::to_string_pretty(&events).expect("scrub events serialize");
                if let Err(e) = std::fs::write(&report_path, format!("{report}\n")) {
                    failures.push(format!("{slug}: scrub report: {e}"));
                    continue;
                }
                println!(
                    "generated {slug}: {} texts, {} leak removals",
                    scrubbed.texts.len(),
                    events.len()
                );
            }
            Err(e) => failures.push(format!("{slug}: {e}")),
        }
    }

    let mut manifest = new_manifest(backend_config, resolved.max_inflight);
    manifest.parameters.insert("n".to_string(), args.n.to_string());
    manifest
        .parameters
        .insert("leak_removals".to_string(), scrub_total.to_string());
    write_manifest(&mut manifest, &manifest_path_for(&args.out_dir))?;

    for failure in &failures {
        println!("failed {failure}");
    }
    if failures.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}
