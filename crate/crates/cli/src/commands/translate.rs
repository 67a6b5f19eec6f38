//! `shuffleval translate`: one independent call per segment, mt records out.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Args;
use shuffleval::backend::Backend;
use shuffleval::corpus::{load_corpus, write_translations, SegmentedTranslation};
use shuffleval::translator::{translate_document, ConlangContext, TemplateKind, TranslationJob};

use super::{manifest_path_for, new_manifest, record_input, write_manifest};
use crate::config::{resolve_backend, BackendArgs};
use crate::CliError;

#[derive(Debug, Args)]
pub struct TranslateArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Translator model id (or synthetic strategy name for `--backend oracle`).
    #[arg(long)]
    model: Option<String>,
    #[arg(long, value_enum, default_value = "low-resource")]
    template: TemplateFlag,
    /// Bundle directory providing the conlang context (idea.json,
    /// conculture.txt, conlang.txt); required with `--template conlang`.
    #[arg(long)]
    conlang_dir: Option<PathBuf>,
    #[command(flatten)]
    backend: BackendArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum TemplateFlag {
    #[value(name = "low_resource", alias = "low-resource")]
    LowResource,
    Conlang,
}

fn load_conlang_context(dir: &PathBuf) -> Result<ConlangContext, CliError> {
    let read = |name: &str| -> Result<String, CliError> {
        std::fs::read_to_string(dir.join(name))
            .map_err(|e| CliError::Config(format!("{}/{name}: {e}", dir.display())))
    };
    let idea: shuffleval::conlang::ConlangIdea = serde_json::from_str(&read("idea.json")?)
        .map_err(|e| CliError::Config(format!("{}/idea.json: {e}", dir.display())))?;
    Ok(ConlangContext {
        language: idea.language,
        species: idea.species,
        planet: idea.planet,
        conculture: read("conculture.txt")?,
        conlang: read("conlang.txt")?,
    })
}

pub fn run(args: TranslateArgs) -> Result<ExitCode, CliError> {
    let resolved = resolve_backend(&args.backend)?;
    let model = args
        .model
        .clone()
        .or_else(|| resolved.file_defaults.model.clone())
        .ok_or_else(|| CliError::Config("--model is required".to_string()))?;
    let backend_config = resolved.config_for(&model);
    let backend = Backend::from_config(&backend_config)
        .map_err(|e| CliError::Config(e.to_string()))?;

    let corpus = load_corpus(&args.corpus)
        .map_err(|e| CliError::Config(format!("{}: {e}", args.corpus.display())))?;

    let (template_kind, conlang_context) = match args.template {
        TemplateFlag::LowResource => (TemplateKind::LowResource, None),
        TemplateFlag::Conlang => {
            let dir = args.conlang_dir.as_ref().ok_or_else(|| {
                CliError::Config("--template conlang requires --conlang-dir".to_string())
            })?;
            (TemplateKind::Conlang, Some(load_conlang_context(dir)?))
        }
    };

    let mut translations: Vec<SegmentedTranslation> = Vec::new();
    let mut failures: Vec<String> = Vec::new();
    let mut flagged_segments = 0usize;
    for doc in &corpus.documents {
        let job = TranslationJob {
            document: doc.clone(),
            translator_model: model.clone(),
            template_kind,
            conlang_context: conlang_context.clone(),
        };
        match translate_document(&job, &backend, resolved.max_inflight) {
            Ok(translation) => {
                flagged_segments += translation.flags.len();
                translations.push(translation);
            }
            Err(e) => failures.push(format!("{}: {e}", doc.doc_id)),
        }
    }

    write_translations(&translations, &args.out)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.out.display())))?;

    let mut manifest = new_manifest(backend_config, resolved.max_inflight);
    record_input(&mut manifest, &args.corpus)?;
    manifest
        .parameters
        .insert("template".to_string(), format!("{:?}", args.template));
    if let Some(dir) = &args.conlang_dir {
        manifest
            .parameters
            .insert("conlang_dir".to_string(), dir.display().to_string());
    }
    write_manifest(&mut manifest, &manifest_path_for(&args.out))?;

    println!(
        "translated {} of {} documents with '{}' ({} flagged segments)",
        translations.len(),
        corpus.documents.len(),
        backend.strategy_id(),
        flagged_segments
    );
    for failure in &failures {
        println!("failed {failure}");
    }
    if failures.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}
