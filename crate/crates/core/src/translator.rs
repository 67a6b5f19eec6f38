//! Segment-by-segment translation through the two prompt templates.
//!
//! Each segment is translated in an independent call with no cross-segment
//! context, so translating a permuted document equals permuting the
//! translation. Output is extracted from the template's delimiters; a segment
//! whose reply never yields a well-formed block becomes an empty translation
//! with a flag instead of shifting alignment.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::{run_indexed, Backend, BackendError};
use crate::corpus::{SegmentedDocument, SegmentedTranslation};

#[derive(Debug, Error)]
pub enum TranslateError {
    #[error("conlang template requires a conlang context")]
    MissingConlangContext,
    #[error("segment must be non-empty")]
    EmptySegment,
    #[error("translating '{doc_id}' segment {segment}: {source}")]
    Backend {
        doc_id: String,
        segment: usize,
        #[source]
        source: BackendError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateKind {
    LowResource,
    Conlang,
}

/// Everything the conlang translation template interpolates besides the text.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConlangContext {
    pub language: String,
    pub species: String,
    pub planet: String,
    pub conculture: String,
    pub conlang: String,
}

#[derive(Debug, Clone)]
pub struct TranslationJob {
    pub document: SegmentedDocument,
    pub translator_model: String,
    pub template_kind: TemplateKind,
    pub conlang_context: Option<ConlangContext>,
}

/// Uppercase delimiter derived from the language name, e.g. `Santali` →
/// `SANTALI`. Spaces become underscores so the tag stays one token.
pub fn language_delimiter(language: &str) -> String {
    language
        .chars()
        .map(|c| {
            if c.is_whitespace() {
                '_'
            } else {
                c.to_ascii_uppercase()
            }
        })
        .collect()
}

/// Render the translation prompt for one segment.
pub fn render_translation_prompt(
    segment: &str,
    job: &TranslationJob,
) -> Result<String, TranslateError> {
    if segment.trim().is_empty() {
        return Err(TranslateError::EmptySegment);
    }
    match job.template_kind {
        TemplateKind::LowResource => {
            let language = &job.document.language;
            let tag = language_delimiter(language);
            Ok(format!(
                "Translate the following text from {language} to English:\n\
\n\
<{tag}>\n\
{segment}\n\
</{tag}>\n\
\n\
Your output should be in the following format:\n\
\n\
<ENGLISH_TRANSLATION>\n\
...\n\
</ENGLISH_TRANSLATION>"
            ))
        }
        TemplateKind::Conlang => {
            let ctx = job
                .conlang_context
                .as_ref()
                .ok_or(TranslateError::MissingConlangContext)?;
            let ConlangContext {
                language,
                species,
                planet,
                conculture,
                conlang,
            } = ctx;
            Ok(format!(
                "Translate the following text from \"{language}\" to English. {language} is a constructed language spoken by {species} on the planet {planet}.\n\
\n\
<TEXT_TO_TRANSLATE>\n\
{segment}\n\
</TEXT_TO_TRANSLATE>\n\
\n\
To help in the translation, here is detailed information about the culture and {language} language.\n\
\n\
{conculture}\n\
\n\
{conlang}\n\
\n\
# Instructions\n\
\n\
**Recall that the only text you are translating is the following, based on the above description of {language}:**\n\
\n\
<TEXT_TO_TRANSLATE>\n\
{segment}\n\
</TEXT_TO_TRANSLATE>\n\
\n\
Just output your translation (no commentary) in the following format:\n\
\n\
<TRANSLATION>\n\
(english translation)\n\
</TRANSLATION>"
            ))
        }
    }
}

/// First well-formed `<ENGLISH_TRANSLATION>` block, else the first
/// `<TRANSLATION>` block, trimmed. Returns `None` when neither exists.
pub fn extract_translation(reply: &str) -> Option<String> {
    fn block(text: &str, tag: &str) -> Option<String> {
        let open = format!("<{tag}>");
        let close = format!("</{tag}>");
        let start = text.find(&open)? + open.len();
        let rel = text[start..].find(&close)?;
        Some(text[start..start + rel].trim().to_string())
    }
    block(reply, "ENGLISH_TRANSLATION").or_else(|| block(reply, "TRANSLATION"))
}

/// Translate every segment of the job's document independently, in source
/// order, with at most `max_inflight` concurrent calls.
pub fn translate_document(
    job: &TranslationJob,
    backend: &Backend,
    max_inflight: usize,
) -> Result<SegmentedTranslation, TranslateError> {
    let doc = &job.document;
    let results: Vec<Result<(String, Option<String>), TranslateError>> =
        run_indexed(doc.segments.len(), max_inflight, |i| {
            translate_segment(&doc.segments[i], i, job, backend)
        });

    let mut segments = Vec::with_capacity(doc.segments.len());
    let mut flags = Vec::new();
    for (i, result) in results.into_iter().enumerate() {
        let (text, flag) = result?;
        segments.push(text);
        if let Some(reason) = flag {
            flags.push(format!("{i}:{reason}"));
        }
    }
    Ok(SegmentedTranslation {
        doc_id: doc.doc_id.clone(),
        translator_id: job.translator_model.clone(),
        segments,
        flags,
    })
}

fn translate_segment(
    segment: &str,
    index: usize,
    job: &TranslationJob,
    backend: &Backend,
) -> Result<(String, Option<String>), TranslateError> {
    let prompt = render_translation_prompt(segment, job)?;
    let wrap_err = |source| TranslateError::Backend {
        doc_id: job.document.doc_id.clone(),
        segment: index,
        source,
    };
    let mut reply = backend.complete(&prompt).map_err(wrap_err)?;
    let mut extracted = extract_translation(&reply);
    let mut attempts = 0;
    while extracted.is_none() && attempts < backend.max_retries() {
        match backend.complete_uncached(&prompt) {
            Ok(fresh) => {
                reply = fresh;
                extracted = extract_translation(&reply);
            }
            Err(_) => break,
        }
        attempts += 1;
    }
    match extracted {
        Some(text) => Ok((text, None)),
        None => Ok((String::new(), Some("missing_delimiters".to_string()))),
    }
}

/// Whole-document mode: the same operation over a single concatenated
/// segment (paragraph joins with a blank line).
pub fn concat_to_single_segment(doc: &SegmentedDocument) -> SegmentedDocument {
    let mut out = doc.clone();
    out.segments = vec![doc.segments.join("\n\n")];
    out
}
