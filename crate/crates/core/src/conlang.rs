//! Constructed-language corpus generation.
//!
//! A four-stage pipeline: ideate a batch of language concepts in one call
//! (single-call batching keeps the names diverse), then per idea generate a
//! conculture, a language definition, and ten parallel texts. Generated
//! source sentences sometimes embed their own English translations; the
//! scrubber detects and removes those spans and reports every removal.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::{Backend, BackendError};
use crate::corpus::{
    corpus_from_lines, corpus_to_string, Granularity, ParallelCorpus, SegmentedDocument,
    SegmentedTranslation,
};

/// The parallel-text stage's contract: every bundle carries ten texts.
pub const TEXTS_PER_BUNDLE: usize = 10;

#[derive(Debug, Error)]
pub enum ConlangError {
    #[error("{stage} stage: {message}\nraw reply:\n{raw}")]
    Stage {
        stage: &'static str,
        message: String,
        raw: String,
    },
    #[error("ideation returned {got} ideas, expected {expected}\nraw reply:\n{raw}")]
    WrongIdeaCount {
        expected: usize,
        got: usize,
        raw: String,
    },
    #[error("text {text_index}: source and English sentence counts differ ({source_len} vs {english_len})")]
    Misaligned {
        text_index: usize,
        source_len: usize,
        english_len: usize,
    },
    #[error("idea field '{0}' is empty")]
    EmptyIdeaField(&'static str),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("bundle corpus: {0}")]
    Corpus(#[from] crate::corpus::CorpusError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConlangIdea {
    pub planet: String,
    pub species: String,
    pub language: String,
    pub script: String,
    pub property: String,
}

impl ConlangIdea {
    pub fn validate(&self) -> Result<(), ConlangError> {
        for (name, value) in [
            ("planet", &self.planet),
            ("species", &self.species),
            ("language", &self.language),
            ("script", &self.script),
            ("property", &self.property),
        ] {
            if value.trim().is_empty() {
                return Err(ConlangError::EmptyIdeaField(name));
            }
        }
        Ok(())
    }
}

/// One parallel text: aligned source-language and English sentences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParallelText {
    pub source: Vec<String>,
    pub english: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConlangBundle {
    pub idea: ConlangIdea,
    pub conculture: String,
    pub conlang_definition: String,
    pub texts: Vec<ParallelText>,
    pub additional_vocabulary: String,
}

// ---------------------------------------------------------------------------
// Prompt templates
// ---------------------------------------------------------------------------

const IDEATION_KEYS_BLOCK: &str = r#"{
    "planet": "Name of the planet",
    "species": "Name of the species",
    "language": "Name of the language",
    "script": "Name of the script",
    "property": "Unexpected and unique properties of the species and communication that is not known in any Earth lifeform (including humans)"
}"#;

pub fn render_ideation_prompt(n: usize) -> String {
    format!(
        "We are creating a diverse set of conlangs about an alien species. First, we are choosing the:\n\
* Name of the planet\n\
* Name of the species\n\
* Name of the language\n\
* The script, which should not be very common like the Latin script. It can be something rarer like the Telugu script.\n\
* Unexpected and unique property of the species that is not known in any Earth lifeform\n\
\n\
Output a JSON list of {n} such objects, each with the following keys:\n\
\n\
Output a JSON object with the following keys:\n{IDEATION_KEYS_BLOCK}"
    )
}

pub fn render_conculture_prompt(idea: &ConlangIdea) -> String {
    format!(
        "Create a vivid, detailed, and imaginative \u{201d}conculture\u{201d} (constructed culture) for the {species} alien species who inhabit the planet {planet}.\n\
They are unique in that the following sense: {property}.\n\
The conculture should describe the planet and species in enough detail to write a novel about one of the aliens.\n\
The conculture should include detailed descriptions (e.g., at least 800 words each) of five practices (e.g., games, rituals, social norms, etc.). \n\
Their language, {language}, is written in the {script} script, but do not detail that here. That will be defined later.",
        species = idea.species,
        planet = idea.planet,
        property = idea.property,
        language = idea.language,
        script = idea.script,
    )
}

pub fn render_definition_prompt(idea: &ConlangIdea, conculture: &str) -> String {
    format!(
        "Create a \"conlang\" (constructed language) called {language} for the {species} aliens described below. It will be written in the {script} script but the language itself will not resemble any human language.\n\
\n\
<CONCULTURE>\n\
{conculture}\n\
</CONCULTURE>\n\
\n\
The {language} conlang should be unique in at least one unexpected way that differs from any known existing language.\n\
As background, describe the fascinating communication patterns of the {species} in detail. Their communication must be entirely different from Earth species---so much so that a naive translation into English would be not be comprehensible without this background.\n\
The description should be long and detailed, especially the grammar and lexicon. The structure of conversations, meetings, and common topics should be detailed. If there are multiple dialects, just define and describe one.",
        language = idea.language,
        species = idea.species,
        script = idea.script,
    )
}

pub fn render_texts_prompt(idea: &ConlangIdea, conculture: &str, conlang: &str) -> String {
    let structure = format!(
        "{{\n    \"texts\": [\n        {{\n            \"{language}\": [list of strings for sentences],\n            \"English\": [list of strings for sentence translations]\n        }}\n        ... # 9 more texts\n    ]\n    \"additional_vocabulary\": # long string with describing the additional vocabulary needed to understand the texts, if not present in the conlang above\n}}",
        language = idea.language,
    );
    format!(
        "Create 10 texts in the alien conlang {language} spoken by {species}, described below. The texts should be of varying lenths, with the shortest one being 6 sentences and the longest one being 20 sentences. Each text should have an English translation. \n\
At least 5 of the texts should rely on detailed descriptions of the {species} and practices/peculiarities in the <CONCULTURE> section below. It is fine if the texts use vocabulary not defined in the conlang below, just add it to the additional_vocabulary section.\n\
\n\
<CONCULTURE>\n\
{conculture}\n\
</CONCULTURE>\n\
\n\
<CONLANG>\n\
{conlang}\n\
</CONLANG>\n\
\n\
Your output should be in JSON with the following structure:\n\
\n\
{structure}",
        language = idea.language,
        species = idea.species,
    )
}

// ---------------------------------------------------------------------------
// Structured-output parsing
// ---------------------------------------------------------------------------

/// One repair pass for almost-JSON replies: strip fenced code blocks and
/// trailing commas. Anything that still fails to parse is a loud error.
pub fn repair_json(reply: &str) -> String {
    let mut text = reply.trim();
    if text.starts_with("```") {
        if let Some(first_newline) = text.find('\n') {
            text = &text[first_newline + 1..];
        }
        if let Some(fence) = text.rfind("```") {
            text = &text[..fence];
        }
        text = text.trim();
    }
    // Remove trailing commas before closing brackets, outside strings.
    let mut out = String::with_capacity(text.len());
    let mut in_string = false;
    let mut escaped = false;
    let chars: Vec<char> = text.chars().collect();
    for (i, &c) in chars.iter().enumerate() {
        if in_string {
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_string = false;
            }
            out.push(c);
            continue;
        }
        match c {
            '"' => {
                in_string = true;
                out.push(c);
            }
            ',' => {
                let next_meaningful = chars[i + 1..].iter().find(|ch| !ch.is_whitespace());
                if matches!(next_meaningful, Some(']') | Some('}')) {
                    continue;
                }
                out.push(c);
            }
            _ => out.push(c),
        }
    }
    out
}

/// Single-call batch ideation: one prompt, `n` validated idea records back.
pub fn ideate(n: usize, backend: &Backend) -> Result<Vec<ConlangIdea>, ConlangError> {
    let prompt = render_ideation_prompt(n);
    let raw = backend.complete(&prompt)?;
    let ideas: Vec<ConlangIdea> = serde_json::from_str(&raw)
        .or_else(|_| serde_json::from_str(&repair_json(&raw)))
        .map_err(|e| ConlangError::Stage {
            stage: "ideation",
            message: format!("reply is not a JSON list of idea objects: {e}"),
            raw: raw.clone(),
        })?;
    if ideas.len() != n {
        return Err(ConlangError::WrongIdeaCount {
            expected: n,
            got: ideas.len(),
            raw,
        });
    }
    for idea in &ideas {
        idea.validate()?;
    }
    Ok(ideas)
}

/// Shannon entropy (bits) of the initial letters of the planet names; a
/// diversity statistic for ideation reports, not a hard gate.
pub fn initial_letter_entropy(ideas: &[ConlangIdea]) -> f64 {
    let mut counts: BTreeMap<char, usize> = BTreeMap::new();
    let mut total = 0usize;
    for idea in ideas {
        if let Some(first) = idea.planet.chars().next() {
            *counts.entry(first.to_ascii_uppercase()).or_default() += 1;
            total += 1;
        }
    }
    if total == 0 {
        return 0.0;
    }
    counts
        .values()
        .map(|&c| {
            let p = c as f64 / total as f64;
            -p * p.log2()
        })
        .sum()
}

fn parse_texts_reply(
    raw: &str,
    language: &str,
) -> Result<(Vec<ParallelText>, String), ConlangError> {
    let value: serde_json::Value = serde_json::from_str(raw)
        .or_else(|_| serde_json::from_str(&repair_json(raw)))
        .map_err(|e| ConlangError::Stage {
            stage: "texts",
            message: format!("reply is not JSON: {e}"),
            raw: raw.to_string(),
        })?;
    let stage_err = |message: String| ConlangError::Stage {
        stage: "texts",
        message,
        raw: raw.to_string(),
    };
    let texts_value = value
        .get("texts")
        .and_then(|t| t.as_array())
        .ok_or_else(|| stage_err("missing 'texts' array".to_string()))?;
    if texts_value.len() != TEXTS_PER_BUNDLE {
        return Err(stage_err(format!(
            "expected {TEXTS_PER_BUNDLE} texts, got {}",
            texts_value.len()
        )));
    }
    let string_list = |v: &serde_json::Value, key: &str, idx: usize| -> Result<Vec<String>, ConlangError> {
        v.get(key)
            .and_then(|a| a.as_array())
            .map(|a| {
                a.iter()
                    .map(|s| s.as_str().map(str::to_string))
                    .collect::<Option<Vec<String>>>()
            })
            .flatten()
            .ok_or_else(|| stage_err(format!("text {idx} lacks a '{key}' string list")))
    };
    let mut texts = Vec::with_capacity(TEXTS_PER_BUNDLE);
    for (idx, entry) in texts_value.iter().enumerate() {
        let source = string_list(entry, language, idx)?;
        let english = string_list(entry, "English", idx)?;
        if source.is_empty() || source.len() != english.len() {
            return Err(ConlangError::Misaligned {
                text_index: idx,
                source_len: source.len(),
                english_len: english.len(),
            });
        }
        texts.push(ParallelText { source, english });
    }
    let additional_vocabulary = value
        .get("additional_vocabulary")
        .and_then(|v| v.as_str())
        .unwrap_or("")
        .to_string();
    Ok((texts, additional_vocabulary))
}

/// Run the three per-language stages in sequence (each consumes the previous
/// stage's output) and validate the result.
pub fn generate_bundle(idea: &ConlangIdea, backend: &Backend) -> Result<ConlangBundle, ConlangError> {
    idea.validate()?;
    let conculture = backend.complete(&render_conculture_prompt(idea))?;
    if conculture.trim().is_empty() {
        return Err(ConlangError::Stage {
            stage: "conculture",
            message: "empty reply".to_string(),
            raw: conculture,
        });
    }
    let conlang_definition = backend.complete(&render_definition_prompt(idea, &conculture))?;
    if conlang_definition.trim().is_empty() {
        return Err(ConlangError::Stage {
            stage: "definition",
            message: "empty reply".to_string(),
            raw: conlang_definition,
        });
    }
    let texts_raw =
        backend.complete(&render_texts_prompt(idea, &conculture, &conlang_definition))?;
    let (texts, additional_vocabulary) = parse_texts_reply(&texts_raw, &idea.language)?;
    Ok(ConlangBundle {
        idea: idea.clone(),
        conculture,
        conlang_definition,
        texts,
        additional_vocabulary,
    })
}

// ---------------------------------------------------------------------------
// Translation-leak scrubbing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScrubEvent {
    pub text_index: usize,
    pub sentence_index: usize,
    pub rule: &'static str,
    pub removed: String,
}

fn tokens(s: &str) -> Vec<String> {
    s.split_whitespace()
        .map(|t| t.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase())
        .filter(|t| !t.is_empty())
        .collect()
}

/// Case-insensitive (ASCII) substring search.
fn find_ci(haystack: &str, needle: &str) -> Option<(usize, usize)> {
    if needle.is_empty() || needle.len() > haystack.len() {
        return None;
    }
    let hay = haystack.as_bytes();
    let nee = needle.as_bytes();
    'outer: for start in 0..=hay.len() - nee.len() {
        if !haystack.is_char_boundary(start) {
            continue;
        }
        for (i, &nb) in nee.iter().enumerate() {
            if !hay[start + i].eq_ignore_ascii_case(&nb) {
                continue 'outer;
            }
        }
        return Some((start, start + nee.len()));
    }
    None
}

fn collapse_whitespace(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut last_space = false;
    for c in s.chars() {
        if c == ' ' {
            if !last_space {
                out.push(c);
            }
            last_space = true;
        } else {
            out.push(c);
            last_space = false;
        }
    }
    out.trim().to_string()
}

/// Remove translation leaks from one source sentence. Two rules:
/// exact (case-insensitive) occurrence of the full English sentence when it
/// has at least 4 words, and parenthesized spans whose token overlap with the
/// English sentence exceeds 0.8. A removal that would empty the sentence is
/// skipped so alignment-bearing text survives.
fn scrub_sentence(source: &str, english: &str) -> (String, Vec<(&'static str, String)>) {
    let mut current = source.to_string();
    let mut removals = Vec::new();
    let english_tokens = tokens(english);

    if english_tokens.len() >= 4 {
        let needles = [english.trim(), english.trim().trim_end_matches('.')];
        for needle in needles {
            let mut guard = 0;
            while let Some((start, end)) = find_ci(&current, needle) {
                let candidate =
                    collapse_whitespace(&format!("{}{}", &current[..start], &current[end..]));
                if candidate.is_empty() {
                    break;
                }
                removals.push(("sentence_substring", current[start..end].to_string()));
                current = candidate;
                guard += 1;
                if guard > 8 {
                    break;
                }
            }
        }
    }

    if english_tokens.len() >= 2 {
        let mut offset = 0usize;
        while let Some(rel_open) = current[offset..].find('(') {
            let open = offset + rel_open;
            let Some(rel_close) = current[open..].find(')') else { break };
            let close = open + rel_close;
            let span = current[open..=close].to_string();
            let span_tokens = tokens(&span[1..span.len() - 1]);
            let overlap = if span_tokens.is_empty() {
                0.0
            } else {
                span_tokens
                    .iter()
                    .filter(|t| english_tokens.contains(t))
                    .count() as f64
                    / span_tokens.len() as f64
            };
            if span_tokens.len() >= 2 && overlap > 0.8 {
                let candidate =
                    collapse_whitespace(&format!("{}{}", &current[..open], &current[close + 1..]));
                if candidate.is_empty() {
                    break;
                }
                removals.push(("parenthetical_overlap", span));
                current = candidate;
                // The string was rebuilt; rescan from the start. Each pass
                // either removes a span or advances, so this terminates.
                offset = 0;
            } else {
                offset = close + 1;
            }
        }
    }

    (current, removals)
}

/// Remove leaked translations from every sentence; alignment (and sentence
/// counts) are always preserved.
pub fn scrub_leakage(bundle: &ConlangBundle) -> (ConlangBundle, Vec<ScrubEvent>) {
    let mut out = bundle.clone();
    let mut events = Vec::new();
    for (text_index, text) in out.texts.iter_mut().enumerate() {
        for (sentence_index, (src, eng)) in
            text.source.iter_mut().zip(&text.english).enumerate()
        {
            let (scrubbed, removals) = scrub_sentence(src, eng);
            if !removals.is_empty() {
                *src = scrubbed;
                for (rule, removed) in removals {
                    events.push(ScrubEvent {
                        text_index,
                        sentence_index,
                        rule,
                        removed,
                    });
                }
            }
        }
    }
    (out, events)
}

// ---------------------------------------------------------------------------
// Persistence: one directory per conlang
// ---------------------------------------------------------------------------

pub fn bundle_slug(language: &str) -> String {
    let mut slug = String::new();
    let mut last_dash = false;
    for c in language.chars() {
        if c.is_alphanumeric() {
            slug.push(c.to_ascii_lowercase());
            last_dash = false;
        } else if !last_dash && !slug.is_empty() {
            slug.push('-');
            last_dash = true;
        }
    }
    slug.trim_end_matches('-').to_string()
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ConlangError + '_ {
    move |source| ConlangError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Bundle texts as a corpus: sources as documents, English as references.
pub fn bundle_corpus(bundle: &ConlangBundle) -> ParallelCorpus {
    let slug = bundle_slug(&bundle.idea.language);
    let mut documents = Vec::new();
    let mut references = BTreeMap::new();
    for (i, text) in bundle.texts.iter().enumerate() {
        let doc_id = format!("{slug}-t{:02}", i + 1);
        documents.push(SegmentedDocument {
            doc_id: doc_id.clone(),
            language: bundle.idea.language.clone(),
            granularity: Granularity::Sentence,
            segments: text.source.clone(),
            metadata: BTreeMap::new(),
        });
        references.insert(
            doc_id.clone(),
            SegmentedTranslation {
                doc_id,
                translator_id: "reference".to_string(),
                segments: text.english.clone(),
                flags: Vec::new(),
            },
        );
    }
    ParallelCorpus {
        name: slug,
        documents,
        references,
    }
}

pub fn write_bundle(bundle: &ConlangBundle, dir: impl AsRef<Path>) -> Result<(), ConlangError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let idea_path = dir.join("idea.json");
    let idea_json = serde_json::to_string_pretty(&bundle.idea).expect("idea serializes");
    fs::write(&idea_path, format!("{idea_json}\n")).map_err(io_err(&idea_path))?;
    let conculture_path = dir.join("conculture.txt");
    fs::write(&conculture_path, &bundle.conculture).map_err(io_err(&conculture_path))?;
    let conlang_path = dir.join("conlang.txt");
    fs::write(&conlang_path, &bundle.conlang_definition).map_err(io_err(&conlang_path))?;
    let vocab_path = dir.join("vocabulary.txt");
    fs::write(&vocab_path, &bundle.additional_vocabulary).map_err(io_err(&vocab_path))?;
    let corpus_path = dir.join("texts.corpus");
    fs::write(&corpus_path, corpus_to_string(&bundle_corpus(bundle)))
        .map_err(io_err(&corpus_path))?;
    Ok(())
}

pub fn load_bundle(dir: impl AsRef<Path>) -> Result<ConlangBundle, ConlangError> {
    let dir = dir.as_ref();
    let read = |name: &str| -> Result<String, ConlangError> {
        let path = dir.join(name);
        fs::read_to_string(&path).map_err(io_err(&path))
    };
    let idea: ConlangIdea = serde_json::from_str(&read("idea.json")?).map_err(|e| {
        ConlangError::Stage {
            stage: "load",
            message: format!("idea.json: {e}"),
            raw: String::new(),
        }
    })?;
    let conculture = read("conculture.txt")?;
    let conlang_definition = read("conlang.txt")?;
    let additional_vocabulary = read("vocabulary.txt")?;
    let corpus_text = read("texts.corpus")?;
    let lines: Vec<String> = corpus_text.lines().map(String::from).collect();
    let corpus = corpus_from_lines(&lines, bundle_slug(&idea.language))?;
    let mut texts = Vec::new();
    for doc in &corpus.documents {
        let reference = corpus.references.get(&doc.doc_id).ok_or_else(|| {
            ConlangError::Stage {
                stage: "load",
                message: format!("texts.corpus lacks a reference for '{}'", doc.doc_id),
                raw: String::new(),
            }
        })?;
        texts.push(ParallelText {
            source: doc.segments.clone(),
            english: reference.segments.clone(),
        });
    }
    Ok(ConlangBundle {
        idea,
        conculture,
        conlang_definition,
        texts,
        additional_vocabulary,
    })
}
