//! Document/translation data model, corpus ingestion, and dataset-construction filters.
//!
//! The on-disk corpus format is line-delimited JSON: one `doc`, `ref`, or `mt`
//! record per line, UTF-8, LF line endings. Loading validates structural
//! invariants (non-empty segments, unique doc ids, reference alignment) and
//! names the offending line on failure. Writing is canonical: documents in
//! corpus order, then references in document order, with a fixed field order
//! per record. `write ∘ load` is the identity on canonical files.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: {message}")]
    Validation { line: usize, message: String },
    #[error("{0}")]
    Argument(String),
}

/// Segmentation granularity of a document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Paragraph,
    Sentence,
    Turn,
}

impl Granularity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Granularity::Paragraph => "paragraph",
            Granularity::Sentence => "sentence",
            Granularity::Turn => "turn",
        }
    }
}

/// An ordered list of source segments plus metadata; the unit the shuffle
/// metric operates on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentedDocument {
    pub doc_id: String,
    pub language: String,
    pub granularity: Granularity,
    pub segments: Vec<String>,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

impl SegmentedDocument {
    pub fn k(&self) -> usize {
        self.segments.len()
    }

    /// Character count over the concatenated segments, used when the
    /// `char_count` metadata field is absent.
    pub fn char_count(&self) -> u64 {
        self.segments.iter().map(|s| s.chars().count() as u64).sum()
    }
}

/// Target-language segments aligned 1:1 with a source document's segments.
/// Failed segments hold empty text plus an entry in `flags` rather than
/// shifting alignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentedTranslation {
    pub doc_id: String,
    pub translator_id: String,
    pub segments: Vec<String>,
    #[serde(default)]
    pub flags: Vec<String>,
}

impl SegmentedTranslation {
    pub fn k(&self) -> usize {
        self.segments.len()
    }
}

/// A set of documents with optional human reference translations.
#[derive(Debug, Clone, PartialEq)]
pub struct ParallelCorpus {
    pub name: String,
    pub documents: Vec<SegmentedDocument>,
    pub references: BTreeMap<String, SegmentedTranslation>,
}

impl ParallelCorpus {
    pub fn document(&self, doc_id: &str) -> Option<&SegmentedDocument> {
        self.documents.iter().find(|d| d.doc_id == doc_id)
    }
}

/// One line of the corpus wire format.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CorpusRecord {
    Doc {
        doc_id: String,
        language: String,
        granularity: Granularity,
        segments: Vec<String>,
        #[serde(default)]
        metadata: BTreeMap<String, String>,
    },
    Ref {
        doc_id: String,
        translator_id: String,
        segments: Vec<String>,
    },
    Mt {
        doc_id: String,
        translator_id: String,
        segments: Vec<String>,
        #[serde(default)]
        flags: Vec<String>,
    },
}

fn read_lines(path: &Path) -> Result<Vec<String>, CorpusError> {
    let file = fs::File::open(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut lines = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| CorpusError::Io {
            path: format!("{} (line {})", path.display(), idx + 1),
            source,
        })?;
        lines.push(line);
    }
    Ok(lines)
}

fn parse_records(lines: &[String]) -> Result<Vec<(usize, CorpusRecord)>, CorpusError> {
    let mut records = Vec::new();
    for (idx, line) in lines.iter().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let record: CorpusRecord = serde_json::from_str(line).map_err(|e| CorpusError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        records.push((line_no, record));
    }
    Ok(records)
}

fn validate_document(line: usize, doc: &SegmentedDocument) -> Result<(), CorpusError> {
    if doc.segments.is_empty() {
        return Err(CorpusError::Validation {
            line,
            message: format!("document '{}' has an empty segment list", doc.doc_id),
        });
    }
    if let Some(pos) = doc.segments.iter().position(|s| s.trim().is_empty()) {
        return Err(CorpusError::Validation {
            line,
            message: format!(
                "document '{}' segment {} is empty after trimming",
                doc.doc_id, pos
            ),
        });
    }
    Ok(())
}

/// Load and validate a corpus file (`doc` and `ref` records).
pub fn load_corpus(path: impl AsRef<Path>) -> Result<ParallelCorpus, CorpusError> {
    let path = path.as_ref();
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "corpus".to_string());
    let lines = read_lines(path)?;
    corpus_from_lines(&lines, name)
}

/// Parse a corpus from in-memory lines; exposed for fixtures and round-trip checks.
pub fn corpus_from_lines(lines: &[String], name: String) -> Result<ParallelCorpus, CorpusError> {
    let records = parse_records(lines)?;
    let mut documents: Vec<SegmentedDocument> = Vec::new();
    let mut doc_lines: BTreeMap<String, usize> = BTreeMap::new();
    let mut references: BTreeMap<String, SegmentedTranslation> = BTreeMap::new();
    let mut pending_refs: Vec<(usize, SegmentedTranslation)> = Vec::new();

    for (line, record) in records {
        match record {
            CorpusRecord::Doc {
                doc_id,
                language,
                granularity,
                segments,
                metadata,
            } => {
                if doc_lines.contains_key(&doc_id) {
                    return Err(CorpusError::Validation {
                        line,
                        message: format!("duplicate doc_id '{doc_id}'"),
                    });
                }
                let doc = SegmentedDocument {
                    doc_id: doc_id.clone(),
                    language,
                    granularity,
                    segments,
                    metadata,
                };
                validate_document(line, &doc)?;
                doc_lines.insert(doc_id, line);
                documents.push(doc);
            }
            CorpusRecord::Ref {
                doc_id,
                translator_id,
                segments,
            } => {
                pending_refs.push((
                    line,
                    SegmentedTranslation {
                        doc_id,
                        translator_id,
                        segments,
                        flags: Vec::new(),
                    },
                ));
            }
            CorpusRecord::Mt { .. } => {
                return Err(CorpusError::Validation {
                    line,
                    message: "mt records belong in a translations file, not a corpus".to_string(),
                });
            }
        }
    }

    for (line, reference) in pending_refs {
        let doc = documents
            .iter()
            .find(|d| d.doc_id == reference.doc_id)
            .ok_or_else(|| CorpusError::Validation {
                line,
                message: format!("reference for unknown doc_id '{}'", reference.doc_id),
            })?;
        if doc.segments.len() != reference.segments.len() {
            return Err(CorpusError::Validation {
                line,
                message: format!(
                    "reference for '{}' has {} segments, document has {}",
                    reference.doc_id,
                    reference.segments.len(),
                    doc.segments.len()
                ),
            });
        }
        if references.contains_key(&reference.doc_id) {
            return Err(CorpusError::Validation {
                line,
                message: format!("duplicate reference for doc_id '{}'", reference.doc_id),
            });
        }
        references.insert(reference.doc_id.clone(), reference);
    }

    Ok(ParallelCorpus {
        name,
        documents,
        references,
    })
}

/// Canonical serialization: documents in corpus order, then references in
/// document order, one JSON record per line with LF endings.
pub fn corpus_to_string(corpus: &ParallelCorpus) -> String {
    let mut out = String::new();
    for doc in &corpus.documents {
        let record = CorpusRecord::Doc {
            doc_id: doc.doc_id.clone(),
            language: doc.language.clone(),
            granularity: doc.granularity,
            segments: doc.segments.clone(),
            metadata: doc.metadata.clone(),
        };
        out.push_str(&serde_json::to_string(&record).expect("corpus record serializes"));
        out.push('\n');
    }
    for doc in &corpus.documents {
        if let Some(reference) = corpus.references.get(&doc.doc_id) {
            let record = CorpusRecord::Ref {
                doc_id: reference.doc_id.clone(),
                translator_id: reference.translator_id.clone(),
                segments: reference.segments.clone(),
            };
            out.push_str(&serde_json::to_string(&record).expect("corpus record serializes"));
            out.push('\n');
        }
    }
    out
}

pub fn write_corpus(corpus: &ParallelCorpus, path: impl AsRef<Path>) -> Result<(), CorpusError> {
    let path = path.as_ref();
    let mut file = fs::File::create(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    file.write_all(corpus_to_string(corpus).as_bytes())
        .map_err(|source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        })
}

/// Load an `mt` record file produced by the translator.
pub fn load_translations(path: impl AsRef<Path>) -> Result<Vec<SegmentedTranslation>, CorpusError> {
    let path = path.as_ref();
    let lines = read_lines(path)?;
    let mut translations = Vec::new();
    for (line, record) in parse_records(&lines)? {
        match record {
            CorpusRecord::Mt {
                doc_id,
                translator_id,
                segments,
                flags,
            } => translations.push(SegmentedTranslation {
                doc_id,
                translator_id,
                segments,
                flags,
            }),
            _ => {
                return Err(CorpusError::Validation {
                    line,
                    message: "expected only mt records in a translations file".to_string(),
                })
            }
        }
    }
    Ok(translations)
}

pub fn translations_to_string(translations: &[SegmentedTranslation]) -> String {
    let mut out = String::new();
    for t in translations {
        let record = CorpusRecord::Mt {
            doc_id: t.doc_id.clone(),
            translator_id: t.translator_id.clone(),
            segments: t.segments.clone(),
            flags: t.flags.clone(),
        };
        out.push_str(&serde_json::to_string(&record).expect("mt record serializes"));
        out.push('\n');
    }
    out
}

pub fn write_translations(
    translations: &[SegmentedTranslation],
    path: impl AsRef<Path>,
) -> Result<(), CorpusError> {
    let path = path.as_ref();
    fs::write(path, translations_to_string(translations)).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Dataset-construction predicates. Disabled predicates are vacuous.
#[derive(Debug, Clone, Default)]
pub struct ArticleFilter {
    /// Keep documents with at least this many source characters (0 disables).
    pub min_chars: u64,
    /// Keep documents created on or after this date.
    pub cutoff_date: Option<NaiveDate>,
    /// Keep only documents that have a reference translation.
    pub require_reference: bool,
}

/// Per-document exclusions recorded while filtering, with reasons.
#[derive(Debug, Clone, Default, Serialize)]
pub struct FilterReport {
    pub excluded: Vec<(String, String)>,
}

/// Apply the enabled predicates, preserving document order. Documents whose
/// required metadata is missing or malformed are excluded and reported rather
/// than failing the whole corpus.
pub fn filter_articles(
    corpus: &ParallelCorpus,
    filter: &ArticleFilter,
) -> (ParallelCorpus, FilterReport) {
    let mut report = FilterReport::default();
    let mut kept = Vec::new();

    'docs: for doc in &corpus.documents {
        if filter.min_chars > 0 {
            let count = match doc.metadata.get("char_count") {
                Some(raw) => match raw.parse::<u64>() {
                    Ok(c) => c,
                    Err(_) => {
                        report
                            .excluded
                            .push((doc.doc_id.clone(), format!("malformed char_count '{raw}'")));
                        continue 'docs;
                    }
                },
                None => doc.char_count(),
            };
            if count < filter.min_chars {
                report.excluded.push((
                    doc.doc_id.clone(),
                    format!("char_count {count} < {}", filter.min_chars),
                ));
                continue 'docs;
            }
        }
        if let Some(cutoff) = filter.cutoff_date {
            let raw = match doc.metadata.get("creation_date") {
                Some(raw) => raw,
                None => {
                    report
                        .excluded
                        .push((doc.doc_id.clone(), "creation_date missing".to_string()));
                    continue 'docs;
                }
            };
            let date = match NaiveDate::parse_from_str(raw, "%Y-%m-%d") {
                Ok(d) => d,
                Err(_) => {
                    report.excluded.push((
                        doc.doc_id.clone(),
                        format!("malformed creation_date '{raw}'"),
                    ));
                    continue 'docs;
                }
            };
            if date < cutoff {
                report.excluded.push((
                    doc.doc_id.clone(),
                    format!("creation_date {date} before cutoff {cutoff}"),
                ));
                continue 'docs;
            }
        }
        if filter.require_reference && !corpus.references.contains_key(&doc.doc_id) {
            report
                .excluded
                .push((doc.doc_id.clone(), "no reference translation".to_string()));
            continue 'docs;
        }
        kept.push(doc.clone());
    }

    let references = kept
        .iter()
        .filter_map(|d| corpus.references.get(&d.doc_id).cloned())
        .map(|r| (r.doc_id.clone(), r))
        .collect();

    (
        ParallelCorpus {
            name: corpus.name.clone(),
            documents: kept,
            references,
        },
        report,
    )
}

/// Keep the first `max_segments` segments of a document; metadata is preserved.
pub fn truncate_segments(
    doc: &SegmentedDocument,
    max_segments: usize,
) -> Result<SegmentedDocument, CorpusError> {
    if max_segments == 0 {
        return Err(CorpusError::Argument(
            "max_segments must be at least 1".to_string(),
        ));
    }
    let mut out = doc.clone();
    out.segments.truncate(max_segments);
    Ok(out)
}

/// Truncate every document and its reference in lockstep so reference
/// alignment is preserved.
pub fn truncate_corpus(
    corpus: &ParallelCorpus,
    max_segments: usize,
) -> Result<ParallelCorpus, CorpusError> {
    if max_segments == 0 {
        return Err(CorpusError::Argument(
            "max_segments must be at least 1".to_string(),
        ));
    }
    let documents = corpus
        .documents
        .iter()
        .map(|d| truncate_segments(d, max_segments))
        .collect::<Result<Vec<_>, _>>()?;
    let references = corpus
        .references
        .iter()
        .map(|(id, r)| {
            let mut r = r.clone();
            r.segments.truncate(max_segments);
            (id.clone(), r)
        })
        .collect();
    Ok(ParallelCorpus {
        name: corpus.name.clone(),
        documents,
        references,
    })
}

/// Naive segment splitter for local fixtures. Paragraphs split on blank
/// lines, sentences on a period followed by whitespace, turns on line breaks.
/// Upstream corpora are expected to arrive already segmented.
pub fn split_segments(text: &str, granularity: Granularity) -> Vec<String> {
    match granularity {
        Granularity::Paragraph => text
            .split("\n\n")
            .map(|block| block.trim().to_string())
            .filter(|block| !block.is_empty())
            .collect(),
        Granularity::Turn => text
            .lines()
            .map(|l| l.trim().to_string())
            .filter(|l| !l.is_empty())
            .collect(),
        Granularity::Sentence => {
            let mut out = Vec::new();
            let mut current = String::new();
            let mut chars = text.chars().peekable();
            while let Some(c) = chars.next() {
                current.push(c);
                if c == '.' && chars.peek().map(|n| n.is_whitespace()).unwrap_or(false) {
                    let s = current.trim().to_string();
                    if !s.is_empty() {
                        out.push(s);
                    }
                    current.clear();
                }
            }
            let s = current.trim().to_string();
            if !s.is_empty() {
                out.push(s);
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(id: &str, segments: &[&str]) -> SegmentedDocument {
        SegmentedDocument {
            doc_id: id.to_string(),
            language: "Santali".to_string(),
            granularity: Granularity::Paragraph,
            segments: segments.iter().map(|s| s.to_string()).collect(),
            metadata: BTreeMap::new(),
        }
    }

    fn reference(id: &str, segments: &[&str]) -> SegmentedTranslation {
        SegmentedTranslation {
            doc_id: id.to_string(),
            translator_id: "reference".to_string(),
            segments: segments.iter().map(|s| s.to_string()).collect(),
            flags: Vec::new(),
        }
    }

    fn two_doc_corpus() -> ParallelCorpus {
        let mut references = BTreeMap::new();
        references.insert("a".to_string(), reference("a", &["one", "two"]));
        references.insert("b".to_string(), reference("b", &["uno", "dos", "tres"]));
        ParallelCorpus {
            name: "fixture".to_string(),
            documents: vec![doc("a", &["s1", "s2"]), doc("b", &["t1", "t2", "t3"])],
            references,
        }
    }

    #[test]
    fn round_trips_two_documents_with_references() {
        let corpus = two_doc_corpus();
        let text = corpus_to_string(&corpus);
        let lines: Vec<String> = text.lines().map(String::from).collect();
        let reloaded = corpus_from_lines(&lines, "fixture".to_string()).unwrap();
        assert_eq!(reloaded.documents.len(), 2);
        assert_eq!(reloaded.references.len(), 2);
        assert_eq!(reloaded, corpus);
        assert_eq!(corpus_to_string(&reloaded), text);
    }

    #[test]
    fn rejects_reference_without_document() {
        let lines = vec![
            r#"{"kind":"doc","doc_id":"a","language":"x","granularity":"paragraph","segments":["s"],"metadata":{}}"#.to_string(),
            r#"{"kind":"ref","doc_id":"missing","translator_id":"reference","segments":["s"]}"#.to_string(),
        ];
        let err = corpus_from_lines(&lines, "t".to_string()).unwrap_err();
        assert!(matches!(err, CorpusError::Validation { line: 2, .. }), "{err}");
    }

    #[test]
    fn rejects_empty_segment_list() {
        let lines = vec![
            r#"{"kind":"doc","doc_id":"a","language":"x","granularity":"paragraph","segments":[],"metadata":{}}"#.to_string(),
        ];
        let err = corpus_from_lines(&lines, "t".to_string()).unwrap_err();
        assert!(matches!(err, CorpusError::Validation { line: 1, .. }), "{err}");
    }

    #[test]
    fn rejects_duplicate_doc_id() {
        let line = r#"{"kind":"doc","doc_id":"a","language":"x","granularity":"paragraph","segments":["s"],"metadata":{}}"#;
        let lines = vec![line.to_string(), line.to_string()];
        let err = corpus_from_lines(&lines, "t".to_string()).unwrap_err();
        assert!(matches!(err, CorpusError::Validation { line: 2, .. }), "{err}");
    }

    #[test]
    fn rejects_mismatched_reference_length() {
        let lines = vec![
            r#"{"kind":"doc","doc_id":"a","language":"x","granularity":"paragraph","segments":["s","t"],"metadata":{}}"#.to_string(),
            r#"{"kind":"ref","doc_id":"a","translator_id":"reference","segments":["s"]}"#.to_string(),
        ];
        let err = corpus_from_lines(&lines, "t".to_string()).unwrap_err();
        assert!(matches!(err, CorpusError::Validation { line: 2, .. }), "{err}");
    }

    #[test]
    fn parse_error_names_line() {
        let lines = vec!["not json".to_string()];
        let err = corpus_from_lines(&lines, "t".to_string()).unwrap_err();
        assert!(matches!(err, CorpusError::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn min_chars_excludes_document_below_threshold() {
        let mut corpus = two_doc_corpus();
        corpus.documents[0]
            .metadata
            .insert("char_count".to_string(), "2999".to_string());
        corpus.documents[1]
            .metadata
            .insert("char_count".to_string(), "3000".to_string());
        let filter = ArticleFilter {
            min_chars: 3000,
            ..ArticleFilter::default()
        };
        let (filtered, report) = filter_articles(&corpus, &filter);
        assert_eq!(filtered.documents.len(), 1);
        assert_eq!(filtered.documents[0].doc_id, "b");
        assert_eq!(report.excluded.len(), 1);
        assert_eq!(report.excluded[0].0, "a");
    }

    #[test]
    fn cutoff_date_excludes_earlier_documents() {
        let mut corpus = two_doc_corpus();
        corpus.documents[0]
            .metadata
            .insert("creation_date".to_string(), "2024-05-31".to_string());
        corpus.documents[1]
            .metadata
            .insert("creation_date".to_string(), "2024-06-01".to_string());
        let filter = ArticleFilter {
            cutoff_date: Some(NaiveDate::from_ymd_opt(2024, 6, 1).unwrap()),
            ..ArticleFilter::default()
        };
        let (filtered, report) = filter_articles(&corpus, &filter);
        assert_eq!(filtered.documents.len(), 1);
        assert_eq!(filtered.documents[0].doc_id, "b");
        assert_eq!(report.excluded[0].0, "a");
    }

    #[test]
    fn missing_creation_date_is_reported_not_fatal() {
        let corpus = two_doc_corpus();
        let filter = ArticleFilter {
            cutoff_date: Some(NaiveDate::from_ymd_opt(2024, 6, 1).unwrap()),
            ..ArticleFilter::default()
        };
        let (filtered, report) = filter_articles(&corpus, &filter);
        assert!(filtered.documents.is_empty());
        assert_eq!(report.excluded.len(), 2);
        assert!(report.excluded.iter().all(|(_, r)| r.contains("missing")));
    }

    #[test]
    fn vacuous_filter_is_identity() {
        let corpus = two_doc_corpus();
        let (filtered, report) = filter_articles(&corpus, &ArticleFilter::default());
        assert_eq!(filtered, corpus);
        assert!(report.excluded.is_empty());
    }

    #[test]
    fn filter_is_idempotent() {
        let mut corpus = two_doc_corpus();
        corpus.documents[0]
            .metadata
            .insert("char_count".to_string(), "10".to_string());
        let filter = ArticleFilter {
            min_chars: 5,
            require_reference: true,
            ..ArticleFilter::default()
        };
        let (once, _) = filter_articles(&corpus, &filter);
        let (twice, report) = filter_articles(&once, &filter);
        assert_eq!(once, twice);
        assert!(report.excluded.is_empty());
    }

    #[test]
    fn char_count_computed_from_segments_when_absent() {
        let corpus = ParallelCorpus {
            name: "t".to_string(),
            documents: vec![doc("a", &["abcd", "ef"])],
            references: BTreeMap::new(),
        };
        let (kept, _) = filter_articles(
            &corpus,
            &ArticleFilter {
                min_chars: 6,
                ..ArticleFilter::default()
            },
        );
        assert_eq!(kept.documents.len(), 1);
        let (dropped, report) = filter_articles(
            &corpus,
            &ArticleFilter {
                min_chars: 7,
                ..ArticleFilter::default()
            },
        );
        assert!(dropped.documents.is_empty());
        assert!(report.excluded[0].1.contains("char_count 6"));
    }

    #[test]
    fn truncate_keeps_leading_segments() {
        let d = doc("a", &["1", "2", "3", "4", "5", "6", "7", "8", "9", "10"]);
        let t = truncate_segments(&d, 6).unwrap();
        assert_eq!(t.segments, vec!["1", "2", "3", "4", "5", "6"]);
        assert_eq!(t.doc_id, d.doc_id);
    }

    #[test]
    fn truncate_is_identity_when_short() {
        let d = doc("a", &["1", "2", "3"]);
        assert_eq!(truncate_segments(&d, 6).unwrap(), d);
    }

    #[test]
    fn truncate_to_single_segment() {
        let d = doc("a", &["1", "2", "3", "4", "5", "6"]);
        assert_eq!(truncate_segments(&d, 1).unwrap().segments, vec!["1"]);
    }

    #[test]
    fn truncate_zero_is_an_argument_error() {
        let d = doc("a", &["1"]);
        assert!(matches!(
            truncate_segments(&d, 0),
            Err(CorpusError::Argument(_))
        ));
    }

    #[test]
    fn splitter_paragraphs_sentences_turns() {
        assert_eq!(
            split_segments("One block.\n\nTwo block.\n\nThree.", Granularity::Paragraph),
            vec!["One block.", "Two block.", "Three."]
        );
        assert_eq!(
            split_segments("First one. Second one. Third", Granularity::Sentence),
            vec!["First one.", "Second one.", "Third"]
        );
        assert_eq!(
            split_segments("a\nb\n\nc\n", Granularity::Turn),
            vec!["a", "b", "c"]
        );
    }
}
