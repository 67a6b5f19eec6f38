//! Per-document scores: the shuffle metric (exact or Monte Carlo) and the
//! reference-based baseline it is validated against.
//!
//! The shuffle score is the fraction of bias-corrected comparisons in which
//! the translation's original segment order was preferred over a permutation,
//! i.e. one minus the shuffle loss. Exact mode compares against every
//! non-identity permutation (k within the enumeration ceiling); Monte Carlo
//! mode samples permutations uniformly with replacement, which keeps the
//! estimator unbiased.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::{Backend, BackendError};
use crate::corpus::SegmentedTranslation;
use crate::judge::{judge_pair, JudgeError, JudgeVerdict, OrderingPair};
use crate::permute::{enumerate_nonidentity, sample_nonidentity, PermuteError, SegmentPermutation};

/// Ten sampled permutations judged twice each: twenty evaluations per
/// segment-level translation.
pub const DEFAULT_N_SAMPLES: usize = 10;

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error("shuffle scoring undefined for single-segment documents ('{doc_id}' has k={k})")]
    TooFewSegments { doc_id: String, k: usize },
    #[error("monte_carlo mode needs n_samples >= 1")]
    ZeroSamples,
    #[error(transparent)]
    Permute(#[from] PermuteError),
    #[error("scoring '{doc_id}' failed after {} verdicts: {source}", partial.len())]
    Judging {
        doc_id: String,
        partial: Vec<(SegmentPermutation, JudgeVerdict)>,
        #[source]
        source: Box<JudgeError>,
    },
    #[error("baseline doc_id mismatch: reference '{reference}' vs candidate '{candidate}'")]
    DocIdMismatch { reference: String, candidate: String },
    #[error("baseline reply never parsed as an integer: {raw:?}")]
    UnparseableBaseline { raw: String },
    #[error(transparent)]
    Backend(#[from] BackendError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreMode {
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone)]
pub struct ScoreOptions {
    pub mode: ScoreMode,
    pub n_samples: usize,
    pub seed: u64,
    /// Short description of the source interpolated into the judging prompt,
    /// e.g. "a Wikipedia article".
    pub source_description: String,
}

impl Default for ScoreOptions {
    fn default() -> Self {
        ScoreOptions {
            mode: ScoreMode::MonteCarlo,
            n_samples: DEFAULT_N_SAMPLES,
            seed: 0,
            source_description: "a text".to_string(),
        }
    }
}

/// Shuffle-metric outcome for one (document, translator) pair.
#[derive(Debug, Clone, Serialize)]
pub struct ShufflEvalResult {
    pub doc_id: String,
    pub translator_id: String,
    /// Fraction of comparisons preferring the original order, in [0, 1].
    pub score: f64,
    pub mode: ScoreMode,
    pub n_permutations: usize,
    pub verdicts: Vec<(SegmentPermutation, JudgeVerdict)>,
    /// Sampling seed; present only in monte_carlo mode.
    pub seed: Option<u64>,
}

impl ShufflEvalResult {
    /// Number of raw calls that fell back to 0.5 after parse failures.
    pub fn degraded_calls(&self) -> usize {
        self.verdicts
            .iter()
            .flat_map(|(_, v)| v.calls.iter())
            .filter(|c| c.fallback)
            .count()
    }

    /// The loss orientation used by the theory: 1 - score.
    pub fn shuffle_loss(&self) -> f64 {
        1.0 - self.score
    }
}

/// Score one translation by judging its original order against permutations.
pub fn shuffleval_score(
    translation: &SegmentedTranslation,
    backend: &Backend,
    opts: &ScoreOptions,
) -> Result<ShufflEvalResult, ScoreError> {
    let k = translation.k();
    if k < 2 {
        return Err(ScoreError::TooFewSegments {
            doc_id: translation.doc_id.clone(),
            k,
        });
    }
    let (permutations, seed) = match opts.mode {
        ScoreMode::Exact => (enumerate_nonidentity(k)?, None),
        ScoreMode::MonteCarlo => {
            if opts.n_samples == 0 {
                return Err(ScoreError::ZeroSamples);
            }
            (
                sample_nonidentity(k, opts.n_samples, opts.seed)?,
                Some(opts.seed),
            )
        }
    };

    let mut verdicts = Vec::with_capacity(permutations.len());
    for perm in permutations {
        let permuted = perm.apply(&translation.segments)?;
        let pair = match OrderingPair::new(
            translation.segments.clone(),
            permuted,
            opts.source_description.clone(),
        ) {
            Ok(pair) => pair,
            Err(e) => {
                return Err(ScoreError::Judging {
                    doc_id: translation.doc_id.clone(),
                    partial: verdicts,
                    source: Box::new(e),
                })
            }
        };
        match judge_pair(&pair, backend) {
            Ok(verdict) => verdicts.push((perm, verdict)),
            Err(e) => {
                return Err(ScoreError::Judging {
                    doc_id: translation.doc_id.clone(),
                    partial: verdicts,
                    source: Box::new(e),
                })
            }
        }
    }

    let score = verdicts.iter().map(|(_, v)| v.preference).sum::<f64>() / verdicts.len() as f64;
    Ok(ShufflEvalResult {
        doc_id: translation.doc_id.clone(),
        translator_id: translation.translator_id.clone(),
        score,
        mode: opts.mode,
        n_permutations: verdicts.len(),
        verdicts,
        seed,
    })
}

/// Reference-based 0-100 quality score for one candidate translation.
#[derive(Debug, Clone, Serialize)]
pub struct BaselineResult {
    pub doc_id: String,
    pub translator_id: String,
    pub score: u32,
    pub raw_reply: String,
    /// Reply was an out-of-range integer and got clamped into [0, 100].
    pub clamped: bool,
}

/// Render the reference-based judging prompt; segments join with blank lines.
pub fn render_baseline_prompt(
    reference: &SegmentedTranslation,
    candidate: &SegmentedTranslation,
) -> Result<String, ScoreError> {
    if reference.doc_id != candidate.doc_id {
        return Err(ScoreError::DocIdMismatch {
            reference: reference.doc_id.clone(),
            candidate: candidate.doc_id.clone(),
        });
    }
    Ok(format!(
        "Score the following translation on a continuous scale 0 to 100 where score of zero means \"no meaning preserved\" and score of one hundred means \"perfect meaning and grammar\".\n\
\n\
<HUMAN_REFERENCE>\n\
{}\n\
</HUMAN_REFERENCE>\n\
\n\
<MACHINE_TRANSLATION>\n\
{}\n\
</MACHINE_TRANSLATION>\n\
\n\
Just output an integer score between 0 and 100, inclusive, and nothing else.",
        reference.segments.join("\n\n"),
        candidate.segments.join("\n\n"),
    ))
}

fn parse_integer_reply(reply: &str) -> Option<i64> {
    reply.trim().parse::<i64>().ok()
}

/// Single judged call scoring `candidate` against `reference`. Replies that
/// never parse as an integer are an error (the baseline is the ground-truth
/// side; silent degradation is unacceptable); out-of-range integers clamp
/// with a flag.
pub fn baseline_score(
    reference: &SegmentedTranslation,
    candidate: &SegmentedTranslation,
    backend: &Backend,
) -> Result<BaselineResult, ScoreError> {
    let prompt = render_baseline_prompt(reference, candidate)?;
    let mut reply = backend.complete(&prompt)?;
    let mut parsed = parse_integer_reply(&reply);
    let mut attempts = 0;
    while parsed.is_none() && attempts < backend.max_retries() {
        match backend.complete_uncached(&prompt) {
            Ok(fresh) => {
                reply = fresh;
                parsed = parse_integer_reply(&reply);
            }
            Err(_) => break,
        }
        attempts += 1;
    }
    let value = parsed.ok_or(ScoreError::UnparseableBaseline { raw: reply.clone() })?;
    let clamped = !(0..=100).contains(&value);
    Ok(BaselineResult {
        doc_id: candidate.doc_id.clone(),
        translator_id: candidate.translator_id.clone(),
        score: value.clamp(0, 100) as u32,
        raw_reply: reply,
        clamped,
    })
}

/// One line of the score-record wire format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub doc_id: String,
    pub translator_id: String,
    pub metric: String,
    pub score: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<ScoreMode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_permutations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub flags: Vec<String>,
}

impl ScoreRecord {
    pub fn from_shuffleval(result: &ShufflEvalResult, translation_flags: &[String]) -> Self {
        let mut flags = Vec::new();
        let degraded = result.degraded_calls();
        if degraded > 0 {
            flags.push(format!("degraded_calls:{degraded}"));
        }
        if !translation_flags.is_empty() {
            flags.push("flagged_translation".to_string());
        }
        ScoreRecord {
            doc_id: result.doc_id.clone(),
            translator_id: result.translator_id.clone(),
            metric: "shuffleval".to_string(),
            score: result.score,
            mode: Some(result.mode),
            n_permutations: Some(result.n_permutations),
            seed: result.seed,
            flags,
        }
    }

    pub fn from_baseline(result: &BaselineResult, translation_flags: &[String]) -> Self {
        let mut flags = Vec::new();
        if result.clamped {
            flags.push("clamped".to_string());
        }
        if !translation_flags.is_empty() {
            flags.push("flagged_translation".to_string());
        }
        ScoreRecord {
            doc_id: result.doc_id.clone(),
            translator_id: result.translator_id.clone(),
            metric: "baseline".to_string(),
            score: result.score as f64,
            mode: None,
            n_permutations: None,
            seed: None,
            flags,
        }
    }
}

pub fn records_to_string(records: &[ScoreRecord]) -> String {
    let mut out = String::new();
    for record in records {
        out.push_str(&serde_json::to_string(record).expect("score record serializes"));
        out.push('\n');
    }
    out
}

pub fn load_score_records(path: impl AsRef<std::path::Path>) -> std::io::Result<Vec<ScoreRecord>> {
    let content = std::fs::read_to_string(path)?;
    let mut records = Vec::new();
    for (idx, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: ScoreRecord = serde_json::from_str(line).map_err(|e| {
            std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                format!("line {}: {e}", idx + 1),
            )
        })?;
        records.push(record);
    }
    Ok(records)
}
