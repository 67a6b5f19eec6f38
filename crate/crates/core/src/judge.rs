//! Pairwise plausibility judging with order-bias correction.
//!
//! A judgment asks a backend which of two orderings of the same translated
//! segments reads more coherently. Each comparison is issued twice with the
//! slots swapped and the two indicators averaged, so a judge that prefers an
//! answer by its position contributes exactly 0.5. Replies must be exactly
//! `1` or `2` after trimming; anything else is one parse failure, retried up
//! to the backend's retry budget and then scored 0.5 with a fallback flag so
//! degraded data stays visible in reports.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::{Backend, BackendError};
use crate::corpus::SegmentedDocument;
use crate::permute::{derive_seed, sample_nonidentity, PermuteError};

/// Probe runs warn when a judge's parsed choices favor one slot beyond this
/// fraction.
pub const DEFAULT_POSITION_BIAS_THRESHOLD: f64 = 0.95;

#[derive(Debug, Error)]
pub enum JudgeError {
    #[error("invalid ordering pair: {0}")]
    InvalidPair(String),
    #[error("document '{doc_id}' has {k} segment(s); judging needs at least 2")]
    TooFewSegments { doc_id: String, k: usize },
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Permute(#[from] PermuteError),
}

/// Two orderings of the same target-language segments.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderingPair {
    original: Vec<String>,
    permuted: Vec<String>,
    source_description: String,
}

impl OrderingPair {
    pub fn new(
        original: Vec<String>,
        permuted: Vec<String>,
        source_description: impl Into<String>,
    ) -> Result<Self, JudgeError> {
        if original.len() < 2 {
            return Err(JudgeError::InvalidPair(format!(
                "orderings need at least 2 segments, got {}",
                original.len()
            )));
        }
        if original.len() != permuted.len() {
            return Err(JudgeError::InvalidPair(format!(
                "orderings differ in length: {} vs {}",
                original.len(),
                permuted.len()
            )));
        }
        let mut a = original.clone();
        let mut b = permuted.clone();
        a.sort();
        b.sort();
        if a != b {
            return Err(JudgeError::InvalidPair(
                "orderings are not permutations of the same segments".to_string(),
            ));
        }
        Ok(OrderingPair {
            original,
            permuted,
            source_description: source_description.into(),
        })
    }

    pub fn original(&self) -> &[String] {
        &self.original
    }

    pub fn permuted(&self) -> &[String] {
        &self.permuted
    }

    pub fn source_description(&self) -> &str {
        &self.source_description
    }

    /// The same pair with the original/permuted roles exchanged.
    pub fn swapped(&self) -> OrderingPair {
        OrderingPair {
            original: self.permuted.clone(),
            permuted: self.original.clone(),
            source_description: self.source_description.clone(),
        }
    }
}

/// Render the judging prompt; the original ordering goes in slot 1 iff
/// `first_is_original`. Segments are joined with a blank line.
pub fn render_shuffle_prompt(pair: &OrderingPair, first_is_original: bool) -> String {
    let (first, second) = if first_is_original {
        (&pair.original, &pair.permuted)
    } else {
        (&pair.permuted, &pair.original)
    };
    format!(
        "We have a (possibly poor) English translation of {}, broken into segments. To make matters worse, we are not certain what order the segments should be in.\n\
\n\
Below are two orderings of the segments.\n\
Decide which ordering reads more natural and coherent.\n\
Reply with '1' or '2' only.\n\
\n\
<ORDERING1>\n\
{}\n\
</ORDERING1>\n\
\n\
<ORDERING2>\n\
{}\n\
</ORDERING2>",
        pair.source_description,
        first.join("\n\n"),
        second.join("\n\n"),
    )
}

/// Strict reply parsing: exactly `1` or `2` after whitespace trimming.
pub fn parse_choice(reply: &str) -> Option<u8> {
    match reply.trim() {
        "1" => Some(1),
        "2" => Some(2),
        _ => None,
    }
}

/// One of the two raw calls behind a verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawJudgeCall {
    /// Whether the original ordering occupied slot 1 in this call.
    pub original_first: bool,
    pub reply: String,
    pub parsed_choice: Option<u8>,
    /// True when the reply never parsed and the call fell back to 0.5.
    pub fallback: bool,
}

impl RawJudgeCall {
    /// 1.0 when this call preferred the original ordering, 0.0 when it
    /// preferred the permuted one, 0.5 on fallback.
    pub fn indicator(&self) -> f64 {
        match (self.parsed_choice, self.original_first) {
            (Some(1), true) | (Some(2), false) => 1.0,
            (Some(_), _) => 0.0,
            (None, _) => 0.5,
        }
    }
}

/// Bias-corrected pairwise preference: mean of the two call indicators.
/// Without fallbacks this lies in {0, 0.5, 1}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgeVerdict {
    pub preference: f64,
    pub calls: [RawJudgeCall; 2],
}

impl JudgeVerdict {
    pub fn degraded(&self) -> bool {
        self.calls.iter().any(|c| c.fallback)
    }
}

fn judged_call(
    pair: &OrderingPair,
    first_is_original: bool,
    backend: &Backend,
) -> Result<RawJudgeCall, JudgeError> {
    let prompt = render_shuffle_prompt(pair, first_is_original);
    let mut reply = backend.complete(&prompt)?;
    let mut parsed = parse_choice(&reply);
    let mut attempts = 0;
    while parsed.is_none() && attempts < backend.max_retries() {
        match backend.complete_uncached(&prompt) {
            Ok(fresh) => {
                reply = fresh;
                parsed = parse_choice(&reply);
            }
            // A refresh that cannot be served (offline, exhausted) leaves the
            // unparseable reply in place; fall through to the 0.5 fallback.
            Err(_) => break,
        }
        attempts += 1;
    }
    Ok(RawJudgeCall {
        original_first: first_is_original,
        reply,
        parsed_choice: parsed,
        fallback: parsed.is_none(),
    })
}

/// Judge a pair with order-bias correction: one call per slot assignment,
/// indicators averaged.
pub fn judge_pair(pair: &OrderingPair, backend: &Backend) -> Result<JudgeVerdict, JudgeError> {
    let first = judged_call(pair, true, backend)?;
    let second = judged_call(pair, false, backend)?;
    let preference = (first.indicator() + second.indicator()) / 2.0;
    Ok(JudgeVerdict {
        preference,
        calls: [first, second],
    })
}

/// Reference pairwise choice used by the synthetic judge: 1 iff the first
/// ordering scores strictly higher coherence; ties go to slot 1, a deliberate
/// fixed position bias that the two-call averaging must cancel.
pub fn oracle_judge<F>(ordering1: &[String], ordering2: &[String], coherence: F) -> u8
where
    F: Fn(&[String]) -> f64,
{
    if coherence(ordering2) > coherence(ordering1) {
        2
    } else {
        1
    }
}

/// Coherence of a segment list under the ascending-tag convention: the number
/// of adjacent segment pairs whose leading integer tags strictly ascend.
/// Segments without a digit run contribute no ascending pair.
pub fn ascending_tag_coherence(segments: &[String]) -> f64 {
    fn tag(segment: &str) -> Option<i64> {
        let start = segment.find(|c: char| c.is_ascii_digit())?;
        let digits: String = segment[start..]
            .chars()
            .take_while(|c| c.is_ascii_digit())
            .collect();
        digits.parse().ok()
    }
    segments
        .windows(2)
        .filter(|w| matches!((tag(&w[0]), tag(&w[1])), (Some(a), Some(b)) if a < b))
        .count() as f64
}

/// Outcome of the no-translation sanity probe: how often the backend
/// distinguishes a document's original segment order from sampled
/// permutations of it.
#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub accuracy: f64,
    /// Fraction of parsed calls that chose slot 1.
    pub slot_one_fraction: f64,
    pub n_documents: usize,
    pub n_verdicts: usize,
    pub bias_threshold: f64,
}

impl ProbeReport {
    /// Largest single-slot share of the parsed choices.
    pub fn position_bias(&self) -> f64 {
        self.slot_one_fraction.max(1.0 - self.slot_one_fraction)
    }

    pub fn position_bias_flagged(&self) -> bool {
        self.position_bias() > self.bias_threshold
    }
}

/// Judge each document's own segments (treated as target-language text)
/// against `n_perms` sampled permutations and return the mean preference.
pub fn judge_accuracy_probe(
    documents: &[SegmentedDocument],
    backend: &Backend,
    n_perms: usize,
    seed: u64,
) -> Result<ProbeReport, JudgeError> {
    let mut preferences = Vec::new();
    let mut slot_one = 0usize;
    let mut parsed_calls = 0usize;
    for (idx, doc) in documents.iter().enumerate() {
        if doc.k() < 2 {
            return Err(JudgeError::TooFewSegments {
                doc_id: doc.doc_id.clone(),
                k: doc.k(),
            });
        }
        let doc_seed = derive_seed(seed, idx as u64);
        for perm in sample_nonidentity(doc.k(), n_perms, doc_seed)? {
            let permuted = perm.apply(&doc.segments)?;
            let pair = OrderingPair::new(doc.segments.clone(), permuted, "a text")?;
            let verdict = judge_pair(&pair, backend)?;
            preferences.push(verdict.preference);
            for call in &verdict.calls {
                if let Some(choice) = call.parsed_choice {
                    parsed_calls += 1;
                    if choice == 1 {
                        slot_one += 1;
                    }
                }
            }
        }
    }
    let accuracy = preferences.iter().sum::<f64>() / preferences.len().max(1) as f64;
    Ok(ProbeReport {
        accuracy,
        slot_one_fraction: if parsed_calls > 0 {
            slot_one as f64 / parsed_calls as f64
        } else {
            0.0
        },
        n_documents: documents.len(),
        n_verdicts: preferences.len(),
        bias_threshold: DEFAULT_POSITION_BIAS_THRESHOLD,
    })
}
