//! Deterministic synthetic strategies.
//!
//! These recognize the toolkit's own prompt shapes and answer them without a
//! network: the judge prompt is answered by the ascending-tag coherence rule,
//! the baseline prompt by token overlap, translation prompts by echoing the
//! source, and the conlang-pipeline prompts by fabricating structurally valid
//! output (with one planted translation leak so scrubbing is exercised
//! end-to-end). A full pipeline run against them is reproducible bit for bit.

use sha2::{Digest, Sha256};

use super::{BackendError, CompletionBackend, CompletionRequest};
use crate::judge::{ascending_tag_coherence, oracle_judge};

/// Full-pipeline synthetic oracle keyed on prompt shape.
pub struct AscendingOracle;

/// Pure positional preference: replies `1` no matter what it is asked.
pub struct AlwaysFirst;

/// Replies with prose that satisfies no parser; exercises fallback paths.
pub struct GarbageReplies;

impl CompletionBackend for AlwaysFirst {
    fn id(&self) -> &'static str {
        "always-first"
    }
    fn complete(&self, _request: &CompletionRequest<'_>) -> Result<String, BackendError> {
        Ok("1".to_string())
    }
}

impl CompletionBackend for GarbageReplies {
    fn id(&self) -> &'static str {
        "garbage"
    }
    fn complete(&self, _request: &CompletionRequest<'_>) -> Result<String, BackendError> {
        Ok("I believe the first option reads best overall.".to_string())
    }
}

impl CompletionBackend for AscendingOracle {
    fn id(&self) -> &'static str {
        "ascending"
    }

    fn complete(&self, request: &CompletionRequest<'_>) -> Result<String, BackendError> {
        let prompt = request.prompt;
        if prompt.contains("<ORDERING1>") {
            return answer_judge_prompt(prompt);
        }
        if prompt.contains("<HUMAN_REFERENCE>") {
            return answer_baseline_prompt(prompt);
        }
        if prompt.starts_with("Translate the following text from") {
            return answer_translation_prompt(prompt);
        }
        if prompt.contains("Output a JSON list of") {
            return answer_ideation_prompt(prompt);
        }
        if prompt.starts_with("Create a vivid, detailed") {
            return answer_conculture_prompt(prompt);
        }
        if prompt.starts_with("Create a \"conlang\"") {
            return answer_definition_prompt(prompt);
        }
        if prompt.starts_with("Create 10 texts in the alien conlang") {
            return answer_texts_prompt(prompt);
        }
        Err(BackendError::Unsupported {
            strategy: "ascending",
            message: "unrecognized prompt shape".to_string(),
        })
    }
}

/// First `<TAG>...</TAG>` block in `text`, where the opening tag sits at the
/// start of a line.
fn first_tag_block(text: &str) -> Option<(&str, &str)> {
    for (start, _) in text.match_indices('<') {
        if start > 0 && text.as_bytes()[start - 1] != b'\n' {
            continue;
        }
        let rest = &text[start + 1..];
        let close = rest.find('>')?;
        let tag = &rest[..close];
        if tag.is_empty() || tag.starts_with('/') || !tag.bytes().all(|b| b.is_ascii_uppercase() || b == b'_' || b.is_ascii_digit()) {
            continue;
        }
        let body_start = start + 1 + close + 1;
        let closing = format!("</{tag}>");
        if let Some(rel) = text[body_start..].find(&closing) {
            let body = &text[body_start..body_start + rel];
            return Some((tag, body.trim_matches('\n')));
        }
    }
    None
}

fn named_block<'a>(text: &'a str, tag: &str) -> Option<&'a str> {
    let open = format!("<{tag}>");
    let close = format!("</{tag}>");
    let start = text.find(&open)? + open.len();
    let rel = text[start..].find(&close)?;
    Some(text[start..start + rel].trim_matches('\n'))
}

fn answer_judge_prompt(prompt: &str) -> Result<String, BackendError> {
    let ordering1 = named_block(prompt, "ORDERING1").ok_or_else(|| BackendError::Unsupported {
        strategy: "ascending",
        message: "judge prompt lacks ORDERING1".to_string(),
    })?;
    let ordering2 = named_block(prompt, "ORDERING2").ok_or_else(|| BackendError::Unsupported {
        strategy: "ascending",
        message: "judge prompt lacks ORDERING2".to_string(),
    })?;
    let split = |s: &str| -> Vec<String> { s.split("\n\n").map(String::from).collect() };
    let choice = oracle_judge(&split(ordering1), &split(ordering2), ascending_tag_coherence);
    Ok(choice.to_string())
}

fn answer_baseline_prompt(prompt: &str) -> Result<String, BackendError> {
    let reference = named_block(prompt, "HUMAN_REFERENCE").unwrap_or("");
    let candidate = named_block(prompt, "MACHINE_TRANSLATION").unwrap_or("");
    Ok(token_overlap_score(reference, candidate).to_string())
}

/// Jaccard token overlap as an integer percentage: identical texts score 100,
/// disjoint vocabulary scores 0.
fn token_overlap_score(reference: &str, candidate: &str) -> u32 {
    use std::collections::BTreeSet;
    let tokens = |s: &str| -> BTreeSet<String> {
        s.split_whitespace().map(|t| t.to_lowercase()).collect()
    };
    let a = tokens(reference);
    let b = tokens(candidate);
    if a.is_empty() && b.is_empty() {
        return 100;
    }
    let intersection = a.intersection(&b).count() as f64;
    let union = a.union(&b).count() as f64;
    (100.0 * intersection / union).round() as u32
}

fn answer_translation_prompt(prompt: &str) -> Result<String, BackendError> {
    let (_, source) = first_tag_block(prompt).ok_or_else(|| BackendError::Unsupported {
        strategy: "ascending",
        message: "translation prompt lacks a source block".to_string(),
    })?;
    if prompt.contains("is a constructed language spoken by") {
        Ok(format!("<TRANSLATION>\n{source}\n</TRANSLATION>"))
    } else {
        Ok(format!(
            "<ENGLISH_TRANSLATION>\n{source}\n</ENGLISH_TRANSLATION>"
        ))
    }
}

fn stable_hash(parts: &[&str]) -> u64 {
    let mut hasher = Sha256::new();
    for p in parts {
        hasher.update(p.as_bytes());
        hasher.update([0x1e]);
    }
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_be_bytes(bytes)
}

const NAME_STEMS: &[&str] = &[
    "Auva", "Brell", "Cyri", "Dovak", "Eshen", "Fyrel", "Goruun", "Hasli", "Ithra", "Jolve",
    "Kemra", "Lurath", "Moshen", "Nyvek", "Orlith", "Pesqua", "Quorin", "Rhavel", "Sullin",
    "Tovesh", "Ullmar", "Vrenna", "Wostel", "Yerrin", "Zhulai", "Amvek",
];

const SCRIPTS: &[&str] = &[
    "Telugu", "Ol Chiki", "Glagolitic", "Tifinagh", "Cherokee", "Vai", "Nko", "Osage",
];

const PROPERTIES: &[&str] = &[
    "they exchange memories by braiding bioluminescent filaments that later replay in the recipient",
    "their utterances travel backwards through their own digestive tract before being broadcast as polarized light",
    "each speaker hosts a chorus of symbiotic micro-organisms that voice grammatical agreement in harmony",
    "they shed crystalline scales whose fracture patterns encode the afternoon's conversations",
    "their sentences are braided from three simultaneous airstreams with independent pitch contours",
    "they taste magnetic field lines and conjugate verbs by field inclination",
    "paired speakers swap sensory organs mid-dialogue to certify that a claim was witnessed",
    "they communicate across generations by growing message-bearing rings inside their bones",
    "their language requires a second speaker to finish every word, making monologue impossible",
    "they store unfinished arguments in external mineral lattices that resume speaking when warmed",
];

fn answer_ideation_prompt(prompt: &str) -> Result<String, BackendError> {
    let n = prompt
        .split("Output a JSON list of ")
        .nth(1)
        .and_then(|rest| rest.split_whitespace().next())
        .and_then(|w| w.parse::<usize>().ok())
        .ok_or_else(|| BackendError::Unsupported {
            strategy: "ascending",
            message: "ideation prompt lacks a count".to_string(),
        })?;
    let base = stable_hash(&[prompt]) as usize;
    let mut ideas = Vec::with_capacity(n);
    for i in 0..n {
        // Walk the stem table with a stride so initial letters stay diverse.
        let stem = |offset: usize| NAME_STEMS[(base + offset) % NAME_STEMS.len()];
        let idea = serde_json::json!({
            "planet": format!("{}-{}", stem(i * 3), (base + i) % 9 + 1),
            "species": stem(i * 3 + 1),
            "language": format!("{}{}", stem(i * 3 + 2), "i"),
            "script": SCRIPTS[(base + i) % SCRIPTS.len()],
            "property": PROPERTIES[(base / 7 + i) % PROPERTIES.len()],
        });
        ideas.push(idea);
    }
    Ok(serde_json::to_string_pretty(&ideas).expect("ideas serialize"))
}

fn between<'a>(text: &'a str, start: &str, end: &str) -> Option<&'a str> {
    let s = text.find(start)? + start.len();
    let e = text[s..].find(end)?;
    Some(&text[s..s + e])
}

fn answer_conculture_prompt(prompt: &str) -> Result<String, BackendError> {
    let species = between(prompt, "for the ", " alien species").unwrap_or("Unnamed");
    let planet = between(prompt, "inhabit the planet ", ".").unwrap_or("Unnamed");
    let seed = stable_hash(&[species, planet]);
    let practices = [
        "the dawn-counting game",
        "the debt-of-echoes ritual",
        "the moulting congress",
        "the silent barter norm",
        "the tide-script apprenticeship",
    ];
    let mut out = format!(
        "The {species} of {planet} build terraced settlements along mineral veins, \
and their year is divided into {} unequal seasons named for prevailing winds.\n",
        seed % 5 + 3
    );
    for (i, practice) in practices.iter().enumerate() {
        out.push_str(&format!(
            "\nPractice {}: {practice}. Participants gather in groups of {} and repeat \
the sequence until consensus; elders adjudicate disputes by recounting the founding \
migration, and children learn the associated counting chant before their first season.\n",
            i + 1,
            (seed as usize + i) % 6 + 2
        ));
    }
    Ok(out)
}

fn answer_definition_prompt(prompt: &str) -> Result<String, BackendError> {
    let language = between(prompt, "called ", " for the ").unwrap_or("Unnamed");
    let species = between(prompt, " for the ", " aliens").unwrap_or("Unnamed");
    let seed = stable_hash(&[language, species]);
    Ok(format!(
        "{language} is spoken in interleaved strands: every clause carries a scent-marker \
prefix and a load-bearing final particle. Word order is {}-initial, and nouns decline \
for {} provenance classes. The lexicon below lists roots for water, debt, kinship, and \
tide, each with its strand variant. Conversations open with a mutual depth-call and \
close with the junior speaker repeating the senior's final particle. Meetings proceed \
in rounds of {}; interruptions are grammaticalized as a dedicated strand.",
        ["verb", "scent", "tide"][seed as usize % 3],
        seed % 4 + 3,
        seed % 5 + 2,
    ))
}

const ENGLISH_NOUNS: &[&str] = &["tide", "choir", "lattice", "river", "beacon", "archive", "molt", "vein"];
const ENGLISH_VERBS: &[&str] = &["carries", "answers", "braids", "remembers", "divides", "warms", "counts", "guards"];
const ENGLISH_TAILS: &[&str] = &[
    "before the third season",
    "across the mineral terraces",
    "at the depth-call",
    "until consensus is sung",
    "beneath the polarized dawn",
    "along the founding route",
];

const SYLLABLES: &[&str] = &[
    "qel", "vas", "tor", "uun", "shi", "mek", "ora", "dhu", "lin", "pra", "zef", "kai",
];

fn conlang_word(seed: u64, i: usize) -> String {
    let a = SYLLABLES[(seed as usize + i * 7) % SYLLABLES.len()];
    let b = SYLLABLES[(seed as usize / 13 + i * 3 + 1) % SYLLABLES.len()];
    format!("{a}{b}")
}

fn english_sentence(seed: u64, t: usize, s: usize) -> String {
    let pick = |table: &'static [&'static str], salt: usize| -> &'static str {
        table[(seed as usize + t * 31 + s * 7 + salt) % table.len()]
    };
    format!(
        "The {} {} the {} {}.",
        pick(ENGLISH_NOUNS, 0),
        pick(ENGLISH_VERBS, 1),
        pick(ENGLISH_NOUNS, 2),
        pick(ENGLISH_TAILS, 3),
    )
}

fn source_sentence(seed: u64, t: usize, s: usize) -> String {
    let words: Vec<String> = (0..4 + (t + s) % 3)
        .map(|w| conlang_word(seed, t * 97 + s * 11 + w))
        .collect();
    format!("{}.", words.join(" "))
}

fn answer_texts_prompt(prompt: &str) -> Result<String, BackendError> {
    let language = between(prompt, "alien conlang ", " spoken by").unwrap_or("Unnamed");
    let seed = stable_hash(&[prompt]);
    let mut texts = Vec::new();
    for t in 0..10 {
        let sentence_count = 6 + (t + seed as usize) % 5;
        let mut source = Vec::with_capacity(sentence_count);
        let mut english = Vec::with_capacity(sentence_count);
        for s in 0..sentence_count {
            let eng = english_sentence(seed, t, s);
            let mut src = source_sentence(seed, t, s);
            if t == 0 && s == 0 {
                // Planted leak: the source sentence embeds its own English
                // translation in parentheses, as a scrub fixture.
                src = format!(
                    "{} ({})",
                    src.trim_end_matches('.'),
                    eng.trim_end_matches('.').to_lowercase()
                );
            }
            source.push(src);
            english.push(eng);
        }
        texts.push(serde_json::json!({
            language: source,
            "English": english,
        }));
    }
    let body = serde_json::json!({
        "texts": texts,
        "additional_vocabulary": format!(
            "Roots recur across texts: {} (tide), {} (debt), {} (kin).",
            conlang_word(seed, 1),
            conlang_word(seed, 2),
            conlang_word(seed, 3)
        ),
    });
    Ok(serde_json::to_string_pretty(&body).expect("texts serialize"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn complete(prompt: &str) -> String {
        AscendingOracle
            .complete(&CompletionRequest {
                model_id: "ascending",
                prompt,
                params: &BTreeMap::new(),
            })
            .unwrap()
    }

    #[test]
    fn judges_orderings_by_ascending_tags() {
        let prompt = "judge\n\n<ORDERING1>\n1 alpha\n\n2 beta\n\n3 gamma\n</ORDERING1>\n\n<ORDERING2>\n3 gamma\n\n1 alpha\n\n2 beta\n</ORDERING2>";
        assert_eq!(complete(prompt), "1");
        let swapped = "judge\n\n<ORDERING1>\n3 gamma\n\n1 alpha\n\n2 beta\n</ORDERING1>\n\n<ORDERING2>\n1 alpha\n\n2 beta\n\n3 gamma\n</ORDERING2>";
        assert_eq!(complete(swapped), "2");
    }

    #[test]
    fn scores_identical_baseline_blocks_at_100() {
        let prompt = "score\n\n<HUMAN_REFERENCE>\nthe tide returns\n</HUMAN_REFERENCE>\n\n<MACHINE_TRANSLATION>\nthe tide returns\n</MACHINE_TRANSLATION>";
        assert_eq!(complete(prompt), "100");
        let disjoint = "score\n\n<HUMAN_REFERENCE>\nalpha beta\n</HUMAN_REFERENCE>\n\n<MACHINE_TRANSLATION>\ngamma delta\n</MACHINE_TRANSLATION>";
        assert_eq!(complete(disjoint), "0");
    }

    #[test]
    fn echoes_translation_sources() {
        let low = "Translate the following text from Santali to English:\n\n<SANTALI>\npayload here\n</SANTALI>\n\nYour output should be in the following format:\n\n<ENGLISH_TRANSLATION>\n...\n</ENGLISH_TRANSLATION>";
        assert_eq!(
            complete(low),
            "<ENGLISH_TRANSLATION>\npayload here\n</ENGLISH_TRANSLATION>"
        );
        let con = "Translate the following text from \"Talhi\" to English. Talhi is a constructed language spoken by Naruun on the planet Athiri-4.\n\n<TEXT_TO_TRANSLATE>\nqel vasu\n</TEXT_TO_TRANSLATE>\n\nrest";
        assert_eq!(complete(con), "<TRANSLATION>\nqel vasu\n</TRANSLATION>");
    }

    #[test]
    fn fabricates_requested_number_of_ideas() {
        let reply = complete("intro\n\nOutput a JSON list of 10 such objects, each with the following keys:\n\nrest");
        let ideas: Vec<serde_json::Value> = serde_json::from_str(&reply).unwrap();
        assert_eq!(ideas.len(), 10);
        for idea in &ideas {
            for key in ["planet", "species", "language", "script", "property"] {
                assert!(idea[key].as_str().map(|s| !s.is_empty()).unwrap_or(false));
            }
        }
        // Single-call ideation: planet initials should not all collide.
        let initials: std::collections::BTreeSet<char> = ideas
            .iter()
            .filter_map(|i| i["planet"].as_str().and_then(|s| s.chars().next()))
            .collect();
        assert!(initials.len() >= 4, "initials {initials:?}");
    }

    #[test]
    fn fabricates_aligned_texts_with_planted_leak() {
        let prompt = "Create 10 texts in the alien conlang Talhi spoken by Naruun, described below. rest";
        let reply = complete(prompt);
        let value: serde_json::Value = serde_json::from_str(&reply).unwrap();
        let texts = value["texts"].as_array().unwrap();
        assert_eq!(texts.len(), 10);
        for text in texts {
            let source = text["Talhi"].as_array().unwrap();
            let english = text["English"].as_array().unwrap();
            assert_eq!(source.len(), english.len());
            assert!(source.len() >= 6);
        }
        let first_src = texts[0]["Talhi"][0].as_str().unwrap();
        let first_eng = texts[0]["English"][0].as_str().unwrap();
        assert!(first_src.contains('('));
        assert!(first_src
            .to_lowercase()
            .contains(&first_eng.trim_end_matches('.').to_lowercase()));
    }

    #[test]
    fn deterministic_replies() {
        let prompt = "Create a vivid, detailed, and imaginative \u{201d}conculture\u{201d} (constructed culture) for the Naruun alien species who inhabit the planet Athiri-4.\nrest";
        assert_eq!(complete(prompt), complete(prompt));
    }
}
