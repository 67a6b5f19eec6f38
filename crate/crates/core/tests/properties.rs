//! Property tests for the structural invariants: permutation algebra, corpus
//! round-trips, filter monotonicity, and verdict arithmetic.

use std::collections::BTreeMap;

use proptest::prelude::*;

use shuffleval::analysis::pearson;
use shuffleval::backend::{Backend, BackendConfig, BackendError, CompletionBackend, CompletionRequest};
use shuffleval::corpus::{
    corpus_from_lines, corpus_to_string, filter_articles, truncate_segments, ArticleFilter,
    Granularity, ParallelCorpus, SegmentedDocument, SegmentedTranslation,
};
use shuffleval::judge::{judge_pair, OrderingPair};
use shuffleval::permute::{enumerate_nonidentity, sample_nonidentity, SegmentPermutation};

fn segment_strategy() -> impl Strategy<Value = String> {
    "[a-z]{1,8}( [a-z]{1,8}){0,2}"
}

fn document_strategy(index: usize) -> impl Strategy<Value = SegmentedDocument> {
    (
        prop::collection::vec(segment_strategy(), 1..6),
        prop::collection::btree_map("[a-z_]{1,10}", "[a-z0-9-]{0,12}", 0..3),
    )
        .prop_map(move |(segments, metadata)| SegmentedDocument {
            doc_id: format!("doc-{index}"),
            language: "testlang".to_string(),
            granularity: Granularity::Paragraph,
            segments,
            metadata,
        })
}

fn corpus_strategy() -> impl Strategy<Value = ParallelCorpus> {
    prop::collection::vec(any::<bool>(), 1..6)
        .prop_flat_map(|with_ref| {
            let docs: Vec<_> = with_ref
                .iter()
                .enumerate()
                .map(|(i, _)| document_strategy(i))
                .collect();
            (docs, Just(with_ref))
        })
        .prop_map(|(documents, with_ref)| {
            let mut references = BTreeMap::new();
            for (doc, has_ref) in documents.iter().zip(&with_ref) {
                if *has_ref {
                    references.insert(
                        doc.doc_id.clone(),
                        SegmentedTranslation {
                            doc_id: doc.doc_id.clone(),
                            translator_id: "reference".to_string(),
                            segments: doc.segments.iter().map(|s| format!("en {s}")).collect(),
                            flags: vec![],
                        },
                    );
                }
            }
            ParallelCorpus {
                name: "prop".to_string(),
                documents,
                references,
            }
        })
}

proptest! {
    #[test]
    fn sampled_permutations_are_never_the_identity(
        k in 2usize..9,
        n in 1usize..30,
        seed in any::<u64>(),
    ) {
        for perm in sample_nonidentity(k, n, seed).unwrap() {
            prop_assert!(perm.mapping().iter().enumerate().any(|(i, &m)| i != m));
            prop_assert_eq!(perm.k(), k);
        }
    }

    #[test]
    fn apply_preserves_the_segment_multiset(
        segments in prop::collection::vec(segment_strategy(), 2..8),
        seed in any::<u64>(),
    ) {
        let perm = &sample_nonidentity(segments.len(), 1, seed).unwrap()[0];
        let permuted = perm.apply(&segments).unwrap();
        let mut lhs = segments.clone();
        let mut rhs = permuted.clone();
        lhs.sort();
        rhs.sort();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn inverse_composition_is_the_identity(
        segments in prop::collection::vec(segment_strategy(), 2..8),
        seed in any::<u64>(),
    ) {
        let perm = &sample_nonidentity(segments.len(), 1, seed).unwrap()[0];
        let round_trip = perm.apply(&perm.inverse().apply(&segments).unwrap()).unwrap();
        prop_assert_eq!(round_trip, segments);
    }

    #[test]
    fn identical_inputs_produce_identical_sample_sequences(
        k in 2usize..8,
        n in 1usize..20,
        seed in any::<u64>(),
    ) {
        prop_assert_eq!(
            sample_nonidentity(k, n, seed).unwrap(),
            sample_nonidentity(k, n, seed).unwrap()
        );
    }

    #[test]
    fn corpus_serialization_round_trips(corpus in corpus_strategy()) {
        let text = corpus_to_string(&corpus);
        let lines: Vec<String> = text.lines().map(String::from).collect();
        let reloaded = corpus_from_lines(&lines, corpus.name.clone()).unwrap();
        prop_assert_eq!(&reloaded, &corpus);
        prop_assert_eq!(corpus_to_string(&reloaded), text);
    }

    #[test]
    fn stronger_filters_yield_subsets(
        corpus in corpus_strategy(),
        min_chars in 0u64..40,
    ) {
        let weak = ArticleFilter { min_chars, ..ArticleFilter::default() };
        let strong = ArticleFilter {
            min_chars: min_chars + 5,
            require_reference: true,
            ..ArticleFilter::default()
        };
        let (weak_out, _) = filter_articles(&corpus, &weak);
        let (strong_out, _) = filter_articles(&corpus, &strong);
        let weak_ids: Vec<&String> = weak_out.documents.iter().map(|d| &d.doc_id).collect();
        for doc in &strong_out.documents {
            prop_assert!(weak_ids.contains(&&doc.doc_id));
        }
        // Idempotence of the weak filter.
        let (again, report) = filter_articles(&weak_out, &weak);
        prop_assert_eq!(again, weak_out);
        prop_assert!(report.excluded.is_empty());
    }

    #[test]
    fn truncation_yields_a_prefix(
        doc in document_strategy(0),
        max in 1usize..8,
    ) {
        let truncated = truncate_segments(&doc, max).unwrap();
        prop_assert!(truncated.segments.len() <= max);
        prop_assert_eq!(
            &doc.segments[..truncated.segments.len()],
            truncated.segments.as_slice()
        );
        prop_assert_eq!(&truncated.metadata, &doc.metadata);
    }

    #[test]
    fn enumeration_agrees_with_sampling_support(k in 2usize..6) {
        // Every sampled permutation appears in the enumeration.
        let all = enumerate_nonidentity(k).unwrap();
        for perm in sample_nonidentity(k, 20, 7).unwrap() {
            prop_assert!(all.contains(&perm));
        }
    }

    #[test]
    fn verdicts_of_deterministic_parseable_judges_are_half_integers(
        segments in prop::collection::vec(segment_strategy(), 2..6),
        seed in any::<u64>(),
        parity in any::<bool>(),
    ) {
        struct ParityChooser(bool);
        impl CompletionBackend for ParityChooser {
            fn id(&self) -> &'static str { "parity" }
            fn complete(&self, r: &CompletionRequest<'_>) -> Result<String, BackendError> {
                let sum: u64 = r.prompt.bytes().map(u64::from).sum();
                Ok(if (sum % 2 == 0) == self.0 { "1" } else { "2" }.to_string())
            }
        }
        let backend = Backend::from_parts(
            Box::new(ParityChooser(parity)),
            &BackendConfig::synthetic("parity"),
        ).unwrap();
        let perm = &sample_nonidentity(segments.len(), 1, seed).unwrap()[0];
        let pair = OrderingPair::new(
            segments.clone(),
            perm.apply(&segments).unwrap(),
            "a text",
        ).unwrap();
        let verdict = judge_pair(&pair, &backend).unwrap();
        prop_assert!([0.0, 0.5, 1.0].contains(&verdict.preference));
        let mean = (verdict.calls[0].indicator() + verdict.calls[1].indicator()) / 2.0;
        prop_assert_eq!(verdict.preference, mean);
        // Swapping the roles complements the preference.
        let swapped = judge_pair(&pair.swapped(), &backend).unwrap();
        prop_assert_eq!(verdict.preference + swapped.preference, 1.0);
    }

    #[test]
    fn pearson_sign_flips_under_negation(
        pairs in prop::collection::vec((0.0f64..10.0, 0.0f64..10.0), 3..20),
    ) {
        let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        if let Ok(r) = pearson(&xs, &ys) {
            let neg: Vec<f64> = xs.iter().map(|x| -x).collect();
            let flipped = pearson(&neg, &ys).unwrap();
            prop_assert!((r + flipped).abs() < 1e-9);
        }
    }

    #[test]
    fn permutation_mapping_constructor_accepts_only_nonidentity_bijections(
        mapping in prop::collection::vec(0usize..8, 2..8),
    ) {
        let k = mapping.len();
        let mut sorted = mapping.clone();
        sorted.sort();
        let is_bijection = sorted == (0..k).collect::<Vec<_>>();
        let is_identity = mapping.iter().enumerate().all(|(i, &m)| i == m);
        let result = SegmentPermutation::from_mapping(mapping);
        prop_assert_eq!(result.is_ok(), is_bijection && !is_identity);
    }
}
