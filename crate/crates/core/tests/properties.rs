//! Property suites: edit-distance laws against a full-matrix oracle,
//! scope/data-flow collectors against brute-force AST scans on generated
//! fixtures, apply-then-relocate edit safety, injective-assignment quality
//! against exhaustive search, and total parsing on arbitrary input.

mod common;

use std::collections::BTreeSet;

use codewire::collect::{
    get_available_variables, get_unused_variables, reserve_type_compatible_ones, Candidate,
    CandidateKind,
};
use codewire::complete::assign_injective;
use codewire::levenshtein;
use codewire::syntax::{lexer, parse_unit, TypeRef};
use codewire::wire::{run_task, EngineMode, WireOptions};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

// ---- levenshtein ----------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn distance_matches_dp_oracle(a in "[a-zA-Z0-9_]{0,12}", b in "[a-zA-Z0-9_]{0,12}") {
        prop_assert_eq!(levenshtein::distance(&a, &b), common::dp_distance_oracle(&a, &b));
    }

    #[test]
    fn metric_laws_hold(
        a in "[a-zA-Z0-9_]{0,12}",
        b in "[a-zA-Z0-9_]{0,12}",
        c in "[a-zA-Z0-9_]{0,12}",
    ) {
        let d = levenshtein::distance_case_insensitive;
        // symmetry
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        // identity of indiscernibles under case folding
        prop_assert_eq!(d(&a, &a.to_uppercase()), 0);
        // triangle inequality
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c));
        // normalization bounds
        let n = levenshtein::normalized_case_insensitive(&a, &b);
        prop_assert!((0.0..=1.0).contains(&n));
    }
}

// ---- generated scope fixtures ---------------------------------------------

#[test]
fn collectors_match_brute_force_oracles_on_200_fixtures() {
    for seed in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fixture = common::generate_scope_fixture(&mut rng);
        let task = common::prepare_source(&fixture.source, &[]);

        let available = get_available_variables(&task.unit, &task.table, &task.region);
        let got: BTreeSet<String> = available.iter().map(|c| c.name.clone()).collect();
        let expected: BTreeSet<String> = fixture
            .fields
            .iter()
            .chain(fixture.params.iter())
            .chain(fixture.locals_before.iter())
            .cloned()
            .collect();
        assert_eq!(
            got, expected,
            "seed {seed}: available set\n{}",
            fixture.source
        );

        for after in &fixture.locals_after {
            assert!(
                !got.contains(after),
                "seed {seed}: `{after}` declared after region leaked in"
            );
        }
        for candidate in &available {
            if candidate.kind == CandidateKind::Local {
                let span = candidate.decl_span.expect("locals carry decl spans");
                assert!(
                    span.end <= task.region.span.start,
                    "seed {seed}: local `{}` not declared before the region",
                    candidate.name
                );
            }
        }

        let unused = get_unused_variables(&task.unit, &task.table, &task.region);
        let got_unused: BTreeSet<String> = unused.iter().map(|c| c.name.clone()).collect();
        let expected_unused: BTreeSet<String> =
            expected.difference(&fixture.used_before).cloned().collect();
        assert_eq!(
            got_unused, expected_unused,
            "seed {seed}: unused set\n{}",
            fixture.source
        );

        // unused is a pointwise subset of available
        for c in &unused {
            assert!(
                available
                    .iter()
                    .any(|a| a.name == c.name && a.decl_span == c.decl_span),
                "seed {seed}: unused candidate not among available"
            );
        }
    }
}

// ---- edit safety ------------------------------------------------------------

#[test]
fn apply_then_relocate_holds_on_200_generated_fixtures() {
    let opts = WireOptions {
        mode: EngineMode::Deterministic,
        ..WireOptions::default()
    };
    for seed in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let fixture = common::generate_edit_fixture(&mut rng);
        let task = common::prepare_source(&fixture.source, &[]);
        let outcome = run_task(&task, &opts, None).unwrap();

        assert!(
            outcome.recommendation.complete,
            "seed {seed}\n{}",
            fixture.source
        );
        assert_eq!(
            outcome.recommendation.chosen_for(&fixture.unresolved),
            Some(fixture.winner.as_str()),
            "seed {seed}\n{}",
            fixture.source
        );
        assert_eq!(
            outcome.recommendation.pairs[0].element.references.len(),
            fixture.reference_count,
            "seed {seed}: reference count"
        );
        assert!(
            outcome.residual_unresolved.is_empty(),
            "seed {seed}: {:?}",
            outcome.residual_unresolved
        );

        // independent expectation: the unresolved token appears only inside
        // the region, so a plain text substitution is the exact answer
        let stripped = task.unit.text.clone();
        let expected_text = stripped.replace(&fixture.unresolved, &fixture.winner);
        assert_eq!(
            outcome.new_text, expected_text,
            "seed {seed}: byte-exact edit"
        );
    }
}

// ---- injective assignment ------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn assignment_stays_within_bound_of_optimum(
        scores in proptest::collection::vec(
            proptest::collection::vec(0.0f64..1.0, 1..=4),
            1..=4,
        )
    ) {
        // rectangularize: every element scores every candidate
        let n_c = scores.iter().map(Vec::len).min().unwrap();
        let scores: Vec<Vec<f64>> = scores.into_iter().map(|mut r| { r.truncate(n_c); r }).collect();

        let prefs = common::prefs_from_scores(&scores);
        let chosen = assign_injective(&prefs);

        // injectivity
        let mut names = BTreeSet::new();
        for (e, c) in chosen.iter().enumerate() {
            if let Some(p) = c {
                prop_assert!(names.insert(prefs[e][*p].0.clone()), "duplicate assignment");
            }
        }

        let total: f64 = chosen
            .iter()
            .enumerate()
            .filter_map(|(e, c)| c.map(|p| prefs[e][p].1))
            .sum();
        let optimum = common::brute_force_assignment_optimum(&scores);
        prop_assert!(
            total >= 0.8 * optimum - 1e-9,
            "total {total} below 0.8 of optimum {optimum}"
        );

        // distinct per-element argmaxes: assignment equals the optimum
        let argmaxes: Vec<&str> = prefs.iter().map(|p| p[0].0.as_str()).collect();
        let distinct = argmaxes.iter().collect::<BTreeSet<_>>().len() == argmaxes.len();
        if distinct {
            prop_assert!((total - optimum).abs() < 1e-9, "distinct argmaxes must be optimal");
        }
    }

    #[test]
    fn type_filter_returns_a_subsequence(
        names in proptest::collection::vec("[a-z]{1,6}", 0..8),
        known_mask in proptest::collection::vec(any::<bool>(), 0..8),
    ) {
        let candidates: Vec<Candidate> = names
            .iter()
            .enumerate()
            .map(|(i, n)| Candidate {
                name: format!("{n}{i}"),
                kind: CandidateKind::Local,
                type_ref: TypeRef {
                    name: if i % 2 == 0 { "String".into() } else { "int".into() },
                    generics: None,
                    known: known_mask.get(i).copied().unwrap_or(true),
                },
                decl_span: None,
                usage_count: 0,
                distance_to_region: Some(i),
                member: None,
            })
            .collect();
        let expected = TypeRef { name: "String".into(), generics: None, known: true };
        let kept = reserve_type_compatible_ones(&candidates, &expected);
        // subsequence check
        let mut it = candidates.iter();
        for k in &kept {
            prop_assert!(it.any(|c| c.name == k.name), "output not a subsequence");
        }
    }
}

// ---- total parsing ---------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn lexer_tokens_tile_arbitrary_input(text in ".{0,80}") {
        let out = lexer::lex(&text);
        let mut rebuilt = String::new();
        for t in &out.tokens {
            rebuilt.push_str(&text[t.full_start..t.span.end]);
        }
        prop_assert_eq!(rebuilt, text);
    }

    #[test]
    fn parsing_is_total_and_deterministic(text in ".{0,80}") {
        let one = parse_unit(&text, "F.java");
        let two = parse_unit(&text, "F.java");
        prop_assert_eq!(&one.root, &two.root);
        // recovery nodes always come with diagnostics
        if !one.recovery_spans().is_empty() {
            prop_assert!(!one.diagnostics.is_empty());
        }
    }
}

// ---- error containment ------------------------------------------------------

#[test]
fn garbage_in_one_statement_perturbs_only_that_subtree() {
    let clean = r#"
class A {
    int f;
    void m(String s) {
        int a = 1;
        use(a);
        int b = 2;
    }
}
"#;
    let broken = clean.replace("use(a);", "use(a) %% ;");
    let clean_unit = parse_unit(clean, "A.java");
    let broken_unit = parse_unit(&broken, "A.java");

    let decls = |unit: &codewire::syntax::SourceUnit| -> Vec<String> {
        unit.root
            .preorder()
            .filter(|n| n.name.is_some() && n.kind != codewire::syntax::SyntaxKind::Identifier)
            .map(|n| format!("{:?}:{}", n.kind, n.name.as_deref().unwrap()))
            .collect()
    };
    // every declaration survives; only the damaged statement differs
    assert_eq!(decls(&clean_unit), decls(&broken_unit));
    assert!(!broken_unit.recovery_spans().is_empty());
    assert!(clean_unit.recovery_spans().is_empty());
}
