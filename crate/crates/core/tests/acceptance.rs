//! Acceptance gate: every shipped guarantee as one test, each printing a
//! pass line (visible with `cargo test --test acceptance -- --nocapture`).

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use codewire::agent::{init_session, tool_spec, RunOptions};
use codewire::collect::{get_available_variables, get_unused_variables, CandidateKind};
use codewire::complete::{assign_injective, execute_completion};
use codewire::eval::{
    compute_metrics, evaluate, load_corpus, render_report, EvalOptions, ReportFormat,
};
use codewire::levenshtein;
use codewire::llm::{CallPurpose, ScriptedModel};
use codewire::wire::{run_task, EngineMode, WireOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{prepare_fixture, prepare_source, stubs, testdata};

fn deterministic() -> WireOptions {
    WireOptions {
        mode: EngineMode::Deterministic,
        ..WireOptions::default()
    }
}

fn scripted_opts() -> RunOptions {
    RunOptions {
        backoff: Duration::ZERO,
        ..RunOptions::default()
    }
}

#[test]
fn criterion_01_metrics_arithmetic() {
    let started = Instant::now();

    let (p, r) = compute_metrics(199, 217, 221);
    assert!(
        (p.unwrap() - 91.7).abs() < 0.05,
        "precision {p:?} not within 0.05 pp of 91.7"
    );
    assert!(
        (r.unwrap() - 90.0).abs() < 0.05,
        "recall {r:?} not within 0.05 pp of 90.0"
    );

    let (p, r) = compute_metrics(79, 189, 221);
    assert!(
        (p.unwrap() - 41.8).abs() < 0.05,
        "precision {p:?} not within 0.05 pp of 41.8"
    );
    assert!(
        (r.unwrap() - 35.7).abs() < 0.05,
        "recall {r:?} not within 0.05 pp of 35.7"
    );

    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    println!("[criterion 1] PASS metrics arithmetic reproduces reported percentages ({elapsed:?})");
}

#[test]
fn criterion_02_showcase_fixtures_end_to_end() {
    let started = Instant::now();

    let tag = run_task(
        &prepare_fixture("showcase/tag_manager.java"),
        &deterministic(),
        None,
    )
    .unwrap();
    assert_eq!(tag.recommendation.chosen_for("list"), Some("mTags"));
    assert!(tag.recommendation.complete);
    assert!(tag.residual_unresolved.is_empty());

    let comments = run_task(
        &prepare_fixture("showcase/comment_list.java"),
        &deterministic(),
        None,
    )
    .unwrap();
    assert_eq!(comments.recommendation.chosen_for("list"), Some("listView"));
    assert_eq!(
        comments.recommendation.chosen_for("target"),
        Some("mCommentListPosition")
    );
    let list_pair = comments
        .recommendation
        .pairs
        .iter()
        .find(|p| p.element.name == "list")
        .unwrap();
    assert_eq!(
        list_pair.element.references.len(),
        6,
        "all six references located"
    );
    assert_eq!(
        comments.new_text.matches("listView.").count(),
        7,
        "all six references edited"
    );
    assert!(comments.residual_unresolved.is_empty());

    let writer = run_task(
        &prepare_fixture("showcase/content_writer.java"),
        &deterministic(),
        None,
    )
    .unwrap();
    assert_eq!(
        writer.recommendation.chosen_for("encoding"),
        Some("Charset.defaultCharset()")
    );
    assert!(writer.residual_unresolved.is_empty());

    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(2), "took {elapsed:?}");
    println!("[criterion 2] PASS showcase fixtures wire exactly and relocate clean ({elapsed:?})");
}

#[test]
fn criterion_03_constructed_corpus_exactness() {
    let started = Instant::now();

    let corpus = load_corpus(&testdata().join("corpus")).unwrap();
    assert!(corpus.rejected.is_empty(), "{:?}", corpus.rejected);
    assert!(
        corpus.cases.len() >= 20,
        "only {} cases",
        corpus.cases.len()
    );

    let opts = EvalOptions {
        mode: EngineMode::Deterministic,
        stubs: Some(stubs()),
        ..EvalOptions::default()
    };
    let report = evaluate(&corpus.cases, &opts, None);
    assert_eq!(
        report.em_precision,
        Some(100.0),
        "{}",
        codewire::eval::summary_line(&report)
    );
    assert_eq!(
        report.em_recall,
        Some(100.0),
        "{}",
        codewire::eval::summary_line(&report)
    );

    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    println!(
        "[criterion 3] PASS {} corpus cases at 100% precision and recall ({elapsed:?})",
        corpus.cases.len()
    );
}

#[test]
fn criterion_04_levenshtein_oracle_and_laws() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let alphabet: Vec<char> = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_"
        .chars()
        .collect();
    let random_string = |rng: &mut ChaCha8Rng| -> String {
        let len = rng.gen_range(0..=12);
        (0..len)
            .map(|_| alphabet[rng.gen_range(0..alphabet.len())])
            .collect()
    };

    for i in 0..1000 {
        let a = random_string(&mut rng);
        let b = random_string(&mut rng);
        assert_eq!(
            levenshtein::distance(&a, &b),
            common::dp_distance_oracle(&a, &b),
            "pair {i}: `{a}` vs `{b}`"
        );
    }
    for _ in 0..1000 {
        let a = random_string(&mut rng);
        let b = random_string(&mut rng);
        let c = random_string(&mut rng);
        let d = levenshtein::distance_case_insensitive;
        assert_eq!(d(&a, &b), d(&b, &a), "symmetry on `{a}`/`{b}`");
        assert_eq!(d(&a, &a.to_uppercase()), 0, "case-folded identity on `{a}`");
        assert!(
            d(&a, &c) <= d(&a, &b) + d(&b, &c),
            "triangle on `{a}`/`{b}`/`{c}`"
        );
    }
    println!("[criterion 4] PASS 1000 pairs match the DP oracle; metric laws hold");
}

#[test]
fn criterion_05_scope_and_dataflow_oracles() {
    for seed in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(5000 + seed);
        let fixture = common::generate_scope_fixture(&mut rng);
        let task = prepare_source(&fixture.source, &[]);

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
            "seed {seed}: available mismatch\n{}",
            fixture.source
        );

        for candidate in &available {
            if candidate.kind == CandidateKind::Local {
                assert!(
                    candidate.decl_span.unwrap().end <= task.region.span.start,
                    "seed {seed}: `{}` violates declared-before-the-region",
                    candidate.name
                );
            }
        }
        for after in &fixture.locals_after {
            assert!(
                !got.contains(after),
                "seed {seed}: post-region local leaked"
            );
        }

        let unused: BTreeSet<String> = get_unused_variables(&task.unit, &task.table, &task.region)
            .into_iter()
            .map(|c| c.name)
            .collect();
        let expected_unused: BTreeSet<String> =
            expected.difference(&fixture.used_before).cloned().collect();
        assert_eq!(
            unused, expected_unused,
            "seed {seed}: unused mismatch\n{}",
            fixture.source
        );
    }
    println!("[criterion 5] PASS collector outputs equal brute-force oracles on 200 fixtures");
}

#[test]
fn criterion_06_agent_loop_contract() {
    let task = prepare_fixture("showcase/comment_list.java");
    let elements = ["list", "target", "ghost"];
    let tools: Vec<&str> = codewire::agent::TOOLS.iter().map(|t| t.name).collect();

    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(6000 + seed);
        let steps = rng.gen_range(0..=6);
        let mut replies: Vec<String> = Vec::new();
        for _ in 0..steps {
            match rng.gen_range(0..10) {
                0 => replies.push("no json in sight".to_string()),
                1 => replies.push("{\"thought\": \"missing action\"}".to_string()),
                _ => {
                    let tool = tools[rng.gen_range(0..tools.len())];
                    let input = match rng.gen_range(0..4) {
                        0 => serde_json::json!({}),
                        1 => serde_json::json!({"element": elements[rng.gen_range(0..3)]}),
                        2 => serde_json::json!({"member": "setSelection", "arity": 1}),
                        _ => serde_json::json!({"class_name": "ListView", "element": "target"}),
                    };
                    replies.push(
                        serde_json::json!({"thought": "t", "action": tool, "action_input": input})
                            .to_string(),
                    );
                }
            }
        }
        for _ in 0..rng.gen_range(0..=5) {
            replies.push(
                serde_json::json!({"wirings": {"list": "listView", "target": "mCommentListPosition"}})
                    .to_string(),
            );
        }

        // default budget of two decision calls
        let mut session = init_session(&task.unit, &task.table, &task.region, 2);
        let model = ScriptedModel::new(replies);
        let _ = session.run(&model, &scripted_opts());

        let decisions = session
            .ledger
            .entries
            .iter()
            .filter(|e| e.purpose == CallPurpose::Decision)
            .count();
        assert!(
            decisions <= 2,
            "seed {seed}: budget exceeded with {decisions} calls"
        );
        for (action, state) in &session.executed_log {
            assert!(
                tool_spec(action).unwrap().states.contains(state),
                "seed {seed}: `{action}` ran in state {state} outside its availability"
            );
        }
    }

    // duplicate calls replay from memory
    let mut session = init_session(&task.unit, &task.table, &task.region, 8);
    let input = serde_json::json!({"member": "setSelection", "arity": 1});
    let first = session.invoke_tool(
        "a".into(),
        "retrieve_identical_function_call",
        input.clone(),
        None,
    );
    let executed = session.executed_log.len();
    let second = session.invoke_tool("b".into(), "retrieve_identical_function_call", input, None);
    assert!(!first.replayed && second.replayed);
    assert_eq!(session.executed_log.len(), executed);

    // malformed outputs are repaired (fences) or bounded-retried
    let mut session = init_session(&task.unit, &task.table, &task.region, 2);
    let fenced = "```json\n{\"thought\":\"t\",\"action\":\"sort_by_literal_similarity\",\"action_input\":{\"element\":\"list\"}}\n```";
    assert!(session.step(fenced, None).is_ok(), "fenced output repaired");

    println!("[criterion 6] PASS 100 randomized transcripts respect budget, memory, and state-tool availability");
}

#[test]
fn criterion_07_injectivity_and_assignment_quality() {
    let mut rng = ChaCha8Rng::seed_from_u64(7000);
    for trial in 0..500 {
        let n_e = rng.gen_range(1..=4);
        let n_c = rng.gen_range(1..=4);
        let scores: Vec<Vec<f64>> = (0..n_e)
            .map(|_| (0..n_c).map(|_| rng.gen_range(0.0..1.0)).collect())
            .collect();
        let prefs = common::prefs_from_scores(&scores);
        let chosen = assign_injective(&prefs);

        let mut taken = BTreeSet::new();
        for (e, c) in chosen.iter().enumerate() {
            if let Some(p) = c {
                assert!(
                    taken.insert(prefs[e][*p].0.clone()),
                    "trial {trial}: not injective"
                );
            }
        }

        let total: f64 = chosen
            .iter()
            .enumerate()
            .filter_map(|(e, c)| c.map(|p| prefs[e][p].1))
            .sum();
        let optimum = common::brute_force_assignment_optimum(&scores);
        assert!(
            total >= 0.8 * optimum - 1e-9,
            "trial {trial}: total {total} < 0.8 × optimum {optimum}"
        );
        let argmaxes: Vec<&str> = prefs.iter().map(|p| p[0].0.as_str()).collect();
        if argmaxes.iter().collect::<BTreeSet<_>>().len() == argmaxes.len() {
            assert!(
                (total - optimum).abs() < 1e-9,
                "trial {trial}: distinct argmaxes must reach the optimum"
            );
        }
    }

    // every recommendation from the pipeline validates against gathered facts
    let task = prepare_fixture("showcase/comment_list.java");
    let mut session = init_session(&task.unit, &task.table, &task.region, 2);
    let rec = session.run_deterministic(&Default::default());
    let mut seen = BTreeSet::new();
    for pair in &rec.pairs {
        assert!(
            seen.insert(pair.chosen.name.clone()),
            "duplicate chosen candidate"
        );
        let ef = session.facts.element(&pair.element.name).unwrap();
        assert!(
            session
                .facts
                .pool(ef)
                .iter()
                .any(|c| c.name == pair.chosen.name),
            "chosen name `{}` not among gathered facts",
            pair.chosen.name
        );
    }
    println!(
        "[criterion 7] PASS injectivity, vocabulary validation, and assignment quality bounds"
    );
}

#[test]
fn criterion_08_self_consistency_protocol() {
    let task = prepare_fixture("showcase/tag_manager.java");

    // three of five votes agree: the majority answer wins even though the
    // minority answer would rank higher deterministically
    let mut session = init_session(&task.unit, &task.table, &task.region, 2);
    session.invoke_tool(
        "warmup".into(),
        "sort_by_literal_similarity",
        serde_json::json!({"element": "list"}),
        None,
    );
    let votes = vec![
        serde_json::json!({"wirings": {"list": "tag"}}).to_string(),
        serde_json::json!({"wirings": {"list": "mCount"}}).to_string(),
        serde_json::json!({"wirings": {"list": "tag"}}).to_string(),
        serde_json::json!({"wirings": {"list": "tag"}}).to_string(),
        serde_json::json!({"wirings": {"list": "mTags"}}).to_string(),
    ];
    let model = ScriptedModel::new(votes);
    let rec = execute_completion(&mut session, &model, &scripted_opts()).unwrap();
    assert_eq!(rec.chosen_for("list"), Some("tag"), "majority of 3/5 wins");

    // identical replies at temperature-zero config: five runs, bit-identical
    let mut serialized = BTreeSet::new();
    for _ in 0..5 {
        let mut session = init_session(&task.unit, &task.table, &task.region, 2);
        let replies: Vec<String> =
            std::iter::repeat(serde_json::json!({"wirings": {"list": "mTags"}}).to_string())
                .take(5)
                .collect();
        let model = ScriptedModel::new(replies);
        let rec = execute_completion(&mut session, &model, &scripted_opts()).unwrap();
        serialized.insert(serde_json::to_string(&rec).unwrap());
    }
    assert_eq!(serialized.len(), 1, "five runs are bit-identical");
    println!("[criterion 8] PASS majority voting and reproducible identical-reply runs");
}

#[test]
fn criterion_09_edit_safety() {
    for seed in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(9000 + seed);
        let fixture = common::generate_edit_fixture(&mut rng);
        let task = prepare_source(&fixture.source, &[]);
        let outcome = run_task(&task, &deterministic(), None).unwrap();

        assert!(
            outcome.residual_unresolved.is_empty(),
            "seed {seed}: apply-then-relocate left {:?}",
            outcome.residual_unresolved
        );
        // the unresolved token only occurs inside the region, so plain
        // substitution is the exact expected text; everything outside the
        // edited spans is untouched by construction
        let expected = task.unit.text.replace(&fixture.unresolved, &fixture.winner);
        assert_eq!(outcome.new_text, expected, "seed {seed}: bytes differ");
    }

    // empty script is identity
    let task = prepare_source(
        "class A { void m(String s) { // <start>\n int n = s.length();\n // <end>\n } }",
        &[],
    );
    let outcome = run_task(&task, &deterministic(), None).unwrap();
    assert_eq!(outcome.new_text, task.unit.text);
    assert!(outcome.diff.is_empty());

    println!("[criterion 9] PASS apply-then-relocate on 200 fixtures; untouched bytes identical");
}

#[test]
fn criterion_10_bookkeeping() {
    // ledger sums equal per-call sums on a scripted agent run
    let task = prepare_fixture("showcase/tag_manager.java");
    let mut session = init_session(&task.unit, &task.table, &task.region, 2);
    let mut replies = vec![
        serde_json::json!({"thought": "t", "action": "sort_by_literal_similarity", "action_input": {"element": "list"}}).to_string(),
        serde_json::json!({"thought": "t", "action": "execute_completion", "action_input": {}}).to_string(),
    ];
    replies.extend(
        std::iter::repeat(serde_json::json!({"wirings": {"list": "mTags"}}).to_string()).take(5),
    );
    let model = ScriptedModel::new(replies);
    let _ = session.run(&model, &scripted_opts());
    let by_hand_in: u64 = session.ledger.entries.iter().map(|e| e.tokens_in).sum();
    let by_hand_out: u64 = session.ledger.entries.iter().map(|e| e.tokens_out).sum();
    assert_eq!(session.ledger.tokens_in(), by_hand_in);
    assert_eq!(session.ledger.tokens_out(), by_hand_out);
    assert_eq!(session.ledger.total_tokens(), by_hand_in + by_hand_out);
    assert_eq!(session.ledger.model_calls(), 7, "2 decisions + 5 votes");

    // trace records carry the same totals
    let trace_in: u64 = session.trace.iter().map(|t| t.tokens_in).sum();
    let trace_out: u64 = session.trace.iter().map(|t| t.tokens_out).sum();
    assert_eq!(trace_in, by_hand_in);
    assert_eq!(trace_out, by_hand_out);

    // CSV re-aggregation matches the JSON report
    let corpus = load_corpus(&testdata().join("corpus")).unwrap();
    let opts = EvalOptions {
        mode: EngineMode::Deterministic,
        stubs: Some(stubs()),
        ..EvalOptions::default()
    };
    let report = evaluate(&corpus.cases, &opts, None);
    let json: serde_json::Value =
        serde_json::from_str(&render_report(&report, ReportFormat::Json)).unwrap();
    let csv = render_report(&report, ReportFormat::Csv);

    let mut total = 0u64;
    let mut rec = 0u64;
    let mut em = 0u64;
    let mut rows = 0usize;
    for line in csv.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        rows += 1;
        total += cols[1].parse::<u64>().unwrap();
        rec += cols[2].parse::<u64>().unwrap();
        em += cols[3].parse::<u64>().unwrap();
    }
    assert_eq!(rows, report.per_case.len());
    assert_eq!(json["total"].as_u64().unwrap(), total);
    assert_eq!(json["recommendations"].as_u64().unwrap(), rec);
    assert_eq!(json["exact_matches"].as_u64().unwrap(), em);
    let (p, r) = compute_metrics(em as usize, rec as usize, total as usize);
    assert!((json["em_precision"].as_f64().unwrap() - p.unwrap()).abs() < 0.05);
    assert!((json["em_recall"].as_f64().unwrap() - r.unwrap()).abs() < 0.05);

    println!("[criterion 10] PASS ledgers sum correctly and CSV re-aggregation matches JSON");
}
