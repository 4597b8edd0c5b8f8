//! Shared test support: fixture paths, task preparation, generators, and
//! independent oracles.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use codewire::syntax::StubLibrary;
use codewire::wire::{read_source, WiringTask};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn testdata() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../testdata")
}

pub fn stubs() -> StubLibrary {
    StubLibrary::load(&testdata().join("stubs.txt")).expect("stub library parses")
}

#[allow(dead_code)]
pub fn prepare_fixture(name: &str) -> WiringTask {
    let path = testdata().join(name);
    let text = read_source(&path).expect("fixture readable");
    WiringTask::prepare(&text, &path.display().to_string(), &[], Some(stubs()))
        .expect("fixture prepares")
}

#[allow(dead_code)]
pub fn prepare_source(target_text: &str, project: &[(String, String)]) -> WiringTask {
    WiringTask::prepare(target_text, "Test.java", project, Some(stubs())).expect("source prepares")
}

// ---- independent oracles ----------------------------------------------------

/// Full-matrix edit-distance oracle, independent of the implementation path.
#[allow(dead_code)]
pub fn dp_distance_oracle(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut m = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in m.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in m[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let cost = usize::from(a[i - 1] != b[j - 1]);
            m[i][j] = (m[i - 1][j] + 1)
                .min(m[i][j - 1] + 1)
                .min(m[i - 1][j - 1] + cost);
        }
    }
    m[a.len()][b.len()]
}

/// Exhaustive optimum over injective partial assignments of elements to
/// candidates, maximizing the score total.
#[allow(dead_code)]
pub fn brute_force_assignment_optimum(scores: &[Vec<f64>]) -> f64 {
    fn go(scores: &[Vec<f64>], element: usize, used: &mut Vec<bool>) -> f64 {
        if element == scores.len() {
            return 0.0;
        }
        let mut best = go(scores, element + 1, used);
        for c in 0..used.len() {
            if !used[c] {
                used[c] = true;
                let total = scores[element][c] + go(scores, element + 1, used);
                used[c] = false;
                if total > best {
                    best = total;
                }
            }
        }
        best
    }
    let n_c = scores.first().map(|r| r.len()).unwrap_or(0);
    go(scores, 0, &mut vec![false; n_c])
}

/// Preference lists (name, score) from a score matrix, best first, ties by
/// candidate name.
#[allow(dead_code)]
pub fn prefs_from_scores(scores: &[Vec<f64>]) -> Vec<Vec<(String, f64)>> {
    scores
        .iter()
        .map(|row| {
            let mut prefs: Vec<(String, f64)> = row
                .iter()
                .enumerate()
                .map(|(c, s)| (format!("c{c}"), *s))
                .collect();
            prefs.sort_by(|a, b| {
                b.1.partial_cmp(&a.1)
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(a.0.cmp(&b.0))
            });
            prefs
        })
        .collect()
}

// ---- fixture generators -----------------------------------------------------

#[allow(dead_code)]
pub const NAMES: &[&str] = &[
    "alpha", "beta", "gamma", "delta", "omega", "counter", "label", "buffer", "cursor", "token",
    "widget", "record",
];
#[allow(dead_code)]
pub const TYPES: &[&str] = &["String", "int", "long", "Tag", "boolean"];

#[allow(dead_code)]
pub fn default_value(ty: &str) -> &'static str {
    match ty {
        "String" => "\"s\"",
        "boolean" => "false",
        "Tag" => "null",
        _ => "0",
    }
}

/// A randomly generated class with known ground truth for the collectors.
#[allow(dead_code)]
pub struct ScopeFixture {
    pub source: String,
    pub fields: Vec<String>,
    pub params: Vec<String>,
    pub locals_before: Vec<String>,
    pub locals_after: Vec<String>,
    pub used_before: BTreeSet<String>,
}

#[allow(dead_code)]
pub fn generate_scope_fixture(rng: &mut ChaCha8Rng) -> ScopeFixture {
    let mut pool: Vec<String> = NAMES.iter().map(|n| n.to_string()).collect();
    pool.shuffle(rng);

    let n_fields = rng.gen_range(0..=3);
    let n_params = rng.gen_range(0..=2);
    let n_before = rng.gen_range(0..=3);
    let n_after = rng.gen_range(0..=2);

    let fields: Vec<String> = (0..n_fields).map(|_| pool.pop().unwrap()).collect();
    let params: Vec<String> = (0..n_params).map(|_| pool.pop().unwrap()).collect();
    let locals_before: Vec<String> = (0..n_before).map(|_| pool.pop().unwrap()).collect();
    let locals_after: Vec<String> = (0..n_after).map(|_| pool.pop().unwrap()).collect();
    let unresolved = pool.pop().unwrap();

    let mut src = String::from("class Gen {\n");
    for f in &fields {
        src.push_str(&format!(
            "    {} {};\n",
            TYPES[rng.gen_range(0..TYPES.len())],
            f
        ));
    }
    src.push_str("    void run(");
    let param_list: Vec<String> = params
        .iter()
        .map(|p| format!("{} {}", TYPES[rng.gen_range(0..TYPES.len())], p))
        .collect();
    src.push_str(&param_list.join(", "));
    src.push_str(") {\n");
    for l in &locals_before {
        let ty = TYPES[rng.gen_range(0..TYPES.len())];
        src.push_str(&format!("        {} {} = {};\n", ty, l, default_value(ty)));
    }

    // usage statements before the region over a random subset of everything
    // declared so far
    let mut used_before = BTreeSet::new();
    let declared: Vec<&String> = fields
        .iter()
        .chain(params.iter())
        .chain(locals_before.iter())
        .collect();
    for name in &declared {
        if rng.gen_bool(0.4) {
            src.push_str(&format!("        touch({name});\n"));
            used_before.insert((*name).clone());
        }
    }

    src.push_str("        // <start>\n");
    src.push_str(&format!("        use({unresolved});\n"));
    src.push_str("        // <end>\n");

    for l in &locals_after {
        let ty = TYPES[rng.gen_range(0..TYPES.len())];
        src.push_str(&format!("        {} {} = {};\n", ty, l, default_value(ty)));
    }
    // references after the region never count as usage
    for name in &declared {
        if rng.gen_bool(0.3) {
            src.push_str(&format!("        touch({name});\n"));
        }
    }
    src.push_str("    }\n}\n");

    ScopeFixture {
        source: src,
        fields,
        params,
        locals_before,
        locals_after,
        used_before,
    }
}

/// Fixture with one unresolved element and a forced winner: the winner is a
/// case variant of the unresolved name (similarity 0.5, the maximum) and
/// unused, while decoys come from a disjoint name pool.
#[allow(dead_code)]
pub struct EditFixture {
    pub source: String,
    pub unresolved: String,
    pub winner: String,
    pub reference_count: usize,
}

#[allow(dead_code)]
pub fn generate_edit_fixture(rng: &mut ChaCha8Rng) -> EditFixture {
    let stem = NAMES[rng.gen_range(0..NAMES.len())];
    let unresolved = format!("{stem}val");
    let winner = format!("{}Val", stem);

    let mut pool: Vec<&str> = NAMES.iter().copied().filter(|n| *n != stem).collect();
    pool.shuffle(rng);
    let n_decoys = rng.gen_range(0..=2);

    let mut src = String::from("class Gen {\n");
    src.push_str(&format!("    String {winner};\n"));
    let decoys: Vec<&str> = (0..n_decoys).map(|_| pool.pop().unwrap()).collect();
    for d in &decoys {
        src.push_str(&format!("    String {d};\n"));
    }
    src.push_str("    void run() {\n");
    for d in &decoys {
        src.push_str(&format!("        touch({d});\n"));
    }
    src.push_str("        // <start>\n");
    let reference_count = rng.gen_range(1..=4);
    for i in 0..reference_count {
        match i % 3 {
            0 => src.push_str(&format!("        use({unresolved});\n")),
            1 => src.push_str(&format!("        {unresolved}.call();\n")),
            _ => src.push_str(&format!("        String v{i} = {unresolved};\n")),
        }
    }
    src.push_str("        // <end>\n    }\n}\n");

    EditFixture {
        source: src,
        unresolved,
        winner,
        reference_count,
    }
}
