//! Benchmark support: fixture loading shared by the criterion targets.

use std::path::{Path, PathBuf};

pub fn testdata() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../testdata")
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(testdata().join(name)).expect("fixture readable")
}
