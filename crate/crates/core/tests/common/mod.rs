#![allow(dead_code)]

pub mod oracle;

use std::path::PathBuf;

use arground_core::parser::{extract_argument_map, serialize_argument_map, KeyOrder};

pub struct Fixture {
    pub name: String,
    pub raw: String,
    pub expected: String,
}

/// Resolves from either workspace crate, since the CLI acceptance suite
/// shares this module.
pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .parent()
        .unwrap()
        .join("core/tests/fixtures/malformed")
}

pub fn malformed_fixtures() -> Vec<Fixture> {
    let mut cases: Vec<Fixture> = std::fs::read_dir(fixture_dir())
        .unwrap()
        .filter_map(|e| {
            let path = e.unwrap().path();
            (path.extension()? == "txt").then_some(path)
        })
        .map(|path| {
            let name = path.file_stem().unwrap().to_string_lossy().into_owned();
            Fixture {
                raw: std::fs::read_to_string(&path).unwrap(),
                expected: std::fs::read_to_string(path.with_extension("expected"))
                    .unwrap()
                    .trim_end()
                    .to_string(),
                name,
            }
        })
        .collect();
    cases.sort_by(|a, b| a.name.cmp(&b.name));
    cases
}

/// Sorted serialization on success, the error name on failure.
pub fn fixture_outcome(raw: &str) -> String {
    match extract_argument_map(raw) {
        Ok(out) => serialize_argument_map(&out.map, KeyOrder::Sorted),
        Err(e) => e.name().to_string(),
    }
}
