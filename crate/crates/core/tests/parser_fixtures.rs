//! Malformed model-output corpus and a random-bytes robustness run.

mod common;

use arground_core::parser::extract_argument_map;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn fixtures_match_expected() {
    let cases = common::malformed_fixtures();
    assert!(cases.len() >= 20, "only {} fixtures", cases.len());
    for case in &cases {
        assert_eq!(common::fixture_outcome(&case.raw), case.expected, "case {}", case.name);
    }
}

#[test]
fn random_bytes_never_panic() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let alphabet = b"{}[]\"':,\\ \n\tabcXYZ019-_`";
    for i in 0..10_000 {
        let len = rng.random_range(0..64);
        let bytes: Vec<u8> = if i % 2 == 0 {
            (0..len).map(|_| rng.random()).collect()
        } else {
            (0..len)
                .map(|_| alphabet[rng.random_range(0..alphabet.len())])
                .collect()
        };
        let text = String::from_utf8_lossy(&bytes);
        let first = extract_argument_map(&text);
        assert_eq!(first, extract_argument_map(&text));
    }
}
