mod common;

use enps_lab::model::{build_m1, build_m2, parse_model, serialize_model, ControllerParams};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn m1_text() -> String {
    serialize_model(&build_m1(&ControllerParams::default()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn random_systems_round_trip(seed: u64) {
        let sys = common::random_system(&mut ChaCha8Rng::seed_from_u64(seed));
        let text = serialize_model(&sys);
        let back = parse_model(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(&back, &sys);
        prop_assert_eq!(serialize_model(&back), text);
    }

    #[test]
    fn stray_character_is_reported_where_it_is(line in 0usize..129, offset in 0usize..4) {
        let text = m1_text();
        let lines: Vec<&str> = text.lines().collect();
        let line = line % lines.len();
        let indent = lines[line].len() - lines[line].trim_start().len();
        let column = indent + offset.min(lines[line].trim_start().len());
        let mut broken: Vec<String> = lines.iter().map(|l| l.to_string()).collect();
        broken[line].insert(column, '@');
        let err = parse_model(&broken.join("\n")).unwrap_err();
        prop_assert_eq!((err.line, err.column), (line + 1, column + 1), "{}", err);
    }

    #[test]
    fn parser_never_panics(text in "[a-z_0-9{}();=+*|.# \n-]{0,200}") {
        let _ = parse_model(&text);
    }
}

#[test]
fn shipped_controllers_round_trip() {
    let p = ControllerParams::default();
    for sys in [build_m1(&p).unwrap(), build_m2(&p).unwrap()] {
        let text = serialize_model(&sys);
        assert_eq!(parse_model(&text).unwrap(), sys);
    }
}

#[test]
fn truncated_document_points_at_the_end() {
    let text = m1_text();
    let cut = &text[..text.len() - 2];
    let err = parse_model(cut).unwrap_err();
    assert_eq!(err.line, cut.lines().count() + 1, "{err}");
    assert!(err.message.contains("end of input"), "{err}");
}
