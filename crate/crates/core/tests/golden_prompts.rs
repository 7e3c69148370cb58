//! Pins the exact assembled system prompt for one fixture per mode.
//! Regenerate with `UPDATE_GOLDEN=1 cargo test -p tutor-core --test golden_prompts`.

use std::path::PathBuf;

use chrono::{TimeZone, Utc};
use tutor_core::demo;
use tutor_core::prompt::{assemble_prompt, render_mode_directive, TutorConfig};
use tutor_core::{Homework, Mode, UserId};

fn fixture(mode: Mode) -> Homework {
    let author = UserId::from("instructor-1");
    let at = Utc.with_ymd_and_hms(2025, 1, 15, 9, 0, 0).unwrap();
    match mode {
        Mode::Recall => demo::data_types(&author, at),
        Mode::Discovery => demo::discovering_bootstrap(&author, at),
    }
}

fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

fn check_golden(name: &str, actual: &str) {
    let path = golden_path(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("missing golden file {}: {e}", path.display()));
    assert!(
        expected == actual,
        "golden mismatch for {name}\n--- expected ---\n{expected}\n--- actual ---\n{actual}"
    );
}

#[test]
fn recall_prompt_matches_golden() {
    let bundle = assemble_prompt(&TutorConfig::default(), &fixture(Mode::Recall), &[]).unwrap();
    check_golden("recall_system_prompt.txt", &bundle.system_prompt);
}

#[test]
fn discovery_prompt_matches_golden() {
    let bundle = assemble_prompt(&TutorConfig::default(), &fixture(Mode::Discovery), &[]).unwrap();
    check_golden("discovery_system_prompt.txt", &bundle.system_prompt);
}

#[test]
fn assembly_is_deterministic() {
    for mode in Mode::ALL {
        let hw = fixture(mode);
        let a = assemble_prompt(&TutorConfig::default(), &hw, &[]).unwrap();
        let b = assemble_prompt(&TutorConfig::default(), &hw.clone(), &[]).unwrap();
        assert_eq!(a.system_prompt.as_bytes(), b.system_prompt.as_bytes());
        assert_eq!(a, b);
    }
}

#[test]
fn recall_directive_uses_guiding_questions() {
    let directive = render_mode_directive(Mode::Recall);
    assert!(directive.contains("students should already possess the foundational knowledge"));
    assert!(directive.contains("What assumptions do we need to check before performing this test?"));
    let prompt = assemble_prompt(&TutorConfig::default(), &fixture(Mode::Recall), &[])
        .unwrap()
        .system_prompt;
    assert!(prompt.contains("What assumptions do we need to check before performing this test?"));
}

#[test]
fn discovery_directive_balances_guidance() {
    let prompt = assemble_prompt(&TutorConfig::default(), &fixture(Mode::Discovery), &[])
        .unwrap()
        .system_prompt;
    for phrase in [
        "sufficient guidance to prevent frustration",
        "carefully sequenced questions that build upon each other",
        "contextual hints",
        "counterexamples or alternative perspectives rather than simply correcting them",
        "repeatedly sample from a known population and calculate sample means",
    ] {
        assert!(prompt.contains(phrase), "missing {phrase:?}");
    }
}

#[test]
fn solution_is_delimited_and_scoped() {
    let hw = fixture(Mode::Recall);
    let prompt = assemble_prompt(&TutorConfig::default(), &hw, &[])
        .unwrap()
        .system_prompt;
    let open = prompt.find("<<<SOLUTION\n").unwrap();
    let close = prompt.find("\nSOLUTION>>>").unwrap();
    assert_eq!(&prompt[open + "<<<SOLUTION\n".len()..close], hw.solution);
    assert!(
        prompt.contains("only to \nunderstand the learning objectives")
            || prompt.contains("only to understand the learning objectives")
    );
}
