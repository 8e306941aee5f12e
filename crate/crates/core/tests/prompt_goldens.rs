use eamt_core::prompt::{render, ExamplePair, NeHint, PromptSpec, Template};

fn golden(name: &str) -> String {
    let path = format!("{}/tests/fixtures/golden/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

fn hint(s: &str, t: &str) -> NeHint {
    NeHint { source: s.into(), target: t.into() }
}

fn example(s: &str, t: &str) -> ExamplePair {
    ExamplePair { source: s.into(), target: t.into() }
}

fn check(spec: PromptSpec, file: &str) {
    let rendered = render(&spec).unwrap();
    let expected = golden(file);
    assert_eq!(rendered.text, expected, "{file} differs");
    assert!(!rendered.text.contains('\r'));
    assert!(!rendered.text.ends_with('\n'));
    assert_eq!(render(&spec).unwrap(), rendered, "render is deterministic");
}

#[test]
fn few_shot_with_hints_and_examples() {
    check(
        PromptSpec {
            template: Template::FewShotNe,
            sentence: "Who directed Alien?".into(),
            target_language_name: "italian".into(),
            ne_hints: vec![hint("Alien", "Q103569"), hint("Ridley Scott", "Q56005")],
            examples: vec![
                example("What is the capital of France?", "Qual è la capitale della Francia?"),
                example("Who wrote Dune?", "Chi ha scritto Dune?"),
            ],
        },
        "t1_hints_examples.txt",
    );
}

#[test]
fn few_shot_with_hints_only() {
    check(
        PromptSpec {
            template: Template::FewShotNe,
            sentence: "How tall is Mount Everest?".into(),
            target_language_name: "turkish".into(),
            ne_hints: vec![hint("Mount Everest", "Everest Dağı")],
            examples: vec![],
        },
        "t1_hints_no_examples.txt",
    );
}

#[test]
fn few_shot_with_empty_slots() {
    check(
        PromptSpec {
            template: Template::FewShotNe,
            sentence: "Where was Albert Einstein born?".into(),
            target_language_name: "german".into(),
            ne_hints: vec![],
            examples: vec![],
        },
        "t1_empty.txt",
    );
}

#[test]
fn zero_shot() {
    check(
        PromptSpec {
            template: Template::ZeroShot,
            sentence: "Who is the director of Alien?".into(),
            target_language_name: "french".into(),
            ne_hints: vec![],
            examples: vec![],
        },
        "t2_zeroshot.txt",
    );
}

#[test]
fn placeholders_in_values_are_not_expanded() {
    let spec = PromptSpec {
        template: Template::FewShotNe,
        sentence: "literal {lang} and {ne}".into(),
        target_language_name: "german".into(),
        ne_hints: vec![hint("{examples}", "{sentence}")],
        examples: vec![],
    };
    let text = render(&spec).unwrap().text;
    assert!(text.ends_with("english text: literal {lang} and {ne}"));
    assert!(text.contains("{examples} ⇒ {sentence}"));
}
