//! Byte-exact prompts for the Haus Toys instance. Set `UPDATE_GOLDEN=1` to
//! rewrite the files after an intended template change.

use std::path::PathBuf;

use nl2milp::pipeline::ProblemInstance;
use nl2milp::prompts::{classifier_prompt, full_description, PromptBuilder};
use nl2milp::ConstraintType;

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/prompts").join(name)
}

fn check(name: &str, actual: &str) {
    let path = golden(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "prompt {name} drifted from its golden file");
}

fn instance() -> ProblemInstance<f64> {
    serde_json::from_str(include_str!("../data/instances/haus_toys.json")).unwrap()
}

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

#[test]
fn haus_toys_prompts() {
    let inst = instance();
    let desc = full_description(&inst.paragraphs);
    let b = PromptBuilder::default();
    let base = names(&["trucks", "aeroplanes", "ships", "trains"]);
    let bin = names(&["bi_trucks", "bi_aeroplanes", "bi_ships", "bi_trains"]);
    let ct = |c| ConstraintType::new(c).unwrap();

    check("variables.txt", &b.variable_prompt(&desc, false).unwrap().text);
    check("variables_binary.txt", &b.variable_prompt(&desc, true).unwrap().text);
    check("objective.txt", &b.generation_prompt(&desc, &inst.paragraphs[0], ct(0), &base, &bin).unwrap().text);
    check("type3.txt", &b.generation_prompt(&desc, &inst.paragraphs[1], ct(3), &base, &bin).unwrap().text);
    check("type13.txt", &b.generation_prompt(&desc, &inst.paragraphs[3], ct(13), &base, &bin).unwrap().text);
    check("type10.txt", &b.generation_prompt(&desc, &inst.paragraphs[4], ct(10), &base, &bin).unwrap().text);
    check("type9.txt", &b.generation_prompt(&desc, &inst.paragraphs[5], ct(9), &base, &bin).unwrap().text);
    check("classifier.txt", &classifier_prompt(&inst.paragraphs[3]).unwrap().text);
}

#[test]
fn every_code_renders() {
    let inst = instance();
    let desc = full_description(&inst.paragraphs);
    let b = PromptBuilder::default();
    let base = names(&["trucks", "trains"]);
    let bin = names(&["bi_trucks", "bi_trains"]);
    for code in ConstraintType::all() {
        let p = b.generation_prompt(&desc, &inst.paragraphs[1], code, &base, &bin).unwrap();
        assert!(!p.text.contains("{{"), "unfilled placeholder for code {code}");
        let info = b.inspect_generation_prompt(&p.text).unwrap();
        assert_eq!(info.code, code);
        let expected = if code.is_logic() { &bin } else { &base };
        assert_eq!(&info.variables, expected);
    }
}
