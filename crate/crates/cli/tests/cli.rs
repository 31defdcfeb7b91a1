//! The binary end to end.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn core(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core").join(rel)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nl2milp")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn stub_args(fixture: &Path) -> Vec<String> {
    vec!["--provider".into(), "stub".into(), "--fixtures".into(), p(fixture).into()]
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(core("tests/golden").join(name)).unwrap()
}

#[test]
fn synthesize_matches_golden_and_replays() {
    let dir = tempfile::tempdir().unwrap();
    let transcript = dir.path().join("run.jsonl");
    let trace = dir.path().join("trace.json");
    let result = dir.path().join("result.json");
    let fixture = core("data/fixtures/haus_toys.json");
    let instance = core("data/instances/haus_toys.json");
    let mut args = stub_args(&fixture);
    args.extend(["--transcript", p(&transcript), "synthesize", p(&instance), "--trace", p(&trace), "--result", p(&result)].map(String::from));
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    let out = run(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout(&out), golden("haus_toys.model.json"));
    assert!(trace.exists() && result.exists());

    let model = dir.path().join("model.json");
    let out = run(&["--provider", "replay", "--transcript", p(&transcript), "synthesize", p(&instance), "-o", p(&model)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read_to_string(&model).unwrap(), golden("haus_toys.model.json"));
}

#[test]
fn synthesize_a_directory() {
    let dir = tempfile::tempdir().unwrap();
    let inputs = dir.path().join("in");
    let fixtures = dir.path().join("fx");
    let out_dir = dir.path().join("out");
    for d in [&inputs, &fixtures] {
        std::fs::create_dir(d).unwrap();
    }
    std::fs::copy(core("data/instances/haus_toys.json"), inputs.join("haus_toys.json")).unwrap();
    std::fs::copy(core("data/fixtures/haus_toys.json"), fixtures.join("haus_toys.json")).unwrap();
    let out = run(&["--provider", "stub", "--fixtures", p(&fixtures), "synthesize", p(&inputs), "-o", p(&out_dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout(&out), "haus_toys: ok\n");
    for f in ["haus_toys.model.json", "haus_toys.trace.json", "haus_toys.result.json"] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
    assert_eq!(std::fs::read_to_string(out_dir.join("haus_toys.model.json")).unwrap(), golden("haus_toys.model.json"));

    // The written result grades as fully correct.
    let res = std::fs::read_to_string(out_dir.join("haus_toys.result.json")).unwrap();
    let truth = std::fs::read_to_string(core("data/instances/haus_toys.json")).unwrap();
    std::fs::write(dir.path().join("gen.json"), format!("[{res}]")).unwrap();
    std::fs::write(dir.path().join("truth.json"), format!("[{truth}]")).unwrap();
    let out = run(&["evaluate", p(&dir.path().join("gen.json")), p(&dir.path().join("truth.json"))]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("ACC1") && stdout(&out).contains("1.0000"), "{}", stdout(&out));
}

#[test]
fn classify_prints_codes() {
    let items: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(core("data/cue_regression.json")).unwrap()).unwrap();
    let derived = items
        .as_array()
        .unwrap()
        .iter()
        .find(|i| i["origin"] == "nl4opt-derived" && i["label"] == 2)
        .unwrap()["text"]
        .as_str()
        .unwrap()
        .to_string();
    let out = run(&["classify", &derived, "If Haus Toys makes trucks, then they will not make trains."]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "2\n13\n");

    let out = run(&["classify", "--labeled", p(&core("data/cue_regression.json"))]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "accuracy 1.0000 (42/42)\n");
}

#[test]
fn evaluate_prints_the_metric_table() {
    let out = run(&["evaluate", p(&core("data/synthetic/generated.json")), p(&core("data/synthetic/truth.json"))]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let row = |name: &str| {
        text.lines()
            .find(|l| l.starts_with(name))
            .and_then(|l| l.split_whitespace().last())
            .unwrap_or_default()
            .to_string()
    };
    assert_eq!(row("ACC1"), "0.8667");
    assert_eq!(row("ACC2"), "0.9944");
    assert_eq!(row("ACC3"), "0.9774");
    assert_eq!(row("No. of incorrect models"), "4");
    assert_eq!(row("No. of incorrect objectives"), "3");
    assert_eq!(row("No. of incorrect constraints"), "1");
    assert_eq!(row("No. of models missing linking constraints"), "1");
    assert_eq!(text.lines().filter(|l| l.contains(": incorrect")).count(), 4);
}

#[test]
fn usage_errors_exit_2_and_domain_errors_exit_1() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["emit", "x.json"]).status.code(), Some(2));
    assert_eq!(run(&["emit", "/nonexistent/model.json", "--format", "lp"]).status.code(), Some(1));
    assert_eq!(run(&["classify"]).status.code(), Some(1));
}

#[test]
fn failures_write_no_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model.json");
    let transcript = dir.path().join("t.jsonl");
    let fixture = core("data/fixtures/haus_toys.json");

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"id\": \"x\", \"paragraphs\": [1, 2]}").unwrap();
    let out = run(&["--provider", "stub", "--fixtures", p(&fixture), "--transcript", p(&transcript), "synthesize", p(&bad), "-o", p(&model)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/paragraphs/0"));
    assert!(!model.exists() && !transcript.exists());

    // A reply that never parses fails synthesis without writing a model.
    let text = std::fs::read_to_string(&fixture).unwrap().replace("\"smaller\": \"ships\"", "\"reply\": \"ships fewer than trains\", \"smaller\": \"ships\"");
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, text).unwrap();
    let out = run(&["--provider", "stub", "--fixtures", p(&broken), "synthesize", p(&core("data/instances/haus_toys.json")), "-o", p(&model)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("paragraph 5"), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!model.exists());
}

#[test]
fn emit_matches_goldens() {
    let model = core("tests/golden/haus_toys.model.json");
    let out = run(&["emit", p(&model), "--format", "lp"]);
    assert_eq!(stdout(&out), golden("haus_toys.lp"));
    let dir = tempfile::tempdir().unwrap();
    let tex = dir.path().join("m.tex");
    assert!(run(&["emit", p(&model), "--format", "latex", "-o", p(&tex)]).status.success());
    assert_eq!(std::fs::read_to_string(tex).unwrap(), golden("haus_toys.tex"));
}

#[test]
fn export_finetune_writes_three_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["export-finetune", p(&core("data/cue_regression.json")), p(dir.path()), "--ratio", "0.34", "--seed", "3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let lines = |f: &str| std::fs::read_to_string(dir.path().join(f)).unwrap().lines().count();
    assert_eq!(lines("train.jsonl") + lines("validation.jsonl"), 42);
    assert_eq!(lines("validation.jsonl"), 14);
    let hp: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("hyperparameters.json")).unwrap()).unwrap();
    assert_eq!(hp, serde_json::json!({ "epochs": 4, "batch_size": 1 }));
    let first: serde_json::Value = serde_json::from_str(std::fs::read_to_string(dir.path().join("train.jsonl")).unwrap().lines().next().unwrap()).unwrap();
    assert!(first["prompt"].as_str().unwrap().ends_with("\n\n###\n\n"));
    assert!(first["completion"].as_str().unwrap().starts_with(' '));
}

#[test]
fn configured_paths_are_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("model.json");
    let transcript = dir.path().join("t.jsonl");
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        format!(
            "classifier = \"rules\"\n[paths]\ninstances = {:?}\noutput = {:?}\ntranscript = {:?}\n",
            p(&core("data/instances/haus_toys.json")),
            p(&out),
            p(&transcript)
        ),
    )
    .unwrap();
    let fixture = core("data/fixtures/haus_toys.json");
    let res = run(&["--config", p(&config), "--provider", "stub", "--fixtures", p(&fixture), "synthesize"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    assert_eq!(std::fs::read_to_string(&out).unwrap(), golden("haus_toys.model.json"));
    // Rules mode sends no classification prompts.
    let lines = std::fs::read_to_string(&transcript).unwrap().lines().count();
    assert_eq!(lines, 1 + 7);

    assert_eq!(run(&["synthesize"]).status.code(), Some(1));
}
