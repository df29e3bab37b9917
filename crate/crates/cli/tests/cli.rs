use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use smlab::instance::{Caps, Instance, InstanceFile};
use smlab::laws::generate_corpus;

fn instance(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../instances").join(name)
}

fn smlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smlab"))
        .args(args)
        .env_remove("SMLAB_CAPS")
        .output()
        .expect("binary runs")
}

fn smlab_json(args: &[&str]) -> Value {
    let out = smlab(args);
    assert!(
        out.status.success(),
        "{args:?} exited with {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn path(name: &str) -> String {
    instance(name).to_string_lossy().into_owned()
}

fn verdict<'a>(report: &'a Value, property: &str) -> &'a Value {
    report["verdicts"]
        .as_array()
        .unwrap()
        .iter()
        .find(|v| v["property"] == property)
        .unwrap_or_else(|| panic!("no verdict for {property}"))
}

#[test]
fn analyze_z12_four() {
    let v = smlab_json(&["analyze", &path("z12_n4.json")]);
    assert_eq!(v["submodules"], 6);
    assert_eq!(verdict(&v, "strongly_irreducible")["verdict"], true);
    assert_eq!(verdict(&v, "irreducible")["verdict"], true);
    let primal = verdict(&v, "primal");
    assert_eq!(primal["verdict"], true);
    assert_eq!(primal["witness"]["prime"], serde_json::json!([0, 2, 4, 6, 8, 10]));
    let prime = verdict(&v, "prime");
    assert_eq!(prime["verdict"], false);
    assert_eq!(prime["witness"]["kind"], "element_pair");
}

#[test]
fn analyze_pretty_adds_labels() {
    let v = smlab_json(&["analyze", &path("z12_n4.json"), "--pretty"]);
    assert!(verdict(&v, "prime").get("labels").is_some());
}

#[test]
fn analyze_selected_properties_only() {
    let v = smlab_json(&["analyze", &path("z12_n4.json"), "--props", "prime,uniserial"]);
    let props: Vec<&str> = v["verdicts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["property"].as_str().unwrap())
        .collect();
    assert_eq!(props, ["prime", "uniserial"]);
}

#[test]
fn analyze_zero_submodule_is_fine() {
    let out = smlab(&["analyze", &path("z12_zero.json")]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn analyze_whole_module_is_a_precondition_error() {
    assert_eq!(smlab(&["analyze", &path("z12_whole.json")]).status.code(), Some(3));
}

#[test]
fn broken_json_exits_with_parse_code() {
    assert_eq!(smlab(&["analyze", &path("broken.json")]).status.code(), Some(2));
}

#[test]
fn missing_file_exits_with_io_code() {
    assert_eq!(smlab(&["analyze", "/nonexistent/smlab.json"]).status.code(), Some(5));
}

#[test]
fn cap_exceeded_exits_with_code_four() {
    let out = Command::new(env!("CARGO_BIN_EXE_smlab"))
        .args(["analyze", &path("z12_n4.json")])
        .env("SMLAB_CAPS", "ring=8")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn malformed_caps_exit_with_parse_code() {
    let out = Command::new(env!("CARGO_BIN_EXE_smlab"))
        .args(["analyze", &path("z12_n4.json")])
        .env("SMLAB_CAPS", "ring=lots")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

fn lattice(name: &str) -> Vec<Value> {
    smlab_json(&["lattice", &path(name)])["nodes"].as_array().unwrap().clone()
}

#[test]
fn lattice_of_z12_is_the_divisor_lattice() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("z12.json");
    std::fs::write(&file, r#"{"ring": {"kind": "zmod", "n": 12}}"#).unwrap();
    let v = smlab_json(&["lattice", &file.to_string_lossy()]);
    assert_eq!(v["nodes"].as_array().unwrap().len(), 6);
}

#[test]
fn lattice_of_a_field_has_two_nodes() {
    assert_eq!(lattice("field.json").len(), 2);
}

#[test]
fn lattice_of_f2_squared_has_three_atoms() {
    let nodes = lattice("f2_squared.json");
    assert_eq!(nodes.len(), 5);
    let bottom = nodes.iter().find(|n| n["members"] == serde_json::json!([0])).unwrap();
    assert_eq!(bottom["covers"].as_array().unwrap().len(), 3);
}

#[test]
fn lattice_rejects_integer_instances() {
    assert_eq!(smlab(&["lattice", &path("z_4z.json")]).status.code(), Some(3));
}

#[test]
fn decide_z_examples() {
    let v = smlab_json(&["decide-z", &path("z_4z.json")]);
    assert_eq!(v["verdict"], "true");
    assert_eq!(v["path"], "thm47");
    assert_eq!(v["prime"], 2);
    assert_eq!(v["n"], 2);

    let v = smlab_json(&["decide-z", &path("z2_4z2.json")]);
    assert_eq!(v["verdict"], "false");
    assert!(v.get("witness").is_some());

    let v = smlab_json(&["decide-z", &path("z_plus_z2.json"), &path("z_plus_z2_sub.json")]);
    assert_eq!(v["verdict"], "true");
}

#[test]
fn decide_z_with_a_duplicated_field_is_rejected() {
    let out = smlab(&["decide-z", &path("z_4z.json"), &path("z_4z.json")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn witness_on_the_plane_finds_a_pair() {
    let v = smlab_json(&["witness", &path("plane_x.json")]);
    assert!(v.get("witness").is_some_and(|w| !w.is_null()), "{v}");
}

#[test]
fn unknown_suite_exits_with_parse_code() {
    assert_eq!(smlab(&["laws", "--suite", "bogus"]).status.code(), Some(2));
}

#[test]
fn unknown_law_exits_with_parse_code() {
    assert_eq!(smlab(&["laws", "--laws", "L9_9"]).status.code(), Some(2));
}

#[test]
fn empty_law_selection_gives_an_empty_report() {
    let v = smlab_json(&["laws", "--laws", ""]);
    assert_eq!(v["summary"]["results"], 0);
    assert_eq!(v["results"].as_array().unwrap().len(), 0);
}

#[test]
fn laws_writes_markdown_and_json_files() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("r.json");
    let md = dir.path().join("r.md");
    let out = smlab(&[
        "laws",
        "--suite",
        "z",
        "--laws",
        "L2_2,T4_7",
        "--out",
        &json.to_string_lossy(),
        "--markdown",
        &md.to_string_lossy(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v["summary"]["fail"], 0);
    assert!(std::fs::read_to_string(&md).unwrap().contains("T4_7"));
}

#[test]
fn instance_files_round_trip() {
    for entry in std::fs::read_dir(instance("")).unwrap() {
        let p = entry.unwrap().path();
        if p.file_name().unwrap() == "broken.json" {
            continue;
        }
        let text = std::fs::read_to_string(&p).unwrap();
        let first: InstanceFile = serde_json::from_str(&text).unwrap();
        let again: InstanceFile = serde_json::from_str(&first.to_json()).unwrap();
        assert_eq!(first, again, "{}", p.display());
    }
}

#[test]
fn corpus_instances_round_trip() {
    for inst in generate_corpus(42, &Caps::default()) {
        let text = serde_json::to_string(&inst).unwrap();
        let back: Instance = serde_json::from_str(&text).unwrap();
        assert_eq!(inst, back);
    }
}
