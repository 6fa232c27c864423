use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use surface_plumbing::graph::WeightedDualGraph;

fn manifest(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(rel)
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_splumb"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().expect("exit code"),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn run_on(cmd: &str, rel: &str) -> (i32, String, String) {
    run(&[cmd, "--input", manifest(rel).to_str().unwrap()])
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).expect("valid JSON output")
}

#[test]
fn analyze_e8() {
    let (code, out, _) = run_on("analyze", "corpus/e8.json");
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["topological_index"], 1);
    assert!(v["discrepancies"]
        .as_array()
        .unwrap()
        .iter()
        .all(|d| d["k"] == "0"));
    assert_eq!(v["classification"]["is_kleinian"], true);
    assert_eq!(v["classification"]["kleinian_type"]["family"], "E");
    assert_eq!(v["classification"]["kleinian_type"]["rank"], 8);
}

#[test]
fn analyze_index_three() {
    let (code, out, _) = run_on("analyze", "corpus/g0e3.json");
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["topological_index"], 3);
    assert_eq!(v["classification"]["is_numerically_gorenstein"], false);
    assert_eq!(v["discrepancies"][0]["k"], "-1/3");
}

#[test]
fn analyze_error_codes() {
    let (code, _, err) = run_on("analyze", "fixtures/malformed.json");
    assert_eq!(code, 2);
    assert!(err.contains("line"), "{err}");
    assert_eq!(run_on("analyze", "fixtures/indefinite.json").0, 3);
    assert_eq!(run_on("certify", "fixtures/indefinite.json").0, 3);
    assert_eq!(run_on("analyze", "fixtures/does-not-exist.json").0, 2);
}

#[test]
fn unknown_field_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("g.json");
    std::fs::write(
        &p,
        r#"{"vertices":[{"id":0,"genus":0,"euler":3,"weight":1}],"edges":[]}"#,
    )
    .unwrap();
    let (code, _, err) = run(&["analyze", "--input", p.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("weight"), "{err}");
}

#[test]
fn certify_and_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["g2e1", "g0e3", "chain23", "minus_one_bridge"] {
        let cert = dir.path().join(format!("{name}.cert.json"));
        let input = manifest(&format!("corpus/{name}.json"));
        let (code, _, _) = run(&[
            "certify",
            "--input",
            input.to_str().unwrap(),
            "--output",
            cert.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "{name}");
        let v = json(&std::fs::read_to_string(&cert).unwrap());
        assert_eq!(v["outcome"], "certificate");
        assert!(v["transcript"]
            .as_array()
            .unwrap()
            .iter()
            .all(|t| t["status"] == "pass"));
        assert_eq!(
            run(&["verify", "--input", cert.to_str().unwrap()]).0,
            0,
            "{name}"
        );
    }
}

#[test]
fn certify_g2e1_shape() {
    let (code, out, _) = run_on("certify", "corpus/g2e1.json");
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["r"], 1);
    assert_eq!(v["vertices"][0]["m"], -2);
    assert_eq!(v["vertices"][0]["degree"], -1);
    assert_eq!(v["vertices"][0]["divisor"].as_array().unwrap().len(), 0);
    assert_eq!(v["edges"].as_array().unwrap().len(), 0);
}

#[test]
fn certify_bypasses_and_failures() {
    let (code, out, _) = run_on("certify", "corpus/e8.json");
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["outcome"], "classification_bypass");
    assert_eq!(v["reason"], "Kleinian");
    assert!(v["citation"]
        .as_str()
        .unwrap()
        .contains("automatically Gorenstein"));

    assert_eq!(
        json(&run_on("certify", "corpus/triangle_cusp.json").1)["reason"],
        "Cusp"
    );
    assert_eq!(
        json(&run_on("certify", "corpus/elliptic_e1.json").1)["reason"],
        "SimpleElliptic"
    );

    let (code, out, err) = run_on("certify", "fixtures/adjacent_minus_ones.json");
    assert_eq!(code, 4);
    let v = json(&out);
    assert_eq!(v["outcome"], "failure");
    assert_eq!(v["kind"], "adjacent_minus_ones");
    assert!(err.contains("adjacent"));
}

#[test]
fn verify_rejects_bypass_outcome() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bypass.json");
    std::fs::write(&p, run_on("certify", "corpus/e8.json").1).unwrap();
    let (code, _, err) = run(&["verify", "--input", p.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("classification_bypass"));
}

#[test]
fn tampered_certificates_fail_verification() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = json(&run_on("certify", "corpus/chain23.json").1);

    let phase = dir.path().join("phase.json");
    let mut bad = v.clone();
    bad["edges"][0]["lambda_ba"]["phase"] = Value::from("1/7");
    std::fs::write(&phase, bad.to_string()).unwrap();
    let (code, _, err) = run(&["verify", "--input", phase.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("edge:1-2:equation"), "{err}");
    assert!(err.contains("edge:1-2:0:gluing"), "{err}");

    let exp = dir.path().join("exponent.json");
    v["vertices"][1]["normal_forms"][0]["f_exponent"] = Value::from(0);
    std::fs::write(&exp, v.to_string()).unwrap();
    let (code, _, err) = run(&["verify", "--input", exp.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("vertex:2:discrepancy"), "{err}");
}

#[test]
fn gen_ade_e8_matches_corpus() {
    let (code, out, _) = run(&["gen", "ade", "--n", "8", "--type", "e"]);
    assert_eq!(code, 0);
    let generated = WeightedDualGraph::from_json(&out).unwrap();
    let file = std::fs::read_to_string(manifest("corpus/e8.json")).unwrap();
    assert_eq!(generated, WeightedDualGraph::from_json(&file).unwrap());
    assert_eq!(run(&["gen", "ade", "--n", "9", "--type", "e"]).0, 2);
}

#[test]
fn gen_random_nd_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rnd");
    let args = [
        "gen",
        "random-nd",
        "--seed",
        "42",
        "--count",
        "10",
        "--output",
        out.to_str().unwrap(),
    ];
    assert_eq!(run(&args).0, 0);
    let mut files: Vec<_> = std::fs::read_dir(&out)
        .unwrap()
        .map(|f| f.unwrap().path())
        .collect();
    files.sort();
    assert_eq!(files.len(), 10);
    let first: Vec<String> = files
        .iter()
        .map(|f| std::fs::read_to_string(f).unwrap())
        .collect();
    for text in &first {
        let g = WeightedDualGraph::from_json(text).unwrap();
        assert!(g.is_negative_definite());
    }
    // Same seed, byte-identical files.
    assert_eq!(run(&args).0, 0);
    let second: Vec<String> = files
        .iter()
        .map(|f| std::fs::read_to_string(f).unwrap())
        .collect();
    assert_eq!(first, second);
}

#[test]
fn gen_cusp_triangle() {
    let (code, out, _) = run(&["gen", "cusp", "--len", "3", "--e", "3"]);
    assert_eq!(code, 0);
    let file = std::fs::read_to_string(manifest("corpus/triangle_cusp.json")).unwrap();
    assert_eq!(out, file);
    assert_eq!(run(&["gen", "cusp", "--len", "3", "--e", "2"]).0, 2);
    let (_, out, _) = run(&["gen", "cusp", "--len", "2,4"]);
    assert_eq!(out.lines().filter(|l| l.starts_with('{')).count(), 2);
}

#[test]
fn dot_output() {
    let (code, out, _) = run_on("dot", "corpus/g0e3.json");
    assert_eq!(code, 0);
    assert_eq!(
        out,
        "graph dual {\n  v0 [label=\"0 [g=0, e=3, k=-1/3]\"];\n}\n"
    );

    let (_, e8, _) = run_on("dot", "corpus/e8.json");
    assert_eq!(e8.matches("[label=").count(), 8);
    assert_eq!(e8.matches(" -- ").count(), 7);
    assert_eq!(e8, run_on("dot", "corpus/e8.json").1);

    let (_, cusp2, _) = run(&["gen", "cusp", "--len", "2", "--format", "dot"]);
    assert_eq!(cusp2.matches("v1 -- v2;").count(), 2);

    let (_, analyze_dot, _) = run(&[
        "analyze",
        "--input",
        manifest("corpus/chain23.json").to_str().unwrap(),
        "--format",
        "dot",
    ]);
    assert!(analyze_dot.contains("k=-2/5"));
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("splumb.toml");
    let out = dir.path().join("report.json");
    std::fs::write(
        &cfg,
        format!(
            "input = {:?}\noutput = {:?}\n",
            manifest("corpus/g0e3.json").to_str().unwrap(),
            out.to_str().unwrap()
        ),
    )
    .unwrap();
    assert_eq!(run(&["--config", cfg.to_str().unwrap(), "analyze"]).0, 0);
    assert_eq!(
        json(&std::fs::read_to_string(&out).unwrap())["topological_index"],
        3
    );

    std::fs::write(&cfg, "seed = 5\ncount = 3\n").unwrap();
    let (code, text, _) = run(&["gen", "random-nd", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(text.lines().count(), 3);

    std::fs::write(&cfg, "colour = \"red\"\n").unwrap();
    assert_eq!(run(&["--config", cfg.to_str().unwrap(), "analyze"]).0, 2);
}

#[test]
fn help_documents_flags() {
    let (_, out, _) = run(&["analyze", "--help"]);
    for flag in ["--input", "--output", "--format", "--config"] {
        assert!(out.contains(flag), "{flag}");
    }
    let (_, out, _) = run(&["gen", "--help"]);
    for flag in ["--seed", "--count", "random-nd"] {
        assert!(out.contains(flag), "{flag}");
    }
}
