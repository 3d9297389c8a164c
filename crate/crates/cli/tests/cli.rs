use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn khr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_khr"))
        .args(args)
        .env("NO_COLOR", "1")
        .output()
        .expect("khr runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn repo_file(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .join(rel)
}

fn validator() -> jsonschema::Validator {
    let text = std::fs::read_to_string(repo_file("docs/report.schema.json")).unwrap();
    let schema: Value = serde_json::from_str(&text).unwrap();
    jsonschema::validator_for(&schema).expect("schema compiles")
}

fn assert_valid(v: &jsonschema::Validator, report: &Value) {
    let errors: Vec<String> = v
        .iter_errors(report)
        .map(|e| format!("{} at {}", e, e.instance_path))
        .collect();
    assert!(errors.is_empty(), "{errors:#?}\n{report:#}");
}

fn json_report(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.push("--json");
    let out = khr(&all);
    assert_eq!(code(&out), 0, "{args:?}: {}", stderr(&out));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn temp_config(name: &str, body: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn every_report_validates_against_the_schema() {
    let v = validator();
    let c00 = temp_config("c00.toml", "[space]\nkind = \"c00\"\n");
    let vec2 = temp_config(
        "vec2.toml",
        "[space]\nkind = \"vector\"\ndim = 2\n[regulator]\nkind = \"zero\"\n",
    );
    let c00 = c00.to_str().unwrap();
    let vec2 = vec2.to_str().unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["integrate", "--f", "t"],
        vec![
            "integrate",
            "--f",
            "step:0.5:1:2",
            "--probes",
            "const:3,exp",
        ],
        vec![
            "integrate",
            "--f",
            "pieces:[0,0.5]=1;(0.5,1]=2",
            "--on",
            "[0.25,1]",
        ],
        vec!["--config", c00, "integrate", "--f", "const:1,2"],
        vec!["--config", vec2, "integrate", "--f", "const:0"],
        vec!["phi", "--F", "[0,1]"],
        vec![
            "phi",
            "--F",
            "simple:[0,0.5]=[0,1];(0.5,1]=[2,3]",
            "--member",
            "2.5",
        ],
        vec!["phi", "--F", "between:t;t + 1", "--member", "1"],
        vec![
            "compare",
            "--F",
            "simple:[0,0.5]=[0,1];(0.5,1]=[2,3]",
            "--on",
            "[0,0.75]",
        ],
        vec!["counterexample", "--n-max", "6"],
        vec!["suite", "counterexample"],
        vec!["suite", "lattice"],
    ];
    for args in cases {
        assert_valid(&v, &json_report(&args));
    }
}

#[test]
fn schema_rejects_malformed_reports() {
    let v = validator();
    let good = json_report(&["phi", "--F", "[0,1]"]);
    assert_valid(&v, &good);
    let mut bad = good.clone();
    bad["oracle"]["lo"] = serde_json::json!({ "complex": 1.0 });
    assert!(!v.is_valid(&bad));
    let mut bad = good.clone();
    bad["command"] = "integrate".into();
    assert!(!v.is_valid(&bad));
    let mut bad = good;
    bad["extra"] = 1.into();
    assert!(!v.is_valid(&bad));
}

#[test]
fn integrate_exit_codes() {
    let ok = khr(&["integrate", "--f", "t", "--on", "[0,1]"]);
    assert_eq!(code(&ok), 0, "{}", stderr(&ok));
    assert!(stdout(&ok).contains("0.5"), "{}", stdout(&ok));

    let bad = khr(&["integrate", "--f", "counterexample"]);
    assert_eq!(code(&bad), 2);
    assert!(
        stderr(&bad).contains("not KH-integrable"),
        "{}",
        stderr(&bad)
    );

    assert_eq!(code(&khr(&["integrate"])), 1);
    assert_eq!(code(&khr(&["integrate", "--f", "nonsense("])), 1);
    assert_eq!(code(&khr(&["integrate", "--f", "t", "--on", "[2,3]"])), 1);
    assert_eq!(
        code(&khr(&["integrate", "--f", "t", "--probes", "bogus"])),
        1
    );
    assert_eq!(code(&khr(&["frobnicate"])), 1);
    assert_eq!(code(&khr(&["--help"])), 0);
}

#[test]
fn zero_integrand_with_zero_regulator() {
    let cfg = temp_config("zero.toml", "[regulator]\nkind = \"zero\"\n");
    let rep = json_report(&[
        "--config",
        cfg.to_str().unwrap(),
        "integrate",
        "--f",
        "const:0",
    ]);
    assert_eq!(rep["certificate"]["value"]["scalar"], 0.0);
}

#[test]
fn phi_examples_and_exit_codes() {
    let rep = json_report(&["phi", "--F", "[0,1]", "--on", "[0,1]"]);
    assert_eq!(rep["oracle"]["lo"]["scalar"], 0.0);
    assert_eq!(rep["oracle"]["hi"]["scalar"], 1.0);

    let two_piece = "simple:[0,0.5]=[0,1];(0.5,1]=[2,3]";
    let rep = json_report(&["phi", "--F", two_piece]);
    assert_eq!(rep["oracle"]["lo"]["scalar"], 1.0);
    assert_eq!(rep["oracle"]["hi"]["scalar"], 2.0);
    let rep = json_report(&["phi", "--F", two_piece, "--member", "2.5"]);
    assert_eq!(rep["membership"]["verdict"], "non-member");
    let rep = json_report(&["phi", "--F", two_piece, "--member", "1.5"]);
    assert_eq!(rep["membership"]["verdict"], "member");

    let out = khr(&["phi", "--F", "singleton:counterexample"]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    assert_eq!(code(&khr(&["phi", "--F", "[1,0]"])), 1);
}

#[test]
fn compare_two_piece_example_agrees() {
    let rep = json_report(&["compare", "--F", "simple:[0,0.5]=[0,1];(0.5,1]=[2,3]"]);
    assert_eq!(rep["passed"], true);
    let r = &rep["report"];
    for key in ["sumFormula", "aumannHull", "phiOracle"] {
        assert_eq!(r[key]["lo"]["scalar"], 1.0, "{key}");
        assert_eq!(r[key]["hi"]["scalar"], 2.0, "{key}");
    }
    // Φ is only computed in closed form for simple multifunctions.
    assert_eq!(code(&khr(&["compare", "--F", "between:t;t + 1"])), 1);
}

#[test]
fn suite_exit_codes() {
    let out = khr(&["suite", "counterexample"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("unbounded-verdict"));
    let out = khr(&["suite", "nope"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("nope"));
}

#[test]
fn suite_lattice_with_zero_regulator_passes() {
    let cfg = temp_config("zero-lattice.toml", "[regulator]\nkind = \"zero\"\n");
    let rep = json_report(&["--config", cfg.to_str().unwrap(), "suite", "lattice"]);
    assert_eq!(rep["report"]["passed"], true, "{rep:#}");
}

#[test]
fn counterexample_verdict() {
    let rep = json_report(&["counterexample"]);
    assert_eq!(rep["report"]["verdict"], "UNBOUNDED");
    assert_eq!(rep["report"]["rows"].as_array().unwrap().len(), 19);
    assert_eq!(code(&khr(&["counterexample", "--n-max", "1"])), 1);
}

#[test]
fn reports_are_deterministic_and_seeded() {
    let run = |seed: &str| khr(&["integrate", "--f", "sin:7", "--seed", seed, "--json"]).stdout;
    assert_eq!(run("5"), run("5"));
    let a: Value = serde_json::from_slice(&run("5")).unwrap();
    assert_eq!(a["seed"], 5);

    let suite = |extra: &[&str]| {
        let mut args = vec!["suite", "measure", "--seed", "9", "--json"];
        args.extend_from_slice(extra);
        khr(&args).stdout
    };
    let parallel = suite(&[]);
    assert_eq!(parallel, suite(&[]));
    assert_eq!(parallel, suite(&["--sequential"]));
}

#[test]
fn out_writes_the_json_report() {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("phi-report.json");
    let _ = std::fs::remove_file(&path);
    let out = khr(&["phi", "--F", "[0,1]", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("oracle"));
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_valid(&validator(), &written);
    assert_eq!(written["command"], "phi");
}

#[test]
fn no_color_summary_is_plain() {
    let out = khr(&["integrate", "--f", "t"]);
    let text = stdout(&out);
    assert!(!text.contains('\x1b'), "{text:?}");
    assert!(text.starts_with("ok"), "{text:?}");
}

#[test]
fn config_errors_name_the_field() {
    let cfg = temp_config("bad.toml", "[sampling]\nmax_level = 99\n");
    let out = khr(&["--config", cfg.to_str().unwrap(), "integrate", "--f", "t"]);
    assert_eq!(code(&out), 1);
    assert!(
        stderr(&out).contains("sampling.max_level"),
        "{}",
        stderr(&out)
    );
    let out = khr(&["--config", "/nonexistent/khr.toml", "integrate", "--f", "t"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn example_config_loads() {
    let path = repo_file("docs/example.toml");
    let rep = json_report(&["--config", path.to_str().unwrap(), "phi", "--F", "[0,1]"]);
    assert_eq!(rep["seed"], 42);
}
