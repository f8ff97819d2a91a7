use std::fs;
use std::path::PathBuf;

use loewner_cli::{run_args, Outcome, EXIT_ERROR, EXIT_FAIL, EXIT_PASS};
use serde_json::Value;
use tempfile::TempDir;

fn cli(args: &[&str]) -> Outcome {
    run_args(std::iter::once("loewner-cert").chain(args.iter().copied()))
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = args.to_vec();
    all.push("--json");
    let out = cli(&all);
    assert!(out.stderr.is_empty(), "{}", out.stderr);
    (out.code, serde_json::from_str(&out.stdout).unwrap())
}

struct Files(TempDir);

impl Files {
    fn new() -> Self {
        Files(tempfile::tempdir().unwrap())
    }

    fn put(&self, name: &str, body: &str) -> String {
        let p: PathBuf = self.0.path().join(name);
        fs::write(&p, body).unwrap();
        p.to_str().unwrap().to_string()
    }
}

#[test]
fn kantorovich_prints_plain_number() {
    let out = cli(&["kantorovich", "--m", "1", "--M", "2", "--p", "2"]);
    assert_eq!((out.code, out.stdout.as_str()), (EXIT_PASS, "1.125\n"));
    let (_, v) = json(&["kantorovich", "--m", "1", "--M", "4", "--p", "2"]);
    assert_eq!(v["K"].as_f64(), Some(1.5625));
}

#[test]
fn beta_text_and_json_agree() {
    let args = ["beta", "--f", "power:2", "--m", "1", "--M", "3", "--alpha", "2"];
    let text: f64 = cli(&args).stdout.trim().parse().unwrap();
    let (_, v) = json(&args);
    assert_eq!(v["beta"].as_f64().unwrap().to_bits(), text.to_bits());
    assert!((text + 1.0).abs() < 1e-9);
    assert_eq!((v["a_f"].as_f64(), v["b_f"].as_f64()), (Some(4.0), Some(-3.0)));
}

#[test]
fn certify_identity_on_equal_operands() {
    let f = Files::new();
    let a = f.put("a.json", r#"{"dim":2,"re":[[1,0.5],[0.5,2]],"im":[[0,0.25],[-0.25,0]]}"#);
    let (code, v) = json(&["certify", "--statement", "gamma-order", "--f", "affine:1,0", "--A", &a, "--B", &a]);
    assert_eq!(code, EXIT_PASS);
    assert_eq!(v["pass"], Value::Bool(true));
    assert!(v["constants"]["gamma"].as_f64().unwrap().abs() < 1e-12);
    assert_eq!(v["inputs"]["file_hashes"].as_array().unwrap().len(), 2);
    assert_eq!(v["solver"]["seed"].as_u64(), Some(42));
    assert_eq!(v["solver"]["restarts"].as_u64(), Some(64));
}

#[test]
fn certify_text_matches_json_numbers() {
    let f = Files::new();
    let a = f.put("a.json", r#"{"dim":2,"re":[[0,0],[0,1]]}"#);
    let b = f.put("b.json", r#"{"dim":2,"re":[[1,0],[0,2]]}"#);
    let args = ["certify", "--statement", "gamma-order", "--f", "power:2", "--A", &a, "--B", &b];
    let text = cli(&args);
    let (code, v) = json(&args);
    assert_eq!((text.code, code), (EXIT_PASS, EXIT_PASS));
    let field = |name: &str| -> f64 {
        let line = text.stdout.lines().find(|l| l.starts_with(&format!("{name}: "))).unwrap();
        line[name.len() + 2..].parse().unwrap()
    };
    assert_eq!(field("gamma").to_bits(), v["constants"]["gamma"].as_f64().unwrap().to_bits());
    assert_eq!(field("slack").to_bits(), v["slack"].as_f64().unwrap().to_bits());
    assert_eq!(field("tol").to_bits(), v["tol"].as_f64().unwrap().to_bits());
    assert!((field("gamma") - 4.0).abs() < 1e-6);
}

#[test]
fn failing_certificate_exits_one() {
    let f = Files::new();
    let a = f.put("a.json", r#"{"dim":2,"re":[[0,0],[0,1]]}"#);
    let b = f.put("b.json", r#"{"dim":2,"re":[[1,0],[0,2]]}"#);
    // a single unoptimized start underestimates gamma, so the slack comes out negative
    let args = ["certify", "--statement", "gamma-order", "--f", "power:2", "--A", &a, "--B", &b];
    let out = cli(&[&args[..], &["--restarts", "1", "--max-iter", "0"]].concat());
    assert_eq!(out.code, EXIT_FAIL);
    assert!(out.stdout.contains("result: fail"));
}

#[test]
fn jensen_and_classical_statements() {
    let f = Files::new();
    let a1 = f.put("a1.json", r#"{"dim":2,"re":[[1,0.2],[0.2,2]]}"#);
    let a2 = f.put("a2.json", r#"{"dim":2,"re":[[0.5,0],[0,1.5]]}"#);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let maps = f.put(
        "maps.json",
        &format!(r#"[{{"variant":"conjugation","V_re":[[{h},0],[0,{h}]]}},{{"variant":"conjugation","V_re":[[{h},0],[0,{h}]]}}]"#),
    );
    for st in ["eta-choi", "vartheta-reverse"] {
        let (code, v) = json(&["certify", "--statement", st, "--f", "exp", "--maps", &maps, "--A", &a1, "--A", &a2]);
        assert_eq!(code, EXIT_PASS, "{st}: {v}");
    }
    for st in ["delta-forward", "theta-reverse"] {
        let args = [
            "certify",
            "--statement",
            st,
            "--f",
            "neglog",
            "--maps",
            &maps,
            "--A",
            &a1,
            "--A",
            &a2,
            "--B",
            &a2,
            "--B",
            &a1,
        ];
        assert_eq!(json(&args).0, EXIT_PASS, "{st}");
    }

    let big = f.put("big.json", r#"{"dim":2,"re":[[2,1],[1,1]]}"#);
    let small = f.put("small.json", r#"{"dim":2,"re":[[1,1],[1,1]]}"#);
    let (code, v) = json(&["certify", "--statement", "furuta", "--A", &big, "--B", &small, "--p", "3"]);
    assert_eq!(code, EXIT_PASS);
    assert!(v["constants"]["K"].as_f64().unwrap() > 1.0);
    let (code, _) = json(&["certify", "--statement", "lowner-heinz", "--A", &small, "--B", &big, "--p", "0.5"]);
    assert_eq!(code, EXIT_PASS);
    let (code, v) = json(&[
        "certify",
        "--statement",
        "alpha-beta-increasing",
        "--f",
        "power:2",
        "--A",
        &a1,
        "--B",
        &a2,
        "--alpha",
        "1",
    ]);
    assert_eq!(code, EXIT_PASS, "{v}");
}

#[test]
fn errors_exit_two_with_diagnostic() {
    let f = Files::new();
    let a = f.put("a.json", r#"{"dim":2,"re":[[0,0],[0,1]]}"#);
    let b = f.put("b.json", r#"{"dim":2,"re":[[1,0],[0,2]]}"#);
    let bad = f.put("bad.json", r#"{"dim":2,"re":[[0,1],[0,1]]}"#);

    let out = cli(&["certify", "--statement", "furuta", "--A", &a, "--B", &b, "--p", "2"]);
    assert_eq!(out.code, EXIT_ERROR);
    assert!(out.stderr.contains("B <= A"), "{}", out.stderr);

    let out = cli(&["certify", "--statement", "gamma-order", "--f", "neglog", "--A", &a, "--B", &b]);
    assert_eq!(out.code, EXIT_ERROR);
    assert!(out.stderr.contains("domain"), "{}", out.stderr);

    let out = cli(&["certify", "--statement", "gamma-order", "--f", "power:2", "--A", &bad, "--B", &b]);
    assert_eq!(out.code, EXIT_ERROR);
    assert!(out.stderr.to_lowercase().contains("hermitian"), "{}", out.stderr);

    let out = cli(&["certify", "--statement", "gamma-order", "--f", "power:2", "--A", "/nonexistent.json", "--B", &b]);
    assert_eq!(out.code, EXIT_ERROR);
    assert!(out.stderr.contains("/nonexistent.json"));

    assert_eq!(cli(&["certify", "--statement", "nope", "--A", &a, "--B", &b]).code, EXIT_ERROR);
    assert_eq!(cli(&["kantorovich", "--m", "2", "--M", "1", "--p", "2"]).code, EXIT_ERROR);
    assert_eq!(cli(&["beta", "--f", "power:0.5", "--m", "1", "--M", "2", "--alpha", "1"]).code, EXIT_ERROR);
    assert_eq!(cli(&["kantorovich", "--m", "1"]).code, EXIT_ERROR);
    assert_eq!(cli(&["fuzz", "--suite", "bogus"]).code, EXIT_ERROR);
}

#[test]
fn gap_with_oracle() {
    let f = Files::new();
    let a = f.put("a.json", r#"{"dim":2,"re":[[0,0],[0,1]]}"#);
    let (code, v) = json(&["gap", "--kind", "gamma", "--f", "power:2", "--A", &a, "--B", &a, "--oracle"]);
    assert_eq!(code, EXIT_PASS);
    assert!((v["value"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    assert_eq!(v["maximizer_re"].as_array().unwrap().len(), 2);
    assert_eq!(v["agreement"]["agree"], Value::Bool(true));
    assert_eq!(v["solver"]["solver"], "multistart");

    let (_, v) = json(&["gap", "--kind", "chebyshev", "--f", "power:2", "--A", &a]);
    assert!(v["agreement"].is_null());
    assert!((v["value"].as_f64().unwrap() - 0.5).abs() < 1e-9);
}

#[test]
fn violation_reports_witness() {
    let (code, v) = json(&["violation", "--trials", "10000", "--seed", "1"]);
    assert_eq!(code, EXIT_PASS);
    assert_eq!(v["found"], Value::Bool(true));
    assert!(v["witness"].as_f64().unwrap() < -1e-8);
    assert_eq!(v["A"]["dim"].as_u64(), Some(2));

    let (code, v) = json(&["violation", "--f", "affine:1,0", "--trials", "50"]);
    assert_eq!(code, EXIT_FAIL);
    assert_eq!(v["found"], Value::Bool(false));
}

#[test]
fn fuzz_sandwich_small_run() {
    let out = cli(&["fuzz", "--suite", "sandwich", "--trials", "10", "--seed", "1"]);
    assert_eq!(out.code, EXIT_PASS);
    assert!(out.stdout.contains("80/80 checks passed"), "{}", out.stdout);
    let (code, v) = json(&["fuzz", "--suite", "sandwich", "--trials", "10", "--seed", "1"]);
    assert_eq!(code, EXIT_PASS);
    assert_eq!(v["suites"][0]["trials"].as_u64(), Some(10));
    assert_eq!(v["suites"][0]["failed"].as_u64(), Some(0));
}

#[test]
fn identical_config_gives_identical_bytes() {
    let f = Files::new();
    let a =
        f.put("a.json", r#"{"dim":3,"re":[[1,0.2,0],[0.2,2,0.1],[0,0.1,0.5]],"im":[[0,0.1,0],[-0.1,0,0],[0,0,0]]}"#);
    let b = f.put("b.json", r#"{"dim":3,"re":[[0.7,0,0],[0,1.2,0],[0,0,2.5]]}"#);
    let args = ["gap", "--kind", "gamma", "--f", "exp", "--A", &a, "--B", &b, "--oracle", "--json"];
    assert_eq!(cli(&args), cli(&args));
    let args = ["fuzz", "--trials", "3", "--seed", "9", "--json"];
    assert_eq!(cli(&args), cli(&args));
}

#[test]
fn json_numbers_have_seventeen_digits() {
    let (_, v) = json(&["kantorovich", "--m", "1", "--M", "3", "--p", "2.5"]);
    let raw = cli(&["kantorovich", "--m", "1", "--M", "3", "--p", "2.5", "--json"]).stdout;
    let k = raw.split("\"K\":").nth(1).unwrap().split(',').next().unwrap();
    let mantissa = k.split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 17, "{k}");
    assert!(v["K"].as_f64().unwrap() > 1.0);
}

#[test]
fn negative_numbers_are_values() {
    // chord of t^2 over [-1, 3] is 2t + 3; max of 2t + 3 - t^2 is 4 at t = 1
    let out = cli(&["beta", "--f", "power:2;dom=(-inf,inf)", "--m", "-1", "--M", "3", "--alpha", "1"]);
    assert_eq!(out.code, EXIT_PASS, "{}", out.stderr);
    assert!((out.stdout.trim().parse::<f64>().unwrap() - 4.0).abs() < 1e-12);
    let a = cli(&["kantorovich", "--m", "1", "--M", "2", "--p", "-1"]);
    assert!((a.stdout.trim().parse::<f64>().unwrap() - 1.125).abs() < 1e-12);
}
