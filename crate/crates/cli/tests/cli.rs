use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn pshlab(args: &[&str], env_out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pshlab"));
    cmd.args(args).env_remove("PSHLAB_OUT");
    if let Some(p) = env_out {
        cmd.env("PSHLAB_OUT", p);
    }
    cmd.output().expect("binary runs")
}

fn run_config(config: &Path, out: &Path, extra: &[&str]) -> (i32, Value, Output) {
    let mut args = vec!["run", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = pshlab(&args, None);
    let report: Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).expect("report written")).unwrap();
    (o.status.code().unwrap(), report, o)
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

const CLASSIFY_BAD_CHI: &str = r#"{
  "schema_version": 1,
  "model": "toric1d",
  "experiment": { "classify": {
    "family": { "recipe": { "family": "constant", "potential": { "scale": 0.5, "cap": 2.0 } } },
    "j_max": 16,
    "chi": CHI
  } }
}"#;

#[test]
fn constant_family_converges_in_all_four_modes() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, r, _) = run_config(&configs().join("classify_constant.json"), tmp.path(), &[]);
    assert_eq!(code, 0);
    assert_eq!(r["status"], "pass");
    for mode in ["l1", "capacity", "quasi_monotone", "energy"] {
        assert_eq!(r["results"]["verdicts"][mode]["status"], "converges", "{mode}");
    }
}

#[test]
fn malformed_chi_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    for (i, chi) in
        [r#"{ "kind": "cubic" }"#, r#"{ "kind": "power", "p": -1.0 }"#, r#"{ "kind": "power" }"#].iter().enumerate()
    {
        let cfg = write(tmp.path(), &format!("bad{i}.json"), &CLASSIFY_BAD_CHI.replace("CHI", chi));
        let out = tmp.path().join(format!("out{i}"));
        let (code, r, o) = run_config(&cfg, &out, &[]);
        assert_eq!(code, 2, "{chi}");
        assert_eq!(r["status"], "config_error");
        let err = r["error"].as_str().unwrap();
        assert!(err.contains("experiment.classify.chi"), "{err}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("chi"));
        let v = pshlab(&["validate", cfg.to_str().unwrap()], None);
        assert_eq!(v.status.code(), Some(2));
    }
}

#[test]
fn schema_errors_name_line_and_field() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "typo.json",
        "{\n  \"schema_version\": 1,\n  \"model\": \"toric1d\",\n  \"experiment\": { \"sweep\": { \"eps\": [1.0], \"capz\": [1.0] } }\n}\n",
    );
    let (code, r, _) = run_config(&cfg, &tmp.path().join("out"), &[]);
    assert_eq!(code, 2);
    let err = r["error"].as_str().unwrap();
    assert!(err.contains("line 4") && err.contains("capz"), "{err}");

    let cfg = write(
        tmp.path(),
        "v2.json",
        r#"{ "schema_version": 2, "model": "toric1d", "experiment": { "acceptance": {} } }"#,
    );
    assert_eq!(pshlab(&["validate", cfg.to_str().unwrap()], None).status.code(), Some(2));
    let cfg = write(
        tmp.path(),
        "model.json",
        r#"{ "schema_version": 1, "model": "atoms_p1", "experiment": { "ma": { "potential": { "toric1d": {} } } } }"#,
    );
    assert_eq!(pshlab(&["validate", cfg.to_str().unwrap()], None).status.code(), Some(2));
    let missing = tmp.path().join("missing.json");
    let (code, r, _) = run_config(&missing, &tmp.path().join("out2"), &[]);
    assert_eq!((code, r["status"].as_str()), (2, Some("config_error")));
}

#[test]
fn every_shipped_config_validates() {
    let mut n = 0;
    for e in fs::read_dir(configs()).unwrap() {
        let p = e.unwrap().path();
        if p.extension().is_some_and(|x| x == "json") {
            let o = pshlab(&["validate", p.to_str().unwrap()], None);
            assert_eq!(o.status.code(), Some(0), "{}: {}", p.display(), String::from_utf8_lossy(&o.stderr));
            n += 1;
        }
    }
    assert!(n >= 10);
}

#[test]
fn failed_check_exits_one_and_still_writes_report() {
    let tmp = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(configs().join("classify_constant.json"))
        .unwrap()
        .replace(r#""energy": "converges""#, r#""energy": "diverges""#);
    let cfg = write(tmp.path(), "wrong.json", &text);
    let (code, r, o) = run_config(&cfg, tmp.path(), &[]);
    assert_eq!(code, 1);
    assert_eq!(r["status"], "check_failure");
    let failed: Vec<&Value> = r["checks"].as_array().unwrap().iter().filter(|c| c["passed"] == false).collect();
    assert_eq!(failed.len(), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("energy verdict"));
    assert!(tmp.path().join("capacity.csv").exists());
}

#[test]
fn capacity_diagnostics_have_documented_header() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, r, _) = run_config(&configs().join("classify_sandwich.json"), tmp.path(), &[]);
    assert_eq!(code, 0);
    let text = fs::read_to_string(tmp.path().join("capacity.csv")).unwrap();
    let mut lines = text.lines().skip_while(|l| l.starts_with('#'));
    assert_eq!(lines.next(), Some("j,delta,cap"));
    assert!(text.starts_with("# "));
    let rows = lines.count();
    let entry = r["diagnostics"].as_array().unwrap().iter().find(|d| d["name"] == "capacity").unwrap();
    assert_eq!(entry["rows"].as_u64(), Some(rows as u64));
    assert_eq!(entry["file"], "capacity.csv");
}

#[test]
fn empty_table_writes_no_file_and_is_noted() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "smooth.json",
        r#"{ "schema_version": 1, "model": "toric1d", "experiment": { "ma": { "potential": { "toric1d": { "scale": 0.5 } } } } }"#,
    );
    let (code, r, _) = run_config(&cfg, tmp.path(), &[]);
    assert_eq!(code, 0);
    let entry = r["diagnostics"].as_array().unwrap().iter().find(|d| d["name"] == "ma_atoms").unwrap();
    assert_eq!(entry["rows"], 0);
    assert!(entry["file"].is_null());
    assert!(entry["note"].as_str().unwrap().contains("no file"));
    assert!(!tmp.path().join("ma_atoms.csv").exists());
    assert!(tmp.path().join("ma_density.csv").exists());
}

#[test]
fn sweep_is_long_format_and_independent_of_jobs() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let cfg = configs().join("sweep.json");
    assert_eq!(run_config(&cfg, &a, &["--jobs", "1"]).0, 0);
    let (code, r, _) = run_config(&cfg, &b, &["--jobs", "4"]);
    assert_eq!(code, 0);
    assert_eq!(r["runtime"]["jobs"], 4);
    let (x, y) = (fs::read(a.join("sweep.csv")).unwrap(), fs::read(b.join("sweep.csv")).unwrap());
    assert_eq!(x, y);
    let text = String::from_utf8(x).unwrap();
    let mut lines = text.lines().skip_while(|l| l.starts_with('#'));
    assert_eq!(lines.next(), Some("eps,C,I_chi"));
    assert_eq!(lines.count(), 5 * 6);
}

#[test]
fn env_var_overrides_out_flag() {
    let tmp = tempfile::tempdir().unwrap();
    let (flag, env) = (tmp.path().join("flag"), tmp.path().join("env"));
    let cfg = configs().join("ma_toric2d.json");
    let o = pshlab(&["run", cfg.to_str().unwrap(), "--out", flag.to_str().unwrap()], Some(&env));
    assert_eq!(o.status.code(), Some(0));
    assert!(env.join("report.json").exists());
    assert!(!flag.exists());
}

#[test]
fn seed_is_recorded_and_drives_random_inputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "solve.json",
        r#"{ "schema_version": 1, "model": "toric1d", "seed": 3, "experiment": { "solve": { "measure": "random" } } }"#,
    );
    let run = |dir: &str, extra: &[&str]| run_config(&cfg, &tmp.path().join(dir), extra);
    let (c1, r1, _) = run("one", &[]);
    let (c2, r2, _) = run("two", &[]);
    let (c3, r3, _) = run("three", &["--seed", "4"]);
    assert_eq!((c1, c2, c3), (0, 0, 0));
    assert_eq!((r1["seed"].as_u64(), r3["seed"].as_u64()), (Some(3), Some(4)));
    assert_eq!(r1["results"], r2["results"]);
    assert_ne!(r1["results"]["sup_phi"], r3["results"]["sup_phi"]);
}

#[test]
fn echoed_config_reproduces_identical_diagnostics() {
    let tmp = tempfile::tempdir().unwrap();
    for name in ["classify_sandwich.json", "envelope_toric1d.json", "distance.json", "solve.json"] {
        let first = tmp.path().join(format!("first-{name}"));
        let (code, r, _) = run_config(&configs().join(name), &first, &[]);
        assert_eq!(code, 0, "{name}");
        let echo = write(tmp.path(), &format!("echo-{name}"), &serde_json::to_string_pretty(&r["config"]).unwrap());
        let second = tmp.path().join(format!("second-{name}"));
        let (code, r2, _) = run_config(&echo, &second, &[]);
        assert_eq!(code, 0);
        assert_eq!(r["results"], r2["results"], "{name}");
        for d in r["diagnostics"].as_array().unwrap() {
            if let Some(f) = d["file"].as_str() {
                assert_eq!(fs::read(first.join(f)).unwrap(), fs::read(second.join(f)).unwrap(), "{name}: {f}");
            }
        }
    }
}

#[test]
fn acceptance_suite_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, r, o) = run_config(&configs().join("acceptance.json"), tmp.path(), &[]);
    assert_eq!(code, 0, "{}", String::from_utf8_lossy(&o.stderr));
    let criteria = r["results"]["criteria"].as_array().unwrap();
    assert_eq!(criteria.len(), 11);
    assert!(criteria.iter().all(|c| c["passed"] == true));
    for c in r["checks"].as_array().unwrap() {
        assert!(c["tolerance"].is_number(), "{c}");
    }
}
