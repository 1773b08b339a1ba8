use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_ratplanes"));
    c.env_remove("FANO_CENSUS_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn golden_path() -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/data/golden_cubic.txt");
    format!("@{}", p.display())
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ratplanes-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn golden_cubic_has_eight_lines() {
    let out = run(&["lines", "count", "--q", "7", "--n", "4", "--form", &golden_path()]);
    let v = stdout_json(&out);
    assert_eq!(v["count"], 8);
    assert_eq!(v["q"], 7);
    assert!(v.get("lines").is_none());

    let out = run(&["lines", "count", "--q", "7", "--form", &golden_path(), "--list", "--threads", "3"]);
    let v = stdout_json(&out);
    let lines = v["lines"].as_array().unwrap();
    assert_eq!(lines.len(), 8);
    assert!(lines.iter().all(|l| l.as_array().unwrap().len() == 2));
}

#[test]
fn verify_appendix_passes() {
    let v = stdout_json(&run(&["verify", "appendix"]));
    assert_eq!(v["smooth"], true);
    assert_eq!(v["count"], 8);
    assert_eq!(v["pass"], true);
}

#[test]
fn bounds_report_for_lines_on_cubic_sixfolds() {
    let v = stdout_json(&run(&["bounds", "report", "--n", "7", "--d", "3", "--r", "1"]));
    assert_eq!(v["prop2_ok"], true);
    assert_eq!(v["fano_dim"], 8);
    assert_eq!(v["N"], 119);
    assert!(v["q_threshold"].as_u64().unwrap() > 0);
}

#[test]
fn census_is_reproducible_across_runs_and_thread_counts() {
    let args = ["census", "run", "--q", "2", "--samples", "1000", "--seed", "42"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let mut one = args.to_vec();
    one.extend(["--threads", "1"]);
    assert_eq!(run(&one).stdout, a.stdout);
    let via_env = bin().args(args).env("FANO_CENSUS_THREADS", "5").output().unwrap();
    assert_eq!(via_env.stdout, a.stdout);

    let v = stdout_json(&a);
    assert_eq!(v["config"]["samples"], 1000);
    assert_eq!(v["stats"]["count"], 1000);
    let total: u64 = v["histogram"].as_object().unwrap().values().map(|x| x.as_u64().unwrap()).sum();
    assert_eq!(total, 1000);
}

#[test]
fn census_csv_output() {
    let out = run(&["census", "run", "--q", "2", "--samples", "50", "--seed", "1", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let (stats, hist) = text.split_once("\n\n").unwrap();
    assert!(stats.starts_with("q,n,d,samples,smooth_only,seed,min,max,median,mean,sd\n2,4,3,50,false,1,"));
    assert!(hist.starts_with("line_count,frequency\n"));

    let base = tmp("q2");
    let out = run(&["census", "run", "--q", "2", "--samples", "50", "--seed", "1", "--format", "csv", "--out", base.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let s = std::fs::read_to_string(format!("{}_stats.csv", base.display())).unwrap();
    let h = std::fs::read_to_string(format!("{}_hist.csv", base.display())).unwrap();
    assert_eq!(format!("{s}\n{h}"), text);
}

#[test]
fn lift_from_found_point_and_from_given_plane() {
    let v = stdout_json(&run(&["planes", "lift", "--q", "2", "--n", "3", "--form", "x0*x1 + x2*x3", "--r", "1"]));
    assert_eq!(v["status"], "Found");
    assert_eq!(v["plane"].as_array().unwrap().len(), 2);

    let plane = "[[0,0,1,0]]";
    let v = stdout_json(&run(&["planes", "lift", "--q", "2", "--n", "3", "--form", "x0*x1 + x2*x3", "--plane", plane, "--r", "1"]));
    assert_eq!(v["status"], "Found");
}

#[test]
fn point_and_smoothness_commands() {
    let fermat = "x0^3 + x1^3 + x2^3 + x3^3 + x4^3";
    let v = stdout_json(&run(&["smooth", "check", "--q", "7", "--form", fermat]));
    assert_eq!(v["smooth"], true);
    let v = stdout_json(&run(&["smooth", "check", "--q", "3", "--form", fermat, "--witness", "1"]));
    assert_eq!(v["smooth"], false);
    assert_eq!(v["witness"]["k"], 1);

    let v = stdout_json(&run(&["point", "find", "--q", "2", "--n", "2", "--form", "x0^2 + x0*x1 + x1^2"]));
    assert_eq!(v["found"], true);
    assert_eq!(v["point"], serde_json::json!([0, 0, 1]));
    let v = stdout_json(&run(&["point", "count", "--q", "2", "--n", "2", "--form", "x0^2 + x0*x1 + x1^2"]));
    assert_eq!(v["count"], 1);
}

#[test]
fn exit_codes_and_diagnostics() {
    let out = run(&["lines", "count", "--q", "6", "--form", "x0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("error[gf::"));

    let out = run(&["lines", "count", "--q", "7", "--form", "x0 +* x1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("error[formring::syntax]"));

    let out = run(&["lines", "count", "--q", "7", "--form", "x0^2 + x1", "--n", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("error[formring::"));

    let out = run(&["lines", "count", "--q", "7", "--form", "x1^3", "--d", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("error[formring::wrong-degree]"));

    let out = run(&["lines", "count", "--q", "7", "--form", "@/nonexistent/form.txt"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("error[cli::io]"));

    let out = run(&["planes", "lift", "--q", "2", "--n", "3", "--form", "x0*x1", "--plane", "[[1,1]]", "--r", "1"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["planes", "lift", "--q", "2", "--n", "3", "--form", "x0*x1 + x2*x3", "--plane", "[[1,1,0,0]]", "--r", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("error[fano::not-contained]"));

    let out = run(&["bounds", "report", "--n", "3", "--d", "3", "--r", "4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("error[bounds::bad-parameters]"));

    let out = run(&["census", "run", "--q", "2", "--samples", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("error[census::empty]"));

    let out = run(&["census", "run", "--q", "2", "--samples", "3", "--threads", "0"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("error[cli::usage]"));

    let out = run(&["lines", "count", "--q", "7"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn json_outputs_reparse() {
    for args in [
        vec!["verify", "appendix"],
        vec!["bounds", "report", "--n", "4", "--d", "3", "--r", "1"],
        vec!["census", "run", "--q", "3", "--samples", "20", "--seed", "9", "--smooth-only"],
        vec!["point", "count", "--q", "4", "--n", "2", "--form", "x0^3 + x1^3 + x2^3"],
    ] {
        let v = stdout_json(&run(&args));
        assert!(v.is_object());
    }
}
