use std::path::{Path, PathBuf};
use std::process::Command;

use fbu_core::harness::RunConfig;

fn fbu() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fbu"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn shipped_configs_validate() {
    let mut n = 0;
    for e in std::fs::read_dir(configs()).unwrap() {
        let p = e.unwrap().path();
        if p.extension().is_some_and(|x| x == "toml") {
            RunConfig::from_file(&p).unwrap_or_else(|err| panic!("{}: {err}", p.display()));
            n += 1;
        }
    }
    assert!(n >= 5);
}

#[test]
fn reruns_are_byte_identical_for_any_thread_count() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = configs().join("contact-three-body.toml");
    for (dir, threads) in [(a.path(), "1"), (b.path(), "3")] {
        let st = fbu()
            .args(["--threads", threads, "--grid", "24,20", "--out"])
            .arg(dir)
            .arg("run")
            .arg(&cfg)
            .output()
            .unwrap();
        assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    }
    let fa = files(a.path());
    assert_eq!(fa, files(b.path()));
    let names: Vec<&str> = fa.iter().map(|(n, _)| n.as_str()).collect();
    assert!(names.contains(&"contact-three-body_three_body.csv"));
    assert!(names.contains(&"contact-three-body_summary.json"));
    assert!(names.contains(&"contact-three-body.gp"));
    assert!(names.iter().any(|n| n.contains("_wf_")));

    let csv = String::from_utf8(fa.iter().find(|(n, _)| n.ends_with("_three_body.csv")).unwrap().1.clone()).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# units:"));
    assert_eq!(lines.next().unwrap(), "alpha,parity,n,epsilon,residual,grid_NP,grid_NK,status");
    assert!(csv.contains(",24,20,ok"));

    let wf = String::from_utf8(fa.iter().find(|(n, _)| n.contains("_wf_")).unwrap().1.clone()).unwrap();
    assert_eq!(wf.lines().nth(1).unwrap(), "P,K,re_phi,im_phi");
    assert_eq!(wf.lines().count(), 2 + 24 * 20);

    let json: serde_json::Value =
        serde_json::from_slice(&fa.iter().find(|(n, _)| n.ends_with("_summary.json")).unwrap().1).unwrap();
    assert_eq!(json["schema_version"], 1);
    assert_eq!(json["all_passed"], true);
    assert_eq!(json["config"]["grid"]["np"], 24);
}

#[test]
fn exit_codes_follow_the_flags() {
    let ok = fbu().args(["two-body", "solve", "--shape", "contact", "--v0", "-0.5"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("PASS two_body.contact_exact"));

    let unbound = fbu().args(["two-body", "solve", "--shape", "contact", "--v0", "0.5"]).output().unwrap();
    assert_eq!(unbound.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&unbound.stdout).contains("FAIL two_body.solved"));

    let bad = fbu().args(["two-body", "solve", "--shape", "nope", "--v0", "-0.5"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("nope"));

    let missing = fbu().args(["run", "/nonexistent/config.toml"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn shapes_list_covers_the_catalog() {
    let out = fbu().args(["shapes", "list"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for name in fbu_core::potential::CATALOG {
        assert!(text.contains(name), "{name}");
    }
    assert!(text.contains("type-II"));
}

#[test]
fn sweep_subcommand_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = fbu()
        .args(["two-body", "sweep", "--shape", "gaussian", "--start", "-0.08", "--halvings", "4", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let csv = std::fs::read_to_string(dir.path().join("two-body-sweep_two_body.csv")).unwrap();
    assert_eq!(
        csv.lines().nth(1).unwrap(),
        "shape,v0,q0,E0,q0_asymptotic,overlap,symmetric_fraction,norm_residual,status"
    );
    assert_eq!(csv.lines().count(), 7);
    assert!(std::fs::read_to_string(dir.path().join("two-body-sweep.gp")).unwrap().contains("set logscale xy"));
}

#[test]
fn three_body_contact_subcommand() {
    let out = fbu()
        .args(["three-body", "contact", "--alpha", "5", "--parity", "even,odd", "--states", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("-2.366123854"));
    assert!(text.contains("-1.210270625"));
}
