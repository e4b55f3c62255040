use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use discernibility::discernment::{DiscernmentReport, PhysicalityAudit, Verdict};
use discernibility::hilbert::{c, AssemblyState, Vector};
use discernibility::observables::LatticeConfig;
use discernibility::states::{diagonal_pointmass, product_state, save_state, singlet};
use discernibility::symmetry::Sector;
use discernibility::theorems::{verify_theorem, TheoremId, TheoremReport, VerifyConfig};
use tempfile::TempDir;

fn discern(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_discern")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write_state(dir: &TempDir, name: &str, st: &AssemblyState) -> PathBuf {
    let path = dir.path().join(name);
    save_state(st, &path).unwrap();
    path
}

fn discern_json(state: &Path, extra: &[&str]) -> DiscernmentReport {
    let mut args = vec!["discern", "--state", state.to_str().unwrap(), "--format", "json"];
    args.extend_from_slice(extra);
    let out = discern(&args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn verify_theorem_one_json() {
    let out = discern(&["verify", "--theorem", "1", "--lattice-sites", "8", "--trials", "200", "--seed", "7", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let report: TheoremReport = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report.passed);
    assert_eq!(report.trials.len(), 200);
    assert!(report.trials.iter().all(|t| t.witness > 0.0));
    assert_eq!(report.metadata.seed, 7);
    assert!(report.metadata.rng.contains("ChaCha20"));
}

#[test]
fn json_report_round_trips() {
    let out = discern(&["verify", "--theorem", "3", "--trials", "20", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let parsed: TheoremReport = serde_json::from_slice(&out.stdout).unwrap();
    let direct = verify_theorem(TheoremId::T3, &VerifyConfig { trials: 20, ..Default::default() }).unwrap();
    assert_eq!(parsed, direct);
    let again = serde_json::to_string_pretty(&parsed).unwrap() + "\n";
    assert_eq!(again, stdout(&out));
}

#[test]
fn verify_sms3_text_shows_dual_polarity() {
    let out = discern(&["verify", "--theorem", "SMS3", "--spin", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("[[true, false], [false, true]]"), "{text}");
    assert!(text.trim_end().ends_with("PASSED"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(discern(&["verify", "--theorem", "7"]).status.code(), Some(2));
    assert_eq!(discern(&["verify"]).status.code(), Some(2));
    assert_eq!(discern(&["verify", "--theorem", "1", "--trials", "0"]).status.code(), Some(2));
    assert_eq!(discern(&["verify", "--theorem", "SMS3", "--spin", "0"]).status.code(), Some(2));
    assert_eq!(discern(&["verify", "--theorem", "SMS3", "--spin", "0.3"]).status.code(), Some(2));
    assert_eq!(discern(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(discern(&["--help"]).status.code(), Some(0));
}

#[test]
fn failing_verify_exits_one_with_summary() {
    // A commutator threshold far above the lattice commutator norm makes C(x,x) fail.
    let out = discern(&["verify", "--theorem", "SMS2", "--trials", "5", "--threshold", "1e6"]);
    assert_eq!(out.status.code(), Some(1));
    let summary: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(summary["passed"], false);
    assert!(!summary["failed_checks"].as_array().unwrap().is_empty());
}

#[test]
fn csv_columns_and_precision() {
    let out = discern(&["verify", "--theorem", "2", "--trials", "5", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("trial,pair_x,pair_y,relation,witness,verdict"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), 6);
    let mantissa = row[4].split('e').next().unwrap().replace(['-', '.'], "");
    assert_eq!(mantissa.len(), 17);
    assert_eq!(row[5], "weakly-discerned");
}

#[test]
fn discern_spin_states() {
    let dir = TempDir::new().unwrap();
    let s = write_state(&dir, "singlet.json", &singlet());
    let up = write_state(&dir, "up.json", &product_state(&[2, 2], &[0, 0], Sector::Symmetric).unwrap());
    let r = discern_json(&s, &["--relation", "R", "--quantity", "Sz"]);
    assert_eq!(r.verdict, Verdict::WeaklyDiscerned);
    assert!((r.witnesses[0][1] - 0.25).abs() < 1e-15);
    assert_eq!(discern_json(&up, &["--relation", "R", "--quantity", "Sz"]).verdict, Verdict::NotDiscerned);
    assert_eq!(discern_json(&up, &["--relation", "R", "--quantity", "Sx"]).verdict, Verdict::WeaklyDiscerned);
    let t = discern_json(&s, &["--relation", "T"]);
    assert_eq!(t.verdict, Verdict::WeaklyDiscerned);
    assert!(t.truth_table.get(0, 0) && !t.truth_table.get(0, 1));
    let rt = discern_json(&s, &["--relation", "Rt", "--t", "-2"]);
    assert_eq!(rt.verdict, Verdict::WeaklyDiscerned);
}

#[test]
fn discern_pointmass_dprime_vs_momentum() {
    let dir = TempDir::new().unwrap();
    let cfg = LatticeConfig::new(4).unwrap();
    let f: Vec<_> = [0.4, -0.2, 0.8, 0.1].iter().map(|&x| c(x, 0.1)).collect();
    let norm = f.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let f: Vec<_> = f.iter().map(|z| z / norm).collect();
    let path = write_state(&dir, "pm.json", &diagonal_pointmass(&f, cfg, 3).unwrap());
    assert_eq!(discern_json(&path, &["--relation", "Dprime"]).verdict, Verdict::NotDiscerned);
    let p = discern_json(&path, &["--relation", "DprimeP"]);
    assert_eq!(p.verdict, Verdict::WeaklyDiscerned);
    let again: DiscernmentReport = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
    assert_eq!(again, p);
}

#[test]
fn discern_rejects_bad_inputs() {
    let dir = TempDir::new().unwrap();
    let s = write_state(&dir, "singlet.json", &singlet());
    let missing = dir.path().join("missing.json");
    let out = discern(&["discern", "--state", missing.to_str().unwrap(), "--relation", "T"]);
    assert_eq!(out.status.code(), Some(2));
    let out = discern(&["discern", "--state", s.to_str().unwrap(), "--relation", "C", "--lattice-sites", "8"]);
    assert_eq!(out.status.code(), Some(2));
    let out = discern(&["discern", "--state", s.to_str().unwrap(), "--relation", "R"]);
    assert_eq!(out.status.code(), Some(2));
    let garbage = dir.path().join("garbage.json");
    std::fs::write(&garbage, "{\"format\": 1}").unwrap();
    let out = discern(&["discern", "--state", garbage.to_str().unwrap(), "--relation", "T"]);
    assert_eq!(out.status.code(), Some(2));
    let qutrits = AssemblyState::pure(Vector::from_element(9, c(1.0 / 3.0, 0.0)), vec![3, 3], Sector::Symmetric).unwrap();
    let q = write_state(&dir, "qutrits.json", &qutrits);
    let out = discern(&["discern", "--state", q.to_str().unwrap(), "--relation", "T", "--spin", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
}

fn audit(args: &[&str]) -> PhysicalityAudit {
    let mut all = vec!["audit", "--format", "json"];
    all.extend_from_slice(args);
    let out = discern(&all);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn audit_examples() {
    let rt = audit(&["--relation", "Rt"]);
    assert!(!rt.is_physical() && rt.is_trivial());
    assert!(audit(&["--relation", "R", "--quantity", "Q"]).is_physical());
    assert!(audit(&["--relation", "T"]).is_physical());
    assert!(!audit(&["--relation", "C"]).is_physical());
    assert!(audit(&["--relation", "Dprime", "--lattice-sites", "4"]).is_physical());
    assert_eq!(discern(&["audit", "--relation", "R"]).status.code(), Some(2));
    assert_eq!(discern(&["audit", "--relation", "Q"]).status.code(), Some(2));
}

#[test]
fn sample_is_deterministic() {
    let args = ["sample", "--relation", "Rprime", "--quantity", "Q", "--trials", "1000", "--seed", "3", "--format", "csv"];
    let a = discern(&args);
    let b = discern(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert_eq!(text.lines().count(), 1001);
    let min = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(4).unwrap().parse::<f64>().unwrap())
        .fold(f64::INFINITY, f64::min);
    assert!(min > 0.0);
    assert!(String::from_utf8_lossy(&a.stderr).contains("summary"));
    assert_eq!(discern(&["sample", "--relation", "Rprime", "--quantity", "Q", "--trials", "0"]).status.code(), Some(2));
}

#[test]
fn output_flag_writes_file() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("report.json");
    let out = discern(&["verify", "--theorem", "SMS1", "--trials", "10", "--format", "json", "--output", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let report: TheoremReport = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(report.passed);
}
