use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ncup_core::extremizers::biprojection_from_subgroup;
use ncup_core::group::enumerate_subgroups;
use ncup_core::harness::checks::{check_donoho_stark, check_hirschman_beckner};
use ncup_core::two_box::ElementLiteral;
use ncup_core::TwoBoxPair;
use serde_json::Value;

fn ncup(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ncup")).args(args).output().expect("spawn ncup")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn verify_writes_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = ncup(&["verify", "--model", "group:cyclic:4", "--model", "spin:2", "--samples", "30", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&out);
    assert_eq!(r["header"]["tool"], "ncup");
    assert_eq!(r["models"].as_array().unwrap().len(), 2);
    assert_eq!(r["summary"]["failed"], 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("plancherel"));
}

#[test]
fn verify_csv_and_config_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"models": ["group:symmetric:3"], "samples": 20, "suites": ["structure"]}"#).unwrap();
    let out = dir.path().join("r.csv");
    let o = ncup(&["verify", "--config", cfg.to_str().unwrap(), "--model", "group:cyclic:3", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "model,suite,name,samples,min_margin,max_violation,tolerance,verdict");
    let rows: Vec<&str> = lines.collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.starts_with("group:cyclic:3,structure,") && r.ends_with(",pass")));
}

#[test]
fn verify_is_deterministic_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for (p, t) in [(&a, "1"), (&b, "4")] {
        let o = ncup(&["verify", "--model", "group:symmetric:3", "--samples", "40", "--seed", "9", "--parallel", t, "--out", p.to_str().unwrap()]);
        assert_eq!(code(&o), 0);
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn failing_checks_exit_two() {
    // A zero tolerance rejects round-off in the equality checks.
    let o = ncup(&["verify", "--model", "group:cyclic:6", "--samples", "50", "--suite", "structure", "--tol", "0"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}

#[test]
fn usage_errors_exit_one() {
    let o = ncup(&["verify"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(code(&ncup(&["verify", "--model", "group:cyclic:4", "--tol", "bogus=1"])), 1);
    assert_eq!(code(&ncup(&["verify", "--model", "group:nonsense:4"])), 1);
    assert_eq!(code(&ncup(&["verify", "--model", "group:cyclic:4", "--suite", "nope"])), 1);
    assert_eq!(code(&ncup(&["frobnicate"])), 1);
    assert_eq!(code(&ncup(&["--help"])), 0);
}

#[test]
fn minimizers_lists_every_bishift() {
    let o = ncup(&["minimizers", "--model", "group:cyclic:6"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["count"], 24);
    assert_eq!(v["expected_count"], 24);
    assert_eq!(v["certificates"].as_array().unwrap().len(), 24);
    let o = ncup(&["minimizers", "--model", "group:symmetric:3", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 33);
    assert_eq!(code(&ncup(&["minimizers", "--model", "spin:3"])), 1);
    assert_eq!(code(&ncup(&["minimizers"])), 1);
}

#[test]
fn uniqueness_single_pair_and_table() {
    // {0, 1} is the subgroup generated by the transposition 021.
    let o = ncup(&["uniqueness", "--model", "group:symmetric:3", "--subgroup", "0,1", "--g", "2", "--h", "1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("dimension=1"));

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("u.json");
    let o = ncup(&["uniqueness", "--model", "group:cyclic:6", "--all-pairs", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let rows = read_json(&out);
    // Σ_H |H|·[G:H] = 4·6 for cyclic:6.
    assert_eq!(rows.as_array().unwrap().len(), 24);
    assert!(rows.as_array().unwrap().iter().all(|r| r["dimension"] == 1));
}

#[test]
fn uniqueness_mismatch_and_bad_input() {
    let o = ncup(&["uniqueness", "--model", "group:cyclic:4", "--subgroup", "0,2", "--tilde-subgroup", "0", "--g", "1", "--h", "0"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("mismatched"));
    // Different characters for the tilde shift and the comparison bi-shift.
    let o = ncup(&["uniqueness", "--model", "group:cyclic:4", "--subgroup", "0,2", "--g", "1", "--h", "0", "--chi", "1"]);
    assert_eq!(code(&o), 2);
    assert_eq!(code(&ncup(&["uniqueness", "--model", "group:symmetric:3", "--subgroup", "0,3", "--g", "1", "--h", "0"])), 1);
    assert_eq!(code(&ncup(&["uniqueness", "--model", "group:cyclic:4", "--subgroup", "0,2"])), 1);
}

#[test]
fn dump_cyclic_two_blocks() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d");
    let o = ncup(&["dump", "--model", "group:cyclic:2", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let dims = |name: &str| {
        let mut rdr = csv::Reader::from_path(out.join(name)).unwrap();
        rdr.records().map(|r| {
            let r = r.unwrap();
            (r[0].parse::<usize>().unwrap(), r[1].parse::<usize>().unwrap())
        })
        .fold((0, 0), |(a, b), (i, j)| (a.max(i + 1), b.max(j + 1)))
    };
    assert_eq!(dims("fourier_coords_plus.csv"), (2, 2));
    assert_eq!(dims("fourier_dense_plus.csv"), (4, 4));
    assert_eq!(dims("fourier_dense_minus.csv"), (4, 4));
    let model = read_json(&out.join("model.json"));
    assert_eq!(model["delta"].as_f64().unwrap(), 2f64.sqrt());
    assert_eq!(read_json(&out.join("biprojections.json")).as_array().unwrap().len(), 2);
}

#[test]
fn dump_round_trip_reproduces_margins() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d");
    assert_eq!(code(&ncup(&["dump", "--model", "group:symmetric:3", "--out", out.to_str().unwrap()])), 0);
    let pair = TwoBoxPair::from_spec("group:symmetric:3").unwrap();
    let subs = enumerate_subgroups(pair.group().unwrap()).unwrap();
    let list = read_json(&out.join("biprojections.json"));
    let list = list.as_array().unwrap();
    assert_eq!(list.len(), subs.len());
    for (entry, h) in list.iter().zip(&subs) {
        let lit: ElementLiteral = serde_json::from_value(entry["element"].clone()).unwrap();
        let x = pair.from_literal(&lit).unwrap();
        let direct = biprojection_from_subgroup(&pair, h).unwrap().element;
        assert_eq!(x.coords(), direct.coords());
        let (a, b) = (check_donoho_stark(&pair, &x).unwrap(), check_donoho_stark(&pair, &direct).unwrap());
        assert_eq!(a.margin.to_bits(), b.margin.to_bits());
        let (a, b) = (check_hirschman_beckner(&pair, &x).unwrap(), check_hirschman_beckner(&pair, &direct).unwrap());
        assert_eq!(a.margin.to_bits(), b.margin.to_bits());
    }
    let jones = read_json(&out.join("jones.json"));
    let lit: ElementLiteral = serde_json::from_value(jones["minus"]["projection"].clone()).unwrap();
    let e = pair.from_literal(&lit).unwrap();
    assert!(e.projection_residual() < 1e-15);
}

#[test]
fn dump_bad_path_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("f");
    fs::write(&file, "x").unwrap();
    let o = ncup(&["dump", "--model", "spin:2", "--out", file.join("sub").to_str().unwrap()]);
    assert_eq!(code(&o), 1);
}
