use std::path::Path;
use std::process::{Command, Output};

fn jcyclic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jcyclic"))
        .args(args)
        .env_remove("ELLIPTIC_CYCLIC_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const TRUE_ID: &str = "identity user.dd family=MI-II T=2K\n  lhs: sum dn[0]*dn[+1]\n  rhs: {p/(2*K)*INT(f,0,T)} * const\n";

fn write_catalog(dir: &Path, body: &str) -> String {
    let path = dir.join("user.cyc");
    std::fs::write(&path, format!("catalog version=1 tol=1e-9\n\n{body}")).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn verify_mi2_entries_passes() {
    let o = jcyclic(&["verify", "--id", "mi2.*", "--m", "0.5", "--tol", "1e-9"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("passed at tol"));
}

#[test]
fn unmatched_id_exits_2() {
    let o = jcyclic(&["verify", "--id", "nonexistent"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no identities matched"));
}

#[test]
fn perturbed_user_identity_exits_1_with_matching_residual() {
    let dir = tempfile::tempdir().unwrap();
    let bad = "identity user.bad family=MI-II T=2K\n  lhs: sum dn[0]*dn[+1]\n  rhs: {1.001*p/(2*K)*INT(f,0,T)} * const\n";
    let path = write_catalog(dir.path(), &format!("{TRUE_ID}\n{bad}"));
    let o = jcyclic(&["verify", "--catalog", &path, "--format", "json", "--m", "0.5"]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["summary"]["failed"], serde_json::json!(["user.bad"]));
    let bad_report = v["reports"].as_array().unwrap().iter().find(|r| r["id"] == "user.bad").unwrap();
    let max = bad_report["max_rel"].as_f64().unwrap();
    assert!(max > 1e-4 && max < 1e-2, "residual {max}");
}

#[test]
fn bad_catalog_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_catalog(dir.path(), "identity broken family=MI-II T=2K\n  lhs: sum dn[0\n");
    assert_eq!(jcyclic(&["verify", "--catalog", &path]).status.code(), Some(2));
    assert_eq!(jcyclic(&["verify", "--catalog", "/no/such/file.cyc"]).status.code(), Some(2));
    assert_eq!(jcyclic(&["verify", "--id", "basic.*", "--tol", "-1"]).status.code(), Some(2));
}

#[test]
fn json_report_is_byte_identical_for_same_seed() {
    let args = ["verify", "--id", "basic.d*", "--m", "0.3,0.8", "--seed", "11", "--format", "json"];
    let a = jcyclic(&args);
    let b = jcyclic(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["config"]["seed"], 11);
    assert_eq!(v["catalog"]["sha256"].as_str().unwrap().len(), 64);
    let ids: Vec<&str> = v["reports"].as_array().unwrap().iter().map(|r| r["id"].as_str().unwrap()).collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
}

#[test]
fn seed_falls_back_to_environment() {
    let run = |seed: &str| {
        Command::new(env!("CARGO_BIN_EXE_jcyclic"))
            .args(["verify", "--id", "basic.ddA", "--m", "0.5", "--format", "json", "--samples", "3"])
            .env("ELLIPTIC_CYCLIC_SEED", seed)
            .output()
            .unwrap()
    };
    let v: serde_json::Value = serde_json::from_slice(&run("99").stdout).unwrap();
    assert_eq!(v["config"]["seed"], 99);
    let flag = jcyclic(&["verify", "--id", "basic.ddA", "--m", "0.5", "--format", "json", "--samples", "3", "--seed", "99"]);
    assert_eq!(flag.stdout, run("99").stdout);
}

#[test]
fn jobs_do_not_change_the_report() {
    let base = ["verify", "--id", "mi1.L0.*", "--m", "0.5", "--format", "json"];
    let one = jcyclic(&[&base[..], &["--jobs", "1"]].concat());
    let four = jcyclic(&[&base[..], &["--jobs", "4"]].concat());
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn csv_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let o = jcyclic(&["verify", "--id", "basic.dd*", "--format", "csv", "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(out).unwrap();
    assert!(text.starts_with("id,family,environment,samples,skipped,max_rel,pass\n"));
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn gamma_of_dn_is_minus_i() {
    let o = jcyclic(&["gamma", "dn[0]", "--p", "3", "--m", "0.5", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let g1 = &v["ordinary"]["gammas"][0];
    assert!(g1[0].as_f64().unwrap().abs() < 1e-9 && (g1[1].as_f64().unwrap() + 1.0).abs() < 1e-9);
    assert_eq!(v["ordinary"]["poles"].as_array().unwrap().len(), 1);
}

#[test]
fn gamma_of_dn_squared_pair() {
    let o = jcyclic(&["gamma", "dn[0]^2*dn[+1]^2", "--p", "4", "--m", "0.3", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let g = &v["ordinary"]["gammas"];
    // cs²(K/2) = √(1-m)
    let want = 2.0 * 0.7f64.sqrt();
    assert!(g[0][0].as_f64().unwrap().abs() < 1e-9 && g[0][1].as_f64().unwrap().abs() < 1e-9);
    assert!((g[1][0].as_f64().unwrap() - want).abs() < 1e-9 && g[1][1].as_f64().unwrap().abs() < 1e-9);
}

#[test]
fn malformed_gamma_spec_exits_2() {
    assert_eq!(jcyclic(&["gamma", "dn[0"]).status.code(), Some(2));
    assert_eq!(jcyclic(&["gamma", "nd[0]"]).status.code(), Some(2));
}

#[test]
fn table_p2_row_is_twice_root_complement() {
    let o = jcyclic(&["table", "--id", "basic.ddA", "--p", "2..8", "--m", "0.1,0.3,0.5,0.7,0.9"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("id,p,r,m,constant"));
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    assert_eq!(rows.len(), 7 * 5);
    for r in rows.iter().filter(|r| r[1] == "2") {
        let m: f64 = r[3].parse().unwrap();
        let c: f64 = r[4].parse().unwrap();
        assert!((c - 2.0 * (1.0 - m).sqrt()).abs() < 1e-12);
    }
    // the constant falls as m grows, at every p
    for p in 2..=8 {
        let col: Vec<f64> = rows.iter().filter(|r| r[1] == p.to_string()).map(|r| r[4].parse().unwrap()).collect();
        assert!(col.windows(2).all(|w| w[1] < w[0]), "p={p}: {col:?}");
    }
}

#[test]
fn table_rejects_empty_ranges_and_missing_constants() {
    assert_eq!(jcyclic(&["table", "--id", "basic.ddA", "--p", "5..2"]).status.code(), Some(2));
    assert_eq!(jcyclic(&["table", "--id", "basic.ddA", "--m", ""]).status.code(), Some(2));
    assert_eq!(jcyclic(&["table", "--id", "basic.ddd1"]).status.code(), Some(2));
}
