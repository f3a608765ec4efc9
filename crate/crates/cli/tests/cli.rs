use std::io::Write;
use std::process::{Command, Output, Stdio};

fn dpl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dpl"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn count_surjections() {
    let o = dpl(&["count", "--family", "surjection", "--n", "4", "--k", "2"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "14\n");
}

#[test]
fn count_accepts_dashed_family_names() {
    let o = dpl(&["count", "--family", "distinct-fiber-surjection", "--n", "4", "--k", "2"]);
    assert_eq!(stdout(&o), "8\n");
}

#[test]
fn prob_set_partition_exact() {
    let o = dpl(&["prob", "--model", "set_partition", "--n", "4", "--k", "2"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "4/7\n");
}

#[test]
fn csv_output_is_versioned() {
    let o = dpl(&["prob", "--model", "composition", "--n", "6", "--k", "3", "--format", "csv"]);
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("# dpl-v1"));
    assert_eq!(lines.next(), Some("model,n,k,regime,probability,value"));
    assert_eq!(lines.next(), Some("composition,6,3,exact,3/5,0.6"));
}

#[test]
fn json_output_parses() {
    let o = dpl(&["expect", "--model", "composition", "--n", "7", "--k", "3", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["first_moment"].as_f64().unwrap() - 0.6).abs() < 1e-12);
    assert_eq!(v["regime"], "exact");
}

#[test]
fn exit_codes() {
    assert_eq!(dpl(&["count", "--family", "tree", "--n", "4", "--k", "2"]).status.code(), Some(2));
    assert_eq!(dpl(&["count", "--n", "4"]).status.code(), Some(2));
    let o = dpl(&["count", "--family", "partition", "--n", "1000000", "--k", "1000", "--exact-budget", "1000"]);
    assert_eq!(o.status.code(), Some(3));
    let o = dpl(&["prob", "--model", "surjection", "--n", "5000", "--k", "10", "--exact"]);
    assert_eq!(o.status.code(), Some(3));
    let o = dpl(&["threshold", "--model", "composition", "--n", "3", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn log_fallback_when_out_of_budget() {
    let o = dpl(&["prob", "--model", "surjection", "--n", "5000", "--k", "10", "--format", "csv"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains(",log,"));
}

#[test]
fn sampling_is_reproducible() {
    let args = ["sample", "--model", "surjection", "--n", "30", "--k", "4", "--samples", "20", "--seed", "5"];
    let a = dpl(&args);
    let b = dpl(&args);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 20);
    for line in stdout(&a).lines() {
        let parts: Vec<u64> = line.split(' ').map(|x| x.parse().unwrap()).collect();
        assert_eq!(parts.iter().sum::<u64>(), 30);
        assert_eq!(parts.len(), 4);
    }
}

#[test]
fn generated_seed_is_reported() {
    let o = dpl(&["sample", "--model", "composition", "--n", "10", "--k", "3"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("seed: "));
}

#[test]
fn threshold_output_independent_of_threads() {
    let base = [
        "threshold", "--model", "composition", "--n-grid", "2000,5000", "--samples", "2000",
        "--confirm-samples", "5000", "--seed", "42", "--format", "csv",
    ];
    let one = dpl(&[&base[..], &["--threads", "1"]].concat());
    let two = dpl(&[&base[..], &["--threads", "3"]].concat());
    assert!(one.status.success());
    assert_eq!(one.stdout, two.stdout);
    assert!(stdout(&one).starts_with("# dpl-v1\nmodel,n,k_c,p_hat,std_err,samples,seed"));
}

#[test]
fn entropy_reads_profiles_from_stdin() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_dpl"))
        .args(["entropy", "--format", "csv"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"1 1 2\n2 2\n").unwrap();
    let o = child.wait_with_output().unwrap();
    let out = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<&str> = out.lines().skip(2).collect();
    assert_eq!(rows.len(), 2);
    let cells: Vec<f64> = rows[1].split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(&cells[..2], &[4.0, 2.0]);
    assert!((cells[2] - std::f64::consts::LN_2).abs() < 1e-12);
    assert_eq!(cells[3], 0.0);
    assert!((cells[7] - 1.0).abs() < 1e-12);
}

#[test]
fn sandwich_and_transfer() {
    let o = dpl(&["sandwich", "--k", "3", "--n", "7", "--format", "csv"]);
    assert_eq!(stdout(&o).lines().nth(2), Some("7,3,2.5,4,6.0,1.6"));
    let o = dpl(&["transfer", "--n", "6", "--k", "3", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["q_over_p_exact"], "1/3");
    assert_eq!(v["d_over_c_exact"], "3/5");
}

#[test]
fn ce_bound_from_sums() {
    assert_eq!(stdout(&dpl(&["ce-bound", "--sum-p", "0", "--sum-pairs", "3"])), "0.0\n");
    assert_eq!(stdout(&dpl(&["ce-bound", "--sum-p", "1", "--sum-pairs", "0"])), "1.0\n");
}

#[test]
fn verify_passes() {
    let o = dpl(&["verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).lines().all(|l| l.starts_with("PASS ")));
}
