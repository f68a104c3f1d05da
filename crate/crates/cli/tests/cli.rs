use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const HEADER: &str = "method,stratum,metric,mean,se,reps,config_hash";

fn rne(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rne"))
        .args(args)
        .output()
        .expect("binary runs")
}

const TINY: [&str; 12] = [
    "--n", "20", "--m", "20", "--k", "2", "--p-miss", "0.5", "--reps", "2", "--method", "rne",
];

fn tiny(extra: &[&str]) -> Output {
    let mut args: Vec<&str> = TINY.to_vec();
    args.extend_from_slice(extra);
    rne(&args)
}

fn write_triples(path: &Path, n: usize, m: usize) {
    let mut s = String::from("user,item,hours\n");
    for u in 0..n {
        for i in 0..m {
            if (u * 7 + i * 3) % 5 < 3 {
                s.push_str(&format!("p{u},g{i},{}\n", ((u % 4) * (i % 5)) as f64 + 0.5 * (u % 3) as f64));
            }
        }
    }
    fs::write(path, s).unwrap();
}

#[test]
fn csv_to_stdout() {
    let out = tiny(&[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(HEADER));
    let rows: Vec<&str> = lines.collect();
    // One method, three strata, three metrics.
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|r| r.split(',').count() == 7 && r.starts_with("rne,")));
    let warm = rows.iter().find(|r| r.starts_with("rne,warm,rmse,")).unwrap();
    assert_eq!(warm.split(',').nth(5), Some("2"));
}

#[test]
fn json_and_raw_dump_to_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("res.json");
    let raw = dir.path().join("raw.csv");
    let status = tiny(&[
        "--format",
        "json",
        "--out",
        out.to_str().unwrap(),
        "--raw-out",
        raw.to_str().unwrap(),
    ]);
    assert!(status.status.success());
    let json = fs::read_to_string(&out).unwrap();
    assert!(json.contains("\"config_hash\"") && json.contains("\"rows\""));
    let raw = fs::read_to_string(&raw).unwrap();
    assert!(raw.starts_with("rep,seed,method,tuned,stratum,"));
    // Two reps, three strata each.
    assert_eq!(raw.lines().count(), 1 + 2 * 3);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    fs::write(
        &cfg,
        "# tiny run\nn = 20\nm = 20\nk = 2\np-miss = 0.5\nreps = 3\nmethods = rne\n",
    )
    .unwrap();
    let out = rne(&["--config", cfg.to_str().unwrap(), "--reps", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let row = text.lines().find(|l| l.starts_with("rne,all,rmse,")).unwrap();
    assert_eq!(row.split(',').nth(5), Some("1"));
}

#[test]
fn same_seed_same_bytes_any_thread_count() {
    let run = |threads| {
        let mut args = TINY.to_vec();
        args[11] = "rne,cf_user";
        args.extend_from_slice(&["--threads", threads]);
        rne(&args)
    };
    let (a, b) = (run("1"), run("3"));
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert!(b.status.success(), "{}", String::from_utf8_lossy(&b.stderr));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn config_errors_exit_2() {
    for extra in [
        &["--p-miss", "1.5"][..],
        &["--set", "no_such_key=1"][..],
        &["--method", "svd"][..],
        &["--folds", "1"][..],
    ] {
        let out = tiny(extra);
        assert_eq!(out.status.code(), Some(2), "{extra:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn failed_repetitions_are_annotated() {
    // Holding out 90% of rows and columns cannot fit in a 25% test split.
    let out = tiny(&["--phi", "0.9"]);
    assert_eq!(out.status.code(), Some(3));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with(HEADER));
    assert_eq!(text.lines().filter(|l| l.starts_with("# failure")).count(), 2);
    assert!(!out.stderr.is_empty());
}

#[test]
fn data_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    assert_eq!(rne(&["--dataset", missing.to_str().unwrap()]).status.code(), Some(3));

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "a,b,1\na,c,x\n").unwrap();
    assert_eq!(rne(&["--dataset", bad.to_str().unwrap()]).status.code(), Some(3));

    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "").unwrap();
    assert_eq!(rne(&["--dataset", empty.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn dataset_run_with_log_and_subsample() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("plays.csv");
    write_triples(&data, 40, 30);
    let out = rne(&[
        "--dataset",
        data.to_str().unwrap(),
        "--log1p",
        "--user-frac",
        "0.8",
        "--item-frac",
        "0.8",
        "--reps",
        "2",
        "--method",
        "rne,cf_item",
        "--set",
        "train_frac=0.9",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    // No ground truth on real data.
    let std_err = text.lines().find(|l| l.starts_with("rne,all,std_test_error,")).unwrap();
    assert!(std_err.contains(",NA,NA,"));
    let rmse = text.lines().find(|l| l.starts_with("rne,all,rmse,")).unwrap();
    let v: f64 = rmse.split(',').nth(3).unwrap().parse().unwrap();
    assert!(v.is_finite() && v >= 0.0);
}
