use std::path::Path;
use std::process::{Command, Output};

fn crossedge(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crossedge")).current_dir(dir).args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_sample(dir: &Path) {
    let mut s = String::from("x1,x2,label\n");
    for i in 0..120 {
        let t = i as f64 * 0.37;
        let (label, shift) = if i % 5 < 3 { (1, 0.0) } else { (2, 0.3) };
        s.push_str(&format!("{},{},{label}\n", t.sin() + shift, (1.3 * t).cos()));
    }
    std::fs::write(dir.join("sample.csv"), s).unwrap();
}

#[test]
fn constants_then_test() {
    let dir = tempfile::tempdir().unwrap();
    write_sample(dir.path());
    let o = crossedge(
        dir.path(),
        &["constants", "--d", "2", "--reps", "50", "--cache", "cache.csv", "--seed", "3"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let o = crossedge(
        dir.path(),
        &[
            "test",
            "--data",
            "sample.csv",
            "--functional",
            "knn",
            "--k",
            "1",
            "--p",
            "0.6",
            "--alpha",
            "0.05",
            "--constants",
            "cache.csv",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let out = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<_> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("t_raw,center,scale,z,p_value,reject,method,alpha"));
    assert!(lines[1].contains("asymptotic"));
    let manifest = std::fs::read_to_string(dir.path().join("test_manifest.txt")).unwrap();
    assert!(manifest.contains("command = test") && manifest.contains("method = asymptotic"));

    let o = crossedge(
        dir.path(),
        &["test", "--data", "sample.csv", "--method", "permutation", "--permutations", "99"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn missing_constants_hint_at_the_constants_command() {
    let dir = tempfile::tempdir().unwrap();
    write_sample(dir.path());
    let o = crossedge(dir.path(), &["test", "--data", "sample.csv", "--constants", "nope.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("crossedge constants"), "{}", stderr(&o));

    crossedge(dir.path(), &["constants", "--d", "3", "--reps", "50", "--cache", "c.csv"]);
    let o = crossedge(dir.path(), &["test", "--data", "sample.csv", "--constants", "c.csv"]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("d = 2") && e.contains("crossedge constants"), "{e}");
}

#[test]
fn invalid_numeric_flags_exit_2_with_one_line() {
    let dir = tempfile::tempdir().unwrap();
    for (args, flag) in [
        (vec!["power", "--d", "3", "--h-grid", "0:3:5", "--n1", "-5", "--n2", "10"], "--n1"),
        (vec!["dissim", "--f", "gaussian:mu=0", "--g", "gaussian:mu=1", "--p", "1.5"], "--p"),
        (vec!["tails", "--d", "two"], "--d"),
        (vec!["tails", "--d", "1", "--bogus", "1"], "--bogus"),
    ] {
        let o = crossedge(dir.path(), &args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        let e = stderr(&o);
        assert_eq!(e.trim_end().lines().count(), 1, "{e}");
        assert!(e.contains(flag), "{e}");
    }
}

#[test]
fn power_is_byte_identical_for_a_seed_and_replayable_from_its_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "power",
        "--d",
        "2",
        "--a",
        "0.25",
        "--h-grid",
        "0:3:3",
        "--n1",
        "150",
        "--n2",
        "100",
        "--iters",
        "50",
        "--tests",
        "fr_mst,hotelling",
        "--permutations",
        "99",
        "--seed",
        "7",
        "--svg",
    ];
    let run = |out: &str| {
        let mut a = args.to_vec();
        a.extend(["--output-dir", out]);
        let o = crossedge(dir.path(), &a);
        assert!(o.status.success(), "{}", stderr(&o));
        std::fs::read(dir.path().join(out).join("power.csv")).unwrap()
    };
    let first = run("a");
    assert_eq!(first, run("b"));
    assert!(dir.path().join("a/power.svg").exists());
    assert_eq!(String::from_utf8_lossy(&first).lines().count(), 1 + 2 * 3);

    let o = crossedge(dir.path(), &["--config", "a/power_manifest.txt", "--output-dir", "c"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(first, std::fs::read(dir.path().join("c/power.csv")).unwrap());
}

#[test]
fn power_with_knn_needs_a_cache() {
    let dir = tempfile::tempdir().unwrap();
    let o = crossedge(
        dir.path(),
        &["power", "--d", "2", "--h-grid", "0", "--n1", "60", "--n2", "40", "--tests", "knn1"],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("crossedge constants"));
}

#[test]
fn dissim_and_tails_write_csv() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.txt"),
        "# disjoint boxes\ncommand = dissim\nf = uniform:d=1\ng = uniform:lower=2;side=1\nmc-n = 20000\n",
    )
    .unwrap();
    let o = crossedge(dir.path(), &["--config", "run.txt"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("dissim.csv")).unwrap();
    assert!(text.starts_with("quantity,value,se\ndissimilarity,1.0,0.0\n"), "{text}");

    let o =
        crossedge(dir.path(), &["tails", "--k", "1", "--d", "1", "--reps", "200", "--s-grid", "0.5,1,1.5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("tails.csv")).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(dir.path().join("tails_fit.csv").exists());
}

#[test]
fn clt_writes_summary_and_z_scores() {
    let dir = tempfile::tempdir().unwrap();
    crossedge(dir.path(), &["constants", "--d", "2", "--reps", "50", "--cache", "c.csv"]);
    let o = crossedge(
        dir.path(),
        &[
            "clt",
            "--f",
            "gaussian:mu=0,0",
            "--g",
            "gaussian:mu=0.5,0",
            "--p",
            "0.6",
            "--n",
            "300",
            "--reps",
            "500",
            "--mc-n",
            "20000",
            "--constants",
            "c.csv",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let z = std::fs::read_to_string(dir.path().join("clt_z.csv")).unwrap();
    assert_eq!(z.lines().count(), 501);
    assert!(std::fs::read_to_string(dir.path().join("clt_summary.csv")).unwrap().contains("ks_distance"));
}
