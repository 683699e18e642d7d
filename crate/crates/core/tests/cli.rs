use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn shufreg(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shufreg"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("fit prints JSON")
}

#[test]
fn noiseless_single_feature_fit_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let s = shufreg(&["simulate", "--n", "150", "--d", "1", "--w0", "-2.5", "--seed", "4", "--output", "s.csv"], p);
    assert!(s.status.success(), "{}", String::from_utf8_lossy(&s.stderr));
    let f = shufreg(&["fit", "--input", "s.csv", "--estimator", "sm"], p);
    assert_eq!(f.status.code(), Some(0));
    let w = json(&f)["weights"][0].as_f64().unwrap();
    assert!((w + 2.5).abs() < 1e-9, "{w}");
}

#[test]
fn auto_reports_resolution_with_replications() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let s = shufreg(
        &["simulate", "--n", "300", "--d", "5", "--replications", "15", "--nsr-db", "-20", "--seed", "2", "--output", "r.csv"],
        p,
    );
    assert!(s.status.success());
    let f = shufreg(&["fit", "--input", "r.csv", "--replication-col", "replication", "--estimator", "auto", "--starts", "2"], p);
    assert_eq!(f.status.code(), Some(0), "{}", String::from_utf8_lossy(&f.stderr));
    let v = json(&f);
    assert_eq!(v["diagnostics"]["resolved"], "sm");
    assert_eq!(v["estimator_resolved"], "sm");
    assert_eq!(v["diagnostics"]["r"], 15);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    fs::write(p.join("bad.csv"), "a,y\n1,2\n3,oops\n").unwrap();
    let bad = shufreg(&["fit", "--input", "bad.csv"], p);
    assert_eq!(bad.status.code(), Some(1));
    let err = String::from_utf8_lossy(&bad.stderr);
    assert!(err.contains("row 2") && err.contains("`y`"), "{err}");

    let unknown = shufreg(&["fit", "--input", "bad.csv", "--estimator", "nope"], p);
    assert_eq!(unknown.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("p1"));

    assert_eq!(shufreg(&["frobnicate"], p).status.code(), Some(1));
    assert_eq!(shufreg(&["fit", "--input", "missing.csv"], p).status.code(), Some(1));

    // both feature means are zero: the closed form has nothing to divide by
    fs::write(p.join("zero.csv"), "a,b,y\n1,-1,3\n-1,1,2\n").unwrap();
    let num = shufreg(&["fit", "--input", "zero.csv", "--estimator", "sm"], p);
    assert_eq!(num.status.code(), Some(2), "{}", String::from_utf8_lossy(&num.stderr));
}

#[test]
fn help_documents_flags() {
    let dir = tempfile::tempdir().unwrap();
    let expect: &[(&str, &[&str])] = &[
        ("fit", &["--input", "--output", "--label-col", "--replication-col", "--estimator", "--loss-spec", "--fit-config", "--seed", "--normalize"]),
        ("simulate", &["--scenario", "--output", "--seed", "--replications"]),
        ("sweep", &["--study", "--output", "--seed"]),
        ("bench", &["--study", "--output", "--seed"]),
        ("control", &["--study", "--input", "--dataset", "--output", "--seed"]),
    ];
    for (sub, flags) in expect {
        let o = shufreg(&[sub, "--help"], dir.path());
        assert_eq!(o.status.code(), Some(0));
        let text = String::from_utf8_lossy(&o.stdout);
        for f in *flags {
            assert!(text.contains(f), "{sub} --help lacks {f}");
        }
    }
}

fn read_dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    for tag in ["a", "b"] {
        let sim = shufreg(&["simulate", "--n", "80", "--d", "3", "--snr-db", "10", "--seed", "9", "--output", &format!("{tag}.csv")], p);
        assert!(sim.status.success());
        let fit = shufreg(&["fit", "--input", &format!("{tag}.csv"), "--estimator", "p1", "--output", &format!("{tag}.json")], p);
        assert!(fit.status.success());
    }
    assert_eq!(fs::read(p.join("a.csv")).unwrap(), fs::read(p.join("b.csv")).unwrap());
    assert_eq!(fs::read(p.join("a.json")).unwrap(), fs::read(p.join("b.json")).unwrap());

    fs::write(
        p.join("study.json"),
        r#"{"study":"sweep","n":[40],"d":[1,2],"estimators":["sm","ls"],"trials":2,"seed":5}"#,
    )
    .unwrap();
    for out in ["s1", "s2"] {
        let o = shufreg(&["sweep", "--study", "study.json", "--output", out], p);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (a, b) = (read_dir_bytes(&p.join("s1")), read_dir_bytes(&p.join("s2")));
    assert_eq!(a, b);
    let names: Vec<&str> = a.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(names, ["fig4.csv", "manifest.json", "results.csv"]);
}

#[test]
fn control_on_bundled_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let o = shufreg(&["control", "--dataset", "synthetic3", "--trials", "5", "--output", "out"], dir.path());
    assert!(o.status.success());
    let table = fs::read_to_string(dir.path().join("out/table4.csv")).unwrap();
    let row = table.lines().nth(1).unwrap();
    for cell in row.split(',').skip(1) {
        assert!(cell.parse::<f64>().unwrap() > 0.5, "{table}");
    }
}

#[test]
fn bench_rejects_wrong_study_for_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    fs::write(p.join("s.json"), r#"{"study":"noise_adjustment","n":50,"nsr_db":[-10],"trials":1,"seed":1}"#).unwrap();
    assert_eq!(shufreg(&["sweep", "--study", "s.json", "--output", "o"], p).status.code(), Some(1));
    let o = shufreg(&["bench", "--study", "s.json", "--output", "o"], p);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(p.join("o/fig7.csv").exists());
}
