use std::path::Path;
use std::process::{Command, Output};

fn rssn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rssn"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn last_csv_dist(csv: &str) -> f64 {
    csv.lines()
        .last()
        .unwrap()
        .rsplit(',')
        .next()
        .unwrap()
        .parse()
        .unwrap()
}

#[test]
fn solve_prints_a_converged_trace() {
    let o = rssn(&[
        "solve",
        "--field",
        "example51",
        "--start",
        "auto:distance=0.1,seed=7",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = stdout(&o);
    assert!(csv.starts_with("iter,x0,x1,field_norm,step_norm,dist_to_solution\n"));
    assert!(last_csv_dist(&csv) <= 1e-12);
}

#[test]
fn analyze_reports_kp() {
    let o = rssn(&["analyze", "--field", "example51", "--analyses", "kp"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = stdout(&o);
    let kp: f64 = report
        .lines()
        .find_map(|l| l.strip_prefix("kp_estimate = "))
        .expect("kp record")
        .parse()
        .unwrap();
    assert!((kp - 1.0).abs() <= 1e-9);
    assert!(report.contains("anchor = geodesic-spread-kp"));
}

#[test]
fn analyze_defaults_to_every_analysis() {
    let o = rssn(&[
        "analyze",
        "--field",
        "smooth-proj",
        "--start",
        "auto:distance=0.2,seed=1",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = stdout(&o);
    for name in [
        "order",
        "semismooth-scan",
        "kantorovich",
        "kp",
        "lipschitz",
        "regularity",
    ] {
        assert!(
            report.contains(&format!("analysis = {name}\n")),
            "missing {name}"
        );
    }
}

#[test]
fn config_errors_exit_with_one() {
    let o = rssn(&["solve", "--field", "nope"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown field"));

    let o = rssn(&["solve", "--field", "example51", "--selection", "sideways"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("selection"));

    let o = rssn(&["solve", "--field", "example51", "--start", "1,2,3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("start"));

    let o = rssn(&["solve", "--no-such-flag"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn singular_and_capped_runs_have_distinct_exit_codes() {
    let o = rssn(&[
        "solve",
        "--field",
        "example51",
        "--singular-threshold",
        "10",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = rssn(&["solve", "--field", "example51", "--max-iters", "1"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn list_fields_is_stable() {
    let a = rssn(&["list-fields"]);
    let b = rssn(&["list-fields"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.contains("example51"));
    assert!(text.lines().count() >= 4);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(
        &conf,
        "field = example51\nmax-iters = 1\nstart = auto:distance=0.1,seed=2\n",
    )
    .unwrap();
    let conf = conf.to_str().unwrap();
    assert_eq!(rssn(&["solve", "--config", conf]).status.code(), Some(3));
    assert_eq!(
        rssn(&["solve", "--config", conf, "--max-iters", "20"])
            .status
            .code(),
        Some(0)
    );

    std::fs::write(
        dir.path().join("bad.conf"),
        "field = example51\ncolour = red\n",
    )
    .unwrap();
    let o = rssn(&[
        "solve",
        "--config",
        dir.path().join("bad.conf").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("colour"));
}

#[test]
fn out_writes_both_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("nested").join("run");
    let o = rssn(&[
        "analyze",
        "--field",
        "maxcomp-s2",
        "--analyses",
        "order,kantorovich",
        "--out",
        prefix.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("nested/run.trace.csv")).unwrap();
    let report = std::fs::read_to_string(dir.path().join("nested/run.report.txt")).unwrap();
    assert!(last_csv_dist(&csv) <= 1e-12);
    assert!(report.contains("anchor = kantorovich-existence"));
    assert!(report.contains("cond1 = "));
    assert!(report.contains("predicted_error_coeff = "));
}

fn write_conf(dir: &Path, name: &str, body: &str) {
    std::fs::write(dir.join(name), body).unwrap();
}

#[test]
fn batch_runs_every_config() {
    let dir = tempfile::tempdir().unwrap();
    write_conf(dir.path(), "a.conf", "field = example51\nseed = 1\n");
    write_conf(
        dir.path(),
        "b.conf",
        "field = smooth-proj\nanalyses = order\n",
    );
    write_conf(
        dir.path(),
        "c.conf",
        "field = example51\nmax_iters = 1\nstart = 0.3,0.9\n",
    );
    write_conf(dir.path(), "notes.txt", "ignored");
    let o = rssn(&["batch", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
    let lines: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].contains("a.conf") && lines[0].ends_with("exit 0"));
    assert!(lines[2].contains("c.conf") && lines[2].ends_with("exit 3"));
    for stem in ["a", "b", "c"] {
        assert!(dir.path().join(format!("{stem}.trace.csv")).exists());
        assert!(dir.path().join(format!("{stem}.report.txt")).exists());
    }
}
