use std::process::{Command, Output};

use logdecay::config::SeriesTable;

fn logdecay(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_logdecay"))
        .args(args)
        .env_remove("LOGDECAY_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn value_of(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no `{key}` in\n{text}"))
        .to_string()
}

#[test]
fn round_well_resonance() {
    let o = logdecay(&["resonance", "--model", "round-well", "--R", "1", "--n", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(value_of(&text, "a"), "2.404825557695773");
    assert!(value_of(&text, "abs_J0_aR").parse::<f64>().unwrap() <= 1e-12);
}

#[test]
fn delta_ring_resonance() {
    let o = logdecay(&["resonance", "--model", "delta-ring", "--R", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(value_of(&stdout(&o), "a"), "-1");
}

#[test]
fn robin_resonance_uses_reciprocal_radius() {
    let o = logdecay(&["resonance", "--model", "robin-disc", "--rho", "4"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(value_of(&stdout(&o), "sigma"), "0.25");
}

#[test]
fn contour_profile_approaches_one() {
    let o = logdecay(&["contour", "--b", "-1i", "--t-grid", "e6:e12:4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let table = SeriesTable::parse(&stdout(&o)).unwrap();
    assert_eq!(table.headers, ["t", "J", "J_norm"]);
    assert_eq!(table.metadata.iter().find(|(k, _)| k == "b").map(|(_, v)| v.as_str()), Some("-1i"));
    let norm = table.column("J_norm").unwrap();
    assert_eq!(norm.len(), 4);
    assert!(norm.iter().all(|v| (0.8..=1.2).contains(v)), "{norm:?}");
    assert!(norm.windows(2).all(|w| (w[1] - 1.0).abs() < (w[0] - 1.0).abs()));
}

#[test]
fn config_file_matches_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.kv");
    std::fs::write(&path, "# p-resonant well\nvariant = round-well\nR = 0.5\n").unwrap();
    let from_file = logdecay(&["resonance", "--config", path.to_str().unwrap()]);
    let from_flags = logdecay(&["resonance", "--model", "round-well", "--R", "0.5"]);
    assert_eq!(from_file.status.code(), Some(0));
    assert_eq!(stdout(&from_file), stdout(&from_flags));
}

#[test]
fn schema_errors_exit_2_with_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.kv");
    std::fs::write(&path, "variant = round-well\nR = 1\nspeed = 3\n").unwrap();
    let o = logdecay(&["resonance", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    std::fs::write(&path, "variant = round-well\nR\n").unwrap();
    let o = logdecay(&["resonance", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));

    for args in [
        &["contour", "--b", "2i"][..],
        &["contour", "--t-grid", "e12:e6:4"],
        &["contour", "--b", "nonsense"],
        &["resonance", "--model", "round-well", "--R=-1"],
        &["resonance", "--model", "round-well", "--a", "1"],
        &["simulate", "--model", "free", "--method", "magic"],
        &["simulate", "--model", "free", "--mode", "0", "--data", "bump:3:1"],
        &["verify-all", "--only", "12"],
        &["fit", "--law", "t_over_log"],
        &["--workers", "0", "resonance", "--model", "delta-ring"],
    ] {
        let o = logdecay(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        assert!(o.stdout.is_empty(), "{args:?} wrote output");
    }
}

#[test]
fn invalid_worker_env_is_rejected() {
    let o = Command::new(env!("CARGO_BIN_EXE_logdecay"))
        .args(["resonance", "--model", "delta-ring"])
        .env("LOGDECAY_WORKERS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("LOGDECAY_WORKERS"));
}

#[test]
fn failed_fit_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("growth.csv");
    let mut table = SeriesTable::new(&["t", "u"]);
    for k in 1..=200 {
        let t = 10.0 * k as f64;
        table.rows.push(vec![t, t]);
    }
    std::fs::write(&path, table.render().unwrap()).unwrap();
    let o = logdecay(&["fit", "--input", path.to_str().unwrap(), "--law", "log_power:1"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let record: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(record["passed"], false);
}

#[test]
fn simulate_is_deterministic_and_fits() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, workers: &str| {
        let path = dir.path().join(name);
        let args = [
            "simulate", "--seed", "11", "--workers", workers, "--model", "free", "--mode", "0", "--data", "random", "--T", "200",
            "--h", "0.05", "--observers", "2,3", "--out",
        ];
        let o = logdecay(&[&args[..], &[path.to_str().unwrap()]].concat());
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        std::fs::read(path).unwrap()
    };
    let first = run("a.csv", "1");
    assert_eq!(first, run("b.csv", "2"));

    let table = SeriesTable::parse(std::str::from_utf8(&first).unwrap()).unwrap();
    assert_eq!(table.headers, ["t", "r", "u", "u_d", "u_z", "u_r"]);
    assert!(table.metadata.iter().any(|(k, v)| k == "seed" && v == "11"));
    let fit = logdecay(&[
        "fit",
        "--input",
        dir.path().join("a.csv").to_str().unwrap(),
        "--law",
        "log_power:1",
        "--column",
        "u_r",
        "--r",
        "2",
        "--window",
        "50:200",
    ]);
    assert_eq!(fit.status.code(), Some(0), "{}{}", stdout(&fit), stderr(&fit));
}

#[test]
fn resolvent_samples_feed_the_expansion_fit() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("res.csv");
    let o = logdecay(&[
        "resolvent",
        "--model",
        "round-well",
        "--a",
        "2.404825557695773",
        "--R",
        "1",
        "--mode",
        "1",
        "--lambda-grid",
        "1e-4:1e-1:10",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let fit = logdecay(&["fit", "--input", path.to_str().unwrap(), "--law", "expansion"]);
    assert_eq!(fit.status.code(), Some(0));
    let record: serde_json::Value = serde_json::from_str(&stdout(&fit)).unwrap();
    assert_eq!(record["fit"]["m"], 1);
}

#[test]
fn verify_all_subset_prints_a_table() {
    let o = logdecay(&["verify-all", "--only", "1,8"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.lines().filter(|l| l.contains("| PASS |")).count() == 2);
    assert!(text.ends_with("2 of 2 checks passed\n"));
}
