use std::process::{Command, Output};

fn blends(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blends")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn roundtrip_passes_and_is_deterministic() {
    let args = ["roundtrip", "--seed", "7", "--dim", "4", "--count", "20"];
    let a = blends(&args);
    let b = blends(&args);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(stdout(&a), stdout(&b));
    let text = stdout(&a);
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v.as_object().unwrap().len(), 5);
        let at: Vec<usize> = ["\"suite\"", "\"check\"", "\"paper_ref\"", "\"residual\"", "\"pass\""].iter().map(|k| line.find(k).unwrap()).collect();
        assert!(at.windows(2).all(|w| w[0] < w[1]), "{line}");
    }
    for i in 0..20 {
        assert!(text.contains(&format!("\"check\":\"alloy[{i}]\"")));
    }
    assert!(!text.contains("alloy[20]"));
}

#[test]
fn other_seed_changes_report() {
    let a = blends(&["verify-identities", "--seed", "1", "--count", "3"]);
    let b = blends(&["verify-identities", "--seed", "2", "--count", "3"]);
    assert_eq!(a.status.code(), Some(0));
    assert_ne!(stdout(&a), stdout(&b));
}

#[test]
fn counterexample_writes_csv() {
    let o = blends(&["counterexample", "--preset", "harmonic", "--n", "100"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("m,r,witness_norm,sqrt_r,k_upper,exact_block,k_exact"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 100);
    let last = rows.last().unwrap();
    assert_eq!(last[0], 100.0);
    assert!((last[3] - 0.1).abs() < 1e-15);
    assert!(last[4] <= 0.1 + 1e-10);
}

#[test]
fn report_goes_to_out_file() {
    let dir = std::env::temp_dir().join(format!("blends-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.jsonl");
    let o = blends(&["commuting-square", "--grid", "2x2", "--weights", "uniform", "--samples", "50", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.lines().all(|l| l.contains("\"pass\":true")));
    assert!(text.contains("compacts.blend.uniform_2x2"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn invalid_partition_is_a_config_error() {
    let o = blends(&["commuting-square", "--square", r#"{"omega":4,"weights":[0.25,0.25,0.25,0.25],"partition_b":[[0,1],[2]],"partition_c":[[0,2],[1,3]]}"#]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("invalid partition"));
}

#[test]
fn config_errors_exit_two() {
    assert_eq!(blends(&["verify-identities", "--tol", "-1"]).status.code(), Some(2));
    assert_eq!(blends(&["roundtrip", "--dim", "0"]).status.code(), Some(2));
    assert_eq!(blends(&["counterexample", "--preset", "fibonacci"]).status.code(), Some(2));
    assert_eq!(blends(&["commuting-square", "--grid", "2by3"]).status.code(), Some(2));
    assert_eq!(blends(&["commuting-square", "--weights", "product:0.5,0.5;1", "--grid", "3x3"]).status.code(), Some(2));
    assert_eq!(blends(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(blends(&["roundtrip", "--config", "/nonexistent/config.json"]).status.code(), Some(2));
}

#[test]
fn config_file_is_read_and_flags_win() {
    let dir = std::env::temp_dir().join(format!("blends-cli-cfg-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("cfg.json");
    std::fs::write(&path, r#"{"seed": 5, "dims": [2], "count": 2}"#).unwrap();
    let from_file = blends(&["verify-identities", "--config", path.to_str().unwrap()]);
    let from_flags = blends(&["verify-identities", "--seed", "5", "--dim", "2", "--count", "2"]);
    let overridden = blends(&["verify-identities", "--config", path.to_str().unwrap(), "--count", "1"]);
    assert_eq!(from_file.status.code(), Some(0));
    assert_eq!(stdout(&from_file), stdout(&from_flags));
    assert!(stdout(&overridden).len() < stdout(&from_file).len());
    std::fs::write(&path, r#"{"seed": 5, "colour": "red"}"#).unwrap();
    assert_eq!(blends(&["verify-identities", "--config", path.to_str().unwrap()]).status.code(), Some(2));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn unattainable_threshold_exits_one() {
    let o = blends(&["roundtrip", "--count", "2", "--dim", "2", "--tol", "1e-300"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("\"pass\":false"));
}
