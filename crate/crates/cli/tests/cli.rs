use std::process::{Command, Output};

use gwregion_cli::record::{CheckRecord, EvalRecord, SurfaceRecord};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gwregion"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn eval(args: &[&str]) -> EvalRecord {
    let mut full = vec!["eval"];
    full.extend_from_slice(args);
    let o = run(&full);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(&stdout(&o)).unwrap()
}

#[test]
fn eval_spot_values() {
    let r = eval(&["dsbs", "--p", "0.05", "--alpha", "1", "--beta", "1", "--which", "increasing"]);
    assert!((r.value.unwrap() - 1.286_397).abs() < 1e-6);
    assert_eq!(r.region, "D2");

    let r = eval(&["gaussian", "--rho", "0.9", "--alpha", "0.5", "--beta", "0.5", "--which", "increasing"]);
    assert!((r.value.unwrap() - 0.547_394_894_755_2).abs() < 1e-9);

    let r = eval(&["dsbs", "--p", "0.05", "--alpha", "0", "--beta", "0", "--which", "upper"]);
    assert!((r.value.unwrap() - 0.286_397).abs() < 1e-6);
}

#[test]
fn eval_reports_couplings_and_mixtures() {
    let r = eval(&["dsbs", "--p", "0.05", "--alpha", "0.6", "--beta", "0.2", "--which", "conv-phi"]);
    let mix = r.mixture.expect("mixture present");
    assert_eq!(mix.weights.len(), mix.components.len());
    let r = eval(&["dsbs", "--p", "0.05", "--alpha", "0.3", "--beta", "0.4", "--which", "phi-upper"]);
    assert!(r.coupling.is_some());
}

#[test]
fn eval_output_round_trips() {
    let o = run(&["eval", "gaussian", "--rho", "0.9", "--alpha", "0.5", "--beta", "0.5", "--which", "upper"]);
    let text = stdout(&o);
    assert!(text.contains(r#""value":"inf""#), "{text}");
    let r: EvalRecord = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string(&r).unwrap(), text.trim_end());
}

#[test]
fn domain_errors_exit_with_two() {
    let o = run(&["eval", "dsbs", "--p", "0.7", "--alpha", "0.1"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("p"), "{err}");
    assert_eq!(run(&["eval", "dsbs", "--alpha", "0.1"]).status.code(), Some(2));
    assert_eq!(run(&["eval", "gaussian", "--rho", "0.5", "--alpha", "0.1", "--which", "rd"]).status.code(), Some(2));
    assert_eq!(run(&["eval", "dsbs", "--p", "0.1", "--alpha", "0.1", "--which", "phi-q"]).status.code(), Some(2));
}

#[test]
fn io_errors_exit_with_three() {
    let o = run(&["surface", "dsbs", "--p", "0.05", "--steps", "3", "--output", "/nonexistent/dir/out.csv"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn surface_csv_format() {
    let o = run(&["surface", "dsbs", "--p", "0.05", "--which", "increasing", "--steps", "3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(!text.contains('\r'));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# units=bits");
    assert_eq!(lines[1], "alpha,beta,value,region");
    assert_eq!(lines.len(), 2 + 9);
    let first: Vec<&str> = lines[2].split(',').collect();
    assert_eq!((first[0], first[1], first[3]), ("0", "0", "D1"));
    assert!(first[2].parse::<f64>().unwrap().abs() < 1e-15);
    let last: Vec<&str> = lines[10].split(',').collect();
    assert_eq!(&last[..2], &["1", "1"]);
    assert!((last[2].parse::<f64>().unwrap() - 1.286_397).abs() < 1e-6);
    // row-major: beta varies fastest
    assert!(lines[3].starts_with("0,0.5,"));
}

#[test]
fn surface_outside_points_have_empty_values() {
    let o = run(&["surface", "dsbs", "--p", "0.05", "--which", "lower", "--steps", "5"]);
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.ends_with(",,OUTSIDE")), "{text}");
}

#[test]
fn gaussian_upper_surface_is_all_inf() {
    let o = run(&["surface", "gaussian", "--rho", "0.9", "--which", "upper", "--steps", "4"]);
    let text = stdout(&o);
    assert!(text.starts_with("# units=nats\n"));
    for line in text.lines().skip(2) {
        assert_eq!(line.split(',').nth(2), Some("inf"), "{line}");
    }
}

#[test]
fn surface_json_round_trips_and_matches_csv() {
    let o = run(&["surface", "gaussian", "--rho", "0.6", "--steps", "4", "--format", "json"]);
    let text = stdout(&o);
    let rec: SurfaceRecord = serde_json::from_str(&text).unwrap();
    assert_eq!(rec.rows.len(), 16);
    assert_eq!(serde_json::to_string(&rec).unwrap(), text.trim_end());
}

#[test]
fn lossy_sweep_matches_point_evaluation() {
    let args = ["dsbs", "--p", "0.1", "--which", "lossy", "--d1", "0.05", "--d2", "0.08"];
    let mut sweep = vec!["surface", "--steps", "3", "--extent", "0.5"];
    sweep.extend_from_slice(&args);
    let text = stdout(&run(&sweep));
    for line in text.lines().skip(2) {
        let f: Vec<&str> = line.split(',').collect();
        let mut point = args.to_vec();
        point.extend_from_slice(&["--r1", f[0], "--r2", f[1]]);
        let r = eval(&point);
        let v: f64 = f[2].parse().unwrap();
        assert!((v - r.value.unwrap()).abs() <= 5e-9 * r.value.unwrap().abs().max(1.0), "{line}");
    }
}

#[test]
fn surface_file_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let o = run(&["surface", "dsbs", "--p", "0.05", "--which", "conv-phi", "--steps", "11", "--output", path.to_str().unwrap()]);
        assert!(o.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn quick_verify_passes_and_is_reproducible() {
    let first = run(&["verify", "--quick", "--seed", "7"]);
    assert!(first.status.success(), "{}", stdout(&first));
    let second = run(&["verify", "--quick", "--seed", "7"]);
    assert_eq!(first.stdout, second.stdout);
    assert!(stdout(&first).lines().last().unwrap().starts_with("all "));
}

#[test]
fn corrupted_reference_fails_verification() {
    let o = run(&["verify", "--quick", "--criterion", "1", "--criterion", "8", "--offset", "1e-3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("failed:"));
}

#[test]
fn verify_json_lists_every_check() {
    let o = run(&["verify", "--quick", "--criterion", "5", "--json"]);
    assert!(o.status.success());
    let checks: Vec<CheckRecord> = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(checks.len(), 3);
    assert!(checks.iter().all(|c| c.criterion == 5 && c.passed));
}
