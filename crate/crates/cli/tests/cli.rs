use std::fs;
use std::path::PathBuf;

use coopsir_cli::output::read_table;
use coopsir_cli::run_cli;

fn tmp(name: &str) -> PathBuf {
    let d = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = fs::remove_dir_all(&d);
    d
}

fn config() -> String {
    concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/table3.json").to_string()
}

fn run(out: &PathBuf, args: &[&str]) -> i32 {
    let mut argv = vec!["coopsir".to_string(), "--output".into(), out.display().to_string()];
    argv.extend(args.iter().map(|a| a.to_string()));
    run_cli(&argv)
}

#[test]
fn missing_config_is_an_error() {
    let out = tmp("missing");
    assert_eq!(run(&out, &["simulate", "--config", "/nonexistent/cfg.json"]), 1);
    assert!(!out.join("replicas.csv").exists());
}

#[test]
fn bad_flag_is_a_usage_error() {
    assert_eq!(run(&tmp("usage"), &["simulate", "--no-such-flag"]), 2);
}

#[test]
fn overwrite_needs_force() {
    let out = tmp("force");
    let args = [
        "simulate",
        "--config",
        &config(),
        "--replicas",
        "5",
        "--max-generation",
        "4",
    ];
    assert_eq!(run(&out, &args), 0);
    assert_ne!(run(&out, &args), 0);
    let mut forced = vec!["--force"];
    forced.extend(args);
    assert_eq!(run(&out, &forced), 0);
}

#[test]
fn overrides_reach_the_header_and_the_rows() {
    let out = tmp("overrides");
    let cfg = config();
    let args = [
        "simulate",
        "--config",
        &cfg,
        "--set",
        "rates.beta2=inf",
        "--replicas",
        "7",
        "--max-generation",
        "3",
    ];
    assert_eq!(run(&out, &args), 0);
    let text = fs::read_to_string(out.join("aggregate.csv")).unwrap();
    let header = text.lines().find(|l| l.starts_with("# config:")).unwrap();
    assert!(header.contains("\"inf\""), "{header}");
    assert!(header.contains("\"replicas\":7"), "{header}");
    assert_eq!(read_table(&out.join("aggregate.csv")).unwrap().len(), 4);
    assert_eq!(read_table(&out.join("replicas.csv")).unwrap().len(), 7 * 4);
}

#[test]
fn same_seed_same_bytes() {
    let (a, b) = (tmp("same_a"), tmp("same_b"));
    let cfg = config();
    let args = ["simulate", "--config", &cfg, "--seed", "5", "--replicas", "20"];
    assert_eq!(run(&a, &args), 0);
    assert_eq!(
        run(&b, &["--threads", "2"].iter().chain(&args).copied().collect::<Vec<_>>()),
        0
    );
    for f in ["replicas.csv", "aggregate.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}
