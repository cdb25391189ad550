use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dynprice"))
}

fn bundled(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn small(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("exp.cfg");
    fs::write(&path, body).unwrap();
    path
}

const SMALL: &str = r#"
[scenario]
interval = { l = 0.5, u = 1.5 }
true_model = "all"
models = [
  { kind = "linear", params = [1.4, -0.9] },
  { kind = "linear", params = [0.8, -0.3] },
]

[[policies]]
kind = "lrt"

[[policies]]
kind = "cmbp"

[run]
horizon = 150
replications = 20
base_seed = 9
"#;

#[test]
fn validate_bundled_configs() {
    for name in ["case1.cfg", "case2.cfg", "four_lines.cfg"] {
        let o = run(&["validate", "--config", bundled(name).to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stdout(&o));
        assert!(stdout(&o).contains("status: valid"));
    }
}

#[test]
fn validate_crossing_models_fails() {
    let dir = tempfile::tempdir().unwrap();
    // Both lines pass through (7/9, 0.7), the first model's optimal price.
    let cfg = small(
        dir.path(),
        &SMALL.replace("params = [0.8, -0.3]", "params = [1.05, -0.45]"),
    );
    let o = run(&["validate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("violation: arm 0 models (0, 1)"), "{}", stdout(&o));
    let o = run(&["run", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("x.csv").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn malformed_config_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(dir.path(), &SMALL.replace("base_seed = 9", "base_seed = 9\nreplicatons = 3"));
    let o = run(&["validate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("replicatons"), "{}", stderr(&o));

    let cfg = small(dir.path(), &SMALL.replace("horizon = 150", "horizon = -4"));
    let o = run(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("run.horizon = -4"), "{}", stderr(&o));
}

#[test]
fn io_failures_exit_2() {
    let o = run(&["validate", "--config", "/definitely/not/here.cfg"]);
    assert_eq!(o.status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(dir.path(), SMALL);
    let out = dir.path().join("missing_dir").join("out.csv");
    let o = run(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn run_writes_csv_for_every_true_model() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(dir.path(), SMALL);
    let out = dir.path().join("out.csv");
    let o = run(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--workers", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "policy,true_model,t,mean_regret,std_regret,ci_lo,ci_hi,mean_nonoptimal_pulls,replications"
    );
    for policy in ["lrt", "cmbp"] {
        for tm in ["0", "1"] {
            let prefix = format!("{policy},{tm},150,");
            assert!(text.lines().any(|l| l.starts_with(&prefix)), "missing {prefix}");
        }
    }
    assert!(lines.all(|l| l.ends_with(",20")));
    let summary = stdout(&o);
    assert!(summary.contains("mean_regret") && summary.contains("cmbp"));

    // A different seed changes the numbers; the same seed does not.
    let again = dir.path().join("again.csv");
    run(&["run", "--config", cfg.to_str().unwrap(), "--out", again.to_str().unwrap(), "--workers", "1"]);
    assert_eq!(fs::read(&out).unwrap(), fs::read(&again).unwrap());
    let other = dir.path().join("other.csv");
    run(&["run", "--config", cfg.to_str().unwrap(), "--out", other.to_str().unwrap(), "--seed", "10"]);
    assert_ne!(fs::read(&out).unwrap(), fs::read(&other).unwrap());
}

#[test]
fn single_true_model() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(dir.path(), &SMALL.replace("true_model = \"all\"", "true_model = 1"));
    let out = dir.path().join("out.csv");
    let o = run(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.lines().skip(1).all(|l| l.split(',').nth(1) == Some("1")));
}

#[test]
fn bounds_tables() {
    let o = run(&["bounds", "--config", bundled("case1.cfg").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lrt: Vec<&str> = text.lines().filter(|l| l.starts_with("lrt,")).collect();
    assert_eq!(lrt.len(), 2);
    let c: f64 = lrt[1].split(',').nth(6).unwrap().parse().unwrap();
    assert!((c - 306.65).abs() < 0.01, "{c}");
    assert!(text.lines().any(|l| l.starts_with("xlrt,0,1,")));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("b.csv");
    let o = run(&["bounds", "--config", bundled("four_lines.cfg").to_str().unwrap(), "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let saved = fs::read_to_string(&path).unwrap();
    assert_eq!(saved, stdout(&o));
    assert!(saved.starts_with("policy,true_model,competitor,a,m,M,C,total_pull_cap,sum_pull_cap,regret_cap"));
    assert_eq!(saved.lines().filter(|l| l.starts_with("elrt,2,")).count(), 3);
}

#[test]
fn chernoff_pairs() {
    let cfg = bundled("case1.cfg");
    let o = run(&["chernoff", "--config", cfg.to_str().unwrap(), "--pair", "0,1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("exploration_price: 0.5\n"), "{text}");
    let o = run(&["chernoff", "--config", cfg.to_str().unwrap(), "--pair", "1,1"]);
    assert!(stdout(&o).contains("chernoff_distance: 0\n"));
    let o = run(&["chernoff", "--config", cfg.to_str().unwrap(), "--pair", "0,2"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["chernoff", "--config", cfg.to_str().unwrap(), "--pair", "zero"]);
    assert_eq!(o.status.code(), Some(1));
}
