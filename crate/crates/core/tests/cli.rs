use std::fs;
use std::path::PathBuf;
use std::process::Command;

fn degpen() -> Command {
    Command::new(env!("CARGO_BIN_EXE_degpen"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("degpen-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

const SWEEP: &str = r#"
schema = 1
scenario = "phase_sweep"
seed = 4
reps = 3
[graph]
pmf = { family = "power_law", tau = 2.5 }
[penalty]
kind = ["product", "max"]
[grid]
n = [100, 200]
mu = [0.5]
lambda = [0.3]
"#;

#[test]
fn sweep_is_reproducible_and_replayable() {
    let dir = scratch("sweep");
    let cfg = dir.join("cfg.toml");
    fs::write(&cfg, SWEEP).unwrap();
    let run = |out: &str| {
        let st = degpen().arg("sweep").arg(&cfg).arg("--out").arg(dir.join(out)).status().unwrap();
        assert!(st.success());
        fs::read_to_string(dir.join(out).join("results.csv")).unwrap()
    };
    let a = run("a");
    let b = run("b");
    assert_eq!(a, b);
    let mut lines = a.lines();
    let header = lines.next().unwrap();
    assert_eq!(header, "point,rep,seed,penalty,lambda,mu,n,t_ext,censored,edges,max_degree");
    assert_eq!(lines.count(), 2 * 2 * 3);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("a/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["schema"], 1);

    // same config with another seed must not reuse the directory
    fs::write(&cfg, SWEEP.replace("seed = 4", "seed = 5")).unwrap();
    let out = degpen().arg("sweep").arg(&cfg).arg("--out").arg(dir.join("a")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("different experiment"));
}

#[test]
fn unknown_config_keys_are_reported() {
    let dir = scratch("badkeys");
    let cfg = dir.join("cfg.toml");
    fs::write(&cfg, SWEEP.replace("reps = 3", "reps = 3\nreplicas = 3")).unwrap();
    let out = degpen().arg("sweep").arg(&cfg).arg("--out").arg(dir.join("o")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("replicas"));
}

#[test]
fn simulate_prints_a_report() {
    let out = degpen()
        .args(["--seed", "3", "simulate", "--n", "200", "--penalty", "max", "--mu", "0.5", "--lambda", "0.2"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["censored"], false);
    assert!(v["t_ext"].as_f64().unwrap() > 0.0);
}

#[test]
fn kcore_opperc_and_fit() {
    let out = degpen().args(["kcore", "--n", "2000", "--pmf", "binomial:n=10,p=0.5"]).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["density"].as_f64().unwrap() - v["predicted_density"].as_f64().unwrap()).abs() < 0.05);

    let out = degpen().args(["opperc", "--delta", "0", "1", "--depth", "20", "--reps", "50"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "delta,depth,survival,ci_lo,ci_hi");
    assert!(rows[1].starts_with("0,20,1,"));
    assert!(rows[2].starts_with("1,20,0,"));

    let dir = scratch("fit");
    let csv = dir.join("t.csv");
    let body: String =
        [500.0f64, 1000.0, 2000.0, 4000.0, 8000.0].iter().map(|n| format!("{n},{}\n", 3.0 * n.ln())).collect();
    fs::write(&csv, format!("n,T\n{body}")).unwrap();
    let out = degpen().arg("fit").arg(&csv).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["classification"], "logarithmic");
}

#[test]
fn explore_writes_csv_and_oracle_passes() {
    let out = degpen().args(["explore", "--n", "3000", "--radius", "1", "--roots", "10"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("root,radius,ball_size,surplus"));
    assert_eq!(text.lines().count(), 11);

    let out = degpen().args(["--seed", "7", "oracle"]).output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(out.status.success(), "{text}");
    assert!(text.lines().all(|l| l.starts_with("PASS ")));
}

#[test]
fn bad_arguments_exit_with_two() {
    let out = degpen().args(["simulate", "--n", "10", "--mu", "0.5", "--lambda", "-1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
