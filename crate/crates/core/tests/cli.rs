use std::path::Path;
use std::process::Command;

fn meshsim() -> Command {
    Command::new(env!("CARGO_BIN_EXE_meshsim"))
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const SMALL: &str = "[workload]\nrate_rps = 20.0\nduration_s = 1.0\n";

#[test]
fn validate_accepts_the_shipped_config() {
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/desk.toml");
    let out = meshsim().args(["validate", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", "[workload]\nrate_rps = 0.0\n");
    let unknown = write(dir.path(), "unknown.toml", "[workload]\nratee = 1.0\n");
    for cfg in [bad, unknown, dir.path().join("missing.toml")] {
        let out = meshsim().args(["validate", "--config"]).arg(&cfg).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "{}", cfg.display());
    }
    let cfg = write(dir.path(), "ok.toml", SMALL);
    let out = meshsim()
        .args(["sweep", "--rates", "10,1", "--out"])
        .arg(dir.path().join("s"))
        .arg("--config")
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_writes_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "ok.toml", SMALL);
    let out_dir = dir.path().join("out");
    let out = meshsim()
        .args(["run", "--seed", "4", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("requests.csv").exists());
    assert!(out_dir.join("summary.csv").exists());
}

#[test]
fn unwritable_output_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "ok.toml", SMALL);
    // A regular file where the output directory should go.
    let blocker = write(dir.path(), "blocker", "");
    let out = meshsim()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(blocker.join("sub"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn bench_complexity_small_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = meshsim()
        .args(["bench-complexity", "--chains", "3,5", "--replicas", "5,10", "--reps", "1", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("complexity.csv").exists());
}
