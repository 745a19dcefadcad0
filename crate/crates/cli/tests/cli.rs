use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn fairclust(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fairclust"))
        .args(args)
        .output()
        .expect("binary runs")
}

/// Two groups of 20 points in three loose blobs.
fn workspace(config: &str) -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    let mut csv = String::from("x,y,g\n");
    for i in 0..40 {
        let blob = (i % 3) as f64 * 10.0;
        csv.push_str(&format!(
            "{},{},{}\n",
            blob + (i % 7) as f64 * 0.1,
            (i % 5) as f64 * 0.2,
            i % 2
        ));
    }
    fs::write(dir.path().join("points.csv"), csv).unwrap();
    fs::write(
        dir.path().join("recipe.toml"),
        "name = \"toy\"\ndata = \"points.csv\"\nfeature_columns = [\"x\", \"y\"]\nprotected_column = \"g\"\n",
    )
    .unwrap();
    fs::write(dir.path().join("exp.toml"), config).unwrap();
    dir
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn summary_goes_to_stdout_without_output() {
    let dir = workspace("recipe = \"recipe.toml\"\nk = 3\ntrials = 2\n");
    let out = fairclust(&["run", "--config", path_str(&dir.path().join("exp.toml"))]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("kind,algorithm,dataset,k,p,n,tau"));
    assert!(stdout.contains("frac-oe"));
}

#[test]
fn overrides_and_output_files() {
    let dir = workspace("recipe = \"recipe.toml\"\nk = 3\ntrials = 2\n");
    let output = dir.path().join("res.json");
    let out = fairclust(&[
        "run",
        "--config",
        path_str(&dir.path().join("exp.toml")),
        "--algorithm",
        "frac",
        "--k",
        "2",
        "--tau",
        "0.25,0.12",
        "--p",
        "1",
        "--trials",
        "3",
        "--seed",
        "9",
        "--jobs",
        "2",
        "--format",
        "json",
        "--output",
        path_str(&output),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(&output).unwrap()).unwrap();
    assert_eq!(summary[0]["algorithm"], "frac");
    assert_eq!(summary[0]["k"], 2);
    assert_eq!(summary[0]["p"], 1);
    let trials: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("res.trials.json")).unwrap()).unwrap();
    assert_eq!(trials.as_array().unwrap().len(), 3);
}

#[test]
fn results_do_not_depend_on_jobs() {
    let dir = workspace("recipe = \"recipe.toml\"\nk = 3\ntrials = 3\nalgorithm = \"frac\"\n");
    let config = dir.path().join("exp.toml");
    // everything except the wall-clock columns
    let run = |jobs: &str| {
        let out = fairclust(&["run", "--config", path_str(&config), "--jobs", jobs]);
        assert!(out.status.success());
        let text = String::from_utf8(out.stdout).unwrap();
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let headers = rdr.headers().unwrap().clone();
        rdr.records()
            .map(|r| {
                let r = r.unwrap();
                headers
                    .iter()
                    .zip(r.iter())
                    .filter(|(h, _)| !h.starts_with("runtime_s") && !h.starts_with("overhead_s"))
                    .map(|(_, v)| v.to_string())
                    .collect::<Vec<_>>()
            })
            .collect::<Vec<_>>()
    };
    assert_eq!(run("1"), run("4"));
}

#[test]
fn config_errors_exit_one() {
    let dir = workspace("recipe = \"recipe.toml\"\nk = 3\nbogus = 1\n");
    let config = dir.path().join("exp.toml");
    assert_eq!(
        fairclust(&["run", "--config", path_str(&config)]).status.code(),
        Some(1)
    );
    assert_eq!(
        fairclust(&["run", "--config", "/nonexistent/exp.toml"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(fairclust(&["run"]).status.code(), Some(1));
    assert_eq!(
        fairclust(&["run", "--config", "x", "--p", "3"]).status.code(),
        Some(1)
    );

    let dir = workspace("recipe = \"recipe.toml\"\nk = 4\n");
    let config = dir.path().join("exp.toml");
    let out = fairclust(&["run", "--config", path_str(&config), "--tau", "0.3,0.1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tau"));
}

#[test]
fn runtime_errors_exit_two() {
    // the oracle refuses groups larger than its enumeration limit
    let dir = workspace("recipe = \"recipe.toml\"\nk = 2\nalgorithm = \"oracle\"\ntrials = 1\n");
    let out = fairclust(&["run", "--config", path_str(&dir.path().join("exp.toml"))]);
    assert_eq!(
        out.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let dir = workspace("recipe = \"recipe.toml\"\nk = 2\ntrials = 1\n");
    let out = fairclust(&[
        "run",
        "--config",
        path_str(&dir.path().join("exp.toml")),
        "--output",
        path_str(&dir.path().join("missing/dir/res.csv")),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_exits_zero() {
    let out = fairclust(&["run", "--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("--tau"));
}
