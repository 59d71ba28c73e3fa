use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hgan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hgan"))
        .args(args)
        .output()
        .expect("spawn hgan")
}

fn ok(args: &[&str]) -> Output {
    let out = hgan(args);
    assert!(
        out.status.success(),
        "hgan {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

const SMALL: &str = "\
# tiny run
n_grid = 1, 3
rho_grid = 0, 0.1
episodes_train = 3
episodes_test = 12
length = 250
eval_points = 300
";

fn write_config(dir: &Path) -> String {
    let p = dir.join("small.cfg");
    fs::write(&p, SMALL).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn train_sweep_demo_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let out = dir.path().join("run");
    let out_s = out.to_str().unwrap();

    ok(&["train", "--config", &cfg, "--out", out_s, "--seed", "4"]);
    assert!(out.join("hierarchy_n1.ousg").is_file());
    assert!(out.join("hierarchy_n3.ousg").is_file());
    let loss = fs::read_to_string(out.join("level_loss.csv")).unwrap();
    let lines: Vec<&str> = loss.lines().collect();
    assert_eq!(lines[0], "n,level,mean_sq_err,points");
    // One row for N = 1 plus three for N = 3.
    assert_eq!(lines.len(), 1 + 1 + 3);
    let log = fs::read_to_string(out.join("train_log.csv")).unwrap();
    assert_eq!(log.lines().count(), 1 + 3 * 3);

    ok(&["sweep", "--config", &cfg, "--out", out_s, "--seed", "4"]);
    let sweep = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let rows: Vec<Vec<&str>> = sweep.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(
        rows[0].join(","),
        "detector,rho,n,mean_delay,miss_rate,mean_cost,sampling_ratio,n_crossings,seed"
    );
    // Baseline for 2 ρ, then 2 N × 2 ρ.
    assert_eq!(rows.len(), 1 + 2 + 4);
    assert_eq!(rows[1][0], "baseline");
    assert_eq!(rows[1][2], "");
    assert_eq!(
        rows[1][3..],
        rows[2][3..],
        "baseline must not depend on rho"
    );
    assert_eq!(rows[3][0], "gan-1");
    assert_eq!(rows[6][0], "gan-3");
    for r in &rows[1..] {
        assert_eq!(r.len(), 9);
        assert_eq!(r[8], "4");
        // Paired episodes: every detector sees the same crossings.
        assert_eq!(r[7], rows[1][7]);
    }

    let dump = dir.path().join("series.txt");
    ok(&[
        "demo",
        "--config",
        &cfg,
        "--out",
        out_s,
        "--seed",
        "4",
        "--dump-series",
        dump.to_str().unwrap(),
    ]);
    let demo = fs::read_to_string(out.join("demo.csv")).unwrap();
    let mut it = demo.lines();
    assert_eq!(
        it.next().unwrap(),
        "t,x,baseline,gan-1-rho0,gan-1-rho0.1,gan-3-rho0,gan-3-rho0.1"
    );
    let body: Vec<&str> = it.collect();
    assert_eq!(body.len(), 250);
    let series = fs::read_to_string(&dump).unwrap();
    let values: Vec<f64> = series.lines().map(|l| l.parse().unwrap()).collect();
    assert_eq!(values.len(), 250);
    for (t, line) in body.iter().enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[0].parse::<usize>().unwrap(), t);
        assert_eq!(f[1].parse::<f64>().unwrap(), values[t]);
        // Every detector samples at t = 0.
        if t == 0 {
            assert!(f[2..].iter().all(|&v| v == "1"));
        }
    }
}

#[test]
fn runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        let d = d.to_str().unwrap();
        ok(&["train", "--config", &cfg, "--out", d, "--seed", "9"]);
        ok(&["sweep", "--config", &cfg, "--out", d, "--seed", "9"]);
        ok(&["demo", "--config", &cfg, "--out", d, "--seed", "9"]);
    }
    for f in [
        "hierarchy_n1.ousg",
        "hierarchy_n3.ousg",
        "level_loss.csv",
        "train_log.csv",
        "sweep.csv",
        "demo.csv",
    ] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }

    // A different seed changes the results.
    let c = dir.path().join("c");
    let c = c.to_str().unwrap();
    ok(&["train", "--config", &cfg, "--out", c, "--seed", "10"]);
    assert_ne!(
        fs::read(a.join("hierarchy_n3.ousg")).unwrap(),
        fs::read(Path::new(c).join("hierarchy_n3.ousg")).unwrap()
    );
}

#[test]
fn missing_weights_name_n() {
    let dir = tempfile::tempdir().unwrap();
    let out = hgan(&[
        "sweep",
        "--out",
        dir.path().to_str().unwrap(),
        "--n-grid",
        "7",
        "--episodes",
        "1",
    ]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("N = 7"), "{err}");
}

#[test]
fn bad_config_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.cfg");
    fs::write(&p, "seed = 1\nwidth = 3\n").unwrap();
    let out = hgan(&["train", "--config", p.to_str().unwrap()]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2") && err.contains("width"), "{err}");

    let out = hgan(&["sweep", "--mu", "1"]);
    assert!(!out.status.success());
    let out = hgan(&["sweep", "--rho-grid", "-0.1"]);
    assert!(!out.status.success());
}
