use std::path::Path;
use std::process::{Command, Output};

fn bench(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bench")).args(args).arg("--output").arg(out).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn help_and_version_exit_zero() {
    for flag in ["--help", "--version"] {
        let o = Command::new(env!("CARGO_BIN_EXE_bench")).arg(flag).output().unwrap();
        assert_eq!(o.status.code(), Some(0), "{flag}");
    }
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_bench")).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    let o = bench(&["no-such-experiment"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let o = bench(&["spd-convex", "--stepsize", "sometimes"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn invalid_values_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    for (args, field) in [
        (&["spd-convex", "--tol=-1"][..], "tol"),
        (&["spd-convex", "--dimension", "0"][..], "dimension"),
        (&["sparse-mean", "--dimension", "1"][..], "dimension"),
        (&["constrained-mean", "--radius", "0"][..], "radius"),
        (&["spd-convex", "--eta", "1.5"][..], "eta"),
        (&["spd-convex", "--runs", "0"][..], "runs"),
        (&["sparse-mean", "--mu=-0.1"][..], "mu"),
    ] {
        let o = bench(args, dir.path());
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(stderr(&o).contains(field), "{args:?}: {}", stderr(&o));
    }
    assert!(std::fs::read_dir(dir.path()).unwrap().next().is_none(), "no output on config errors");
}

#[test]
fn config_file_applies_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# small run\nexperiment = check-inequalities\nsamples = 20\nseed = 7\npoints = 12\n").unwrap();
    let out = dir.path().join("out");
    let o = bench(&["check-inequalities", "--config", cfg.to_str().unwrap(), "--seed", "9"], &out);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(out.join("inequalities_summary.csv")).unwrap();
    assert!(text.contains("# samples=20\n"));
    assert!(text.contains("# points=12\n"));
    assert!(text.contains("# seed=9\n"));

    std::fs::write(&cfg, "samples = 20\nbogus = 1\n").unwrap();
    let o = bench(&["check-inequalities", "--config", cfg.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("bogus"));

    let o = bench(&["check-inequalities", "--config", dir.path().join("missing.cfg").to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn iteration_cap_sets_nonconvergence_code() {
    let dir = tempfile::tempdir().unwrap();
    let o = bench(&["constrained-mean", "--dimension", "2", "--max-iter", "1"], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(dir.path().join("constrained_mean_runs.csv").exists());
}

#[test]
fn inequality_report_lists_every_check() {
    let dir = tempfile::tempdir().unwrap();
    let o = bench(&["check-inequalities", "--samples", "40"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("inequalities_summary.csv")).unwrap();
    assert!(text.starts_with("# riemprox-bench v"));
    for check in [
        "sufficient_decrease,",
        "sufficient_decrease_second,",
        "prox_grad_first,",
        "prox_grad_second,",
        "prox_grad_hadamard,",
        "convex_rate,",
        "strongly_convex_rate,",
    ] {
        assert!(text.contains(check), "{check}");
    }
    let flat = std::fs::read_to_string(dir.path().join("inequalities_flat.csv")).unwrap();
    assert!(flat.trim_end().ends_with(",1"));
}

#[test]
fn every_experiment_writes_headed_csv() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["spd-convex", "--dimension", "2", "--max-iter", "20000"][..],
        &["sparse-mean", "--dimension", "3", "--mu", "0.5", "--runs", "1", "--points", "100"][..],
        &["constrained-mean", "--dimension", "3", "--points", "50"][..],
    ] {
        let o = bench(args, dir.path());
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stderr(&o));
    }
    for entry in std::fs::read_dir(dir.path()).unwrap() {
        let text = std::fs::read_to_string(entry.unwrap().path()).unwrap();
        let mut lines = text.lines().skip_while(|l| l.starts_with('#'));
        let header = lines.next().unwrap();
        let width = header.split(',').count();
        assert!(lines.all(|l| l.split(',').count() == width));
        assert!(text.contains("# seed=42\n"));
    }
}
