use std::fs;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_deltasphere")).args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn help_lists_flags() {
    let o = run(&["norms", "--help"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    for flag in ["--d", "--n", "--box", "--delta", "--p", "--kmin", "--kmax", "--lambda-points", "--trials", "--seed", "--out"] {
        assert!(text.contains(flag), "missing {flag}");
    }
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn delta_outside_the_open_interval_is_a_usage_error() {
    for bad in ["0.6", "0.5", "0", "-0.1"] {
        let o = run(&["norms", "--delta", bad]);
        assert_eq!(o.status.code(), Some(2), "{bad}");
        assert!(stderr(&o).contains("--delta"));
    }
}

#[test]
fn other_usage_errors_name_the_flag() {
    let cases: [(&[&str], &str); 5] = [
        (&["norms", "--bogus"], "--bogus"),
        (&["norms", "--n", "100"], "--n"),
        (&["norms", "--p", "0.5"], "--p"),
        (&["norms", "--kmin", "3", "--kmax", "1"], "--kmin"),
        (&["norms", "--kernel", "raster", "--n", "64", "--delta", "0.25", "--kmin", "4", "--kmax", "4"], "--kmax"),
    ];
    for (args, flag) in cases {
        let o = run(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(stderr(&o).contains(flag), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn rejected_config_leaves_no_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let o = run(&["norms", "--delta", "0.25,0.6", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn unwritable_output_fails_without_partial_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("missing").join("x.csv");
    let o = run(&["decay", "--delta", "0.25", "--kmin", "0", "--kmax", "0", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("writing"));
}

#[test]
fn decay_report_has_two_deltas() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("decay.csv");
    let o = run(&["decay", "--d", "2", "--delta", "0.25,0.0625", "--kmin", "-2", "--kmax", "1", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config: subcommand=decay d=2 "));
    assert_eq!(lines.next().unwrap(), "d,delta,j,metric,value");
    let envelope: Vec<&str> = text.lines().filter(|l| l.contains(",envelope_a,")).collect();
    assert_eq!(envelope.len(), 2);
    assert!(envelope[0].starts_with("2,0.0625,,"));
}

#[test]
fn norms_runs_are_byte_identical_and_replayable() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let base = ["norms", "--p", "1.3333,2,4", "--n", "64", "--kmax", "3", "--trials", "3", "--seed", "7", "--delta", "0.25,0.125"];
    for path in [&a, &b] {
        let mut args = base.to_vec();
        args.extend(["--out", path.to_str().unwrap()]);
        let o = run(&args);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let full = fs::read_to_string(&a).unwrap();
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    // A single sweep point regenerated alone reproduces its row.
    let o = run(&["norms", "--p", "2", "--n", "64", "--kmax", "3", "--trials", "2", "--seed", "7", "--delta", "0.125"]);
    assert!(o.status.success());
    let single = String::from_utf8(o.stdout).unwrap();
    let pick = |text: &str| -> f64 {
        let line = text.lines().find(|l| l.starts_with("0.125,2,cubebump,1,norm_ratio,")).unwrap();
        line.rsplit(',').next().unwrap().parse().unwrap()
    };
    assert!((pick(&full) - pick(&single)).abs() <= 1e-12);
}

#[test]
fn every_subcommand_runs_at_small_scale() {
    for (sub, extra) in [
        ("strong", &["--kmin", "-1", "--kmax", "1"][..]),
        ("weaktype", &["--lambda-points", "8"][..]),
        ("atoms", &[][..]),
        ("banddecay", &["--kmax", "8", "--jmax", "3"][..]),
    ] {
        let mut args = vec![sub, "--n", "64", "--trials", "2", "--delta", "0.25"];
        args.extend_from_slice(extra);
        let o = run(&args);
        assert!(o.status.success(), "{sub}: {}", stderr(&o));
        let text = String::from_utf8(o.stdout).unwrap();
        assert!(text.lines().count() > 2, "{sub}");
        assert!(!text.contains("NaN"), "{sub}: {text}");
    }
}
