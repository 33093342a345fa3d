use std::path::Path;
use std::process::{Command, Output};

fn nlcap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlcap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Data rows of a CSV table as string fields.
fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn constant_kernels_without_wall_preference_give_ninety_degrees() {
    let o = nlcap(&["solve-angle"]);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&stdout(&o));
    assert_eq!(r[0][0], "interior");
    let deg: f64 = r[0][2].parse().unwrap();
    assert!((deg - 90.0).abs() < 1e-9, "{deg}");
    assert_eq!(r[0][5], "true");
}

#[test]
fn hydrophilic_wall_with_longer_range_sticks() {
    let o = nlcap(&[
        "solve-angle",
        "-s",
        "s1=0.3",
        "-s",
        "s2=0.7",
        "-s",
        "sigma=-1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&stdout(&o));
    assert_eq!(r[0][0], "sticking");
    assert_eq!(r[0][2].parse::<f64>().unwrap(), 0.0);
}

#[test]
fn sigma_beyond_the_bound_has_no_interior_solution() {
    // constant unit profiles give a bound of 1
    let o = nlcap(&["solve-angle", "-s", "sigma=2"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(rows(&stdout(&o))[0][1], "");
}

#[test]
fn bad_configurations_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let malformed = dir.path().join("bad.conf");
    std::fs::write(&malformed, "s1 = 0.4\nsigma 0.2\n").unwrap();
    let unknown = dir.path().join("unknown.conf");
    std::fs::write(&unknown, "sigma = 0.2\nlambda = 3\n").unwrap();
    for args in [
        vec!["solve-angle", "-c", malformed.to_str().unwrap()],
        vec!["solve-angle", "-c", unknown.to_str().unwrap()],
        vec!["solve-angle", "-s", "s1=1.5"],
        vec!["solve-angle", "-c", "/nonexistent/run.conf"],
        vec!["frobnicate"],
    ] {
        let o = nlcap(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn sigma_sweep_is_increasing_and_crosses_ninety_degrees() {
    let o = nlcap(&["scan", "-s", "from=-0.9", "-s", "to=0.9", "-s", "steps=7"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("sigma,theta_rad,theta_deg,residual,regime\n"));
    let r = rows(&text);
    assert_eq!(r.len(), 7);
    let theta: Vec<f64> = r.iter().map(|row| row[1].parse().unwrap()).collect();
    assert!(theta.windows(2).all(|w| w[1] > w[0]), "{theta:?}");
    assert_eq!(r[3][0], "0");
    assert!((r[3][2].parse::<f64>().unwrap() - 90.0).abs() < 1e-9);
}

#[test]
fn empty_sweep_ranges_exit_with_one() {
    for (from, to, steps) in [("0.5", "-0.5", "4"), ("0", "1", "0"), ("0.2", "0.2", "3")] {
        let o = nlcap(&[
            "scan",
            "-s",
            &format!("from={from}"),
            "-s",
            &format!("to={to}"),
            "-s",
            &format!("steps={steps}"),
        ]);
        assert_eq!(o.status.code(), Some(1), "{from}..{to}/{steps}");
    }
}

#[test]
fn sweep_output_does_not_depend_on_the_worker_count() {
    let args = [
        "scan",
        "-s",
        "sweep=s1",
        "-s",
        "from=0.2",
        "-s",
        "to=0.8",
        "-s",
        "steps=9",
        "-s",
        "sigma=0.3",
        "-s",
        "s2=0.4",
    ];
    let run = |workers: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_nlcap"))
            .args(args)
            .env("NLCAP_WORKERS", workers)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0));
        o.stdout
    };
    let one = run("1");
    assert_eq!(one, run("4"));
    assert_eq!(rows(&String::from_utf8(one).unwrap()).len(), 9);
}

#[test]
fn verification_suites_pass() {
    for suite in ["duality", "dual-angle", "reduction"] {
        let o = nlcap(&["verify", "-s", &format!("suite={suite}"), "--seed", "11"]);
        let text = stdout(&o);
        assert_eq!(o.status.code(), Some(0), "{suite}: {text}");
        assert!(rows(&text).iter().all(|r| r[2] == "PASS"));
    }
}

#[test]
fn slab_suite_reports_each_check() {
    let o = nlcap(&["verify", "-s", "suite=cstar"]);
    let r = rows(&stdout(&o));
    let status = |name: &str| {
        r.iter()
            .find(|row| row[1] == name)
            .map(|row| row[2].clone())
            .unwrap()
    };
    assert_eq!(status("t-exponent"), "PASS");
    assert_eq!(status("r-exponent"), "PASS");
    assert_eq!(status("c-star-exact"), "PASS");
    // the exit code follows the c-star check
    let expected = if status("c-star") == "PASS" { 0 } else { 4 };
    assert_eq!(o.status.code(), Some(expected));
}

#[test]
fn unknown_suite_exits_with_one() {
    assert_eq!(
        nlcap(&["verify", "-s", "suite=everything"]).status.code(),
        Some(1)
    );
    assert_eq!(nlcap(&["verify"]).status.code(), Some(1));
}

#[test]
fn empty_droplet_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = nlcap(&["minimize", "-s", "m=0", "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn minimize_is_reproducible_from_seed_and_echoed_config() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (
        dir.path().join("a"),
        dir.path().join("b"),
        dir.path().join("c"),
    );
    let args = |out: &Path| {
        let out = out.to_str().unwrap().to_string();
        [
            "minimize",
            "-s",
            "width=14",
            "-s",
            "height=10",
            "-s",
            "m=32",
            "-s",
            "wall=bottom",
            "-s",
            "sigma=-0.4",
            "-s",
            "sweeps=120",
            "--seed",
            "7",
            "-o",
        ]
        .into_iter()
        .map(String::from)
        .chain([out])
        .collect::<Vec<_>>()
    };
    let run = |args: Vec<String>| {
        let o = Command::new(env!("CARGO_BIN_EXE_nlcap"))
            .args(&args)
            .output()
            .unwrap();
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
        o.stdout
    };
    let first = run(args(&a));
    assert_eq!(first, run(args(&b)));
    let echoed = a.join("config.resolved");
    let again = run(vec![
        "minimize".into(),
        "-c".into(),
        echoed.to_str().unwrap().into(),
        "-o".into(),
        c.to_str().unwrap().into(),
    ]);
    assert_eq!(first, again);
    for name in ["mask.pbm", "trace.csv", "angle.csv", "summary.csv"] {
        assert_eq!(read(&a, name), read(&b, name), "{name}");
        assert_eq!(read(&a, name), read(&c, name), "{name}");
    }
    let header = String::from_utf8(read(&a, "angle.csv")).unwrap();
    assert!(
        header.starts_with("sigma,theta_pred_rad,theta_pred_deg,theta_meas_rad,theta_meas_deg\n")
    );
    assert!(String::from_utf8(read(&a, "trace.csv"))
        .unwrap()
        .starts_with("step,energy\n"));
}

#[test]
fn neutral_wall_droplet_meets_the_floor_near_ninety_degrees() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = nlcap(&[
        "minimize",
        "-s",
        "m=600",
        "-s",
        "wall=bottom",
        "--seed",
        "1",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&String::from_utf8(read(&out, "angle.csv")).unwrap());
    let (pred, meas): (f64, f64) = (r[0][2].parse().unwrap(), r[0][4].parse().unwrap());
    assert!((pred - 90.0).abs() < 1e-9);
    assert!((meas - 90.0).abs() <= 10.0, "measured {meas}°");
}

#[test]
fn anisotropy_tables_are_read_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, phase: f64| {
        let path = dir.path().join(name);
        let text: String = (0..256)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / 256.0;
                format!("{t} {}\n", 1.0 + 0.3 * (2.0 * t + phase).cos())
            })
            .collect();
        std::fs::write(&path, format!("# angle value\n{text}")).unwrap();
        path.to_str().unwrap().to_string()
    };
    let angle = |a1: &str| {
        let o = nlcap(&["solve-angle", "-s", &format!("a1={a1}"), "-s", "a2=const:2"]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
        rows(&stdout(&o))[0][2].parse::<f64>().unwrap()
    };
    // a profile symmetric about the vertical keeps the neutral angle
    assert!((angle(&write("even.txt", 0.0)) - 90.0).abs() < 1e-6);
    assert!((angle(&write("tilted.txt", 0.6)) - 90.0).abs() > 1.0);
    assert_eq!(
        nlcap(&["solve-angle", "-s", "a1=/nonexistent/table.txt"])
            .status
            .code(),
        Some(1)
    );
}
