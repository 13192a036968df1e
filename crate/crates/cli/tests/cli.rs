use std::fs;
use std::process::{Command, Output};

fn ice(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ice"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn list_platforms_appends_user_profiles() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("extra.toml");
    fs::write(
        &path,
        r#"
[[platform]]
name = "Lab Box"
processor = "Test 1"
eps_op_nj = 0.5
pi_op_nj = 1.0
eps_io_nj = 20.0
pi_io_nj = 40.0
core_count = 4
"#,
    )
    .unwrap();
    let builtin = ice(&["list-platforms"]);
    assert!(builtin.status.success());
    let extended = ice(&["list-platforms", "--platforms-file", path.to_str().unwrap()]);
    assert!(extended.status.success(), "{}", stderr(&extended));
    assert_eq!(
        stdout(&extended).lines().count(),
        stdout(&builtin).lines().count() + 1
    );
    assert!(stdout(&extended).contains("Lab Box"));

    let est = ice(&[
        "estimate",
        "--platforms-file",
        path.to_str().unwrap(),
        "--algorithm",
        "co-matmul",
        "--input",
        "64",
        "--platform",
        "lab box",
    ]);
    assert!(est.status.success(), "{}", stderr(&est));
}

#[test]
fn malformed_platform_file_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(
        &path,
        "[[platform]]\nname = \"Broken\"\nprocessor = \"x\"\neps_op_nj = -1.0\npi_op_nj = 1.0\neps_io_nj = 1.0\npi_io_nj = 1.0\n",
    )
    .unwrap();
    let out = ice(&["list-platforms", "--platforms-file", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let msg = stderr(&out);
    assert!(msg.contains("eps_op"), "{msg}");
    assert!(msg.contains("Broken"), "{msg}");
}

#[test]
fn missing_file_is_an_io_error() {
    let out = ice(&["list-platforms", "--platforms-file", "/nonexistent/p.toml"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_names_exit_two_with_suggestions() {
    let out = ice(&[
        "estimate",
        "--algorithm",
        "bogus",
        "--input",
        "torso1",
        "--platform",
        "xeon",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("csb"));
    let out = ice(&[
        "estimate",
        "--algorithm",
        "csc",
        "--input",
        "nomatrix",
        "--platform",
        "xeon",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("torso1"));
}

#[test]
fn basic_matmul_on_a_platform_without_cores() {
    let out = ice(&[
        "estimate",
        "--algorithm",
        "basic-matmul",
        "--input",
        "1024",
        "--platform",
        "Nehalem i7-950",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("core count"), "{}", stderr(&out));
}

#[test]
fn estimate_reports_boundedness() {
    let out = ice(&[
        "estimate",
        "--algorithm",
        "csc",
        "--input",
        "torso1",
        "--platform",
        "xeon",
        "--bound-mode",
        "memory",
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("boundedness  memory-bound"));
}

#[test]
fn compare_writes_csv_and_chart() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("r.csv");
    let svg = dir.path().join("r.svg");
    let out = ice(&[
        "compare",
        "--algorithm",
        "csc",
        "--algorithm",
        "csb",
        "--input",
        "torso1,ldoor",
        "--platform",
        "xeon,xeon-phi",
        "--bound-mode",
        "memory",
        "--out-csv",
        csv.to_str().unwrap(),
        "--out-chart",
        svg.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "input,platform,energy_a_nJ,energy_b_nJ,ratio,boundedness"
    );
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("torso1,Xeon,"));
    assert!(lines[3].starts_with("ldoor,Xeon,"));
    assert!(fs::read_to_string(&svg).unwrap().starts_with("<svg"));
}

#[test]
fn validate_lemma1_exit_codes() {
    let ok = ice(&[
        "validate-lemma1",
        "--trials",
        "20",
        "--trace-len",
        "500",
        "--seed",
        "3",
    ]);
    assert!(ok.status.success(), "{}", stderr(&ok));
    assert!(stdout(&ok).contains("failed     0"));
    let bad = ice(&["validate-lemma1", "--trace-len", "0"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn validate_io_flags_out_of_band_sizes() {
    let ok = ice(&["validate-io", "--kernel", "co-matmul", "--sizes", "32,64"]);
    assert!(ok.status.success(), "{}", stderr(&ok));
    // a cache holding everything makes the streaming closed form far too high
    let flagged = ice(&[
        "validate-io",
        "--kernel",
        "basic-matmul",
        "--sizes",
        "16",
        "--capacity-lines",
        "4096",
    ]);
    assert_eq!(flagged.status.code(), Some(3), "{}", stdout(&flagged));
    assert!(stdout(&flagged).contains("OUTSIDE"));
}

#[test]
fn bad_flags_exit_two() {
    assert_eq!(
        ice(&["compare", "--bound-mode", "sideways", "--preset", "spmv"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(ice(&["no-such-command"]).status.code(), Some(2));
}
