use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::{Command, Output};

use delaycode::report::CodeDump;

fn network(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../networks").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_delaycode"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path_str(p: &PathBuf) -> &str {
    p.to_str().unwrap()
}

#[test]
fn ex1_matches_golden_file() {
    let o = run(&["compile", path_str(&network("ex1.net"))]);
    assert!(o.status.success(), "{}", stderr(&o));
    let golden = include_str!("../../../networks/golden/ex1.txt");
    assert_eq!(stdout(&o), golden);
    assert!(golden.contains("v_e5(x) = a(x-3) + b(x-2)"));
}

#[test]
fn text_output_is_deterministic() {
    let file = network("ex5.net");
    let args = ["compile", path_str(&file)];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn ex4_prints_the_transfer_table() {
    let o = run(&["compile", path_str(&network("ex4.net"))]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("tau(e2,e17) = D^2/(1+D^3)"));
}

#[test]
fn malformed_flow_line_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.net");
    std::fs::write(&file, "source A a\nsink T t\nedge x A T\nflow t a x\n").unwrap();
    let o = run(&["compile", file.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));
}

#[test]
fn missing_file_is_an_input_error() {
    let o = run(&["validate", "/nonexistent/net.net"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_flag_is_rejected() {
    let o = run(&["compile", "--frobnicate", path_str(&network("ex1.net"))]);
    assert!(!o.status.success());
}

#[test]
fn tiny_exponent_cap_is_a_resource_error() {
    let o = run(&["compile", "--exponent-cap", "0", path_str(&network("ex1.net"))]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn ex3_simulation_decodes_with_delay_4() {
    let o = run(&["simulate", path_str(&network("ex3.net")), "--horizon", "50"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    for t in ["t1", "t2", "t3"] {
        assert!(out.contains(&format!("{t}: delay 4 PASS")), "{out}");
    }
}

#[test]
fn horizon_below_delay_is_rejected() {
    let o = run(&["simulate", path_str(&network("ex1.net")), "--horizon", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("horizon 1"));
}

#[test]
fn ex5_passes_at_every_sink() {
    let o = run(&["simulate", path_str(&network("ex5.net"))]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.matches(" PASS").count(), 3, "{out}");
    assert!(!out.contains("FAIL"));
}

#[test]
fn schedule_file_and_trace_export() {
    let dir = tempfile::tempdir().unwrap();
    let schedule = dir.path().join("s.txt");
    let trace = dir.path().join("trace.csv");
    std::fs::write(&schedule, "# a b\n10\n01\n11\n").unwrap();
    let o = run(&[
        "simulate",
        path_str(&network("ex1.net")),
        "--horizon",
        "12",
        "--schedule",
        schedule.to_str().unwrap(),
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(&trace).unwrap();
    assert!(csv.starts_with("time,edge,bit\n"));
    // e1 carries a(x-1)
    assert!(csv.contains("1,e1,1\n") && csv.contains("2,e1,0\n"));
}

#[test]
fn json_output_round_trips() {
    for name in ["ex1.net", "ex4.net", "ex5.net"] {
        let o = run(&["compile", "--format", "json", path_str(&network(name))]);
        assert!(o.status.success());
        let text = stdout(&o);
        let parsed: CodeDump = serde_json::from_str(&text).unwrap();
        let mut again = serde_json::to_string_pretty(&parsed).unwrap();
        again.push('\n');
        assert_eq!(again, text, "{name}");
    }
}

#[test]
fn no_shortcut_changes_ex3_exit_encodings() {
    let with = run(&["compile", path_str(&network("ex3.net"))]);
    let without = run(&["compile", "--no-shortcut", path_str(&network("ex3.net"))]);
    assert!(with.status.success() && without.status.success());
    assert_ne!(with.stdout, without.stdout);
}

#[test]
fn ex4_knot_drawings() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "dot",
        path_str(&network("ex4.net")),
        "--knots",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let files: BTreeSet<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    let knot_files = files.iter().filter(|f| f.contains("knot")).count();
    assert_eq!(knot_files, 5);
    assert!(files.contains("ex4.dot"));
}

#[test]
fn acyclic_network_has_no_knot_drawings() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "dot",
        path_str(&network("ex1.net")),
        "--knots",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(stdout(&o).contains("no knots"));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    let dot = std::fs::read_to_string(dir.path().join("ex1.dot")).unwrap();
    let attr = |key: &str| -> BTreeSet<String> {
        dot.lines()
            .filter(|l| l.contains("tooltip"))
            .filter_map(|l| l.split(&format!("{key}=")).nth(1))
            .map(|v| v.split(',').next().unwrap().to_string())
            .collect()
    };
    assert_eq!(attr("color").len(), 6);
    assert_eq!(attr("style").len(), 2);
}

#[test]
fn flows_fills_in_missing_paths() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("butterfly.net");
    std::fs::write(
        &file,
        "source SA a\nsource SB b\nsink T1 t1\nsink T2 t2\n\
         edge e1 SA A\nedge e2 SB B\nedge e3 A T1\nedge e4 B T2\n\
         edge e5 A C\nedge e6 B C\nedge e7 C D\nedge e8 D T1\nedge e9 D T2\n",
    )
    .unwrap();
    let o = run(&["flows", file.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).matches("flow ").count(), 4);
}

#[test]
fn validate_reports_knots() {
    let o = run(&["validate", path_str(&network("ex4.net"))]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("knot {e13,e14,e15,e16,e17}"));
}
