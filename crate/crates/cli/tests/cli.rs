use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fixpoint_core::io::{parse_matrix, report_matrix};
use fixpoint_core::{is_positive_definite, verify_spc_lmi, Tolerances};
use tempfile::TempDir;

const LAPLACIAN_GRAPH: &str = "3\n1 2 1\n1 3 1\n2 3 2\n3 1 2\n";
const I_MINUS_L: &str = "3\n0 0.5 0.5\n0 0 1\n1 0 0\n";

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p
}

fn fixpoint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fixpoint")).args(args).output().unwrap()
}

fn run_ok(args: &[&str]) -> String {
    let out = fixpoint(args);
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn value<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .filter_map(|l| l.trim_start_matches("# ").strip_prefix(key))
        .find_map(|rest| rest.strip_prefix(": "))
        .unwrap_or_else(|| panic!("no `{key}` in\n{text}"))
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let j = header.iter().position(|h| *h == name).unwrap();
    lines
        .take_while(|l| !l.starts_with('#'))
        .map(|l| l.split(',').nth(j).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn classify_consensus_operator_is_spc_with_valid_certificate() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "a.txt", I_MINUS_L);
    let report = run_ok(&["--command", "classify", "--input", path(&input)]);
    assert_eq!(value(&report, "is_spc"), "true");
    assert_eq!(value(&report, "is_contraction"), "false");

    let a = parse_matrix(I_MINUS_L).unwrap();
    let kappa: f64 = value(&report, "witness.kappa").parse().unwrap();
    let p = report_matrix(&report, "certificate.spc").unwrap().unwrap();
    let t = Tolerances::default();
    assert!(is_positive_definite(&p, &t).unwrap());
    assert!(verify_spc_lmi(&a, &p, kappa, &t).unwrap());
}

#[test]
fn classify_identity() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "i.txt", "2\n1 0\n0 1\n");
    let report = run_ok(&["--command", "classify", "--input", path(&input)]);
    assert_eq!(value(&report, "is_nonexpansive"), "true");
    assert_eq!(value(&report, "is_averaged"), "true");
    assert_eq!(value(&report, "is_spc"), "true");
    assert_eq!(value(&report, "is_contraction"), "false");
}

#[test]
fn classify_jordan_block_flags_eigenvalue_one() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "j.txt", "2\n1 1\n0 1\n");
    let report = run_ok(&["--command", "classify", "--input", path(&input)]);
    for key in ["is_contraction", "is_nonexpansive", "is_averaged", "is_spc"] {
        assert_eq!(value(&report, key), "false", "{key}");
    }
    assert!(report.contains("eigenvalue 1 not semi-simple"));
}

#[test]
fn report_matrices_round_trip_bit_for_bit() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "a.txt", I_MINUS_L);
    let out = dir.path().join("report.txt");
    run_ok(&["--command", "classify", "--input", path(&input), "--output", path(&out)]);
    let report = fs::read_to_string(&out).unwrap();
    let p = report_matrix(&report, "certificate.ne").unwrap().unwrap();

    let again = write(&dir, "p.txt", &fixpoint_core::io::format_matrix(&p));
    let reparsed = parse_matrix(&fs::read_to_string(again).unwrap()).unwrap();
    for i in 0..p.dim() {
        for j in 0..p.dim() {
            assert_eq!(p[(i, j)].to_bits(), reparsed[(i, j)].to_bits());
        }
    }
}

#[test]
fn iterate_mann_on_consensus_operator_drives_residual_to_zero() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "a.txt", I_MINUS_L);
    let csv = run_ok(&["--command", "iterate", "--input", path(&input), "--c", "2"]);
    assert_eq!(value(&csv, "verdict"), "converged");
    let fix = column(&csv, "fix_residual");
    assert!(*fix.last().unwrap() < 1e-7);
}

#[test]
fn iterate_game_operator_keeps_residual() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "f.txt", "2\n1 -1\n1 1\n");
    let csv = run_ok(&["--command", "iterate", "--input", path(&input), "--x0", "0.5,0", "--max-iter", "20000"]);
    let fix = column(&csv, "fix_residual");
    assert!(fix[fix.len() - 1000..].iter().all(|r| *r > 0.5));
    assert_ne!(value(&csv, "verdict"), "converged");
}

#[test]
fn picard_on_half_identity_halves_the_residual() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "h.txt", "2\n0.5 0\n0 0.5\n");
    let csv = run_ok(&[
        "--command", "iterate", "--input", path(&input), "--iteration", "picard", "--x0", "1 1", "--state",
    ]);
    let fix = column(&csv, "fix_residual");
    for w in fix.windows(2).take(20) {
        assert!((w[1] / w[0] - 0.5).abs() < 1e-12);
    }
    assert_eq!(column(&csv, "x1")[1], 0.5);
}

#[test]
fn krasnoselskij_requires_alpha() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "a.txt", I_MINUS_L);
    let out = fixpoint(&["--command", "iterate", "--input", path(&input), "--iteration", "krasnoselskij"]);
    assert_eq!(out.status.code(), Some(4));
    let ok = run_ok(&[
        "--command", "iterate", "--input", path(&input), "--iteration", "krasnoselskij", "--alpha", "0.5",
    ]);
    assert_eq!(value(&ok, "verdict"), "converged");
}

#[test]
fn mann_rejects_constant_schedule() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "a.txt", I_MINUS_L);
    let out = fixpoint(&["--command", "iterate", "--input", path(&input), "--schedule", "constant"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn consensus_on_three_node_graph() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "g.txt", LAPLACIAN_GRAPH);
    for schedule in ["harmonic", "sqrt-harmonic"] {
        let report = run_ok(&[
            "--command", "consensus", "--input", path(&input), "--c", "2", "--schedule", schedule, "--format",
            "report",
        ]);
        assert_eq!(value(&report, "consensus"), "true", "{schedule}");
        assert_eq!(value(&report, "strongly_connected"), "true");
    }
}

#[test]
fn consensus_single_node_is_immediate() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "g.txt", "1\n");
    let report = run_ok(&["--command", "consensus", "--input", path(&input), "--format", "report"]);
    assert_eq!(value(&report, "consensus"), "true");
    assert_eq!(value(&report, "iterations"), "0");
}

#[test]
fn consensus_warns_on_disconnected_graph() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "g.txt", "3\n1 2 1\n2 1 1\n");
    let out = fixpoint(&["--command", "consensus", "--input", path(&input), "--format", "report"]);
    assert!(out.status.success());
    let report = String::from_utf8(out.stdout).unwrap();
    assert_eq!(value(&report, "strongly_connected"), "false");
    assert!(report.contains("warning: "));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not strongly connected"));
}

#[test]
fn game_scalar_coupling_oscillates() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "c.txt", "1\n1\n");
    let report = run_ok(&["--command", "game", "--input", path(&input), "--format", "report"]);
    assert_eq!(value(&report, "verdict"), "oscillating");
    assert_eq!(value(&report, "i_minus_f_is_spc"), "false");
    let spectrum = value(&report, "spectrum_i_minus_f");
    assert!(spectrum.contains("1.0000000000000000e0+1.0000000000000000e0j"));
    assert!(spectrum.contains("1.0000000000000000e0-1.0000000000000000e0j"));
}

#[test]
fn game_from_equilibrium_converges_immediately() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "c.txt", "1\n1\n");
    let report = run_ok(&["--command", "game", "--input", path(&input), "--x0", "0,0", "--format", "report"]);
    assert_eq!(value(&report, "verdict"), "converged");
    assert_eq!(value(&report, "iterations"), "0");
}

#[test]
fn game_diagonal_coupling_oscillates() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "c.txt", "2\n1 0\n0 2\n");
    let report = run_ok(&["--command", "game", "--input", path(&input), "--format", "report"]);
    assert_eq!(value(&report, "verdict"), "oscillating");
    let spectrum = value(&report, "spectrum_i_minus_f");
    assert_eq!(spectrum.split(' ').count(), 4);
    assert!(spectrum.contains("+2.0000000000000000e0j"));
}

#[test]
fn parse_error_exits_with_2_and_position() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "bad.txt", "2\n1 x\n0 1\n");
    let out = fixpoint(&["--command", "classify", "--input", path(&input)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2, column 3"));
}

#[test]
fn missing_input_exits_with_2() {
    let out = fixpoint(&["--command", "classify", "--input", "/nonexistent/matrix.txt"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn zero_coupling_is_a_model_error() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "c.txt", "1\n0\n");
    let out = fixpoint(&["--command", "game", "--input", path(&input)]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn wrong_x0_length_is_a_parameter_error() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "a.txt", I_MINUS_L);
    let out = fixpoint(&["--command", "iterate", "--input", path(&input), "--x0", "1,2"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn non_finite_entry_is_rejected_by_the_parser() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "a.txt", "1\ninf\n");
    let out = fixpoint(&["--command", "classify", "--input", path(&input)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "a.txt", I_MINUS_L);
    let graph = write(&dir, "g.txt", LAPLACIAN_GRAPH);
    let args: [&[&str]; 3] = [
        &["--command", "classify", "--input", path(&input)],
        &["--command", "iterate", "--input", path(&input), "--state", "--max-iter", "500"],
        &["--command", "consensus", "--input", path(&graph), "--c", "2"],
    ];
    for a in args {
        assert_eq!(run_ok(a), run_ok(a));
    }
}
