use qsynth::circuit::parse_json;
use qsynth::cli::{run, EXIT_INPUT, EXIT_OK, EXIT_VERIFY};
use qsynth::io::{format_matrix, format_state};
use qsynth::numerics::{identity, ComplexMatrix};
use qsynth::random::{gaussian_matrix, random_rank_matrix, random_state, rng};
use std::path::PathBuf;

struct Run {
    code: u8,
    out: String,
    err: String,
}

fn qsynth(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("qsynth").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Run { code, out: String::from_utf8(out).unwrap(), err: String::from_utf8(err).unwrap() }
}

fn scratch(name: &str, text: &str) -> PathBuf {
    let p = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(format!("cli-{name}"));
    std::fs::write(&p, text).unwrap();
    p
}

fn field(text: &str, key: &str) -> Option<String> {
    text.split_whitespace()
        .find_map(|t| t.strip_prefix(key).and_then(|v| v.strip_prefix('=')))
        .map(str::to_string)
}

#[test]
fn state_file_verify() {
    let psi = random_state(&mut rng(3), 3);
    let p = scratch("state3.txt", &format_state(&psi));
    let r = qsynth(&["state", "--input", p.to_str().unwrap(), "--verify"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    assert_eq!(field(&r.err, "cnots").as_deref(), Some("3"));
    assert_eq!(field(&r.err, "expected").as_deref(), Some("3"));
    let fid: f64 = field(&r.err, "fidelity").unwrap().parse().unwrap();
    assert!(fid >= 1.0 - 1e-9);
    assert!(r.out.starts_with("OPENQASM"));
}

#[test]
fn malformed_state_reports_line() {
    let p = scratch("bad.txt", "2\n1 0\n0 0\n0 oops\n0 0\n");
    let r = qsynth(&["state", "--input", p.to_str().unwrap()]);
    assert_eq!(r.code, EXIT_INPUT);
    assert!(r.err.contains("line 4"), "{}", r.err);
}

#[test]
fn missing_file_is_input_error() {
    let r = qsynth(&["state", "--input", "/nonexistent/qsynth-state.txt"]);
    assert_eq!(r.code, EXIT_INPUT);
}

#[test]
fn random_ten_qubit_state() {
    let r = qsynth(&["state", "--random", "10", "--seed", "7", "--emit", "counts"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    assert_eq!(field(&r.out, "cnots").as_deref(), Some("867"));
}

#[test]
fn encode_full_rank_file() {
    let a = gaussian_matrix(&mut rng(5), 4, 4);
    let p = scratch("full4.txt", &format_matrix(&a));
    let r = qsynth(&["encode", "--input", p.to_str().unwrap(), "--verify", "--emit", "counts"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    assert_eq!(field(&r.err, "cnots").as_deref(), Some("9"));
    assert_eq!(field(&r.err, "path").as_deref(), Some("full"));
    let e: f64 = field(&r.err, "block_error").unwrap().parse().unwrap();
    assert!(e <= 1e-8);
}

#[test]
fn encode_rank_one_takes_low_rank_path() {
    let a = random_rank_matrix(&mut rng(6), 16, 1);
    let p = scratch("rank1.txt", &format_matrix(&a));
    let r = qsynth(&["encode", "--input", p.to_str().unwrap(), "--verify", "--emit", "counts"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    assert_eq!(field(&r.err, "path").as_deref(), Some("low-rank"));
    let c: u64 = field(&r.err, "cnots").unwrap().parse().unwrap();
    assert!(c < 205);
}

#[test]
fn encode_zero_matrix_rejected() {
    let p = scratch("zero.txt", &format_matrix(&ComplexMatrix::zeros(4, 4)));
    let r = qsynth(&["encode", "--input", p.to_str().unwrap()]);
    assert_eq!(r.code, EXIT_INPUT);
    assert!(r.err.contains("zero matrix"), "{}", r.err);
}

#[test]
fn unitary_counts() {
    let r = qsynth(&["unitary", "--random", "3", "--verify", "--emit", "counts"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    assert_eq!(field(&r.out, "cnots").as_deref(), Some("19"));
    let r = qsynth(&["unitary", "--random", "4", "--emit", "counts"]);
    assert_eq!(field(&r.out, "cnots").as_deref(), Some("95"));

    let p = scratch("id4.txt", &format_matrix(&identity(4)));
    let r = qsynth(&["unitary", "--input", p.to_str().unwrap(), "--verify", "--emit", "counts"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    assert_eq!(field(&r.out, "cnots").as_deref(), Some("3"));
    let res: f64 = field(&r.err, "residual").unwrap().parse().unwrap();
    assert!(res <= 1e-10);
}

#[test]
fn non_unitary_rejected() {
    let p = scratch("notu.txt", "2 2\n1 0 1 0\n0 0 1 0\n");
    let r = qsynth(&["unitary", "--input", p.to_str().unwrap()]);
    assert_eq!(r.code, EXIT_INPUT);
}

#[test]
fn impossible_tolerance_fails_verification() {
    let r = qsynth(&["unitary", "--random", "3", "--verify", "--tol", "1e-300"]);
    assert_eq!(r.code, EXIT_VERIFY, "{}", r.err);
}

#[test]
fn emitters_are_deterministic() {
    for emit in ["qasm", "json"] {
        let a = qsynth(&["encode", "--random", "4", "--seed", "11", "--emit", emit]);
        let b = qsynth(&["encode", "--random", "4", "--seed", "11", "--emit", emit]);
        assert_eq!(a.code, EXIT_OK);
        assert_eq!(a.out, b.out);
    }
    let j = qsynth(&["state", "--random", "4", "--seed", "2", "--emit", "json"]);
    let c = parse_json(&j.out).unwrap();
    assert_eq!(c.cnot_count(), 7);
}

#[test]
fn output_file_written() {
    let p = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli-out.qasm");
    let r = qsynth(&["state", "--random", "3", "--output", p.to_str().unwrap()]);
    assert_eq!(r.code, EXIT_OK);
    assert!(r.out.is_empty());
    assert!(std::fs::read_to_string(&p).unwrap().starts_with("OPENQASM"));
}

#[test]
fn tables_and_bounds() {
    let r = qsynth(&["tables", "--seed", "3"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    assert!(r.out.contains("29627"));
    assert!(r.out.contains("3629"));
    let r = qsynth(&["bounds", "--max-n", "7"]);
    assert_eq!(r.code, EXIT_OK);
    assert!(r.out.contains("2043"));
    assert_eq!(qsynth(&["bounds", "--max-n", "1"]).code, EXIT_INPUT);
}
