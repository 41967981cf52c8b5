use std::io::Write;
use std::process::{Command, Output, Stdio};

use colsubset_cli::{emit_matrix, parse_matrix, Format};
use colsubset_core::DenseMatrix;
use proptest::prelude::*;

fn colsubset(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_colsubset"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary starts");
    child
        .stdin
        .take()
        .unwrap()
        .write_all(stdin.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn planted_pipeline_answers_yes() {
    let inst = colsubset(
        &["x3c", "gen-true", "--m", "2", "--extra", "1", "--seed", "7"],
        "",
    );
    assert_eq!(inst.status.code(), Some(0));
    let matrix = colsubset(&["x3c", "reduce"], &stdout(&inst));
    assert_eq!(matrix.status.code(), Some(0));
    let answer = colsubset(
        &["decide", "--criterion", "rvol", "--k", "2", "--b", "1"],
        &stdout(&matrix),
    );
    assert_eq!(answer.status.code(), Some(0), "{}", stdout(&answer));
    assert!(stdout(&answer).starts_with("answer=yes "));
}

#[test]
fn certified_false_pipeline_answers_no() {
    let inst = colsubset(
        &["x3c", "gen-false", "--m", "3", "--n", "6", "--seed", "1"],
        "",
    );
    assert_eq!(inst.status.code(), Some(0));
    assert_eq!(
        colsubset(&["x3c", "solve"], &stdout(&inst)).status.code(),
        Some(1)
    );
    let matrix = colsubset(&["x3c", "reduce"], &stdout(&inst));
    let answer = colsubset(
        &["decide", "--criterion", "volume", "--k", "3", "--b", "1"],
        &stdout(&matrix),
    );
    assert_eq!(answer.status.code(), Some(1));
    assert!(stdout(&answer).starts_with("answer=no "));
    let verify = colsubset(&["x3c", "verify"], &stdout(&inst));
    assert_eq!(verify.status.code(), Some(0), "{}", stdout(&verify));
}

#[test]
fn gadget_value_and_matrix() {
    let o = colsubset(&["gadget", "--shared", "1", "--eval", "rvol"], "");
    assert_eq!(stdout(&o), "0.7071067811865476\n");
    let o = colsubset(&["gadget", "--shared", "2"], "");
    assert_eq!(stdout(&o).lines().count(), 4);
    let o = colsubset(&["gadget", "--shared", "3"], "");
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn identity_volume() {
    let o = colsubset(&["eval", "--criterion", "volume"], "1,0,0\n0,1,0\n0,0,1\n");
    assert_eq!(stdout(&o), "1.0\n");
}

#[test]
fn usage_and_input_errors_exit_two() {
    let o = colsubset(&["eval", "--criterion", "nonsense"], "1\n");
    assert_eq!(o.status.code(), Some(2));
    let o = colsubset(&["eval", "--criterion", "volume"], "1,2\n3\n");
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
    let o = colsubset(
        &[
            "eval",
            "--criterion",
            "volume",
            "--input",
            "/nonexistent/a.csv",
        ],
        "",
    );
    assert_eq!(o.status.code(), Some(2));
    let o = colsubset(&["select"], "1\n");
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let args = [
        "select",
        "--method",
        "local-swap",
        "--k",
        "3",
        "--seed",
        "11",
    ];
    let a = "1,0,0,1,2\n0,1,0,1,0\n0,0,1,0,1\n1,1,1,1,1\n";
    let first = colsubset(&args, a);
    let second = colsubset(&args, a);
    assert_eq!(first.stdout, second.stdout);
    let lemmas = ["lemmas", "--trials", "5", "--seed", "3"];
    assert_eq!(colsubset(&lemmas, "").stdout, colsubset(&lemmas, "").stdout);
    let gen = ["x3c", "gen-false", "--m", "4", "--n", "9", "--seed", "5"];
    assert_eq!(colsubset(&gen, "").stdout, colsubset(&gen, "").stdout);
}

#[test]
fn thread_count_does_not_change_the_selection() {
    let inst = colsubset(
        &["x3c", "gen-false", "--m", "4", "--n", "12", "--seed", "2"],
        "",
    );
    let matrix = stdout(&colsubset(&["x3c", "reduce"], &stdout(&inst)));
    for criterion in ["volume", "cond-two", "srank"] {
        let base = colsubset(
            &[
                "select",
                "--k",
                "4",
                "--criterion",
                criterion,
                "--threads",
                "1",
            ],
            &matrix,
        );
        for threads in ["2", "3", "8"] {
            let other = colsubset(
                &[
                    "select",
                    "--k",
                    "4",
                    "--criterion",
                    criterion,
                    "--threads",
                    threads,
                ],
                &matrix,
            );
            assert_eq!(
                base.stdout, other.stdout,
                "{criterion} with {threads} threads"
            );
        }
    }
    let gap = colsubset(&["gap", "--threads", "4"], &stdout(&inst));
    assert_eq!(gap.stdout, colsubset(&["gap"], &stdout(&inst)).stdout);
    assert_eq!(gap.status.code(), Some(0), "{}", stdout(&gap));
}

#[test]
fn reduction_export_reparses_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    let inst_path = dir.path().join("inst.txt");
    let csv_path = dir.path().join("a.csv");
    let json_path = dir.path().join("a.json");
    let inst_arg = inst_path.to_str().unwrap();
    colsubset(
        &[
            "x3c", "gen-true", "--m", "3", "--extra", "4", "--seed", "9", "--output", inst_arg,
        ],
        "",
    );
    colsubset(
        &[
            "x3c",
            "reduce",
            "--input",
            inst_arg,
            "--output",
            csv_path.to_str().unwrap(),
        ],
        "",
    );
    colsubset(
        &[
            "x3c",
            "reduce",
            "--input",
            inst_arg,
            "--format",
            "json",
            "--output",
            json_path.to_str().unwrap(),
        ],
        "",
    );
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let json = std::fs::read_to_string(&json_path).unwrap();
    let a = parse_matrix(&csv, Format::Csv).unwrap();
    let b = parse_matrix(&json, Format::Json).unwrap();
    assert_eq!(a.rows(), 9);
    assert_eq!(a.cols(), 7);
    let bits = |m: &DenseMatrix| m.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a), bits(&b));
    assert!(a
        .data()
        .iter()
        .all(|&v| v == 0.0 || v == colsubset_core::x3c::INV_SQRT3));
    assert_eq!(emit_matrix(&a, Format::Csv), csv);

    // Both formats are accepted as input without a flag.
    let from_csv = colsubset(
        &[
            "eval",
            "--criterion",
            "norm:p=inf",
            "--input",
            csv_path.to_str().unwrap(),
        ],
        "",
    );
    let from_json = colsubset(
        &[
            "eval",
            "--criterion",
            "norm:p=inf",
            "--input",
            json_path.to_str().unwrap(),
        ],
        "",
    );
    assert_eq!(from_csv.stdout, from_json.stdout);
}

#[test]
fn json_reports_parse() {
    let o = colsubset(
        &[
            "select",
            "--method",
            "greedy-frobenius",
            "--k",
            "2",
            "--format",
            "json",
        ],
        "3,1,2\n0,0,0\n",
    );
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["subset"], serde_json::json!([1, 2]));
    assert_eq!(v["value"].as_f64().unwrap(), 5f64.sqrt());
    assert_eq!(v["criterion"], "norm:p=2");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matrices_round_trip_exactly(
        rows in 1usize..5,
        cols in 1usize..5,
        seed in proptest::collection::vec(any::<f64>(), 16),
    ) {
        let data: Vec<f64> = seed
            .iter()
            .cycle()
            .take(rows * cols)
            .map(|v| if v.is_finite() { *v } else { 0.0 })
            .collect();
        let m = DenseMatrix::new(rows, cols, data).unwrap();
        for format in [Format::Csv, Format::Json] {
            let back = parse_matrix(&emit_matrix(&m, format), format).unwrap();
            let same = back
                .data()
                .iter()
                .zip(m.data())
                .all(|(a, b)| a.to_bits() == b.to_bits());
            prop_assert!(same);
        }
    }
}
