use std::io::Write;
use std::process::Command;

use ballmodal::cli::{run_with, EXIT_NEGATIVE, EXIT_OK, EXIT_RESOURCE, EXIT_USAGE};

fn run(args: &[&str]) -> (u8, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("ballmodal").chain(args.iter().copied());
    let code = run_with(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn temp_file(contents: &str) -> tempfile::NamedTempFile {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    file.write_all(contents.as_bytes()).unwrap();
    file
}

const NON_NORMAL: &str = r#"{
  "worlds": ["w", "u"],
  "lattices": {"w": "B", "u": "A"},
  "edges": [["w", "u"]],
  "valuation": {"w": {"p": "1"}, "u": {"p": "e1"}}
}"#;

#[test]
fn eval_reports_value_and_designation() {
    let model = temp_file(NON_NORMAL);
    let path = model.path().to_str().unwrap();
    let (code, out, _) = run(&["eval", "--model", path, "--world", "w", "--formula", "[]p"]);
    assert_eq!((code, out.as_str()), (EXIT_OK, "0, not designated\n"));
    let (code, out, _) = run(&["eval", "--model", path, "--world", "u", "--formula", "T"]);
    assert_eq!((code, out.as_str()), (EXIT_OK, "1, designated\n"));
    let (code, _, err) = run(&["eval", "--model", path, "--world", "x", "--formula", "T"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("unknown world"));
}

#[test]
fn parse_errors_carry_the_offset() {
    let (code, _, err) = run(&["taut4", "--formula", "p & ("]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("offset 5"), "{err}");
}

#[test]
fn bad_model_is_a_usage_error() {
    let model = temp_file(
        r#"{"worlds": ["w"], "lattices": {"w": "A"}, "edges": [], "valuation": {"w": {"p": "e2"}}}"#,
    );
    let (code, _, err) = run(&[
        "eval",
        "--model",
        model.path().to_str().unwrap(),
        "--world",
        "w",
        "--formula",
        "p",
    ]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("outside lattice A"), "{err}");
}

#[test]
fn four_valued_commands() {
    assert_eq!(
        run(&["cons4", "--premises", "p", "--goal", "@p"]),
        (
            EXIT_NEGATIVE,
            "not a consequence; witness p=a\n".into(),
            String::new()
        )
    );
    assert_eq!(
        run(&["cons4", "--premises", "@p", "@q", "--goal", "@(p & q)"]).0,
        EXIT_OK
    );
    assert_eq!(run(&["taut4", "--formula", "@@p"]).1, "tautology\n");
    let (code, _, err) = run(&["taut4", "--formula", "[]p"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("[]p"));
}

#[test]
fn validity_on_fixtures() {
    let (code, out, _) = run(&[
        "valid",
        "--frame",
        "fixture:euc3",
        "--formula",
        "<>@p -> []<>@p",
        "--all-ultrafilters",
    ]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.lines().count(), 3);
    let (code, out, _) = run(&[
        "valid",
        "--frame",
        "fixture:euc3",
        "--formula",
        "<>p -> []<>p",
    ]);
    assert_eq!(code, EXIT_NEGATIVE);
    assert!(out.starts_with("invalid under e1"));
    // The dump after the first line is a loadable model document.
    let dump: String = out.lines().skip(1).collect::<Vec<_>>().join("\n");
    let doc: ballmodal::kripke::ModelDocument = serde_json::from_str(&dump).unwrap();
    assert!(doc.to_model().is_ok());
    assert_eq!(
        run(&["valid", "--frame", "fixture:nope", "--formula", "p"]).0,
        EXIT_USAGE
    );
}

#[test]
fn correspondence_summary_and_csv() {
    let args = [
        "correspond",
        "--property",
        "reflexive",
        "--formula",
        "[]p -> p",
        "--max-worlds",
        "3",
        "--all-ultrafilters",
    ];
    let (code, out, _) = run(&args);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, "13824+144+6 frames × 3 ultrafilters, 0 mismatches\n");
    let (code, out, _) = run(&[
        "correspond",
        "--property",
        "euclidean",
        "--formula",
        "<>p -> []<>p",
        "--max-worlds",
        "2",
        "--format",
        "csv",
    ]);
    assert_eq!(code, EXIT_NEGATIVE);
    let mut lines = out.lines();
    assert_eq!(
        lines.next(),
        Some("frame_encoding,property_holds,formula_valid,witness")
    );
    assert!(lines.all(|l| l.contains(",true,false,")));
}

#[test]
fn resource_caps_have_their_own_status() {
    let (code, _, err) = run(&[
        "correspond",
        "--property",
        "reflexive",
        "--formula",
        "[]p -> p",
        "--max-frames",
        "10",
    ]);
    assert_eq!(code, EXIT_RESOURCE);
    assert!(err.contains("resource bound"));
    assert_eq!(
        run(&[
            "correspond",
            "--property",
            "reflexive",
            "--formula",
            "p",
            "--max-frames",
            "0"
        ])
        .0,
        EXIT_USAGE
    );
}

#[test]
fn search_and_enumerate() {
    let (code, out, _) = run(&[
        "search",
        "--premises",
        "p",
        "--goal",
        "[]p",
        "--max-worlds",
        "2",
    ]);
    assert_eq!(code, EXIT_NEGATIVE);
    assert!(out.starts_with("countermodel found"));
    let (code, out, _) = run(&["search", "--goal", "@@p", "--max-worlds", "2"]);
    assert_eq!(
        (code, out.as_str()),
        (
            EXIT_OK,
            "no countermodel up to 2 worlds (150 frames checked)\n"
        )
    );
    assert_eq!(run(&["enumerate", "--worlds", "2"]).1.lines().count(), 144);
    assert_eq!(
        run(&["enumerate", "--worlds", "2", "--up-to-iso"])
            .1
            .lines()
            .count(),
        78
    );
}

#[test]
fn indiscernibility_battery() {
    let (code, out, _) = run(&["indiscern", "--corpus-depth", "2"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(
        out,
        "soob_F and soob_Fprime agree on all 25 corpus formulas\n"
    );
}

#[test]
fn checkproof_accepts_and_rejects() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/corpus/");
    let (code, out, _) = run(&[
        "checkproof",
        &format!("{dir}necessitation.json"),
        "--crosscheck",
        "2",
    ]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(
        out,
        "accepted: |- [](p | ~p)\nno countermodel up to 2 worlds\n"
    );

    let bad = temp_file(
        r#"{"steps": [
            {"premises": ["p"], "conclusion": "p", "rule": "Premise"},
            {"premises": ["p"], "conclusion": "@p", "rule": "br", "cites": [1]}
        ]}"#,
    );
    let (code, out, _) = run(&["checkproof", bad.path().to_str().unwrap()]);
    assert_eq!(code, EXIT_NEGATIVE);
    assert!(out.starts_with("rejected: step 2 (BR)"), "{out}");

    let malformed =
        temp_file(r#"{"steps": [{"conclusion": "p", "rule": "Premise", "cites": [7]}]}"#);
    assert_eq!(
        run(&["checkproof", malformed.path().to_str().unwrap()]).0,
        EXIT_USAGE
    );
}

#[test]
fn outputs_are_deterministic() {
    let args = [
        "correspond",
        "--property",
        "transitive",
        "--formula",
        "[]p -> [][]p",
        "--max-worlds",
        "2",
        "--format",
        "json",
    ];
    assert_eq!(run(&args), run(&args));
}

#[test]
fn binary_honours_thread_count() {
    let output = Command::new(env!("CARGO_BIN_EXE_ballmodal"))
        .args([
            "correspond",
            "--property",
            "reflexive",
            "--formula",
            "[]p -> p",
            "--max-worlds",
            "2",
        ])
        .env("BALLMODAL_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    assert_eq!(
        String::from_utf8(output.stdout).unwrap(),
        "144+6 frames × 1 ultrafilter, 0 mismatches\n"
    );
}
