//! Command-line contract: verdict lines, witness formatting, exit codes,
//! JSON records, and the error paths.

use sfasat::cli::{run, EXIT_ERROR, EXIT_SAT, EXIT_UNSAT};

fn sfasat(args: &[&str]) -> (u8, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("sfasat").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn fixture(name: &str) -> String {
    format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn check_verdict_lines_are_exact() {
    let (code, out, err) = sfasat(&["check", &fixture("odd_pos.sfa"), "--witness"]);
    assert_eq!((code, out.as_str(), err.as_str()), (EXIT_SAT, "SAT\nwitness=[]\n", ""));

    let (code, out, _) = sfasat(&["check", &fixture("odd_pos_card2.sfa"), "--witness"]);
    assert_eq!((code, out.as_str()), (EXIT_SAT, "SAT\nwitness=[1,1]\n"));

    let (code, out, _) = sfasat(&["check", &fixture("odd_pos_card1.sfa"), "--witness"]);
    assert_eq!((code, out.as_str()), (EXIT_UNSAT, "UNSAT\n"));

    let (code, out, _) = sfasat(&["check", &fixture("bv_first.sfa"), "--witness"]);
    assert_eq!((code, out.as_str()), (EXIT_SAT, "SAT\nwitness=[6]\n"));

    // without the flag the verdict stands alone
    let (code, out, _) = sfasat(&["check", &fixture("blocked.sfa")]);
    assert_eq!((code, out.as_str()), (EXIT_UNSAT, "UNSAT\n"));
}

#[test]
fn json_records_carry_diagnostics() {
    let (code, out, _) = sfasat(&["check", &fixture("odd_pos_card2.sfa"), "--json"]);
    assert_eq!(code, EXIT_SAT);
    let v: serde_json::Value = serde_json::from_str(&out).expect("one JSON record");
    assert_eq!(v["status"], "sat");
    assert_eq!(v["method"], "decomp");
    assert_eq!(v["witness"], serde_json::json!([1, 1]));
    assert_eq!(v["diagnostics"]["letter_counts"], serde_json::json!([2]));
    assert_eq!(v["diagnostics"]["region_sizes"]["11"], 2);
    assert_eq!(v["diagnostics"]["region_sizes"]["00"], 0);

    let (code, out, _) = sfasat(&["check", &fixture("blocked.sfa"), "--json"]);
    assert_eq!(code, EXIT_UNSAT);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["status"], "unsat");
    assert_eq!(v["witness"], serde_json::Value::Null);
}

#[test]
fn methods_agree_and_brute_respects_bounds() {
    for name in ["odd_pos.sfa", "blocked.sfa", "bv_first.sfa"] {
        let f = fixture(name);
        let (decomp, d_out, _) = sfasat(&["check", &f]);
        let (prune, p_out, _) = sfasat(&["check", &f, "--method", "prune"]);
        assert_eq!((decomp, &d_out), (prune, &p_out), "methods disagree on {name}");
        let (brute, b_out, _) = sfasat(&["check", &f, "--method", "brute"]);
        if brute == EXIT_SAT {
            assert_eq!((decomp, &d_out), (brute, &b_out), "brute disagrees on {name}");
        }
    }

    let (code, out, _) = sfasat(&[
        "check",
        &fixture("odd_pos_card2.sfa"),
        "--method",
        "brute",
        "--witness",
        "--brute-dom",
        "0..3",
        "--brute-len",
        "2",
    ]);
    assert_eq!((code, out.as_str()), (EXIT_SAT, "SAT\nwitness=[1,1]\n"));

    // the word [1, 1] does not fit in one position
    let (code, out, _) = sfasat(&[
        "check",
        &fixture("odd_pos_card2.sfa"),
        "--method",
        "brute",
        "--brute-len",
        "1",
    ]);
    assert_eq!((code, out.as_str()), (EXIT_UNSAT, "UNSAT\n"));
}

#[test]
fn prune_rejections_exit_two() {
    let (code, out, err) =
        sfasat(&["check", &fixture("odd_pos_card2.sfa"), "--method", "prune"]);
    assert_eq!(code, EXIT_ERROR);
    assert!(out.is_empty());
    assert!(err.contains("cardinality"), "stderr: {err}");

    let (code, _, err) =
        sfasat(&["check", &fixture("odd_pos.sfa"), "--method", "prune", "--witness"]);
    assert_eq!(code, EXIT_ERROR);
    assert!(err.contains("witness"), "stderr: {err}");
}

#[test]
fn file_errors_exit_two_with_line_numbers() {
    let dir = tempdir();
    let bad = dir.join("bad.sfa");
    std::fs::write(&bad, "algebra lia\nstates q0\ninitial q0\ntrans q0 q9 true\n").unwrap();
    let (code, out, err) = sfasat(&["check", bad.to_str().unwrap()]);
    assert_eq!(code, EXIT_ERROR);
    assert!(out.is_empty());
    assert!(err.contains("line 4"), "stderr: {err}");
    assert!(err.contains("q9"), "stderr: {err}");

    let (code, _, err) = sfasat(&["check", "/nonexistent.sfa"]);
    assert_eq!(code, EXIT_ERROR);
    assert!(err.starts_with("error: "), "stderr: {err}");
    std::fs::remove_dir_all(dir).ok();
}

fn tempdir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("sfasat-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn qfbapa_subcommand_matches_contract() {
    let (code, out, _) = sfasat(&["qfbapa", "|A|=3 & A sub B & |B|=2"]);
    assert_eq!((code, out.as_str()), (EXIT_UNSAT, "UNSAT\n"));

    let (code, out, _) = sfasat(&["qfbapa", "|A| = 2 && |B| = 2 && |A + B| = 3"]);
    assert_eq!(code, EXIT_SAT);
    assert_eq!(out.lines().next(), Some("SAT"));
    assert!(out.contains("|U| = 3"), "stdout: {out}");
}

#[test]
fn parikh_subcommand_prints_the_image_formula() {
    let (code, out, _) = sfasat(&["parikh", &fixture("odd_pos.sfa")]);
    assert_eq!(code, EXIT_SAT);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "gen S1 = x % 2 == 1");
    assert_eq!(lines[1], "gen S2 = x > 0");
    assert_eq!(lines[2], "letter k1 = S1 & S2");
    assert!(lines[3].starts_with("rho = exists "), "line: {}", lines[3]);
    assert!(lines[3].contains("k1"), "line: {}", lines[3]);
}

#[test]
fn selftest_reports_every_suite() {
    let (code, out, err) = sfasat(&["selftest"]);
    assert_eq!(code, EXIT_SAT);
    assert!(err.is_empty());
    for suite in
        ["reachability agreement", "cardinality agreement", "qfbapa enumeration", "parikh membership"]
    {
        assert!(out.contains(&format!("{suite}: ")), "missing {suite}: {out}");
    }
    assert_eq!(out.lines().last(), Some("OK"));
}
