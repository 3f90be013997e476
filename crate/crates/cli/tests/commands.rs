use std::path::{Path, PathBuf};
use std::process::Command as Process;

use clap::Parser;
use coherence_cli::report::{Verdict, VerdictReport, Witness};
use coherence_cli::{run, run_with, Cli};
use coherence_core::rational::{int, ratio};
use coherence_core::{parse_rational, ArbitrageKind, ArbitrageVerdict, Market};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn invoke(args: &[&str]) -> (i32, Option<VerdictReport>, String) {
    let mut argv = vec!["coherence", "--no-timing"];
    argv.extend_from_slice(args);
    let out = run(&Cli::try_parse_from(argv).unwrap());
    let report = (!out.stdout.is_empty()).then(|| serde_json::from_str(&out.stdout).unwrap());
    (out.code, report, out.stderr)
}

fn path(name: &str) -> String {
    fixture(name).display().to_string()
}

#[test]
fn check_scheme_verdicts() {
    let (code, report, _) = invoke(&["check-scheme", &path("crossing_pair.csv")]);
    let report = report.unwrap();
    assert_eq!(code, 0);
    assert_eq!(report.verdict, Verdict::Uncertainty);
    match report.witness {
        Some(Witness::Uncertainty(w)) => assert_eq!((w.state_a, w.state_b), (1, 0)),
        other => panic!("{other:?}"),
    }

    let (code, report, _) = invoke(&["check-scheme", &path("chain.csv")]);
    assert_eq!(code, 0);
    assert_eq!(report.unwrap().verdict, Verdict::NoUncertainty);
}

#[test]
fn parse_errors_exit_2_with_position() {
    let (code, report, stderr) = invoke(&["check-scheme", &path("ragged.csv")]);
    assert_eq!(code, 2);
    assert!(report.is_none());
    assert!(stderr.contains("line 2"), "{stderr}");

    let (code, _, _) = invoke(&["check-scheme", &path("no_such_file.csv")]);
    assert_eq!(code, 2);
}

#[test]
fn check_market_verdicts() {
    let (code, report, _) = invoke(&["check-market", &path("dominated_asset.json")]);
    assert_eq!(code, 0);
    let report = report.unwrap();
    assert_eq!(report.verdict, Verdict::Arbitrage);
    match report.witness {
        Some(Witness::Portfolio {
            branch,
            holdings,
            cost,
            cash_flows,
        }) => {
            assert_eq!(branch, ArbitrageKind::StrongBranch1);
            assert_eq!(holdings, vec![int(-1), int(1)]);
            assert_eq!(cost, int(0));
            assert_eq!(cash_flows, vec![int(1), int(0)]);
        }
        other => panic!("{other:?}"),
    }

    let (_, report, _) = invoke(&["check-market", &path("binomial.json")]);
    match report.unwrap().witness {
        Some(Witness::StatePrices {
            strict: true,
            state_prices,
        }) => assert_eq!(state_prices, vec![ratio(1, 3), ratio(2, 3)]),
        other => panic!("{other:?}"),
    }

    let (code, _, stderr) = invoke(&["check-market", &path("bad_riskless.json")]);
    assert_eq!(code, 3);
    assert!(stderr.contains("riskless"), "{stderr}");
}

#[test]
fn weak_flag_and_no_discount() {
    let (_, report, _) = invoke(&["check-market", "--weak", &path("dominated_asset.json")]);
    let report = report.unwrap();
    assert_eq!(report.verdict, Verdict::NoWeakArbitrage);
    match report.witness {
        Some(Witness::StatePrices {
            strict: false,
            state_prices,
        }) => assert_eq!(state_prices, vec![int(0), int(1)]),
        other => panic!("{other:?}"),
    }

    let (_, report, _) = invoke(&["check-market", "--weak", &path("twin_assets.json")]);
    let report = report.unwrap();
    assert_eq!(report.verdict, Verdict::WeakArbitrage);
    match report.witness {
        Some(Witness::Portfolio { cost, .. }) => assert!(cost < int(0)),
        other => panic!("{other:?}"),
    }

    let (_, raw, _) = invoke(&["check-market", "--no-discount", &path("binomial.json")]);
    assert_eq!(raw.unwrap().verdict, Verdict::NoArbitrage);
}

#[test]
fn projections_command() {
    let (_, report, _) = invoke(&["projections", &path("crossing_pair.csv")]);
    let report = report.unwrap();
    assert_eq!(report.verdict, Verdict::Multiple);
    match report.witness {
        Some(Witness::Rankings { rankings, .. }) => {
            assert_eq!(rankings, vec![vec![0, 1], vec![1, 0]])
        }
        other => panic!("{other:?}"),
    }

    let (_, report, _) = invoke(&["projections", &path("chain.csv")]);
    let report = report.unwrap();
    assert_eq!(report.verdict, Verdict::Unique);
    match report.witness {
        Some(Witness::Rankings { rankings, crossing }) => {
            assert_eq!(rankings, vec![vec![0, 1]]);
            assert!(crossing.is_none());
        }
        other => panic!("{other:?}"),
    }

    let (code, report, _) = invoke(&["projections", &path("empty.csv")]);
    assert_eq!(code, 0);
    match report.unwrap().witness {
        Some(Witness::Rankings { rankings, .. }) => assert_eq!(rankings, vec![Vec::<usize>::new()]),
        other => panic!("{other:?}"),
    }
}

#[test]
fn corresponding_scheme_writes_profit_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("profits.csv");
    let (code, report, _) = invoke(&[
        "corresponding-scheme",
        &path("binomial.json"),
        "--portfolios",
        &path("unit_portfolios.csv"),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv, "state_0,state_1\n0,0\n1,-1/2\n");
    match report.unwrap().witness {
        Some(Witness::CorrespondingScheme { profits, .. }) => {
            assert_eq!(
                profits,
                vec![vec![int(0), int(0)], vec![int(1), ratio(-1, 2)]]
            )
        }
        other => panic!("{other:?}"),
    }

    let (_, report, _) = invoke(&["corresponding-scheme", &path("binomial.json")]);
    match report.unwrap().witness {
        Some(Witness::CorrespondingScheme {
            profit_matrix,
            profits,
            ..
        }) => {
            assert_eq!(profit_matrix[1], vec![int(1), ratio(-1, 2)]);
            assert!(profits.is_empty());
        }
        other => panic!("{other:?}"),
    }

    let (code, _, _) = invoke(&[
        "corresponding-scheme",
        &path("binomial.json"),
        "--portfolios",
        &path("wrong_length.csv"),
    ]);
    assert_eq!(code, 2);
}

#[test]
fn verify_is_consistent_and_catches_faults() {
    let (code, report, _) = invoke(&[
        "verify",
        &path("dominated_asset.json"),
        "--samples",
        "300",
        "--seed",
        "3",
    ]);
    assert_eq!(code, 0);
    assert_eq!(report.unwrap().verdict, Verdict::Consistent);

    fn blind(_: &Market) -> ArbitrageVerdict {
        ArbitrageVerdict {
            kind: ArbitrageKind::None,
            witness: None,
            state_prices: None,
            nonnegative_state_prices: None,
        }
    }
    let cli = Cli::try_parse_from([
        "coherence",
        "verify",
        &path("dominated_asset.json"),
        "--samples",
        "100",
    ])
    .unwrap();
    let out = run_with(&cli, blind);
    assert_eq!(out.code, 4);
    assert!(out.stderr.contains("inconsistent"), "{}", out.stderr);
    let report: VerdictReport = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(report.verdict, Verdict::Inconsistent);
}

#[test]
fn reports_round_trip_and_rationals_reparse() {
    for args in [
        vec!["check-market", "binomial.json"],
        vec!["check-market", "dominated_asset.json"],
        vec!["check-scheme", "crossing_pair.csv"],
        vec!["projections", "crossing_pair.csv"],
        vec!["verify", "binomial.json", "--samples", "50"],
    ] {
        let full = path(args[1]);
        let mut argv = vec![args[0], full.as_str()];
        argv.extend_from_slice(&args[2..]);
        let (_, report, _) = invoke(&argv);
        let report = report.unwrap();
        let text = serde_json::to_string(&report).unwrap();
        let back: VerdictReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, report);

        // no JSON floats anywhere
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_no_floats(&value);
    }
    assert_eq!(parse_rational("-1/2").unwrap(), ratio(-1, 2));
}

fn assert_no_floats(v: &serde_json::Value) {
    match v {
        serde_json::Value::Number(n) => assert!(n.is_u64() || n.is_i64(), "float {n}"),
        serde_json::Value::Array(items) => items.iter().for_each(assert_no_floats),
        serde_json::Value::Object(map) => map.values().for_each(assert_no_floats),
        _ => {}
    }
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_coherence");
    let status = |args: &[&str]| Process::new(bin).args(args).output().unwrap();

    let ok = status(&["check-scheme", &path("crossing_pair.csv")]);
    assert_eq!(ok.status.code(), Some(0));
    let report: VerdictReport = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(report.verdict, Verdict::Uncertainty);

    assert_eq!(
        status(&["check-scheme", &path("ragged.csv")]).status.code(),
        Some(2)
    );
    assert_eq!(
        status(&["check-market", &path("bad_riskless.json")])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(status(&["no-such-command"]).status.code(), Some(2));

    let pretty = status(&["--pretty", "check-market", &path("binomial.json")]);
    let text = String::from_utf8(pretty.stdout).unwrap();
    assert!(text.starts_with("asset | price"), "{text}");
}
