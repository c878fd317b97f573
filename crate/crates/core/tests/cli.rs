use std::process::Command;

use private_caching::cli::{run, EXIT_FAILURE, EXIT_OK, EXIT_USAGE};
use private_caching::library::FileLibrary;
use private_caching::params::SchemeParams;
use private_caching::tradeoff::{parse_rational, rational, to_f64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn dpcache(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(
        std::iter::once("dpcache").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

#[test]
fn params_report_exact_rates() {
    let (code, out, _) = dpcache(&["params", "--n", "2", "--k", "3", "--r", "2"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("M=2/3\n") && out.contains("R=1\n"), "{out}");
    assert!(out.contains("K'=4"));

    let (_, out, _) = dpcache(&["params", "--n", "3", "--k", "2", "--r", "0"]);
    assert!(out.contains("M=3\n") && out.contains("R=0\n"), "{out}");

    let (_, out, _) = dpcache(&[
        "params", "--n", "2", "--k", "3", "--r", "3", "--format", "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["M"], "1/4");
    assert_eq!(v["R"], "3/2");
}

#[test]
fn params_usage_errors() {
    assert_eq!(dpcache(&["params", "--n", "1"]).0, EXIT_USAGE);
    assert_eq!(
        dpcache(&["params", "--n", "2", "--k", "3", "--r", "9"]).0,
        EXIT_USAGE
    );
    // F must be a multiple of C(4, 2) = 6
    assert_eq!(
        dpcache(&["params", "--n", "2", "--k", "3", "--r", "2", "--f", "10"]).0,
        EXIT_USAGE
    );
    assert_eq!(dpcache(&["bogus"]).0, EXIT_USAGE);
    assert_eq!(dpcache(&["--help"]).0, EXIT_OK);
}

#[test]
fn simulate_decodes_every_user() {
    let (code, out, _) = dpcache(&[
        "simulate",
        "--n",
        "2",
        "--k",
        "3",
        "--r",
        "2",
        "--seed",
        "7",
        "--demands",
        "0,1,1",
    ]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.contains("decoded 3/3 users"), "{out}");
    // R = 1 with the default F = 48
    assert!(out.contains("payload_bits=48 (R*F=48)"), "{out}");
    assert!(out.contains("payload_bits=32 (M*F=32)"), "{out}");
}

#[test]
fn simulate_rejects_bad_demands() {
    assert_eq!(
        dpcache(&["simulate", "--n", "2", "--k", "3", "--demands", "0,1"]).0,
        EXIT_USAGE
    );
    assert_eq!(
        dpcache(&["simulate", "--n", "2", "--k", "3", "--demands", "0,1,2"]).0,
        EXIT_USAGE
    );
    assert_eq!(
        dpcache(&["simulate", "--n", "2", "--k", "3", "--demands", "a,b,c"]).0,
        EXIT_USAGE
    );
}

#[test]
fn simulate_is_deterministic() {
    let args = [
        "simulate", "--n", "3", "--k", "2", "--r", "2", "--seed", "99", "--format", "json",
    ];
    let (a, b) = (dpcache(&args), dpcache(&args));
    assert_eq!(a, b);
    let other = dpcache(&[
        "simulate", "--n", "3", "--k", "2", "--r", "2", "--seed", "100", "--format", "json",
    ]);
    let (va, vo): (serde_json::Value, serde_json::Value) = (
        serde_json::from_str(&a.1).unwrap(),
        serde_json::from_str(&other.1).unwrap(),
    );
    assert_eq!(va["decoded"], 2);
    assert_eq!(vo["decoded"], 2);
}

#[test]
fn simulate_with_library_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("files.bin");
    let p = SchemeParams::new(2, 2, 1, 6).unwrap();
    FileLibrary::random(p, &mut ChaCha8Rng::seed_from_u64(1))
        .save(&path)
        .unwrap();
    let lib = path.to_str().unwrap();
    let (code, out, err) = dpcache(&[
        "simulate",
        "--n",
        "2",
        "--k",
        "2",
        "--r",
        "1",
        "--f",
        "6",
        "--library",
        lib,
    ]);
    assert_eq!(code, EXIT_OK, "{out}{err}");
    assert!(out.contains("decoded 2/2 users"));
    // sidecar disagrees with the requested F
    let (code, _, _) = dpcache(&[
        "simulate",
        "--n",
        "2",
        "--k",
        "2",
        "--r",
        "1",
        "--f",
        "3",
        "--library",
        lib,
    ]);
    assert_eq!(code, EXIT_USAGE);
}

#[test]
fn verify_suites() {
    let (code, out, _) = dpcache(&["verify", "all", "--n", "2", "--k", "3", "--r", "2"]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert_eq!(out.matches(": PASS").count(), 7, "{out}");

    let (code, out, _) = dpcache(&[
        "verify",
        "--suite",
        "reconstruction",
        "--n",
        "2",
        "--k",
        "4",
        "--r",
        "2",
        "--format",
        "json",
    ]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v[0]["passed"], true);
    assert_eq!(v[0]["cases_run"], 8);

    assert_eq!(dpcache(&["verify", "--n", "2"]).0, EXIT_USAGE);
    assert_eq!(dpcache(&["verify", "nonsense"]).0, EXIT_USAGE);
}

#[test]
fn verify_full_marginal_small() {
    let (code, out, _) = dpcache(&[
        "verify",
        "privacy",
        "--mode",
        "full-marginal",
        "--n",
        "2",
        "--k",
        "2",
        "--r",
        "1",
    ]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.contains("FullMarginal"));
    // 3 * C(5, 2) = 30 library bits is beyond the enumeration limit
    let (code, _, err) = dpcache(&[
        "verify",
        "privacy",
        "--mode",
        "full-marginal",
        "--n",
        "3",
        "--k",
        "2",
        "--r",
        "2",
    ]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("limit"), "{err}");
}

#[test]
fn tradeoff_csv_k3_is_tight_everywhere() {
    let (code, out, _) = dpcache(&["tradeoff", "--k", "3", "--grid", "1/100"]);
    assert_eq!(code, EXIT_OK);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("M,R_ach,R_conv,tight"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 201);
    assert!(rows.iter().all(|r| r.ends_with(",true")));
    assert_eq!(rows[0], "0/1,2/1,2/1,true");
    assert_eq!(rows[200], "2/1,0/1,0/1,true");
}

#[test]
fn tradeoff_k4_gap() {
    let (_, out, _) = dpcache(&["tradeoff", "--k", "4", "--grid", "1/20"]);
    for row in out.lines().skip(1) {
        let cols: Vec<&str> = row.split(',').collect();
        let m = parse_rational(cols[0]).unwrap();
        let inside = m > rational(1, 2) && m < rational(6, 5);
        assert_eq!(cols[3] == "true", !inside, "{row}");
    }
}

#[test]
fn tradeoff_json_round_trips() {
    let (code, out, _) = dpcache(&["tradeoff", "--k", "5", "--grid", "1/7", "--format", "json"]);
    assert_eq!(code, EXIT_OK);
    let rows: Vec<serde_json::Value> = serde_json::from_str(&out).unwrap();
    assert_eq!(rows.len(), 15);
    for row in rows {
        for key in ["M", "R_ach", "R_conv"] {
            let exact = parse_rational(row[key].as_str().unwrap()).unwrap();
            let float = row[format!("{key}_float")].as_f64().unwrap();
            let ulps = (float.to_bits() as i64 - to_f64(&exact).to_bits() as i64).abs();
            assert!(ulps <= 1, "{key}: {float} vs {exact}");
        }
    }
}

#[test]
fn tradeoff_usage_errors() {
    assert_eq!(dpcache(&["tradeoff", "--k", "1"]).0, EXIT_USAGE);
    assert_eq!(dpcache(&["tradeoff", "--n", "3"]).0, EXIT_USAGE);
    assert_eq!(dpcache(&["tradeoff", "--grid", "0"]).0, EXIT_USAGE);
    assert_eq!(dpcache(&["tradeoff", "--grid", "x/y"]).0, EXIT_USAGE);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rows.csv");
    let (code, out, _) = dpcache(&[
        "tradeoff",
        "--k",
        "2",
        "--grid",
        "1/2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(out.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    assert!(written.starts_with("M,R_ach,R_conv,tight\n"));
    assert_eq!(written.lines().count(), 6);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_dpcache");
    let ok = Command::new(bin)
        .args(["params", "--n", "2", "--k", "2", "--r", "1"])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(EXIT_OK));
    let bad = Command::new(bin)
        .args(["simulate", "--demands", "7,7,7"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_USAGE));
    assert!(!bad.stderr.is_empty());
    assert_ne!(EXIT_FAILURE, EXIT_OK);
}
