use std::process::{Command, Output};

use bulkq_cli::report::{CommandResult, Envelope, ParityPayload};
use bulkq_core::models::{ModelOutput, Verdict};

fn bulkq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bulkq"))
        .args(args)
        .env_remove("BULKQ_DENSE_GUARD")
        .output()
        .expect("binary runs")
}

fn envelope(args: &[&str]) -> Envelope {
    let out = bulkq(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid report")
}

fn code(args: &[&str]) -> Option<i32> {
    bulkq(args).status.code()
}

#[test]
fn thermal_constant_oracle() {
    let env = envelope(&["dj", "--n", "3", "--model", "bqc", "--q", "0.75", "--oracle", "constant:0", "--format", "json"]);
    assert_eq!(env.schema, "bulkq.report.v1");
    let CommandResult::Dj(r) = env.result else { panic!("dj result") };
    assert_eq!(r.verdict, Verdict::Constant);
    let signals = &r.output.signals().unwrap().signals;
    assert!(signals.iter().all(|e| (e + 0.5).abs() < 1e-12), "{signals:?}");
}

#[test]
fn sampled_inner_product_reads_y() {
    for seed in ["7", "0", "123"] {
        let env = envelope(&["dj", "--n", "2", "--model", "sqc", "--oracle", "ip:11", "--seed", seed]);
        let CommandResult::Dj(r) = env.result else { panic!() };
        let ModelOutput::Sampled(s) = r.output else { panic!("sampled output") };
        assert_eq!(s.outcome, vec![1, 1]);
        assert_eq!(r.verdict, Verdict::Balanced);
    }
}

#[test]
fn malformed_table_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.txt");
    std::fs::write(&path, "# short\n0101\n").unwrap();
    let oracle = format!("file:{}", path.display());
    let out = bulkq(&["dj", "--n", "3", "--oracle", &oracle]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2, column 5"), "{err}");
}

#[test]
fn missing_table_file_is_a_domain_error() {
    assert_eq!(code(&["dj", "--n", "2", "--oracle", "file:/nonexistent/t.txt"]), Some(2));
}

#[test]
fn parity_one_query() {
    let env = envelope(&["parity", "--n", "8", "--y", "10110101", "--model", "bqcp"]);
    let CommandResult::Parity(r) = env.result else { panic!() };
    assert_eq!(r.recovered, "10110101");
    assert!(r.correct);
    assert_eq!(r.queries, 1);
}

#[test]
fn parity_half_ground_probability_fails() {
    let out = bulkq(&["parity", "--n", "4", "--y", "0101", "--model", "bqc", "--q", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    let env = envelope(&["parity", "--n", "4", "--y", "0101", "--model", "bqc", "--q", "0.5", "--allow-degenerate"]);
    let CommandResult::Parity(r) = env.result else { panic!() };
    let ParityPayload::Qubit(p) = r.outcome else { panic!() };
    assert_eq!(p.degenerate_sites, vec![0, 1, 2, 3]);
}

#[test]
fn noisy_parity_reports_repetitions() {
    let env = envelope(&[
        "parity", "--n", "4", "--y", "0101", "--model", "bqc", "--q", "0.9", "--sigma", "0.3",
        "--confidence", "0.977",
    ]);
    let CommandResult::Parity(r) = env.result else { panic!() };
    assert!(r.correct);
    let noise = r.noise.unwrap();
    // (z sigma n / (2q - 1))^2 = (1.9954 * 0.3 * 4 / 0.8)^2 = 8.96
    assert_eq!(noise.config.repetitions, 9);
    assert!(noise.estimated);
    assert!(noise.success_rate.unwrap() >= 0.95);
}

#[test]
fn qutrit_parity() {
    let env = envelope(&["parity", "--n", "2", "--local-dim", "3", "--y", "21", "--q", "0.6,0.3,0.1"]);
    let CommandResult::Parity(r) = env.result else { panic!() };
    assert_eq!(r.recovered, "21");
    assert_eq!(code(&["parity", "--n", "2", "--local-dim", "4", "--y", "21"]), Some(2));
}

#[test]
fn epsilon_modes() {
    let env = envelope(&["epsilon", "--n", "2", "--exhaustive"]);
    let CommandResult::Epsilon(r) = env.result else { panic!() };
    assert_eq!(r.report.epsilon, 2.0);
    assert_eq!(r.report.bound_2_over_n, 1.0);
    assert_eq!(r.report.tables_scanned, 6);

    let env = envelope(&["epsilon", "--n", "4", "--exhaustive"]);
    let CommandResult::Epsilon(r) = env.result else { panic!() };
    assert!(r.report.epsilon >= 0.5);
    assert_eq!(r.argmin.len(), 16);

    let env = envelope(&["epsilon", "--n", "8", "--samples", "5000", "--seed", "1"]);
    let CommandResult::Epsilon(r) = env.result else { panic!() };
    assert!(r.upper_bound_only);
    assert!(r.report.epsilon >= 0.25);

    assert_eq!(code(&["epsilon", "--n", "5", "--exhaustive"]), Some(2));
    assert_eq!(code(&["epsilon", "--n", "13", "--samples", "10"]), Some(2));
}

#[test]
fn certify_circuit_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("f.txt"), "0110\n").unwrap();
    let circ = dir.path().join("dj.circ");
    std::fs::write(&circ, "# H U_f H\ndft_all\noracle f.txt\nidft_all\n").unwrap();
    let circ = circ.to_str().unwrap();
    let env = envelope(&["certify", "--n", "2", "--q", "0.8,0.6", "--u-circuit", circ]);
    let CommandResult::Certify(r) = env.result else { panic!() };
    assert!(r.report.pass);
    let c = r.report.constants();
    assert!((c[0].re - 0.6).abs() < 1e-9 && (c[1].re - 0.2).abs() < 1e-9, "{c:?}");

    let env = envelope(&["certify", "--n", "2", "--q", "0.8,0.6", "--u-circuit", "random:3"]);
    let CommandResult::Certify(r) = env.result else { panic!() };
    assert!(!r.report.pass);
    assert!(r.report.max_residual() > 1e-3);

    let env = envelope(&["certify", "--n", "2", "--q", "0.8,0.6", "--u-circuit", circ, "--v-circuit", "dj:ip:10"]);
    let CommandResult::Certify(r) = env.result else { panic!() };
    assert_eq!(r.form, "generalized");
    assert!(r.report.pass);
}

#[test]
fn circuit_errors_carry_positions() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.circ");
    std::fs::write(&bad, "dft_all\n  xmask 1x\n").unwrap();
    let out = bulkq(&["certify", "--n", "2", "--u-circuit", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let nonunitary = dir.path().join("nu.circ");
    std::fs::write(&nonunitary, "gate 1 1,0 1,0 0,0 1,0\n").unwrap();
    assert_eq!(code(&["certify", "--n", "1", "--u-circuit", nonunitary.to_str().unwrap()]), Some(2));
}

#[test]
fn flag_errors() {
    assert_eq!(code(&["dj", "--n", "2", "--oracle", "nope:1"]), Some(3));
    assert_eq!(code(&["dj", "--n", "2", "--model", "bqc", "--q", "0.7,x", "--oracle", "ip:11"]), Some(3));
    assert_eq!(code(&["dj", "--n", "2", "--model", "bqc", "--q", "1.2", "--oracle", "ip:11"]), Some(2));
    assert_eq!(code(&["dj", "--n", "2", "--model", "bqc", "--q", "0.7,0.8,0.9", "--oracle", "ip:11"]), Some(2));
    assert_eq!(code(&["dj", "--n", "2"]), Some(3));
    assert_eq!(code(&["frobnicate"]), Some(3));
}

#[test]
fn reruns_are_byte_identical_and_round_trip() {
    let args = [
        "dj", "--n", "4", "--model", "bqc", "--q", "0.9,0.8,0.7,0.6", "--oracle", "random-balanced:5",
        "--sigma", "0.2", "--trials", "50", "--seed", "11",
    ];
    let a = String::from_utf8(bulkq(&args).stdout).unwrap();
    let b = String::from_utf8(bulkq(&args).stdout).unwrap();
    assert!(a == b, "reruns differ");
    let env: Envelope = serde_json::from_str(&a).unwrap();
    let again = serde_json::to_string_pretty(&env).unwrap() + "\n";
    assert!(again == a, "round trip changed the report");
    assert!(env.wall_time_s.is_none());

    for args in [
        &["parity", "--n", "3", "--y", "201", "--local-dim", "3", "--q", "0.6,0.3,0.1"][..],
        &["parity", "--n", "3", "--y", "101", "--model", "sqc", "--seed", "4"][..],
        &["epsilon", "--n", "6", "--samples", "100", "--seed", "2"][..],
        &["certify", "--n", "2", "--local-dim", "3", "--q", "0.5,0.3,0.2", "--u-circuit", "random:1", "--mode", "pointwise"][..],
    ] {
        let text = String::from_utf8(bulkq(args).stdout).unwrap();
        let env: Envelope = serde_json::from_str(&text).unwrap();
        assert!(serde_json::to_string_pretty(&env).unwrap() + "\n" == text, "{args:?}");
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let one = bulkq(&["epsilon", "--n", "4", "--exhaustive", "--format", "csv"]).stdout;
    let four = bulkq(&["epsilon", "--n", "4", "--exhaustive", "--format", "csv", "--threads", "4"]).stdout;
    assert_eq!(one, four);
}

#[test]
fn csv_has_one_row_per_site() {
    let out = bulkq(&["dj", "--n", "3", "--model", "bqc", "--q", "0.9", "--oracle", "ip:101", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rows = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(rows.records().count(), 3);
}

#[test]
fn timing_is_opt_in() {
    let env = envelope(&["epsilon", "--n", "2", "--exhaustive", "--timing"]);
    assert!(env.wall_time_s.is_some());
}

#[test]
fn dense_guard_override_is_logged() {
    let out = Command::new(env!("CARGO_BIN_EXE_bulkq"))
        .args(["epsilon", "--n", "2", "--exhaustive"])
        .env("BULKQ_DENSE_GUARD", "512")
        .output()
        .unwrap();
    let env: Envelope = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(env.guards.dense_dim, 512);
    assert_eq!(env.guards.dense_dim_env.as_deref(), Some("BULKQ_DENSE_GUARD"));
}

#[test]
fn selftest_passes_and_mutation_fails() {
    let env = envelope(&["selftest"]);
    let CommandResult::Selftest(r) = env.result else { panic!() };
    assert!(r.pass);
    assert_eq!(r.criteria.len(), 11);

    let out = bulkq(&["selftest", "--inject-sign-flip", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(4));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("2,thermal attenuation law,false"), "{text}");
}
