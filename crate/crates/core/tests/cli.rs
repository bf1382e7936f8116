use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn games() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("games")
}

fn syncgame(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_syncgame"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn field<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.lines().find_map(|l| l.strip_prefix(key)?.strip_prefix(" = "))
}

fn game(name: &str) -> String {
    games().join(name).to_string_lossy().into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("syncgame-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn local_value_of_two_input_game() {
    let out = syncgame(&["--no-timing", "value", &game("example1.game"), "--class", "loc"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(field(&text, "value"), Some("3/4"));
    assert_eq!(field(&text, "method"), Some("enumeration"));
    assert!(field(&text, "time_ms").is_none());
}

#[test]
fn ns_value_reports_verified_certificate() {
    let out = syncgame(&["value", &game("example2.game"), "--class", "ns"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(field(&text, "value"), Some("2/3"));
    assert_eq!(field(&text, "certificate"), Some("verified"));
}

#[test]
fn seesaw_reaches_witness_value() {
    let out = syncgame(&["value", &game("example2.game"), "--class", "q-lower", "--seed", "7"]);
    assert!(out.status.success());
    let v: f64 = field(&stdout(&out), "value").unwrap().parse().unwrap();
    assert!(v >= 7.0 / 12.0 - 1e-6, "{v}");
}

#[test]
fn qc_upper_bound_brackets_local_value() {
    let out = syncgame(&["value", &game("example1.game"), "--class", "qc-upper"]);
    assert!(out.status.success());
    let v: f64 = field(&stdout(&out), "value").unwrap().parse().unwrap();
    assert!((0.75 - 1e-6..=0.75 + 1e-4).contains(&v), "{v}");
}

#[test]
fn unsupported_level_is_a_usage_error() {
    let out = syncgame(&["value", &game("example1.game"), "--class", "qc-upper", "--level", "3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn product_file_round_trips_through_value() {
    let path = scratch("square1.game");
    let out = syncgame(&["product", &game("example1.game"), &game("example1.game"), "-o", path.to_str().unwrap()]);
    assert!(out.status.success());
    let written = std::fs::read_to_string(&path).unwrap();
    assert!(written.lines().any(|l| l == "inputs 4"));
    assert!(written.lines().any(|l| l == "outputs 4"));
    assert!(written.lines().filter(|l| l.starts_with('#')).count() >= 3);
    let out = syncgame(&["value", path.to_str().unwrap()]);
    assert_eq!(field(&stdout(&out), "value"), Some("9/16"));
}

#[test]
fn product_of_three_input_game_has_nine_inputs() {
    let out = syncgame(&["product", &game("example2.game"), &game("example2.game")]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.lines().any(|l| l == "inputs 9"));
    assert!(text.lines().any(|l| l == "outputs 4"));
}

#[test]
fn product_with_trivial_game_keeps_value() {
    let trivial = scratch("trivial.game");
    std::fs::write(&trivial, "inputs 1\noutputs 1\nallow 1 1 1 1\ndensity uniform\n").unwrap();
    let path = scratch("with-trivial.game");
    let out = syncgame(&["product", &game("example1.game"), trivial.to_str().unwrap(), "-o", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = syncgame(&["value", path.to_str().unwrap()]);
    assert_eq!(field(&stdout(&out), "value"), Some("3/4"));
}

#[test]
fn witness_file_is_a_valid_realization() {
    let out = syncgame(&["check-realization", &game("example2.game"), &game("witness712.real")]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(field(&text, "valid"), Some("true"));
    assert_eq!(field(&text, "perfect"), Some("false"));
    let v: f64 = field(&text, "value").unwrap().parse().unwrap();
    assert!((v - 7.0 / 12.0).abs() <= 1e-12);
}

#[test]
fn malformed_realization_is_a_parse_error() {
    let path = scratch("bad.real");
    std::fs::write(&path, "blocks 1\nweight 1\ndim 2\nP 1 1\n1+0i\n").unwrap();
    let out = syncgame(&["check-realization", &game("example2.game"), path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));
}

#[test]
fn missing_game_file_is_an_io_error() {
    let out = syncgame(&["value", "/nonexistent/game.game"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_without_sdp_omits_relaxation_checks() {
    let out = syncgame(&["--no-timing", "verify", "--skip", "sdp"]);
    let text = stdout(&out);
    assert!(text.contains("check example1-local = PASS"));
    assert!(text.contains("check ns-certificates = PASS"));
    assert!(!text.contains("npa"));
}

#[test]
fn verify_reports_every_check_and_its_first_failure() {
    let out = syncgame(&["--no-timing", "verify"]);
    let text = stdout(&out);
    let checks: Vec<&str> = text.lines().filter(|l| l.starts_with("check ")).collect();
    assert_eq!(checks.len(), 12);
    let failed: usize = field(&text, "failed").unwrap().parse().unwrap();
    assert_eq!(out.status.code(), Some(if failed == 0 { 0 } else { 1 }));
    if failed > 0 {
        let first = field(&text, "first_failure").unwrap();
        let first_line = checks.iter().find(|l| l.contains("= FAIL")).unwrap();
        assert!(first_line.starts_with(&format!("check {first} ")));
    }
}

#[test]
fn flipped_rule_bit_fails_the_local_check() {
    let out = syncgame(&["--no-timing", "verify", "--skip", "sdp", "--flip", "2", "1", "1", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("check example1-local = FAIL"));
    assert_eq!(field(&text, "first_failure"), Some("example1-local"));
}

#[test]
fn flip_outside_the_game_is_rejected() {
    let out = syncgame(&["verify", "--skip", "sdp", "--flip", "3", "1", "1", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reports_are_deterministic_without_timing() {
    let args = ["--no-timing", "value", &game("example2.game"), "--class", "q-lower", "--seed", "3"];
    assert_eq!(stdout(&syncgame(&args)), stdout(&syncgame(&args)));
}
