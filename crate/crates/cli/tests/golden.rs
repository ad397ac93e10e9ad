//! Byte-exact reports for fixed inputs. Regenerate with `UPDATE_GOLDEN=1` (see scripts/update-golden.sh).

use std::path::PathBuf;
use std::process::Command;

fn check(name: &str, args: &[&str]) {
    let o = Command::new(env!("CARGO_BIN_EXE_modone")).args(args).env_remove("MODONE_PRECISION").output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &o.stdout).unwrap();
        return;
    }
    let want = std::fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert!(o.stdout == want, "{name} differs from {}", path.display());
}

#[test]
fn paircorr_csv() {
    check(
        "paircorr_sqrt2_500.csv",
        &["paircorr", "--alpha", "sqrt:2", "--N", "500", "--range", "0:4", "--bins", "16", "--out", "csv"],
    );
}

#[test]
fn theta_verify_json() {
    check("theta_verify_seed7.json", &["theta-verify", "--trials", "5", "--seed", "7", "--deterministic"]);
}

#[test]
fn discrepancy_json() {
    check("discrepancy_golden.json", &["discrepancy", "--alpha", "golden", "--N", "100,1000", "--deterministic"]);
}
