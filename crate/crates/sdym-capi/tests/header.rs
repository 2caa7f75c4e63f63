//! Validates the generated C header: it must exist, compile as C99, and
//! (when the static library artifact is available) link and run the smoke
//! program from `smoke.c`.

use std::path::PathBuf;
use std::process::Command;

fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn compiler() -> Option<&'static str> {
    for cc in ["cc", "gcc", "clang"] {
        if Command::new(cc).arg("--version").output().map(|o| o.status.success()).unwrap_or(false)
        {
            return Some(cc);
        }
    }
    None
}

#[test]
fn header_is_generated_and_valid_c() {
    let include = manifest_dir().join("include");
    let header = include.join("sdym.h");
    assert!(header.is_file(), "missing {}", header.display());
    let text = std::fs::read_to_string(&header).unwrap();
    for symbol in [
        "sdym_solution_from_seed_json",
        "sdym_solution_one_instanton",
        "sdym_solution_free",
        "sdym_initial_density",
        "sdym_backlund_density",
        "sdym_total_charge",
        "sdym_backlund_gauss_arguments",
        "sdym_verify_json",
        "sdym_string_free",
        "sdym_last_error",
        "sdym_version",
    ] {
        assert!(text.contains(symbol), "header lacks {symbol}");
    }

    let Some(cc) = compiler() else {
        eprintln!("no C compiler available; header syntax not checked");
        return;
    };
    let smoke = manifest_dir().join("tests/smoke.c");
    let out = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Wextra", "-Werror", "-fsyntax-only", "-I"])
        .arg(&include)
        .arg(&smoke)
        .output()
        .unwrap();
    assert!(out.status.success(), "syntax check failed:\n{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn smoke_program_links_and_runs() {
    let Some(cc) = compiler() else {
        eprintln!("no C compiler available; link test skipped");
        return;
    };
    let target_root = std::env::var("CARGO_TARGET_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|_| manifest_dir().join("../../target"));
    let archive = target_root.join("debug/libsdym_capi.a");
    if !archive.is_file() {
        eprintln!("static library not built at {}; link test skipped", archive.display());
        return;
    }

    let dir = tempfile::TempDir::new().unwrap();
    let bin = dir.path().join("smoke");
    let out = Command::new(cc)
        .args(["-std=c99", "-I"])
        .arg(manifest_dir().join("include"))
        .arg(manifest_dir().join("tests/smoke.c"))
        .arg(&archive)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .output()
        .unwrap();
    assert!(out.status.success(), "link failed:\n{}", String::from_utf8_lossy(&out.stderr));

    let run = Command::new(&bin).output().unwrap();
    assert!(
        run.status.success(),
        "smoke program exited with {:?}: {}",
        run.status.code(),
        String::from_utf8_lossy(&run.stderr)
    );
    assert!(String::from_utf8_lossy(&run.stdout).contains("smoke ok"));
}
