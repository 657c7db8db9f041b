//! Compiles and runs a small C program against the generated header and
//! the static library.

use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include <math.h>
#include "phasecons.h"

int main(void) {
    double v = 0.0;
    if (phasecons_ml_eval(0.0, 0.7, 0.4, -3.0, &v) != PHASECONS_OK) return 1;
    if (fabs(v - 0.4508241991944112) > 1e-12) return 2;

    PhExpr *e = NULL;
    if (phasecons_expr_parse("pow(x,", &e) != PHASECONS_INVALID_ARGUMENT) return 3;
    char msg[128];
    if (phasecons_last_error_message(msg, sizeof msg) == 0) return 4;
    if (phasecons_expr_parse("exp(-x)", &e) != PHASECONS_OK) return 5;
    double grid[3] = {0.5, 1.0, 2.0};
    int32_t status = -1;
    if (phasecons_cm_test(e, 4, grid, 3, &status) != PHASECONS_OK || status != PHASECONS_CM_PASS) return 6;
    phasecons_expr_free(e);

    PhModel *m = NULL;
    const char *json = "{\"radial\": {\"kind\": \"constant\", \"beta\": 0.5}, \"potential\": \"pow(psi,2)\"}";
    if (phasecons_model_from_json(json, &m) != PHASECONS_OK) return 7;
    int32_t verdict = -1;
    if (phasecons_model_verdict(m, &verdict) != PHASECONS_OK || verdict != PHASECONS_VERDICT_CONSISTENT) return 8;
    phasecons_model_free(m);
    printf("ok\n");
    return 0;
}
"#;

fn static_lib() -> Option<PathBuf> {
    // the test binary lives in target/<profile>/deps
    let exe = std::env::current_exe().ok()?;
    let profile_dir = exe.parent()?.parent()?;
    let lib = profile_dir.join("libphasecons_ffi.a");
    lib.exists().then_some(lib)
}

fn have_cc() -> bool {
    Command::new("cc").arg("--version").output().is_ok_and(|o| o.status.success())
}

#[test]
fn c_program_links_and_runs() {
    let Some(lib) = static_lib() else {
        eprintln!("skipping: libphasecons_ffi.a not built in this profile");
        return;
    };
    if !have_cc() {
        eprintln!("skipping: no C compiler");
        return;
    }
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    let bin = dir.path().join("smoke");
    std::fs::write(&src, PROGRAM).unwrap();
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout), "ok\n");
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/phasecons.h")).unwrap();
    for name in [
        "phasecons_ml_eval",
        "phasecons_expr_parse",
        "phasecons_model_report_json",
        "phasecons_last_error_message",
        "typedef struct PhModel PhModel",
    ] {
        assert!(header.contains(name), "{name} missing from the header");
    }
}
