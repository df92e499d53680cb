//! Builds and runs a real C client against the generated header and the
//! static library, exercising the ABI from outside Rust.

use std::path::PathBuf;
use std::process::Command;

const C_CLIENT: &str = r#"
#include "ctp_harmonics.h"
#include <math.h>
#include <stdio.h>
#include <string.h>

int main(void) {
    CthmModel *m = cthm_model_new(1.0, 1.0);
    if (!m) return 1;

    double margin = 0.0;
    if (cthm_stability_margin(m, &margin) != CTHM_STATUS_OK) return 2;
    if (fabs(margin - 1.0) > 1e-12) return 3;

    double omegas[1] = {2.0};
    double gs[1] = {1.0};
    if (cthm_model_set_discrete_bath(m, omegas, gs, 1) != CTHM_STATUS_OK) return 4;
    if (cthm_stability_margin(m, &margin) != CTHM_STATUS_OK) return 5;
    if (fabs(margin - 0.75) > 1e-12) return 6;

    enum { N = 2001 };
    static double x[N];
    if (cthm_simulate_kick(m, 1.0, 0.0, 2.0, N, x) != CTHM_STATUS_OK) return 7;
    if (fabs(x[0]) > 1e-12) return 8;

    double re[8], im[8], rre[8], rim[8];
    size_t found = 0;
    if (cthm_find_poles(m, 1e-6, 0.01, 3.0, -0.4, 0.1, re, im, rre, rim, 8, &found)
        != CTHM_STATUS_OK) return 9;
    if (found != 2) return 10;

    /* error path leaves a readable message */
    if (cthm_simulate_kick(NULL, 1.0, 0.0, 1.0, 8, x) != CTHM_STATUS_NULL_ARGUMENT) return 11;
    char msg[128];
    if (cthm_last_error(msg, sizeof msg) == 0) return 12;
    if (strlen(msg) == 0) return 13;

    cthm_model_free(m);
    printf("c client ok: margin %.3f, poles %zu\n", margin, found);
    return 0;
}
"#;

#[test]
fn c_client_compiles_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let include = manifest.join("include");
    let header = include.join("ctp_harmonics.h");
    assert!(header.exists(), "cbindgen header missing");
    let text = std::fs::read_to_string(&header).unwrap();
    for decl in [
        "typedef struct CthmModel CthmModel",
        "cthm_model_new",
        "cthm_model_set_discrete_bath",
        "cthm_model_set_ohmic_bath",
        "cthm_simulate_kick",
        "cthm_response_kick",
        "cthm_find_poles",
        "cthm_apparent_spectral_function",
        "cthm_last_error",
        "CTHM_STATUS_OK",
    ] {
        assert!(text.contains(decl), "header lacks {decl}");
    }

    // the deps copy is written when the lib job finishes (a dependency of
    // this test); the uplifted target/<profile> copy can lag behind it
    let profile_dir = manifest
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .join("target")
        .join(if cfg!(debug_assertions) { "debug" } else { "release" });
    let staticlib = [profile_dir.join("deps/libctp_harmonics_ffi.a"),
        profile_dir.join("libctp_harmonics_ffi.a")]
        .into_iter()
        .find(|p| p.exists())
        .expect("staticlib not built");

    let work = tempdir();
    let src = work.join("client.c");
    std::fs::write(&src, C_CLIENT).unwrap();
    let exe = work.join("client");

    let compile = Command::new("cc")
        .arg(&src)
        .arg(&staticlib)
        .arg(format!("-I{}", include.display()))
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .expect("cc available");
    assert!(
        compile.status.success(),
        "compile failed: {}",
        String::from_utf8_lossy(&compile.stderr)
    );

    let run = Command::new(&exe).output().unwrap();
    assert!(
        run.status.success(),
        "client exited {:?}: {}",
        run.status.code(),
        String::from_utf8_lossy(&run.stdout)
    );
    assert!(String::from_utf8_lossy(&run.stdout).contains("c client ok"));

    std::fs::remove_dir_all(&work).ok();
}

fn tempdir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cthm-ffi-smoke-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
