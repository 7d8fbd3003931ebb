//! Compiles and runs a small C program against the generated header and the
//! static library, proving the ABI from the consumer side.

use std::path::PathBuf;
use std::process::Command;

const C_PROGRAM: &str = r#"
#include "mosim.h"
#include <math.h>
#include <stdio.h>
#include <string.h>

int main(void) {
    const char *json =
        "{\"model\": \"freund\", \"lambda1\": 1.0, \"lambda2\": 1.0,"
        " \"lambda1_post\": 3.0, \"lambda2_post\": 3.0,"
        " \"grid\": {\"dt\": 0.5, \"steps\": 4}}";
    MosimModel *model = NULL;
    if (mosim_model_from_json(json, &model) != MosimStatus_Ok) return 1;

    uint32_t dim = 0;
    if (mosim_model_dim(model, &dim) != MosimStatus_Ok || dim != 2) return 2;

    double times[2] = {1.0, 1.0};
    double p = 0.0;
    if (mosim_survival(model, times, 2, &p) != MosimStatus_Ok) return 3;
    if (fabs(p - exp(-2.0)) > 1e-12) return 4;

    double buffer[32];
    if (mosim_simulate(model, 16, 7, buffer, 32) != MosimStatus_Ok) return 5;
    for (int i = 0; i < 32; i++) {
        if (!(buffer[i] > 0.0)) return 6;
    }

    /* error path: wrong arity plus readable message */
    if (mosim_survival(model, times, 1, &p) != MosimStatus_InvalidArgument) return 7;
    char msg[256];
    if (mosim_last_error(msg, sizeof msg) == 0) return 8;
    if (strlen(msg) == 0) return 9;

    mosim_model_free(model);
    printf("c-abi ok: survival=%.12f\n", p);
    return 0;
}
"#;

#[test]
fn c_program_builds_and_runs_against_the_static_library() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let include_dir = manifest.join("include");
    let debug_dir = std::env::var_os("CARGO_TARGET_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| manifest.join("../../target"))
        .join("debug");
    // `cargo build` links the artifact into debug/, `cargo test` leaves it
    // in debug/deps/
    let lib_dir = [debug_dir.clone(), debug_dir.join("deps")]
        .into_iter()
        .find(|dir| dir.join("libmosim_capi.a").exists())
        .unwrap_or_else(|| panic!("libmosim_capi.a not found under {}", debug_dir.display()));

    let dir = tempfile::tempdir().unwrap();
    let c_path = dir.path().join("use_mosim.c");
    let exe_path = dir.path().join("use_mosim");
    std::fs::write(&c_path, C_PROGRAM).unwrap();

    let compile = Command::new("cc")
        .arg(&c_path)
        .arg("-I")
        .arg(&include_dir)
        .arg("-L")
        .arg(&lib_dir)
        .args(["-lmosim_capi", "-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe_path)
        .output()
        .expect("cc is available");
    assert!(
        compile.status.success(),
        "compilation failed:\n{}",
        String::from_utf8_lossy(&compile.stderr)
    );

    let run = Command::new(&exe_path).output().unwrap();
    assert!(
        run.status.success(),
        "C program exited with {:?}:\n{}",
        run.status.code(),
        String::from_utf8_lossy(&run.stdout)
    );
    assert!(String::from_utf8_lossy(&run.stdout).contains("c-abi ok"));
}
