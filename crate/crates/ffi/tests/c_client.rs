//! Compiles and runs a small C program against the generated header and the static library.

use std::path::PathBuf;
use std::process::Command;

const SOURCE: &str = r#"
#include <stdio.h>
#include "floquet_rabi.h"

int main(void) {
    FrParams p;
    if (fr_params_default(&p) != FR_STATUS_OK) return 10;
    p.n_fock = 14;
    p.n_j = 8;
    FrModel *m = NULL;
    if (fr_model_new(&p, &m) != FR_STATUS_OK) return 11;
    FrFloquet *f = NULL;
    if (fr_floquet_new(m, &f) != FR_STATUS_OK) return 12;
    double q[8];
    size_t n = 0;
    if (fr_floquet_quasienergies(f, q, 8, &n) != FR_STATUS_OK || n != 8) return 13;
    printf("%s %.6f\n", fr_version(), q[0]);
    fr_floquet_free(f);
    fr_model_free(m);

    p.omega_m = 0.0;
    if (fr_model_new(&p, &m) != FR_STATUS_INVALID_CONFIG) return 14;
    char buf[128];
    if (fr_last_error(buf, sizeof buf) == 0) return 15;
    return 0;
}
"#;

fn compiler() -> Option<String> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok_and(|o| o.status.success()))
        .map(String::from)
}

#[test]
fn c_program_links_and_runs() {
    let Some(cc) = compiler() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // target/<profile>/deps/<test binary>
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libfloquet_rabi_ffi.a");
    assert!(lib.exists(), "static library not built at {}", lib.display());

    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("client.c");
    let exe = dir.path().join("client");
    std::fs::write(&src, SOURCE).unwrap();
    let status = Command::new(cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with(floquet_rabi::VERSION), "{text}");
}
