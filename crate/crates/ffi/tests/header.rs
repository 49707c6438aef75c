use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include "darbouxkit.h"
#include <stdio.h>

int main(void) {
    DkModel *m = NULL;
    if (dk_model_parse("[chart C]\nvars x\nf = x^2\n", &m) != DK_STATUS_OK) {
        fprintf(stderr, "%s\n", dk_last_error());
        return 1;
    }
    char *text = NULL;
    dk_model_print(m, &text);
    dk_string_free(text);
    dk_model_free(m);
    return 0;
}
"#;

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let scratch = std::env::temp_dir().join(format!("darbouxkit-header-{}", std::process::id()));
    std::fs::create_dir_all(&scratch).unwrap();
    let src = scratch.join("main.c");
    std::fs::write(&src, PROGRAM).unwrap();
    let status = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(dir.join("include"))
        .arg(&src)
        .status()
        .unwrap();
    std::fs::remove_dir_all(&scratch).ok();
    assert!(status.success());
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok_and(|o| o.status.success()))
        .ok_or(())
}
