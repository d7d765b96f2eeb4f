use std::path::PathBuf;
use std::process::Command;

/// `target/<profile>`, where cargo puts the static library.
fn profile_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(|deps| deps.parent()).unwrap().to_path_buf()
}

#[test]
fn c_program_builds_and_runs_against_the_header() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let lib = profile_dir().join("libdhcosim_ffi.a");
    if Command::new("cc").arg("--version").output().is_err() || !lib.is_file() {
        eprintln!("no C compiler or static library, skipping");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(manifest.join("include"))
        .arg(manifest.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C build failed");

    let weather = manifest.join("../../data/weather.csv");
    let scenario = dir.path().join("s.toml");
    std::fs::write(
        &scenario,
        format!(
            "[simulation]\nt_end_s = 3600.0\n[files]\nweather = {:?}\n[[buildings]]\nid = \"b\"\nfloor_area_m2 = 60.0\nsurfaces = [{{ kind = \"wall\", area_m2 = 120.0, u_value = 0.5 }}]\n",
            weather.to_str().unwrap()
        ),
    )
    .unwrap();
    let out = Command::new(&exe).arg(&scenario).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("12 "), "{text}");

    let out = Command::new(&exe).arg(dir.path().join("absent.toml")).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("absent.toml"));
}
