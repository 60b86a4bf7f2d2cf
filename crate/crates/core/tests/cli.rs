use std::path::Path;
use std::process::{Command, Output};

fn lgpca(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lgpca"))
        .args(args)
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(code(&lgpca(&[])), 1);
    assert_eq!(code(&lgpca(&["frobnicate"])), 1);
    assert_eq!(code(&lgpca(&["--help"])), 0);
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "num_scales=many\n").unwrap();
    assert_eq!(code(&lgpca(&["--config", p(&cfg), "mask-stats"])), 1);
}

#[test]
fn mask_stats_lists_counts() {
    let out = lgpca(&["mask-stats"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("features_unmasked=10584\n"), "{text}");
    assert!(text.contains("features_3pt=9240\n"));
    assert!(text.contains("features_2pt=10008\n"));
}

#[test]
fn end_to_end_commands() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let manifest = data.join("manifest.csv");
    let model = dir.path().join("model.lgm");
    assert_eq!(
        code(&lgpca(&[
            "synth",
            "--out-dir",
            p(&data),
            "--identities",
            "5"
        ])),
        0
    );
    assert_eq!(
        code(&lgpca(&[
            "train",
            "--manifest",
            p(&manifest),
            "--set",
            "gallery",
            "--out",
            p(&model)
        ])),
        0
    );

    let eval = lgpca(&[
        "evaluate",
        "--model",
        p(&model),
        "--manifest",
        p(&manifest),
        "--set",
        "probe",
    ]);
    assert_eq!(code(&eval), 0);
    assert!(stdout(&eval).starts_with("probes=5\ngallery=5\n"));

    let reports = dir.path().join("reports");
    let export = lgpca(&[
        "export-report",
        "--model",
        p(&model),
        "--manifest",
        p(&manifest),
        "--set",
        "probe",
        "--out-dir",
        p(&reports),
    ]);
    assert_eq!(code(&export), 0);
    assert_eq!(
        std::fs::read_to_string(reports.join("report.txt")).unwrap(),
        stdout(&eval)
    );
    assert!(std::fs::read_to_string(reports.join("cmc.csv"))
        .unwrap()
        .starts_with("rank,cmc\n1,"));
    assert!(reports.join("roc.csv").exists());

    let table = dir.path().join("shift.csv");
    let shift = lgpca(&[
        "shift-exp",
        "--model",
        p(&model),
        "--manifest",
        p(&manifest),
        "--set",
        "probe",
        "--eye",
        "right",
        "--shifts",
        "0,6",
        "--out",
        p(&table),
    ]);
    assert_eq!(code(&shift), 0);
    let rows = std::fs::read_to_string(&table).unwrap();
    assert_eq!(rows.lines().count(), 3);

    let faces = dir.path().join("faces");
    assert_eq!(
        code(&lgpca(&[
            "normalize",
            "--manifest",
            p(&manifest),
            "--set",
            "probe",
            "--out-dir",
            p(&faces)
        ])),
        0
    );
    assert_eq!(std::fs::read_dir(&faces).unwrap().count(), 5);

    let cfg = dir.path().join("five.cfg");
    std::fs::write(&cfg, "num_scales=5\n").unwrap();
    let mismatch = lgpca(&[
        "--config",
        p(&cfg),
        "evaluate",
        "--model",
        p(&model),
        "--manifest",
        p(&manifest),
        "--set",
        "probe",
    ]);
    assert_eq!(code(&mismatch), 2);
    assert!(String::from_utf8_lossy(&mismatch.stderr).contains("layout mismatch"));

    // Eigenvalues out of order: the container parses but breaks a model invariant.
    let bytes = std::fs::read(&model).unwrap();
    let at = bytes.windows(11).position(|w| w == b"eigenvalues").unwrap() + 11 + 8;
    let mut broken = bytes.clone();
    broken[at..at + 8].copy_from_slice(&1e-9f64.to_le_bytes());
    let broken_path = dir.path().join("broken.lgm");
    std::fs::write(&broken_path, broken).unwrap();
    let invalid = lgpca(&[
        "evaluate",
        "--model",
        p(&broken_path),
        "--manifest",
        p(&manifest),
    ]);
    assert_eq!(code(&invalid), 3);

    let missing = lgpca(&[
        "evaluate",
        "--model",
        "/nonexistent.lgm",
        "--manifest",
        p(&manifest),
    ]);
    assert_eq!(code(&missing), 2);
}

#[test]
fn build_bank_writes_every_filter() {
    let dir = tempfile::tempdir().unwrap();
    let out = lgpca(&["build-bank", "--out-dir", p(dir.path())]);
    assert_eq!(code(&out), 0);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 24);
    assert_eq!(stdout(&out).lines().count(), 24);
}
