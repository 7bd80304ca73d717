//! End-to-end tests of the command-line pipeline: every stage runs as a
//! real subprocess against real files, the way a user drives it.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], out_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twistspun-cli"))
        .args(args)
        .env("TWISTSPUN_OUT_DIR", out_dir)
        .output()
        .expect("CLI binary spawns")
}

fn run_ok(args: &[&str], out_dir: &Path) -> String {
    let out = run(args, out_dir);
    assert!(
        out.status.success(),
        "command {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

#[test]
fn pipeline_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut artifacts: Vec<Vec<Vec<u8>>> = Vec::new();
    for sub in ["a", "b"] {
        let o = dir.path().join(sub);
        let surface = o.join("surface.json");
        let surface = surface.to_str().unwrap();
        let stem = o.join("diagram");
        let slices = o.join("slices");
        let motion = slices.join("motion.json");
        let report = o.join("report.json");

        run_ok(
            &[
                "build", "--arc", "trefoil", "--n", "2", "--m", "16", "--out", surface,
            ],
            &o,
        );
        run_ok(
            &[
                "project",
                surface,
                "--tol",
                "1e-3",
                "--seed",
                "1",
                "--out",
                stem.to_str().unwrap(),
            ],
            &o,
        );
        run_ok(
            &[
                "slice",
                surface,
                "--family",
                "horizontal",
                "--frames",
                "9",
                "--tol",
                "1e-4",
                "--seed",
                "2",
                "--out",
                slices.to_str().unwrap(),
            ],
            &o,
        );
        let analysis = run_ok(
            &[
                "analyze",
                motion.to_str().unwrap(),
                "--seed",
                "3",
                "--out",
                report.to_str().unwrap(),
            ],
            &o,
        );
        // Two twists force the half-turn period on every horizontal
        // frame, and tilted events balance to the sphere.
        assert!(analysis.contains("period 2π/2 confirmed"), "{analysis}");
        assert!(analysis.contains("; balance 2"), "{analysis}");

        artifacts.push(vec![
            read(Path::new(surface)),
            read(&stem.with_extension("json")),
            read(&motion),
            read(&slices.join("frame_004.svg")),
            read(&report),
        ]);
    }
    assert_eq!(
        artifacts[0], artifacts[1],
        "identical seeds must reproduce every artifact byte for byte"
    );
}

#[test]
fn spun_radial_slices_carry_breaks_and_export_rerenders_frames() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().to_path_buf();
    let surface = o.join("surface.json");
    let surface = surface.to_str().unwrap();
    let stem = o.join("diagram");
    let slices = o.join("slices");
    let motion = slices.join("motion.json");

    run_ok(
        &[
            "build", "--arc", "trefoil", "--n", "0", "--m", "16", "--out", surface,
        ],
        &o,
    );
    // The symmetric projection of a spun surface is fully extractable,
    // so the sidecar carries singularities and the broken record.
    let projected = run_ok(
        &[
            "project",
            surface,
            "--tol",
            "0",
            "--seed",
            "1",
            "--out",
            stem.to_str().unwrap(),
        ],
        &o,
    );
    assert!(projected.contains("3 double curves"), "{projected}");
    assert!(stem.with_file_name("diagram-broken.obj").exists());

    run_ok(
        &[
            "slice",
            stem.with_extension("json").to_str().unwrap(),
            "--family",
            "radial",
            "--frames",
            "8",
            "--seed",
            "2",
            "--out",
            slices.to_str().unwrap(),
        ],
        &o,
    );
    let text = String::from_utf8(read(&motion)).unwrap();
    assert!(text.contains("\"gauss\""), "codes embedded per frame");
    assert!(
        text.contains("O1") || text.contains("U1"),
        "knotted frames carry non-empty codes"
    );
    assert!(
        text.contains("\"breaks\": [\n"),
        "broken diagram slices record break marks"
    );

    let frames2 = o.join("frames2");
    run_ok(
        &[
            "export",
            motion.to_str().unwrap(),
            "--out",
            frames2.to_str().unwrap(),
        ],
        &o,
    );
    assert_eq!(
        read(&slices.join("frame_003.svg")),
        read(&frames2.join("frame_003.svg")),
        "export re-renders byte-identical figures from the persisted picture"
    );
}

#[test]
fn exit_codes_classify_failures() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().to_path_buf();

    // 1: validation — ring count not a multiple of the twist count.
    let out = run(&["build", "--n", "2", "--m", "47"], &o);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("multiple"));

    // 1: validation — malformed flag value caught by the parser.
    let out = run(&["slice", "whatever.json", "--family", "bogus"], &o);
    assert_eq!(out.status.code(), Some(1));

    // 2: genericity — radial frames of a perturbed diagram share their
    // axis closure, which no view jitter resolves.
    let surface = o.join("surface.json");
    let surface = surface.to_str().unwrap();
    let stem = o.join("diagram");
    run_ok(
        &[
            "build", "--arc", "trefoil", "--n", "2", "--m", "16", "--out", surface,
        ],
        &o,
    );
    run_ok(
        &[
            "project",
            surface,
            "--tol",
            "1e-3",
            "--seed",
            "1",
            "--out",
            stem.to_str().unwrap(),
        ],
        &o,
    );
    let out = run(
        &[
            "slice",
            stem.with_extension("json").to_str().unwrap(),
            "--family",
            "radial",
            "--frames",
            "8",
            "--seed",
            "2",
        ],
        &o,
    );
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("hint"), "{stderr}");

    // 3: I/O — analyzing a picture that does not exist.
    let out = run(&["analyze", "absent/motion.json"], &o);
    assert_eq!(out.status.code(), Some(3));

    // 0: --help is not a failure.
    let out = run(&["--help"], &o);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn env_var_supplies_the_default_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().to_path_buf();
    run_ok(&["build", "--arc", "unknot", "--n", "0", "--m", "8"], &o);
    assert!(
        o.join("surface.json").exists(),
        "default output lands in the directory the environment names"
    );
}
