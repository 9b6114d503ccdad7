//! End-to-end checks of the `despeckle` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use despeckle::io::{read_image, write_image, BitDepth};
use despeckle_core::Image;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_despeckle"))
        .args(args)
        .current_dir(dir)
        .env_remove("DESPECKLE_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn save(path: &Path, image: &Image) {
    write_image(path, image, BitDepth::Eight).unwrap();
}

#[test]
fn eval_identical_images() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.f64");
    save(&a, &Image::filled(3, 4, 7.5));
    let out = run(
        dir.path(),
        &["eval", "--truth", "a.f64", "--candidate", "a.f64"],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(
        stdout(&out).contains("PSNR: inf, MAE: 0"),
        "{}",
        stdout(&out)
    );
}

#[test]
fn eval_two_by_two_example() {
    let dir = tempfile::tempdir().unwrap();
    save(&dir.path().join("t.f64"), &Image::filled(2, 2, 10.0));
    save(&dir.path().join("c.f64"), &Image::filled(2, 2, 11.0));
    let out = run(
        dir.path(),
        &["eval", "--truth", "t.f64", "--candidate", "c.f64"],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(
        stdout(&out).contains("PSNR: 20.0000, MAE: 1"),
        "{}",
        stdout(&out)
    );
}

#[test]
fn eval_shape_mismatch_fails() {
    let dir = tempfile::tempdir().unwrap();
    save(&dir.path().join("t.f64"), &Image::filled(2, 2, 10.0));
    save(&dir.path().join("c.f64"), &Image::filled(2, 3, 10.0));
    let out = run(
        dir.path(),
        &["eval", "--truth", "t.f64", "--candidate", "c.f64"],
    );
    assert!(!out.status.success());
}

#[test]
fn out_of_range_beta_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    save(&dir.path().join("in.f64"), &Image::filled(8, 8, 50.0));
    let out = run(
        dir.path(),
        &[
            "denoise", "--input", "in.f64", "--beta", "0.3", "-o", "out.f64",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("β must be < 1/4"), "{}", stderr(&out));
    assert!(!dir.path().join("out.f64").exists());
}

#[test]
fn missing_input_fails_with_message() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &["simulate", "--input", "nope.pgm", "-K", "4", "-o", "x.f64"],
    );
    assert!(!out.status.success());
    assert!(stderr(&out).contains("nope.pgm"), "{}", stderr(&out));
}

#[test]
fn empty_grid_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    save(&dir.path().join("in.f64"), &Image::filled(8, 8, 50.0));
    let out = run(dir.path(), &["sweep", "--input", "in.f64"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_emits_one_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let sim = run(
        dir.path(),
        &[
            "simulate",
            "--phantom",
            "32",
            "-K",
            "10",
            "--seed",
            "4",
            "-o",
            "noisy.f64",
            "--clean-output",
            "clean.f64",
        ],
    );
    assert!(sim.status.success(), "{}", stderr(&sim));
    let out = run(
        dir.path(),
        &[
            "sweep",
            "--input",
            "noisy.f64",
            "-K",
            "10",
            "--method",
            "hard",
            "--truth",
            "clean.f64",
            "--grid",
            "t_over_sigma=2,3,4,5,6,8",
            "--output-dir",
            "grid",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("grid/sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7, "{csv}");
    for k in 0..6 {
        assert!(dir.path().join(format!("grid/cell{k:04}.f64")).exists());
    }
}

#[test]
fn simulate_constant_image_mean() {
    let dir = tempfile::tempdir().unwrap();
    save(&dir.path().join("flat.f64"), &Image::filled(64, 64, 100.0));
    let out = run(
        dir.path(),
        &[
            "simulate",
            "--input",
            "flat.f64",
            "-K",
            "10",
            "--seed",
            "9",
            "-o",
            "noisy.f64",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let noisy = read_image(&dir.path().join("noisy.f64")).unwrap().image;
    let mean = noisy.as_slice().iter().sum::<f64>() / noisy.len() as f64;
    assert!((mean - 100.0).abs() < 1.0, "mean {mean}");
}

#[test]
fn simulate_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.pgm", "b.pgm"] {
        let out = run(
            dir.path(),
            &[
                "simulate",
                "--phantom",
                "32",
                "-K",
                "4",
                "--seed",
                "11",
                "-o",
                name,
            ],
        );
        assert!(out.status.success(), "{}", stderr(&out));
    }
    let a = fs::read(dir.path().join("a.pgm")).unwrap();
    let b = fs::read(dir.path().join("b.pgm")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn denoise_writes_image_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let sim = run(
        dir.path(),
        &[
            "simulate",
            "--phantom",
            "32",
            "-K",
            "10",
            "--seed",
            "2",
            "-o",
            "noisy.f64",
            "--clean-output",
            "clean.f64",
        ],
    );
    assert!(sim.status.success(), "{}", stderr(&sim));
    let out = run(
        dir.path(),
        &[
            "denoise",
            "--input",
            "noisy.f64",
            "-K",
            "10",
            "--truth",
            "clean.f64",
            "-o",
            "out.f64",
            "--report",
            "out.json",
            "--trace",
            "trace.csv",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out.json")).unwrap()).unwrap();
    assert!(
        report.get("psnr_denoised").is_some_and(|v| !v.is_null()),
        "{report}"
    );
    let trace = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(trace.starts_with("iteration,objective,residual,seconds"));
    assert!(dir.path().join("out.f64.manifest.json").exists());
}
