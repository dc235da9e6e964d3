use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lensalign::config::SceneConfig;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lensalign"));
    cmd.env("RUST_LOG", "warn");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

/// Small but otherwise default scene.
fn tiny_config(dir: &Path) -> PathBuf {
    let mut scene = SceneConfig::builtin();
    scene.sensor.width_px = 16;
    scene.sensor.height_px = 16;
    scene.render.samples_per_pixel = 4;
    scene.env.reference_samples = 2;
    scene.env.calibration.trials = 5;
    scene.baseline.n_init = 2;
    scene.baseline.candidates = 64;
    scene.baseline.local_candidates = 8;
    scene.baseline.n_trees = 5;
    scene.bench.noise_levels = vec![0.0];
    scene.bench.episodes = 2;
    scene.bench.steps = 3;
    let path = dir.join("scene.toml");
    scene.save(&path).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn full_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let config = tiny_config(dir.path());

    let out = run(&["reference", "--config", s(&config), "--out", s(dir.path())]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let reference = dir.path().join("reference.f32");
    assert!(reference.exists());
    assert!(dir.path().join("reference.pgm").exists());

    // benchmark refuses to run before calibration
    let bench_dir = dir.path().join("bench");
    let out = run(&[
        "bench",
        "--config",
        s(&config),
        "--reference",
        s(&reference),
        "--out",
        s(&bench_dir),
    ]);
    assert_eq!(code(&out), 2);

    let out = run(&[
        "calibrate",
        "--config",
        s(&config),
        "--reference",
        s(&reference),
        "--noise",
        "0",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("threshold"));
    let theta = SceneConfig::load(&config).unwrap().env.threshold_for(0.0);
    assert!(theta.is_some_and(|t| t > 0.0));

    let out = run(&[
        "bench",
        "--config",
        s(&config),
        "--reference",
        s(&reference),
        "--out",
        s(&bench_dir),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let results = bench_dir.join("results.csv");
    let text = std::fs::read_to_string(&results).unwrap();
    // header + 3 algorithms x 2 episodes x (3 steps + reset)
    assert_eq!(text.lines().count(), 1 + 3 * 2 * 4);
    assert!(bench_dir.join("summary.csv").exists());

    let summary = dir.path().join("mean.csv");
    let out = run(&[
        "summarize",
        "--input",
        s(&results),
        "--stat",
        "mean",
        "--out",
        s(&summary),
    ]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&summary).unwrap();
    assert!(text.lines().nth(1).unwrap().contains(",mean,"));
}

#[test]
fn render_and_landscape() {
    let dir = tempfile::tempdir().unwrap();
    let config = tiny_config(dir.path());
    let img = dir.path().join("img/pose.pgm");
    let out = run(&[
        "render",
        "--config",
        s(&config),
        "--pose",
        "0.5,0.5,0.5,0.5,0.5,0.5",
        "--noise",
        "0.25",
        "--out",
        s(&img),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(img.exists() && img.with_extension("f32").exists());

    let land = dir.path().join("land");
    let out = run(&[
        "landscape",
        "--config",
        s(&config),
        "--grid",
        "5",
        "--dims",
        "x,y",
        "--out",
        s(&land),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(land.join("landscape_x_y.csv").exists());
    assert!(land.join("landscape_x_y.pgm").exists());
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = tiny_config(dir.path());
    let missing = dir.path().join("nope.toml");

    assert_eq!(code(&run(&["render", "--config", s(&missing)])), 2);
    assert_eq!(
        code(&run(&[
            "bench",
            "--config",
            s(&config),
            "--algos",
            "simplex"
        ])),
        2
    );
    assert_eq!(
        code(&run(&[
            "landscape",
            "--config",
            s(&config),
            "--dims",
            "x,w"
        ])),
        2
    );
    assert_eq!(
        code(&run(&["render", "--config", s(&config), "--spp", "0"])),
        2
    );
    assert_eq!(
        code(&run(&["render", "--config", s(&config), "--noise", "0.3"])),
        2
    );
    // clap usage errors
    assert_eq!(code(&run(&["frobnicate"])), 2);
    assert_eq!(code(&run(&["render", "--pose", "0.5,0.5"])), 2);

    std::fs::write(&missing, "[sensor]\nwidth_px = 'many'\n").unwrap();
    assert_eq!(code(&run(&["render", "--config", s(&missing)])), 2);
}

#[test]
fn runtime_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "summarize",
        "--input",
        s(&dir.path().join("absent.csv")),
        "--out",
        s(&dir.path().join("x.csv")),
    ]);
    assert_eq!(code(&out), 3);
}
