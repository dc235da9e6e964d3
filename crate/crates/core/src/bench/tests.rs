use std::sync::Arc;

use super::*;
use crate::env::build_reference;
use crate::env::tests::small_scene;
use crate::io::pgm;

fn tiny_scene(theta: f64) -> SceneConfig {
    let mut scene = small_scene(12, 2);
    for level in [0.0, 0.25, 0.5] {
        scene.env.set_threshold(level, theta);
    }
    scene
}

fn reference(scene: &SceneConfig) -> Arc<SensorImage> {
    let cfg = EnvConfig::from_scene(scene).unwrap();
    Arc::new(build_reference(&cfg, 4, 1).unwrap())
}

fn tiny_bench(out_dir: Option<PathBuf>) -> BenchmarkConfig {
    BenchmarkConfig {
        algorithms: Algorithm::ALL.to_vec(),
        noise_levels: vec![0.0, 0.5],
        episodes: 2,
        steps: 3,
        seed: 11,
        out_dir,
    }
}

fn without_timing(csv: &str) -> String {
    csv.lines()
        .map(|l| l.rsplit_once(',').unwrap().0)
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn row_count_and_determinism() {
    let scene = tiny_scene(1e-9);
    let r = reference(&scene);
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let a = run_benchmark(&scene, &tiny_bench(Some(d1.path().into())), r.clone()).unwrap();
    run_benchmark(&scene, &tiny_bench(Some(d2.path().into())), r).unwrap();
    assert_eq!(a.rows.len(), 3 * 2 * 2 * 4);
    let f1 = std::fs::read_to_string(d1.path().join(RESULTS_FILE)).unwrap();
    let f2 = std::fs::read_to_string(d2.path().join(RESULTS_FILE)).unwrap();
    assert_eq!(f1.lines().count(), 1 + 48);
    assert_eq!(without_timing(&f1), without_timing(&f2));
    // 9 significant digits: re-serializing what was read gives the same text
    let back = read_results(&d1.path().join(RESULTS_FILE)).unwrap();
    assert_eq!(back.to_csv(), f1);
    assert_eq!(back.rows.len(), a.rows.len());
    for w in a.rows.windows(2) {
        if w[0].episode == w[1].episode
            && w[0].algorithm == w[1].algorithm
            && w[0].noise == w[1].noise
        {
            assert!(w[1].best_rmse.unwrap() <= w[0].best_rmse.unwrap());
        }
    }
}

#[test]
fn early_termination_is_padded() {
    // every score is below this threshold, so episodes end at step 1
    let scene = tiny_scene(10.0);
    let mut cfg = tiny_bench(None);
    cfg.algorithms = vec![Algorithm::Random];
    cfg.noise_levels = vec![0.0];
    let res = run_benchmark(&scene, &cfg, reference(&scene)).unwrap();
    assert_eq!(res.rows.len(), 2 * 4);
    for r in &res.rows {
        assert!(r.terminated);
        assert_eq!(r.terminal_step, Some(1));
        assert_eq!(r.score.is_some(), r.step <= 1);
        assert!(r.best_rmse.is_some());
    }
}

#[test]
fn missing_threshold_is_config_error() {
    let scene = small_scene(12, 2);
    let err = run_benchmark(&scene, &tiny_bench(None), reference(&scene)).unwrap_err();
    assert!(err.is_config_error());
    let mut bad = tiny_bench(None);
    bad.episodes = 0;
    assert!(run_benchmark(&tiny_scene(1.0), &bad, reference(&scene))
        .unwrap_err()
        .is_config_error());
}

#[test]
fn algorithms_share_variances() {
    let scene = tiny_scene(1e-9);
    let r = reference(&scene);
    let env_cfg = env_for_level(&scene, 0.5).unwrap();
    let search = search_box(&scene).unwrap();
    for episode in 0..3 {
        let seed = episode_seed(5, episode);
        let bytes: Vec<Vec<u8>> = Algorithm::ALL
            .iter()
            .map(|alg| {
                let mut env = AlignEnv::new(env_cfg.clone(), r.clone()).unwrap();
                let mut opt = alg.build(search.clone(), &scene.baseline, 1);
                run_episode(opt.as_mut(), &mut env, seed, 1)
                    .unwrap()
                    .variances
                    .to_bytes()
            })
            .collect();
        assert!(bytes.windows(2).all(|w| w[0] == w[1]));
    }
}

#[test]
fn failed_episode_rows() {
    let rows = episode_rows(Algorithm::BoGp, 0.25, 4, 2, None);
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.failed && r.best_rmse.is_none()));
    assert_eq!(rows[2].to_csv_line(), "bo-gp,0.25,4,2,,,0,,1,");
}

fn fixture() -> BenchmarkResult {
    // three episodes of two steps; best values per step listed
    let bests = [[0.9, 0.5, 0.2], [0.8, 0.8, 0.6], [0.7, 0.4, 0.4]];
    let mut rows = Vec::new();
    for (e, b) in bests.iter().enumerate() {
        for (s, v) in b.iter().enumerate() {
            rows.push(BenchRow {
                algorithm: Algorithm::Random,
                noise: 0.0,
                episode: e,
                step: s,
                score: Some(*v),
                best_rmse: Some(*v),
                terminated: false,
                terminal_step: None,
                failed: false,
                step_ms: Some(10.0 * (e + 1) as f64),
            });
        }
    }
    BenchmarkResult { rows }
}

#[test]
fn summary_matches_hand_computation() {
    let rows = summarize(&fixture(), Statistic::Median).unwrap();
    assert_eq!(rows.len(), 3);
    let centers: Vec<f64> = rows.iter().map(|r| r.center).collect();
    assert_eq!(centers, vec![0.8, 0.5, 0.4]);
    // linear interpolation between order statistics
    assert!((rows[2].p25 - 0.3).abs() < 1e-12);
    assert!((rows[2].p75 - 0.5).abs() < 1e-12);
    assert_eq!(rows[0].step_ms, None);
    assert_eq!(rows[1].step_ms, None);
    assert_eq!(rows[2].step_ms, Some(20.0));
    let mean = summarize(&fixture(), Statistic::Mean).unwrap();
    assert!((mean[1].center - 1.7 / 3.0).abs() < 1e-12);
    for r in rows.iter().chain(&mean) {
        assert!(r.p25 <= r.p75);
    }
    assert!(summarize(&BenchmarkResult::default(), Statistic::Median).is_err());
}

#[test]
fn single_episode_summary_is_identity() {
    let mut f = fixture();
    f.rows.retain(|r| r.episode == 1);
    let rows = summarize(&f, Statistic::Median).unwrap();
    for (r, v) in rows.iter().zip([0.8, 0.8, 0.6]) {
        assert_eq!((r.center, r.p25, r.p75), (v, v, v));
    }
}

#[test]
fn summary_file_round_trip() {
    let rows = summarize(&fixture(), Statistic::Median).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("summary.csv");
    write_summary(&path, &rows).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let back = read_summary(&path).unwrap();
    write_summary(&path, &back).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), text);
    assert_eq!(back.len(), rows.len());
}

#[test]
fn landscape_files() {
    let scene = small_scene(12, 2);
    let cfg = EnvConfig::from_scene(&scene).unwrap();
    let r = build_reference(&cfg, 2, 1).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let slices = emit_landscape(&cfg, &r, &[0, 1, 2, 3, 4], 5, 3, dir.path()).unwrap();
    assert_eq!(slices.len(), 10);
    let minima = std::fs::read_to_string(dir.path().join(MINIMA_FILE)).unwrap();
    assert_eq!(minima.lines().count(), 11);
    for s in &slices {
        let csv = read_landscape_csv(&s.csv_path).unwrap();
        let (img, max) = pgm::read_sensor_pgm(&s.pgm_path).unwrap();
        let step = max / 65535.0;
        for (a, row) in csv.iter().enumerate() {
            for (b, v) in row.iter().enumerate() {
                assert!((v - s.grid[a][b]).abs() <= 1e-8 * v.abs());
                assert!((img.get(b, a) - v).abs() <= step);
            }
        }
    }
    assert!(emit_landscape(&cfg, &r, &[0, 5], 5, 3, dir.path()).is_err());
    assert!(emit_landscape(&cfg, &r, &[1, 1], 5, 3, dir.path()).is_err());
}
