use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use bml_cli::{backend_runner, cmd_bench, verify_runners, BenchConfig, CliError, Runner, BENCH_HEADER, METRICS_HEADER};
use bml_core::{init_grid, simulate, Backend, Cell, Layout, SeedSpec};

fn bml(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bml"))
        .args(args)
        .output()
        .expect("failed to spawn bml")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn run_vacuum_writes_unit_mobility_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("vacuum");
    let o = bml(&[
        "run", "-n", "16", "--density", "0", "--steps", "4", "--out-dir", out_dir.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    assert_eq!(stdout(&o), "phase=FreeFlow\n");

    let csv = fs::read_to_string(out_dir.join("metrics.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], METRICS_HEADER);
    assert_eq!(lines.len(), 5);
    for (k, line) in lines[1..].iter().enumerate() {
        assert_eq!(*line, format!("{},0,0,0,0,1", k + 1));
    }
    let dump = fs::read_to_string(out_dir.join("final.txt")).unwrap();
    assert_eq!(dump, "................\n".repeat(16));
}

#[test]
fn run_writes_snapshots_on_cadence() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("snaps");
    let o = bml(&[
        "run", "-n", "8", "--density", "0.4", "--steps", "7", "--snapshot-every", "3",
        "--backend", "halo", "--out-dir", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    let mut names: Vec<String> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".ppm"))
        .collect();
    names.sort();
    assert_eq!(names, ["step_3.ppm", "step_6.ppm"]);
    let ppm = fs::read(out.join("step_3.ppm")).unwrap();
    assert_eq!(ppm.len(), b"P6\n8 8\n255\n".len() + 3 * 64);
    assert!(ppm.starts_with(b"P6\n8 8\n255\n"));

    // Snapshot at step 3 decodes back to the grid after 3 steps.
    let initial = init_grid(&SeedSpec::new(1, 0.4, 8).unwrap(), Layout::Halo).unwrap();
    let at3 = simulate(Backend::ScalarNaive, 1, &initial, 3).unwrap();
    let pixels = &ppm[b"P6\n8 8\n255\n".len()..];
    for (k, px) in pixels.chunks(3).enumerate() {
        let cell = match px {
            [255, 255, 255] => Cell::Empty,
            [255, 0, 0] => Cell::Lr,
            [0, 0, 255] => Cell::Tb,
            other => panic!("unexpected pixel {other:?}"),
        };
        assert_eq!(cell, at3.get(k / 8, k % 8));
    }
}

#[test]
fn verify_passes_for_aligned_and_unaligned_sizes() {
    let o = bml(&["verify", "-n", "64", "--density", "0.3", "--steps", "100", "--seed", "7", "--threads", "3"]);
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    let text = stdout(&o);
    let digests: Vec<&str> = text
        .lines()
        .filter_map(|l| l.split_once("digest=").map(|(_, d)| d))
        .collect();
    assert_eq!(digests.len(), 4);
    assert!(digests.iter().all(|d| *d == digests[0]));

    let o = bml(&["verify", "-n", "33", "--density", "0.5", "--steps", "50"]);
    assert_eq!(o.status.code(), Some(0), "{o:?}");
}

#[test]
fn verify_detects_a_faulty_backend() {
    let initial = init_grid(&SeedSpec::new(3, 0.3, 20).unwrap(), Layout::Halo).unwrap();
    // Runs correctly, then swaps two differing neighbors: counts are kept, one cell is wrong.
    let faulty = Runner {
        name: "faulty".into(),
        run: Box::new(|g, steps| {
            let mut out = simulate(Backend::ScalarHalo, 1, g, steps)?;
            let n = out.n();
            let (r, c) = (0..n * (n - 1))
                .map(|k| (k / (n - 1), k % (n - 1)))
                .find(|&(r, c)| out.get(r, c) != out.get(r, c + 1))
                .unwrap();
            let (a, b) = (out.get(r, c), out.get(r, c + 1));
            out.set(r, c, b);
            out.set(r, c + 1, a);
            Ok(out)
        }),
    };
    let runners = vec![backend_runner(Backend::ScalarNaive, 1), faulty];
    let report = verify_runners(&initial, 10, &runners).unwrap();
    assert!(!report.passed());
    let m = report.mismatch.unwrap();
    assert_eq!((m.reference.as_str(), m.backend.as_str()), ("naive", "faulty"));
    assert_ne!(report.digests[0].1, report.digests[1].1);

    // A runner that loses a vehicle fails the conservation check.
    let leaky = Runner {
        name: "leaky".into(),
        run: Box::new(|g, steps| {
            let mut out = simulate(Backend::Lanes, 1, g, steps)?;
            let (r, c) = (0..out.n() * out.n())
                .map(|k| (k / out.n(), k % out.n()))
                .find(|&(r, c)| out.get(r, c) != Cell::Empty)
                .unwrap();
            out.set(r, c, Cell::Empty);
            Ok(out)
        }),
    };
    let runners = vec![backend_runner(Backend::ScalarNaive, 1), leaky];
    let err = verify_runners(&initial, 10, &runners).unwrap_err();
    assert!(matches!(err, CliError::Verify(_)));
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn bench_prints_csv_and_single_rep_has_zero_stddev() {
    let config = BenchConfig {
        sizes: vec![16, 20],
        steps: 8,
        reps: 1,
        threads: Some(2),
        ..BenchConfig::default()
    };
    let mut out = Vec::new();
    let rows = cmd_bench(&config, &mut out).unwrap();
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|r| r.stddev_s == 0.0 && r.mean_s >= 0.0 && r.reps == 1));
    let threads: Vec<usize> = rows.iter().map(|r| r.threads).collect();
    assert_eq!(threads, [1, 1, 2, 2, 1, 1, 2, 2]);

    let text = String::from_utf8(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(BENCH_HEADER));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&first[..4], ["naive", "16", "1", "1"]);
    assert_eq!(first[5], "0.000000");
}

#[test]
fn bench_defaults_mirror_reference_setup() {
    let d = BenchConfig::default();
    assert_eq!(d.sizes, [1024, 2048, 4096]);
    assert_eq!((d.rho, d.steps, d.reps), (0.3, 1024, 5));
    assert_eq!(d.backends, Backend::ALL);
}

#[test]
fn bench_binary_smoke() {
    let o = bml(&["bench", "-n", "12", "--steps", "3", "--reps", "2", "--backend", "halo,lanes"]);
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().nth(2).unwrap().starts_with("lanes,12,"));
}

#[test]
fn usage_errors_exit_1() {
    for args in [
        &["run", "--backend", "gpu"][..],
        &["run", "--density", "1.5"],
        &["run", "--backend", "naive", "--threads", "2"],
        &["run", "--threads", "0"],
        &["bench", "--reps", "0", "-n", "8"],
        &["frobnicate"],
        &["run", "--size", "abc"],
    ] {
        let o = bml(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}: {o:?}");
    }
    assert_eq!(bml(&["--help"]).status.code(), Some(0));
}

#[test]
fn io_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out_dir = Path::new(&blocker).join("sub");
    let o = bml(&["run", "-n", "4", "--steps", "1", "--out-dir", out_dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{o:?}");
    assert!(String::from_utf8_lossy(&o.stderr).contains("file"));
}

#[test]
fn zero_steps_prints_no_phase() {
    let dir = tempfile::tempdir().unwrap();
    let o = bml(&["run", "-n", "4", "--steps", "0", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "");
    let csv = fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
    assert_eq!(csv, format!("{METRICS_HEADER}\n"));
}
