//! `run`, `bench` and `verify` commands for the `bml` binary.
//!
//! Everything here writes its report to a caller-supplied writer so the
//! commands can be exercised without spawning the binary.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use bml_core::{
    classify, count_vehicles, init_grid, metrics::DEFAULT_WINDOW, write_ppm, Backend, Engine, Grid, Layout,
    SeedSpec, StepMetrics, TrafficPhase,
};
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFY: i32 = 2;
pub const EXIT_IO: i32 = 3;

pub const METRICS_HEADER: &str = "step,lr_count,tb_count,lr_moved,tb_moved,mobility";
pub const BENCH_HEADER: &str = "backend,n,threads,reps,mean_s,stddev_s";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("verification failed: {0}")]
    Verify(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Core(#[from] bml_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Verify(_) => EXIT_VERIFY,
            CliError::Io { .. } => EXIT_IO,
            CliError::Core(e) => match e {
                bml_core::Error::Io { .. } => EXIT_IO,
                bml_core::Error::Conservation { .. } => EXIT_VERIFY,
                _ => EXIT_USAGE,
            },
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn stdout_err(source: io::Error) -> CliError {
    CliError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    }
}

/// Logical cores, the default worker count for multithreaded backends.
pub fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Worker count for `backend` when the user did not pass `--threads`.
pub fn threads_for(backend: Backend, requested: Option<usize>) -> usize {
    match requested {
        Some(t) => t,
        None if backend.is_multithreaded() => default_threads(),
        None => 1,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    pub rho: f64,
    pub steps: u64,
    pub seed: u64,
    pub backend: Backend,
    pub threads: usize,
    /// 0 disables snapshots.
    pub snapshot_every: u64,
    pub out_dir: PathBuf,
}

impl SimConfig {
    pub fn seed_spec(&self) -> Result<SeedSpec, CliError> {
        SeedSpec::new(self.seed, self.rho, self.n).map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.seed_spec()?;
        if self.threads == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        Ok(())
    }
}

fn engine(backend: Backend, threads: usize) -> Result<Engine, CliError> {
    Engine::new(backend, threads).map_err(|e| CliError::Usage(e.to_string()))
}

pub fn format_metrics_row(m: &StepMetrics) -> String {
    format!(
        "{},{},{},{},{},{}",
        m.step, m.lr_count, m.tb_count, m.lr_moved, m.tb_moved, m.mobility
    )
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub metrics: Vec<StepMetrics>,
    /// `None` when no steps were run.
    pub phase: Option<TrafficPhase>,
    pub final_grid: Grid,
}

/// Simulate `config`, writing `metrics.csv`, optional `step_<k>.ppm`
/// snapshots and `final.txt` into `config.out_dir`. Prints `phase=<regime>`
/// to `out`, classified over the last [`DEFAULT_WINDOW`] steps.
pub fn cmd_run(config: &SimConfig, out: &mut dyn Write) -> Result<RunOutcome, CliError> {
    config.validate()?;
    let engine = engine(config.backend, config.threads)?;
    let initial = init_grid(&config.seed_spec()?, engine.layout())?;

    fs::create_dir_all(&config.out_dir).map_err(io_err(&config.out_dir))?;
    let csv_path = config.out_dir.join("metrics.csv");
    let mut csv = BufWriter::new(fs::File::create(&csv_path).map_err(io_err(&csv_path))?);
    writeln!(csv, "{METRICS_HEADER}").map_err(io_err(&csv_path))?;

    let mut pair = engine.pair(&initial);
    let mut metrics = Vec::with_capacity(config.steps as usize);
    let mut failure: Option<CliError> = None;
    engine.run_observed(&mut pair, config.steps, |m, grid| {
        if failure.is_some() {
            return;
        }
        if let Err(e) = writeln!(csv, "{}", format_metrics_row(m)) {
            failure = Some(io_err(&csv_path)(e));
        }
        if config.snapshot_every > 0 && m.step % config.snapshot_every == 0 {
            if let Err(e) = write_ppm(grid, config.out_dir.join(format!("step_{}.ppm", m.step))) {
                failure = Some(e.into());
            }
        }
        metrics.push(*m);
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    csv.flush().map_err(io_err(&csv_path))?;

    let final_grid = pair.into_current();
    let dump = config.out_dir.join("final.txt");
    fs::write(&dump, final_grid.render()).map_err(io_err(&dump))?;

    let window: Vec<f64> = metrics
        .iter()
        .rev()
        .take(DEFAULT_WINDOW)
        .map(|m| m.mobility)
        .collect();
    let phase = if window.is_empty() {
        None
    } else {
        let phase = classify(&window)?;
        writeln!(out, "phase={phase}").map_err(stdout_err)?;
        Some(phase)
    };

    Ok(RunOutcome {
        metrics,
        phase,
        final_grid,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyConfig {
    pub n: usize,
    pub rho: f64,
    pub steps: u64,
    pub seed: u64,
    pub threads: usize,
}

/// A named way of advancing a grid `steps` steps.
pub struct Runner<'a> {
    pub name: String,
    pub run: Box<dyn Fn(&Grid, u64) -> Result<Grid, CliError> + 'a>,
}

/// Runner for a real backend. Conservation is checked after every step.
pub fn backend_runner<'a>(backend: Backend, threads: usize) -> Runner<'a> {
    let threads = if backend.is_multithreaded() { threads } else { 1 };
    Runner {
        name: backend.name().to_string(),
        run: Box::new(move |initial, steps| {
            let engine = engine(backend, threads)?;
            let mut pair = engine.pair(initial);
            engine.run_observed(&mut pair, steps, |_, _| {})?;
            Ok(pair.into_current())
        }),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mismatch {
    pub reference: String,
    pub backend: String,
    /// 0-based interior `(row, col)`.
    pub cell: (usize, usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyReport {
    pub digests: Vec<(String, u64)>,
    pub mismatch: Option<Mismatch>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.mismatch.is_none()
    }
}

/// Run every runner from `initial` and compare final grids against the first.
pub fn verify_runners(initial: &Grid, steps: u64, runners: &[Runner<'_>]) -> Result<VerifyReport, CliError> {
    let counts = count_vehicles(initial);
    let mut finals: Vec<(String, Grid)> = Vec::with_capacity(runners.len());
    for runner in runners {
        let grid = match (runner.run)(initial, steps) {
            Ok(g) => g,
            Err(CliError::Core(e @ bml_core::Error::Conservation { .. })) => {
                return Err(CliError::Verify(format!("{}: {e}", runner.name)))
            }
            Err(e) => return Err(e),
        };
        if count_vehicles(&grid) != counts {
            return Err(CliError::Verify(format!(
                "{}: vehicle counts changed from {:?} to {:?}",
                runner.name,
                counts,
                count_vehicles(&grid)
            )));
        }
        finals.push((runner.name.clone(), grid));
    }

    let digests = finals.iter().map(|(name, g)| (name.clone(), g.digest())).collect();
    let mismatch = finals.split_first().and_then(|((ref_name, reference), rest)| {
        rest.iter().find_map(|(name, g)| {
            reference.first_difference(g).map(|cell| Mismatch {
                reference: ref_name.clone(),
                backend: name.clone(),
                cell,
            })
        })
    });
    Ok(VerifyReport { digests, mismatch })
}

/// Run all four backends from the same seeded grid and require identical results.
pub fn cmd_verify(config: &VerifyConfig, out: &mut dyn Write) -> Result<VerifyReport, CliError> {
    if config.threads == 0 {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    let spec = SeedSpec::new(config.seed, config.rho, config.n).map_err(|e| CliError::Usage(e.to_string()))?;
    let initial = init_grid(&spec, Layout::Halo)?;
    let runners: Vec<Runner<'_>> = Backend::ALL
        .into_iter()
        .map(|b| backend_runner(b, config.threads))
        .collect();
    let report = verify_runners(&initial, config.steps, &runners)?;
    write_verify_report(&report, out)?;
    match &report.mismatch {
        None => Ok(report),
        Some(m) => Err(CliError::Verify(format!(
            "{} differs from {} at row {}, column {}",
            m.backend, m.reference, m.cell.0, m.cell.1
        ))),
    }
}

pub fn write_verify_report(report: &VerifyReport, out: &mut dyn Write) -> Result<(), CliError> {
    for (name, digest) in &report.digests {
        writeln!(out, "{name:<8} digest=0x{digest:016x}").map_err(stdout_err)?;
    }
    match &report.mismatch {
        None => writeln!(out, "ok: {} backends identical", report.digests.len()),
        Some(m) => writeln!(
            out,
            "MISMATCH: {} vs {} first differs at row {}, column {}",
            m.backend, m.reference, m.cell.0, m.cell.1
        ),
    }
    .map_err(stdout_err)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub rho: f64,
    pub steps: u64,
    pub seed: u64,
    pub reps: usize,
    pub backends: Vec<Backend>,
    /// `None` means all logical cores for multithreaded backends.
    pub threads: Option<usize>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            sizes: vec![1024, 2048, 4096],
            rho: 0.3,
            steps: 1024,
            seed: 1,
            reps: 5,
            backends: Backend::ALL.to_vec(),
            threads: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub backend: Backend,
    pub n: usize,
    pub threads: usize,
    pub reps: usize,
    pub mean_s: f64,
    pub stddev_s: f64,
}

impl BenchRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{:.6},{:.6}",
            self.backend, self.n, self.threads, self.reps, self.mean_s, self.stddev_s
        )
    }
}

/// Population mean and standard deviation.
pub fn mean_stddev(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Time `reps` runs of `steps` steps from `initial`. Buffer setup is outside the timed region.
pub fn time_backend(
    backend: Backend,
    threads: usize,
    initial: &Grid,
    steps: u64,
    reps: usize,
) -> Result<BenchRow, CliError> {
    if reps == 0 {
        return Err(CliError::Usage("--reps must be at least 1".into()));
    }
    let engine = engine(backend, threads)?;
    let mut samples = Vec::with_capacity(reps);
    for _ in 0..reps {
        let mut pair = engine.pair(initial);
        let start = Instant::now();
        engine.run(&mut pair, steps)?;
        samples.push(start.elapsed().as_secs_f64());
        std::hint::black_box(&pair);
    }
    let (mean_s, stddev_s) = mean_stddev(&samples);
    Ok(BenchRow {
        backend,
        n: initial.n(),
        threads,
        reps,
        mean_s,
        stddev_s,
    })
}

/// Print one CSV row per (backend, n) to `out`, header first.
pub fn cmd_bench(config: &BenchConfig, out: &mut dyn Write) -> Result<Vec<BenchRow>, CliError> {
    if config.reps == 0 {
        return Err(CliError::Usage("--reps must be at least 1".into()));
    }
    writeln!(out, "{BENCH_HEADER}").map_err(stdout_err)?;
    let mut rows = Vec::new();
    for &n in &config.sizes {
        let spec = SeedSpec::new(config.seed, config.rho, n).map_err(|e| CliError::Usage(e.to_string()))?;
        let initial = init_grid(&spec, Layout::Halo)?;
        for &backend in &config.backends {
            // A sweep-wide --threads only applies where it can.
            let threads = if backend.is_multithreaded() { threads_for(backend, config.threads) } else { 1 };
            let row = time_backend(backend, threads, &initial, config.steps, config.reps)?;
            writeln!(out, "{}", row.csv()).map_err(stdout_err)?;
            out.flush().map_err(stdout_err)?;
            rows.push(row);
        }
    }
    Ok(rows)
}
