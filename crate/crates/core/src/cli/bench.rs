//! Benchmarks: verification time against hidden width, and the synthetic
//! function family.

use std::fmt;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::commands::{initial_network, write_json, EXIT_OK};
use super::config::{DataConfig, RunConfig, VerifyConfig};
use crate::certify::{verify_network, VerifyOptions};
use crate::data::{Dataset, Task, DEFAULT_FREQUENCY, GRID};
use crate::model::{InputBox, MlpNetwork, MonotoneSpec};
use crate::train::{certify_train_loop, fit, task_loss, TrainConfig, TrainOutcome};
use crate::{Error, Result};

/// Input dimension and monotone count of the timing networks.
const TIMING_DIM: usize = 13;
const TIMING_MONOTONE: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub width: usize,
    pub repeat: usize,
    pub wall_secs: f64,
    pub status: String,
    #[serde(with = "crate::certify::report_float")]
    pub u_alpha: f64,
    pub nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyRow {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub outcome: String,
    pub escalations: usize,
    #[serde(with = "crate::certify::report_float")]
    pub u_alpha: f64,
    pub test_mse: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub timing: Vec<TimingRow>,
    pub family: Vec<FamilyRow>,
}

impl BenchReport {
    /// `(width, mean wall seconds)` in order of first appearance.
    pub fn mean_times(&self) -> Vec<(usize, f64)> {
        let mut out: Vec<(usize, f64, usize)> = Vec::new();
        for r in &self.timing {
            match out.iter_mut().find(|e| e.0 == r.width) {
                Some(e) => {
                    e.1 += r.wall_secs;
                    e.2 += 1;
                }
                None => out.push((r.width, r.wall_secs, 1)),
            }
        }
        out.into_iter().map(|(w, t, n)| (w, t / n as f64)).collect()
    }
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.timing.is_empty() {
            writeln!(f, "{:>6} {:>12}", "width", "mean secs")?;
            for (w, t) in self.mean_times() {
                writeln!(f, "{w:>6} {t:>12.4}")?;
            }
        }
        if !self.family.is_empty() {
            let certified = self.family.iter().filter(|r| r.outcome == "certified").count();
            let mse = self.family.iter().map(|r| r.test_mse).sum::<f64>() / self.family.len() as f64;
            writeln!(
                f,
                "family: {certified}/{} certified, mean test MSE {mse:.6e}",
                self.family.len()
            )?;
        }
        Ok(())
    }
}

/// Regression data on `[0,1]^13`, increasing in the first four features.
fn timing_data(n: usize, seed: u64) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = Vec::with_capacity(n);
    let mut targets = Vec::with_capacity(n);
    for _ in 0..n {
        let x: Vec<f64> = (0..TIMING_DIM).map(|_| rng.random()).collect();
        let mono: f64 = x[..TIMING_MONOTONE].iter().map(|v| v * v).sum();
        let free: f64 = x[TIMING_MONOTONE..].iter().map(|v| (3.0 * v).sin()).sum::<f64>() / 9.0;
        targets.push(mono + free);
        features.push(x);
    }
    Dataset::new(
        (0..TIMING_DIM).map(|i| format!("f{i}")).collect(),
        features,
        targets,
        Task::Regression,
        MonotoneSpec::increasing((0..TIMING_MONOTONE).collect())?,
    )
}

/// Trains one two-layer network of each width and times its verification.
pub fn timing_curve(
    widths: &[usize],
    repeats: usize,
    train_epochs: usize,
    seed: u64,
    options: &VerifyOptions,
) -> Result<Vec<TimingRow>> {
    let data = timing_data(512, seed)?;
    let mut rows = Vec::new();
    for &width in widths {
        for repeat in 0..repeats {
            let run_seed = seed.wrapping_add((width * 1000 + repeat) as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(run_seed);
            let mut net = MlpNetwork::random(TIMING_DIM, &[width], data.monotone.clone(), &mut rng)?;
            if train_epochs > 0 {
                let cfg = TrainConfig {
                    epochs: train_epochs,
                    sampler_size: 256,
                    seed: run_seed,
                    ..TrainConfig::default()
                };
                fit(&mut net, &data, &cfg, 1.0)?;
            }
            let start = Instant::now();
            let report = verify_network(&net, &InputBox::unit(TIMING_DIM), options)?;
            let wall_secs = start.elapsed().as_secs_f64();
            log::info!("width {width} repeat {repeat}: {wall_secs:.3}s, {}", report.status);
            rows.push(TimingRow {
                width,
                repeat,
                wall_secs,
                status: report.status.to_string(),
                u_alpha: report.u_alpha,
                nodes: report.features().map(|(_, f)| f.nodes).sum(),
            });
        }
    }
    Ok(rows)
}

/// Runs the training loop on all 27 coefficient combinations.
pub fn family_sweep(base: &RunConfig) -> Result<Vec<FamilyRow>> {
    let (n_train, n_test, frequency) = match &base.data {
        DataConfig::Synth {
            n_train,
            n_test,
            frequency,
            ..
        } => (*n_train, *n_test, *frequency),
        DataConfig::Csv { .. } => (1000, 1000, DEFAULT_FREQUENCY),
    };
    let options = base.verify.options()?;
    let mut rows = Vec::new();
    for a in GRID {
        for b in GRID {
            for c in GRID {
                let mut config = base.clone();
                config.data = DataConfig::Synth {
                    a,
                    b,
                    c,
                    frequency,
                    n_train,
                    n_test,
                };
                let (train, test) = config.data.load(config.seed)?;
                let net = initial_network(&config, &train)?;
                let (net, report) = certify_train_loop(net, &train, &config.train, &options)?;
                let rec = report.selected_record();
                rows.push(FamilyRow {
                    a,
                    b,
                    c,
                    outcome: report.outcome.to_string(),
                    escalations: rec.escalation,
                    u_alpha: rec.verification.u_alpha,
                    test_mse: task_loss(&net, &test)?,
                });
                if report.outcome != TrainOutcome::Certified {
                    log::warn!("({a}, {b}, {c}) did not certify");
                }
            }
        }
    }
    Ok(rows)
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    for r in rows {
        w.serialize(r).map_err(|e| Error::Config(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub struct BenchPlan<'a> {
    pub widths: &'a [usize],
    pub repeats: usize,
    pub train_epochs: usize,
    pub timing: bool,
    pub family: Option<RunConfig>,
    pub seed: u64,
    pub verify: VerifyConfig,
    pub out: Option<&'a Path>,
}

pub fn cmd_bench(plan: BenchPlan<'_>) -> Result<(i32, BenchReport)> {
    let mut report = BenchReport::default();
    if plan.timing {
        report.timing = timing_curve(
            plan.widths,
            plan.repeats,
            plan.train_epochs,
            plan.seed,
            &plan.verify.options()?,
        )?;
    }
    if let Some(config) = &plan.family {
        report.family = family_sweep(config)?;
    }
    if let Some(dir) = plan.out {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        if !report.timing.is_empty() {
            write_csv(&dir.join("timing.csv"), &report.timing)?;
        }
        if !report.family.is_empty() {
            write_csv(&dir.join("family.csv"), &report.family)?;
        }
        write_json(&dir.join("bench.json"), &report)?;
    }
    print!("{report}");
    Ok((EXIT_OK, report))
}
