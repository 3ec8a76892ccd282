use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::bench::BenchReport;
use super::config::{RunConfig, VerifyConfig};
use crate::certify::{find_attack, verify_network, AttackResult, FeatureStatus, VerificationReport};
use crate::data::{Dataset, Task};
use crate::model::{apply_appendix_architecture, io, InputBox, MlpNetwork};
use crate::train::{accuracy, certify_train_loop, task_loss, TrainOutcome, TrainReport};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
/// A violation exists: refuted by an optimal solution or an attack found.
pub const EXIT_VIOLATION: i32 = 2;
/// No verdict within the budget, or training exhausted its escalations.
pub const EXIT_UNDECIDED: i32 = 3;

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Config(e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Config(e.to_string()))
}

/// Metrics of the returned network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainMetrics {
    pub train_loss: f64,
    pub test_loss: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test_accuracy: Option<f64>,
    pub parameters: usize,
}

/// Builds the initial network for a run.
pub fn initial_network(config: &RunConfig, data: &Dataset) -> Result<MlpNetwork> {
    if let Some(path) = &config.model.init_model {
        let net = io::load(path)?;
        if net.input_dim != data.dim() {
            return Err(Error::Input(format!(
                "model expects {} features, data has {}",
                net.input_dim,
                data.dim()
            )));
        }
        return Ok(net);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let net = MlpNetwork::random(data.dim(), &config.model.hidden, data.monotone.clone(), &mut rng)?;
    apply_appendix_architecture(net, &config.model.architecture(), &mut rng)
}

pub fn cmd_train(mut config: RunConfig, json: bool) -> Result<i32> {
    config.data.resolve()?;
    config.train.validate()?;
    let options = config.verify.options()?;
    let dir = config.output_dir.clone();
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let run_path = dir.join("run_config.toml");
    fs::write(&run_path, config.to_toml()?).map_err(|e| Error::io(&run_path, e))?;

    let (train, test) = config.data.load(config.seed)?;
    let net = initial_network(&config, &train)?;
    let (net, report) = certify_train_loop(net, &train, &config.train, &options)?;
    let metrics = TrainMetrics {
        train_loss: task_loss(&net, &train)?,
        test_loss: if test.is_empty() { f64::NAN } else { task_loss(&net, &test)? },
        test_accuracy: match (train.task, test.is_empty()) {
            (Task::Classification, false) => Some(accuracy(&net, &test)?),
            _ => None,
        },
        parameters: net.parameter_count(),
    };

    io::save(&net, dir.join("model.json"))?;
    write_json(&dir.join("train_report.json"), &report)?;
    write_json(&dir.join("metrics.json"), &metrics)?;
    let csv_path = dir.join("loss_curve.csv");
    let file = fs::File::create(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
    report.write_loss_csv(file)?;

    if json {
        println!("{}", to_json(&report)?);
    } else {
        println!("{report}");
        println!(
            "train loss {:.6e}, test loss {:.6e}{}",
            metrics.train_loss,
            metrics.test_loss,
            metrics
                .test_accuracy
                .map_or(String::new(), |a| format!(", test accuracy {a:.4}"))
        );
        println!("artifacts written to {}", dir.display());
    }
    Ok(match report.outcome {
        TrainOutcome::Certified => EXIT_OK,
        TrainOutcome::Exhausted => EXIT_UNDECIDED,
    })
}

pub fn verification_exit_code(report: &VerificationReport) -> i32 {
    match report.status {
        FeatureStatus::Certified => EXIT_OK,
        FeatureStatus::Refuted => EXIT_VIOLATION,
        FeatureStatus::Undecided => EXIT_UNDECIDED,
    }
}

pub fn cmd_verify(model: &Path, verify: &VerifyConfig, out: Option<&Path>, json: bool) -> Result<i32> {
    let net = io::load(model)?;
    let report = verify_network(&net, &InputBox::unit(net.input_dim), &verify.options()?)?;
    if let Some(path) = out {
        write_json(path, &report)?;
    }
    if json {
        println!("{}", to_json(&report)?);
    } else {
        println!("{report}");
    }
    Ok(verification_exit_code(&report))
}

pub fn attack_exit_code(results: &[AttackResult]) -> i32 {
    if results.iter().any(|r| r.found) {
        EXIT_VIOLATION
    } else if results.iter().all(|r| r.proven) {
        EXIT_OK
    } else {
        EXIT_UNDECIDED
    }
}

pub fn cmd_attack(
    model: &Path,
    points: Vec<Vec<f64>>,
    verify: &VerifyConfig,
    out: Option<&Path>,
    json: bool,
) -> Result<i32> {
    let net = io::load(model)?;
    if points.is_empty() {
        return Err(Error::Input("no points to attack".into()));
    }
    let unit = InputBox::unit(net.input_dim);
    let budget = verify.budget()?;
    let results = points
        .iter()
        .map(|x| find_attack(&net, x, &unit, &budget))
        .collect::<Result<Vec<_>>>()?;
    if let Some(path) = out {
        write_json(path, &results)?;
    }
    if json {
        println!("{}", to_json(&results)?);
    } else {
        for (x, r) in points.iter().zip(&results) {
            println!("x={x:?}: {r}");
        }
    }
    Ok(attack_exit_code(&results))
}

/// Splits a flat list of coordinates into points of dimension `dim`.
pub fn chunk_points(flat: &[f64], dim: usize) -> Result<Vec<Vec<f64>>> {
    if dim == 0 || !flat.len().is_multiple_of(dim) {
        return Err(Error::Input(format!(
            "{} coordinates do not form points of dimension {dim}",
            flat.len()
        )));
    }
    Ok(flat.chunks(dim).map(<[f64]>::to_vec).collect())
}

pub fn cmd_report(path: &Path) -> Result<i32> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if let Ok(r) = serde_json::from_str::<TrainReport>(&text) {
        println!("{r}");
    } else if let Ok(r) = serde_json::from_str::<VerificationReport>(&text) {
        println!("{r}");
    } else if let Ok(rs) = serde_json::from_str::<Vec<AttackResult>>(&text) {
        for (k, r) in rs.iter().enumerate() {
            println!("{k}: {r}");
        }
    } else if let Ok(b) = serde_json::from_str::<BenchReport>(&text) {
        println!("{b}");
    } else {
        return Err(Error::parse(
            path.display().to_string(),
            "not a train, verification, attack or bench report",
        ));
    }
    Ok(EXIT_OK)
}
