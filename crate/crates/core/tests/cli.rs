use std::fs;
use std::path::Path;

use monocert::certify::AttackResult;
use monocert::cli::{run, EXIT_ERROR, EXIT_OK, EXIT_UNDECIDED, EXIT_VIOLATION};
use monocert::model::{io, MlpNetwork, MonotoneSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .display()
        .to_string()
}

fn cli(args: &[&str]) -> i32 {
    run(std::iter::once("monocert").chain(args.iter().copied()))
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn verify_exit_codes() {
    assert_eq!(cli(&["verify", &fixture("nonnegative.json")]), EXIT_OK);
    assert_eq!(cli(&["verify", &fixture("negated_identity.json")]), EXIT_VIOLATION);

    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("wide.json");
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let net = MlpNetwork::random(4, &[30], MonotoneSpec::increasing(vec![0, 1, 2, 3]).unwrap(), &mut rng).unwrap();
    io::save(&net, &model).unwrap();
    assert_eq!(cli(&["verify", path(&model), "--max-nodes", "1"]), EXIT_UNDECIDED);
}

#[test]
fn attack_reports_witness() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("attack.json");
    let code = cli(&["attack", &fixture("negated_identity.json"), "--point", "1", "--point", "0", "--out", path(&out)]);
    assert_eq!(code, EXIT_VIOLATION);
    let results: Vec<AttackResult> = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(results.len(), 2);
    assert_eq!(results[0].x_adv, Some(vec![0.0]));
    assert!(!results[1].found && results[1].proven);
    assert_eq!(cli(&["report", path(&out)]), EXIT_OK);

    let code = cli(&["attack", &fixture("nonnegative.json"), "--point", "1,1,1"]);
    assert_eq!(code, EXIT_OK);
}

#[test]
fn bad_invocations_fail() {
    assert_eq!(cli(&["verify", "/nonexistent/model.json"]), EXIT_ERROR);
    assert_eq!(cli(&["verify", &fixture("nonnegative.json"), "--max-nodes", "0"]), EXIT_ERROR);
    assert_eq!(cli(&["attack", &fixture("nonnegative.json"), "--point", "1,1"]), EXIT_ERROR);
    assert_eq!(cli(&["train", "--learning-rate=-1"]), EXIT_ERROR);
    assert_eq!(cli(&["frobnicate"]), EXIT_ERROR);
}

fn train_into(dir: &Path, extra: &[&str]) -> i32 {
    let mut args = vec!["train", "--out", path(dir), "--epochs", "15", "--hidden", "12", "--seed", "3"];
    args.extend_from_slice(extra);
    cli(&args)
}

#[test]
fn train_writes_artifacts_and_reruns_identically() {
    let root = tempfile::tempdir().unwrap();
    let first = root.path().join("first");
    assert_eq!(train_into(&first, &[]), EXIT_OK);
    for f in ["run_config.toml", "model.json", "train_report.json", "metrics.json", "loss_curve.csv"] {
        assert!(first.join(f).is_file(), "{f} missing");
    }
    let curve = fs::read_to_string(first.join("loss_curve.csv")).unwrap();
    assert!(curve.starts_with("epoch,task_loss,penalty,lambda\n"));
    assert_eq!(cli(&["verify", path(&first.join("model.json"))]), EXIT_OK);
    assert_eq!(cli(&["report", path(&first.join("train_report.json"))]), EXIT_OK);

    // Re-running from the saved configuration reproduces the model exactly.
    let second = root.path().join("second");
    let config = first.join("run_config.toml");
    assert_eq!(cli(&["train", "--config", path(&config), "--out", path(&second)]), EXIT_OK);
    assert_eq!(
        fs::read(first.join("model.json")).unwrap(),
        fs::read(second.join("model.json")).unwrap()
    );
}
