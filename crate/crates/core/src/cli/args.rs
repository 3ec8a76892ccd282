use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::config::{RunConfig, VerifyConfig};

#[derive(Debug, Parser)]
#[command(name = "monocert", version, about = "Train and certify partially monotone ReLU networks")]
pub struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train with the monotonicity penalty until the network certifies.
    Train(TrainArgs),
    /// Certify a saved model over the unit box.
    Verify(VerifyArgs),
    /// Search for monotonicity violations around given points.
    Attack(AttackArgs),
    /// Verification-time curve and the synthetic benchmark family.
    Bench(BenchArgs),
    /// Print a saved report as a table.
    Report(ReportArgs),
}

/// Solver settings shared by every command that verifies.
#[derive(Debug, Clone, Default, Args)]
pub struct BudgetArgs {
    /// Branch-and-bound node limit per program.
    #[arg(long)]
    pub max_nodes: Option<u64>,
    /// Wall-time limit per program, in seconds.
    #[arg(long)]
    pub time_limit: Option<f64>,
    #[arg(long)]
    pub gap_tolerance: Option<f64>,
    /// Solve every program to optimality instead of stopping at bound 0.
    #[arg(long)]
    pub no_early_stop: bool,
    /// Intervals per unit for smooth activations.
    #[arg(long)]
    pub partition: Option<usize>,
    /// Worker threads for verification.
    #[arg(long)]
    pub threads: Option<usize>,
}

impl BudgetArgs {
    pub fn apply(&self, v: &mut VerifyConfig) {
        if let Some(n) = self.max_nodes {
            v.max_nodes = n;
        }
        if let Some(t) = self.time_limit {
            v.time_limit_secs = t;
        }
        if let Some(g) = self.gap_tolerance {
            v.gap_tolerance = g;
        }
        if self.no_early_stop {
            v.early_stop = false;
        }
        if let Some(p) = self.partition {
            v.partition = p;
        }
        if self.threads.is_some() {
            v.threads = self.threads;
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Run configuration (TOML); flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory for the model and reports.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for data, initialization and training.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub lambda_init: Option<f64>,
    #[arg(long)]
    pub lambda_factor: Option<f64>,
    /// Penalty margin: sampled gradients below it are penalized.
    #[arg(long)]
    pub margin: Option<f64>,
    #[arg(long)]
    pub max_escalations: Option<usize>,
    /// Hidden widths, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub hidden: Option<Vec<usize>>,
    /// Cut the second half of each hidden layer off the monotone inputs.
    #[arg(long)]
    pub half_masking: bool,
    /// Start from a saved model instead of a random one.
    #[arg(long)]
    pub init_model: Option<PathBuf>,
    #[command(flatten)]
    pub budget: BudgetArgs,
    /// Print the report as JSON instead of a table.
    #[arg(long)]
    pub json: bool,
}

impl TrainArgs {
    pub fn apply(&self, c: &mut RunConfig) {
        if let Some(o) = &self.out {
            c.output_dir = o.clone();
        }
        if let Some(s) = self.seed {
            c.seed = s;
            c.train.seed = s;
        }
        let t = &mut c.train;
        macro_rules! set {
            ($($field:ident => $target:expr),*) => {$(
                if let Some(v) = self.$field.clone() { $target = v; }
            )*};
        }
        set!(epochs => t.epochs, batch_size => t.batch_size, learning_rate => t.learning_rate,
             lambda_init => t.lambda_init, lambda_factor => t.lambda_factor, margin => t.margin_b,
             max_escalations => t.max_escalations, hidden => c.model.hidden);
        if self.half_masking {
            c.model.half_masking = true;
        }
        if self.init_model.is_some() {
            c.model.init_model = self.init_model.clone();
        }
        self.budget.apply(&mut c.verify);
    }
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Model file.
    pub model: PathBuf,
    #[command(flatten)]
    pub budget: BudgetArgs,
    /// Write the JSON report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct AttackArgs {
    /// Model file.
    pub model: PathBuf,
    /// Point to attack, comma separated; may be repeated.
    #[arg(long, value_delimiter = ',', num_args = 1.., action = clap::ArgAction::Append)]
    pub point: Vec<f64>,
    /// Dataset file (JSON) whose rows are attacked.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Attack at most this many dataset rows.
    #[arg(long)]
    pub max_points: Option<usize>,
    #[command(flatten)]
    pub budget: BudgetArgs,
    /// Write the results (JSON) here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Hidden widths of the verification-time curve.
    #[arg(long, value_delimiter = ',', default_value = "20,40,60,80,100")]
    pub widths: Vec<usize>,
    /// Networks per width.
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    /// Training epochs for each timing network.
    #[arg(long, default_value_t = 20)]
    pub train_epochs: usize,
    /// Skip the verification-time curve.
    #[arg(long)]
    pub no_timing: bool,
    /// Also sweep the 27 synthetic functions.
    #[arg(long)]
    pub family: bool,
    /// Run configuration used for the family sweep.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory for timing.csv, family.csv and bench.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub budget: BudgetArgs,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// A train, verification, attack or bench report (JSON).
    pub file: PathBuf,
}
