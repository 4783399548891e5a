use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use ece_explain::ece::{EceParams, DEFAULT_ASSOC_P_THRESHOLD, DEFAULT_COND_SUBSET_SIZE, DEFAULT_EPSILON};
use ece_explain::patterns::{mine_closed_patterns, MiningParams, DEFAULT_MAX_LEN, DEFAULT_MIN_SUPPORT};
use ece_explain::report::{run_global, run_local, write_output, EngineParams, InstanceSelector, OutputFormat, RunConfig};
use ece_explain::structure::{discover_parents, DEFAULT_MAX_ORDER, DEFAULT_P_THRESHOLD};
use ece_explain::testkit::{RandomScmConfig, SimulationTruth, SyntheticScm};
use ece_explain::Error;

#[derive(Parser)]
#[command(name = "ece-explain", version, about = "Explanatory causal effect explanations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rank the extended parent set by average extended effect.
    ExplainGlobal(RunArgs),
    /// Explain the prediction for one instance.
    ExplainLocal {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, conflicts_with = "instance", required_unless_present = "instance")]
        row: Option<usize>,
        #[arg(long)]
        instance: Option<PathBuf>,
    },
    /// Print the discovered parents of the target.
    Discover(RunArgs),
    /// Print the closed frequent patterns.
    Mine(RunArgs),
    /// Sample a random binary causal model.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    schema: Option<PathBuf>,
    #[arg(long)]
    target: String,
    #[arg(long = "p-value", default_value_t = DEFAULT_P_THRESHOLD)]
    p_value: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ORDER)]
    max_order: usize,
    #[arg(long, default_value_t = DEFAULT_MIN_SUPPORT)]
    min_support: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_LEN)]
    max_len: usize,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    #[arg(long, default_value_t = DEFAULT_COND_SUBSET_SIZE)]
    cond_size: usize,
    #[arg(long = "assoc-p", default_value_t = DEFAULT_ASSOC_P_THRESHOLD)]
    assoc_p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "json")]
    format: OutputFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn config(&self) -> RunConfig {
        RunConfig {
            data: self.data.clone(),
            schema: self.schema.clone(),
            target: self.target.clone(),
            params: EngineParams {
                p_threshold: self.p_value,
                max_order: self.max_order,
                mining: MiningParams {
                    min_support: self.min_support,
                    max_len: self.max_len,
                    exclude_same_group: true,
                },
                ece: EceParams {
                    epsilon: self.epsilon,
                    cond_subset_size: self.cond_size,
                    assoc_p_threshold: self.assoc_p,
                },
            },
            seed: self.seed,
            format: self.format,
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 10)]
    nodes: usize,
    #[arg(long, default_value_t = 3)]
    parents: usize,
    #[arg(long, default_value_t = 10_000)]
    n_rows: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_data: PathBuf,
    #[arg(long)]
    out_truth: PathBuf,
}

fn json_bytes(v: &serde_json::Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    s.into_bytes()
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::ExplainGlobal(args) => {
            let config = args.config();
            let report = run_global(&config)?;
            write_output(&report.render(config.format), args.out.as_deref())
        }
        Command::ExplainLocal { run, row, instance } => {
            let config = run.config();
            let selector = match (row, instance) {
                (Some(r), _) => InstanceSelector::Row(r),
                (None, Some(p)) => InstanceSelector::File(p),
                (None, None) => unreachable!("clap requires --row or --instance"),
            };
            let report = run_local(&config, &selector)?;
            write_output(&report.render(config.format), run.out.as_deref())
        }
        Command::Discover(args) => {
            let config = args.config();
            config.params.validate()?;
            let ds = config.load()?;
            let pa = discover_parents(&ds, config.params.p_threshold, config.params.max_order);
            let names: Vec<&str> = pa.iter().map(|c| ds.column(c).name.as_str()).collect();
            let v = json!({
                "target": ds.outcome_name(),
                "parents": names,
                "p_value": pa.p_threshold,
                "max_order": pa.max_order,
            });
            write_output(&json_bytes(&v), args.out.as_deref())
        }
        Command::Mine(args) => {
            let config = args.config();
            config.params.validate()?;
            let ds = config.load()?;
            let patterns = mine_closed_patterns(&ds, &config.params.mining);
            let list: Vec<serde_json::Value> = patterns
                .iter()
                .map(|p| {
                    json!({
                        "members": p.literals.iter().map(|l| json!({
                            "column": ds.column(l.column).name,
                            "value": l.value as u8,
                        })).collect::<Vec<_>>(),
                        "support": p.support,
                    })
                })
                .collect();
            let v = json!({
                "min_support": config.params.mining.min_support,
                "max_len": config.params.mining.max_len,
                "patterns": list,
            });
            write_output(&json_bytes(&v), args.out.as_deref())
        }
        Command::Simulate(args) => {
            let scm = SyntheticScm::random(&RandomScmConfig::new(args.nodes, args.parents, args.seed))?;
            let ds = scm.sample(args.n_rows);
            ds.write_csv(&args.out_data)?;
            let truth = SimulationTruth::of(&scm)?;
            let bytes = json_bytes(&serde_json::to_value(&truth)?);
            write_output(&bytes, Some(&args.out_truth))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_io() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
