use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use medgnn::data::Dataset;
use medgnn::experiment::{emit_curves, round_data, run_rounds, train_one, write_atomic, ExperimentConfig, Resources, Task};
use medgnn::nn::{checkpoint, Activation};
use medgnn::optim::evaluate;
use medgnn::{Error, Result};

/// Graph neural networks with median activations.
#[derive(Parser)]
#[command(name = "medgnn", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write round data (graph edge list, train and test datasets).
    GenData(Common),
    /// Train one architecture on round data; writes a checkpoint and curves.
    Train(Common),
    /// Evaluate a checkpoint on a dataset file.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
    },
    /// Train every configured architecture over all rounds.
    Compare(Common),
    /// Build the target author's word adjacency network as an edge list.
    BuildWan(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Base seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Activation, e.g. `relu`, `med:1`, `dyn-med:2` (overrides the config).
    #[arg(long)]
    activation: Option<Activation>,
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::load(&self.config)?;
        cfg.apply_overrides(self.seed, self.activation, self.out.clone());
        cfg.validate()?;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::GenData(c) => gen_data(&c.load()?),
        Command::Train(c) => train(&c.load()?),
        Command::Eval { checkpoint, dataset } => eval(&checkpoint, &dataset),
        Command::Compare(c) => {
            let cfg = c.load()?;
            let cmp = run_rounds(&cfg)?;
            cmp.write(&cfg.out_dir)?;
            print!("{}", cmp.summary_csv());
            Ok(())
        }
        Command::BuildWan(c) => build_wan(&c.load()?),
    }
}

fn out_dir(cfg: &ExperimentConfig) -> Result<&Path> {
    fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::Io {
        path: cfg.out_dir.clone(),
        source: e,
    })?;
    Ok(&cfg.out_dir)
}

fn gen_data(cfg: &ExperimentConfig) -> Result<()> {
    let data = round_data(cfg, &Resources::load(cfg)?, 0)?;
    let dir = out_dir(cfg)?;
    write_atomic(&dir.join("graph.edges"), &data.graph.to_edge_list())?;
    write_atomic(&dir.join("train.dataset"), &data.train.to_text())?;
    write_atomic(&dir.join("test.dataset"), &data.test.to_text())?;
    println!("{}", serde_json::json!({
        "train_samples": data.train.len(),
        "test_samples": data.test.len(),
        "nodes": data.graph.n_nodes(),
        "sha256": data.fingerprint(),
    }));
    Ok(())
}

fn train(cfg: &ExperimentConfig) -> Result<()> {
    let data = round_data(cfg, &Resources::load(cfg)?, 0)?;
    let ctx = data.context(cfg)?;
    let run = train_one(cfg, &data, ctx, cfg.activations[0])?;
    let dir = out_dir(cfg)?;
    write_atomic(&dir.join("model.ckpt"), &checkpoint::to_string(&run.model))?;
    write_atomic(
        &dir.join("train.dataset"),
        &data.train.subset(&run.report.train_indices).to_text(),
    )?;
    write_atomic(&dir.join("test.dataset"), &data.test.to_text())?;
    write_atomic(&dir.join("report.csv"), &run.report.to_csv())?;
    emit_curves(&run.report, &dir.join("curves.csv"))?;
    println!("{}", serde_json::json!({
        "activation": cfg.activations[0].to_string(),
        "conv_params": run.model.params().conv_param_count(),
        "train_loss": run.report.final_train.loss,
        "train_accuracy": run.report.final_train.accuracy,
        "test_loss": run.test.loss,
        "test_accuracy": run.test.accuracy,
    }));
    Ok(())
}

fn eval(ckpt: &Path, dataset: &Path) -> Result<()> {
    let text = fs::read_to_string(ckpt).map_err(|e| Error::Io {
        path: ckpt.to_path_buf(),
        source: e,
    })?;
    let model = checkpoint::from_str(&text)?;
    let file = fs::File::open(dataset).map_err(|e| Error::Io {
        path: dataset.to_path_buf(),
        source: e,
    })?;
    let ds = Dataset::from_reader(BufReader::new(file))?;
    let m = evaluate(&model, &ds)?;
    println!("{}", serde_json::json!({ "loss": m.loss, "accuracy": m.accuracy }));
    Ok(())
}

fn build_wan(cfg: &ExperimentConfig) -> Result<()> {
    if cfg.task != Task::Authorship {
        return Err(Error::Config {
            field: "task".into(),
            msg: "build-wan needs an authorship config".into(),
        });
    }
    let res = Resources::load(cfg)?;
    let data = round_data(cfg, &res, 0)?;
    let dir = out_dir(cfg)?;
    write_atomic(&dir.join("wan.edges"), &data.graph.to_edge_list())?;
    if let Resources::Authorship { spec, .. } = &res {
        let mut words = spec.function_words().join("\n");
        words.push('\n');
        write_atomic(&dir.join("nodes.txt"), &words)?;
    }
    println!("{}", serde_json::json!({
        "nodes": data.graph.n_nodes(),
        "arcs": data.graph.edges().len(),
    }));
    Ok(())
}
