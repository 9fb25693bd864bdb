use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dimp_cli::experiment::update_batch;
use dimp_cli::output::write_outputs;
use dimp_cli::synthetic::preferential_attachment;
use dimp_cli::{load_graph, run_dynamic, run_static, CliError, ExperimentConfig};
use dimp_core::graph::{assign_wc_weights, load_edge_list_path, write_batch_csv, write_edge_list};
use dimp_core::oracle::{estimate_influence_mc, SeedSet};
use dimp_core::rng::stream;
use dimp_core::{Error, Graph, NodeId};

#[derive(Parser)]
#[command(
    name = "dimp",
    version,
    about = "Influence maximization on graphs with batched weight updates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rebuild the RR collection from scratch at every snapshot.
    RunStatic(RunArgs),
    /// Carry the RR collection across snapshots by mixing.
    RunDynamic(RunArgs),
    /// Write random update batches as updates_<n>.csv.
    GenUpdates(RunArgs),
    /// Monte Carlo influence of a seed list.
    Evaluate(EvaluateArgs),
    /// Write a preferential-attachment graph as a SNAP edge list.
    GenGraph(GenGraphArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides graph_path.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    /// Overrides master_seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides update_counts; comma separated.
    #[arg(long, value_delimiter = ',')]
    updates: Option<Vec<usize>>,
    /// Overrides output_dir.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Original node ids separated by whitespace; '#' starts a comment.
    #[arg(long)]
    seeds: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    r: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct GenGraphArgs {
    #[arg(long)]
    nodes: usize,
    #[arg(long, default_value_t = 10)]
    out_degree: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

impl RunArgs {
    fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(g) = &self.graph {
            cfg.graph_path = g.clone();
        }
        if let Some(k) = self.k {
            cfg.k = k;
        }
        if let Some(s) = self.seed {
            cfg.master_seed = s;
        }
        if let Some(u) = &self.updates {
            cfg.update_counts = u.clone();
        }
        if let Some(o) = &self.out {
            cfg.output_dir = o.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::RunStatic(args) => {
            let cfg = args.resolve()?;
            let g = load_graph(&cfg)?;
            let records = run_static(&cfg, &g)?;
            let path = write_outputs(&cfg.output_dir, "run-static", &cfg, &records)?;
            println!("{} records written to {}", records.len(), path.display());
        }
        Command::RunDynamic(args) => {
            let cfg = args.resolve()?;
            let g = load_graph(&cfg)?;
            let collections = cfg
                .save_collections
                .then(|| cfg.output_dir.join("collections"));
            let records = run_dynamic(&cfg, &g, collections.as_deref())?;
            let path = write_outputs(&cfg.output_dir, "run-dynamic", &cfg, &records)?;
            println!("{} records written to {}", records.len(), path.display());
        }
        Command::GenUpdates(args) => {
            let cfg = args.resolve()?;
            let g = load_graph(&cfg)?;
            fs::create_dir_all(&cfg.output_dir).map_err(|e| CliError::io(&cfg.output_dir, e))?;
            for &n in &cfg.update_counts {
                let batch = update_batch(&cfg, &g, 0, n, 1)?;
                let path = cfg.output_dir.join(format!("updates_{n}.csv"));
                write_batch_csv(&g, &batch, create(&path)?)?;
                println!("{}", path.display());
            }
        }
        Command::Evaluate(args) => {
            if !args.graph.is_file() {
                return Err(not_found(&args.graph));
            }
            let g = assign_wc_weights(&load_edge_list_path(&args.graph)?.graph);
            let seeds = read_seeds(&g, &args.seeds)?;
            let est = estimate_influence_mc(&g, &seeds, args.r, args.seed)?;
            println!(
                "{}",
                serde_json::json!({"mean": est.mean, "stderr": est.stderr, "r": est.r, "k": seeds.len()})
            );
        }
        Command::GenGraph(args) => {
            let g =
                preferential_attachment(args.nodes, args.out_degree, &mut stream(args.seed, &[]))?;
            write_edge_list(&g, create(&args.out)?)?;
            println!(
                "{} nodes, {} edges written to {}",
                g.n(),
                g.edge_count(),
                args.out.display()
            );
        }
    }
    Ok(())
}

fn not_found(path: &Path) -> CliError {
    CliError::io(
        path,
        std::io::Error::new(std::io::ErrorKind::NotFound, "file not found"),
    )
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

fn read_seeds(g: &Graph, path: &Path) -> Result<SeedSet, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut nodes: Vec<NodeId> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line.split_whitespace() {
            let id: u64 = tok.parse().map_err(|_| {
                CliError::Data(Error::Parse {
                    line: i + 1,
                    message: format!("bad node id {tok:?}"),
                })
            })?;
            nodes.push(g.node_by_original(id).ok_or(Error::UnknownNode(id))?);
        }
    }
    if nodes.is_empty() {
        return Err(CliError::Argument(format!("{}: no seeds", path.display())));
    }
    let k = nodes.len();
    Ok(SeedSet::new(nodes, k, g.n())?)
}
