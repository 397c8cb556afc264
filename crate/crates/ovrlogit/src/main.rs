use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use ovrlogit::pipeline::{run_pipeline, sweep_c, RunConfig, SolverSelection};

#[derive(Parser)]
#[command(
    name = "ovrlogit",
    version,
    about = "One-vs-Rest logistic regression: train, evaluate, and report"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full train/evaluate/report pipeline and write the artifact tree
    Run(CommonArgs),
    /// Train the L1 solver across the C grid and print the sparsity frontier
    SweepC(CommonArgs),
}

/// Every flag is optional here; unset values fall back to the config file
/// (when given), then to built-in defaults.
#[derive(Args, Default)]
struct CommonArgs {
    /// CSV dataset with numeric feature columns and one integer label column
    #[arg(long)]
    data: Option<PathBuf>,
    /// Name of the label column
    #[arg(long)]
    label_column: Option<String>,
    /// Split seed
    #[arg(long)]
    seed: Option<u64>,
    /// Fraction of each class held out for testing
    #[arg(long)]
    test_fraction: Option<f64>,
    /// Comma-separated subset of gd,reference,l1
    #[arg(long)]
    solvers: Option<String>,
    /// Gradient-descent learning rate
    #[arg(long)]
    lr: Option<f64>,
    /// Gradient-descent iteration count
    #[arg(long)]
    iters: Option<usize>,
    /// Inverse L1 regularization strength
    #[arg(long)]
    c: Option<f64>,
    /// Comma-separated C values for sweep-c
    #[arg(long)]
    c_grid: Option<String>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Flat key=value config file; explicit flags override its entries
    #[arg(long)]
    config: Option<PathBuf>,
}

impl CommonArgs {
    /// Later sources win only where they actually set a value.
    fn overlay(self, over: CommonArgs) -> CommonArgs {
        CommonArgs {
            data: over.data.or(self.data),
            label_column: over.label_column.or(self.label_column),
            seed: over.seed.or(self.seed),
            test_fraction: over.test_fraction.or(self.test_fraction),
            solvers: over.solvers.or(self.solvers),
            lr: over.lr.or(self.lr),
            iters: over.iters.or(self.iters),
            c: over.c.or(self.c),
            c_grid: over.c_grid.or(self.c_grid),
            out: over.out.or(self.out),
            config: None,
        }
    }
}

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
fn parse_config_file(path: &PathBuf) -> Result<CommonArgs> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("[config] cannot read {}", path.display()))?;
    let mut args = CommonArgs::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!(
                "[config] {}:{}: expected key=value, got '{line}'",
                path.display(),
                lineno + 1
            );
        };
        let key = key.trim();
        let value = value.trim();
        let parse_err = |what: &str| {
            format!(
                "[config] {}:{}: cannot parse {what} from '{value}'",
                path.display(),
                lineno + 1
            )
        };
        match key {
            "data" => args.data = Some(PathBuf::from(value)),
            "label_column" => args.label_column = Some(value.to_owned()),
            "seed" => args.seed = Some(value.parse().with_context(|| parse_err("an integer"))?),
            "test_fraction" => {
                args.test_fraction = Some(value.parse().with_context(|| parse_err("a number"))?)
            }
            "solvers" => args.solvers = Some(value.to_owned()),
            "lr" => args.lr = Some(value.parse().with_context(|| parse_err("a number"))?),
            "iters" => {
                args.iters = Some(value.parse().with_context(|| parse_err("an integer"))?)
            }
            "c" => args.c = Some(value.parse().with_context(|| parse_err("a number"))?),
            "c_grid" => args.c_grid = Some(value.to_owned()),
            "out" => args.out = Some(PathBuf::from(value)),
            other => bail!(
                "[config] {}:{}: unknown key '{other}'",
                path.display(),
                lineno + 1
            ),
        }
    }
    Ok(args)
}

/// Defaults ← config file ← flags, then into a concrete RunConfig.
fn build_config(mut args: CommonArgs) -> Result<RunConfig> {
    if let Some(path) = args.config.take() {
        let from_file = parse_config_file(&path)?;
        args = from_file.overlay(args);
    }
    let Some(data) = args.data else {
        bail!("[config] no data path given (use --data or a config file)");
    };
    let mut cfg = RunConfig::new(data);
    if let Some(v) = args.label_column {
        cfg.label_column = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.test_fraction {
        cfg.test_fraction = v;
    }
    if let Some(list) = args.solvers {
        cfg.solvers = SolverSelection::parse(&list).map_err(|e| anyhow::anyhow!("[config] {e}"))?;
    }
    if let Some(v) = args.lr {
        cfg.gd.learning_rate = v;
    }
    if let Some(v) = args.iters {
        cfg.gd.iterations = v;
    }
    if let Some(v) = args.c {
        cfg.l1.c = v;
    }
    if let Some(list) = args.c_grid {
        let mut grid = Vec::new();
        for piece in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            grid.push(
                piece
                    .parse::<f64>()
                    .with_context(|| format!("[config] cannot parse C value '{piece}'"))?,
            );
        }
        cfg.c_grid = grid;
    }
    cfg.output_dir = args.out;
    Ok(cfg)
}

fn do_run(args: CommonArgs) -> Result<()> {
    let cfg = build_config(args)?;
    if cfg.output_dir.is_none() {
        bail!("[config] no output directory given (use --out)");
    }
    let out_dir = cfg.output_dir.clone().unwrap();
    let summary = run_pipeline(&cfg)?;
    println!(
        "wrote {} files to {} (train {}, test {})",
        summary.files_written,
        out_dir.display(),
        summary.train_size,
        summary.test_size
    );
    for o in &summary.outcomes {
        println!(
            "{:<10} mean train acc {:.6}   mean test acc {:.6}   multiclass test acc {:.6}",
            o.tag.as_str(),
            o.mean_train_accuracy,
            o.mean_test_accuracy,
            o.multiclass_test_accuracy
        );
    }
    Ok(())
}

fn do_sweep(args: CommonArgs) -> Result<()> {
    let cfg = build_config(args)?;
    let rows = sweep_c(&cfg)?;
    println!("{:>12} {:>14} {:>19}", "C", "mean_retained", "mean_test_accuracy");
    for row in &rows {
        println!(
            "{:>12.6} {:>14.6} {:>19.6}",
            row.c, row.mean_retained, row.mean_test_accuracy
        );
    }
    if let Some(out) = &cfg.output_dir {
        println!("wrote {}", out.join("c_sweep.csv").display());
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => do_run(args),
        Command::SweepC(args) => do_sweep(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
