use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use sparse_td3::harness::{run_experiment, ExperimentConfig};

/// Train dense, static-sparse or dynamic-sparse TD3 agents and write
/// learning curves plus a cost summary.
#[derive(Debug, Parser)]
#[command(name = "sparse-td3", version)]
struct Cli {
    /// Experiment file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output directory for the CSVs and summary.json.
    #[arg(long)]
    out: PathBuf,

    /// Comma-separated seeds.
    #[arg(long)]
    seeds: Option<String>,

    /// dense, static or dynamic; comma-separate to run several.
    #[arg(long)]
    mode: Option<String>,

    /// pendulum or mountaincar.
    #[arg(long)]
    env: Option<String>,

    #[arg(long)]
    steps: Option<u64>,

    #[arg(long = "eval-every")]
    eval_every: Option<u64>,

    /// Named preset applied before the config file's own keys.
    #[arg(long)]
    preset: Option<String>,
}

fn build_config(cli: &Cli) -> sparse_td3::Result<ExperimentConfig> {
    let mut text = match &cli.config {
        Some(path) => std::fs::read_to_string(path).map_err(|e| sparse_td3::Error::Io {
            path: path.clone(),
            source: e,
        })?,
        None => String::new(),
    };
    // command-line values win over the file
    let overrides = [
        ("seeds", cli.seeds.clone()),
        ("mode", cli.mode.clone()),
        ("env", cli.env.clone()),
        ("steps", cli.steps.map(|v| v.to_string())),
        ("eval_every", cli.eval_every.map(|v| v.to_string())),
        ("preset", cli.preset.clone()),
    ];
    let mut cfg_lines: Vec<String> = text
        .lines()
        .filter(|line| {
            let key = line.split('#').next().unwrap_or("").split('=').next().unwrap_or("").trim();
            !overrides.iter().any(|(k, v)| v.is_some() && *k == key)
        })
        .map(str::to_string)
        .collect();
    for (k, v) in &overrides {
        if let Some(v) = v {
            cfg_lines.push(format!("{k} = {v}"));
        }
    }
    text = cfg_lines.join("\n");
    ExperimentConfig::parse(&text)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = build_config(&cli).and_then(|cfg| run_experiment(&cfg, &cli.out));
    match result {
        Ok(summary) => {
            for r in &summary.runs {
                println!(
                    "{:<8} {:<12} seed {:<3} final {:>9.2}  connections {:>7}  flops ratio {:.3}",
                    r.mode, r.env, r.seed, r.final_performance, r.sparsity.total, r.flops.ratio
                );
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
