use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use rcmlab::{ExperimentConfig, Kind, LabError, Preset};

/// Monte Carlo and exact experiments on sparse random 0/1 matrices with
/// fixed row sums. Writes config.json, trials.csv, summary.json and
/// plots/*.svg to the output directory.
#[derive(Debug, Parser)]
#[command(name = "rcmlab", version)]
struct Cli {
    kind: Kind,
    /// JSON config; flags given on the command line override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    /// Row sums, comma separated.
    #[arg(long, value_delimiter = ',')]
    d: Option<Vec<usize>>,
    #[arg(long, allow_hyphen_values = true)]
    z_re: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    z_im: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    a1: Option<f64>,
    #[arg(long)]
    a2: Option<f64>,
    #[arg(long)]
    a3: Option<f64>,
    #[arg(long)]
    c1: Option<f64>,
    #[arg(long)]
    c2: Option<f64>,
    #[arg(long)]
    singular_threshold: Option<f64>,
    #[arg(long)]
    coverage_tol: Option<f64>,
}

fn build_config(cli: Cli) -> Result<ExperimentConfig, LabError> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => {
            let missing = |name: &str| LabError::Config(format!("--{name} is required without --config"));
            let n = cli.n.ok_or_else(|| missing("n"))?;
            let d = cli.d.clone().ok_or_else(|| missing("d"))?;
            let out = cli.out.clone().ok_or_else(|| missing("out"))?;
            ExperimentConfig::new(cli.kind, n, d, out)
        }
    };
    cfg.kind = cli.kind;
    macro_rules! set {
        ($($f:ident),*) => { $( if let Some(v) = cli.$f { cfg.$f = v; } )* };
    }
    macro_rules! set_opt {
        ($($f:ident),*) => { $( if cli.$f.is_some() { cfg.$f = cli.$f; } )* };
    }
    set!(n, d, z_re, z_im, trials, seed, out, preset);
    set_opt!(k, eps, p, delta, rho, a1, a2, a3, c1, c2, singular_threshold, coverage_tol);
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = build_config(cli).and_then(|cfg| rcmlab::run(&cfg));
    match result {
        Ok(bundle) => {
            println!("{} trials written to {}", bundle.trials, bundle.dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("rcmlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
