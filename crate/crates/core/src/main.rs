use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bemap::experiment::{run_experiment, run_probe, run_report, run_theory, ExperimentConfig, ProbeOutcome};
use bemap::sampling::SamplerMode;

#[derive(Parser, Debug)]
#[command(name = "bemap", version, about = "Balance-aware neighbor sampling for fair GCNs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML experiment configuration; defaults apply to missing keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Run a single seed instead of the configured list.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Run a single sampler mode instead of the configured list.
    #[arg(long, global = true)]
    sampler: Option<SamplerMode>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Train every configured sampler mode and seed; write summary tables.
    Train,
    /// Probe first-layer MLP and GCN embeddings for the sensitive attribute.
    Probe,
    /// Run the Monte-Carlo theory checks.
    Theory,
    /// Relative ΔSP/ΔEO reductions from an existing summary.
    Report,
}

const EXIT_INVALID: u8 = 1;
const EXIT_CHECK_FAILED: u8 = 2;

fn config(cli: &Cli) -> bemap::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.trainer.seeds = vec![s];
    }
    if let Some(m) = cli.sampler {
        cfg.sampler.modes = vec![m];
    }
    if let Some(o) = &cli.out {
        cfg.outputs.dir = o.clone();
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> bemap::Result<bool> {
    let cfg = config(cli)?;
    match cli.command {
        Command::Train => {
            let (rows, _) = run_experiment(&cfg)?;
            for r in rows {
                let f = |m: Option<bemap::experiment::MeanStd>| {
                    m.map(|m| format!("{:.4} ± {:.4}", m.mean, m.std)).unwrap_or_else(|| "n/a".into())
                };
                println!(
                    "{:<8} acc {}  auc {}  ΔSP {}  ΔEO {}",
                    r.mode.as_str(),
                    f(r.acc),
                    f(r.auc),
                    f(r.delta_sp),
                    f(r.delta_eo)
                );
            }
            Ok(true)
        }
        Command::Probe => {
            let out = run_probe(&cfg)?;
            let show = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "n/a".into());
            println!("probe accuracy in bins [0, 0.3):");
            println!("  mlp {}", show(ProbeOutcome::mean_below(&out.mlp, 0.3)));
            println!("  gcn {}", show(ProbeOutcome::mean_below(&out.gcn, 0.3)));
            Ok(true)
        }
        Command::Theory => {
            let checks = run_theory(&cfg)?;
            for c in &checks {
                println!(
                    "{} {:<22} predicted {:.6}  empirical {:.6}  tolerance {:.3e}{}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.claim,
                    c.predicted,
                    c.empirical,
                    c.tolerance,
                    c.warning.as_ref().map(|w| format!("  ({w})")).unwrap_or_default()
                );
            }
            Ok(checks.iter().all(|c| c.passed))
        }
        Command::Report => {
            for r in run_report(&cfg)? {
                let f = |v: Option<f64>| v.map(|x| format!("{x:.1}%")).unwrap_or_else(|| "n/a".into());
                println!(
                    "{:<8} ΔSP reduction {}  ΔEO reduction {}",
                    r.mode.as_str(),
                    f(r.delta_sp_reduction),
                    f(r.delta_eo_reduction)
                );
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_CHECK_FAILED),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INVALID)
        }
    }
}
