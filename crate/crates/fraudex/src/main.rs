use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fraudex::commands::{self, BackgroundChoice, StudyKind};
use fraudex::config::{FileConfig, Overrides, RunConfig};
use fraudex::core::explain::Method;
use fraudex::core::models::ModelKind;

/// Fraud-model training and explanation benchmarks.
#[derive(Parser)]
#[command(name = "fraudex", version)]
struct Cli {
    /// TOML run configuration. Without it, built-in synthetic defaults apply.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `seed` from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides `out` from the config; all outputs go here.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the configured models and report validation metrics.
    Train,
    /// Re-evaluate saved models on the validation split.
    Evaluate,
    /// Explain one prediction.
    Explain {
        #[arg(long)]
        model: ModelKind,
        /// Row id; defaults to a seed-selected validation fraud row.
        #[arg(long)]
        instance: Option<u64>,
        #[arg(long, default_value = "kernel_shap")]
        method: Method,
        #[arg(long, value_enum, default_value = "all")]
        background: BackgroundChoice,
    },
    /// Run the agreement, sensitivity and timing studies.
    Study {
        #[arg(value_enum, default_value = "all")]
        which: StudyKind,
    },
    /// Write the configured synthetic dataset as CSV.
    Synth,
}

fn load(cli: &Cli) -> anyhow::Result<RunConfig> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    Ok(file.validate(&Overrides { seed: cli.seed, out: cli.out.clone() })?)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let cfg = load(&cli)?;
    match cli.command {
        Command::Train | Command::Evaluate => {
            let rows = match cli.command {
                Command::Train => commands::cmd_train(&cfg)?,
                _ => commands::cmd_evaluate(&cfg)?,
            };
            println!("{:<22} {:>9} {:>9} {:>9} {:>9}", "model", "precision", "recall", "f1", "auc");
            for r in rows {
                let e = &r.report;
                let auc = e.auc.map_or("-".to_string(), |a| format!("{a:.3}"));
                println!("{:<22} {:>9.3} {:>9.3} {:>9.3} {:>9}", r.model_kind.slug(), e.precision, e.recall, e.f1, auc);
            }
        }
        Command::Explain { model, instance, method, background } => {
            let ex = commands::cmd_explain(&cfg, model, instance, method, background)?;
            let a = &ex.attribution;
            println!(
                "instance {}  predicted {:.6}  base {:.6}  sum(phi) {:.6}",
                ex.instance_id,
                a.predicted_value,
                a.base_value,
                a.phi.iter().sum::<f64>()
            );
            for e in &ex.ranked.entries {
                println!("{:>3}  {:<28} {:+.6}", e.rank, e.feature_name, e.phi);
            }
            println!("wrote {}", ex.path.display());
        }
        Command::Study { which } => {
            let report = commands::cmd_study(&cfg, which)?;
            for a in &report.agreement {
                println!("agreement  {:<20} {:<12} vs {:<24} overlap {}", a.model_kind.slug(), a.explainer, a.reference, a.overlap_at_10);
            }
            for s in &report.sensitivity {
                let tag = if s.stable { "stable" } else { "sensitive" };
                println!("background {:<20} overlap {:>2}  {tag}", s.model_kind.slug(), s.overlap_at_10);
            }
            for t in &report.timing {
                let size = t.background_size.map_or("-".into(), |s| s.to_string());
                match (t.wall_seconds, &t.skipped) {
                    (Some(w), _) => println!("timing     {:<20} {:<12} s={size:<5} {w:.4}s", t.model_kind.slug(), t.explainer),
                    (None, reason) => println!(
                        "timing     {:<20} {:<12} s={size:<5} skipped: {}",
                        t.model_kind.slug(),
                        t.explainer,
                        reason.as_deref().unwrap_or("")
                    ),
                }
            }
            println!("wrote {}", cfg.out.join("report.json").display());
        }
        Command::Synth => {
            let path = commands::cmd_synth(&cfg)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
