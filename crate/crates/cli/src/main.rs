use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use trotterlens::experiments::{emit_outputs, run_steps, run_sweep, ExperimentConfig, OutputFormat, SweepResult};
use trotterlens::interference::{diagnose_orthogonality_default, BoundEngine, BoundKind, TAU_ORTH_REL};
use trotterlens::models::build_model;
use trotterlens::{Error, ProductFormula};

#[derive(Parser)]
#[command(
    name = "trotterlens",
    version,
    about = "Trotter error sweeps, interference checks and bounds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Model inspection.
    Model {
        #[command(subcommand)]
        action: ModelAction,
    },
    /// Run the sweep section of a config and write CSV plus a gnuplot script.
    Sweep(Common),
    /// Run the minimum-step section of a config.
    Steps(Common),
    /// Orthogonality and trace report for the leading error.
    Check(Common),
    /// Empirical error and bounds at the config's single point.
    Bounds(Common),
}

#[derive(Subcommand)]
enum ModelAction {
    /// Print the grouped Hamiltonian.
    Show(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Allow configs marked as extended-runtime.
    #[arg(long)]
    extended: bool,
}

enum Failure {
    Config(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Lib(e) => match e {
                Error::Resource { .. } => 3,
                Error::SearchExhausted { .. } => 4,
                Error::Parse { .. }
                | Error::InvalidParameter(_)
                | Error::InvalidOrder(_)
                | Error::IncompatibleGrouping { .. }
                | Error::UnsupportedSymbolic { .. } => 2,
                _ => 1,
            },
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "{m}"),
            Failure::Lib(e) => write!(f, "{e}"),
        }
    }
}

fn load(common: &Common) -> Result<ExperimentConfig, Failure> {
    let cfg = ExperimentConfig::load(&common.config).map_err(|e| Failure::Config(e.to_string()))?;
    if cfg.extended {
        if !common.extended {
            return Err(Failure::Config(format!(
                "{} is an extended-runtime config; pass --extended to run it",
                common.config.display()
            )));
        }
        eprintln!(
            "warning: {} is an extended-runtime config and may take many hours",
            cfg.name
        );
    }
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Config(format!("thread pool: {e}")))?;
    }
    Ok(cfg)
}

fn product_formula(cfg: &ExperimentConfig) -> Result<(ProductFormula, trotterlens::models::Model), Failure> {
    let model = build_model(&cfg.model)?;
    let pf = ProductFormula::new(model.hamiltonian.clone(), cfg.pf_order)?;
    Ok((pf, model))
}

fn print_fits(result: &SweepResult) {
    for (col, fit) in result.columns.iter().zip(&result.fits) {
        match fit {
            Some(f) => println!(
                "fit {col}: slope {:.4} intercept {:.4} r2 {:.4}",
                f.slope, f.intercept, f.r_squared
            ),
            None => println!("fit {col}: n/a"),
        }
    }
}

fn write_outputs(result: &SweepResult, out: &Path) -> Result<(), Failure> {
    // The CSV was already flushed row by row; rewrite it whole so the file
    // matches the result exactly, then add the plot script.
    for p in emit_outputs(result, out, &[OutputFormat::Csv, OutputFormat::Plotscript])? {
        println!("wrote {}", p.display());
    }
    print_fits(result);
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Model {
            action: ModelAction::Show(common),
        } => {
            let cfg = load(&common)?;
            let model = build_model(&cfg.model)?;
            let ham = &model.hamiltonian;
            println!("model {:?}", cfg.model.model);
            println!("sites {}  qubits {}", cfg.model.n, ham.n_qubits());
            println!(
                "boundary {:?}  grouping {:?}",
                cfg.model.effective_boundary(),
                cfg.model.effective_grouping()
            );
            for (i, g) in ham.groups().iter().enumerate() {
                println!("group {i}: {} terms", g.len());
                print!("{}", g.to_text());
            }
        }
        Command::Sweep(common) => {
            let cfg = load(&common)?;
            let spec = cfg
                .sweep_spec()
                .ok_or_else(|| Failure::Config("config has no sweep section".into()))?;
            let csv = common.out.join(format!("{}.csv", spec.name));
            let result = run_sweep(&spec, Some(&csv))?;
            write_outputs(&result, &common.out)?;
        }
        Command::Steps(common) => {
            let cfg = load(&common)?;
            let spec = cfg
                .steps_spec()
                .ok_or_else(|| Failure::Config("config has no steps section".into()))?;
            let csv = common.out.join(format!("{}.csv", spec.name));
            let result = run_steps(&spec, Some(&csv))?;
            write_outputs(&result, &common.out)?;
        }
        Command::Check(common) => {
            let cfg = load(&common)?;
            let (pf, _) = product_formula(&cfg)?;
            let leading = pf.leading_error(true)?;
            let rep = diagnose_orthogonality_default(pf.hamiltonian().total(), &leading.r)?;
            println!(
                "leading error: order {} ({})",
                leading.order,
                if leading.symbolic { "symbolic" } else { "numeric" }
            );
            println!("terms {}  norm {:.6e}", leading.r.len(), rep.r_norm);
            println!(
                "max block diagonal {:.6e}  tolerance {:.6e}",
                rep.max_diag, rep.tau_orth
            );
            println!("orthogonal {}", rep.satisfied);
            for (k, v) in rep.trace_values.iter().enumerate() {
                println!("Tr(R H^{})/2^n = {v:.6e}", k + 1);
            }
            println!("traces vanish {}", rep.traces_vanish(TAU_ORTH_REL));
        }
        Command::Bounds(common) => {
            let cfg = load(&common)?;
            let point = cfg
                .point
                .clone()
                .ok_or_else(|| Failure::Config("config has no point section".into()))?;
            let (pf, model) = product_formula(&cfg)?;
            let requested = point.bounds.clone().unwrap_or_else(|| {
                BoundKind::ALL
                    .iter()
                    .copied()
                    .filter(|b| match b {
                        BoundKind::InterferencePf1 => cfg.pf_order == 1,
                        BoundKind::ApproxSplit => cfg.pf_order == 1 && model.split.is_some(),
                        BoundKind::Pf2Biased => cfg.pf_order == 2 && model.hamiltonian.len() == 2,
                        _ => true,
                    })
                    .collect()
            });
            let engine = BoundEngine::new(pf, model.split.as_ref(), &requested)?;
            let rep = engine.report(point.t, point.r, &requested, cfg.epsilon_policy)?;
            let text = serde_json::to_string_pretty(&rep).map_err(|e| Failure::Config(e.to_string()))?;
            println!("{text}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
