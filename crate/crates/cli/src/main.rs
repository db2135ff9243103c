//! Command-line front end for the shared-bicycle LCA engine.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use bss_lca::engine::AllocationMode;
use bss_lca::modeshift::Scenario;
use bss_lca_cli::commands::{self, CliError, Context, OutputFormat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AllocationArg {
    /// Divide by gross lifetime mileage, empty kilometres included.
    Paper,
    /// Divide by passenger kilometres only.
    Strict,
}

impl From<AllocationArg> for AllocationMode {
    fn from(a: AllocationArg) -> Self {
        match a {
            AllocationArg::Paper => AllocationMode::Paper,
            AllocationArg::Strict => AllocationMode::Strict,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScenarioArg {
    S1,
    S2,
}

impl From<ScenarioArg> for Scenario {
    fn from(s: ScenarioArg) -> Self {
        match s {
            ScenarioArg::S1 => Scenario::S1,
            ScenarioArg::S2 => Scenario::S2,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "bss-lca",
    version,
    about = "Life-cycle GHG emissions engine for shared bicycle systems",
    after_help = "Scenario arguments accept bundled names (station_based, dockless, autonomous, \
                  autonomous_alt_split) or paths to scenario TOML files."
)]
struct Cli {
    /// Per-pkm denominator convention.
    #[arg(long, global = true, value_enum, default_value_t = AllocationArg::Paper)]
    allocation: AllocationArg,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Write the report (or constants file) here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Calibrated constants file; defaults to $BSS_LCA_CONSTANTS.
    #[arg(long, global = true)]
    constants: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct BreakevenTarget {
    /// Break even against this system at common utilization.
    #[arg(long)]
    reference: Option<String>,
    /// Break even against a fixed total, g/pkm.
    #[arg(long)]
    target_total: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate per-pkm emission components for one or more scenarios.
    Evaluate {
        /// Bundled names or scenario files; defaults to the three nominal systems.
        scenarios: Vec<String>,
    },
    /// Compare a baseline system against another.
    Compare {
        #[arg(long)]
        baseline: String,
        #[arg(long)]
        other: String,
    },
    /// Run a declarative parameter sweep from a spec file.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        /// Extra scenario files the spec's `systems` may name.
        scenarios: Vec<String>,
    },
    /// Solve for the utilization at which a system breaks even.
    Breakeven {
        /// The system whose utilization is varied.
        #[arg(long)]
        moving: String,
        #[command(flatten)]
        target: BreakevenTarget,
    },
    /// Net impact against displaced mobility modes (needs constants).
    Modeshift {
        /// Profile table; defaults to the bundled city rows.
        #[arg(long)]
        profiles: Option<PathBuf>,
        /// Restrict to one electrification scenario.
        #[arg(long, value_enum)]
        scenario: Option<ScenarioArg>,
    },
    /// Back-solve model constants and write a constants file.
    Calibrate {
        /// Anchors document; defaults to the bundled anchors.
        #[arg(long)]
        anchors: Option<PathBuf>,
        /// Overwrite an existing constants file.
        #[arg(long)]
        force: bool,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let ctx = Context {
        allocation: cli.allocation.into(),
        format: match cli.format {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        },
        constants: cli.constants.clone(),
    };
    match cli.command {
        Command::Calibrate { anchors, force } => {
            let out = cli.out.unwrap_or_else(|| PathBuf::from("constants.toml"));
            let summary = commands::cmd_calibrate(anchors.as_deref(), &out, force)?;
            print!("{summary}");
            Ok(())
        }
        command => {
            let output = match command {
                Command::Evaluate { scenarios } => commands::cmd_evaluate(&scenarios, &ctx)?,
                Command::Compare { baseline, other } => {
                    commands::cmd_compare(&baseline, &other, &ctx)?
                }
                Command::Sweep { spec, scenarios } => commands::cmd_sweep(&spec, &scenarios, &ctx)?,
                Command::Breakeven { moving, target } => commands::cmd_breakeven(
                    &moving,
                    target.reference.as_deref(),
                    target.target_total,
                    &ctx,
                )?,
                Command::Modeshift { profiles, scenario } => commands::cmd_modeshift(
                    profiles.as_deref(),
                    scenario.map(Scenario::from),
                    &ctx,
                )?,
                Command::Calibrate { .. } => unreachable!("handled above"),
            };
            match &cli.out {
                Some(path) => std::fs::write(path, output).map_err(|source| CliError::Io {
                    path: path.display().to_string(),
                    source,
                }),
                None => {
                    print!("{output}");
                    Ok(())
                }
            }
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(error) = run(cli) {
        eprintln!("error: {error}");
        std::process::exit(error.exit_code());
    }
}
