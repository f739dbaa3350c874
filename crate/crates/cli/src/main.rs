use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dpa_lab::{run_figure, run_point, run_table, write_artifact, CliError, ScenarioArgs};

#[derive(Parser)]
#[command(name = "dpa-lab", version, about = "Delocalized photon addition: NPT, JPND and Wigner datasets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one quantity for one scenario (stdout unless --out is given).
    Point {
        #[command(flatten)]
        args: ScenarioArgs,
    },
    /// Regenerate a figure's datasets: fig2 .. fig7.
    Figure {
        id: String,
        #[command(flatten)]
        args: ScenarioArgs,
    },
    /// Regenerate a summary table: t1 or t2.
    Table {
        id: String,
        #[command(flatten)]
        args: ScenarioArgs,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Point { args } => {
            let cfg = args.resolve()?;
            let quantity = cfg
                .quantity
                .ok_or_else(|| CliError::Config("--quantity is required for point".into()))?;
            let format = cfg.format.unwrap_or_default();
            let record = run_point(&cfg, quantity)?;
            let body = record.render(format)?;
            match &cfg.out {
                Some(dir) => {
                    std::fs::create_dir_all(dir)?;
                    let ext = match format {
                        dpa_lab::Format::Csv => "csv",
                        dpa_lab::Format::Json => "json",
                    };
                    let path = dir.join(format!("point_{}.{ext}", quantity.tag()));
                    std::fs::write(&path, body)?;
                    println!("{}", path.display());
                }
                None => print!("{body}"),
            }
        }
        Command::Figure { id, args } => {
            let cfg = args.resolve()?;
            let artifact = run_figure(&id, &cfg)?;
            emit(&artifact, &cfg, &id)?;
        }
        Command::Table { id, args } => {
            let cfg = args.resolve()?;
            let artifact = run_table(&id, &cfg)?;
            emit(&artifact, &cfg, &id)?;
        }
    }
    Ok(())
}

fn emit(artifact: &dpa_lab::Artifact, cfg: &dpa_lab::ScenarioConfig, id: &str) -> Result<(), CliError> {
    let dir = cfg
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("dpa-out").join(id));
    for path in write_artifact(artifact, cfg, &dir, cfg.format.unwrap_or_default())? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
