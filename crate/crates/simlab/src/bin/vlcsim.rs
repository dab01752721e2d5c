use std::fs::File;
use std::io::{self, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vlc_simlab::config::{ModeKey, SimConfig};
use vlc_simlab::experiments::{self, Outcome, COMPLEXITY_HEADER};
use vlc_simlab::metrics::{write_rows, write_summary};
use vlc_simlab::model::World;
use vlc_simlab::{SimError, SimResult};

/// Monte Carlo simulator for VAP-based visible light positioning.
#[derive(Parser, Debug)]
#[command(name = "vlcsim", version)]
struct Cli {
    /// TOML scenario file; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Realizations per point for the selected experiment.
    #[arg(long, global = true)]
    realizations: Option<usize>,
    #[arg(long, global = true, value_enum)]
    mode: Option<ModeKey>,
    /// Per-realization CSV; the summary goes next to it as `<stem>_summary.csv`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads, 0 for all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Scenario checks.
    Scenario {
        #[command(subcommand)]
        action: ScenarioAction,
    },
    /// Accuracy and iteration counts of every estimator at the probe positions.
    Table2,
    /// Convergence rate over uniformly drawn positions.
    Converge,
    /// RMSE surfaces on horizontal planes.
    Surface,
    /// RMSE against receiver noise variance.
    NoiseSweep,
    /// LCM RMSE and capacity against the clipping factor.
    ClipSweep,
    /// Operation counts of the estimators.
    Complexity,
}

#[derive(Subcommand, Debug)]
enum ScenarioAction {
    /// Parse and validate the configuration, then print the derived layout.
    Validate,
}

fn load(cli: &Cli) -> SimResult<SimConfig> {
    let mut cfg = match &cli.config {
        Some(p) => SimConfig::load(p)?,
        None => SimConfig::default(),
    };
    let e = &mut cfg.experiment;
    if let Some(s) = cli.seed {
        e.seed = s;
    }
    if let Some(t) = cli.threads {
        e.threads = t;
    }
    if cli.mode.is_some() {
        e.mode = cli.mode;
    }
    if let Some(n) = cli.realizations {
        match cli.command {
            Command::Table2 => e.table2_realizations = n,
            Command::Converge => e.converge_realizations = n,
            Command::Surface => e.surface_realizations = n,
            Command::NoiseSweep => e.noise_realizations = n,
            Command::ClipSweep => e.clip_realizations = n,
            Command::Scenario { .. } | Command::Complexity => {}
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn summary_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    out.with_file_name(format!("{stem}_summary.csv"))
}

fn emit(cli: &Cli, outcome: &Outcome) -> SimResult<()> {
    if let Some(out) = &cli.out {
        write_rows(BufWriter::new(File::create(out)?), &outcome.rows)?;
        write_summary(BufWriter::new(File::create(summary_path(out))?), &outcome.summary)?;
    }
    write_summary(io::stdout().lock(), &outcome.summary)?;
    for n in &outcome.notes {
        eprintln!("{n}");
    }
    Ok(())
}

fn validate(world: &World) {
    let sc = &world.scenario;
    println!(
        "room {:.2} x {:.2} x {:.2} m, {} VAPs x {} LEDs, n_L = {}",
        sc.room.x, sc.room.y, sc.room.z, sc.vaps, sc.leds_per_vap, sc.lambertian_mode
    );
    for led in &sc.leds {
        println!(
            "VAP {} LED {}: position ({:.4}, {:.4}, {:.4}) normal ({:.4}, {:.4}, {:.4})",
            led.vap + 1,
            led.led + 1,
            led.position.x,
            led.position.y,
            led.position.z,
            led.normal.x,
            led.normal.y,
            led.normal.z
        );
    }
    println!("transmit power {:.6} W, conversion factor {:.6}", world.transmit_power, world.conversion);
}

fn run(cli: &Cli) -> SimResult<()> {
    let cfg = load(cli)?;
    let world = World::new(&cfg)?;
    match cli.command {
        Command::Scenario {
            action: ScenarioAction::Validate,
        } => {
            validate(&world);
            Ok(())
        }
        Command::Table2 => emit(cli, &experiments::table2(&world)?),
        Command::Converge => emit(cli, &experiments::converge(&world)?),
        Command::Surface => emit(cli, &experiments::surface(&world)?),
        Command::NoiseSweep => emit(cli, &experiments::noise_sweep(&world)?),
        Command::ClipSweep => emit(cli, &experiments::clip_sweep(&world)?),
        Command::Complexity => {
            let (rows, notes) = experiments::complexity(&world)?;
            let write = |w: &mut csv::Writer<Box<dyn io::Write>>| -> SimResult<()> {
                w.write_record(COMPLEXITY_HEADER)?;
                for r in &rows {
                    w.write_record(r.record())?;
                }
                w.flush()?;
                Ok(())
            };
            if let Some(out) = &cli.out {
                write(&mut csv::Writer::from_writer(Box::new(BufWriter::new(File::create(out)?))))?;
            }
            write(&mut csv::Writer::from_writer(Box::new(io::stdout().lock())))?;
            for n in notes {
                eprintln!("{n}");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("vlcsim: {e}");
            ExitCode::from(exit_status(&e))
        }
    }
}

fn exit_status(e: &SimError) -> u8 {
    e.exit_code() as u8
}
