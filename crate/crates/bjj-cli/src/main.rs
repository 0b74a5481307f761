use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bjj_cli::acceptance;
use bjj_cli::emit::{emit, write_atomic, OutputFormat};
use bjj_cli::scenario::{list_presets, preset, run_scenario, parse_key_values, ScenarioConfig};
use bjj_core::error::{Error, Result};
use bjj_core::photonics::diagonal_overlay;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "bjj",
    version,
    about = "Two-component bosonic Josephson junction on a waveguide lattice",
    long_about = "Simulates two interacting bosonic species in a double well as light \
                  propagating through a 2D array of evanescently coupled waveguides, \
                  and designs the physical waveguide arrangement realizing the model."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write distributions, trajectories and summaries
    Run {
        /// Flat key/value config file (see the README for the schema)
        #[arg(long)]
        config: Option<PathBuf>,
        /// Named preset; config-file entries override preset values
        #[arg(long)]
        preset: Option<String>,
        /// Output directory
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Tabular output format
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Force the diagonal-coupling overlay branch on or off
        #[arg(long, value_enum)]
        overlay: Option<Switch>,
    },
    /// Emit the physical waveguide layout and its diagonal-coupling estimate
    Layout {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run the built-in acceptance suite
    Check,
}

fn load_config(config: &Option<PathBuf>, preset_name: &Option<String>) -> Result<ScenarioConfig> {
    match (config, preset_name) {
        (None, None) => Err(Error::Config(format!(
            "either --config or --preset is required; presets: {}",
            list_presets().join(", ")
        ))),
        (None, Some(name)) => preset(name),
        (Some(path), None) => ScenarioConfig::from_file(path),
        (Some(path), Some(name)) => {
            // preset supplies the base, the file overrides individual keys
            let mut kv = preset(name)?.to_kv();
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            for (k, v) in parse_key_values(&text)? {
                kv.insert(k, v);
            }
            ScenarioConfig::from_kv(&kv)
        }
    }
}

fn cmd_run(
    config: &Option<PathBuf>,
    preset_name: &Option<String>,
    out: &Path,
    format: Format,
    overlay: Option<Switch>,
) -> Result<()> {
    let mut config = load_config(config, preset_name)?;
    if let Some(switch) = overlay {
        config.overlay_enabled = matches!(switch, Switch::On);
    }
    let results = run_scenario(&config)?;
    let format = match format {
        Format::Csv => OutputFormat::Csv,
        Format::Json => OutputFormat::Json,
    };
    let written = emit(&results, format, out)?;
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_layout(config: &Option<PathBuf>, preset_name: &Option<String>, out: &Path) -> Result<()> {
    let config = load_config(config, preset_name)?;
    let layout = config.layout()?;
    let overlay = diagonal_overlay(&layout);
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let layout_path = out.join("layout.csv");
    write_atomic(&layout_path, &layout.to_csv())?;
    println!("wrote {}", layout_path.display());
    let overlay_path = out.join("overlay.csv");
    write_atomic(&overlay_path, &overlay.to_csv())?;
    println!("wrote {}", overlay_path.display());
    Ok(())
}

fn cmd_check() -> ExitCode {
    let outcomes = acceptance::run_all();
    for outcome in &outcomes {
        println!("{}", outcome.line());
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    if failed == 0 {
        println!("all {} criteria passed", outcomes.len());
        ExitCode::SUCCESS
    } else {
        println!("{failed} of {} criteria failed", outcomes.len());
        ExitCode::FAILURE
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config, preset, out, format, overlay } => {
            cmd_run(config, preset, out, *format, *overlay)
        }
        Command::Layout { config, preset, out } => cmd_layout(config, preset, out),
        Command::Check => return cmd_check(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
