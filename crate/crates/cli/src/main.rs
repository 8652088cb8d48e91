use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use distant_core::scenario::{
    execute, exit_code_for, load_scenario, preset, scale_config, sweep, write_error_record, ScenarioConfig,
    EXIT_PASS, EXIT_VERDICT, PRESET_NAMES,
};
use distant_core::Error;

#[derive(Parser)]
#[command(name = "distant", version, about = "Warm-box rover locomotion simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a scenario and check its requirement gates.
    Validate { config: PathBuf },
    /// Run a scenario (or a preset) and write CSVs plus summary.json.
    Run {
        /// Scenario file; omit when --preset is given.
        config: Option<PathBuf>,
        #[arg(long, env = "DISTANT_OUT_DIR")]
        out: PathBuf,
        /// Overrides the terrain seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        preset: Option<String>,
    },
    /// One run per value of a numeric config field.
    Sweep {
        config: PathBuf,
        /// Dotted path, e.g. terrain.surface.incline.slope_rad
        #[arg(long)]
        param: String,
        /// Comma-separated values; may be empty.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        #[arg(long, env = "DISTANT_OUT_DIR")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Write a geometrically scaled copy of a scenario.
    Scale {
        config: PathBuf,
        #[arg(long)]
        factor: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// List or print the shipped presets.
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    List,
    Dump { name: String },
}

fn parse_values(text: &str) -> Result<Vec<f64>, Error> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Error::Config {
                    field: "--values".into(),
                    message: format!("`{s}` is not a number"),
                })
        })
        .collect()
}

fn fail(e: &Error) -> u8 {
    eprintln!("error: {e}");
    exit_code_for(e) as u8
}

fn load(config: &Path) -> Result<ScenarioConfig, Error> {
    load_scenario(config)
}

fn run(config: Option<PathBuf>, out: PathBuf, seed: Option<u64>, preset_name: Option<String>) -> u8 {
    let loaded = match (config, preset_name) {
        (Some(_), Some(_)) => Err(Error::Config {
            field: "--preset".into(),
            message: "give either a config file or --preset, not both".into(),
        }),
        (None, None) => Err(Error::Config {
            field: "config".into(),
            message: "a config file or --preset is required".into(),
        }),
        (Some(path), None) => load(&path),
        (None, Some(name)) => preset(&name),
    };
    let config = match loaded {
        Ok(c) => c,
        Err(e) => {
            let _ = write_error_record(&out, &e);
            return fail(&e);
        }
    };
    let (code, result) = execute(&config, &out, seed);
    match result {
        Ok(summary) => {
            for v in &summary.verdicts {
                println!("{} {}: {}", if v.pass { "PASS" } else { "FAIL" }, v.name, v.detail);
            }
            println!("outputs in {}", out.display());
            code as u8
        }
        Err(e) => {
            eprintln!("error: {e}");
            code as u8
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Validate { config } => match load(&config) {
            Ok(c) => {
                for g in c.requirement_gates() {
                    println!("PASS {}: {}", g.name, g.detail);
                }
                println!("{}: valid", c.name);
                EXIT_PASS as u8
            }
            Err(e) => fail(&e),
        },
        Command::Run {
            config,
            out,
            seed,
            preset,
        } => run(config, out, seed, preset),
        Command::Sweep {
            config,
            param,
            values,
            out,
            seed,
        } => {
            let result = parse_values(&values).and_then(|vals| {
                let base = load(&config)?;
                sweep(&base, &param, &vals, &out, seed)
            });
            match result {
                Ok(rows) => {
                    println!("{} runs, table in {}", rows.len(), out.join("sweep.csv").display());
                    if rows.iter().all(|r| r.exit_code == EXIT_PASS) {
                        EXIT_PASS as u8
                    } else {
                        rows.iter().map(|r| r.exit_code).max().unwrap_or(EXIT_VERDICT) as u8
                    }
                }
                Err(e) => fail(&e),
            }
        }
        Command::Scale { config, factor, out } => {
            let result = load(&config)
                .and_then(|c| scale_config(&c, factor))
                .and_then(|c| {
                    c.validate()?;
                    std::fs::write(&out, c.to_json() + "\n")?;
                    Ok(())
                });
            match result {
                Ok(()) => {
                    println!("wrote {}", out.display());
                    EXIT_PASS as u8
                }
                Err(e) => fail(&e),
            }
        }
        Command::Presets { action } => match action {
            PresetAction::List => {
                let mut out = std::io::stdout().lock();
                for name in PRESET_NAMES {
                    // a closed pipe (e.g. `| head`) is not an error here
                    let _ = writeln!(out, "{name}");
                }
                EXIT_PASS as u8
            }
            PresetAction::Dump { name } => match preset(&name) {
                Ok(c) => {
                    let _ = writeln!(std::io::stdout().lock(), "{}", c.to_json());
                    EXIT_PASS as u8
                }
                Err(e) => fail(&e),
            },
        },
    };
    ExitCode::from(code)
}
