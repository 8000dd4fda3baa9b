use std::path::PathBuf;

use anyhow::{anyhow, Result};
use clap::{Args, Parser, Subcommand};

use irsim_cli::config::{self, LoadedConfig};
use irsim_cli::runner::run_sweeps;
use irsim_cli::svg::PlotMetric;
use irsim_cli::{csv, svg};
use irsim_core::sim::{acquisition_symbol_count, run_acquisition};

/// Link-level simulator for reflecting-surface-assisted mmWave coverage:
/// RUS-based codeword search, wideband delay estimation, trilateration,
/// and reflecting-coefficient optimization.
#[derive(Parser)]
#[command(name = "irsim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArg {
    /// Scenario config (JSON); defaults apply for absent keys or file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override the scenario RNG seed.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Override the Monte Carlo trial count.
    #[arg(long, value_name = "N")]
    trials: Option<u32>,
}

impl ConfigArg {
    fn load(&self) -> Result<LoadedConfig> {
        let mut loaded = match &self.config {
            Some(path) => config::load_config(path)?,
            None => config::default_config(),
        };
        if let Some(seed) = self.seed {
            loaded.scenario.seed = seed;
        }
        if let Some(trials) = self.trials {
            loaded.scenario.trials = trials;
            loaded.sweep.trials = trials;
        }
        loaded.scenario.validate().map_err(|e| anyhow!("{e}"))?;
        Ok(loaded)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run Monte Carlo acquisition trials at the configured terminal
    /// position and print aggregate metrics.
    Simulate {
        #[command(flatten)]
        config: ConfigArg,
        /// Also write the aggregate as a one-row results CSV.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Sweep the terminal position and write per-position metrics as CSV.
    Sweep {
        #[command(flatten)]
        config: ConfigArg,
        /// Sweep axis: x or y.
        #[arg(long, value_name = "x|y")]
        axis: Option<String>,
        /// Sweep start coordinate, metres.
        #[arg(long, value_name = "F")]
        from: Option<f64>,
        /// Sweep end coordinate, metres.
        #[arg(long, value_name = "T")]
        to: Option<f64>,
        /// Sweep step, metres.
        #[arg(long, value_name = "S")]
        step: Option<f64>,
        /// Comma-separated sigma_e values, one sweep per value.
        #[arg(long = "sigma-e", value_name = "LIST")]
        sigma_e: Option<String>,
        /// Output CSV path.
        #[arg(long, value_name = "PATH", default_value = "results.csv")]
        out: PathBuf,
        /// Run points serially instead of in parallel (same output bytes).
        #[arg(long)]
        serial: bool,
    },
    /// Render an SVG chart from a sweep results CSV.
    Plot {
        /// Input CSV produced by `sweep`.
        #[arg(long, value_name = "PATH")]
        input: PathBuf,
        /// Which metric to draw: snr or error.
        #[arg(long, value_name = "snr|error", default_value = "snr")]
        metric: String,
        /// Output SVG path.
        #[arg(long, value_name = "PATH", default_value = "plot.svg")]
        out: PathBuf,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Simulate { config, out } => {
            let loaded = config.load()?;
            let scenario = loaded.scenario;
            let record = irsim_core::sim::run_sweep_point(
                &scenario,
                scenario.ue_position,
                0,
                scenario.trials,
            )
            .map_err(|e| anyhow!("{e}"))?;
            let sample = run_acquisition(&scenario, 0).map_err(|e| anyhow!("{e}"))?;
            println!(
                "terminal at ({:.3}, {:.3}, {:.3}), {} trials, seed {}",
                scenario.ue_position.x,
                scenario.ue_position.y,
                scenario.ue_position.z,
                scenario.trials,
                scenario.seed
            );
            println!("  SNR upper bound : {:8.2} dB", record.snr_upper_db);
            println!("  SNR proposed    : {:8.2} dB", record.snr_proposed_db);
            println!("  SNR no-opt      : {:8.2} dB", record.snr_noopt_db);
            println!("  mean pos error  : {:8.4} m", record.mean_position_error_m);
            println!("  failure rate    : {:8.3}", record.failure_rate);
            println!(
                "  trial 0 estimate: ({:.4}, {:.4}, {:.4})",
                sample.estimated_position.x,
                sample.estimated_position.y,
                sample.estimated_position.z
            );
            println!(
                "  acquisition budget: {} OFDM symbols",
                acquisition_symbol_count(&scenario)
            );
            if let Some(path) = out {
                csv::write_results(&[record], &path)?;
                println!("wrote {}", path.display());
            }
        }
        Command::Sweep {
            config,
            axis,
            from,
            to,
            step,
            sigma_e,
            out,
            serial,
        } => {
            let loaded = config.load()?;
            let mut defaults = loaded.sweep;
            if let Some(axis) = axis.as_deref() {
                defaults.axis = config::parse_axis(axis)?;
            }
            if let Some(v) = from {
                defaults.from_m = v;
            }
            if let Some(v) = to {
                defaults.to_m = v;
            }
            if let Some(v) = step {
                defaults.step_m = v;
            }
            if let Some(list) = sigma_e.as_deref() {
                defaults.sigma_e_values = parse_sigma_list(list)?;
            }
            let records = run_sweeps(&loaded.scenario, &defaults, !serial)?;
            csv::write_results(&records, &out)?;
            let gain =
                irsim_core::sim::aggregate_gain(&records).map_err(|e| anyhow!("{e}"))?;
            println!(
                "wrote {} rows to {} (mean proposed-vs-noopt gain {:.2} dB)",
                records.len(),
                out.display(),
                gain
            );
        }
        Command::Plot { input, metric, out } => {
            let metric = match metric.as_str() {
                "snr" => PlotMetric::Snr,
                "error" => PlotMetric::Error,
                other => {
                    return Err(anyhow!(
                        "invalid parameter `metric`: expected \"snr\" or \"error\", got \"{other}\""
                    ))
                }
            };
            let records = csv::read_results(&input)?;
            svg::emit_plot(&records, metric, &out)?;
            println!("wrote {}", out.display());
        }
    }
    Ok(())
}

fn parse_sigma_list(list: &str) -> Result<Vec<f64>> {
    let values: Result<Vec<f64>> = list
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| anyhow!("invalid parameter `sigma-e`: cannot parse \"{s}\""))
        })
        .collect();
    let values = values?;
    for v in &values {
        if !(0.0..=1.0).contains(v) {
            return Err(anyhow!(
                "invalid parameter `sigma-e`: {v} outside [0, 1]"
            ));
        }
    }
    if values.is_empty() {
        return Err(anyhow!("invalid parameter `sigma-e`: empty list"));
    }
    Ok(values)
}
