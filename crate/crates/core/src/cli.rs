//! Command-line surface: subcommand definitions and dispatch.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use mqwtx::config::{Config, DriveKind};
use mqwtx::error::{Error, Result};
use mqwtx::metrics::{eye_metrics, fold_eye, max_error_free_bitrate};
use mqwtx::optimizer::{grid_sweep, min_power_vs_bitrate};
use mqwtx::output::{
    emit_gnuplot, format_g17, write_eye_csv, write_min_power_csv, write_sweep_csv,
    write_trace_csv, PlotKind,
};
use mqwtx::sim::run_laser;

#[derive(Parser)]
#[command(name = "mqwtx", version, about = "Quantum-well optical transmitter simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Also emit a gnuplot script next to the CSV output.
    #[arg(long, global = true)]
    pub plot: bool,
    /// Override the seed of every PRBS drive.
    #[arg(long, global = true)]
    pub seed: Option<u32>,
    /// Suppress the stdout summary.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Subcommand)]
pub enum Command {
    /// Integrate the laser alone and write its trace CSV.
    LaserSim {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the full transmitter link and write its trace CSV.
    LinkSim {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fold the link output into an eye diagram at the given bit rate.
    Eye {
        #[arg(long)]
        config: PathBuf,
        /// Bit rate in Gbit/s.
        #[arg(long)]
        bitrate: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate every point of the configured design grid.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Find the minimum-power feasible operating point per bit rate.
    Optimize {
        #[arg(long)]
        config: PathBuf,
        /// Bit rate(s) in Gbit/s; a comma list yields the power-vs-rate curve.
        #[arg(long)]
        bitrate: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Report the largest error-free bit rate among the given rates.
    MaxBitrate {
        #[arg(long)]
        config: PathBuf,
        /// Comma list of bit rates in Gbit/s, ascending.
        #[arg(long)]
        rates: String,
    },
}

pub fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::LaserSim { config, out } => {
            let cfg = load_config(config, &cli)?;
            let trace = run_laser(&cfg.laser_params()?, &cfg.drive_laser.build()?, &cfg.sim_config())?;
            let bytes = write_file(out, |w| write_trace_csv(&trace, &cfg.echo(), w))?;
            maybe_plot(&cli, out, PlotKind::PhotonDensity)?;
            say(&cli, format!("wrote {} samples ({bytes} bytes) to {}", trace.len(), out.display()));
        }
        Command::LinkSim { config, out } => {
            let cfg = load_config(config, &cli)?;
            let trace = cfg.scenario()?.run()?;
            let bytes = write_file(out, |w| write_trace_csv(&trace, &cfg.echo(), w))?;
            maybe_plot(&cli, out, PlotKind::OutputPower)?;
            say(&cli, format!("wrote {} samples ({bytes} bytes) to {}", trace.len(), out.display()));
        }
        Command::Eye { config, bitrate, out } => {
            let mut cfg = load_config(config, &cli)?;
            let rate = gbps(*bitrate)?;
            cfg.set_bit_rate(rate)?;
            let trace = cfg.scenario()?.run()?;
            let eye = fold_eye(&trace, rate)?;
            let metrics = eye_metrics(&eye, cfg.metrics.decision_q)?;
            write_file(out, |w| write_eye_csv(&eye, &metrics, &cfg.echo(), w))?;
            maybe_plot(&cli, out, PlotKind::Eye)?;
            say(
                &cli,
                format!(
                    "eye at {} Gbit/s: height = {} W, Q = {}, error_free = {}",
                    bitrate,
                    format_g17(metrics.eye_height),
                    format_g17(metrics.q_factor),
                    metrics.error_free
                ),
            );
        }
        Command::Sweep { config, out } => {
            let cfg = load_config(config, &cli)?;
            let rate = config_bit_rate(&cfg)?;
            let evaluator = cfg.evaluator()?;
            let result = grid_sweep(
                &cfg.sweep_axes(),
                cfg.modulator.k_ratio,
                rate,
                cfg.metrics.decision_q,
                |p| evaluator.evaluate(p),
            )?;
            write_file(out, |w| write_sweep_csv(&result, &cfg.echo(), w))?;
            match result.best {
                Some(i) => {
                    let b = &result.points[i];
                    say(
                        &cli,
                        format!(
                            "best point #{i}: bias = {} A, il = {}, total = {} W",
                            format_g17(b.point.bias_current),
                            format_g17(b.point.il),
                            format_g17(b.total_power())
                        ),
                    );
                }
                None => say(&cli, "no feasible point in the sweep".into()),
            }
        }
        Command::Optimize { config, bitrate, out } => {
            let cfg = load_config(config, &cli)?;
            let rates = parse_rate_list(bitrate)?;
            let bounds = cfg.optimize_bounds()?;
            let evaluator = cfg.evaluator()?;
            let rows = if rates.len() == 1 {
                // single rate: an infeasible constraint set is a hard error
                let found = mqwtx::optimizer::minimize_power(
                    rates[0],
                    &bounds,
                    cfg.modulator.k_ratio,
                    cfg.modulator.v_bias_v,
                    cfg.modulator.v_dd_v,
                    cfg.metrics.decision_q,
                    |p| evaluator.evaluate(p),
                )?;
                vec![(rates[0], Some(found))]
            } else {
                min_power_vs_bitrate(
                    &rates,
                    &bounds,
                    cfg.modulator.k_ratio,
                    cfg.modulator.v_bias_v,
                    cfg.modulator.v_dd_v,
                    cfg.metrics.decision_q,
                    |p| evaluator.evaluate(p),
                )?
            };
            write_file(out, |w| write_min_power_csv(&rows, &cfg.echo(), w))?;
            maybe_plot(&cli, out, PlotKind::MinPowerCurve)?;
            for (rate, row) in &rows {
                match row {
                    Some((pt, b)) => say(
                        &cli,
                        format!(
                            "{} Gbit/s: total = {} W at bias = {} A, il = {}",
                            rate / 1e9,
                            format_g17(b.total),
                            format_g17(pt.bias_current),
                            format_g17(pt.il)
                        ),
                    ),
                    None => say(&cli, format!("{} Gbit/s: infeasible", rate / 1e9)),
                }
            }
        }
        Command::MaxBitrate { config, rates } => {
            let cfg = load_config(config, &cli)?;
            let rates = parse_rate_list(rates)?;
            let best = max_error_free_bitrate(&cfg.scenario()?, &rates, cfg.metrics.decision_q)?;
            match best {
                Some(rate) => println!("max_error_free_bitrate_gbps = {}", rate / 1e9),
                None => println!("max_error_free_bitrate_gbps = none"),
            }
        }
    }
    Ok(())
}

fn load_config(path: &Path, cli: &Cli) -> Result<Config> {
    let text = fs::read_to_string(path)?;
    let mut cfg = Config::parse(&text)?;
    if let Some(seed) = cli.seed {
        cfg.apply_seed(seed);
        cfg.scenario()?; // revalidate with the override applied
    }
    Ok(cfg)
}

fn gbps(rate: f64) -> Result<f64> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::config("bit rate must be > 0"));
    }
    Ok(rate * 1e9)
}

fn parse_rate_list(text: &str) -> Result<Vec<f64>> {
    let rates: Vec<f64> = text
        .split(',')
        .map(|r| {
            r.trim()
                .parse::<f64>()
                .map_err(|_| Error::config(format!("bad bit rate `{r}` in list")))
                .and_then(gbps)
        })
        .collect::<Result<_>>()?;
    if rates.is_empty() {
        return Err(Error::config("rate list must not be empty"));
    }
    Ok(rates)
}

fn config_bit_rate(cfg: &Config) -> Result<f64> {
    for d in [&cfg.drive_modulator, &cfg.drive_laser] {
        if d.kind == DriveKind::PrbsNrz {
            return Ok(d.bit_rate_bps);
        }
    }
    Err(Error::config("sweep requires a prbs_nrz drive to define the bit rate"))
}

fn write_file<F>(path: &Path, emit: F) -> Result<u64>
where
    F: FnOnce(&mut BufWriter<fs::File>) -> Result<u64>,
{
    let mut w = BufWriter::new(fs::File::create(path)?);
    emit(&mut w)
}

fn maybe_plot(cli: &Cli, out: &Path, kind: PlotKind) -> Result<()> {
    if cli.plot {
        let script = emit_gnuplot(&out.display().to_string(), kind);
        fs::write(format!("{}.gp", out.display()), script)?;
    }
    Ok(())
}

fn say(cli: &Cli, msg: String) {
    if !cli.quiet {
        println!("{msg}");
    }
}
