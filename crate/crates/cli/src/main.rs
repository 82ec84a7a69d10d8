use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::Parser;
use fdsim_core::canceller::TermKind;
use fdsim_core::sim::{sweep, sweep_with_models, to_csv, validate, PowerGrid, ScenarioConfig};
use fdsim_core::tx_chain::PaVariant;

/// Monte-Carlo SINR sweeps of digital self-interference cancellers in a
/// MIMO full-duplex transceiver.
#[derive(Debug, Parser)]
#[command(name = "fdsim", version)]
struct Args {
    /// Scenario file (TOML); built-in defaults when omitted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// CSV destination; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,

    /// PA model variant.
    #[arg(long, value_parser = parse_pa)]
    pa: Option<PaVariant>,

    /// Comma-separated canceller list, e.g. `linear,wl,pa-only-5,joint-full-5`.
    #[arg(long, value_delimiter = ',', value_parser = parse_canceller)]
    cancellers: Option<Vec<TermKind>>,

    /// Total transmit power grid in dBm, `start:step:stop` or a single value.
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    powers: Option<PowerGrid>,

    /// Monte-Carlo runs per power level.
    #[arg(long)]
    runs: Option<usize>,

    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Run the invariant suite instead of a sweep.
    #[arg(long)]
    validate: bool,

    /// Write the models fitted in the first run of each power level here.
    #[arg(long, value_name = "DIR")]
    dump_models: Option<PathBuf>,
}

fn parse_pa(s: &str) -> Result<PaVariant, String> {
    s.parse().map_err(|e: fdsim_core::Error| e.to_string())
}

fn parse_canceller(s: &str) -> Result<TermKind, String> {
    s.parse().map_err(|e: fdsim_core::Error| e.to_string())
}

fn parse_grid(s: &str) -> Result<PowerGrid, String> {
    s.parse().map_err(|e: fdsim_core::Error| e.to_string())
}

fn build_config(args: &Args) -> anyhow::Result<ScenarioConfig> {
    let mut cfg = match &args.config {
        Some(path) => ScenarioConfig::load(path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(pa) = args.pa {
        cfg.pa.variant = pa;
    }
    if let Some(c) = &args.cancellers {
        if c.is_empty() {
            bail!("--cancellers needs at least one entry");
        }
        cfg.cancellers = c.clone();
    }
    if let Some(p) = args.powers {
        cfg.sweep.powers = p;
    }
    if let Some(r) = args.runs {
        cfg.sweep.runs = r;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(args: &Args) -> anyhow::Result<bool> {
    let cfg = build_config(args)?;

    if args.validate {
        let report = validate(&cfg)?;
        for c in &report.checks {
            println!("{c}");
        }
        return Ok(report.passed());
    }

    let result = match &args.dump_models {
        Some(dir) => {
            let (result, models) = sweep_with_models(&cfg)?;
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            for m in &models {
                let name = format!("{}_{:.3}dBm.json", m.model.term_set().name(), m.tx_power_dbm);
                m.model.save(dir.join(name))?;
            }
            result
        }
        None => sweep(&cfg)?,
    };

    let csv = to_csv(&result);
    match &args.out {
        Some(path) => std::fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{csv}"),
    }
    Ok(true)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("fdsim: {e:#}");
            ExitCode::from(2)
        }
    }
}
