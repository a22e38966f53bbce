use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use thzbeam::harness::{self, ValidationReport};
use thzbeam::scenario::DEFAULT_SUBCARRIERS;
use thzbeam::{Architecture, GainTable, Scenario, SystemParams};

/// Wideband THz delay-phase beamforming and RIS design sweeps.
#[derive(Debug, Parser)]
#[command(name = "thzbeam", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    opts: Opts,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Conventional (phase-only) beam patterns on the lowest, central and highest subcarriers.
    Fig3a,
    /// Delay-phase gain toward the BS target on every subcarrier.
    Fig3b,
    /// RIS-side gain versus subcarrier with the surface designed at the carrier.
    Fig4,
    /// Run the invariant suite and report per-check deviations.
    Validate,
    /// Gain versus direction for any architecture.
    Sweep,
}

#[derive(Debug, clap::Args)]
struct Opts {
    /// Scenario file (TOML). Defaults to the built-in reference scenario.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Direction grid points over [-1, 1] [default: 4096].
    #[arg(long, global = true)]
    grid_points: Option<usize>,

    /// Number of OFDM subcarriers [default: 128].
    #[arg(long, global = true)]
    subcarriers: Option<usize>,

    /// TDRs per RF chain; repeat or comma-separate for several runs.
    /// fig3b and fig4 default to 16,32.
    #[arg(long = "kt", global = true, value_delimiter = ',')]
    kt: Vec<usize>,

    /// Seed for random path gains, noise and the random baselines.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Architecture: conventional, tp-paper-literal, tp-fixed-delay, one-to-one.
    #[arg(long, global = true)]
    mode: Option<Architecture>,

    /// Override every validation tolerance.
    #[arg(long, global = true)]
    tolerance: Option<f64>,

    /// Also write an SVG plot next to each CSV.
    #[arg(long, global = true)]
    svg: bool,
}

enum Failure {
    Config(thzbeam::Error),
    Validation,
    Other(anyhow::Error),
}

impl From<thzbeam::Error> for Failure {
    fn from(e: thzbeam::Error) -> Self {
        match e {
            thzbeam::Error::Io(e) => Failure::Other(e.into()),
            e => Failure::Config(e),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation) => ExitCode::from(1),
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let opts = &cli.opts;
    let base = load(opts)?;
    let default_kts: &[usize] = match cli.command {
        Command::Fig3b | Command::Fig4 => &[16, 32],
        _ => &[],
    };
    let kts = if opts.kt.is_empty() { default_kts } else { &opts.kt };
    // a single implicit run keeps the plain file name
    let runs: Vec<(Option<usize>, Scenario)> = if kts.is_empty() {
        vec![(None, base)]
    } else {
        kts.iter()
            .map(|&k| Ok((Some(k), with_kt(&base, k)?)))
            .collect::<thzbeam::Result<_>>()?
    };

    let mut failed = false;
    for (kt, mut scenario) in runs {
        let suffix = kt.map(|k| format!("_kt{k}")).unwrap_or_default();
        match cli.command {
            Command::Fig3a => {
                scenario.architecture = opts.mode.unwrap_or(Architecture::Conventional);
                let t = harness::run_fig3a(&scenario)?;
                emit(opts, &format!("fig3a{suffix}"), &t, "Beam patterns, phase-only")?;
            }
            Command::Fig3b => {
                apply_mode(&mut scenario, opts);
                let t = harness::run_fig3b(&scenario)?;
                let title = format!("Delay-phase gain, K_T = {}", scenario.config.k_t());
                emit(opts, &format!("fig3b{suffix}"), &t, &title)?;
            }
            Command::Fig4 => {
                apply_mode(&mut scenario, opts);
                let t = harness::run_fig4(&scenario)?;
                let title = format!("RIS-side gain, K_T = {}", scenario.config.k_t());
                emit(opts, &format!("fig4{suffix}"), &t, &title)?;
            }
            Command::Sweep => {
                apply_mode(&mut scenario, opts);
                let t = harness::run_sweep(&scenario, scenario.architecture)?;
                let name = format!("sweep_{}{suffix}", scenario.architecture);
                emit(opts, &name, &t, &name)?;
            }
            Command::Validate => {
                let report = harness::validate(&scenario, opts.tolerance)?;
                print_report(&scenario, &report);
                failed |= !report.passed();
            }
        }
    }
    if failed {
        Err(Failure::Validation)
    } else {
        Ok(())
    }
}

fn load(opts: &Opts) -> thzbeam::Result<Scenario> {
    let mut s = match &opts.config {
        Some(path) => Scenario::from_path_seeded(path, opts.seed)?,
        None => {
            let mut s = Scenario::reference(16, DEFAULT_SUBCARRIERS)?;
            if let Some(seed) = opts.seed {
                s.seed = seed;
                s.noise.seed = seed;
            }
            s
        }
    };
    if let Some(m) = opts.subcarriers {
        s = s.with_params(SystemParams {
            m_subcarriers: m,
            ..s.config.params()
        })?;
    }
    if let Some(g) = opts.grid_points {
        if g < 2 {
            return Err(thzbeam::Error::Scenario(
                "--grid-points must be at least 2".into(),
            ));
        }
        s.sweep.grid_points = g;
    }
    Ok(s)
}

fn with_kt(s: &Scenario, k_t: usize) -> thzbeam::Result<Scenario> {
    s.with_params(SystemParams {
        k_t,
        ..s.config.params()
    })
}

fn apply_mode(s: &mut Scenario, opts: &Opts) {
    if let Some(mode) = opts.mode {
        s.architecture = mode;
    }
}

fn emit(opts: &Opts, stem: &str, table: &GainTable, title: &str) -> anyhow::Result<()> {
    fs::create_dir_all(&opts.out)
        .with_context(|| format!("creating {}", opts.out.display()))?;
    let csv = opts.out.join(format!("{stem}.csv"));
    write(&csv, &table.to_csv())?;
    println!("wrote {}", csv.display());
    if opts.svg {
        let svg = opts.out.join(format!("{stem}.svg"));
        write(&svg, &table.to_svg(title))?;
        println!("wrote {}", svg.display());
    }
    Ok(())
}

fn write(path: &Path, contents: &str) -> anyhow::Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn print_report(s: &Scenario, report: &ValidationReport) {
    println!(
        "scenario: N_TX={} K_T={} M={} L1={} L2={}",
        s.config.n_tx(),
        s.config.k_t(),
        s.config.m_subcarriers(),
        s.channels.bs_ris_paths().len(),
        s.channels.ris_ue_paths().len()
    );
    print!("{}", report.render());
    println!("{}", if report.passed() { "all checks passed" } else { "validation FAILED" });
}
