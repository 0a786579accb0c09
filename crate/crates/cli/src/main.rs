use std::f64::consts::TAU;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wigner_core::beams::{build_pulse_sequence, verify_conditions, ConditionResiduals, PulseDesign, Scheme};
use wigner_core::bench::{run_through, write_sweep, Check, ExperimentConfig, RunSummary, Stage, SweepAxis, SWEEP_FILE};
use wigner_core::error::{Error, Result};
use wigner_core::scales::species;

const PULSE_FILE: &str = "pulses.csv";

#[derive(Parser)]
#[command(name = "wigner", version, about = "Wigner-crystal equilibria, modes and geometric-phase gates in a Penning trap")]
struct Cli {
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find the crystal equilibrium and write equilibrium.txt
    Equilibrium(Common),
    /// Equilibrium plus normal-mode spectrum and band gaps
    Modes(Common),
    /// Full pipeline: equilibrium, modes, calibrated gate and fidelity curve
    Gate(Common),
    /// Gate pipeline over a list of parameter values
    Sweep {
        #[command(flatten)]
        common: Common,
        /// angular-momentum, carrier-hz, gate-time or gate-time-ratio
        #[arg(long)]
        axis: SweepAxis,
        /// Comma-separated values
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
    },
    /// Build and verify a polarization-switched pulse sequence
    PulseDesign(PulseArgs),
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (key = value lines)
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured seed
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the configured output directory
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PulseArgs {
    #[arg(long, default_value = "Be")]
    species: String,
    /// Magnetic field, T
    #[arg(long)]
    field: f64,
    #[arg(long, default_value_t = Scheme::default())]
    scheme: Scheme,
    /// ν of the sin² intensity modulation, Hz
    #[arg(long)]
    carrier_hz: f64,
    #[arg(long, default_value_t = 4)]
    periods: usize,
    /// δ₁,δ₂ in Hz
    #[arg(long, value_parser = detuning_pair, allow_hyphen_values = true)]
    detunings_hz: (f64, f64),
    /// Dead time at each switch, s
    #[arg(long, default_value_t = 0.0)]
    switch_time: f64,
    #[arg(long, default_value_t = 10.0)]
    margin: f64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn detuning_pair(text: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = text.split_once(',').ok_or("expected two comma-separated values")?;
    let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("'{v}': {e}"));
    Ok((parse(a)?, parse(b)?))
}

fn load(common: &Common) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(&common.config)?;
    let mut config = ExperimentConfig::parse(&text)?;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(out) = &common.out {
        config.output = out.clone();
    }
    Ok(config)
}

fn print_checks(checks: &[Check]) {
    for c in checks {
        println!("{} {} ({})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
}

fn print_summary(summary: &RunSummary) {
    println!("rotation frequency  {:.8} omega_c", summary.rotation_frequency);
    println!("anisotropy          {:.3e}", summary.anisotropy);
    for (lower, upper) in &summary.gaps {
        println!("gap                 [{lower:.6}, {upper:.6}] omega_c");
    }
    if let Some(g) = &summary.gate {
        println!("pair                {}, {}", g.pair.0, g.pair.1);
        println!("carrier             {:.6e} Hz", g.carrier / TAU);
        println!("gate time           {:.6e} s", g.gate_time);
        println!("amplitude           {:.6e}", g.amplitude);
        println!("theta               {:.12}", g.theta);
        println!("worst 1 - F         {:.3e}", g.worst_infidelity);
    }
    print_checks(&summary.checks);
}

fn stage_run(common: &Common, last: Stage) -> Result<bool> {
    let config = load(common)?;
    let run = run_through(&config, last)?;
    print_summary(&run.summary);
    println!("artifacts in {}", run.dir.display());
    Ok(run.summary.passed())
}

fn sweep(common: &Common, axis: SweepAxis, values: &[f64]) -> Result<bool> {
    let config = load(common)?;
    let rows = write_sweep(&config, axis, values)?;
    let failed = rows.iter().filter(|r| !r.ok()).count();
    println!("{} rows, {failed} failed, written to {}", rows.len(), config.output.join(SWEEP_FILE).display());
    Ok(failed == 0)
}

fn pulse_design(args: &PulseArgs) -> Result<bool> {
    let ion = species(&args.species)?;
    let mut design = PulseDesign::new(
        args.scheme,
        args.carrier_hz * TAU,
        args.periods,
        (args.detunings_hz.0 * TAU, args.detunings_hz.1 * TAU),
        args.field,
    );
    design.switch_time = args.switch_time;
    design.margin = args.margin;
    let sequence = build_pulse_sequence(&design, &ion)?;
    let residuals = verify_conditions(&sequence);
    fs::create_dir_all(&args.out)?;
    let path = args.out.join(PULSE_FILE);
    fs::write(&path, sequence.to_csv())?;
    println!("{} segments, period {:.6e} s, written to {}", sequence.segments.len(), sequence.period, path.display());
    print_checks(&[
        Check {
            name: "forces opposed",
            passed: residuals.opposition < ConditionResiduals::THRESHOLD,
            detail: format!("{:.3e}", residuals.opposition),
        },
        Check {
            name: "zero mean force per period",
            passed: residuals.mean.iter().all(|&m| m < ConditionResiduals::THRESHOLD),
            detail: format!("{:.3e}, {:.3e}", residuals.mean[0], residuals.mean[1]),
        },
    ]);
    Ok(residuals.passes())
}

fn execute(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Equilibrium(c) => stage_run(c, Stage::Equilibrium),
        Command::Modes(c) => stage_run(c, Stage::Modes),
        Command::Gate(c) => stage_run(c, Stage::Gate),
        Command::Sweep { common, axis, values } => sweep(common, *axis, values),
        Command::PulseDesign(args) => pulse_design(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
