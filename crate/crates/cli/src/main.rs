use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use nhslice::driver::{convergence_sweep, run_to_dir, write_sweep, RunConfig, TestCase};
use nhslice::identities::run_suite;
use nhslice::model::VerticalMode;

/// Nonhydrostatic vertical-slice dynamical core with an energy budget audit.
#[derive(Parser)]
#[command(name = "nhslice", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spin up, then run the adiabatic audit window and write the outputs.
    Run(ConfigArgs),
    /// Audit windows over a dyadic list of time steps from one spun-up state.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        /// Number of time steps, halving from --dt.
        #[arg(long, default_value_t = 5)]
        points: usize,
        /// Explicit comma-separated time steps; overrides --points.
        #[arg(long, value_delimiter = ',')]
        dts: Vec<f64>,
    },
    /// Run the randomised operator identity suite.
    ValidateOperators {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Print the resolved configuration as TOML.
    PrintConfig(ConfigArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Eulerian,
    Lagrangian,
}

#[derive(Clone, Copy, ValueEnum)]
enum Case {
    Rest,
    GravityWave,
}

/// Config file plus per-field overrides.
#[derive(Args)]
struct ConfigArgs {
    /// TOML run configuration; unset fields take their defaults.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long)]
    ne: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    /// Domain length (m).
    #[arg(long)]
    length: Option<f64>,
    /// Model top pressure (Pa).
    #[arg(long)]
    p_top: Option<f64>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Audit time step (s).
    #[arg(long)]
    dt: Option<f64>,
    /// Audit window (s).
    #[arg(long)]
    run_length: Option<f64>,
    /// Spin-up length (s).
    #[arg(long)]
    spinup: Option<f64>,
    #[arg(long)]
    spinup_dt: Option<f64>,
    /// Steps between budget rows.
    #[arg(long)]
    diag_interval: Option<usize>,
    #[arg(long, value_enum)]
    case: Option<Case>,
    /// Builtin tableau name or tableau file.
    #[arg(long)]
    tableau: Option<String>,
    /// Spin-up hyperviscosity (m^4/s).
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    remap_interval: Option<usize>,
    #[arg(long)]
    amplitude: Option<f64>,
    #[arg(long)]
    centered_transfers: bool,
    #[arg(long, env = "SLICE_OUTPUT_DIR")]
    output_dir: Option<PathBuf>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                RunConfig::from_toml(&text)?
            }
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($f:ident),*) => {$(
                if let Some(v) = self.$f.clone() {
                    cfg.$f = v;
                }
            )*};
        }
        set!(ne, n, length, p_top, dt, run_length, spinup, diag_interval, tableau, nu, remap_interval, output_dir);
        if self.spinup_dt.is_some() {
            cfg.spinup_dt = self.spinup_dt;
        }
        if let Some(m) = self.mode {
            cfg.mode = match m {
                Mode::Eulerian => VerticalMode::Eulerian,
                Mode::Lagrangian => VerticalMode::Lagrangian,
            };
        }
        if let Some(c) = self.case {
            cfg.case = match c {
                Case::Rest => TestCase::Rest,
                Case::GravityWave => TestCase::GravityWave,
            };
        }
        if let Some(a) = self.amplitude {
            cfg.gravity_wave.amplitude = a;
        }
        cfg.centered_transfers |= self.centered_transfers;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run(args) => {
            let cfg = args.resolve()?;
            let s = run_to_dir(&cfg, &cfg.output_dir)?;
            println!(
                "steps {}  |dE/E| {:.3e}  max|R_P| {:.3e}  max|R_I| {:.3e}  max|R_K| {:.3e}  newton <= {}",
                s.steps, s.rel_energy_change, s.max_abs_r_p, s.max_abs_r_i, s.max_abs_r_k, s.max_newton_iterations
            );
            println!("wrote {}", cfg.output_dir.display());
        }
        Command::Sweep { config, points, dts } => {
            let cfg = config.resolve()?;
            let dts = if dts.is_empty() {
                (0..points).map(|k| cfg.dt / 2f64.powi(k as i32)).collect()
            } else {
                dts
            };
            if dts.len() < 2 {
                bail!("a sweep needs at least two time steps");
            }
            let sweep = convergence_sweep(&cfg, &dts)?;
            write_sweep(&cfg.output_dir, &sweep)?;
            println!("{:>12} {:>7} {:>12} {:>12} {:>12} {:>12}", "dt", "stable", "|dE/E|", "max|R_P|", "max|R_I|", "max|R_K|");
            for r in &sweep.rows {
                println!(
                    "{:>12} {:>7} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e}",
                    r.dt, r.stable, r.rel_energy_change, r.max_abs_r_p, r.max_abs_r_i, r.max_abs_r_k
                );
            }
            let o = &sweep.orders;
            println!("orders: energy {:.3}  R_P {:.3}  R_I {:.3}  R_K {:.3}", o.energy, o.r_p, o.r_i, o.r_k);
        }
        Command::ValidateOperators { trials, seed } => {
            let reports = run_suite(trials, seed);
            let mut ok = true;
            for r in &reports {
                println!(
                    "{} {:<45} trials {:>6}  max defect {:.2e}  tol {:.0e}",
                    if r.passed() { "PASS" } else { "FAIL" },
                    r.identity.name(),
                    r.trials,
                    r.max_defect,
                    r.tolerance
                );
                ok &= r.passed();
            }
            return Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE });
        }
        Command::PrintConfig(args) => print!("{}", args.resolve()?.to_toml()),
    }
    Ok(ExitCode::SUCCESS)
}
