//! Run configuration, the spin-up/audit run loop, convergence sweeps and
//! output files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::cases::{init_gravity_wave, init_hydrostatic_rest, Background, GravityWave};
use crate::energy::{
    compute_energies, compute_energy_change, compute_transfers, residuals_from_change, BudgetRow,
    BudgetWriter, Energies, Transfers,
};
use crate::hops::SeGrid1D;
use crate::model::{write_snapshot, Model, ModelConfig, ModelError, PrognosticState, VerticalMode};
use crate::remap::{build_plan, remap_state, RemapError};
use crate::timeint::{ark_step, HeviProblem, IMEXTableau, TimeIntError};
use crate::vcoord::{build_hybrid, build_uniform_grid, write_level_table, GridError, PhysicalConstants};
use crate::vops::vint_mid;

#[derive(Debug, Error)]
pub enum DriverError {
    #[error("config: {0}")]
    Config(String),
    #[error("grid: {0}")]
    Grid(#[from] GridError),
    #[error("model: {0}")]
    Model(#[from] ModelError),
    #[error("remap: {0}")]
    Remap(#[from] RemapError),
    #[error("step {step} (t = {time} s): {source}")]
    Step {
        step: usize,
        time: f64,
        #[source]
        source: TimeIntError,
    },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl DriverError {
    /// Column reported by a failed implicit solve, if any.
    pub fn failed_column(&self) -> Option<usize> {
        match self {
            DriverError::Step {
                source: TimeIntError::NewtonFailed { column, .. },
                ..
            } => Some(*column),
            DriverError::Step {
                source: TimeIntError::Model(ModelError::NonPhysical { column, .. }),
                ..
            } => Some(*column),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestCase {
    Rest,
    GravityWave,
}

/// Everything a run depends on. Serialized verbatim into the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// spectral elements in x
    pub ne: usize,
    /// vertical levels
    pub n: usize,
    /// domain length (m)
    pub length: f64,
    /// model top pressure (Pa)
    pub p_top: f64,
    /// reference surface pressure of the hybrid table and initial state (Pa)
    pub surface_pressure: f64,
    /// exponent of the hybrid `B` profile
    pub hybrid_exponent: f64,
    pub mode: VerticalMode,
    /// audit time step (s)
    pub dt: f64,
    /// audit window length (s)
    pub run_length: f64,
    /// spin-up length (s); zero skips it
    pub spinup: f64,
    /// spin-up time step (s); defaults to `dt`
    pub spinup_dt: Option<f64>,
    /// hyperviscosity during spin-up (m^4/s); the audit window always uses 0
    pub nu: f64,
    /// steps between budget rows
    pub diag_interval: usize,
    pub case: TestCase,
    /// builtin tableau name or path to a tableau file
    pub tableau: String,
    /// steps between remaps in Lagrangian mode
    pub remap_interval: usize,
    pub monotone_remap: bool,
    /// average start- and end-of-step transfers in the residuals
    pub centered_transfers: bool,
    pub output_dir: PathBuf,
    pub background: Background,
    pub gravity_wave: GravityWave,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            ne: 16,
            n: 30,
            length: 4.8e6,
            p_top: 1.0e4,
            surface_pressure: 1.0e5,
            hybrid_exponent: 1.4,
            mode: VerticalMode::Eulerian,
            dt: 30.0,
            run_length: 7200.0,
            spinup: 3000.0,
            spinup_dt: None,
            nu: 0.0,
            diag_interval: 1,
            case: TestCase::GravityWave,
            tableau: "ars232".into(),
            remap_interval: 3,
            monotone_remap: true,
            centered_transfers: false,
            output_dir: PathBuf::from("out"),
            background: Background::default(),
            gravity_wave: GravityWave {
                amplitude: 1.0,
                half_width: 1.0e5,
                center: 0.5,
                mean_wind: 0.0,
            },
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, DriverError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| DriverError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), DriverError> {
        let bad = |m: &str| Err(DriverError::Config(m.into()));
        if self.ne == 0 || self.n < 2 {
            return bad("need ne >= 1 and n >= 2");
        }
        if !(self.length > 0.0) || !(self.p_top > 0.0) || !(self.surface_pressure > self.p_top) {
            return bad("need length > 0 and 0 < p_top < surface_pressure");
        }
        if !(self.dt > 0.0) || !(self.run_length >= 0.0) || !(self.spinup >= 0.0) {
            return bad("need dt > 0, run_length >= 0, spinup >= 0");
        }
        if matches!(self.spinup_dt, Some(d) if !(d > 0.0)) {
            return bad("spinup_dt must be positive");
        }
        if !(self.nu >= 0.0) {
            return bad("nu must be non-negative");
        }
        if self.diag_interval == 0 || self.remap_interval == 0 {
            return bad("diag_interval and remap_interval must be at least 1");
        }
        steps_in(self.run_length, self.dt)?;
        Ok(())
    }

    /// Model for the given hyperviscosity.
    pub fn build_model(&self, nu: f64) -> Result<Model, DriverError> {
        let grid = build_uniform_grid(self.n, 0.0, 1.0)?;
        let hybrid = build_hybrid(&grid, self.p_top, self.surface_pressure, self.hybrid_exponent)?;
        let config = ModelConfig {
            vertical_mode: self.mode,
            nu,
            remap_interval: self.remap_interval,
            constants: PhysicalConstants::default(),
        };
        Ok(Model::new(grid, hybrid, SeGrid1D::new(self.ne, self.length), config)?)
    }

    pub fn initial_state(&self, model: &Model) -> PrognosticState {
        match self.case {
            TestCase::Rest => init_hydrostatic_rest(model, self.background, self.surface_pressure),
            TestCase::GravityWave => {
                init_gravity_wave(model, self.background, self.surface_pressure, self.gravity_wave)
            }
        }
    }

    pub fn integrate_options(&self, diag_interval: usize) -> IntegrateOptions {
        IntegrateOptions {
            diag_interval,
            monotone_remap: self.monotone_remap,
            centered_transfers: self.centered_transfers,
        }
    }

    pub fn load_tableau(&self) -> Result<IMEXTableau, DriverError> {
        let tab = match IMEXTableau::builtin(&self.tableau) {
            Some(t) => t,
            None => {
                let text = std::fs::read_to_string(&self.tableau).map_err(|e| {
                    DriverError::Config(format!("tableau {:?} is neither builtin nor readable: {e}", self.tableau))
                })?;
                IMEXTableau::from_text(&text).map_err(|e| DriverError::Config(e.to_string()))?
            }
        };
        tab.validate().map_err(|e| DriverError::Config(e.to_string()))?;
        Ok(tab)
    }
}

fn steps_in(length: f64, dt: f64) -> Result<usize, DriverError> {
    let k = (length / dt).round();
    if (k * dt - length).abs() > 1e-9 * length.max(dt) {
        return Err(DriverError::Config(format!(
            "window {length} s is not a whole number of {dt} s steps"
        )));
    }
    Ok(k as usize)
}

/// sha256 checksums of the vertical table and the horizontal node set.
pub fn grid_checksums(model: &Model) -> (String, String) {
    let vt = write_level_table(&model.vgrid, &model.hybrid);
    let mut ht = format!("ne {} length {:?}\n", model.hgrid.ne(), model.hgrid.length());
    for (x, w) in model.hgrid.columns_x().iter().zip(model.hgrid.mass()) {
        let _ = writeln!(ht, "{x:?} {w:?}");
    }
    (hex(&Sha256::digest(vt.as_bytes())), hex(&Sha256::digest(ht.as_bytes())))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Global mass and Theta (horizontal quadrature of column sums).
pub fn global_mass_theta(model: &Model, st: &PrognosticState) -> (f64, f64) {
    let g = &model.vgrid;
    let mass: Vec<f64> = (0..model.ncol()).map(|c| vint_mid(g, st.dpids.col(c)).unwrap()).collect();
    let theta: Vec<f64> = (0..model.ncol()).map(|c| vint_mid(g, st.theta.col(c)).unwrap()).collect();
    (model.hgrid.hint(&mass), model.hgrid.hint(&theta))
}

/// Summary of an integration window.
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct AuditSummary {
    pub steps: usize,
    pub dt: f64,
    pub e_start: f64,
    pub e_end: f64,
    /// `|E_end - E_start| / |E_start|`
    pub rel_energy_change: f64,
    pub max_abs_r_p: f64,
    pub max_abs_r_i: f64,
    pub max_abs_r_k: f64,
    /// largest per-step relative change of global mass and Theta
    pub max_mass_change: f64,
    pub max_theta_change: f64,
    /// largest relative defect of the three transfer equalities
    pub max_transfer_defect: f64,
    pub max_newton_iterations: usize,
    pub remaps: usize,
    /// sum of energy changes caused by remapping (J/m^2)
    pub remap_energy_change: f64,
}

#[derive(Debug, Clone)]
pub struct Integration {
    pub rows: Vec<BudgetRow>,
    pub summary: AuditSummary,
    pub state: PrognosticState,
    pub time: f64,
}

/// Bookkeeping switches for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    /// steps between stored budget rows
    pub diag_interval: usize,
    pub monotone_remap: bool,
    /// average start- and end-of-step transfers in the residuals
    pub centered_transfers: bool,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            diag_interval: 1,
            monotone_remap: true,
            centered_transfers: false,
        }
    }
}

/// Integrates `steps` steps from `state`, auditing energies, transfers,
/// mass and Theta after every step. Residuals use the transfers at the
/// step start and energy changes formed summand by summand.
pub fn integrate(
    model: &Model,
    tab: &IMEXTableau,
    state: PrognosticState,
    t0: f64,
    dt: f64,
    steps: usize,
    opts: IntegrateOptions,
) -> Result<Integration, DriverError> {
    let problem = HeviProblem::new(model);
    let lagrangian = model.config.vertical_mode == VerticalMode::Lagrangian;
    let start = state.clone();
    let diag_start = model.diagnose(&start)?;
    let mut st = state;
    let mut diag0 = diag_start.clone();
    let mut time = t0;
    let mut rows = Vec::new();
    let mut e0 = compute_energies(model, &st, &diag0);
    let mut tr0 = compute_transfers(model, &st, &diag0);
    let mut s = AuditSummary {
        dt,
        e_start: e0.total(),
        ..AuditSummary::default()
    };
    s.max_transfer_defect = defect(&tr0);
    let (mut m0, mut th0) = global_mass_theta(model, &st);
    for step in 1..=steps {
        let (next, rep) = ark_step(&problem, &st, dt, tab).map_err(|source| DriverError::Step {
            step,
            time,
            source,
        })?;
        time = t0 + step as f64 * dt;
        if !next.is_finite() {
            return Err(DriverError::Step {
                step,
                time,
                source: TimeIntError::Model(ModelError::NonFinite),
            });
        }
        s.max_newton_iterations = s.max_newton_iterations.max(rep.max_iterations);
        let at_step = |e: ModelError| DriverError::Step {
            step,
            time,
            source: TimeIntError::Model(e),
        };
        let diag1 = model.diagnose(&next).map_err(at_step)?;
        let change = compute_energy_change(model, &st, &diag0, &next, &diag1);
        let tr_end = compute_transfers(model, &next, &diag1);
        s.max_transfer_defect = s.max_transfer_defect.max(defect(&tr_end));
        let tr = if opts.centered_transfers { tr0.averaged(&tr_end) } else { tr0 };
        let res = residuals_from_change(&change, &tr, dt);
        s.max_abs_r_p = s.max_abs_r_p.max(res.r_p.abs());
        s.max_abs_r_i = s.max_abs_r_i.max(res.r_i.abs());
        s.max_abs_r_k = s.max_abs_r_k.max(res.r_k.abs());
        let (m1, th1) = global_mass_theta(model, &next);
        s.max_mass_change = s.max_mass_change.max(((m1 - m0) / m0).abs());
        s.max_theta_change = s.max_theta_change.max(((th1 - th0) / th0).abs());
        let mut e1 = compute_energies(model, &next, &diag1);
        st = next;
        diag0 = diag1;
        tr0 = tr_end;
        (m0, th0) = (m1, th1);
        if lagrangian && step % model.config.remap_interval == 0 {
            let plan = build_plan(model, &st)?;
            if !plan.is_identity() {
                let remapped = remap_state(model, &plan, &st, opts.monotone_remap)?;
                let diag_r = model.diagnose(&remapped).map_err(at_step)?;
                s.remaps += 1;
                s.remap_energy_change += compute_energy_change(model, &st, &diag0, &remapped, &diag_r).total();
                e1 = compute_energies(model, &remapped, &diag_r);
                tr0 = compute_transfers(model, &remapped, &diag_r);
                s.max_transfer_defect = s.max_transfer_defect.max(defect(&tr0));
                let (m2, th2) = global_mass_theta(model, &remapped);
                s.max_mass_change = s.max_mass_change.max(((m2 - m0) / m0).abs());
                s.max_theta_change = s.max_theta_change.max(((th2 - th0) / th0).abs());
                (m0, th0) = (m2, th2);
                st = remapped;
                diag0 = diag_r;
            }
        }
        if step % opts.diag_interval == 0 {
            rows.push(BudgetRow::new(time, &e1, &tr, &res));
        }
        e0 = e1;
    }
    s.steps = steps;
    s.e_end = e0.total();
    let total = compute_energy_change(model, &start, &diag_start, &st, &diag0).total();
    s.rel_energy_change = (total / s.e_start).abs();
    Ok(Integration {
        rows,
        summary: s,
        state: st,
        time,
    })
}

fn defect(tr: &Transfers) -> f64 {
    tr.equality_defects().into_iter().fold(0.0, f64::max)
}

/// Spin-up with the configured hyperviscosity; returns the state and time.
pub fn spin_up(cfg: &RunConfig, tab: &IMEXTableau) -> Result<(PrognosticState, f64), DriverError> {
    let model = cfg.build_model(cfg.nu)?;
    let st = cfg.initial_state(&model);
    if cfg.spinup == 0.0 {
        return Ok((st, 0.0));
    }
    let dt = cfg.spinup_dt.unwrap_or(cfg.dt);
    let steps = steps_in(cfg.spinup, dt)?;
    log::info!("spin-up: {steps} steps of {dt} s, nu = {}", cfg.nu);
    let out = integrate(&model, tab, st, 0.0, dt, steps, cfg.integrate_options(usize::MAX))?;
    Ok((out.state, out.time))
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub model: Model,
    pub audit: Integration,
}

/// Spin-up followed by the adiabatic audit window (`nu = 0`).
pub fn run(cfg: &RunConfig) -> Result<RunOutput, DriverError> {
    cfg.validate()?;
    let tab = cfg.load_tableau()?;
    let (st, t0) = spin_up(cfg, &tab)?;
    let model = cfg.build_model(0.0)?;
    let steps = steps_in(cfg.run_length, cfg.dt)?;
    log::info!("audit window: {steps} steps of {} s", cfg.dt);
    let audit = integrate(&model, &tab, st, t0, cfg.dt, steps, cfg.integrate_options(cfg.diag_interval))?;
    Ok(RunOutput { model, audit })
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    status: &'a str,
    error: Option<String>,
    failed_step: Option<usize>,
    failed_column: Option<usize>,
    vertical_grid_sha256: String,
    horizontal_grid_sha256: String,
    summary: Option<&'a AuditSummary>,
    config: &'a RunConfig,
}

pub const BUDGET_FILE: &str = "budget.csv";
pub const SNAPSHOT_FILE: &str = "final_state.txt";
pub const MANIFEST_FILE: &str = "manifest.toml";
pub const SWEEP_FILE: &str = "sweep.csv";

fn write_manifest(
    dir: &Path,
    cfg: &RunConfig,
    model: &Model,
    summary: Option<&AuditSummary>,
    err: Option<&DriverError>,
) -> Result<(), DriverError> {
    let (v, h) = grid_checksums(model);
    let m = Manifest {
        status: if err.is_some() { "failed" } else { "ok" },
        error: err.map(|e| e.to_string()),
        failed_step: err.and_then(|e| match e {
            DriverError::Step { step, .. } => Some(*step),
            _ => None,
        }),
        failed_column: err.and_then(DriverError::failed_column),
        vertical_grid_sha256: v,
        horizontal_grid_sha256: h,
        summary,
        config: cfg,
    };
    let text = toml::to_string(&m).map_err(|e| DriverError::Config(e.to_string()))?;
    std::fs::write(dir.join(MANIFEST_FILE), text)?;
    Ok(())
}

/// Runs `cfg` and writes the budget, final snapshot and manifest into
/// `dir`. A failed run still writes its manifest before returning the error.
pub fn run_to_dir(cfg: &RunConfig, dir: &Path) -> Result<AuditSummary, DriverError> {
    std::fs::create_dir_all(dir)?;
    let model = cfg.build_model(0.0)?;
    match run(cfg) {
        Ok(out) => {
            let mut w = BudgetWriter::new(std::fs::File::create(dir.join(BUDGET_FILE))?);
            for row in &out.audit.rows {
                w.write(row)?;
            }
            w.flush()?;
            let (v, _) = grid_checksums(&out.model);
            std::fs::write(dir.join(SNAPSHOT_FILE), write_snapshot(&out.audit.state, &v, out.audit.time))?;
            write_manifest(dir, cfg, &out.model, Some(&out.audit.summary), None)?;
            Ok(out.audit.summary)
        }
        Err(e) => {
            write_manifest(dir, cfg, &model, None, Some(&e))?;
            Err(e)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub dt: f64,
    pub stable: bool,
    pub rel_energy_change: f64,
    pub max_abs_r_p: f64,
    pub max_abs_r_i: f64,
    pub max_abs_r_k: f64,
    pub max_newton_iterations: usize,
    pub max_mass_change: f64,
    pub max_theta_change: f64,
    pub max_transfer_defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepOrders {
    pub energy: f64,
    pub r_p: f64,
    pub r_i: f64,
    pub r_k: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub orders: SweepOrders,
}

/// Least-squares slope of `log y` against `log x`.
pub fn fitted_order(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(_, y)| **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// One audit window per time step, all from the same spun-up state.
/// Members that fail or blow up are flagged and left out of the fits.
pub fn convergence_sweep(cfg: &RunConfig, dts: &[f64]) -> Result<SweepResult, DriverError> {
    cfg.validate()?;
    let tab = cfg.load_tableau()?;
    let (st, t0) = spin_up(cfg, &tab)?;
    let model = cfg.build_model(0.0)?;
    let mut rows = Vec::new();
    for &dt in dts {
        let steps = steps_in(cfg.run_length, dt)?;
        let row = match integrate(&model, &tab, st.clone(), t0, dt, steps, cfg.integrate_options(usize::MAX)) {
            Ok(out) => {
                let s = out.summary;
                SweepRow {
                    dt,
                    stable: s.rel_energy_change.is_finite() && s.rel_energy_change < 1e-2,
                    rel_energy_change: s.rel_energy_change,
                    max_abs_r_p: s.max_abs_r_p,
                    max_abs_r_i: s.max_abs_r_i,
                    max_abs_r_k: s.max_abs_r_k,
                    max_newton_iterations: s.max_newton_iterations,
                    max_mass_change: s.max_mass_change,
                    max_theta_change: s.max_theta_change,
                    max_transfer_defect: s.max_transfer_defect,
                }
            }
            Err(e) => {
                log::warn!("dt = {dt}: {e}");
                SweepRow {
                    dt,
                    stable: false,
                    rel_energy_change: f64::NAN,
                    max_abs_r_p: f64::NAN,
                    max_abs_r_i: f64::NAN,
                    max_abs_r_k: f64::NAN,
                    max_newton_iterations: 0,
                    max_mass_change: f64::NAN,
                    max_theta_change: f64::NAN,
                    max_transfer_defect: f64::NAN,
                }
            }
        };
        log::info!("dt = {dt}: {row:?}");
        rows.push(row);
    }
    let ok: Vec<&SweepRow> = rows.iter().filter(|r| r.stable).collect();
    let x: Vec<f64> = ok.iter().map(|r| r.dt).collect();
    let fit = |f: fn(&SweepRow) -> f64| fitted_order(&x, &ok.iter().map(|r| f(r)).collect::<Vec<_>>());
    let orders = SweepOrders {
        energy: fit(|r| r.rel_energy_change),
        r_p: fit(|r| r.max_abs_r_p),
        r_i: fit(|r| r.max_abs_r_i),
        r_k: fit(|r| r.max_abs_r_k),
    };
    Ok(SweepResult { rows, orders })
}

/// Writes the sweep table (one row per member) to `dir`.
pub fn write_sweep(dir: &Path, sweep: &SweepResult) -> Result<(), DriverError> {
    std::fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join(SWEEP_FILE))?;
    for r in &sweep.rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Energies of a state under the audit model; convenience for callers.
pub fn energies(model: &Model, st: &PrognosticState) -> Result<Energies, DriverError> {
    let d = model.diagnose(st)?;
    Ok(compute_energies(model, st, &d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip_and_defaults() {
        let cfg = RunConfig::default();
        assert_eq!(RunConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
        let partial = RunConfig::from_toml("ne = 4\nmode = \"lagrangian\"\n").unwrap();
        assert_eq!(partial.ne, 4);
        assert_eq!(partial.mode, VerticalMode::Lagrangian);
        assert!(RunConfig::from_toml("nee = 4").is_err());
        assert!(RunConfig::from_toml("dt = -1.0").is_err());
        assert!(RunConfig::from_toml("dt = 7.0\nrun_length = 100.0").is_err());
    }

    #[test]
    fn fitted_order_of_power_law() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(1.7)).collect();
        assert!((fitted_order(&x, &y) - 1.7).abs() < 1e-12);
    }

    #[test]
    fn tableau_lookup() {
        let mut cfg = RunConfig::default();
        assert_eq!(cfg.load_tableau().unwrap().name, "ars232");
        cfg.tableau = "/nonexistent/tab".into();
        assert!(cfg.load_tableau().is_err());
    }
}
