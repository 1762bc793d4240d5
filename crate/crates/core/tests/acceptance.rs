//! Acceptance suite. Runs every criterion at its stated tolerance, prints
//! one PASS/FAIL line each and exits non-zero if any criterion fails.

mod common;

use std::process::ExitCode;

use nhslice::cases::Background;
use nhslice::driver::{convergence_sweep, integrate, IntegrateOptions, RunConfig, SweepResult, TestCase};
use nhslice::energy::{compute_transfers, relabeling_residual, InterfaceTheta};
use nhslice::identities::{run_suite, Identity};
use nhslice::model::{ColumnField, PrognosticState, VerticalMode};
use nhslice::remap::{build_column_plan, build_plan, remap_intensive, remap_state};
use nhslice::timeint::{ColumnProblem, IMEXTableau};
use rand::Rng;

use common::{random_state, rng, small_model};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Amortised per-run quantities checked by criteria 3, 6 and 9.
#[derive(Default)]
struct RunStats {
    transfer_defect: f64,
    mass_change: f64,
    theta_change: f64,
    newton_iterations: usize,
}

impl RunStats {
    fn absorb(&mut self, defect: f64, mass: f64, theta: f64, iters: usize) {
        self.transfer_defect = self.transfer_defect.max(defect);
        self.mass_change = self.mass_change.max(mass);
        self.theta_change = self.theta_change.max(theta);
        self.newton_iterations = self.newton_iterations.max(iters);
    }
}

const SWEEP_DTS: [f64; 5] = [3.75, 1.875, 0.9375, 0.46875, 0.234375];

fn sweep_config() -> RunConfig {
    let mut cfg = RunConfig {
        ne: 16,
        n: 30,
        length: 4.8e6,
        p_top: 1.0e4,
        spinup: 3000.0,
        spinup_dt: Some(30.0),
        run_length: 7200.0,
        dt: SWEEP_DTS[0],
        tableau: "ars222".into(),
        background: Background::default(),
        ..RunConfig::default()
    };
    cfg.gravity_wave.amplitude = 5.0;
    cfg.gravity_wave.half_width = 1.0e5;
    cfg
}

fn identity_suite(c2: bool) -> Outcome {
    let reports = run_suite(1000, 20_241);
    let wanted = |r: &&nhslice::identities::IdentityReport| {
        (r.identity == Identity::HorizontalIntegrationByParts) == c2
    };
    let picked: Vec<_> = reports.iter().filter(wanted).collect();
    let pass = picked.iter().all(|r| r.passed() && r.trials >= 1000);
    let worst = picked.iter().map(|r| r.max_defect).fold(0.0, f64::max);
    let failing: Vec<&str> = picked.iter().filter(|r| !r.passed()).map(|r| r.identity.name()).collect();
    outcome(
        pass,
        format!(
            "{} identities x {} trials, worst relative defect {worst:.2e} (tol 1e-13){}",
            picked.len(),
            picked[0].trials,
            if failing.is_empty() { String::new() } else { format!(", failing: {failing:?}") }
        ),
    )
}

fn transfer_equalities(stats: &RunStats) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut r = rng(303);
    let mut states = 0;
    for (n, ne, mode) in [(12, 4, VerticalMode::Eulerian), (30, 3, VerticalMode::Lagrangian), (7, 6, VerticalMode::Eulerian)] {
        let model = small_model(n, ne, mode);
        for _ in 0..40 {
            let amp = r.gen_range(0.1..1.0);
            let st = random_state(&model, &mut r, amp);
            let d = model.diagnose(&st).unwrap();
            let t = compute_transfers(&model, &st, &d);
            worst = t.equality_defects().into_iter().fold(worst, f64::max);
            states += 1;
        }
    }
    let pass = worst <= 1e-12 && stats.transfer_defect <= 1e-12;
    outcome(
        pass,
        format!(
            "{states} random states: {worst:.2e}; every gravity-wave run state: {:.2e} (tol 1e-12)",
            stats.transfer_defect
        ),
    )
}

fn relabeling() -> Outcome {
    let mut r = rng(404);
    let (mut tilde, mut naive) = (0.0_f64, f64::INFINITY);
    for (n, ne) in [(16, 3), (40, 2), (5, 4)] {
        let model = small_model(n, ne, VerticalMode::Eulerian);
        for _ in 0..10 {
            let st = random_state(&model, &mut r, 1.0);
            let d = model.diagnose(&st).unwrap();
            let amp = r.gen_range(1.0..100.0);
            let s = ColumnField::from_fn(model.ncol(), n + 1, |_, k| {
                if k == 0 || k == n {
                    0.0
                } else {
                    amp * r.gen_range(-1.0..1.0)
                }
            });
            tilde = tilde.max(relabeling_residual(&model, &st, &d, &s, InterfaceTheta::Tilde).unwrap().max_relative());
            naive = naive.min(relabeling_residual(&model, &st, &d, &s, InterfaceTheta::Naive).unwrap().max_relative());
        }
    }
    outcome(
        tilde <= 1e-12 && naive >= 1e-4,
        format!("tilde residual {tilde:.2e} (tol 1e-12), ablation residual {naive:.2e} (need >= 1e-4)"),
    )
}

/// Largest drift of any field; `u`, `v`, `w` are measured against 1 m/s
/// since they start at zero.
fn field_drift(a: &PrognosticState, b: &PrognosticState) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, (x, y)) in a.fields().iter().zip(b.fields()).enumerate() {
        let scale = if i < 3 { 1.0 } else { x.max_abs() };
        worst = worst.max(x.max_abs_diff(y) / scale);
    }
    worst
}

fn steady_state(stats: &mut RunStats) -> Outcome {
    let tab = IMEXTableau::ars232();
    let mut parts = Vec::new();
    let mut pass = true;
    for mode in [VerticalMode::Eulerian, VerticalMode::Lagrangian] {
        let cfg = RunConfig {
            case: TestCase::Rest,
            mode,
            spinup: 0.0,
            dt: 30.0,
            run_length: 30_000.0,
            ..RunConfig::default()
        };
        let model = cfg.build_model(0.0).unwrap();
        let st = cfg.initial_state(&model);
        let out = integrate(&model, &tab, st.clone(), 0.0, cfg.dt, 1000, IntegrateOptions::default()).unwrap();
        let s = &out.summary;
        stats.absorb(s.max_transfer_defect, s.max_mass_change, s.max_theta_change, s.max_newton_iterations);
        let drift = field_drift(&st, &out.state);
        pass &= drift <= 1e-10;
        parts.push(format!("{mode:?} {drift:.2e}"));
    }
    outcome(pass, format!("1000 steps, max per-field drift: {} (tol 1e-10)", parts.join(", ")))
}

fn newton_fd() -> Outcome {
    let mut r = rng(909);
    let mut worst: f64 = 0.0;
    let mut states = 0;
    for (n, ne, count) in [(12, 3, 34), (30, 2, 33), (64, 1, 33)] {
        let model = small_model(n, ne, VerticalMode::Eulerian);
        for _ in 0..count {
            let st = random_state(&model, &mut r, 1.0);
            let c = r.gen_range(0..model.ncol());
            let prob = ColumnProblem {
                grid: &model.vgrid,
                constants: model.constants(),
                p_top: model.p_top(),
                theta: st.theta.col(c),
                dpids: st.dpids.col(c),
                w_star: st.w.col(c),
                phi_star: st.phi.col(c),
                gamma: r.gen_range(0.5..40.0),
            };
            let phi = st.phi.col(c).to_vec();
            let jac = prob.jacobian(&phi).unwrap();
            for j in 0..n {
                let h = 1e-4 * (phi[j] - phi[j + 1]).abs();
                let (mut pp, mut pm) = (phi.clone(), phi.clone());
                pp[j] += h;
                pm[j] -= h;
                let (gp, gm) = (prob.residual(&pp).unwrap(), prob.residual(&pm).unwrap());
                for i in 0..n {
                    let fd = (gp[i] - gm[i]) / (2.0 * h);
                    let an = jac.get(i, j);
                    worst = worst.max((fd - an).abs() / an.abs().max(1.0));
                }
            }
            states += 1;
        }
    }
    outcome(worst <= 1e-6, format!("{states} column states, worst Jacobian defect {worst:.2e} (tol 1e-6)"))
}

fn remap_checks() -> Outcome {
    let mut r = rng(1010);
    let mut worst = [0.0_f64; 4];
    for (n, ne) in [(20, 3), (30, 2), (4, 5)] {
        let model = small_model(n, ne, VerticalMode::Lagrangian);
        let ds = model.vgrid.ds_mid();
        for trial in 0..20 {
            let st = random_state(&model, &mut r, 1.0);
            let plan = build_plan(&model, &st).unwrap();
            let out = remap_state(&model, &plan, &st, trial % 2 == 0).unwrap();
            for c in 0..model.ncol() {
                let tot = |s: &PrognosticState| {
                    let mut t = [0.0; 4];
                    let mut mag = [0.0; 4];
                    for m in 0..n {
                        let d = s.dpids.get(c, m) * ds[m];
                        for (k, v) in [d, s.theta.get(c, m) * ds[m], d * s.u.get(c, m), d * s.v.get(c, m)]
                            .into_iter()
                            .enumerate()
                        {
                            t[k] += v;
                            mag[k] += v.abs();
                        }
                    }
                    (t, mag)
                };
                let ((a, mag), (b, _)) = (tot(&st), tot(&out));
                for k in 0..4 {
                    worst[k] = worst[k].max((a[k] - b[k]).abs() / mag[k]);
                }
            }
        }
    }
    // adversarial sawtooth means on random source/target partitions
    let mut bounds_ok = true;
    for _ in 0..500 {
        let n = r.gen_range(4..64);
        let mut src = vec![0.0];
        let mut tgt = vec![0.0];
        for _ in 0..n {
            src.push(src.last().unwrap() + r.gen_range(0.05..3.0));
            tgt.push(tgt.last().unwrap() + r.gen_range(0.05..3.0));
        }
        let k = src[n] / tgt[n];
        tgt.iter_mut().for_each(|x| *x *= k);
        tgt[n] = src[n];
        let plan = build_column_plan(src, tgt, 0).unwrap();
        let q: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 } * r.gen_range(0.1..1.0)).collect();
        let (lo, hi) = q.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
        let out = remap_intensive(&plan, &q, true);
        bounds_ok &= out.iter().all(|v| *v >= lo - 1e-14 && *v <= hi + 1e-14);
    }
    let cons = worst.iter().fold(0.0_f64, |m, v| m.max(*v));
    outcome(
        cons <= 1e-13 && bounds_ok,
        format!(
            "mass {:.1e}, Theta {:.1e}, u {:.1e}, v {:.1e} (tol 1e-13); sawtooth bounds {}",
            worst[0],
            worst[1],
            worst[2],
            worst[3],
            if bounds_ok { "kept" } else { "violated" }
        ),
    )
}

fn energy_order(sw: &SweepResult) -> Outcome {
    let stable = sw.rows.iter().filter(|r| r.stable).count();
    let o = sw.orders.energy;
    let table: Vec<String> = sw.rows.iter().map(|r| format!("{}:{:.2e}", r.dt, r.rel_energy_change)).collect();
    outcome(
        stable >= 5 && (1.8..=2.2).contains(&o),
        format!("{stable} stable members, fitted order {o:.3} (need [1.8, 2.2]); |dE/E| {}", table.join(" ")),
    )
}

fn residual_orders(sw: &SweepResult) -> Outcome {
    let (op, oi) = (sw.orders.r_p, sw.orders.r_i);
    let ok_orders = (0.8..=1.2).contains(&op) && (0.8..=1.2).contains(&oi);
    let ratios: Vec<f64> = sw.rows.iter().filter(|r| r.stable).map(|r| r.max_abs_r_i / r.max_abs_r_k).collect();
    let ok_ratio = ratios.iter().all(|q| *q >= 100.0);
    let ratio_txt: Vec<String> = ratios.iter().map(|q| format!("{q:.1}")).collect();
    outcome(
        ok_orders && ok_ratio,
        format!(
            "order R_P {op:.3}, R_I {oi:.3} (need [0.8, 1.2]); max|R_I|/max|R_K| per dt {} (need >= 100)",
            ratio_txt.join(" ")
        ),
    )
}

fn main() -> ExitCode {
    let mut stats = RunStats::default();
    let sweep = convergence_sweep(&sweep_config(), &SWEEP_DTS).expect("sweep runs");
    for r in &sweep.rows {
        stats.absorb(r.max_transfer_defect, r.max_mass_change, r.max_theta_change, r.max_newton_iterations);
    }
    let c5 = steady_state(&mut stats);

    let results: Vec<(usize, &str, Outcome)> = vec![
        (1, "vertical operator identities", identity_suite(false)),
        (2, "horizontal integration by parts", identity_suite(true)),
        (3, "transfer-term equalities", transfer_equalities(&stats)),
        (4, "relabeling neutrality", relabeling()),
        (5, "steady rest state", c5),
        (
            6,
            "mass and Theta conservation",
            outcome(
                stats.mass_change <= 1e-13 && stats.theta_change <= 1e-13,
                format!(
                    "worst per-step change over all runs: mass {:.2e}, Theta {:.2e} (tol 1e-13)",
                    stats.mass_change, stats.theta_change
                ),
            ),
        ),
        (7, "energy convergence", energy_order(&sweep)),
        (8, "residual convergence", residual_orders(&sweep)),
        (9, "Newton solver", {
            let mut o = newton_fd();
            o.pass &= stats.newton_iterations <= 5;
            o.detail.push_str(&format!("; max iterations over all runs {} (need <= 5)", stats.newton_iterations));
            o
        }),
        (10, "vertical remap", remap_checks()),
    ];

    let mut failed = 0;
    for (n, name, o) in &results {
        println!("{} criterion {n:>2} ({name}): {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
