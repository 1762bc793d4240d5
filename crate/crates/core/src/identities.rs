//! Randomised checks of the discrete operator identities the energy
//! budget relies on. Each check returns a relative defect: the absolute
//! difference of the two sides over the sum of absolute summands.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::hops::SeGrid1D;
use crate::vcoord::LevelGrid;
use crate::vops::{
    avg_i2m_into, avg_m2i_into, ddn_i2m_into, ddn_m2i_into, sb81_mass_adv_int_expanded,
    sb81_mass_adv_int_flux_form, sb81_mass_adv_int_into, sb81_mass_adv_mid_flux_form,
    sb81_mass_adv_mid_into, vint_int, vint_mid, MidBoundary,
};

/// Default tolerance of every identity.
pub const TOLERANCE: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Identity {
    AveragingByParts,
    IntegrationByParts,
    Commuting,
    InterfaceProductRule,
    MidpointProductRule,
    Sb81MidpointForms,
    Sb81InterfaceForms,
    Sb81InterfaceExpanded,
    HorizontalIntegrationByParts,
}

impl Identity {
    pub const VERTICAL: [Identity; 8] = [
        Identity::AveragingByParts,
        Identity::IntegrationByParts,
        Identity::Commuting,
        Identity::InterfaceProductRule,
        Identity::MidpointProductRule,
        Identity::Sb81MidpointForms,
        Identity::Sb81InterfaceForms,
        Identity::Sb81InterfaceExpanded,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Identity::AveragingByParts => "averaging by parts",
            Identity::IntegrationByParts => "vertical integration by parts",
            Identity::Commuting => "average/derivative commuting",
            Identity::InterfaceProductRule => "interface product rule",
            Identity::MidpointProductRule => "midpoint product rule",
            Identity::Sb81MidpointForms => "SB81 midpoint advective = flux form",
            Identity::Sb81InterfaceForms => "SB81 interface averaged = flux form",
            Identity::Sb81InterfaceExpanded => "SB81 interface averaged = expanded stencil",
            Identity::HorizontalIntegrationByParts => "horizontal integration by parts",
        }
    }
}

/// Nonuniform grid with `n` layers whose neighbouring thickness ratios
/// stay within `[0.2, 5]`.
pub fn random_grid(rng: &mut impl Rng, n: usize) -> LevelGrid {
    let mut ds = Vec::with_capacity(n);
    let mut d: f64 = 1.0;
    for _ in 0..n {
        ds.push(d);
        d = (d * rng.gen_range(0.45..2.2_f64)).clamp(0.05, 20.0);
    }
    let total: f64 = ds.iter().sum();
    let mut s = vec![0.0];
    for v in &ds {
        s.push(s.last().unwrap() + v / total);
    }
    s[n] = 1.0;
    LevelGrid::from_interfaces(s).expect("increasing interfaces")
}

fn field(rng: &mut impl Rng, len: usize) -> Vec<f64> {
    let offset = rng.gen_range(-2.0..2.0);
    (0..len).map(|_| offset + rng.gen_range(-1.0..1.0)).collect()
}

/// Mass flux with zero ends.
fn flux(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let mut s = field(rng, n + 1);
    s[0] = 0.0;
    s[n] = 0.0;
    s
}

fn rel(diff: f64, mag: f64) -> f64 {
    if mag == 0.0 {
        diff.abs()
    } else {
        diff.abs() / mag
    }
}

fn pointwise(a: &[f64], b: &[f64], mag: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .zip(mag)
        .map(|((x, y), m)| rel(x - y, *m))
        .fold(0.0, f64::max)
}

/// Relative defect of one vertical identity on `grid` with random data.
pub fn check_vertical(id: Identity, grid: &LevelGrid, rng: &mut impl Rng) -> f64 {
    let n = grid.n();
    let (dsm, dsi) = (grid.ds_mid(), grid.ds_int());
    let mut mid = vec![0.0; n];
    let mut int = vec![0.0; n + 1];
    match id {
        Identity::AveragingByParts => {
            let p = field(rng, n);
            let phi = field(rng, n + 1);
            avg_m2i_into(grid, &p, &mut int);
            avg_i2m_into(grid, &phi, &mut mid);
            let lhs: Vec<f64> = int.iter().zip(&phi).map(|(a, b)| a * b).collect();
            let rhs: Vec<f64> = mid.iter().zip(&p).map(|(a, b)| a * b).collect();
            let l = vint_int(grid, &lhs).unwrap();
            let r = vint_mid(grid, &rhs).unwrap();
            let mag = vint_int(grid, &lhs.iter().map(|v| v.abs()).collect::<Vec<_>>()).unwrap()
                + vint_mid(grid, &rhs.iter().map(|v| v.abs()).collect::<Vec<_>>()).unwrap();
            rel(l - r, mag)
        }
        Identity::IntegrationByParts => {
            let p = field(rng, n);
            let phi = field(rng, n + 1);
            let bc = MidBoundary {
                top: rng.gen_range(-2.0..2.0),
                surface: rng.gen_range(-2.0..2.0),
            };
            ddn_m2i_into(grid, &p, bc, &mut int);
            ddn_i2m_into(grid, &phi, &mut mid);
            let a: Vec<f64> = phi.iter().zip(&int).map(|(x, y)| x * y).collect();
            let b: Vec<f64> = mid.iter().zip(&p).map(|(x, y)| x * y).collect();
            let boundary = phi[n] * bc.surface - phi[0] * bc.top;
            let l = vint_int(grid, &a).unwrap() + vint_mid(grid, &b).unwrap();
            let mag = vint_int(grid, &a.iter().map(|v| v.abs()).collect::<Vec<_>>()).unwrap()
                + vint_mid(grid, &b.iter().map(|v| v.abs()).collect::<Vec<_>>()).unwrap()
                + boundary.abs();
            rel(l - boundary, mag)
        }
        Identity::Commuting => {
            let phi = field(rng, n + 1);
            ddn_i2m_into(grid, &phi, &mut mid);
            let mut lhs = vec![0.0; n + 1];
            avg_m2i_into(grid, &mid, &mut lhs);
            let mut bar = vec![0.0; n];
            avg_i2m_into(grid, &phi, &mut bar);
            ddn_m2i_into(
                grid,
                &bar,
                MidBoundary {
                    top: phi[0],
                    surface: phi[n],
                },
                &mut int,
            );
            let scale = phi.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            let mag: Vec<f64> = (0..=n).map(|k| 4.0 * scale / dsi[k].min(if k < n { dsm[k] } else { dsm[n - 1] })).collect();
            pointwise(&lhs, &int, &mag)
        }
        Identity::InterfaceProductRule => {
            let a = field(rng, n + 1);
            let b = field(rng, n + 1);
            let ab: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
            let mut d_ab = vec![0.0; n];
            let (mut da, mut db, mut abar, mut bbar) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
            ddn_i2m_into(grid, &ab, &mut d_ab);
            ddn_i2m_into(grid, &a, &mut da);
            ddn_i2m_into(grid, &b, &mut db);
            avg_i2m_into(grid, &a, &mut abar);
            avg_i2m_into(grid, &b, &mut bbar);
            let rhs: Vec<f64> = (0..n).map(|m| bbar[m] * da[m] + abar[m] * db[m]).collect();
            let mag: Vec<f64> = (0..n).map(|m| (bbar[m] * da[m]).abs() + (abar[m] * db[m]).abs() + d_ab[m].abs()).collect();
            pointwise(&d_ab, &rhs, &mag)
        }
        Identity::MidpointProductRule => {
            let p = field(rng, n);
            let q = field(rng, n);
            let pq: Vec<f64> = p.iter().zip(&q).map(|(x, y)| x * y).collect();
            let zero = MidBoundary {
                top: 0.0,
                surface: 0.0,
            };
            // unweighted averages through the weighted one: avg_m2i(f / ds_mid) ds_int
            let unweighted = |f: &[f64]| {
                let scaled: Vec<f64> = f.iter().zip(dsm).map(|(a, d)| a / d).collect();
                let mut out = vec![0.0; n + 1];
                avg_m2i_into(grid, &scaled, &mut out);
                out.iter().zip(dsi).map(|(a, d)| a * d).collect::<Vec<f64>>()
            };
            let (mut d_pq, mut dp, mut dq) = (vec![0.0; n + 1], vec![0.0; n + 1], vec![0.0; n + 1]);
            ddn_m2i_into(grid, &pq, zero, &mut d_pq);
            ddn_m2i_into(grid, &p, zero, &mut dp);
            ddn_m2i_into(grid, &q, zero, &mut dq);
            let (pbar, qbar) = (unweighted(&p), unweighted(&q));
            let lhs = &d_pq[1..n];
            let rhs: Vec<f64> = (1..n).map(|k| qbar[k] * dp[k] + pbar[k] * dq[k]).collect();
            let mag: Vec<f64> = (1..n).map(|k| (qbar[k] * dp[k]).abs() + (pbar[k] * dq[k]).abs() + d_pq[k].abs()).collect();
            pointwise(lhs, &rhs, &mag)
        }
        Identity::Sb81MidpointForms => {
            let s = flux(rng, n);
            let p = field(rng, n);
            sb81_mass_adv_mid_into(grid, &s, &p, &mut mid);
            let other = sb81_mass_adv_mid_flux_form(grid, &s, &p).unwrap();
            let smax = s.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            let pmax = p.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            let mag: Vec<f64> = (0..n).map(|m| 4.0 * smax * pmax / dsm[m]).collect();
            pointwise(&mid, &other, &mag)
        }
        Identity::Sb81InterfaceForms | Identity::Sb81InterfaceExpanded => {
            let s = flux(rng, n);
            let w = field(rng, n + 1);
            sb81_mass_adv_int_into(grid, &s, &w, &mut int);
            let other = if id == Identity::Sb81InterfaceForms {
                sb81_mass_adv_int_flux_form(grid, &s, &w).unwrap()
            } else {
                sb81_mass_adv_int_expanded(grid, &s, &w).unwrap()
            };
            let smax = s.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            let wmax = w.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            let mag: Vec<f64> = (0..=n)
                .map(|k| {
                    let d = if k == 0 {
                        dsm[0]
                    } else if k == n {
                        dsm[n - 1]
                    } else {
                        dsi[k].min(dsm[k]).min(dsm[k - 1])
                    };
                    4.0 * smax * wmax / d
                })
                .collect();
            pointwise(&int, &other, &mag)
        }
        Identity::HorizontalIntegrationByParts => panic!("not a vertical identity"),
    }
}

/// `hint(p du/dx) + hint(u dp/dx)` over the sum of absolute integrands.
pub fn check_horizontal(grid: &SeGrid1D, rng: &mut impl Rng) -> f64 {
    let nc = grid.ncol();
    let p = field(rng, nc);
    let u = field(rng, nc);
    let (dp, du) = (grid.grad_x(&p), grid.grad_x(&u));
    let a: Vec<f64> = p.iter().zip(&du).map(|(x, y)| x * y).collect();
    let b: Vec<f64> = u.iter().zip(&dp).map(|(x, y)| x * y).collect();
    let abs = |v: &[f64]| v.iter().map(|x| x.abs()).collect::<Vec<f64>>();
    let mag = grid.hint(&abs(&a)) + grid.hint(&abs(&b));
    rel(grid.hint(&a) + grid.hint(&b), mag)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub identity: Identity,
    pub trials: usize,
    pub max_defect: f64,
    pub tolerance: f64,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.max_defect <= self.tolerance
    }
}

/// Runs every identity on `trials` random cases: vertical grids with
/// `n` in `2..=128`, horizontal grids with `ne` in `4..=64`.
pub fn run_suite(trials: usize, seed: u64) -> Vec<IdentityReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<IdentityReport> = Identity::VERTICAL
        .iter()
        .map(|&identity| IdentityReport {
            identity,
            trials: 0,
            max_defect: 0.0,
            tolerance: TOLERANCE,
        })
        .collect();
    for _ in 0..trials {
        let n = rng.gen_range(2..=128);
        let grid = random_grid(&mut rng, n);
        for r in out.iter_mut() {
            let d = check_vertical(r.identity, &grid, &mut rng);
            r.trials += 1;
            r.max_defect = r.max_defect.max(d);
        }
    }
    let mut h = IdentityReport {
        identity: Identity::HorizontalIntegrationByParts,
        trials: 0,
        max_defect: 0.0,
        tolerance: TOLERANCE,
    };
    let mut grids: Vec<Option<SeGrid1D>> = vec![None; 65];
    for _ in 0..trials {
        let ne = rng.gen_range(4..=64);
        let len = 1.0e5 * ne as f64;
        let g = grids[ne].get_or_insert_with(|| SeGrid1D::new(ne, len));
        h.trials += 1;
        h.max_defect = h.max_defect.max(check_horizontal(g, &mut rng));
    }
    out.push(h);
    out
}
