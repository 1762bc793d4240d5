use rayon::prelude::*;

use super::{ColumnField, Model, ModelError, PrognosticState, VerticalMode};
use crate::vcoord::{LevelGrid, PhysicalConstants};
use crate::vops::{
    avg_m2i_into, ddn_i2m_into, ddn_m2i_into, sb81_mass_adv_int_into, MidBoundary,
};

/// `p = p0 [R Theta / (-p0 dphi/ds)]^(cp/cv)`.
#[inline]
pub fn pressure_from_eos(c: &PhysicalConstants, theta: f64, dphids: f64) -> f64 {
    c.p0 * (c.r_dry * theta / (-c.p0 * dphids)).powf(c.cp / c.cv())
}

#[inline]
pub fn exner(c: &PhysicalConstants, p: f64) -> f64 {
    (p / c.p0).powf(c.kappa())
}

/// Midpoint equation-of-state diagnostics for one column.
#[derive(Debug, Clone, PartialEq)]
pub struct EosFields {
    pub p: Vec<f64>,
    pub exner: Vec<f64>,
    pub theta_v: Vec<f64>,
    pub dphids: Vec<f64>,
    pub rho: Vec<f64>,
}

/// Closed-form EOS on one column. Errors name the first midpoint where
/// `dphi/ds >= 0`; `column` is only used for the report.
pub fn diagnose_eos_column(
    grid: &LevelGrid,
    c: &PhysicalConstants,
    theta: &[f64],
    dpids: &[f64],
    phi: &[f64],
    column: usize,
) -> Result<EosFields, ModelError> {
    let n = grid.n();
    let mut dphids = vec![0.0; n];
    ddn_i2m_into(grid, phi, &mut dphids);
    let mut out = EosFields {
        p: vec![0.0; n],
        exner: vec![0.0; n],
        theta_v: vec![0.0; n],
        dphids,
        rho: vec![0.0; n],
    };
    for m in 0..n {
        let d = out.dphids[m];
        if !(d < 0.0) {
            return Err(ModelError::NonPhysical {
                column,
                level: m,
                what: "dphi/ds must be negative",
            });
        }
        if !(theta[m] > 0.0 && dpids[m] > 0.0) {
            return Err(ModelError::NonPhysical {
                column,
                level: m,
                what: "Theta and dpi/ds must be positive",
            });
        }
        let p = pressure_from_eos(c, theta[m], d);
        out.p[m] = p;
        out.exner[m] = exner(c, p);
        out.theta_v[m] = theta[m] / dpids[m];
        out.rho[m] = -dpids[m] / d;
    }
    Ok(out)
}

/// `mu = ddn_m2i(p, (p_top, p_surf)) / avg_m2i(dpids)`, writing `dpds` too.
pub fn column_mu(
    grid: &LevelGrid,
    p: &[f64],
    dpids_int: &[f64],
    p_top: f64,
    p_surf: f64,
    dpds: &mut [f64],
    mu: &mut [f64],
) {
    ddn_m2i_into(
        grid,
        p,
        MidBoundary {
            top: p_top,
            surface: p_surf,
        },
        dpds,
    );
    for ((m, d), a) in mu.iter_mut().zip(dpds.iter()).zip(dpids_int) {
        *m = d / a;
    }
}

/// All diagnostic fields of a state.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    // midpoints
    pub p: ColumnField,
    pub exner: ColumnField,
    pub theta_v: ColumnField,
    pub dphids: ColumnField,
    pub rho: ColumnField,
    // interfaces
    pub pi_int: ColumnField,
    pub dpids_int: ColumnField,
    pub dpds: ColumnField,
    pub mu: ColumnField,
    /// Vertical mass flux `S = (dpi/ds) sdot`.
    pub sdot_mass: ColumnField,
    pub sdot: ColumnField,
    pub u_tilde: ColumnField,
    pub theta_v_tilde: ColumnField,
    pub p_top: f64,
    pub p_surf: Vec<f64>,
}

struct ColumnDiag {
    eos: EosFields,
    pi_int: Vec<f64>,
    dpids_int: Vec<f64>,
    dpds: Vec<f64>,
    mu: Vec<f64>,
    sdot_mass: Vec<f64>,
    sdot: Vec<f64>,
    u_tilde: Vec<f64>,
    theta_v_tilde: Vec<f64>,
    p_surf: f64,
}

impl Model {
    /// Vertical mass flux from the discrete mass-coordinate integral:
    /// `S_k = B_k sum_all D ds - sum_{m<k} D_m ds_m`, zero at both ends,
    /// with `D = div_x(dpids u)`. Identically zero in Lagrangian mode.
    pub fn diagnose_sdot(&self, state: &PrognosticState) -> ColumnField {
        let (n, ncol) = (self.n(), self.ncol());
        let mut out = ColumnField::zeros(ncol, n + 1);
        if self.config.vertical_mode == VerticalMode::Lagrangian {
            return out;
        }
        let flux = state.dpids.zip_map(&state.u, |a, b| a * b);
        let div = self.hgrid.div_levels(flux.data(), n);
        let dsm = self.vgrid.ds_mid();
        let b = &self.hybrid.b_int;
        for c in 0..ncol {
            let d = &div[c * n..(c + 1) * n];
            let total: f64 = d.iter().zip(dsm).map(|(x, s)| x * s).sum();
            let col = out.col_mut(c);
            let mut partial = 0.0;
            for k in 1..n {
                partial += d[k - 1] * dsm[k - 1];
                col[k] = b[k] * total - partial;
            }
        }
        out
    }

    /// Rejects states whose surface geopotential varies horizontally.
    fn check_flat_bottom(&self, state: &PrognosticState) -> Result<(), ModelError> {
        let surf = state.phi.level(self.n());
        let (lo, hi) = surf
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
        if hi - lo > 1e-9 * (1.0 + hi.abs().max(lo.abs())) {
            return Err(ModelError::Unsupported(
                "sloped bottom topography (surface geopotential varies)".into(),
            ));
        }
        Ok(())
    }

    pub fn diagnose(&self, state: &PrognosticState) -> Result<Diagnostics, ModelError> {
        self.check_shape(state)?;
        self.check_flat_bottom(state)?;
        let (n, ncol) = (self.n(), self.ncol());
        let grid = &self.vgrid;
        let consts = self.constants();
        let p_top = self.p_top();
        let eulerian = self.config.vertical_mode == VerticalMode::Eulerian;

        let sdot_mass = self.diagnose_sdot(state);
        let w_surf = state.w.level(n);
        let dwdx_surf = self.hgrid.grad_x(&w_surf);

        let columns: Result<Vec<ColumnDiag>, ModelError> = (0..ncol)
            .into_par_iter()
            .map(|c| {
                let theta = state.theta.col(c);
                let dpids = state.dpids.col(c);
                let u = state.u.col(c);
                let w = state.w.col(c);
                let eos = diagnose_eos_column(grid, consts, theta, dpids, state.phi.col(c), c)?;

                let mut pi_int = vec![0.0; n + 1];
                pi_int[0] = p_top;
                for m in 0..n {
                    pi_int[m + 1] = pi_int[m] + dpids[m] * grid.ds_mid()[m];
                }

                let mut dpids_int = vec![0.0; n + 1];
                avg_m2i_into(grid, dpids, &mut dpids_int);
                let smass = sdot_mass.col(c).to_vec();
                let sdot: Vec<f64> = smass.iter().zip(&dpids_int).map(|(s, d)| s / d).collect();

                let mass_u: Vec<f64> = dpids.iter().zip(u).map(|(a, b)| a * b).collect();
                let mut u_tilde = vec![0.0; n + 1];
                avg_m2i_into(grid, &mass_u, &mut u_tilde);
                for (t, d) in u_tilde.iter_mut().zip(&dpids_int) {
                    *t /= d;
                }

                // surface closure: w-equation with w_surf = 0 fixes mu there
                let mut adv = vec![0.0; n + 1];
                sb81_mass_adv_int_into(grid, &smass, w, &mut adv);
                let vadv_surf = adv[n] / dpids_int[n];
                let mu_surf = 1.0 + (u_tilde[n] * dwdx_surf[c] + vadv_surf) / consts.g;
                let p_surf = eos.p[n - 1] + mu_surf * dpids_int[n] * 0.5 * grid.ds_mid()[n - 1];

                let mut dpds = vec![0.0; n + 1];
                let mut mu = vec![0.0; n + 1];
                column_mu(grid, &eos.p, &dpids_int, p_top, p_surf, &mut dpds, &mut mu);

                let mut theta_v_tilde = vec![0.0; n + 1];
                if eulerian {
                    let mut dphids_int = vec![0.0; n + 1];
                    avg_m2i_into(grid, &eos.dphids, &mut dphids_int);
                    theta_v_tilde[0] = eos.theta_v[0];
                    theta_v_tilde[n] = eos.theta_v[n - 1];
                    for k in 1..n {
                        let dexner = (eos.exner[k] - eos.exner[k - 1]) / grid.ds_int()[k];
                        if dexner == 0.0 || !dexner.is_finite() {
                            return Err(ModelError::DegenerateStratification { column: c, level: k });
                        }
                        theta_v_tilde[k] = -(mu[k] / consts.cp) * dphids_int[k] / dexner;
                    }
                } else {
                    avg_m2i_into(grid, &eos.theta_v, &mut theta_v_tilde);
                }

                Ok(ColumnDiag {
                    eos,
                    pi_int,
                    dpids_int,
                    dpds,
                    mu,
                    sdot_mass: smass,
                    sdot,
                    u_tilde,
                    theta_v_tilde,
                    p_surf,
                })
            })
            .collect();
        let columns = columns?;

        let mid = |f: &dyn Fn(&ColumnDiag) -> &[f64]| {
            ColumnField::from_fn(ncol, n, |c, k| f(&columns[c])[k])
        };
        let int = |f: &dyn Fn(&ColumnDiag) -> &[f64]| {
            ColumnField::from_fn(ncol, n + 1, |c, k| f(&columns[c])[k])
        };
        Ok(Diagnostics {
            p: mid(&|d| &d.eos.p),
            exner: mid(&|d| &d.eos.exner),
            theta_v: mid(&|d| &d.eos.theta_v),
            dphids: mid(&|d| &d.eos.dphids),
            rho: mid(&|d| &d.eos.rho),
            pi_int: int(&|d| &d.pi_int),
            dpids_int: int(&|d| &d.dpids_int),
            dpds: int(&|d| &d.dpds),
            mu: int(&|d| &d.mu),
            sdot_mass: int(&|d| &d.sdot_mass),
            sdot: int(&|d| &d.sdot),
            u_tilde: int(&|d| &d.u_tilde),
            theta_v_tilde: int(&|d| &d.theta_v_tilde),
            p_top,
            p_surf: columns.iter().map(|d| d.p_surf).collect(),
        })
    }

    /// Implicit (acoustic) part only: `w_t = -g (1 - mu)`, `phi_t = g w`,
    /// both pinned to zero at the surface. Needs only column-local EOS data.
    pub fn implicit_tendency(&self, state: &PrognosticState) -> Result<PrognosticState, ModelError> {
        self.check_shape(state)?;
        let (n, ncol) = (self.n(), self.ncol());
        let grid = &self.vgrid;
        let consts = self.constants();
        let g = consts.g;
        let p_top = self.p_top();
        let cols: Result<Vec<Vec<f64>>, ModelError> = (0..ncol)
            .into_par_iter()
            .map(|c| {
                let dpids = state.dpids.col(c);
                let eos = diagnose_eos_column(grid, consts, state.theta.col(c), dpids, state.phi.col(c), c)?;
                let mut dpids_int = vec![0.0; n + 1];
                avg_m2i_into(grid, dpids, &mut dpids_int);
                // the surface value is pinned, so any finite closure will do
                let p_surf = eos.p[n - 1] + dpids_int[n] * 0.5 * grid.ds_mid()[n - 1];
                let mut dpds = vec![0.0; n + 1];
                let mut mu = vec![0.0; n + 1];
                column_mu(grid, &eos.p, &dpids_int, p_top, p_surf, &mut dpds, &mut mu);
                Ok(mu)
            })
            .collect();
        let cols = cols?;
        let mut out = state.zeros_like();
        for c in 0..ncol {
            for k in 0..n {
                out.w.set(c, k, -g * (1.0 - cols[c][k]));
                out.phi.set(c, k, g * state.w.get(c, k));
            }
        }
        Ok(out)
    }
}
