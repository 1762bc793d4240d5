//! Initial states: discretely balanced rest atmosphere and a compensated
//! potential-temperature disturbance on top of it.

use serde::{Deserialize, Serialize};

use crate::model::{exner, ColumnField, Model, PrognosticState};

/// Background temperature structure of the rest state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Background {
    /// Constant buoyancy frequency `n` (1/s) with surface potential
    /// temperature `theta0` (K).
    ConstantN { theta0: f64, n: f64 },
    Isothermal { t0: f64 },
}

impl Default for Background {
    fn default() -> Self {
        Background::ConstantN {
            theta0: 300.0,
            n: 0.01,
        }
    }
}

/// Potential temperature of the background at pressure `p`, given the
/// surface pressure `ps`.
pub fn background_theta(model: &Model, bg: Background, p: f64, ps: f64) -> f64 {
    let c = model.constants();
    match bg {
        Background::Isothermal { t0 } => t0 / exner(c, p),
        Background::ConstantN { theta0, n } => {
            // theta = theta0 exp(N^2 z / g) with hydrostatic Exner profile
            let k = c.cp * theta0 * n * n / (c.g * c.g);
            theta0 / (1.0 - (exner(c, ps) - exner(c, p)) * k)
        }
    }
}

/// Builds the hydrostatic state with interface pressure from the hybrid
/// table at surface pressure `ps`, midpoint pressure `avg_i2m(pi)` and the
/// given midpoint potential temperature `theta(column, level, p)`.
/// The geopotential is integrated up from `phi_surf`.
pub fn hydrostatic_state(
    model: &Model,
    ps: f64,
    phi_surf: f64,
    u0: f64,
    mut theta: impl FnMut(usize, usize, f64) -> f64,
) -> PrognosticState {
    let (n, ncol) = (model.n(), model.ncol());
    let c = model.constants();
    let ds = model.vgrid.ds_mid();
    let pi = model.hybrid.pi_column(ps);
    let mut st = PrognosticState::zeros(ncol, n);
    st.u = ColumnField::filled(ncol, n, u0);
    for col in 0..ncol {
        let mut dphids = vec![0.0; n];
        for m in 0..n {
            let dp = (pi[m + 1] - pi[m]) / ds[m];
            let p = 0.5 * (pi[m] + pi[m + 1]);
            let th = theta(col, m, p);
            let big = dp * th;
            st.dpids.set(col, m, dp);
            st.theta.set(col, m, big);
            dphids[m] = -c.r_dry * big * exner(c, p) / p;
        }
        let phi = st.phi.col_mut(col);
        phi[n] = phi_surf;
        for m in (0..n).rev() {
            phi[m] = phi[m + 1] - dphids[m] * ds[m];
        }
    }
    st
}

pub fn init_hydrostatic_rest(model: &Model, bg: Background, ps: f64) -> PrognosticState {
    hydrostatic_state(model, ps, 0.0, 0.0, |_, _, p| background_theta(model, bg, p, ps))
}

/// Slice gravity-wave disturbance parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GravityWave {
    /// Potential-temperature amplitude (K).
    pub amplitude: f64,
    /// Half width of the horizontal profile (m).
    pub half_width: f64,
    /// Centre of the disturbance as a fraction of the domain length.
    pub center: f64,
    /// Uniform background wind (m/s).
    pub mean_wind: f64,
}

impl Default for GravityWave {
    fn default() -> Self {
        Self {
            amplitude: 1.0,
            half_width: 5000.0,
            center: 0.5,
            mean_wind: 0.0,
        }
    }
}

/// Hydrostatically rebuilt rest state plus
/// `dtheta sin(pi (ps - p)/(ps - p_top)) / (1 + (d/a)^2)`,
/// where `d` is the periodic chord distance to the centre. The horizontal
/// mean of the disturbance is removed level by level, so the net Theta
/// anomaly vanishes.
pub fn init_gravity_wave(model: &Model, bg: Background, ps: f64, gw: GravityWave) -> PrognosticState {
    let n = model.n();
    let xs = model.hgrid.columns_x();
    let len = model.hgrid.length();
    let xc = gw.center * len;
    let pi = model.hybrid.pi_column(ps);
    let p_top = model.p_top();
    let shape: Vec<f64> = xs
        .iter()
        .map(|x| {
            let d = len / std::f64::consts::PI * (std::f64::consts::PI * (x - xc) / len).sin();
            1.0 / (1.0 + (d / gw.half_width).powi(2))
        })
        .collect();
    let mean = model.hgrid.hint(&shape) / len;
    let anomaly: Vec<f64> = shape.iter().map(|s| s - mean).collect();
    let vertical: Vec<f64> = (0..n)
        .map(|m| {
            let p = 0.5 * (pi[m] + pi[m + 1]);
            (std::f64::consts::PI * (ps - p) / (ps - p_top)).sin()
        })
        .collect();
    hydrostatic_state(model, ps, 0.0, gw.mean_wind, |c, m, p| {
        background_theta(model, bg, p, ps) + gw.amplitude * vertical[m] * anomaly[c]
    })
}
