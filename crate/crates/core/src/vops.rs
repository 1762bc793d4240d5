//! Vertical operator algebra on the Lorenz-staggered grid.
//!
//! Averages, derivatives and quadratures follow the Simmons-Burridge
//! construction, extended with a derivative product rule. The operators
//! satisfy, to roundoff:
//!
//! * commuting: `avg_m2i(ddn_i2m(phi)) == ddn_m2i(avg_i2m(phi))` with the
//!   endpoint values of `phi` as boundary data;
//! * averaging by parts: `vint_int(avg_m2i(p) * phi) == vint_mid(p * avg_i2m(phi))`;
//! * integration by parts:
//!   `vint_int(phi * ddn_m2i(p)) + vint_mid(ddn_i2m(phi) * p) == phi_s p_s - phi_t p_t`;
//! * product rules for interface and (interior) midpoint products.
//!
//! The `*_into` kernels write into caller buffers and panic on length
//! mismatch; the allocating wrappers return [`VopsError`] instead.

use std::ops::Deref;

use thiserror::Error;

use crate::vcoord::LevelGrid;

#[derive(Debug, Error, PartialEq)]
pub enum VopsError {
    #[error("field has {got} values, grid expects {expected}")]
    GridMismatch { expected: usize, got: usize },
    #[error("vertical mass flux must vanish at the boundaries (top {top}, surface {surface})")]
    BoundaryFlux { top: f64, surface: f64 },
}

/// Values at the `n` layer midpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct MidField(pub Vec<f64>);

/// Values at the `n + 1` layer interfaces.
#[derive(Debug, Clone, PartialEq)]
pub struct IntField(pub Vec<f64>);

impl Deref for MidField {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl Deref for IntField {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Boundary data for one-sided derivatives of a midpoint field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MidBoundary {
    pub top: f64,
    pub surface: f64,
}

fn check_mid(grid: &LevelGrid, f: &[f64]) -> Result<(), VopsError> {
    if f.len() == grid.n() {
        Ok(())
    } else {
        Err(VopsError::GridMismatch {
            expected: grid.n(),
            got: f.len(),
        })
    }
}

fn check_int(grid: &LevelGrid, f: &[f64]) -> Result<(), VopsError> {
    if f.len() == grid.n() + 1 {
        Ok(())
    } else {
        Err(VopsError::GridMismatch {
            expected: grid.n() + 1,
            got: f.len(),
        })
    }
}

fn check_flux(sdot: &[f64]) -> Result<(), VopsError> {
    let (top, surface) = (sdot[0], sdot[sdot.len() - 1]);
    if top == 0.0 && surface == 0.0 {
        Ok(())
    } else {
        Err(VopsError::BoundaryFlux { top, surface })
    }
}

pub fn avg_i2m_into(grid: &LevelGrid, phi: &[f64], out: &mut [f64]) {
    assert_eq!(phi.len(), grid.n() + 1);
    assert_eq!(out.len(), grid.n());
    for (o, w) in out.iter_mut().zip(phi.windows(2)) {
        *o = 0.5 * (w[0] + w[1]);
    }
}

/// Interface-to-midpoint average.
pub fn avg_i2m(grid: &LevelGrid, phi: &[f64]) -> Result<MidField, VopsError> {
    check_int(grid, phi)?;
    let mut out = vec![0.0; grid.n()];
    avg_i2m_into(grid, phi, &mut out);
    Ok(MidField(out))
}

pub fn avg_m2i_into(grid: &LevelGrid, p: &[f64], out: &mut [f64]) {
    let n = grid.n();
    assert_eq!(p.len(), n);
    assert_eq!(out.len(), n + 1);
    let (dsm, dsi) = (grid.ds_mid(), grid.ds_int());
    out[0] = p[0];
    for k in 1..n {
        out[k] = (p[k] * dsm[k] + p[k - 1] * dsm[k - 1]) / (2.0 * dsi[k]);
    }
    out[n] = p[n - 1];
}

/// Thickness-weighted midpoint-to-interface average, copying the end
/// layers to the boundary interfaces.
pub fn avg_m2i(grid: &LevelGrid, p: &[f64]) -> Result<IntField, VopsError> {
    check_mid(grid, p)?;
    let mut out = vec![0.0; grid.n() + 1];
    avg_m2i_into(grid, p, &mut out);
    Ok(IntField(out))
}

pub fn ddn_i2m_into(grid: &LevelGrid, phi: &[f64], out: &mut [f64]) {
    assert_eq!(phi.len(), grid.n() + 1);
    assert_eq!(out.len(), grid.n());
    for ((o, w), ds) in out.iter_mut().zip(phi.windows(2)).zip(grid.ds_mid()) {
        *o = (w[1] - w[0]) / ds;
    }
}

pub fn ddn_i2m(grid: &LevelGrid, phi: &[f64]) -> Result<MidField, VopsError> {
    check_int(grid, phi)?;
    let mut out = vec![0.0; grid.n()];
    ddn_i2m_into(grid, phi, &mut out);
    Ok(MidField(out))
}

pub fn ddn_m2i_into(grid: &LevelGrid, p: &[f64], bc: MidBoundary, out: &mut [f64]) {
    let n = grid.n();
    assert_eq!(p.len(), n);
    assert_eq!(out.len(), n + 1);
    let (dsm, dsi) = (grid.ds_mid(), grid.ds_int());
    out[0] = (p[0] - bc.top) / (0.5 * dsm[0]);
    for k in 1..n {
        out[k] = (p[k] - p[k - 1]) / dsi[k];
    }
    out[n] = (bc.surface - p[n - 1]) / (0.5 * dsm[n - 1]);
}

/// Midpoint-to-interface derivative, one-sided at the boundaries.
pub fn ddn_m2i(grid: &LevelGrid, p: &[f64], bc: MidBoundary) -> Result<IntField, VopsError> {
    check_mid(grid, p)?;
    let mut out = vec![0.0; grid.n() + 1];
    ddn_m2i_into(grid, p, bc, &mut out);
    Ok(IntField(out))
}

/// Midpoint quadrature `sum p_i ds_i`.
pub fn vint_mid(grid: &LevelGrid, p: &[f64]) -> Result<f64, VopsError> {
    check_mid(grid, p)?;
    Ok(vint_mid_unchecked(grid, p))
}

pub(crate) fn vint_mid_unchecked(grid: &LevelGrid, p: &[f64]) -> f64 {
    p.iter().zip(grid.ds_mid()).map(|(a, d)| a * d).sum()
}

/// Interface quadrature with half weights at the two end points.
pub fn vint_int(grid: &LevelGrid, phi: &[f64]) -> Result<f64, VopsError> {
    check_int(grid, phi)?;
    Ok(vint_int_unchecked(grid, phi))
}

pub(crate) fn vint_int_unchecked(grid: &LevelGrid, phi: &[f64]) -> f64 {
    let n = grid.n();
    let ds = grid.ds_int();
    let inner: f64 = (1..n).map(|k| phi[k] * ds[k]).sum();
    0.5 * (phi[0] * ds[0] + phi[n] * ds[n]) + inner
}

/// `(dpi/ds) [sdot dp/ds]` at midpoints, written as the average of the
/// interface flux `S (dp/ds) ds_{i+1/2}` divided by `ds_i`. Only interior
/// derivatives enter; the zero boundary flux closes the end layers.
pub fn sb81_mass_adv_mid_into(grid: &LevelGrid, sdot: &[f64], p: &[f64], out: &mut [f64]) {
    let n = grid.n();
    assert_eq!(sdot.len(), n + 1);
    assert_eq!(p.len(), n);
    assert_eq!(out.len(), n);
    let dsm = grid.ds_mid();
    let dsi = grid.ds_int();
    let flux = |k: usize| -> f64 {
        if k == 0 || k == n {
            0.0
        } else {
            sdot[k] * (p[k] - p[k - 1]) / dsi[k] * dsi[k]
        }
    };
    for m in 0..n {
        out[m] = 0.5 * (flux(m) + flux(m + 1)) / dsm[m];
    }
}

/// The same quantity in flux form:
/// `d/ds(S * unweighted_avg(p)) - p dS/ds`.
pub fn sb81_mass_adv_mid_flux_form(
    grid: &LevelGrid,
    sdot: &[f64],
    p: &[f64],
) -> Result<MidField, VopsError> {
    check_int(grid, sdot)?;
    check_mid(grid, p)?;
    check_flux(sdot)?;
    let n = grid.n();
    let dsm = grid.ds_mid();
    // unweighted average written through the weighted one:
    // avg_m2i(p / ds_mid) * ds_int
    let scaled: Vec<f64> = p.iter().zip(dsm).map(|(a, d)| a / d).collect();
    let mut pbar = vec![0.0; n + 1];
    avg_m2i_into(grid, &scaled, &mut pbar);
    let flux: Vec<f64> = (0..=n).map(|k| sdot[k] * pbar[k] * grid.ds_int()[k]).collect();
    let mut dflux = vec![0.0; n];
    ddn_i2m_into(grid, &flux, &mut dflux);
    let mut dsdot = vec![0.0; n];
    ddn_i2m_into(grid, sdot, &mut dsdot);
    Ok(MidField(
        (0..n).map(|m| dflux[m] - p[m] * dsdot[m]).collect(),
    ))
}

/// SB81 vertical advection `[sdot dp/ds]` of a midpoint quantity.
pub fn sb81_adv_mid(
    grid: &LevelGrid,
    sdot: &[f64],
    p: &[f64],
    dpids: &[f64],
) -> Result<MidField, VopsError> {
    check_int(grid, sdot)?;
    check_mid(grid, p)?;
    check_mid(grid, dpids)?;
    check_flux(sdot)?;
    let mut out = vec![0.0; grid.n()];
    sb81_mass_adv_mid_into(grid, sdot, p, &mut out);
    for (o, d) in out.iter_mut().zip(dpids) {
        *o /= d;
    }
    Ok(MidField(out))
}

/// `avg(dpi/ds) [sdot dw/ds]` at interfaces in the averaged form
/// `avg_m2i(avg_i2m(S) * ddn_i2m(w))`.
pub fn sb81_mass_adv_int_into(grid: &LevelGrid, sdot: &[f64], w: &[f64], out: &mut [f64]) {
    let n = grid.n();
    assert_eq!(sdot.len(), n + 1);
    assert_eq!(w.len(), n + 1);
    assert_eq!(out.len(), n + 1);
    let dsm = grid.ds_mid();
    let mut q = vec![0.0; n];
    for m in 0..n {
        q[m] = 0.5 * (sdot[m] + sdot[m + 1]) * (w[m + 1] - w[m]) / dsm[m];
    }
    avg_m2i_into(grid, &q, out);
}

/// Flux form `ddn_m2i(avg(S) avg(w)) - w ddn_m2i(avg(S))` with zero
/// boundary data (the boundary mass flux vanishes).
pub fn sb81_mass_adv_int_flux_form(
    grid: &LevelGrid,
    sdot: &[f64],
    w: &[f64],
) -> Result<IntField, VopsError> {
    check_int(grid, sdot)?;
    check_int(grid, w)?;
    check_flux(sdot)?;
    let n = grid.n();
    let mut sbar = vec![0.0; n];
    let mut wbar = vec![0.0; n];
    avg_i2m_into(grid, sdot, &mut sbar);
    avg_i2m_into(grid, w, &mut wbar);
    let prod: Vec<f64> = sbar.iter().zip(&wbar).map(|(a, b)| a * b).collect();
    let zero = MidBoundary {
        top: 0.0,
        surface: 0.0,
    };
    let mut dprod = vec![0.0; n + 1];
    let mut dsbar = vec![0.0; n + 1];
    ddn_m2i_into(grid, &prod, zero, &mut dprod);
    ddn_m2i_into(grid, &sbar, zero, &mut dsbar);
    Ok(IntField(
        (0..=n).map(|k| dprod[k] - w[k] * dsbar[k]).collect(),
    ))
}

/// Expanded stencil of the interface operator without nested averages:
/// interior
/// `[S_k (w_{k+1} - w_{k-1}) + S_{k+1} (w_{k+1} - w_k) + S_{k-1} (w_k - w_{k-1})] / (4 ds_{k})`,
/// ends `S_1 (w_1 - w_0) / (2 ds_1)` and `S_{n-1} (w_n - w_{n-1}) / (2 ds_n)`.
pub fn sb81_mass_adv_int_expanded(
    grid: &LevelGrid,
    sdot: &[f64],
    w: &[f64],
) -> Result<IntField, VopsError> {
    check_int(grid, sdot)?;
    check_int(grid, w)?;
    check_flux(sdot)?;
    let n = grid.n();
    let (dsm, dsi) = (grid.ds_mid(), grid.ds_int());
    let mut out = vec![0.0; n + 1];
    out[0] = sdot[1] * (w[1] - w[0]) / (2.0 * dsm[0]);
    for k in 1..n {
        out[k] = (sdot[k] * (w[k + 1] - w[k - 1])
            + sdot[k + 1] * (w[k + 1] - w[k])
            + sdot[k - 1] * (w[k] - w[k - 1]))
            / (4.0 * dsi[k]);
    }
    out[n] = sdot[n - 1] * (w[n] - w[n - 1]) / (2.0 * dsm[n - 1]);
    Ok(IntField(out))
}

/// SB81 vertical advection `[sdot dw/ds]` of an interface quantity.
pub fn sb81_adv_int(
    grid: &LevelGrid,
    sdot: &[f64],
    w: &[f64],
    dpids: &[f64],
) -> Result<IntField, VopsError> {
    check_int(grid, sdot)?;
    check_int(grid, w)?;
    check_mid(grid, dpids)?;
    check_flux(sdot)?;
    let n = grid.n();
    let mut out = vec![0.0; n + 1];
    sb81_mass_adv_int_into(grid, sdot, w, &mut out);
    let mut dpids_i = vec![0.0; n + 1];
    avg_m2i_into(grid, dpids, &mut dpids_i);
    for (o, d) in out.iter_mut().zip(&dpids_i) {
        *o /= d;
    }
    Ok(IntField(out))
}
