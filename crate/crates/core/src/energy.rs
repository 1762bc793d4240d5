//! Discrete energy integrals, conversion terms, budget residuals and the
//! vertical-relabeling diagnostic.
//!
//! All global quantities are `(1/g) hint(vertical sum) / L`, i.e. per unit
//! horizontal length, and every reduction runs in a fixed order.

use std::io::Write;

use serde::Serialize;

use crate::model::{ColumnField, Diagnostics, Model, ModelError, PrognosticState};
use crate::vops::{avg_i2m_into, avg_m2i_into, ddn_m2i_into, MidBoundary};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Energies {
    pub k: f64,
    pub i: f64,
    pub p: f64,
    /// `p_top phi_top` contribution contained in `i`.
    pub p_hat_term: f64,
}

impl Energies {
    pub fn total(&self) -> f64 {
        self.k + self.i + self.p
    }
}

/// Conversion terms together with the sum of absolute summands of each,
/// which is the scale for judging cancellation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Transfers {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    /// magnitudes of `[t1, t2, t3, s1, s2, s3]`
    pub mag: [f64; 6],
}

impl Transfers {
    /// Relative defects of `S1 = -T1`, `S2 = T2`, `S3 = T3`.
    pub fn equality_defects(&self) -> [f64; 3] {
        let r = |a: f64, ma: f64, mb: f64| a.abs() / ma.max(mb).max(f64::MIN_POSITIVE);
        [
            r(self.s1 + self.t1, self.mag[3], self.mag[0]),
            r(self.s2 - self.t2, self.mag[4], self.mag[1]),
            r(self.s3 - self.t3, self.mag[5], self.mag[2]),
        ]
    }

    pub fn averaged(&self, other: &Self) -> Self {
        let h = |a: f64, b: f64| 0.5 * (a + b);
        let mut mag = [0.0; 6];
        for (m, (a, b)) in mag.iter_mut().zip(self.mag.iter().zip(&other.mag)) {
            *m = h(*a, *b);
        }
        Self {
            t1: h(self.t1, other.t1),
            t2: h(self.t2, other.t2),
            t3: h(self.t3, other.t3),
            s1: h(self.s1, other.s1),
            s2: h(self.s2, other.s2),
            s3: h(self.s3, other.s3),
            mag,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Residuals {
    pub r_p: f64,
    pub r_i: f64,
    pub r_k: f64,
}

/// Accumulates per-column values and reduces them with the horizontal
/// quadrature.
struct Reducer<'a> {
    model: &'a Model,
    vals: Vec<f64>,
    mags: Vec<f64>,
}

impl<'a> Reducer<'a> {
    fn new(model: &'a Model) -> Self {
        let ncol = model.ncol();
        Self {
            model,
            vals: vec![0.0; ncol],
            mags: vec![0.0; ncol],
        }
    }
    #[inline]
    fn add(&mut self, c: usize, v: f64) {
        self.vals[c] += v;
        self.mags[c] += v.abs();
    }
    fn finish(&self) -> (f64, f64) {
        let scale = 1.0 / (self.model.constants().g * self.model.hgrid.length());
        (
            scale * self.model.hgrid.hint(&self.vals),
            scale * self.model.hgrid.hint(&self.mags),
        )
    }
}

fn gradm(model: &Model, f: &ColumnField) -> ColumnField {
    let n = f.len();
    ColumnField::from_vec(f.ncol(), n, model.hgrid.grad_levels(f.data(), n))
}

/// Weighted `(K, I, P)` summands of column `c` in a fixed order: midpoints,
/// interfaces, then the model-top term.
fn column_summands(model: &Model, state: &PrognosticState, diag: &Diagnostics, c: usize, out: &mut Vec<[f64; 3]>) {
    let n = model.n();
    let grid = &model.vgrid;
    let (dsm, dsi) = (grid.ds_mid(), grid.ds_int());
    let cp = model.constants().cp;
    let dpids = state.dpids.col(c);
    let mut phibar = vec![0.0; n];
    avg_i2m_into(grid, state.phi.col(c), &mut phibar);
    out.clear();
    for m in 0..n {
        let (u, v) = (state.u.get(c, m), state.v.get(c, m));
        out.push([
            0.5 * dpids[m] * (u * u + v * v) * dsm[m],
            (cp * state.theta.get(c, m) * diag.exner.get(c, m) + diag.dphids.get(c, m) * diag.p.get(c, m))
                * dsm[m],
            dpids[m] * phibar[m] * dsm[m],
        ]);
    }
    for j in 0..=n {
        let wt = if j == 0 || j == n { 0.5 * dsi[j] } else { dsi[j] };
        let w = state.w.get(c, j);
        out.push([0.5 * diag.dpids_int.get(c, j) * w * w * wt, 0.0, 0.0]);
    }
    out.push([0.0, diag.p_top * state.phi.get(c, 0), 0.0]);
}

/// `K`, `I`, `P` of a state.
pub fn compute_energies(model: &Model, state: &PrognosticState, diag: &Diagnostics) -> Energies {
    let mut r: [Reducer; 4] = std::array::from_fn(|_| Reducer::new(model));
    let mut buf = Vec::new();
    for c in 0..model.ncol() {
        column_summands(model, state, diag, c, &mut buf);
        let mut acc = [0.0; 3];
        for t in &buf {
            for q in 0..3 {
                acc[q] += t[q];
            }
        }
        for q in 0..3 {
            r[q].add(c, acc[q]);
        }
        r[3].add(c, buf.last().unwrap()[1]);
    }
    Energies {
        k: r[0].finish().0,
        i: r[1].finish().0,
        p: r[2].finish().0,
        p_hat_term: r[3].finish().0,
    }
}

/// `E(s1) - E(s0)` for two states on the same grid, formed summand by
/// summand so the large totals never cancel.
pub fn compute_energy_change(
    model: &Model,
    s0: &PrognosticState,
    d0: &Diagnostics,
    s1: &PrognosticState,
    d1: &Diagnostics,
) -> Energies {
    let mut r: [Reducer; 4] = std::array::from_fn(|_| Reducer::new(model));
    let (mut b0, mut b1) = (Vec::new(), Vec::new());
    for c in 0..model.ncol() {
        column_summands(model, s0, d0, c, &mut b0);
        column_summands(model, s1, d1, c, &mut b1);
        let mut acc = [0.0; 3];
        for (x, y) in b0.iter().zip(&b1) {
            for q in 0..3 {
                acc[q] += y[q] - x[q];
            }
        }
        for q in 0..3 {
            r[q].add(c, acc[q]);
        }
        r[3].add(c, b1.last().unwrap()[1] - b0.last().unwrap()[1]);
    }
    Energies {
        k: r[0].finish().0,
        i: r[1].finish().0,
        p: r[2].finish().0,
        p_hat_term: r[3].finish().0,
    }
}

/// `T1..T3`, `S1..S3` with their magnitudes.
pub fn compute_transfers(model: &Model, state: &PrognosticState, diag: &Diagnostics) -> Transfers {
    let (n, ncol) = (model.n(), model.ncol());
    let grid = &model.vgrid;
    let (dsm, dsi) = (grid.ds_mid(), grid.ds_int());
    let c0 = model.constants();
    let (g, cp) = (c0.g, c0.cp);

    let dexner = gradm(model, &diag.exner);
    let theta_u = state.theta.zip_map(&state.u, |a, b| a * b);
    let dtheta_u = gradm(model, &theta_u);
    let dphidx = gradm(model, &state.phi);
    let mugp = diag.mu.zip_map(&dphidx, |a, b| a * b);

    let mut r: Vec<Reducer> = (0..6).map(|_| Reducer::new(model)).collect();
    let mut avg = vec![0.0; n];
    let mut wbar = vec![0.0; n];
    for c in 0..ncol {
        avg_i2m_into(grid, mugp.col(c), &mut avg);
        avg_i2m_into(grid, state.w.col(c), &mut wbar);
        for m in 0..n {
            let (u, th, dp) = (state.u.get(c, m), state.theta.get(c, m), state.dpids.get(c, m));
            r[0].add(c, cp * th * u * dexner.get(c, m) * dsm[m]);
            r[2].add(c, u * dp * avg[m] * dsm[m]);
            r[3].add(c, cp * diag.exner.get(c, m) * dtheta_u.get(c, m) * dsm[m]);
            r[4].add(c, g * wbar[m] * dp * dsm[m]);
        }
        for j in 0..=n {
            let wt = if j == 0 || j == n { 0.5 * dsi[j] } else { dsi[j] };
            let w = state.w.get(c, j);
            let dpds = diag.dpds.get(c, j);
            r[1].add(c, g * w * diag.dpids_int.get(c, j) * wt);
            r[2].add(c, -g * w * dpds * wt);
            r[5].add(c, dpds * diag.u_tilde.get(c, j) * dphidx.get(c, j) * wt);
            r[5].add(c, -g * w * dpds * wt);
        }
    }
    let v: Vec<(f64, f64)> = r.iter().map(Reducer::finish).collect();
    Transfers {
        t1: v[0].0,
        t2: v[1].0,
        t3: v[2].0,
        s1: v[3].0,
        s2: v[4].0,
        s3: v[5].0,
        mag: [v[0].1, v[1].1, v[2].1, v[3].1, v[4].1, v[5].1],
    }
}

/// Budget residuals over one step of length `dt`, with the transfers
/// taken at the step start (or an average, for the centered variant).
pub fn compute_residuals(e0: &Energies, e1: &Energies, tr: &Transfers, dt: f64) -> Residuals {
    let d = Energies {
        k: e1.k - e0.k,
        i: e1.i - e0.i,
        p: e1.p - e0.p,
        p_hat_term: e1.p_hat_term - e0.p_hat_term,
    };
    residuals_from_change(&d, tr, dt)
}

/// Residuals from an energy change computed directly (see
/// [`compute_energy_change`]).
pub fn residuals_from_change(d: &Energies, tr: &Transfers, dt: f64) -> Residuals {
    Residuals {
        r_p: d.p / dt - tr.s2,
        r_i: d.i / dt + tr.s1 - tr.s3,
        r_k: d.k / dt + tr.t1 + tr.t2 + tr.t3,
    }
}

/// How `theta_v` is carried to interfaces in the relabeling diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterfaceTheta {
    /// The model's tilde average.
    Tilde,
    /// Plain `avg_m2i(theta_v)`; breaks the cancellation.
    Naive,
}

/// Per-column energy rate of the vertical-transport terms driven by an
/// arbitrary mass flux `sdot_mass` (zero at both ends), and the sum of
/// absolute summands. Assembled from the model's own vertical terms.
#[derive(Debug, Clone, PartialEq)]
pub struct RelabelingResidual {
    pub residual: Vec<f64>,
    pub magnitude: Vec<f64>,
}

impl RelabelingResidual {
    pub fn max_relative(&self) -> f64 {
        self.residual
            .iter()
            .zip(&self.magnitude)
            .map(|(r, m)| r.abs() / m.max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    }
}

pub fn relabeling_residual(
    model: &Model,
    state: &PrognosticState,
    diag: &Diagnostics,
    sdot_mass: &ColumnField,
    theta_mode: InterfaceTheta,
) -> Result<RelabelingResidual, ModelError> {
    let (n, ncol) = (model.n(), model.ncol());
    let grid = &model.vgrid;
    let (dsm, dsi) = (grid.ds_mid(), grid.ds_int());
    let cp = model.constants().cp;
    for c in 0..ncol {
        if sdot_mass.get(c, 0) != 0.0 || sdot_mass.get(c, n) != 0.0 {
            return Err(ModelError::Unsupported(
                "vertical mass flux must vanish at the boundaries".into(),
            ));
        }
    }
    let mut d = diag.clone();
    d.sdot_mass = sdot_mass.clone();
    d.sdot = sdot_mass.zip_map(&diag.dpids_int, |s, a| s / a);
    if theta_mode == InterfaceTheta::Naive {
        for c in 0..ncol {
            avg_m2i_into(grid, diag.theta_v.col(c), d.theta_v_tilde.col_mut(c));
        }
    }
    let parts = model.tendency_parts(state, &d)?;

    let mut residual = vec![0.0; ncol];
    let mut magnitude = vec![0.0; ncol];
    let mut phibar = vec![0.0; n];
    let mut w2 = vec![0.0; n];
    for c in 0..ncol {
        let (mut r, mut mag) = (0.0, 0.0);
        let mut add = |v: f64| {
            r += v;
            mag += v.abs();
        };
        let dpids = state.dpids.col(c);
        avg_i2m_into(grid, state.phi.col(c), &mut phibar);
        let wsq: Vec<f64> = state.w.col(c).iter().map(|x| x * x).collect();
        avg_i2m_into(grid, &wsq, &mut w2);
        for m in 0..n {
            let (u, v) = (state.u.get(c, m), state.v.get(c, m));
            let dm = parts.mass_vflux.get(c, m);
            add(dpids[m] * u * parts.u_vadv.get(c, m) * dsm[m]);
            add(dpids[m] * v * parts.v_vadv.get(c, m) * dsm[m]);
            add(0.5 * (u * u + v * v + w2[m]) * dm * dsm[m]);
            add(cp * diag.exner.get(c, m) * parts.theta_vflux.get(c, m) * dsm[m]);
            add(phibar[m] * dm * dsm[m]);
        }
        for j in 0..=n {
            let wt = if j == 0 || j == n { 0.5 * dsi[j] } else { dsi[j] };
            let a = diag.dpids_int.get(c, j);
            add(a * state.w.get(c, j) * parts.w_vadv.get(c, j) * wt);
            add((a - diag.dpds.get(c, j)) * parts.phi_vadv.get(c, j) * wt);
        }
        residual[c] = r;
        magnitude[c] = mag;
    }
    Ok(RelabelingResidual {
        residual,
        magnitude,
    })
}

/// Rate of change of `K` induced by a tendency, assembled with the same
/// quadratures as [`compute_energies`] (exact time derivative of the
/// discrete `K` along `tend`).
pub fn kinetic_energy_rate(model: &Model, state: &PrognosticState, tend: &PrognosticState) -> f64 {
    let (n, ncol) = (model.n(), model.ncol());
    let grid = &model.vgrid;
    let (dsm, dsi) = (grid.ds_mid(), grid.ds_int());
    let mut red = Reducer::new(model);
    let mut a = vec![0.0; n + 1];
    let mut at = vec![0.0; n + 1];
    for c in 0..ncol {
        avg_m2i_into(grid, state.dpids.col(c), &mut a);
        avg_m2i_into(grid, tend.dpids.col(c), &mut at);
        for m in 0..n {
            let (u, v) = (state.u.get(c, m), state.v.get(c, m));
            let d = state.dpids.get(c, m);
            red.add(
                c,
                (d * (u * tend.u.get(c, m) + v * tend.v.get(c, m))
                    + 0.5 * (u * u + v * v) * tend.dpids.get(c, m))
                    * dsm[m],
            );
        }
        for j in 0..=n {
            let wt = if j == 0 || j == n { 0.5 * dsi[j] } else { dsi[j] };
            let w = state.w.get(c, j);
            red.add(c, (a[j] * w * tend.w.get(c, j) + 0.5 * at[j] * w * w) * wt);
        }
    }
    let (v, _) = red.finish();
    v
}

/// `dpds` reassembled from midpoint pressure and boundary values; handy
/// for checks that should not trust the stored field.
pub fn pressure_derivative(model: &Model, diag: &Diagnostics, column: usize) -> Vec<f64> {
    let n = model.n();
    let mut out = vec![0.0; n + 1];
    ddn_m2i_into(
        &model.vgrid,
        diag.p.col(column),
        MidBoundary {
            top: diag.p_top,
            surface: diag.p_surf[column],
        },
        &mut out,
    );
    out
}

/// One row of the budget time series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BudgetRow {
    pub time: f64,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "I")]
    pub i: f64,
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "T1")]
    pub t1: f64,
    #[serde(rename = "T2")]
    pub t2: f64,
    #[serde(rename = "T3")]
    pub t3: f64,
    #[serde(rename = "S1")]
    pub s1: f64,
    #[serde(rename = "S2")]
    pub s2: f64,
    #[serde(rename = "S3")]
    pub s3: f64,
    #[serde(rename = "R_P")]
    pub r_p: f64,
    #[serde(rename = "R_I")]
    pub r_i: f64,
    #[serde(rename = "R_K")]
    pub r_k: f64,
}

/// Column order of the budget file.
pub const BUDGET_COLUMNS: [&str; 14] = [
    "time", "K", "I", "P", "E", "T1", "T2", "T3", "S1", "S2", "S3", "R_P", "R_I", "R_K",
];

impl BudgetRow {
    pub fn new(time: f64, e: &Energies, tr: &Transfers, r: &Residuals) -> Self {
        Self {
            time,
            k: e.k,
            i: e.i,
            p: e.p,
            e: e.total(),
            t1: tr.t1,
            t2: tr.t2,
            t3: tr.t3,
            s1: tr.s1,
            s2: tr.s2,
            s3: tr.s3,
            r_p: r.r_p,
            r_i: r.r_i,
            r_k: r.r_k,
        }
    }
}

/// Comma-separated budget writer with a fixed header.
pub struct BudgetWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> BudgetWriter<W> {
    pub fn new(out: W) -> Self {
        Self {
            inner: csv::WriterBuilder::new().has_headers(true).from_writer(out),
        }
    }

    pub fn write(&mut self, row: &BudgetRow) -> Result<(), csv::Error> {
        self.inner.serialize(row)
    }

    pub fn flush(&mut self) -> std::io::Result<()> {
        self.inner.flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cases::{init_hydrostatic_rest, Background};
    use crate::model::VerticalMode;
    use crate::test_support::{random_state, rng, small_model};
    use rand::Rng;

    #[test]
    fn rest_state_has_no_kinetic_energy_or_transfers() {
        let model = small_model(10, 3, VerticalMode::Eulerian);
        let st = init_hydrostatic_rest(&model, Background::default(), 1.0e5);
        let d = model.diagnose(&st).unwrap();
        let e = compute_energies(&model, &st, &d);
        assert_eq!(e.k, 0.0);
        assert!(e.i > 0.0 && e.p > 0.0);
        let t = compute_transfers(&model, &st, &d);
        for v in [t.t1, t.t2, t.t3, t.s1, t.s2, t.s3] {
            assert!(v.abs() < 1e-9, "{v}");
        }
    }

    #[test]
    fn energy_change_matches_difference_of_totals() {
        let model = small_model(12, 3, VerticalMode::Eulerian);
        let mut r = rng(23);
        let a = random_state(&model, &mut r, 1.0);
        let b = random_state(&model, &mut r, 1.0);
        let (da, db) = (model.diagnose(&a).unwrap(), model.diagnose(&b).unwrap());
        let (ea, eb) = (compute_energies(&model, &a, &da), compute_energies(&model, &b, &db));
        let d = compute_energy_change(&model, &a, &da, &b, &db);
        for (x, y, scale) in [(d.k, eb.k - ea.k, eb.k), (d.i, eb.i - ea.i, eb.i), (d.p, eb.p - ea.p, eb.p)] {
            assert!((x - y).abs() <= 1e-14 * scale, "{x} {y}");
        }
        assert_eq!(compute_energy_change(&model, &a, &da, &a, &da).total(), 0.0);
    }

    #[test]
    fn transfer_equalities_random_states() {
        let model = small_model(12, 4, VerticalMode::Eulerian);
        let mut r = rng(17);
        for _ in 0..20 {
            let st = random_state(&model, &mut r, 1.0);
            let d = model.diagnose(&st).unwrap();
            let t = compute_transfers(&model, &st, &d);
            for defect in t.equality_defects() {
                assert!(defect < 1e-13, "{defect}");
            }
        }
    }

    #[test]
    fn potential_energy_two_forms() {
        let model = small_model(9, 3, VerticalMode::Eulerian);
        let st = random_state(&model, &mut rng(4), 1.0);
        let d = model.diagnose(&st).unwrap();
        let e = compute_energies(&model, &st, &d);
        // primed interface form
        let g = model.constants().g;
        let dsi = model.vgrid.ds_int();
        let n = model.n();
        let cols: Vec<f64> = (0..model.ncol())
            .map(|c| {
                (0..=n)
                    .map(|j| {
                        let wt = if j == 0 || j == n { 0.5 } else { 1.0 };
                        wt * d.dpids_int.get(c, j) * st.phi.get(c, j) * dsi[j]
                    })
                    .sum()
            })
            .collect();
        let p2 = model.hgrid.hint(&cols) / (g * model.hgrid.length());
        assert!((e.p - p2).abs() <= 1e-13 * e.p.abs());
    }

    #[test]
    fn relabeling_neutral_and_ablation() {
        let model = small_model(16, 3, VerticalMode::Eulerian);
        let mut r = rng(8);
        let st = random_state(&model, &mut r, 0.3);
        let d = model.diagnose(&st).unwrap();
        let n = model.n();
        let s = ColumnField::from_fn(model.ncol(), n + 1, |_, k| {
            if k == 0 || k == n {
                0.0
            } else {
                r.gen_range(-50.0..50.0)
            }
        });
        let tilde = relabeling_residual(&model, &st, &d, &s, InterfaceTheta::Tilde).unwrap();
        assert!(tilde.max_relative() < 1e-13, "{}", tilde.max_relative());
        let naive = relabeling_residual(&model, &st, &d, &s, InterfaceTheta::Naive).unwrap();
        assert!(naive.max_relative() > 1e-4, "{}", naive.max_relative());
    }

    #[test]
    fn kinetic_energy_transport_is_neutral() {
        for mode in [VerticalMode::Eulerian, VerticalMode::Lagrangian] {
            let model = small_model(10, 4, mode);
            let st = random_state(&model, &mut rng(12), 1.0);
            let d = model.diagnose(&st).unwrap();
            let p = model.tendency_parts(&st, &d).unwrap();
            let mut t = st.zeros_like();
            for f in [&p.u_vort, &p.u_ke_grad, &p.u_w_gradw, &p.u_vadv] {
                t.u.axpy(1.0, f);
            }
            t.v.axpy(1.0, &p.v_vort);
            t.v.axpy(1.0, &p.v_vadv);
            t.w.axpy(1.0, &p.w_hadv);
            t.w.axpy(1.0, &p.w_vadv);
            t.dpids.axpy(1.0, &p.mass_hflux);
            t.dpids.axpy(1.0, &p.mass_vflux);
            let rate = kinetic_energy_rate(&model, &st, &t);
            // scale: the same sum with the KE-gradient term alone
            let mut only = st.zeros_like();
            only.u.axpy(1.0, &p.u_ke_grad);
            let scale = kinetic_energy_rate(&model, &st, &only).abs();
            assert!(rate.abs() < 1e-12 * scale, "{rate} vs {scale}");
        }
    }

    #[test]
    fn residuals_of_identical_budgets() {
        let e = Energies {
            k: 1.0,
            i: 2.0,
            p: 3.0,
            p_hat_term: 0.0,
        };
        let r = compute_residuals(&e, &e, &Transfers::default(), 10.0);
        assert_eq!(r, Residuals::default());
    }

    #[test]
    fn budget_header() {
        let mut w = BudgetWriter::new(Vec::new());
        let row = BudgetRow::new(0.0, &Energies::default(), &Transfers::default(), &Residuals::default());
        w.write(&row).unwrap();
        w.flush().unwrap();
        let text = String::from_utf8(w.inner.into_inner().unwrap()).unwrap();
        assert_eq!(text.lines().next().unwrap(), BUDGET_COLUMNS.join(","));
    }
}
