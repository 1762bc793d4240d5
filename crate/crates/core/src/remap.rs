//! Conservative vertical remap from floating (Lagrangian) levels back to
//! the hybrid reference levels.
//!
//! Densities per unit mass (`theta_v`, `u`, `v` and the nonhydrostatic
//! pressure departure `p - avg(pi)`) are reconstructed with piecewise
//! parabolas in the hydrostatic-pressure coordinate and integrated over
//! the target layers. `w` is interpolated linearly in `pi`; `phi` is
//! rebuilt from the equation of state so diagnostics stay consistent.

use rayon::prelude::*;
use thiserror::Error;

use crate::model::{diagnose_eos_column, exner, Model, ModelError, PrognosticState};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RemapError {
    #[error("source levels cross in column {column} at interface {level}")]
    Crossing { column: usize, level: usize },
    #[error("target levels not increasing in column {column} at interface {level}")]
    BadTarget { column: usize, level: usize },
    #[error("monotone remap left source bounds in column {column}, level {level}")]
    BoundsViolated { column: usize, level: usize },
    #[error("model: {0}")]
    Model(#[from] ModelError),
}

/// Part of source cell `src` covering `[xi0, xi1]` of its normalised
/// mass coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub src: usize,
    pub xi0: f64,
    pub xi1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnPlan {
    pub pi_src: Vec<f64>,
    pub pi_tgt: Vec<f64>,
    /// Segments making up each target layer, top to bottom.
    pub overlaps: Vec<Vec<Segment>>,
    pub identity: bool,
}

impl ColumnPlan {
    /// Overlap masses (Pa) of target layer `j`.
    pub fn weights(&self, j: usize) -> Vec<(usize, f64)> {
        self.overlaps[j]
            .iter()
            .map(|s| (s.src, (s.xi1 - s.xi0) * (self.pi_src[s.src + 1] - self.pi_src[s.src])))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RemapPlan {
    pub columns: Vec<ColumnPlan>,
}

impl RemapPlan {
    pub fn is_identity(&self) -> bool {
        self.columns.iter().all(|c| c.identity)
    }
}

/// Overlap segments between two monotone partitions with equal endpoints.
pub fn overlaps(pi_src: &[f64], pi_tgt: &[f64]) -> Vec<Vec<Segment>> {
    let n_src = pi_src.len() - 1;
    let n_tgt = pi_tgt.len() - 1;
    let mut out = vec![Vec::new(); n_tgt];
    let mut i = 0;
    for (j, segs) in out.iter_mut().enumerate() {
        let (lo, hi) = (pi_tgt[j], pi_tgt[j + 1]);
        while i + 1 < n_src && pi_src[i + 1] <= lo {
            i += 1;
        }
        let mut k = i;
        loop {
            let (a, b) = (pi_src[k], pi_src[k + 1]);
            let x0 = lo.max(a);
            let x1 = hi.min(b);
            if x1 > x0 {
                let m = b - a;
                segs.push(Segment {
                    src: k,
                    xi0: (x0 - a) / m,
                    xi1: (x1 - a) / m,
                });
            }
            if b >= hi || k + 1 == n_src {
                break;
            }
            k += 1;
        }
    }
    out
}

pub fn build_column_plan(pi_src: Vec<f64>, pi_tgt: Vec<f64>, column: usize) -> Result<ColumnPlan, RemapError> {
    if let Some(k) = pi_src.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(RemapError::Crossing { column, level: k + 1 });
    }
    if let Some(k) = pi_tgt.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(RemapError::BadTarget { column, level: k + 1 });
    }
    let identity = pi_src
        .iter()
        .zip(&pi_tgt)
        .all(|(a, b)| (a - b).abs() <= 1e-14 * a.abs());
    let overlaps = overlaps(&pi_src, &pi_tgt);
    Ok(ColumnPlan {
        pi_src,
        pi_tgt,
        overlaps,
        identity,
    })
}

/// Source interfaces from the cumulative mass above each level, targets
/// from the hybrid table at the resulting surface pressure.
pub fn build_plan(model: &Model, state: &PrognosticState) -> Result<RemapPlan, RemapError> {
    model.check_shape(state)?;
    let n = model.n();
    let dsm = model.vgrid.ds_mid();
    let p_top = model.p_top();
    let columns = (0..model.ncol())
        .map(|c| {
            let mut pi = vec![0.0; n + 1];
            pi[0] = p_top;
            for m in 0..n {
                pi[m + 1] = pi[m] + state.dpids.get(c, m) * dsm[m];
            }
            let tgt = model.hybrid.pi_column(pi[n]);
            build_column_plan(pi, tgt, c)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RemapPlan { columns })
}

/// Piecewise-parabolic reconstruction of cell means `a` on cells of
/// widths `dx`; returns left and right edge values per cell.
pub fn ppm_edges(a: &[f64], dx: &[f64], monotone: bool) -> (Vec<f64>, Vec<f64>) {
    let n = a.len();
    let mut left = a.to_vec();
    let mut right = a.to_vec();
    if n < 2 {
        return (left, right);
    }
    // limited slopes
    let mut da = vec![0.0; n];
    for j in 1..n - 1 {
        let (dl, d0, dr) = (dx[j - 1], dx[j], dx[j + 1]);
        let s = d0 / (dl + d0 + dr)
            * ((2.0 * dl + d0) / (dr + d0) * (a[j + 1] - a[j])
                + (d0 + 2.0 * dr) / (dl + d0) * (a[j] - a[j - 1]));
        da[j] = if monotone {
            if (a[j + 1] - a[j]) * (a[j] - a[j - 1]) > 0.0 {
                s.abs()
                    .min(2.0 * (a[j] - a[j - 1]).abs())
                    .min(2.0 * (a[j + 1] - a[j]).abs())
                    .copysign(s)
            } else {
                0.0
            }
        } else {
            s
        };
    }
    // interior edge values: edge e sits between cells e-1 and e
    let mut edge = vec![0.0; n + 1];
    edge[0] = a[0];
    edge[n] = a[n - 1];
    for e in 1..n {
        let j = e - 1;
        if j >= 1 && j + 2 < n {
            let (dm, d0, d1, d2) = (dx[j - 1], dx[j], dx[j + 1], dx[j + 2]);
            let z1 = (dm + d0) / (2.0 * d0 + d1);
            let z2 = (d2 + d1) / (2.0 * d1 + d0);
            let tot = dm + d0 + d1 + d2;
            edge[e] = a[j]
                + d0 / (d0 + d1) * (a[j + 1] - a[j])
                + (2.0 * d1 * d0 / (d0 + d1) * (z1 - z2) * (a[j + 1] - a[j]) - d0 * z1 * da[j + 1]
                    + d1 * z2 * da[j])
                    / tot;
        } else {
            edge[e] = (a[j] * dx[j + 1] + a[j + 1] * dx[j]) / (dx[j] + dx[j + 1]);
        }
    }
    for j in 0..n {
        left[j] = edge[j];
        right[j] = edge[j + 1];
    }
    if monotone {
        for j in 0..n {
            let (al, ar, m) = (left[j], right[j], a[j]);
            // keep edges between neighbouring means
            let lo_l = if j > 0 { a[j - 1].min(m) } else { m };
            let hi_l = if j > 0 { a[j - 1].max(m) } else { m };
            let lo_r = if j + 1 < n { a[j + 1].min(m) } else { m };
            let hi_r = if j + 1 < n { a[j + 1].max(m) } else { m };
            let mut al = al.clamp(lo_l, hi_l);
            let mut ar = ar.clamp(lo_r, hi_r);
            if (ar - m) * (m - al) <= 0.0 {
                al = m;
                ar = m;
            } else {
                let d = ar - al;
                let c = m - 0.5 * (al + ar);
                if d * c > d * d / 6.0 {
                    al = 3.0 * m - 2.0 * ar;
                } else if -d * d / 6.0 > d * c {
                    ar = 3.0 * m - 2.0 * al;
                }
            }
            left[j] = al;
            right[j] = ar;
        }
    }
    (left, right)
}

/// `int_{x0}^{x1} q(xi) dxi` for the parabola with edges `l`, `r` and mean `m`.
#[inline]
fn parabola_integral(l: f64, r: f64, m: f64, x0: f64, x1: f64) -> f64 {
    let dq = r - l;
    let q6 = 6.0 * (m - 0.5 * (l + r));
    let s1 = x1 - x0;
    let s2 = (x1 * x1 - x0 * x0) / 2.0;
    let s3 = (x1 * x1 * x1 - x0 * x0 * x0) / 3.0;
    l * s1 + dq * s2 + q6 * (s2 - s3)
}

/// Remaps per-mass means `q` (cells of the source plan) to the targets,
/// returning target means per unit mass.
pub fn remap_intensive(plan: &ColumnPlan, q: &[f64], monotone: bool) -> Vec<f64> {
    let n_src = plan.pi_src.len() - 1;
    let dx: Vec<f64> = (0..n_src).map(|i| plan.pi_src[i + 1] - plan.pi_src[i]).collect();
    let (l, r) = ppm_edges(q, &dx, monotone);
    plan.overlaps
        .iter()
        .enumerate()
        .map(|(j, segs)| {
            let content: f64 = segs
                .iter()
                .map(|s| {
                    let i = s.src;
                    if s.xi0 == 0.0 && s.xi1 == 1.0 {
                        q[i] * dx[i]
                    } else {
                        parabola_integral(l[i], r[i], q[i], s.xi0, s.xi1) * dx[i]
                    }
                })
                .sum();
            content / (plan.pi_tgt[j + 1] - plan.pi_tgt[j])
        })
        .collect()
}

/// Linear interpolation of interface values against `pi`.
fn interp_interfaces(pi_src: &[f64], f: &[f64], pi_tgt: &[f64]) -> Vec<f64> {
    let n = pi_src.len() - 1;
    let mut out = vec![0.0; pi_tgt.len()];
    let mut i = 0;
    for (k, &p) in pi_tgt.iter().enumerate() {
        while i + 1 < n && pi_src[i + 1] < p {
            i += 1;
        }
        let t = ((p - pi_src[i]) / (pi_src[i + 1] - pi_src[i])).clamp(0.0, 1.0);
        out[k] = f[i] + t * (f[i + 1] - f[i]);
    }
    out[0] = f[0];
    out[pi_tgt.len() - 1] = f[n];
    out
}

/// Remaps every column of `state` according to `plan`.
pub fn remap_state(
    model: &Model,
    plan: &RemapPlan,
    state: &PrognosticState,
    monotone: bool,
) -> Result<PrognosticState, RemapError> {
    let cols: Result<Vec<_>, RemapError> = plan
        .columns
        .par_iter()
        .enumerate()
        .map(|(c, cp)| remap_column(model, cp, state, c, monotone))
        .collect();
    let mut out = state.clone();
    for (c, col) in cols?.into_iter().enumerate() {
        let (u, v, w, phi, theta, dpids) = col;
        out.u.col_mut(c).copy_from_slice(&u);
        out.v.col_mut(c).copy_from_slice(&v);
        out.w.col_mut(c).copy_from_slice(&w);
        out.phi.col_mut(c).copy_from_slice(&phi);
        out.theta.col_mut(c).copy_from_slice(&theta);
        out.dpids.col_mut(c).copy_from_slice(&dpids);
    }
    Ok(out)
}

type ColumnOut = (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>);

/// One column onto reference levels; the identity plan returns the input.
pub fn remap_column(
    model: &Model,
    plan: &ColumnPlan,
    state: &PrognosticState,
    c: usize,
    monotone: bool,
) -> Result<ColumnOut, RemapError> {
    let copy = || {
        (
            state.u.col(c).to_vec(),
            state.v.col(c).to_vec(),
            state.w.col(c).to_vec(),
            state.phi.col(c).to_vec(),
            state.theta.col(c).to_vec(),
            state.dpids.col(c).to_vec(),
        )
    };
    if plan.identity {
        return Ok(copy());
    }
    let n = model.n();
    let grid = &model.vgrid;
    let consts = model.constants();
    let dsm = grid.ds_mid();
    let dpids = state.dpids.col(c);
    let eos = diagnose_eos_column(grid, consts, state.theta.col(c), dpids, state.phi.col(c), c)?;
    let p_dev: Vec<f64> = (0..n)
        .map(|m| eos.p[m] - 0.5 * (plan.pi_src[m] + plan.pi_src[m + 1]))
        .collect();

    let theta_v = remap_intensive(plan, &eos.theta_v, monotone);
    let u = remap_intensive(plan, state.u.col(c), monotone);
    let v = remap_intensive(plan, state.v.col(c), monotone);
    let p_new = remap_intensive(plan, &p_dev, monotone);
    if monotone {
        for (src, tgt) in [(&eos.theta_v[..], &theta_v), (state.u.col(c), &u), (state.v.col(c), &v)] {
            let lo = src.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = src.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let slack = 1e-12 * (lo.abs().max(hi.abs()));
            if let Some(level) = tgt.iter().position(|x| *x < lo - slack || *x > hi + slack) {
                return Err(RemapError::BoundsViolated { column: c, level });
            }
        }
    }

    let new_dpids: Vec<f64> = (0..n)
        .map(|m| (plan.pi_tgt[m + 1] - plan.pi_tgt[m]) / dsm[m])
        .collect();
    let theta: Vec<f64> = (0..n).map(|m| theta_v[m] * new_dpids[m]).collect();
    let w = interp_interfaces(&plan.pi_src, state.w.col(c), &plan.pi_tgt);

    let mut phi = vec![0.0; n + 1];
    phi[n] = state.phi.get(c, n);
    for m in (0..n).rev() {
        let p = 0.5 * (plan.pi_tgt[m] + plan.pi_tgt[m + 1]) + p_new[m];
        if !(p > 0.0) {
            return Err(RemapError::Model(ModelError::NonPhysical {
                column: c,
                level: m,
                what: "remapped pressure must be positive",
            }));
        }
        let dphids = -consts.r_dry * theta[m] * exner(consts, p) / p;
        phi[m] = phi[m + 1] - dphids * dsm[m];
    }
    Ok((u, v, w, phi, theta, new_dpids))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_cell_overlaps_by_hand() {
        // source [0, 3, 10], target [0, 5, 10]
        let plan = build_column_plan(vec![0.0, 3.0, 10.0], vec![0.0, 5.0, 10.0], 0).unwrap();
        assert_eq!(plan.weights(0), vec![(0, 3.0), (1, 2.0)]);
        assert_eq!(plan.weights(1), vec![(1, 5.0)]);
        assert!(!plan.identity);
    }

    #[test]
    fn identical_partitions_give_identity() {
        let pi = vec![100.0, 400.0, 900.0, 1500.0];
        let plan = build_column_plan(pi.clone(), pi, 0).unwrap();
        assert!(plan.identity);
        for j in 0..3 {
            assert_eq!(plan.weights(j).len(), 1);
        }
    }

    #[test]
    fn crossing_levels_rejected() {
        assert!(matches!(
            build_column_plan(vec![0.0, 5.0, 4.0, 10.0], vec![0.0, 3.0, 6.0, 10.0], 2),
            Err(RemapError::Crossing { column: 2, level: 2 })
        ));
    }

    #[test]
    fn constant_profile_reproduced() {
        let plan = build_column_plan(
            vec![0.0, 1.0, 2.5, 3.0, 6.0, 7.0],
            vec![0.0, 1.4, 2.0, 4.0, 5.5, 7.0],
            0,
        )
        .unwrap();
        for mono in [false, true] {
            let out = remap_intensive(&plan, &[3.25; 5], mono);
            assert!(out.iter().all(|v| (v - 3.25).abs() < 1e-14));
        }
    }

    #[test]
    fn linear_profile_reproduced_unlimited() {
        // PPM recovers linear profiles on uniform cells away from the ends
        let src: Vec<f64> = (0..=10).map(|i| i as f64).collect();
        let tgt: Vec<f64> = (0..=10).map(|i| if i == 0 || i == 10 { i as f64 } else { i as f64 + 0.3 }).collect();
        let plan = build_column_plan(src, tgt, 0).unwrap();
        let q: Vec<f64> = (0..10).map(|i| 2.0 * (i as f64 + 0.5)).collect();
        let out = remap_intensive(&plan, &q, false);
        for j in 3..7 {
            let mid = 0.5 * (plan.pi_tgt[j] + plan.pi_tgt[j + 1]);
            assert!((out[j] - 2.0 * mid).abs() < 1e-12, "{j}");
        }
    }

    use crate::cases::{init_hydrostatic_rest, Background};
    use crate::model::VerticalMode;
    use crate::test_support::{random_state, rng, small_model};
    use rand::Rng;

    fn totals(model: &Model, st: &PrognosticState, c: usize) -> [f64; 4] {
        let ds = model.vgrid.ds_mid();
        let mut t = [0.0; 4];
        for m in 0..model.n() {
            let d = st.dpids.get(c, m) * ds[m];
            t[0] += d;
            t[1] += st.theta.get(c, m) * ds[m];
            t[2] += d * st.u.get(c, m);
            t[3] += d * st.v.get(c, m);
        }
        t
    }

    #[test]
    fn reference_state_gives_identity_plan() {
        let model = small_model(15, 3, VerticalMode::Lagrangian);
        let st = init_hydrostatic_rest(&model, Background::default(), 9.7e4);
        let plan = build_plan(&model, &st).unwrap();
        assert!(plan.is_identity());
        assert_eq!(remap_state(&model, &plan, &st, true).unwrap(), st);
    }

    #[test]
    fn random_states_conserve_column_totals() {
        let model = small_model(20, 3, VerticalMode::Lagrangian);
        let mut r = rng(12);
        for trial in 0..20 {
            let st = random_state(&model, &mut r, 1.0);
            let plan = build_plan(&model, &st).unwrap();
            for cp in &plan.columns {
                assert_eq!(cp.pi_src[0], cp.pi_tgt[0]);
                assert_eq!(*cp.pi_src.last().unwrap(), *cp.pi_tgt.last().unwrap());
            }
            let out = remap_state(&model, &plan, &st, trial % 2 == 0).unwrap();
            out.validate().unwrap();
            for c in 0..model.ncol() {
                let (a, b) = (totals(&model, &st, c), totals(&model, &out, c));
                let mag = [a[0], a[1], a[0] * 20.0, a[0] * 10.0];
                for i in 0..4 {
                    assert!((a[i] - b[i]).abs() <= 1e-13 * mag[i], "{trial} {c} {i} {}", (a[i] - b[i]) / mag[i]);
                }
            }
            // already on the reference levels afterwards
            assert!(build_plan(&model, &out).unwrap().columns.iter().all(|c| c
                .pi_src
                .iter()
                .zip(&c.pi_tgt)
                .all(|(x, y)| (x - y).abs() <= 1e-10 * y)));
        }
    }

    #[test]
    fn monotone_remap_bounds_sawtooth() {
        let mut r = rng(3);
        for _ in 0..200 {
            let n = r.gen_range(4..40);
            let mut src = vec![0.0];
            let mut tgt = vec![0.0];
            for _ in 0..n {
                src.push(src.last().unwrap() + r.gen_range(0.2..2.0));
                tgt.push(tgt.last().unwrap() + r.gen_range(0.2..2.0));
            }
            let scale = src[n] / tgt[n];
            for x in tgt.iter_mut() {
                *x *= scale;
            }
            tgt[n] = src[n];
            let plan = build_column_plan(src, tgt, 0).unwrap();
            let q: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 } * r.gen_range(0.5..1.0)).collect();
            let (lo, hi) = q.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
            let out = remap_intensive(&plan, &q, true);
            assert!(out.iter().all(|v| *v >= lo - 1e-14 && *v <= hi + 1e-14), "{out:?}");
        }
    }
}

