use super::{ColumnField, Diagnostics, Model, ModelError, PrognosticState};
use crate::vops::{
    avg_i2m_into, ddn_i2m_into, ddn_m2i_into, sb81_mass_adv_int_into, sb81_mass_adv_mid_into,
    MidBoundary,
};

/// Every term of the discrete equations, kept separate so that energy
/// sums can be assembled term by term. Signs are included: each field is
/// the contribution to the time derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct TendencyParts {
    /// `(zeta + f) v`
    pub u_vort: ColumnField,
    /// `-1/2 d/dx (u^2 + v^2 + avg(w^2))`
    pub u_ke_grad: ColumnField,
    /// `+avg_i2m(w dw/dx)`
    pub u_w_gradw: ColumnField,
    pub u_vadv: ColumnField,
    /// `-cp theta_v dPi/dx`
    pub u_pgf: ColumnField,
    /// `-avg_i2m(mu dphi/dx)`
    pub u_mu_gradphi: ColumnField,
    pub u_hv: ColumnField,

    pub v_vort: ColumnField,
    pub v_vadv: ColumnField,
    pub v_hv: ColumnField,

    /// `-u_tilde dw/dx`
    pub w_hadv: ColumnField,
    pub w_vadv: ColumnField,
    /// `-g (1 - mu)`
    pub w_buoy: ColumnField,
    pub w_hv: ColumnField,

    pub phi_hadv: ColumnField,
    /// `-sdot ddn_m2i(avg_i2m(phi))`
    pub phi_vadv: ColumnField,
    /// `+g w`
    pub phi_gw: ColumnField,

    pub theta_hflux: ColumnField,
    pub theta_vflux: ColumnField,
    pub theta_hv: ColumnField,

    pub mass_hflux: ColumnField,
    pub mass_vflux: ColumnField,
    pub mass_hv: ColumnField,
}

fn sum(fields: &[&ColumnField]) -> ColumnField {
    let mut out = fields[0].clone();
    for f in &fields[1..] {
        out.axpy(1.0, f);
    }
    out
}

fn pin_surface(f: &mut ColumnField) {
    let k = f.len() - 1;
    for c in 0..f.ncol() {
        f.set(c, k, 0.0);
    }
}

impl TendencyParts {
    /// Horizontally explicit part: everything except the acoustic pair.
    pub fn explicit(&self) -> PrognosticState {
        let mut w = sum(&[&self.w_hadv, &self.w_vadv, &self.w_hv]);
        let mut phi = sum(&[&self.phi_hadv, &self.phi_vadv]);
        pin_surface(&mut w);
        pin_surface(&mut phi);
        PrognosticState {
            u: sum(&[
                &self.u_vort,
                &self.u_ke_grad,
                &self.u_w_gradw,
                &self.u_vadv,
                &self.u_pgf,
                &self.u_mu_gradphi,
                &self.u_hv,
            ]),
            v: sum(&[&self.v_vort, &self.v_vadv, &self.v_hv]),
            w,
            phi,
            theta: sum(&[&self.theta_hflux, &self.theta_vflux, &self.theta_hv]),
            dpids: sum(&[&self.mass_hflux, &self.mass_vflux, &self.mass_hv]),
        }
    }

    /// Vertically implicit part: `-g (1 - mu)` for `w` and `g w` for `phi`.
    pub fn implicit(&self) -> PrognosticState {
        let mut w = self.w_buoy.clone();
        let mut phi = self.phi_gw.clone();
        pin_surface(&mut w);
        pin_surface(&mut phi);
        let (ncol, n) = (self.u_vort.ncol(), self.u_vort.len());
        PrognosticState {
            u: ColumnField::zeros(ncol, n),
            v: ColumnField::zeros(ncol, n),
            w,
            phi,
            theta: ColumnField::zeros(ncol, n),
            dpids: ColumnField::zeros(ncol, n),
        }
    }

    pub fn total(&self) -> PrognosticState {
        let mut t = self.explicit();
        t.axpy(1.0, &self.implicit());
        t
    }
}

impl Model {
    pub fn tendency_parts(
        &self,
        state: &PrognosticState,
        diag: &Diagnostics,
    ) -> Result<TendencyParts, ModelError> {
        self.check_shape(state)?;
        let (n, ncol) = (self.n(), self.ncol());
        let grid = &self.vgrid;
        let h = &self.hgrid;
        let consts = self.constants();
        let (g, cp, f) = (consts.g, consts.cp, consts.f);
        let nu = self.config.nu;
        let mid = || ColumnField::zeros(ncol, n);
        let int = || ColumnField::zeros(ncol, n + 1);
        let gradm = |x: &ColumnField| ColumnField::from_vec(ncol, n, h.grad_levels(x.data(), n));
        let gradi =
            |x: &ColumnField| ColumnField::from_vec(ncol, n + 1, h.grad_levels(x.data(), n + 1));
        let hv = |x: &ColumnField| {
            ColumnField::from_vec(ncol, x.len(), h.hyperviscosity_levels(x.data(), x.len(), nu))
        };

        let (u, v, w, phi) = (&state.u, &state.v, &state.w, &state.phi);

        let zeta = gradm(v);
        let u_vort = ColumnField::from_fn(ncol, n, |c, k| (zeta.get(c, k) + f) * v.get(c, k));
        let v_vort = ColumnField::from_fn(ncol, n, |c, k| -(zeta.get(c, k) + f) * u.get(c, k));

        let mut ke = mid();
        let mut wgw_mid = mid();
        let dwdx = gradi(w);
        let w2 = w.map(|x| x * x);
        let wgw = w.zip_map(&dwdx, |a, b| a * b);
        for c in 0..ncol {
            let mut w2m = vec![0.0; n];
            avg_i2m_into(grid, w2.col(c), &mut w2m);
            for k in 0..n {
                let (uu, vv) = (u.get(c, k), v.get(c, k));
                ke.set(c, k, uu * uu + vv * vv + w2m[k]);
            }
            avg_i2m_into(grid, wgw.col(c), wgw_mid.col_mut(c));
        }
        let u_ke_grad = gradm(&ke).map(|x| -0.5 * x);
        let u_w_gradw = wgw_mid;

        let dexner = gradm(&diag.exner);
        let u_pgf = diag.theta_v.zip_map(&dexner, |t, d| -cp * t * d);

        let dphidx = gradi(phi);
        let mugp = diag.mu.zip_map(&dphidx, |a, b| a * b);
        let mut u_mu_gradphi = mid();
        for c in 0..ncol {
            let out = u_mu_gradphi.col_mut(c);
            avg_i2m_into(grid, mugp.col(c), out);
            out.iter_mut().for_each(|x| *x = -*x);
        }

        // vertical transport (vanishes identically when S = 0)
        let mut u_vadv = mid();
        let mut v_vadv = mid();
        let mut w_vadv = int();
        let mut phi_vadv = int();
        let mut theta_vflux = mid();
        let mut mass_vflux = mid();
        let mut buf_mid = vec![0.0; n];
        let mut buf_int = vec![0.0; n + 1];
        for c in 0..ncol {
            let smass = diag.sdot_mass.col(c);
            let dpids = state.dpids.col(c);
            let dpids_int = diag.dpids_int.col(c);

            sb81_mass_adv_mid_into(grid, smass, u.col(c), &mut buf_mid);
            for (o, (a, d)) in u_vadv.col_mut(c).iter_mut().zip(buf_mid.iter().zip(dpids)) {
                *o = -a / d;
            }
            sb81_mass_adv_mid_into(grid, smass, v.col(c), &mut buf_mid);
            for (o, (a, d)) in v_vadv.col_mut(c).iter_mut().zip(buf_mid.iter().zip(dpids)) {
                *o = -a / d;
            }
            sb81_mass_adv_int_into(grid, smass, w.col(c), &mut buf_int);
            for (o, (a, d)) in w_vadv.col_mut(c).iter_mut().zip(buf_int.iter().zip(dpids_int)) {
                *o = -a / d;
            }

            let pc = phi.col(c);
            avg_i2m_into(grid, pc, &mut buf_mid);
            ddn_m2i_into(
                grid,
                &buf_mid,
                MidBoundary {
                    top: pc[0],
                    surface: pc[n],
                },
                &mut buf_int,
            );
            let sdot = diag.sdot.col(c);
            for (o, (s, d)) in phi_vadv.col_mut(c).iter_mut().zip(sdot.iter().zip(&buf_int)) {
                *o = -s * d;
            }

            let tt = diag.theta_v_tilde.col(c);
            let flux: Vec<f64> = tt.iter().zip(smass).map(|(a, b)| a * b).collect();
            ddn_i2m_into(grid, &flux, &mut buf_mid);
            for (o, x) in theta_vflux.col_mut(c).iter_mut().zip(&buf_mid) {
                *o = -x;
            }
            ddn_i2m_into(grid, smass, &mut buf_mid);
            for (o, x) in mass_vflux.col_mut(c).iter_mut().zip(&buf_mid) {
                *o = -x;
            }
        }

        let w_hadv = diag.u_tilde.zip_map(&dwdx, |a, b| -a * b);
        let w_buoy = diag.mu.map(|m| -g * (1.0 - m));
        let phi_hadv = diag.u_tilde.zip_map(&dphidx, |a, b| -a * b);
        let phi_gw = w.map(|x| g * x);

        let theta_u = state.theta.zip_map(u, |a, b| a * b);
        let theta_hflux = gradm(&theta_u).map(|x| -x);
        let mass_u = state.dpids.zip_map(u, |a, b| a * b);
        let mass_hflux = gradm(&mass_u).map(|x| -x);

        let (u_hv, v_hv, mut w_hv, theta_hv, mass_hv) = if nu > 0.0 {
            (hv(u), hv(v), hv(w), hv(&state.theta), hv(&state.dpids))
        } else {
            (mid(), mid(), int(), mid(), mid())
        };
        pin_surface(&mut w_hv);

        Ok(TendencyParts {
            u_vort,
            u_ke_grad,
            u_w_gradw,
            u_vadv,
            u_pgf,
            u_mu_gradphi,
            u_hv,
            v_vort,
            v_vadv,
            v_hv,
            w_hadv,
            w_vadv,
            w_buoy,
            w_hv,
            phi_hadv,
            phi_vadv,
            phi_gw,
            theta_hflux,
            theta_vflux,
            theta_hv,
            mass_hflux,
            mass_vflux,
            mass_hv,
        })
    }
}
