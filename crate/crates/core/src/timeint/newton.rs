use crate::model::{pressure_from_eos, ModelError};
use crate::vcoord::{LevelGrid, PhysicalConstants};

use super::TimeIntError;

/// Square band matrix with `kl` sub- and `ku` super-diagonals, stored by
/// rows: entry `(i, j)` lives at `i * (kl + ku + 1) + (j + kl - i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        Self {
            n,
            kl,
            ku,
            data: vec![0.0; n * (kl + ku + 1)],
        }
    }
    pub fn n(&self) -> usize {
        self.n
    }
    fn idx(&self, i: usize, j: usize) -> Option<usize> {
        if i >= self.n || j >= self.n || j + self.kl < i || j > i + self.ku {
            None
        } else {
            Some(i * (self.kl + self.ku + 1) + (j + self.kl - i))
        }
    }
    /// Entry `(i, j)`; zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.idx(i, j).map_or(0.0, |k| self.data[k])
    }
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j).expect("entry outside the band");
        self.data[k] = v;
    }

    /// Solves `A x = rhs` by band LU without pivoting, overwriting the
    /// matrix with its factors. Adequate for the diagonally dominant
    /// column Jacobians.
    pub fn solve_in_place(&mut self, rhs: &mut [f64]) -> Result<(), TimeIntError> {
        let n = self.n;
        assert_eq!(rhs.len(), n);
        for k in 0..n {
            let piv = self.get(k, k);
            if piv == 0.0 || !piv.is_finite() {
                return Err(TimeIntError::SingularJacobian { row: k });
            }
            for i in k + 1..(k + self.kl + 1).min(n) {
                let l = self.get(i, k) / piv;
                if l == 0.0 {
                    continue;
                }
                self.set(i, k, l);
                for j in k + 1..(k + self.ku + 1).min(n) {
                    let v = self.get(i, j) - l * self.get(k, j);
                    self.set(i, j, v);
                }
                rhs[i] -= l * rhs[k];
            }
        }
        for k in (0..n).rev() {
            let mut s = rhs[k];
            for j in k + 1..(k + self.ku + 1).min(n) {
                s -= self.get(k, j) * rhs[j];
            }
            rhs[k] = s / self.get(k, k);
        }
        Ok(())
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }
}

/// Outcome of one column solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColumnSolveReport {
    pub iterations: usize,
    /// Final `max |G| / scale`.
    pub residual: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Maximum number of step halvings when an update would invert the
    /// geopotential ordering.
    pub max_halvings: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-11,
            max_iterations: 10,
            max_halvings: 8,
        }
    }
}

/// Column data held fixed during the implicit solve.
#[derive(Debug, Clone, Copy)]
pub struct ColumnProblem<'a> {
    pub grid: &'a LevelGrid,
    pub constants: &'a PhysicalConstants,
    pub p_top: f64,
    pub theta: &'a [f64],
    pub dpids: &'a [f64],
    /// Explicit stage values of `w` and `phi` (interfaces).
    pub w_star: &'a [f64],
    pub phi_star: &'a [f64],
    /// `dt * a_kk`.
    pub gamma: f64,
}

impl<'a> ColumnProblem<'a> {
    fn n(&self) -> usize {
        self.grid.n()
    }

    /// `c_k = 1 / (ds_k avg(dpids)_k)`, with the half-layer at the top.
    fn coeffs(&self) -> Vec<f64> {
        let n = self.n();
        let (dsm, dsi) = (self.grid.ds_mid(), self.grid.ds_int());
        let mut c = vec![0.0; n];
        c[0] = 1.0 / (0.5 * dsm[0] * self.dpids[0]);
        for k in 1..n {
            let avg = (self.dpids[k] * dsm[k] + self.dpids[k - 1] * dsm[k - 1]) / (2.0 * dsi[k]);
            c[k] = 1.0 / (dsi[k] * avg);
        }
        c
    }

    /// Midpoint pressure for a trial geopotential.
    fn pressure(&self, phi: &[f64]) -> Result<Vec<f64>, ModelError> {
        let n = self.n();
        let dsm = self.grid.ds_mid();
        (0..n)
            .map(|m| {
                let d = (phi[m + 1] - phi[m]) / dsm[m];
                if !(d < 0.0) {
                    return Err(ModelError::NonPhysical {
                        column: 0,
                        level: m,
                        what: "dphi/ds must be negative",
                    });
                }
                Ok(pressure_from_eos(self.constants, self.theta[m], d))
            })
            .collect()
    }

    /// `mu` at interfaces `0..n` (the surface value is not needed).
    pub fn mu(&self, phi: &[f64]) -> Result<Vec<f64>, ModelError> {
        let p = self.pressure(phi)?;
        let c = self.coeffs();
        let n = self.n();
        let mut mu = vec![0.0; n];
        mu[0] = (p[0] - self.p_top) * c[0];
        for k in 1..n {
            mu[k] = (p[k] - p[k - 1]) * c[k];
        }
        Ok(mu)
    }

    /// Reduced residual on the geopotential unknowns `phi_0..phi_{n-1}`:
    /// `G = phi - phi* - gamma g w* - (gamma g)^2 (mu(phi) - 1)`.
    pub fn residual(&self, phi: &[f64]) -> Result<Vec<f64>, ModelError> {
        let g = self.constants.g;
        let gg = self.gamma * g;
        let mu = self.mu(phi)?;
        Ok((0..self.n())
            .map(|k| phi[k] - self.phi_star[k] - gg * self.w_star[k] - gg * gg * (mu[k] - 1.0))
            .collect())
    }

    /// Analytic tridiagonal Jacobian `dG/dphi`.
    pub fn jacobian(&self, phi: &[f64]) -> Result<BandedMatrix, ModelError> {
        let n = self.n();
        let alpha = self.constants.cp / self.constants.cv();
        let dsm = self.grid.ds_mid();
        let p = self.pressure(phi)?;
        // e_m = dp_m/dphi_m = alpha p_m / (dphids_m ds_m); dp_m/dphi_{m+1} = -e_m
        let e: Vec<f64> = (0..n)
            .map(|m| {
                let d = (phi[m + 1] - phi[m]) / dsm[m];
                alpha * p[m] / (d * dsm[m])
            })
            .collect();
        let c = self.coeffs();
        let s = (self.gamma * self.constants.g).powi(2);
        let mut j = BandedMatrix::zeros(n, 1, 1);
        for k in 0..n {
            let dmu_k = if k == 0 { c[0] * e[0] } else { c[k] * (e[k] + e[k - 1]) };
            j.set(k, k, 1.0 - s * dmu_k);
            if k > 0 {
                j.set(k, k - 1, s * c[k] * e[k - 1]);
            }
            if k + 1 < n {
                j.set(k, k + 1, s * c[k] * e[k]);
            }
        }
        Ok(j)
    }

    fn scale(&self) -> f64 {
        let n = self.n();
        let depth = (0..n).fold(0.0_f64, |m, k| m.max((self.phi_star[k] - self.phi_star[n]).abs()));
        depth.max(self.constants.g)
    }

    fn monotone(&self, phi: &[f64]) -> bool {
        phi.windows(2).all(|w| w[1] < w[0])
    }

    /// Newton iteration for the implicit acoustic stage; returns `(w, phi)`
    /// at all interfaces with the surface values carried over unchanged.
    pub fn solve(
        &self,
        opts: &NewtonOptions,
    ) -> Result<(Vec<f64>, Vec<f64>, ColumnSolveReport), ModelError> {
        let n = self.n();
        let scale = self.scale();
        let norm = |r: &[f64]| r.iter().fold(0.0_f64, |m, v| m.max(v.abs())) / scale;
        let mut phi = self.phi_star.to_vec();
        let mut report = ColumnSolveReport {
            iterations: 0,
            residual: norm(&self.residual(&phi)?),
            converged: false,
        };
        for it in 1..=opts.max_iterations {
            let g = self.residual(&phi)?;
            let mut jac = self.jacobian(&phi)?;
            let mut delta: Vec<f64> = g.iter().map(|v| -v).collect();
            jac.solve_in_place(&mut delta).map_err(|_| ModelError::NonPhysical {
                column: 0,
                level: 0,
                what: "singular column Jacobian",
            })?;
            let mut lambda = 1.0;
            let mut trial = phi.clone();
            let mut halvings = 0;
            loop {
                for k in 0..n {
                    trial[k] = phi[k] + lambda * delta[k];
                }
                if self.monotone(&trial) {
                    break;
                }
                halvings += 1;
                if halvings > opts.max_halvings {
                    return Err(ModelError::NonPhysical {
                        column: 0,
                        level: 0,
                        what: "Newton update inverts the geopotential",
                    });
                }
                lambda *= 0.5;
            }
            phi.copy_from_slice(&trial);
            report.iterations = it;
            report.residual = norm(&self.residual(&phi)?);
            if report.residual <= opts.tolerance {
                report.converged = true;
                break;
            }
        }
        let gg = self.gamma * self.constants.g;
        let mu = self.mu(&phi)?;
        let mut w = self.w_star.to_vec();
        for k in 0..n {
            w[k] = self.w_star[k] + gg * (mu[k] - 1.0);
        }
        Ok((w, phi, report))
    }
}
