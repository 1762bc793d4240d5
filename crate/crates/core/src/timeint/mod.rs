//! Additive IMEX Runge-Kutta time stepping with a horizontally explicit,
//! vertically implicit split, plus an explicit RK baseline.

mod newton;
mod tableau;

use rayon::prelude::*;
use thiserror::Error;

use crate::model::{Model, ModelError, PrognosticState};

pub use newton::{BandedMatrix, ColumnProblem, ColumnSolveReport, NewtonOptions};
pub use tableau::{Condition, IMEXTableau, OrderReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TimeIntError {
    #[error("tableau: {0}")]
    Tableau(String),
    #[error("zero pivot in banded solve at row {row}")]
    SingularJacobian { row: usize },
    #[error("Newton solve failed in column {column} after {iterations} iterations (residual {residual:e})")]
    NewtonFailed {
        column: usize,
        iterations: usize,
        residual: f64,
    },
    #[error("model: {0}")]
    Model(#[from] ModelError),
}

/// Aggregate of all column solves in a step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepReport {
    pub solves: usize,
    pub max_iterations: usize,
    pub max_residual: f64,
    pub worst_column: usize,
}

impl StepReport {
    fn absorb(&mut self, other: &StepReport) {
        self.solves += other.solves;
        if other.max_iterations > self.max_iterations {
            self.max_iterations = other.max_iterations;
        }
        if other.max_residual > self.max_residual {
            self.max_residual = other.max_residual;
            self.worst_column = other.worst_column;
        }
    }
}

/// A system `y' = F_E(y) + F_I(y)` with a solver for
/// `y = rhs + gamma F_I(y)`.
pub trait ImexProblem {
    type State: Clone;

    fn explicit_rhs(&self, y: &Self::State) -> Result<Self::State, TimeIntError>;
    fn implicit_rhs(&self, y: &Self::State) -> Result<Self::State, TimeIntError>;
    fn solve_implicit(
        &self,
        rhs: &Self::State,
        gamma: f64,
    ) -> Result<(Self::State, StepReport), TimeIntError>;
    /// `y += a x`
    fn axpy(&self, y: &mut Self::State, a: f64, x: &Self::State);
}

/// One additive Runge-Kutta step. Stage `i` solves
/// `Y_i = y + dt sum_{j<i} (aE_ij F_E(Y_j) + aI_ij F_I(Y_j)) + dt aI_ii F_I(Y_i)`;
/// the update is `y + dt sum_i (bE_i F_E(Y_i) + bI_i F_I(Y_i))`.
pub fn ark_step<P: ImexProblem>(
    problem: &P,
    y: &P::State,
    dt: f64,
    tab: &IMEXTableau,
) -> Result<(P::State, StepReport), TimeIntError> {
    let s = tab.stages();
    let mut fe: Vec<Option<P::State>> = Vec::with_capacity(s);
    let mut fi: Vec<Option<P::State>> = Vec::with_capacity(s);
    let mut report = StepReport::default();
    for i in 0..s {
        let mut rhs = y.clone();
        for j in 0..i {
            if tab.a_exp[i][j] != 0.0 {
                problem.axpy(&mut rhs, dt * tab.a_exp[i][j], fe[j].as_ref().expect("explicit stage"));
            }
            if tab.a_imp[i][j] != 0.0 {
                problem.axpy(&mut rhs, dt * tab.a_imp[i][j], fi[j].as_ref().expect("implicit stage"));
            }
        }
        let gamma = dt * tab.a_imp[i][i];
        let stage = if gamma != 0.0 {
            let (st, rep) = problem.solve_implicit(&rhs, gamma)?;
            report.absorb(&rep);
            st
        } else {
            rhs
        };
        let needs_e = tab.b_exp[i] != 0.0 || (i + 1..s).any(|k| tab.a_exp[k][i] != 0.0);
        let needs_i = tab.b_imp[i] != 0.0 || (i + 1..s).any(|k| tab.a_imp[k][i] != 0.0);
        fe.push(if needs_e { Some(problem.explicit_rhs(&stage)?) } else { None });
        fi.push(if needs_i { Some(problem.implicit_rhs(&stage)?) } else { None });
    }
    let mut out = y.clone();
    for i in 0..s {
        if let Some(f) = &fe[i] {
            problem.axpy(&mut out, dt * tab.b_exp[i], f);
        }
        if let Some(f) = &fi[i] {
            problem.axpy(&mut out, dt * tab.b_imp[i], f);
        }
    }
    Ok((out, report))
}

/// The model's HEVI split as an [`ImexProblem`]. With `implicit = false`
/// the whole tendency is treated explicitly.
pub struct HeviProblem<'a> {
    pub model: &'a Model,
    pub implicit: bool,
    pub newton: NewtonOptions,
}

impl<'a> HeviProblem<'a> {
    pub fn new(model: &'a Model) -> Self {
        Self {
            model,
            implicit: true,
            newton: NewtonOptions::default(),
        }
    }

    pub fn all_explicit(model: &'a Model) -> Self {
        Self {
            implicit: false,
            ..Self::new(model)
        }
    }
}

impl ImexProblem for HeviProblem<'_> {
    type State = PrognosticState;

    fn explicit_rhs(&self, y: &PrognosticState) -> Result<PrognosticState, TimeIntError> {
        let diag = self.model.diagnose(y)?;
        let parts = self.model.tendency_parts(y, &diag)?;
        Ok(if self.implicit { parts.explicit() } else { parts.total() })
    }

    fn implicit_rhs(&self, y: &PrognosticState) -> Result<PrognosticState, TimeIntError> {
        if self.implicit {
            Ok(self.model.implicit_tendency(y)?)
        } else {
            Ok(y.zeros_like())
        }
    }

    fn solve_implicit(
        &self,
        rhs: &PrognosticState,
        gamma: f64,
    ) -> Result<(PrognosticState, StepReport), TimeIntError> {
        if !self.implicit {
            return Ok((rhs.clone(), StepReport::default()));
        }
        newton_solve_all(self.model, rhs, gamma, &self.newton)
    }

    fn axpy(&self, y: &mut PrognosticState, a: f64, x: &PrognosticState) {
        y.axpy(a, x);
    }
}

/// Solves the implicit stage equations column by column (in parallel,
/// gathered in column order).
pub fn newton_solve_all(
    model: &Model,
    rhs: &PrognosticState,
    gamma: f64,
    opts: &NewtonOptions,
) -> Result<(PrognosticState, StepReport), TimeIntError> {
    model.check_shape(rhs)?;
    let results: Vec<_> = (0..model.ncol())
        .into_par_iter()
        .map(|c| newton_column_solve(model, rhs, c, gamma, opts))
        .collect();
    let mut out = rhs.clone();
    let mut report = StepReport::default();
    for (c, res) in results.into_iter().enumerate() {
        let (w, phi, rep) = res.map_err(|e| match e {
            ModelError::NonPhysical { level, what, .. } => {
                TimeIntError::Model(ModelError::NonPhysical { column: c, level, what })
            }
            other => TimeIntError::Model(other),
        })?;
        if !rep.converged {
            return Err(TimeIntError::NewtonFailed {
                column: c,
                iterations: rep.iterations,
                residual: rep.residual,
            });
        }
        out.w.col_mut(c).copy_from_slice(&w);
        out.phi.col_mut(c).copy_from_slice(&phi);
        report.absorb(&StepReport {
            solves: 1,
            max_iterations: rep.iterations,
            max_residual: rep.residual,
            worst_column: c,
        });
    }
    Ok((out, report))
}

/// Newton solve of `w = w* + gamma g (mu(phi) - 1)`, `phi = phi* + gamma g w`
/// for column `c` of the stage state `rhs`.
pub fn newton_column_solve(
    model: &Model,
    rhs: &PrognosticState,
    c: usize,
    gamma: f64,
    opts: &NewtonOptions,
) -> Result<(Vec<f64>, Vec<f64>, ColumnSolveReport), ModelError> {
    ColumnProblem {
        grid: &model.vgrid,
        constants: model.constants(),
        p_top: model.p_top(),
        theta: rhs.theta.col(c),
        dpids: rhs.dpids.col(c),
        w_star: rhs.w.col(c),
        phi_star: rhs.phi.col(c),
        gamma,
    }
    .solve(opts)
}

/// Classical three-stage strong-stability-preserving RK on the full tendency.
pub fn explicit_rk_step(
    model: &Model,
    y: &PrognosticState,
    dt: f64,
) -> Result<PrognosticState, TimeIntError> {
    let k1 = model.tendency(y)?;
    let mut y1 = y.clone();
    y1.axpy(dt, &k1);
    let k2 = model.tendency(&y1)?;
    let mut y2 = y.clone();
    y2.axpy(0.25 * dt, &k1);
    y2.axpy(0.25 * dt, &k2);
    let k3 = model.tendency(&y2)?;
    let mut out = y.clone();
    out.axpy(dt / 6.0, &k1);
    out.axpy(dt / 6.0, &k2);
    out.axpy(2.0 * dt / 3.0, &k3);
    Ok(out)
}
