//! Prognostic state, diagnostics and the discrete right-hand sides.
//!
//! Column fields are stored column-major; interface fields carry `n + 1`
//! values per column (index 0 is the model top, `n` the surface).

mod diagnostics;
mod state;
mod tendency;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hops::SeGrid1D;
use crate::vcoord::{HybridCoefficients, LevelGrid, PhysicalConstants};

pub use diagnostics::{
    column_mu, diagnose_eos_column, exner, pressure_from_eos, Diagnostics, EosFields,
};
pub use state::{read_snapshot, write_snapshot, ColumnField, PrognosticState, Snapshot, FIELD_NAMES};
pub use tendency::TendencyParts;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("nonphysical state at column {column}, level {level}: {what}")]
    NonPhysical {
        column: usize,
        level: usize,
        what: &'static str,
    },
    #[error("non-finite value in state")]
    NonFinite,
    #[error("dPi/ds vanishes at column {column}, interface {level}")]
    DegenerateStratification { column: usize, level: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("state shape {got:?} does not match model {expected:?}")]
    Shape {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("snapshot: {0}")]
    Snapshot(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum VerticalMode {
    #[default]
    Eulerian,
    Lagrangian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub vertical_mode: VerticalMode,
    /// Hyperviscosity coefficient (m^4/s), applied explicitly.
    pub nu: f64,
    /// Steps between vertical remaps (Lagrangian mode).
    pub remap_interval: usize,
    pub constants: PhysicalConstants,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            vertical_mode: VerticalMode::Eulerian,
            nu: 0.0,
            remap_interval: 3,
            constants: PhysicalConstants::default(),
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !self.constants.is_valid() {
            return Err(ModelError::Unsupported("invalid physical constants".into()));
        }
        if self.vertical_mode == VerticalMode::Lagrangian && self.remap_interval == 0 {
            return Err(ModelError::Unsupported(
                "remap_interval must be at least 1 in Lagrangian mode".into(),
            ));
        }
        if !(self.nu >= 0.0) {
            return Err(ModelError::Unsupported("negative hyperviscosity".into()));
        }
        Ok(())
    }
}

/// Grids plus configuration; everything needed to evaluate tendencies.
#[derive(Debug, Clone)]
pub struct Model {
    pub vgrid: LevelGrid,
    pub hybrid: HybridCoefficients,
    pub hgrid: SeGrid1D,
    pub config: ModelConfig,
}

impl Model {
    pub fn new(
        vgrid: LevelGrid,
        hybrid: HybridCoefficients,
        hgrid: SeGrid1D,
        config: ModelConfig,
    ) -> Result<Self, ModelError> {
        config.validate()?;
        if hybrid.n() != vgrid.n() {
            return Err(ModelError::Unsupported(format!(
                "hybrid table has {} levels, grid has {}",
                hybrid.n(),
                vgrid.n()
            )));
        }
        Ok(Self {
            vgrid,
            hybrid,
            hgrid,
            config,
        })
    }

    pub fn n(&self) -> usize {
        self.vgrid.n()
    }
    pub fn ncol(&self) -> usize {
        self.hgrid.ncol()
    }
    pub fn constants(&self) -> &PhysicalConstants {
        &self.config.constants
    }
    pub fn p_top(&self) -> f64 {
        self.hybrid.p_top()
    }

    pub fn check_shape(&self, state: &PrognosticState) -> Result<(), ModelError> {
        let got = (state.ncol(), state.nlev());
        let expected = (self.ncol(), self.n());
        if got != expected || state.w.len() != self.n() + 1 || state.phi.len() != self.n() + 1 {
            return Err(ModelError::Shape { expected, got });
        }
        Ok(())
    }

    /// Full tendency `explicit + implicit`, surface values of `w` and `phi` pinned.
    pub fn tendency(&self, state: &PrognosticState) -> Result<PrognosticState, ModelError> {
        let (mut ex, im) = self.hevi_split(state)?;
        ex.axpy(1.0, &im);
        Ok(ex)
    }

    /// `(explicit, implicit)` parts of the tendency.
    pub fn hevi_split(
        &self,
        state: &PrognosticState,
    ) -> Result<(PrognosticState, PrognosticState), ModelError> {
        let diag = self.diagnose(state)?;
        let parts = self.tendency_parts(state, &diag)?;
        Ok((parts.explicit(), parts.implicit()))
    }
}
