//! Staggered vertical grid, hybrid mass-coordinate coefficients and
//! physical constants.
//!
//! Interfaces are indexed `0..=n` (top to surface) and midpoints `0..n`;
//! midpoint `m` sits between interfaces `m` and `m + 1`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("level grid needs at least 2 levels, got {0}")]
    TooFewLevels(usize),
    #[error("interface coordinates must be strictly increasing (interface {index})")]
    NonMonotone { index: usize },
    #[error("non-finite interface coordinate at {0}")]
    NonFinite(usize),
    #[error("model top pressure {p_top} Pa must lie in (0, {p0_ref}) Pa")]
    BadTopPressure { p_top: f64, p0_ref: f64 },
    #[error("hybrid pressure not increasing at interface {level} for surface pressure {ps} Pa")]
    HybridNotMonotone { level: usize, ps: f64 },
    #[error("interface pressure not increasing at interface {level} in column {column}")]
    PressureNotIncreasing { column: usize, level: usize },
    #[error("surface pressure {ps} Pa is not admissible (must exceed {min} Pa)")]
    SurfacePressure { ps: f64, min: f64 },
    #[error("malformed level table: {0}")]
    Table(String),
}

/// Lorenz-staggered levels in a terrain-following coordinate `s`
/// (increasing downward).
#[derive(Debug, Clone, PartialEq)]
pub struct LevelGrid {
    n: usize,
    s_int: Vec<f64>,
    s_mid: Vec<f64>,
    ds_mid: Vec<f64>,
    ds_int: Vec<f64>,
}

impl LevelGrid {
    /// Builds a grid from interface coordinates `s_{1/2} .. s_{n+1/2}`.
    pub fn from_interfaces(s_int: Vec<f64>) -> Result<Self, GridError> {
        if s_int.len() < 3 {
            return Err(GridError::TooFewLevels(s_int.len().saturating_sub(1)));
        }
        if let Some(i) = s_int.iter().position(|s| !s.is_finite()) {
            return Err(GridError::NonFinite(i));
        }
        if let Some(i) = s_int.windows(2).position(|w| w[1] <= w[0]) {
            return Err(GridError::NonMonotone { index: i + 1 });
        }
        let n = s_int.len() - 1;
        let s_mid: Vec<f64> = s_int.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let ds_mid: Vec<f64> = s_int.windows(2).map(|w| w[1] - w[0]).collect();
        let mut ds_int = Vec::with_capacity(n + 1);
        ds_int.push(ds_mid[0]);
        ds_int.extend(s_mid.windows(2).map(|w| w[1] - w[0]));
        ds_int.push(ds_mid[n - 1]);
        Ok(Self {
            n,
            s_int,
            s_mid,
            ds_mid,
            ds_int,
        })
    }

    /// Number of midpoint levels.
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn s_int(&self) -> &[f64] {
        &self.s_int
    }
    pub fn s_mid(&self) -> &[f64] {
        &self.s_mid
    }
    pub fn ds_mid(&self) -> &[f64] {
        &self.ds_mid
    }
    pub fn ds_int(&self) -> &[f64] {
        &self.ds_int
    }

    /// Total coordinate thickness `s_{n+1/2} - s_{1/2}`.
    pub fn thickness(&self) -> f64 {
        self.s_int[self.n] - self.s_int[0]
    }

    /// Interface coordinates normalised to `[0, 1]`.
    pub fn eta_int(&self) -> Vec<f64> {
        let (top, len) = (self.s_int[0], self.thickness());
        let mut eta: Vec<f64> = self.s_int.iter().map(|s| (s - top) / len).collect();
        eta[0] = 0.0;
        eta[self.n] = 1.0;
        eta
    }
}

/// Evenly spaced interfaces on `[s_top, s_bot]`.
pub fn build_uniform_grid(n: usize, s_top: f64, s_bot: f64) -> Result<LevelGrid, GridError> {
    if n < 2 {
        return Err(GridError::TooFewLevels(n));
    }
    if !(s_top < s_bot) {
        return Err(GridError::NonMonotone { index: 1 });
    }
    let h = (s_bot - s_top) / n as f64;
    let mut s: Vec<f64> = (0..=n).map(|i| s_top + h * i as f64).collect();
    s[n] = s_bot;
    LevelGrid::from_interfaces(s)
}

/// Hybrid coefficients so that `pi = A p0 + B ps` at each interface.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridCoefficients {
    pub a_int: Vec<f64>,
    pub b_int: Vec<f64>,
    pub p0_ref: f64,
}

/// Admissible surface pressure range, as a fraction of `p0_ref`.
pub const ADMISSIBLE_PS: (f64, f64) = (0.5, 1.5);

/// Smooth hybrid coefficients: the reference pressure (`ps = p0_ref`) is
/// linear in the normalised coordinate and `B = eta^exponent`.
/// `exponent = 1` is the sigma coordinate with a constant-pressure top.
pub fn build_hybrid(
    grid: &LevelGrid,
    p_top: f64,
    p0_ref: f64,
    exponent: f64,
) -> Result<HybridCoefficients, GridError> {
    if !(p_top > 0.0 && p_top < p0_ref) {
        return Err(GridError::BadTopPressure { p_top, p0_ref });
    }
    let eta = grid.eta_int();
    let b_int: Vec<f64> = eta.iter().map(|e| e.powf(exponent)).collect();
    let a_int: Vec<f64> = eta
        .iter()
        .zip(&b_int)
        .map(|(e, b)| (p_top + (p0_ref - p_top) * e) / p0_ref - b)
        .collect();
    let mut hybrid = HybridCoefficients {
        a_int,
        b_int,
        p0_ref,
    };
    let n = grid.n();
    hybrid.a_int[0] = p_top / p0_ref;
    hybrid.b_int[0] = 0.0;
    hybrid.a_int[n] = 0.0;
    hybrid.b_int[n] = 1.0;
    hybrid.check_monotone()?;
    Ok(hybrid)
}

impl HybridCoefficients {
    pub fn n(&self) -> usize {
        self.a_int.len() - 1
    }

    /// Constant model-top pressure `A_top p0`.
    pub fn p_top(&self) -> f64 {
        self.a_int[0] * self.p0_ref
    }

    /// Scans the admissible surface-pressure range and reports the first
    /// interface where `pi` fails to increase.
    pub fn check_monotone(&self) -> Result<(), GridError> {
        const SCAN: usize = 21;
        for j in 0..SCAN {
            let frac = ADMISSIBLE_PS.0 + (ADMISSIBLE_PS.1 - ADMISSIBLE_PS.0) * j as f64 / (SCAN - 1) as f64;
            let ps = frac * self.p0_ref;
            let pi = self.pi_column(ps);
            if let Some(k) = pi.windows(2).position(|w| w[1] <= w[0]) {
                return Err(GridError::HybridNotMonotone { level: k + 1, ps });
            }
        }
        Ok(())
    }

    /// `pi` at the interfaces of one column.
    pub fn pi_column(&self, ps: f64) -> Vec<f64> {
        self.a_int
            .iter()
            .zip(&self.b_int)
            .map(|(a, b)| a * self.p0_ref + b * ps)
            .collect()
    }

    /// Interface `pi` for every column, `ncol x (n+1)` column-major.
    pub fn pi_interfaces(&self, ps: &[f64]) -> Result<Vec<Vec<f64>>, GridError> {
        let min = self.p_top();
        ps.iter()
            .enumerate()
            .map(|(column, &p)| {
                if !(p > min) || !p.is_finite() {
                    return Err(GridError::SurfacePressure { ps: p, min });
                }
                let pi = self.pi_column(p);
                match pi.windows(2).position(|w| w[1] <= w[0]) {
                    Some(k) => Err(GridError::PressureNotIncreasing { column, level: k + 1 }),
                    None => Ok(pi),
                }
            })
            .collect()
    }
}

/// Dry-air constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub g: f64,
    pub r_dry: f64,
    pub cp: f64,
    pub p0: f64,
    /// Coriolis parameter (f-plane).
    pub f: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            g: 9.80616,
            r_dry: 287.04,
            cp: 1004.64,
            p0: 1.0e5,
            f: 0.0,
        }
    }
}

impl PhysicalConstants {
    pub fn cv(&self) -> f64 {
        self.cp - self.r_dry
    }
    pub fn kappa(&self) -> f64 {
        self.r_dry / self.cp
    }
    pub fn is_valid(&self) -> bool {
        let k = self.kappa();
        self.cv() > 0.0 && k > 0.0 && k < 1.0 && self.g > 0.0 && self.p0 > 0.0
    }
}

/// Plain-text level table: a header line followed by one row per
/// interface, `i s A B`, whitespace separated.
pub fn write_level_table(grid: &LevelGrid, hybrid: &HybridCoefficients) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# i s A B  (p0_ref = {:e})", hybrid.p0_ref);
    for i in 0..=grid.n() {
        let _ = writeln!(
            out,
            "{} {:e} {:e} {:e}",
            i,
            grid.s_int()[i],
            hybrid.a_int[i],
            hybrid.b_int[i]
        );
    }
    out
}

pub fn read_level_table(text: &str) -> Result<(LevelGrid, HybridCoefficients), GridError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| GridError::Table("empty".into()))?;
    let p0_ref = header
        .split("p0_ref =")
        .nth(1)
        .and_then(|r| r.trim().trim_end_matches(')').trim().parse::<f64>().ok())
        .ok_or_else(|| GridError::Table("missing p0_ref in header".into()))?;
    let (mut s, mut a, mut b) = (Vec::new(), Vec::new(), Vec::new());
    for (row, line) in lines.enumerate() {
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 4 {
            return Err(GridError::Table(format!("row {row}: expected 4 columns")));
        }
        let idx: usize = cols[0]
            .parse()
            .map_err(|_| GridError::Table(format!("row {row}: bad index")))?;
        if idx != row {
            return Err(GridError::Table(format!("row {row}: index {idx} out of order")));
        }
        let parse = |t: &str| {
            t.parse::<f64>()
                .map_err(|_| GridError::Table(format!("row {row}: bad number {t}")))
        };
        s.push(parse(cols[1])?);
        a.push(parse(cols[2])?);
        b.push(parse(cols[3])?);
    }
    let grid = LevelGrid::from_interfaces(s)?;
    let hybrid = HybridCoefficients {
        a_int: a,
        b_int: b,
        p0_ref,
    };
    hybrid.check_monotone()?;
    Ok((grid, hybrid))
}
