use std::fmt::Write as _;

use super::ModelError;

/// Per-column vertical profiles, stored column-major (`len` contiguous
/// values for each of `ncol` columns).
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnField {
    ncol: usize,
    len: usize,
    data: Vec<f64>,
}

impl ColumnField {
    pub fn zeros(ncol: usize, len: usize) -> Self {
        Self::filled(ncol, len, 0.0)
    }

    pub fn filled(ncol: usize, len: usize, value: f64) -> Self {
        Self {
            ncol,
            len,
            data: vec![value; ncol * len],
        }
    }

    pub fn from_vec(ncol: usize, len: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), ncol * len);
        Self { ncol, len, data }
    }

    pub fn from_fn(ncol: usize, len: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(ncol * len);
        for c in 0..ncol {
            for k in 0..len {
                data.push(f(c, k));
            }
        }
        Self { ncol, len, data }
    }

    pub fn ncol(&self) -> usize {
        self.ncol
    }
    /// Values per column.
    pub fn len(&self) -> usize {
        self.len
    }
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
    pub fn data(&self) -> &[f64] {
        &self.data
    }
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
    pub fn col(&self, c: usize) -> &[f64] {
        &self.data[c * self.len..(c + 1) * self.len]
    }
    pub fn col_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.data[c * self.len..(c + 1) * self.len]
    }
    #[inline]
    pub fn get(&self, c: usize, k: usize) -> f64 {
        self.data[c * self.len + k]
    }
    #[inline]
    pub fn set(&mut self, c: usize, k: usize, v: f64) {
        self.data[c * self.len + k] = v;
    }
    /// Values of level `k` across all columns.
    pub fn level(&self, k: usize) -> Vec<f64> {
        (0..self.ncol).map(|c| self.get(c, k)).collect()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            ncol: self.ncol,
            len: self.len,
            data: self.data.iter().map(|v| f(*v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!((self.ncol, self.len), (other.ncol, other.len));
        Self {
            ncol: self.ncol,
            len: self.len,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(*a, *b)).collect(),
        }
    }

    /// `self += a * x`
    pub fn axpy(&mut self, a: f64, x: &Self) {
        assert_eq!(self.data.len(), x.data.len());
        for (s, v) in self.data.iter_mut().zip(&x.data) {
            *s += a * v;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Prognostic variables: `u, v, Theta, dpi/ds` at midpoints and `w, phi`
/// at interfaces.
#[derive(Debug, Clone, PartialEq)]
pub struct PrognosticState {
    pub u: ColumnField,
    pub v: ColumnField,
    pub w: ColumnField,
    pub phi: ColumnField,
    pub theta: ColumnField,
    pub dpids: ColumnField,
}

/// Field names in snapshot order.
pub const FIELD_NAMES: [&str; 6] = ["u", "v", "w", "phi", "Theta", "dpids"];

impl PrognosticState {
    pub fn zeros(ncol: usize, n: usize) -> Self {
        Self {
            u: ColumnField::zeros(ncol, n),
            v: ColumnField::zeros(ncol, n),
            w: ColumnField::zeros(ncol, n + 1),
            phi: ColumnField::zeros(ncol, n + 1),
            theta: ColumnField::zeros(ncol, n),
            dpids: ColumnField::zeros(ncol, n),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.ncol(), self.nlev())
    }

    pub fn ncol(&self) -> usize {
        self.u.ncol()
    }
    /// Number of midpoint levels.
    pub fn nlev(&self) -> usize {
        self.u.len()
    }

    pub fn fields(&self) -> [&ColumnField; 6] {
        [&self.u, &self.v, &self.w, &self.phi, &self.theta, &self.dpids]
    }

    pub fn fields_mut(&mut self) -> [&mut ColumnField; 6] {
        [
            &mut self.u,
            &mut self.v,
            &mut self.w,
            &mut self.phi,
            &mut self.theta,
            &mut self.dpids,
        ]
    }

    /// `self += a * x`
    pub fn axpy(&mut self, a: f64, x: &Self) {
        for (s, v) in self.fields_mut().into_iter().zip(x.fields()) {
            s.axpy(a, v);
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.zeros_like();
        out.axpy(a, self);
        out
    }

    pub fn is_finite(&self) -> bool {
        self.fields().iter().all(|f| f.data().iter().all(|v| v.is_finite()))
    }

    /// Checks positivity of mass and Theta and monotone geopotential.
    pub fn validate(&self) -> Result<(), ModelError> {
        let n = self.nlev();
        for c in 0..self.ncol() {
            for k in 0..n {
                if !(self.dpids.get(c, k) > 0.0) {
                    return Err(ModelError::NonPhysical {
                        column: c,
                        level: k,
                        what: "pseudo-density must be positive",
                    });
                }
                if !(self.theta.get(c, k) > 0.0) {
                    return Err(ModelError::NonPhysical {
                        column: c,
                        level: k,
                        what: "Theta must be positive",
                    });
                }
                if !(self.phi.get(c, k) > self.phi.get(c, k + 1)) {
                    return Err(ModelError::NonPhysical {
                        column: c,
                        level: k,
                        what: "geopotential must decrease downward",
                    });
                }
            }
        }
        if !self.is_finite() {
            return Err(ModelError::NonFinite);
        }
        Ok(())
    }
}

/// Text snapshot of a prognostic state.
///
/// ```text
/// # nhslice snapshot v1
/// n <levels> ncol <columns> grid <sha256 of level table> time <seconds>
/// <field> <column> v0 v1 ...     (one row per field and column)
/// ```
///
/// Fields appear in the order `u v w phi Theta dpids`; numbers use
/// Rust's shortest round-trip formatting so the dump is lossless.
pub fn write_snapshot(state: &PrognosticState, grid_hash: &str, time: f64) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# nhslice snapshot v1");
    let _ = writeln!(
        out,
        "n {} ncol {} grid {} time {:?}",
        state.nlev(),
        state.ncol(),
        grid_hash,
        time
    );
    for (name, field) in FIELD_NAMES.iter().zip(state.fields()) {
        for c in 0..field.ncol() {
            let _ = write!(out, "{name} {c}");
            for v in field.col(c) {
                let _ = write!(out, " {v:?}");
            }
            out.push('\n');
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub state: PrognosticState,
    pub grid_hash: String,
    pub time: f64,
}

pub fn read_snapshot(text: &str) -> Result<Snapshot, ModelError> {
    let bad = |msg: &str| ModelError::Snapshot(msg.to_string());
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("# nhslice snapshot v1") {
        return Err(bad("missing header"));
    }
    let head: Vec<&str> = lines
        .next()
        .ok_or_else(|| bad("missing dimensions"))?
        .split_whitespace()
        .collect();
    if head.len() != 8 || head[0] != "n" || head[2] != "ncol" || head[4] != "grid" || head[6] != "time" {
        return Err(bad("malformed dimension line"));
    }
    let n: usize = head[1].parse().map_err(|_| bad("bad n"))?;
    let ncol: usize = head[3].parse().map_err(|_| bad("bad ncol"))?;
    let time: f64 = head[7].parse().map_err(|_| bad("bad time"))?;
    let mut state = PrognosticState::zeros(ncol, n);
    let mut seen = 0usize;
    for line in lines.filter(|l| !l.trim().is_empty()) {
        let mut it = line.split_whitespace();
        let name = it.next().ok_or_else(|| bad("empty row"))?;
        let fi = FIELD_NAMES
            .iter()
            .position(|f| *f == name)
            .ok_or_else(|| bad("unknown field"))?;
        let c: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| bad("bad column index"))?;
        let field = &mut state.fields_mut()[fi];
        if c >= ncol {
            return Err(bad("column index out of range"));
        }
        let values: Result<Vec<f64>, _> = it.map(str::parse::<f64>).collect();
        let values = values.map_err(|_| bad("bad value"))?;
        if values.len() != field.len() {
            return Err(bad("wrong number of values"));
        }
        field.col_mut(c).copy_from_slice(&values);
        seen += 1;
    }
    if seen != 6 * ncol {
        return Err(bad("incomplete snapshot"));
    }
    Ok(Snapshot {
        state,
        grid_hash: head[5].to_string(),
        time,
    })
}
