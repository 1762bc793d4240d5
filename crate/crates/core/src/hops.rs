//! Periodic 1D collocated spectral elements (cubic, Gauss-Lobatto nodes).
//!
//! Element derivatives are assembled with the diagonal mass matrix
//! (direct stiffness summation), which gives the discrete
//! integration-by-parts identity `hint(p grad_x(u)) + hint(u grad_x(p)) = 0`
//! on the periodic domain.
//!
//! Fields are stored per unique column; multi-level fields are
//! column-major with `nlev` contiguous values per column.

/// Polynomial degree of the element basis.
pub const DEGREE: usize = 3;
const NP: usize = DEGREE + 1;

/// Reference Gauss-Lobatto nodes and weights on `[-1, 1]`.
pub fn gll_reference() -> ([f64; NP], [f64; NP]) {
    let a = 1.0 / 5.0_f64.sqrt();
    (
        [-1.0, -a, a, 1.0],
        [1.0 / 6.0, 5.0 / 6.0, 5.0 / 6.0, 1.0 / 6.0],
    )
}

/// Nodal differentiation matrix on the reference element, `d[i][j] = l_j'(x_i)`.
pub fn reference_derivative(nodes: &[f64; NP]) -> [[f64; NP]; NP] {
    let mut bary = [1.0; NP];
    for j in 0..NP {
        for k in 0..NP {
            if k != j {
                bary[j] /= nodes[j] - nodes[k];
            }
        }
    }
    let mut d = [[0.0; NP]; NP];
    for i in 0..NP {
        let mut diag = 0.0;
        for j in 0..NP {
            if i != j {
                d[i][j] = bary[j] / bary[i] / (nodes[i] - nodes[j]);
                diag -= d[i][j];
            }
        }
        d[i][i] = diag;
    }
    d
}

#[derive(Debug, Clone)]
pub struct SeGrid1D {
    ne: usize,
    length: f64,
    /// physical node positions per element
    nodes: Vec<[f64; NP]>,
    /// physical quadrature weights per element node
    weights: [f64; NP],
    /// physical differentiation matrix (uniform elements)
    deriv: [[f64; NP]; NP],
    /// assembled (diagonal) mass per unique column
    mass: Vec<f64>,
}

impl SeGrid1D {
    /// `ne` equal elements on the periodic interval `[0, length)`.
    pub fn new(ne: usize, length: f64) -> Self {
        assert!(ne >= 1 && length > 0.0);
        let h = length / ne as f64;
        let (xi, w) = gll_reference();
        let dref = reference_derivative(&xi);
        let mut weights = [0.0; NP];
        let mut deriv = [[0.0; NP]; NP];
        for i in 0..NP {
            weights[i] = 0.5 * h * w[i];
            for j in 0..NP {
                deriv[i][j] = dref[i][j] * 2.0 / h;
            }
        }
        let nodes = (0..ne)
            .map(|e| {
                let x0 = h * e as f64;
                let mut x = [0.0; NP];
                for (l, xl) in x.iter_mut().enumerate() {
                    *xl = x0 + 0.5 * h * (xi[l] + 1.0);
                }
                x
            })
            .collect();
        let ncol = DEGREE * ne;
        let mut mass = vec![0.0; ncol];
        for e in 0..ne {
            for l in 0..NP {
                mass[(DEGREE * e + l) % ncol] += weights[l];
            }
        }
        Self {
            ne,
            length,
            nodes,
            weights,
            deriv,
            mass,
        }
    }

    pub fn ne(&self) -> usize {
        self.ne
    }
    pub fn ncol(&self) -> usize {
        DEGREE * self.ne
    }
    pub fn length(&self) -> f64 {
        self.length
    }
    /// Assembled quadrature weight of each unique column.
    pub fn mass(&self) -> &[f64] {
        &self.mass
    }
    pub fn element_weights(&self) -> &[f64; NP] {
        &self.weights
    }
    pub fn derivative_matrix(&self) -> &[[f64; NP]; NP] {
        &self.deriv
    }
    /// Physical position of local node `l` in element `e`.
    pub fn node(&self, e: usize, l: usize) -> f64 {
        self.nodes[e][l]
    }
    #[inline]
    pub fn global(&self, e: usize, l: usize) -> usize {
        (DEGREE * e + l) % self.ncol()
    }
    /// Coordinates of the unique columns.
    pub fn columns_x(&self) -> Vec<f64> {
        (0..self.ncol())
            .map(|j| self.node(j / DEGREE, j % DEGREE))
            .collect()
    }

    /// Assembled derivative of an `ncol x nlev` field.
    pub fn grad_levels(&self, f: &[f64], nlev: usize) -> Vec<f64> {
        let ncol = self.ncol();
        assert_eq!(f.len(), ncol * nlev);
        let mut out = vec![0.0; ncol * nlev];
        let mut local = vec![0.0; nlev];
        for e in 0..self.ne {
            let gl: [usize; NP] = std::array::from_fn(|l| self.global(e, l));
            for i in 0..NP {
                local.iter_mut().for_each(|v| *v = 0.0);
                for j in 0..NP {
                    let d = self.deriv[i][j];
                    let src = &f[gl[j] * nlev..(gl[j] + 1) * nlev];
                    for (v, s) in local.iter_mut().zip(src) {
                        *v += d * s;
                    }
                }
                let wi = self.weights[i];
                let dst = &mut out[gl[i] * nlev..(gl[i] + 1) * nlev];
                for (o, v) in dst.iter_mut().zip(&local) {
                    *o += wi * v;
                }
            }
        }
        self.unweight(&mut out, nlev);
        out
    }

    fn unweight(&self, out: &mut [f64], nlev: usize) {
        for (j, m) in self.mass.iter().enumerate() {
            for v in &mut out[j * nlev..(j + 1) * nlev] {
                *v /= m;
            }
        }
    }

    /// `d/dx` of a single-level field.
    pub fn grad_x(&self, f: &[f64]) -> Vec<f64> {
        self.grad_levels(f, 1)
    }

    /// Divergence; the same assembled operator as [`Self::grad_x`] in 1D.
    pub fn div_x(&self, flux: &[f64]) -> Vec<f64> {
        self.grad_levels(flux, 1)
    }

    pub fn div_levels(&self, flux: &[f64], nlev: usize) -> Vec<f64> {
        self.grad_levels(flux, nlev)
    }

    /// Global quadrature `sum_j W_j f_j`, summed in column order.
    pub fn hint(&self, f: &[f64]) -> f64 {
        assert_eq!(f.len(), self.ncol());
        let mut acc = 0.0;
        for (m, v) in self.mass.iter().zip(f) {
            acc += m * v;
        }
        acc
    }

    /// Weak Laplacian, `-(D^T W D f)` assembled and divided by the mass.
    pub fn laplacian_levels(&self, f: &[f64], nlev: usize) -> Vec<f64> {
        let ncol = self.ncol();
        assert_eq!(f.len(), ncol * nlev);
        let mut out = vec![0.0; ncol * nlev];
        let mut grad = vec![vec![0.0; nlev]; NP];
        for e in 0..self.ne {
            let gl: [usize; NP] = std::array::from_fn(|l| self.global(e, l));
            for (i, gi) in grad.iter_mut().enumerate() {
                gi.iter_mut().for_each(|v| *v = 0.0);
                for j in 0..NP {
                    let d = self.deriv[i][j];
                    let src = &f[gl[j] * nlev..(gl[j] + 1) * nlev];
                    for (v, s) in gi.iter_mut().zip(src) {
                        *v += d * s;
                    }
                }
            }
            for j in 0..NP {
                let dst = &mut out[gl[j] * nlev..(gl[j] + 1) * nlev];
                for (i, gi) in grad.iter().enumerate() {
                    let c = self.deriv[i][j] * self.weights[i];
                    for (o, v) in dst.iter_mut().zip(gi) {
                        *o -= c * v;
                    }
                }
            }
        }
        self.unweight(&mut out, nlev);
        out
    }

    /// Hyperviscous tendency `-nu del^4 f`.
    pub fn hyperviscosity_levels(&self, f: &[f64], nlev: usize, nu: f64) -> Vec<f64> {
        if nu == 0.0 {
            return vec![0.0; f.len()];
        }
        let lap = self.laplacian_levels(f, nlev);
        let mut out = self.laplacian_levels(&lap, nlev);
        for v in &mut out {
            *v *= -nu;
        }
        out
    }

    pub fn hyperviscosity(&self, f: &[f64], nu: f64) -> Vec<f64> {
        self.hyperviscosity_levels(f, 1, nu)
    }
}
