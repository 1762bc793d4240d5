//! Vertical acoustic modes of an isothermal column under the implicit
//! operator alone, against the continuous normal modes.

use nalgebra::DMatrix;
use nhslice::cases::{init_hydrostatic_rest, Background};
use nhslice::hops::SeGrid1D;
use nhslice::model::{Model, ModelConfig};
use nhslice::vcoord::{build_hybrid, build_uniform_grid};

const T0: f64 = 250.0;

fn column_model(n: usize) -> Model {
    let grid = build_uniform_grid(n, 0.0, 1.0).unwrap();
    let hybrid = build_hybrid(&grid, 1.0e4, 1.0e5, 1.0).unwrap();
    Model::new(grid, hybrid, SeGrid1D::new(1, 1.0e5), ModelConfig::default()).unwrap()
}

/// Roots of `tan(kD) = -2Hk`, one in each interval `((j - 1/2) pi, j pi)`.
fn mode_wavenumbers(depth: f64, h: f64, count: usize) -> Vec<f64> {
    let f = |x: f64| x.tan() + 2.0 * h / depth * x;
    (1..=count)
        .map(|j| {
            let pi = std::f64::consts::PI;
            let (mut lo, mut hi) = ((j as f64 - 0.5) * pi + 1e-12, j as f64 * pi);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if f(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi) / depth
        })
        .collect()
}

/// Central-difference Jacobian of the implicit `(w, phi)` tendency in
/// column 0 with respect to the free interface unknowns.
fn implicit_jacobian(model: &Model) -> DMatrix<f64> {
    let n = model.n();
    let base = init_hydrostatic_rest(model, Background::Isothermal { t0: T0 }, 1.0e5);
    let mut jac = DMatrix::zeros(2 * n, 2 * n);
    for j in 0..2 * n {
        let h = if j < n { 1e-3 } else { 1e-2 };
        let eval = |sign: f64| {
            let mut st = base.clone();
            if j < n {
                st.w.set(0, j, sign * h);
            } else {
                let v = st.phi.get(0, j - n) + sign * h;
                st.phi.set(0, j - n, v);
            }
            let t = model.implicit_tendency(&st).unwrap();
            let mut out = t.w.col(0)[..n].to_vec();
            out.extend_from_slice(&t.phi.col(0)[..n]);
            out
        };
        let (p, m) = (eval(1.0), eval(-1.0));
        for i in 0..2 * n {
            jac[(i, j)] = (p[i] - m[i]) / (2.0 * h);
        }
    }
    jac
}

#[test]
fn low_vertical_modes_match_isothermal_theory() {
    let model = column_model(120);
    let c = model.constants();
    let gamma = c.cp / c.cv();
    let h = c.r_dry * T0 / c.g;
    let sound = (gamma * c.r_dry * T0).sqrt();
    let rest = init_hydrostatic_rest(&model, Background::Isothermal { t0: T0 }, 1.0e5);
    let depth = rest.phi.get(0, 0) / c.g;

    let eig = implicit_jacobian(&model).complex_eigenvalues();
    let neutral = eig.iter().fold(0.0_f64, |m, z| m.max(z.re.abs() / z.im.abs().max(1e-3)));
    assert!(neutral < 1e-5, "implicit operator not neutral: {neutral:e}");
    let mut omega: Vec<f64> = eig.iter().filter(|z| z.im > 0.0).map(|z| z.im).collect();
    omega.sort_by(f64::total_cmp);

    for (j, k) in mode_wavenumbers(depth, h, 4).into_iter().enumerate() {
        let exact = sound * (k * k + 1.0 / (4.0 * h * h)).sqrt();
        let rel = (omega[j] - exact).abs() / exact;
        assert!(rel < 0.02, "mode {}: {} vs {} ({rel:e})", j + 1, omega[j], exact);
    }
}

#[test]
fn wavenumber_roots_satisfy_dispersion_relation() {
    let (d, h) = (1.7e4, 7300.0);
    for k in mode_wavenumbers(d, h, 6) {
        assert!(((k * d).tan() + 2.0 * h * k).abs() < 1e-6 * h * k);
    }
}
