use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cases::{hydrostatic_state, Background};
use crate::hops::SeGrid1D;
use crate::model::{Model, ModelConfig, PrognosticState, VerticalMode};
use crate::vcoord::{build_hybrid, LevelGrid};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Small model on a stretched vertical grid.
pub fn small_model(n: usize, ne: usize, mode: VerticalMode) -> Model {
    let s: Vec<f64> = (0..=n)
        .map(|i| {
            let t = i as f64 / n as f64;
            t + 0.15 * (std::f64::consts::PI * t).sin() * t
        })
        .collect();
    let grid = LevelGrid::from_interfaces(s).unwrap();
    let hybrid = build_hybrid(&grid, 5000.0, 1.0e5, 1.4).unwrap();
    let config = ModelConfig {
        vertical_mode: mode,
        ..ModelConfig::default()
    };
    Model::new(grid, hybrid, SeGrid1D::new(ne, 60_000.0), config).unwrap()
}

/// Random valid state: hydrostatic base with varying surface pressure,
/// then relative perturbations of every prognostic field.
pub fn random_state(model: &Model, rng: &mut impl Rng, amp: f64) -> PrognosticState {
    let ncol = model.ncol();
    let ps: Vec<f64> = (0..ncol).map(|_| 1.0e5 * (1.0 + 0.05 * rng.gen_range(-1.0..1.0))).collect();
    let mut st = PrognosticState::zeros(ncol, model.n());
    let bg = Background::default();
    for (c, p_s) in ps.iter().enumerate() {
        let col = hydrostatic_state(model, *p_s, 0.0, 0.0, |_, _, p| {
            crate::cases::background_theta(model, bg, p, *p_s)
        });
        st.theta.col_mut(c).copy_from_slice(col.theta.col(c));
        st.dpids.col_mut(c).copy_from_slice(col.dpids.col(c));
        st.phi.col_mut(c).copy_from_slice(col.phi.col(c));
    }
    let n = model.n();
    for c in 0..ncol {
        for k in 0..n {
            st.u.set(c, k, 20.0 * amp * rng.gen_range(-1.0..1.0));
            st.v.set(c, k, 10.0 * amp * rng.gen_range(-1.0..1.0));
            let t = st.theta.get(c, k);
            st.theta.set(c, k, t * (1.0 + 0.05 * amp * rng.gen_range(-1.0..1.0)));
            let d = st.dpids.get(c, k);
            st.dpids.set(c, k, d * (1.0 + 0.05 * amp * rng.gen_range(-1.0..1.0)));
        }
        for k in 0..n {
            st.w.set(c, k, 2.0 * amp * rng.gen_range(-1.0..1.0));
            if k > 0 {
                let gap = (st.phi.get(c, k - 1) - st.phi.get(c, k + 1)).min(1.0e9);
                let jitter = 0.1 * amp * gap * rng.gen_range(-1.0..1.0);
                let v = st.phi.get(c, k) + jitter;
                st.phi.set(c, k, v);
            }
        }
    }
    st
}
