//! Energy-consistent nonhydrostatic dynamical core on a periodic vertical slice.

pub mod cases;
pub mod driver;
pub mod energy;
pub mod hops;
pub mod identities;
pub mod model;
pub mod remap;
pub mod timeint;
pub mod vcoord;
pub mod vops;

#[cfg(test)]
mod test_support;
