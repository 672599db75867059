//! Weighted logarithmic potentials, weighted polynomial approximation and the
//! Taylor sections of `(1+z)^{-n}`.

pub mod polycore;
pub mod measures;
pub mod equilibrium;
pub mod approx;
pub mod lemniscate;
pub mod hull2;
