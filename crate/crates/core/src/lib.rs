//! Classically-corresponding wave packets for pairs of identical symmetric
//! oscillators.
//!
//! Two copies of a 1D oscillator in `u` and `v` with equal energy lead to the
//! hyperbolic equation `(−∂²_u + ∂²_v + V(u) − V(v)) Ψ = 0`. Its separable
//! solutions are products `ψ_n(u) ψ_n(v)` of eigenstates, and a single choice
//! of coefficients `C(n)` fixes both the initial value and the initial slope
//! of `Ψ` on the `u` axis. The crate builds those packets, integrates the
//! matching classical and Bohmian trajectories, and measures how well they
//! agree.

pub mod analysis;
pub mod bohmian;
pub mod classical;
pub mod config;
pub mod eigensolve;
pub mod error;
pub mod field;
pub mod ode;
pub mod packet;
pub mod pipeline;
pub mod potentials;
pub mod quadrature;
pub mod trajectory;

pub use error::{Error, Result};
