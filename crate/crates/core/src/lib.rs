//! Wave-packet dynamics of a one-dimensional particle whose velocity is
//! locked to the `J_z` component of its spin while a transverse field makes
//! the spin precess.
//!
//! The Hamiltonian is `H = ω J_y + v p J_z` with `ħ = 1`.  Everything in the
//! model depends on the single dimensionless number `α = σω/v`, where `σ` is
//! the width of the initial Gaussian packet.
//!
//! The crate is generic over the floating point type through [`Real`]; the
//! aliases at the crate root fix it to `f64`, which is what the numerical
//! tolerances in the test-suite assume.

pub mod asymptotics;
pub mod density;
pub mod error;
pub mod export;
mod linalg;
pub mod lattice;
pub mod model;
pub mod moments;
pub mod observables;
pub mod propagator;
pub mod quadrature;
mod scalar;
pub mod specfun;
pub mod validation;

pub use error::{Error, Result};
pub use num_complex::Complex;
pub use scalar::Real;

pub type Complex64 = Complex<f64>;
pub type Params = model::PhysicalParams<f64>;
pub type Spin = model::SpinState<f64>;
pub type Mixing = model::MixingAngle<f64>;
pub type Unitary = propagator::UnitaryMatrix<f64>;
pub type Grid = propagator::GridConfig<f64>;
pub type Spinor = propagator::MomentumSpinor<f64>;
pub type Amplitudes = propagator::PositionAmplitudes<f64>;
pub type Profile = density::DensityProfile<f64>;
pub type XGrid = density::UniformGrid<f64>;
pub type Series = observables::TimeSeries<f64>;
pub type Walk = lattice::LatticeState<f64>;
