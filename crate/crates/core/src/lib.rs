//! Simulation of the opto-mechanical dynamics and entanglement of a
//! suspended cavity mirror trapped by the radiation pressure of two
//! detuned optical fields (a strong carrier and a weak subcarrier).
//!
//! The library is organized around the linearized quantum Langevin
//! description of the coupled mirror–field fluctuations:
//!
//! * [`model`] — physical parameters, derived opto-mechanical quantities
//!   (intra-cavity amplitudes, coupling rates, optical spring and damping),
//!   the 6×6 drift matrix and stability analysis.
//! * [`gaussian`] — two-mode Gaussian state algebra: variance matrices,
//!   symplectic eigenvalues, separability and logarithmic negativity.
//! * [`spectral`] — frequency-domain solution of the Langevin equations:
//!   transfer matrices, input noise spectra, output-field variance
//!   matrices, entanglement spectra and frequency-integrated covariances.
//! * [`steadystate`] — steady-state intra-cavity covariance by the
//!   Lyapunov route and intra-cavity bipartite entanglement.
//! * [`analytic`] — closed-form output-entanglement expressions used as
//!   oracles and for fast parameter maps.
//!
//! All frequencies are stored as angular frequencies (rad/s); conversion
//! from Hz happens at the interface boundary. Quadratures use the
//! convention `[Q, P] = i`, i.e. vacuum variance 1/2 per quadrature.

pub mod analytic;
pub mod constants;
pub mod gaussian;
pub mod model;
pub mod spectral;
pub mod steadystate;

pub use gaussian::{CovarianceMatrix6, Partition, VarianceMatrix4};
pub use model::{
    DerivedParams, DriftMatrix, Entangler, OpticalField, StabilityReport, SystemParams,
};
pub use spectral::{QuadratureOptions, SpectrumPoint, SpectrumSeries, ThermalConvention};
