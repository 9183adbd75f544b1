//! Steady-state intra-cavity covariance by the Lyapunov route, and the
//! intra-cavity bipartite entanglement built on it.
//!
//! The Lyapunov method treats every noise input as white; the thermal
//! force is Markov-approximated at its value near the system response
//! frequency. In the trapped-mirror regime k_B T ≫ ħω_eff this is the
//! classical force spectrum 2γ_m m k_B T.

use nalgebra::{DMatrix, DVector, Matrix6};
use thiserror::Error;

use crate::constants::BOLTZMANN;
use crate::gaussian::{CovarianceMatrix6, GaussianError, Partition};
use crate::model::{DerivedParams, DriftMatrix, ModelError, SystemParams};
use crate::spectral::{thermal_occupation, ThermalConvention};

#[derive(Debug, Error)]
pub enum SteadyStateError {
    #[error("drift matrix is unstable (max Re eigenvalue = {max_re} rad/s); no steady state")]
    Unstable { max_re: f64 },
    #[error("Lyapunov system is numerically singular")]
    NearSingular,
    #[error("Lyapunov residual {achieved:e} exceeds the certified bound {bound:e}")]
    Residual { achieved: f64, bound: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Gaussian(#[from] GaussianError),
}

/// Diffusion matrix D of the white-noise model, defined so that the
/// steady state solves K·C + C·Kᵀ + D = 0.
///
/// Each optical quadrature slot carries γ_c = 2γ_c·(vacuum ½): this is
/// the normalization under which an empty detuned cavity equilibrates
/// to exactly the vacuum state. The thermal slot is classical
/// (2γ_m m k_B T) for `PaperLiteral`, or the symmetrized quantum value
/// 2γ_m m ħω_eff(N(ω_eff) + ½) for `Symmetrized`; with no restoring trap
/// (ω_eff² ≤ 0) the symmetrized form falls back to the classical value,
/// which only matters for configurations that have no steady state
/// anyway.
pub fn diffusion_matrix(p: &SystemParams, convention: ThermalConvention) -> Matrix6<f64> {
    let thermal = match convention {
        ThermalConvention::PaperLiteral => 2.0 * p.gamma_m * p.mass * BOLTZMANN * p.temperature,
        ThermalConvention::Symmetrized => {
            let d = DerivedParams::compute(p);
            match d.omega_eff() {
                Some(w) => {
                    2.0 * p.gamma_m
                        * p.mass
                        * crate::constants::HBAR
                        * w
                        * (thermal_occupation(w, p.temperature) + 0.5)
                }
                None => 2.0 * p.gamma_m * p.mass * BOLTZMANN * p.temperature,
            }
        }
    };
    Matrix6::from_diagonal(&nalgebra::Vector6::new(
        0.0, thermal, p.gamma_c, p.gamma_c, p.gamma_c, p.gamma_c,
    ))
}

/// Residual norm ‖K·C + C·Kᵀ + D‖_F / ‖D‖_F of a candidate steady-state
/// covariance, evaluated in the balanced units the solver works in.
pub fn lyapunov_residual(k: &DriftMatrix, d: &Matrix6<f64>, c: &CovarianceMatrix6) -> f64 {
    let kb = k.balanced();
    let db = conjugate_by_balance(d, k, false);
    let cb = conjugate_by_balance(c.matrix(), k, false);
    let r = kb * cb + cb * kb.transpose() + db;
    r.norm() / db.norm()
}

fn conjugate_by_balance(m: &Matrix6<f64>, k: &DriftMatrix, invert: bool) -> Matrix6<f64> {
    Matrix6::from_fn(|i, j| {
        let s = k.balance[i] * k.balance[j];
        m[(i, j)] * if invert { 1.0 / s } else { s }
    })
}

/// Solves K·C + C·Kᵀ + D = 0 for the unique symmetric steady-state
/// covariance of a stable drift matrix, via a dense solve of the
/// vectorized system (I⊗K + K⊗I)·vec(C) = −vec(D).
///
/// The residual is certified at 10⁻¹⁰·‖D‖ or the f64 cancellation floor
/// ~ε‖K‖‖C‖, whichever is larger: for stiff systems (‖K‖‖C‖ ≫ ‖D‖) the
/// defining equation cancels more digits than double precision holds,
/// even though the solution itself is accurate.
pub fn solve_lyapunov(
    k: &DriftMatrix,
    d: &Matrix6<f64>,
) -> Result<CovarianceMatrix6, SteadyStateError> {
    let eigenvalues = k.eigenvalues()?;
    let max_re = eigenvalues.iter().map(|e| e.re).fold(f64::NEG_INFINITY, f64::max);
    if max_re >= 0.0 {
        return Err(SteadyStateError::Unstable { max_re });
    }

    let kb = k.balanced();
    let db = conjugate_by_balance(d, k, false);

    let n = 6;
    let mut a = DMatrix::<f64>::zeros(n * n, n * n);
    // vec is column-major: vec(K C) = (I ⊗ K) vec(C), vec(C Kᵀ) = (K ⊗ I) vec(C).
    for col in 0..n {
        for row in 0..n {
            let eq = col * n + row;
            for l in 0..n {
                a[(eq, col * n + l)] += kb[(row, l)];
                a[(eq, l * n + row)] += kb[(col, l)];
            }
        }
    }
    let rhs = DVector::<f64>::from_fn(n * n, |idx, _| -db[(idx % n, idx / n)]);
    let solution = a.lu().solve(&rhs).ok_or(SteadyStateError::NearSingular)?;
    let mut cb = Matrix6::<f64>::zeros();
    for col in 0..n {
        for row in 0..n {
            cb[(row, col)] = solution[col * n + row];
        }
    }
    cb = (cb + cb.transpose()) * 0.5;

    let residual = (kb * cb + cb * kb.transpose() + db).norm();
    let bound = (1e-10 * db.norm()).max(64.0 * f64::EPSILON * kb.norm() * cb.norm());
    if residual > bound {
        return Err(SteadyStateError::Residual {
            achieved: residual,
            bound,
        });
    }

    Ok(CovarianceMatrix6::new(conjugate_by_balance(&cb, k, true))?)
}

/// Intra-cavity bipartite logarithmic negativity from the Lyapunov
/// steady state, with the mirror normalized at ω_eff.
pub fn intracavity_entanglement(
    p: &SystemParams,
    partition: Partition,
    convention: ThermalConvention,
) -> Result<f64, SteadyStateError> {
    let omega_norm = default_mirror_norm(p);
    intracavity_entanglement_with_norm(p, partition, convention, omega_norm)
}

/// As [`intracavity_entanglement`] with an explicit mirror
/// normalization frequency; the choice is a local symplectic freedom
/// and cannot change the result beyond numerical noise.
pub fn intracavity_entanglement_with_norm(
    p: &SystemParams,
    partition: Partition,
    convention: ThermalConvention,
    omega_norm: f64,
) -> Result<f64, SteadyStateError> {
    let k = DriftMatrix::new(p);
    let d = diffusion_matrix(p, convention);
    let c = solve_lyapunov(&k, &d)?;
    let v = c.reduce_bipartition(partition, p.mass, omega_norm)?;
    Ok(v.log_negativity()?)
}

/// ω_eff when the trap is restoring, else the suspension frequency,
/// else the cavity linewidth.
pub fn default_mirror_norm(p: &SystemParams) -> f64 {
    DerivedParams::compute(p)
        .omega_eff()
        .unwrap_or(if p.omega_m > 0.0 { p.omega_m } else { p.gamma_c })
}
