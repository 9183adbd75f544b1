//! Two-mode Gaussian state algebra: variance matrices over canonical
//! quadratures, symplectic eigenvalues, the separability criterion, and
//! the logarithmic negativity.
//!
//! Conventions: quadrature vector [Q₁, P₁, Q₂, P₂] with [Q_j, P_k] = i·δ_jk,
//! so the vacuum has variance 1/2 per quadrature. The logarithmic
//! negativity uses the natural logarithm.

use nalgebra::{Matrix2, Matrix4, Matrix6, Vector6};
use thiserror::Error;

/// Errors from Gaussian-state operations.
#[derive(Debug, Error)]
pub enum GaussianError {
    #[error("matrix is not symmetric: max asymmetry {max_asymmetry:e} exceeds tolerance")]
    NotSymmetric { max_asymmetry: f64 },
    #[error("matrix is not a physical state (nu_minus = {nu_minus})")]
    Unphysical { nu_minus: f64 },
    #[error("unphysical or corrupted spectrum: Sigma^2 - 4 det V = {discriminant:e} < 0")]
    UnphysicalSpectrum { discriminant: f64 },
    #[error("degenerate state: log-negativity argument {argument:e} is not positive")]
    Degenerate { argument: f64 },
    #[error("block with determinant {det} is not symplectic")]
    NotSymplectic { det: f64 },
    #[error("covariance matrix is not positive semidefinite (min eigenvalue ratio {min_eig:e})")]
    NotPositiveSemidefinite { min_eig: f64 },
    #[error("eigenvalue computation failed")]
    EigenFailure,
    #[error("invalid normalization: {0}")]
    InvalidNormalization(String),
}

const SYMMETRY_TOL: f64 = 1e-12;

/// A 4×4 symmetric two-mode variance matrix in canonical units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceMatrix4 {
    v: Matrix4<f64>,
}

impl VarianceMatrix4 {
    /// Wraps a matrix after checking symmetry to one part in 10¹²
    /// (relative to the largest entry); the stored matrix is the exact
    /// symmetric part.
    pub fn new(v: Matrix4<f64>) -> Result<Self, GaussianError> {
        let scale = v.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(1e-300);
        let max_asymmetry = (v - v.transpose())
            .iter()
            .fold(0.0f64, |a, x| a.max(x.abs()));
        if max_asymmetry > SYMMETRY_TOL * scale {
            return Err(GaussianError::NotSymmetric { max_asymmetry });
        }
        Ok(VarianceMatrix4 {
            v: (v + v.transpose()) * 0.5,
        })
    }

    /// Two-mode vacuum, V = ½·I.
    pub fn vacuum() -> Self {
        VarianceMatrix4 {
            v: Matrix4::identity() * 0.5,
        }
    }

    /// Two-mode squeezed state with squeeze parameter `r`: diagonal
    /// blocks ½cosh(2r)·I and off-diagonal block ½sinh(2r)·diag(1, −1).
    pub fn two_mode_squeezed(r: f64) -> Self {
        let c = 0.5 * (2.0 * r).cosh();
        let s = 0.5 * (2.0 * r).sinh();
        let mut v = Matrix4::identity() * c;
        v[(0, 2)] = s;
        v[(2, 0)] = s;
        v[(1, 3)] = -s;
        v[(3, 1)] = -s;
        VarianceMatrix4 { v }
    }

    /// Product of two thermal-like modes with per-quadrature variances
    /// `a` and `b`.
    pub fn product(a: f64, b: f64) -> Self {
        VarianceMatrix4 {
            v: Matrix4::from_diagonal(&nalgebra::Vector4::new(a, a, b, b)),
        }
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.v
    }

    /// Σ = det V₁₁ + det V₂₂ − 2 det V₁₂, the partially transposed
    /// symplectic invariant entering both the separability criterion and
    /// the logarithmic negativity.
    pub fn sigma(&self) -> f64 {
        let det2 = |m: &Matrix4<f64>, r: usize, c: usize| {
            m[(r, c)] * m[(r + 1, c + 1)] - m[(r, c + 1)] * m[(r + 1, c)]
        };
        det2(&self.v, 0, 0) + det2(&self.v, 2, 2) - 2.0 * det2(&self.v, 0, 2)
    }

    pub fn det(&self) -> f64 {
        self.v.determinant()
    }

    /// Symplectic eigenvalues (ν₋, ν₊), computed as the moduli of the
    /// eigenvalues of J·V. With `partial_transpose` set, the momentum of
    /// the second mode is time-reversed (P₂ → −P₂) first.
    pub fn symplectic_eigenvalues(
        &self,
        partial_transpose: bool,
    ) -> Result<(f64, f64), GaussianError> {
        let mut v = self.v;
        if partial_transpose {
            for i in 0..4 {
                v[(i, 3)] = -v[(i, 3)];
                v[(3, i)] = -v[(3, i)];
            }
        }
        let jv = symplectic_form() * v;
        let schur = nalgebra::linalg::Schur::try_new(jv, 1e-14, 2000)
            .ok_or(GaussianError::EigenFailure)?;
        let mut moduli: Vec<f64> = schur
            .complex_eigenvalues()
            .iter()
            .map(|ev| ev.norm())
            .collect();
        moduli.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // The eigenvalues come in ±iν pairs; average each pair.
        Ok((
            0.5 * (moduli[0] + moduli[1]),
            0.5 * (moduli[2] + moduli[3]),
        ))
    }

    /// Logarithmic negativity
    /// E_N = max[0, −½ ln(2Σ − 2√(Σ² − 4 det V))], natural log.
    ///
    /// Evaluated in the rationalized form 8·detV / (Σ + √(Σ² − 4 det V)),
    /// which is algebraically identical but avoids the cancellation the
    /// printed form suffers when the symplectic spectrum is strongly
    /// split (hot thermal mode, or squeezing beyond r ≈ 2).
    pub fn log_negativity(&self) -> Result<f64, GaussianError> {
        let sigma = self.sigma();
        let det = self.det();
        let discriminant = sigma * sigma - 4.0 * det;
        let scale = (sigma * sigma).max(1e-300);
        if discriminant < -1e-9 * scale {
            return Err(GaussianError::UnphysicalSpectrum { discriminant });
        }
        let denom = sigma + discriminant.max(0.0).sqrt();
        if denom <= 0.0 || det <= 0.0 {
            return Err(GaussianError::Degenerate {
                argument: 8.0 * det / denom,
            });
        }
        let argument = 8.0 * det / denom;
        Ok((-0.5 * argument.ln()).max(0.0))
    }

    /// True iff ν₋ of the untransposed matrix is at least ½ (within
    /// 10⁻⁹), i.e. the matrix satisfies the uncertainty principle.
    pub fn is_physical(&self) -> bool {
        match self.symplectic_eigenvalues(false) {
            Ok((nu_minus, _)) => nu_minus >= 0.5 - 1e-9,
            Err(_) => false,
        }
    }

    /// Separability verdict for a physical state: separable iff
    /// 4 det V ≥ Σ − ¼ (the boundary counts as separable).
    pub fn is_separable(&self) -> Result<bool, GaussianError> {
        if !self.is_physical() {
            let (nu_minus, _) = self.symplectic_eigenvalues(false)?;
            return Err(GaussianError::Unphysical { nu_minus });
        }
        Ok(4.0 * self.det() >= self.sigma() - 0.25)
    }

    /// Congruence by a local symplectic transformation,
    /// (S₁ ⊕ S₂) V (S₁ ⊕ S₂)ᵀ. Each block must have unit determinant to
    /// within 10⁻¹⁰.
    pub fn apply_local_symplectic(
        &self,
        s1: &Matrix2<f64>,
        s2: &Matrix2<f64>,
    ) -> Result<Self, GaussianError> {
        for s in [s1, s2] {
            let det = s.determinant();
            if (det - 1.0).abs() > 1e-10 {
                return Err(GaussianError::NotSymplectic { det });
            }
        }
        let mut s = Matrix4::zeros();
        s.fixed_view_mut::<2, 2>(0, 0).copy_from(s1);
        s.fixed_view_mut::<2, 2>(2, 2).copy_from(s2);
        let v = s * self.v * s.transpose();
        Ok(VarianceMatrix4 {
            v: (v + v.transpose()) * 0.5,
        })
    }
}

/// Two-mode symplectic form J = J₂ ⊕ J₂ with J₂ = [[0, 1], [−1, 0]].
fn symplectic_form() -> Matrix4<f64> {
    let mut j = Matrix4::zeros();
    j[(0, 1)] = 1.0;
    j[(1, 0)] = -1.0;
    j[(2, 3)] = 1.0;
    j[(3, 2)] = -1.0;
    j
}

/// Bipartition selector for reductions of the full mirror–carrier–
/// subcarrier covariance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Partition {
    MirrorCarrier,
    MirrorSubcarrier,
    CarrierSubcarrier,
}

impl Partition {
    fn indices(self) -> [usize; 4] {
        match self {
            Partition::MirrorCarrier => [0, 1, 2, 3],
            Partition::MirrorSubcarrier => [0, 1, 4, 5],
            Partition::CarrierSubcarrier => [2, 3, 4, 5],
        }
    }
}

/// A 6×6 symmetric steady-state covariance over [q, p, X₁, Y₁, X₂, Y₂],
/// with SI units for the mirror coordinates and dimensionless optical
/// quadratures.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix6 {
    c: Matrix6<f64>,
}

impl CovarianceMatrix6 {
    /// Wraps a matrix after checking symmetry (1 part in 10¹²) and
    /// positive semidefiniteness. Because the entries span many orders
    /// of magnitude in SI units, definiteness is checked on the
    /// correlation-normalized matrix, which is congruent to `c`.
    pub fn new(c: Matrix6<f64>) -> Result<Self, GaussianError> {
        let scale = c.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(1e-300);
        let max_asymmetry = (c - c.transpose())
            .iter()
            .fold(0.0f64, |a, x| a.max(x.abs()));
        if max_asymmetry > SYMMETRY_TOL * scale {
            return Err(GaussianError::NotSymmetric { max_asymmetry });
        }
        let c = (c + c.transpose()) * 0.5;

        let dmax = (0..6).fold(0.0f64, |a, i| a.max(c[(i, i)]));
        if dmax <= 0.0 {
            return Err(GaussianError::NotPositiveSemidefinite { min_eig: dmax });
        }
        for i in 0..6 {
            if c[(i, i)] < -1e-9 * dmax {
                return Err(GaussianError::NotPositiveSemidefinite {
                    min_eig: c[(i, i)] / dmax,
                });
            }
        }
        let inv_scale =
            Vector6::from_fn(|i, _| 1.0 / c[(i, i)].max(1e-14 * dmax).sqrt());
        let mut r = c;
        for i in 0..6 {
            for j in 0..6 {
                r[(i, j)] *= inv_scale[i] * inv_scale[j];
            }
        }
        let eig = nalgebra::linalg::SymmetricEigen::new(r);
        let min_eig = eig.eigenvalues.min();
        if min_eig < -1e-9 {
            return Err(GaussianError::NotPositiveSemidefinite { min_eig });
        }
        Ok(CovarianceMatrix6 { c })
    }

    pub fn matrix(&self) -> &Matrix6<f64> {
        &self.c
    }

    /// Extracts the 4×4 variance matrix of a bipartition in canonical
    /// units. When the mirror is part of the selection, its coordinates
    /// are rescaled as Q = q·√(m·ω_norm/ħ), P = p/√(ħ·m·ω_norm) so that
    /// [Q, P] = i; the choice of ω_norm is a local symplectic freedom
    /// and does not affect entanglement measures.
    pub fn reduce_bipartition(
        &self,
        partition: Partition,
        mass: f64,
        omega_norm: f64,
    ) -> Result<VarianceMatrix4, GaussianError> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(GaussianError::InvalidNormalization(format!(
                "mass must be positive and finite, got {mass}"
            )));
        }
        if !(omega_norm > 0.0 && omega_norm.is_finite()) {
            return Err(GaussianError::InvalidNormalization(format!(
                "omega_norm must be positive and finite, got {omega_norm}"
            )));
        }
        let sq = (mass * omega_norm / crate::constants::HBAR).sqrt();
        let sp = 1.0 / (crate::constants::HBAR * mass * omega_norm).sqrt();
        let canon = Vector6::new(sq, sp, 1.0, 1.0, 1.0, 1.0);
        let idx = partition.indices();
        let v = Matrix4::from_fn(|i, j| self.c[(idx[i], idx[j])] * canon[idx[i]] * canon[idx[j]]);
        VarianceMatrix4::new(v)
    }
}
