//! Physical parameters of the two-tone trapped-mirror system and the
//! derived opto-mechanical quantities: intra-cavity amplitudes, coupling
//! rates, the optical spring/damping decomposition, the drift matrix of
//! the linearized Langevin equations, and stability verdicts.

use nalgebra::{Complex, Matrix6, Vector6};
use thiserror::Error;

use crate::constants::{BOLTZMANN, HBAR, SPEED_OF_LIGHT, TWO_PI};

/// Errors produced while validating parameters or deriving quantities.
#[derive(Debug, Error)]
pub enum ModelError {
    /// One or more parameter invariants are violated; each entry names
    /// the offending field.
    #[error("invalid parameters: {}", violations.join("; "))]
    InvalidParams { violations: Vec<String> },
    /// The entangler parameters ξ and Θ are undefined for this
    /// configuration (a per-field optical spring vanishes, or the total
    /// spring is non-positive).
    #[error("singular entangler configuration: {reason}")]
    SingularEntangler { reason: String },
    /// The eigenvalue iteration for the drift matrix did not converge.
    #[error("eigenvalue computation did not converge for the drift matrix")]
    EigenNonConvergence,
}

/// Index of one of the two drive fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpticalField {
    Carrier,
    Subcarrier,
}

impl OpticalField {
    pub const BOTH: [OpticalField; 2] = [OpticalField::Carrier, OpticalField::Subcarrier];

    /// Position of this field in two-element arrays and in the drift
    /// matrix block ordering.
    pub fn index(self) -> usize {
        match self {
            OpticalField::Carrier => 0,
            OpticalField::Subcarrier => 1,
        }
    }
}

/// Physical inputs of the trapped-mirror model, in SI units with all
/// frequencies angular (rad/s).
///
/// `Default` reproduces the nominal operating point: a 0.5 g mirror with
/// a 1 Hz suspension (Q = 10⁶) in a 1 m cavity of 9.5 kHz half linewidth,
/// driven by a 5 W carrier at −3γ_c and a 0.3 W subcarrier at +γ_c/2,
/// at 300 K.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Mechanical (pendulum) angular resonance frequency ω_m (rad/s).
    pub omega_m: f64,
    /// Mechanical damping rate γ_m (rad/s).
    pub gamma_m: f64,
    /// Reduced mass of the mirror mode (kg).
    pub mass: f64,
    /// Cavity angular resonance frequency ω_c (rad/s).
    pub omega_c: f64,
    /// Cavity half linewidth γ_c (rad/s, HWHM).
    pub gamma_c: f64,
    /// Cavity length (m).
    pub length: f64,
    /// Incident powers of carrier and subcarrier (W).
    pub input_power: [f64; 2],
    /// Detunings Δ_j of carrier and subcarrier (rad/s). Detunings are
    /// primitive inputs here; any static radiation-pressure shift of the
    /// operating point is assumed absorbed into the quoted values.
    pub detuning: [f64; 2],
    /// Ambient temperature (K).
    pub temperature: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        let gamma_c = TWO_PI * 9.5e3;
        SystemParams {
            omega_m: TWO_PI,
            gamma_m: TWO_PI * 1e-6,
            mass: 0.5e-3,
            omega_c: TWO_PI * SPEED_OF_LIGHT / 1.064e-6,
            gamma_c,
            length: 1.0,
            input_power: [5.0, 0.3],
            detuning: [-3.0 * gamma_c, 0.5 * gamma_c],
            temperature: 300.0,
        }
    }
}

impl SystemParams {
    /// Checks every parameter invariant, returning the parameters
    /// unchanged if all hold. Each violation is reported by field name;
    /// NaN and infinite values are rejected.
    pub fn validate(self) -> Result<Self, ModelError> {
        let mut violations = Vec::new();
        let mut finite = |name: &str, v: f64| {
            if !v.is_finite() {
                violations.push(format!("{name} must be finite, got {v}"));
                false
            } else {
                true
            }
        };
        let checks: [(&str, f64); 7] = [
            ("omega_m", self.omega_m),
            ("gamma_m", self.gamma_m),
            ("mass", self.mass),
            ("omega_c", self.omega_c),
            ("gamma_c", self.gamma_c),
            ("length", self.length),
            ("temperature", self.temperature),
        ];
        for (name, v) in checks {
            finite(name, v);
        }
        finite("input_power[0]", self.input_power[0]);
        finite("input_power[1]", self.input_power[1]);
        finite("detuning[0]", self.detuning[0]);
        finite("detuning[1]", self.detuning[1]);
        if !violations.is_empty() {
            return Err(ModelError::InvalidParams { violations });
        }

        if self.mass <= 0.0 {
            violations.push(format!("mass must be > 0, got {}", self.mass));
        }
        if self.omega_m < 0.0 {
            violations.push(format!("omega_m must be >= 0, got {}", self.omega_m));
        }
        if self.gamma_m < 0.0 {
            violations.push(format!("gamma_m must be >= 0, got {}", self.gamma_m));
        }
        if self.omega_c <= 0.0 {
            violations.push(format!("omega_c must be > 0, got {}", self.omega_c));
        }
        if self.gamma_c <= 0.0 {
            violations.push(format!("gamma_c must be > 0, got {}", self.gamma_c));
        }
        if self.length <= 0.0 {
            violations.push(format!("length must be > 0, got {}", self.length));
        }
        for (j, p) in self.input_power.iter().enumerate() {
            if *p < 0.0 {
                violations.push(format!("input_power[{j}] must be >= 0, got {p}"));
            }
        }
        if self.temperature < 0.0 {
            violations.push(format!(
                "temperature must be >= 0, got {}",
                self.temperature
            ));
        }
        if violations.is_empty() {
            Ok(self)
        } else {
            Err(ModelError::InvalidParams { violations })
        }
    }

    /// Intra-cavity field amplitude α_j (dimensionless, √photons):
    /// α_j² = 4 I_j γ_c / [ħ ω_c (γ_c² + Δ_j²)].
    pub fn intracavity_amplitude(&self, field: OpticalField) -> f64 {
        let j = field.index();
        let denom = HBAR * self.omega_c * (self.gamma_c.powi(2) + self.detuning[j].powi(2));
        (4.0 * self.input_power[j] * self.gamma_c / denom).sqrt()
    }

    /// Opto-mechanical coupling rate G_j = α_j ω_c / L (rad/(s·m)).
    pub fn coupling_rate(&self, field: OpticalField) -> f64 {
        self.intracavity_amplitude(field) * self.omega_c / self.length
    }
}

/// Derived opto-mechanical quantities: per-field amplitudes and coupling
/// rates, and the optical-spring decomposition of the effective
/// resonance and damping.
///
/// The per-field spring contributions are
/// ω_eff,j² = −ħ G_j² Δ_j / [m (γ_c² + Δ_j²)] and the per-field damping
/// contributions γ_eff,j = −2 γ_c ω_eff,j² / (γ_c² + Δ_j²); the totals
/// include the mechanical terms: ω_eff² = ω_m² + Σ_j ω_eff,j² and
/// γ_eff = γ_m + Σ_j γ_eff,j. A blue-detuned field (Δ < 0 in this sign
/// convention) contributes a positive spring and negative damping; a
/// red-detuned field the opposite.
#[derive(Debug, Clone, Copy)]
pub struct DerivedParams {
    /// Intra-cavity amplitudes α_j (dimensionless).
    pub alpha: [f64; 2],
    /// Coupling rates G_j (rad/(s·m)).
    pub coupling: [f64; 2],
    /// Per-field squared spring frequencies ω_eff,j² (rad²/s²); may be
    /// negative.
    pub omega_eff_sq_part: [f64; 2],
    /// Per-field damping contributions γ_eff,j (rad/s); may be negative.
    pub gamma_eff_part: [f64; 2],
    /// Total squared effective resonance ω_eff² = ω_m² + Σ_j ω_eff,j².
    pub omega_eff_sq: f64,
    /// Total effective damping γ_eff = γ_m + Σ_j γ_eff,j.
    pub gamma_eff: f64,
}

impl DerivedParams {
    /// Evaluates the spring/damping decomposition for validated
    /// parameters. With both powers zero this reduces exactly to the
    /// bare mechanical oscillator (ω_eff = ω_m, γ_eff = γ_m).
    pub fn compute(p: &SystemParams) -> Self {
        let mut alpha = [0.0; 2];
        let mut coupling = [0.0; 2];
        let mut omega_eff_sq_part = [0.0; 2];
        let mut gamma_eff_part = [0.0; 2];
        for field in OpticalField::BOTH {
            let j = field.index();
            let lorentz = p.gamma_c.powi(2) + p.detuning[j].powi(2);
            alpha[j] = p.intracavity_amplitude(field);
            coupling[j] = p.coupling_rate(field);
            omega_eff_sq_part[j] =
                -HBAR * coupling[j].powi(2) * p.detuning[j] / (p.mass * lorentz);
            gamma_eff_part[j] = -2.0 * p.gamma_c * omega_eff_sq_part[j] / lorentz;
        }
        DerivedParams {
            alpha,
            coupling,
            omega_eff_sq_part,
            gamma_eff_part,
            omega_eff_sq: p.omega_m.powi(2) + omega_eff_sq_part[0] + omega_eff_sq_part[1],
            gamma_eff: p.gamma_m + gamma_eff_part[0] + gamma_eff_part[1],
        }
    }

    /// Effective resonance frequency ω_eff (rad/s), if the trap is
    /// restoring (ω_eff² > 0).
    pub fn omega_eff(&self) -> Option<f64> {
        (self.omega_eff_sq > 0.0).then(|| self.omega_eff_sq.sqrt())
    }
}

/// The dimensionless entangler strength ξ and thermal degradation
/// parameter Θ controlling the analytic output negativity.
#[derive(Debug, Clone, Copy)]
pub struct Entangler {
    pub xi: f64,
    pub theta: f64,
}

/// Computes ξ = (4γ_c²/(Δ₁Δ₂)) · ω_eff,1² ω_eff,2² / ω_eff⁴ and
/// Θ = 1 − (γ_m/2γ_c)(k_B T/ħ)(Δ₁/ω_eff,1² + Δ₂/ω_eff,2²).
///
/// Requires both per-field springs to be nonzero and ω_eff² > 0;
/// otherwise the configuration is singular for these parameters.
pub fn entangler_parameters(p: &SystemParams) -> Result<Entangler, ModelError> {
    let d = DerivedParams::compute(p);
    for field in OpticalField::BOTH {
        let j = field.index();
        if d.omega_eff_sq_part[j] == 0.0 {
            return Err(ModelError::SingularEntangler {
                reason: format!("per-field spring omega_eff_sq_part[{j}] is zero"),
            });
        }
    }
    if d.omega_eff_sq <= 0.0 {
        return Err(ModelError::SingularEntangler {
            reason: format!("omega_eff_sq = {} is not positive", d.omega_eff_sq),
        });
    }
    let xi = 4.0 * p.gamma_c.powi(2) / (p.detuning[0] * p.detuning[1])
        * d.omega_eff_sq_part[0] * d.omega_eff_sq_part[1]
        / d.omega_eff_sq.powi(2);
    let theta = 1.0 - thermal_degradation_slope_from(p, &d)? * p.temperature;
    Ok(Entangler { xi, theta })
}

/// Slope dΘ/dT (1/K): Θ(T) = 1 + slope·T at fixed optics. Used to
/// back-solve temperatures for a requested Θ.
pub fn thermal_degradation_slope(p: &SystemParams) -> Result<f64, ModelError> {
    let d = DerivedParams::compute(p);
    thermal_degradation_slope_from(p, &d).map(|s| -s)
}

fn thermal_degradation_slope_from(p: &SystemParams, d: &DerivedParams) -> Result<f64, ModelError> {
    for j in 0..2 {
        if d.omega_eff_sq_part[j] == 0.0 {
            return Err(ModelError::SingularEntangler {
                reason: format!("per-field spring omega_eff_sq_part[{j}] is zero"),
            });
        }
    }
    Ok(p.gamma_m / (2.0 * p.gamma_c) * (BOLTZMANN / HBAR)
        * (p.detuning[0] / d.omega_eff_sq_part[0] + p.detuning[1] / d.omega_eff_sq_part[1]))
}

/// Drift matrix K of the linearized Langevin equations
/// u̇_ic = K u_ic + u_in over the coordinates [q, p, X₁, Y₁, X₂, Y₂],
/// with q, p in SI units and the quadratures dimensionless.
///
/// `input_scaling` records how the raw noises enter u_in: the thermal
/// force slot is unscaled while each vacuum quadrature enters as
/// √(2γ_c)·X_in.
#[derive(Debug, Clone)]
pub struct DriftMatrix {
    /// The 6×6 real drift matrix.
    pub matrix: Matrix6<f64>,
    /// Diagonal scaling mapping raw inputs [0, F_th, X_in1, Y_in1,
    /// X_in2, Y_in2] to u_in.
    pub input_scaling: Vector6<f64>,
    /// Diagonal similarity that expresses the mirror coordinates in
    /// canonical (dimensionless) units; used internally to keep linear
    /// algebra well scaled. Eigenvalues and all reported quantities are
    /// unaffected.
    pub(crate) balance: Vector6<f64>,
}

impl DriftMatrix {
    /// Builds K for validated parameters, populating the mechanical row,
    /// the detuned-cavity rotation blocks −γ_c·I + Δ_j·J, and the
    /// radiation-pressure couplings G_j.
    pub fn new(p: &SystemParams) -> Self {
        let d = DerivedParams::compute(p);
        let (g1, g2) = (d.coupling[0], d.coupling[1]);
        let mut k = Matrix6::zeros();
        k[(0, 1)] = 1.0 / p.mass;
        k[(1, 0)] = -p.mass * p.omega_m.powi(2);
        k[(1, 1)] = -p.gamma_m;
        k[(1, 2)] = HBAR * g1;
        k[(1, 4)] = HBAR * g2;
        k[(2, 2)] = -p.gamma_c;
        k[(2, 3)] = p.detuning[0];
        k[(3, 0)] = g1;
        k[(3, 2)] = -p.detuning[0];
        k[(3, 3)] = -p.gamma_c;
        k[(4, 4)] = -p.gamma_c;
        k[(4, 5)] = p.detuning[1];
        k[(5, 0)] = g2;
        k[(5, 4)] = -p.detuning[1];
        k[(5, 5)] = -p.gamma_c;

        let s = (2.0 * p.gamma_c).sqrt();
        DriftMatrix {
            matrix: k,
            input_scaling: Vector6::new(1.0, 1.0, s, s, s, s),
            balance: mirror_balance(p),
        }
    }

    /// Wraps an arbitrary drift matrix and input scaling (no mirror
    /// rebalancing); mainly for driving the solvers with synthetic
    /// systems.
    pub fn from_parts(matrix: Matrix6<f64>, input_scaling: Vector6<f64>) -> Self {
        DriftMatrix {
            matrix,
            input_scaling,
            balance: Vector6::repeat(1.0),
        }
    }

    /// K expressed in canonical mirror units, Λ K Λ⁻¹.
    pub(crate) fn balanced(&self) -> Matrix6<f64> {
        let mut k = self.matrix;
        for i in 0..6 {
            for j in 0..6 {
                k[(i, j)] *= self.balance[i] / self.balance[j];
            }
        }
        k
    }

    /// Eigenvalues of K, computed on the balanced similarity transform
    /// for accuracy.
    pub fn eigenvalues(&self) -> Result<[Complex<f64>; 6], ModelError> {
        let schur = nalgebra::linalg::Schur::try_new(self.balanced(), 1e-14, 0)
            .ok_or(ModelError::EigenNonConvergence)?;
        let ev = schur.complex_eigenvalues();
        Ok([ev[0], ev[1], ev[2], ev[3], ev[4], ev[5]])
    }
}

/// Canonical-unit similarity for the mirror coordinates:
/// Q = q·√(m ω_s/ħ), P = p/√(ħ m ω_s), with ω_s = ω_m when the
/// suspension is present, else γ_c.
pub(crate) fn mirror_balance(p: &SystemParams) -> Vector6<f64> {
    let omega_scale = if p.omega_m > 0.0 { p.omega_m } else { p.gamma_c };
    let sq = (p.mass * omega_scale / HBAR).sqrt();
    let sp = 1.0 / (HBAR * p.mass * omega_scale).sqrt();
    Vector6::new(sq, sp, 1.0, 1.0, 1.0, 1.0)
}

/// Outcome of the stability analysis of a configuration.
#[derive(Debug, Clone)]
pub struct StabilityReport {
    /// True iff every eigenvalue of K has strictly negative real part.
    pub stable: bool,
    /// The eigenvalues of K, for diagnostics.
    pub eigenvalues: [Complex<f64>; 6],
    /// The quasi-static proxy verdict: ω_eff² > 0 and γ_eff > 0. Valid
    /// for dynamics slow on the cavity timescale; the eigenvalue verdict
    /// is authoritative near stability boundaries.
    pub quasi_static_stable: bool,
    /// Total squared effective spring (rad²/s²).
    pub omega_eff_sq: f64,
    /// Total effective damping (rad/s).
    pub gamma_eff: f64,
}

/// Decides stability of the configuration from the eigenvalues of the
/// full drift matrix, and reports the quasi-static spring/damping proxy
/// separately.
pub fn assess_stability(p: &SystemParams) -> Result<StabilityReport, ModelError> {
    let d = DerivedParams::compute(p);
    let k = DriftMatrix::new(p);
    let eigenvalues = k.eigenvalues()?;
    Ok(StabilityReport {
        stable: eigenvalues.iter().all(|ev| ev.re < 0.0),
        eigenvalues,
        quasi_static_stable: d.omega_eff_sq > 0.0 && d.gamma_eff > 0.0,
        omega_eff_sq: d.omega_eff_sq,
        gamma_eff: d.gamma_eff,
    })
}

/// Bare mechanical susceptibility to force,
/// χ_m(Ω) = [m(ω_m² + iγ_mΩ − Ω²)]⁻¹ (m/N).
pub fn mechanical_susceptibility(p: &SystemParams, omega: f64) -> Complex<f64> {
    let denom = Complex::new(
        p.mass * (p.omega_m.powi(2) - omega.powi(2)),
        p.mass * p.gamma_m * omega,
    );
    denom.inv()
}

/// Opto-mechanical susceptibility in the quasi-static closed form,
/// χ_eff(Ω) = [m(ω_eff² + iγ_effΩ − Ω²)]⁻¹ (m/N).
///
/// The closed form uses the zero-frequency spring and damping of the
/// optical trap and is accurate for Ω ≪ γ_c; it is evaluated as written
/// at any Ω. With the optics off it reduces exactly to χ_m.
pub fn effective_susceptibility(p: &SystemParams, omega: f64) -> Complex<f64> {
    let d = DerivedParams::compute(p);
    let denom = Complex::new(
        p.mass * (d.omega_eff_sq - omega.powi(2)),
        p.mass * d.gamma_eff * omega,
    );
    denom.inv()
}
