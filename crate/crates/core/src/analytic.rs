//! Closed-form expressions for the output carrier–subcarrier
//! logarithmic negativity in the frequency-independent regime
//! (Ω ≪ ω_eff), parametrized by the entangler strength ξ and the
//! thermal degradation Θ. These serve as fast parameter maps and as
//! oracles for the frequency-domain pipeline.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalyticError {
    #[error("xi must be positive and finite, got {0}")]
    InvalidXi(f64),
    #[error("theta must be finite and >= {min}, got {got}")]
    InvalidTheta { got: f64, min: f64 },
    #[error("expression argument {0:e} is not positive; outside the validity domain")]
    NonPositiveArgument(f64),
}

/// Output logarithmic negativity in the low-frequency regime:
/// E_N = max[0, −½ ln(1 + 2ξ(Θ − √(Θ² + ξ⁻¹)))].
///
/// Valid for ξ > 0 and Θ² + ξ⁻¹ ≥ 0. The result is clipped at zero so
/// the return value is always a valid negativity; as ξ → 0⁺ the value
/// tends to 0. The deviation from the full spectral result grows as
/// (Ω/ω_eff)²; below ω_eff/30 it stays under 1% across the operating
/// regimes exercised in the tests.
pub fn output_log_negativity(xi: f64, theta: f64) -> Result<f64, AnalyticError> {
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(AnalyticError::InvalidXi(xi));
    }
    if !theta.is_finite() {
        return Err(AnalyticError::InvalidTheta {
            got: theta,
            min: f64::NEG_INFINITY,
        });
    }
    let radicand = theta * theta + 1.0 / xi;
    if radicand < 0.0 {
        return Err(AnalyticError::NonPositiveArgument(radicand));
    }
    // Θ − √(Θ² + 1/ξ) rewritten to avoid cancellation for large ξΘ².
    let root = radicand.sqrt();
    let argument = if theta + root > 0.0 {
        1.0 - 2.0 / (theta + root)
    } else {
        1.0 + 2.0 * xi * (theta - root)
    };
    if argument <= 0.0 {
        return Err(AnalyticError::NonPositiveArgument(argument));
    }
    Ok((-0.5 * argument.ln()).max(0.0))
}

/// Strong-entangler limit of [`output_log_negativity`]:
/// E_N → −½ ln(1 − 1/Θ + ¼ ξ⁻¹/Θ³) for ξ ≫ 1.
///
/// Enforced for ξ ≥ 10; between 10 and 100 the approximation error can
/// reach the percent level, which is logged as a warning.
pub fn strong_entangler_log_negativity(xi: f64, theta: f64) -> Result<f64, AnalyticError> {
    if !(xi >= 10.0 && xi.is_finite()) {
        return Err(AnalyticError::InvalidXi(xi));
    }
    if !(theta >= 1.0 && theta.is_finite()) {
        return Err(AnalyticError::InvalidTheta { got: theta, min: 1.0 });
    }
    if xi < 100.0 {
        log::warn!("strong-entangler expression used at xi = {xi:.3} < 100; accuracy degrades");
    }
    let argument = 1.0 - 1.0 / theta + 0.25 / (xi * theta.powi(3));
    if argument <= 0.0 {
        return Err(AnalyticError::NonPositiveArgument(argument));
    }
    Ok(-0.5 * argument.ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // Reference evaluations at 40-digit precision.
    const EQ_FULL_AT_NOMINAL: f64 = 0.40186675298796826; // xi = 13.2, theta = 1.8
    const EQ_STRONG_AT_NOMINAL: f64 = 0.40182495853911107;

    #[test]
    fn nominal_point_matches_reference() {
        assert_relative_eq!(
            output_log_negativity(13.2, 1.8).unwrap(),
            EQ_FULL_AT_NOMINAL,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            strong_entangler_log_negativity(13.2, 1.8).unwrap(),
            EQ_STRONG_AT_NOMINAL,
            max_relative = 1e-12
        );
    }

    #[test]
    fn vanishes_as_xi_goes_to_zero() {
        let mut prev = f64::INFINITY;
        for xi in [1e-2, 1e-4, 1e-6, 1e-8] {
            let e = output_log_negativity(xi, 1.3).unwrap();
            assert!(e < prev);
            prev = e;
        }
        assert!(prev < 1e-3);
    }

    #[test]
    fn zero_temperature_plateau_near_half_ln_4xi() {
        let xi = 13.2;
        let e = output_log_negativity(xi, 1.0).unwrap();
        let approx = 0.5 * (4.0 * xi).ln();
        assert!((e - approx).abs() / approx < 0.01, "e = {e}, approx = {approx}");
    }

    #[test]
    fn rejects_nonpositive_xi() {
        assert!(output_log_negativity(0.0, 1.5).is_err());
        assert!(output_log_negativity(-2.0, 1.5).is_err());
        assert!(output_log_negativity(f64::NAN, 1.5).is_err());
    }

    #[test]
    fn strong_form_domain_checks() {
        assert!(strong_entangler_log_negativity(9.9, 1.5).is_err());
        assert!(strong_entangler_log_negativity(100.0, 0.99).is_err());
        assert!(strong_entangler_log_negativity(100.0, 1.5).is_ok());
    }

    #[test]
    fn strong_form_vanishes_at_large_theta() {
        let mut prev = f64::INFINITY;
        for theta in [2.0, 10.0, 100.0, 1e4] {
            let e = strong_entangler_log_negativity(1e3, theta).unwrap();
            assert!(e < prev && e > 0.0);
            prev = e;
        }
        assert!(prev < 1e-3);
    }

    #[test]
    fn monotone_decreasing_in_theta_increasing_in_xi() {
        let xis: Vec<f64> = (0..=5).map(|i| 0.1 * 10f64.powi(i)).collect();
        let thetas: Vec<f64> = (0..=9).map(|i| 1.0 + i as f64).collect();
        for &xi in &xis {
            for w in thetas.windows(2) {
                let hi = output_log_negativity(xi, w[0]).unwrap();
                let lo = output_log_negativity(xi, w[1]).unwrap();
                assert!(hi > lo, "xi = {xi}: E_N({}) = {hi} !> E_N({}) = {lo}", w[0], w[1]);
            }
        }
        for &theta in &thetas {
            for w in xis.windows(2) {
                let lo = output_log_negativity(w[0], theta).unwrap();
                let hi = output_log_negativity(w[1], theta).unwrap();
                assert!(hi > lo, "theta = {theta}");
            }
        }
    }

    #[test]
    fn never_vanishes_on_grid() {
        for i in 0..=40 {
            let xi = 0.1 * 10f64.powf(i as f64 / 8.0);
            for j in 0..=9 {
                let theta = 1.0 + j as f64;
                assert!(output_log_negativity(xi, theta).unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn strong_and_full_forms_converge() {
        // Within 1% already at xi = 100 over moderate theta.
        for i in 0..=20 {
            let theta = 1.01 + (10.0 - 1.01) * i as f64 / 20.0;
            let full = output_log_negativity(100.0, theta).unwrap();
            let strong = strong_entangler_log_negativity(100.0, theta).unwrap();
            assert!((full - strong).abs() / full < 0.01, "theta = {theta}");
        }
        // Below 0.1% at xi = 1000 over theta in [1.1, 5].
        for i in 0..=20 {
            let theta = 1.1 + (5.0 - 1.1) * i as f64 / 20.0;
            let full = output_log_negativity(1e3, theta).unwrap();
            let strong = strong_entangler_log_negativity(1e3, theta).unwrap();
            assert!((full - strong).abs() / full < 1e-3, "theta = {theta}");
        }
    }
}
