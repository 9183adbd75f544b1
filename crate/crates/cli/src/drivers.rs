//! Experiment drivers: each produces a complete CSV artifact (header
//! plus data rows, `\n` line endings) from a [`RunConfig`].

use ponder_core::analytic::output_log_negativity;
use ponder_core::constants::TWO_PI;
use ponder_core::model::{
    assess_stability, entangler_parameters, thermal_degradation_slope, DerivedParams, DriftMatrix,
    ModelError, StabilityReport, SystemParams,
};
use ponder_core::spectral::{
    integrate_covariance, output_entanglement_spectrum, output_variance_at, QuadratureOptions,
    SpectralError,
};
use ponder_core::steadystate::{
    diffusion_matrix, lyapunov_residual, solve_lyapunov, SteadyStateError,
};
use ponder_core::{CovarianceMatrix6, Partition};

use crate::config::{CrosscheckRows, RunConfig, RunKind};
use crate::CliError;

/// Runs the configured experiment and returns the CSV text.
pub fn run(cfg: &RunConfig) -> Result<String, CliError> {
    match cfg.run {
        RunKind::Spectrum => run_spectrum(cfg),
        RunKind::TempSweep => run_temp_sweep(cfg),
        RunKind::ThetaMap => run_theta_map(cfg),
        RunKind::Intracavity => run_intracavity(cfg),
        RunKind::StabilityReport => run_stability_report(cfg),
    }
}

fn fmt(digits: usize, x: f64) -> String {
    format!("{:.*e}", digits - 1, x)
}

fn instability_message(report: &StabilityReport) -> String {
    let mut parts = vec![format!(
        "configuration is unstable by the eigenvalue test (max Re eigenvalue = {:.6e} rad/s)",
        report
            .eigenvalues
            .iter()
            .map(|e| e.re)
            .fold(f64::NEG_INFINITY, f64::max)
    )];
    if report.gamma_eff < 0.0 {
        parts.push(format!("gamma_eff = {:.6e} rad/s < 0", report.gamma_eff));
    }
    if report.omega_eff_sq <= 0.0 {
        parts.push(format!(
            "omega_eff_sq = {:.6e} rad^2/s^2 <= 0 (anti-trap)",
            report.omega_eff_sq
        ));
    }
    parts.join("; ")
}

fn numeric_err(e: impl std::fmt::Display) -> CliError {
    CliError::Numeric(e.to_string())
}

fn spectral_err(e: SpectralError) -> CliError {
    match e {
        SpectralError::Unstable { .. } => CliError::Instability(e.to_string()),
        SpectralError::Model(ModelError::InvalidParams { .. }) => CliError::Config(e.to_string()),
        other => CliError::Numeric(other.to_string()),
    }
}

fn run_spectrum(cfg: &RunConfig) -> Result<String, CliError> {
    let p = cfg.params.system_params()?;
    let report = assess_stability(&p).map_err(numeric_err)?;
    if !report.stable {
        return Err(CliError::Instability(instability_message(&report)));
    }
    let grid_hz = cfg.effective_grid().values();
    let grid: Vec<f64> = grid_hz.iter().map(|f| TWO_PI * f).collect();
    let series = output_entanglement_spectrum(&p, &grid, cfg.convention).map_err(spectral_err)?;
    let mut out = String::from("omega_hz,E_N,sigma,detV,nu_minus\n");
    for (f_hz, pt) in grid_hz.iter().zip(series.points.iter()) {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt(cfg.digits, *f_hz),
            fmt(cfg.digits, pt.log_negativity),
            fmt(cfg.digits, pt.sigma),
            fmt(cfg.digits, pt.det_v),
            fmt(cfg.digits, pt.nu_minus),
        ));
    }
    Ok(out)
}

fn run_temp_sweep(cfg: &RunConfig) -> Result<String, CliError> {
    let base = cfg.params.system_params()?;
    let report = assess_stability(&base).map_err(numeric_err)?;
    let d = DerivedParams::compute(&base);
    let probe = d.omega_eff().map(|w| w / 100.0);
    let mut out = String::from("temperature_k,E_N_low_freq,xi,theta\n");
    for t in cfg.effective_grid().values() {
        let p = SystemParams {
            temperature: t,
            ..base
        };
        let (xi, theta) = match entangler_parameters(&p) {
            Ok(e) => (fmt(cfg.digits, e.xi), fmt(cfg.digits, e.theta)),
            Err(_) => (String::new(), String::new()),
        };
        let e_n = match (report.stable, probe) {
            (true, Some(omega)) => match output_variance_at(&p, omega, cfg.convention) {
                Ok(v) => fmt(cfg.digits, v.log_negativity().map_err(numeric_err)?),
                Err(SpectralError::Unstable { .. }) => String::new(),
                Err(e) => return Err(spectral_err(e)),
            },
            _ => String::new(),
        };
        out.push_str(&format!("{},{},{},{}\n", fmt(cfg.digits, t), e_n, xi, theta));
    }
    Ok(out)
}

fn run_theta_map(cfg: &RunConfig) -> Result<String, CliError> {
    let base = cfg.params.system_params()?;
    let slope = thermal_degradation_slope(&base).map_err(numeric_err)?;
    if slope <= 0.0 {
        return Err(CliError::Numeric(format!(
            "theta does not increase with temperature (slope {slope:e} 1/K); \
             cannot back-solve temperatures for the map"
        )));
    }
    let e = entangler_parameters(&base).map_err(numeric_err)?;
    let stable = assess_stability(&base).map_err(numeric_err)?.stable;
    let probe = DerivedParams::compute(&base).omega_eff().map(|w| w / 100.0);
    let mut out = String::from("theta_minus_1,E_N_analytic,E_N_numeric\n");
    for theta_minus_1 in cfg.effective_grid().values() {
        let analytic = output_log_negativity(e.xi, 1.0 + theta_minus_1).map_err(numeric_err)?;
        let numeric = match (stable, probe) {
            (true, Some(omega)) => {
                let p = SystemParams {
                    temperature: theta_minus_1 / slope,
                    ..base
                };
                match output_variance_at(&p, omega, cfg.convention) {
                    Ok(v) => fmt(cfg.digits, v.log_negativity().map_err(numeric_err)?),
                    Err(SpectralError::Unstable { .. }) => String::new(),
                    Err(err) => return Err(spectral_err(err)),
                }
            }
            _ => String::new(),
        };
        out.push_str(&format!(
            "{},{},{}\n",
            fmt(cfg.digits, theta_minus_1),
            fmt(cfg.digits, analytic),
            numeric,
        ));
    }
    Ok(out)
}

fn run_intracavity(cfg: &RunConfig) -> Result<String, CliError> {
    let base = cfg.params.system_params()?;
    let temperatures = cfg.effective_grid().values();
    let k = DriftMatrix::new(&base);
    let mirror_norm = ponder_core::steadystate::default_mirror_norm(&base);
    let mut out = String::from(
        "temperature_k,E_N_mirror_carrier,E_N_mirror_subcarrier,E_N_carrier_subcarrier,\
         lyapunov_residual,crosscheck_maxdev\n",
    );
    let last = temperatures.len() - 1;
    for (row, &t) in temperatures.iter().enumerate() {
        let p = SystemParams {
            temperature: t,
            ..base
        };
        let d = diffusion_matrix(&p, cfg.convention);
        let solved = match solve_lyapunov(&k, &d) {
            Ok(c) => Some(c),
            Err(SteadyStateError::Unstable { .. }) => None,
            Err(e) => return Err(numeric_err(e)),
        };
        let row_text = match &solved {
            Some(c) => {
                let mut e_n = [String::new(), String::new(), String::new()];
                for (slot, partition) in [
                    Partition::MirrorCarrier,
                    Partition::MirrorSubcarrier,
                    Partition::CarrierSubcarrier,
                ]
                .into_iter()
                .enumerate()
                {
                    let v = c
                        .reduce_bipartition(partition, p.mass, mirror_norm)
                        .map_err(numeric_err)?;
                    e_n[slot] = fmt(cfg.digits, v.log_negativity().map_err(numeric_err)?);
                }
                let residual = fmt(cfg.digits, lyapunov_residual(&k, &d, c));
                let wants_check = match cfg.crosscheck {
                    CrosscheckRows::FirstLast => row == 0 || row == last,
                    CrosscheckRows::All => true,
                    CrosscheckRows::None => false,
                };
                let crosscheck = if wants_check {
                    let integrated =
                        integrate_covariance(&p, cfg.convention, &QuadratureOptions::default())
                            .map_err(spectral_err)?;
                    fmt(cfg.digits, covariance_max_deviation(c, &integrated))
                } else {
                    String::new()
                };
                format!(
                    "{},{},{},{},{},{}\n",
                    fmt(cfg.digits, t),
                    e_n[0],
                    e_n[1],
                    e_n[2],
                    residual,
                    crosscheck
                )
            }
            None => format!("{},,,,,\n", fmt(cfg.digits, t)),
        };
        out.push_str(&row_text);
    }
    Ok(out)
}

/// Largest elementwise relative deviation between two covariance
/// matrices, with near-zero elements judged against the geometric mean
/// of the corresponding variances.
fn covariance_max_deviation(a: &CovarianceMatrix6, b: &CovarianceMatrix6) -> f64 {
    let (ca, cb) = (a.matrix(), b.matrix());
    let mut worst = 0.0f64;
    for i in 0..6 {
        for j in 0..6 {
            let scale = (ca[(i, i)] * ca[(j, j)]).sqrt();
            let denom = ca[(i, j)].abs().max(1e-3 * scale).max(1e-300);
            worst = worst.max(((ca[(i, j)] - cb[(i, j)]) / denom).abs());
        }
    }
    worst
}

fn run_stability_report(cfg: &RunConfig) -> Result<String, CliError> {
    let p = cfg.params.system_params()?;
    let report = assess_stability(&p).map_err(numeric_err)?;
    let mut out = String::from("quantity,value\n");
    out.push_str(&format!("stable,{}\n", report.stable));
    out.push_str(&format!("quasi_static_stable,{}\n", report.quasi_static_stable));
    out.push_str(&format!(
        "omega_eff_sq_rad2_s2,{}\n",
        fmt(cfg.digits, report.omega_eff_sq)
    ));
    let f_eff = if report.omega_eff_sq > 0.0 {
        fmt(cfg.digits, report.omega_eff_sq.sqrt() / TWO_PI)
    } else {
        String::new()
    };
    out.push_str(&format!("omega_eff_hz,{f_eff}\n"));
    out.push_str(&format!(
        "gamma_eff_rad_s,{}\n",
        fmt(cfg.digits, report.gamma_eff)
    ));
    let (xi, theta) = match entangler_parameters(&p) {
        Ok(e) => (fmt(cfg.digits, e.xi), fmt(cfg.digits, e.theta)),
        Err(_) => (String::new(), String::new()),
    };
    out.push_str(&format!("xi,{xi}\n"));
    out.push_str(&format!("theta,{theta}\n"));
    for (i, ev) in report.eigenvalues.iter().enumerate() {
        out.push_str(&format!(
            "eigenvalue_{}_re_rad_s,{}\n",
            i + 1,
            fmt(cfg.digits, ev.re)
        ));
        out.push_str(&format!(
            "eigenvalue_{}_im_rad_s,{}\n",
            i + 1,
            fmt(cfg.digits, ev.im)
        ));
    }
    Ok(out)
}
