//! Flat `key = value` run configuration: parsing, rendering, and the
//! mapping to validated physical parameters.
//!
//! Frequencies in the file are ordinary frequencies in Hz and are
//! converted to angular units at this boundary; powers are W, masses
//! kg, lengths m, temperatures K.

use std::path::PathBuf;

use ponder_core::constants::{SPEED_OF_LIGHT, TWO_PI};
use ponder_core::spectral::ThermalConvention;
use ponder_core::SystemParams;

use crate::CliError;

/// Physical inputs in the units the config file uses.
#[derive(Debug, Clone, PartialEq)]
pub struct RawParams {
    pub mirror_frequency_hz: f64,
    pub mirror_damping_hz: f64,
    pub mass_kg: f64,
    /// Exactly one of `wavelength_m` / `cavity_frequency_hz` is set.
    pub wavelength_m: Option<f64>,
    pub cavity_frequency_hz: Option<f64>,
    pub cavity_linewidth_hz: f64,
    pub cavity_length_m: f64,
    pub carrier_power_w: f64,
    pub subcarrier_power_w: f64,
    pub detuning_1_hz: f64,
    pub detuning_2_hz: f64,
    pub temperature_k: f64,
}

impl Default for RawParams {
    fn default() -> Self {
        RawParams {
            mirror_frequency_hz: 1.0,
            mirror_damping_hz: 1e-6,
            mass_kg: 0.5e-3,
            wavelength_m: Some(1.064e-6),
            cavity_frequency_hz: None,
            cavity_linewidth_hz: 9.5e3,
            cavity_length_m: 1.0,
            carrier_power_w: 5.0,
            subcarrier_power_w: 0.3,
            detuning_1_hz: -28.5e3,
            detuning_2_hz: 4.75e3,
            temperature_k: 300.0,
        }
    }
}

impl RawParams {
    /// Converts to SI angular-frequency parameters and validates them.
    pub fn system_params(&self) -> Result<SystemParams, CliError> {
        let omega_c = match (self.wavelength_m, self.cavity_frequency_hz) {
            (Some(lambda), None) => {
                if lambda <= 0.0 {
                    return Err(CliError::Config(format!(
                        "wavelength must be > 0, got {lambda}"
                    )));
                }
                TWO_PI * SPEED_OF_LIGHT / lambda
            }
            (None, Some(f)) => TWO_PI * f,
            _ => {
                return Err(CliError::Config(
                    "exactly one of wavelength / cavity_frequency must be set".into(),
                ))
            }
        };
        SystemParams {
            omega_m: TWO_PI * self.mirror_frequency_hz,
            gamma_m: TWO_PI * self.mirror_damping_hz,
            mass: self.mass_kg,
            omega_c,
            gamma_c: TWO_PI * self.cavity_linewidth_hz,
            length: self.cavity_length_m,
            input_power: [self.carrier_power_w, self.subcarrier_power_w],
            detuning: [TWO_PI * self.detuning_1_hz, TWO_PI * self.detuning_2_hz],
            temperature: self.temperature_k,
        }
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))
    }
}

/// The kind of experiment a run executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RunKind {
    #[default]
    Spectrum,
    TempSweep,
    ThetaMap,
    Intracavity,
    StabilityReport,
}

impl RunKind {
    pub fn parse(s: &str) -> Option<RunKind> {
        match s {
            "spectrum" => Some(RunKind::Spectrum),
            "temp-sweep" => Some(RunKind::TempSweep),
            "theta-map" => Some(RunKind::ThetaMap),
            "intracavity" => Some(RunKind::Intracavity),
            "stability-report" => Some(RunKind::StabilityReport),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RunKind::Spectrum => "spectrum",
            RunKind::TempSweep => "temp-sweep",
            RunKind::ThetaMap => "theta-map",
            RunKind::Intracavity => "intracavity",
            RunKind::StabilityReport => "stability-report",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridScale {
    Linear,
    Log,
}

/// Evaluation grid: `points` values from `min` to `max`, spaced
/// linearly or logarithmically. The unit depends on the run kind
/// (Hz for spectra, K for temperature sweeps, Θ−1 for the map).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub scale: GridScale,
}

impl GridSpec {
    pub fn parse(s: &str) -> Result<GridSpec, String> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(format!("grid must be `min,max,points,lin|log`, got `{s}`"));
        }
        let min: f64 = parts[0].parse().map_err(|_| format!("bad grid min `{}`", parts[0]))?;
        let max: f64 = parts[1].parse().map_err(|_| format!("bad grid max `{}`", parts[1]))?;
        let points: usize = parts[2]
            .parse()
            .map_err(|_| format!("bad grid point count `{}`", parts[2]))?;
        let scale = match parts[3] {
            "lin" => GridScale::Linear,
            "log" => GridScale::Log,
            other => return Err(format!("grid scale must be lin or log, got `{other}`")),
        };
        let spec = GridSpec {
            min,
            max,
            points,
            scale,
        };
        spec.check()?;
        Ok(spec)
    }

    pub fn check(&self) -> Result<(), String> {
        if !(self.min.is_finite() && self.max.is_finite()) {
            return Err("grid bounds must be finite".into());
        }
        if self.min >= self.max {
            return Err(format!("grid min {} must be < max {}", self.min, self.max));
        }
        if self.points < 2 {
            return Err(format!("grid needs at least 2 points, got {}", self.points));
        }
        if self.scale == GridScale::Log && self.min <= 0.0 {
            return Err("log grid requires min > 0".into());
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                match self.scale {
                    GridScale::Linear => self.min + (self.max - self.min) * t,
                    GridScale::Log => self.min * (self.max / self.min).powf(t),
                }
            })
            .collect()
    }

    fn render(&self) -> String {
        let scale = match self.scale {
            GridScale::Linear => "lin",
            GridScale::Log => "log",
        };
        format!("{},{},{},{}", self.min, self.max, self.points, scale)
    }
}

/// Which rows of an intra-cavity sweep get the Lyapunov-vs-integration
/// cross-check (it costs an adaptive frequency integration per row).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CrosscheckRows {
    #[default]
    FirstLast,
    All,
    None,
}

/// A fully specified run: physical parameters, experiment kind, grid,
/// conventions and output formatting.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: RawParams,
    pub run: RunKind,
    pub grid: Option<GridSpec>,
    pub convention: ThermalConvention,
    pub crosscheck: CrosscheckRows,
    pub output: Option<PathBuf>,
    /// Significant digits in CSV output.
    pub digits: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: RawParams::default(),
            run: RunKind::default(),
            grid: None,
            convention: ThermalConvention::default(),
            crosscheck: CrosscheckRows::default(),
            output: None,
            digits: 12,
        }
    }
}

impl RunConfig {
    /// Grid to use for a run kind when the config does not set one.
    pub fn effective_grid(&self) -> GridSpec {
        self.grid.unwrap_or(match self.run {
            RunKind::Spectrum | RunKind::StabilityReport => GridSpec {
                min: 10.0,
                max: 5e4,
                points: 500,
                scale: GridScale::Log,
            },
            RunKind::TempSweep => GridSpec {
                min: 0.3,
                max: 300.0,
                points: 4,
                scale: GridScale::Log,
            },
            RunKind::ThetaMap => GridSpec {
                min: 1e-2,
                max: 10.0,
                points: 40,
                scale: GridScale::Log,
            },
            RunKind::Intracavity => GridSpec {
                min: 1e-3,
                max: 300.0,
                points: 7,
                scale: GridScale::Log,
            },
        })
    }
}

pub fn parse_convention(s: &str) -> Result<ThermalConvention, String> {
    match s {
        "paper" => Ok(ThermalConvention::PaperLiteral),
        "symmetrized" => Ok(ThermalConvention::Symmetrized),
        other => Err(format!("convention must be paper or symmetrized, got `{other}`")),
    }
}

fn convention_name(c: ThermalConvention) -> &'static str {
    match c {
        ThermalConvention::PaperLiteral => "paper",
        ThermalConvention::Symmetrized => "symmetrized",
    }
}

/// Parses the flat `key = value` format: one pair per line, `#` starts
/// a comment, unknown and duplicate keys are rejected with their line
/// number.
pub fn parse_config(source: &str) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    let mut seen: Vec<String> = Vec::new();
    let mut wavelength_touched = false;
    for (lineno, raw_line) in source.lines().enumerate() {
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Config(format!("line {}: expected `key = value`, got `{line}`", lineno + 1))
        })?;
        let key = key.trim();
        let value = value.trim();
        if seen.iter().any(|k| k == key) {
            return Err(CliError::Config(format!(
                "line {}: duplicate key `{key}`",
                lineno + 1
            )));
        }
        seen.push(key.to_string());
        apply_key(&mut cfg, &mut wavelength_touched, key, value)
            .map_err(|msg| CliError::Config(format!("line {}: {msg}", lineno + 1)))?;
    }
    Ok(cfg)
}

/// Applies one `key=value` override (the `--set` mechanism).
pub fn apply_override(cfg: &mut RunConfig, pair: &str) -> Result<(), CliError> {
    let (key, value) = pair
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("--set expects key=value, got `{pair}`")))?;
    let mut wavelength_touched = false;
    apply_key(cfg, &mut wavelength_touched, key.trim(), value.trim())
        .map_err(CliError::Config)
}

fn parse_f64(key: &str, value: &str) -> Result<f64, String> {
    let v: f64 = value
        .parse()
        .map_err(|_| format!("value `{value}` for `{key}` is not a number"))?;
    if !v.is_finite() {
        return Err(format!("value for `{key}` must be finite, got {v}"));
    }
    Ok(v)
}

fn apply_key(
    cfg: &mut RunConfig,
    wavelength_touched: &mut bool,
    key: &str,
    value: &str,
) -> Result<(), String> {
    match key {
        "mirror_frequency" => cfg.params.mirror_frequency_hz = parse_f64(key, value)?,
        "mirror_damping" => cfg.params.mirror_damping_hz = parse_f64(key, value)?,
        "mass" => cfg.params.mass_kg = parse_f64(key, value)?,
        "wavelength" => {
            if cfg.params.cavity_frequency_hz.is_some() {
                return Err("wavelength conflicts with cavity_frequency".into());
            }
            cfg.params.wavelength_m = Some(parse_f64(key, value)?);
            *wavelength_touched = true;
        }
        "cavity_frequency" => {
            if *wavelength_touched {
                return Err("cavity_frequency conflicts with wavelength".into());
            }
            cfg.params.cavity_frequency_hz = Some(parse_f64(key, value)?);
            cfg.params.wavelength_m = None;
        }
        "cavity_linewidth" => cfg.params.cavity_linewidth_hz = parse_f64(key, value)?,
        "cavity_length" => cfg.params.cavity_length_m = parse_f64(key, value)?,
        "carrier_power" => cfg.params.carrier_power_w = parse_f64(key, value)?,
        "subcarrier_power" => cfg.params.subcarrier_power_w = parse_f64(key, value)?,
        "detuning_1" => cfg.params.detuning_1_hz = parse_f64(key, value)?,
        "detuning_2" => cfg.params.detuning_2_hz = parse_f64(key, value)?,
        "temperature" => cfg.params.temperature_k = parse_f64(key, value)?,
        "run" => {
            cfg.run = RunKind::parse(value)
                .ok_or_else(|| format!("unknown run kind `{value}`"))?
        }
        "grid" => cfg.grid = Some(GridSpec::parse(value)?),
        "convention" => cfg.convention = parse_convention(value)?,
        "crosscheck" => {
            cfg.crosscheck = match value {
                "first-last" => CrosscheckRows::FirstLast,
                "all" => CrosscheckRows::All,
                "none" => CrosscheckRows::None,
                other => return Err(format!("crosscheck must be first-last, all or none, got `{other}`")),
            }
        }
        "output" => cfg.output = Some(PathBuf::from(value)),
        "digits" => {
            let d: usize = value
                .parse()
                .map_err(|_| format!("value `{value}` for `digits` is not an integer"))?;
            if !(1..=17).contains(&d) {
                return Err(format!("digits must be in 1..=17, got {d}"));
            }
            cfg.digits = d;
        }
        other => return Err(format!("unknown key `{other}`")),
    }
    Ok(())
}

/// Renders the effective configuration in the same `key = value`
/// format; `parse_config(render_config(cfg))` reproduces `cfg` exactly
/// (floats print in shortest round-trip form).
pub fn render_config(cfg: &RunConfig) -> String {
    let p = &cfg.params;
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        out.push_str(k);
        out.push_str(" = ");
        out.push_str(&v);
        out.push('\n');
    };
    kv("run", cfg.run.name().to_string());
    kv("mirror_frequency", format!("{}", p.mirror_frequency_hz));
    kv("mirror_damping", format!("{}", p.mirror_damping_hz));
    kv("mass", format!("{}", p.mass_kg));
    match (p.wavelength_m, p.cavity_frequency_hz) {
        (Some(w), _) => kv("wavelength", format!("{w}")),
        (None, Some(f)) => kv("cavity_frequency", format!("{f}")),
        (None, None) => {}
    }
    kv("cavity_linewidth", format!("{}", p.cavity_linewidth_hz));
    kv("cavity_length", format!("{}", p.cavity_length_m));
    kv("carrier_power", format!("{}", p.carrier_power_w));
    kv("subcarrier_power", format!("{}", p.subcarrier_power_w));
    kv("detuning_1", format!("{}", p.detuning_1_hz));
    kv("detuning_2", format!("{}", p.detuning_2_hz));
    kv("temperature", format!("{}", p.temperature_k));
    if let Some(grid) = cfg.grid {
        kv("grid", grid.render());
    }
    kv("convention", convention_name(cfg.convention).to_string());
    if cfg.crosscheck != CrosscheckRows::FirstLast {
        kv(
            "crosscheck",
            match cfg.crosscheck {
                CrosscheckRows::FirstLast => "first-last",
                CrosscheckRows::All => "all",
                CrosscheckRows::None => "none",
            }
            .to_string(),
        );
    }
    if let Some(path) = &cfg.output {
        kv("output", path.display().to_string());
    }
    kv("digits", format!("{}", cfg.digits));
    out
}
