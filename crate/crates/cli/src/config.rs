//! Run configuration: a TOML file plus `--set key=value` overrides.

use std::path::PathBuf;

use cavity_selforg_core::steady_state::SolverOptions;
use cavity_selforg_core::ModelParams;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: ParamsConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub spectrum: SpectrumConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_diagram: Option<PhaseDiagramConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Model constants in recoil units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub u0: f64,
    #[serde(default)]
    pub g: f64,
    pub delta_c: f64,
    pub kappa: f64,
    #[serde(default)]
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n_points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n_points: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub dtau: f64,
    pub max_iter: usize,
    pub tol_psi: f64,
    pub tol_mu: f64,
    pub seed_epsilon: f64,
    pub seed_sign: f64,
    pub newton_polish: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let o = SolverOptions::default();
        Self {
            dtau: o.dtau,
            max_iter: o.max_iter,
            tol_psi: o.tol_psi,
            tol_mu: o.tol_mu,
            seed_epsilon: o.seed_epsilon,
            seed_sign: o.seed_sign,
            newton_polish: o.newton_polish,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Eta,
    U0,
    G,
    DeltaC,
    Kappa,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Eta => "eta",
            Axis::U0 => "u0",
            Axis::G => "g",
            Axis::DeltaC => "delta_c",
            Axis::Kappa => "kappa",
        }
    }

    pub fn apply(self, p: ModelParams, value: f64) -> ModelParams {
        match self {
            Axis::Eta => ModelParams { eta: value, ..p },
            Axis::U0 => ModelParams { u0: value, ..p },
            Axis::G => ModelParams { g: value, ..p },
            Axis::DeltaC => ModelParams { delta_c: value, ..p },
            Axis::Kappa => ModelParams { kappa: value, ..p },
        }
    }
}

/// One swept parameter, given either as an explicit list or as an inclusive
/// `start..=stop` range with a fixed step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: Axis,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
}

const MAX_SWEEP_POINTS: usize = 1_000_000;

impl SweepConfig {
    /// Axis values in ascending order.
    pub fn resolve(&self) -> Result<Vec<f64>, CliError> {
        let mut values = match (&self.values, self.start, self.stop, self.step) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(start), Some(stop), Some(step)) => {
                if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
                    return Err(CliError::Config("sweep needs finite start <= stop and step > 0".into()));
                }
                let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
                if count > MAX_SWEEP_POINTS {
                    return Err(CliError::Config(format!("sweep has {count} points, more than {MAX_SWEEP_POINTS}")));
                }
                (0..count).map(|k| start + step * k as f64).collect()
            }
            _ => {
                return Err(CliError::Config(
                    "sweep needs either `values` or all of `start`, `stop`, `step`".into(),
                ))
            }
        };
        if values.is_empty() {
            return Err(CliError::Config("sweep has no values".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CliError::Config("sweep values must be finite".into()));
        }
        values.sort_by(f64::total_cmp);
        Ok(values)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    /// Number of condensate branches reported.
    pub modes: usize,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self { modes: 6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseDiagramConfig {
    pub u0_abs_min: f64,
    pub u0_abs_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    JsonLines,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Destination file; standard output when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

impl RunConfig {
    pub fn load(text: &str, overrides: &[String]) -> Result<Self, CliError> {
        let mut table: toml::Table = text.parse().map_err(|e| CliError::Config(format!("{e}")))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let config: RunConfig = table.try_into().map_err(|e| CliError::Config(format!("{e}")))?;
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), CliError> {
        self.model_params()?;
        self.solver_options().validate().map_err(|e| CliError::Config(e.to_string()))?;
        if self.grid.n_points < 4 {
            return Err(CliError::Config("grid.n_points must be at least 4".into()));
        }
        if self.spectrum.modes == 0 {
            return Err(CliError::Config("spectrum.modes must be positive".into()));
        }
        if let Some(sweep) = &self.sweep {
            sweep.resolve()?;
        }
        Ok(())
    }

    pub fn model_params(&self) -> Result<ModelParams, CliError> {
        let p = &self.params;
        ModelParams::new(p.u0, p.g, p.delta_c, p.kappa, p.eta).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn solver_options(&self) -> SolverOptions {
        let s = &self.solver;
        SolverOptions {
            dtau: s.dtau,
            max_iter: s.max_iter,
            tol_psi: s.tol_psi,
            tol_mu: s.tol_mu,
            seed_epsilon: s.seed_epsilon,
            seed_sign: s.seed_sign,
            newton_polish: s.newton_polish,
        }
    }

    /// The configured sweep, requiring one.
    pub fn sweep(&self) -> Result<(Axis, Vec<f64>), CliError> {
        let sweep = self
            .sweep
            .as_ref()
            .ok_or_else(|| CliError::Config("this command needs a [sweep] section".into()))?;
        Ok((sweep.axis, sweep.resolve()?))
    }

    /// Canonical TOML text of the resolved configuration.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always serializable")
    }
}

/// Sets a dotted key such as `params.eta` to a TOML value, creating
/// intermediate tables as needed. Values that do not parse as TOML are taken
/// as strings.
fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{assignment}` is not of the form key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key just parsed"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!("override key `{key}` is malformed")));
    }
    let (last, path) = parts.split_last().expect("split never yields nothing");
    let mut current = table;
    for part in path {
        let entry = current
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        current = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("override key `{key}`: `{part}` is not a section")))?;
    }
    current.insert(last.to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "[params]\nu0 = -100\ng = 10\ndelta_c = -300\nkappa = 200\n";

    #[test]
    fn defaults_fill_in() {
        let c = RunConfig::load(BASE, &[]).unwrap();
        assert_eq!(c.grid.n_points, 200);
        assert_eq!(c.params.eta, 0.0);
        assert_eq!(c.solver_options(), SolverOptions::default());
    }

    #[test]
    fn overrides_create_sections_and_parse_types() {
        let c = RunConfig::load(
            BASE,
            &[
                "params.eta=100".into(),
                "sweep.axis = eta".into(),
                "sweep.values=[3, 1, 2]".into(),
                "output.format=json-lines".into(),
            ],
        )
        .unwrap();
        assert_eq!(c.params.eta, 100.0);
        assert_eq!(c.sweep().unwrap(), (Axis::Eta, vec![1.0, 2.0, 3.0]));
        assert_eq!(c.output.format, Format::JsonLines);
    }

    #[test]
    fn ranges_are_inclusive() {
        let c = RunConfig::load(BASE, &["sweep.axis=\"u0\"".into(), "sweep.start=40".into(), "sweep.stop=90".into(), "sweep.step=0.5".into()]).unwrap();
        let (axis, v) = c.sweep().unwrap();
        assert_eq!(axis, Axis::U0);
        assert_eq!(v.len(), 101);
        assert_eq!(v[100], 90.0);
    }

    #[test]
    fn bad_configs_are_rejected() {
        for (text, o) in [
            ("[params]\nu0 = -100\n", vec![]),
            (BASE, vec!["params.colour=1".to_string()]),
            (BASE, vec!["params.kappa=-1".to_string()]),
            (BASE, vec!["sweep.axis=eta".to_string()]),
            (BASE, vec!["grid.n_points=2".to_string()]),
            (BASE, vec!["noequals".to_string()]),
            ("not toml [", vec![]),
        ] {
            assert!(matches!(RunConfig::load(text, &o), Err(CliError::Config(_))), "{text} {o:?}");
        }
    }

    #[test]
    fn canonical_text_round_trips() {
        let c = RunConfig::load(BASE, &["sweep.axis=eta".into(), "sweep.values=[1.5, 2]".into()]).unwrap();
        assert_eq!(RunConfig::load(&c.to_toml(), &[]).unwrap(), c);
    }
}
