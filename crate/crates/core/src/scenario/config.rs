//! Scenario configuration: a TOML file whose fields mirror [`ScenarioConfig`].
//!
//! Precedence is command-line flag, then file field, then the defaults below
//! (the reference market with `x1_0 = 0.5` and `T = {0.5, 1.5}`).

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::asym::SolverOptions;
use crate::equilibrium::ValidityAction;
use crate::error::{Error, Result};
use crate::mode::QuadMode;
use crate::model::MarketParams;
use crate::oracle::ResidualTolerances;
use crate::quad::Tolerance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Output {
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Trajectories,
    Report,
}

impl Output {
    pub fn name(self) -> &'static str {
        match self {
            Output::Fig3 => "fig3",
            Output::Fig4 => "fig4",
            Output::Fig5 => "fig5",
            Output::Fig6 => "fig6",
            Output::Trajectories => "trajectories",
            Output::Report => "report",
        }
    }
}

impl std::str::FromStr for Output {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig3" => Ok(Output::Fig3),
            "fig4" => Ok(Output::Fig4),
            "fig5" => Ok(Output::Fig5),
            "fig6" => Ok(Output::Fig6),
            "trajectories" => Ok(Output::Trajectories),
            "report" => Ok(Output::Report),
            other => Err(config_err("outputs", format!("unknown output `{other}`"))),
        }
    }
}

/// Sweep axes, in the order given by the user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    #[serde(rename = "T")]
    T,
    #[serde(rename = "eta")]
    Eta,
    #[serde(rename = "gamma")]
    Gamma,
    #[serde(rename = "x1_0")]
    X10,
    #[serde(rename = "rho")]
    Rho,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::T => "T",
            Axis::Eta => "eta",
            Axis::Gamma => "gamma",
            Axis::X10 => "x1_0",
            Axis::Rho => "rho",
        }
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "T" => Ok(Axis::T),
            "eta" => Ok(Axis::Eta),
            "gamma" => Ok(Axis::Gamma),
            "x1_0" => Ok(Axis::X10),
            "rho" => Ok(Axis::Rho),
            other => Err(config_err("sweep_axes", format!("unknown axis `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative tolerance of every adaptive quadrature.
    pub quadrature: f64,
    pub oracle_dt: f64,
    pub oracle_coefficient: f64,
    pub oracle_trajectory: f64,
    pub residual: ResidualTolerances,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            quadrature: 1e-8,
            oracle_dt: 1e-4,
            oracle_coefficient: 1e-3,
            oracle_trajectory: 5e-3,
            residual: ResidualTolerances::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub params: MarketParams,
    pub x1_0: f64,
    #[serde(rename = "T_values")]
    pub t_values: Vec<f64>,
    pub gamma_values: Vec<f64>,
    /// Extra axes of the revenue-gain figure and of sweeps; empty means the
    /// base value only.
    pub eta_values: Vec<f64>,
    pub x1_0_values: Vec<f64>,
    pub rho_values: Vec<f64>,
    pub c_a: f64,
    pub c_b: f64,
    pub c_bs: f64,
    pub grid: usize,
    /// Length of the sampled window after `T`.
    pub sym_tail: f64,
    pub outputs: Vec<Output>,
    pub sweep_axes: Vec<Axis>,
    pub tolerances: Tolerances,
    pub quad_mode: QuadMode,
    pub validity: ValidityAction,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            params: MarketParams::reference(),
            x1_0: 0.5,
            t_values: vec![0.5, 1.5],
            gamma_values: (0..=20).map(|i| i as f64 / 20.0).collect(),
            eta_values: Vec::new(),
            x1_0_values: Vec::new(),
            rho_values: Vec::new(),
            c_a: 0.1,
            c_b: 0.2,
            c_bs: 1.0,
            grid: 201,
            sym_tail: 10.0,
            outputs: vec![Output::Fig3],
            sweep_axes: vec![Axis::T],
            tolerances: Tolerances::default(),
            quad_mode: QuadMode::default(),
            validity: ValidityAction::default(),
        }
    }
}

pub(crate) fn config_err(path: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        path: path.into(),
        reason: reason.into(),
    }
}

fn check_list(path: &str, values: &[f64], ok: impl Fn(f64) -> bool, what: &str) -> Result<()> {
    for (i, &v) in values.iter().enumerate() {
        if !v.is_finite() || !ok(v) {
            return Err(config_err(&format!("{path}[{i}]"), format!("{v} is not {what}")));
        }
    }
    Ok(())
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| {
            let path = e
                .span()
                .map(|s| {
                    let line = text[..s.start].matches('\n').count() + 1;
                    format!("line {line}")
                })
                .unwrap_or_else(|| "<root>".into());
            config_err(&path, e.message().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(&path.display().to_string(), e.to_string()))?;
        Self::from_toml(&text)
    }

    /// Canonical serialization; the basis of [`ScenarioConfig::hash`].
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Hex SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !unit(self.x1_0) || !self.x1_0.is_finite() {
            return Err(config_err("x1_0", format!("{} is not in [0, 1]", self.x1_0)));
        }
        if self.t_values.is_empty() {
            return Err(config_err("T_values", "at least one deployment time is required"));
        }
        check_list("T_values", &self.t_values, |v| v >= 0.0, "a nonnegative time")?;
        check_list("gamma_values", &self.gamma_values, unit, "in [0, 1]")?;
        check_list("eta_values", &self.eta_values, |v| (0.0..1.0).contains(&v), "in [0, 1)")?;
        check_list("x1_0_values", &self.x1_0_values, unit, "in [0, 1]")?;
        check_list("rho_values", &self.rho_values, |v| v > 0.0, "positive")?;
        for (name, v) in [("c_a", self.c_a), ("c_b", self.c_b), ("c_bs", self.c_bs)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(config_err(name, format!("{v} is not a nonnegative cost")));
            }
        }
        if self.grid < SolverOptions::MIN_GRID {
            return Err(config_err(
                "grid",
                format!("{} is below the minimum of {}", self.grid, SolverOptions::MIN_GRID),
            ));
        }
        if !(self.sym_tail > 0.0) || !self.sym_tail.is_finite() {
            return Err(config_err("sym_tail", "must be positive"));
        }
        if self.outputs.is_empty() {
            return Err(config_err("outputs", "at least one output is required"));
        }
        let t = &self.tolerances;
        let positive = [
            ("tolerances.quadrature", t.quadrature),
            ("tolerances.oracle_dt", t.oracle_dt),
            ("tolerances.oracle_coefficient", t.oracle_coefficient),
            ("tolerances.oracle_trajectory", t.oracle_trajectory),
            ("tolerances.residual.foc", t.residual.foc),
            ("tolerances.residual.adjoint", t.residual.adjoint),
            ("tolerances.residual.boundary", t.residual.boundary),
            ("tolerances.residual.ode", t.residual.ode),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(config_err(name, format!("{v} must be positive")));
            }
        }
        Ok(())
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            grid: self.grid,
            mode: self.quad_mode,
            tolerance: Tolerance::with_rel(self.tolerances.quadrature),
            validity: self.validity,
        }
    }

    pub fn etas(&self) -> Vec<f64> {
        or_base(&self.eta_values, self.params.eta())
    }
    pub fn x1_0s(&self) -> Vec<f64> {
        or_base(&self.x1_0_values, self.x1_0)
    }
    pub fn rhos(&self) -> Vec<f64> {
        or_base(&self.rho_values, self.params.rho())
    }
    pub fn gammas(&self) -> Vec<f64> {
        or_base(&self.gamma_values, 0.0)
    }
}

fn or_base(values: &[f64], base: f64) -> Vec<f64> {
    if values.is_empty() {
        vec![base]
    } else {
        values.to_vec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips() {
        let cfg = ScenarioConfig::default();
        let back = ScenarioConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, back);
        assert_eq!(cfg.hash(), back.hash());
        assert_eq!(cfg.hash().len(), 64);
    }

    #[test]
    fn partial_file_uses_defaults() {
        let cfg = ScenarioConfig::from_toml("x1_0 = 0.6\noutputs = [\"fig5\"]\n").unwrap();
        assert_eq!(cfg.x1_0, 0.6);
        assert_eq!(cfg.params, MarketParams::reference());
        assert_eq!(cfg.outputs, vec![Output::Fig5]);
    }

    #[test]
    fn empty_t_values_rejected() {
        let err = ScenarioConfig::from_toml("T_values = []\n").unwrap_err();
        assert!(matches!(err, Error::Config { ref path, .. } if path == "T_values"), "{err}");
    }

    #[test]
    fn bad_list_entry_names_its_index() {
        let err = ScenarioConfig::from_toml("gamma_values = [0.0, 1.5]\n").unwrap_err();
        assert!(matches!(err, Error::Config { ref path, .. } if path == "gamma_values[1]"));
    }

    #[test]
    fn invalid_params_rejected() {
        let text = "[params]\nu0 = 10.0\neta = 0.5\nrho = 0.5\ns_lo = 12.0\ns_hi = 10.0\n";
        assert!(ScenarioConfig::from_toml(text).is_err());
    }

    #[test]
    fn unknown_field_rejected() {
        assert!(ScenarioConfig::from_toml("bogus = 1\n").is_err());
    }

    #[test]
    fn hash_changes_with_content() {
        let a = ScenarioConfig::default();
        let b = ScenarioConfig {
            x1_0: 0.6,
            ..ScenarioConfig::default()
        };
        assert_ne!(a.hash(), b.hash());
    }
}
