//! JSON run report.

use std::path::Path;

use reachtime::certificate::Certificate;
use reachtime::model::{DisturbanceSpec, PlantSelection};
use reachtime::sim::AuditReport;
use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub version: String,
    /// `ok`, or the failure class (`config_error`, `infeasible`, ...).
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Case id for `reproduce`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub case: Option<String>,
    /// The configuration actually used, defaults filled in.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<ScenarioConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate<f64>>,
    /// Smallest block margin of the certificate after a JSON round trip.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recheck_margin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<Diagnostics>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub simulations: Vec<SimulationRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparison: Option<Comparison>,
    /// Wall-clock phases in milliseconds; omitted under `--fixed-clock`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            status: "ok".to_string(),
            error: None,
            case: None,
            input: None,
            certificate: None,
            recheck_margin: None,
            diagnostics: None,
            simulations: Vec::new(),
            sweep: None,
            comparison: None,
            timings: None,
        }
    }

    pub fn fail(&mut self, err: &CliError) {
        self.status = err.status().to_string();
        self.error = Some(err.to_string());
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub solver_iterations: usize,
    pub relative_gap: f64,
    pub min_block_margin: f64,
    /// Condition number of the Lyapunov-matrix inverse used for `K`.
    pub condition: f64,
    pub conditioning_warning: bool,
    pub audit_samples: usize,
    /// Largest eigenvalue of the unscaled decrease condition over the
    /// audit samples (negative means certified).
    pub audit_worst_eigenvalue: f64,
}

impl Diagnostics {
    pub fn of(cert: &Certificate<f64>) -> Self {
        let (solve, condition, warn, audit) = match cert {
            Certificate::Vsc(c) => (&c.solve, c.zd_condition, c.conditioning_warning, &c.robustness),
            Certificate::Uvc(c) => (&c.solve, c.z_condition, c.conditioning_warning, &c.robustness),
        };
        Self {
            solver_iterations: solve.iterations,
            relative_gap: solve.relative_gap,
            min_block_margin: solve.min_block_margin,
            condition,
            conditioning_warning: warn,
            audit_samples: audit.samples,
            audit_worst_eigenvalue: audit.worst_max_eig,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationRecord {
    pub label: String,
    pub selection: PlantSelection<f64>,
    pub disturbance: DisturbanceSpec<f64>,
    pub reaching_time: Option<f64>,
    pub max_control_norm: Option<f64>,
    /// Present when the gain came with a certificate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audit: Option<AuditReport<f64>>,
    /// Trajectory file, relative to the output directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub csv: String,
    pub points: usize,
    pub feasible: usize,
    pub best_rho: Option<f64>,
    pub best_theta: Option<f64>,
    pub unimodal: bool,
}

/// Reference figures next to the computed ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub reference_bound: f64,
    pub computed_bound: f64,
    pub relative_error: f64,
    pub reference_rho: Option<f64>,
    pub computed_rho: Option<f64>,
    pub reference_reach: Option<f64>,
    /// Latest reaching time over the simulated members.
    pub simulated_reach: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub synthesis_ms: f64,
    pub simulation_ms: f64,
    pub total_ms: f64,
}
