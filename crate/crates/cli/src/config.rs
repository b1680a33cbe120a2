//! JSON scenario configuration.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_6};
use std::path::Path;

use reachtime::design::DesignOptions;
use reachtime::linalg::Matrix;
use reachtime::model::{make_rov_plant, make_servoing_plant, ControlKind, DisturbanceSpec, PlantSelection, RovParams};
use reachtime::sdp::SolverOptions;
use reachtime::search::LineSearchOptions;
use reachtime::sim::SimConfig;
use reachtime::PolytopicPlant;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// How the plant polytope is built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "builder", rename_all = "snake_case", deny_unknown_fields)]
pub enum PlantSpec {
    /// Planar visual servoing with an uncertain camera rotation [rad].
    Servoing {
        #[serde(default = "default_phi_bar")]
        phi_bar: f64,
        #[serde(default = "default_delta_bar")]
        delta_bar: f64,
    },
    /// Over-actuated ROV with uncertain thruster gains.
    Rov {
        #[serde(default)]
        params: RovParams<f64>,
    },
    /// Explicit vertex list, each `n × m` given as rows.
    Inline { vertices: Vec<Matrix<f64>> },
}

fn default_phi_bar() -> f64 {
    FRAC_PI_6
}

fn default_delta_bar() -> f64 {
    FRAC_PI_4
}

impl PlantSpec {
    pub fn build(&self, delta: f64) -> reachtime::Result<PolytopicPlant> {
        match self {
            PlantSpec::Servoing { phi_bar, delta_bar } => make_servoing_plant(*phi_bar, *delta_bar, delta),
            PlantSpec::Rov { params } => make_rov_plant(params, delta),
            PlantSpec::Inline { vertices } => PolytopicPlant::new(vertices.clone(), delta),
        }
    }
}

/// Which polytope members `simulate` runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationPlan {
    /// Run every vertex.
    pub vertices: bool,
    /// Extra members, each a vertex index, a simplex weight or a matrix.
    pub members: Vec<PlantSelection<f64>>,
    /// Additional members drawn uniformly from the simplex.
    pub random_weights: usize,
}

impl Default for SimulationPlan {
    fn default() -> Self {
        Self {
            vertices: true,
            members: Vec::new(),
            random_weights: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub plant: PlantSpec,
    pub sigma0: Vec<f64>,
    #[serde(default)]
    pub delta: f64,
    /// Control budget; `null` drops the control-bounding constraint.
    #[serde(default)]
    pub alpha_u: Option<f64>,
    pub kind: ControlKind,
    #[serde(default = "default_rho_range")]
    pub rho_range: (f64, f64),
    /// Points of the `ρ` grid used by `sweep-rho`.
    #[serde(default = "default_sweep_points")]
    pub sweep_points: usize,
    #[serde(default)]
    pub solver: SolverOptions<f64>,
    #[serde(default)]
    pub line_search: LineSearchOptions,
    /// Random members at which the unscaled inequality is audited.
    #[serde(default = "default_audit_samples")]
    pub audit_samples: usize,
    #[serde(default)]
    pub sim: SimConfig<f64>,
    /// Disturbance used in simulation; zero when absent.
    #[serde(default)]
    pub disturbance: Option<DisturbanceSpec<f64>>,
    #[serde(default)]
    pub simulate: SimulationPlan,
    /// Gain to simulate instead of a synthesized one (`m × n`).
    #[serde(default)]
    pub gain: Option<Matrix<f64>>,
    #[serde(default)]
    pub seed: u64,
    /// Output directory; `--out` takes precedence.
    #[serde(default)]
    pub out_dir: Option<String>,
}

fn default_rho_range() -> (f64, f64) {
    reachtime::cases::RHO_RANGE
}

fn default_sweep_points() -> usize {
    40
}

fn default_audit_samples() -> usize {
    50
}

/// Command-line values that override the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub dt: Option<f64>,
    pub horizon: Option<f64>,
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(dt) = o.dt {
            self.sim.dt = dt;
        }
        if let Some(h) = o.horizon {
            self.sim.horizon = h;
        }
    }

    /// Builds the plant and checks everything that does not need a solve.
    pub fn validate(&self) -> Result<PolytopicPlant, CliError> {
        let plant = self.plant()?;
        if self.sigma0.len() != plant.n() || self.sigma0.iter().any(|v| !v.is_finite()) {
            return Err(CliError::Config(format!(
                "sigma0 must hold {} finite numbers, got {:?}",
                plant.n(),
                self.sigma0
            )));
        }
        if let Some(a) = self.alpha_u {
            if !(a > 0.0 && a.is_finite()) {
                return Err(CliError::Config(format!("alpha_u must be positive, got {a}")));
            }
        }
        let (lo, hi) = self.rho_range;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(CliError::Config(format!(
                "rho_range [{lo}, {hi}] must satisfy 0 < lo <= hi"
            )));
        }
        if self.sweep_points == 0 {
            return Err(CliError::Config("sweep_points must be at least 1".into()));
        }
        self.sim.validate().map_err(|e| CliError::Config(e.to_string()))?;
        let f = self.disturbance();
        f.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if f.dim() != plant.n() {
            return Err(CliError::Config(format!(
                "disturbance has {} channels, plant has n = {}",
                f.dim(),
                plant.n()
            )));
        }
        if f.bound > self.delta * (1.0 + 1e-12) {
            return Err(CliError::Config(format!(
                "disturbance bound {} exceeds delta {}",
                f.bound, self.delta
            )));
        }
        if let Some(k) = &self.gain {
            if k.shape() != (plant.m(), plant.n()) {
                return Err(CliError::Config(format!(
                    "gain is {}x{}, plant needs {}x{}",
                    k.rows(),
                    k.cols(),
                    plant.m(),
                    plant.n()
                )));
            }
        }
        Ok(plant)
    }

    pub fn plant(&self) -> Result<PolytopicPlant, CliError> {
        self.plant
            .build(self.delta)
            .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn disturbance(&self) -> DisturbanceSpec<f64> {
        self.disturbance
            .clone()
            .unwrap_or_else(|| DisturbanceSpec::zero(self.sigma0.len()))
    }

    pub fn design_options(&self) -> DesignOptions<f64> {
        DesignOptions {
            solver: self.solver.clone(),
            line_search: self.line_search,
            audit_samples: self.audit_samples,
            seed: self.seed,
            ..DesignOptions::default()
        }
    }
}
