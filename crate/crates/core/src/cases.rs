//! The two reference design examples: a planar visual-servoing loop with an
//! uncalibrated camera rotation, and an over-actuated ROV with uncertain
//! thruster gains. Each case carries a reference bound for comparison.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_6};

use serde::{Deserialize, Serialize};

use crate::certificate::Certificate;
use crate::design::DesignOptions;
use crate::error::{Error, Result};
use crate::model::{make_rov_plant, make_servoing_plant, ControlKind, DisturbanceSpec, PolytopicPlant, RovParams};
use crate::uvc::synthesize_uvc;
use crate::vsc::synthesize_vsc;

/// Nominal camera rotation [rad].
pub const SERVOING_PHI_BAR: f64 = FRAC_PI_6;
/// Rotation uncertainty `|Δφ| ≤ Δ̄` [rad].
pub const SERVOING_DELTA_BAR: f64 = FRAC_PI_4;
pub const SERVOING_ALPHA_U: f64 = 20.0;
pub const SERVOING_SIGMA0: [f64; 2] = [1.0, 1.0];
/// Bound of the servoing disturbance `√2 [sin 5t, sin 2t]`.
pub const SERVOING_DELTA: f64 = 2.0;
pub const ROV_ALPHA_U: f64 = 1e3;
pub const ROV_SIGMA0: [f64; 3] = [1.0, 1.0, FRAC_PI_4];
/// Default line-search range for `ρ`.
pub const RHO_RANGE: (f64, f64) = (0.5, 20.0);

pub const CASE_IDS: [&str; 6] = [
    "servoing-vsc-d0",
    "servoing-uvc-d0",
    "servoing-vsc-d2",
    "servoing-uvc-d2",
    "rov-vsc",
    "rov-uvc",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Servoing,
    Rov,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceCase {
    pub id: String,
    pub scenario: Scenario,
    pub kind: ControlKind,
    pub delta: f64,
    pub alpha_u: f64,
    pub sigma0: Vec<f64>,
    pub rho_range: (f64, f64),
    /// Reference reaching-time bound.
    pub reference_bound: f64,
    /// `ρ` at which the reference UVC bound was obtained.
    pub reference_rho: Option<f64>,
    /// Reference simulated reaching time, where one was reported.
    pub reference_reach: Option<f64>,
}

pub fn reference_case(id: &str) -> Result<ReferenceCase> {
    let servoing = |kind, delta, bound, rho, reach| ReferenceCase {
        id: id.to_string(),
        scenario: Scenario::Servoing,
        kind,
        delta,
        alpha_u: SERVOING_ALPHA_U,
        sigma0: SERVOING_SIGMA0.to_vec(),
        rho_range: RHO_RANGE,
        reference_bound: bound,
        reference_rho: rho,
        reference_reach: reach,
    };
    let rov = |kind, bound, rho| ReferenceCase {
        id: id.to_string(),
        scenario: Scenario::Rov,
        kind,
        delta: 0.0,
        alpha_u: ROV_ALPHA_U,
        sigma0: ROV_SIGMA0.to_vec(),
        rho_range: (0.2, 20.0),
        reference_bound: bound,
        reference_rho: rho,
        reference_reach: None,
    };
    Ok(match id {
        "servoing-vsc-d0" => servoing(ControlKind::Vsc, 0.0, 0.4309, None, Some(0.21)),
        "servoing-uvc-d0" => servoing(ControlKind::Uvc, 0.0, 0.3764, Some(4.0), Some(0.37)),
        "servoing-vsc-d2" => servoing(ControlKind::Vsc, SERVOING_DELTA, 0.5860, None, None),
        "servoing-uvc-d2" => servoing(ControlKind::Uvc, SERVOING_DELTA, 0.4893, Some(3.0), None),
        "rov-vsc" => rov(ControlKind::Vsc, 1.3037, None),
        "rov-uvc" => rov(ControlKind::Uvc, 0.7570, Some(2.0)),
        other => {
            return Err(Error::invalid(format!(
                "unknown case '{other}' (known: {})",
                CASE_IDS.join(", ")
            )))
        }
    })
}

impl ReferenceCase {
    pub fn plant(&self) -> Result<PolytopicPlant<f64>> {
        match self.scenario {
            Scenario::Servoing => make_servoing_plant(SERVOING_PHI_BAR, SERVOING_DELTA_BAR, self.delta),
            Scenario::Rov => make_rov_plant(&RovParams::default(), self.delta),
        }
    }

    /// The disturbance used in simulation: the servoing signal when the
    /// case allows one, zero otherwise.
    pub fn disturbance(&self) -> DisturbanceSpec<f64> {
        match self.scenario {
            Scenario::Servoing if self.delta > 0.0 => DisturbanceSpec::servoing(),
            _ => DisturbanceSpec::zero(self.sigma0.len()),
        }
    }

    pub fn synthesize(&self, opts: &DesignOptions<f64>) -> Result<Certificate<f64>> {
        let plant = self.plant()?;
        match self.kind {
            ControlKind::Vsc => Ok(Certificate::Vsc(synthesize_vsc(
                &plant,
                &self.sigma0,
                Some(self.alpha_u),
                opts,
            )?)),
            ControlKind::Uvc => Ok(Certificate::Uvc(synthesize_uvc(
                &plant,
                &self.sigma0,
                self.rho_range,
                Some(self.alpha_u),
                opts,
            )?)),
        }
    }
}
